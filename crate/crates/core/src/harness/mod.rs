//! Experiment drivers: configuration, execution, CSV and manifest output.

pub mod config;
pub mod convergence;
pub mod darcy;
pub mod filldist;
pub mod hjb_run;
pub mod output;
pub mod stats;

pub use config::{
    config_hash, load_json, DarcyOptions, ExperimentConfig, FillDistConfig, HjbRunConfig,
    KernelConfig, ProblemSpec, HJB_REFERENCE_VALUE,
};
pub use convergence::{
    run_convergence, slopes_from_rows, ConvergenceReport, ConvergenceRow, SlopeRow, TimingRow,
};
pub use darcy::{
    darcy_kernel, reference_darcy_1d, reference_values, run_param_darcy, DarcyKernel,
    DarcyReference, DarcyReport, SelectionRow,
};
pub use filldist::{
    fill_slopes_from_rows, run_filldist_study, FillDistReport, FillDistRow, FillSlopeRow,
};
pub use hjb_run::{run_hjb, HjbReport, HjbRow};
pub use output::{read_rows, write_rows, CellRecord, CellStatus, Manifest};
pub use stats::{fit_slope, median, rms, rms_diff, SlopeFit};
