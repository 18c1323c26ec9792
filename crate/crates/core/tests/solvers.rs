mod common;

use std::sync::Arc;

use common::rng;
use kernel_colloc::geometry::{sample_interior, Domain};
use kernel_colloc::harness::{rms, rms_diff};
use kernel_colloc::problems::{
    make_interpolation, make_nonlinear_elliptic, make_parametric_darcy, Combiner, ScalarFn,
};
use kernel_colloc::solver::{solve_gn_eliminate, solve_gn_relaxed, solve_lto};
use kernel_colloc::{
    solve, CollocationSet, DualFunctional, Error, KernelFamily, KernelSpec, Solution, SolverConfig,
    SolverVariant,
};
use rand::Rng;

fn matern72(d: usize) -> KernelSpec {
    KernelSpec::isotropic(
        KernelFamily::Matern { nu: 3.5 },
        d,
        0.25 * (d as f64).sqrt(),
    )
    .unwrap()
}

fn darcy_kernel(p: usize) -> KernelSpec {
    KernelSpec::isotropic(KernelFamily::Gaussian, p + 2, 0.5).unwrap()
}

fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den
}

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

#[test]
fn linear_problem_converges_in_one_step() {
    let prob = make_parametric_darcy(2, 3.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 150, 15, 3);
    let k = darcy_kernel(2);
    let pts = sample_interior(&prob.domain, 100, 77);
    let one = solve_lto(
        &prob,
        &colloc,
        &k,
        &SolverConfig {
            max_iters: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let two = solve_lto(
        &prob,
        &colloc,
        &k,
        &SolverConfig {
            max_iters: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let (a, b) = (one.evaluate(&pts).unwrap(), two.evaluate(&pts).unwrap());
    assert!(rel_linf(&b, &a) < 1e-10, "{}", rel_linf(&b, &a));
}

#[test]
fn elliptic_residual_after_three_iterations() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 1000, 200, 0);
    let sol = solve_lto(&prob, &colloc, &matern72(2), &SolverConfig::default()).unwrap();
    let res = sol.pde_residual(&prob, &colloc).unwrap();
    let interior = res[..1000].iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    assert!(interior < 1e-5, "max interior residual {interior:.3e}");
}

#[test]
fn finer_collocation_lowers_test_error() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let u = prob.true_solution.clone().unwrap();
    let pts = sample_interior(&prob.domain, 500, 5);
    let exact: Vec<f64> = pts.iter().map(|p| u.value(p)).collect();
    let err = |m: usize| {
        let colloc = CollocationSet::sample(&prob.domain, m, m / 5, 1);
        let sol = solve(&prob, &colloc, &matern72(2), &SolverConfig::default()).unwrap();
        rms_diff(&sol.evaluate(&pts).unwrap(), &exact)
    };
    assert!(err(400) < err(100));
}

#[test]
fn relaxed_gauss_newton_matches_lto_on_linear_problem() {
    let prob = make_parametric_darcy(2, 3.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 120, 12, 9);
    let k = darcy_kernel(2);
    let pts = sample_interior(&prob.domain, 100, 8);
    let lto = solve_lto(&prob, &colloc, &k, &SolverConfig::default()).unwrap();
    let gn = solve_gn_relaxed(
        &prob,
        &colloc,
        &k,
        &SolverConfig::with_variant(SolverVariant::GnRelaxed { beta_relax: 1e-6 }),
    )
    .unwrap();
    let (a, b) = (gn.evaluate(&pts).unwrap(), lto.evaluate(&pts).unwrap());
    assert!(rel_linf(&a, &b) < 1e-4, "{}", rel_linf(&a, &b));
}

#[test]
fn relaxed_gauss_newton_interpolates() {
    let dom = Domain::unit_ball(2).unwrap();
    let target: ScalarFn = Arc::new(|s: &[f64]| (2.0 * s[0]).sin() + s[1]);
    let prob = make_interpolation(dom, target.clone()).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 40, 10, 2);
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 2, 0.3).unwrap();
    let cfg = SolverConfig {
        max_iters: 1,
        ..SolverConfig::with_variant(SolverVariant::GnRelaxed { beta_relax: 1e-8 })
    };
    let sol = solve_gn_relaxed(&prob, &colloc, &k, &cfg).unwrap();
    let nodes: Vec<Vec<f64>> = colloc.all_points().cloned().collect();
    let got = sol.evaluate(&nodes).unwrap();
    let want: Vec<f64> = nodes.iter().map(|p| target(p)).collect();
    assert!(rel_linf(&got, &want) < 1e-6, "{}", rel_linf(&got, &want));
}

#[test]
fn relaxed_gauss_newton_residual_decreases() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 300, 60, 4);
    let cfg = SolverConfig::with_variant(SolverVariant::GnRelaxed { beta_relax: 1e-6 });
    let sol = solve_gn_relaxed(&prob, &colloc, &matern72(2), &cfg).unwrap();
    let r: Vec<f64> = sol.history().iter().map(|h| h.residual_norm).collect();
    assert_eq!(r.len(), 3);
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
}

#[test]
fn eliminated_gauss_newton_matches_lto_on_linear_problem() {
    let prob = make_parametric_darcy(2, 3.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 120, 12, 10);
    let k = darcy_kernel(2);
    let pts = sample_interior(&prob.domain, 100, 11);
    let lto = solve_lto(&prob, &colloc, &k, &SolverConfig::default()).unwrap();
    let gn = solve_gn_eliminate(
        &prob,
        &colloc,
        &k,
        &SolverConfig::with_variant(SolverVariant::GnEliminate),
    )
    .unwrap();
    let (a, b) = (gn.evaluate(&pts).unwrap(), lto.evaluate(&pts).unwrap());
    assert!(rel_linf(&a, &b) < 1e-6, "{}", rel_linf(&a, &b));
}

#[test]
fn eliminated_gauss_newton_matches_lto_on_elliptic_problem() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 300, 60, 12);
    let k = matern72(2);
    let pts = sample_interior(&prob.domain, 100, 13);
    let converged = SolverConfig {
        max_iters: 10,
        ..Default::default()
    };
    let lto = solve_lto(&prob, &colloc, &k, &converged).unwrap();
    let gn = solve_gn_eliminate(
        &prob,
        &colloc,
        &k,
        &SolverConfig {
            variant: SolverVariant::GnEliminate,
            ..converged
        },
    )
    .unwrap();
    let (a, b) = (gn.evaluate(&pts).unwrap(), lto.evaluate(&pts).unwrap());
    assert!(rel_linf(&a, &b) < 1e-4, "{}", rel_linf(&a, &b));
}

#[test]
fn elimination_requires_an_elimination_map() {
    let dom = Domain::unit_ball(2).unwrap();
    let mut prob = make_interpolation(dom, Arc::new(|s: &[f64]| s[0])).unwrap();
    assert!(prob.has_elimination());
    prob.combiner_p = Combiner::Custom {
        arity: 1,
        value: Arc::new(|t: &[f64]| t[0].sinh()),
        gradient: Arc::new(|t: &[f64]| vec![t[0].cosh()]),
    };
    let colloc = CollocationSet::sample(&prob.domain, 5, 2, 0);
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 2, 1.0).unwrap();
    let err = solve_gn_eliminate(
        &prob,
        &colloc,
        &k,
        &SolverConfig::with_variant(SolverVariant::GnEliminate),
    );
    assert!(matches!(err, Err(Error::UnsupportedVariant(_))), "{err:?}");
}

#[test]
fn single_interior_point_toy() {
    // One interior and one boundary point: a rank-2 system solvable by hand
    // through the dense oracle.
    let prob = make_nonlinear_elliptic(1, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 1, 1, 3);
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 1, 0.8).unwrap();
    let cfg = SolverConfig {
        max_iters: 20,
        convergence_tol: 1e-13,
        ..SolverConfig::with_variant(SolverVariant::GnEliminate)
    };
    let gn = solve_gn_eliminate(&prob, &colloc, &k, &cfg).unwrap();
    let res = gn.pde_residual(&prob, &colloc).unwrap();
    assert!(rms(&res) < 1e-8, "{res:?}");
    let lto = solve_lto(
        &prob,
        &colloc,
        &k,
        &SolverConfig {
            max_iters: 20,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((gn.rkhs_norm() - lto.rkhs_norm()).abs() < 1e-6 * lto.rkhs_norm());
}

#[test]
fn single_point_evaluation_reproduces_target() {
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 2, 1.0).unwrap();
    let eta = 1e-10;
    let s = vec![0.2, 0.1];
    let sol = Solution::interpolate(
        &k,
        vec![DualFunctional::point_eval(s.clone())],
        vec![3.0],
        eta,
    )
    .unwrap();
    let v = sol.evaluate(&[s]).unwrap()[0];
    assert!((v - 3.0).abs() < 3.0 * eta * 10.0);
    assert!((sol.rkhs_norm() - 3.0 / (1.0 + eta).sqrt()).abs() < 1e-14);
}

#[test]
fn far_field_is_bounded_by_coefficients() {
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 2, 0.5).unwrap();
    let mut r = rng(4);
    let phis: Vec<_> = (0..20)
        .map(|_| {
            DualFunctional::point_eval(vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)])
        })
        .collect();
    let targets: Vec<f64> = (0..20).map(|_| r.random_range(-1.0..1.0)).collect();
    let sol = Solution::interpolate(&k, phis, targets, 1e-10).unwrap();
    let far = vec![6.0, 6.0];
    let tail = (-0.5 * (5.0f64 * 5.0 * 2.0) / 0.25).exp();
    let bound: f64 = sol.coefficients().iter().map(|c| c.abs()).sum::<f64>() * tail;
    assert!(sol.evaluate(&[far]).unwrap()[0].abs() <= bound);
}

#[test]
fn evaluation_and_norm_match_dense_oracle() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 20, 5, 6);
    let k = matern72(2);
    let sol = solve_lto(&prob, &colloc, &k, &SolverConfig::default()).unwrap();
    let phis = sol.functionals();
    let eta = sol.nugget();
    let n = phis.len();
    let mut gram = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            gram[a][b] = k.eval_pair(&phis[a], &phis[b]).unwrap();
        }
    }
    for a in 0..n {
        gram[a][a] *= 1.0 + eta;
    }
    let c = dense_solve(gram, sol.targets().to_vec());
    let pts = sample_interior(&prob.domain, 30, 7);
    let got = sol.evaluate(&pts).unwrap();
    for (p, g) in pts.iter().zip(&got) {
        let row = k.cross_row(p, phis).unwrap();
        let want: f64 = row.iter().zip(&c).map(|(x, y)| x * y).sum();
        assert!(
            (g - want).abs() < 1e-8 * want.abs().max(1.0),
            "{g} vs {want}"
        );
    }
    let norm2: f64 = sol.targets().iter().zip(&c).map(|(z, c)| z * c).sum();
    assert!((sol.rkhs_norm() - norm2.sqrt()).abs() < 1e-8 * norm2.sqrt());
}

#[test]
fn norm_against_explicit_inverse_on_small_systems() {
    let mut r = rng(14);
    for _ in 0..20 {
        let k = KernelSpec::isotropic(KernelFamily::Matern { nu: 2.5 }, 3, 0.8).unwrap();
        let phis: Vec<_> = (0..5)
            .map(|_| {
                DualFunctional::point_eval((0..3).map(|_| r.random_range(-1.0..1.0)).collect())
            })
            .collect();
        let z: Vec<f64> = (0..5).map(|_| r.random_range(-2.0..2.0)).collect();
        let sol = Solution::interpolate(&k, phis.clone(), z.clone(), 1e-10).unwrap();
        let gram: Vec<Vec<f64>> = (0..5)
            .map(|a| {
                (0..5)
                    .map(|b| {
                        let v = k.eval_pair(&phis[a], &phis[b]).unwrap();
                        if a == b {
                            v * (1.0 + 1e-10)
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let c = dense_solve(gram, z.clone());
        let want = z.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>().sqrt();
        assert!((sol.rkhs_norm() - want).abs() < 1e-10 * want.max(1.0));
    }
    let k = KernelSpec::isotropic(KernelFamily::Gaussian, 1, 1.0).unwrap();
    let zero = Solution::interpolate(
        &k,
        vec![DualFunctional::point_eval(vec![0.0])],
        vec![0.0],
        1e-10,
    )
    .unwrap();
    assert_eq!(zero.rkhs_norm(), 0.0);
}

#[test]
fn linear_constraints_hold_to_nugget_level() {
    let mut r = rng(15);
    for trial in 0..5 {
        let m = r.random_range(20..150);
        let prob = make_parametric_darcy(1, 3.0).unwrap();
        let colloc = CollocationSet::sample(&prob.domain, m, m / 10 + 2, trial);
        let k = KernelSpec::isotropic(KernelFamily::Matern { nu: 2.5 }, 3, 0.3).unwrap();
        let sol = solve(&prob, &colloc, &k, &SolverConfig::default()).unwrap();
        let res = sol.pde_residual(&prob, &colloc).unwrap();
        let worst = res.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(worst < 1e-6, "M={m}: {worst:.3e}");
    }
}

#[test]
fn iteration_three_not_worse_than_iteration_one() {
    for prob in [
        make_nonlinear_elliptic(2, 1.0).unwrap(),
        kernel_colloc::problems::make_darcy_tanh(2, 1.0).unwrap(),
    ] {
        let colloc = CollocationSet::sample(&prob.domain, 200, 40, 1);
        let sol = solve(&prob, &colloc, &matern72(2), &SolverConfig::default()).unwrap();
        let h = sol.history();
        assert!(
            h[2].residual_norm <= h[0].residual_norm,
            "{}: {h:?}",
            prob.name
        );
    }
}

#[test]
fn step_size_other_than_one_needs_gauss_newton() {
    let prob = make_nonlinear_elliptic(2, 1.0).unwrap();
    let colloc = CollocationSet::sample(&prob.domain, 30, 10, 1);
    let cfg = SolverConfig {
        step_size: 0.5,
        ..Default::default()
    };
    assert!(solve_lto(&prob, &colloc, &matern72(2), &cfg).is_err());
    let gn = SolverConfig {
        step_size: 0.5,
        backtracking: true,
        ..SolverConfig::with_variant(SolverVariant::GnRelaxed { beta_relax: 1e-6 })
    };
    assert!(solve(&prob, &colloc, &matern72(2), &gn).is_ok());
}
