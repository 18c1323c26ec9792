//! Domains, uniform collocation sampling and Monte Carlo fill distances.

use std::path::Path;

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;
use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type Point = Vec<f64>;

/// Seeded generator used for every sampling routine.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Domain {
    UnitBall {
        dim: usize,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `Ω × Θ` with boundary `∂Ω × Θ`; `Θ` must be a box.
    Product {
        spatial: std::boxed::Box<Domain>,
        parameter: std::boxed::Box<Domain>,
    },
}

impl Domain {
    pub fn unit_ball(dim: usize) -> Result<Self> {
        let d = Self::UnitBall { dim };
        d.validate()?;
        Ok(d)
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let d = Self::Box { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn product(spatial: Domain, parameter: Domain) -> Result<Self> {
        let d = Self::Product {
            spatial: std::boxed::Box::new(spatial),
            parameter: std::boxed::Box::new(parameter),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::UnitBall { dim } if *dim == 0 => {
                Err(Error::InvalidArgument("ball dimension must be ≥ 1".into()))
            }
            Self::UnitBall { .. } => Ok(()),
            Self::Box { lo, hi } => {
                if lo.is_empty() {
                    return Err(Error::InvalidArgument("box dimension must be ≥ 1".into()));
                }
                check_dim(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::InvalidArgument(
                        "box needs lo < hi per coordinate".into(),
                    ));
                }
                Ok(())
            }
            Self::Product { spatial, parameter } => {
                if matches!(**spatial, Self::Product { .. }) {
                    return Err(Error::InvalidArgument("nested product domains".into()));
                }
                if !matches!(**parameter, Self::Box { .. }) {
                    return Err(Error::InvalidArgument(
                        "parameter domain must be a box".into(),
                    ));
                }
                spatial.validate()?;
                parameter.validate()
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::UnitBall { dim } => *dim,
            Self::Box { lo, .. } => lo.len(),
            Self::Product { spatial, parameter } => spatial.dimension() + parameter.dimension(),
        }
    }

    /// Dimension of the spatial block (the whole domain unless a product).
    pub fn spatial_dimension(&self) -> usize {
        match self {
            Self::Product { spatial, .. } => spatial.dimension(),
            other => other.dimension(),
        }
    }

    /// Whether `x` lies in the open interior.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            Self::UnitBall { .. } => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| l < v && v < h),
            Self::Product { spatial, parameter } => {
                let k = spatial.dimension();
                spatial.contains_interior(&x[..k]) && parameter.contains_closed(&x[k..])
            }
        }
    }

    fn contains_closed(&self, x: &[f64]) -> bool {
        match self {
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| l <= v && v <= h),
            Self::UnitBall { .. } => x.iter().map(|v| v * v).sum::<f64>() <= 1.0,
            Self::Product { .. } => self.contains_interior(x),
        }
    }

    /// Whether `x` lies on the sampled boundary (`∂Ω × Θ` for products).
    pub fn on_boundary(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            Self::UnitBall { .. } => {
                (x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() <= tol
            }
            Self::Box { lo, hi } => {
                self.contains_closed(x)
                    && x.iter()
                        .zip(lo.iter().zip(hi))
                        .any(|(v, (l, h))| (v - l).abs() <= tol || (v - h).abs() <= tol)
            }
            Self::Product { spatial, parameter } => {
                let k = spatial.dimension();
                spatial.on_boundary(&x[..k], tol) && parameter.contains_closed(&x[k..])
            }
        }
    }

    fn sample_interior_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Self::UnitBall { dim } => {
                let start = out.len();
                let mut norm2;
                loop {
                    out.truncate(start);
                    norm2 = 0.0;
                    for _ in 0..*dim {
                        let g: f64 = StandardNormal.sample(rng);
                        norm2 += g * g;
                        out.push(g);
                    }
                    if norm2 > 0.0 {
                        break;
                    }
                }
                let u: f64 = Open01.sample(rng);
                let radius = u.powf(1.0 / *dim as f64) / norm2.sqrt();
                for v in &mut out[start..] {
                    *v *= radius;
                }
            }
            Self::Box { lo, hi } => {
                for (l, h) in lo.iter().zip(hi) {
                    let u: f64 = Open01.sample(rng);
                    out.push(l + (h - l) * u);
                }
            }
            Self::Product { spatial, parameter } => {
                spatial.sample_interior_into(rng, out);
                parameter.sample_interior_into(rng, out);
            }
        }
    }

    fn sample_boundary_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Self::UnitBall { dim: 1 } => out.push(if rng.random::<bool>() { 1.0 } else { -1.0 }),
            Self::UnitBall { dim } => {
                let start = out.len();
                loop {
                    out.truncate(start);
                    let mut norm2 = 0.0;
                    for _ in 0..*dim {
                        let g: f64 = StandardNormal.sample(rng);
                        norm2 += g * g;
                        out.push(g);
                    }
                    if norm2 > 0.0 {
                        let inv = 1.0 / norm2.sqrt();
                        for v in &mut out[start..] {
                            *v *= inv;
                        }
                        break;
                    }
                }
            }
            Self::Box { lo, hi } => {
                let d = lo.len();
                // face pair i has area ∏_{j≠i}(hⱼ − lⱼ)
                let areas: Vec<f64> = (0..d)
                    .map(|i| {
                        (0..d)
                            .filter(|&j| j != i)
                            .map(|j| hi[j] - lo[j])
                            .product::<f64>()
                    })
                    .collect();
                let total: f64 = areas.iter().sum();
                let mut pick = rng.random::<f64>() * total;
                let mut face = d - 1;
                for (i, a) in areas.iter().enumerate() {
                    if pick < *a {
                        face = i;
                        break;
                    }
                    pick -= a;
                }
                let upper = rng.random::<bool>();
                for i in 0..d {
                    if i == face {
                        out.push(if upper { hi[i] } else { lo[i] });
                    } else {
                        let u: f64 = Open01.sample(rng);
                        out.push(lo[i] + (hi[i] - lo[i]) * u);
                    }
                }
            }
            Self::Product { spatial, parameter } => {
                spatial.sample_boundary_into(rng, out);
                parameter.sample_interior_into(rng, out);
            }
        }
    }
}

/// `m` i.i.d. points uniform in the interior of `dom`.
pub fn sample_interior(dom: &Domain, m: usize, seed: u64) -> Vec<Point> {
    let mut rng = rng_from_seed(seed);
    sample_interior_with(dom, m, &mut rng)
}

pub fn sample_interior_with<R: Rng>(dom: &Domain, m: usize, rng: &mut R) -> Vec<Point> {
    (0..m)
        .map(|_| {
            let mut p = Vec::with_capacity(dom.dimension());
            dom.sample_interior_into(rng, &mut p);
            p
        })
        .collect()
}

/// `m` i.i.d. points uniform on the boundary with respect to surface measure.
pub fn sample_boundary(dom: &Domain, m: usize, seed: u64) -> Vec<Point> {
    let mut rng = rng_from_seed(seed);
    sample_boundary_with(dom, m, &mut rng)
}

pub fn sample_boundary_with<R: Rng>(dom: &Domain, m: usize, rng: &mut R) -> Vec<Point> {
    (0..m)
        .map(|_| {
            let mut p = Vec::with_capacity(dom.dimension());
            dom.sample_boundary_into(rng, &mut p);
            p
        })
        .collect()
}

/// Interior and boundary collocation points of one draw.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    pub interior: Vec<Point>,
    pub boundary: Vec<Point>,
    pub seed: u64,
}

impl CollocationSet {
    /// Interior and boundary points drawn from one seeded stream.
    pub fn sample(dom: &Domain, m_interior: usize, m_boundary: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let interior = sample_interior_with(dom, m_interior, &mut rng);
        let boundary = sample_boundary_with(dom, m_boundary, &mut rng);
        Self {
            interior,
            boundary,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interior points followed by boundary points.
    pub fn all_points(&self) -> impl Iterator<Item = &Point> {
        self.interior.iter().chain(&self.boundary)
    }
}

fn max_nearest_distance(points: &[Point], probes: &[Point]) -> Result<f64> {
    let first = points.first().ok_or(Error::EmptyPointSet)?;
    let d = first.len();
    let mut tree: KdTree<f64, usize, &[f64]> = KdTree::with_capacity(d, points.len());
    for (i, p) in points.iter().enumerate() {
        check_dim(d, p.len())?;
        tree.add(p.as_slice(), i)
            .map_err(|e| Error::InvalidArgument(format!("kd-tree insert: {e:?}")))?;
    }
    let best = probes
        .par_chunks(4096)
        .map(|chunk| {
            chunk.iter().fold(0.0_f64, |acc, q| {
                let nearest = tree
                    .nearest(q, 1, &squared_euclidean)
                    .ok()
                    .and_then(|v| v.first().map(|(dist, _)| *dist))
                    .unwrap_or(f64::INFINITY);
                acc.max(nearest)
            })
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.sqrt())
}

/// Monte Carlo estimate of `sup_{x ∈ Ω} min_i |x − xᵢ|` with `probes` uniform
/// interior probe points.
pub fn fill_distance_estimate(
    points: &[Point],
    dom: &Domain,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        check_dim(dom.dimension(), p.len())?;
    }
    let probe_points = sample_interior(dom, probes.max(1), seed);
    max_nearest_distance(points, &probe_points)
}

/// Boundary counterpart of [`fill_distance_estimate`], using chordal distance.
pub fn boundary_fill_distance_estimate(
    points: &[Point],
    dom: &Domain,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        check_dim(dom.dimension(), p.len())?;
    }
    let probe_points = sample_boundary(dom, probes.max(1), seed);
    max_nearest_distance(points, &probe_points)
}

/// One point per row, comma separated, no header.
pub fn write_points_csv(path: impl AsRef<Path>, points: &[Point]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for p in points {
        w.write_record(p.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv(path: impl AsRef<Path>) -> Result<Vec<Point>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad coordinate `{f}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sampling_is_reproducible_and_inside() {
        let dom = Domain::cube(1, 0.0, 1.0).unwrap();
        let a = sample_interior(&dom, 3, 7);
        let b = sample_interior(&dom, 3, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p[0] > 0.0 && p[0] < 1.0));
        assert_ne!(a, sample_interior(&dom, 3, 8));
    }

    #[test]
    fn ball_interior_mean_near_origin() {
        let dom = Domain::unit_ball(2).unwrap();
        let pts = sample_interior(&dom, 10_000, 1);
        assert!(pts.iter().all(|p| dom.contains_interior(p)));
        let mean: Vec<f64> = (0..2)
            .map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64)
            .collect();
        assert!(
            mean.iter().map(|m| m * m).sum::<f64>().sqrt() < 0.05,
            "{mean:?}"
        );
    }

    #[test]
    fn product_interior_containment() {
        let dom = Domain::product(
            Domain::unit_ball(1).unwrap(),
            Domain::cube(2, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let pts = sample_interior(&dom, 5, 3);
        for p in &pts {
            assert_eq!(p.len(), 3);
            assert!(p[0] > -1.0 && p[0] < 1.0);
            assert!(p[1..].iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn ball_boundary_points_have_unit_norm() {
        let dom = Domain::unit_ball(2).unwrap();
        for p in sample_boundary(&dom, 100, 4) {
            let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= 1e-12);
        }
        let dom3 = Domain::unit_ball(3).unwrap();
        let pts = sample_boundary(&dom3, 20_000, 5);
        let mean: Vec<f64> = (0..3)
            .map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64)
            .collect();
        assert!(mean.iter().map(|m| m * m).sum::<f64>().sqrt() <= 0.03);
    }

    #[test]
    fn one_dimensional_ball_boundary_is_two_points() {
        let dom = Domain::unit_ball(1).unwrap();
        let pts = sample_boundary(&dom, 200, 9);
        assert!(pts.iter().all(|p| p[0] == 1.0 || p[0] == -1.0));
        let ups = pts.iter().filter(|p| p[0] == 1.0).count();
        assert!(ups > 60 && ups < 140);
    }

    #[test]
    fn product_boundary_sits_on_spatial_faces() {
        let dom = Domain::product(
            Domain::cube(1, 0.0, 1.0).unwrap(),
            Domain::cube(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        for p in sample_boundary(&dom, 4, 2) {
            assert!(p[0] == 0.0 || p[0] == 1.0);
            assert!(dom.on_boundary(&p, 0.0));
        }
    }

    #[test]
    fn box_boundary_uniform_over_faces() {
        // a 2 × 1 rectangle: long faces (x₁ fixed) carry 2/3 of the perimeter
        let dom = Domain::boxed(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let pts = sample_boundary(&dom, 30_000, 11);
        assert!(pts.iter().all(|p| dom.on_boundary(p, 0.0)));
        let long = pts.iter().filter(|p| p[1] == 0.0 || p[1] == 1.0).count() as f64 / 30_000.0;
        assert!((long - 2.0 / 3.0).abs() < 0.02, "{long}");
    }

    #[test]
    fn fill_distance_of_center_point() {
        let dom = Domain::unit_ball(1).unwrap();
        let h = fill_distance_estimate(&[vec![0.0]], &dom, 100_000, 3).unwrap();
        assert!(h >= 0.99 && h <= 1.0);
    }

    #[test]
    fn fill_distance_of_grid() {
        let dom = Domain::cube(1, 0.0, 1.0).unwrap();
        let g = 0.01;
        let grid: Vec<Point> = (0..=100).map(|i| vec![i as f64 * g]).collect();
        let h = fill_distance_estimate(&grid, &dom, 100_000, 1).unwrap();
        assert!(h <= 0.6 * g, "{h}");
    }

    #[test]
    fn fill_distance_monotone_under_inclusion() {
        let dom = Domain::unit_ball(2).unwrap();
        let pts = sample_interior(&dom, 400, 12);
        let mut prev = f64::INFINITY;
        for m in [10, 50, 100, 200, 400] {
            let h = fill_distance_estimate(&pts[..m], &dom, 20_000, 99).unwrap();
            assert!(h <= prev);
            prev = h;
        }
    }

    #[test]
    fn empty_point_set_is_an_error() {
        let dom = Domain::unit_ball(2).unwrap();
        assert!(matches!(
            fill_distance_estimate(&[], &dom, 10, 0),
            Err(Error::EmptyPointSet)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.csv");
        let pts = sample_interior(&Domain::unit_ball(3).unwrap(), 7, 0);
        write_points_csv(&path, &pts).unwrap();
        assert_eq!(read_points_csv(&path).unwrap(), pts);
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::unit_ball(0).is_err());
        assert!(Domain::boxed(vec![0.0], vec![0.0]).is_err());
        assert!(
            Domain::product(Domain::unit_ball(1).unwrap(), Domain::unit_ball(1).unwrap()).is_err()
        );
    }
}
