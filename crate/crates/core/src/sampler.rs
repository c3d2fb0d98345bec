//! Exact path simulation.
//!
//! Standard max-stable paths use the spectral series
//! `η_t = -1 / max_k Z_t^{(k)} / Γ_k` with `Γ_k` the arrival times of a unit
//! Poisson process. For a generator bounded by `c` the series is stopped as
//! soon as `c / Γ_k` drops below the smallest running maximum, after which no
//! later term can change any coordinate.
//!
//! Generalized Pareto paths use `V_t = max(-U / Z_t, -M)` with
//! `U ~ U(0, 1)` independent of the generator and a censor floor `M > c`.

use rand::Rng;
use rand_distr::{Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generator::{GeneratorDraw, GeneratorModel};
use crate::maxlinear::Grid;
use crate::seeding::{path_rng, streams, PathRng};

/// Default SGPP censor floor `M`.
pub const DEFAULT_FLOOR: f64 = 1e6;

/// Default number of equispaced points of the fine simulation grid.
pub const DEFAULT_FINE_POINTS: usize = 513;

/// Points match when they agree to this absolute tolerance.
pub const POINT_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Smsp,
    Sgpp,
}

impl ProcessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Smsp => "smsp",
            Self::Sgpp => "sgpp",
        }
    }
}

/// `n` equispaced points on `[0, 1]`.
pub fn fine_points(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|j| j as f64 / (n - 1) as f64).collect(),
    }
}

/// A simulated path on a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProcessKind,
    pub seed: u64,
}

/// Grid-point restriction of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ObservationVector {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if grid.points().len() != values.len() {
            return Err(Error::DimensionMismatch { expected: grid.points().len(), actual: values.len() });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(Self { grid, values })
    }
}

/// Controls for the spectral series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeriesOptions {
    /// Forces at least this many series terms even after the stopping rule
    /// has fired. Sampled values do not depend on it.
    pub min_terms: usize,
}

/// Fills `out` with one exact SMSP draw; returns the number of terms used.
pub fn smsp_draw<G: GeneratorDraw + ?Sized>(
    gen: &G,
    rng: &mut PathRng,
    opts: SeriesOptions,
    scratch: &mut [f64],
    out: &mut [f64],
) -> Result<usize> {
    let c = gen.bound().ok_or(Error::UnboundedGenerator)?;
    let n = gen.n_points();
    if n == 0 {
        return Ok(0);
    }
    let (z, w) = (&mut scratch[..n], &mut out[..n]);
    w.fill(0.0);
    let mut gamma = 0.0f64;
    let mut min_w = 0.0f64;
    let mut terms = 0usize;
    loop {
        let e: f64 = rng.sample(Exp1);
        gamma += e;
        if min_w > 0.0 && c / gamma < min_w && terms >= opts.min_terms {
            break;
        }
        gen.draw(rng, z);
        let inv = 1.0 / gamma;
        min_w = f64::INFINITY;
        for (wj, zj) in w.iter_mut().zip(z.iter()) {
            let cand = zj * inv;
            if cand > *wj {
                *wj = cand;
            }
            min_w = min_w.min(*wj);
        }
        terms += 1;
    }
    for wj in w.iter_mut() {
        *wj = -1.0 / *wj;
    }
    Ok(terms)
}

/// Fills `out` with one SGPP draw `max(-U / Z_t, -floor)`.
pub fn sgpp_draw<G: GeneratorDraw + ?Sized>(gen: &G, rng: &mut PathRng, floor: f64, out: &mut [f64]) {
    let n = gen.n_points();
    let u: f64 = rng.sample(Open01);
    gen.draw(rng, &mut out[..n]);
    for v in out[..n].iter_mut() {
        // Z = 0 gives -inf, censored to -floor.
        *v = (-u / *v).max(-floor);
    }
}

fn check_floor(model_bound: Option<f64>, floor: f64) -> Result<()> {
    let c = model_bound.ok_or(Error::UnboundedGenerator)?;
    if !(floor > c) || !floor.is_finite() {
        return Err(invalid("floor", format!("censor floor {floor} must exceed the generator bound {c}")));
    }
    Ok(())
}

/// Exact SMSP path at `points`.
pub fn simulate_smsp(model: &GeneratorModel, points: &[f64], seed: u64) -> Result<PathSample> {
    simulate_smsp_with(model, points, seed, SeriesOptions::default())
}

pub fn simulate_smsp_with(
    model: &GeneratorModel,
    points: &[f64],
    seed: u64,
    opts: SeriesOptions,
) -> Result<PathSample> {
    let gen = model.prepare(points)?;
    let mut values = vec![0.0; points.len()];
    let mut scratch = vec![0.0; points.len()];
    smsp_draw(&gen, &mut path_rng(seed, streams::SMSP, 0), opts, &mut scratch, &mut values)?;
    Ok(PathSample { points: points.to_vec(), values, kind: ProcessKind::Smsp, seed })
}

/// SGPP path at `points` with censor floor `floor`.
pub fn simulate_sgpp(model: &GeneratorModel, points: &[f64], seed: u64, floor: f64) -> Result<PathSample> {
    let gen = model.prepare(points)?;
    check_floor(gen.bound(), floor)?;
    let mut values = vec![0.0; points.len()];
    sgpp_draw(&gen, &mut path_rng(seed, streams::SGPP, 0), floor, &mut values);
    Ok(PathSample { points: points.to_vec(), values, kind: ProcessKind::Sgpp, seed })
}

/// Seed of path `path_id` in a batch under `base_seed`.
pub fn batch_path_seed(base_seed: u64, path_id: u64) -> u64 {
    crate::seeding::derive_seed(base_seed, 0, path_id)
}

/// `n_paths` paths, path `i` simulated from `batch_path_seed(base_seed, i)`.
///
/// Output order is by path id and independent of the thread count.
pub fn simulate_batch(
    model: &GeneratorModel,
    points: &[f64],
    kind: ProcessKind,
    base_seed: u64,
    n_paths: usize,
    floor: f64,
) -> Result<Vec<PathSample>> {
    let gen = model.prepare(points)?;
    if kind == ProcessKind::Sgpp {
        check_floor(gen.bound(), floor)?;
    } else if gen.bound().is_none() {
        return Err(Error::UnboundedGenerator);
    }
    Ok(crate::parallel::map_indexed(n_paths, |i| {
        let seed = batch_path_seed(base_seed, i as u64);
        let mut values = vec![0.0; points.len()];
        match kind {
            ProcessKind::Smsp => {
                let mut scratch = vec![0.0; points.len()];
                smsp_draw(
                    &gen,
                    &mut path_rng(seed, streams::SMSP, 0),
                    SeriesOptions::default(),
                    &mut scratch,
                    &mut values,
                )
                .expect("bound checked");
            }
            ProcessKind::Sgpp => sgpp_draw(&gen, &mut path_rng(seed, streams::SGPP, 0), floor, &mut values),
        }
        PathSample { points: points.to_vec(), values, kind, seed }
    }))
}

/// Draws of the generator itself along `points`, one per path id.
pub fn generator_batch(
    model: &GeneratorModel,
    points: &[f64],
    base_seed: u64,
    n_paths: usize,
) -> Result<Vec<Vec<f64>>> {
    let gen = model.prepare(points)?;
    Ok(crate::parallel::map_indexed(n_paths, |i| {
        let mut z = vec![0.0; points.len()];
        gen.draw(&mut path_rng(batch_path_seed(base_seed, i as u64), streams::GENERATOR, 0), &mut z);
        z
    }))
}

/// Index of `t` in `points`, matched to [`POINT_MATCH_TOL`].
pub fn find_point(points: &[f64], t: f64) -> Option<usize> {
    let i = points.partition_point(|&p| p < t - POINT_MATCH_TOL);
    (i < points.len() && (points[i] - t).abs() <= POINT_MATCH_TOL).then_some(i)
}

/// Restricts a path to the points of `grid`.
pub fn restrict(path: &PathSample, grid: &Grid) -> Result<ObservationVector> {
    let values = grid
        .points()
        .iter()
        .map(|&s| find_point(&path.points, s).map(|i| path.values[i]).ok_or(Error::MissingGridPoint(s)))
        .collect::<Result<Vec<_>>>()?;
    ObservationVector::new(grid.clone(), values)
}
