//! Monte-Carlo experiments: sup-norm reconstruction errors along grid
//! sequences and simulated (conditional) mean squared errors of the
//! discretized predictors.
//!
//! Every draw is seeded from `(base_seed, draw index)` alone and results are
//! merged in index order, so outputs do not depend on the number of threads.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generator::{GeneratorDraw, GeneratorModel};
use crate::maxlinear::{generator_cell, reconstruct_cell, CellWeights, Grid, WeightFamily};
use crate::sampler::{batch_path_seed, find_point, sgpp_draw, smsp_draw, SeriesOptions};
use crate::seeding::{path_rng, streams};
use crate::stats::{mean_and_se, median_and_q90};

const CHUNK: usize = 4096;

/// Runs `f` over `0..n` in fixed chunks and concatenates the results in order.
fn chunked<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> Vec<T> + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    crate::parallel::map_indexed(chunks, |c| f(c * CHUNK..((c + 1) * CHUNK).min(n))).into_iter().flatten().collect()
}

/// Which process a convergence sweep reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Smsp,
    Sgpp,
    Generator,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Smsp, Target::Sgpp, Target::Generator];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Smsp => "smsp",
            Self::Sgpp => "sgpp",
            Self::Generator => "generator",
        }
    }

    fn stream(&self) -> u64 {
        match self {
            Self::Smsp => streams::SMSP,
            Self::Sgpp => streams::SGPP,
            Self::Generator => streams::GENERATOR,
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub d: usize,
    pub median_sup_error: f64,
    pub q90_sup_error: f64,
}

struct Level {
    grid_index: Vec<usize>,
    weights: Vec<CellWeights>,
}

fn level(model: &GeneratorModel, fine: &[f64], d: usize) -> Result<Level> {
    let grid = Grid::uniform(d)?;
    let grid_index = grid
        .points()
        .iter()
        .map(|&s| find_point(fine, s).ok_or(Error::MissingGridPoint(s)))
        .collect::<Result<Vec<_>>>()?;
    let weights = WeightFamily::for_generator(grid, model)?.tabulate(fine)?;
    Ok(Level { grid_index, weights })
}

/// `sup_t |X̂_t - X_t|` over `fine` for every `d` (uniform grids) and path;
/// `result[k][i]` belongs to `ds[k]` and path `i`.
pub fn sup_errors(
    model: &GeneratorModel,
    fine: &[f64],
    ds: &[usize],
    target: Target,
    n_paths: usize,
    base_seed: u64,
    floor: f64,
) -> Result<Vec<Vec<f64>>> {
    let gen = model.prepare(fine)?;
    if target == Target::Sgpp {
        let c = gen.bound().ok_or(Error::UnboundedGenerator)?;
        if !(floor > c) {
            return Err(invalid("floor", format!("censor floor {floor} must exceed the generator bound {c}")));
        }
    }
    let levels = ds.iter().map(|&d| level(model, fine, d)).collect::<Result<Vec<_>>>()?;
    let per_path = crate::parallel::map_indexed(n_paths, |i| -> Result<Vec<f64>> {
        let mut rng = path_rng(batch_path_seed(base_seed, i as u64), target.stream(), 0);
        let mut x = vec![0.0; fine.len()];
        match target {
            Target::Smsp => {
                let mut scratch = vec![0.0; fine.len()];
                smsp_draw(&gen, &mut rng, SeriesOptions::default(), &mut scratch, &mut x)?;
            }
            Target::Sgpp => sgpp_draw(&gen, &mut rng, floor, &mut x),
            Target::Generator => gen.draw(&mut rng, &mut x),
        }
        Ok(levels
            .iter()
            .map(|lv| {
                x.iter()
                    .zip(&lv.weights)
                    .map(|(&truth, cw)| {
                        let (l, r) = (x[lv.grid_index[cw.cell - 1]], x[lv.grid_index[cw.cell]]);
                        let est = match target {
                            Target::Generator => generator_cell(l, r, cw),
                            _ => reconstruct_cell(l, r, cw),
                        };
                        if est == truth {
                            0.0
                        } else {
                            (est - truth).abs()
                        }
                    })
                    .fold(0.0, f64::max)
            })
            .collect())
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..ds.len()).map(|k| per_path.iter().map(|p| p[k]).collect()).collect())
}

/// Median and 90% quantile of the sup-errors for each `d`.
pub fn convergence(
    model: &GeneratorModel,
    fine: &[f64],
    ds: &[usize],
    target: Target,
    n_paths: usize,
    base_seed: u64,
    floor: f64,
) -> Result<Vec<ConvergenceRow>> {
    if n_paths == 0 {
        return Err(invalid("n_paths", "must be at least 1"));
    }
    let errs = sup_errors(model, fine, ds, target, n_paths, base_seed, floor)?;
    Ok(ds
        .iter()
        .zip(errs)
        .map(|(&d, e)| {
            let (median_sup_error, q90_sup_error) = median_and_q90(&e);
            ConvergenceRow { d, median_sup_error, q90_sup_error }
        })
        .collect())
}

/// A Monte-Carlo mean with its standard error over `n` contributing draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let (mean, std_error) = mean_and_se(values.iter().copied());
        Self { mean, std_error, n: values.len() }
    }

    /// `|mean - x| ≤ k · std_error`.
    pub fn agrees_with(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.std_error
    }
}

/// Points `(t, s_{i-1}, s_i)` and the cell weights at `t`.
fn predictor_setup(weights: &WeightFamily, t: f64) -> Result<([f64; 3], CellWeights)> {
    let grid = weights.grid().ok_or(Error::Unsupported("discretized (grid-based) weights"))?;
    let cw = weights.cell_weights(t)?;
    let (lo, hi) = grid.cell_bounds(cw.cell);
    Ok(([t, lo, hi], cw))
}

/// Simulated `E(η_t - η̂_t)^2` over `n_paths` exact SMSP draws at
/// `(t, s_{i-1}, s_i)`.
pub fn mc_smsp_mse(
    model: &GeneratorModel,
    weights: &WeightFamily,
    t: f64,
    n_paths: usize,
    base_seed: u64,
) -> Result<McEstimate> {
    let (points, cw) = predictor_setup(weights, t)?;
    let gen = model.prepare(&points)?;
    if gen.bound().is_none() {
        return Err(Error::UnboundedGenerator);
    }
    let sq = chunked(n_paths, |range| {
        let (mut z, mut x) = ([0.0; 3], [0.0; 3]);
        range
            .map(|i| {
                let mut rng = path_rng(batch_path_seed(base_seed, i as u64), streams::SMSP, 0);
                smsp_draw(&gen, &mut rng, SeriesOptions::default(), &mut z, &mut x).expect("bound checked");
                let e = x[0] - reconstruct_cell(x[1], x[2], &cw);
                e * e
            })
            .collect()
    });
    Ok(McEstimate::from_values(&sq))
}

/// Simulated `E((V_t - V̂_t)^2 | V_t > c, V̂_t > c)` over `n_draws` SGPP
/// draws; `n` of the estimate counts the surviving draws.
pub fn mc_sgpp_conditional_mse(
    model: &GeneratorModel,
    weights: &WeightFamily,
    t: f64,
    c: f64,
    n_draws: usize,
    base_seed: u64,
    floor: f64,
) -> Result<McEstimate> {
    let (points, cw) = predictor_setup(weights, t)?;
    let gen = model.prepare(&points)?;
    let bound = gen.bound().ok_or(Error::UnboundedGenerator)?;
    if !(floor > bound) {
        return Err(invalid("floor", format!("censor floor {floor} must exceed the generator bound {bound}")));
    }
    let sq = chunked(n_draws, |range| {
        let mut x = [0.0; 3];
        range
            .filter_map(|i| {
                let mut rng = path_rng(batch_path_seed(base_seed, i as u64), streams::SGPP, 0);
                sgpp_draw(&gen, &mut rng, floor, &mut x);
                let hat = reconstruct_cell(x[1], x[2], &cw);
                (x[0] > c && hat > c).then(|| (x[0] - hat) * (x[0] - hat))
            })
            .collect()
    });
    Ok(McEstimate::from_values(&sq))
}

/// Simulated conditional moments of a bivariate GPD pair `(U, V)` given
/// `U > u, V > v`, drawn as `(-W / Z_1, -W / Z_2)` from a two-point generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpdMonteCarlo {
    pub draws: usize,
    pub survival: McEstimate,
    pub u2: McEstimate,
    pub uv: McEstimate,
    pub v2: McEstimate,
}

pub fn mc_gpd_moments<G: GeneratorDraw + ?Sized>(
    gen: &G,
    u: f64,
    v: f64,
    n_draws: usize,
    base_seed: u64,
) -> Result<GpdMonteCarlo> {
    if gen.n_points() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: gen.n_points() });
    }
    let bound = gen.bound().ok_or(Error::UnboundedGenerator)?;
    let floor = 2.0 * bound;
    let hits: Vec<(f64, f64)> = chunked(n_draws, |range| {
        let mut x = [0.0; 2];
        range
            .filter_map(|i| {
                let mut rng = path_rng(batch_path_seed(base_seed, i as u64), streams::SGPP, 0);
                sgpp_draw(gen, &mut rng, floor, &mut x);
                (x[0] > u && x[1] > v).then_some((x[0], x[1]))
            })
            .collect()
    });
    let survivors = hits.len();
    let p = survivors as f64 / n_draws.max(1) as f64;
    let survival = McEstimate { mean: p, std_error: (p * (1.0 - p) / n_draws.max(1) as f64).sqrt(), n: n_draws };
    let col = |f: fn(&(f64, f64)) -> f64| McEstimate::from_values(&hits.iter().map(f).collect::<Vec<_>>());
    Ok(GpdMonteCarlo {
        draws: n_draws,
        survival,
        u2: col(|h| h.0 * h.0),
        uv: col(|h| h.0 * h.1),
        v2: col(|h| h.1 * h.1),
    })
}

/// Simulated `E(XY)` of the standard max-stable pair with a two-point
/// generator.
pub fn mc_msm_cross_moment<G: GeneratorDraw + ?Sized>(gen: &G, n_draws: usize, base_seed: u64) -> Result<McEstimate> {
    if gen.n_points() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: gen.n_points() });
    }
    if gen.bound().is_none() {
        return Err(Error::UnboundedGenerator);
    }
    let prods = chunked(n_draws, |range| {
        let (mut z, mut x) = ([0.0; 2], [0.0; 2]);
        range
            .map(|i| {
                let mut rng = path_rng(batch_path_seed(base_seed, i as u64), streams::SMSP, 0);
                smsp_draw(gen, &mut rng, SeriesOptions::default(), &mut z, &mut x).expect("bound checked");
                x[0] * x[1]
            })
            .collect()
    });
    Ok(McEstimate::from_values(&prods))
}
