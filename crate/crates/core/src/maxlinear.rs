//! The generalized max-linear model `η_t = max_i X_i / g_i(t)` and its
//! discretized specialization, which interpolates a process observed on a grid
//! `0 = s_0 < … < s_d = 1` using only the bivariate D-norms of adjacent grid
//! points:
//!
//! ```text
//! g_{i-1}(t) = (s_i - t) / N_i(t),  g_i(t) = (t - s_{i-1}) / N_i(t),
//! N_i(t) = ‖(s_i - t, t - s_{i-1})‖_{D_{i-1,i}},   t ∈ [s_{i-1}, s_i].
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dnorm::{DNormSpec, PairNorm};
use crate::error::{invalid, Error, Result};
use crate::generator::GeneratorModel;
use crate::sampler::{ObservationVector, ProcessKind};

/// Grid `0 = s_0 < s_1 < … < s_d = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridPoints", into = "GridPoints")]
pub struct Grid {
    points: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridPoints {
    points: Vec<f64>,
}

impl TryFrom<GridPoints> for Grid {
    type Error = Error;

    fn try_from(g: GridPoints) -> Result<Self> {
        Grid::new(g.points)
    }
}

impl From<Grid> for GridPoints {
    fn from(g: Grid) -> Self {
        Self { points: g.points }
    }
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("needs at least the two endpoints".into()));
        }
        if points[0] != 0.0 || points[points.len() - 1] != 1.0 {
            return Err(Error::InvalidGrid("endpoints must be exactly 0 and 1".into()));
        }
        if let Some(w) = points.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid(format!("points not strictly increasing at {} .. {}", w[0], w[1])));
        }
        Ok(Self { points })
    }

    /// `d` equal cells.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGrid("needs at least one cell".into()));
        }
        let mut points: Vec<f64> = (0..=d).map(|j| j as f64 / d as f64).collect();
        points[d] = 1.0;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of cells `d`.
    pub fn d(&self) -> usize {
        self.points.len() - 1
    }

    /// `κ = max_i (s_i - s_{i-1})`.
    pub fn fineness(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Cell `i ∈ 1..=d` with `t ∈ [s_{i-1}, s_i]`; grid points belong to the
    /// cell on their left (`t = 0` to cell 1).
    pub fn cell_of(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::PointOutOfRange(t));
        }
        Ok(self.points.partition_point(|&p| p < t).max(1))
    }

    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        (self.points[cell - 1], self.points[cell])
    }
}

/// The two weights active at `t`: `left = g_{cell-1}(t)`, `right = g_cell(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellWeights {
    pub cell: usize,
    pub left: f64,
    pub right: f64,
}

pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Weights {
    Discretized { grid: Grid, cell_norms: Vec<Arc<dyn PairNorm>> },
    UserSupplied { funcs: Vec<WeightFn> },
}

/// Weight functions `g_0, …, g_d`.
#[derive(Clone)]
pub struct WeightFamily {
    inner: Weights,
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Weights::Discretized { grid, cell_norms } => {
                f.debug_struct("WeightFamily::Discretized").field("grid", grid).field("cell_norms", cell_norms).finish()
            }
            Weights::UserSupplied { funcs } => {
                f.debug_struct("WeightFamily::UserSupplied").field("len", &funcs.len()).finish()
            }
        }
    }
}

const PROBE_POINTS: usize = 1001;

impl WeightFamily {
    /// Discretized weights from one pair norm per cell (`cell_norms[i - 1]` is
    /// the norm of the pair at `(s_{i-1}, s_i)`).
    pub fn discretized(grid: Grid, cell_norms: Vec<Arc<dyn PairNorm>>) -> Result<Self> {
        if cell_norms.len() != grid.d() {
            return Err(Error::DimensionMismatch { expected: grid.d(), actual: cell_norms.len() });
        }
        for (i, n) in cell_norms.iter().enumerate() {
            let h = grid.points[i + 1] - grid.points[i];
            let v = n.norm(h, h);
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid("pair_norms", format!("cell {} norm is not positive: {v}", i + 1)));
            }
        }
        Ok(Self { inner: Weights::Discretized { grid, cell_norms } })
    }

    /// Discretized weights whose pair norms come from the generator oracle.
    pub fn for_generator(grid: Grid, model: &GeneratorModel) -> Result<Self> {
        let norms = grid
            .points
            .windows(2)
            .map(|w| model.pair_norm(w[0], w[1]).map(|p| Arc::new(p) as Arc<dyn PairNorm>))
            .collect::<Result<Vec<_>>>()?;
        Self::discretized(grid, norms)
    }

    /// Discretized weights using the same bivariate D-norm in every cell.
    pub fn for_dnorm(grid: Grid, spec: &DNormSpec) -> Result<Self> {
        let pair: Arc<dyn PairNorm> = Arc::new(spec.pair()?);
        let norms = vec![pair; grid.d()];
        Self::discretized(grid, norms)
    }

    /// Arbitrary nonnegative continuous weight functions.
    pub fn user_supplied(funcs: Vec<WeightFn>) -> Result<Self> {
        if funcs.is_empty() {
            return Err(invalid("funcs", "needs at least one weight function"));
        }
        for (i, g) in funcs.iter().enumerate() {
            for j in 0..PROBE_POINTS {
                let t = j as f64 / (PROBE_POINTS - 1) as f64;
                let v = g(t);
                if !v.is_finite() || v < 0.0 {
                    return Err(invalid("funcs", format!("g_{i}({t}) = {v} is not finite and nonnegative")));
                }
                let h = 1e-9;
                let jump = (g((t + h).min(1.0)) - v).abs().max((g((t - h).max(0.0)) - v).abs());
                if jump > 1e-6 {
                    return Err(invalid("funcs", format!("g_{i} jumps at {t}")));
                }
            }
        }
        Ok(Self { inner: Weights::UserSupplied { funcs } })
    }

    /// Number of weight functions `d + 1`.
    pub fn len(&self) -> usize {
        match &self.inner {
            Weights::Discretized { grid, .. } => grid.points.len(),
            Weights::UserSupplied { funcs } => funcs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.inner {
            Weights::Discretized { grid, .. } => Some(grid),
            Weights::UserSupplied { .. } => None,
        }
    }

    pub fn cell_norm(&self, cell: usize) -> Option<&dyn PairNorm> {
        match &self.inner {
            Weights::Discretized { cell_norms, .. } => cell_norms.get(cell.wrapping_sub(1)).map(|n| n.as_ref()),
            Weights::UserSupplied { .. } => None,
        }
    }

    fn discretized_parts(&self) -> Result<(&Grid, &[Arc<dyn PairNorm>])> {
        match &self.inner {
            Weights::Discretized { grid, cell_norms } => Ok((grid, cell_norms)),
            Weights::UserSupplied { .. } => Err(Error::Unsupported("discretized (grid-based) weights")),
        }
    }

    /// The two active weights at `t` (discretized weights only).
    pub fn cell_weights(&self, t: f64) -> Result<CellWeights> {
        let (grid, _) = self.discretized_parts()?;
        let cell = grid.cell_of(t)?;
        let (lo, hi) = grid.cell_bounds(cell);
        if t == lo {
            return Ok(CellWeights { cell, left: 1.0, right: 0.0 });
        }
        if t == hi {
            return Ok(CellWeights { cell, left: 0.0, right: 1.0 });
        }
        self.cell_formula(cell, t)
    }

    /// The defining formula of cell `cell` evaluated at `t`, without the exact
    /// endpoint values used by [`Self::cell_weights`].
    pub fn cell_formula(&self, cell: usize, t: f64) -> Result<CellWeights> {
        let (grid, norms) = self.discretized_parts()?;
        if cell == 0 || cell > grid.d() {
            return Err(invalid("cell", format!("{cell} is not in 1..={}", grid.d())));
        }
        let (lo, hi) = grid.cell_bounds(cell);
        let (a, b) = (hi - t, t - lo);
        let n = norms[cell - 1].norm(a, b);
        // The ratios are ≤ 1 exactly; clamp quadrature noise.
        Ok(CellWeights { cell, left: (a / n).clamp(0.0, 1.0), right: (b / n).clamp(0.0, 1.0) })
    }

    /// Cell weights at every point of `points`.
    pub fn tabulate(&self, points: &[f64]) -> Result<Vec<CellWeights>> {
        points.iter().map(|&t| self.cell_weights(t)).collect()
    }

    /// `g_i(t)`.
    pub fn eval(&self, i: usize, t: f64) -> Result<f64> {
        if i >= self.len() {
            return Err(invalid("i", format!("{i} is not a weight index below {}", self.len())));
        }
        match &self.inner {
            Weights::Discretized { .. } => {
                let cw = self.cell_weights(t)?;
                Ok(if i + 1 == cw.cell {
                    cw.left
                } else if i == cw.cell {
                    cw.right
                } else {
                    0.0
                })
            }
            Weights::UserSupplied { funcs } => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::PointOutOfRange(t));
                }
                Ok(funcs[i](t))
            }
        }
    }

    /// `(g_0(t), …, g_d(t))`.
    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        match &self.inner {
            Weights::Discretized { .. } => {
                let cw = self.cell_weights(t)?;
                let mut v = vec![0.0; self.len()];
                v[cw.cell - 1] = cw.left;
                v[cw.cell] = cw.right;
                Ok(v)
            }
            Weights::UserSupplied { funcs } => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::PointOutOfRange(t));
                }
                Ok(funcs.iter().map(|g| g(t)).collect())
            }
        }
    }

    /// `‖(g_{i-1}(t), g_i(t))‖_{D_{i-1,i}}`, which equals one by construction.
    pub fn partition_norm(&self, t: f64) -> Result<f64> {
        let (_, norms) = self.discretized_parts()?;
        let cw = self.cell_weights(t)?;
        Ok(norms[cw.cell - 1].norm(cw.left, cw.right))
    }

    /// Marginal rate `‖(g_0(t), …, g_d(t))‖_D`: `η_t` is then negative
    /// exponential with this rate. Without `dnorm`, discretized weights use
    /// their own cell norm.
    pub fn margin_rate(&self, t: f64, dnorm: Option<&DNormSpec>) -> Result<f64> {
        match dnorm {
            Some(spec) => Ok(spec.eval(&self.eval_all(t)?)?.value),
            None => match &self.inner {
                Weights::Discretized { .. } => self.partition_norm(t),
                Weights::UserSupplied { .. } => Err(Error::Unsupported("a D-norm for user-supplied weights")),
            },
        }
    }
}

/// Binomial weights `g_i(t) = C(d, i) t^i (1 - t)^{d-i}`; they sum to one and
/// so suit the sum norm.
pub fn binomial_weights(d: usize) -> Result<WeightFamily> {
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let funcs = (0..=d)
        .map(|i| {
            let coef = binomial(d, i);
            Arc::new(move |t: f64| coef * t.powi(i as i32) * (1.0 - t).powi((d - i) as i32)) as WeightFn
        })
        .collect();
    WeightFamily::user_supplied(funcs)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `x / g` with the convention `x / 0 = -∞`, so a vanished weight drops out of
/// the maximum.
fn ratio(x: f64, g: f64) -> f64 {
    if g > 0.0 {
        x / g
    } else {
        f64::NEG_INFINITY
    }
}

/// `max(obs_left / left, obs_right / right)` for one tabulated point.
pub fn reconstruct_cell(obs_left: f64, obs_right: f64, cw: &CellWeights) -> f64 {
    ratio(obs_left, cw.left).max(ratio(obs_right, cw.right))
}

/// `max(g_left z_left, g_right z_right)` for one tabulated point.
pub fn generator_cell(z_left: f64, z_right: f64, cw: &CellWeights) -> f64 {
    (cw.left * z_left).max(cw.right * z_right)
}

/// Supremum, infimum and the point where the infimum is attained on a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellExtrema {
    pub sup: f64,
    pub inf: f64,
    pub argmin: f64,
}

fn check_signs(values: &[f64], kind: ProcessKind) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        let ok = match kind {
            ProcessKind::Smsp => value < 0.0,
            ProcessKind::Sgpp => value <= 0.0,
        };
        if !ok || value.is_nan() {
            return Err(Error::InvalidObservation { index, value, kind: kind.as_str() });
        }
    }
    Ok(())
}

/// A process rebuilt from grid observations.
#[derive(Debug, Clone)]
pub struct ReconstructedProcess {
    weights: WeightFamily,
    observations: ObservationVector,
    kind: ProcessKind,
}

impl ReconstructedProcess {
    pub fn new(weights: WeightFamily, observations: ObservationVector, kind: ProcessKind) -> Result<Self> {
        if weights.len() != observations.values.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), actual: observations.values.len() });
        }
        if let Some(grid) = weights.grid() {
            if grid != &observations.grid {
                return Err(Error::InvalidGrid("observation grid differs from the weight grid".into()));
            }
        }
        check_signs(&observations.values, kind)?;
        Ok(Self { weights, observations, kind })
    }

    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    pub fn observations(&self) -> &ObservationVector {
        &self.observations
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    /// `η̂_t = max_i X_i / g_i(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let obs = &self.observations.values;
        match self.weights.grid() {
            Some(_) => {
                let cw = self.weights.cell_weights(t)?;
                Ok(reconstruct_cell(obs[cw.cell - 1], obs[cw.cell], &cw))
            }
            None => Ok(self
                .weights
                .eval_all(t)?
                .iter()
                .zip(obs)
                .map(|(&g, &x)| ratio(x, g))
                .fold(f64::NEG_INFINITY, f64::max)),
        }
    }

    pub fn eval_many(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|&t| self.eval(t)).collect()
    }

    /// Closed-form extrema of the reconstruction on cell `cell`:
    /// `sup = max(x_{i-1}, x_i)`, `inf = -‖(x_{i-1}, x_i)‖_{D_{i-1,i}}`,
    /// attained at `(s_{i-1} x_{i-1} + s_i x_i) / (x_{i-1} + x_i)`.
    pub fn cell_extrema(&self, cell: usize) -> Result<CellExtrema> {
        let (grid, norms) = self.weights.discretized_parts()?;
        if cell == 0 || cell > grid.d() {
            return Err(invalid("cell", format!("{cell} is not in 1..={}", grid.d())));
        }
        let (lo, hi) = grid.cell_bounds(cell);
        let (x0, x1) = (self.observations.values[cell - 1], self.observations.values[cell]);
        let sup = x0.max(x1);
        let inf = -norms[cell - 1].norm(x0, x1);
        let denom = x0 + x1;
        let argmin = if denom == 0.0 { lo } else { (lo * x0 + hi * x1) / denom };
        Ok(CellExtrema { sup, inf, argmin })
    }
}

/// Convenience form of [`ReconstructedProcess::eval`].
pub fn reconstruct(weights: &WeightFamily, obs: &ObservationVector, kind: ProcessKind, t: f64) -> Result<f64> {
    ReconstructedProcess::new(weights.clone(), obs.clone(), kind)?.eval(t)
}

/// The discretized generator `Ẑ_t = max(g_{i-1}(t) Z_{s_{i-1}}, g_i(t) Z_{s_i})`.
#[derive(Debug, Clone)]
pub struct DiscretizedGenerator {
    weights: WeightFamily,
    values: Vec<f64>,
}

impl DiscretizedGenerator {
    pub fn new(weights: WeightFamily, values: Vec<f64>) -> Result<Self> {
        weights.discretized_parts()?;
        if weights.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), actual: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeGenerator { index, value });
            }
        }
        Ok(Self { weights, values })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let cw = self.weights.cell_weights(t)?;
        Ok(generator_cell(self.values[cw.cell - 1], self.values[cw.cell], &cw))
    }

    /// `sup = max(Z_{i-1}, Z_i)`; `inf = 1 / ‖(1/Z_{i-1}, 1/Z_i)‖` when both
    /// are positive, else 0.
    pub fn cell_extrema(&self, cell: usize) -> Result<CellExtrema> {
        let (grid, norms) = self.weights.discretized_parts()?;
        if cell == 0 || cell > grid.d() {
            return Err(invalid("cell", format!("{cell} is not in 1..={}", grid.d())));
        }
        let (lo, hi) = grid.cell_bounds(cell);
        let (z0, z1) = (self.values[cell - 1], self.values[cell]);
        let sup = z0.max(z1);
        if z0 > 0.0 && z1 > 0.0 {
            let inf = 1.0 / norms[cell - 1].norm(1.0 / z0, 1.0 / z1);
            let argmin = (lo * z1 + hi * z0) / (z0 + z1);
            Ok(CellExtrema { sup, inf, argmin })
        } else {
            // The weight of the nonzero endpoint vanishes at the other end.
            let argmin = if z0 == 0.0 { lo } else { hi };
            Ok(CellExtrema { sup, inf: 0.0, argmin })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{fine_points, simulate_smsp};

    fn obs(grid: &Grid, values: &[f64]) -> ObservationVector {
        ObservationVector::new(grid.clone(), values.to_vec()).unwrap()
    }

    /// Minimizes `f` over `[lo, hi]` by repeated zooming grid search.
    fn brute_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
        let (mut a, mut b) = (lo, hi);
        let mut best = (f64::INFINITY, lo);
        for _ in 0..4 {
            let n = 2000;
            for j in 0..=n {
                let t = a + (b - a) * j as f64 / n as f64;
                let v = f(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            let h = (b - a) / n as f64;
            a = (best.1 - 2.0 * h).max(lo);
            b = (best.1 + 2.0 * h).min(hi);
        }
        best
    }

    #[test]
    fn grid_validation_and_cells() {
        assert!(Grid::new(vec![0.0]).is_err());
        assert!(Grid::new(vec![0.1, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        let g = Grid::new(vec![0.0, 0.2, 0.7, 1.0]).unwrap();
        assert_eq!(g.d(), 3);
        assert!((g.fineness() - 0.5).abs() < 1e-15);
        assert_eq!(g.cell_of(0.0).unwrap(), 1);
        assert_eq!(g.cell_of(0.2).unwrap(), 1);
        assert_eq!(g.cell_of(0.2000001).unwrap(), 2);
        assert_eq!(g.cell_of(1.0).unwrap(), 3);
        assert!(g.cell_of(1.1).is_err());
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"points":[0.0,0.2,0.7,1.0]}"#);
        assert_eq!(serde_json::from_str::<Grid>(&json).unwrap(), g);
        assert!(serde_json::from_str::<Grid>(r#"{"points":[0.0,0.5]}"#).is_err());
    }

    #[test]
    fn sum_norm_gives_tent_weights() {
        let grid = Grid::new(vec![0.0, 0.4, 1.0]).unwrap();
        let w = WeightFamily::for_dnorm(grid, &DNormSpec::Sum).unwrap();
        for t in [0.0, 0.1, 0.25, 0.4] {
            assert!((w.eval(0, t).unwrap() - (0.4 - t) / 0.4).abs() < 1e-15);
        }
        assert_eq!(w.eval(0, 0.7).unwrap(), 0.0);
        assert!((w.eval(1, 0.7).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_norm_weights() {
        let w = WeightFamily::for_dnorm(Grid::uniform(1).unwrap(), &DNormSpec::Max).unwrap();
        assert_eq!(w.eval(0, 0.25).unwrap(), 1.0);
        for j in 0..=100 {
            let t = j as f64 / 100.0;
            let direct = (1.0 - t) / (1.0 - t).max(t);
            assert!((w.eval(0, t).unwrap() - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_equal_one_at_own_grid_point_from_both_sides() {
        let grid = Grid::new(vec![0.0, 0.3, 0.55, 1.0]).unwrap();
        for w in [
            WeightFamily::for_generator(grid.clone(), &GeneratorModel::Sinusoid { a: 0.7 }).unwrap(),
            WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Logistic { lambda: 3.0 }).unwrap(),
        ] {
            for i in 0..=3 {
                let s = grid.points()[i];
                assert_eq!(w.eval(i, s).unwrap(), 1.0);
                if i >= 1 {
                    assert!((w.cell_formula(i, s).unwrap().right - 1.0).abs() < 1e-12);
                }
                if i < 3 {
                    assert!((w.cell_formula(i + 1, s).unwrap().left - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weights_bounded_and_partition_of_unity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = Grid::new(vec![0.0, 0.1, 0.35, 0.5, 0.8, 1.0]).unwrap();
        let w = WeightFamily::for_generator(grid, &GeneratorModel::Sinusoid { a: 0.5 }).unwrap();
        for k in 0..10_000 {
            let t: f64 = rng.random();
            let all = w.eval_all(t).unwrap();
            assert!(all.iter().all(|g| (0.0..=1.0).contains(g)));
            if k < 1000 {
                assert!((w.partition_norm(t).unwrap() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn binomial_examples() {
        let w = binomial_weights(1).unwrap();
        assert_eq!(w.eval_all(0.3).unwrap(), vec![0.7, 0.3]);
        let w3 = binomial_weights(3).unwrap().eval_all(0.5).unwrap();
        assert_eq!(w3, vec![0.125, 0.375, 0.375, 0.125]);
        assert_eq!(binomial_weights(2).unwrap().eval_all(0.0).unwrap(), vec![1.0, 0.0, 0.0]);
        let w7 = binomial_weights(7).unwrap();
        for j in 0..=20 {
            let s: f64 = w7.eval_all(j as f64 / 20.0).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn user_supplied_validation() {
        let neg: WeightFn = Arc::new(|t| t - 0.5);
        assert!(WeightFamily::user_supplied(vec![neg]).is_err());
        let jump: WeightFn = Arc::new(|t| if t < 0.5 { 0.0 } else { 1.0 });
        assert!(WeightFamily::user_supplied(vec![jump]).is_err());
    }

    #[test]
    fn margin_rates() {
        let w = binomial_weights(4).unwrap();
        for t in [0.0, 0.2, 0.6, 1.0] {
            assert!((w.margin_rate(t, Some(&DNormSpec::Sum)).unwrap() - 1.0).abs() < 1e-12);
        }
        let w1 = binomial_weights(1).unwrap();
        assert_eq!(w1.margin_rate(0.5, Some(&DNormSpec::Max)).unwrap(), 0.5);
        assert!(w1.margin_rate(0.5, None).is_err());
        let grid = Grid::uniform(4).unwrap();
        let d = WeightFamily::for_generator(grid, &GeneratorModel::Sinusoid { a: 0.9 }).unwrap();
        for t in [0.0, 0.13, 0.5, 0.77] {
            assert!((d.margin_rate(t, None).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_examples() {
        let grid = Grid::uniform(1).unwrap();
        let sum = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Sum).unwrap();
        let o = obs(&grid, &[-1.0, -1.0]);
        assert_eq!(reconstruct(&sum, &o, ProcessKind::Smsp, 0.5).unwrap(), -2.0);
        let max = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Max).unwrap();
        for j in 0..=50 {
            assert_eq!(reconstruct(&max, &o, ProcessKind::Smsp, j as f64 / 50.0).unwrap(), -1.0);
        }
        let bad = obs(&grid, &[-1.0, 0.0]);
        assert!(matches!(
            reconstruct(&sum, &bad, ProcessKind::Smsp, 0.5).unwrap_err(),
            Error::InvalidObservation { index: 1, .. }
        ));
        assert_eq!(reconstruct(&sum, &bad, ProcessKind::Sgpp, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn interpolation_is_exact() {
        let model = GeneratorModel::Sinusoid { a: 0.5 };
        let grid = Grid::new(vec![0.0, 0.125, 0.5, 0.625, 1.0]).unwrap();
        let fine = fine_points(9);
        for (weights, name) in [
            (WeightFamily::for_generator(grid.clone(), &model).unwrap(), "oracle"),
            (WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Logistic { lambda: 2.7 }).unwrap(), "logistic"),
            (WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Sum).unwrap(), "sum"),
        ] {
            for seed in 0..20 {
                let path = simulate_smsp(&model, &fine, seed).unwrap();
                let o = crate::sampler::restrict(&path, &grid).unwrap();
                let rp = ReconstructedProcess::new(weights.clone(), o.clone(), ProcessKind::Smsp).unwrap();
                for (s, v) in grid.points().iter().zip(&o.values) {
                    assert_eq!(rp.eval(*s).unwrap(), *v, "{name}");
                }
            }
        }
    }

    #[test]
    fn user_supplied_interpolates_at_vertices() {
        let w = binomial_weights(3).unwrap();
        let o = obs(&Grid::uniform(3).unwrap(), &[-0.5, -2.0, -1.0, -0.25]);
        let rp = ReconstructedProcess::new(w, o, ProcessKind::Smsp).unwrap();
        assert_eq!(rp.eval(0.0).unwrap(), -0.5);
        assert_eq!(rp.eval(1.0).unwrap(), -0.25);
        // max_i x_i / g_i(t) at t = 0.5
        let expect = [-0.5 / 0.125, -2.0 / 0.375, -1.0 / 0.375, -0.25 / 0.125].into_iter().fold(f64::MIN, f64::max);
        assert_eq!(rp.eval(0.5).unwrap(), expect);
    }

    #[test]
    fn extrema_examples() {
        let grid = Grid::uniform(1).unwrap();
        let sum = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Sum).unwrap();
        let rp = ReconstructedProcess::new(sum.clone(), obs(&grid, &[-1.0, -1.0]), ProcessKind::Smsp).unwrap();
        assert_eq!(rp.cell_extrema(1).unwrap(), CellExtrema { sup: -1.0, inf: -2.0, argmin: 0.5 });

        let rp = ReconstructedProcess::new(sum, obs(&grid, &[-1.0, -3.0]), ProcessKind::Smsp).unwrap();
        let e = rp.cell_extrema(1).unwrap();
        assert_eq!((e.inf, e.argmin), (-4.0, 0.75));
        let (bmin, bt) = brute_min(|t| rp.eval(t).unwrap(), 0.0, 1.0);
        assert!((bmin - e.inf).abs() < 1e-4 && (bt - e.argmin).abs() < 1e-4);

        let max = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Max).unwrap();
        let rp = ReconstructedProcess::new(max, obs(&grid, &[-1.0, -3.0]), ProcessKind::Smsp).unwrap();
        let e = rp.cell_extrema(1).unwrap();
        assert_eq!((e.sup, e.inf), (-1.0, -3.0));
        let (bmin, _) = brute_min(|t| rp.eval(t).unwrap(), 0.0, 1.0);
        assert!((bmin - e.inf).abs() < 1e-4);
    }

    #[test]
    fn discretized_generator_examples() {
        let grid = Grid::uniform(1).unwrap();
        let max = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Max).unwrap();
        let z = DiscretizedGenerator::new(max, vec![1.0, 1.0]).unwrap();
        for j in 0..=20 {
            assert_eq!(z.eval(j as f64 / 20.0).unwrap(), 1.0);
        }
        let e = z.cell_extrema(1).unwrap();
        assert_eq!((e.sup, e.inf), (1.0, 1.0));

        let sum = WeightFamily::for_dnorm(grid.clone(), &DNormSpec::Sum).unwrap();
        let z = DiscretizedGenerator::new(sum.clone(), vec![0.0, 2.0]).unwrap();
        assert_eq!(z.cell_extrema(1).unwrap().inf, 0.0);
        assert_eq!(z.eval(0.0).unwrap(), 0.0);

        let z = DiscretizedGenerator::new(sum.clone(), vec![1.0, 2.0]).unwrap();
        let e = z.cell_extrema(1).unwrap();
        assert!((e.inf - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.argmin - 1.0 / 3.0).abs() < 1e-15);
        let (bmin, bt) = brute_min(|t| z.eval(t).unwrap(), 0.0, 1.0);
        assert!((bmin - e.inf).abs() < 1e-4 && (bt - e.argmin).abs() < 1e-4);

        assert!(matches!(
            DiscretizedGenerator::new(sum, vec![1.0, -0.1]).unwrap_err(),
            Error::NegativeGenerator { index: 1, .. }
        ));
    }

    #[test]
    fn reconstruction_is_monotone_in_observations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::new(vec![0.0, 0.3, 0.6, 1.0]).unwrap();
        let w = WeightFamily::for_generator(grid.clone(), &GeneratorModel::Sinusoid { a: 0.4 }).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| -rng.random::<f64>() * 3.0 - 1e-3).collect();
            let mut y = x.clone();
            let k = rng.random_range(0..4);
            y[k] = (y[k] + rng.random::<f64>()).min(-1e-6);
            let a = ReconstructedProcess::new(w.clone(), obs(&grid, &x), ProcessKind::Smsp).unwrap();
            let b = ReconstructedProcess::new(w.clone(), obs(&grid, &y), ProcessKind::Smsp).unwrap();
            for j in 0..=40 {
                let t = j as f64 / 40.0;
                assert!(b.eval(t).unwrap() >= a.eval(t).unwrap());
            }
        }
    }
}
