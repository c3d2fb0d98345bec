//! Generator processes `(Z_t)` on `[0, 1]` with `E Z_t = 1`, joint sampling at
//! finite point sets, and exact D-norm oracles over the generator's finite
//! randomness.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dnorm::{DNormSpec, EmpiricalSamples, PairNorm};
use crate::error::{invalid, Error, Result};
use crate::seeding::{path_rng, streams, PathRng};
use crate::stats::mean_and_se;

const INDEX_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorModel {
    /// `Z_t ≡ 1`: complete dependence, the sup-norm.
    ConstantOne,
    /// Defined on the index points `j / (dim - 1)`, `j = 0, …, dim - 1`: the
    /// value `dim` sits at one uniformly chosen index, zero elsewhere.
    Permutation { dim: usize },
    /// `Z_t = 1 + a sin(2πt + Θ)`, `Θ ~ U[0, 2π)`, `a ∈ [0, 1]`.
    Sinusoid { a: f64 },
}

impl GeneratorModel {
    pub fn sinusoid(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(invalid("a", format!("{a} must lie in [0, 1]")));
        }
        Ok(Self::Sinusoid { a })
    }

    pub fn permutation(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", "a permutation generator needs at least 2 index points"));
        }
        Ok(Self::Permutation { dim })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ConstantOne => Ok(()),
            Self::Permutation { dim } => Self::permutation(dim).map(drop),
            Self::Sinusoid { a } => Self::sinusoid(a).map(drop),
        }
    }

    /// Almost-sure bound `c` on `sup_t Z_t`.
    pub fn path_bound(&self) -> Option<f64> {
        match *self {
            Self::ConstantOne => Some(1.0),
            Self::Permutation { dim } => Some(dim as f64),
            Self::Sinusoid { a } => Some(1.0 + a),
        }
    }

    /// `E sup_t Z_t`, the extremal coefficient of the process.
    pub fn extremal_coefficient_path(&self) -> f64 {
        match *self {
            Self::ConstantOne => 1.0,
            // Some index always carries the value `dim`.
            Self::Permutation { dim } => dim as f64,
            // One full period is traversed on [0, 1].
            Self::Sinusoid { a } => 1.0 + a,
        }
    }

    /// Index points of the permutation generator.
    pub fn index_points(&self) -> Option<Vec<f64>> {
        match *self {
            Self::Permutation { dim } => Some((0..dim).map(|j| j as f64 / (dim - 1) as f64).collect()),
            _ => None,
        }
    }

    fn index_of(dim: usize, t: f64) -> Result<usize> {
        let pos = t * (dim - 1) as f64;
        let j = pos.round();
        if (pos - j).abs() > INDEX_MATCH_TOL * (dim - 1) as f64 {
            return Err(Error::UnsupportedPoint(t));
        }
        Ok(j as usize)
    }

    /// Precomputes per-point data so that joint draws are cheap.
    pub fn prepare(&self, points: &[f64]) -> Result<PreparedGenerator> {
        self.validate()?;
        for &t in points {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return Err(Error::PointOutOfRange(t));
            }
        }
        let kind = match *self {
            Self::ConstantOne => Prepared::Constant,
            Self::Permutation { dim } => Prepared::Permutation {
                dim,
                index: points.iter().map(|&t| Self::index_of(dim, t)).collect::<Result<_>>()?,
            },
            Self::Sinusoid { a } => {
                Prepared::Sinusoid { a, phase: points.iter().map(|&t| (TAU * t).sin_cos()).collect() }
            }
        };
        Ok(PreparedGenerator { kind, n_points: points.len(), bound: self.path_bound() })
    }

    /// `n` i.i.d. joint draws of `(Z_{t_1}, …, Z_{t_k})`, row `k` from stream `k`.
    pub fn sample_joint(&self, points: &[f64], n: usize, seed: u64) -> Result<JointSample> {
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let prepared = self.prepare(points)?;
        let k = points.len();
        let mut values = vec![0.0; n * k];
        for (row, out) in values.chunks_exact_mut(k.max(1)).enumerate().take(n) {
            let mut rng = path_rng(seed, streams::JOINT, row as u64);
            prepared.draw(&mut rng, &mut out[..k]);
        }
        Ok(JointSample { points: points.to_vec(), values, n })
    }

    /// `E max_j |c_j| Z_{t_j}` computed exactly over the generator's randomness.
    pub fn norm_oracle(&self, points: &[f64], coeffs: &[f64]) -> Result<f64> {
        if points.len() != coeffs.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), actual: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("oracle coefficients"));
        }
        let prepared = self.prepare(points)?;
        Ok(prepared.norm(coeffs))
    }

    /// `‖(x, y)‖` of the pair `(Z_s, Z_t)`.
    pub fn bivariate_norm_oracle(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        self.norm_oracle(&[s, t], &[x, y])
    }

    /// `‖(c_0, c_1, c_2)‖` of `(Z_t, Z_{s_left}, Z_{s_right})`.
    pub fn trivariate_norm_oracle(&self, t: f64, s_left: f64, s_right: f64, coeffs: [f64; 3]) -> Result<f64> {
        self.norm_oracle(&[t, s_left, s_right], &coeffs)
    }

    /// The bivariate D-norm of `(Z_s, Z_t)` as a reusable [`PairNorm`].
    pub fn pair_norm(&self, s: f64, t: f64) -> Result<GeneratorPair> {
        Ok(GeneratorPair { prepared: self.prepare(&[s, t])? })
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Constant,
    Permutation { dim: usize, index: Vec<usize> },
    Sinusoid { a: f64, phase: Vec<(f64, f64)> },
}

/// A generator restricted to a fixed list of points.
#[derive(Debug, Clone)]
pub struct PreparedGenerator {
    kind: Prepared,
    n_points: usize,
    bound: Option<f64>,
}

/// Joint draws of a generator at a fixed list of points.
pub trait GeneratorDraw: Send + Sync {
    fn n_points(&self) -> usize;
    /// Almost-sure bound on every coordinate, if one exists.
    fn bound(&self) -> Option<f64>;
    fn draw(&self, rng: &mut PathRng, out: &mut [f64]);
}

impl GeneratorDraw for PreparedGenerator {
    fn n_points(&self) -> usize {
        self.n_points
    }

    fn bound(&self) -> Option<f64> {
        self.bound
    }

    fn draw(&self, rng: &mut PathRng, out: &mut [f64]) {
        match &self.kind {
            Prepared::Constant => out.fill(1.0),
            Prepared::Permutation { dim, index } => {
                let hit = rng.random_range(0..*dim);
                for (o, &j) in out.iter_mut().zip(index) {
                    *o = if j == hit { *dim as f64 } else { 0.0 };
                }
            }
            Prepared::Sinusoid { a, phase } => {
                let (s, c) = (rng.random::<f64>() * TAU).sin_cos();
                for (o, &(sp, cp)) in out.iter_mut().zip(phase) {
                    // sin(φ + θ) = sin φ cos θ + cos φ sin θ
                    *o = (1.0 + a * (sp * c + cp * s)).max(0.0);
                }
            }
        }
    }
}

impl PreparedGenerator {
    /// `E max_j |c_j| Z_j` for the prepared points.
    pub fn norm(&self, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.n_points);
        match &self.kind {
            Prepared::Constant => coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max),
            Prepared::Permutation { dim, index } => {
                let mut best = vec![0.0f64; *dim];
                for (&j, c) in index.iter().zip(coeffs) {
                    best[j] = best[j].max(c.abs());
                }
                best.iter().sum()
            }
            Prepared::Sinusoid { a, phase } => sinusoid_envelope_mean(*a, phase, coeffs),
        }
    }
}

/// Mean over `θ ∈ [0, 2π)` of `max_j w_j (1 + a sin(φ_j + θ))`.
///
/// Every branch is `c + p sin θ + q cos θ`; the upper envelope is split at all
/// pairwise crossings and each piece is integrated in closed form.
fn sinusoid_envelope_mean(a: f64, phase: &[(f64, f64)], coeffs: &[f64]) -> f64 {
    let branches: Vec<[f64; 3]> = phase
        .iter()
        .zip(coeffs)
        .map(|(&(sp, cp), w)| {
            let w = w.abs();
            [w, w * a * cp, w * a * sp]
        })
        .collect();
    if branches.is_empty() {
        return 0.0;
    }
    if a == 0.0 || branches.len() == 1 {
        return branches.iter().map(|b| b[0]).fold(0.0, f64::max);
    }
    let mut knots = vec![0.0, TAU];
    for (i, bi) in branches.iter().enumerate() {
        for bj in &branches[i + 1..] {
            crossings(bi[0] - bj[0], bi[1] - bj[1], bi[2] - bj[2], &mut knots);
        }
    }
    knots.sort_by(f64::total_cmp);
    let eval = |b: &[f64; 3], th: f64| b[0] + b[1] * th.sin() + b[2] * th.cos();
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let top = branches.iter().max_by(|x, y| eval(x, mid).total_cmp(&eval(y, mid))).expect("non-empty");
        total += top[0] * (hi - lo) + top[1] * (lo.cos() - hi.cos()) + top[2] * (hi.sin() - lo.sin());
    }
    total / TAU
}

/// Roots in `[0, 2π)` of `c + p sin θ + q cos θ = 0`.
fn crossings(c: f64, p: f64, q: f64, out: &mut Vec<f64>) {
    let r = p.hypot(q);
    if r <= f64::MIN_POSITIVE {
        return;
    }
    let ratio = -c / r;
    if ratio.abs() > 1.0 {
        return;
    }
    let psi = q.atan2(p);
    let base = ratio.asin();
    for th in [base - psi, PI - base - psi] {
        out.push(th.rem_euclid(TAU));
    }
}

/// The bivariate D-norm of `(Z_s, Z_t)` backed by the exact oracle.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    prepared: PreparedGenerator,
}

impl PairNorm for GeneratorPair {
    fn norm(&self, x: f64, y: f64) -> f64 {
        self.prepared.norm(&[x, y])
    }
}

/// Row-sharing joint draws of `(Z_{t_1}, …, Z_{t_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample {
    pub points: Vec<f64>,
    /// Row-major `[n × points.len()]`.
    pub values: Vec<f64>,
    pub n: usize,
}

impl JointSample {
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.points.len();
        &self.values[k * m..(k + 1) * m]
    }

    /// Column mean and its standard error.
    pub fn column_mean(&self, column: usize) -> (f64, f64) {
        mean_and_se((0..self.n).map(|k| self.row(k)[column]))
    }

    /// The empirical D-norm of these draws.
    pub fn to_dnorm(&self) -> Result<DNormSpec> {
        Ok(DNormSpec::Empirical(EmpiricalSamples::new(self.values.clone(), self.points.len())?))
    }
}

/// Bounded bivariate generator `2 (1 - W, W)` whose angular law is derived
/// from the Pickands function `A(w) = ‖(1 - w, w)‖` of a pair norm:
/// `P(W ≤ w) = (1 - A'(1 - w)) / 2`.
///
/// Used to draw exact max-stable and generalized Pareto pairs for norms whose
/// usual generators are unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickandsPair {
    lambda: f64,
}

impl PickandsPair {
    /// Symmetric logistic norm with parameter `lambda > 1`.
    pub fn logistic(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 1.0 {
            return Err(invalid("lambda", "needs a finite lambda > 1"));
        }
        Ok(Self { lambda })
    }

    fn pickands_derivative(&self, t: f64) -> f64 {
        let l = self.lambda;
        let (u, v) = (1.0 - t, t);
        let m = u.max(v);
        if m == 0.0 {
            return 0.0;
        }
        let (u, v) = (u / m, v / m);
        // Scale-free form of (v^{λ-1} - u^{λ-1}) (u^λ + v^λ)^{1/λ - 1}.
        (v.powf(l - 1.0) - u.powf(l - 1.0)) * (u.powf(l) + v.powf(l)).powf(1.0 / l - 1.0)
    }

    /// `P(W ≤ w)`.
    pub fn angular_cdf(&self, w: f64) -> f64 {
        if w >= 1.0 {
            return 1.0;
        }
        if w < 0.0 {
            return 0.0;
        }
        0.5 * (1.0 - self.pickands_derivative(1.0 - w))
    }

    fn sample_angle(&self, rng: &mut PathRng) -> f64 {
        let target: f64 = rng.random();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.angular_cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl GeneratorDraw for PickandsPair {
    fn n_points(&self) -> usize {
        2
    }

    fn bound(&self) -> Option<f64> {
        Some(2.0)
    }

    fn draw(&self, rng: &mut PathRng, out: &mut [f64]) {
        let w = self.sample_angle(rng);
        out[0] = 2.0 * (1.0 - w);
        out[1] = 2.0 * w;
    }
}

/// Serialized form `{"kind": ..., "a": ..., "dim": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Constant,
    Permutation,
    Sinusoid,
}

impl TryFrom<GeneratorConfig> for GeneratorModel {
    type Error = Error;

    fn try_from(cfg: GeneratorConfig) -> Result<Self> {
        match cfg.kind {
            GeneratorKind::Constant => Ok(Self::ConstantOne),
            GeneratorKind::Permutation => {
                Self::permutation(cfg.dim.ok_or_else(|| invalid("dim", "required for the permutation generator"))?)
            }
            GeneratorKind::Sinusoid => {
                Self::sinusoid(cfg.a.ok_or_else(|| invalid("a", "required for the sinusoid generator"))?)
            }
        }
    }
}

impl From<GeneratorModel> for GeneratorConfig {
    fn from(model: GeneratorModel) -> Self {
        match model {
            GeneratorModel::ConstantOne => Self { kind: GeneratorKind::Constant, a: None, dim: None },
            GeneratorModel::Permutation { dim } => Self { kind: GeneratorKind::Permutation, a: None, dim: Some(dim) },
            GeneratorModel::Sinusoid { a } => Self { kind: GeneratorKind::Sinusoid, a: Some(a), dim: None },
        }
    }
}

impl Serialize for GeneratorModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorConfig::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneratorModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cfg = GeneratorConfig::deserialize(d)?;
        Self::try_from(cfg).map_err(serde::de::Error::custom)
    }
}
