//! Finite-dimensional D-norms `‖x‖_D = E max_i |x_i| Z_i`.
//!
//! Three closed-form families are provided (sum, max and the symmetric
//! logistic norm) together with a Monte-Carlo evaluator over a fixed matrix of
//! generator draws.

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Frechet};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seeding::{path_rng, streams};
use crate::stats::mean_and_se;

/// Default number of generator draws for Monte-Carlo norms.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// A norm value with its Monte-Carlo standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub std_error: f64,
}

impl NormValue {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

/// Row-major matrix of nonnegative generator draws, one row per draw.
#[derive(Clone, PartialEq)]
pub struct EmpiricalSamples {
    data: Arc<[f64]>,
    n: usize,
    dim: usize,
}

impl fmt::Debug for EmpiricalSamples {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmpiricalSamples").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

impl EmpiricalSamples {
    /// Validates nonnegativity and that each column mean lies within three
    /// standard errors of one.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(invalid("samples", format!("{} values do not form rows of length {dim}", data.len())));
        }
        if let Some(&bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid("samples", format!("entry {bad} is not a finite nonnegative number")));
        }
        let n = data.len() / dim;
        let samples = Self { data: data.into(), n, dim };
        for column in 0..dim {
            let (mean, std_error) = samples.column_mean(column);
            if (mean - 1.0).abs() > 3.0 * std_error + 1e-12 {
                return Err(Error::BadGeneratorMean { column, mean, std_error });
            }
        }
        Ok(samples)
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column_mean(&self, column: usize) -> (f64, f64) {
        mean_and_se(self.rows().map(|r| r[column]))
    }
}

/// A D-norm on `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum DNormSpec {
    /// `‖x‖_1`: independent margins.
    Sum,
    /// `‖x‖_∞`: completely dependent margins.
    Max,
    /// `(Σ |x_i|^λ)^{1/λ}` with `λ ≥ 1`.
    Logistic { lambda: f64 },
    /// Monte-Carlo average over a fixed sample matrix.
    Empirical(EmpiricalSamples),
}

impl DNormSpec {
    pub fn logistic(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 1.0 {
            return Err(invalid("lambda", format!("{lambda} must be finite and at least 1")));
        }
        Ok(Self::Logistic { lambda })
    }

    pub fn empirical(samples: EmpiricalSamples) -> Self {
        Self::Empirical(samples)
    }

    /// Empirical logistic norm from the generator `Z_i = F_i / Γ(1 - 1/λ)` with
    /// `F_i` i.i.d. standard Fréchet of shape `λ`. Needs `λ > 1`.
    pub fn from_logistic_generator(lambda: f64, dim: usize, n: usize, seed: u64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 1.0 {
            return Err(invalid("lambda", "the Fréchet generator needs a finite lambda > 1"));
        }
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let frechet = Frechet::new(0.0, 1.0, lambda).map_err(|e| invalid("lambda", e.to_string()))?;
        let scale = statrs::function::gamma::gamma(1.0 - 1.0 / lambda);
        let mut data = Vec::with_capacity(n * dim);
        for k in 0..n {
            let mut rng = path_rng(seed, streams::EMPIRICAL, k as u64);
            data.extend((0..dim).map(|_| frechet.sample(&mut rng) / scale));
        }
        Ok(Self::Empirical(EmpiricalSamples::new(data, dim)?))
    }

    /// The dimension this norm is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Empirical(s) => Some(s.dim),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Self::Empirical(_))
    }

    /// Evaluates `‖x‖_D`.
    pub fn eval(&self, x: &[f64]) -> Result<NormValue> {
        if x.is_empty() {
            return Err(invalid("x", "must have at least one component"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("norm argument"));
        }
        let abs = x.iter().map(|v| v.abs());
        let value = match self {
            Self::Sum => abs.sum(),
            Self::Max => abs.fold(0.0, f64::max),
            Self::Logistic { lambda } => logistic_norm(x, *lambda),
            Self::Empirical(s) => {
                if s.dim != x.len() {
                    return Err(Error::DimensionMismatch { expected: s.dim, actual: x.len() });
                }
                let (value, std_error) =
                    mean_and_se(s.rows().map(|z| z.iter().zip(x).map(|(zi, xi)| zi * xi.abs()).fold(0.0, f64::max)));
                return Ok(NormValue { value, std_error });
            }
        };
        Ok(NormValue::exact(value))
    }

    /// `ε_D = ‖(1, …, 1)‖_D`.
    pub fn extremal_coefficient(&self, dim: usize) -> Result<NormValue> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        self.eval(&vec![1.0; dim])
    }

    /// The bivariate restriction, usable wherever a [`PairNorm`] is needed.
    pub fn pair(&self) -> Result<SpecPair> {
        if let Some(dim) = self.dim() {
            if dim != 2 {
                return Err(Error::DimensionMismatch { expected: 2, actual: dim });
            }
        }
        Ok(SpecPair(self.clone()))
    }
}

fn logistic_norm(x: &[f64], lambda: f64) -> f64 {
    let m = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(lambda)).sum();
    m * s.powf(1.0 / lambda)
}

/// A bivariate D-norm `(x, y) ↦ ‖(x, y)‖`.
pub trait PairNorm: Send + Sync + fmt::Debug {
    fn norm(&self, x: f64, y: f64) -> f64;
}

impl<P: PairNorm + ?Sized> PairNorm for Arc<P> {
    fn norm(&self, x: f64, y: f64) -> f64 {
        (**self).norm(x, y)
    }
}

impl<P: PairNorm + ?Sized> PairNorm for &P {
    fn norm(&self, x: f64, y: f64) -> f64 {
        (**self).norm(x, y)
    }
}

/// A [`DNormSpec`] checked to be usable in dimension two.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecPair(DNormSpec);

impl SpecPair {
    pub fn spec(&self) -> &DNormSpec {
        &self.0
    }
}

impl PairNorm for SpecPair {
    fn norm(&self, x: f64, y: f64) -> f64 {
        // Dimension was checked on construction; only non-finite input can fail.
        self.0.eval(&[x, y]).map(|v| v.value).unwrap_or(f64::NAN)
    }
}

/// `(x, y) ↦ ‖(y, x)‖`.
#[derive(Debug, Clone)]
pub struct Swapped<P>(pub P);

impl<P: PairNorm> PairNorm for Swapped<P> {
    fn norm(&self, x: f64, y: f64) -> f64 {
        self.0.norm(y, x)
    }
}

/// JSON form `{"family": ..., "lambda": ..., "samples_ref": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub family: NormFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    Sum,
    Max,
    Logistic,
    Empirical,
}

impl NormConfig {
    /// Builds the norm; `samples` must be supplied (already loaded from
    /// `samples_ref`) for the empirical family.
    pub fn build(&self, samples: Option<EmpiricalSamples>) -> Result<DNormSpec> {
        match self.family {
            NormFamily::Sum => Ok(DNormSpec::Sum),
            NormFamily::Max => Ok(DNormSpec::Max),
            NormFamily::Logistic => {
                let lambda = self.lambda.ok_or_else(|| invalid("lambda", "required for the logistic family"))?;
                DNormSpec::logistic(lambda)
            }
            NormFamily::Empirical => samples
                .map(DNormSpec::Empirical)
                .ok_or_else(|| invalid("samples_ref", "required for the empirical family")),
        }
    }

    pub fn from_spec(spec: &DNormSpec, samples_ref: Option<String>) -> Self {
        let (family, lambda) = match spec {
            DNormSpec::Sum => (NormFamily::Sum, None),
            DNormSpec::Max => (NormFamily::Max, None),
            DNormSpec::Logistic { lambda } => (NormFamily::Logistic, Some(*lambda)),
            DNormSpec::Empirical(_) => (NormFamily::Empirical, None),
        };
        Self { family, lambda, samples_ref }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones(n: usize, dim: usize) -> EmpiricalSamples {
        EmpiricalSamples::new(vec![1.0; n * dim], dim).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(DNormSpec::Sum.eval(&[1.0, 2.0]).unwrap(), NormValue::exact(3.0));
        let l2 = DNormSpec::logistic(2.0).unwrap();
        assert!((l2.eval(&[3.0, 4.0]).unwrap().value - 5.0).abs() < 1e-12);
        assert_eq!(DNormSpec::Max.eval(&[-0.5, 0.2]).unwrap().value, 0.5);
    }

    #[test]
    fn complete_dependence_generator() {
        let spec = DNormSpec::Empirical(ones(10, 2));
        let v = spec.eval(&[1.0, 1.0]).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.std_error, 0.0);
    }

    #[test]
    fn extremal_coefficients() {
        assert_eq!(DNormSpec::Sum.extremal_coefficient(2).unwrap().value, 2.0);
        for dim in 1..6 {
            assert_eq!(DNormSpec::Max.extremal_coefficient(dim).unwrap().value, 1.0);
        }
        let l2 = DNormSpec::logistic(2.0).unwrap().extremal_coefficient(2).unwrap().value;
        assert!((l2 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let spec = DNormSpec::Empirical(ones(4, 3));
        assert_eq!(spec.eval(&[1.0, 1.0]).unwrap_err(), Error::DimensionMismatch { expected: 3, actual: 2 });
        assert_eq!(DNormSpec::Sum.eval(&[f64::NAN]).unwrap_err(), Error::NonFinite("norm argument"));
        assert!(DNormSpec::logistic(0.5).is_err());
        assert!(EmpiricalSamples::new(vec![1.0, -1.0], 2).is_err());
        assert!(matches!(EmpiricalSamples::new(vec![2.0; 8], 2).unwrap_err(), Error::BadGeneratorMean { .. }));
        assert!(spec.pair().is_err());
    }

    #[test]
    fn logistic_limits() {
        let x = [0.3, -1.2, 0.7];
        let one = DNormSpec::logistic(1.0).unwrap().eval(&x).unwrap().value;
        assert!((one - 2.2).abs() < 1e-12);
        let big = DNormSpec::logistic(500.0).unwrap().eval(&x).unwrap().value;
        assert!((big - 1.2).abs() < 1e-2);
    }

    #[test]
    fn permutation_generator_gives_sum_norm() {
        // Rows are permutations of (2, 0).
        let data = vec![2.0, 0.0, 0.0, 2.0];
        let spec = DNormSpec::Empirical(EmpiricalSamples::new(data, 2).unwrap());
        let v = spec.eval(&[0.4, -0.9]).unwrap();
        assert!((v.value - 1.3).abs() < 1e-12);
    }

    #[test]
    fn frechet_generator_matches_logistic() {
        for lambda in [3.0, 4.0] {
            let emp = DNormSpec::from_logistic_generator(lambda, 2, DEFAULT_MC_SAMPLES, 17).unwrap();
            let exact = DNormSpec::logistic(lambda).unwrap();
            for x in [[1.0, 1.0], [0.3, 1.0], [1.0, 0.1]] {
                let e = emp.eval(&x).unwrap();
                let c = exact.eval(&x).unwrap().value;
                assert!((e.value - c).abs() < 3.0 * e.std_error, "{lambda} {x:?} {e:?} {c}");
            }
        }
    }

    #[test]
    fn config_round_trip() {
        let cfg: NormConfig = serde_json::from_str(r#"{"family":"logistic","lambda":2.5}"#).unwrap();
        assert_eq!(cfg.build(None).unwrap(), DNormSpec::Logistic { lambda: 2.5 });
        let cfg: NormConfig = serde_json::from_str(r#"{"family":"empirical","samples_ref":"z.csv"}"#).unwrap();
        assert!(cfg.build(None).is_err());
        assert!(serde_json::from_str::<NormConfig>(r#"{"family":"gauss"}"#).is_err());
        let back = NormConfig::from_spec(&DNormSpec::Max, None);
        assert_eq!(serde_json::to_string(&back).unwrap(), r#"{"family":"max"}"#);
    }

    fn closed_specs() -> impl Strategy<Value = DNormSpec> {
        prop_oneof![
            Just(DNormSpec::Sum),
            Just(DNormSpec::Max),
            (1.0f64..20.0).prop_map(|lambda| DNormSpec::Logistic { lambda }),
        ]
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 3)
    }

    fn small_empirical() -> DNormSpec {
        DNormSpec::from_logistic_generator(4.0, 3, 4000, 3).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sandwich_and_triangle(spec in closed_specs(), x in vec3(), y in vec3()) {
            let nx = spec.eval(&x).unwrap().value;
            let max = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let sum: f64 = x.iter().map(|v| v.abs()).sum();
            prop_assert!(max <= nx + 1e-12 && nx <= sum + 1e-12);
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let nxy = spec.eval(&xy).unwrap().value;
            prop_assert!(nxy <= nx + spec.eval(&y).unwrap().value + 1e-12);
        }

        #[test]
        fn homogeneity_and_monotonicity(spec in closed_specs(), x in vec3(), c in -4.0f64..4.0, bump in vec3()) {
            let nx = spec.eval(&x).unwrap().value;
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            prop_assert!((spec.eval(&scaled).unwrap().value - c.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
            let larger: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a.abs() + b.abs()).collect();
            prop_assert!(nx <= spec.eval(&larger).unwrap().value + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn empirical_axioms_hold_path_by_path(x in vec3(), c in -4.0f64..4.0, bump in vec3(), y in vec3()) {
            let spec = small_empirical();
            let nx = spec.eval(&x).unwrap();
            let max = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let sum: f64 = x.iter().map(|v| v.abs()).sum();
            prop_assert!(nx.value >= max - 3.0 * nx.std_error - 1e-12);
            prop_assert!(nx.value <= sum + 3.0 * nx.std_error + 1e-12);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let ns = spec.eval(&scaled).unwrap().value;
            prop_assert!((ns - c.abs() * nx.value).abs() <= 1e-12 * (1.0 + ns));
            let larger: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a.abs() + b.abs()).collect();
            prop_assert!(nx.value <= spec.eval(&larger).unwrap().value);
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(spec.eval(&xy).unwrap().value <= nx.value + spec.eval(&y).unwrap().value + 1e-12);
        }
    }

    #[test]
    fn standardization() {
        let emp = small_empirical();
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            for spec in [DNormSpec::Sum, DNormSpec::Max, DNormSpec::Logistic { lambda: 3.0 }] {
                assert_eq!(spec.eval(&e).unwrap().value, 1.0);
            }
            let v = emp.eval(&e).unwrap();
            assert!((v.value - 1.0).abs() <= 3.0 * v.std_error);
        }
    }
}
