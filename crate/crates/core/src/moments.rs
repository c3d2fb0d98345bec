//! Second-moment machinery by quadrature: the mixed moment of a bivariate
//! standard max-stable pair, the mean squared error of the discretized SMSP
//! predictor, and conditional moments of bivariate standard GPD pairs in the
//! tail, which give the conditional mean squared error of the discretized SGPP.

use crate::dnorm::{PairNorm, Swapped};
use crate::error::{invalid, Error, Result};
use crate::generator::{GeneratorModel, PreparedGenerator};
use crate::maxlinear::WeightFamily;
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureConfig};

/// `E(XY) = ∫_0^∞ ‖(1, u)‖^{-2} du` for a standard max-stable pair `(X, Y)`
/// with D-norm `pair`; lies in `[1, 2]` and `Cov(X, Y) = E(XY) - 1`.
///
/// Integrated as `∫_0^1 ‖(1 - s, s)‖^{-2} ds`, the image of `u = s / (1 - s)`
/// after cancelling the Jacobian by homogeneity.
pub fn msm_cross_moment<P: PairNorm + ?Sized>(pair: &P, cfg: &QuadratureConfig) -> Result<f64> {
    let f = |s: f64| {
        let n = pair.norm(1.0 - s, s);
        1.0 / (n * n)
    };
    integrate_with_breaks(f, 0.0, 1.0, &[0.5], cfg)
}

pub fn msm_covariance<P: PairNorm + ?Sized>(pair: &P, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(msm_cross_moment(pair, cfg)? - 1.0)
}

/// D-norm of `(η_t, η̂_t)`: `‖(x, y)‖ = ‖(x, g_{i-1}(t) y, g_i(t) y)‖` under
/// the trivariate D-norm of the generator at `(t, s_{i-1}, s_i)`.
///
/// The same norm governs the SGPP pair `(V_t, V̂_t)` in its tail.
#[derive(Debug, Clone)]
pub struct PredictorPair {
    prepared: PreparedGenerator,
    left: f64,
    right: f64,
}

impl PredictorPair {
    pub fn new(model: &GeneratorModel, weights: &WeightFamily, t: f64) -> Result<Self> {
        let grid = weights.grid().ok_or(Error::Unsupported("discretized (grid-based) weights"))?;
        let cw = weights.cell_weights(t)?;
        let (lo, hi) = grid.cell_bounds(cw.cell);
        let prepared = model.prepare(&[t, lo, hi])?;
        Ok(Self { prepared, left: cw.left, right: cw.right })
    }

    /// Weights `(g_{i-1}(t), g_i(t))` of the cell holding `t`.
    pub fn weights(&self) -> (f64, f64) {
        (self.left, self.right)
    }
}

impl PairNorm for PredictorPair {
    fn norm(&self, x: f64, y: f64) -> f64 {
        self.prepared.norm(&[x, self.left * y, self.right * y])
    }
}

/// `E(η_t - η̂_t)^2 = 2 (2 - E(η_t η̂_t))` for the discretized SMSP built
/// from `weights`, with the joint law of the generator supplied by `model`.
pub fn smsp_mse(model: &GeneratorModel, weights: &WeightFamily, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let pair = PredictorPair::new(model, weights, t)?;
    let cross = msm_cross_moment(&pair, cfg)?;
    Ok((2.0 * (2.0 - cross)).max(0.0))
}

/// Relative survival below which conditioning is refused.
pub const MIN_SURVIVAL: f64 = 1e-12;

fn check_tail<P: PairNorm + ?Sized>(pair: &P, u: f64, v: f64) -> Result<f64> {
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite("tail arguments"));
    }
    if u > 0.0 || v > 0.0 {
        return Err(Error::OutsideTailRegion { u, v });
    }
    let n = pair.norm(u, v);
    if n > 1.0 + 1e-12 {
        return Err(Error::OutsideTailRegion { u, v });
    }
    Ok(n)
}

/// `P(U > u, V > v) = ‖(u, v)‖_1 - ‖(u, v)‖` for a standard GPD pair.
pub fn gpd_joint_survival<P: PairNorm + ?Sized>(pair: &P, u: f64, v: f64) -> Result<f64> {
    let n = check_tail(pair, u, v)?;
    Ok(u.abs() + v.abs() - n)
}

/// Conditional second moments of a standard GPD pair given `U > u, V > v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdMoments {
    pub survival: f64,
    /// `E(U^2 | U > u, V > v)`
    pub u2: f64,
    /// `E(UV | U > u, V > v)`
    pub uv: f64,
    /// `E(V^2 | U > u, V > v)`
    pub v2: f64,
}

impl GpdMoments {
    /// `E((U - V)^2 | U > u, V > v)`.
    pub fn squared_difference(&self) -> f64 {
        (self.u2 - 2.0 * self.uv + self.v2).max(0.0)
    }
}

// All kernels below work with magnitudes a = |u|, b = |v| rescaled so that
// max(a, b) = 1; integrands are then O(1) and tolerances are relative.

/// `E(U^2 1{U > u, V > v}) = a^3/3 - a^2 ‖(a, b)‖ + 2 ∫_0^a σ ‖(σ, b)‖ dσ`.
fn second_moment_numerator<P: PairNorm + ?Sized>(pair: &P, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let inner = integrate(|s| s * pair.norm(s, b), 0.0, a, cfg)?;
    Ok(a * a * a / 3.0 - a * a * pair.norm(a, b) + 2.0 * inner)
}

/// `E(UV 1{U > u, V > v})`, with the rectangle integral of the norm reduced to
/// one dimension by splitting along the diagonal and using homogeneity:
/// `∫_0^a ∫_0^b ‖(σ, τ)‖ = (ab/3) (∫_0^1 ‖(a, bτ)‖ dτ + ∫_0^1 ‖(aτ, b)‖ dτ)`.
fn cross_moment_numerator<P: PairNorm + ?Sized>(pair: &P, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let tol = QuadratureConfig { abs_tol: cfg.abs_tol / 4.0, ..*cfg };
    let rect = a * b / 3.0
        * (integrate(|r| pair.norm(a, b * r), 0.0, 1.0, &tol)? + integrate(|r| pair.norm(a * r, b), 0.0, 1.0, &tol)?);
    let edge_u = b * integrate(|s| pair.norm(s, b), 0.0, a, &tol)?;
    let edge_v = a * integrate(|s| pair.norm(a, s), 0.0, b, &tol)?;
    Ok(-rect + edge_u + edge_v - a * b * pair.norm(a, b))
}

fn normalized<P: PairNorm + ?Sized>(pair: &P, u: f64, v: f64) -> Result<(f64, f64, f64, f64)> {
    check_tail(pair, u, v)?;
    let scale = u.abs().max(v.abs());
    if scale == 0.0 {
        return Err(Error::NearIndependence(0.0));
    }
    let (a, b) = (u.abs() / scale, v.abs() / scale);
    let survival = a + b - pair.norm(a, b);
    if survival < MIN_SURVIVAL {
        return Err(Error::NearIndependence(survival * scale));
    }
    Ok((scale, a, b, survival))
}

/// `E(U^2 | U > u, V > v)`.
pub fn gpd_cond_second_moment<P: PairNorm + ?Sized>(pair: &P, u: f64, v: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (scale, a, b, survival) = normalized(pair, u, v)?;
    Ok(scale * scale * second_moment_numerator(pair, a, b, cfg)? / survival)
}

/// `E(UV | U > u, V > v)`.
pub fn gpd_cond_cross_moment<P: PairNorm + ?Sized>(pair: &P, u: f64, v: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (scale, a, b, survival) = normalized(pair, u, v)?;
    Ok(scale * scale * cross_moment_numerator(pair, a, b, cfg)? / survival)
}

/// All conditional second moments; `E(V^2 | ·)` is the `U^2` formula applied
/// to the coordinate-swapped pair.
pub fn gpd_conditional_moments<P: PairNorm + ?Sized>(
    pair: &P,
    u: f64,
    v: f64,
    cfg: &QuadratureConfig,
) -> Result<GpdMoments> {
    let (scale, a, b, survival) = normalized(pair, u, v)?;
    let s2 = scale * scale / survival;
    Ok(GpdMoments {
        survival: survival * scale,
        u2: s2 * second_moment_numerator(pair, a, b, cfg)?,
        uv: s2 * cross_moment_numerator(pair, a, b, cfg)?,
        v2: s2 * second_moment_numerator(&Swapped(pair), b, a, cfg)?,
    })
}

/// `E((V_t - V̂_t)^2 | V_t > c, V̂_t > c)` for the discretized SGPP.
pub fn sgpp_conditional_mse(
    model: &GeneratorModel,
    weights: &WeightFamily,
    t: f64,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(c < 0.0) {
        return Err(invalid("c", format!("threshold {c} must be negative")));
    }
    let pair = PredictorPair::new(model, weights, t)?;
    if let Some(bound) = model.path_bound() {
        if -c * bound > 1.0 {
            return Err(Error::OutsideTailRegion { u: c, v: c });
        }
    }
    Ok(gpd_conditional_moments(&pair, c, c, cfg)?.squared_difference())
}
