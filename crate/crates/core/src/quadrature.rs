//! Adaptive Simpson quadrature on finite intervals, on `[0, ∞)` via the
//! substitution `u = s / (1 - s)`, and a tensor-product rule on rectangles.

use crate::error::{invalid, Error, Result};

/// Tolerance and depth limits shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    /// Maximum bisection depth of a single interval.
    pub max_subdivisions: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-9, max_subdivisions: 48 }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(invalid("abs_tol", "must be positive and finite"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }
}

// Below this per-panel tolerance the Simpson difference is dominated by
// rounding, so the panel is accepted.
const TOL_FLOOR: f64 = 1e-15;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn adapt<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol.max(TOL_FLOOR) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::QuadratureNonConvergence { a: p.a, b: p.b });
    }
    let l = adapt(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * tol, depth - 1)?;
    let r = adapt(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `cfg.abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("integration bounds"));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    // Split once up front so that integrands vanishing at a, m and b are not
    // mistaken for zero.
    let mut total = 0.0;
    for (lo, hi, flo, fhi) in [(a, m, fa, fm), (m, b, fm, fb)] {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        total += adapt(
            &f,
            Panel { a: lo, b: hi, fa: flo, fm: fmid, fb: fhi, whole: simpson(lo, hi, flo, fmid, fhi) },
            0.5 * cfg.abs_tol,
            cfg.max_subdivisions,
        )?;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureNonConvergence { a, b });
    }
    Ok(total)
}

/// Integrates `f` over `[a, b]` with extra mandatory breakpoints (kinks of the
/// integrand). Breakpoints outside `(a, b)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let n = knots.len() + 1;
    let piece_cfg = QuadratureConfig { abs_tol: cfg.abs_tol / n as f64, ..*cfg };
    let mut lo = a;
    let mut total = 0.0;
    for hi in knots.into_iter().chain(std::iter::once(b)) {
        total += integrate(&f, lo, hi, &piece_cfg)?;
        lo = hi;
    }
    Ok(total)
}

/// Integrates `f` over `[0, ∞)` through `u = s / (1 - s)`, `du = ds / (1 - s)^2`.
///
/// The transformed integrand is evaluated on the open interval only; its value
/// at `s = 1` is taken as `tail_limit`, the limit of `f(u) u^2` as `u → ∞`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tail_limit: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let g = |s: f64| {
        if s >= 1.0 {
            tail_limit
        } else {
            let one_minus = 1.0 - s;
            f(s / one_minus) / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

/// Tensor-product adaptive Simpson over `[ax, bx] × [ay, by]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let width_y = (by - ay).abs().max(f64::MIN_POSITIVE);
    let inner_cfg = QuadratureConfig { abs_tol: 0.1 * cfg.abs_tol / width_y, ..*cfg };
    // Inner failures surface as NaN and are reported by the outer rule.
    let outer = |y: f64| integrate(|x| f(x, y), ax, bx, &inner_cfg).unwrap_or(f64::NAN);
    integrate(outer, ay, by, cfg)
}
