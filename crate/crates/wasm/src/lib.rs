use maxlin::moments::smsp_mse;
use maxlin::sampler::{fine_points, restrict, simulate_sgpp, simulate_smsp, DEFAULT_FLOOR};
use maxlin::{GeneratorModel, Grid, ProcessKind, QuadratureConfig, ReconstructedProcess, WeightFamily};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 4097;
const MAX_D: usize = 256;

fn check_sizes(d: usize, n_points: usize) -> maxlin::Result<()> {
    if d == 0 || d > MAX_D {
        return Err(maxlin::Error::InvalidParameter { name: "d", reason: format!("{d} must lie in 1..={MAX_D}") });
    }
    if !(2..=MAX_POINTS).contains(&n_points) {
        return Err(maxlin::Error::InvalidParameter {
            name: "n_points",
            reason: format!("{n_points} must lie in 2..={MAX_POINTS}"),
        });
    }
    Ok(())
}

/// Fine points that contain every point of the uniform grid with `d` cells.
fn aligned_points(d: usize, n_points: usize) -> Vec<f64> {
    let per_cell = ((n_points - 1) / d).max(1);
    fine_points(d * per_cell + 1)
}

/// A simulated path, its grid restriction and the max-linear reconstruction.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Reconstruction {
    t: Vec<f64>,
    path: Vec<f64>,
    grid: Vec<f64>,
    observations: Vec<f64>,
    reconstructed: Vec<f64>,
    sup_error: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<f64> {
        self.path.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn observations(&self) -> Vec<f64> {
        self.observations.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn reconstructed(&self) -> Vec<f64> {
        self.reconstructed.clone()
    }

    #[wasm_bindgen(getter = supError)]
    pub fn sup_error(&self) -> f64 {
        self.sup_error
    }
}

pub fn reconstruct_path(kind: &str, a: f64, d: usize, seed: u64, n_points: usize) -> maxlin::Result<Reconstruction> {
    check_sizes(d, n_points)?;
    let model = GeneratorModel::sinusoid(a)?;
    let kind = match kind {
        "smsp" => ProcessKind::Smsp,
        "sgpp" => ProcessKind::Sgpp,
        other => {
            return Err(maxlin::Error::InvalidParameter { name: "kind", reason: format!("unknown process {other:?}") })
        }
    };
    let t = aligned_points(d, n_points);
    let sample = match kind {
        ProcessKind::Smsp => simulate_smsp(&model, &t, seed)?,
        ProcessKind::Sgpp => simulate_sgpp(&model, &t, seed, DEFAULT_FLOOR)?,
    };
    let grid = Grid::uniform(d)?;
    let obs = restrict(&sample, &grid)?;
    let weights = WeightFamily::for_generator(grid.clone(), &model)?;
    let process = ReconstructedProcess::new(weights, obs.clone(), kind)?;
    let reconstructed = process.eval_many(&t)?;
    let sup_error = sample.values.iter().zip(&reconstructed).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(Reconstruction {
        t,
        path: sample.values,
        grid: grid.points().to_vec(),
        observations: obs.values,
        reconstructed,
        sup_error,
    })
}

/// Quadrature MSE of the SMSP reconstruction at `n_points` equally spaced
/// points, as `[t_0, mse_0, t_1, mse_1, ...]`.
pub fn mse_curve(a: f64, d: usize, n_points: usize) -> maxlin::Result<Vec<f64>> {
    check_sizes(d, n_points)?;
    let model = GeneratorModel::sinusoid(a)?;
    let weights = WeightFamily::for_generator(Grid::uniform(d)?, &model)?;
    let cfg = QuadratureConfig::default();
    let mut out = Vec::with_capacity(2 * n_points);
    for t in fine_points(n_points) {
        out.push(t);
        out.push(smsp_mse(&model, &weights, t, &cfg)?);
    }
    Ok(out)
}

/// The `d + 1` weight functions tabulated at `n_points` equally spaced
/// points, row `i` holding `g_i`.
pub fn weight_table(a: f64, d: usize, n_points: usize) -> maxlin::Result<Vec<f64>> {
    check_sizes(d, n_points)?;
    let model = GeneratorModel::sinusoid(a)?;
    let weights = WeightFamily::for_generator(Grid::uniform(d)?, &model)?;
    let t = fine_points(n_points);
    let mut out = vec![0.0; (d + 1) * n_points];
    for (k, &tk) in t.iter().enumerate() {
        let cw = weights.cell_weights(tk)?;
        out[(cw.cell - 1) * n_points + k] = cw.left;
        out[cw.cell * n_points + k] = cw.right;
    }
    Ok(out)
}

fn js(e: maxlin::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = simulateReconstruct)]
pub fn simulate_reconstruct_js(
    kind: &str,
    a: f64,
    d: usize,
    seed: u32,
    n_points: usize,
) -> Result<Reconstruction, JsError> {
    reconstruct_path(kind, a, d, seed as u64, n_points).map_err(js)
}

#[wasm_bindgen(js_name = mseCurve)]
pub fn mse_curve_js(a: f64, d: usize, n_points: usize) -> Result<Vec<f64>, JsError> {
    mse_curve(a, d, n_points).map_err(js)
}

#[wasm_bindgen(js_name = weightFunctions)]
pub fn weight_functions_js(a: f64, d: usize, n_points: usize) -> Result<Vec<f64>, JsError> {
    weight_table(a, d, n_points).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruction_interpolates_grid() {
        let r = reconstruct_path("smsp", 0.5, 8, 3, 257).unwrap();
        assert_eq!(r.t.len(), 257);
        for (&s, &v) in r.grid.iter().zip(&r.observations) {
            let k = r.t.iter().position(|&t| t == s).unwrap();
            assert_eq!(r.reconstructed[k], v);
            assert_eq!(r.path[k], v);
        }
        assert!(r.sup_error > 0.0 && r.sup_error.is_finite());
    }

    #[test]
    fn sgpp_reconstruction_is_nonpositive() {
        let r = reconstruct_path("sgpp", 0.3, 4, 1, 101).unwrap();
        assert!(r.reconstructed.iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(reconstruct_path("brownian", 0.5, 4, 1, 65).is_err());
        assert!(reconstruct_path("smsp", 1.5, 4, 1, 65).is_err());
        assert!(mse_curve(0.5, 0, 65).is_err());
        assert!(weight_table(0.5, 4, 1).is_err());
    }

    #[test]
    fn mse_vanishes_on_grid() {
        let curve = mse_curve(0.5, 4, 9).unwrap();
        for pair in curve.chunks(2) {
            if pair[0] == 0.25 || pair[0] == 0.5 {
                assert_eq!(pair[1], 0.0);
            } else {
                assert!(pair[1] >= 0.0);
            }
        }
    }

    #[test]
    fn weights_form_a_partition() {
        let n = 41;
        let table = weight_table(0.5, 4, n).unwrap();
        for k in 0..n {
            let col: Vec<f64> = (0..5).map(|i| table[i * n + k]).collect();
            assert!(col.iter().all(|&g| (0.0..=1.0).contains(&g)));
            assert!(col.contains(&1.0) || col.iter().filter(|&&g| g > 0.0).count() == 2);
        }
        assert_eq!(table[0], 1.0);
        assert_eq!(table[4 * n + n - 1], 1.0);
    }
}
