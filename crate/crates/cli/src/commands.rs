use std::path::Path;

use maxlin::dnorm::{DNormSpec, NormConfig, NormFamily};
use maxlin::experiments::{self, Target};
use maxlin::generator::GeneratorDraw;
use maxlin::moments;
use maxlin::sampler::{self, fine_points, ObservationVector, POINT_MATCH_TOL};
use maxlin::{GeneratorModel, Grid, PickandsPair, QuadratureConfig, ReconstructedProcess, WeightFamily};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Inline, Loaded, SCHEMA};
use crate::error::CliError;
use crate::output::{num, Output};

/// Settings shared by every command after flags override the config.
pub struct Context {
    pub loaded: Loaded,
    pub seed: u64,
}

impl Context {
    fn cfg(&self) -> &ExperimentConfig {
        &self.loaded.config
    }

    fn probes(&self) -> Vec<f64> {
        self.cfg().probe_points.clone().unwrap_or_else(|| fine_points(self.cfg().fine_points))
    }
}

const DEFAULT_MSE_PROBES: [f64; 5] = [0.1, 0.3, 0.45, 0.6, 0.85];
const DEFAULT_LAMBDAS: [f64; 5] = [1.0001, 1.5, 2.0, 4.0, 8.0];

fn generator_json(model: &GeneratorModel) -> Value {
    serde_json::to_value(model).expect("generator serializes")
}

pub fn simulate(ctx: &Context, out: &mut Output) -> Result<Value, CliError> {
    let cfg = ctx.cfg();
    let model = ctx.loaded.generator()?;
    let points = fine_points(cfg.fine_points);
    let paths = sampler::simulate_batch(&model, &points, cfg.kind, ctx.seed, cfg.n_paths, cfg.floor)?;
    let rows = paths.iter().enumerate().flat_map(|(id, p)| {
        p.points
            .iter()
            .zip(&p.values)
            .map(move |(&t, &v)| vec![num(t), num(v), id.to_string(), p.kind.as_str().to_string(), p.seed.to_string()])
    });
    out.csv("paths.csv", &["t", "value", "path_id", "kind", "seed"], rows)?;
    let meta = json!({
        "schema": SCHEMA,
        "command": "simulate",
        "generator": generator_json(&model),
        "kind": cfg.kind.as_str(),
        "n_paths": cfg.n_paths,
        "base_seed": ctx.seed,
        "fine_points": cfg.fine_points,
        "floor": cfg.floor,
        "paths_file": "paths.csv",
    });
    out.json("paths.json", &meta)?;
    Ok(meta)
}

fn read_observations(path: &Path, grid: &Grid) -> Result<ObservationVector, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["s", "value"] {
        return Err(CliError::Input(format!("{}: header must be `s,value`", path.display())));
    }
    let mut values = vec![None; grid.points().len()];
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|x| x.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("{}: row {} is not numeric", path.display(), k + 1)))
        };
        let (s, v) = (parse(0)?, parse(1)?);
        let j = sampler::find_point(grid.points(), s).ok_or_else(|| {
            CliError::Input(format!("observation point {s} is not a grid point (tolerance {POINT_MATCH_TOL})"))
        })?;
        if values[j].replace(v).is_some() {
            return Err(CliError::Input(format!("grid point {s} observed twice")));
        }
    }
    let values = values
        .into_iter()
        .zip(grid.points())
        .map(|(v, &s)| v.ok_or(maxlin::Error::MissingGridPoint(s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ObservationVector::new(grid.clone(), values)?)
}

pub fn reconstruct(ctx: &Context, out: &mut Output) -> Result<Value, CliError> {
    let cfg = ctx.cfg();
    let grid = ctx.loaded.grid()?;
    let obs_path = cfg.observations.as_deref().ok_or_else(|| CliError::Config("`observations` is required".into()))?;
    let obs = read_observations(&ctx.loaded.resolve(obs_path), &grid)?;
    let (weights, source) = match ctx.loaded.norm()? {
        Some(spec) => {
            let src = json!({ "norm": NormConfig::from_spec(&spec, None) });
            (WeightFamily::for_dnorm(grid.clone(), &spec)?, src)
        }
        None => {
            let model = ctx.loaded.generator()?;
            (WeightFamily::for_generator(grid.clone(), &model)?, json!({ "generator": generator_json(&model) }))
        }
    };
    let process = ReconstructedProcess::new(weights, obs, cfg.kind)?;
    let probes = ctx.probes();
    let values = process.eval_many(&probes)?;
    out.csv(
        "reconstruct.csv",
        &["t", "reconstructed"],
        probes.iter().zip(&values).map(|(&t, &v)| vec![num(t), num(v)]),
    )?;
    let extrema = (1..=grid.d())
        .map(|i| {
            let e = process.cell_extrema(i)?;
            let (lo, hi) = grid.cell_bounds(i);
            Ok(json!({ "cell": i, "lo": lo, "hi": hi, "sup": e.sup, "inf": e.inf, "argmin": e.argmin }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let meta = json!({
        "schema": SCHEMA,
        "command": "reconstruct",
        "kind": cfg.kind.as_str(),
        "grid": grid.points(),
        "weights": source,
        "cell_extrema": extrema,
        "output_file": "reconstruct.csv",
    });
    out.json("reconstruct.json", &meta)?;
    Ok(meta)
}

pub fn convergence(ctx: &Context, out: &mut Output) -> Result<Value, CliError> {
    let cfg = ctx.cfg();
    let model = ctx.loaded.generator()?;
    if cfg.grids.is_empty() {
        return Err(CliError::Config("`grids` must list at least one d".into()));
    }
    let fine = fine_points(cfg.fine_points);
    let targets = cfg.targets.clone().unwrap_or_else(|| Target::ALL.to_vec());
    let mut files = serde_json::Map::new();
    for target in targets {
        let rows = experiments::convergence(&model, &fine, &cfg.grids, target, cfg.n_paths, ctx.seed, cfg.floor)?;
        let name = format!("convergence_{}.csv", target.as_str());
        out.csv(
            &name,
            &["d", "median_sup_error", "q90_sup_error"],
            rows.iter().map(|r| vec![r.d.to_string(), num(r.median_sup_error), num(r.q90_sup_error)]),
        )?;
        files.insert(target.as_str().to_string(), Value::String(name));
    }
    let meta = json!({
        "schema": SCHEMA,
        "command": "convergence",
        "generator": generator_json(&model),
        "grids": cfg.grids,
        "n_paths": cfg.n_paths,
        "base_seed": ctx.seed,
        "fine_points": cfg.fine_points,
        "floor": cfg.floor,
        "files": files,
    });
    out.json("convergence.json", &meta)?;
    Ok(meta)
}

pub fn mse(ctx: &Context, out: &mut Output) -> Result<Value, CliError> {
    let cfg = ctx.cfg();
    let model = ctx.loaded.generator()?;
    if cfg.grids.is_empty() {
        return Err(CliError::Config("`grids` must list at least one d".into()));
    }
    let qcfg = QuadratureConfig::with_tol(cfg.abs_tol);
    let probes = cfg.probe_points.clone().unwrap_or_else(|| DEFAULT_MSE_PROBES.to_vec());
    let header = ["t", "d", "mse_quadrature", "mse_montecarlo", "mc_stderr"];
    let weights = cfg
        .grids
        .iter()
        .map(|&d| Ok((d, WeightFamily::for_generator(Grid::uniform(d)?, &model)?)))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut smsp = Vec::new();
    for (d, w) in &weights {
        for &t in &probes {
            let q = moments::smsp_mse(&model, w, t, &qcfg)?;
            let mc = experiments::mc_smsp_mse(&model, w, t, cfg.mc_paths, ctx.seed)?;
            smsp.push(vec![num(t), d.to_string(), num(q), num(mc.mean), num(mc.std_error)]);
        }
    }
    out.csv("mse_smsp.csv", &header, smsp)?;

    let mut meta = json!({
        "schema": SCHEMA,
        "command": "mse",
        "generator": generator_json(&model),
        "grids": cfg.grids,
        "probe_points": probes,
        "mc_paths": cfg.mc_paths,
        "base_seed": ctx.seed,
        "abs_tol": cfg.abs_tol,
        "files": { "smsp": "mse_smsp.csv" },
    });

    if let Some(c) = cfg.threshold {
        let mut sgpp = Vec::new();
        let mut survivors = Vec::new();
        for (d, w) in &weights {
            for &t in &probes {
                let q = moments::sgpp_conditional_mse(&model, w, t, c, &qcfg)?;
                let mc = experiments::mc_sgpp_conditional_mse(&model, w, t, c, cfg.mc_paths, ctx.seed, cfg.floor)?;
                sgpp.push(vec![num(t), d.to_string(), num(q), num(mc.mean), num(mc.std_error)]);
                survivors.push(json!({ "t": t, "d": d, "survivors": mc.n }));
            }
        }
        out.csv("mse_sgpp.csv", &header, sgpp)?;
        meta["threshold"] = json!(c);
        meta["files"]["sgpp"] = json!("mse_sgpp.csv");
        meta["sgpp_survivors"] = Value::Array(survivors);
    }
    out.json("mse.json", &meta)?;
    Ok(meta)
}

/// A two-point generator realizing `spec`, for Monte-Carlo cross-checks.
fn pair_generator(spec: &DNormSpec) -> Result<Option<Box<dyn GeneratorDraw>>, CliError> {
    Ok(match spec {
        DNormSpec::Sum => Some(Box::new(GeneratorModel::Permutation { dim: 2 }.prepare(&[0.0, 1.0])?)),
        DNormSpec::Max => Some(Box::new(GeneratorModel::ConstantOne.prepare(&[0.0, 1.0])?)),
        DNormSpec::Logistic { lambda } if *lambda > 1.0 => Some(Box::new(PickandsPair::logistic(*lambda)?)),
        _ => None,
    })
}

fn estimate(e: &experiments::McEstimate) -> Value {
    json!({ "mean": e.mean, "std_error": e.std_error, "n": e.n })
}

pub fn moments(ctx: &Context, out: &mut Output) -> Result<Value, CliError> {
    let cfg = ctx.cfg();
    let qcfg = QuadratureConfig::with_tol(cfg.abs_tol);
    let mut records = Vec::new();

    let mut norms = vec![DNormSpec::Sum, DNormSpec::Max];
    for &l in cfg.lambdas.as_deref().unwrap_or(&DEFAULT_LAMBDAS) {
        norms.push(DNormSpec::logistic(l)?);
    }
    if let Some(spec) = ctx.loaded.norm()? {
        if !norms.contains(&spec) {
            norms.push(spec);
        }
    }
    for spec in &norms {
        let cov = moments::msm_covariance(&spec.pair()?, &qcfg)?;
        let mut rec = json!({
            "op": "msm_covariance",
            "params": { "norm": NormConfig::from_spec(spec, None) },
            "value": cov,
            "abs_tol": cfg.abs_tol,
        });
        if cfg.mc_paths > 0 {
            if let Some(gen) = pair_generator(spec)? {
                let mut e = experiments::mc_msm_cross_moment(gen.as_ref(), cfg.mc_paths, ctx.seed)?;
                e.mean -= 1.0;
                rec["mc_crosscheck"] = estimate(&e);
            }
        }
        records.push(rec);
    }

    let requests = if cfg.conditional.is_empty() {
        let max = NormConfig { family: NormFamily::Max, lambda: None, samples_ref: None };
        let l2 = NormConfig { family: NormFamily::Logistic, lambda: Some(2.0), samples_ref: None };
        vec![(-0.1, -0.1, max.clone()), (-0.3, -0.3, max), (-0.1, -0.1, l2)]
    } else {
        cfg.conditional
            .iter()
            .map(|r| Ok((r.u, r.v, ctx.loaded.inline(&r.norm)?)))
            .collect::<Result<Vec<_>, CliError>>()?
    };
    for (u, v, norm_cfg) in requests {
        let spec = ctx.loaded.build_norm(&Inline::Value(norm_cfg.clone()))?;
        let pair = spec.pair()?;
        let params = json!({ "u": u, "v": v, "norm": norm_cfg });
        let survival = moments::gpd_joint_survival(&pair, u, v)?;
        let m = moments::gpd_conditional_moments(&pair, u, v, &qcfg)?;
        let mc = match (cfg.mc_paths > 0).then(|| pair_generator(&spec)).transpose()?.flatten() {
            Some(gen) => Some(experiments::mc_gpd_moments(gen.as_ref(), u, v, cfg.mc_paths, ctx.seed)?),
            None => None,
        };
        for (op, value, check) in [
            ("gpd_joint_survival", survival, mc.map(|m| m.survival)),
            ("gpd_cond_second_moment", m.u2, mc.map(|m| m.u2)),
            ("gpd_cond_cross_moment", m.uv, mc.map(|m| m.uv)),
            ("gpd_cond_second_moment_swapped", m.v2, mc.map(|m| m.v2)),
        ] {
            let mut rec = json!({ "op": op, "params": params, "value": value, "abs_tol": cfg.abs_tol });
            if let Some(c) = check {
                rec["mc_crosscheck"] = estimate(&c);
            }
            records.push(rec);
        }
    }

    let doc = json!({
        "schema": SCHEMA,
        "command": "moments",
        "base_seed": ctx.seed,
        "records": records,
    });
    out.json("moments.json", &doc)?;
    Ok(json!({ "schema": SCHEMA, "command": "moments", "records": doc["records"].as_array().map_or(0, Vec::len) }))
}
