use std::fs;
use std::path::{Path, PathBuf};

use maxlin::dnorm::{DNormSpec, EmpiricalSamples, NormConfig};
use maxlin::sampler::{ProcessKind, DEFAULT_FINE_POINTS, DEFAULT_FLOOR};
use maxlin::{GeneratorModel, Grid};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// A JSON value given inline or as a path to a JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Inline<T> {
    Path(String),
    Value(T),
}

/// The single JSON document accepted by every subcommand. Fields a command
/// does not use are ignored by it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub schema: Option<u32>,
    #[serde(default)]
    pub generator: Option<Inline<GeneratorModel>>,
    #[serde(default)]
    pub norm: Option<Inline<NormConfig>>,
    #[serde(default)]
    pub grids: Vec<usize>,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub probe_points: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default = "default_fine_points")]
    pub fine_points: usize,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_kind")]
    pub kind: ProcessKind,
    /// Convergence targets: any of "smsp", "sgpp", "generator".
    #[serde(default)]
    pub targets: Option<Vec<maxlin::experiments::Target>>,
    /// Tail threshold `c < 0` for the conditional SGPP mean squared error.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Observation CSV (`s,value`) for `reconstruct`.
    #[serde(default)]
    pub observations: Option<String>,
    /// Grid JSON `{"points": [...]}` for `reconstruct`, inline or as a path.
    #[serde(default)]
    pub grid: Option<Inline<Grid>>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub conditional: Vec<ConditionalRequest>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalRequest {
    pub u: f64,
    pub v: f64,
    pub norm: Inline<NormConfig>,
}

fn default_n_paths() -> usize {
    200
}
fn default_fine_points() -> usize {
    DEFAULT_FINE_POINTS
}
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}
fn default_kind() -> ProcessKind {
    ProcessKind::Smsp
}
fn default_mc_paths() -> usize {
    100_000
}
fn default_abs_tol() -> f64 {
    1e-9
}

/// A parsed config together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl Loaded {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let config: ExperimentConfig = read_json(path)?;
        if let Some(s) = config.schema {
            if s != SCHEMA {
                return Err(CliError::Config(format!("unsupported schema {s}; expected {SCHEMA}")));
            }
        }
        if config.grids.contains(&0) {
            return Err(CliError::Config("grid sizes must be at least 1".into()));
        }
        if config.n_paths == 0 {
            return Err(CliError::Config("n_paths must be at least 1".into()));
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base_dir })
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn inline<T: DeserializeOwned + Clone>(&self, v: &Inline<T>) -> Result<T, CliError> {
        match v {
            Inline::Value(x) => Ok(x.clone()),
            Inline::Path(p) => read_json(&self.resolve(p)),
        }
    }

    pub fn generator(&self) -> Result<GeneratorModel, CliError> {
        let g = self.config.generator.as_ref().ok_or_else(|| CliError::Config("`generator` is required".into()))?;
        self.inline(g)
    }

    pub fn norm(&self) -> Result<Option<DNormSpec>, CliError> {
        match &self.config.norm {
            None => Ok(None),
            Some(n) => self.build_norm(n).map(Some),
        }
    }

    pub fn build_norm(&self, n: &Inline<NormConfig>) -> Result<DNormSpec, CliError> {
        let cfg = self.inline(n)?;
        let samples = match &cfg.samples_ref {
            Some(p) => Some(self.load_samples(&self.resolve(p))?),
            None => None,
        };
        Ok(cfg.build(samples)?)
    }

    /// Reads a generator sample matrix: one draw per CSV row, an optional
    /// non-numeric header row.
    fn load_samples(&self, path: &Path) -> Result<EmpiricalSamples, CliError> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).from_path(path).map_err(|e| CliError::csv(path, e))?;
        let mut data = Vec::new();
        let mut dim = None;
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CliError::csv(path, e))?;
            let row: Result<Vec<f64>, _> = rec.iter().map(|x| x.trim().parse::<f64>()).collect();
            let row = match row {
                Ok(r) => r,
                Err(_) if k == 0 => continue,
                Err(e) => return Err(CliError::Config(format!("{}: row {}: {e}", path.display(), k + 1))),
            };
            if *dim.get_or_insert(row.len()) != row.len() {
                return Err(CliError::Config(format!("{}: ragged sample rows", path.display())));
            }
            data.extend(row);
        }
        Ok(EmpiricalSamples::new(data, dim.unwrap_or(0))?)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = self.config.grid.as_ref().ok_or_else(|| CliError::Config("`grid` is required".into()))?;
        self.inline(g)
    }
}
