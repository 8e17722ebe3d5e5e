//! Run configuration: defaults, then the TOML file, then the environment,
//! then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use isingmacro::scaling::{grid_from_segments, GridSegment, RefineWindow};
use isingmacro::GridConvention;
use serde::{Deserialize, Serialize};

pub const CACHE_DIR_ENV: &str = "ISINGMACRO_CACHE_DIR";

pub const DEFAULT_SIZES: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Bad user input; the process exits with code 3.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let spec = RangeSpec {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(spec.step > 0.0) || !(spec.hi >= spec.lo) || !spec.lo.is_finite() || !spec.hi.is_finite() {
            return Err(format!("range '{s}' needs lo <= hi and step > 0"));
        }
        Ok(spec)
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Keys accepted in the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub sizes: Option<Vec<usize>>,
    pub lambda_coarse: Option<String>,
    pub lambda_fine: Option<String>,
    pub lambdas: Option<Vec<f64>>,
    pub grid: Option<String>,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub refine_half_width: Option<f64>,
    pub refine_step: Option<f64>,
    pub validate_tol_scale: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config_error(format!("config {}: {e}", path.display())))
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct FlagConfig {
    pub sizes: Option<Vec<usize>>,
    pub lambda_coarse: Option<RangeSpec>,
    pub lambda_fine: Option<RangeSpec>,
    pub lambdas: Option<Vec<f64>>,
    pub grid: Option<GridConvention>,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub sizes: Vec<usize>,
    pub lambda_coarse: RangeSpec,
    pub lambda_fine: Option<RangeSpec>,
    pub lambdas: Option<Vec<f64>>,
    pub grid: GridConvention,
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub refine: RefineWindow,
    /// Oracle tolerance is `validate_tol_scale / N`.
    pub validate_tol_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sizes: DEFAULT_SIZES.to_vec(),
            lambda_coarse: RangeSpec { lo: 0.0, hi: 2.0, step: 0.01 },
            lambda_fine: Some(RangeSpec { lo: 0.8, hi: 1.1, step: 0.0005 }),
            lambdas: None,
            grid: GridConvention::NeveuSchwarzEven,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cache_dir: None,
            output_dir: PathBuf::from("out"),
            refine: RefineWindow::default(),
            validate_tol_scale: 8.0,
        }
    }
}

fn parse_range(key: &str, s: &str) -> anyhow::Result<RangeSpec> {
    s.parse().map_err(|e: String| config_error(format!("{key}: {e}")))
}

impl RunConfig {
    /// Layers `file`, `env_cache_dir` and `flags` over the defaults.
    pub fn resolve(file: Option<FileConfig>, env_cache_dir: Option<PathBuf>, flags: FlagConfig) -> anyhow::Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(file) = file {
            if let Some(v) = file.sizes {
                cfg.sizes = v;
            }
            if let Some(v) = file.lambda_coarse {
                cfg.lambda_coarse = parse_range("lambda_coarse", &v)?;
            }
            if let Some(v) = file.lambda_fine {
                cfg.lambda_fine = if v.trim().is_empty() {
                    None
                } else {
                    Some(parse_range("lambda_fine", &v)?)
                };
            }
            if let Some(v) = file.lambdas {
                cfg.lambdas = Some(v);
            }
            if let Some(v) = file.grid {
                cfg.grid = v.parse().map_err(|e: isingmacro::Error| config_error(e.to_string()))?;
            }
            if let Some(v) = file.workers {
                cfg.workers = v;
            }
            if let Some(v) = file.cache_dir {
                cfg.cache_dir = Some(v);
            }
            if let Some(v) = file.out {
                cfg.output_dir = v;
            }
            if let Some(v) = file.refine_half_width {
                cfg.refine.half_width = v;
            }
            if let Some(v) = file.refine_step {
                cfg.refine.step = v;
            }
            if let Some(v) = file.validate_tol_scale {
                cfg.validate_tol_scale = v;
            }
        }
        if let Some(dir) = env_cache_dir {
            cfg.cache_dir = Some(dir);
        }
        let FlagConfig {
            sizes,
            lambda_coarse,
            lambda_fine,
            lambdas,
            grid,
            workers,
            cache_dir,
            out,
        } = flags;
        cfg.sizes = sizes.unwrap_or(cfg.sizes);
        cfg.lambda_coarse = lambda_coarse.unwrap_or(cfg.lambda_coarse);
        cfg.lambda_fine = lambda_fine.or(cfg.lambda_fine);
        cfg.lambdas = lambdas.or(cfg.lambdas);
        cfg.grid = grid.unwrap_or(cfg.grid);
        cfg.workers = workers.unwrap_or(cfg.workers);
        cfg.cache_dir = cache_dir.or(cfg.cache_dir);
        cfg.output_dir = out.unwrap_or(cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.sizes.is_empty() {
            return Err(config_error("no sizes given"));
        }
        for &n in &self.sizes {
            let want_even = self.grid == GridConvention::NeveuSchwarzEven;
            if n < 2 || (n % 2 == 0) != want_even {
                return Err(config_error(format!(
                    "size {n} does not fit the {} grid ({} sizes >= 2 required)",
                    self.grid,
                    if want_even { "even" } else { "odd" }
                )));
            }
        }
        if self.workers == 0 {
            return Err(config_error("workers must be at least 1"));
        }
        if !(self.refine.half_width > 0.0 && self.refine.step > 0.0) {
            return Err(config_error("refine window needs positive width and step"));
        }
        if !(self.validate_tol_scale > 0.0) {
            return Err(config_error("validate_tol_scale must be positive"));
        }
        self.lambda_grid().map(|_| ())
    }

    /// Explicit `lambdas`, or coarse points outside the fine range plus the
    /// fine points. `lambda = 1` is dropped on the odd grid, where a mode
    /// closes there.
    pub fn lambda_grid(&self) -> anyhow::Result<Vec<f64>> {
        let mut grid = match &self.lambdas {
            Some(list) => list.clone(),
            None => {
                let c = self.lambda_coarse;
                let mut segments = vec![GridSegment::new(c.lo, c.hi, c.step).map_err(|e| config_error(e.to_string()))?];
                let coarse = grid_from_segments(&segments);
                if let Some(f) = self.lambda_fine {
                    segments = vec![GridSegment::new(f.lo, f.hi, f.step).map_err(|e| config_error(e.to_string()))?];
                    let mut merged: Vec<f64> = coarse
                        .into_iter()
                        .filter(|&l| l < f.lo - 1e-12 || l > f.hi + 1e-12)
                        .collect();
                    merged.extend(grid_from_segments(&segments));
                    merged.sort_by(f64::total_cmp);
                    merged
                } else {
                    coarse
                }
            }
        };
        if self.grid == GridConvention::PaperOdd {
            grid.retain(|&l| (l - 1.0).abs() > 1e-12);
        }
        if grid.is_empty() {
            return Err(config_error("coupling grid is empty"));
        }
        if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(config_error("couplings must be finite and non-negative"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_error("couplings must be strictly increasing"));
        }
        Ok(grid)
    }
}

pub fn load_file(path: Option<&Path>) -> anyhow::Result<Option<FileConfig>> {
    path.map(FileConfig::load).transpose()
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
