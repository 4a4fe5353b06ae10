//! Experiment configuration: one JSON document, validated on load.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use iscc_core::comm_model::{generate_scenario, Scenario, ScenarioParams};
use iscc_core::optimizer::{Scheme, SolveOptions};
use iscc_core::sensing_model::{AlphaModel, ClassSet, ClassStats, SensingParams};
use iscc_core::threshold_opt::DEFAULT_SEGMENTS;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Where the class statistics come from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSource {
    /// The built-in eight-class synthetic set for the configured band.
    #[default]
    Synthetic,
    Inline(Vec<ClassStats>),
    /// A ClassSet JSON file, relative paths resolved against the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    FEdge,
    NDevices,
    PStatic,
    TSenseMax,
    ThresholdRatio,
    FS,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::FEdge => "f_edge",
            SweepAxis::NDevices => "n_devices",
            SweepAxis::PStatic => "p_static",
            SweepAxis::TSenseMax => "t_sense_max",
            SweepAxis::ThresholdRatio => "threshold_ratio",
            SweepAxis::FS => "f_s",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

/// Monte Carlo validation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSpec {
    pub f_s_grid: Vec<f64>,
    /// Thresholds per rate, spread evenly over `[eta_lo_frac * mu_static, eta_u]`.
    pub eta_points: usize,
    pub eta_lo_frac: f64,
    pub trials: usize,
    /// Absolute slack added to the 3-stderr rate criterion.
    pub rate_floor: f64,
    /// Class indices to simulate; default is the static class plus the
    /// action with the smallest power mean.
    pub classes: Option<Vec<usize>>,
    /// Statistics the simulator is matched to; default is the model classes.
    pub truth: Option<ClassSource>,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            f_s_grid: vec![50.0, 100.0, 200.0, 400.0, 800.0],
            eta_points: 5,
            eta_lo_frac: 0.2,
            trials: 100_000,
            rate_floor: 0.01,
            classes: None,
            truth: None,
        }
    }
}

fn default_n_devices() -> usize {
    15
}

fn default_radius_km() -> f64 {
    0.3
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Proposed, Scheme::Conventional]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_step() -> u64 {
    1
}

fn default_segments() -> usize {
    DEFAULT_SEGMENTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioParams,
    #[serde(default = "default_n_devices")]
    pub n_devices: usize,
    #[serde(default = "default_radius_km")]
    pub radius_km: f64,
    #[serde(default)]
    pub sensing: SensingParams,
    #[serde(default)]
    pub classes: ClassSource,
    #[serde(default)]
    pub alpha: AlphaModel,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Stride of the sampling-rate search, Hz.
    #[serde(default = "default_step")]
    pub step: u64,
    #[serde(default = "default_segments")]
    pub m_segments: usize,
    #[serde(default)]
    pub validation: ValidationSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// A validated config with its class files loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub classes: ClassSet,
    /// Simulator-side statistics for `validate`.
    pub truth: ClassSet,
    pub base_dir: PathBuf,
}

/// Parse config bytes; errors name the line, column and field path.
pub fn parse_config(bytes: &[u8], origin: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Config(format!(
            "{origin}: line {} column {}, field `{}`: {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_classes(src: &ClassSource, sp: &SensingParams, base: &Path, field: &str) -> Result<ClassSet> {
    let bad = |msg: String| CliError::Config(format!("{field}: {msg}"));
    match src {
        ClassSource::Synthetic => Ok(ClassSet::synthetic_default(sp)),
        ClassSource::Inline(c) => ClassSet::new(c.clone()).map_err(|e| bad(e.to_string())),
        ClassSource::File(p) => {
            let path = resolve(base, p);
            let bytes = fs::read(&path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            let de = &mut serde_json::Deserializer::from_slice(&bytes);
            serde_path_to_error::deserialize(de).map_err(|e| {
                bad(format!("{}: line {}, field `{}`: {}", path.display(), e.inner().line(), e.path(), e.inner()))
            })
        }
    }
}

fn check_grid(axis: SweepAxis, grid: &[f64]) -> std::result::Result<(), String> {
    if grid.is_empty() {
        return Err("sweep.grid is empty".into());
    }
    for &v in grid {
        let ok = match axis {
            SweepAxis::FEdge | SweepAxis::TSenseMax | SweepAxis::FS => v > 0.0 && v.is_finite(),
            SweepAxis::NDevices => v >= 1.0 && v.fract() == 0.0 && v <= 1e6,
            SweepAxis::PStatic => v > 0.0 && v < 1.0,
            SweepAxis::ThresholdRatio => (0.0..=1.0).contains(&v),
        };
        if !ok {
            return Err(format!("sweep.grid value {v} is not valid on the {axis} axis"));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Check invariants and load referenced files.
    pub fn into_experiment(self, base_dir: &Path) -> Result<Experiment> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seeds is empty".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes is empty".into());
        }
        if self.step == 0 {
            return bad("step must be at least 1".into());
        }
        if self.m_segments == 0 {
            return bad("m_segments must be at least 1".into());
        }
        if self.n_devices == 0 {
            return bad("n_devices must be at least 1".into());
        }
        self.sensing.validate().map_err(|e| CliError::Config(format!("sensing: {e}")))?;
        self.alpha.validate().map_err(|e| CliError::Config(format!("alpha: {e}")))?;
        self.scenario.validate().map_err(|e| CliError::Config(format!("scenario: {e}")))?;
        if let Some(sw) = &self.sweep {
            check_grid(sw.axis, &sw.grid).map_err(CliError::Config)?;
            if sw.axis == SweepAxis::ThresholdRatio
                && !self.schemes.iter().any(|s| matches!(s, Scheme::FixedThreshold(_)))
            {
                return bad("the threshold_ratio axis needs a fixed_threshold scheme".into());
            }
            if sw.axis == SweepAxis::FS {
                if let Some(s) = self.schemes.iter().find(|s| matches!(s, Scheme::AvgCompute | Scheme::AvgComm)) {
                    return bad(format!("scheme {s} picks its own sampling rate and cannot run on the f_s axis"));
                }
            }
        }
        let v = &self.validation;
        if v.f_s_grid.is_empty() || v.f_s_grid.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return bad("validation.f_s_grid must hold positive rates".into());
        }
        if v.eta_points == 0 {
            return bad("validation.eta_points must be at least 1".into());
        }
        if !(v.eta_lo_frac >= 0.0) || !v.eta_lo_frac.is_finite() {
            return bad("validation.eta_lo_frac must be non-negative".into());
        }
        if !(v.rate_floor >= 0.0) {
            return bad("validation.rate_floor must be non-negative".into());
        }
        let classes = load_classes(&self.classes, &self.sensing, base_dir, "classes")?;
        let truth = match &v.truth {
            Some(src) => load_classes(src, &self.sensing, base_dir, "validation.truth")?,
            None => classes.clone(),
        };
        if truth.len() != classes.len() {
            return bad(format!("validation.truth has {} classes, model has {}", truth.len(), classes.len()));
        }
        if let Some(idx) = &v.classes {
            if idx.is_empty() || idx.iter().any(|&i| i >= classes.len()) {
                return bad(format!("validation.classes must be nonempty indices below {}", classes.len()));
            }
        }
        Ok(Experiment { config: self, classes, truth, base_dir: base_dir.to_path_buf() })
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg = parse_config(&bytes, &path.display().to_string())?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.into_experiment(&base)
    }

    /// Apply `--seed` and `--step` overrides.
    pub fn with_overrides(mut self, seeds: &[u64], step: Option<u64>) -> Result<Self> {
        if !seeds.is_empty() {
            self.config.seeds = seeds.to_vec();
        }
        if let Some(s) = step {
            if s == 0 {
                return Err(CliError::Config("--step must be at least 1".into()));
            }
            self.config.step = s;
        }
        Ok(self)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { step: self.config.step, m_segments: self.config.m_segments, ..SolveOptions::default() }
    }

    /// Base-config scenario for `seed`.
    pub fn scenario(&self, n_devices: usize, f_edge_hz: f64, seed: u64) -> Result<Scenario> {
        let params = ScenarioParams { f_edge_hz, ..self.config.scenario };
        generate_scenario(n_devices, self.config.radius_km, &params, seed)
            .map_err(|e| CliError::Config(format!("scenario: {e}")))
    }

    /// Output path from the flag or the config, resolved against the config directory.
    pub fn output_path(&self, flag: Option<&Path>) -> Result<PathBuf> {
        match (flag, &self.config.output) {
            (Some(p), _) => Ok(p.to_path_buf()),
            (None, Some(p)) => Ok(resolve(&self.base_dir, p)),
            (None, None) => Err(CliError::Config("no output path: set `output` or pass --output".into())),
        }
    }
}
