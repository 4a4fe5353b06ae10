//! Monte Carlo detector statistics against the analytical model.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use iscc_core::exec::Exec;
use iscc_core::seeds::derive_seed;
use iscc_core::sensing_model::{power_stats, ClassSet, DetectorModel};
use iscc_core::signal_sim::{
    error_rate, power_samples, sample_moments, write_power_samples_csv, ClassState, PowerSampleRow,
    SyntheticClassSpec, MIN_TRIALS,
};

use crate::config::Experiment;
use crate::{CliError, Result};

pub const VALIDATE_CSV_VERSION: &str = "# iscc validate v1";
pub const VALIDATE_CSV_HEADER: [&str; 8] = ["kind", "class", "f_s", "eta", "predicted", "empirical", "stderr", "pass"];

/// Below this many trials a pass says little; a warning is emitted.
pub const INFORMATIVE_TRIALS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Miss,
    FalsePositive,
    Mean,
    Variance,
}

impl CellKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Miss => "miss",
            CellKind::FalsePositive => "false_positive",
            CellKind::Mean => "mean",
            CellKind::Variance => "variance",
        }
    }
}

/// One compared quantity. `eta` is NaN for moment cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub class: usize,
    pub f_s: f64,
    pub eta: f64,
    pub predicted: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub cells: Vec<Cell>,
    pub warnings: Vec<String>,
    pub samples: Vec<PowerSampleRow>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

/// `n` evenly spaced points over `[lo, hi]`; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// Static class plus the action with the smallest power mean at `f_s`.
fn default_classes(classes: &ClassSet, exp: &Experiment, f_s: f64) -> Result<Vec<usize>> {
    let model = DetectorModel::new(classes, &exp.config.sensing, f_s).map_err(|e| CliError::Config(e.to_string()))?;
    let nearest = model
        .actions
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mu.total_cmp(&b.1.mu))
        .map(|(i, _)| i + 1)
        .expect("class sets hold at least one action");
    Ok(vec![0, nearest])
}

/// Simulate every configured (class, rate) cell and compare against the model.
///
/// `keep_samples` retains the raw band powers for export.
pub fn run_validation(exp: &Experiment, seed: u64, keep_samples: bool) -> Result<ValidationReport> {
    let v = &exp.config.validation;
    let sp = &exp.config.sensing;
    let cfg_err = |e: &dyn std::fmt::Display| CliError::Config(format!("validation: {e}"));
    if v.trials < MIN_TRIALS {
        return Err(CliError::Config(format!("validation.trials {} is below {MIN_TRIALS}", v.trials)));
    }
    let mut warnings = Vec::new();
    if v.trials < INFORMATIVE_TRIALS {
        warnings.push(format!(
            "{} trials give standard errors near {:.3}; passing cells are not informative",
            v.trials,
            0.5 / (v.trials as f64).sqrt()
        ));
    }
    let mut cells = Vec::new();
    let mut samples = Vec::new();
    for (fi, &f_s) in v.f_s_grid.iter().enumerate() {
        let model = DetectorModel::new(&exp.classes, sp, f_s).map_err(|e| cfg_err(&e))?;
        let etas = linspace(v.eta_lo_frac * model.static_class.mu, model.eta_upper(), v.eta_points);
        let chosen = match &v.classes {
            Some(c) => c.clone(),
            None => default_classes(&exp.classes, exp, f_s)?,
        };
        for &ci in &chosen {
            let state = if ci == 0 { ClassState::Static } else { ClassState::Action };
            let spec = SyntheticClassSpec::matched(&exp.truth.classes()[ci], sp, state).map_err(|e| cfg_err(&e))?;
            let powers = power_samples(&spec, sp, f_s, v.trials, derive_seed(seed, &[ci as u64, fi as u64]), Exec::Parallel)
                .map_err(|e| cfg_err(&e))?;
            for &eta in &etas {
                let e = error_rate(&powers, state, eta);
                let (kind, predicted) = match state {
                    ClassState::Static => (CellKind::FalsePositive, model.false_positive_rate(eta)),
                    ClassState::Action => (CellKind::Miss, model.miss_rate(ci - 1, eta)),
                };
                let pass = (e.rate - predicted).abs() <= (3.0 * e.stderr).max(v.rate_floor);
                cells.push(Cell { kind, class: ci, f_s, eta, predicted, empirical: e.rate, stderr: e.stderr, pass });
            }
            let ps = power_stats(&exp.classes.classes()[ci], sp, f_s).map_err(|e| cfg_err(&e))?;
            let m = sample_moments(&powers);
            for (kind, predicted, empirical, se) in [
                (CellKind::Mean, ps.mu, m.mean, m.se_mean),
                (CellKind::Variance, ps.sigma * ps.sigma, m.variance, m.se_variance),
            ] {
                let pass = (empirical - predicted).abs() <= 3.0 * se;
                cells.push(Cell { kind, class: ci, f_s, eta: f64::NAN, predicted, empirical, stderr: se, pass });
            }
            if keep_samples {
                samples.extend(powers.iter().enumerate().map(|(k, &p)| PowerSampleRow {
                    class: ci.to_string(),
                    f_s,
                    trial: k as u64,
                    p,
                }));
            }
        }
    }
    Ok(ValidationReport { cells, warnings, samples })
}

pub fn write_report_csv<W: Write>(out: W, cells: &[Cell]) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| CliError::Io(format!("writing validation report: {e}"));
    let mut out = out;
    writeln!(out, "{VALIDATE_CSV_VERSION}").map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALIDATE_CSV_HEADER).map_err(|e| err(&e))?;
    for c in cells {
        let eta = if c.eta.is_nan() { String::new() } else { c.eta.to_string() };
        w.write_record([
            c.kind.as_str().to_string(),
            c.class.to_string(),
            c.f_s.to_string(),
            eta,
            c.predicted.to_string(),
            c.empirical.to_string(),
            c.stderr.to_string(),
            c.pass.to_string(),
        ])
        .map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;
    Ok(())
}

/// Parse a validation report, checking the version line and header.
/// Returns `(kind, pass)` per row.
pub fn read_report_csv<R: BufRead>(mut input: R) -> Result<Vec<(String, bool)>> {
    let bad = |line: usize, msg: String| CliError::Run(format!("validation report line {line}: {msg}"));
    let mut version = String::new();
    input.read_line(&mut version).map_err(|e| bad(1, e.to_string()))?;
    if version.trim_end() != VALIDATE_CSV_VERSION {
        return Err(bad(1, format!("expected {VALIDATE_CSV_VERSION:?}")));
    }
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(2, e.to_string()))?.clone();
    if header.iter().ne(VALIDATE_CSV_HEADER) {
        return Err(bad(2, format!("expected header {VALIDATE_CSV_HEADER:?}")));
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| bad(i + 3, e.to_string()))?;
            let pass = rec[7].parse().map_err(|_| bad(i + 3, format!("bad pass value {:?}", &rec[7])))?;
            Ok((rec[0].to_string(), pass))
        })
        .collect()
}

pub fn write_report_file(path: &Path, cells: &[Cell]) -> Result<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_report_csv(BufWriter::new(f), cells)
}

pub fn read_report_file(path: &Path) -> Result<Vec<(String, bool)>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_report_csv(BufReader::new(f))
}

pub fn write_samples_file(path: &Path, rows: &[PowerSampleRow]) -> Result<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_power_samples_csv(&mut w, rows).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn experiment(json: &str) -> Experiment {
        parse_config(json.as_bytes(), "t").unwrap().into_experiment(Path::new(".")).unwrap()
    }

    #[test]
    fn matched_model_passes_small_grid() {
        let exp = experiment(r#"{"validation": {"f_s_grid": [100], "eta_points": 3, "trials": 20000}}"#);
        let rep = run_validation(&exp, 5, false).unwrap();
        // 2 classes x (3 rates + 2 moments)
        assert_eq!(rep.cells.len(), 10);
        assert!(rep.warnings.is_empty());
        let failed: Vec<_> = rep.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn misconfigured_variance_is_flagged() {
        let sp = iscc_core::sensing_model::SensingParams::default();
        let mut classes = ClassSet::synthetic_default(&sp).classes().to_vec();
        for c in &mut classes {
            c.sigma_d2_i *= 10.0;
        }
        let json = format!(
            r#"{{"classes": {{"inline": {}}}, "validation": {{"f_s_grid": [100], "trials": 20000, "truth": "synthetic"}}}}"#,
            serde_json::to_string(&classes).unwrap()
        );
        let rep = run_validation(&experiment(&json), 5, false).unwrap();
        assert!(rep.failures().any(|c| c.kind == CellKind::Variance));
    }

    #[test]
    fn few_trials_warn() {
        let exp = experiment(r#"{"validation": {"f_s_grid": [100], "eta_points": 2, "trials": 100}}"#);
        let rep = run_validation(&exp, 1, true).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert_eq!(rep.samples.len(), 200);
        let exp = experiment(r#"{"validation": {"f_s_grid": [100], "trials": 99}}"#);
        assert!(matches!(run_validation(&exp, 1, false), Err(CliError::Config(_))));
    }

    #[test]
    fn report_round_trip() {
        let exp = experiment(r#"{"validation": {"f_s_grid": [50], "eta_points": 2, "trials": 500}}"#);
        let rep = run_validation(&exp, 2, false).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &rep.cells).unwrap();
        let back = read_report_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rep.cells.len());
        assert!(back.iter().zip(&rep.cells).all(|(b, c)| b.0 == c.kind.as_str() && b.1 == c.pass));
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(1.0, 3.0, 3), vec![1.0, 2.0, 3.0]);
        assert_eq!(linspace(1.0, 3.0, 1), vec![1.0]);
    }
}
