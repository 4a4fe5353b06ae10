//! Optimizer sweeps: one CSV row per (sweep point, seed, scheme).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use iscc_core::exec::Exec;
use iscc_core::optimizer::{
    evaluate_fixed_fs, plan_at, run_benchmark, AllocationPlan, Instance, Scheme, SolveOptions, ThresholdPolicy,
};
use iscc_core::sensing_model::SensingParams;

use crate::config::{Experiment, SweepAxis, SweepSpec};
use crate::{CliError, Result};

/// Version line written at the top of sweep CSV files.
pub const SWEEP_CSV_VERSION: &str = "# iscc sweep v1";
pub const SWEEP_CSV_HEADER: [&str; 11] = [
    "axis",
    "value",
    "seed",
    "scheme",
    "feasible",
    "accuracy",
    "f_s",
    "eta",
    "f_sense_hz",
    "sensing_delay_s",
    "limited_by_delay",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub seed: u64,
    pub scheme: String,
    pub feasible: bool,
    pub accuracy: f64,
    pub f_s: f64,
    pub eta: f64,
    pub f_sense_hz: f64,
    pub sensing_delay_s: f64,
    pub limited_by_delay: bool,
}

impl SweepRow {
    fn new(axis: SweepAxis, value: f64, seed: u64, p: &AllocationPlan) -> Self {
        Self {
            axis: axis.to_string(),
            value,
            seed,
            scheme: p.scheme.clone(),
            feasible: p.feasible,
            accuracy: p.accuracy,
            f_s: p.f_s,
            eta: p.eta,
            f_sense_hz: p.f_sense,
            sensing_delay_s: p.sensing_delay,
            limited_by_delay: p.limited_by_delay,
        }
    }

    fn record(&self) -> [String; 11] {
        [
            self.axis.clone(),
            self.value.to_string(),
            self.seed.to_string(),
            self.scheme.clone(),
            self.feasible.to_string(),
            self.accuracy.to_string(),
            self.f_s.to_string(),
            self.eta.to_string(),
            self.f_sense_hz.to_string(),
            self.sensing_delay_s.to_string(),
            self.limited_by_delay.to_string(),
        ]
    }
}

/// Plan of `scheme` at one sweep point.
fn run_scheme(
    exp: &Experiment,
    axis: SweepAxis,
    value: f64,
    scheme: Scheme,
    inst: &Instance,
    opts: SolveOptions,
) -> Result<AllocationPlan> {
    let run = |e: iscc_core::optimizer::OptimizerError| CliError::Run(e.to_string());
    match axis {
        SweepAxis::FS => {
            let label = scheme.to_string();
            let m = exp.config.m_segments;
            Ok(match scheme {
                Scheme::Proposed => evaluate_fixed_fs(inst, value, m),
                Scheme::LowComplexity => plan_at(inst, &label, value, ThresholdPolicy::Optimal { m_segments: 1 }),
                Scheme::Conventional => plan_at(inst, &label, value, ThresholdPolicy::Fixed { ratio: 0.0 }),
                Scheme::FixedThreshold(ratio) => plan_at(inst, &label, value, ThresholdPolicy::Fixed { ratio }),
                Scheme::AvgCompute | Scheme::AvgComm => {
                    return Err(CliError::Config(format!("scheme {scheme} cannot run on the f_s axis")))
                }
            })
        }
        SweepAxis::ThresholdRatio => match scheme {
            Scheme::FixedThreshold(_) => run_benchmark(Scheme::FixedThreshold(value), inst, opts).map_err(run),
            other => run_benchmark(other, inst, opts).map_err(run),
        },
        _ => run_benchmark(scheme, inst, opts).map_err(run),
    }
}

/// Rows of one (point, seed) cell, in scheme order.
fn run_cell(exp: &Experiment, sweep: &SweepSpec, value: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let cfg = &exp.config;
    let mut n = cfg.n_devices;
    let mut f_edge = cfg.scenario.f_edge_hz;
    let mut sensing: SensingParams = cfg.sensing;
    let mut classes = exp.classes.clone();
    match sweep.axis {
        SweepAxis::FEdge => f_edge = value,
        SweepAxis::NDevices => n = value as usize,
        SweepAxis::PStatic => {
            classes = classes.with_static_prior(value).map_err(|e| CliError::Config(format!("p_static {value}: {e}")))?
        }
        SweepAxis::TSenseMax => sensing.t_sense_max = value,
        SweepAxis::ThresholdRatio | SweepAxis::FS => {}
    }
    let scenario = exp.scenario(n, f_edge, seed)?;
    let inst = Instance { scenario: &scenario, sensing: &sensing, classes: &classes, alpha: &cfg.alpha };
    // cells already run in parallel
    let opts = SolveOptions { exec: Exec::Sequential, ..exp.solve_options() };
    cfg.schemes
        .iter()
        .map(|&s| run_scheme(exp, sweep.axis, value, s, &inst, opts).map(|p| SweepRow::new(sweep.axis, value, seed, &p)))
        .collect()
}

/// All rows in (sweep point, seed, scheme) order, whatever the completion order.
pub fn run_sweep(exp: &Experiment, exec: Exec) -> Result<Vec<SweepRow>> {
    let sweep = exp
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep command needs a `sweep` section".into()))?;
    let seeds = &exp.config.seeds;
    let cells: Vec<(f64, u64)> = sweep.grid.iter().flat_map(|&v| seeds.iter().map(move |&s| (v, s))).collect();
    let results = exec.map_slice(&cells, |&(v, s)| run_cell(exp, sweep, v, s));
    let mut rows = Vec::with_capacity(cells.len() * exp.config.schemes.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| CliError::Io(format!("writing sweep csv: {e}"));
    let mut out = out;
    writeln!(out, "{SWEEP_CSV_VERSION}").map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER).map_err(|e| err(&e))?;
    for r in rows {
        w.write_record(r.record()).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;
    Ok(())
}

pub fn write_sweep_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_sweep_csv(BufWriter::new(f), rows)
}

/// Parse a sweep CSV, enforcing the version line and column schema.
pub fn read_sweep_csv<R: BufRead>(mut input: R) -> Result<Vec<SweepRow>> {
    let bad = |line: usize, msg: String| CliError::Run(format!("sweep csv line {line}: {msg}"));
    let mut version = String::new();
    input.read_line(&mut version).map_err(|e| bad(1, e.to_string()))?;
    if version.trim_end() != SWEEP_CSV_VERSION {
        return Err(bad(1, format!("expected {SWEEP_CSV_VERSION:?}, got {:?}", version.trim_end())));
    }
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(2, e.to_string()))?.clone();
    if header.iter().ne(SWEEP_CSV_HEADER) {
        return Err(bad(2, format!("expected header {SWEEP_CSV_HEADER:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 3;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|_| bad(line, format!("bad {} value {:?}", SWEEP_CSV_HEADER[k], &rec[k])))
        };
        let flag = |k: usize| -> Result<bool> {
            rec[k].parse::<bool>().map_err(|_| bad(line, format!("bad {} value {:?}", SWEEP_CSV_HEADER[k], &rec[k])))
        };
        rows.push(SweepRow {
            axis: rec[0].to_string(),
            value: num(1)?,
            seed: rec[2].parse().map_err(|_| bad(line, format!("bad seed {:?}", &rec[2])))?,
            scheme: rec[3].to_string(),
            feasible: flag(4)?,
            accuracy: num(5)?,
            f_s: num(6)?,
            eta: num(7)?,
            f_sense_hz: num(8)?,
            sensing_delay_s: num(9)?,
            limited_by_delay: flag(10)?,
        });
    }
    Ok(rows)
}

pub fn read_sweep_file(path: &Path) -> Result<Vec<SweepRow>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_sweep_csv(BufReader::new(f))
}

/// Seed-averaged accuracy per (sweep value, scheme), in first-seen order.
pub fn mean_accuracy(rows: &[SweepRow]) -> Vec<(f64, String, f64)> {
    let mut acc: Vec<(f64, String, f64, usize)> = Vec::new();
    for r in rows {
        match acc.iter_mut().find(|a| a.0 == r.value && a.1 == r.scheme) {
            Some(a) => {
                a.2 += r.accuracy;
                a.3 += 1;
            }
            None => acc.push((r.value, r.scheme.clone(), r.accuracy, 1)),
        }
    }
    acc.into_iter().map(|(v, s, sum, n)| (v, s, sum / n as f64)).collect()
}
