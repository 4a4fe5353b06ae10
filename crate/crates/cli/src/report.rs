//! Single-scenario solve and the compute-saving explanation.

use std::fmt::Write as _;

use iscc_core::optimizer::{run_benchmark, AllocationPlan, Instance};
use iscc_core::sensing_model::DetectorModel;
use serde::Serialize;

use crate::config::Experiment;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub seed: u64,
    pub n_devices: usize,
    pub f_edge_hz: f64,
    pub fs_upper_bound: Option<u64>,
    pub plans: Vec<AllocationPlan>,
}

/// Every configured scheme on the base scenario of `seed`.
pub fn solve(exp: &Experiment, seed: u64) -> Result<SolveReport> {
    let cfg = &exp.config;
    let s = exp.scenario(cfg.n_devices, cfg.scenario.f_edge_hz, seed)?;
    let inst = Instance { scenario: &s, sensing: &cfg.sensing, classes: &exp.classes, alpha: &cfg.alpha };
    let plans = cfg
        .schemes
        .iter()
        .map(|&sc| run_benchmark(sc, &inst, exp.solve_options()).map_err(|e| CliError::Run(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveReport {
        seed,
        n_devices: cfg.n_devices,
        f_edge_hz: cfg.scenario.f_edge_hz,
        fs_upper_bound: iscc_core::resource_alloc::fs_upper_bound(&s, cfg.sensing.tau_s).ok(),
        plans,
    })
}

/// Human-readable evaluation of the gain condition and both branches of
/// the compute-saving ratio at sampling rate `f_s`.
pub fn explain(exp: &Experiment, f_s: f64) -> Result<String> {
    let cfg = &exp.config;
    let model = DetectorModel::new(&exp.classes, &cfg.sensing, f_s).map_err(|e| CliError::Config(e.to_string()))?;
    let alpha = cfg.alpha.eval(f_s);
    let mut out = String::new();
    let s = &model.static_class;
    // writing to a String cannot fail
    let _ = writeln!(out, "sampling rate      {f_s} Hz");
    let _ = writeln!(out, "cnn accuracy       {alpha:.6}");
    let _ = writeln!(out, "static class       mu {:.6e}  sigma {:.6e}  prior {:.4}", s.mu, s.sigma, s.prior);
    for (i, a) in model.actions.iter().enumerate() {
        let _ = writeln!(out, "action {:<2}          mu {:.6e}  sigma {:.6e}  prior {:.4}", i + 1, a.mu, a.sigma, a.prior);
    }
    let _ = writeln!(out, "eta upper          {:.6e}", model.eta_upper());
    let cond = model.gain_condition(alpha);
    match cond.degenerate {
        Some(d) => {
            let _ = writeln!(out, "gain condition     not evaluable ({d:?})");
        }
        None => {
            let _ = writeln!(
                out,
                "gain condition     {}  (margin {:.6e}, log of subtracted sum {:.6})",
                if cond.holds { "holds" } else { "fails" },
                cond.margin,
                cond.log_subtracted
            );
        }
    }
    match model.performance_gain(alpha) {
        Ok(g) => {
            let _ = writeln!(out, "pass branch        {:.6}  (1 - p_cnn at eta upper)", g.pass_branch);
            match (g.root_branch, g.eta_root) {
                (Some(r), Some(eta)) => {
                    let _ = writeln!(out, "root branch        {r:.6}  (at eta {eta:.6e})");
                }
                _ => {
                    let _ = writeln!(out, "root branch        none  (accuracy stays above alpha up to eta upper)");
                }
            }
            let _ = writeln!(out, "compute saving     {:.6}", g.rho);
        }
        Err(e) => {
            let _ = writeln!(out, "compute saving     none: {e}");
        }
    }
    Ok(out)
}
