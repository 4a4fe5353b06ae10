//! Joint choice of sampling rate, threshold and resource split, plus the
//! benchmark schemes it is compared against.
//!
//! For a fixed sampling rate the tasks get the minimum-compute allocation and
//! everything left over goes to sensing; the threshold is then chosen for
//! that sensing compute. The outer search runs over integer sampling rates up
//! to the analytic upper bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comm_model::Scenario;
use crate::exec::Exec;
use crate::resource_alloc::{allocate, fs_upper_bound, CommBudget, DeviceAllocation};
use crate::sensing_model::{AlphaModel, ClassSet, DetectorModel, ModelError, SensingParams};
use crate::threshold_opt::{select, ThresholdError, DEFAULT_SEGMENTS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("threshold ratio {0} must lie in [0, 1]")]
    InvalidRatio(f64),
    #[error("step must be at least 1")]
    InvalidStep,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

/// Resource-allocation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scheme {
    /// Exhaustive search over sampling rates with the optimal threshold.
    Proposed,
    /// Largest feasible sampling rate, single-segment threshold search.
    LowComplexity,
    /// No gate: every window goes to the CNN.
    Conventional,
    /// Edge compute split equally between the tasks and sensing.
    AvgCompute,
    /// Uplink frame split equally between the tasks and sensing.
    AvgComm,
    /// Threshold fixed at this fraction of its upper limit.
    FixedThreshold(f64),
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Proposed => f.write_str("proposed"),
            Scheme::LowComplexity => f.write_str("low_complexity"),
            Scheme::Conventional => f.write_str("conventional"),
            Scheme::AvgCompute => f.write_str("avg_compute"),
            Scheme::AvgComm => f.write_str("avg_comm"),
            Scheme::FixedThreshold(r) => write!(f, "fixed_threshold:{r}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let scheme = match s {
            "proposed" => Scheme::Proposed,
            "low_complexity" => Scheme::LowComplexity,
            "conventional" => Scheme::Conventional,
            "avg_compute" => Scheme::AvgCompute,
            "avg_comm" => Scheme::AvgComm,
            _ => {
                let arg = s
                    .strip_prefix("fixed_threshold:")
                    .or_else(|| s.strip_prefix("fixed_threshold(").and_then(|r| r.strip_suffix(')')))
                    .ok_or_else(|| OptimizerError::UnknownScheme(s.to_string()))?;
                let r: f64 = arg.trim().parse().map_err(|_| OptimizerError::UnknownScheme(s.to_string()))?;
                if !(0.0..=1.0).contains(&r) {
                    return Err(OptimizerError::InvalidRatio(r));
                }
                Scheme::FixedThreshold(r)
            }
        };
        Ok(scheme)
    }
}

impl TryFrom<String> for Scheme {
    type Error = OptimizerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

/// Everything a solver needs about one problem instance.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub scenario: &'a Scenario,
    pub sensing: &'a SensingParams,
    pub classes: &'a ClassSet,
    pub alpha: &'a AlphaModel,
}

impl Instance<'_> {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        self.scenario.validate().map_err(|e| OptimizerError::Scenario(e.to_string()))?;
        self.sensing.validate()?;
        self.alpha.validate()?;
        Ok(())
    }

    /// Accuracy reported when no feasible plan exists: a uniform guess.
    pub fn floor_accuracy(&self) -> f64 {
        self.classes.random_guess_accuracy()
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stride of the sampling-rate search, Hz.
    pub step: u64,
    pub m_segments: usize,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { step: 1, m_segments: DEFAULT_SEGMENTS, exec: Exec::default() }
    }
}

/// How the threshold is chosen once the resources are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    Optimal { m_segments: usize },
    /// `eta = ratio * eta_u`.
    Fixed { ratio: f64 },
}

/// A complete operating point.
///
/// `eta`, `f_sense` and `sensing_delay` are zero on infeasible plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub scheme: String,
    pub f_s: f64,
    pub eta: f64,
    pub f_sense: f64,
    pub device_alloc: Option<DeviceAllocation>,
    pub accuracy: f64,
    pub sensing_delay: f64,
    pub feasible: bool,
    #[serde(default)]
    pub limited_by_delay: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasible_reason: Option<String>,
}

impl AllocationPlan {
    fn infeasible(inst: &Instance, scheme: &str, f_s: f64, reason: String) -> Self {
        Self {
            scheme: scheme.to_string(),
            f_s,
            eta: 0.0,
            f_sense: 0.0,
            device_alloc: None,
            accuracy: inst.floor_accuracy(),
            sensing_delay: 0.0,
            feasible: false,
            limited_by_delay: false,
            infeasible_reason: Some(reason),
        }
    }
}

/// Plan for given task allocation and sensing compute.
fn plan_with(
    inst: &Instance,
    scheme: &str,
    f_s: f64,
    alloc: DeviceAllocation,
    f_sense: f64,
    policy: ThresholdPolicy,
) -> AllocationPlan {
    if !(f_sense > 0.0) {
        return AllocationPlan::infeasible(inst, scheme, f_s, format!("no compute left for sensing ({f_sense:.4e})"));
    }
    let model = match DetectorModel::new(inst.classes, inst.sensing, f_s) {
        Ok(m) => m,
        Err(e) => return AllocationPlan::infeasible(inst, scheme, f_s, e.to_string()),
    };
    let alpha = inst.alpha.eval(f_s);
    let t_max = inst.sensing.t_sense_max;
    let (eta, accuracy, delay, limited) = match policy {
        ThresholdPolicy::Optimal { m_segments } => match select(&model, alpha, t_max, f_sense, m_segments) {
            Ok(sol) => (sol.eta_star, sol.accuracy, sol.delay, sol.limited_by_delay),
            Err(ThresholdError::DelayInfeasible { delay_at_upper, .. }) => {
                return AllocationPlan::infeasible(
                    inst,
                    scheme,
                    f_s,
                    format!("sensing delay {delay_at_upper:.4e} s exceeds budget"),
                )
            }
            Err(e) => return AllocationPlan::infeasible(inst, scheme, f_s, e.to_string()),
        },
        ThresholdPolicy::Fixed { ratio } => {
            let eta = ratio * model.eta_upper().max(0.0);
            let delay = model.avg_delay(eta, f_sense);
            if delay > t_max {
                return AllocationPlan::infeasible(inst, scheme, f_s, format!("sensing delay {delay:.4e} s exceeds budget"));
            }
            (eta, model.accuracy(eta, alpha), delay, false)
        }
    };
    AllocationPlan {
        scheme: scheme.to_string(),
        f_s,
        eta,
        f_sense,
        device_alloc: Some(alloc),
        accuracy,
        sensing_delay: delay,
        feasible: true,
        limited_by_delay: limited,
        infeasible_reason: None,
    }
}

/// Minimum-compute task allocation at `f_s`, with the rest of the edge
/// compute given to sensing.
pub fn plan_at(inst: &Instance, scheme: &str, f_s: f64, policy: ThresholdPolicy) -> AllocationPlan {
    let budget = match CommBudget::for_rate(inst.sensing.tau_s, f_s) {
        Ok(b) => b,
        Err(e) => return AllocationPlan::infeasible(inst, scheme, f_s, e.to_string()),
    };
    let alloc = match allocate(inst.scenario, budget) {
        Ok(a) => a,
        Err(e) => return AllocationPlan::infeasible(inst, scheme, f_s, e.to_string()),
    };
    let f_sense = inst.scenario.f_edge_hz - alloc.total_compute();
    plan_with(inst, scheme, f_s, alloc, f_sense, policy)
}

/// Proposed-scheme plan at a fixed sampling rate.
pub fn evaluate_fixed_fs(inst: &Instance, f_s: f64, m_segments: usize) -> AllocationPlan {
    plan_at(inst, "proposed", f_s, ThresholdPolicy::Optimal { m_segments })
}

/// Most accurate feasible plan; ties go to the earlier (smaller-rate) plan.
fn best_plan(inst: &Instance, scheme: &str, plans: Vec<AllocationPlan>) -> AllocationPlan {
    let mut best: Option<AllocationPlan> = None;
    for p in plans.into_iter().filter(|p| p.feasible) {
        if best.as_ref().is_none_or(|b| p.accuracy > b.accuracy) {
            best = Some(p);
        }
    }
    best.unwrap_or_else(|| AllocationPlan::infeasible(inst, scheme, 0.0, "no feasible sampling rate".into()))
}

fn rate_grid(step: u64, upper: u64) -> Vec<f64> {
    (1..=upper / step).map(|k| (k * step) as f64).collect()
}

/// Search all sampling rates `step, 2 step, ..` up to the upper bound.
pub fn solve_with_policy(
    inst: &Instance,
    scheme: &str,
    opts: SolveOptions,
    policy: ThresholdPolicy,
) -> Result<AllocationPlan, OptimizerError> {
    if opts.step == 0 {
        return Err(OptimizerError::InvalidStep);
    }
    let upper = match fs_upper_bound(inst.scenario, inst.sensing.tau_s) {
        Ok(u) => u,
        Err(e) => return Ok(AllocationPlan::infeasible(inst, scheme, 0.0, e.to_string())),
    };
    let grid = rate_grid(opts.step, upper);
    let plans = opts.exec.map_slice(&grid, |&f| plan_at(inst, scheme, f, policy));
    Ok(best_plan(inst, scheme, plans))
}

/// Exhaustive search over sampling rates with the optimal threshold.
pub fn solve_exhaustive(inst: &Instance, opts: SolveOptions) -> Result<AllocationPlan, OptimizerError> {
    solve_with_policy(inst, "proposed", opts, ThresholdPolicy::Optimal { m_segments: opts.m_segments })
}

/// Largest feasible sampling rate by bisection, then a single-segment threshold search.
pub fn solve_low_complexity(inst: &Instance) -> AllocationPlan {
    const LABEL: &str = "low_complexity";
    let policy = ThresholdPolicy::Optimal { m_segments: 1 };
    let upper = match fs_upper_bound(inst.scenario, inst.sensing.tau_s) {
        Ok(u) => u,
        Err(e) => return AllocationPlan::infeasible(inst, LABEL, 0.0, e.to_string()),
    };
    let feasible = |f: u64| plan_at(inst, LABEL, f as f64, policy).feasible;
    if upper == 0 || !feasible(1) {
        return AllocationPlan::infeasible(inst, LABEL, 0.0, "no feasible sampling rate".into());
    }
    // invariant: feasible(lo), !feasible(hi) unless hi == upper
    let (mut lo, mut hi) = (1u64, upper);
    if feasible(upper) {
        lo = upper;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    plan_at(inst, LABEL, lo as f64, policy)
}

fn avg_compute(inst: &Instance, opts: SolveOptions) -> AllocationPlan {
    const LABEL: &str = "avg_compute";
    let s = inst.scenario;
    let share = s.f_edge_hz / (s.devices.len() + 1) as f64;
    let mut tau_c = Vec::with_capacity(s.devices.len());
    for (i, d) in s.devices.iter().enumerate() {
        let left = d.task.t_max - d.task.v_bits * d.task.c_intensity / share;
        if !(left > 0.0) || !(d.rate > 0.0) {
            return AllocationPlan::infeasible(inst, LABEL, 0.0, format!("device {i} misses its deadline"));
        }
        tau_c.push(d.task.v_bits / (d.rate * left));
    }
    let remaining = 1.0 - tau_c.iter().sum::<f64>();
    if !(remaining > 0.0) {
        return AllocationPlan::infeasible(inst, LABEL, 0.0, "uplink frame exhausted".into());
    }
    let upper = (remaining / inst.sensing.tau_s).floor() as u64;
    let alloc = DeviceAllocation { tau_c, f_n: vec![share; s.devices.len()], mu_star: None };
    let policy = ThresholdPolicy::Optimal { m_segments: opts.m_segments };
    let grid = rate_grid(opts.step, upper);
    let plans = opts.exec.map_slice(&grid, |&f| {
        // the last sample must still fit in the frame
        if inst.sensing.tau_s * f >= remaining {
            return AllocationPlan::infeasible(inst, LABEL, f, "uplink frame exhausted".into());
        }
        plan_with(inst, LABEL, f, alloc.clone(), share, policy)
    });
    best_plan(inst, LABEL, plans)
}

fn avg_comm(inst: &Instance, opts: SolveOptions) -> AllocationPlan {
    const LABEL: &str = "avg_comm";
    let s = inst.scenario;
    let share = 1.0 / (s.devices.len() + 1) as f64;
    let f_s = (share / inst.sensing.tau_s).floor();
    if f_s < 1.0 {
        return AllocationPlan::infeasible(inst, LABEL, 0.0, "sensing share below one sample".into());
    }
    let mut f_n = Vec::with_capacity(s.devices.len());
    for (i, d) in s.devices.iter().enumerate() {
        let left = d.task.t_max - d.task.v_bits / (share * d.rate);
        if !(left > 0.0) {
            return AllocationPlan::infeasible(inst, LABEL, f_s, format!("device {i} cannot upload in time"));
        }
        f_n.push(d.task.v_bits * d.task.c_intensity / left);
    }
    let f_sense = s.f_edge_hz - f_n.iter().sum::<f64>();
    let alloc = DeviceAllocation { tau_c: vec![share; s.devices.len()], f_n, mu_star: None };
    plan_with(inst, LABEL, f_s, alloc, f_sense, ThresholdPolicy::Optimal { m_segments: opts.m_segments })
}

/// Plan chosen by `scheme`; infeasible instances give the floor accuracy.
pub fn run_benchmark(scheme: Scheme, inst: &Instance, opts: SolveOptions) -> Result<AllocationPlan, OptimizerError> {
    let label = scheme.to_string();
    match scheme {
        Scheme::Proposed => solve_exhaustive(inst, opts),
        Scheme::LowComplexity => Ok(solve_low_complexity(inst)),
        Scheme::Conventional => solve_with_policy(inst, &label, opts, ThresholdPolicy::Fixed { ratio: 0.0 }),
        Scheme::FixedThreshold(ratio) => {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(OptimizerError::InvalidRatio(ratio));
            }
            solve_with_policy(inst, &label, opts, ThresholdPolicy::Fixed { ratio })
        }
        Scheme::AvgCompute => {
            if opts.step == 0 {
                return Err(OptimizerError::InvalidStep);
            }
            Ok(avg_compute(inst, opts))
        }
        Scheme::AvgComm => Ok(avg_comm(inst, opts)),
    }
}

/// Smallest total edge compute at sampling rate `f_s` for which `policy`
/// reaches `target` accuracy, found by bisection to `rel_tol`. `None` when
/// the tasks cannot be served at this rate or the target is out of reach.
pub fn required_edge_compute(
    inst: &Instance,
    f_s: f64,
    policy: ThresholdPolicy,
    target: f64,
    rel_tol: f64,
) -> Option<f64> {
    let budget = CommBudget::for_rate(inst.sensing.tau_s, f_s).ok()?;
    let alloc = allocate(inst.scenario, budget).ok()?;
    let tasks = alloc.total_compute();
    let meets = |f_sense: f64| {
        let p = plan_with(inst, "required", f_s, alloc.clone(), f_sense, policy);
        p.feasible && p.accuracy >= target - 1e-9
    };
    let model = DetectorModel::new(inst.classes, inst.sensing, f_s).ok()?;
    // running the CNN on every window always meets the delay budget here
    let mut hi = model.cnn_cycles / inst.sensing.t_sense_max;
    let mut doublings = 0;
    while !meets(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(tasks + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm_model::{generate_scenario, Device, DeviceTask, Link, ScenarioParams};

    fn one_device(f_e: f64) -> Scenario {
        let link = Link { bandwidth_hz: 4e6, tx_power_dbm: 24.0, noise_dbm_per_hz: -174.0, pathloss_db: 100.0, fading_gain: 1.0 };
        let mut d = Device::new(DeviceTask { v_bits: 1e6, c_intensity: 500.0, t_max: 0.4 }, link, 0.1).unwrap();
        d.rate = 1e7;
        Scenario { devices: vec![d], f_edge_hz: f_e, seed: 0 }
    }

    fn defaults() -> (SensingParams, ClassSet, AlphaModel) {
        let sp = SensingParams::default();
        let cs = ClassSet::synthetic_default(&sp);
        (sp, cs, AlphaModel::default())
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in [
            Scheme::Proposed,
            Scheme::LowComplexity,
            Scheme::Conventional,
            Scheme::AvgCompute,
            Scheme::AvgComm,
            Scheme::FixedThreshold(0.25),
        ] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("fixed_threshold(0.5)".parse::<Scheme>().unwrap(), Scheme::FixedThreshold(0.5));
        assert!(matches!("greedy".parse::<Scheme>(), Err(OptimizerError::UnknownScheme(_))));
        assert!(matches!("fixed_threshold:1.5".parse::<Scheme>(), Err(OptimizerError::InvalidRatio(_))));
    }

    #[test]
    fn worked_instance_sensing_compute() {
        // tau_s F = 0.5 puts the single task at f = 2.5 GHz
        let (sp, cs, am) = defaults();
        let s = one_device(4e9);
        let sp = SensingParams { tau_s: 0.5 / 100.0, t_sense_max: 10.0, ..sp };
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let p = evaluate_fixed_fs(&inst, 100.0, 8);
        assert!(p.feasible, "{p:?}");
        assert!((p.f_sense - 1.5e9).abs() < 1.0, "{}", p.f_sense);
    }

    #[test]
    fn beyond_bound_is_infeasible() {
        let (sp, cs, am) = defaults();
        let s = one_device(4e10);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let bound = fs_upper_bound(&s, sp.tau_s).unwrap();
        assert!(!evaluate_fixed_fs(&inst, (bound + 1) as f64, 8).feasible);
    }

    #[test]
    fn generous_compute_leaves_almost_everything_to_sensing() {
        let (sp, cs, am) = defaults();
        let s = one_device(1e15);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let p = evaluate_fixed_fs(&inst, 100.0, 8);
        assert!(p.feasible);
        assert!(p.f_sense / 1e15 > 0.999_99);
    }

    #[test]
    fn single_candidate_matches_fixed_rate() {
        let (sp, cs, am) = defaults();
        let s = one_device(4e10);
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let upper = fs_upper_bound(&s, sp.tau_s).unwrap();
        let opts = SolveOptions { step: upper, ..SolveOptions::default() };
        let p = solve_exhaustive(&inst, opts).unwrap();
        let q = evaluate_fixed_fs(&inst, upper as f64, opts.m_segments);
        if q.feasible {
            assert_eq!(p, q);
        } else {
            assert!(!p.feasible);
        }
    }

    #[test]
    fn starved_scenario_reports_the_floor() {
        let (sp, cs, am) = defaults();
        let s = generate_scenario(15, 0.3, &ScenarioParams { f_edge_hz: 1e9, ..ScenarioParams::default() }, 1).unwrap();
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let opts = SolveOptions { step: 10, ..SolveOptions::default() };
        for scheme in [Scheme::Proposed, Scheme::Conventional, Scheme::AvgCompute, Scheme::AvgComm, Scheme::LowComplexity] {
            let p = run_benchmark(scheme, &inst, opts).unwrap();
            assert!(!p.feasible);
            assert_eq!(p.accuracy, 0.125);
        }
    }

    #[test]
    fn fixed_zero_is_conventional() {
        let (sp, cs, am) = defaults();
        let s = generate_scenario(5, 0.3, &ScenarioParams::default(), 2).unwrap();
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let opts = SolveOptions { step: 10, ..SolveOptions::default() };
        let a = run_benchmark(Scheme::Conventional, &inst, opts).unwrap();
        let mut b = run_benchmark(Scheme::FixedThreshold(0.0), &inst, opts).unwrap();
        b.scheme = a.scheme.clone();
        assert_eq!(a, b);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (sp, cs, am) = defaults();
        let s = generate_scenario(8, 0.3, &ScenarioParams::default(), 4).unwrap();
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let seq = SolveOptions { step: 5, exec: Exec::Sequential, ..SolveOptions::default() };
        let par = SolveOptions { exec: Exec::Parallel, ..seq };
        assert_eq!(solve_exhaustive(&inst, seq).unwrap(), solve_exhaustive(&inst, par).unwrap());
    }

    #[test]
    fn plan_json_round_trip() {
        let (sp, cs, am) = defaults();
        let s = generate_scenario(3, 0.3, &ScenarioParams::default(), 5).unwrap();
        let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
        let p = solve_exhaustive(&inst, SolveOptions { step: 20, ..SolveOptions::default() }).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<AllocationPlan>(&text).unwrap(), p);
    }

    #[test]
    fn feasible_plans_respect_constraints() {
        let (sp, cs, am) = defaults();
        for seed in 0..5 {
            let s = generate_scenario(10, 0.3, &ScenarioParams::default(), seed).unwrap();
            let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
            let opts = SolveOptions { step: 10, ..SolveOptions::default() };
            for scheme in [Scheme::Proposed, Scheme::Conventional, Scheme::AvgCompute, Scheme::AvgComm] {
                let p = run_benchmark(scheme, &inst, opts).unwrap();
                if !p.feasible {
                    continue;
                }
                let a = p.device_alloc.as_ref().unwrap();
                assert!(sp.tau_s * p.f_s + a.total_tau() <= 1.0 + 1e-9, "{scheme}");
                assert!(p.f_sense + a.total_compute() <= s.f_edge_hz + 1e-3, "{scheme}");
                assert!(p.sensing_delay <= sp.t_sense_max * (1.0 + 1e-12), "{scheme}");
                for (k, d) in s.devices.iter().enumerate() {
                    let t = crate::comm_model::task_delay(&d.task, a.tau_c[k], a.f_n[k], d.rate).unwrap();
                    assert!(t <= d.task.t_max * (1.0 + 1e-9), "{scheme} device {k}");
                }
            }
        }
    }
}
