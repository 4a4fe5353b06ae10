//! Closed-form communication/compute split for the offloaded tasks, the
//! sampling-rate upper bound, and a brute-force convex oracle.
//!
//! For a fixed sensing share `tau_s F`, minimizing total task compute under
//! tight delay constraints gives
//!
//! ```text
//! sqrt(mu) = sum_n (V_n/T_n) sqrt(C_n/R_n) / (1 - tau_s F - sum_n V_n/(T_n R_n))
//! tau_n    = V_n/T_n (1/R_n + sqrt(C_n/(mu R_n)))
//! f_n      = V_n/T_n (C_n + sqrt(mu C_n/R_n))
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comm_model::Scenario;
use crate::numerics::{golden_section_max, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("sensing fraction {0} must lie in [0, 1)")]
    InvalidBudget(f64),
    #[error("communication budget exhausted: margin short by {deficit}")]
    CommInfeasible { deficit: f64 },
    #[error("sampling-rate bound undefined: max T * f_e = {capacity} <= N min V min C = {demand}")]
    BoundPrecondition { capacity: f64, demand: f64 },
    #[error("invalid sensing slot {0}")]
    InvalidSlot(f64),
    #[error("oracle supports at most 3 devices, got {0}")]
    OracleTooLarge(usize),
}

/// Share of the uplink frame taken by sensing samples, `tau_s * F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommBudget {
    sensing_fraction: f64,
}

impl CommBudget {
    pub fn new(sensing_fraction: f64) -> Result<Self, AllocError> {
        if (0.0..1.0).contains(&sensing_fraction) {
            Ok(Self { sensing_fraction })
        } else {
            Err(AllocError::InvalidBudget(sensing_fraction))
        }
    }

    /// Budget of sampling at `f_s` Hz with slot `tau_s`.
    pub fn for_rate(tau_s: f64, f_s: f64) -> Result<Self, AllocError> {
        Self::new(tau_s * f_s)
    }

    pub fn sensing_fraction(&self) -> f64 {
        self.sensing_fraction
    }
}

/// Per-device time shares and compute rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceAllocation {
    pub tau_c: Vec<f64>,
    pub f_n: Vec<f64>,
    /// Lagrange multiplier of the shared frame constraint; absent for
    /// allocations not produced by the closed form.
    pub mu_star: Option<f64>,
}

impl DeviceAllocation {
    pub fn total_compute(&self) -> f64 {
        self.f_n.iter().sum()
    }

    pub fn total_tau(&self) -> f64 {
        self.tau_c.iter().sum()
    }
}

/// `1 - tau_s F - sum_n V_n / (T_n R_n)`: the frame share left for the
/// compute-saving part of the uplink.
pub fn comm_margin(s: &Scenario, budget: CommBudget) -> f64 {
    let floor: f64 = s.devices.iter().map(|d| d.task.v_bits / (d.task.t_max * d.rate)).sum();
    1.0 - budget.sensing_fraction - floor
}

pub fn comm_feasible(s: &Scenario, budget: CommBudget) -> bool {
    comm_margin(s, budget) > 0.0
}

/// Minimum-compute allocation meeting every task deadline with equality.
pub fn allocate(s: &Scenario, budget: CommBudget) -> Result<DeviceAllocation, AllocError> {
    let margin = comm_margin(s, budget);
    if !(margin > 0.0) {
        return Err(AllocError::CommInfeasible { deficit: -margin });
    }
    let numer: f64 =
        s.devices.iter().map(|d| d.task.v_bits / d.task.t_max * (d.task.c_intensity / d.rate).sqrt()).sum();
    let sqrt_mu = numer / margin;
    let mu = sqrt_mu * sqrt_mu;
    let (tau_c, f_n) = s
        .devices
        .iter()
        .map(|d| {
            let (v, c, t, r) = (d.task.v_bits, d.task.c_intensity, d.task.t_max, d.rate);
            let tau = v / t * (1.0 / r + (c / r).sqrt() / sqrt_mu);
            let f = v / t * (c + sqrt_mu * (c / r).sqrt());
            (tau, f)
        })
        .unzip();
    Ok(DeviceAllocation { tau_c, f_n, mu_star: Some(mu) })
}

/// Brute-force minimum of `sum f_n` for up to three devices.
///
/// Each device's compute is the smallest rate meeting its deadline for a
/// given time share, `f_n = V C / (T - V / (tau R))`; the time shares are
/// searched with nested golden sections (the objective is convex).
/// `grid_tol` is the final bracket width relative to each search interval.
pub fn oracle_allocate(s: &Scenario, budget: CommBudget, grid_tol: f64) -> Result<DeviceAllocation, AllocError> {
    let n = s.devices.len();
    if n > 3 {
        return Err(AllocError::OracleTooLarge(n));
    }
    let total = 1.0 - budget.sensing_fraction;
    let lower: Vec<f64> = s.devices.iter().map(|d| d.task.v_bits / (d.task.t_max * d.rate)).collect();
    let slack = total - lower.iter().sum::<f64>();
    if !(slack > 0.0) {
        return Err(AllocError::CommInfeasible { deficit: -slack });
    }
    let f_of = |k: usize, tau: f64| -> f64 {
        let d = &s.devices[k];
        let left = d.task.t_max - d.task.v_bits / (tau * d.rate);
        if left > 0.0 {
            d.task.v_bits * d.task.c_intensity / left
        } else {
            f64::INFINITY
        }
    };
    // minimize over the extra share x_k >= 0 given to device k on top of its floor
    let search = |f: &dyn Fn(f64) -> f64, width: f64| -> f64 {
        let tol = Tolerance::for_width(grid_tol * width, width).expect("positive width");
        golden_section_max(|x| -f(x), 0.0, width, tol).expect("non-empty interval").x
    };
    let extras: Vec<f64> = match n {
        1 => vec![slack],
        2 => {
            let cost = |x: f64| f_of(0, lower[0] + x) + f_of(1, lower[1] + slack - x);
            let x = search(&cost, slack);
            vec![x, slack - x]
        }
        _ => {
            let inner = |x0: f64| -> (f64, f64) {
                let rest = slack - x0;
                let cost = |x1: f64| f_of(1, lower[1] + x1) + f_of(2, lower[2] + rest - x1);
                let x1 = search(&cost, rest);
                (x1, f_of(0, lower[0] + x0) + cost(x1))
            };
            let x0 = search(&|x0: f64| inner(x0).1, slack);
            let (x1, _) = inner(x0);
            vec![x0, x1, slack - x0 - x1]
        }
    };
    let tau_c: Vec<f64> = lower.iter().zip(&extras).map(|(l, x)| l + x).collect();
    let f_n = tau_c.iter().enumerate().map(|(k, &t)| f_of(k, t)).collect();
    Ok(DeviceAllocation { tau_c, f_n, mu_star: None })
}

/// Largest sampling rate (Hz) for which the tasks can still be served.
///
/// Every device is credited with the smallest task, the loosest deadline and
/// the best link of the cell; convexity of the per-device time share in its
/// compute rate then bounds the total share taken by the tasks.
pub fn fs_upper_bound(s: &Scenario, tau_s: f64) -> Result<u64, AllocError> {
    if !(tau_s > 0.0) || tau_s.is_nan() {
        return Err(AllocError::InvalidSlot(tau_s));
    }
    let n = s.devices.len() as f64;
    let fold = |init: f64, pick: fn(f64, f64) -> f64, get: fn(&crate::comm_model::Device) -> f64| {
        s.devices.iter().map(get).fold(init, pick)
    };
    let min_v = fold(f64::INFINITY, f64::min, |d| d.task.v_bits);
    let min_c = fold(f64::INFINITY, f64::min, |d| d.task.c_intensity);
    let max_t = fold(0.0, f64::max, |d| d.task.t_max);
    let max_r = fold(0.0, f64::max, |d| d.rate);
    let f_e = s.f_edge_hz;
    let capacity = max_t * f_e;
    let demand = n * min_v * min_c;
    if !(capacity > demand) {
        return Err(AllocError::BoundPrecondition { capacity, demand });
    }
    let share = n * min_v * f_e / (max_r * (capacity - demand));
    let bound = ((1.0 - share) / tau_s).floor();
    Ok(if bound > 0.0 { bound as u64 } else { 0 })
}
