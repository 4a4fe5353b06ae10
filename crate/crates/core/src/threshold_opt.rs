//! Threshold selection under the average sensing-delay budget.
//!
//! The expected delay falls as the threshold rises, so the budget becomes a
//! lower bound `eta_T` on the threshold. The unconstrained accuracy maximizer
//! `eta_A` is found segment by segment: below the static-class mean the
//! accuracy is not concave, so each segment is searched with the false
//! positive rate replaced by its chord (and once more on the exact curve);
//! above it the accuracy is concave. All candidates are scored on the exact
//! accuracy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{gaussian_tail, golden_section_max, Tolerance};
use crate::sensing_model::{AlphaModel, ClassSet, DetectorModel, ModelError, SensingParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need at least one segment")]
    NoSegments,
    #[error("sensing compute {0} must be positive")]
    InvalidCompute(f64),
    #[error("delay {delay_at_upper} s at the largest threshold exceeds the budget {budget} s")]
    DelayInfeasible { delay_at_upper: f64, budget: f64 },
}

/// Default number of segments below the static-class mean.
pub const DEFAULT_SEGMENTS: usize = 8;
/// Search tolerance relative to `eta_u`.
pub const ETA_REL_TOL: f64 = 1e-6;

/// Smallest threshold meeting the delay budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayBound {
    Feasible { eta_t: f64 },
    Infeasible { delay_at_upper: f64 },
}

/// Selected threshold with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub eta_star: f64,
    pub eta_t: f64,
    pub eta_a: f64,
    pub accuracy: f64,
    pub delay: f64,
    pub limited_by_delay: bool,
}

/// Delay bound on a prebuilt model.
pub fn delay_bound(model: &DetectorModel, t_sense_max: f64, f_sense: f64) -> Result<DelayBound, ThresholdError> {
    if !(f_sense > 0.0) || !f_sense.is_finite() {
        return Err(ThresholdError::InvalidCompute(f_sense));
    }
    let delay = |eta: f64| model.avg_delay(eta, f_sense);
    if delay(0.0) <= t_sense_max {
        return Ok(DelayBound::Feasible { eta_t: 0.0 });
    }
    let eta_u = model.eta_upper();
    let at_upper = delay(eta_u);
    if at_upper > t_sense_max {
        return Ok(DelayBound::Infeasible { delay_at_upper: at_upper });
    }
    // keep the upper (feasible) end of the bracket
    let (mut lo, mut hi) = (0.0, eta_u);
    let stop = 1e-12 * eta_u;
    while hi - lo > stop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delay(mid) <= t_sense_max {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DelayBound::Feasible { eta_t: hi })
}

pub fn eta_delay_bound(
    cs: &ClassSet,
    sp: &SensingParams,
    f_s: f64,
    f_sense: f64,
) -> Result<DelayBound, ThresholdError> {
    let model = DetectorModel::new(cs, sp, f_s)?;
    delay_bound(&model, sp.t_sense_max, f_sense)
}

/// Best candidate so far; ties go to the larger threshold.
#[derive(Clone, Copy)]
struct Best {
    eta: f64,
    acc: f64,
}

impl Best {
    fn offer(&mut self, eta: f64, acc: f64) {
        if acc > self.acc || (acc == self.acc && eta > self.eta) {
            self.eta = eta;
            self.acc = acc;
        }
    }
}

fn search_range(model: &DetectorModel, alpha: f64, lo: f64, hi: f64, segments: usize, surrogate: bool, best: &mut Best) {
    let acc = |eta: f64| model.accuracy(eta, alpha);
    best.offer(lo, acc(lo));
    best.offer(hi, acc(hi));
    if !(hi > lo) {
        return;
    }
    let width = (hi - lo) / segments as f64;
    let s = &model.static_class;
    let fp = |eta: f64| gaussian_tail(eta - s.mu, s.sigma);
    let tol = Tolerance::for_width(ETA_REL_TOL * model.eta_upper().max(hi), width).expect("positive tolerance");
    for m in 0..segments {
        let a = lo + m as f64 * width;
        let b = if m + 1 == segments { hi } else { a + width };
        best.offer(b, acc(b));
        if let Ok(r) = golden_section_max(acc, a, b, tol) {
            best.offer(r.x, acc(r.x));
        }
        if surrogate {
            let (fa, fb) = (fp(a), fp(b));
            let chord = |eta: f64| fa + (fb - fa) * (eta - a) / (b - a);
            let sur = |eta: f64| {
                let hits: f64 = model.actions.iter().map(|c| c.prior * gaussian_tail(eta - c.mu, c.sigma)).sum();
                let pl = chord(eta);
                alpha * hits + s.prior * ((1.0 - pl) + pl * alpha)
            };
            if let Ok(r) = golden_section_max(sur, a, b, tol) {
                best.offer(r.x, acc(r.x));
            }
        }
    }
}

/// Accuracy-maximizing threshold on `[0, eta_u]`.
pub fn accuracy_max(model: &DetectorModel, alpha: f64, m_segments: usize) -> Result<f64, ThresholdError> {
    Ok(accuracy_max_on(model, alpha, 0.0, m_segments)?.eta)
}

fn accuracy_max_on(model: &DetectorModel, alpha: f64, from: f64, m_segments: usize) -> Result<Best, ThresholdError> {
    if m_segments == 0 {
        return Err(ThresholdError::NoSegments);
    }
    let eta_u = model.eta_upper().max(0.0);
    let from = from.clamp(0.0, eta_u);
    let mut best = Best { eta: from, acc: model.accuracy(from, alpha) };
    let split = model.static_class.mu.clamp(from, eta_u);
    search_range(model, alpha, from, split, m_segments, true, &mut best);
    search_range(model, alpha, split, eta_u, 1, false, &mut best);
    Ok(best)
}

pub fn eta_accuracy_max(
    cs: &ClassSet,
    sp: &SensingParams,
    am: &AlphaModel,
    f_s: f64,
    m_segments: usize,
) -> Result<f64, ThresholdError> {
    let model = DetectorModel::new(cs, sp, f_s)?;
    accuracy_max(&model, am.eval(f_s), m_segments)
}

/// Threshold policy on a prebuilt model.
///
/// When the delay bound sits above the unconstrained maximizer, the best
/// threshold in `[eta_T, eta_u]` is returned (at least as good as `eta_T`
/// itself, and strictly better when the accuracy has a later peak).
pub fn select(
    model: &DetectorModel,
    alpha: f64,
    t_sense_max: f64,
    f_sense: f64,
    m_segments: usize,
) -> Result<ThresholdSolution, ThresholdError> {
    let eta_t = match delay_bound(model, t_sense_max, f_sense)? {
        DelayBound::Feasible { eta_t } => eta_t,
        DelayBound::Infeasible { delay_at_upper } => {
            return Err(ThresholdError::DelayInfeasible { delay_at_upper, budget: t_sense_max })
        }
    };
    let unconstrained = accuracy_max_on(model, alpha, 0.0, m_segments)?;
    let eta_a = unconstrained.eta;
    let limited_by_delay = eta_t > eta_a;
    let eta_star = if limited_by_delay {
        accuracy_max_on(model, alpha, eta_t, m_segments)?.eta
    } else {
        eta_a
    };
    Ok(ThresholdSolution {
        eta_star,
        eta_t,
        eta_a,
        accuracy: model.accuracy(eta_star, alpha),
        delay: model.avg_delay(eta_star, f_sense),
        limited_by_delay,
    })
}

pub fn select_threshold(
    cs: &ClassSet,
    sp: &SensingParams,
    am: &AlphaModel,
    f_s: f64,
    f_sense: f64,
    m_segments: usize,
) -> Result<ThresholdSolution, ThresholdError> {
    let model = DetectorModel::new(cs, sp, f_s)?;
    select(&model, am.eval(f_s), sp.t_sense_max, f_sense, m_segments)
}
