//! Analytical sensing-performance model.
//!
//! The band power `P` of a class is approximated as Gaussian with
//!
//! ```text
//! mu_P    = lambda + r / (T F)
//! sigma_P = sqrt(4 s2 lambda / (T F) + 2 s2 r / (T F)^2 + sigma_d^2)
//! ```
//!
//! where `T` is the window length, `F` the sampling rate and `s2` the CSI
//! estimation-noise variance. Detection rates follow from Gaussian tails, the
//! CNN stage is summarized by its accuracy `alpha(F)`, and the expected CNN
//! load by the pass probability of the threshold gate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, gaussian_tail, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("sampling rate must be positive, got {0}")]
    InvalidSamplingRate(f64),
    #[error("sensing compute must be positive, got {0}")]
    InvalidCompute(f64),
    #[error("invalid class statistics at index {index}: {reason}")]
    InvalidClass { index: usize, reason: String },
    #[error("invalid class set: {0}")]
    InvalidClassSet(String),
    #[error("invalid sensing parameters: {0}")]
    InvalidParams(String),
    #[error("invalid accuracy model: {0}")]
    InvalidAlpha(String),
    #[error("no action classes")]
    NoActionClasses,
    #[error("no gain regime: {0}")]
    NoGainRegime(String),
}

/// Fitted band-power parameters of one recognition class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    /// Signal part of the band power.
    pub lambda_i: f64,
    /// Noise-band energy, i.e. estimation-noise variance times the band bin count.
    pub r_i: f64,
    /// Instance-to-instance variance of the band power.
    pub sigma_d2_i: f64,
    /// Prior probability of the class.
    pub prior_i: f64,
}

impl ClassStats {
    pub fn validate(&self, index: usize) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidClass { index, reason: reason.to_string() };
        let fields = [self.lambda_i, self.r_i, self.sigma_d2_i, self.prior_i];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite field"));
        }
        if self.lambda_i < 0.0 {
            return Err(bad("lambda_i < 0"));
        }
        if self.r_i < 0.0 {
            return Err(bad("r_i < 0"));
        }
        if self.sigma_d2_i < 0.0 {
            return Err(bad("sigma_d2_i < 0"));
        }
        if !(0.0..=1.0).contains(&self.prior_i) {
            return Err(bad("prior_i outside [0, 1]"));
        }
        Ok(())
    }
}

/// Tolerance on the prior sum of a [`ClassSet`].
pub const PRIOR_SUM_TOL: f64 = 1e-9;

/// Ordered recognition classes; index 0 is the static state, the rest are actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClassSet")]
pub struct ClassSet {
    classes: Vec<ClassStats>,
}

#[derive(Deserialize)]
struct RawClassSet {
    classes: Vec<ClassStats>,
}

impl TryFrom<RawClassSet> for ClassSet {
    type Error = ModelError;

    fn try_from(raw: RawClassSet) -> Result<Self, Self::Error> {
        ClassSet::new(raw.classes)
    }
}

impl ClassSet {
    pub fn new(classes: Vec<ClassStats>) -> Result<Self, ModelError> {
        if classes.len() < 2 {
            return Err(ModelError::InvalidClassSet(format!(
                "need the static class and at least one action, got {} classes",
                classes.len()
            )));
        }
        for (i, c) in classes.iter().enumerate() {
            c.validate(i)?;
        }
        let sum: f64 = classes.iter().map(|c| c.prior_i).sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(ModelError::InvalidClassSet(format!("priors sum to {sum}, expected 1")));
        }
        Ok(Self { classes })
    }

    /// Default eight-class synthetic set (static + seven actions) whose
    /// noise energy `r_i` matches the band of `sp`.
    pub fn synthetic_default(sp: &SensingParams) -> Self {
        let r = sp.sigma2 * sp.band_bins() as f64;
        let static_class = ClassStats { lambda_i: 0.05, r_i: r, sigma_d2_i: 1e-4, prior_i: 0.5 };
        let action_lambdas = [0.12, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0];
        let action_prior = 0.5 / action_lambdas.len() as f64;
        let mut classes = vec![static_class];
        classes.extend(action_lambdas.iter().map(|&lambda| ClassStats {
            lambda_i: lambda,
            r_i: r,
            sigma_d2_i: (0.15 * lambda) * (0.15 * lambda),
            prior_i: action_prior,
        }));
        Self::new(classes).expect("built-in class set is valid")
    }

    pub fn classes(&self) -> &[ClassStats] {
        &self.classes
    }

    pub fn static_class(&self) -> &ClassStats {
        &self.classes[0]
    }

    pub fn actions(&self) -> &[ClassStats] {
        &self.classes[1..]
    }

    /// Number of recognition classes `I`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Accuracy of a uniform random guess, the floor reported for infeasible plans.
    pub fn random_guess_accuracy(&self) -> f64 {
        1.0 / self.classes.len() as f64
    }

    /// Copy with the static prior set to `p_static` and the action priors
    /// rescaled proportionally (uniformly if they were all zero).
    pub fn with_static_prior(&self, p_static: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p_static) {
            return Err(ModelError::InvalidClassSet(format!(
                "static prior {p_static} outside [0, 1]"
            )));
        }
        let action_mass: f64 = self.actions().iter().map(|c| c.prior_i).sum();
        let n_actions = self.actions().len() as f64;
        let mut classes = self.classes.clone();
        classes[0].prior_i = p_static;
        for c in classes.iter_mut().skip(1) {
            c.prior_i = if action_mass > 0.0 {
                c.prior_i / action_mass * (1.0 - p_static)
            } else {
                (1.0 - p_static) / n_actions
            };
        }
        Self::new(classes)
    }
}

/// Sensing-task configuration shared by the model, simulator and optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensingParams {
    /// CSI window length in seconds.
    pub t_win: f64,
    /// Lower edge of the high-frequency band, Hz.
    pub f_lo: f64,
    /// Upper edge of the high-frequency band, Hz.
    pub f_hi: f64,
    /// CSI estimation-noise variance.
    pub sigma2: f64,
    /// Number of subcarriers fed to the CNN.
    pub k_sub: u32,
    /// CNN cost in CPU cycles per input element.
    pub c_s: f64,
    /// Air time of one sensing sample (transmission slot plus guard slot), seconds.
    pub tau_s: f64,
    /// Average sensing delay budget, seconds.
    pub t_sense_max: f64,
}

impl Default for SensingParams {
    fn default() -> Self {
        Self {
            t_win: 3.0,
            f_lo: 10.0,
            f_hi: 20.0,
            sigma2: 0.01,
            k_sub: 64,
            c_s: 5.156e4,
            tau_s: 2.56e-4,
            t_sense_max: 0.5,
        }
    }
}

/// `x.floor()` / `x.ceil()` after snapping values within 1e-9 of an integer,
/// so `10.0 * 3.0`-style products land on the intended bin.
pub(crate) fn snapped_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as i64
    } else {
        x.floor() as i64
    }
}

pub(crate) fn snapped_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as i64
    } else {
        x.ceil() as i64
    }
}

impl SensingParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |s: &str| Err(ModelError::InvalidParams(s.to_string()));
        let reals = [self.t_win, self.f_lo, self.f_hi, self.sigma2, self.c_s, self.tau_s, self.t_sense_max];
        if reals.iter().any(|v| !v.is_finite()) {
            return bad("non-finite field");
        }
        if !(self.t_win > 0.0) {
            return bad("t_win must be positive");
        }
        if !(0.0 < self.f_lo && self.f_lo < self.f_hi) {
            return bad("need 0 < f_lo < f_hi");
        }
        if !(self.sigma2 > 0.0) || self.k_sub == 0 || !(self.c_s > 0.0) || !(self.tau_s > 0.0) {
            return bad("resource fields must be positive");
        }
        if !(self.t_sense_max > 0.0) {
            return bad("t_sense_max must be positive");
        }
        Ok(())
    }

    /// Inclusive DFT bin range `[floor(f_lo T), ceil(f_hi T)]` of the band.
    pub fn band_bin_range(&self) -> (usize, usize) {
        let lo = snapped_floor(self.f_lo * self.t_win).max(0) as usize;
        let hi = snapped_ceil(self.f_hi * self.t_win).max(0) as usize;
        (lo, hi)
    }

    /// Number of DFT bins summed into the band power.
    pub fn band_bins(&self) -> usize {
        let (lo, hi) = self.band_bin_range();
        hi - lo + 1
    }

    /// CPU cycles for one CNN inference at sampling rate `f_s`.
    pub fn cnn_cycles(&self, f_s: f64) -> f64 {
        self.c_s * f64::from(self.k_sub) * self.t_win * f_s
    }
}

/// CNN-stage recognition accuracy as a function of sampling rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaModel {
    /// `a_max * (1 - exp(-F / kappa))`.
    Exponential { a_max: f64, kappa: f64 },
    /// Monotone `(F, accuracy)` table, linearly interpolated and held
    /// constant outside its range.
    Table { points: Vec<[f64; 2]> },
}

impl Default for AlphaModel {
    fn default() -> Self {
        AlphaModel::Exponential { a_max: 0.99, kappa: 200.0 }
    }
}

impl AlphaModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            AlphaModel::Exponential { a_max, kappa } => {
                if !(*a_max > 0.0 && *a_max <= 1.0) {
                    return Err(ModelError::InvalidAlpha(format!("a_max {a_max} outside (0, 1]")));
                }
                if !(*kappa > 0.0) || !kappa.is_finite() {
                    return Err(ModelError::InvalidAlpha(format!("kappa {kappa} must be positive")));
                }
            }
            AlphaModel::Table { points } => {
                if points.is_empty() {
                    return Err(ModelError::InvalidAlpha("empty table".into()));
                }
                for p in points {
                    if !p[0].is_finite() || p[0] < 0.0 || !(0.0..=1.0).contains(&p[1]) {
                        return Err(ModelError::InvalidAlpha(format!("bad table point {p:?}")));
                    }
                }
                for w in points.windows(2) {
                    if w[1][0] <= w[0][0] {
                        return Err(ModelError::InvalidAlpha("sampling rates must increase".into()));
                    }
                    if w[1][1] < w[0][1] {
                        return Err(ModelError::InvalidAlpha("accuracy must be non-decreasing".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Accuracy at sampling rate `f_s`.
    pub fn eval(&self, f_s: f64) -> f64 {
        match self {
            AlphaModel::Exponential { a_max, kappa } => {
                if f_s <= 0.0 {
                    0.0
                } else {
                    a_max * (1.0 - (-f_s / kappa).exp())
                }
            }
            AlphaModel::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if f_s <= first[0] {
                    return first[1];
                }
                if f_s >= last[0] {
                    return last[1];
                }
                let k = points.partition_point(|p| p[0] <= f_s);
                let (a, b) = (points[k - 1], points[k]);
                a[1] + (b[1] - a[1]) * (f_s - a[0]) / (b[0] - a[0])
            }
        }
    }
}

/// Mean and standard deviation of a class's band power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerStats {
    pub mu: f64,
    pub sigma: f64,
}

/// Band-power mean and standard deviation of class `c` at sampling rate `f_s`.
pub fn power_stats(c: &ClassStats, sp: &SensingParams, f_s: f64) -> Result<PowerStats, ModelError> {
    if !(f_s > 0.0) || !f_s.is_finite() {
        return Err(ModelError::InvalidSamplingRate(f_s));
    }
    let n = sp.t_win * f_s;
    let mu = c.lambda_i + c.r_i / n;
    let var = 4.0 * sp.sigma2 * c.lambda_i / n + 2.0 * sp.sigma2 * c.r_i / (n * n) + c.sigma_d2_i;
    Ok(PowerStats { mu, sigma: var.max(0.0).sqrt() })
}

/// Probability that an action instance of class `c` is gated as static.
pub fn miss_rate(c: &ClassStats, sp: &SensingParams, f_s: f64, eta: f64) -> Result<f64, ModelError> {
    let ps = power_stats(c, sp, f_s)?;
    Ok(gaussian_tail(ps.mu - eta, ps.sigma))
}

/// Probability that a static instance passes the gate.
pub fn false_positive_rate(
    c: &ClassStats,
    sp: &SensingParams,
    f_s: f64,
    eta: f64,
) -> Result<f64, ModelError> {
    let ps = power_stats(c, sp, f_s)?;
    Ok(gaussian_tail(eta - ps.mu, ps.sigma))
}

pub fn cnn_accuracy(am: &AlphaModel, f_s: f64) -> f64 {
    am.eval(f_s)
}

/// One class evaluated at a fixed sampling rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPoint {
    pub mu: f64,
    pub sigma: f64,
    pub prior: f64,
}

/// Detector statistics of a whole class set at one sampling rate.
///
/// Everything the threshold search needs is precomputed here so repeated
/// evaluations in `eta` only cost a handful of tail probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub f_s: f64,
    pub static_class: ClassPoint,
    pub actions: Vec<ClassPoint>,
    /// CPU cycles of one CNN inference at this rate.
    pub cnn_cycles: f64,
    prior_sum: f64,
}

impl DetectorModel {
    pub fn new(cs: &ClassSet, sp: &SensingParams, f_s: f64) -> Result<Self, ModelError> {
        let point = |c: &ClassStats| -> Result<ClassPoint, ModelError> {
            let ps = power_stats(c, sp, f_s)?;
            Ok(ClassPoint { mu: ps.mu, sigma: ps.sigma, prior: c.prior_i })
        };
        let static_class = point(cs.static_class())?;
        let actions = cs.actions().iter().map(point).collect::<Result<Vec<_>, _>>()?;
        if actions.is_empty() {
            return Err(ModelError::NoActionClasses);
        }
        let prior_sum = cs.classes().iter().map(|c| c.prior_i).sum();
        Ok(Self { f_s, static_class, actions, cnn_cycles: sp.cnn_cycles(f_s), prior_sum })
    }

    pub fn miss_rate(&self, action: usize, eta: f64) -> f64 {
        let a = &self.actions[action];
        gaussian_tail(a.mu - eta, a.sigma)
    }

    pub fn false_positive_rate(&self, eta: f64) -> f64 {
        let s = &self.static_class;
        gaussian_tail(eta - s.mu, s.sigma)
    }

    /// Smallest action-class power mean; thresholds above it are not considered.
    pub fn eta_upper(&self) -> f64 {
        self.actions.iter().map(|a| a.mu).fold(f64::INFINITY, f64::min)
    }

    /// Average recognition accuracy for threshold `eta` and CNN accuracy `alpha`.
    pub fn accuracy(&self, eta: f64, alpha: f64) -> f64 {
        let s = &self.static_class;
        let actions: f64 = self
            .actions
            .iter()
            .map(|a| a.prior * gaussian_tail(eta - a.mu, a.sigma))
            .sum();
        let static_ok = gaussian_tail(s.mu - eta, s.sigma);
        let static_fp = gaussian_tail(eta - s.mu, s.sigma);
        (alpha * actions + s.prior * (static_ok + static_fp * alpha)).clamp(0.0, 1.0)
    }

    /// `accuracy(eta) - alpha`, evaluated from small tail terms only so that
    /// differences near `eta = 0` keep their relative precision.
    pub fn accuracy_excess(&self, eta: f64, alpha: f64) -> f64 {
        let s = &self.static_class;
        let missed: f64 = self.actions.iter().map(|a| a.prior * gaussian_tail(a.mu - eta, a.sigma)).sum();
        s.prior * (1.0 - alpha) * gaussian_tail(s.mu - eta, s.sigma) - alpha * missed
            + alpha * (self.prior_sum - 1.0)
    }

    /// Probability that an instance reaches the CNN stage.
    pub fn cnn_pass_probability(&self, eta: f64) -> f64 {
        let actions: f64 = self
            .actions
            .iter()
            .map(|a| a.prior * gaussian_tail(eta - a.mu, a.sigma))
            .sum();
        (actions + self.static_class.prior * self.false_positive_rate(eta)).clamp(0.0, 1.0)
    }

    /// Average sensing delay with `f_sense` cycles/s devoted to the CNN.
    pub fn avg_delay(&self, eta: f64, f_sense: f64) -> f64 {
        self.cnn_pass_probability(eta) * self.cnn_cycles / f_sense
    }

    /// Sign test of d accuracy / d eta at `eta = 0`.
    pub fn gain_condition(&self, alpha: f64) -> GainCondition {
        let s = &self.static_class;
        if !(s.prior > 0.0) {
            return GainCondition::degenerate(GainDegeneracy::NoStaticMass);
        }
        if !(alpha < 1.0) {
            return GainCondition::degenerate(GainDegeneracy::PerfectCnn);
        }
        if !(s.sigma > 0.0) || self.actions.iter().any(|a| a.prior > 0.0 && !(a.sigma > 0.0)) {
            return GainCondition::degenerate(GainDegeneracy::ZeroVariance);
        }
        // log of each subtracted term, summed in log space to avoid overflow
        let static_exp = s.mu * s.mu / (2.0 * s.sigma * s.sigma);
        let logs: Vec<f64> = self
            .actions
            .iter()
            .filter(|a| a.prior > 0.0 && alpha > 0.0)
            .map(|a| {
                (a.prior * alpha * s.sigma).ln() - (s.prior * (1.0 - alpha) * a.sigma).ln() + static_exp
                    - a.mu * a.mu / (2.0 * a.sigma * a.sigma)
            })
            .collect();
        let log_sum = log_sum_exp(&logs);
        let margin = 1.0 - log_sum.exp();
        GainCondition { holds: log_sum < 0.0, margin, log_subtracted: log_sum, degenerate: None }
    }

    /// Fraction of CNN compute saved relative to running the CNN on every
    /// window, at equal accuracy `alpha`.
    pub fn performance_gain(&self, alpha: f64) -> Result<PerformanceGain, ModelError> {
        let cond = self.gain_condition(alpha);
        if !cond.holds {
            return Err(ModelError::NoGainRegime(match cond.degenerate {
                Some(d) => format!("{d:?}"),
                None => format!("condition margin {:.6e} <= 0", cond.margin),
            }));
        }
        let eta_u = self.eta_upper();
        let pass_branch = 1.0 - self.cnn_pass_probability(eta_u);
        if !(eta_u > 0.0) {
            return Ok(PerformanceGain { rho: pass_branch.max(0.0), pass_branch, root_branch: None, eta_root: None });
        }
        let excess = |eta: f64| self.accuracy_excess(eta, alpha);
        if excess(eta_u) >= 0.0 {
            return Ok(PerformanceGain { rho: pass_branch.max(0.0), pass_branch, root_branch: None, eta_root: None });
        }
        // largest eta in (0, eta_u) where the accuracy comes back down to alpha
        const GRID: usize = 2048;
        let step = eta_u / GRID as f64;
        let top = (1..GRID).rev().find(|&k| excess(k as f64 * step) >= 0.0);
        let eta_root = match top {
            Some(k) => {
                let tol = Tolerance::new(1e-13 * eta_u, 200).expect("positive tolerance");
                let (lo, _) = numerics::bisect_bracket(excess, 0.0, k as f64 * step, (k + 1) as f64 * step, tol)
                    .expect("grid bracket has a sign change");
                lo
            }
            None => 0.0,
        };
        let root_branch = s_prior_times_pass(self, eta_root) / alpha;
        let rho = root_branch.min(pass_branch).max(0.0);
        Ok(PerformanceGain { rho, pass_branch, root_branch: Some(root_branch), eta_root: Some(eta_root) })
    }
}

fn s_prior_times_pass(model: &DetectorModel, eta: f64) -> f64 {
    let s = &model.static_class;
    s.prior * gaussian_tail(s.mu - eta, s.sigma)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Why the gain condition could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainDegeneracy {
    /// The static class has zero prior.
    NoStaticMass,
    /// The CNN is already perfect, so no threshold can help.
    PerfectCnn,
    /// A class has zero band-power variance.
    ZeroVariance,
}

/// Verdict of the compute-saving condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainCondition {
    pub holds: bool,
    /// `1 - sum_i(...)`; positive exactly when the condition holds.
    pub margin: f64,
    /// Natural log of the subtracted sum.
    pub log_subtracted: f64,
    pub degenerate: Option<GainDegeneracy>,
}

impl GainCondition {
    fn degenerate(reason: GainDegeneracy) -> Self {
        Self { holds: false, margin: f64::NAN, log_subtracted: f64::NAN, degenerate: Some(reason) }
    }
}

/// Both branches of the compute-saving ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceGain {
    pub rho: f64,
    /// `1 - p_cnn(eta_u)`.
    pub pass_branch: f64,
    /// `p_static (1 - p_fp) / alpha` at the largest threshold keeping accuracy at `alpha`.
    pub root_branch: Option<f64>,
    pub eta_root: Option<f64>,
}

pub fn overall_accuracy(
    cs: &ClassSet,
    sp: &SensingParams,
    am: &AlphaModel,
    f_s: f64,
    eta: f64,
) -> Result<f64, ModelError> {
    Ok(DetectorModel::new(cs, sp, f_s)?.accuracy(eta, am.eval(f_s)))
}

pub fn cnn_pass_probability(cs: &ClassSet, sp: &SensingParams, f_s: f64, eta: f64) -> Result<f64, ModelError> {
    Ok(DetectorModel::new(cs, sp, f_s)?.cnn_pass_probability(eta))
}

pub fn avg_sensing_delay(
    cs: &ClassSet,
    sp: &SensingParams,
    f_s: f64,
    eta: f64,
    f_sense: f64,
) -> Result<f64, ModelError> {
    if !(f_sense > 0.0) {
        return Err(ModelError::InvalidCompute(f_sense));
    }
    Ok(DetectorModel::new(cs, sp, f_s)?.avg_delay(eta, f_sense))
}

pub fn eta_upper(cs: &ClassSet, sp: &SensingParams, f_s: f64) -> Result<f64, ModelError> {
    Ok(DetectorModel::new(cs, sp, f_s)?.eta_upper())
}

pub fn gain_condition(
    cs: &ClassSet,
    sp: &SensingParams,
    am: &AlphaModel,
    f_s: f64,
) -> Result<GainCondition, ModelError> {
    Ok(DetectorModel::new(cs, sp, f_s)?.gain_condition(am.eval(f_s)))
}

pub fn performance_gain(cs: &ClassSet, sp: &SensingParams, am: &AlphaModel, f_s: f64) -> Result<f64, ModelError> {
    Ok(DetectorModel::new(cs, sp, f_s)?.performance_gain(am.eval(f_s))?.rho)
}
