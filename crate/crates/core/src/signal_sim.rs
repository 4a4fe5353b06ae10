//! Synthetic CSI windows, the FFT band-power detector, and Monte Carlo
//! estimation of its rates and moments.
//!
//! The simulator is the independent check on the analytical model: windows
//! are synthesized in the time domain and pushed through the same FFT
//! detector a receiver would run.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::seeds::stream_rng;
use crate::sensing_model::{snapped_ceil, snapped_floor, ClassStats, SensingParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("window of {t_win} s at {f_s} Hz has {len} samples, need at least 2")]
    WindowTooShort { f_s: f64, t_win: f64, len: usize },
    #[error("window holds {got} samples, expected {expected}")]
    WindowLength { got: usize, expected: usize },
    #[error("tone at {freq} Hz aliases at sampling rate {f_s} Hz")]
    Aliasing { freq: f64, f_s: f64 },
    #[error("band [{f_lo}, {f_hi}] Hz is outside the Nyquist range of {f_s} Hz sampling")]
    BandOutsideNyquist { f_lo: f64, f_hi: f64, f_s: f64 },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("cannot build a synthetic class matching the statistics: {0}")]
    Unmatchable(String),
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Minimum trial count accepted by [`monte_carlo_rates`].
pub const MIN_TRIALS: usize = 100;

/// Number of samples in a window of `t_win` seconds at `f_s` Hz.
pub fn window_len(f_s: f64, t_win: f64) -> Result<usize, SimError> {
    let n = (t_win * f_s).round();
    if !(n >= 2.0) || !n.is_finite() {
        return Err(SimError::WindowTooShort { f_s, t_win, len: n.max(0.0) as usize });
    }
    Ok(n as usize)
}

/// CSI samples of one subcarrier over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiWindow {
    samples: Vec<Complex64>,
    f_s: f64,
    t_win: f64,
}

impl CsiWindow {
    pub fn new(samples: Vec<Complex64>, f_s: f64, t_win: f64) -> Result<Self, SimError> {
        let expected = window_len(f_s, t_win)?;
        if samples.len() != expected {
            return Err(SimError::WindowLength { got: samples.len(), expected });
        }
        Ok(Self { samples, f_s, t_win })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn f_s(&self) -> f64 {
        self.f_s
    }

    pub fn t_win(&self) -> f64 {
        self.t_win
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One sinusoidal CSI component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub freq: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Distribution of the per-window power multiplier applied to all tones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterKind {
    /// Power multiplier `max(0, 1 + j Z)`: Gaussian tone power with variance `j^2 lambda^2`.
    #[default]
    PowerNormal,
    /// Log-normal power multiplier with unit mean and standard deviation `j`.
    LogNormal,
}

/// Statistical structure of the CSI estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// White circular complex Gaussian noise, `sigma2 / 2` per quadrature.
    #[default]
    Circular,
    /// Noise whose DFT bins are independent real Gaussians of variance
    /// `sigma2`, so every band bin contributes one real chi-square degree of
    /// freedom.
    SpectralReal,
}

/// Ground-truth state of a synthetic class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassState {
    Static,
    Action,
}

/// Generator description for one recognition class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClassSpec {
    pub state: ClassState,
    pub tones: Vec<Tone>,
    /// Standard deviation of the per-window tone power multiplier.
    pub amp_jitter: f64,
    #[serde(default)]
    pub jitter_kind: JitterKind,
    /// Static CSI baseline `[re, im]`.
    pub dc_level: [f64; 2],
    /// Per-sample estimation-noise variance.
    pub noise_sigma2: f64,
    #[serde(default)]
    pub noise_model: NoiseModel,
}

impl SyntheticClassSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |s: String| Err(SimError::InvalidSpec(s));
        if !(self.amp_jitter >= 0.0) || !self.amp_jitter.is_finite() {
            return bad(format!("amp_jitter {} must be >= 0", self.amp_jitter));
        }
        if !(self.noise_sigma2 >= 0.0) || !self.noise_sigma2.is_finite() {
            return bad(format!("noise_sigma2 {} must be >= 0", self.noise_sigma2));
        }
        if self.dc_level.iter().any(|v| !v.is_finite()) {
            return bad("dc_level must be finite".into());
        }
        for t in &self.tones {
            if !t.freq.is_finite() || !t.amplitude.is_finite() || !t.phase.is_finite() {
                return bad(format!("non-finite tone {t:?}"));
            }
        }
        Ok(())
    }

    /// Generator whose band power has exactly the model moments of `stats`:
    /// a zero-phase tone on the band-center bin with power `lambda_i`,
    /// Gaussian power jitter of variance `sigma_d2_i`, and spectral-real noise
    /// of variance `sp.sigma2`. Requires `r_i == sp.sigma2 * band_bins`.
    pub fn matched(stats: &ClassStats, sp: &SensingParams, state: ClassState) -> Result<Self, SimError> {
        let bins = sp.band_bins() as f64;
        let r_expected = sp.sigma2 * bins;
        if (stats.r_i - r_expected).abs() > 1e-9 * r_expected.max(1e-300) {
            return Err(SimError::Unmatchable(format!(
                "r_i = {} but the band implies sigma2 * bins = {}",
                stats.r_i, r_expected
            )));
        }
        let tones = if stats.lambda_i > 0.0 {
            let (lo, hi) = sp.band_bin_range();
            let bin = (lo + hi) / 2;
            vec![Tone { freq: bin as f64 / sp.t_win, amplitude: stats.lambda_i.sqrt(), phase: 0.0 }]
        } else {
            if stats.sigma_d2_i > 0.0 {
                return Err(SimError::Unmatchable("sigma_d2_i > 0 needs lambda_i > 0".into()));
            }
            Vec::new()
        };
        let amp_jitter = if stats.lambda_i > 0.0 { stats.sigma_d2_i.sqrt() / stats.lambda_i } else { 0.0 };
        Ok(Self {
            state,
            tones,
            amp_jitter,
            jitter_kind: JitterKind::PowerNormal,
            dc_level: [1.0, 0.0],
            noise_sigma2: sp.sigma2,
            noise_model: NoiseModel::SpectralReal,
        })
    }
}

/// Plans and buffers for synthesizing windows of one length.
struct WindowSynth {
    n: usize,
    inverse: Option<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    /// Sum of all tones at unit gain, per sample.
    tones: Vec<Complex64>,
}

impl WindowSynth {
    fn new(spec: &SyntheticClassSpec, f_s: f64, n: usize, planner: &mut FftPlanner<f64>) -> Result<Self, SimError> {
        spec.validate()?;
        for t in &spec.tones {
            if t.freq.abs() >= f_s / 2.0 {
                return Err(SimError::Aliasing { freq: t.freq, f_s });
            }
        }
        let inverse = match spec.noise_model {
            NoiseModel::SpectralReal if spec.noise_sigma2 > 0.0 => Some(planner.plan_fft_inverse(n)),
            _ => None,
        };
        let scratch_len = inverse.as_ref().map_or(0, |f| f.get_inplace_scratch_len());
        let two_pi = 2.0 * std::f64::consts::PI;
        let tones = (0..n)
            .map(|m| {
                spec.tones
                    .iter()
                    .map(|t| Complex64::from_polar(t.amplitude, two_pi * t.freq * m as f64 / f_s + t.phase))
                    .sum()
            })
            .collect();
        Ok(Self { n, inverse, scratch: vec![Complex64::new(0.0, 0.0); scratch_len], tones })
    }

    fn power_multiplier<R: Rng>(spec: &SyntheticClassSpec, rng: &mut R) -> f64 {
        if spec.amp_jitter == 0.0 {
            return 1.0;
        }
        let z: f64 = rng.sample(StandardNormal);
        match spec.jitter_kind {
            JitterKind::PowerNormal => (1.0 + spec.amp_jitter * z).max(0.0),
            JitterKind::LogNormal => {
                let s2 = (1.0 + spec.amp_jitter * spec.amp_jitter).ln();
                (s2.sqrt() * z - 0.5 * s2).exp()
            }
        }
    }

    fn fill<R: Rng>(&mut self, spec: &SyntheticClassSpec, rng: &mut R, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.n);
        let gain = Self::power_multiplier(spec, rng).sqrt();
        let sigma = spec.noise_sigma2.sqrt();
        match (&self.inverse, spec.noise_model) {
            (Some(inverse), NoiseModel::SpectralReal) => {
                for v in out.iter_mut() {
                    let w: f64 = rng.sample(StandardNormal);
                    *v = Complex64::new(sigma * w, 0.0);
                }
                inverse.process_with_scratch(out, &mut self.scratch);
                let scale = 1.0 / (self.n as f64).sqrt();
                for v in out.iter_mut() {
                    *v *= scale;
                }
            }
            _ if spec.noise_sigma2 > 0.0 => {
                let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
                for v in out.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *v = Complex64::new(s * re, s * im);
                }
            }
            _ => out.fill(Complex64::new(0.0, 0.0)),
        }
        let dc = Complex64::new(spec.dc_level[0], spec.dc_level[1]);
        for (v, t) in out.iter_mut().zip(&self.tones) {
            *v += dc + t * gain;
        }
    }
}

/// Synthesize one window of `spec` at `f_s` Hz; deterministic in `seed`.
pub fn generate_csi(spec: &SyntheticClassSpec, f_s: f64, t_win: f64, seed: u64) -> Result<CsiWindow, SimError> {
    let n = window_len(f_s, t_win)?;
    let mut planner = FftPlanner::new();
    let mut synth = WindowSynth::new(spec, f_s, n, &mut planner)?;
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    synth.fill(spec, &mut stream_rng(seed, 0), &mut samples);
    CsiWindow::new(samples, f_s, t_win)
}

/// FFT band-power detector for windows of one length.
struct BandMeter {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
    lo: usize,
    hi: usize,
    scratch: Vec<Complex64>,
}

impl BandMeter {
    fn new(n: usize, f_s: f64, t_win: f64, f_lo: f64, f_hi: f64, planner: &mut FftPlanner<f64>) -> Result<Self, SimError> {
        let outside = SimError::BandOutsideNyquist { f_lo, f_hi, f_s };
        if !(0.0 <= f_lo && f_lo <= f_hi && f_hi < f_s / 2.0) {
            return Err(outside);
        }
        let lo = snapped_floor(f_lo * t_win).max(0) as usize;
        let hi = snapped_ceil(f_hi * t_win).max(0) as usize;
        // positive-frequency bins only
        if 2 * hi >= n {
            return Err(outside);
        }
        let fft = planner.plan_fft_forward(n);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Ok(Self { fft, n, lo, hi, scratch })
    }

    /// Band power of `buf`; the buffer is overwritten with its spectrum.
    fn power(&mut self, buf: &mut [Complex64]) -> f64 {
        self.fft.process_with_scratch(buf, &mut self.scratch);
        let energy: f64 = buf[self.lo..=self.hi].iter().map(|d| d.norm_sqr()).sum();
        // |D|^2 = |FFT|^2 / N, and P divides by N once more
        energy / (self.n as f64 * self.n as f64)
    }
}

/// DFT of a window with `1/sqrt(N)` normalization.
pub fn normalized_dft(w: &CsiWindow) -> Vec<Complex64> {
    let mut buf = w.samples.clone();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Power of the `[f_lo, f_hi]` band of a window.
pub fn highfreq_power(w: &CsiWindow, f_lo: f64, f_hi: f64) -> Result<f64, SimError> {
    let mut planner = FftPlanner::new();
    let mut meter = BandMeter::new(w.len(), w.f_s, w.t_win, f_lo, f_hi, &mut planner)?;
    let mut buf = w.samples.clone();
    Ok(meter.power(&mut buf))
}

/// Gate verdict: true means "action", sent on to the CNN. Ties count as static.
pub fn detect_action(p: f64, eta: f64) -> bool {
    p > eta
}

/// Band powers of `trials` independent windows. Trial `k` always draws from
/// stream `k` of `seed`, so the output does not depend on `exec`.
pub fn power_samples(
    spec: &SyntheticClassSpec,
    sp: &SensingParams,
    f_s: f64,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<f64>, SimError> {
    const CHUNK: usize = 512;
    let n = window_len(f_s, sp.t_win)?;
    // validate once up front; workers rebuild their own plans
    {
        let mut planner = FftPlanner::new();
        WindowSynth::new(spec, f_s, n, &mut planner)?;
        BandMeter::new(n, f_s, sp.t_win, sp.f_lo, sp.f_hi, &mut planner)?;
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts = exec.map_indexed(chunks, |c| {
        let mut planner = FftPlanner::new();
        let mut synth = WindowSynth::new(spec, f_s, n, &mut planner).expect("validated");
        let mut meter = BandMeter::new(n, f_s, sp.t_win, sp.f_lo, sp.f_hi, &mut planner).expect("validated");
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let end = ((c + 1) * CHUNK).min(trials);
        (c * CHUNK..end)
            .map(|k| {
                let mut rng = stream_rng(seed, k as u64);
                synth.fill(spec, &mut rng, &mut buf);
                meter.power(&mut buf)
            })
            .collect::<Vec<f64>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Empirical error rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Fraction of `powers` whose gate verdict disagrees with `state`.
pub fn error_rate(powers: &[f64], state: ClassState, eta: f64) -> RateEstimate {
    let errors = powers
        .iter()
        .filter(|&&p| match state {
            ClassState::Action => !detect_action(p, eta),
            ClassState::Static => detect_action(p, eta),
        })
        .count();
    let n = powers.len();
    let rate = if n == 0 { 0.0 } else { errors as f64 / n as f64 };
    let stderr = if n == 0 { 0.0 } else { (rate * (1.0 - rate) / n as f64).sqrt() };
    RateEstimate { rate, stderr, trials: n }
}

/// Monte Carlo miss rate (action spec) or false-positive rate (static spec).
pub fn monte_carlo_rates(
    spec: &SyntheticClassSpec,
    sp: &SensingParams,
    f_s: f64,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<RateEstimate, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::TooFewTrials { min: MIN_TRIALS, got: trials });
    }
    let powers = power_samples(spec, sp, f_s, trials, seed, Exec::default())?;
    Ok(error_rate(&powers, spec.state, eta))
}

/// Sample mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub n: usize,
}

pub fn sample_moments(xs: &[f64]) -> MomentEstimate {
    let n = xs.len();
    if n < 2 {
        let mean = xs.first().copied().unwrap_or(0.0);
        return MomentEstimate { mean, variance: 0.0, se_mean: 0.0, se_variance: 0.0, n };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = x - mean;
        let d2 = d * d;
        (a + d2, b + d2 * d2)
    });
    let variance = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let biased = m2 / nf;
    let se_variance = ((m4 - biased * biased * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt();
    MomentEstimate { mean, variance, se_mean: (variance / nf).sqrt(), se_variance, n }
}

/// Band-power samples of one class at one sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSamples {
    pub f_s: f64,
    pub powers: Vec<f64>,
}

/// Minimum samples per sampling rate for [`fit_class_stats`].
pub const MIN_FIT_SAMPLES: usize = 30;

/// Fit `(lambda, r)` to the per-rate sample means by least squares on
/// `mu = lambda + r / (T F)`, then `sigma_d^2` as the average variance left
/// after removing the noise terms. All three are clamped at zero.
pub fn fit_class_stats(data: &[RateSamples], sp: &SensingParams, prior: f64) -> Result<ClassStats, SimError> {
    for d in data {
        if d.powers.len() < MIN_FIT_SAMPLES {
            return Err(SimError::Fit(format!(
                "{} samples at {} Hz, need at least {MIN_FIT_SAMPLES}",
                d.powers.len(),
                d.f_s
            )));
        }
        if !(d.f_s > 0.0) {
            return Err(SimError::Fit(format!("invalid sampling rate {}", d.f_s)));
        }
    }
    let mut rates: Vec<f64> = data.iter().map(|d| d.f_s).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    if rates.len() < 2 {
        return Err(SimError::Fit(format!("need at least 2 distinct sampling rates, got {}", rates.len())));
    }
    let pts: Vec<(f64, MomentEstimate)> =
        data.iter().map(|d| (1.0 / (sp.t_win * d.f_s), sample_moments(&d.powers))).collect();
    let n = pts.len() as f64;
    let x_bar = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_bar = pts.iter().map(|p| p.1.mean).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - x_bar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - x_bar) * (p.1.mean - y_bar)).sum();
    let mut r = sxy / sxx;
    let mut lambda = y_bar - r * x_bar;
    if r < 0.0 {
        r = 0.0;
        lambda = y_bar;
    }
    if lambda < 0.0 {
        lambda = 0.0;
        let sx2: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy0: f64 = pts.iter().map(|p| p.0 * p.1.mean).sum();
        r = (sxy0 / sx2).max(0.0);
    }
    let sigma_d2 = pts
        .iter()
        .map(|(x, m)| m.variance - 4.0 * sp.sigma2 * lambda * x - 2.0 * sp.sigma2 * r * x * x)
        .sum::<f64>()
        / n;
    Ok(ClassStats { lambda_i: lambda, r_i: r, sigma_d2_i: sigma_d2.max(0.0), prior_i: prior })
}

/// Version line written at the top of power-sample CSV files.
pub const POWER_CSV_VERSION: &str = "# iscc power-samples v1";
pub const POWER_CSV_HEADER: [&str; 4] = ["class", "f_s", "trial", "P"];

/// One exported band-power sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSampleRow {
    pub class: String,
    pub f_s: f64,
    pub trial: u64,
    pub p: f64,
}

pub fn write_power_samples_csv<W: Write>(mut out: W, rows: &[PowerSampleRow]) -> Result<(), SimError> {
    let io = |e: std::io::Error| SimError::Io(e.to_string());
    writeln!(out, "{POWER_CSV_VERSION}").map_err(io)?;
    writeln!(out, "{}", POWER_CSV_HEADER.join(",")).map_err(io)?;
    for r in rows {
        if r.class.contains([',', '"', '\n']) {
            return Err(SimError::InvalidSpec(format!("class label {:?} is not CSV-safe", r.class)));
        }
        writeln!(out, "{},{},{},{}", r.class, r.f_s, r.trial, r.p).map_err(io)?;
    }
    Ok(())
}

/// Parse a power-sample CSV, enforcing the version line and header.
pub fn read_power_samples_csv<R: BufRead>(input: R) -> Result<Vec<PowerSampleRow>, SimError> {
    let mut lines = input.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String), SimError> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(SimError::Csv { line: i + 1, reason: e.to_string() }),
            None => Err(SimError::Csv { line: 0, reason: format!("missing {what}") }),
        }
    };
    let (ln, version) = next_line("version line")?;
    if version.trim_end() != POWER_CSV_VERSION {
        return Err(SimError::Csv { line: ln, reason: format!("expected {POWER_CSV_VERSION:?}, got {version:?}") });
    }
    let (ln, header) = next_line("header")?;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols != POWER_CSV_HEADER {
        return Err(SimError::Csv { line: ln, reason: format!("expected header {POWER_CSV_HEADER:?}, got {cols:?}") });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| SimError::Csv { line: line_no, reason: e.to_string() })?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 4 {
            return Err(SimError::Csv { line: line_no, reason: format!("expected 4 fields, got {}", fields.len()) });
        }
        let num = |s: &str, name: &str| -> Result<f64, SimError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SimError::Csv { line: line_no, reason: format!("bad {name} value {s:?}") })
        };
        let trial = fields[2]
            .trim()
            .parse::<u64>()
            .map_err(|_| SimError::Csv { line: line_no, reason: format!("bad trial value {:?}", fields[2]) })?;
        rows.push(PowerSampleRow {
            class: fields[0].trim().to_string(),
            f_s: num(fields[1], "f_s")?,
            trial,
            p: num(fields[3], "P")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::q;
    use crate::sensing_model::{power_stats, ClassSet};

    fn tone_spec(freq: f64, amp: f64) -> SyntheticClassSpec {
        SyntheticClassSpec {
            state: ClassState::Action,
            tones: vec![Tone { freq, amplitude: amp, phase: 0.3 }],
            amp_jitter: 0.0,
            jitter_kind: JitterKind::PowerNormal,
            dc_level: [1.0, 0.0],
            noise_sigma2: 0.0,
            noise_model: NoiseModel::Circular,
        }
    }

    /// O(N^2) DFT with 1/sqrt(N) normalization.
    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|l| {
                let s: Complex64 = x
                    .iter()
                    .enumerate()
                    .map(|(m, v)| {
                        let arg = -2.0 * std::f64::consts::PI * (l * m % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, arg)
                    })
                    .sum();
                s / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn static_noiseless_window_is_constant() {
        let spec = SyntheticClassSpec { tones: vec![], state: ClassState::Static, ..tone_spec(0.0, 0.0) };
        let w = generate_csi(&spec, 100.0, 3.0, 1).unwrap();
        assert_eq!(w.len(), 300);
        assert!(w.samples().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn tone_peaks_at_its_bin() {
        let w = generate_csi(&tone_spec(20.0, 1.0), 100.0, 3.0, 5).unwrap();
        assert_eq!(w.len(), 300);
        let d = naive_dft(w.samples());
        let peak = (1..150).max_by(|&a, &b| d[a].norm_sqr().total_cmp(&d[b].norm_sqr())).unwrap();
        assert_eq!(peak, 60);
    }

    #[test]
    fn generation_is_deterministic() {
        let mut spec = tone_spec(15.0, 0.5);
        spec.noise_sigma2 = 0.01;
        spec.amp_jitter = 0.1;
        let a = generate_csi(&spec, 100.0, 3.0, 42).unwrap();
        let b = generate_csi(&spec, 100.0, 3.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_csi(&spec, 100.0, 3.0, 43).unwrap());
    }

    #[test]
    fn aliasing_is_rejected() {
        assert!(matches!(generate_csi(&tone_spec(50.0, 1.0), 100.0, 3.0, 0), Err(SimError::Aliasing { .. })));
    }

    #[test]
    fn zero_window_has_zero_power() {
        let w = CsiWindow::new(vec![Complex64::new(0.0, 0.0); 300], 100.0, 3.0).unwrap();
        assert_eq!(highfreq_power(&w, 10.0, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn band_power_matches_naive_dft() {
        let mut spec = tone_spec(15.0, 0.7);
        spec.tones.push(Tone { freq: 13.1, amplitude: 0.2, phase: 1.0 });
        spec.noise_sigma2 = 0.02;
        let w = generate_csi(&spec, 100.0, 3.0, 9).unwrap();
        let d = naive_dft(w.samples());
        let oracle: f64 = d[30..=60].iter().map(|v| v.norm_sqr()).sum::<f64>() / 300.0;
        let got = highfreq_power(&w, 10.0, 20.0).unwrap();
        assert!(((got - oracle) / oracle).abs() <= 1e-10, "{got} vs {oracle}");

        // a clean on-bin tone carries its squared amplitude
        let w = generate_csi(&tone_spec(15.0, 0.7), 100.0, 3.0, 0).unwrap();
        assert!((highfreq_power(&w, 10.0, 20.0).unwrap() - 0.49).abs() < 1e-12);
    }

    #[test]
    fn parseval_holds() {
        let mut spec = tone_spec(12.0, 0.4);
        spec.noise_sigma2 = 0.05;
        for model in [NoiseModel::Circular, NoiseModel::SpectralReal] {
            spec.noise_model = model;
            let w = generate_csi(&spec, 64.0, 3.0, 3).unwrap();
            let time: f64 = w.samples().iter().map(|v| v.norm_sqr()).sum();
            let freq: f64 = normalized_dft(&w).iter().map(|v| v.norm_sqr()).sum();
            assert!(((time - freq) / time).abs() <= 1e-9);
        }
    }

    #[test]
    fn band_outside_nyquist_is_rejected() {
        let w = generate_csi(&tone_spec(5.0, 1.0), 30.0, 3.0, 0).unwrap();
        assert!(matches!(highfreq_power(&w, 10.0, 20.0), Err(SimError::BandOutsideNyquist { .. })));
    }

    #[test]
    fn detect_action_ties_are_static() {
        assert!(!detect_action(0.5, 1.0));
        assert!(detect_action(1.5, 1.0));
        assert!(!detect_action(1.0, 1.0));
    }

    #[test]
    fn noise_only_band_power_mean() {
        // 31 band bins, sigma2 = 0.01: E[P] = r / (T F) with r = 0.31
        let spec = SyntheticClassSpec {
            state: ClassState::Static,
            tones: vec![],
            noise_sigma2: 0.01,
            ..tone_spec(0.0, 0.0)
        };
        let sp = SensingParams::default();
        for model in [NoiseModel::Circular, NoiseModel::SpectralReal] {
            let spec = SyntheticClassSpec { noise_model: model, ..spec.clone() };
            let powers = power_samples(&spec, &sp, 100.0, 100_000, 11, Exec::Parallel).unwrap();
            let m = sample_moments(&powers);
            let expected = 0.01 * 31.0 / 300.0;
            assert!((m.mean - expected).abs() <= 3.0 * m.se_mean, "{model:?}: {} vs {expected}", m.mean);
        }
    }

    #[test]
    fn circular_noise_has_half_the_chi_square_variance() {
        // documents why matched specs use spectral-real noise
        let sp = SensingParams::default();
        let base = SyntheticClassSpec {
            state: ClassState::Static,
            tones: vec![],
            noise_sigma2: 0.01,
            ..tone_spec(0.0, 0.0)
        };
        let var = |model| {
            let spec = SyntheticClassSpec { noise_model: model, ..base.clone() };
            sample_moments(&power_samples(&spec, &sp, 100.0, 50_000, 5, Exec::Parallel).unwrap()).variance
        };
        let ratio = var(NoiseModel::Circular) / var(NoiseModel::SpectralReal);
        assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn noiseless_static_never_triggers() {
        let sp = SensingParams::default();
        let spec = SyntheticClassSpec { state: ClassState::Static, tones: vec![], ..tone_spec(0.0, 0.0) };
        let r = monte_carlo_rates(&spec, &sp, 100.0, 0.01, 1000, 1).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn zero_threshold_never_misses() {
        let sp = SensingParams::default();
        let mut spec = tone_spec(15.0, 0.5);
        spec.noise_sigma2 = 0.01;
        let r = monte_carlo_rates(&spec, &sp, 100.0, 0.0, 1000, 1).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn too_few_trials() {
        let sp = SensingParams::default();
        assert!(matches!(
            monte_carlo_rates(&tone_spec(15.0, 0.5), &sp, 100.0, 0.0, 99, 1),
            Err(SimError::TooFewTrials { .. })
        ));
    }

    #[test]
    fn matched_action_reproduces_q2() {
        // target (mu, sigma) = (2, 0.5) at 100 Hz; noise terms make up part of sigma
        let sp = SensingParams::default();
        let r = sp.sigma2 * sp.band_bins() as f64;
        let n = sp.t_win * 100.0;
        let lambda = 2.0 - r / n;
        let noise_var = 4.0 * sp.sigma2 * lambda / n + 2.0 * sp.sigma2 * r / (n * n);
        let stats = ClassStats { lambda_i: lambda, r_i: r, sigma_d2_i: 0.25 - noise_var, prior_i: 0.5 };
        let ps = power_stats(&stats, &sp, 100.0).unwrap();
        assert!((ps.mu - 2.0).abs() < 1e-12 && (ps.sigma - 0.5).abs() < 1e-12);
        let spec = SyntheticClassSpec::matched(&stats, &sp, ClassState::Action).unwrap();
        let est = monte_carlo_rates(&spec, &sp, 100.0, 1.0, 100_000, 2024).unwrap();
        let predicted = q(2.0).unwrap();
        assert!((est.rate - predicted).abs() <= 3.0 * est.stderr, "{} vs {predicted}", est.rate);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let sp = SensingParams::default();
        let cs = ClassSet::synthetic_default(&sp);
        let spec = SyntheticClassSpec::matched(&cs.actions()[0], &sp, ClassState::Action).unwrap();
        let a = power_samples(&spec, &sp, 50.0, 2000, 3, Exec::Sequential).unwrap();
        let b = power_samples(&spec, &sp, 50.0, 2000, 3, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    /// Stratified normal samples: the exact quantiles at (k + 1/2) / n.
    fn quantile_samples(mu: f64, sigma: f64, n: usize) -> Vec<f64> {
        let tol = crate::numerics::Tolerance::new(1e-12, 200).unwrap();
        (0..n)
            .map(|k| {
                let p = (k as f64 + 0.5) / n as f64;
                // Q(z) = 1 - p
                let z = crate::numerics::bisect_monotone(|z| q(z).unwrap(), 1.0 - p, -40.0, 40.0, tol).unwrap();
                mu + sigma * z
            })
            .collect()
    }

    #[test]
    fn fit_round_trip() {
        let sp = SensingParams::default();
        let truth = ClassStats { lambda_i: 1.0, r_i: 0.2, sigma_d2_i: 0.01, prior_i: 0.3 };
        let data: Vec<RateSamples> = [50.0, 100.0, 200.0, 400.0]
            .iter()
            .map(|&f| {
                let ps = power_stats(&truth, &sp, f).unwrap();
                RateSamples { f_s: f, powers: quantile_samples(ps.mu, ps.sigma, 10_000) }
            })
            .collect();
        let fit = fit_class_stats(&data, &sp, 0.3).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(fit.lambda_i, 1.0) < 0.05, "{fit:?}");
        assert!(rel(fit.r_i, 0.2) < 0.05, "{fit:?}");
        assert!(rel(fit.sigma_d2_i, 0.01) < 0.05, "{fit:?}");
        assert_eq!(fit.prior_i, 0.3);
    }

    #[test]
    fn fit_degenerate_inputs() {
        let sp = SensingParams::default();
        let constant: Vec<RateSamples> =
            [50.0, 200.0].iter().map(|&f| RateSamples { f_s: f, powers: vec![0.7; 40] }).collect();
        let fit = fit_class_stats(&constant, &sp, 0.5).unwrap();
        assert!(fit.r_i.abs() < 1e-12);
        assert!((fit.lambda_i - 0.7).abs() < 1e-12);
        assert_eq!(fit.sigma_d2_i, 0.0);

        let one_rate = vec![RateSamples { f_s: 50.0, powers: vec![0.7; 40] }];
        assert!(matches!(fit_class_stats(&one_rate, &sp, 0.5), Err(SimError::Fit(_))));
        let few: Vec<RateSamples> =
            [50.0, 200.0].iter().map(|&f| RateSamples { f_s: f, powers: vec![0.7; 10] }).collect();
        assert!(fit_class_stats(&few, &sp, 0.5).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let rows = vec![
            PowerSampleRow { class: "static".into(), f_s: 50.0, trial: 0, p: 0.051 },
            PowerSampleRow { class: "wave".into(), f_s: 100.0, trial: 1, p: 0.3 },
        ];
        let mut buf = Vec::new();
        write_power_samples_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_power_samples_csv(buf.as_slice()).unwrap(), rows);

        let bad = format!("{POWER_CSV_VERSION}\nclass,f_s,trial,P\nstatic,50,0,0.1\nstatic,abc,1,0.2\n");
        match read_power_samples_csv(bad.as_bytes()) {
            Err(SimError::Csv { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let no_version = "class,f_s,trial,P\n";
        assert!(matches!(read_power_samples_csv(no_version.as_bytes()), Err(SimError::Csv { line: 1, .. })));
    }
}
