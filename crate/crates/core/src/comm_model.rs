//! Devices, uplink rates, offloading delay, and random scenario generation.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeds::stream_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("zero allocation gives an unbounded delay (tau_c = {tau_c}, f_n = {f_n}, rate = {rate})")]
    InfiniteDelay { tau_c: f64, f_n: f64, rate: f64 },
    #[error("scenario file: {0}")]
    Io(String),
}

/// Offloaded computation task `(V, C, T_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceTask {
    /// Input size in bits.
    pub v_bits: f64,
    /// CPU cycles per input bit.
    pub c_intensity: f64,
    /// Delay tolerance in seconds.
    pub t_max: f64,
}

impl DeviceTask {
    pub fn validate(&self) -> Result<(), CommError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.v_bits) && ok(self.c_intensity) && ok(self.t_max) {
            Ok(())
        } else {
            Err(CommError::InvalidTask(format!("all fields must be positive and finite: {self:?}")))
        }
    }
}

/// Uplink budget of one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub pathloss_db: f64,
    /// Small-scale fading power gain.
    pub fading_gain: f64,
}

impl Link {
    pub fn validate(&self) -> Result<(), CommError> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(CommError::InvalidLink(format!("bandwidth {} must be positive", self.bandwidth_hz)));
        }
        if !(self.fading_gain >= 0.0) || !self.fading_gain.is_finite() {
            return Err(CommError::InvalidLink(format!("fading gain {} must be >= 0", self.fading_gain)));
        }
        if ![self.tx_power_dbm, self.noise_dbm_per_hz, self.pathloss_db].iter().all(|v| v.is_finite()) {
            return Err(CommError::InvalidLink("power levels must be finite".into()));
        }
        Ok(())
    }

    /// Linear receive SNR.
    pub fn snr(&self) -> f64 {
        let noise_dbm = self.noise_dbm_per_hz + 10.0 * self.bandwidth_hz.log10();
        10f64.powf((self.tx_power_dbm - self.pathloss_db - noise_dbm) / 10.0) * self.fading_gain
    }
}

/// Shannon rate of a link in bits/s.
pub fn data_rate(l: &Link) -> f64 {
    l.bandwidth_hz * l.snr().ln_1p() / std::f64::consts::LN_2
}

/// Smallest device distance used in the pathloss model, km.
pub const MIN_DISTANCE_KM: f64 = 1e-3;

/// Macro-cell pathloss in dB at distance `d_km`.
pub fn pathloss_db(d_km: f64) -> f64 {
    128.1 + 37.6 * d_km.max(MIN_DISTANCE_KM).log10()
}

/// Upload plus edge-execution delay of a task.
pub fn task_delay(t: &DeviceTask, tau_c: f64, f_n: f64, rate: f64) -> Result<f64, CommError> {
    if !(tau_c > 0.0) || !(f_n > 0.0) || !(rate > 0.0) {
        return Err(CommError::InfiniteDelay { tau_c, f_n, rate });
    }
    Ok(transmission_delay(t, tau_c, rate) + computation_delay(t, f_n))
}

pub fn transmission_delay(t: &DeviceTask, tau_c: f64, rate: f64) -> f64 {
    t.v_bits / (tau_c * rate)
}

pub fn computation_delay(t: &DeviceTask, f_n: f64) -> f64 {
    t.v_bits * t.c_intensity / f_n
}

/// A device with its task, link and the rate derived from the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub task: DeviceTask,
    pub link: Link,
    pub distance_km: f64,
    pub rate: f64,
}

impl Device {
    pub fn new(task: DeviceTask, link: Link, distance_km: f64) -> Result<Self, CommError> {
        task.validate()?;
        link.validate()?;
        Ok(Self { task, link, distance_km, rate: data_rate(&link) })
    }
}

/// One cell: devices sharing the base station with the sensing task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub devices: Vec<Device>,
    /// Total edge compute in cycles/s.
    pub f_edge_hz: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CommError> {
        if self.devices.is_empty() {
            return Err(CommError::InvalidScenario("no devices".into()));
        }
        if !(self.f_edge_hz > 0.0) || !self.f_edge_hz.is_finite() {
            return Err(CommError::InvalidScenario(format!("f_edge_hz {} must be positive", self.f_edge_hz)));
        }
        for (i, d) in self.devices.iter().enumerate() {
            d.task.validate().map_err(|e| CommError::InvalidScenario(format!("device {i}: {e}")))?;
            d.link.validate().map_err(|e| CommError::InvalidScenario(format!("device {i}: {e}")))?;
            let expected = data_rate(&d.link);
            if !d.rate.is_finite() || (d.rate - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(CommError::InvalidScenario(format!(
                    "device {i}: stored rate {} disagrees with link rate {expected}",
                    d.rate
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn with_f_edge(&self, f_edge_hz: f64) -> Self {
        Self { f_edge_hz, ..self.clone() }
    }

    pub fn save_json(&self, path: &Path) -> Result<(), CommError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CommError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CommError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load_json(path: &Path) -> Result<Self, CommError> {
        let text = std::fs::read_to_string(path).map_err(|e| CommError::Io(format!("{}: {e}", path.display())))?;
        let s: Scenario = serde_json::from_str(&text).map_err(|e| CommError::Io(format!("{}: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }
}

/// Distributions used by [`generate_scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm_per_hz: f64,
    /// Task size range in bits, sampled uniformly.
    pub v_range: [f64; 2],
    /// Cycles-per-bit range, sampled uniformly.
    pub c_range: [f64; 2],
    pub t_max: f64,
    pub f_edge_hz: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 4e6,
            tx_power_dbm: 24.0,
            noise_dbm_per_hz: -174.0,
            v_range: [0.3e6, 1e6],
            c_range: [400.0, 1000.0],
            t_max: 0.4,
            f_edge_hz: 40e9,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), CommError> {
        let range_ok = |r: [f64; 2]| r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite();
        if !range_ok(self.v_range) || !range_ok(self.c_range) {
            return Err(CommError::InvalidScenario("v_range and c_range need 0 < lo <= hi".into()));
        }
        if !(self.t_max > 0.0) || !(self.f_edge_hz > 0.0) || !(self.bandwidth_hz > 0.0) {
            return Err(CommError::InvalidScenario("t_max, f_edge_hz and bandwidth_hz must be positive".into()));
        }
        Ok(())
    }
}

fn uniform<R: Rng>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Random cell with `n_devices` devices placed uniformly in a disc.
///
/// Device `k` draws only from stream `k` of `seed`, so the first `n` devices
/// are the same for every `n_devices >= n`.
pub fn generate_scenario(
    n_devices: usize,
    radius_km: f64,
    params: &ScenarioParams,
    seed: u64,
) -> Result<Scenario, CommError> {
    if n_devices == 0 {
        return Err(CommError::InvalidScenario("need at least one device".into()));
    }
    if !(radius_km > MIN_DISTANCE_KM) || !radius_km.is_finite() {
        return Err(CommError::InvalidScenario(format!("radius {radius_km} km must exceed {MIN_DISTANCE_KM} km")));
    }
    params.validate()?;
    let devices = (0..n_devices)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let u: f64 = rng.random();
            let r2 = MIN_DISTANCE_KM * MIN_DISTANCE_KM;
            let d = (r2 + u * (radius_km * radius_km - r2)).sqrt();
            let fading: f64 = Exp1.sample(&mut rng);
            let task = DeviceTask {
                v_bits: uniform(&mut rng, params.v_range),
                c_intensity: uniform(&mut rng, params.c_range),
                t_max: params.t_max,
            };
            let link = Link {
                bandwidth_hz: params.bandwidth_hz,
                tx_power_dbm: params.tx_power_dbm,
                noise_dbm_per_hz: params.noise_dbm_per_hz,
                pathloss_db: pathloss_db(d),
                fading_gain: fading,
            };
            Device::new(task, link, d)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario { devices, f_edge_hz: params.f_edge_hz, seed })
}
