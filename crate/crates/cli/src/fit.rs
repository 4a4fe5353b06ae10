//! Class statistics fitted from exported band-power samples.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use iscc_core::sensing_model::{ClassSet, SensingParams};
use iscc_core::signal_sim::{fit_class_stats, read_power_samples_csv, PowerSampleRow, RateSamples};

use crate::{CliError, Result};

/// Group rows by class index and sampling rate. Class labels must be the
/// indices `0..I`, with 0 the static class.
fn group(rows: &[PowerSampleRow]) -> Result<Vec<Vec<RateSamples>>> {
    let mut by_class: BTreeMap<usize, BTreeMap<u64, RateSamples>> = BTreeMap::new();
    for (k, r) in rows.iter().enumerate() {
        // version line and header take lines 1 and 2
        let ci: usize = r.class.parse().map_err(|_| {
            CliError::Config(format!("samples row {}: class {:?} is not a class index", k + 3, r.class))
        })?;
        by_class
            .entry(ci)
            .or_default()
            .entry(r.f_s.to_bits())
            .or_insert_with(|| RateSamples { f_s: r.f_s, powers: Vec::new() })
            .powers
            .push(r.p);
    }
    let n = by_class.len();
    if let Some((&last, _)) = by_class.last_key_value() {
        if last + 1 != n {
            return Err(CliError::Config(format!("class indices must be 0..{n}, found {last}")));
        }
    }
    Ok(by_class.into_values().map(|m| m.into_values().collect()).collect())
}

/// Fit every class; `priors` defaults to uniform.
pub fn fit_rows(rows: &[PowerSampleRow], sp: &SensingParams, priors: Option<&[f64]>) -> Result<ClassSet> {
    let groups = group(rows)?;
    let n = groups.len();
    let priors: Vec<f64> = match priors {
        Some(p) if p.len() != n => {
            return Err(CliError::Config(format!("{} priors given for {n} classes", p.len())));
        }
        Some(p) => p.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    let classes = groups
        .iter()
        .zip(&priors)
        .enumerate()
        .map(|(i, (g, &p))| fit_class_stats(g, sp, p).map_err(|e| CliError::Config(format!("class {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    ClassSet::new(classes).map_err(|e| CliError::Config(e.to_string()))
}

pub fn fit_file(path: &Path, sp: &SensingParams, priors: Option<&[f64]>) -> Result<ClassSet> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows = read_power_samples_csv(BufReader::new(f))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    fit_rows(&rows, sp, priors)
}
