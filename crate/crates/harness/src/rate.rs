//! Log-log rate fits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{read_json, summary_path, RunMetadata, RunSummary, METADATA_FILE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Least-squares slope of `log error` against `log K`.
    pub slope: f64,
    pub intercept: f64,
    /// `(K, error)` pairs the fit used.
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if let Some(&(k, e)) = points
        .iter()
        .find(|&&(k, e)| !(k > 0.0 && e > 0.0 && k.is_finite() && e.is_finite()))
    {
        return Err(HarnessError::Config(format!(
            "rate fit needs positive iteration counts and errors, got ({k}, {e})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(k, e)| (k.ln(), e.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(HarnessError::Config(
            "rate fit needs at least two distinct iteration counts".into(),
        ));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        points: points.to_vec(),
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median objective gap per iteration budget.
pub fn median_gaps(summaries: &[RunSummary]) -> Result<Vec<(f64, f64)>> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in summaries {
        let gap = s.objective_gap.ok_or_else(|| {
            HarnessError::Config(format!(
                "summary for seed {} has no objective gap (family without a known optimum)",
                s.seed
            ))
        })?;
        groups.entry(s.iterations).or_default().push(gap);
    }
    Ok(groups
        .into_iter()
        .map(|(k, mut g)| (k as f64, median(&mut g)))
        .collect())
}

/// Reads every run directory's summaries and fits the median-gap rate.
pub fn rate_from_dirs(dirs: &[impl AsRef<Path>]) -> Result<RateFit> {
    let mut summaries = Vec::new();
    for dir in dirs {
        let dir = dir.as_ref();
        let meta: RunMetadata = read_json(&dir.join(METADATA_FILE))?;
        for seed in meta.seeds {
            summaries.push(read_json::<RunSummary>(&summary_path(dir, seed))?);
        }
    }
    fit_rate(&median_gaps(&summaries)?)
}
