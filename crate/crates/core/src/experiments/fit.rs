//! Log-log regression and two-sample histogram comparison.

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// One grid point of a scan: mean and spread of `ln(statistic)` across the
/// replicas in which the statistic was positive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitPoint {
    pub t: u64,
    pub log_t: f64,
    pub mean_log_value: f64,
    pub sd_log_value: f64,
    /// Replicas that contributed (positive, finite values only).
    pub samples: u64,
}

/// Least-squares line through `(log_t, mean_log_value)`; the slope is the
/// empirical growth exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub points: Vec<FitPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub std_err: f64,
    pub r_squared: f64,
}

impl ExponentFit {
    pub fn from_points(points: Vec<FitPoint>) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(Error::config(format!(
                "exponent fit needs at least 3 grid points, got {n}"
            )));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.log_t).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean_log_value).collect();
        let mean_x = xs.iter().sum::<f64>() / n as f64;
        let mean_y = ys.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::config("exponent fit grid points coincide".to_string()));
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
        let slope = sxy / sxx;
        let intercept = mean_y - slope * mean_x;
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
            .sum();
        let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
        let std_err = (ss_res / (n as f64 - 2.0) / sxx).sqrt();
        let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
        Ok(ExponentFit { points, slope, intercept, std_err, r_squared })
    }
}

/// Two-sample chi-square comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    pub bins: usize,
}

/// Pearson chi-square test that two integer samples come from the same
/// distribution. Values are pooled and adjacent values merged until every
/// bin holds at least `min_pooled` pooled observations, then both samples
/// are compared against the pooled proportions.
pub fn two_sample_chi_square(a: &[u64], b: &[u64], min_pooled: u64) -> Result<ChiSquareReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::config("chi-square needs nonempty samples".to_string()));
    }
    let mut counts = std::collections::BTreeMap::<u64, (u64, u64)>::new();
    for &v in a {
        counts.entry(v).or_default().0 += 1;
    }
    for &v in b {
        counts.entry(v).or_default().1 += 1;
    }
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut open = (0u64, 0u64);
    for (_, (ca, cb)) in counts {
        open.0 += ca;
        open.1 += cb;
        if open.0 + open.1 >= min_pooled {
            bins.push(open);
            open = (0, 0);
        }
    }
    if open.0 + open.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += open.0;
                last.1 += open.1;
            }
            None => bins.push(open),
        }
    }
    if bins.len() < 2 {
        return Err(Error::config(
            "chi-square samples are too concentrated to form two bins".to_string(),
        ));
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let total = na + nb;
    let mut statistic = 0.0;
    for &(ca, cb) in &bins {
        let pooled = (ca + cb) as f64 / total;
        let ea = na * pooled;
        let eb = nb * pooled;
        statistic += (ca as f64 - ea).powi(2) / ea + (cb as f64 - eb).powi(2) / eb;
    }
    let dof = (bins.len() - 1) as u64;
    let p_value = chi_square_survival(dof as f64, statistic);
    Ok(ChiSquareReport { statistic, dof, p_value, bins: bins.len() })
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
fn chi_square_survival(dof: f64, statistic: f64) -> f64 {
    // The regularized gamma routine rejects x = 0, which happens when the
    // samples agree bin for bin.
    if statistic <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(dof / 2.0, statistic / 2.0)
}
