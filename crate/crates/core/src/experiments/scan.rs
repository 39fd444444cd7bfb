//! Growth exponent scans over a time grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::experiments::fit::{ExponentFit, FitPoint};
use crate::experiments::with_workers;
use crate::generator::generate_grid;
use crate::stats::{full_report, CliqueOptions, StatsOptions, StatsReport};
use crate::step_function::EdgeStepFunction;
use crate::streams::{self, Purpose};
use crate::Result;

/// Snapshot statistics whose growth exponents a scan can fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatistic {
    VertexCount,
    MaxDegree,
    SimpleEdges,
    Triangles,
    Cherries,
    GlobalClustering,
    CliqueSize,
}

impl ScanStatistic {
    pub fn label(self) -> &'static str {
        match self {
            ScanStatistic::VertexCount => "vertex_count",
            ScanStatistic::MaxDegree => "max_degree",
            ScanStatistic::SimpleEdges => "simple_edges",
            ScanStatistic::Triangles => "triangles",
            ScanStatistic::Cherries => "cherries",
            ScanStatistic::GlobalClustering => "global_clustering",
            ScanStatistic::CliqueSize => "clique_size",
        }
    }

    /// Value entering the log-log fit, if defined and positive for this
    /// snapshot.
    fn extract(self, report: &StatsReport) -> Option<f64> {
        let value = match self {
            ScanStatistic::VertexCount => report.vertex_count as f64,
            ScanStatistic::MaxDegree => report.max_degree as f64,
            ScanStatistic::SimpleEdges => report.simple_edge_count as f64,
            ScanStatistic::Triangles => report.triangles? as f64,
            ScanStatistic::Cherries => report.cherries? as f64,
            ScanStatistic::GlobalClustering => report.global_clustering?,
            ScanStatistic::CliqueSize => report.clique.as_ref()?.size as f64,
        };
        (value > 0.0 && value.is_finite()).then_some(value)
    }
}

/// Shared setup of one scan run.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub f: EdgeStepFunction,
    /// Snapshot times, strictly increasing, at least three of them.
    pub grid: Vec<u64>,
    pub replicas: u64,
    pub seed: u64,
    /// Decay index used for the clique prefix rule at each snapshot.
    pub clique_decay_index: f64,
    pub clique_budget: u64,
    /// Worker threads; zero means the global pool.
    pub workers: usize,
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.grid.len() < 3 {
            return Err(Error::config(format!(
                "scan grid needs at least 3 points, got {}",
                self.grid.len()
            )));
        }
        if self.replicas == 0 {
            return Err(Error::config("scan needs at least one replica".to_string()));
        }
        Ok(())
    }
}

/// Fits growth exponents for several statistics out of one set of
/// trajectories: every replica is generated once and snapshotted at each
/// grid time. Per grid point the fit sees the mean of `ln(value)` over the
/// replicas where the statistic was positive; grid points with no such
/// replica are dropped, and the fit fails if fewer than three remain.
pub fn multi_exponent_scan(
    config: &ScanConfig,
    statistics: &[ScanStatistic],
) -> Result<Vec<(ScanStatistic, ExponentFit)>> {
    config.validate()?;
    if statistics.is_empty() {
        return Err(Error::config("scan needs at least one statistic".to_string()));
    }
    let needs_census = statistics.iter().any(|s| {
        matches!(
            s,
            ScanStatistic::Triangles | ScanStatistic::Cherries | ScanStatistic::GlobalClustering
        )
    });
    let needs_clique = statistics.contains(&ScanStatistic::CliqueSize);

    // [replica][grid][statistic]
    let samples: Vec<Vec<Vec<Option<f64>>>> = with_workers(config.workers, || {
        (0..config.replicas)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(config.seed, Purpose::Exponent, replica);
                let snapshots = generate_grid(&config.f, &config.grid, &mut rng)?;
                snapshots
                    .iter()
                    .map(|g| {
                        let options = StatsOptions {
                            triangle_census: needs_census,
                            clique: needs_clique.then(|| CliqueOptions {
                                budget: config.clique_budget,
                                ..CliqueOptions::scaled(config.clique_decay_index, g.time())
                            }),
                            diameter: None,
                            neighbor_vertices: Vec::new(),
                        };
                        let report = full_report(g, &options)?;
                        Ok(statistics.iter().map(|s| s.extract(&report)).collect())
                    })
                    .collect()
            })
            .collect::<Result<_>>()
    })??;

    statistics
        .iter()
        .enumerate()
        .map(|(stat_index, &stat)| {
            let points: Vec<FitPoint> = config
                .grid
                .iter()
                .enumerate()
                .filter_map(|(grid_index, &t)| {
                    let logs: Vec<f64> = samples
                        .iter()
                        .filter_map(|replica| replica[grid_index][stat_index])
                        .map(f64::ln)
                        .collect();
                    if logs.is_empty() {
                        return None;
                    }
                    let n = logs.len() as f64;
                    let mean = logs.iter().sum::<f64>() / n;
                    let var = logs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    Some(FitPoint {
                        t,
                        log_t: (t as f64).ln(),
                        mean_log_value: mean,
                        sd_log_value: var.sqrt(),
                        samples: logs.len() as u64,
                    })
                })
                .collect();
            let fit = ExponentFit::from_points(points).map_err(|e| {
                Error::config(format!("statistic {}: {e}", stat.label()))
            })?;
            Ok((stat, fit))
        })
        .collect()
}

/// Single-statistic convenience wrapper around [`multi_exponent_scan`].
pub fn exponent_scan(config: &ScanConfig, statistic: ScanStatistic) -> Result<ExponentFit> {
    let mut fits = multi_exponent_scan(config, &[statistic])?;
    Ok(fits.remove(0).1)
}

/// Joint check that the clustering decay exponent cancels the clique growth
/// exponent: their sum should sit near zero.
#[derive(Debug, Clone, Serialize)]
pub struct InverseRelationReport {
    pub clustering: ExponentFit,
    pub clique: ExponentFit,
    pub slope_sum: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Runs one scan for clustering and clique size and reports whether the
/// two slopes cancel within `tolerance`.
pub fn inverse_relation_check(config: &ScanConfig, tolerance: f64) -> Result<InverseRelationReport> {
    let fits =
        multi_exponent_scan(config, &[ScanStatistic::GlobalClustering, ScanStatistic::CliqueSize])?;
    let clustering = fits[0].1.clone();
    let clique = fits[1].1.clone();
    let slope_sum = clustering.slope + clique.slope;
    Ok(InverseRelationReport {
        clustering,
        clique,
        slope_sum,
        tolerance,
        pass: slope_sum.abs() <= tolerance,
    })
}
