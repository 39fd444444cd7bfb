//! Concentration experiments: vertex counts, arrival times, and degree
//! envelopes across replicas.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::experiments::with_workers;
use crate::generator::{arrival_time, generate, vertex_count_at};
use crate::step_function::{AnalyticProfile, EdgeStepFunction, DEFAULT_EXTENSION_CAP};
use crate::streams::{self, Purpose};
use crate::Result;

/// Vertex counts against the band `[expected / 2, 3 * expected / 2]`.
#[derive(Debug, Clone, Serialize)]
pub struct VertexBandReport {
    pub t: u64,
    pub expected: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicas: u64,
    pub hits: u64,
    pub hit_fraction: f64,
    pub min_count: u64,
    pub max_count: u64,
}

/// Simulates only the vertex-step coins of each replica and counts how many
/// final vertex counts land in the expectation band.
pub fn vertex_count_concentration(
    f: &EdgeStepFunction,
    t: u64,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<VertexBandReport> {
    if replicas == 0 {
        return Err(Error::config("need at least one replica".to_string()));
    }
    let profile = AnalyticProfile::new(f.clone(), t);
    let expected = profile.expected_vertex_count(t);
    let (lower, upper) = (expected / 2.0, 1.5 * expected);
    let counts: Vec<u64> = with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::VertexCount, replica);
                vertex_count_at(f, t, &mut rng)
            })
            .collect::<Result<_>>()
    })??;
    let hits = counts.iter().filter(|&&c| (c as f64) >= lower && (c as f64) <= upper).count() as u64;
    Ok(VertexBandReport {
        t,
        expected,
        lower,
        upper,
        replicas,
        hits,
        hit_fraction: hits as f64 / replicas as f64,
        min_count: counts.iter().copied().min().unwrap_or(0),
        max_count: counts.iter().copied().max().unwrap_or(0),
    })
}

/// Default multiple of the predicted arrival step after which a replica is
/// abandoned as a miss.
pub const DEFAULT_ARRIVAL_HORIZON_FACTOR: f64 = 20.0;

/// Arrival steps of one vertex rank against `(1 +- delta)` times the
/// predicted step.
#[derive(Debug, Clone, Serialize)]
pub struct ArrivalBandReport {
    pub rank: u64,
    pub delta: f64,
    /// Predicted arrival step: smallest t with expected arrivals >= rank.
    pub predicted_step: u64,
    pub lower: f64,
    pub upper: f64,
    pub replicas: u64,
    pub hits: u64,
    pub hit_fraction: f64,
    /// Replicas whose walk hit the horizon before the rank arrived.
    pub capped: u64,
}

/// Simulates only the arrival coins of each replica and checks the arrival
/// step of `rank` against the relative band. Walks are cut off at
/// `horizon_factor` times the predicted step; capped replicas count as
/// misses.
pub fn arrival_concentration(
    f: &EdgeStepFunction,
    rank: u64,
    delta: f64,
    replicas: u64,
    seed: u64,
    horizon_factor: f64,
    workers: usize,
) -> Result<ArrivalBandReport> {
    if replicas == 0 {
        return Err(Error::config("need at least one replica".to_string()));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::domain(format!("band width delta = {delta} must be positive")));
    }
    if horizon_factor < 1.0 || !horizon_factor.is_finite() {
        return Err(Error::domain(format!("horizon factor {horizon_factor} must be at least 1")));
    }
    let profile =
        AnalyticProfile::with_cumulative_at_least(f.clone(), rank as f64, DEFAULT_EXTENSION_CAP)?;
    let predicted = profile.inverse_cumulative(rank as f64)?;
    let lower = (1.0 - delta) * predicted as f64;
    let upper = (1.0 + delta) * predicted as f64;
    let horizon = (horizon_factor * predicted as f64).ceil() as u64;
    let arrivals: Vec<Option<u64>> = with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::Arrival, replica);
                arrival_time(f, rank, horizon, &mut rng)
            })
            .collect::<Result<_>>()
    })??;
    let capped = arrivals.iter().filter(|a| a.is_none()).count() as u64;
    let hits = arrivals
        .iter()
        .flatten()
        .filter(|&&step| (step as f64) >= lower && (step as f64) <= upper)
        .count() as u64;
    Ok(ArrivalBandReport {
        rank,
        delta,
        predicted_step: predicted,
        lower,
        upper,
        replicas,
        hits,
        hit_fraction: hits as f64 / replicas as f64,
        capped,
    })
}

/// Exceedance counts of one envelope multiple.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeRow {
    pub alpha: f64,
    pub exceedances: u64,
    pub fraction: f64,
}

/// Degree envelope experiment for one vertex rank.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub rank: u64,
    pub t: u64,
    /// Scale predicted for this rank at its arrival, the envelope
    /// denominator's starting point.
    pub rank_scale: f64,
    pub replicas: u64,
    /// Replicas in which the rank never arrived by time t.
    pub never_born: u64,
    pub rows: Vec<EnvelopeRow>,
}

/// Tracks the degree of the vertex of rank `rank` through each replica and
/// records, per threshold `alpha`, how often the normalized degree
/// `deg * rank_scale / degree_scale(step)` exceeds `alpha` at any point.
/// The normalized degree peaks at degree change events, so only those are
/// inspected. Replicas where the rank never arrives count as non-exceeding.
pub fn degree_envelope(
    f: &EdgeStepFunction,
    rank: u64,
    alphas: &[f64],
    t: u64,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<EnvelopeReport> {
    if replicas == 0 {
        return Err(Error::config("need at least one replica".to_string()));
    }
    if alphas.is_empty() || alphas.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
        return Err(Error::domain("envelope thresholds must be positive".to_string()));
    }
    let profile = AnalyticProfile::new(f.clone(), t);
    if profile.expected_vertex_count(t) < rank as f64 {
        return Err(Error::config(format!(
            "rank {rank} is above the expected vertex count {:.1} at time {t}",
            profile.expected_vertex_count(t)
        )));
    }
    let rank_scale = profile.rank_growth(rank)?;
    let suprema: Vec<Option<f64>> = with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::Envelope, replica);
                let (_, trajectory) = generate(f, t, &mut rng, &[rank])?;
                let tracked = &trajectory.tracked[0];
                let sup = tracked
                    .events
                    .iter()
                    .map(|e| e.degree as f64 * rank_scale / profile.degree_growth(e.step))
                    .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a: f64| a.max(r))));
                Ok(sup)
            })
            .collect::<Result<_>>()
    })??;
    let never_born = suprema.iter().filter(|s| s.is_none()).count() as u64;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let exceedances =
                suprema.iter().flatten().filter(|&&sup| sup > alpha).count() as u64;
            EnvelopeRow { alpha, exceedances, fraction: exceedances as f64 / replicas as f64 }
        })
        .collect();
    Ok(EnvelopeReport { rank, t, rank_scale, replicas, never_born, rows })
}
