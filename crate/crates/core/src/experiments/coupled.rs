//! Experiments that run several rates over shared trees: total variation
//! bounds, monotone comparisons, and a distributional equivalence check of
//! the collapse against direct generation.

use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::DoublyLabeledTree;
use crate::error::Error;
use crate::experiments::fit::{two_sample_chi_square, ChiSquareReport};
use crate::experiments::with_workers;
use crate::generator::generate;
use crate::stats::{diameter, DiameterMode};
use crate::step_function::{EdgeStepFunction, KahanSum};
use crate::streams::{self, Purpose};
use crate::Result;

/// Shared-tree trajectory comparison of two rates.
#[derive(Debug, Clone, Serialize)]
pub struct TvReport {
    pub t: u64,
    /// Sum of |f - h| over the first t steps.
    pub l1_distance: f64,
    /// min(1, l1): the analytic ceiling on the differ probability.
    pub bound: f64,
    /// Exact coupling differ probability: 1 - prod (1 - |f - h|(s)).
    pub exact_differ_probability: f64,
    pub replicas: u64,
    pub differing: u64,
    pub differ_fraction: f64,
    /// Binomial standard error at the exact differ probability.
    pub sigma: f64,
    /// Fraction stays below bound + 3 sigma.
    pub bound_ok: bool,
    /// Fraction matches the exact probability within 3 sigma.
    pub exact_ok: bool,
}

/// Grows shared trees and counts how often the collapses under `f` and `h`
/// produce different trajectories. The observed fraction is compared both
/// against the L1 upper bound and against the exact product formula.
pub fn tv_check(
    f: &EdgeStepFunction,
    h: &EdgeStepFunction,
    t: u64,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<TvReport> {
    if t == 0 || replicas == 0 {
        return Err(Error::config("tv check needs t >= 1 and replicas >= 1".to_string()));
    }
    let l1_distance = f.l1_distance(h, t);
    // A trajectory survives both collapses identically unless some coin
    // falls between the two rates; the first coin is at step 2. A full-width
    // gap makes the difference certain (and would break the log sum).
    let mut certain = false;
    let mut log_keep = KahanSum::default();
    for s in 2..=t {
        let gap = (f.eval(s) - h.eval(s)).abs();
        if gap >= 1.0 {
            certain = true;
            break;
        }
        log_keep.add((-gap).ln_1p());
    }
    let exact = if certain { 1.0 } else { 1.0 - log_keep.value().exp() };
    let differing = with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .filter(|&replica| {
                let mut rng = streams::rng(seed, Purpose::TotalVariation, replica);
                let tree = DoublyLabeledTree::grow(t, &mut rng).expect("t was validated");
                !tree.trajectory_equal(f, h)
            })
            .count() as u64
    })?;
    let differ_fraction = differing as f64 / replicas as f64;
    let sigma = (exact * (1.0 - exact) / replicas as f64).sqrt();
    let bound = l1_distance.min(1.0);
    Ok(TvReport {
        t,
        l1_distance,
        bound,
        exact_differ_probability: exact,
        replicas,
        differing,
        differ_fraction,
        sigma,
        bound_ok: differ_fraction <= bound + 3.0 * sigma + 1e-12,
        exact_ok: (differ_fraction - exact).abs() <= 3.0 * sigma + 1e-12,
    })
}

/// Violation counts of the three per-sample monotone comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub t: u64,
    pub replicas: u64,
    /// Cases where the lower rate produced more vertices.
    pub vertex_count_violations: u64,
    /// Cases where the lower rate had a smaller maximum degree.
    pub max_degree_violations: u64,
    /// Cases where the lower rate had a larger (exact) diameter.
    pub diameter_violations: u64,
    /// Replica indices with at least one violation (first few), enough to
    /// regrow the offending trees from the same seed for replay.
    pub violating_replicas: Vec<u64>,
    pub pass: bool,
}

/// Collapses shared trees under a pointwise lower rate `f` and higher rate
/// `h` and verifies per replica that vertex counts and diameters do not
/// shrink, and maximum degrees do not grow, when moving from `f` to `h`.
/// Diameters are computed exactly.
///
/// The order `f <= h` is required from step 2 on, the first step whose coin
/// exists; the rates' values at step 1 never enter the process.
pub fn monotone_suite(
    f: &EdgeStepFunction,
    h: &EdgeStepFunction,
    t: u64,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<MonotoneReport> {
    if t == 0 || replicas == 0 {
        return Err(Error::config("monotone suite needs t >= 1 and replicas >= 1".to_string()));
    }
    for s in 2..=t {
        if f.eval(s) > h.eval(s) {
            return Err(Error::config(format!(
                "rates are not ordered: f({s}) = {} exceeds h({s}) = {}",
                f.eval(s),
                h.eval(s)
            )));
        }
    }
    let violations: Vec<(u64, u64, u64)> = with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::Monotone, replica);
                let tree = DoublyLabeledTree::grow(t, &mut rng)?;
                let low = tree.collapse(f);
                let high = tree.collapse(h);
                let vertices =
                    (low.graph.vertex_count() > high.graph.vertex_count()) as u64;
                let degrees = (low.graph.max_degree() < high.graph.max_degree()) as u64;
                let low_diam = diameter(&low.graph.simplify(), DiameterMode::Exact)?.value;
                let high_diam = diameter(&high.graph.simplify(), DiameterMode::Exact)?.value;
                let diameters = (low_diam > high_diam) as u64;
                Ok((vertices, degrees, diameters))
            })
            .collect::<Result<_>>()
    })??;
    let vertex_count_violations = violations.iter().map(|v| v.0).sum();
    let max_degree_violations = violations.iter().map(|v| v.1).sum();
    let diameter_violations = violations.iter().map(|v| v.2).sum();
    let violating_replicas: Vec<u64> = violations
        .iter()
        .enumerate()
        .filter(|(_, v)| v.0 + v.1 + v.2 > 0)
        .map(|(i, _)| i as u64)
        .take(16)
        .collect();
    Ok(MonotoneReport {
        t,
        replicas,
        vertex_count_violations,
        max_degree_violations,
        diameter_violations,
        violating_replicas,
        pass: vertex_count_violations + max_degree_violations + diameter_violations == 0,
    })
}

/// Which collapse the distribution check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseVariant {
    /// The real collapse.
    Standard,
    /// Deliberately broken variant that relabels each removed vertex to its
    /// ghost label without resolving label chains. Used as a negative
    /// control: the check must reject it.
    SingleStep,
}

/// Two-sample comparison of the collapse against direct generation.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionCheckReport {
    pub t: u64,
    pub samples: u64,
    pub variant: CollapseVariant,
    pub significance: f64,
    pub vertex_count: ChiSquareReport,
    pub initial_degree: ChiSquareReport,
    pub pass: bool,
}

/// Draws `samples` graphs directly and `samples` via tree collapse, then
/// chi-square-compares the distributions of the vertex count and of the
/// initial vertex's degree. Passing means both p-values clear
/// `significance`.
pub fn coupling_distribution_check(
    f: &EdgeStepFunction,
    t: u64,
    samples: u64,
    seed: u64,
    significance: f64,
    variant: CollapseVariant,
    workers: usize,
) -> Result<DistributionCheckReport> {
    if t == 0 || samples == 0 {
        return Err(Error::config("distribution check needs t >= 1 and samples >= 1".to_string()));
    }
    if !(0.0..1.0).contains(&significance) {
        return Err(Error::domain(format!("significance {significance} outside [0, 1)")));
    }
    let direct: Vec<(u64, u64)> = with_workers(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::DistributionDirect, replica);
                let (g, _) = generate(f, t, &mut rng, &[])?;
                Ok((g.vertex_count() as u64, g.degree(0)))
            })
            .collect::<Result<_>>()
    })??;
    let coupled: Vec<(u64, u64)> = with_workers(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|replica| {
                let mut rng = streams::rng(seed, Purpose::DistributionCoupled, replica);
                let tree = DoublyLabeledTree::grow(t, &mut rng).expect("t was validated");
                match variant {
                    CollapseVariant::Standard => {
                        let collapsed = tree.collapse(f);
                        (collapsed.graph.vertex_count() as u64, collapsed.graph.degree(0))
                    }
                    CollapseVariant::SingleStep => single_step_statistics(&tree, f),
                }
            })
            .collect()
    })?;
    let unzip = |pairs: &[(u64, u64)], pick: fn(&(u64, u64)) -> u64| -> Vec<u64> {
        pairs.iter().map(pick).collect()
    };
    let vertex_count = two_sample_chi_square(
        &unzip(&direct, |p| p.0),
        &unzip(&coupled, |p| p.0),
        10,
    )?;
    let initial_degree = two_sample_chi_square(
        &unzip(&direct, |p| p.1),
        &unzip(&coupled, |p| p.1),
        10,
    )?;
    let pass = vertex_count.p_value >= significance && initial_degree.p_value >= significance;
    Ok(DistributionCheckReport {
        t,
        samples,
        variant,
        significance,
        vertex_count,
        initial_degree,
        pass,
    })
}

/// The wrong one-hop relabeling: a removed vertex adopts its ghost label
/// even when that label was itself removed, so label chains never resolve.
/// Returns the distinct label count and the degree collected by label 0.
fn single_step_statistics(tree: &DoublyLabeledTree, f: &EdgeStepFunction) -> (u64, u64) {
    let n = tree.size() as usize;
    let mut label = vec![0u32; n];
    for j in 1..n as u32 {
        label[j as usize] = if tree.survives(j, f) { j } else { tree.ghost_label(j) };
    }
    let mut seen = vec![false; n];
    for &l in &label {
        seen[l as usize] = true;
    }
    let distinct = seen.iter().filter(|&&s| s).count() as u64;
    // The initial loop contributes 2; each later edge (j, target) adds one
    // per endpoint whose label is 0.
    let mut degree = 2u64;
    for j in 1..n as u32 {
        degree += (label[j as usize] == 0) as u64;
        degree += (label[tree.edge_target(j) as usize] == 0) as u64;
    }
    (distinct, degree)
}
