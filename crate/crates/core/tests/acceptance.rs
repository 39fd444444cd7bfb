//! Acceptance suite: one test per release criterion. Every test prints a
//! `criterion NN: PASS`/`FAIL` line before asserting, so a run with
//!
//! ```text
//! cargo test --test acceptance -- --test-threads=1 --nocapture
//! ```
//!
//! reads as a checklist. All tolerances are pinned here, next to the checks
//! they gate.

mod common;

use std::sync::OnceLock;

use edgestep_core::coupling::DoublyLabeledTree;
use edgestep_core::experiments::{
    arrival_concentration, coupling_distribution_check, degree_envelope, monotone_suite,
    multi_exponent_scan, tv_check, vertex_count_concentration, CollapseVariant, ExponentFit,
    ScanConfig, ScanStatistic,
};
use edgestep_core::generator::generate;
use edgestep_core::stats::{
    cherries, clique_lower_bound, diameter, triangles, DiameterMode, global_clustering,
};
use edgestep_core::step_function::{EdgeStepFunction, TableTail};
use edgestep_core::streams::{rng, Purpose};
use edgestep_core::MultiGraph;

const SEED: u64 = 0xC0FFEE;

fn conclude(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion:02}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn presets() -> Vec<EdgeStepFunction> {
    vec![
        EdgeStepFunction::constant(1.0).unwrap(),
        EdgeStepFunction::constant(0.3).unwrap(),
        EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap(),
        EdgeStepFunction::power_law(0.4, 0.8, 0.0).unwrap(),
        EdgeStepFunction::power_law(0.0, 1.0, -1.0).unwrap(),
        EdgeStepFunction::table(vec![1.0, 0.25, 0.75], TableTail::Hold).unwrap(),
    ]
}

#[test]
fn criterion_01_exact_invariants() {
    let mut graphs: Vec<MultiGraph> = Vec::new();
    for (i, f) in presets().iter().enumerate() {
        for (j, &t) in [1u64, 2, 17, 500, 2500].iter().enumerate() {
            for replica in 0..2u64 {
                let mut r =
                    rng(SEED, Purpose::Generate, (i as u64) * 100 + (j as u64) * 10 + replica);
                graphs.push(generate(f, t, &mut r, &[]).unwrap().0);
            }
        }
    }
    for &t in &[1u64, 2, 17, 500] {
        for replica in 0..2 {
            let mut r = rng(SEED, Purpose::Tree, t * 10 + replica);
            let tree = DoublyLabeledTree::grow(t, &mut r).unwrap();
            for f in &presets() {
                graphs.push(tree.collapse(f).graph);
            }
        }
    }

    let total = graphs.len();
    for g in &graphs {
        g.self_check().unwrap();
        let t = g.time();
        assert_eq!(g.edge_count(), t, "edge count must equal the time");
        assert_eq!(g.total_degree(), 2 * t, "total degree must be twice the time");

        let simple = g.simplify();
        let again = MultiGraph::from_edges(simple.vertex_count(), &simple.edge_pairs())
            .unwrap()
            .simplify();
        assert_eq!(again, simple, "simplification must be idempotent");

        let tri = triangles(&simple);
        assert!(
            tri as f64 <= (simple.edge_count() as f64).powf(1.5) + 1e-9,
            "triangles {tri} above the edge-count ceiling"
        );

        let from_neighbor_counts: u64 = (0..g.vertex_count())
            .map(|v| {
                let d = common::oracle_distinct_neighbors(g.edges(), v);
                d * d.saturating_sub(1) / 2
            })
            .sum();
        assert_eq!(cherries(&simple), from_neighbor_counts, "cherry identity");
    }
    conclude(1, true, &format!("{total} graphs, all invariants exact"));
}

#[test]
fn criterion_02_oracle_equivalence() {
    let mut r = rng(SEED, Purpose::Generate, 999);
    let functions = presets();
    let mut clique_checks = 0u32;
    for instance in 0..200u32 {
        use rand::Rng;
        let g = if instance % 2 == 0 {
            let f = &functions[(instance as usize / 2) % functions.len()];
            let t = r.random_range(2..=40);
            generate(f, t, &mut r, &[]).unwrap().0
        } else {
            let n = r.random_range(2..=40u32);
            let m = r.random_range(1..=70);
            let edges: Vec<(u32, u32)> =
                (0..m).map(|_| (r.random_range(0..n), r.random_range(0..n))).collect();
            MultiGraph::from_edges(n, &edges).unwrap()
        };
        let simple = g.simplify();

        assert_eq!(triangles(&simple), common::oracle_triangles(&simple));
        assert_eq!(cherries(&simple), common::oracle_cherries(&simple));
        let clustering = global_clustering(&simple);
        match common::oracle_cherries(&simple) {
            0 => assert_eq!(clustering, None),
            paths => assert_eq!(
                clustering,
                Some(3.0 * common::oracle_triangles(&simple) as f64 / paths as f64)
            ),
        }

        for a in 0..g.vertex_count() {
            for b in a..g.vertex_count() {
                assert_eq!(g.multiplicity(a, b), common::oracle_multiplicity(g.edges(), a, b));
            }
        }
        for v in 0..g.vertex_count() {
            assert_eq!(
                simple.neighbor_count(v),
                common::oracle_distinct_neighbors(g.edges(), v)
            );
        }

        match common::oracle_diameter(&simple) {
            Some(d) => {
                assert_eq!(diameter(&simple, DiameterMode::Exact).unwrap().value, d)
            }
            None => assert!(diameter(&simple, DiameterMode::Exact).is_err()),
        }

        if simple.vertex_count() <= 30 {
            let bound = clique_lower_bound(&simple, simple.vertex_count(), 1 << 30);
            assert!(bound.exact);
            assert_eq!(bound.size, common::oracle_max_clique(&simple));
            clique_checks += 1;
        }
    }
    conclude(2, true, &format!("200 instances, {clique_checks} with clique oracles"));
}

#[test]
fn criterion_03_coupling_distribution() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let good =
        coupling_distribution_check(&f, 50, 20_000, SEED, 1e-3, CollapseVariant::Standard, 0)
            .unwrap();
    let bad =
        coupling_distribution_check(&f, 50, 20_000, SEED, 1e-3, CollapseVariant::SingleStep, 0)
            .unwrap();
    let ok = good.pass && !bad.pass;
    conclude(
        3,
        ok,
        &format!(
            "collapse p = {:.3}/{:.3}, broken-collapse control p = {:.2e}/{:.2e}",
            good.vertex_count.p_value,
            good.initial_degree.p_value,
            bad.vertex_count.p_value,
            bad.initial_degree.p_value
        ),
    );
}

#[test]
fn criterion_04_total_variation_bound() {
    // Constant one half, nudged up by 0.01 on steps 2..=21: the rate gap
    // sums to 0.2 and the exact differ probability is 1 - 0.99^20.
    let f = EdgeStepFunction::constant(0.5).unwrap();
    let mut values = vec![0.5; 22];
    for v in values.iter_mut().take(21).skip(1) {
        *v = 0.51;
    }
    let h = EdgeStepFunction::table(values, TableTail::Hold).unwrap();

    let report = tv_check(&f, &h, 100, 10_000, SEED, 0).unwrap();
    assert!((report.l1_distance - 0.2).abs() < 1e-12);
    let product = 1.0 - 0.99f64.powi(20);
    assert!((report.exact_differ_probability - product).abs() < 1e-12);
    let ok = report.bound_ok && report.exact_ok;
    conclude(
        4,
        ok,
        &format!(
            "differ fraction {:.4} vs bound {:.2} and product {:.4} (3 sigma = {:.4})",
            report.differ_fraction,
            report.bound,
            report.exact_differ_probability,
            3.0 * report.sigma
        ),
    );
}

#[test]
fn criterion_05_monotone_statistics() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let h = EdgeStepFunction::constant(0.9).unwrap();
    let report = monotone_suite(&f, &h, 2000, 500, SEED, 0).unwrap();
    conclude(
        5,
        report.pass,
        &format!(
            "500 coupled replicas; violations: vertex count {}, max degree {}, diameter {}",
            report.vertex_count_violations,
            report.max_degree_violations,
            report.diameter_violations
        ),
    );
}

#[test]
fn criterion_06_vertex_count_band() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let report = vertex_count_concentration(&f, 100_000, 200, SEED, 0).unwrap();
    let ok = report.hits == report.replicas;
    conclude(
        6,
        ok,
        &format!(
            "{}/{} in [{:.0}, {:.0}], observed range [{}, {}]",
            report.hits, report.replicas, report.lower, report.upper, report.min_count,
            report.max_count
        ),
    );
}

#[test]
fn criterion_07_arrival_band() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let narrow = arrival_concentration(&f, 500, 0.10, 300, SEED, 20.0, 0).unwrap();
    let band = arrival_concentration(&f, 500, 0.25, 300, SEED, 20.0, 0).unwrap();
    let wide = arrival_concentration(&f, 500, 0.50, 300, SEED, 20.0, 0).unwrap();
    let ok = band.hit_fraction >= 0.95
        && narrow.hits <= band.hits
        && band.hits <= wide.hits
        && band.capped == 0;
    conclude(
        7,
        ok,
        &format!(
            "hit fraction {:.3} at delta 0.25 (predicted step {}); nested bands {} <= {} <= {}",
            band.hit_fraction, band.predicted_step, narrow.hits, band.hits, wide.hits
        ),
    );
}

#[test]
fn criterion_08_degree_envelope() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let report = degree_envelope(&f, 100, &[2.0, 5.0, 10.0, 25.0], 100_000, 300, SEED, 0).unwrap();
    let nonincreasing =
        report.rows.windows(2).all(|w| w[0].exceedances >= w[1].exceedances);
    let tail = report.rows.last().unwrap();
    let ok = nonincreasing && tail.fraction <= 0.05 && report.never_born == 0;
    let fractions: Vec<String> =
        report.rows.iter().map(|r| format!("{:.3}@{}", r.fraction, r.alpha)).collect();
    conclude(8, ok, &format!("exceedance fractions {}", fractions.join(", ")));
}

fn scan_config(f: EdgeStepFunction, clique_decay_index: f64) -> ScanConfig {
    ScanConfig {
        f,
        grid: (12..=17).map(|k| 1u64 << k).collect(),
        replicas: 20,
        seed: SEED,
        clique_decay_index,
        clique_budget: 2_000_000,
        workers: 0,
    }
}

/// The decay 0.4 scan feeds both the exponent bands and the inverse
/// relation, so it runs once and is shared.
fn decay_04_fits() -> &'static [(ScanStatistic, ExponentFit)] {
    static FITS: OnceLock<Vec<(ScanStatistic, ExponentFit)>> = OnceLock::new();
    FITS.get_or_init(|| {
        let config = scan_config(EdgeStepFunction::power_law(0.4, 1.0, 0.0).unwrap(), 0.4);
        multi_exponent_scan(
            &config,
            &[
                ScanStatistic::CliqueSize,
                ScanStatistic::GlobalClustering,
                ScanStatistic::Triangles,
                ScanStatistic::Cherries,
            ],
        )
        .unwrap()
    })
}

fn slope(fits: &[(ScanStatistic, ExponentFit)], statistic: ScanStatistic) -> f64 {
    fits.iter().find(|(s, _)| *s == statistic).expect("statistic was scanned").1.slope
}

#[test]
fn criterion_09_scaling_exponents() {
    // Slowly varying rate, f(s) = 1 / ln(e + s). Among rates with decay
    // index zero this one gets closest to its asymptotic bands on the
    // grid below; stronger log powers drag every other slope down before
    // the clique improves, and milder ones keep f near 1 so the graph
    // stays tree-like for most of the run.
    let slow_config = scan_config(EdgeStepFunction::power_law(0.0, 1.0, -1.0).unwrap(), 0.0);
    let slow = multi_exponent_scan(
        &slow_config,
        &[ScanStatistic::CliqueSize, ScanStatistic::GlobalClustering, ScanStatistic::SimpleEdges],
    )
    .unwrap();

    // Decay index 0.4, shared with the inverse relation check.
    let mid = decay_04_fits();

    // Constant rate: linear vertex growth and the dense-community clique.
    let const_config = scan_config(EdgeStepFunction::constant(0.5).unwrap(), 1.0 / 3.0);
    let constant =
        multi_exponent_scan(&const_config, &[ScanStatistic::VertexCount, ScanStatistic::CliqueSize])
            .unwrap();

    // Decay index 0.5: sublinear vertex growth plus the census counts.
    let half_config = scan_config(EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap(), 0.5);
    let half = multi_exponent_scan(
        &half_config,
        &[ScanStatistic::VertexCount, ScanStatistic::Triangles, ScanStatistic::Cherries],
    )
    .unwrap();

    // Simple edge counts converge from above: while most edges are still
    // distinct the count grows linearly, and the t^{1 - gamma} regime only
    // shows once multi-edges are common. A prefactor of 1/8 on the rate
    // pulls that crossover inside the grid.
    let edges04_config = scan_config(EdgeStepFunction::power_law(0.4, 0.125, 0.0).unwrap(), 0.4);
    let edges04 = multi_exponent_scan(&edges04_config, &[ScanStatistic::SimpleEdges]).unwrap();
    let edges05_config = scan_config(EdgeStepFunction::power_law(0.5, 0.125, 0.0).unwrap(), 0.5);
    let edges05 = multi_exponent_scan(&edges05_config, &[ScanStatistic::SimpleEdges]).unwrap();

    // Two clique bands hold their asymptotic targets even though those
    // targets are out of reach at these horizons. The search itself is not
    // the bottleneck (it certifies the exact prefix maximum); the clique
    // simply assembles too slowly. For the slowly varying rate the slope
    // peaks near 0.32 across the whole decay-zero family, because the
    // community construction loses a logarithmic factor that still costs
    // about 2 / ln t here, and for the constant rate it lands near 0.20
    // against a floor of 0.21. Both values are deterministic for the
    // pinned seed. A FAIL naming exactly those two bands is the known
    // state; anything else is a regression.
    let bands: Vec<(&str, f64, f64, f64)> = vec![
        ("vertex_count, constant 0.5", slope(&constant, ScanStatistic::VertexCount), 1.0, 0.05),
        ("vertex_count, decay 0.5", slope(&half, ScanStatistic::VertexCount), 0.5, 0.05),
        ("clique, slowly varying", slope(&slow, ScanStatistic::CliqueSize), 0.5, 0.12),
        ("clique, decay 0.4", slope(mid, ScanStatistic::CliqueSize), 0.3, 0.12),
        ("clique, constant 0.5", slope(&constant, ScanStatistic::CliqueSize), 1.0 / 3.0, 0.12),
        ("clustering, slowly varying", slope(&slow, ScanStatistic::GlobalClustering), -0.5, 0.15),
        ("clustering, decay 0.4", slope(mid, ScanStatistic::GlobalClustering), -0.3, 0.15),
        ("triangles, decay 0.4", slope(mid, ScanStatistic::Triangles), 0.9, 0.2),
        ("triangles, decay 0.5", slope(&half, ScanStatistic::Triangles), 0.75, 0.2),
        ("cherries, decay 0.4", slope(mid, ScanStatistic::Cherries), 1.2, 0.2),
        ("cherries, decay 0.5", slope(&half, ScanStatistic::Cherries), 1.0, 0.2),
        ("simple_edges, slowly varying", slope(&slow, ScanStatistic::SimpleEdges), 1.0, 0.1),
        ("simple_edges, decay 0.4", slope(&edges04, ScanStatistic::SimpleEdges), 0.6, 0.1),
        ("simple_edges, decay 0.5", slope(&edges05, ScanStatistic::SimpleEdges), 0.5, 0.1),
    ];

    let mut ok = true;
    let mut misses = Vec::new();
    for (name, slope, target, tolerance) in &bands {
        let hit = (slope - target).abs() <= *tolerance;
        println!("  slope {name}: {slope:.3} vs {target:.3} +- {tolerance}");
        if !hit {
            ok = false;
            misses.push(format!("{name} at {slope:.3}"));
        }
    }
    let detail = if ok {
        format!("{} slope bands hit", bands.len())
    } else {
        format!("missed: {}", misses.join("; "))
    };
    conclude(9, ok, &detail);
}

#[test]
fn criterion_10_inverse_relation() {
    let fits = decay_04_fits();
    let clustering = slope(fits, ScanStatistic::GlobalClustering);
    let clique = slope(fits, ScanStatistic::CliqueSize);
    let sum = clustering + clique;
    let ok = sum.abs() <= 0.15;
    conclude(
        10,
        ok,
        &format!("clustering {clustering:.3} + clique {clique:.3} = {sum:.3}, band 0 +- 0.15"),
    );
}

#[test]
fn criterion_11_diameter_bound() {
    let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
    let t = 1u64 << 16;
    let ceiling = 8 * 16;
    let mut worst = 0;
    for replica in 100..110u64 {
        let mut r = rng(SEED, Purpose::Generate, replica);
        let (g, _) = generate(&f, t, &mut r, &[]).unwrap();
        let d = diameter(&g.simplify(), DiameterMode::DoubleSweep).unwrap().value;
        worst = worst.max(d);
    }
    let ok = worst <= ceiling;
    conclude(11, ok, &format!("worst double-sweep diameter {worst} vs ceiling {ceiling}"));
}
