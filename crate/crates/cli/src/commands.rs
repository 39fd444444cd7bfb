//! Implementations of the subcommands.
//!
//! Every command that writes files also writes a run manifest next to them;
//! tolerance checks come last, after all reports are safely on disk.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::Context;
use serde_json::json;

use edgestep_core::coupling::DoublyLabeledTree;
use edgestep_core::experiments::{self, CollapseVariant, ScanConfig, ScanStatistic};
use edgestep_core::generator;
use edgestep_core::stats::{full_report, CliqueOptions, DiameterMode, StatsOptions};
use edgestep_core::step_function::{AnalyticProfile, EdgeStepFunction, DEFAULT_EXTENSION_CAP};
use edgestep_core::streams::{rng, Purpose};
use edgestep_core::MultiGraph;

use crate::output::ManifestBuilder;
use crate::{
    CoupleArgs, CouplingDistArgs, DiameterArg, EnvelopeArgs, ExperimentCommand, ExponentArgs,
    GenerateArgs, InverseArgs, MonotoneArgs, OrderViolation, ProfileArgs, RateArgs, StatsArgs,
    TauArgs, ToleranceFailure, TvArgs, UsageError, VcountArgs,
};

/// Parses a rate spec, loading `table:` payloads from disk. Spec syntax
/// errors are usage errors; a table file that cannot be opened stays an IO
/// error.
fn resolve_spec(spec: &str) -> anyhow::Result<EdgeStepFunction> {
    if let Some(path) = spec.strip_prefix("table:") {
        let file = File::open(path).with_context(|| format!("opening table {path}"))?;
        return EdgeStepFunction::table_from_reader(BufReader::new(file))
            .map_err(|e| UsageError(format!("table {path}: {e}")).into());
    }
    EdgeStepFunction::parse_spec(spec).map_err(|e| UsageError(e.to_string()).into())
}

/// Resolves the `--f` / `--gamma` pair of an experiment.
fn resolve_rate(rate: &RateArgs) -> anyhow::Result<EdgeStepFunction> {
    match (&rate.f, rate.gamma) {
        (Some(spec), None) => resolve_spec(spec),
        (None, Some(gamma)) => EdgeStepFunction::power_law(gamma, rate.c, rate.beta)
            .map_err(|e| UsageError(e.to_string()).into()),
        _ => Err(UsageError("need a rate: either --f or --gamma".to_string()).into()),
    }
}

/// Canonical spec string for the manifest echo.
fn rate_spec(rate: &RateArgs) -> String {
    match (&rate.f, rate.gamma) {
        (Some(spec), _) => spec.clone(),
        (None, Some(gamma)) => format!("rv:{gamma},{},{}", rate.c, rate.beta),
        (None, None) => String::new(),
    }
}

/// Decay index for the clique prefix rule when none is given explicitly:
/// the rate's own index if it has one, otherwise zero (the widest prefix).
fn default_clique_decay(f: &EdgeStepFunction) -> f64 {
    match f {
        EdgeStepFunction::PowerLaw { gamma, .. } => *gamma,
        _ => 0.0,
    }
}

/// Splits a user-supplied output file path into directory and file name.
fn split_file_arg(path: &Path) -> anyhow::Result<(&Path, &str)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| UsageError(format!("{} has no file name", path.display())))?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    Ok((dir, name))
}

pub fn generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let f = resolve_spec(&args.f)?;
    if args.t == 0 {
        return Err(UsageError("t must be at least 1".to_string()).into());
    }
    let config = json!({
        "f": args.f,
        "t": args.t,
        "seed": args.seed,
        "track": args.track,
    });
    let mut manifest = ManifestBuilder::new("generate", "generate", args.seed, config);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut r = rng(args.seed, Purpose::Generate, 0);
    let (graph, trajectory) = generator::generate(&f, args.t, &mut r, &args.track)?;

    let mut dump = manifest.create(&args.out, "graph.dump")?;
    graph.write_dump(&mut dump)?;
    dump.flush()?;

    let coins: Vec<String> = trajectory
        .vertex_coin
        .iter()
        .enumerate()
        .map(|(k, &coin)| format!("{},{}", k as u64 + 2, u8::from(coin)))
        .collect();
    manifest.write_csv(&args.out, "trajectory.csv", "step,vertex_step", &coins)?;

    let arrivals: Vec<String> = trajectory
        .arrivals
        .iter()
        .enumerate()
        .map(|(i, &step)| format!("{},{step}", i as u64 + 1))
        .collect();
    manifest.write_csv(&args.out, "arrivals.csv", "rank,birth_step", &arrivals)?;

    if !trajectory.tracked.is_empty() {
        let mut rows = Vec::new();
        for series in &trajectory.tracked {
            for event in &series.events {
                rows.push(format!("{},{},{}", series.rank, event.step, event.degree));
            }
        }
        manifest.write_csv(&args.out, "degrees.csv", "rank,step,degree", &rows)?;
    }

    println!(
        "generated t={} vertices={} max_degree={} -> {}",
        graph.time(),
        graph.vertex_count(),
        graph.max_degree(),
        args.out.display()
    );
    manifest.finish(&args.out)
}

pub fn stats(args: &StatsArgs) -> anyhow::Result<()> {
    let (graph, source) = match (&args.input, &args.f, args.t) {
        (Some(path), None, None) => {
            let file =
                File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let graph = MultiGraph::parse_dump(BufReader::new(file))?;
            (graph, json!({ "input": path.display().to_string() }))
        }
        (None, Some(spec), Some(t)) => {
            if t == 0 {
                return Err(UsageError("t must be at least 1".to_string()).into());
            }
            let f = resolve_spec(spec)?;
            let mut r = rng(args.seed, Purpose::Generate, 0);
            let (graph, _) = generator::generate(&f, t, &mut r, &[])?;
            (graph, json!({ "f": spec, "t": t, "seed": args.seed }))
        }
        _ => {
            return Err(
                UsageError("need either --input or both --f and --t".to_string()).into()
            )
        }
    };

    let clique = match args.clique_prefix {
        Some(0) => None,
        Some(prefix) => Some(CliqueOptions { prefix, budget: args.clique_budget }),
        None => {
            let mut options = CliqueOptions::scaled(0.0, graph.time());
            options.budget = args.clique_budget;
            Some(options)
        }
    };
    let diameter = match args.diameter {
        DiameterArg::Auto => Some(DiameterMode::Auto),
        DiameterArg::Exact => Some(DiameterMode::Exact),
        DiameterArg::DoubleSweep => Some(DiameterMode::DoubleSweep),
        DiameterArg::Skip => None,
    };
    let mut neighbor_vertices = Vec::with_capacity(args.neighbors.len());
    for &v in &args.neighbors {
        if v == 0 || v > u64::from(graph.vertex_count()) {
            return Err(UsageError(format!(
                "vertex {v} outside 1..={}",
                graph.vertex_count()
            ))
            .into());
        }
        neighbor_vertices.push((v - 1) as u32);
    }
    let options = StatsOptions {
        triangle_census: !args.no_census,
        clique,
        diameter,
        neighbor_vertices,
    };
    let report = full_report(&graph, &options)?;
    let rendered = serde_json::to_string_pretty(&report)?;

    if args.json.is_none() && args.csv.is_none() {
        println!("{rendered}");
        return Ok(());
    }

    let config = json!({
        "source": source,
        "clique_prefix": options.clique.map(|c| c.prefix),
        "clique_budget": options.clique.map(|c| c.budget),
        "diameter": diameter_label(args.diameter),
        "census": !args.no_census,
        "neighbors": args.neighbors,
    });
    let mut manifest = ManifestBuilder::new("stats", "stats", args.seed, config);
    let manifest_dir = {
        let first = args.json.as_ref().or(args.csv.as_ref()).unwrap();
        split_file_arg(first)?.0.to_path_buf()
    };
    if let Some(path) = &args.json {
        let (dir, name) = split_file_arg(path)?;
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut out = manifest.create(dir, name)?;
        out.write_all(rendered.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    if let Some(path) = &args.csv {
        let (dir, name) = split_file_arg(path)?;
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        manifest.write_csv(dir, name, &report.csv_header(), &[report.csv_row()])?;
    }
    println!(
        "stats t={} vertices={} simple_edges={} -> {}",
        report.time,
        report.vertex_count,
        report.simple_edge_count,
        manifest.manifest_path(&manifest_dir).display()
    );
    manifest.finish(&manifest_dir)
}

fn diameter_label(arg: DiameterArg) -> &'static str {
    match arg {
        DiameterArg::Auto => "auto",
        DiameterArg::Exact => "exact",
        DiameterArg::DoubleSweep => "double-sweep",
        DiameterArg::Skip => "skip",
    }
}

/// Relation of `a` to `b` over the coin steps 2..=t.
fn pointwise_order(a: &EdgeStepFunction, b: &EdgeStepFunction, t: u64) -> &'static str {
    let mut below = false;
    let mut above = false;
    for s in 2..=t {
        let (x, y) = (a.eval(s), b.eval(s));
        below |= x < y;
        above |= x > y;
        if below && above {
            return "mixed";
        }
    }
    match (below, above) {
        (false, false) => "equal",
        (true, false) => "le",
        (false, true) => "ge",
        _ => "mixed",
    }
}

pub fn couple(args: &CoupleArgs) -> anyhow::Result<()> {
    if args.f.len() < 2 {
        return Err(UsageError("need at least two --f specs to compare".to_string()).into());
    }
    if args.t == 0 || args.replicas == 0 {
        return Err(UsageError("t and replicas must be at least 1".to_string()).into());
    }
    let functions: Vec<EdgeStepFunction> =
        args.f.iter().map(|s| resolve_spec(s)).collect::<anyhow::Result<_>>()?;

    if args.assert_order {
        for (k, pair) in functions.windows(2).enumerate() {
            for s in 2..=args.t {
                let (lo, hi) = (pair[0].eval(s), pair[1].eval(s));
                if lo > hi {
                    return Err(OrderViolation(format!(
                        "spec {} exceeds spec {} at step {s}: {lo} > {hi}",
                        k + 1,
                        k + 2
                    ))
                    .into());
                }
            }
        }
    }

    let options = StatsOptions {
        triangle_census: true,
        clique: None,
        diameter: None,
        neighbor_vertices: Vec::new(),
    };
    let pairs = functions.len() - 1;
    let mut rows = Vec::new();
    let mut differ = vec![0u64; pairs];
    let mut vc_le = vec![0u64; pairs];
    let mut vc_ge = vec![0u64; pairs];
    let mut md_le = vec![0u64; pairs];
    let mut md_ge = vec![0u64; pairs];
    for replica in 0..args.replicas {
        let mut r = rng(args.seed, Purpose::Tree, replica);
        let tree = DoublyLabeledTree::grow(args.t, &mut r)?;
        let reports = tree.coupled_stats(&functions, &options)?;
        for (idx, report) in reports.iter().enumerate() {
            rows.push(format!(
                "{replica},{},{},{},{},{},{}",
                idx + 1,
                report.vertex_count,
                report.max_degree,
                report.simple_edge_count,
                report.triangles.unwrap_or(0),
                report.cherries.unwrap_or(0)
            ));
        }
        for k in 0..pairs {
            if !tree.trajectory_equal(&functions[k], &functions[k + 1]) {
                differ[k] += 1;
            }
            if reports[k].vertex_count <= reports[k + 1].vertex_count {
                vc_le[k] += 1;
            }
            if reports[k].vertex_count >= reports[k + 1].vertex_count {
                vc_ge[k] += 1;
            }
            if reports[k].max_degree <= reports[k + 1].max_degree {
                md_le[k] += 1;
            }
            if reports[k].max_degree >= reports[k + 1].max_degree {
                md_ge[k] += 1;
            }
        }
    }

    let fraction = |count: u64| count as f64 / args.replicas as f64;
    let mut pair_reports = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let order = pointwise_order(&functions[k], &functions[k + 1], args.t);
        // Under a pointwise order the collapse couples the graphs so that
        // vertex counts move with the rate and maximum degrees against it;
        // report how often the realized statistics agree with that.
        let (vc_frac, md_frac) = match order {
            "le" | "equal" => (Some(fraction(vc_le[k])), Some(fraction(md_ge[k]))),
            "ge" => (Some(fraction(vc_ge[k])), Some(fraction(md_le[k]))),
            _ => (None, None),
        };
        let l1 = functions[k].l1_distance(&functions[k + 1], args.t);
        pair_reports.push(json!({
            "first": k + 1,
            "second": k + 2,
            "pointwise_order": order,
            "l1_distance": l1,
            "differ_bound": l1.min(1.0),
            "differ_fraction": fraction(differ[k]),
            "vertex_count_monotone_fraction": vc_frac,
            "max_degree_monotone_fraction": md_frac,
        }));
        println!(
            "pair {}~{}: order {order}, differ fraction {:.3} (bound {:.3})",
            k + 1,
            k + 2,
            fraction(differ[k]),
            l1.min(1.0)
        );
    }

    let config = json!({
        "f": args.f,
        "t": args.t,
        "replicas": args.replicas,
        "seed": args.seed,
        "assert_order": args.assert_order,
    });
    let mut manifest = ManifestBuilder::new("couple", "couple", args.seed, config);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    manifest.write_csv(
        &args.out,
        "couple.csv",
        "replica,function,vertex_count,max_degree,simple_edges,triangles,cherries",
        &rows,
    )?;
    let summary = json!({
        "t": args.t,
        "replicas": args.replicas,
        "functions": args.f,
        "pairs": pair_reports,
    });
    manifest.write_json(&args.out, "couple_summary.json", &summary)?;
    manifest.finish(&args.out)
}

pub fn experiment(command: &ExperimentCommand) -> anyhow::Result<()> {
    match command {
        ExperimentCommand::Exponent(args) => exponent(args),
        ExperimentCommand::Tau(args) => tau(args),
        ExperimentCommand::Envelope(args) => envelope(args),
        ExperimentCommand::Tv(args) => tv(args),
        ExperimentCommand::Monotone(args) => monotone(args),
        ExperimentCommand::Inverse(args) => inverse(args),
        ExperimentCommand::CouplingDist(args) => coupling_dist(args),
        ExperimentCommand::Vcount(args) => vcount(args),
    }
}

/// Writes `<name>.json`, `<name>.csv` and the manifest into `out`.
fn write_experiment(
    out: &Path,
    name: &str,
    seed: u64,
    config: serde_json::Value,
    report: &impl serde::Serialize,
    header: &str,
    rows: &[String],
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest =
        ManifestBuilder::new(&format!("experiment {name}"), name, seed, config);
    manifest.write_json(out, &format!("{name}.json"), report)?;
    manifest.write_csv(out, &format!("{name}.csv"), header, rows)?;
    manifest.finish(out)
}

fn parse_statistic(label: &str) -> anyhow::Result<ScanStatistic> {
    Ok(match label {
        "vertex_count" => ScanStatistic::VertexCount,
        "max_degree" => ScanStatistic::MaxDegree,
        "simple_edges" => ScanStatistic::SimpleEdges,
        "triangles" => ScanStatistic::Triangles,
        "cherries" => ScanStatistic::Cherries,
        "global_clustering" => ScanStatistic::GlobalClustering,
        "clique_size" => ScanStatistic::CliqueSize,
        other => {
            return Err(UsageError(format!(
                "unknown statistic {other:?}; expected vertex_count, max_degree, \
                 simple_edges, triangles, cherries, global_clustering or clique_size"
            ))
            .into())
        }
    })
}

fn fit_rows(label: &str, fit: &experiments::ExponentFit, rows: &mut Vec<String>) {
    for point in &fit.points {
        rows.push(format!(
            "{label},{},{},{},{}",
            point.t, point.mean_log_value, point.sd_log_value, point.samples
        ));
    }
}

fn exponent(args: &ExponentArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let statistics: Vec<ScanStatistic> =
        args.stats.iter().map(|s| parse_statistic(s)).collect::<anyhow::Result<_>>()?;
    if args.expect.is_some() && statistics.len() != 1 {
        return Err(UsageError("--expect needs exactly one --stat".to_string()).into());
    }
    let clique_decay = args.clique_decay.unwrap_or_else(|| default_clique_decay(&f));
    let config = ScanConfig {
        f,
        grid: args.grid.clone(),
        replicas: args.replicas,
        seed: args.seed,
        clique_decay_index: clique_decay,
        clique_budget: args.clique_budget,
        workers: args.workers,
    };
    let fits = experiments::multi_exponent_scan(&config, &statistics)?;

    let report: Vec<serde_json::Value> = fits
        .iter()
        .map(|(statistic, fit)| json!({ "statistic": statistic.label(), "fit": fit }))
        .collect();
    let mut rows = Vec::new();
    for (statistic, fit) in &fits {
        fit_rows(statistic.label(), fit, &mut rows);
    }
    let echo = json!({
        "f": rate_spec(&args.rate),
        "stats": args.stats,
        "grid": args.grid,
        "replicas": args.replicas,
        "seed": args.seed,
        "clique_decay": clique_decay,
        "clique_budget": args.clique_budget,
        "workers": args.workers,
        "expect": args.expect,
        "tolerance": args.tolerance,
    });
    write_experiment(
        &args.out,
        "exponent",
        args.seed,
        echo,
        &report,
        "statistic,t,mean_log,sd_log,samples",
        &rows,
    )?;
    for (statistic, fit) in &fits {
        println!(
            "exponent {}: slope {:.4} (stderr {:.4}, r2 {:.4})",
            statistic.label(),
            fit.slope,
            fit.std_err,
            fit.r_squared
        );
    }
    if let (Some(expect), Some(tolerance)) = (args.expect, args.tolerance) {
        let slope = fits[0].1.slope;
        if (slope - expect).abs() > tolerance {
            return Err(ToleranceFailure(format!(
                "slope {slope:.4} outside {expect} +- {tolerance}"
            ))
            .into());
        }
    }
    Ok(())
}

fn tau(args: &TauArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let report = experiments::arrival_concentration(
        &f,
        args.i,
        args.delta,
        args.replicas,
        args.seed,
        args.horizon_factor,
        args.workers,
    )?;
    let echo = json!({
        "f": rate_spec(&args.rate),
        "i": args.i,
        "delta": args.delta,
        "replicas": args.replicas,
        "seed": args.seed,
        "horizon_factor": args.horizon_factor,
        "floor": args.floor,
        "workers": args.workers,
    });
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        report.rank,
        report.delta,
        report.predicted_step,
        report.lower,
        report.upper,
        report.replicas,
        report.hits,
        report.hit_fraction,
        report.capped
    );
    write_experiment(
        &args.out,
        "tau",
        args.seed,
        echo,
        &report,
        "rank,delta,predicted_step,lower,upper,replicas,hits,hit_fraction,capped",
        &[row],
    )?;
    println!(
        "tau rank {}: hit fraction {:.3} over {} replicas, band {:.1}..{:.1}",
        report.rank, report.hit_fraction, report.replicas, report.lower, report.upper
    );
    if let Some(floor) = args.floor {
        if report.hit_fraction < floor {
            return Err(ToleranceFailure(format!(
                "hit fraction {:.4} below floor {floor}",
                report.hit_fraction
            ))
            .into());
        }
    }
    Ok(())
}

fn envelope(args: &EnvelopeArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let report = experiments::degree_envelope(
        &f,
        args.i,
        &args.alphas,
        args.t,
        args.replicas,
        args.seed,
        args.workers,
    )?;
    let echo = json!({
        "f": rate_spec(&args.rate),
        "i": args.i,
        "alphas": args.alphas,
        "t": args.t,
        "replicas": args.replicas,
        "seed": args.seed,
        "ceiling": args.ceiling,
        "workers": args.workers,
    });
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|row| format!("{},{},{}", row.alpha, row.exceedances, row.fraction))
        .collect();
    write_experiment(
        &args.out,
        "envelope",
        args.seed,
        echo,
        &report,
        "alpha,exceedances,fraction",
        &rows,
    )?;
    let rendered: Vec<String> =
        report.rows.iter().map(|r| format!("{:.3}@{}", r.fraction, r.alpha)).collect();
    println!(
        "envelope rank {}: exceedance fractions {} ({} never born)",
        report.rank,
        rendered.join(", "),
        report.never_born
    );
    if let Some(ceiling) = args.ceiling {
        let worst = report.rows.last().map(|r| r.fraction).unwrap_or(0.0);
        if worst > ceiling {
            return Err(ToleranceFailure(format!(
                "exceedance fraction {worst:.4} above ceiling {ceiling} at the largest multiplier"
            ))
            .into());
        }
    }
    Ok(())
}

fn tv(args: &TvArgs) -> anyhow::Result<()> {
    let f = resolve_spec(&args.f)?;
    let h = resolve_spec(&args.h)?;
    let report = experiments::tv_check(&f, &h, args.t, args.replicas, args.seed, args.workers)?;
    let echo = json!({
        "f": args.f,
        "h": args.h,
        "t": args.t,
        "replicas": args.replicas,
        "seed": args.seed,
        "workers": args.workers,
    });
    let row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        report.t,
        report.l1_distance,
        report.bound,
        report.exact_differ_probability,
        report.replicas,
        report.differing,
        report.differ_fraction,
        report.sigma,
        report.bound_ok,
        report.exact_ok
    );
    write_experiment(
        &args.out,
        "tv",
        args.seed,
        echo,
        &report,
        "t,l1_distance,bound,exact_differ_probability,replicas,differing,differ_fraction,\
         sigma,bound_ok,exact_ok",
        &[row],
    )?;
    println!(
        "tv: differ fraction {:.4} vs bound {:.4} (exact {:.4})",
        report.differ_fraction, report.bound, report.exact_differ_probability
    );
    if !(report.bound_ok && report.exact_ok) {
        return Err(ToleranceFailure(format!(
            "differ fraction {:.4} incompatible with bound {:.4} / exact {:.4}",
            report.differ_fraction, report.bound, report.exact_differ_probability
        ))
        .into());
    }
    Ok(())
}

fn monotone(args: &MonotoneArgs) -> anyhow::Result<()> {
    let f = resolve_spec(&args.f)?;
    let h = resolve_spec(&args.h)?;
    let report =
        experiments::monotone_suite(&f, &h, args.t, args.replicas, args.seed, args.workers)?;
    let echo = json!({
        "f": args.f,
        "h": args.h,
        "t": args.t,
        "replicas": args.replicas,
        "seed": args.seed,
        "workers": args.workers,
    });
    let row = format!(
        "{},{},{},{},{},{}",
        report.t,
        report.replicas,
        report.vertex_count_violations,
        report.max_degree_violations,
        report.diameter_violations,
        report.pass
    );
    write_experiment(
        &args.out,
        "monotone",
        args.seed,
        echo,
        &report,
        "t,replicas,vertex_count_violations,max_degree_violations,diameter_violations,pass",
        &[row],
    )?;
    println!(
        "monotone: {} replicas, violations {}/{}/{} (vertex count / max degree / diameter)",
        report.replicas,
        report.vertex_count_violations,
        report.max_degree_violations,
        report.diameter_violations
    );
    if !report.pass {
        return Err(ToleranceFailure(format!(
            "monotonicity violated in replicas {:?}",
            report.violating_replicas
        ))
        .into());
    }
    Ok(())
}

fn inverse(args: &InverseArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let clique_decay = args.clique_decay.unwrap_or_else(|| default_clique_decay(&f));
    let config = ScanConfig {
        f,
        grid: args.grid.clone(),
        replicas: args.replicas,
        seed: args.seed,
        clique_decay_index: clique_decay,
        clique_budget: args.clique_budget,
        workers: args.workers,
    };
    let report = experiments::inverse_relation_check(&config, args.tolerance)?;
    let echo = json!({
        "f": rate_spec(&args.rate),
        "grid": args.grid,
        "replicas": args.replicas,
        "seed": args.seed,
        "clique_decay": clique_decay,
        "clique_budget": args.clique_budget,
        "tolerance": args.tolerance,
        "workers": args.workers,
    });
    let mut rows = Vec::new();
    fit_rows("global_clustering", &report.clustering, &mut rows);
    fit_rows("clique_size", &report.clique, &mut rows);
    write_experiment(
        &args.out,
        "inverse",
        args.seed,
        echo,
        &report,
        "statistic,t,mean_log,sd_log,samples",
        &rows,
    )?;
    println!(
        "inverse: clustering {:.4} + clique {:.4} = {:.4}, band 0 +- {}",
        report.clustering.slope, report.clique.slope, report.slope_sum, report.tolerance
    );
    if !report.pass {
        return Err(ToleranceFailure(format!(
            "slope sum {:.4} outside 0 +- {}",
            report.slope_sum, report.tolerance
        ))
        .into());
    }
    Ok(())
}

fn coupling_dist(args: &CouplingDistArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let variant = if args.broken { CollapseVariant::SingleStep } else { CollapseVariant::Standard };
    let report = experiments::coupling_distribution_check(
        &f,
        args.t,
        args.samples,
        args.seed,
        args.significance,
        variant,
        args.workers,
    )?;
    let echo = json!({
        "f": rate_spec(&args.rate),
        "t": args.t,
        "samples": args.samples,
        "significance": args.significance,
        "broken": args.broken,
        "seed": args.seed,
        "workers": args.workers,
    });
    let rows = vec![
        format!(
            "vertex_count,{},{},{},{}",
            report.vertex_count.statistic,
            report.vertex_count.dof,
            report.vertex_count.p_value,
            report.vertex_count.bins
        ),
        format!(
            "initial_degree,{},{},{},{}",
            report.initial_degree.statistic,
            report.initial_degree.dof,
            report.initial_degree.p_value,
            report.initial_degree.bins
        ),
    ];
    write_experiment(
        &args.out,
        "coupling-dist",
        args.seed,
        echo,
        &report,
        "check,chi_square,dof,p_value,bins",
        &rows,
    )?;
    println!(
        "coupling-dist: p-values {:.4} (vertex count), {:.4} (initial degree)",
        report.vertex_count.p_value, report.initial_degree.p_value
    );
    // With --broken the collapse is a negative control: the check is
    // expected to reject it, and not rejecting is the failure.
    let ok = if args.broken { !report.pass } else { report.pass };
    if !ok {
        let message = if args.broken {
            format!(
                "broken collapse not rejected at significance {}",
                report.significance
            )
        } else {
            format!(
                "distributions differ at significance {} (p-values {:.6}, {:.6})",
                report.significance, report.vertex_count.p_value, report.initial_degree.p_value
            )
        };
        return Err(ToleranceFailure(message).into());
    }
    Ok(())
}

fn vcount(args: &VcountArgs) -> anyhow::Result<()> {
    let f = resolve_rate(&args.rate)?;
    let report = experiments::vertex_count_concentration(
        &f,
        args.t,
        args.replicas,
        args.seed,
        args.workers,
    )?;
    let echo = json!({
        "f": rate_spec(&args.rate),
        "t": args.t,
        "replicas": args.replicas,
        "seed": args.seed,
        "floor": args.floor,
        "workers": args.workers,
    });
    let row = format!(
        "{},{},{},{},{},{},{},{},{}",
        report.t,
        report.expected,
        report.lower,
        report.upper,
        report.replicas,
        report.hits,
        report.hit_fraction,
        report.min_count,
        report.max_count
    );
    write_experiment(
        &args.out,
        "vcount",
        args.seed,
        echo,
        &report,
        "t,expected,lower,upper,replicas,hits,hit_fraction,min_count,max_count",
        &[row],
    )?;
    println!(
        "vcount t={}: hit fraction {:.3} over {} replicas, band {:.1}..{:.1}",
        report.t, report.hit_fraction, report.replicas, report.lower, report.upper
    );
    if let Some(floor) = args.floor {
        if report.hit_fraction < floor {
            return Err(ToleranceFailure(format!(
                "hit fraction {:.4} below floor {floor}",
                report.hit_fraction
            ))
            .into());
        }
    }
    Ok(())
}

pub fn profile(args: &ProfileArgs) -> anyhow::Result<()> {
    let f = resolve_spec(&args.f)?;
    if args.grid.iter().any(|&s| s == 0) {
        return Err(UsageError("grid steps are 1-based".to_string()).into());
    }
    let max = *args.grid.iter().max().expect("grid is non-empty");
    // A horizon with cumulative sum at least `max` covers every column:
    // the running sum never exceeds its argument, so the horizon is at
    // least `max` itself and every inverse lookup up to `max` lands.
    let profile = AnalyticProfile::with_cumulative_at_least(f, max as f64, DEFAULT_EXTENSION_CAP)?;

    let header = "s,f,cumulative,inverse_cumulative,degree_growth,growth_ratio,rank_growth,sandwich";
    let mut rows = Vec::with_capacity(args.grid.len());
    for &s in &args.grid {
        let inverse = profile.inverse_cumulative(s as f64)?;
        let sandwich = profile.cumulative(inverse) - s as f64;
        rows.push(format!(
            "{s},{},{},{inverse},{},{},{},{sandwich}",
            profile.eval(s),
            profile.cumulative(s),
            profile.degree_growth(s),
            profile.growth_ratio(s),
            profile.rank_growth(s)?
        ));
    }

    println!("{header}");
    for row in &rows {
        println!("{row}");
    }
    if let Some(out) = &args.out {
        let config = json!({ "f": args.f, "grid": args.grid });
        let mut manifest = ManifestBuilder::new("profile", "profile", 0, config);
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        manifest.write_csv(out, "profile.csv", header, &rows)?;
        manifest.finish(out)?;
    }
    Ok(())
}
