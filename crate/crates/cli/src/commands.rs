use std::collections::BTreeSet;
use std::fs;
use std::io::BufWriter;

use anyhow::{Context, Result};
use macrotrace::fitness_author::{
    author_dataset, name_change_curve, predict_from_dataset, FitnessClassTask, Life, MacroSet,
};
use macrotrace::fitness_collab::{enumerate_first_collaborations, match_and_compare, shuffle_classes, Setting};
use macrotrace::fitness_macro::{score_dataset, sigma, MacroFeatureVector, MacroFitnessTask};
use macrotrace::graph_stats::{
    cdf, depth_profiles, edge_experience_difference_values, largest_reachable_fraction, seed_trees, CdfSeries,
};
use macrotrace::inheritance::build_all;
use macrotrace::stats::{permuted, LogisticConfig};
use macrotrace::synth::{compare_with_truth, plant_fitness_bias};
use macrotrace::{load_corpus, trackable_macros, Corpus, Error, InheritanceGraph, MacroKey, Node};

use crate::output::{ensure_dir, write_json, Table};
use crate::{AuthorArgs, CollabArgs, CorpusArgs, MacroArgs, Mismatch, StatsArgs, SynthArgs, VerifyArgs};

fn load(args: &CorpusArgs) -> Result<Corpus> {
    ensure_dir(&args.out)?;
    Ok(load_corpus(&args.corpus, args.mode())?)
}

fn trackable_graphs(corpus: &Corpus, args: &CorpusArgs) -> Result<Vec<InheritanceGraph>> {
    let keys: Vec<MacroKey> = trackable_macros(corpus, &args.filter()?).into_iter().collect();
    Ok(build_all(corpus, &keys)?)
}

pub fn extract(args: &CorpusArgs) -> Result<()> {
    let corpus = load(args)?;
    let filter = args.filter()?;
    let mut table = Table::create(
        &args.out,
        "macros.csv",
        &["macro", "names", "papers", "adopters", "first_paper", "first_date", "body_length", "trackable"],
    )?;
    let mut trackable = 0;
    for (m, key) in corpus.macro_keys().iter().enumerate() {
        let papers = corpus.macro_papers(m);
        let names: BTreeSet<&str> = papers
            .iter()
            .filter_map(|&pos| corpus.paper(pos).name_for(key))
            .collect();
        let adopters = corpus.macro_adopters(m);
        let first = corpus.paper(papers[0]);
        let ok = filter.accepts(key, adopters);
        trackable += usize::from(ok);
        table.row([
            key.to_string(),
            names.into_iter().collect::<Vec<_>>().join(";"),
            papers.len().to_string(),
            adopters.to_string(),
            first.id.clone(),
            first.date.to_string(),
            key.len().to_string(),
            ok.to_string(),
        ])?;
    }
    table.finish()?;
    println!("{} macro bodies, {trackable} trackable", corpus.macro_keys().len());
    Ok(())
}

pub fn build_graphs(args: &CorpusArgs) -> Result<()> {
    let corpus = load(args)?;
    let graphs = trackable_graphs(&corpus, args)?;
    let dir = args.out.join("graphs");
    ensure_dir(&dir)?;
    for entry in fs::read_dir(&dir)? {
        let path = entry?.path();
        let stale = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("graph_") && n.ends_with(".json"));
        if stale {
            fs::remove_file(&path).with_context(|| format!("cannot remove {}", path.display()))?;
        }
    }
    let mut table = Table::create(
        &args.out,
        "graphs_summary.csv",
        &[
            "index",
            "macro",
            "nodes",
            "sources",
            "edges",
            "internal_edges",
            "authors",
            "largest_reachable_fraction",
            "max_depth",
        ],
    )?;
    for (i, g) in graphs.iter().enumerate() {
        write_json(&dir.join(format!("graph_{i:05}.json")), &g.to_json())?;
        let seed = g.find_seed()?;
        let internal = g
            .edges()
            .iter()
            .filter(|e| e.kind == macrotrace::EdgeKind::Internal)
            .count();
        table.row([
            i.to_string(),
            g.macro_key().to_string(),
            g.nodes().len().to_string(),
            g.sources().len().to_string(),
            g.edges().len().to_string(),
            internal.to_string(),
            g.author_count().to_string(),
            largest_reachable_fraction(g)?.to_string(),
            g.bfs_tree(seed)?.max_depth().to_string(),
        ])?;
    }
    table.finish()?;
    println!("{} graphs", graphs.len());
    Ok(())
}

fn write_cdf(args: &CorpusArgs, name: &str, series: Option<&CdfSeries>) -> Result<()> {
    let mut table = Table::create(&args.out, name, &["value", "cum_fraction"])?;
    for p in series.map(|s| s.points.as_slice()).unwrap_or_default() {
        table.row([p.value.to_string(), p.cum_fraction.to_string()])?;
    }
    table.finish()
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let graphs = trackable_graphs(&corpus, &args.corpus)?;
    if graphs.is_empty() {
        return Err(Error::EmptyInput("no graphs".to_string()).into());
    }
    let ratios: Vec<f64> = graphs
        .iter()
        .map(largest_reachable_fraction)
        .collect::<macrotrace::Result<_>>()?;
    let reach = cdf(&ratios)?;
    write_cdf(&args.corpus, "cdf.csv", Some(&reach))?;

    let diffs: Vec<f64> = edge_experience_difference_values(&graphs, &corpus)?
        .into_iter()
        .map(|d| d as f64)
        .collect();
    let experience = if diffs.is_empty() { None } else { Some(cdf(&diffs)?) };
    write_cdf(&args.corpus, "experience_cdf.csv", experience.as_ref())?;

    let trees = seed_trees(&graphs)?;
    let stat_name = match args.width_stat {
        macrotrace::WidthStat::Mean => "mean",
        macrotrace::WidthStat::Median => "median",
    };
    let mut table = Table::create(
        &args.corpus.out,
        "depth_profile.csv",
        &["group", "trees", "depth", "mean_months", "width_stat", "width"],
    )?;
    for profile in depth_profiles(&trees, args.width_stat) {
        for row in &profile.rows {
            table.row([
                profile.group.to_string(),
                profile.trees.to_string(),
                row.depth.to_string(),
                row.mean_months.to_string(),
                stat_name.to_string(),
                row.width.to_string(),
            ])?;
        }
    }
    table.finish()?;
    println!(
        "{} graphs, median reach ratio {}, median experience difference {}",
        graphs.len(),
        reach.median(),
        experience.map_or(f64::NAN, |e| e.median())
    );
    Ok(())
}

pub fn collab_fitness(args: &CollabArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let graphs = trackable_graphs(&corpus, &args.corpus)?;
    let mut pairs = enumerate_first_collaborations(&corpus, &graphs);
    if args.null {
        pairs = shuffle_classes(&pairs, args.seed);
    }
    let mut table = Table::create(
        &args.corpus.out,
        "collab_fitness.csv",
        &["setting", "bin_start_year", "n_pairs", "wins", "ties", "win_percentage"],
    )?;
    let mut first_error = None;
    let mut written = 0;
    for setting in Setting::ALL {
        let cmp = match match_and_compare(&pairs, setting, args.seed) {
            Ok(cmp) => cmp,
            Err(e) => {
                eprintln!("macrotrace: warning: {setting}: {e}");
                first_error.get_or_insert(e);
                continue;
            }
        };
        written += 1;
        let rows = cmp
            .bins
            .iter()
            .map(|b| (b.bin_start_year.to_string(), b))
            .chain([("all".to_string(), &cmp.total)]);
        for (bin, b) in rows {
            table.row([
                setting.to_string(),
                bin,
                b.n_pairs.to_string(),
                b.wins.to_string(),
                b.ties.to_string(),
                b.win_percentage.to_string(),
            ])?;
        }
        println!("{setting}: {} matched pairs, {}% wins", cmp.total.n_pairs, cmp.total.win_percentage);
    }
    table.finish()?;
    match (written, first_error) {
        (0, Some(e)) => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn author_fitness(args: &AuthorArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let out = &args.corpus.out;
    let cfg = LogisticConfig::default();
    let mut curves = Table::create(out, "name_change_curves.csv", &["theta", "macro_set", "life", "x", "f", "events"])?;
    let mut thresholds = Table::create(out, "author_thresholds.csv", &["theta", "p20", "p80", "n_low", "n_high"])?;
    let mut results = Table::create(
        out,
        "author_fitness.csv",
        &["theta", "feature", "seed", "accuracy", "n_low", "n_high", "n_test"],
    )?;
    let mut last_error = None;
    let mut scored = 0;
    for &theta in &args.theta {
        for set in MacroSet::ALL {
            for life in [Life::Full, Life::Early] {
                match name_change_curve(&corpus, theta, set, life) {
                    Ok(curve) => {
                        for p in &curve.points {
                            curves.row([
                                theta.to_string(),
                                set.to_string(),
                                life.to_string(),
                                p.x.to_string(),
                                p.f.to_string(),
                                p.events.to_string(),
                            ])?;
                        }
                    }
                    Err(e) => eprintln!("macrotrace: warning: curve theta={theta} {set} {life}: {e}"),
                }
            }
        }
        let task = match FitnessClassTask::build(&corpus, theta) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("macrotrace: warning: theta={theta}: {e}");
                last_error = Some(e);
                continue;
            }
        };
        thresholds.row([
            theta.to_string(),
            task.low_threshold.to_string(),
            task.high_threshold.to_string(),
            task.low.len().to_string(),
            task.high.len().to_string(),
        ])?;
        for &feature in &args.features {
            let (x, y) = author_dataset(&corpus, &task, feature);
            for seed in args.seed..args.seed + args.seeds {
                let y = if args.null { permuted(&y, seed) } else { y.clone() };
                match predict_from_dataset(&x, &y, seed, &cfg) {
                    Ok((accuracy, n_test)) => {
                        scored += 1;
                        results.row([
                            theta.to_string(),
                            feature.to_string(),
                            seed.to_string(),
                            accuracy.to_string(),
                            task.low.len().to_string(),
                            task.high.len().to_string(),
                            n_test.to_string(),
                        ])?;
                    }
                    Err(e) => {
                        eprintln!("macrotrace: warning: theta={theta} {feature} seed={seed}: {e}");
                        last_error = Some(e);
                    }
                }
            }
        }
    }
    curves.finish()?;
    thresholds.finish()?;
    results.finish()?;
    println!("{scored} author fitness runs");
    match (scored, last_error) {
        (0, Some(e)) => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn macro_fitness(args: &MacroArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let out = &args.corpus.out;
    let cfg = LogisticConfig::default();
    let candidates: Vec<MacroKey> = corpus
        .macro_keys()
        .iter()
        .filter(|k| k.len() > args.corpus.min_body_len)
        .cloned()
        .collect();
    let mut sigmas = Table::create(out, "sigma.csv", &["k", "sigma", "instances"])?;
    let mut results = Table::create(out, "macro_fitness.csv", &["k", "feature_subset", "seed", "accuracy", "n_instances"])?;
    let mut header = vec!["k", "macro", "fitness", "label"];
    header.extend(MacroFeatureVector::COLUMNS);
    let mut features = Table::create(out, "macro_features.csv", &header)?;
    let mut last_error = None;
    let mut scored = 0;
    for &k in &args.k {
        let s = match sigma(&corpus, k, Some(&candidates)) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("macrotrace: warning: k={k}: {e}");
                last_error = Some(e);
                continue;
            }
        };
        sigmas.row([k.to_string(), s.sigma.to_string(), s.instances.to_string()])?;
        let task = MacroFitnessTask::build(&corpus, k, &candidates)?;
        for inst in &task.instances {
            let mut row = vec![
                k.to_string(),
                inst.key.to_string(),
                inst.fitness.to_string(),
                inst.label.to_string(),
            ];
            row.extend(inst.features.values().iter().map(f64::to_string));
            features.row(row)?;
        }
        for &subset in &args.features {
            let (x, y) = task.dataset(subset);
            for seed in args.seed..args.seed + args.seeds {
                let y = if args.null { permuted(&y, seed) } else { y.clone() };
                match score_dataset(&x, &y, seed, &cfg) {
                    Ok(accuracy) => {
                        scored += 1;
                        results.row([
                            k.to_string(),
                            subset.to_string(),
                            seed.to_string(),
                            accuracy.to_string(),
                            task.instances.len().to_string(),
                        ])?;
                    }
                    Err(e) => {
                        eprintln!("macrotrace: warning: k={k} {subset} seed={seed}: {e}");
                        last_error = Some(e);
                    }
                }
            }
        }
    }
    sigmas.finish()?;
    results.finish()?;
    features.finish()?;
    println!("{scored} macro fitness runs");
    match (scored, last_error) {
        (0, Some(e)) => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let (corpus, truth) = plant_fitness_bias(&args.generator.config(), &args.generator.effects())?;
    let path = args.out.join("corpus.jsonl");
    let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    corpus.write_jsonl(BufWriter::new(file))?;
    write_json(&args.out.join("ground_truth.json"), &truth)?;
    let events: usize = truth.macros.iter().map(|m| m.events.len()).sum();
    println!(
        "{} papers, {} authors, {} macros, {events} transmission events",
        corpus.len(),
        corpus.authors().len(),
        truth.macros.len()
    );
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let (corpus, truth) = plant_fitness_bias(&args.generator.config(), &args.generator.effects())?;
    let keys: Vec<MacroKey> = truth.macros.iter().map(|m| m.body.clone()).collect();
    let graphs = build_all(&corpus, &keys)?;
    let report = compare_with_truth(&graphs, &truth)?;
    let mut violations = Vec::new();
    for g in &graphs {
        for v in g.check_invariants() {
            violations.push(format!("{}: {v}", g.macro_key()));
        }
        let author_without_parent = g
            .nodes()
            .iter()
            .enumerate()
            .any(|(i, n)| matches!(n, Node::Author { .. }) && g.in_edges(i).is_empty());
        if g.topological_order().is_none() || author_without_parent {
            violations.push(format!("{}: not a rooted DAG", g.macro_key()));
        }
    }
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        let json = serde_json::json!({
            "macros": report.macros,
            "planted_edges": report.planted_edges,
            "reconstructed_edges": report.reconstructed_edges,
            "mismatched_edges": report.mismatched_edges,
            "mismatched_macros": report.mismatched_macros,
            "invariant_violations": violations,
        });
        write_json(&out.join("verify_report.json"), &json)?;
    }
    println!("{} graphs, {} planted edges", report.macros, report.planted_edges);
    println!("{} mismatched edges", report.mismatched_edges);
    println!("{} invariant violations", violations.len());
    if report.mismatched_edges > 0 || !violations.is_empty() {
        let first = violations
            .first()
            .cloned()
            .or_else(|| report.mismatched_macros.first().map(|m| format!("edges differ for {m}")))
            .unwrap_or_default();
        return Err(Mismatch(format!(
            "{} mismatched edges, {} invariant violations; {first}",
            report.mismatched_edges,
            violations.len()
        ))
        .into());
    }
    Ok(())
}
