//! Pipelines on synthetic corpora against independent brute-force recounts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use macrotrace::fitness_author::author_feature;
use macrotrace::fitness_macro::{adoption_prefix, extract_features};
use macrotrace::graph_stats::{depth_time_profile, edge_experience_differences, seed_trees};
use macrotrace::inheritance::build_all;
use macrotrace::synth::compare_with_truth;
use macrotrace::{
    generate, trackable_macros, AuthorFeature, Corpus, ExperienceLedger, GroundTruth, InheritanceGraph, MacroFilter,
    MacroKey, SynthConfig,
};

fn corpus(seed: u64, pt: f64, epsilon: f64) -> (Corpus, GroundTruth) {
    let cfg = SynthConfig {
        n_authors: 150,
        n_papers: 600,
        months_span: 120,
        transmission_probability: pt,
        independent_invention_rate: epsilon,
        seed,
        ..SynthConfig::default()
    };
    generate(&cfg).unwrap()
}

fn graphs(c: &Corpus, t: &GroundTruth) -> Vec<InheritanceGraph> {
    let keys: Vec<MacroKey> = t.macros.iter().map(|m| m.body.clone()).collect();
    build_all(c, &keys).unwrap()
}

#[test]
fn reconstruction_equals_planted_transmissions() {
    for (seed, pt, eps) in [(1, 1.0, 0.0), (2, 1.0, 0.0), (3, 0.6, 0.0), (4, 0.8, 0.2), (5, 0.3, 0.5)] {
        let (c, t) = corpus(seed, pt, eps);
        let report = compare_with_truth(&graphs(&c, &t), &t).unwrap();
        assert!(report.planted_edges > 0);
        assert_eq!(report.mismatched_edges, 0, "seed {seed}: {:?}", report.mismatched_macros);
    }
}

#[test]
fn built_graphs_satisfy_invariants() {
    let (c, t) = corpus(6, 0.7, 0.1);
    for g in graphs(&c, &t) {
        assert_eq!(g.check_invariants(), Vec::<String>::new());
    }
}

#[test]
fn experience_ledger_matches_linear_rescan() {
    let (c, _) = corpus(7, 0.8, 0.0);
    let ledger = ExperienceLedger::new(&c);
    let papers = c.papers();
    for (pos, p) in papers.iter().enumerate().step_by(7) {
        for a in &p.authors {
            let global = papers[..pos].iter().filter(|q| q.authors.contains(a)).count();
            assert_eq!(ledger.global(a, &p.id).unwrap(), global);
            assert_eq!(c.global_experience(a, &p.id).unwrap(), global);
            for u in &p.macro_uses {
                let key = u.key();
                let local = papers[..pos]
                    .iter()
                    .filter(|q| q.authors.contains(a) && q.macro_uses.iter().any(|v| v.key() == key))
                    .count();
                assert_eq!(ledger.local(a, &key, &p.id).unwrap(), local);
            }
        }
    }
}

#[test]
fn trackable_set_matches_double_loop() {
    let (c, _) = corpus(8, 0.8, 0.0);
    let filter = MacroFilter::new(20, 15).unwrap();
    let mut bodies: BTreeSet<MacroKey> = BTreeSet::new();
    for p in c.papers() {
        bodies.extend(p.macro_uses.iter().map(|u| u.key()));
    }
    let mut expected = BTreeSet::new();
    for key in bodies {
        let mut adopters = BTreeSet::new();
        for p in c.papers() {
            if p.macro_uses.iter().any(|u| u.key() == key) {
                adopters.extend(p.authors.iter().cloned());
            }
        }
        if key.as_str().chars().count() > 20 && adopters.len() >= 15 {
            expected.insert(key);
        }
    }
    assert!(!expected.is_empty());
    assert_eq!(trackable_macros(&c, &filter), expected);
}

#[test]
fn macro_features_ignore_papers_after_the_cutoff() {
    let (c, t) = corpus(9, 0.8, 0.0);
    let k = 10;
    let mut checked = 0;
    for m in &t.macros {
        let Ok(prefix) = adoption_prefix(&c, &m.body, k) else { continue };
        let full = extract_features(&c, &m.body, k).unwrap();
        let cut = extract_features(&c.truncated(prefix.cutoff), &m.body, k).unwrap();
        assert_eq!(full, cut, "{}", m.body);
        assert!(full.papers_to_half_k <= full.papers_to_k);
        assert!((0.0..=1.0).contains(&full.global_clustering));
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn author_features_use_only_the_first_theta_papers() {
    let (c, _) = corpus(10, 0.8, 0.0);
    let theta = 5;
    let mut checked = 0;
    for (a, papers) in c.author_index() {
        if papers.len() <= theta {
            continue;
        }
        let cut = c.truncated(papers[theta - 1]);
        for f in AuthorFeature::ALL {
            assert_eq!(
                author_feature(&c, a, theta, f).unwrap(),
                author_feature(&cut, a, theta, f).unwrap(),
                "{a} {f}"
            );
        }
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn depth_time_profile_matches_rewalk() {
    let (c, t) = corpus(11, 0.8, 0.0);
    let gs = graphs(&c, &t);
    let mut sums: BTreeMap<usize, BTreeMap<usize, (i64, usize)>> = BTreeMap::new();
    for g in &gs {
        // independent BFS from the source with the largest reach
        let reach_of = |s: usize| {
            let mut seen = BTreeSet::from([s]);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for e in g.edges().iter().filter(|e| e.src == u) {
                    if seen.insert(e.dst) {
                        queue.push_back(e.dst);
                    }
                }
            }
            seen.len() - 1
        };
        let root = *g
            .sources()
            .iter()
            .max_by(|&&a, &&b| {
                reach_of(a).cmp(&reach_of(b)).then_with(|| {
                    (g.nodes()[b].date(), g.nodes()[b].paper()).cmp(&(g.nodes()[a].date(), g.nodes()[a].paper()))
                })
            })
            .unwrap();
        let mut depth = BTreeMap::from([(root, 0usize)]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for e in g.edges().iter().filter(|e| e.src == u) {
                if !depth.contains_key(&e.dst) {
                    depth.insert(e.dst, depth[&u] + 1);
                    queue.push_back(e.dst);
                }
            }
        }
        let max = *depth.values().max().unwrap();
        let root_date = g.nodes()[root].date();
        let group = sums.entry(max).or_default();
        for (n, d) in depth {
            let slot = group.entry(d).or_insert((0, 0));
            slot.0 += root_date.months_until(g.nodes()[n].date());
            slot.1 += 1;
        }
    }
    let profile = depth_time_profile(&seed_trees(&gs).unwrap());
    assert_eq!(profile.len(), sums.len());
    for (group, rows) in sums {
        let expected: Vec<f64> = rows.values().map(|&(s, n)| s as f64 / n as f64).collect();
        assert_eq!(profile[&group], expected, "group {group}");
    }
}

#[test]
fn teachers_are_more_experienced_than_learners() {
    let (c, t) = corpus(12, 0.8, 0.0);
    let series = edge_experience_differences(&graphs(&c, &t), &c).unwrap();
    assert!(series.median() > 0.0, "median {}", series.median());
}
