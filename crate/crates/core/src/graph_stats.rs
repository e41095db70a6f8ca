//! Descriptive statistics over a set of inheritance graphs: seed coverage,
//! time and width by BFS depth, and teacher/learner experience gaps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Month};
use crate::error::{Error, Result};
use crate::inheritance::{InheritanceGraph, Node};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value: f64,
    pub cum_fraction: f64,
}

/// Empirical CDF with one step per distinct value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub points: Vec<CdfPoint>,
    pub n: usize,
}

impl CdfSeries {
    /// Smallest value whose cumulative fraction reaches one half.
    pub fn median(&self) -> f64 {
        self.points
            .iter()
            .find(|p| p.cum_fraction >= 0.5)
            .map(|p| p.value)
            .unwrap_or(f64::NAN)
    }

    /// Fraction of samples `<= x`.
    pub fn at(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|p| p.value <= x);
        if i == 0 {
            0.0
        } else {
            self.points[i - 1].cum_fraction
        }
    }
}

pub fn cdf(values: &[f64]) -> Result<CdfSeries> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cdf of no values".to_string()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("cdf input contains NaN".to_string()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut points: Vec<CdfPoint> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let cum_fraction = (i + 1) as f64 / n as f64;
        match points.last_mut() {
            Some(last) if last.value == *v => last.cum_fraction = cum_fraction,
            _ => points.push(CdfPoint {
                value: *v,
                cum_fraction,
            }),
        }
    }
    if let Some(last) = points.last_mut() {
        last.cum_fraction = 1.0;
    }
    Ok(CdfSeries { points, n })
}

/// Reach of the seed paper over all authors of the graph (source members
/// counted individually).
pub fn largest_reachable_fraction(g: &InheritanceGraph) -> Result<f64> {
    let total = g.author_count();
    if total == 0 {
        return Err(Error::NoAuthorNodes);
    }
    let seed = g.find_seed()?;
    Ok(g.reachable_set(seed)?.len() as f64 / total as f64)
}

/// BFS tree from a graph's seed, reduced to entry dates per depth.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedTree {
    pub root_date: Month,
    pub layers: Vec<Vec<Month>>,
}

impl SeedTree {
    pub fn from_graph(g: &InheritanceGraph) -> Result<Self> {
        let seed = g.find_seed()?;
        let tree = g.bfs_tree(seed)?;
        let layers = tree
            .layers()
            .into_iter()
            .map(|layer| layer.into_iter().map(|n| g.nodes()[n].date()).collect())
            .collect();
        Ok(SeedTree {
            root_date: g.nodes()[seed].date(),
            layers,
        })
    }

    pub fn max_depth(&self) -> usize {
        self.layers.len() - 1
    }
}

pub fn seed_trees(graphs: &[InheritanceGraph]) -> Result<Vec<SeedTree>> {
    graphs.par_iter().map(SeedTree::from_graph).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthStat {
    Mean,
    Median,
}

impl std::str::FromStr for WidthStat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(WidthStat::Mean),
            "median" => Ok(WidthStat::Median),
            other => Err(Error::InvalidConfig(format!("unknown width statistic {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub depth: usize,
    pub mean_months: f64,
    pub width: f64,
}

/// Per-depth figures for trees sharing one maximum depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub group: usize,
    pub trees: usize,
    pub rows: Vec<DepthRow>,
}

fn group_by_depth(trees: &[SeedTree]) -> BTreeMap<usize, Vec<&SeedTree>> {
    let mut groups: BTreeMap<usize, Vec<&SeedTree>> = BTreeMap::new();
    for t in trees {
        groups.entry(t.max_depth()).or_default().push(t);
    }
    groups
}

/// Mean months from the root paper to each node's first use, per depth,
/// pooled over the nodes of all trees in a max-depth group.
pub fn depth_time_profile(trees: &[SeedTree]) -> BTreeMap<usize, Vec<f64>> {
    group_by_depth(trees)
        .into_iter()
        .map(|(group, members)| {
            let means = (0..=group)
                .map(|d| {
                    let (sum, count) = members
                        .iter()
                        .flat_map(|t| t.layers[d].iter().map(|m| t.root_date.months_until(*m)))
                        .fold((0i64, 0usize), |(s, c), x| (s + x, c + 1));
                    sum as f64 / count as f64
                })
                .collect();
            (group, means)
        })
        .collect()
}

/// Statistic of the node count at each depth across trees in a group.
pub fn width_profile(trees: &[SeedTree], stat: WidthStat) -> BTreeMap<usize, Vec<f64>> {
    group_by_depth(trees)
        .into_iter()
        .map(|(group, members)| {
            let widths = (0..=group)
                .map(|d| {
                    let counts: Vec<f64> = members.iter().map(|t| t.layers[d].len() as f64).collect();
                    match stat {
                        WidthStat::Mean => counts.iter().sum::<f64>() / counts.len() as f64,
                        WidthStat::Median => median(&counts),
                    }
                })
                .collect();
            (group, widths)
        })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Time and width profiles merged per group.
pub fn depth_profiles(trees: &[SeedTree], stat: WidthStat) -> Vec<DepthProfile> {
    let times = depth_time_profile(trees);
    let widths = width_profile(trees, stat);
    let sizes = group_by_depth(trees);
    times
        .into_iter()
        .map(|(group, means)| DepthProfile {
            group,
            trees: sizes[&group].len(),
            rows: means
                .into_iter()
                .zip(&widths[&group])
                .enumerate()
                .map(|(depth, (mean_months, width))| DepthRow {
                    depth,
                    mean_months,
                    width: *width,
                })
                .collect(),
        })
        .collect()
}

/// Global experience of the teaching author minus that of the learner, at
/// the transmitting paper, for every edge.
pub fn edge_experience_difference_values(
    graphs: &[InheritanceGraph],
    corpus: &Corpus,
) -> Result<Vec<i64>> {
    let per_graph: Vec<Vec<i64>> = graphs
        .par_iter()
        .map(|g| {
            g.edges()
                .iter()
                .map(|e| {
                    let pos = corpus
                        .position(&e.via_paper)
                        .ok_or_else(|| Error::UnknownPaper(e.via_paper.clone()))?;
                    let Node::Author { author, .. } = &g.nodes()[e.dst] else {
                        return Err(Error::MalformedGraph("edge into a source node".to_string()));
                    };
                    let idx = |a| corpus.author_idx(a).ok_or_else(|| Error::UnknownAuthor(a.to_string()));
                    let teacher = corpus.global_experience_at(idx(&e.src_author)?, pos) as i64;
                    let learner = corpus.global_experience_at(idx(author)?, pos) as i64;
                    Ok(teacher - learner)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_graph.into_iter().flatten().collect())
}

pub fn edge_experience_differences(graphs: &[InheritanceGraph], corpus: &Corpus) -> Result<CdfSeries> {
    let values: Vec<f64> = edge_experience_difference_values(graphs, corpus)?
        .into_iter()
        .map(|v| v as f64)
        .collect();
    cdf(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorId, MacroUse, Paper};
    use crate::inheritance::build_inheritance_graph;
    use crate::macro_extract::MacroKey;
    use proptest::prelude::*;

    const BODY: &str = "\\mathrm{graph-stats-test-body}";

    fn paper(id: &str, date: &str, authors: &[&str], uses: bool) -> Paper {
        Paper::new(
            id,
            date.parse().unwrap(),
            authors.iter().map(|a| AuthorId::new(a).unwrap()).collect(),
            if uses { vec![MacroUse::new("m", BODY)] } else { vec![] },
        )
    }

    fn graph(papers: Vec<Paper>) -> (Corpus, InheritanceGraph) {
        let c = Corpus::new(papers).unwrap();
        let g = build_inheritance_graph(&c, &MacroKey::new(BODY)).unwrap();
        (c, g)
    }

    #[test]
    fn cdf_examples() {
        let c = cdf(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.points, vec![CdfPoint { value: 1.0, cum_fraction: 1.0 }]);
        let c = cdf(&[0.4, 0.2]).unwrap();
        assert_eq!(
            c.points,
            vec![
                CdfPoint { value: 0.2, cum_fraction: 0.5 },
                CdfPoint { value: 0.4, cum_fraction: 1.0 }
            ]
        );
        assert!(cdf(&[]).is_err());
        assert!(cdf(&[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn cdf_matches_naive_counting(values in proptest::collection::vec(-20i32..20, 1..60)) {
            let xs: Vec<f64> = values.iter().map(|&v| v as f64 / 4.0).collect();
            let c = cdf(&xs).unwrap();
            for p in &c.points {
                let naive = xs.iter().filter(|&&x| x <= p.value).count() as f64 / xs.len() as f64;
                prop_assert!((p.cum_fraction - naive).abs() < 1e-12);
            }
            prop_assert!(c.points.windows(2).all(|w| w[0].value < w[1].value && w[0].cum_fraction <= w[1].cum_fraction));
            prop_assert_eq!(c.points.last().unwrap().cum_fraction, 1.0);
        }
    }

    #[test]
    fn fraction_single_source() {
        let (_, g) = graph(vec![paper("p1", "1994-05", &["a", "b"], true)]);
        assert_eq!(largest_reachable_fraction(&g).unwrap(), 0.0);
    }

    #[test]
    fn fraction_chain() {
        // seed {a} reaches the 4 chain authors out of 5 authors in total
        let (_, g) = graph(vec![
            paper("p1", "1990-01", &["a"], true),
            paper("p2", "1990-02", &["a", "b"], true),
            paper("p3", "1990-03", &["b", "c"], true),
            paper("p4", "1990-04", &["c", "d"], true),
            paper("p5", "1990-05", &["d", "e"], true),
        ]);
        assert_eq!(largest_reachable_fraction(&g).unwrap(), 4.0 / 5.0);
    }

    #[test]
    fn fraction_two_components() {
        // component of 8 authors: seed {s} plus 7 learners; second component
        // of 2 authors: source {x} plus one learner
        let mut papers = vec![paper("a0", "1990-01", &["s"], true)];
        for i in 1..=7 {
            papers.push(paper(&format!("a{i}"), "1991-01", &["s", &format!("l{i}")], true));
        }
        papers.push(paper("b0", "1992-01", &["x"], true));
        papers.push(paper("b1", "1992-02", &["x", "y"], true));
        let (_, g) = graph(papers);
        assert_eq!(g.author_count(), 10);
        assert_eq!(largest_reachable_fraction(&g).unwrap(), 7.0 / 10.0);
    }

    #[test]
    fn depth_one_after_twelve_months() {
        let (_, g) = graph(vec![
            paper("p1", "1994-05", &["r"], true),
            paper("p2", "1995-05", &["r", "c"], true),
        ]);
        let trees = seed_trees(&[g]).unwrap();
        let profile = depth_time_profile(&trees);
        assert_eq!(profile[&1], vec![0.0, 12.0]);
    }

    #[test]
    fn twenty_year_chain_to_depth_six() {
        let mut papers = vec![paper("p0", "1994-05", &["a0"], true)];
        let dates = ["1997-05", "2000-05", "2003-05", "2006-05", "2010-05", "2014-05"];
        for (i, d) in dates.iter().enumerate() {
            papers.push(paper(&format!("p{}", i + 1), d, &[&format!("a{i}"), &format!("a{}", i + 1)], true));
        }
        let (_, g) = graph(papers);
        let trees = seed_trees(&[g]).unwrap();
        let profile = depth_time_profile(&trees);
        assert_eq!(profile[&6][6], 240.0);
        assert_eq!(profile[&6][0], 0.0);
    }

    #[test]
    fn widths_chain_and_star() {
        let (_, chain) = graph(vec![
            paper("p1", "1990-01", &["a"], true),
            paper("p2", "1990-02", &["a", "b"], true),
            paper("p3", "1990-03", &["b", "c"], true),
        ]);
        let (_, star) = graph(vec![
            paper("q1", "1990-01", &["a"], true),
            paper("q2", "1990-02", &["a", "b", "c", "d"], true),
        ]);
        let w = width_profile(&seed_trees(&[chain]).unwrap(), WidthStat::Median);
        assert_eq!(w[&2], vec![1.0, 1.0, 1.0]);
        let w = width_profile(&seed_trees(&[star]).unwrap(), WidthStat::Mean);
        assert_eq!(w[&1], vec![1.0, 3.0]);
    }

    #[test]
    fn mean_and_median_widths_differ() {
        let trees = vec![
            SeedTree { root_date: "1990-01".parse().unwrap(), layers: vec![vec!["1990-01".parse().unwrap()], vec!["1990-02".parse().unwrap(); 1]] },
            SeedTree { root_date: "1990-01".parse().unwrap(), layers: vec![vec!["1990-01".parse().unwrap()], vec!["1990-02".parse().unwrap(); 2]] },
            SeedTree { root_date: "1990-01".parse().unwrap(), layers: vec![vec!["1990-01".parse().unwrap()], vec!["1990-02".parse().unwrap(); 9]] },
        ];
        assert_eq!(width_profile(&trees, WidthStat::Median)[&1][1], 2.0);
        assert_eq!(width_profile(&trees, WidthStat::Mean)[&1][1], 4.0);
        let merged = depth_profiles(&trees, WidthStat::Median);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].trees, 3);
        assert_eq!(merged[0].rows[1], DepthRow { depth: 1, mean_months: 1.0, width: 2.0 });
    }

    #[test]
    fn experience_difference_signs() {
        // teacher t has 5 earlier papers, learner l has 2
        let mut papers = Vec::new();
        for i in 0..5 {
            papers.push(paper(&format!("t{i}"), "1990-01", &["t"], i == 0));
        }
        for i in 0..2 {
            papers.push(paper(&format!("l{i}"), "1990-01", &["l"], false));
        }
        papers.push(paper("z", "1991-01", &["t", "l"], true));
        let (c, g) = graph(papers);
        assert_eq!(edge_experience_difference_values(&[g], &c).unwrap(), vec![3]);

        let (c, g) = graph(vec![
            paper("n0", "1990-01", &["novice"], true),
            paper("v0", "1990-01", &["veteran"], false),
            paper("v1", "1990-02", &["veteran"], false),
            paper("x", "1991-01", &["novice", "veteran"], true),
        ]);
        assert_eq!(edge_experience_difference_values(&[g], &c).unwrap(), vec![-1]);
    }
}
