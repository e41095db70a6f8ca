//! Macro fitness: the σ(k) balanced prediction task.
//!
//! A macro's fitness is the number of distinct authors who ever use its body.
//! Among macros reaching at least `k` adopters, σ(k) is the lower median
//! fitness; a macro is labelled positive when its fitness is at least σ(k).
//! Features only look at the corpus up to the paper on which the k-th
//! adopter appears.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::macro_extract::MacroKey;
use crate::stats::{nearest_rank, stratified_split, train_and_score, LogisticConfig};

pub const MIN_INSTANCES: usize = 50;

/// `(sigma_k, number of macros with fitness >= k)`.
pub fn sigma_from_fitness(fitness: &[usize], k: usize) -> Result<(usize, usize)> {
    let qualifying: Vec<usize> = fitness.iter().copied().filter(|&f| f >= k).collect();
    let sigma = nearest_rank(&qualifying, 50.0).ok_or_else(|| {
        Error::EmptyInput(format!("no macro reaches {k} adopters"))
    })?;
    Ok((sigma, qualifying.len()))
}

pub fn macro_fitness(corpus: &Corpus, key: &MacroKey) -> Result<usize> {
    corpus
        .macro_idx(key)
        .map(|m| corpus.macro_adopters(m))
        .ok_or_else(|| Error::UnknownMacro(key.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sigma {
    pub k: usize,
    pub sigma: usize,
    pub instances: usize,
}

/// σ(k) over the candidate bodies (all corpus bodies when `None`).
pub fn sigma(corpus: &Corpus, k: usize, candidates: Option<&[MacroKey]>) -> Result<Sigma> {
    let fitness: Vec<usize> = match candidates {
        Some(keys) => keys.iter().map(|key| macro_fitness(corpus, key)).collect::<Result<_>>()?,
        None => (0..corpus.macro_keys().len()).map(|m| corpus.macro_adopters(m)).collect(),
    };
    let (sigma, instances) = sigma_from_fitness(&fitness, k)?;
    Ok(Sigma { k, sigma, instances })
}

/// Counts over the characters of a normalized body.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyFeatures {
    pub length: usize,
    pub dollar_count: usize,
    pub non_alnum_count: usize,
    pub max_brace_depth: usize,
}

/// Escaped braces (`\{`, `\}`) do not open or close a group.
pub fn body_features(body: &str) -> BodyFeatures {
    let mut f = BodyFeatures::default();
    let mut depth = 0usize;
    let mut escaped = false;
    for c in body.chars() {
        f.length += 1;
        if c == '$' {
            f.dollar_count += 1;
        }
        if !c.is_alphanumeric() {
            f.non_alnum_count += 1;
        }
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '{' => {
                depth += 1;
                f.max_brace_depth = f.max_brace_depth.max(depth);
            }
            '}' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    f
}

/// Mean local clustering (nodes of degree < 2 contribute 0) and global
/// clustering (closed over connected triples) of a simple undirected graph.
pub fn clustering_coefficients(n: usize, edges: &[(usize, usize)]) -> (f64, f64) {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    let mut local_sum = 0.0;
    let mut closed = 0usize;
    let mut triples = 0usize;
    for nbrs in &adj {
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        let nbrs: Vec<usize> = nbrs.iter().copied().collect();
        let mut links = 0usize;
        for (i, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[i + 1..] {
                if adj[x].contains(&y) {
                    links += 1;
                }
            }
        }
        let pairs = d * (d - 1) / 2;
        local_sum += links as f64 / pairs as f64;
        closed += links;
        triples += pairs;
    }
    let local = if n == 0 { 0.0 } else { local_sum / n as f64 };
    let global = if triples == 0 { 0.0 } else { closed as f64 / triples as f64 };
    (local, global)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroFeatureVector {
    pub papers_to_half_k: usize,
    pub papers_to_k: usize,
    pub months_to_half_k: i64,
    pub months_to_k: i64,
    pub mean_adopter_experience: f64,
    pub local_clustering_mean: f64,
    pub global_clustering: f64,
    pub body_length: usize,
    pub dollar_count: usize,
    pub non_alnum_count: usize,
    pub max_brace_depth: usize,
}

impl MacroFeatureVector {
    pub const COLUMNS: [&'static str; 11] = [
        "papers_to_half_k",
        "papers_to_k",
        "months_to_half_k",
        "months_to_k",
        "mean_adopter_experience",
        "local_clustering_mean",
        "global_clustering",
        "body_length",
        "dollar_count",
        "non_alnum_count",
        "max_brace_depth",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.papers_to_half_k as f64,
            self.papers_to_k as f64,
            self.months_to_half_k as f64,
            self.months_to_k as f64,
            self.mean_adopter_experience,
            self.local_clustering_mean,
            self.global_clustering,
            self.body_length as f64,
            self.dollar_count as f64,
            self.non_alnum_count as f64,
            self.max_brace_depth as f64,
        ]
    }

    pub fn select(&self, subset: FeatureSubset) -> Vec<f64> {
        let v = self.values();
        subset.columns().iter().map(|&i| v[i]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSubset {
    All,
    SpeedOnly,
    NonSpeed,
    BodyOnly,
    StructuralOnly,
}

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 5] = [
        FeatureSubset::All,
        FeatureSubset::SpeedOnly,
        FeatureSubset::NonSpeed,
        FeatureSubset::BodyOnly,
        FeatureSubset::StructuralOnly,
    ];

    /// Indices into [`MacroFeatureVector::COLUMNS`].
    pub fn columns(self) -> &'static [usize] {
        match self {
            FeatureSubset::All => &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            FeatureSubset::SpeedOnly => &[0, 1, 2, 3],
            FeatureSubset::NonSpeed => &[4, 5, 6, 7, 8, 9, 10],
            FeatureSubset::BodyOnly => &[7, 8, 9, 10],
            FeatureSubset::StructuralOnly => &[5, 6],
        }
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSubset::All => "all",
            FeatureSubset::SpeedOnly => "speed-only",
            FeatureSubset::NonSpeed => "non-speed",
            FeatureSubset::BodyOnly => "body-only",
            FeatureSubset::StructuralOnly => "structural-only",
        })
    }
}

impl std::str::FromStr for FeatureSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSubset::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown feature subset {s:?}")))
    }
}

/// The first `k` distinct adopters of a body and where they appeared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdoptionPrefix {
    /// `(author index, paper position)` in adoption order.
    pub adopters: Vec<(usize, usize)>,
    /// Position of the paper on which the k-th adopter appears.
    pub cutoff: usize,
    pub half_cutoff: usize,
    pub papers_to_half_k: usize,
    pub papers_to_k: usize,
}

pub fn adoption_prefix(corpus: &Corpus, key: &MacroKey, k: usize) -> Result<AdoptionPrefix> {
    let m = corpus
        .macro_idx(key)
        .ok_or_else(|| Error::UnknownMacro(key.to_string()))?;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".to_string()));
    }
    let half = k.div_ceil(2);
    let mut seen = HashSet::new();
    let mut adopters = Vec::with_capacity(k);
    let mut half_at = None;
    for (i, &pos) in corpus.macro_papers(m).iter().enumerate() {
        for &a in corpus.paper_authors(pos) {
            if adopters.len() < k && seen.insert(a) {
                adopters.push((a, pos));
            }
        }
        if half_at.is_none() && adopters.len() >= half {
            half_at = Some((i + 1, pos));
        }
        if adopters.len() >= k {
            let (papers_to_half_k, half_cutoff) = half_at.expect("half precedes full");
            return Ok(AdoptionPrefix {
                adopters,
                cutoff: pos,
                half_cutoff,
                papers_to_half_k,
                papers_to_k: i + 1,
            });
        }
    }
    Err(Error::TooFew {
        what: format!("adopters of {key}"),
        needed: k,
        found: adopters.len(),
    })
}

/// Features of a body observed up to its k-th adopter.
pub fn extract_features(corpus: &Corpus, key: &MacroKey, k: usize) -> Result<MacroFeatureVector> {
    let prefix = adoption_prefix(corpus, key, k)?;
    let m = corpus.macro_idx(key).expect("checked by adoption_prefix");
    let first_date = corpus.paper(corpus.macro_papers(m)[0]).date;
    let months = |pos: usize| first_date.months_until(corpus.paper(pos).date);

    let experience: usize = prefix
        .adopters
        .iter()
        .map(|&(a, pos)| corpus.global_experience_at(a, pos))
        .sum();

    // co-authorship among the first k adopters on papers up to the cutoff
    let local: HashMap<usize, usize> = prefix.adopters.iter().enumerate().map(|(i, &(a, _))| (a, i)).collect();
    let mut by_paper: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, _) in &prefix.adopters {
        let papers = corpus.papers_of(a);
        for &pos in &papers[..papers.partition_point(|&q| q <= prefix.cutoff)] {
            by_paper.entry(pos).or_default().push(local[&a]);
        }
    }
    let mut edges = Vec::new();
    for members in by_paper.values() {
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                edges.push((x.min(y), x.max(y)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let (local_clustering_mean, global_clustering) = clustering_coefficients(prefix.adopters.len(), &edges);

    let body = body_features(key.as_str());
    Ok(MacroFeatureVector {
        papers_to_half_k: prefix.papers_to_half_k,
        papers_to_k: prefix.papers_to_k,
        months_to_half_k: months(prefix.half_cutoff),
        months_to_k: months(prefix.cutoff),
        mean_adopter_experience: experience as f64 / prefix.adopters.len() as f64,
        local_clustering_mean,
        global_clustering,
        body_length: body.length,
        dollar_count: body.dollar_count,
        non_alnum_count: body.non_alnum_count,
        max_brace_depth: body.max_brace_depth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroInstance {
    pub key: MacroKey,
    pub fitness: usize,
    pub label: bool,
    pub features: MacroFeatureVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroFitnessTask {
    pub k: usize,
    pub sigma: usize,
    pub instances: Vec<MacroInstance>,
}

impl MacroFitnessTask {
    /// Instances for every candidate reaching `k` adopters, in candidate order.
    pub fn build(corpus: &Corpus, k: usize, candidates: &[MacroKey]) -> Result<Self> {
        let Sigma { sigma, .. } = sigma(corpus, k, Some(candidates))?;
        let instances = candidates
            .par_iter()
            .map(|key| -> Result<Option<MacroInstance>> {
                let fitness = macro_fitness(corpus, key)?;
                if fitness < k {
                    return Ok(None);
                }
                Ok(Some(MacroInstance {
                    key: key.clone(),
                    fitness,
                    label: fitness >= sigma,
                    features: extract_features(corpus, key, k)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(MacroFitnessTask { k, sigma, instances })
    }

    pub fn dataset(&self, subset: FeatureSubset) -> (Vec<Vec<f64>>, Vec<bool>) {
        (
            self.instances.iter().map(|i| i.features.select(subset)).collect(),
            self.instances.iter().map(|i| i.label).collect(),
        )
    }
}

/// Stratified 80/20 split, logistic fit on the training part, test accuracy.
pub fn train_predict(task: &MacroFitnessTask, subset: FeatureSubset, seed: u64, cfg: &LogisticConfig) -> Result<f64> {
    let (x, y) = task.dataset(subset);
    score_dataset(&x, &y, seed, cfg)
}

pub fn score_dataset(x: &[Vec<f64>], y: &[bool], seed: u64, cfg: &LogisticConfig) -> Result<f64> {
    if x.len() < MIN_INSTANCES {
        return Err(Error::TooFew {
            what: "labelled macro instances".to_string(),
            needed: MIN_INSTANCES,
            found: x.len(),
        });
    }
    let split = stratified_split(y, 0.2, seed);
    train_and_score(x, y, &split, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorId, MacroUse, Month, Paper};

    fn month(i: i64) -> Month {
        Month::from_ordinal(2000 * 12 + i).unwrap()
    }

    fn paper(id: &str, m: i64, authors: &[&str], body: Option<&str>) -> Paper {
        Paper::new(
            id,
            month(m),
            authors.iter().map(|a| AuthorId::new(a).unwrap()).collect(),
            body.map(|b| vec![MacroUse::new("x", b)]).unwrap_or_default(),
        )
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_from_fitness(&[40, 50, 60], 40).unwrap(), (50, 3));
        assert_eq!(sigma_from_fitness(&[40, 50, 60, 70], 40).unwrap(), (50, 4));
        assert_eq!(sigma_from_fitness(&[10, 39, 45], 40).unwrap(), (45, 1));
        assert!(sigma_from_fitness(&[10, 39], 40).is_err());
    }

    #[test]
    fn body_counting() {
        assert_eq!(
            body_features("$x$"),
            BodyFeatures { length: 3, dollar_count: 2, non_alnum_count: 2, max_brace_depth: 0 }
        );
        assert_eq!(body_features("{a{b}}").max_brace_depth, 2);
        assert_eq!(body_features("\\{a\\}").max_brace_depth, 0);
    }

    #[test]
    fn clustering_triangle_and_star() {
        assert_eq!(clustering_coefficients(3, &[(0, 1), (1, 2), (0, 2)]), (1.0, 1.0));
        assert_eq!(clustering_coefficients(4, &[(0, 1), (0, 2), (0, 3)]), (0.0, 0.0));
        let (local, global) = clustering_coefficients(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        assert!((local - (1.0 + 1.0 + 1.0 / 3.0) / 4.0).abs() < 1e-12);
        assert!((global - 3.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn single_burst_adoption() {
        let c = Corpus::new(vec![
            paper("p1", 0, &["a", "b", "c", "d"], Some("burst body")),
            paper("p2", 5, &["e"], Some("burst body")),
        ])
        .unwrap();
        let f = extract_features(&c, &MacroKey::new("burst body"), 4).unwrap();
        assert_eq!((f.papers_to_k, f.months_to_k), (1, 0));
        assert_eq!((f.papers_to_half_k, f.months_to_half_k), (1, 0));
        assert_eq!(f.global_clustering, 1.0);
        assert_eq!(f.local_clustering_mean, 1.0);
    }

    #[test]
    fn staged_adoption() {
        let body = Some("staged body");
        let c = Corpus::new(vec![
            paper("x0", 0, &["b"], None),
            paper("p1", 1, &["a"], body),
            paper("p2", 3, &["a", "b"], body),
            paper("p3", 7, &["c"], body),
            paper("p4", 9, &["d", "a"], body),
            paper("p5", 10, &["e"], body),
        ])
        .unwrap();
        let f = extract_features(&c, &MacroKey::new("staged body"), 4).unwrap();
        // k=4 reached on p4 (4th paper, 8 months in); half (2) on p2
        assert_eq!((f.papers_to_k, f.months_to_k), (4, 8));
        assert_eq!((f.papers_to_half_k, f.months_to_half_k), (2, 2));
        // experience at adoption: a 0, b 1, c 0, d 0
        assert_eq!(f.mean_adopter_experience, 0.25);
        // edges a-b, a-d: a path, no triangles
        assert_eq!(f.global_clustering, 0.0);
        assert!(matches!(extract_features(&c, &MacroKey::new("staged body"), 6), Err(Error::TooFew { .. })));
    }

    #[test]
    fn truncation_firewall() {
        let body = Some("firewall body");
        let c = Corpus::new(vec![
            paper("p1", 0, &["a", "b"], body),
            paper("p2", 1, &["b", "c"], body),
            paper("p3", 2, &["c", "d"], None),
            paper("p4", 3, &["d", "e"], body),
            paper("p5", 4, &["a", "c"], None),
            paper("p6", 5, &["f", "g"], body),
        ])
        .unwrap();
        let key = MacroKey::new("firewall body");
        let prefix = adoption_prefix(&c, &key, 4).unwrap();
        let full = extract_features(&c, &key, 4).unwrap();
        let cut = extract_features(&c.truncated(prefix.cutoff), &key, 4).unwrap();
        assert_eq!(full, cut);
    }

    #[test]
    fn subset_names_round_trip() {
        for s in FeatureSubset::ALL {
            assert_eq!(s.to_string().parse::<FeatureSubset>().unwrap(), s);
        }
    }
}
