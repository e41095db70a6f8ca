//! Matched-pair comparison of collaboration longevity by inheritance-edge
//! type.
//!
//! Every unordered co-author pair is observed at its first joint paper and
//! labelled by the strongest inheritance edge between the two authors dated
//! at that paper. Treatment pairs are matched to control pairs whose first
//! joint paper falls in the same month, and the pair with more future joint
//! papers wins.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, Corpus, Month};
use crate::error::{Error, Result};
use crate::inheritance::{EdgeKind, InheritanceGraph};
use crate::stats::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    Internal,
    Terminal,
    NonEdge,
}

impl PairClass {
    pub fn is_edge(self) -> bool {
        self != PairClass::NonEdge
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollabPair {
    pub u: AuthorId,
    pub v: AuthorId,
    pub first_paper: String,
    pub month: Month,
    pub class: PairClass,
    pub future_joint_papers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    InternalVsNonEdge,
    InternalVsTerminal,
    TerminalVsNonEdge,
    EdgeVsNonEdge,
}

impl Setting {
    pub const ALL: [Setting; 4] = [
        Setting::InternalVsNonEdge,
        Setting::InternalVsTerminal,
        Setting::TerminalVsNonEdge,
        Setting::EdgeVsNonEdge,
    ];

    pub fn is_treatment(self, class: PairClass) -> bool {
        match self {
            Setting::InternalVsNonEdge | Setting::InternalVsTerminal => class == PairClass::Internal,
            Setting::TerminalVsNonEdge => class == PairClass::Terminal,
            Setting::EdgeVsNonEdge => class.is_edge(),
        }
    }

    pub fn is_control(self, class: PairClass) -> bool {
        match self {
            Setting::InternalVsTerminal => class == PairClass::Terminal,
            _ => class == PairClass::NonEdge,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::InternalVsNonEdge => "internal-vs-nonedge",
            Setting::InternalVsTerminal => "internal-vs-terminal",
            Setting::TerminalVsNonEdge => "terminal-vs-nonedge",
            Setting::EdgeVsNonEdge => "edge-vs-nonedge",
        })
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown setting {s:?}")))
    }
}

/// One pair per unordered co-author pair, at its first joint paper, in
/// `(month, first paper, u, v)` order.
pub fn enumerate_first_collaborations(corpus: &Corpus, graphs: &[InheritanceGraph]) -> Vec<CollabPair> {
    // strongest edge class per (paper position, unordered author pair)
    let mut edge_class: HashMap<(usize, usize, usize), EdgeKind> = HashMap::new();
    for g in graphs {
        for e in g.edges() {
            let (Some(pos), Some(a)) = (corpus.position(&e.via_paper), corpus.author_idx(&e.src_author)) else {
                continue;
            };
            let crate::inheritance::Node::Author { author, .. } = &g.nodes()[e.dst] else {
                continue;
            };
            let Some(b) = corpus.author_idx(author) else { continue };
            let key = (pos, a.min(b), a.max(b));
            let slot = edge_class.entry(key).or_insert(e.kind);
            // Internal < Terminal in the derived order
            *slot = (*slot).min(e.kind);
        }
    }

    let mut first: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for pos in 0..corpus.len() {
        let authors = corpus.paper_authors(pos);
        for (i, &a) in authors.iter().enumerate() {
            for &b in &authors[i + 1..] {
                let key = (a.min(b), a.max(b));
                first
                    .entry(key)
                    .and_modify(|(_, count)| *count += 1)
                    .or_insert((pos, 1));
            }
        }
    }

    let mut pairs: Vec<(usize, usize, usize, usize)> = first
        .into_iter()
        .map(|((a, b), (pos, count))| (pos, a, b, count))
        .collect();
    pairs.sort_unstable();
    pairs
        .into_iter()
        .map(|(pos, a, b, count)| {
            let paper = corpus.paper(pos);
            let class = match edge_class.get(&(pos, a, b)) {
                Some(EdgeKind::Internal) => PairClass::Internal,
                Some(EdgeKind::Terminal) => PairClass::Terminal,
                None => PairClass::NonEdge,
            };
            CollabPair {
                u: corpus.author(a).clone(),
                v: corpus.author(b).clone(),
                first_paper: paper.id.clone(),
                month: paper.date,
                class,
                future_joint_papers: count - 1,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinResult {
    pub bin_start_year: u16,
    pub n_pairs: usize,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub win_percentage: f64,
}

impl BinResult {
    fn new(bin_start_year: u16) -> Self {
        BinResult {
            bin_start_year,
            n_pairs: 0,
            wins: 0,
            losses: 0,
            ties: 0,
            win_percentage: 0.0,
        }
    }

    fn finish(&mut self) {
        self.win_percentage = win_percentage(self.wins, self.ties, self.n_pairs);
    }
}

fn win_percentage(wins: usize, ties: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * (wins as f64 + 0.5 * ties as f64) / n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedComparison {
    pub setting: Setting,
    pub bins: Vec<BinResult>,
    pub total: BinResult,
    /// Treatment pairs left without a compatible control in their month.
    pub unmatched_treatments: usize,
}

/// Two-year bins start on even years.
pub fn bin_start(year: u16) -> u16 {
    year - year % 2
}

/// Matches each treatment pair to a distinct, author-disjoint control pair
/// from the same month, drawn uniformly without replacement; ties count half.
pub fn match_and_compare(pairs: &[CollabPair], setting: Setting, seed: u64) -> Result<MatchedComparison> {
    let mut by_month: BTreeMap<Month, (Vec<&CollabPair>, Vec<&CollabPair>)> = BTreeMap::new();
    for p in pairs {
        if setting.is_treatment(p.class) {
            by_month.entry(p.month).or_default().0.push(p);
        } else if setting.is_control(p.class) {
            by_month.entry(p.month).or_default().1.push(p);
        }
    }

    let mut rng = rng(seed);
    let mut bins: BTreeMap<u16, BinResult> = BTreeMap::new();
    let mut unmatched = 0;
    let mut empty_months = Vec::new();
    for (month, (treatments, mut controls)) in by_month {
        if treatments.is_empty() {
            continue;
        }
        controls.shuffle(&mut rng);
        let mut used = vec![false; controls.len()];
        let mut matched_any = false;
        for t in treatments {
            let pick = controls.iter().enumerate().position(|(i, c)| {
                !used[i] && c.u != t.u && c.u != t.v && c.v != t.u && c.v != t.v
            });
            let Some(i) = pick else {
                unmatched += 1;
                continue;
            };
            used[i] = true;
            matched_any = true;
            let c = controls[i];
            let start = bin_start(month.year());
            let bin = bins.entry(start).or_insert_with(|| BinResult::new(start));
            bin.n_pairs += 1;
            match t.future_joint_papers.cmp(&c.future_joint_papers) {
                std::cmp::Ordering::Greater => bin.wins += 1,
                std::cmp::Ordering::Less => bin.losses += 1,
                std::cmp::Ordering::Equal => bin.ties += 1,
            }
        }
        if !matched_any {
            empty_months.push(month);
        }
    }

    if bins.is_empty() {
        return Err(Error::NoMatches {
            setting: setting.to_string(),
            empty_months,
        });
    }
    let mut total = BinResult::new(0);
    let mut bins: Vec<BinResult> = bins.into_values().collect();
    for b in &mut bins {
        b.finish();
        total.n_pairs += b.n_pairs;
        total.wins += b.wins;
        total.losses += b.losses;
        total.ties += b.ties;
    }
    total.bin_start_year = bins[0].bin_start_year;
    total.finish();
    Ok(MatchedComparison {
        setting,
        bins,
        total,
        unmatched_treatments: unmatched,
    })
}

/// Any inheritance edge against no edge.
pub fn arbitrary_vs_edge(pairs: &[CollabPair], seed: u64) -> Result<MatchedComparison> {
    match_and_compare(pairs, Setting::EdgeVsNonEdge, seed)
}

/// Permutes pair classes within each month, keeping the month's class
/// counts; the result carries no association between class and longevity.
pub fn shuffle_classes(pairs: &[CollabPair], seed: u64) -> Vec<CollabPair> {
    let mut rng = rng(seed);
    let mut out = pairs.to_vec();
    let mut by_month: BTreeMap<Month, Vec<usize>> = BTreeMap::new();
    for (i, p) in out.iter().enumerate() {
        by_month.entry(p.month).or_default().push(i);
    }
    for idx in by_month.values() {
        let mut classes: Vec<PairClass> = idx.iter().map(|&i| out[i].class).collect();
        classes.shuffle(&mut rng);
        for (&i, c) in idx.iter().zip(classes) {
            out[i].class = c;
        }
    }
    out
}
