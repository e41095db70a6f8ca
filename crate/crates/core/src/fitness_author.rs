//! Macro-name stability and author fitness.
//!
//! An author changes the name of a body on a paper when the name differs
//! from the one on their previous use of the same body. Pooled change rates
//! by use index give the name-change curves; the per-author change rate over
//! the first `theta` papers is the predictor in the author fitness task.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, Corpus};
use crate::error::{Error, Result};
use crate::macro_extract::MacroKey;
use crate::stats::{balance_classes, nearest_rank, stratified_split, train_and_score, LogisticConfig};

/// Wide-spread bodies have strictly more than this many authors.
pub const WIDE_SPREAD_MIN_EXCLUSIVE: usize = 250;
/// Narrow-spread bodies have between these many authors, inclusive.
pub const NARROW_SPREAD_RANGE: (usize, usize) = (20, 250);
/// Early-life analyses keep uses within an author's first this-many papers.
pub const EARLY_LIFE_PAPERS: usize = 40;
pub const MAX_USE_INDEX: usize = 40;
pub const MIN_CLASS_SIZE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroSet {
    All,
    WideSpread,
    NarrowSpread,
}

impl MacroSet {
    pub const ALL: [MacroSet; 3] = [MacroSet::All, MacroSet::WideSpread, MacroSet::NarrowSpread];

    /// Membership by distinct-author count, independent of any tracking filter.
    pub fn contains(self, adopters: usize) -> bool {
        match self {
            MacroSet::All => true,
            MacroSet::WideSpread => adopters > WIDE_SPREAD_MIN_EXCLUSIVE,
            MacroSet::NarrowSpread => {
                (NARROW_SPREAD_RANGE.0..=NARROW_SPREAD_RANGE.1).contains(&adopters)
            }
        }
    }
}

impl fmt::Display for MacroSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MacroSet::All => "all",
            MacroSet::WideSpread => "wide-spread",
            MacroSet::NarrowSpread => "narrow-spread",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Life {
    Full,
    Early,
}

impl fmt::Display for Life {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Life::Full => "full",
            Life::Early => "early",
        })
    }
}

/// Name used for each macro body on each of the author's first `limit`
/// papers, grouped by body, in chronological order.
fn name_sequences(corpus: &Corpus, author_idx: usize, limit: Option<usize>) -> BTreeMap<usize, Vec<&str>> {
    let papers = corpus.papers_of(author_idx);
    let papers = &papers[..limit.map_or(papers.len(), |l| l.min(papers.len()))];
    let mut seqs: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for &pos in papers {
        let mut seen = BTreeSet::new();
        for u in &corpus.paper(pos).macro_uses {
            let Some(m) = corpus.macro_idx(&u.key()) else { continue };
            if seen.insert(m) {
                seqs.entry(m).or_default().push(&u.name);
            }
        }
    }
    seqs
}

/// `(x, changed)` for x = 2, 3, ... over the author's chronological uses of
/// the body; the first use yields no event.
fn events_of(names: &[&str]) -> Vec<(usize, bool)> {
    names
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 2, w[0] != w[1]))
        .collect()
}

pub fn name_change_events(corpus: &Corpus, author: &AuthorId, key: &MacroKey) -> Result<Vec<(usize, bool)>> {
    let a = corpus
        .author_idx(author)
        .ok_or_else(|| Error::UnknownAuthor(author.to_string()))?;
    let m = corpus
        .macro_idx(key)
        .ok_or_else(|| Error::UnknownMacro(key.to_string()))?;
    Ok(name_sequences(corpus, a, None)
        .get(&m)
        .map(|names| events_of(names))
        .unwrap_or_default())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: usize,
    pub f: f64,
    pub events: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NameChangeCurve {
    pub theta: usize,
    pub macro_set: MacroSet,
    pub life: Life,
    pub authors: usize,
    pub points: Vec<CurvePoint>,
}

/// Pooled name-change probability by use index for authors with more than
/// `theta` papers.
pub fn name_change_curve(corpus: &Corpus, theta: usize, macro_set: MacroSet, life: Life) -> Result<NameChangeCurve> {
    let in_set: Vec<bool> = (0..corpus.macro_keys().len())
        .map(|m| macro_set.contains(corpus.macro_adopters(m)))
        .collect();
    let eligible: Vec<usize> = (0..corpus.authors().len())
        .filter(|&a| corpus.papers_of(a).len() > theta)
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptyInput(format!("no authors with more than {theta} papers")));
    }
    let limit = match life {
        Life::Full => None,
        Life::Early => Some(EARLY_LIFE_PAPERS),
    };
    let mut tally = [(0usize, 0usize); MAX_USE_INDEX + 1];
    for &a in &eligible {
        for (m, names) in name_sequences(corpus, a, limit) {
            if !in_set[m] {
                continue;
            }
            for (x, changed) in events_of(&names) {
                if x <= MAX_USE_INDEX {
                    tally[x].0 += usize::from(changed);
                    tally[x].1 += 1;
                }
            }
        }
    }
    let points = (2..=MAX_USE_INDEX)
        .filter(|&x| tally[x].1 > 0)
        .map(|x| CurvePoint {
            x,
            f: tally[x].0 as f64 / tally[x].1 as f64,
            events: tally[x].1,
        })
        .collect();
    Ok(NameChangeCurve {
        theta,
        macro_set,
        life,
        authors: eligible.len(),
        points,
    })
}

/// Nearest-rank 20th and 80th percentiles of total paper counts among
/// authors with at least `theta` papers.
pub fn percentile_thresholds(corpus: &Corpus, theta: usize) -> Result<(usize, usize)> {
    let counts: Vec<usize> = corpus
        .author_index()
        .map(|(_, p)| p.len())
        .filter(|&n| n >= theta)
        .collect();
    if counts.len() < 5 {
        return Err(Error::TooFew {
            what: format!("authors with at least {theta} papers"),
            needed: 5,
            found: counts.len(),
        });
    }
    Ok((
        nearest_rank(&counts, 20.0).expect("non-empty"),
        nearest_rank(&counts, 80.0).expect("non-empty"),
    ))
}

/// Authors strictly below the 20th and strictly above the 80th percentile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessClassTask {
    pub theta: usize,
    pub low_threshold: usize,
    pub high_threshold: usize,
    pub low: Vec<AuthorId>,
    pub high: Vec<AuthorId>,
}

impl FitnessClassTask {
    pub fn build(corpus: &Corpus, theta: usize) -> Result<Self> {
        let (p20, p80) = percentile_thresholds(corpus, theta)?;
        let mut low = Vec::new();
        let mut high = Vec::new();
        for (a, papers) in corpus.author_index() {
            let n = papers.len();
            if n < theta {
                continue;
            }
            if n < p20 {
                low.push(a.clone());
            } else if n > p80 {
                high.push(a.clone());
            }
        }
        Ok(FitnessClassTask {
            theta,
            low_threshold: p20,
            high_threshold: p80,
            low,
            high,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuthorFeature {
    NameChangeRate,
    CoauthorCount,
    TotalMacroUses,
    DistinctBodies,
}

impl AuthorFeature {
    pub const ALL: [AuthorFeature; 4] = [
        AuthorFeature::NameChangeRate,
        AuthorFeature::CoauthorCount,
        AuthorFeature::TotalMacroUses,
        AuthorFeature::DistinctBodies,
    ];
}

impl fmt::Display for AuthorFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuthorFeature::NameChangeRate => "name-change-rate",
            AuthorFeature::CoauthorCount => "coauthor-count",
            AuthorFeature::TotalMacroUses => "total-macro-uses",
            AuthorFeature::DistinctBodies => "distinct-bodies",
        })
    }
}

impl std::str::FromStr for AuthorFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AuthorFeature::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown author feature {s:?}")))
    }
}

/// Feature value computed from the author's first `theta` papers only.
pub fn author_feature(corpus: &Corpus, author: &AuthorId, theta: usize, feature: AuthorFeature) -> Result<f64> {
    let a = corpus
        .author_idx(author)
        .ok_or_else(|| Error::UnknownAuthor(author.to_string()))?;
    Ok(author_feature_at(corpus, a, theta, feature))
}

fn author_feature_at(corpus: &Corpus, a: usize, theta: usize, feature: AuthorFeature) -> f64 {
    let papers = corpus.papers_of(a);
    let prefix = &papers[..theta.min(papers.len())];
    match feature {
        AuthorFeature::NameChangeRate => {
            let (changed, total) = name_sequences(corpus, a, Some(theta))
                .values()
                .flat_map(|names| events_of(names))
                .fold((0usize, 0usize), |(c, t), (_, ch)| (c + usize::from(ch), t + 1));
            if total == 0 {
                0.0
            } else {
                changed as f64 / total as f64
            }
        }
        AuthorFeature::CoauthorCount => {
            let mut co = BTreeSet::new();
            for &pos in prefix {
                co.extend(corpus.paper_authors(pos).iter().copied().filter(|&b| b != a));
            }
            co.len() as f64
        }
        AuthorFeature::TotalMacroUses => prefix.iter().map(|&pos| corpus.paper_macros(pos).len()).sum::<usize>() as f64,
        AuthorFeature::DistinctBodies => {
            let bodies: BTreeSet<usize> = prefix.iter().flat_map(|&pos| corpus.paper_macros(pos).iter().copied()).collect();
            bodies.len() as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorPrediction {
    pub theta: usize,
    pub feature: AuthorFeature,
    pub accuracy: f64,
    pub n_low: usize,
    pub n_high: usize,
    pub n_test: usize,
}

/// Labelled single-feature dataset: `(feature, is_high)` per class member.
pub fn author_dataset(corpus: &Corpus, task: &FitnessClassTask, feature: AuthorFeature) -> (Vec<Vec<f64>>, Vec<bool>) {
    let idx: HashMap<&AuthorId, usize> = corpus.authors().iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (members, label) in [(&task.low, false), (&task.high, true)] {
        for a in members {
            x.push(vec![author_feature_at(corpus, idx[a], task.theta, feature)]);
            y.push(label);
        }
    }
    (x, y)
}

/// Single-feature logistic classifier separating low- from high-fitness
/// authors; classes are balanced by undersampling before a stratified 80/20
/// split, so 50% is the chance level.
pub fn predict_author_fitness(
    corpus: &Corpus,
    theta: usize,
    feature: AuthorFeature,
    seed: u64,
    cfg: &LogisticConfig,
) -> Result<AuthorPrediction> {
    let task = FitnessClassTask::build(corpus, theta)?;
    let (x, y) = author_dataset(corpus, &task, feature);
    predict_from_dataset(&x, &y, seed, cfg).map(|(accuracy, n_test)| AuthorPrediction {
        theta,
        feature,
        accuracy,
        n_low: task.low.len(),
        n_high: task.high.len(),
        n_test,
    })
}

/// Balance, split and score a labelled single-feature dataset.
pub fn predict_from_dataset(x: &[Vec<f64>], y: &[bool], seed: u64, cfg: &LogisticConfig) -> Result<(f64, usize)> {
    let n_high = y.iter().filter(|&&l| l).count();
    let n_low = y.len() - n_high;
    if n_low.min(n_high) < MIN_CLASS_SIZE {
        return Err(Error::TooFew {
            what: "authors in the smaller fitness class".to_string(),
            needed: MIN_CLASS_SIZE,
            found: n_low.min(n_high),
        });
    }
    let keep = balance_classes(y, seed);
    let xb: Vec<Vec<f64>> = keep.iter().map(|&i| x[i].clone()).collect();
    let yb: Vec<bool> = keep.iter().map(|&i| y[i]).collect();
    let split = stratified_split(&yb, 0.2, seed.wrapping_add(1));
    let accuracy = train_and_score(&xb, &yb, &split, cfg)?;
    Ok((accuracy, split.test.len()))
}
