//! Synthetic corpora with planted macro transmission.
//!
//! Papers are generated one at a time in corpus order. Each paper gets a team
//! (a lead drawn by activity, the rest mostly former collaborators), stamps
//! the live macros its members carry, occasionally re-invents a macro nobody
//! on the team has used, and invents new ones. Every stamped use by a fresh
//! author is recorded as a transmission event from each co-author who used
//! the macro before, which is exactly what the inheritance graphs should
//! recover.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, Corpus, MacroUse, Month, Paper};
use crate::error::{Error, Result};
use crate::inheritance::{InheritanceGraph, Node};
use crate::macro_extract::MacroKey;
use crate::stats::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_authors: usize,
    pub n_papers: usize,
    pub start: Month,
    pub months_span: usize,
    pub team_min: usize,
    pub team_max: usize,
    /// Ratio between the weights of consecutive team sizes.
    pub team_shape: f64,
    /// Expected number of new macros per paper.
    pub macro_invention_rate: f64,
    /// Chance that a carried macro is stamped on a paper.
    pub transmission_probability: f64,
    /// Chance per paper of re-inventing a live macro nobody on the team used.
    pub independent_invention_rate: f64,
    pub activity_exponent: f64,
    /// Chance that a non-lead member is drawn from the lead's former collaborators.
    pub collaborator_reuse: f64,
    /// Mean number of months a macro stays in use after its invention.
    pub macro_lifetime_months: f64,
    pub name_change_probability: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_authors: 500,
            n_papers: 2000,
            start: Month::new(1995, 1).expect("valid month"),
            months_span: 240,
            team_min: 1,
            team_max: 6,
            team_shape: 0.6,
            macro_invention_rate: 0.2,
            transmission_probability: 0.5,
            independent_invention_rate: 0.0,
            activity_exponent: 2.5,
            collaborator_reuse: 0.6,
            macro_lifetime_months: 36.0,
            name_change_probability: 0.2,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("transmission_probability", self.transmission_probability),
            ("independent_invention_rate", self.independent_invention_rate),
            ("collaborator_reuse", self.collaborator_reuse),
            ("name_change_probability", self.name_change_probability),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.n_authors == 0 || self.n_papers == 0 || self.months_span == 0 {
            return Err(Error::InvalidConfig("author, paper and month counts must be positive".to_string()));
        }
        if self.team_min == 0 || self.team_min > self.team_max || self.team_max > self.n_authors {
            return Err(Error::InvalidConfig(format!(
                "infeasible team sizes {}..={} with {} authors",
                self.team_min, self.team_max, self.n_authors
            )));
        }
        if !(self.team_shape > 0.0 && self.team_shape.is_finite()) {
            return Err(Error::InvalidConfig("team_shape must be positive".to_string()));
        }
        if !(self.macro_invention_rate >= 0.0 && self.macro_invention_rate.is_finite()) {
            return Err(Error::InvalidConfig("macro_invention_rate must be non-negative".to_string()));
        }
        if !(self.activity_exponent > 1.0 && self.activity_exponent.is_finite()) {
            return Err(Error::InvalidConfig("activity_exponent must exceed 1".to_string()));
        }
        if !(self.macro_lifetime_months > 0.0 && self.macro_lifetime_months.is_finite()) {
            return Err(Error::InvalidConfig("macro_lifetime_months must be positive".to_string()));
        }
        let last = self.start.ordinal() + self.months_span as i64 - 1;
        Month::from_ordinal(last)?;
        Ok(())
    }
}

/// Strength of each planted fitness signal, all in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitnessEffects {
    /// Extra joint papers for pairs whose first paper carried an internal edge.
    pub collab_boost: f64,
    /// How much an author's activity lowers their name-change probability.
    pub loyalty: f64,
    /// How strongly macro quality sets lifetime and body style.
    pub macro_quality: f64,
}

impl FitnessEffects {
    pub const STRONG: FitnessEffects = FitnessEffects {
        collab_boost: 1.0,
        loyalty: 1.0,
        macro_quality: 1.0,
    };

    fn validate(&self) -> Result<()> {
        for (name, e) in [
            ("collab_boost", self.collab_boost),
            ("loyalty", self.loyalty),
            ("macro_quality", self.macro_quality),
        ] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidConfig(format!("effect {name} must be in [0, 1], got {e}")));
            }
        }
        Ok(())
    }
}

/// Joint papers added per boosted pair at full collaboration boost.
pub const MAX_EXTRA_JOINT_PAPERS: u32 = 2;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Invention {
    pub paper: String,
    pub authors: Vec<AuthorId>,
    pub independent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransmissionEvent {
    pub teacher: AuthorId,
    pub learner: AuthorId,
    pub paper: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroTruth {
    pub body: MacroKey,
    pub canonical_name: String,
    pub high_quality: bool,
    pub retired: Month,
    pub inventions: Vec<Invention>,
    pub events: Vec<TransmissionEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorTruth {
    pub author: AuthorId,
    pub activity: f64,
    pub change_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairBoost {
    pub u: AuthorId,
    pub v: AuthorId,
    pub first_paper: String,
    pub extra_papers: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub effects: FitnessEffects,
    pub macros: Vec<MacroTruth>,
    pub authors: Vec<AuthorTruth>,
    pub boosted_pairs: Vec<PairBoost>,
}

impl GroundTruth {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n").map_err(|source| Error::Io {
            path: "<ground truth>".into(),
            source,
        })
    }

    pub fn macro_truth(&self, key: &MacroKey) -> Option<&MacroTruth> {
        self.macros.iter().find(|m| &m.body == key)
    }
}

pub fn generate(config: &SynthConfig) -> Result<(Corpus, GroundTruth)> {
    plant_fitness_bias(config, &FitnessEffects::default())
}

pub fn plant_fitness_bias(config: &SynthConfig, effects: &FitnessEffects) -> Result<(Corpus, GroundTruth)> {
    config.validate()?;
    effects.validate()?;
    let mut g = Generator::new(config, effects);
    for i in 0..config.n_papers {
        g.paper(i);
    }
    let boosted = g.boost_pairs();
    g.finish(boosted)
}

const NAME_SUFFIXES: [&str; 8] = ["", "x", "my", "new", "alt", "v", "z", "q"];
const WORDS: [&str; 12] = [
    "alpha", "beta", "gamma", "delta", "kappa", "sigma", "omega", "theta", "lambda", "rho", "phi", "psi",
];

struct SynthMacro {
    truth: MacroTruth,
    prior: BTreeSet<usize>,
}

struct Generator<'a> {
    config: &'a SynthConfig,
    effects: &'a FitnessEffects,
    rng: ChaCha8Rng,
    authors: Vec<AuthorId>,
    activity: Vec<f64>,
    change_probability: Vec<f64>,
    lead_picker: WeightedIndex<f64>,
    team_sizes: WeightedIndex<f64>,
    collaborators: Vec<BTreeSet<usize>>,
    repertoire: Vec<BTreeSet<usize>>,
    current_name: BTreeMap<(usize, usize), String>,
    macros: Vec<SynthMacro>,
    papers: Vec<Paper>,
    teams: Vec<Vec<usize>>,
}

impl<'a> Generator<'a> {
    fn new(config: &'a SynthConfig, effects: &'a FitnessEffects) -> Self {
        let mut rng = rng(config.seed);
        let cap = config.n_papers as f64;
        let activity: Vec<f64> = (0..config.n_authors)
            .map(|_| {
                let u: f64 = 1.0 - rng.gen::<f64>();
                u.powf(-1.0 / (config.activity_exponent - 1.0)).floor().min(cap)
            })
            .collect();
        let change_probability = activity
            .iter()
            .map(|&w| {
                let below = activity.iter().filter(|&&x| x < w).count();
                let pct = below as f64 / activity.len() as f64;
                config.name_change_probability * (1.0 - effects.loyalty * pct)
            })
            .collect();
        let team_weights: Vec<f64> = (config.team_min..=config.team_max)
            .map(|s| config.team_shape.powi((s - config.team_min) as i32))
            .collect();
        Generator {
            config,
            effects,
            lead_picker: WeightedIndex::new(&activity).expect("positive activity"),
            team_sizes: WeightedIndex::new(&team_weights).expect("positive team weights"),
            rng,
            authors: (0..config.n_authors)
                .map(|i| AuthorId::new(&format!("a{i:05}")).expect("non-empty"))
                .collect(),
            activity,
            change_probability,
            collaborators: vec![BTreeSet::new(); config.n_authors],
            repertoire: vec![BTreeSet::new(); config.n_authors],
            current_name: BTreeMap::new(),
            macros: Vec::new(),
            papers: Vec::new(),
            teams: Vec::new(),
        }
    }

    fn month_of(&self, i: usize) -> Month {
        let offset = i * self.config.months_span / self.config.n_papers;
        Month::from_ordinal(self.config.start.ordinal() + offset as i64).expect("validated span")
    }

    fn team(&mut self) -> Vec<usize> {
        let size = self.config.team_min + self.team_sizes.sample(&mut self.rng);
        let lead = self.lead_picker.sample(&mut self.rng);
        let mut team = vec![lead];
        while team.len() < size {
            let former: Vec<usize> = self.collaborators[lead]
                .iter()
                .copied()
                .filter(|a| !team.contains(a))
                .collect();
            let pick = if !former.is_empty() && self.rng.gen_bool(self.config.collaborator_reuse) {
                *former.choose(&mut self.rng).expect("non-empty")
            } else {
                self.pool_member(&team)
            };
            team.push(pick);
        }
        team
    }

    fn pool_member(&mut self, team: &[usize]) -> usize {
        for _ in 0..64 {
            let a = self.lead_picker.sample(&mut self.rng);
            if !team.contains(&a) {
                return a;
            }
        }
        let rest: Vec<usize> = (0..self.config.n_authors).filter(|a| !team.contains(a)).collect();
        *rest.choose(&mut self.rng).expect("team_max <= n_authors")
    }

    fn paper(&mut self, i: usize) {
        let id = format!("p{i:06}");
        let date = self.month_of(i);
        let team = self.team();

        // live macros carried by the team, dropping retired ones as we go
        let mut carried = BTreeSet::new();
        for &a in &team {
            let macros = &self.macros;
            self.repertoire[a].retain(|&m| macros[m].truth.retired > date);
            carried.extend(self.repertoire[a].iter().copied());
        }
        let p = self.config.transmission_probability;
        let mut stamped: Vec<usize> = carried.into_iter().filter(|_| self.rng.gen_bool(p)).collect();

        let mut reinvented = None;
        if self.config.independent_invention_rate > 0.0 && self.rng.gen_bool(self.config.independent_invention_rate) {
            let candidates: Vec<usize> = (0..self.macros.len())
                .filter(|&m| self.macros[m].truth.retired > date && team.iter().all(|a| !self.macros[m].prior.contains(a)))
                .collect();
            if let Some(&m) = candidates.choose(&mut self.rng) {
                reinvented = Some(m);
            }
        }

        let rate = self.config.macro_invention_rate;
        let new_count = rate.floor() as usize + usize::from(self.rng.gen_bool(rate.fract()));
        let mut uses = Vec::new();

        for &m in &stamped {
            let fresh: Vec<usize> = team.iter().copied().filter(|a| !self.macros[m].prior.contains(a)).collect();
            let teachers: Vec<usize> = team.iter().copied().filter(|a| self.macros[m].prior.contains(a)).collect();
            for &l in &fresh {
                for &t in &teachers {
                    self.macros[m].truth.events.push(TransmissionEvent {
                        teacher: self.authors[t].clone(),
                        learner: self.authors[l].clone(),
                        paper: id.clone(),
                    });
                }
            }
            let writer = if teachers.contains(&team[0]) { team[0] } else { teachers[0] };
            let name = self.writer_name(writer, m);
            uses.push((m, name));
        }
        if let Some(m) = reinvented {
            let name = self.random_name(m, None);
            self.macros[m].truth.inventions.push(Invention {
                paper: id.clone(),
                authors: team.iter().map(|&a| self.authors[a].clone()).collect(),
                independent: true,
            });
            stamped.push(m);
            uses.push((m, name));
        }
        for _ in 0..new_count {
            let m = self.invent(&id, date, &team);
            let name = self.macros[m].truth.canonical_name.clone();
            stamped.push(m);
            uses.push((m, name));
        }

        for (m, name) in &uses {
            for &a in &team {
                self.macros[*m].prior.insert(a);
                self.repertoire[a].insert(*m);
                self.current_name.insert((a, *m), name.clone());
            }
        }
        for &a in &team {
            for &b in &team {
                if a != b {
                    self.collaborators[a].insert(b);
                }
            }
        }

        let macro_uses = uses
            .into_iter()
            .map(|(m, name)| MacroUse::new(name, self.macros[m].truth.body.as_str()))
            .collect();
        let authors = team.iter().map(|&a| self.authors[a].clone()).collect();
        self.papers.push(Paper::new(id, date, authors, macro_uses));
        self.teams.push(team);
    }

    fn writer_name(&mut self, writer: usize, m: usize) -> String {
        let current = self.current_name[&(writer, m)].clone();
        if self.rng.gen_bool(self.change_probability[writer]) {
            self.random_name(m, Some(&current))
        } else {
            current
        }
    }

    fn random_name(&mut self, m: usize, avoid: Option<&str>) -> String {
        let base = &self.macros[m].truth.canonical_name;
        let options: Vec<String> = NAME_SUFFIXES
            .iter()
            .map(|s| format!("{base}{s}"))
            .filter(|n| Some(n.as_str()) != avoid)
            .collect();
        options.choose(&mut self.rng).expect("several suffixes").clone()
    }

    fn invent(&mut self, paper: &str, date: Month, team: &[usize]) -> usize {
        let m = self.macros.len();
        let tag = letters(m);
        let high_quality = self.rng.gen_bool(0.5);
        let e = self.effects.macro_quality;
        let coded = self.rng.gen_bool(e);
        let math_style = if coded { high_quality } else { self.rng.gen_bool(0.5) };
        let w1 = *WORDS.choose(&mut self.rng).expect("words");
        let w2 = *WORDS.choose(&mut self.rng).expect("words");
        let body = if math_style {
            format!("${{\\mathcal{{{w1}}}}}_{{\\mathrm{{{tag}}}^{{{w2}}}}}$")
        } else {
            format!("\\textsf{{{w1}}}\\,\\mbox{{{tag} {w2}}}")
        };
        let mean = self.config.macro_lifetime_months;
        let scale = if high_quality { 1.0 + e } else { 1.0 - 0.5 * e };
        let life = (mean * scale * self.rng.gen_range(0.5..1.5)).round().max(1.0) as i64;
        let retired = Month::from_ordinal(date.ordinal() + life)
            .unwrap_or_else(|_| Month::new(2100, 12).expect("valid month"));
        self.macros.push(SynthMacro {
            truth: MacroTruth {
                body: MacroKey::new(&body),
                canonical_name: format!("m{tag}"),
                high_quality,
                retired,
                inventions: vec![Invention {
                    paper: paper.to_string(),
                    authors: team.iter().map(|&a| self.authors[a].clone()).collect(),
                    independent: false,
                }],
                events: Vec::new(),
            },
            prior: BTreeSet::new(),
        });
        m
    }

    /// Pairs whose first joint paper carries an internal transmission.
    fn internal_first_pairs(&self) -> Vec<(usize, usize, usize)> {
        let index: BTreeMap<&AuthorId, usize> = self.authors.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut first: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (pos, team) in self.teams.iter().enumerate() {
            for (i, &a) in team.iter().enumerate() {
                for &b in &team[i + 1..] {
                    first.entry((a.min(b), a.max(b))).or_insert(pos);
                }
            }
        }
        let mut internal = BTreeSet::new();
        for m in &self.macros {
            let teachers: BTreeSet<&AuthorId> = m.truth.events.iter().map(|e| &e.teacher).collect();
            for e in &m.truth.events {
                if !teachers.contains(&e.learner) {
                    continue;
                }
                let (t, l) = (index[&e.teacher], index[&e.learner]);
                let key = (t.min(l), t.max(l));
                if self.papers[first[&key]].id == e.paper {
                    internal.insert((first[&key], key.0, key.1));
                }
            }
        }
        internal.into_iter().collect()
    }

    fn boost_pairs(&mut self) -> Vec<PairBoost> {
        if self.effects.collab_boost == 0.0 {
            return Vec::new();
        }
        let last = self.month_of(self.config.n_papers - 1);
        let mut boosts = Vec::new();
        for (pos, u, v) in self.internal_first_pairs() {
            let extra = (0..MAX_EXTRA_JOINT_PAPERS)
                .filter(|_| self.rng.gen_bool(self.effects.collab_boost))
                .count() as u32;
            if extra == 0 {
                continue;
            }
            let from = self.papers[pos].date.ordinal() + 1;
            let first_paper = self.papers[pos].id.clone();
            for _ in 0..extra {
                let ordinal = if from > last.ordinal() { last.ordinal() } else { self.rng.gen_range(from..=last.ordinal()) };
                let id = format!("p{:06}", self.papers.len());
                let date = Month::from_ordinal(ordinal).expect("within span");
                let authors = vec![self.authors[u].clone(), self.authors[v].clone()];
                self.papers.push(Paper::new(id, date, authors, Vec::new()));
            }
            boosts.push(PairBoost {
                u: self.authors[u].clone(),
                v: self.authors[v].clone(),
                first_paper,
                extra_papers: extra,
            });
        }
        boosts
    }

    fn finish(self, boosted_pairs: Vec<PairBoost>) -> Result<(Corpus, GroundTruth)> {
        let corpus = Corpus::new(self.papers)?;
        let authors = self
            .authors
            .into_iter()
            .zip(self.activity)
            .zip(self.change_probability)
            .map(|((author, activity), change_probability)| AuthorTruth {
                author,
                activity,
                change_probability,
            })
            .collect();
        let truth = GroundTruth {
            seed: self.config.seed,
            effects: *self.effects,
            macros: self.macros.into_iter().map(|m| m.truth).collect(),
            authors,
            boosted_pairs,
        };
        Ok((corpus, truth))
    }
}

/// Lowercase base-26 tag, so bodies and names stay made of letters.
fn letters(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Edge endpoint as the oracle sees it: an author, or the paper a source
/// supernode stands for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeSource {
    Author(AuthorId),
    Source(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeDescriptor {
    pub src: EdgeSource,
    pub dst: AuthorId,
    pub via_paper: String,
    pub src_author: AuthorId,
}

/// The planted events of one macro with teachers from an invention paper
/// re-rooted at that paper's supernode.
pub fn expected_edges(truth: &MacroTruth) -> Vec<EdgeDescriptor> {
    let mut inventor_of: BTreeMap<&AuthorId, &str> = BTreeMap::new();
    for inv in &truth.inventions {
        for a in &inv.authors {
            inventor_of.entry(a).or_insert(&inv.paper);
        }
    }
    let mut out: Vec<EdgeDescriptor> = truth
        .events
        .iter()
        .map(|e| EdgeDescriptor {
            src: match inventor_of.get(&e.teacher) {
                Some(paper) => EdgeSource::Source(paper.to_string()),
                None => EdgeSource::Author(e.teacher.clone()),
            },
            dst: e.learner.clone(),
            via_paper: e.paper.clone(),
            src_author: e.teacher.clone(),
        })
        .collect();
    out.sort();
    out
}

pub fn graph_edges(graph: &InheritanceGraph) -> Vec<EdgeDescriptor> {
    let endpoint = |id: usize| match &graph.nodes()[id] {
        Node::Author { author, .. } => EdgeSource::Author(author.clone()),
        Node::Source { paper, .. } => EdgeSource::Source(paper.clone()),
    };
    let mut out: Vec<EdgeDescriptor> = graph
        .edges()
        .iter()
        .map(|e| {
            let EdgeSource::Author(dst) = endpoint(e.dst) else {
                unreachable!("edges never enter a source")
            };
            EdgeDescriptor {
                src: endpoint(e.src),
                dst,
                via_paper: e.via_paper.clone(),
                src_author: e.src_author.clone(),
            }
        })
        .collect();
    out.sort();
    out
}

/// Size of the symmetric multiset difference between two sorted lists.
pub fn multiset_difference<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut diff) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                diff += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                diff += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    diff + (a.len() - i) + (b.len() - j)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub macros: usize,
    pub planted_edges: usize,
    pub reconstructed_edges: usize,
    pub mismatched_edges: usize,
    /// Bodies whose edge multisets differ.
    pub mismatched_macros: Vec<MacroKey>,
}

/// Compares graphs (one per ground-truth macro, matched by body) against
/// the planted events.
pub fn compare_with_truth(graphs: &[InheritanceGraph], truth: &GroundTruth) -> Result<OracleReport> {
    let by_key: BTreeMap<&MacroKey, &InheritanceGraph> = graphs.iter().map(|g| (g.macro_key(), g)).collect();
    let mut report = OracleReport::default();
    for m in &truth.macros {
        let g = by_key
            .get(&m.body)
            .ok_or_else(|| Error::UnknownMacro(m.body.to_string()))?;
        let planted = expected_edges(m);
        let built = graph_edges(g);
        let diff = multiset_difference(&planted, &built);
        report.macros += 1;
        report.planted_edges += planted.len();
        report.reconstructed_edges += built.len();
        report.mismatched_edges += diff;
        if diff > 0 {
            report.mismatched_macros.push(m.body.clone());
        }
    }
    Ok(report)
}
