//! Corpus data model: papers, authors, months, and the experience ledger.
//!
//! Papers are kept in a single chronological order, `(date, id)`, and every
//! notion of "earlier" in the crate refers to positions in that order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::macro_extract::{extract_macros, MacroKey};

/// Normalized author identifier.
///
/// Normalization trims, case-folds and collapses internal whitespace; it does
/// not attempt any further disambiguation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AuthorId(String);

impl AuthorId {
    pub fn new(raw: &str) -> Result<Self> {
        let normalized = raw
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        if normalized.is_empty() {
            return Err(Error::InvalidAuthor(raw.to_string()));
        }
        Ok(AuthorId(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for AuthorId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        AuthorId::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// Calendar month, the time resolution of the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    year: u16,
    month: u8,
}

impl Month {
    pub const MIN_YEAR: u16 = 1900;
    pub const MAX_YEAR: u16 = 2100;

    pub fn new(year: u16, month: u8) -> Result<Self> {
        if !(Self::MIN_YEAR..=Self::MAX_YEAR).contains(&year) || !(1..=12).contains(&month) {
            return Err(Error::InvalidDate(format!("{year:04}-{month:02}")));
        }
        Ok(Month { year, month })
    }

    pub fn year(self) -> u16 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months since year 0, i.e. `year * 12 + month - 1`.
    pub fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    pub fn from_ordinal(ordinal: i64) -> Result<Self> {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        let year = u16::try_from(year).map_err(|_| Error::InvalidDate(ordinal.to_string()))?;
        Month::new(year, month as u8)
    }

    /// Signed number of months from `self` to `later`.
    pub fn months_until(self, later: Month) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDate(s.to_string());
        let bytes = s.as_bytes();
        if bytes.len() != 7 || bytes[4] != b'-' {
            return Err(bad());
        }
        let digits = |r: std::ops::Range<usize>| {
            if bytes[r.clone()].iter().all(u8::is_ascii_digit) {
                s[r].parse::<u16>().map_err(|_| bad())
            } else {
                Err(bad())
            }
        };
        let year = digits(0..4)?;
        let month = digits(5..7)?;
        Month::new(year, month as u8).map_err(|_| bad())
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One macro definition as it appears in a paper: the name (without the
/// leading backslash) and the raw body.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroUse {
    pub name: String,
    pub body: String,
}

impl MacroUse {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        MacroUse {
            name: name.into(),
            body: body.into(),
        }
    }

    pub fn key(&self) -> MacroKey {
        MacroKey::new(&self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Paper {
    pub id: String,
    pub date: Month,
    pub authors: Vec<AuthorId>,
    #[serde(rename = "macros")]
    pub macro_uses: Vec<MacroUse>,
}

impl Paper {
    pub fn new(
        id: impl Into<String>,
        date: Month,
        authors: Vec<AuthorId>,
        macro_uses: Vec<MacroUse>,
    ) -> Self {
        Paper {
            id: id.into(),
            date,
            authors,
            macro_uses,
        }
    }

    /// Name under which this paper defines `key`, if it uses the body.
    pub fn name_for(&self, key: &MacroKey) -> Option<&str> {
        self.macro_uses
            .iter()
            .find(|u| MacroKey::new(&u.body) == *key)
            .map(|u| u.name.as_str())
    }
}

/// How the `macros` of a corpus record are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    /// Records carry a `macros` array of `{name, body}` objects.
    PreExtracted,
    /// Records carry a LaTeX `source` string that is run through the extractor.
    RawLatex,
}

/// Counters collected while loading.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub skipped_definitions: usize,
}

#[derive(Deserialize)]
struct Record {
    id: String,
    date: String,
    authors: Vec<String>,
    #[serde(default)]
    macros: Option<Vec<MacroUse>>,
    #[serde(default)]
    source: Option<String>,
}

/// Immutable, chronologically indexed collection of papers.
///
/// Authors and macro bodies are interned to dense indices; the public
/// accessors translate between the two representations.
#[derive(Clone, Debug)]
pub struct Corpus {
    papers: Vec<Paper>,
    by_id: HashMap<String, usize>,
    authors: Vec<AuthorId>,
    author_lookup: HashMap<AuthorId, usize>,
    author_papers: Vec<Vec<usize>>,
    macros: Vec<MacroKey>,
    macro_lookup: HashMap<MacroKey, usize>,
    macro_papers: Vec<Vec<usize>>,
    paper_authors: Vec<Vec<usize>>,
    paper_macros: Vec<Vec<usize>>,
}

impl Corpus {
    /// Validates and indexes `papers`, sorting them by `(date, id)`.
    pub fn new(mut papers: Vec<Paper>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(papers.len());
        for paper in &papers {
            if !seen.insert(paper.id.as_str()) {
                return Err(Error::DuplicatePaper(paper.id.clone()));
            }
            validate_authors(paper)?;
            if let Some(u) = paper.macro_uses.iter().find(|u| u.name.is_empty()) {
                return Err(Error::Record {
                    line: 0,
                    message: format!("paper {:?} has a macro with empty name (body {:?})", paper.id, u.body),
                });
            }
        }
        papers.sort_by(|a, b| (a.date, &a.id).cmp(&(b.date, &b.id)));

        let by_id = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();

        let mut author_set: Vec<AuthorId> = papers.iter().flat_map(|p| p.authors.iter().cloned()).collect();
        author_set.sort();
        author_set.dedup();
        let author_lookup: HashMap<AuthorId, usize> =
            author_set.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();

        let keys_per_paper: Vec<Vec<MacroKey>> = papers
            .iter()
            .map(|p| {
                let mut keys: Vec<MacroKey> = p.macro_uses.iter().map(MacroUse::key).collect();
                keys.sort();
                keys.dedup();
                keys
            })
            .collect();
        let mut macro_set: Vec<MacroKey> = keys_per_paper.iter().flatten().cloned().collect();
        macro_set.sort();
        macro_set.dedup();
        let macro_lookup: HashMap<MacroKey, usize> =
            macro_set.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let mut author_papers = vec![Vec::new(); author_set.len()];
        let mut macro_papers = vec![Vec::new(); macro_set.len()];
        let mut paper_authors = Vec::with_capacity(papers.len());
        let mut paper_macros = Vec::with_capacity(papers.len());
        for (pos, (paper, keys)) in papers.iter().zip(&keys_per_paper).enumerate() {
            let aidx: Vec<usize> = paper.authors.iter().map(|a| author_lookup[a]).collect();
            for &a in &aidx {
                author_papers[a].push(pos);
            }
            // keys are sorted and macro indices follow key order, so midx is sorted
            let midx: Vec<usize> = keys.iter().map(|k| macro_lookup[k]).collect();
            for &m in &midx {
                macro_papers[m].push(pos);
            }
            paper_authors.push(aidx);
            paper_macros.push(midx);
        }

        Ok(Corpus {
            papers,
            by_id,
            authors: author_set,
            author_lookup,
            author_papers,
            macros: macro_set,
            macro_lookup,
            macro_papers,
            paper_authors,
            paper_macros,
        })
    }

    pub fn read<R: BufRead>(reader: R, mode: LoadMode) -> Result<(Self, LoadReport)> {
        let mut report = LoadReport::default();
        let mut papers = Vec::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::Record {
                line: lineno,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let (paper, skipped) = parse_record(&line, mode).map_err(|e| match e {
                Error::Record { message, .. } => Error::Record { line: lineno, message },
                other => Error::Record {
                    line: lineno,
                    message: other.to_string(),
                },
            })?;
            if let Some(first) = ids.insert(paper.id.clone(), lineno) {
                return Err(Error::Record {
                    line: lineno,
                    message: format!("duplicate paper id {:?} (first seen on line {first})", paper.id),
                });
            }
            report.records += 1;
            report.skipped_definitions += skipped;
            papers.push(paper);
        }
        Ok((Corpus::new(papers)?, report))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for paper in &self.papers {
            serde_json::to_writer(&mut out, paper)?;
            out.write_all(b"\n").map_err(|e| Error::Io {
                path: "<output>".into(),
                source: e,
            })?;
        }
        Ok(())
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn paper(&self, pos: usize) -> &Paper {
        &self.papers[pos]
    }

    /// Chronological position of a paper.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn authors(&self) -> &[AuthorId] {
        &self.authors
    }

    pub fn author(&self, idx: usize) -> &AuthorId {
        &self.authors[idx]
    }

    pub fn author_idx(&self, author: &AuthorId) -> Option<usize> {
        self.author_lookup.get(author).copied()
    }

    /// Chronological paper positions of an author, by author index.
    pub fn papers_of(&self, author_idx: usize) -> &[usize] {
        &self.author_papers[author_idx]
    }

    pub fn author_index(&self) -> impl Iterator<Item = (&AuthorId, &[usize])> {
        self.authors
            .iter()
            .zip(&self.author_papers)
            .map(|(a, p)| (a, p.as_slice()))
    }

    pub fn macro_keys(&self) -> &[MacroKey] {
        &self.macros
    }

    pub fn macro_key(&self, idx: usize) -> &MacroKey {
        &self.macros[idx]
    }

    pub fn macro_idx(&self, key: &MacroKey) -> Option<usize> {
        self.macro_lookup.get(key).copied()
    }

    /// Chronological positions of the papers using a macro body.
    pub fn macro_papers(&self, macro_idx: usize) -> &[usize] {
        &self.macro_papers[macro_idx]
    }

    /// Author indices of the paper at `pos`, in the paper's author order.
    pub fn paper_authors(&self, pos: usize) -> &[usize] {
        &self.paper_authors[pos]
    }

    /// Sorted macro indices used by the paper at `pos`.
    pub fn paper_macros(&self, pos: usize) -> &[usize] {
        &self.paper_macros[pos]
    }

    pub fn paper_uses(&self, pos: usize, macro_idx: usize) -> bool {
        self.paper_macros[pos].binary_search(&macro_idx).is_ok()
    }

    /// Distinct authors over all papers using the body.
    pub fn macro_adopters(&self, macro_idx: usize) -> usize {
        let mut seen = HashSet::new();
        for &pos in &self.macro_papers[macro_idx] {
            seen.extend(self.paper_authors[pos].iter().copied());
        }
        seen.len()
    }

    fn require(&self, author: &AuthorId, before: &str) -> Result<(usize, usize)> {
        let a = self
            .author_idx(author)
            .ok_or_else(|| Error::UnknownAuthor(author.to_string()))?;
        let p = self
            .position(before)
            .ok_or_else(|| Error::UnknownPaper(before.to_string()))?;
        Ok((a, p))
    }

    /// Papers by `author` strictly before paper `before` in corpus order.
    pub fn global_experience(&self, author: &AuthorId, before: &str) -> Result<usize> {
        let (a, p) = self.require(author, before)?;
        Ok(self.global_experience_at(a, p))
    }

    pub fn global_experience_at(&self, author_idx: usize, pos: usize) -> usize {
        self.author_papers[author_idx].partition_point(|&q| q < pos)
    }

    /// Papers by `author` using body `key` strictly before paper `before`.
    pub fn local_experience(&self, author: &AuthorId, key: &MacroKey, before: &str) -> Result<usize> {
        let (a, p) = self.require(author, before)?;
        let Some(m) = self.macro_idx(key) else {
            return Ok(0);
        };
        Ok(self.author_papers[a][..self.global_experience_at(a, p)]
            .iter()
            .filter(|&&q| self.paper_uses(q, m))
            .count())
    }

    /// Copy of the corpus holding only papers at positions `..=last`.
    pub fn truncated(&self, last: usize) -> Corpus {
        let papers = self.papers[..=last.min(self.papers.len().saturating_sub(1))].to_vec();
        Corpus::new(papers).expect("prefix of a valid corpus is valid")
    }
}

fn validate_authors(paper: &Paper) -> Result<()> {
    if paper.authors.is_empty() {
        return Err(Error::NoAuthors(paper.id.clone()));
    }
    let mut seen = HashSet::new();
    for a in &paper.authors {
        if !seen.insert(a) {
            return Err(Error::DuplicateAuthor {
                paper: paper.id.clone(),
                author: a.to_string(),
            });
        }
    }
    Ok(())
}

fn parse_record(line: &str, mode: LoadMode) -> Result<(Paper, usize)> {
    let record: Record = serde_json::from_str(line).map_err(|e| Error::Record {
        line: 0,
        message: e.to_string(),
    })?;
    let date: Month = record.date.parse()?;
    let authors = record
        .authors
        .iter()
        .map(|a| AuthorId::new(a))
        .collect::<Result<Vec<_>>>()?;
    let (macro_uses, skipped) = match mode {
        LoadMode::PreExtracted => {
            let uses = record.macros.ok_or_else(|| Error::Record {
                line: 0,
                message: "missing field `macros`".to_string(),
            })?;
            (uses, 0)
        }
        LoadMode::RawLatex => {
            let source = record.source.ok_or_else(|| Error::Record {
                line: 0,
                message: "missing field `source`".to_string(),
            })?;
            let extraction = extract_macros(&source);
            (extraction.uses, extraction.skipped)
        }
    };
    let paper = Paper::new(record.id, date, authors, macro_uses);
    validate_authors(&paper)?;
    if paper.macro_uses.iter().any(|u| u.name.is_empty()) {
        return Err(Error::Record {
            line: 0,
            message: "macro with empty name".to_string(),
        });
    }
    Ok((paper, skipped))
}

pub fn load_corpus(path: &Path, mode: LoadMode) -> Result<Corpus> {
    load_corpus_with_report(path, mode).map(|(c, _)| c)
}

pub fn load_corpus_with_report(path: &Path, mode: LoadMode) -> Result<(Corpus, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Corpus::read(BufReader::new(file), mode)
}

/// Precomputed per-(author, macro) usage positions for constant-time-ish
/// local experience queries over a fixed corpus.
#[derive(Clone, Debug)]
pub struct ExperienceLedger<'c> {
    corpus: &'c Corpus,
    local: HashMap<(usize, usize), Vec<usize>>,
}

impl<'c> ExperienceLedger<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        let mut local: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for pos in 0..corpus.len() {
            for &m in corpus.paper_macros(pos) {
                for &a in corpus.paper_authors(pos) {
                    local.entry((a, m)).or_default().push(pos);
                }
            }
        }
        ExperienceLedger { corpus, local }
    }

    pub fn corpus(&self) -> &'c Corpus {
        self.corpus
    }

    pub fn global(&self, author: &AuthorId, before: &str) -> Result<usize> {
        self.corpus.global_experience(author, before)
    }

    pub fn local(&self, author: &AuthorId, key: &MacroKey, before: &str) -> Result<usize> {
        let (a, p) = self.corpus.require(author, before)?;
        Ok(self.corpus.macro_idx(key).map_or(0, |m| self.local_at(a, m, p)))
    }

    pub fn local_at(&self, author_idx: usize, macro_idx: usize, pos: usize) -> usize {
        self.local
            .get(&(author_idx, macro_idx))
            .map_or(0, |uses| uses.partition_point(|&q| q < pos))
    }

    /// Chronological positions at which the author used the body.
    pub fn uses(&self, author_idx: usize, macro_idx: usize) -> &[usize] {
        self.local
            .get(&(author_idx, macro_idx))
            .map_or(&[], Vec::as_slice)
    }
}

/// Per-author count of papers, keyed by author.
pub fn paper_counts(corpus: &Corpus) -> BTreeMap<&AuthorId, usize> {
    corpus.author_index().map(|(a, p)| (a, p.len())).collect()
}
