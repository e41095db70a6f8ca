//! Macro definition extraction from LaTeX source and the tracking filters.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, MacroUse};
use crate::error::{Error, Result};

/// Normalized macro body, the unit whose spread is tracked.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MacroKey(String);

impl MacroKey {
    pub fn new(raw: &str) -> Self {
        MacroKey(normalize_body(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Length in characters.
    pub fn len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MacroKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trims the body and collapses each internal whitespace run to one space.
pub fn normalize_body(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extraction {
    pub uses: Vec<MacroUse>,
    /// Definitions that were recognized but could not be parsed.
    pub skipped: usize,
}

const DEFINERS: [&str; 3] = ["newcommand", "renewcommand", "providecommand"];

/// Extracts `\newcommand`-family and `\def` definitions from `source`.
///
/// Bodies are returned raw (not normalized); definitions nested inside a body
/// are not re-extracted, commented-out text is ignored, and repeated
/// `(name, body)` pairs are reported once.
pub fn extract_macros(source: &str) -> Extraction {
    let text = strip_comments(source);
    let mut out = Extraction::default();
    let mut seen: HashSet<(String, MacroKey)> = HashSet::new();
    let mut i = 0;
    while i < text.len() {
        if text[i] != '\\' {
            i += 1;
            continue;
        }
        let (word, after) = control_word(&text, i + 1);
        if word.is_empty() {
            // control symbol such as \\ or \{
            i += 2;
            continue;
        }
        let parsed = if DEFINERS.contains(&word.as_str()) {
            let mut j = after;
            if text.get(j) == Some(&'*') {
                j += 1;
            }
            Some(parse_newcommand(&text, j))
        } else if word == "def" {
            Some(parse_def(&text, after))
        } else {
            None
        };
        match parsed {
            Some(Some((name, body, end))) => {
                if seen.insert((name.clone(), MacroKey::new(&body))) {
                    out.uses.push(MacroUse { name, body });
                }
                i = end;
            }
            Some(None) => {
                out.skipped += 1;
                i = after;
            }
            None => i = after,
        }
    }
    out
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '@'
}

/// Removes `%` comments (up to and including the newline, plus the next
/// line's leading blanks). Escaped characters are copied verbatim.
fn strip_comments(source: &str) -> Vec<char> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => {
                out.push('\\');
                if let Some(&next) = chars.get(i + 1) {
                    out.push(next);
                }
                i += 2;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                i += 1;
                while i < chars.len() && matches!(chars[i], ' ' | '\t') {
                    i += 1;
                }
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn control_word(text: &[char], start: usize) -> (String, usize) {
    let mut j = start;
    while j < text.len() && is_name_char(text[j]) {
        j += 1;
    }
    (text[start..j].iter().collect(), j)
}

fn skip_ws(text: &[char], mut i: usize) -> usize {
    while i < text.len() && text[i].is_whitespace() {
        i += 1;
    }
    i
}

/// Reads a control sequence name at `i` (which must point at a backslash).
fn control_sequence(text: &[char], i: usize) -> Option<(String, usize)> {
    if text.get(i) != Some(&'\\') {
        return None;
    }
    let (word, end) = control_word(text, i + 1);
    if !word.is_empty() {
        return Some((word, end));
    }
    let c = *text.get(i + 1)?;
    if c.is_whitespace() {
        return None;
    }
    Some((c.to_string(), i + 2))
}

/// Balanced `{...}` group starting at `open`; returns the inner text and the
/// index after the closing brace.
fn balanced(text: &[char], open: usize, left: char, right: char) -> Option<(String, usize)> {
    if text.get(open) != Some(&left) {
        return None;
    }
    let mut depth = 0usize;
    let mut i = open;
    while i < text.len() {
        let c = text[i];
        if c == '\\' {
            i += 2;
            continue;
        }
        if c == left {
            depth += 1;
        } else if c == right {
            depth -= 1;
            if depth == 0 {
                return Some((text[open + 1..i].iter().collect(), i + 1));
            }
        } else if left == '[' && c == '{' {
            // bracket arguments may contain brace groups with ']' inside
            let (_, end) = balanced(text, i, '{', '}')?;
            i = end;
            continue;
        }
        i += 1;
    }
    None
}

fn parse_newcommand(text: &[char], start: usize) -> Option<(String, String, usize)> {
    let mut i = skip_ws(text, start);
    let name = match text.get(i)? {
        '{' => {
            let (inner, end) = balanced(text, i, '{', '}')?;
            i = end;
            let inner: Vec<char> = inner.trim().chars().collect();
            let (name, used) = control_sequence(&inner, 0)?;
            if used != inner.len() {
                return None;
            }
            name
        }
        '\\' => {
            let (name, end) = control_sequence(text, i)?;
            i = end;
            name
        }
        _ => return None,
    };
    // [nargs] and [default]
    for _ in 0..2 {
        let j = skip_ws(text, i);
        if text.get(j) == Some(&'[') {
            let (_, end) = balanced(text, j, '[', ']')?;
            i = end;
        }
    }
    i = skip_ws(text, i);
    let (body, end) = balanced(text, i, '{', '}')?;
    Some((name, body, end))
}

fn parse_def(text: &[char], start: usize) -> Option<(String, String, usize)> {
    let i = skip_ws(text, start);
    let (name, mut i) = control_sequence(text, i)?;
    // parameter text runs up to the opening brace of the body
    while i < text.len() && text[i] != '{' {
        if text[i] == '}' {
            return None;
        }
        if text[i] == '\\' {
            i += 1;
        }
        i += 1;
    }
    let (body, end) = balanced(text, i, '{', '}')?;
    Some((name, body, end))
}

/// Tracking thresholds on body length and spread.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroFilter {
    /// Bodies must be strictly longer than this many characters.
    pub min_body_len: usize,
    /// Bodies must be used by at least this many distinct authors.
    pub min_authors: usize,
}

impl Default for MacroFilter {
    fn default() -> Self {
        MacroFilter {
            min_body_len: 20,
            min_authors: 30,
        }
    }
}

impl MacroFilter {
    pub fn new(min_body_len: usize, min_authors: usize) -> Result<Self> {
        if min_body_len == 0 || min_authors == 0 {
            return Err(Error::InvalidConfig(
                "macro filter thresholds must be positive".to_string(),
            ));
        }
        Ok(MacroFilter {
            min_body_len,
            min_authors,
        })
    }

    pub fn accepts(&self, key: &MacroKey, adopters: usize) -> bool {
        key.len() > self.min_body_len && adopters >= self.min_authors
    }
}

/// Bodies passing both tracking filters.
pub fn trackable_macros(corpus: &Corpus, filter: &MacroFilter) -> BTreeSet<MacroKey> {
    corpus
        .macro_keys()
        .iter()
        .enumerate()
        .filter(|(_, key)| key.len() > filter.min_body_len)
        .filter(|(idx, _)| corpus.macro_adopters(*idx) >= filter.min_authors)
        .map(|(_, key)| key.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(src: &str) -> Vec<(String, String)> {
        extract_macros(src)
            .uses
            .into_iter()
            .map(|u| (u.name, u.body))
            .collect()
    }

    fn p(name: &str, body: &str) -> (String, String) {
        (name.to_string(), body.to_string())
    }

    #[test]
    fn newcommand_with_nested_braces() {
        assert_eq!(
            pairs(r"\newcommand{\vbar}{$\overline{v}$}"),
            vec![p("vbar", r"$\overline{v}$")]
        );
    }

    #[test]
    fn def_with_nested_braces() {
        assert_eq!(
            pairs(r"\def\lsun{\hbox{$\rm\thinspace L_{\odot}$}}"),
            vec![p("lsun", r"\hbox{$\rm\thinspace L_{\odot}$}")]
        );
    }

    #[test]
    fn commented_definition_ignored() {
        assert!(pairs(r"% \newcommand{\x}{1}").is_empty());
        assert_eq!(pairs("a % \\def\\x{1}\n\\def\\y{2}"), vec![p("y", "2")]);
        // escaped percent is not a comment
        assert_eq!(pairs(r"\def\pct{50\%} \def\z{3}"), vec![p("pct", r"50\%"), p("z", "3")]);
        // \\% starts a comment after a line break
        assert!(pairs(r"\\% \def\x{1}").is_empty());
    }

    #[test]
    fn definer_variants() {
        let src = r"\renewcommand*{\a}[1]{x#1} \providecommand\b{y} \newcommand{\c}[2][d]{#1+#2}
                    \def\d#1#2{(#1,#2)} \newcommand*\e{\emph{e}}";
        assert_eq!(
            pairs(src),
            vec![
                p("a", "x#1"),
                p("b", "y"),
                p("c", "#1+#2"),
                p("d", "(#1,#2)"),
                p("e", r"\emph{e}"),
            ]
        );
    }

    #[test]
    fn similar_control_words_do_not_match() {
        assert!(pairs(r"\define\x{1} \newcommandx{\y}{2} \gdef\z{3}").is_empty());
    }

    #[test]
    fn nested_definitions_not_reextracted() {
        assert_eq!(
            pairs(r"\newcommand{\outer}{\def\inner{i}} \def\after{a}"),
            vec![p("outer", r"\def\inner{i}"), p("after", "a")]
        );
    }

    #[test]
    fn escaped_braces_do_not_count() {
        assert_eq!(pairs(r"\def\set{\{x\}}"), vec![p("set", r"\{x\}")]);
    }

    #[test]
    fn unbalanced_definition_skipped_and_counted() {
        let e = extract_macros(r"\def\bad{oops \newcommand{\good}{ok}");
        // scanning resumes right after the failed \def
        assert_eq!(e.skipped, 1);
        assert_eq!(
            e.uses.iter().map(|u| u.name.as_str()).collect::<Vec<_>>(),
            vec!["good"]
        );
        let e = extract_macros(r"\newcommand{}{x}");
        assert_eq!(e.skipped, 1);
        assert!(e.uses.is_empty());
    }

    #[test]
    fn duplicates_within_source_deduplicated() {
        assert_eq!(
            pairs(r"\def\a{x  y} \def\a{x y} \def\b{x y}"),
            vec![p("a", "x  y"), p("b", "x y")]
        );
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_body("  $x$ "), "$x$");
        assert_eq!(normalize_body(r"$\overline{v}$"), r"$\overline{v}$");
        assert_eq!(normalize_body("a\n\tb"), "a b");
    }

    #[test]
    fn filter_boundaries() {
        let f = MacroFilter::default();
        assert!(!f.accepts(&MacroKey::new(&"x".repeat(20)), 100));
        assert!(f.accepts(&MacroKey::new(&"x".repeat(21)), 30));
        assert!(!f.accepts(&MacroKey::new(&"x".repeat(21)), 29));
        assert!(MacroFilter::new(0, 1).is_err());
    }

    proptest! {
        #[test]
        fn normalization_idempotent(s in "[ \\t\\na-z{}$\\\\]{0,40}") {
            let once = normalize_body(&s);
            prop_assert_eq!(normalize_body(&once), once.clone());
            prop_assert_eq!(MacroKey::new(&s), MacroKey::new(&once));
        }

        #[test]
        fn extraction_never_panics_and_is_deterministic(s in "[\\\\a-z{}%#\\[\\]\\n ]{0,80}") {
            prop_assert_eq!(extract_macros(&s), extract_macros(&s));
        }

        #[test]
        fn extraction_preserves_source_order(bodies in proptest::collection::vec("[a-z]{1,6}", 1..6)) {
            let src: String = bodies
                .iter()
                .enumerate()
                .map(|(i, b)| format!("\\newcommand{{\\m{}}}{{{}}}\n", "x".repeat(i + 1), b))
                .collect();
            let got = extract_macros(&src).uses;
            prop_assert_eq!(got.len(), bodies.len());
            for (i, u) in got.iter().enumerate() {
                prop_assert_eq!(&u.name, &format!("m{}", "x".repeat(i + 1)));
                prop_assert_eq!(&u.body, &bodies[i]);
            }
        }
    }
}
