//! Benchmark fixtures.

use macrotrace::{generate, inheritance::build_all, Corpus, InheritanceGraph, MacroKey, SynthConfig};

/// A synthetic corpus with every planted macro body and its graphs.
pub struct Fixture {
    pub corpus: Corpus,
    pub keys: Vec<MacroKey>,
    pub graphs: Vec<InheritanceGraph>,
}

pub fn fixture(n_papers: usize, n_authors: usize, seed: u64) -> Fixture {
    let cfg = SynthConfig {
        n_papers,
        n_authors,
        seed,
        ..SynthConfig::default()
    };
    let (corpus, truth) = generate(&cfg).expect("valid config");
    let keys: Vec<MacroKey> = truth.macros.iter().map(|m| m.body.clone()).collect();
    let graphs = build_all(&corpus, &keys).expect("graphs build");
    Fixture { corpus, keys, graphs }
}

/// A LaTeX preamble with `n` definitions, some commented out or nested.
pub fn latex_source(n: usize) -> String {
    let mut s = String::from("\\documentclass{article}\n");
    for i in 0..n {
        match i % 4 {
            0 => s.push_str(&format!("\\newcommand{{\\m{i}}}{{\\mathcal{{X}}_{{{i}}}^{{\\rm obs}}}}\n")),
            1 => s.push_str(&format!("\\def\\d{i}#1{{\\hbox{{$#1_{{\\odot}}$}}}}\n")),
            2 => s.push_str(&format!("% \\newcommand{{\\gone{i}}}{{never}}\n\\renewcommand*{{\\r{i}}}[1]{{\\textsf{{#1}}}}\n")),
            _ => s.push_str(&format!("\\providecommand{{\\p{i}}}{{\\def\\inner{{x}}\\mbox{{{i}}}}}\n")),
        }
    }
    s.push_str("\\begin{document}\nText.\n\\end{document}\n");
    s
}
