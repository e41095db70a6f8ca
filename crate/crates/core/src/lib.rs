//! Tracing the spread of LaTeX macros through co-authorship.
//!
//! A corpus of dated, multi-author papers with their macro definitions is
//! turned into one inheritance graph per macro body. On top of the graphs the
//! crate computes descriptive statistics and three fitness analyses: the
//! longevity of collaborations, the eventual productivity of authors, and the
//! eventual reach of macros. A synthetic generator with planted transmission
//! events provides ground truth for all of it.

pub mod corpus;
pub mod error;
pub mod fitness_author;
pub mod fitness_collab;
pub mod fitness_macro;
pub mod graph_stats;
pub mod inheritance;
pub mod macro_extract;
pub mod stats;
pub mod synth;

pub use corpus::{load_corpus, AuthorId, Corpus, ExperienceLedger, LoadMode, MacroUse, Month, Paper};
pub use error::{Error, Result};
pub use inheritance::{build_inheritance_graph, EdgeKind, InheritanceEdge, InheritanceGraph, Node, NodeId};
pub use macro_extract::{extract_macros, normalize_body, trackable_macros, MacroFilter, MacroKey};
pub use fitness_author::{AuthorFeature, FitnessClassTask, Life, MacroSet, NameChangeCurve};
pub use fitness_collab::{CollabPair, MatchedComparison, PairClass, Setting};
pub use fitness_macro::{body_features, sigma_from_fitness, BodyFeatures, FeatureSubset, MacroFeatureVector, MacroFitnessTask};
pub use graph_stats::{CdfPoint, CdfSeries, WidthStat};
pub use stats::LogisticConfig;
pub use synth::{generate, plant_fitness_bias, FitnessEffects, GroundTruth, SynthConfig};
