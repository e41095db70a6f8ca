use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use macrotrace::graph_stats::WidthStat;
use macrotrace::{AuthorFeature, FeatureSubset, FitnessEffects, LoadMode, MacroFilter, Month, SynthConfig};

mod commands;
mod output;

/// Trace LaTeX macro inheritance through co-authorship.
#[derive(Parser, Debug)]
#[command(name = "macrotrace", version)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "MACROTRACE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inventory of macro bodies with adoption counts.
    Extract(CorpusArgs),
    /// One inheritance graph per trackable macro, plus a summary table.
    BuildGraphs(CorpusArgs),
    /// Reachability, depth profile and experience-difference distributions.
    Stats(StatsArgs),
    /// Matched-pair win percentages of collaboration longevity.
    CollabFitness(CollabArgs),
    /// Name-change curves and author fitness prediction.
    AuthorFitness(AuthorArgs),
    /// Macro fitness thresholds and prediction.
    MacroFitness(MacroArgs),
    /// Generate a synthetic corpus and its ground truth.
    Synth(SynthArgs),
    /// Generate, reconstruct and diff against the planted transmissions.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Records carry LaTeX `source` instead of pre-extracted macros.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 20)]
    min_body_len: usize,
    #[arg(long, default_value_t = 30)]
    min_authors: usize,
}

impl CorpusArgs {
    fn mode(&self) -> LoadMode {
        if self.raw {
            LoadMode::RawLatex
        } else {
            LoadMode::PreExtracted
        }
    }

    fn filter(&self) -> macrotrace::Result<MacroFilter> {
        MacroFilter::new(self.min_body_len, self.min_authors)
    }
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value = "median")]
    width_stat: WidthStat,
}

#[derive(Args, Debug)]
struct CollabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle pair classes within each month before matching.
    #[arg(long)]
    null: bool,
}

#[derive(Args, Debug)]
struct AuthorArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    theta: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "name-change-rate,coauthor-count,total-macro-uses,distinct-bodies")]
    features: Vec<AuthorFeature>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Permute fitness labels before training.
    #[arg(long)]
    null: bool,
}

#[derive(Args, Debug)]
struct MacroArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', default_value = "40")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "all,speed-only,non-speed,body-only,structural-only")]
    features: Vec<FeatureSubset>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long)]
    null: bool,
}

#[derive(Args, Debug, Clone)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    papers: usize,
    #[arg(long, default_value_t = 500)]
    authors: usize,
    #[arg(long, default_value = "1995-01")]
    start: Month,
    #[arg(long, default_value_t = 240)]
    months: usize,
    #[arg(long, default_value_t = 1)]
    team_min: usize,
    #[arg(long, default_value_t = 6)]
    team_max: usize,
    #[arg(long, default_value_t = 0.6)]
    team_shape: f64,
    #[arg(long, default_value_t = 0.2)]
    invention_rate: f64,
    /// Transmission probability of a carried macro.
    #[arg(long, default_value_t = 0.5)]
    pt: f64,
    /// Independent re-invention rate per paper.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 2.5)]
    activity_exponent: f64,
    #[arg(long, default_value_t = 0.6)]
    collaborator_reuse: f64,
    #[arg(long, default_value_t = 36.0)]
    lifetime: f64,
    #[arg(long, default_value_t = 0.2)]
    name_change: f64,
    #[arg(long, default_value_t = 0.0)]
    collab_boost: f64,
    #[arg(long, default_value_t = 0.0)]
    loyalty: f64,
    #[arg(long, default_value_t = 0.0)]
    macro_quality: f64,
}

impl GeneratorArgs {
    fn config(&self) -> SynthConfig {
        SynthConfig {
            n_authors: self.authors,
            n_papers: self.papers,
            start: self.start,
            months_span: self.months,
            team_min: self.team_min,
            team_max: self.team_max,
            team_shape: self.team_shape,
            macro_invention_rate: self.invention_rate,
            transmission_probability: self.pt,
            independent_invention_rate: self.epsilon,
            activity_exponent: self.activity_exponent,
            collaborator_reuse: self.collaborator_reuse,
            macro_lifetime_months: self.lifetime,
            name_change_probability: self.name_change,
            seed: self.seed,
        }
    }

    fn effects(&self) -> FitnessEffects {
        FitnessEffects {
            collab_boost: self.collab_boost,
            loyalty: self.loyalty,
            macro_quality: self.macro_quality,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Also write verify_report.json here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = match e.kind() {
                clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => "missing subcommand",
                _ => text.lines().next().unwrap_or_default(),
            };
            eprintln!("macrotrace: error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            return report(&anyhow::Error::new(e));
        }
    }
    let result = match cli.command {
        Command::Extract(a) => commands::extract(&a),
        Command::BuildGraphs(a) => commands::build_graphs(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::CollabFitness(a) => commands::collab_fitness(&a),
        Command::AuthorFitness(a) => commands::author_fitness(&a),
        Command::MacroFitness(a) => commands::macro_fitness(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

/// Raised by `verify` when reconstruction and ground truth disagree.
#[derive(Debug)]
pub struct Mismatch(pub String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    use macrotrace::Error as E;
    if err.downcast_ref::<Mismatch>().is_some() {
        return (5, "mismatch");
    }
    match err.downcast_ref::<E>() {
        Some(
            E::Io { .. }
            | E::Record { .. }
            | E::DuplicatePaper(_)
            | E::InvalidDate(_)
            | E::InvalidAuthor(_)
            | E::NoAuthors(_)
            | E::DuplicateAuthor { .. },
        ) => (3, "corpus"),
        Some(E::EmptyInput(_) | E::NoMatches { .. } | E::TooFew { .. } | E::NoSources | E::NoAuthorNodes) => {
            (4, "empty-input")
        }
        Some(E::InvalidConfig(_)) => (2, "usage"),
        _ => (1, "internal"),
    }
}

fn report(err: &anyhow::Error) -> ExitCode {
    let (code, kind) = classify(err);
    let message = format!("{err:#}").replace('\n', " ");
    eprintln!("macrotrace: error[{kind}]: {message}");
    ExitCode::from(code)
}
