//! Command-line pipeline for explainable judgment classification.
//!
//! Every subcommand reads its predecessors' artifacts from the shared output
//! directory and writes versioned files back, so each intermediate step is
//! inspectable and every run is reproducible from its resolved config.

mod ops;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sentencia::eval::Methodology;
use sentencia::explain::Language;
use sentencia::trees::{Criterion, MaxFeatures, Splitter};

#[derive(Parser)]
#[command(
    name = "sentencia",
    about = "Classify labeled judgment corpora with native tree estimators and explain every decision in natural language",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutDir {
    /// Artifact directory shared by all subcommands
    /// (default: $SENTENCIA_OUT_DIR or ./sentencia-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ResourceArgs {
    /// Stop-word file, one word per line (shipped Spanish list by default).
    #[arg(long)]
    stop_words: Option<PathBuf>,
    /// Lemma file, tab-separated surface<TAB>lemma pairs (shipped Spanish
    /// map by default).
    #[arg(long)]
    lemmas: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct FeaturizeArgs {
    /// Smallest char-gram size.
    #[arg(long, default_value_t = 3)]
    char_n_min: usize,
    /// Largest char-gram size.
    #[arg(long, default_value_t = 7)]
    char_n_max: usize,
    /// Minimum document frequency (inclusive).
    #[arg(long, default_value_t = 0.05)]
    min_df: f64,
    /// Maximum document frequency (inclusive).
    #[arg(long, default_value_t = 0.50)]
    max_df: f64,
    /// Chi-squared selection percentile.
    #[arg(long, default_value_t = 20.0)]
    percentile: f64,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Estimator kind: a random forest or a single decision tree.
    #[arg(long, default_value = "forest", value_parser = ["forest", "dt"])]
    model: String,
    /// Number of trees in the forest (ignored for dt).
    #[arg(long, default_value_t = 200)]
    n_estimators: usize,
    /// Disable bootstrap resampling.
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long, default_value = "gini")]
    criterion: Criterion,
    #[arg(long, default_value_t = 15)]
    max_depth: usize,
    /// Candidate features per node: all/auto or sqrt. The default follows
    /// the tuned reference configuration; sqrt diversifies trees and
    /// enriches explanation bags on small synthetic corpora.
    #[arg(long, default_value = "auto")]
    max_features: MaxFeatures,
    #[arg(long, default_value_t = 0.001)]
    min_samples_split: f64,
    #[arg(long, default_value_t = 0.005)]
    min_samples_leaf: f64,
    #[arg(long, default_value = "best")]
    splitter: Splitter,
    /// Tuned-parameter file from `tune` (overrides the flags above).
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus with planted category keywords.
    GenCorpus {
        /// Output corpus file (line-delimited JSON records).
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        docs_per_category: usize,
        #[arg(long, default_value = "sintetica")]
        jurisdiction: String,
    },
    /// Validate a corpus and print per-jurisdiction category counts.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Split every jurisdiction into train / test1 / test2.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Stratify the 80/20 split per category.
        #[arg(long)]
        stratified: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Fit feature spaces and train one model per jurisdiction.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Restrict to one jurisdiction (repeatable).
        #[arg(long)]
        jurisdiction: Vec<String>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        featurize: FeaturizeArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Exhaustive grid search with stratified k-fold cross-validation.
    Tune {
        #[arg(long)]
        corpus: PathBuf,
        /// Grid file (declarative JSON axes; see fixtures/).
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        jurisdiction: Vec<String>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        featurize: FeaturizeArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Score trained models on both test sets.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        /// Restrict the report to one methodology (default: both).
        #[arg(long)]
        methodology: Option<Methodology>,
        #[arg(long)]
        jurisdiction: Vec<String>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Mine decision paths into per-category term bags.
    BuildBags {
        #[arg(long)]
        corpus: PathBuf,
        /// Reference documents to trace: train, test1 or all.
        #[arg(long, default_value = "train", value_parser = ["train", "test1", "all"])]
        reference: String,
        #[arg(long)]
        jurisdiction: Vec<String>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Export the top bag terms as an expert answer sheet.
    Questionnaire {
        /// Bag file produced by build-bags (bags_<jurisdiction>.json).
        #[arg(long)]
        bags: PathBuf,
        #[arg(long)]
        category: String,
        #[arg(long, default_value_t = 50)]
        top: usize,
        /// Answer the two questions per term on stdin instead of leaving
        /// the cells empty.
        #[arg(long)]
        interactive: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Turn an answered questionnaire sheet into an expert dictionary.
    ImportDict {
        #[arg(long)]
        sheet: PathBuf,
        /// Validate the sheet against this bag file's top terms.
        #[arg(long)]
        bags: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        top: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Explain the classification of a judgment or a raw text file.
    Explain {
        #[arg(long)]
        corpus: PathBuf,
        /// Judgment id from the corpus.
        #[arg(long, conflicts_with = "text")]
        id: Option<String>,
        /// Raw UTF-8 text file to classify and explain.
        #[arg(long, requires = "jurisdiction")]
        text: Option<PathBuf>,
        /// Jurisdiction of the text file (taken from the corpus for --id).
        #[arg(long)]
        jurisdiction: Option<String>,
        #[arg(long, default_value = "es")]
        language: Language,
        #[arg(long, default_value_t = 16)]
        m_max: usize,
        #[arg(long, default_value_t = 10)]
        p_max: usize,
        /// Render without an expert dictionary: all terms go to "other".
        #[arg(long)]
        allow_missing_dict: bool,
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        out: OutDir,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenCorpus {
            corpus,
            seed,
            docs_per_category,
            jurisdiction,
        } => ops::gen_corpus(&corpus, seed, docs_per_category, &jurisdiction),
        Command::Ingest { corpus, out } => ops::ingest(&corpus, &ops::resolve_out(out.out)?),
        Command::Split {
            corpus,
            seed,
            stratified,
            out,
        } => ops::split(&corpus, seed, stratified, &ops::resolve_out(out.out)?),
        Command::Train {
            corpus,
            seed,
            jurisdiction,
            resources,
            featurize,
            model,
            out,
        } => ops::train(
            &corpus,
            seed,
            &jurisdiction,
            &resources,
            &featurize,
            &model,
            &ops::resolve_out(out.out)?,
        ),
        Command::Tune {
            corpus,
            grid,
            seed,
            folds,
            jurisdiction,
            resources,
            featurize,
            out,
        } => ops::tune(
            &corpus,
            &grid,
            seed,
            folds,
            &jurisdiction,
            &resources,
            &featurize,
            &ops::resolve_out(out.out)?,
        ),
        Command::Evaluate {
            corpus,
            methodology,
            jurisdiction,
            resources,
            out,
        } => ops::evaluate(
            &corpus,
            methodology,
            &jurisdiction,
            &resources,
            &ops::resolve_out(out.out)?,
        ),
        Command::BuildBags {
            corpus,
            reference,
            jurisdiction,
            resources,
            out,
        } => ops::build_bags(
            &corpus,
            &reference,
            &jurisdiction,
            &resources,
            &ops::resolve_out(out.out)?,
        ),
        Command::Questionnaire {
            bags,
            category,
            top,
            interactive,
            out,
        } => ops::questionnaire(
            &bags,
            &category,
            top,
            interactive,
            &ops::resolve_out(out.out)?,
        ),
        Command::ImportDict {
            sheet,
            bags,
            top,
            out,
        } => ops::import_dict(&sheet, bags.as_deref(), top, &ops::resolve_out(out.out)?),
        Command::Explain {
            corpus,
            id,
            text,
            jurisdiction,
            language,
            m_max,
            p_max,
            allow_missing_dict,
            resources,
            out,
        } => ops::explain(ops::ExplainRequest {
            corpus: &corpus,
            id: id.as_deref(),
            text: text.as_deref(),
            jurisdiction: jurisdiction.as_deref(),
            language,
            m_max,
            p_max,
            allow_missing_dict,
            resources: &resources,
            out: &ops::resolve_out(out.out)?,
        }),
    }
}
