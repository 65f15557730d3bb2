//! Subcommand implementations and their artifact file schemas.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use sentencia::corpus::{
    ingest_corpus_path, split_dataset_with, Judgment, JurisdictionDataset, SplitOptions,
    SplitResult,
};
use sentencia::eval::{evaluate as eval_records, Methodology, PredictionRecord, Timings};
use sentencia::explain::{
    build_bags as mine_bags, explain_vector, import_dictionary, questionnaire as make_sheet,
    render_explanation, BagSet, ExpertDictionary, ExplanationCaps, Language, TermSheet,
};
use sentencia::featurize::{chi2_select, fit_feature_space, CountVector, FeatureSpace, FitOptions};
use sentencia::synthetic;
use sentencia::textprep::{preprocess, preprocessed_document, TextResources};
use sentencia::trees::{
    grid_search_forest, grid_search_tree, train_forest, ForestModel, GridSpec, TrainingSet,
    TreeHyperparams,
};

use crate::{FeaturizeArgs, ModelArgs, ResourceArgs};

const SPLIT_FILE: &str = "split.json";
const MANIFEST_FILE: &str = "manifest.json";
const TRAIN_TIMINGS_FILE: &str = "timings_train.tsv";

pub fn resolve_out(out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out
        .or_else(|| std::env::var_os("SENTENCIA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sentencia-out"));
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn slug(name: &str) -> String {
    name.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

fn write_config<T: Serialize>(out: &Path, command: &str, config: &T) -> Result<()> {
    let path = out.join(format!("config_{command}.json"));
    fs::write(&path, serde_json::to_string_pretty(config)?)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn require(path: &Path, what: &str, producer: &str) -> Result<()> {
    if !path.exists() {
        bail!("missing {what} {}; run `{producer}` first", path.display());
    }
    Ok(())
}

fn load_corpus(path: &Path) -> Result<Vec<JurisdictionDataset>> {
    require(
        path,
        "corpus file",
        "sentencia gen-corpus (or provide your own)",
    )?;
    let datasets = ingest_corpus_path(path)
        .with_context(|| format!("cannot ingest corpus {}", path.display()))?;
    if datasets.is_empty() {
        bail!("corpus {} contains no records", path.display());
    }
    Ok(datasets)
}

fn load_resources(args: &ResourceArgs) -> Result<TextResources> {
    TextResources::from_files(args.stop_words.as_deref(), args.lemmas.as_deref())
        .context("cannot load text resources")
}

fn filter_jurisdictions<'a>(
    datasets: &'a [JurisdictionDataset],
    wanted: &[String],
) -> Result<Vec<&'a JurisdictionDataset>> {
    if wanted.is_empty() {
        return Ok(datasets.iter().collect());
    }
    let mut selected = Vec::new();
    for name in wanted {
        let dataset = datasets
            .iter()
            .find(|d| &d.jurisdiction == name)
            .ok_or_else(|| anyhow!("jurisdiction {name:?} not present in the corpus"))?;
        selected.push(dataset);
    }
    Ok(selected)
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitFile {
    version: u32,
    seed: u64,
    stratified: bool,
    splits: Vec<SplitResult>,
}

impl SplitFile {
    fn load(out: &Path) -> Result<Self> {
        let path = out.join(SPLIT_FILE);
        require(&path, "split file", "sentencia split")?;
        Ok(serde_json::from_str(&fs::read_to_string(&path)?)?)
    }

    fn for_jurisdiction(&self, jurisdiction: &str) -> Result<&SplitResult> {
        self.splits
            .iter()
            .find(|s| s.jurisdiction == jurisdiction)
            .ok_or_else(|| {
                anyhow!("split file has no entry for jurisdiction {jurisdiction:?}; re-run `sentencia split`")
            })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    seed: u64,
    jurisdictions: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    jurisdiction: String,
    slug: String,
    model_file: String,
    space_file: String,
    categories: Vec<String>,
}

impl Manifest {
    fn load(out: &Path) -> Result<Self> {
        let path = out.join(MANIFEST_FILE);
        require(&path, "model manifest", "sentencia train")?;
        Ok(serde_json::from_str(&fs::read_to_string(&path)?)?)
    }

    fn entry(&self, jurisdiction: &str) -> Result<&ManifestEntry> {
        self.jurisdictions
            .iter()
            .find(|e| e.jurisdiction == jurisdiction)
            .ok_or_else(|| {
                anyhow!("no trained model for jurisdiction {jurisdiction:?}; run `sentencia train`")
            })
    }
}

fn load_model(out: &Path, entry: &ManifestEntry) -> Result<(ForestModel, FeatureSpace)> {
    let model_path = out.join(&entry.model_file);
    require(&model_path, "model file", "sentencia train")?;
    let space_path = out.join(&entry.space_file);
    require(&space_path, "feature-space file", "sentencia train")?;
    let model = ForestModel::load(&model_path)
        .with_context(|| format!("cannot load {}", model_path.display()))?;
    let space = FeatureSpace::load(&space_path)
        .with_context(|| format!("cannot load {}", space_path.display()))?;
    Ok((model, space))
}

/// Tuned parameters as written by `tune` and consumed by `train --params`.
#[derive(Debug, Serialize, Deserialize)]
struct TunedParams {
    model: String,
    hyperparams: TreeHyperparams,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_estimators: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<bool>,
    cv_accuracy: f64,
}

// ---------------------------------------------------------------------------
// gen-corpus
// ---------------------------------------------------------------------------

pub fn gen_corpus(
    path: &Path,
    seed: u64,
    docs_per_category: usize,
    jurisdiction: &str,
) -> Result<()> {
    let mut spec = synthetic::default_spec(seed);
    spec.docs_per_category = docs_per_category;
    spec.jurisdiction = jurisdiction.to_string();
    let judgments = synthetic::generate(&spec);
    synthetic::write_jsonl(path, &judgments)?;
    println!(
        "wrote {} judgments ({} categories x {}) to {}",
        judgments.len(),
        spec.categories.len(),
        docs_per_category,
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn ingest(corpus: &Path, out: &Path) -> Result<()> {
    let datasets = load_corpus(corpus)?;
    let mut table = String::from("jurisdiction\tcategory\tsamples\n");
    println!("{:<16} {:<40} {:>8}", "jurisdiction", "category", "samples");
    for dataset in &datasets {
        for (category, count) in &dataset.category_counts {
            println!("{:<16} {:<40} {:>8}", dataset.jurisdiction, category, count);
            table.push_str(&format!(
                "{}\t{}\t{}\n",
                dataset.jurisdiction, category, count
            ));
        }
    }
    let total: usize = datasets.iter().map(JurisdictionDataset::len).sum();
    println!(
        "total: {total} judgments in {} jurisdiction(s)",
        datasets.len()
    );
    fs::write(out.join("ingest_summary.tsv"), table)?;
    write_config(out, "ingest", &serde_json::json!({ "corpus": corpus }))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

pub fn split(corpus: &Path, seed: u64, stratified: bool, out: &Path) -> Result<()> {
    let datasets = load_corpus(corpus)?;
    let options = SplitOptions { stratified };
    let mut splits = Vec::new();
    for dataset in &datasets {
        let split = split_dataset_with(dataset, seed, options)
            .with_context(|| format!("cannot split jurisdiction {:?}", dataset.jurisdiction))?;
        println!(
            "{}: train={} test1={} test2={} discarded={:?} downsampled={:?}",
            dataset.jurisdiction,
            split.train.len(),
            split.test1.len(),
            split.test2.len(),
            split.discarded_categories,
            split.downsampled_categories,
        );
        splits.push(split);
    }
    let file = SplitFile {
        version: 1,
        seed,
        stratified,
        splits,
    };
    fs::write(out.join(SPLIT_FILE), serde_json::to_string_pretty(&file)?)?;
    write_config(
        out,
        "split",
        &serde_json::json!({ "corpus": corpus, "seed": seed, "stratified": stratified }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct FittedJurisdiction {
    space: FeatureSpace,
    set: TrainingSet,
    preprocess_secs: f64,
    selection_tsv: Option<String>,
}

/// Preprocess a jurisdiction's train split, fit the feature space and apply
/// chi-squared selection (skipped with a warning for single-category
/// jurisdictions, where the statistic is undefined).
fn fit_jurisdiction(
    dataset: &JurisdictionDataset,
    split: &SplitResult,
    resources: &TextResources,
    featurize: &FeaturizeArgs,
) -> Result<FittedJurisdiction> {
    let started = Instant::now();
    let train_docs: Vec<(&Judgment, String)> = dataset
        .judgments
        .iter()
        .filter(|j| split.train.contains(&j.id))
        .map(|j| (j, preprocessed_document(j, resources)))
        .collect();
    if train_docs.is_empty() {
        bail!(
            "split file assigns no train documents to jurisdiction {:?}",
            dataset.jurisdiction
        );
    }
    let texts: Vec<&str> = train_docs.iter().map(|(_, t)| t.as_str()).collect();
    let options = FitOptions {
        char_n_min: featurize.char_n_min,
        char_n_max: featurize.char_n_max,
        min_df: featurize.min_df,
        max_df: featurize.max_df,
    };
    let space = fit_feature_space(&texts, &options)?;
    let vectors: Vec<CountVector> = train_docs
        .iter()
        .map(|(j, t)| space.vectorize(t, j.id.as_str()))
        .collect();
    let labels: Vec<&str> = train_docs
        .iter()
        .map(|(j, _)| j.primary_category.as_str())
        .collect();

    let categories: BTreeSet<&str> = labels.iter().copied().collect();
    let (space, vectors, selection_tsv) = if categories.len() >= 2 {
        let report = chi2_select(&vectors, &labels, space.len(), featurize.percentile)?;
        let tsv = report.to_tsv(&space);
        let (selected, projection) = space.subset(&report.selected)?;
        let projected = vectors.iter().map(|v| v.project(&projection)).collect();
        (selected, projected, Some(tsv))
    } else {
        eprintln!(
            "warning: jurisdiction {:?} has a single category; chi-squared selection skipped",
            dataset.jurisdiction
        );
        (space, vectors, None)
    };

    let set = TrainingSet::from_space(vectors, &labels, &space)?;
    Ok(FittedJurisdiction {
        space,
        set,
        preprocess_secs: started.elapsed().as_secs_f64(),
        selection_tsv,
    })
}

pub fn train(
    corpus: &Path,
    seed: u64,
    jurisdictions: &[String],
    resources: &ResourceArgs,
    featurize: &FeaturizeArgs,
    model_args: &ModelArgs,
    out: &Path,
) -> Result<()> {
    let datasets = load_corpus(corpus)?;
    let selected = filter_jurisdictions(&datasets, jurisdictions)?;
    let split_file = SplitFile::load(out)?;
    let text_resources = load_resources(resources)?;

    let tuned: Option<TunedParams> = match &model_args.params {
        Some(path) => {
            require(path, "tuned-parameter file", "sentencia tune")?;
            Some(serde_json::from_str(&fs::read_to_string(path)?)?)
        }
        None => None,
    };
    let (kind, hyperparams, n_estimators, bootstrap) = match &tuned {
        Some(t) => (
            t.model.clone(),
            TreeHyperparams {
                seed,
                ..t.hyperparams
            },
            t.n_estimators.unwrap_or(model_args.n_estimators),
            t.bootstrap.unwrap_or(!model_args.no_bootstrap),
        ),
        None => (
            model_args.model.clone(),
            TreeHyperparams {
                criterion: model_args.criterion,
                max_depth: model_args.max_depth,
                max_features: model_args.max_features,
                min_samples_split: model_args.min_samples_split,
                min_samples_leaf: model_args.min_samples_leaf,
                splitter: model_args.splitter,
                seed,
            },
            model_args.n_estimators,
            !model_args.no_bootstrap,
        ),
    };

    let mut manifest = Manifest {
        version: 1,
        seed,
        jurisdictions: Vec::new(),
    };
    let mut timings = String::from("jurisdiction\tpreprocess_secs\ttrain_secs\n");
    for dataset in selected {
        let split = split_file.for_jurisdiction(&dataset.jurisdiction)?;
        let fitted = fit_jurisdiction(dataset, split, &text_resources, featurize)?;

        let started = Instant::now();
        // A decision tree is the degenerate forest: one tree, no bootstrap.
        let forest = match kind.as_str() {
            "dt" => train_forest(&fitted.set, &hyperparams, 1, false, seed)?,
            _ => train_forest(&fitted.set, &hyperparams, n_estimators, bootstrap, seed)?,
        };
        let train_secs = started.elapsed().as_secs_f64();

        let jslug = slug(&dataset.jurisdiction);
        let model_file = format!("model_{jslug}.json");
        let space_file = format!("feature_space_{jslug}.json");
        forest.save(out.join(&model_file))?;
        fitted.space.save(out.join(&space_file))?;
        if let Some(tsv) = &fitted.selection_tsv {
            fs::write(out.join(format!("selection_{jslug}.tsv")), tsv)?;
        }
        timings.push_str(&format!(
            "{}\t{:.6}\t{:.6}\n",
            dataset.jurisdiction, fitted.preprocess_secs, train_secs
        ));
        println!(
            "{}: {} features, {} trees, trained in {:.2}s (preprocess {:.2}s)",
            dataset.jurisdiction,
            fitted.space.len(),
            forest.trees.len(),
            train_secs,
            fitted.preprocess_secs,
        );
        manifest.jurisdictions.push(ManifestEntry {
            jurisdiction: dataset.jurisdiction.clone(),
            slug: jslug,
            model_file,
            space_file,
            categories: forest.categories().to_vec(),
        });
    }
    fs::write(
        out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    fs::write(out.join(TRAIN_TIMINGS_FILE), timings)?;
    write_config(
        out,
        "train",
        &serde_json::json!({
            "corpus": corpus,
            "seed": seed,
            "jurisdictions": jurisdictions,
            "stop_words": resources.stop_words,
            "lemmas": resources.lemmas,
            "char_n": [featurize.char_n_min, featurize.char_n_max],
            "df_bounds": [featurize.min_df, featurize.max_df],
            "percentile": featurize.percentile,
            "model": kind,
            "hyperparams": hyperparams,
            "n_estimators": n_estimators,
            "bootstrap": bootstrap,
            "params_file": model_args.params,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn tune(
    corpus: &Path,
    grid_path: &Path,
    seed: u64,
    folds: usize,
    jurisdictions: &[String],
    resources: &ResourceArgs,
    featurize: &FeaturizeArgs,
    out: &Path,
) -> Result<()> {
    require(
        grid_path,
        "grid file",
        "provide a grid JSON (see fixtures/)",
    )?;
    let grid = GridSpec::load(grid_path)?;
    let datasets = load_corpus(corpus)?;
    let selected = filter_jurisdictions(&datasets, jurisdictions)?;
    let split_file = SplitFile::load(out)?;
    let text_resources = load_resources(resources)?;

    for dataset in selected {
        let split = split_file.for_jurisdiction(&dataset.jurisdiction)?;
        let fitted = fit_jurisdiction(dataset, split, &text_resources, featurize)?;
        let jslug = slug(&dataset.jurisdiction);
        let (params, report) = match &grid {
            GridSpec::Tree(tree_grid) => {
                let (best, report) = grid_search_tree(&fitted.set, tree_grid, folds, seed)?;
                (
                    TunedParams {
                        model: "dt".into(),
                        hyperparams: best,
                        n_estimators: None,
                        bootstrap: None,
                        cv_accuracy: report.entries[report.best_index].mean_accuracy,
                    },
                    report,
                )
            }
            GridSpec::Forest(forest_grid) => {
                let (best, report) = grid_search_forest(&fitted.set, forest_grid, folds, seed)?;
                (
                    TunedParams {
                        model: "forest".into(),
                        hyperparams: best.hyperparams,
                        n_estimators: Some(best.n_estimators),
                        bootstrap: Some(best.bootstrap),
                        cv_accuracy: report.entries[report.best_index].mean_accuracy,
                    },
                    report,
                )
            }
        };
        fs::write(out.join(format!("tuning_{jslug}.tsv")), report.to_tsv())?;
        fs::write(
            out.join(format!("best_params_{jslug}.json")),
            serde_json::to_string_pretty(&params)?,
        )?;
        println!(
            "{}: best of {} combinations -> cv accuracy {:.4}",
            dataset.jurisdiction,
            report.entries.len(),
            params.cv_accuracy,
        );
    }
    write_config(
        out,
        "tune",
        &serde_json::json!({
            "corpus": corpus,
            "grid": grid_path,
            "seed": seed,
            "folds": folds,
            "jurisdictions": jurisdictions,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn train_timings(out: &Path) -> std::collections::HashMap<String, (f64, f64)> {
    let mut map = std::collections::HashMap::new();
    let Ok(content) = fs::read_to_string(out.join(TRAIN_TIMINGS_FILE)) else {
        return map;
    };
    for line in content.lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() == 3 {
            if let (Ok(p), Ok(t)) = (fields[1].parse(), fields[2].parse()) {
                map.insert(fields[0].to_string(), (p, t));
            }
        }
    }
    map
}

pub fn evaluate(
    corpus: &Path,
    methodology: Option<Methodology>,
    jurisdictions: &[String],
    resources: &ResourceArgs,
    out: &Path,
) -> Result<()> {
    let datasets = load_corpus(corpus)?;
    let selected = filter_jurisdictions(&datasets, jurisdictions)?;
    let split_file = SplitFile::load(out)?;
    let manifest = Manifest::load(out)?;
    let text_resources = load_resources(resources)?;
    let trained = train_timings(out);

    let methodologies: Vec<Methodology> = match methodology {
        Some(m) => vec![m],
        None => vec![Methodology::OneToOne, Methodology::OneToThree],
    };

    let mut report = String::from(
        "jurisdiction\tmethodology\taccuracy_test1\taccuracy_test2\tf1_test1\tf1_test2\trecall_test1\trecall_test2\ttime_s\n",
    );
    println!(
        "{:<14} {:<6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8}",
        "jurisdiction",
        "method",
        "acc_t1",
        "acc_t2",
        "f1_t1",
        "f1_t2",
        "rec_t1",
        "rec_t2",
        "time_s"
    );
    for dataset in selected {
        let entry = manifest.entry(&dataset.jurisdiction)?;
        let (model, space) = load_model(out, entry)?;
        let split = split_file.for_jurisdiction(&dataset.jurisdiction)?;
        let (preprocess_trained, train_secs) = trained
            .get(&dataset.jurisdiction)
            .copied()
            .unwrap_or((0.0, 0.0));

        let mut per_test: Vec<Vec<sentencia::eval::EvalReport>> = Vec::new();
        let mut predict_secs = 0.0;
        for ids in [&split.test1, &split.test2] {
            let started = Instant::now();
            let judgments: Vec<&Judgment> = dataset
                .judgments
                .iter()
                .filter(|j| ids.contains(&j.id))
                .collect();
            if judgments.is_empty() {
                bail!(
                    "split file assigns no test documents to jurisdiction {:?}",
                    dataset.jurisdiction
                );
            }
            let records: Vec<PredictionRecord> = judgments
                .iter()
                .map(|j| {
                    let doc = preprocessed_document(j, &text_resources);
                    let vector = space.vectorize(&doc, j.id.as_str());
                    let predicted = model.categories()[model.predict(&vector)].clone();
                    PredictionRecord::from_judgment(j, predicted)
                })
                .collect();
            predict_secs += started.elapsed().as_secs_f64();
            let timings = Timings {
                preprocess_secs: preprocess_trained,
                train_secs,
                predict_secs,
            };
            let reports = methodologies
                .iter()
                .map(|&m| {
                    eval_records(
                        &records,
                        m,
                        &dataset.jurisdiction,
                        Some(entry.categories.as_slice()),
                        Some(timings),
                    )
                })
                .collect::<sentencia::Result<Vec<_>>>()?;
            per_test.push(reports);
        }

        let time_s = preprocess_trained + train_secs + predict_secs;
        for (mi, m) in methodologies.iter().enumerate() {
            let t1 = &per_test[0][mi];
            let t2 = &per_test[1][mi];
            println!(
                "{:<14} {:<6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8.2}",
                dataset.jurisdiction,
                m.to_string(),
                t1.accuracy,
                t2.accuracy,
                t1.weighted_f1,
                t2.weighted_f1,
                t1.weighted_recall,
                t2.weighted_recall,
                time_s,
            );
            report.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}\n",
                dataset.jurisdiction,
                m,
                t1.accuracy,
                t2.accuracy,
                t1.weighted_f1,
                t2.weighted_f1,
                t1.weighted_recall,
                t2.weighted_recall,
                time_s,
            ));
            let jslug = slug(&dataset.jurisdiction);
            fs::write(
                out.join(format!("eval_categories_{jslug}_{m}_test1.tsv")),
                t1.per_category_tsv(),
            )?;
            fs::write(
                out.join(format!("eval_categories_{jslug}_{m}_test2.tsv")),
                t2.per_category_tsv(),
            )?;
        }
    }
    fs::write(out.join("eval_report.tsv"), report)?;
    write_config(
        out,
        "evaluate",
        &serde_json::json!({
            "corpus": corpus,
            "methodology": methodology.map(|m| m.to_string()),
            "jurisdictions": jurisdictions,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// build-bags
// ---------------------------------------------------------------------------

pub fn build_bags(
    corpus: &Path,
    reference: &str,
    jurisdictions: &[String],
    resources: &ResourceArgs,
    out: &Path,
) -> Result<()> {
    let datasets = load_corpus(corpus)?;
    let selected = filter_jurisdictions(&datasets, jurisdictions)?;
    let split_file = SplitFile::load(out)?;
    let manifest = Manifest::load(out)?;
    let text_resources = load_resources(resources)?;

    for dataset in selected {
        let entry = manifest.entry(&dataset.jurisdiction)?;
        let (model, space) = load_model(out, entry)?;
        let split = split_file.for_jurisdiction(&dataset.jurisdiction)?;
        let ids: Option<&BTreeSet<String>> = match reference {
            "train" => Some(&split.train),
            "test1" => Some(&split.test1),
            _ => None, // all
        };
        let vectors: Vec<CountVector> = dataset
            .judgments
            .iter()
            .filter(|j| ids.is_none_or(|set| set.contains(&j.id)))
            .map(|j| {
                let doc = preprocessed_document(j, &text_resources);
                space.vectorize(&doc, j.id.as_str())
            })
            .collect();
        let bags = mine_bags(&model, &space, &vectors, &dataset.jurisdiction, reference)?;

        let jslug = slug(&dataset.jurisdiction);
        bags.save(out.join(format!("bags_{jslug}.json")))?;
        for bag in &bags.bags {
            let cslug = slug(&bag.category);
            fs::write(out.join(format!("bag_{jslug}__{cslug}.tsv")), bag.to_tsv())?;
        }
        println!(
            "{}: {} bags from {} reference documents",
            dataset.jurisdiction,
            bags.bags.len(),
            vectors.len(),
        );
    }
    write_config(
        out,
        "build_bags",
        &serde_json::json!({
            "corpus": corpus,
            "reference": reference,
            "jurisdictions": jurisdictions,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// questionnaire
// ---------------------------------------------------------------------------

pub fn questionnaire(
    bags_path: &Path,
    category: &str,
    top: usize,
    interactive: bool,
    out: &Path,
) -> Result<()> {
    require(bags_path, "bag file", "sentencia build-bags")?;
    let bags = BagSet::load(bags_path)?;
    let bag = bags.get(category).ok_or_else(|| {
        let available: Vec<&str> = bags.bags.iter().map(|b| b.category.as_str()).collect();
        anyhow!("no bag for category {category:?}; available: {available:?}")
    })?;
    let mut sheet = make_sheet(bag, top);
    if interactive {
        let stdin = std::io::stdin();
        println!(
            "Answer yes/no for each term (jurisdiction {}, category {}):",
            sheet.jurisdiction, sheet.category
        );
        for row in &mut sheet.rows {
            row.answer1 = Some(ask(
                &stdin,
                &format!("{:?} relevant in legal texts?", row.term),
            )?);
            row.answer2 = Some(ask(
                &stdin,
                &format!("{:?} relevant to this category?", row.term),
            )?);
        }
    }
    let path = out.join(format!(
        "questionnaire_{}__{}.tsv",
        slug(&sheet.jurisdiction),
        slug(&sheet.category)
    ));
    fs::write(&path, sheet.to_tsv())?;
    println!("wrote {} terms to {}", sheet.rows.len(), path.display());
    write_config(
        out,
        "questionnaire",
        &serde_json::json!({ "bags": bags_path, "category": category, "top": top }),
    )?;
    Ok(())
}

fn ask(stdin: &std::io::Stdin, prompt: &str) -> Result<bool> {
    loop {
        print!("{prompt} [y/n] ");
        std::io::stdout().flush()?;
        let mut line = String::new();
        stdin.read_line(&mut line)?;
        match line.trim().to_lowercase().as_str() {
            "y" | "yes" | "si" | "sí" => return Ok(true),
            "n" | "no" => return Ok(false),
            _ => println!("please answer y or n"),
        }
    }
}

// ---------------------------------------------------------------------------
// import-dict
// ---------------------------------------------------------------------------

pub fn import_dict(sheet_path: &Path, bags: Option<&Path>, top: usize, out: &Path) -> Result<()> {
    require(sheet_path, "answered sheet", "sentencia questionnaire")?;
    let sheet = TermSheet::load_tsv(sheet_path)?;
    let presented: Vec<String> = match bags {
        Some(path) => {
            require(path, "bag file", "sentencia build-bags")?;
            let bags = BagSet::load(path)?;
            let bag = bags
                .get(&sheet.category)
                .ok_or_else(|| anyhow!("bag file has no category {:?}", sheet.category))?;
            make_sheet(bag, top)
                .rows
                .into_iter()
                .map(|r| r.term)
                .collect()
        }
        None => sheet.rows.iter().map(|r| r.term.clone()).collect(),
    };
    let dictionary = import_dictionary(&sheet, &presented)?;
    let path = out.join(format!(
        "dictionary_{}__{}.json",
        slug(&dictionary.jurisdiction),
        slug(&dictionary.category)
    ));
    dictionary.save(&path)?;
    let (q1, q2) = dictionary.acceptance_rates();
    println!(
        "accepted {}/{} terms (Q1 {q1:.1}% yes, Q2 {q2:.1}% yes) -> {}",
        dictionary.accepted.len(),
        dictionary.audit.len(),
        path.display()
    );
    write_config(
        out,
        "import_dict",
        &serde_json::json!({ "sheet": sheet_path, "bags": bags, "top": top }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

pub struct ExplainRequest<'a> {
    pub corpus: &'a Path,
    pub id: Option<&'a str>,
    pub text: Option<&'a Path>,
    pub jurisdiction: Option<&'a str>,
    pub language: Language,
    pub m_max: usize,
    pub p_max: usize,
    pub allow_missing_dict: bool,
    pub resources: &'a ResourceArgs,
    pub out: &'a Path,
}

pub fn explain(request: ExplainRequest<'_>) -> Result<()> {
    let datasets = load_corpus(request.corpus)?;
    let manifest = Manifest::load(request.out)?;
    let text_resources = load_resources(request.resources)?;

    // Resolve the target document.
    let (judgment_id, jurisdiction, document) = match (request.id, request.text) {
        (Some(id), None) => {
            let judgment = datasets
                .iter()
                .find_map(|d| d.find(id))
                .ok_or_else(|| anyhow!("unknown judgment {id:?}"))?;
            (
                judgment.id.clone(),
                judgment.jurisdiction.clone(),
                preprocessed_document(judgment, &text_resources),
            )
        }
        (None, Some(path)) => {
            require(path, "text file", "provide a UTF-8 text file")?;
            let raw = fs::read_to_string(path)?;
            let jurisdiction = request
                .jurisdiction
                .ok_or_else(|| anyhow!("--text requires --jurisdiction"))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "text".to_string());
            (
                id,
                jurisdiction.to_string(),
                preprocess(&raw, &text_resources).join(" "),
            )
        }
        _ => bail!("pass exactly one of --id or --text"),
    };

    let entry = manifest.entry(&jurisdiction)?;
    let (model, space) = load_model(request.out, entry)?;
    let bags_path = request.out.join(format!("bags_{}.json", entry.slug));
    require(&bags_path, "bag file", "sentencia build-bags")?;
    let bags = BagSet::load(&bags_path)?;

    let vector = space.vectorize(&document, judgment_id.as_str());
    let predicted = model.categories()[model.predict(&vector)].clone();
    let dict_path = request.out.join(format!(
        "dictionary_{}__{}.json",
        entry.slug,
        slug(&predicted)
    ));
    let dictionary: Option<ExpertDictionary> = if dict_path.exists() {
        Some(ExpertDictionary::load(&dict_path)?)
    } else if request.allow_missing_dict {
        None
    } else {
        bail!(
            "missing expert dictionary {}; run `sentencia import-dict` or pass --allow-missing-dict",
            dict_path.display()
        );
    };

    let explanation = explain_vector(
        &model,
        &space,
        &judgment_id,
        &jurisdiction,
        &vector,
        &bags,
        dictionary.as_ref(),
        ExplanationCaps {
            m_max: request.m_max,
            p_max: request.p_max,
        },
    )?;
    let rendered = render_explanation(&explanation, request.language);
    println!("{rendered}");

    let idslug = slug(&judgment_id);
    fs::write(
        request.out.join(format!("explanation_{idslug}.txt")),
        format!("{rendered}\n"),
    )?;
    let record = serde_json::json!({
        "judgment_id": explanation.judgment_id,
        "jurisdiction": explanation.jurisdiction,
        "category": explanation.category,
        "dictionary_terms": explanation.dictionary_terms,
        "other_terms": explanation.other_terms,
        "language": request.language,
        "rendered": rendered,
    });
    fs::write(
        request.out.join(format!("explanation_{idslug}.json")),
        serde_json::to_string_pretty(&record)?,
    )?;
    write_config(
        request.out,
        "explain",
        &serde_json::json!({
            "corpus": request.corpus,
            "id": request.id,
            "text": request.text,
            "jurisdiction": request.jurisdiction,
            "language": request.language,
            "m_max": request.m_max,
            "p_max": request.p_max,
            "allow_missing_dict": request.allow_missing_dict,
        }),
    )?;
    Ok(())
}
