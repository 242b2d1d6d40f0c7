use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FilterChoice};
use super::folds::stratified_kfold;
use super::io::load_csv;
use crate::classifier::{
    fit_chipclass, fit_multiclass, fit_ssv_binary, Architecture, GradientOptions, TrainedModel,
    TrainingMode, TrainingReport,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{
    build_graph_with_witness, extract_support, recompute_after_removal, GabrielGraph,
    SupportStructure,
};
use crate::numeric::{auc_binary, roc_auc_ovo, MetricReport};
use crate::preprocess::Standardizer;
use crate::regularization::{
    filter_samples, FilterModel, FilterOutcome, FilterPolicy, MembershipKind,
};

/// One fully specified training recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub architecture: Architecture,
    pub membership: MembershipKind,
    /// Ignored for cardinality membership.
    pub sigma: f64,
    pub policy: FilterPolicy,
    pub mode: TrainingMode,
    pub gradient: GradientOptions,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: TrainedModel,
    /// Rows of the training set removed by the filter.
    pub removed: Vec<usize>,
    /// The filtered graph had no support edge; the unfiltered one was used.
    pub fallback: bool,
    pub rescued_classes: Vec<usize>,
    pub n_ssv: usize,
    pub n_support_edges: usize,
    pub training: Option<TrainingReport>,
}

/// Training rows standardized and graphed once, shared by every candidate
/// evaluated on them.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub standardizer: Standardizer,
    /// Standardized training rows.
    pub train: Dataset,
    /// Witness-counting graph of `train`.
    pub graph: GabrielGraph,
    /// Rows of the source dataset behind `train`.
    pub train_ids: Vec<usize>,
    input_names: Vec<String>,
}

fn fit_architecture(
    architecture: Architecture,
    data: &Dataset,
    support: &SupportStructure,
    mode: TrainingMode,
    gradient: &GradientOptions,
) -> Result<(TrainedModel, Option<TrainingReport>)> {
    match architecture {
        Architecture::ChipclassExp | Architecture::ChipclassTanh => {
            Ok((fit_chipclass(data, support, architecture)?, None))
        }
        Architecture::SsvBinary => Ok((fit_ssv_binary(data, support)?, None)),
        Architecture::SsvMulticlass => {
            let (model, report) = fit_multiclass(data, support, mode, gradient)?;
            Ok((model, Some(report)))
        }
    }
}

impl PreparedSplit {
    pub fn new(source: &Dataset, train_ids: &[usize]) -> Result<Self> {
        let raw = source.subset(train_ids);
        let standardizer = Standardizer::fit(&raw)?;
        let train = standardizer.transform_checked(&raw)?;
        let graph = build_graph_with_witness(&train)?;
        Ok(PreparedSplit {
            standardizer,
            train,
            graph,
            train_ids: train_ids.to_vec(),
            input_names: source.feature_names().to_vec(),
        })
    }

    pub fn filter(
        &self,
        membership: MembershipKind,
        sigma: f64,
        policy: FilterPolicy,
    ) -> Result<(FilterModel, FilterOutcome)> {
        let model = FilterModel::fit(&self.graph, &self.train, membership, sigma, policy)?;
        let outcome = filter_samples(&self.train, &model)?;
        Ok((model, outcome))
    }

    /// Recomputes the graph without `outcome.removed`, extracts its support
    /// and fits `architecture` on the surviving rows.
    pub fn fit_filtered(
        &self,
        architecture: Architecture,
        outcome: &FilterOutcome,
        mode: TrainingMode,
        gradient: &GradientOptions,
    ) -> Result<FitOutcome> {
        let filtered = self.train.subset(&outcome.kept);
        let reduced = recompute_after_removal(&self.graph, &self.train, &outcome.removed)?;
        let (data, support, fallback) = match extract_support(&reduced, &filtered) {
            Ok(support) => (filtered, support, false),
            Err(Error::EmptySupport) => {
                log::warn!(
                    "no support edge left after removing {} samples; using the unfiltered graph",
                    outcome.removed.len()
                );
                (
                    self.train.clone(),
                    extract_support(&self.graph, &self.train)?,
                    true,
                )
            }
            Err(e) => return Err(e),
        };
        let (model, training) = fit_architecture(architecture, &data, &support, mode, gradient)?;
        Ok(FitOutcome {
            model: model.with_preprocessing(self.standardizer.clone(), self.input_names.clone()),
            removed: outcome.removed.clone(),
            fallback,
            rescued_classes: outcome.rescued_classes.clone(),
            n_ssv: support.ssv_count(),
            n_support_edges: support.edge_count(),
            training,
        })
    }

    pub fn fit(&self, settings: &TrainSettings) -> Result<FitOutcome> {
        let (_, outcome) =
            self.filter(settings.membership, settings.sigma, settings.policy.clone())?;
        let mut fit = self.fit_filtered(
            settings.architecture,
            &outcome,
            settings.mode,
            &settings.gradient,
        )?;
        fit.model = fit.model.with_regularization(
            settings.membership,
            settings.sigma,
            settings.policy.clone(),
        );
        Ok(fit)
    }
}

/// Standardizes, graphs, filters and fits on all of `dataset`.
pub fn train_model(dataset: &Dataset, settings: &TrainSettings) -> Result<FitOutcome> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    PreparedSplit::new(dataset, &all)?.fit(settings)
}

/// Test metric of `model` on raw rows: AUC with class 1 positive for
/// binary models, one-vs-one ROC-AUC otherwise. The second value is the
/// binary AUC with class 0 taken as positive.
pub fn evaluate(model: &TrainedModel, test: &Dataset) -> Result<(f64, Option<f64>)> {
    let probs = model.predict_proba_batch(test.features())?;
    if model.architecture.is_binary() {
        let p1: Vec<f64> = probs.column(1).to_vec();
        let p0: Vec<f64> = probs.column(0).to_vec();
        let y1: Vec<bool> = test.labels().iter().map(|&l| l == 1).collect();
        let y0: Vec<bool> = y1.iter().map(|&b| !b).collect();
        Ok((auc_binary(&p1, &y1)?, Some(auc_binary(&p0, &y0)?)))
    } else {
        Ok((roc_auc_ovo(probs.view(), test.labels())?, None))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    sigma: Option<f64>,
    filter: FilterChoice,
}

fn candidates(config: &ExperimentConfig, class_sizes: &[usize]) -> Vec<Candidate> {
    let sigmas: Vec<Option<f64>> = if config.searches_sigma() {
        config
            .sigma
            .values(config.seed)
            .into_iter()
            .map(Some)
            .collect()
    } else {
        vec![None]
    };
    let mut out = Vec::new();
    for filter in config.filter.choices(class_sizes) {
        for &sigma in &sigmas {
            out.push(Candidate {
                sigma,
                filter: filter.clone(),
            });
        }
    }
    out
}

/// Inner-fold metric of every candidate. Candidates that remove the same
/// samples yield the same model and are fitted once.
fn score_candidates(
    prepared: &PreparedSplit,
    test: &Dataset,
    candidates: &[Candidate],
    config: &ExperimentConfig,
) -> Result<Vec<f64>> {
    let sizes = prepared.train.class_sizes();
    let cap = config.filter.max_fraction();
    let removals: Vec<FilterOutcome> = candidates
        .par_iter()
        .map(|c| {
            let policy = c.filter.resolve(&sizes, cap);
            prepared
                .filter(config.membership, c.sigma.unwrap_or(1.0), policy)
                .map(|(_, o)| o)
        })
        .collect::<Result<_>>()?;

    let mut slot_of: HashMap<&[usize], usize> = HashMap::new();
    let mut unique: Vec<&FilterOutcome> = Vec::new();
    let slots: Vec<usize> = removals
        .iter()
        .map(|o| {
            *slot_of.entry(&o.removed).or_insert_with(|| {
                unique.push(o);
                unique.len() - 1
            })
        })
        .collect();

    let scores: Vec<f64> = unique
        .par_iter()
        .map(|o| {
            let fit = prepared.fit_filtered(
                config.architecture,
                o,
                config.training_mode,
                &config.gradient,
            )?;
            evaluate(&fit.model, test).map(|(metric, _)| metric)
        })
        .collect::<Result<_>>()?;
    Ok(slots.into_iter().map(|s| scores[s]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metric: f64,
    /// Binary AUC with class 0 as the positive class.
    pub metric_reversed: Option<f64>,
    pub sigma: Option<f64>,
    pub filter: String,
    pub n_ssv: usize,
    pub n_support_edges: usize,
    pub n_removed: usize,
    pub fallback: bool,
    pub inner_score: f64,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub dataset: String,
    pub architecture: Architecture,
    pub membership: MembershipKind,
    pub metric: String,
    pub positive_label: Option<String>,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub candidates: usize,
    pub per_fold: Vec<FoldResult>,
    pub mean: f64,
    pub std: f64,
    pub fallback_count: usize,
}

impl CvReport {
    pub fn metric_report(&self) -> MetricReport {
        MetricReport::from_folds(self.per_fold.iter().map(|f| f.metric).collect())
    }
}

/// Dataset rows each outer fold's selection and refit touched.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldTrace {
    pub fold: usize,
    pub test: Vec<usize>,
    /// Rows used to fit standardizers, graphs and memberships.
    pub fitted: Vec<usize>,
    /// Rows used to score candidates during selection.
    pub selection: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NestedCvResult {
    pub report: CvReport,
    pub traces: Vec<FoldTrace>,
}

fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(fold as u64 + 1)
}

/// Nested cross-validation of the dataset named in `config`.
pub fn run_nested_cv(config: &ExperimentConfig) -> Result<NestedCvResult> {
    let path = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset path given".into()))?;
    let dataset = load_csv(path, &config.label_column)?;
    let name = path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    run_nested_cv_on(&dataset, &name, config)
}

pub fn run_nested_cv_on(
    dataset: &Dataset,
    name: &str,
    config: &ExperimentConfig,
) -> Result<NestedCvResult> {
    config.validate()?;
    if config.architecture.is_binary() && dataset.class_count() != 2 {
        return Err(Error::Unsupported {
            architecture: config.architecture.to_string(),
            what: format!("{} classes (binary only)", dataset.class_count()),
        });
    }
    let c = dataset.class_count();
    let outer = stratified_kfold(dataset.labels(), c, config.outer_folds, config.seed)?;

    let folds: Vec<(FoldResult, FoldTrace)> = outer
        .par_iter()
        .enumerate()
        .map(|(f, split)| -> Result<(FoldResult, FoldTrace)> {
            let outer_train = dataset.subset(&split.train);
            let candidates = candidates(config, &outer_train.class_sizes());
            let inner = stratified_kfold(
                outer_train.labels(),
                c,
                config.inner_folds,
                inner_seed(config.seed, f),
            )?;

            let inner_scores: Vec<Vec<f64>> = inner
                .par_iter()
                .map(|fold| {
                    let prepared = PreparedSplit::new(&outer_train, &fold.train)?;
                    score_candidates(
                        &prepared,
                        &outer_train.subset(&fold.test),
                        &candidates,
                        config,
                    )
                })
                .collect::<Result<_>>()?;
            let means: Vec<f64> = (0..candidates.len())
                .map(|i| inner_scores.iter().map(|s| s[i]).sum::<f64>() / inner.len() as f64)
                .collect();
            let mut best = 0;
            for (i, &score) in means.iter().enumerate() {
                if score > means[best] {
                    best = i;
                }
            }

            let chosen = &candidates[best];
            let prepared = PreparedSplit::new(dataset, &split.train)?;
            let policy = chosen
                .filter
                .resolve(&prepared.train.class_sizes(), config.filter.max_fraction());
            let settings = TrainSettings {
                architecture: config.architecture,
                membership: config.membership,
                sigma: chosen.sigma.unwrap_or(1.0),
                policy: policy.clone(),
                mode: config.training_mode,
                gradient: config.gradient,
            };
            let fit = prepared.fit(&settings)?;
            let (metric, metric_reversed) = evaluate(&fit.model, &dataset.subset(&split.test))?;

            let mut fitted: BTreeSet<usize> = prepared.train_ids.iter().copied().collect();
            let mut selection = BTreeSet::new();
            for fold in &inner {
                fitted.extend(fold.train.iter().map(|&i| split.train[i]));
                selection.extend(fold.test.iter().map(|&i| split.train[i]));
            }
            let result = FoldResult {
                fold: f,
                metric,
                metric_reversed,
                sigma: chosen.sigma,
                filter: policy.to_string(),
                n_ssv: fit.n_ssv,
                n_support_edges: fit.n_support_edges,
                n_removed: fit.removed.len(),
                fallback: fit.fallback,
                inner_score: means[best],
                train_size: split.train.len(),
                test_size: split.test.len(),
            };
            let trace = FoldTrace {
                fold: f,
                test: split.test.clone(),
                fitted: fitted.into_iter().collect(),
                selection: selection.into_iter().collect(),
            };
            Ok((result, trace))
        })
        .collect::<Result<_>>()?;

    let (per_fold, traces): (Vec<FoldResult>, Vec<FoldTrace>) = folds.into_iter().unzip();
    let summary = MetricReport::from_folds(per_fold.iter().map(|f| f.metric).collect());
    let report = CvReport {
        dataset: name.to_owned(),
        architecture: config.architecture,
        membership: config.membership,
        metric: if config.architecture.is_binary() {
            "auc".into()
        } else {
            "roc_auc_ovo".into()
        },
        positive_label: config
            .architecture
            .is_binary()
            .then(|| dataset.class_names()[1].clone()),
        outer_folds: config.outer_folds,
        inner_folds: config.inner_folds,
        seed: config.seed,
        candidates: candidates(config, &dataset.class_sizes()).len(),
        fallback_count: per_fold.iter().filter(|f| f.fallback).count(),
        per_fold,
        mean: summary.mean,
        std: summary.std,
    };
    Ok(NestedCvResult { report, traces })
}

/// Aligned plain-text rendering of a report.
pub fn format_table(report: &CvReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  {}  membership={}  metric={}",
        report.dataset,
        report.architecture,
        serde_json::to_value(report.membership)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        report.metric
    );
    let _ = writeln!(
        out,
        "{:>4}  {:>8}  {:>8}  {:>10}  {:<16}  {:>5}  {:>7}  {:>8}",
        "fold", "metric", "inner", "sigma", "filter", "n_ssv", "removed", "fallback"
    );
    for f in &report.per_fold {
        let sigma = f
            .sigma
            .map_or_else(|| "-".to_owned(), |s| format!("{s:.4}"));
        let _ = writeln!(
            out,
            "{:>4}  {:>8.4}  {:>8.4}  {:>10}  {:<16}  {:>5}  {:>7}  {:>8}",
            f.fold, f.metric, f.inner_score, sigma, f.filter, f.n_ssv, f.n_removed, f.fallback
        );
    }
    let _ = writeln!(out, "mean {:.4}  std {:.4}", report.mean, report.std);
    out
}
