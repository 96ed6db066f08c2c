//! Evaluation protocol: repeated stratified splits, one shared forest per
//! split, every method predicting from that forest, and the aggregate report.

pub mod diagnostics;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{wrf_predict_votes, wrf_weights, KnoraModel, DEFAULT_K};
use crate::data::{stratified_split, Dataset};
use crate::forest::{argmax, uniform_proba, ForestConfig, ForestModel};
use crate::paw::{
    estimate_weight_table_cv, oob_table_from_view, predict_naive_votes, predict_weighted_votes, select_k,
    CvRecords, Indicators, OobView, PawConfig, WeightTable, WeightVariant, DEFAULT_K_CANDIDATES, MIN_N,
};
use crate::stats::{mean, pearson, quintile_table, spearman, wilcoxon_signed_rank, QuintileRow, WilcoxonResult, WinTieLoss};
use crate::{exec, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
/// Per-class recall drops beyond this count as regressions.
pub const RECALL_THRESHOLD: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "paw")]
    Paw,
    #[serde(rename = "paw-amp")]
    PawAmp,
    #[serde(rename = "naive")]
    Naive,
    #[serde(rename = "wrf")]
    Wrf,
    #[serde(rename = "kne")]
    Kne,
    #[serde(rename = "knu")]
    Knu,
    #[serde(rename = "paw-oob")]
    PawOob,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Rf,
        Method::Paw,
        Method::PawAmp,
        Method::Naive,
        Method::Wrf,
        Method::Kne,
        Method::Knu,
        Method::PawOob,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rf => "rf",
            Method::Paw => "paw",
            Method::PawAmp => "paw-amp",
            Method::Naive => "naive",
            Method::Wrf => "wrf",
            Method::Kne => "kne",
            Method::Knu => "knu",
            Method::PawOob => "paw-oob",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub repeats: usize,
    pub n_trees: usize,
    pub base_seed: u64,
    pub test_fraction: f64,
    pub k_candidates: Vec<u32>,
    /// Trees per inner cross-validation forest; defaults to `n_trees`.
    pub inner_trees: Option<usize>,
    pub folds: usize,
    pub weight_variant: WeightVariant,
    pub knn_k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            repeats: 30,
            n_trees: 300,
            base_seed: 42,
            test_fraction: 0.3,
            k_candidates: DEFAULT_K_CANDIDATES.to_vec(),
            inner_trees: None,
            folds: 5,
            weight_variant: WeightVariant::Cv,
            knn_k: DEFAULT_K,
        }
    }
}

/// One method on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub method: Method,
    pub repeat: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub minority_recall: f64,
    pub majority_recall: f64,
    pub n_test: usize,
    pub n_minority: usize,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "K_star")]
    pub k_star: Option<u32>,
}

impl RunRecord {
    /// Accuracy recomputed from the per-class recalls.
    pub fn accuracy_from_recalls(&self) -> f64 {
        let n_maj = self.n_test - self.n_minority;
        (self.minority_recall * self.n_minority as f64 + self.majority_recall * n_maj as f64) / self.n_test as f64
    }
}

/// Accuracy and per-class recalls of hard predictions.
pub fn score(predictions: &[u8], labels: &[u8], minority: u8) -> (f64, f64, f64) {
    let (mut hit, mut min_hit, mut min_n, mut maj_hit, mut maj_n) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels) {
        let ok = p == y;
        hit += usize::from(ok);
        if y == minority {
            min_n += 1;
            min_hit += usize::from(ok);
        } else {
            maj_n += 1;
            maj_hit += usize::from(ok);
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(hit, labels.len()), ratio(min_hit, min_n), ratio(maj_hit, maj_n))
}

/// Everything computed on one split, before scoring.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub repeat: usize,
    pub seed: u64,
    pub test_labels: Vec<u8>,
    pub minority: u8,
    pub indicators: Indicators,
    /// Hard predictions per method, test rows in split order.
    pub predictions: BTreeMap<Method, Vec<u8>>,
    pub k_star: Option<u32>,
    /// Tables estimated on this split, by variant.
    pub tables: BTreeMap<String, WeightTable>,
}

impl SplitOutcome {
    pub fn records(&self, dataset: &str) -> Vec<RunRecord> {
        let n_minority = self.test_labels.iter().filter(|&&y| y == self.minority).count();
        self.predictions
            .iter()
            .map(|(&method, pred)| {
                let (accuracy, minority_recall, majority_recall) = score(pred, &self.test_labels, self.minority);
                RunRecord {
                    dataset: dataset.to_string(),
                    method,
                    repeat: self.repeat,
                    seed: self.seed,
                    accuracy,
                    minority_recall,
                    majority_recall,
                    n_test: self.test_labels.len(),
                    n_minority,
                    m: self.indicators.mass,
                    s: self.indicators.spread,
                    k_star: matches!(method, Method::PawAmp).then_some(self.k_star).flatten(),
                }
            })
            .collect()
    }
}

fn weighted_or_rf(votes: &[crate::VoteRecord], proba: &[f64; 2], table: &WeightTable) -> u8 {
    match predict_weighted_votes(votes, proba, table) {
        Ok(p) => argmax(&p),
        Err(_) => {
            log::warn!("all weights zero for a test row; using the uniform vote");
            argmax(proba)
        }
    }
}

/// The shared forest of one split with its train/test rows and test votes.
#[derive(Debug, Clone)]
pub struct SplitArtifacts {
    pub forest: ForestModel,
    pub train: Dataset,
    pub test: Dataset,
    pub votes: Vec<Vec<crate::VoteRecord>>,
}

/// Runs every requested method on split `repeat` of `ds`.
pub fn run_split(ds: &Dataset, methods: &[Method], cfg: &EvalConfig, repeat: usize) -> Result<SplitOutcome> {
    run_split_full(ds, methods, cfg, repeat).map(|(o, _)| o)
}

/// As [`run_split`], also returning the shared forest and split data.
pub fn run_split_full(ds: &Dataset, methods: &[Method], cfg: &EvalConfig, repeat: usize) -> Result<(SplitOutcome, SplitArtifacts)> {
    let seed = cfg.base_seed + repeat as u64;
    let plan = stratified_split(ds, cfg.test_fraction, seed)?;
    let train = ds.subset(&plan.train_indices)?;
    let test = ds.subset(&plan.test_indices)?;
    let forest = ForestModel::fit(&train, &ForestConfig::new(cfg.n_trees, seed))?;
    let votes = forest.votes_batch(&test)?;
    let proba: Vec<[f64; 2]> = votes.iter().map(|v| uniform_proba(v)).collect();
    let view = OobView::new(&forest, &train)?;
    let indicators = Indicators::from_view(&view, train.labels())?;

    let wants = |m: Method| methods.contains(&m);
    let needs_cv = (wants(Method::Paw) || wants(Method::PawAmp)) && cfg.weight_variant == WeightVariant::Cv;
    let needs_oob = wants(Method::PawOob) || ((wants(Method::Paw) || wants(Method::PawAmp)) && cfg.weight_variant == WeightVariant::Oob);

    let mut tables = BTreeMap::new();
    let mut cv: Option<(WeightTable, CvRecords)> = None;
    if needs_cv {
        let paw_cfg = PawConfig {
            n_trees: cfg.inner_trees.unwrap_or(cfg.n_trees),
            folds: cfg.folds,
            min_n: MIN_N,
            max_features: None,
        };
        let est = estimate_weight_table_cv(&train, &paw_cfg, seed)?;
        tables.insert("cv".to_string(), est.0.clone());
        cv = Some(est);
    }
    let mut oob: Option<(WeightTable, CvRecords)> = None;
    if needs_oob {
        let est = oob_table_from_view(&view, train.labels(), &forest, MIN_N);
        tables.insert("oob".to_string(), est.0.clone());
        oob = Some(est);
    }
    let chosen = match cfg.weight_variant {
        WeightVariant::Cv => cv.as_ref(),
        WeightVariant::Oob => oob.as_ref(),
    };

    let mut predictions = BTreeMap::new();
    let mut k_star = None;
    let per_row = |f: &(dyn Fn(usize) -> u8 + Sync)| exec::map_range(votes.len(), f);
    for &m in methods {
        if predictions.contains_key(&m) {
            continue;
        }
        let pred: Vec<u8> = match m {
            Method::Rf => proba.iter().map(argmax).collect(),
            Method::Paw => {
                let (table, _) = chosen.expect("table estimated");
                per_row(&|i| weighted_or_rf(&votes[i], &proba[i], table))
            }
            Method::PawAmp => {
                let (table, records) = chosen.expect("table estimated");
                let sel = select_k(records, &indicators, table, &cfg.k_candidates)?;
                k_star = Some(sel.k_star);
                let amp = table.amplify(sel.alpha);
                per_row(&|i| weighted_or_rf(&votes[i], &proba[i], &amp))
            }
            Method::PawOob => {
                let (table, _) = oob.as_ref().expect("oob table");
                per_row(&|i| weighted_or_rf(&votes[i], &proba[i], table))
            }
            Method::Naive => votes.iter().map(|v| argmax(&predict_naive_votes(v))).collect(),
            Method::Wrf => {
                let w = wrf_weights(&forest, &train)?;
                let out: Result<Vec<u8>> = votes.iter().map(|v| wrf_predict_votes(v, &w).map(|p| argmax(&p))).collect();
                out?
            }
            Method::Kne | Method::Knu => {
                let model = KnoraModel::new(&forest, &train, cfg.knn_k)?;
                let out: Result<Vec<u8>> = exec::map_range(votes.len(), |i| {
                    let x = test.row(i);
                    let p = if m == Method::Kne {
                        model.eliminate_votes(&votes[i], x)
                    } else {
                        model.union_votes(&votes[i], x)
                    };
                    p.map(|p| argmax(&p))
                })
                .into_iter()
                .collect();
                out?
            }
        };
        predictions.insert(m, pred);
    }
    let outcome = SplitOutcome {
        repeat,
        seed,
        test_labels: test.labels().to_vec(),
        minority: ds.minority_class(),
        indicators,
        predictions,
        k_star,
        tables,
    };
    Ok((
        outcome,
        SplitArtifacts {
            forest,
            train,
            test,
            votes,
        },
    ))
}

/// All repeats on one dataset, in repeat order.
pub fn evaluate_dataset(ds: &Dataset, methods: &[Method], cfg: &EvalConfig) -> Result<Vec<SplitOutcome>> {
    exec::try_map_range(cfg.repeats, |r| run_split(ds, methods, cfg, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodMeans {
    pub accuracy: f64,
    pub minority_recall: f64,
    pub majority_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub minority_fraction: f64,
    pub means: BTreeMap<Method, MethodMeans>,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "MS")]
    pub ms: f64,
    /// Share of repeats with each selected `K`.
    pub k_star_counts: BTreeMap<u32, usize>,
}

impl DatasetSummary {
    pub fn delta(&self, method: Method) -> Option<MethodMeans> {
        let rf = self.means.get(&Method::Rf)?;
        let m = self.means.get(&method)?;
        Some(MethodMeans {
            accuracy: m.accuracy - rf.accuracy,
            minority_recall: m.minority_recall - rf.minority_recall,
            majority_recall: m.majority_recall - rf.majority_recall,
        })
    }
}

/// One method against RF across datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method: Method,
    /// `(dataset, delta means)` in dataset order.
    pub deltas: Vec<(String, MethodMeans)>,
    pub mean_delta_accuracy: f64,
    pub mean_delta_minority_recall: f64,
    pub mean_delta_majority_recall: f64,
    pub wtl: WinTieLoss,
    pub wilcoxon: Option<WilcoxonResult>,
    pub minority_regressions: usize,
    pub majority_regressions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub dataset: String,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "MS")]
    pub ms: f64,
    pub delta_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub pearson: f64,
    pub spearman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub dataset: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub methods: Vec<Method>,
    pub datasets: Vec<DatasetSummary>,
    pub comparisons: Vec<Comparison>,
    pub indicators: Vec<IndicatorRow>,
    /// Method whose delta feeds the indicator analyses.
    pub indicator_method: Option<Method>,
    pub quintiles: Option<Vec<QuintileRow>>,
    pub correlation: Option<Correlation>,
    pub failures: Vec<Failure>,
    pub records: Vec<RunRecord>,
}

impl EvalReport {
    pub fn dataset(&self, name: &str) -> Option<&DatasetSummary> {
        self.datasets.iter().find(|d| d.dataset == name)
    }

    pub fn comparison(&self, method: Method) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn dedup_methods(methods: &[Method]) -> Vec<Method> {
    let mut out: Vec<Method> = Vec::new();
    for &m in methods {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// Full protocol over `datasets`. Datasets that fail are logged and listed
/// in `failures`; the rest of the suite still runs.
pub fn evaluate(datasets: &[Dataset], methods: &[Method], cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.repeats == 0 || cfg.n_trees == 0 {
        return Err(Error::InvalidArgument("repeats and trees must be >= 1".into()));
    }
    let methods = dedup_methods(methods);
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods".into()));
    }
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for ds in datasets {
        match evaluate_dataset(ds, &methods, cfg) {
            Ok(o) => outcomes.push((ds, o)),
            Err(e) => {
                log::error!("dataset {} failed: {e}", ds.name());
                failures.push(Failure {
                    dataset: ds.name().to_string(),
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(assemble(&outcomes, &methods, cfg, failures))
}

/// Builds the report from completed splits.
pub fn assemble(outcomes: &[(&Dataset, Vec<SplitOutcome>)], methods: &[Method], cfg: &EvalConfig, failures: Vec<Failure>) -> EvalReport {
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (ds, splits) in outcomes {
        let recs: Vec<RunRecord> = splits.iter().flat_map(|s| s.records(ds.name())).collect();
        let mut means = BTreeMap::new();
        for &m in methods {
            let of: Vec<&RunRecord> = recs.iter().filter(|r| r.method == m).collect();
            let avg = |f: fn(&RunRecord) -> f64| mean(&of.iter().map(|r| f(r)).collect::<Vec<_>>());
            means.insert(
                m,
                MethodMeans {
                    accuracy: avg(|r| r.accuracy),
                    minority_recall: avg(|r| r.minority_recall),
                    majority_recall: avg(|r| r.majority_recall),
                },
            );
        }
        let m = mean(&splits.iter().map(|s| s.indicators.mass).collect::<Vec<_>>());
        let s = mean(&splits.iter().map(|s| s.indicators.spread).collect::<Vec<_>>());
        let mut k_star_counts = BTreeMap::new();
        for k in splits.iter().filter_map(|s| s.k_star) {
            *k_star_counts.entry(k).or_insert(0) += 1;
        }
        summaries.push(DatasetSummary {
            dataset: ds.name().to_string(),
            n_samples: ds.n_samples(),
            n_features: ds.n_features(),
            minority_fraction: ds.minority_fraction(),
            means,
            m,
            s,
            ms: m * s,
            k_star_counts,
        });
        records.extend(recs);
    }

    let comparisons: Vec<Comparison> = methods
        .iter()
        .filter(|&&m| m != Method::Rf && methods.contains(&Method::Rf))
        .map(|&m| compare(&summaries, m))
        .collect();

    let indicator_method = [Method::Paw, Method::PawAmp, Method::PawOob]
        .into_iter()
        .find(|m| methods.contains(m));
    let indicators: Vec<IndicatorRow> = summaries
        .iter()
        .map(|d| IndicatorRow {
            dataset: d.dataset.clone(),
            m: d.m,
            s: d.s,
            ms: d.ms,
            delta_accuracy: indicator_method.and_then(|im| d.delta(im)).map(|x| x.accuracy),
        })
        .collect();
    let paired: Vec<(f64, f64)> = indicators.iter().filter_map(|r| r.delta_accuracy.map(|d| (r.ms, d))).collect();
    let ms: Vec<f64> = paired.iter().map(|p| p.0).collect();
    let deltas: Vec<f64> = paired.iter().map(|p| p.1).collect();
    let quintiles = quintile_table(&ms, &deltas).ok();
    let correlation = match (pearson(&ms, &deltas), spearman(&ms, &deltas)) {
        (Ok(p), Ok(s)) => Some(Correlation {
            n: ms.len(),
            pearson: p,
            spearman: s,
        }),
        _ => None,
    };

    EvalReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        methods: methods.to_vec(),
        datasets: summaries,
        comparisons,
        indicators,
        indicator_method,
        quintiles,
        correlation,
        failures,
        records,
    }
}

fn compare(summaries: &[DatasetSummary], method: Method) -> Comparison {
    let deltas: Vec<(String, MethodMeans)> = summaries
        .iter()
        .filter_map(|d| d.delta(method).map(|x| (d.dataset.clone(), x)))
        .collect();
    let acc: Vec<f64> = deltas.iter().map(|d| d.1.accuracy).collect();
    let min: Vec<f64> = deltas.iter().map(|d| d.1.minority_recall).collect();
    let maj: Vec<f64> = deltas.iter().map(|d| d.1.majority_recall).collect();
    Comparison {
        method,
        mean_delta_accuracy: mean(&acc),
        mean_delta_minority_recall: mean(&min),
        mean_delta_majority_recall: mean(&maj),
        wtl: WinTieLoss::of(&acc),
        wilcoxon: wilcoxon_signed_rank(&acc).ok(),
        minority_regressions: min.iter().filter(|d| **d < -RECALL_THRESHOLD).count(),
        majority_regressions: maj.iter().filter(|d| **d < -RECALL_THRESHOLD).count(),
        deltas,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
        assert!("forest".parse::<Method>().is_err());
    }

    #[test]
    fn score_identity() {
        let (acc, rmin, rmaj) = score(&[1, 0, 0, 1, 0], &[1, 1, 0, 0, 0], 1);
        assert_eq!(acc, 0.6);
        assert_eq!(rmin, 0.5);
        assert!((rmaj - 2.0 / 3.0).abs() < 1e-15);
    }
}
