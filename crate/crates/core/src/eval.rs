//! Repeated random-split evaluation of GLM and NN classifiers.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::glm::{self, FitOptions, Penalty};
use crate::metrics::{Confusion, Metric, Summary};
use crate::model::ProbabilityModel;
use crate::nn::{self, Architecture, TrainConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duplication {
    Off,
    /// Balance the whole dataset once, then split; test sets gain copies too.
    BeforeSplit,
    /// Balance each training partition only; test sets keep the raw prevalence.
    TrainOnly,
}

impl fmt::Display for Duplication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Duplication::Off => "off",
            Duplication::BeforeSplit => "before-split",
            Duplication::TrainOnly => "train-only",
        })
    }
}

impl FromStr for Duplication {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Duplication::Off),
            "before-split" => Ok(Duplication::BeforeSplit),
            "train-only" => Ok(Duplication::TrainOnly),
            _ => Err(Error::Config(format!(
                "unknown duplication mode `{s}` (expected off, before-split or train-only)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiKind {
    Normal,
    Percentile,
}

impl fmt::Display for CiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiKind::Normal => "normal",
            CiKind::Percentile => "percentile",
        })
    }
}

impl FromStr for CiKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(CiKind::Normal),
            "percentile" => Ok(CiKind::Percentile),
            _ => Err(Error::Config(format!("unknown interval kind `{s}` (expected normal or percentile)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub replicates: usize,
    pub seed: u64,
    pub duplication: Duplication,
    /// Rows with predicted probability at or above this value are classed positive.
    pub threshold: f64,
    pub ci: CiKind,
}

impl SplitSpec {
    /// Two thirds for training, no rebalancing.
    pub fn simulation(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 2.0 / 3.0,
            replicates: 100,
            seed,
            duplication: Duplication::Off,
            threshold: 0.5,
            ci: CiKind::Normal,
        }
    }

    /// Three quarters for training, minority duplicated before splitting.
    pub fn imbalanced(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.75,
            duplication: Duplication::BeforeSplit,
            ..SplitSpec::simulation(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction {} must lie in (0, 1)",
                self.train_fraction
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Config("at least one replicate is required".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold {} must lie in (0, 1)", self.threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Glm { penalty: Penalty, options: FitOptions },
    Nn { arch: Architecture, train: TrainConfig },
}

impl MethodSpec {
    pub fn glm(penalty: Penalty) -> Self {
        MethodSpec::Glm {
            penalty,
            options: FitOptions::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Glm { .. } => "GLM",
            MethodSpec::Nn { .. } => "NN",
        }
    }

    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn ProbabilityModel>> {
        Ok(match self {
            MethodSpec::Glm { penalty, options } => Box::new(glm::fit_logistic_with(train, *penalty, *options)?),
            MethodSpec::Nn { arch, train: cfg } => {
                let cfg = TrainConfig { seed, ..cfg.clone() };
                Box::new(nn::train(train, arch, &cfg)?.model)
            }
        })
    }
}

/// Copies every minority row `floor(n_major / n_minor)` times in total and
/// shuffles the result.
pub fn duplicate_minority(data: &Dataset, seed: u64) -> Result<Dataset> {
    let positives = data.positives();
    let negatives = data.nrows() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Class(
            "duplication needs both classes to be present".into(),
        ));
    }
    let minority = u8::from(positives < negatives);
    let copies = positives.max(negatives) / positives.min(negatives);
    let mut rows: Vec<usize> = Vec::with_capacity(data.nrows() + (copies - 1) * positives.min(negatives));
    for (i, &y) in data.labels().iter().enumerate() {
        let k = if y == minority { copies } else { 1 };
        rows.extend(std::iter::repeat_n(i, k));
    }
    rng::shuffle(&mut rng::substream(seed, 0), &mut rows);
    Ok(data.select_rows(&rows))
}

/// Replicate split: shuffled indices, the first `round(fraction·n)` train.
fn split(n: usize, fraction: f64, seed: u64, replicate: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = rng::substream(seed, replicate as u64);
    let order = rng::permutation(&mut rng, n);
    let cut = ((fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    (order[..cut].to_vec(), order[cut..].to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: String,
    /// Test-set confusion counts, one per replicate.
    pub confusions: Vec<Confusion>,
    pub p_d: Summary,
    pub p_nd: Summary,
    pub p_g: Summary,
    /// Replicates left out of p_d (no positives in the test set).
    pub skipped_p_d: Vec<usize>,
    pub skipped_p_nd: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub spec: SplitSpec,
    pub methods: Vec<MethodResult>,
}

fn summarize(values: &[f64], ci: CiKind) -> Option<Summary> {
    match ci {
        CiKind::Normal => Summary::normal(values),
        CiKind::Percentile => Summary::percentile(values),
    }
}

fn collect(method: &str, confusions: Vec<Confusion>, spec: &SplitSpec) -> Result<MethodResult> {
    let mut skipped = [Vec::new(), Vec::new()];
    let mut values = [Vec::new(), Vec::new(), Vec::new()];
    for (r, c) in confusions.iter().enumerate() {
        for (k, metric) in [Metric::Sensitivity, Metric::Specificity, Metric::Accuracy].iter().enumerate() {
            match metric.of(c) {
                Some(v) => values[k].push(v),
                None if k < 2 => skipped[k].push(r),
                None => {}
            }
        }
    }
    let summary = |k: usize, metric: Metric| {
        summarize(&values[k], spec.ci).ok_or(Error::UndefinedMetric {
            metric: metric.short_name(),
            replicate: None,
        })
    };
    let [skipped_p_d, skipped_p_nd] = skipped;
    Ok(MethodResult {
        method: method.to_string(),
        p_d: summary(0, Metric::Sensitivity)?,
        p_nd: summary(1, Metric::Specificity)?,
        p_g: summary(2, Metric::Accuracy)?,
        confusions,
        skipped_p_d,
        skipped_p_nd,
    })
}

/// The dataset every replicate splits: `data`, balanced first when the
/// spec duplicates before splitting.
pub fn prepare(data: &Dataset, spec: &SplitSpec) -> Result<Dataset> {
    spec.validate()?;
    if data.nrows() < 2 {
        return Err(Error::Schema("need at least two rows to split".into()));
    }
    match spec.duplication {
        Duplication::BeforeSplit => duplicate_minority(data, rng::derive_seed(spec.seed, 1)),
        _ => Ok(data.clone()),
    }
}

/// Train and test partitions of replicate `r` of a prepared dataset.
pub fn replicate_split(prepared: &Dataset, spec: &SplitSpec, r: usize) -> Result<(Dataset, Dataset)> {
    let (train_rows, test_rows) = split(prepared.nrows(), spec.train_fraction, rng::derive_seed(spec.seed, 2), r);
    let mut train = prepared.select_rows(&train_rows);
    if spec.duplication == Duplication::TrainOnly {
        train = duplicate_minority(&train, rng::derive_seed(spec.seed, 1 + ((r as u64) << 8)))?;
    }
    Ok((train, prepared.select_rows(&test_rows)))
}

/// Training seed of method `m` in replicate `r`.
pub fn fit_seed(spec: &SplitSpec, m: usize, r: usize) -> u64 {
    rng::derive_seed(rng::derive_seed(rng::derive_seed(spec.seed, 3), m as u64), r as u64)
}

pub fn evaluate(data: &Dataset, methods: &[MethodSpec], spec: &SplitSpec) -> Result<EvalReport> {
    if methods.is_empty() {
        return Err(Error::Config("no methods to evaluate".into()));
    }
    let data = prepare(data, spec)?;
    let per_replicate: Vec<Vec<Confusion>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let (train, test) = replicate_split(&data, spec, r)?;
            methods
                .iter()
                .enumerate()
                .map(|(m, method)| {
                    let model = method.fit(&train, fit_seed(spec, m, r))?;
                    let probs = model.predict(&test)?;
                    Ok(Confusion::from_probabilities(&probs, test.labels(), spec.threshold))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let results = methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let confusions = per_replicate.iter().map(|row| row[m]).collect();
            collect(method.name(), confusions, spec)
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        spec: spec.clone(),
        methods: results,
    })
}

impl EvalReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,p_d,p_nd,p_g,ci_p_d_lower,ci_p_d_upper,ci_p_nd_lower,ci_p_nd_upper,replicates,skipped_p_d\n",
        );
        for m in &self.methods {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
                m.method,
                m.p_d.mean,
                m.p_nd.mean,
                m.p_g.mean,
                m.p_d.lower,
                m.p_d.upper,
                m.p_nd.lower,
                m.p_nd.upper,
                m.confusions.len(),
                m.skipped_p_d.len()
            );
        }
        out
    }

    /// Per-replicate confusion counts.
    pub fn counts_csv(&self) -> String {
        let mut out = String::from("method,replicate,tp,fp,tn,fn\n");
        for m in &self.methods {
            for (r, c) in m.confusions.iter().enumerate() {
                let _ = writeln!(out, "{},{r},{},{},{},{}", m.method, c.tp, c.fp, c.tn, c.fn_);
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Method | p_d | p_nd | p_g | CI95(p_d) | CI95(p_nd) |\n|---|---|---|---|---|---|\n",
        );
        for m in &self.methods {
            let _ = writeln!(
                out,
                "| {} | {:.3} | {:.3} | {:.3} | {:.3} {:.3} | {:.3} {:.3} |",
                m.method, m.p_d.mean, m.p_nd.mean, m.p_g.mean, m.p_d.lower, m.p_d.upper, m.p_nd.lower, m.p_nd.upper
            );
        }
        let s = &self.spec;
        let _ = write!(
            out,
            "\nN = {} splits, train fraction {:.4}, threshold {}, duplication {}, {} intervals, seed {}\n",
            s.replicates, s.train_fraction, s.threshold, s.duplication, s.ci, s.seed
        );
        for m in self.methods.iter().filter(|m| !m.skipped_p_d.is_empty()) {
            let _ = writeln!(
                out,
                "{}: {} replicate(s) without test positives left out of p_d",
                m.method,
                m.skipped_p_d.len()
            );
        }
        out
    }
}
