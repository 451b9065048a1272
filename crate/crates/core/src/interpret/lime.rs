//! Local surrogate explanations.
//!
//! The interpretable representation of an instance `x` is a binary vector
//! `z'`: `z'_j = 1` keeps `x_j`, `z'_j = 0` replaces it with the feature's
//! training mean (continuous) or mode (categorical). Perturbed samples are
//! weighted by `exp(-‖(z - x) / sd‖² / σ²)` and a linear model on `z'` with at
//! most `max_features` slopes is fitted by weighted least squares, features
//! being chosen by greedy forward selection on the weighted loss.

use nalgebra::{DMatrix, DVector};

use super::{ImportanceReport, Method};
use crate::data::{align_columns, Dataset};
use crate::error::{Error, Result};
use crate::model::ProbabilityModel;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LimeConfig {
    pub max_features: usize,
    pub samples: usize,
    /// Kernel width on standardized features; `f64::INFINITY` weighs all samples equally.
    pub kernel_width: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimeExplanation {
    pub features: Vec<String>,
    /// Indices of the features with a slope, in selection order.
    pub selected: Vec<usize>,
    /// One slope per feature; zero for unselected features.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Weighted squared error of the surrogate on the perturbed samples.
    pub loss: f64,
    /// Binary perturbations, one row per sample.
    pub design: DMatrix<f64>,
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LimeExplanation {
    pub fn to_report(&self) -> ImportanceReport {
        ImportanceReport {
            baseline: Some(self.intercept),
            metric: Some("local slope".into()),
            replicates: self.targets.len(),
            notes: vec![format!("surrogate weighted loss {:.6}", self.loss)],
            ..ImportanceReport::new(Method::Lime, self.features.clone(), self.coefficients.clone())
        }
    }
}

/// Solves weighted least squares on `[1 | z'_S]`; returns the coefficients,
/// weighted loss and numerical rank.
fn weighted_fit(design: &DMatrix<f64>, cols: &[usize], y: &[f64], w: &[f64]) -> (DVector<f64>, f64, usize) {
    let n = design.nrows();
    let p = cols.len() + 1;
    let a = DMatrix::from_fn(n, p, |i, k| {
        let v = if k == 0 { 1.0 } else { design[(i, cols[k - 1])] };
        v * w[i].sqrt()
    });
    let b = DVector::from_fn(n, |i, _| y[i] * w[i].sqrt());
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let tol = max * 1e-10 * (n.max(p) as f64);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let coef = svd.solve(&b, tol).expect("u and v were computed");
    let resid = &a * &coef - &b;
    (coef, resid.norm_squared(), rank)
}

pub fn lime_explain(
    model: &dyn ProbabilityModel,
    x: &[f64],
    data: &Dataset,
    config: &LimeConfig,
) -> Result<LimeExplanation> {
    let train = align_columns(data, model.feature_names())?;
    let d = train.ncols();
    if x.len() != d {
        return Err(Error::Schema(format!("instance has {} features, model expects {d}", x.len())));
    }
    if config.max_features > d {
        return Err(Error::Config(format!(
            "feature budget {} exceeds the {d} available features",
            config.max_features
        )));
    }
    if config.samples < d + 1 {
        return Err(Error::Config(format!(
            "{} perturbations cannot support {d} features (need at least {})",
            config.samples,
            d + 1
        )));
    }
    if !(config.kernel_width > 0.0) {
        return Err(Error::Config("kernel width must be positive".into()));
    }
    if train.nrows() == 0 {
        return Err(Error::Schema("reference data is empty".into()));
    }

    let n_ref = train.nrows() as f64;
    let mut replacement = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    for (j, col) in data.columns().iter().enumerate() {
        let values = train.column(j);
        let mean = values.sum() / n_ref;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_ref).sqrt();
        scale.push(if sd > 0.0 { sd } else { 1.0 });
        replacement.push(if col.kind.is_categorical() { mode(values.iter().copied()) } else { mean });
    }

    let mut rng = rng::substream(config.seed, 0);
    let m = config.samples;
    let mut design = DMatrix::zeros(m, d);
    for s in 0..m {
        for j in 0..d {
            design[(s, j)] = if s == 0 || rng::bernoulli(&mut rng, 0.5) { 1.0 } else { 0.0 };
        }
    }
    let perturbed = DMatrix::from_fn(m, d, |s, j| {
        if design[(s, j)] == 1.0 {
            x[j]
        } else {
            replacement[j]
        }
    });
    let targets = model.predict_rows(&perturbed);
    let weights: Vec<f64> = (0..m)
        .map(|s| {
            let dist2: f64 = (0..d)
                .map(|j| ((perturbed[(s, j)] - x[j]) / scale[j]).powi(2))
                .sum();
            (-dist2 / (config.kernel_width * config.kernel_width)).exp()
        })
        .collect();

    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < config.max_features {
        let mut best: Option<(f64, usize)> = None;
        for j in (0..d).filter(|j| !selected.contains(j)) {
            let mut cols = selected.clone();
            cols.push(j);
            let (_, loss, rank) = weighted_fit(&design, &cols, &targets, &weights);
            if rank < cols.len() + 1 {
                continue;
            }
            if best.is_none_or(|(l, _)| loss < l) {
                best = Some((loss, j));
            }
        }
        match best {
            Some((_, j)) => selected.push(j),
            None => break,
        }
    }

    let (coef, loss, rank) = weighted_fit(&design, &selected, &targets, &weights);
    if selected.len() < config.max_features || rank < selected.len() + 1 {
        return Err(Error::Rank {
            rank,
            needed: config.max_features + 1,
        });
    }
    let mut coefficients = vec![0.0; d];
    for (k, &j) in selected.iter().enumerate() {
        coefficients[j] = coef[k + 1];
    }
    Ok(LimeExplanation {
        features: model.feature_names().to_vec(),
        selected,
        coefficients,
        intercept: coef[0],
        loss,
        design,
        targets,
        weights,
    })
}

fn mode(values: impl Iterator<Item = f64>) -> f64 {
    let mut counts: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match counts.iter_mut().find(|(k, _)| *k == v) {
            Some((_, c)) => *c += 1,
            None => counts.push((v, 1)),
        }
    }
    // ties go to the smallest value
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.total_cmp(&b.0)));
    counts[0].0
}
