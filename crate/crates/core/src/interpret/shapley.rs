//! Shapley attribution of the explained variance `val(u) = var(E[f(x) | x_u])`.
//!
//! Coalitions are bitmasks over the features. The conditional expectation is
//! estimated under feature independence: coordinates outside `u` are
//! replaced by a shared background sample whose coordinates are drawn
//! independently from the empirical marginals. Sharing the background across
//! rows and coalitions keeps the estimates coherent, so a feature the model
//! ignores contributes exactly nothing.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::{ImportanceReport, Method};
use crate::data::{align_columns, Dataset};
use crate::error::{Error, Result};
use crate::model::ProbabilityModel;
use crate::rng;

/// Largest feature count handled by exact subset enumeration.
pub const MAX_EXACT_FEATURES: usize = 15;

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Shapley values from a full table of coalition values indexed by bitmask
/// (`values.len() == 2^d`):
/// `φ_i = (1/d) Σ_{u ⊆ -i} (val(u ∪ i) - val(u)) / C(d-1, |u|)`.
pub fn shapley_from_values(d: usize, values: &[f64]) -> Result<Vec<f64>> {
    if d > MAX_EXACT_FEATURES {
        return Err(Error::Size(format!(
            "{d} features exceed the exact-enumeration limit of {MAX_EXACT_FEATURES}; \
             a sampling estimator is needed"
        )));
    }
    if values.len() != 1 << d {
        return Err(Error::Schema(format!(
            "{} coalition values for {d} features (expected {})",
            values.len(),
            1usize << d
        )));
    }
    let weights: Vec<f64> = (0..d.max(1))
        .map(|k| (-ln_choose(d - 1, k)).exp() / d as f64)
        .collect();
    Ok((0..d)
        .map(|i| {
            let bit = 1usize << i;
            (0..1usize << d)
                .filter(|u| u & bit == 0)
                .map(|u| weights[u.count_ones() as usize] * (values[u | bit] - values[u]))
                .sum()
        })
        .collect())
}

/// Monte Carlo coalition values over the rows of `data`, using `samples`
/// background draws.
pub fn coalition_values(
    model: &dyn ProbabilityModel,
    data: &Dataset,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let x = align_columns(data, model.feature_names())?;
    let (n, d) = x.shape();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::Size(format!(
            "{d} features exceed the exact-enumeration limit of {MAX_EXACT_FEATURES}; \
             a sampling estimator is needed"
        )));
    }
    if n == 0 || samples == 0 {
        return Err(Error::Config("need at least one row and one background sample".into()));
    }
    let mut background = DMatrix::zeros(samples, d);
    for j in 0..d {
        let mut r = rng::substream(seed, j as u64);
        for s in 0..samples {
            let src = (rng::unit(&mut r) * n as f64) as usize;
            background[(s, j)] = x[(src.min(n - 1), j)];
        }
    }
    let full = (1usize << d) - 1;
    (0..1usize << d)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return Ok(0.0);
            }
            let conditional: Vec<f64> = if mask == full {
                model.predict_rows(&x)
            } else {
                let mut mean = vec![0.0; n];
                let mut block = DMatrix::zeros(samples, d);
                for (i, m) in mean.iter_mut().enumerate() {
                    for s in 0..samples {
                        for j in 0..d {
                            block[(s, j)] = if mask & (1 << j) != 0 {
                                x[(i, j)]
                            } else {
                                background[(s, j)]
                            };
                        }
                    }
                    *m = model.predict_rows(&block).iter().sum::<f64>() / samples as f64;
                }
                mean
            };
            Ok(population_variance(&conditional))
        })
        .collect()
}

fn population_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
}

pub fn shapley(
    model: &dyn ProbabilityModel,
    data: &Dataset,
    samples: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    let d = model.n_features();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::Size(format!(
            "{d} features exceed the exact-enumeration limit of {MAX_EXACT_FEATURES}; \
             a sampling estimator is needed"
        )));
    }
    let values = coalition_values(model, data, samples, seed)?;
    let phi = shapley_from_values(d, &values)?;
    Ok(ImportanceReport {
        baseline: Some(values[values.len() - 1]),
        metric: Some("explained variance".into()),
        replicates: samples,
        notes: vec![
            "conditional expectations assume independent features".into(),
            "baseline is val(all features) = var f(x); scores sum to it".into(),
        ],
        ..ImportanceReport::new(Method::Shapley, model.feature_names().to_vec(), phi)
    })
}
