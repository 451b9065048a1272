use rayon::prelude::*;

use super::{ImportanceReport, Method};
use crate::data::{align_columns, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{Confusion, Metric, Summary};
use crate::model::ProbabilityModel;
use crate::rng;

/// Shuffles each feature column of `test` in turn, `replicates` times, with
/// the model and the other columns held fixed, and reports the mean metric.
///
/// Replicate `r` of feature `j` draws from substream `r` of the seed derived
/// from `(seed, j)`, so results do not depend on scheduling.
pub fn permutation_importance(
    model: &dyn ProbabilityModel,
    test: &Dataset,
    metric: Metric,
    threshold: f64,
    replicates: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if replicates == 0 {
        return Err(Error::Config("at least one permutation is required".into()));
    }
    let x = align_columns(test, model.feature_names())?;
    let labels = test.labels();
    let evaluate = |probs: &[f64], replicate: Option<usize>| {
        metric
            .of(&Confusion::from_probabilities(probs, labels, threshold))
            .ok_or(Error::UndefinedMetric {
                metric: metric.short_name(),
                replicate,
            })
    };
    let baseline = evaluate(&model.predict_rows(&x), None)?;

    let d = x.ncols();
    let tasks: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (0..replicates).map(move |r| (j, r)))
        .collect();
    let values: Vec<f64> = tasks
        .par_iter()
        .map(|&(j, r)| {
            let mut rng = rng::substream(rng::derive_seed(seed, j as u64), r as u64);
            let perm = rng::permutation(&mut rng, x.nrows());
            let mut shuffled = x.clone();
            for (i, &src) in perm.iter().enumerate() {
                shuffled[(i, j)] = x[(src, j)];
            }
            evaluate(&model.predict_rows(&shuffled), Some(r))
        })
        .collect::<Result<_>>()?;

    let mut scores = Vec::with_capacity(d);
    let mut ci = Vec::with_capacity(d);
    for chunk in values.chunks(replicates) {
        let s = Summary::normal(chunk).expect("non-empty");
        scores.push(s.mean);
        ci.push((s.lower, s.upper));
    }
    Ok(ImportanceReport {
        baseline: Some(baseline),
        metric: Some(metric.short_name().into()),
        replicates,
        ci: Some(ci),
        ..ImportanceReport::new(Method::Permutation, model.feature_names().to_vec(), scores)
    })
}
