use super::{ImportanceReport, Method};
use crate::error::{Error, Result};
use crate::nn::NnModel;

/// Garson's weight-ratio importance for a single-hidden-layer network.
///
/// With `w(i, j)` the weight from input `i` to hidden node `j` and `v(j)` the
/// output weight of node `j`, input `l` scores
/// `Σ_j |w(l,j)| / Σ_i |w(i,j)| · |v(j)|`, normalised to sum to one. The
/// two-class softmax output is reduced to the single column
/// `v(j) = β(j, 1) - β(j, 0)`, which is the weight on the log-odds.
/// Biases do not take part.
pub fn garson(model: &NnModel) -> Result<ImportanceReport> {
    if model.layers.len() != 2 {
        return Err(Error::UnsupportedArchitecture(format!(
            "Garson's method needs exactly one hidden layer, this network has {}",
            model.layers.len() - 1
        )));
    }
    if model.classes() != 2 {
        return Err(Error::UnsupportedArchitecture(format!(
            "Garson's method needs a two-class output, this network has {}",
            model.classes()
        )));
    }
    let input = &model.layers[0];
    let output = &model.layers[1];
    let d = model.inputs();
    let hidden = input.ncols();

    let mut shares = vec![0.0; d];
    for j in 0..hidden {
        let v = (output[(j + 1, 1)] - output[(j + 1, 0)]).abs();
        let column_total: f64 = (0..d).map(|i| input[(i + 1, j)].abs()).sum();
        if column_total == 0.0 {
            continue;
        }
        for (l, share) in shares.iter_mut().enumerate() {
            *share += input[(l + 1, j)].abs() / column_total * v;
        }
    }
    let total: f64 = shares.iter().sum();
    if total == 0.0 {
        return Err(Error::UnsupportedArchitecture(
            "all hidden-to-output weights are zero; importances are undefined".into(),
        ));
    }
    let scores = shares.into_iter().map(|s| s / total).collect();
    Ok(ImportanceReport::new(Method::Garson, model.feature_names.clone(), scores))
}
