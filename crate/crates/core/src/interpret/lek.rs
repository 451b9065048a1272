use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::data::{align_columns, Dataset};
use crate::error::{Error, Result};
use crate::metrics::quantile;
use crate::model::ProbabilityModel;

pub const DEFAULT_QUANTILES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Predicted probability along one feature, with every other feature pinned
/// at a common quantile level.
#[derive(Debug, Clone, PartialEq)]
pub struct LekProfile {
    pub feature: String,
    /// Values of the profiled feature, spanning its observed range.
    pub grid: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// `values[q][g]`: prediction at quantile level `q`, grid point `g`.
    pub values: Vec<Vec<f64>>,
}

impl LekProfile {
    pub fn to_csv(&self) -> String {
        let mut out = format!("quantile,{}", self.feature);
        out.push_str(",probability\n");
        for (q, row) in self.quantiles.iter().zip(&self.values) {
            for (g, v) in self.grid.iter().zip(row) {
                let _ = writeln!(out, "{q:?},{g:?},{v:?}");
            }
        }
        out
    }
}

pub fn lek_profile(
    model: &dyn ProbabilityModel,
    data: &Dataset,
    feature: usize,
    grid_points: usize,
    quantiles: &[f64],
) -> Result<LekProfile> {
    let x = align_columns(data, model.feature_names())?;
    let column = data
        .columns()
        .get(feature)
        .ok_or_else(|| Error::Config(format!("feature index {feature} out of range")))?;
    if column.kind.is_categorical() {
        return Err(Error::UnsupportedFeature(format!(
            "Lek profiles need a continuous predictor; `{}` is categorical",
            column.name
        )));
    }
    if grid_points < 2 {
        return Err(Error::Config("a profile needs at least two grid points".into()));
    }
    if quantiles.is_empty() || quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(Error::Config("quantile levels must lie in [0, 1]".into()));
    }
    if x.nrows() == 0 {
        return Err(Error::Schema("empty dataset".into()));
    }

    let sorted: Vec<Vec<f64>> = (0..x.ncols())
        .map(|j| {
            let mut c: Vec<f64> = x.column(j).iter().copied().collect();
            c.sort_by(f64::total_cmp);
            c
        })
        .collect();
    let (lo, hi) = (sorted[feature][0], *sorted[feature].last().expect("non-empty"));
    let grid: Vec<f64> = (0..grid_points)
        .map(|g| lo + (hi - lo) * g as f64 / (grid_points - 1) as f64)
        .collect();

    let values = quantiles
        .iter()
        .map(|&q| {
            let pinned: Vec<f64> = sorted.iter().map(|c| quantile(c, q)).collect();
            let rows = DMatrix::from_fn(grid_points, x.ncols(), |g, j| {
                if j == feature {
                    grid[g]
                } else {
                    pinned[j]
                }
            });
            model.predict_rows(&rows)
        })
        .collect();
    Ok(LekProfile {
        feature: column.name.clone(),
        grid,
        quantiles: quantiles.to_vec(),
        values,
    })
}
