use nalgebra::DMatrix;

use crate::data::{align_columns, Dataset};
use crate::error::Result;

/// A fitted binary classifier: anything that maps feature rows to the
/// probability of the event.
pub trait ProbabilityModel: Sync {
    fn feature_names(&self) -> &[String];

    /// P(Y = 1) for each row of `x`; columns must be in `feature_names` order.
    fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64>;

    fn predict(&self, data: &Dataset) -> Result<Vec<f64>> {
        let x = align_columns(data, self.feature_names())?;
        Ok(self.predict_rows(&x))
    }

    fn n_features(&self) -> usize {
        self.feature_names().len()
    }
}

/// Wraps a closure over a single feature row as a [`ProbabilityModel`].
pub struct FnModel<F> {
    names: Vec<String>,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(names: Vec<String>, f: F) -> Self {
        FnModel { names, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ProbabilityModel for FnModel<F> {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let mut row = vec![0.0; x.ncols()];
        (0..x.nrows())
            .map(|i| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = x[(i, j)];
                }
                (self.f)(&row)
            })
            .collect()
    }
}
