use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The four counts of a thresholded binary classification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Rows with probability at or above `threshold` are classified positive.
    pub fn from_probabilities(probs: &[f64], labels: &[u8], threshold: f64) -> Confusion {
        let mut c = Confusion::default();
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= threshold, y == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn total(&self) -> usize {
        self.positives() + self.negatives()
    }

    /// p_d: share of diseased rows predicted diseased.
    pub fn sensitivity(&self) -> Option<f64> {
        (self.positives() > 0).then(|| self.tp as f64 / self.positives() as f64)
    }

    /// p_nd: share of non-diseased rows predicted non-diseased.
    pub fn specificity(&self) -> Option<f64> {
        (self.negatives() > 0).then(|| self.tn as f64 / self.negatives() as f64)
    }

    /// p_g: overall share of correct predictions.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total() > 0).then(|| (self.tp + self.tn) as f64 / self.total() as f64)
    }
}

impl std::ops::AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Sensitivity,
    Specificity,
    Accuracy,
}

impl Metric {
    pub fn of(self, c: &Confusion) -> Option<f64> {
        match self {
            Metric::Sensitivity => c.sensitivity(),
            Metric::Specificity => c.specificity(),
            Metric::Accuracy => c.accuracy(),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Sensitivity => "p_d",
            Metric::Specificity => "p_nd",
            Metric::Accuracy => "p_g",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "p_d" | "sensitivity" => Ok(Metric::Sensitivity),
            "p_nd" | "specificity" => Ok(Metric::Specificity),
            "p_g" | "accuracy" => Ok(Metric::Accuracy),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Mean, sample standard deviation and the normal-approximation interval
/// `mean ± 1.96 sd / √n` of a set of replicate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Summary {
    pub fn normal(values: &[f64]) -> Option<Summary> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = 1.96 * sd / (n as f64).sqrt();
        Some(Summary {
            mean,
            sd,
            n,
            lower: mean - half,
            upper: mean + half,
        })
    }

    /// Same mean, with the 2.5% and 97.5% empirical quantiles as bounds.
    pub fn percentile(values: &[f64]) -> Option<Summary> {
        let mut s = Summary::normal(values)?;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        s.lower = quantile(&sorted, 0.025);
        s.upper = quantile(&sorted, 0.975);
        Some(s)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
