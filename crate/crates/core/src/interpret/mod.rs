//! Feature attribution for fitted models.

mod garson;
mod lek;
mod lime;
mod permutation;
mod shapley;

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

pub use garson::garson;
pub use lek::{lek_profile, LekProfile, DEFAULT_QUANTILES};
pub use lime::{lime_explain, LimeConfig, LimeExplanation};
pub use permutation::permutation_importance;
pub use shapley::{coalition_values, shapley, shapley_from_values, MAX_EXACT_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Permutation,
    Garson,
    Lek,
    Shapley,
    Lime,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Permutation => "permutation",
            Method::Garson => "garson",
            Method::Lek => "lek",
            Method::Shapley => "shapley",
            Method::Lime => "lime",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(Method::Permutation),
            "garson" => Ok(Method::Garson),
            "lek" => Ok(Method::Lek),
            "shapley" => Ok(Method::Shapley),
            "lime" => Ok(Method::Lime),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected permutation, garson, lek, shapley or lime)"
            ))),
        }
    }
}

/// Per-feature attribution scores from one method.
///
/// Score semantics depend on the method: the mean post-permutation metric
/// for permutation importance, a relative importance summing to one for
/// Garson, the Shapley value for Shapley, and the local surrogate slope for
/// LIME.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub method: Method,
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    /// Unpermuted metric (permutation) or surrogate intercept (LIME).
    pub baseline: Option<f64>,
    pub metric: Option<String>,
    pub replicates: usize,
    pub ci: Option<Vec<(f64, f64)>>,
    pub notes: Vec<String>,
}

impl ImportanceReport {
    fn new(method: Method, features: Vec<String>, scores: Vec<f64>) -> Self {
        ImportanceReport {
            method,
            features,
            scores,
            baseline: None,
            metric: None,
            replicates: 1,
            ci: None,
            notes: Vec::new(),
        }
    }

    /// `baseline - score` for each feature (permutation importance only).
    pub fn drops(&self) -> Option<Vec<f64>> {
        if self.method != Method::Permutation {
            return None;
        }
        self.baseline
            .map(|b| self.scores.iter().map(|s| b - s).collect())
    }

    pub fn score(&self, feature: &str) -> Option<f64> {
        self.features
            .iter()
            .position(|f| f == feature)
            .map(|j| self.scores[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,score");
        let drops = self.drops();
        if drops.is_some() {
            out.push_str(",drop");
        }
        if self.ci.is_some() {
            out.push_str(",ci_lower,ci_upper");
        }
        out.push('\n');
        for (j, f) in self.features.iter().enumerate() {
            let _ = write!(out, "{f},{:?}", self.scores[j]);
            if let Some(d) = &drops {
                let _ = write!(out, ",{:?}", d[j]);
            }
            if let Some(ci) = &self.ci {
                let _ = write!(out, ",{:?},{:?}", ci[j].0, ci[j].1);
            }
            out.push('\n');
        }
        out
    }

    /// One row per feature.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("Method: {}", self.method);
        if let Some(m) = &self.metric {
            let _ = write!(out, ", metric {m}");
        }
        if self.replicates > 1 {
            let _ = write!(out, ", N = {}", self.replicates);
        }
        if let Some(b) = self.baseline {
            let _ = write!(out, ", baseline {b:.4}");
        }
        out.push_str("\n\n| feature | score |");
        let drops = self.drops();
        if drops.is_some() {
            out.push_str(" drop |");
        }
        if self.ci.is_some() {
            out.push_str(" CI95 |");
        }
        out.push_str("\n|---|---|");
        if drops.is_some() {
            out.push_str("---|");
        }
        if self.ci.is_some() {
            out.push_str("---|");
        }
        out.push('\n');
        for (j, f) in self.features.iter().enumerate() {
            let _ = write!(out, "| {f} | {:.4} |", self.scores[j]);
            if let Some(d) = &drops {
                let _ = write!(out, " {:.4} |", d[j]);
            }
            if let Some(ci) = &self.ci {
                let _ = write!(out, " {:.4} {:.4} |", ci[j].0, ci[j].1);
            }
            out.push('\n');
        }
        for note in &self.notes {
            let _ = write!(out, "\nNote: {note}\n");
        }
        out
    }

    /// Permutation results laid out as one table row-group per feature-name
    /// prefix (`x1, x2, x3` / `z1, z2, z3`), each row-group closing with a
    /// comparison against the baseline.
    pub fn to_grouped_markdown(&self, tolerance: f64) -> String {
        let Some(baseline) = self.baseline else {
            return self.to_markdown();
        };
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (j, f) in self.features.iter().enumerate() {
            let prefix: String = f.chars().take_while(|c| c.is_alphabetic()).collect();
            match groups.iter_mut().find(|(p, _)| *p == prefix) {
                Some((_, members)) => members.push(j),
                None => groups.push((prefix, vec![j])),
            }
        }
        let width = groups.iter().map(|(_, m)| m.len()).max().unwrap_or(0);
        let mut out = format!(
            "Mean {} after {} permutations of each feature (unpermuted: {baseline:.3})\n\n",
            self.metric.as_deref().unwrap_or("score"),
            self.replicates
        );
        for (g, (_, members)) in groups.iter().enumerate() {
            let mut header: Vec<String> = members
                .iter()
                .map(|&j| format!("m.{}", self.features[j]))
                .collect();
            header.resize(width, String::new());
            let mut values: Vec<String> = members
                .iter()
                .map(|&j| format!("{:.3}", self.scores[j]))
                .collect();
            values.resize(width, String::new());
            let relevant = members.iter().any(|&j| baseline - self.scores[j] > tolerance);
            let (label, verdict) = if relevant {
                ("relevant factors", format!("< {baseline:.3}"))
            } else {
                ("irrelevant factors", format!("≈ {baseline:.3}"))
            };
            let _ = writeln!(out, "| {} | {label} |", header.join(" | "));
            if g == 0 {
                let _ = writeln!(out, "|{}---|", "---|".repeat(width));
            }
            let _ = writeln!(out, "| {} | {verdict} |", values.join(" | "));
        }
        out
    }
}
