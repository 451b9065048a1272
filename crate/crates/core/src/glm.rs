//! Binary logistic regression.
//!
//! Unpenalized fits use iteratively reweighted least squares (Newton's
//! method on the Bernoulli log-likelihood) with step-halving whenever the
//! deviance would increase, and come with Wald inference. Ridge fits use the
//! same Newton iteration on the penalized objective; lasso fits use
//! coordinate descent inside a proximal-Newton outer loop. Penalized fits
//! work on internally standardized columns, never penalize the intercept, and
//! report coefficients on the original scale. Their objective is
//! `-loglik(θ) + λ Σ_j θ_j²` (ridge) or `-loglik(θ) + λ Σ_j |θ_j|` (lasso)
//! with the sums over the standardized slopes.

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use crate::data::{align_columns, Dataset};
use crate::doc::{Document, Section};
use crate::error::{Error, Result};
use crate::model::ProbabilityModel;

/// Coefficients beyond this magnitude are taken as a sign of separation.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    None,
    Ridge(f64),
    Lasso(f64),
}

impl Penalty {
    pub fn lambda(&self) -> f64 {
        match *self {
            Penalty::None => 0.0,
            Penalty::Ridge(l) | Penalty::Lasso(l) => l,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Penalty::None => "none",
            Penalty::Ridge(_) => "ridge",
            Penalty::Lasso(_) => "lasso",
        }
    }

    pub fn from_tag(tag: &str, lambda: f64) -> Result<Penalty> {
        let penalty = match tag {
            "none" => Penalty::None,
            "ridge" => Penalty::Ridge(lambda),
            "lasso" => Penalty::Lasso(lambda),
            other => return Err(Error::Config(format!("unknown penalty `{other}`"))),
        };
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("penalty weight {lambda} must be finite and >= 0")));
        }
        Ok(penalty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence when the infinity norm of the (penalized) score drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// A coefficient exceeded [`SEPARATION_BOUND`]; the data are (quasi-)separated.
    Separation { coefficient: usize },
    NotConverged { iterations: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// Covariance of (intercept, slopes).
    pub covariance: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl Inference {
    fn from_covariance(coefficients: &[f64], covariance: DMatrix<f64>) -> Inference {
        let std_errors: Vec<f64> = (0..coefficients.len())
            .map(|j| covariance[(j, j)].max(0.0).sqrt())
            .collect();
        let z: Vec<f64> = coefficients
            .iter()
            .zip(&std_errors)
            .map(|(c, se)| c / se)
            .collect();
        let p_values = z.iter().map(|&z| wald_p_value(z)).collect();
        Inference {
            covariance,
            std_errors,
            z,
            p_values,
        }
    }
}

/// Two-sided p-value `2 (1 - Φ(|z|))`, evaluated as `erfc(|z| / √2)`.
pub fn wald_p_value(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Bernoulli deviance `-2 loglik` for linear predictors `eta`.
pub fn deviance(eta: &DVector<f64>, y: &DVector<f64>) -> f64 {
    2.0 * eta
        .iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * softplus(-e) + (1.0 - yi) * softplus(e))
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub feature_names: Vec<String>,
    /// Intercept followed by one slope per feature.
    pub coefficients: Vec<f64>,
    pub penalty: Penalty,
    /// Absent for penalized fits and when the information matrix is singular.
    pub inference: Option<Inference>,
    pub iterations: usize,
    pub deviance: f64,
    /// Deviance after every accepted iteration, starting from θ = 0.
    pub deviance_trace: Vec<f64>,
    pub warnings: Vec<FitWarning>,
}

impl GlmFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coefficients[1..]
    }

    pub fn separated(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, FitWarning::Separation { .. }))
    }

    pub fn linear_predictor(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                self.coefficients[0]
                    + self.coefficients[1..]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * x[(i, j)])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Score vector `X'(y - p)` of the unpenalized log-likelihood at the fit.
    pub fn score(&self, data: &Dataset) -> Result<Vec<f64>> {
        let x = design(&align_columns(data, &self.feature_names)?);
        let theta = DVector::from_column_slice(&self.coefficients);
        let y = labels(data);
        let p = (&x * &theta).map(logistic);
        Ok((x.transpose() * (y - p)).iter().copied().collect())
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::with_kind("glm");
        let mut meta = Section::new("meta");
        meta.push("penalty", self.penalty.tag())
            .push("lambda", format!("{:?}", self.penalty.lambda()))
            .push("iterations", self.iterations)
            .push("deviance", format!("{:?}", self.deviance))
            .push("separation", self.separated());
        doc.add(meta);
        let mut coef = Section::new("coefficients");
        coef.push("(intercept)", format!("{:?}", self.coefficients[0]));
        for (name, c) in self.feature_names.iter().zip(&self.coefficients[1..]) {
            coef.push(name.clone(), format!("{c:?}"));
        }
        doc.add(coef);
        if let Some(inf) = &self.inference {
            // lower triangle, one row per line
            let mut cov = Section::new("covariance");
            for i in 0..inf.covariance.nrows() {
                cov.push(
                    i.to_string(),
                    crate::doc::join_floats((0..=i).map(|j| inf.covariance[(i, j)])),
                );
            }
            doc.add(cov);
        }
        doc
    }

    pub fn from_document(doc: &Document) -> Result<GlmFit> {
        let kind = doc.kind()?;
        if kind != "glm" {
            return Err(Error::Config(format!("expected a glm document, found `{kind}`")));
        }
        let meta = doc.require("meta")?;
        let penalty = Penalty::from_tag(&meta.require("penalty")?.value, meta.parse("lambda")?)?;
        let coef = doc.require("coefficients")?;
        let mut entries = coef.entries.iter();
        let intercept = entries
            .next()
            .filter(|e| e.key == "(intercept)")
            .ok_or_else(|| Error::Config("coefficients must start with (intercept)".into()))?;
        let mut coefficients = vec![intercept.parse::<f64>()?];
        let mut feature_names = Vec::new();
        for e in entries {
            feature_names.push(e.key.clone());
            coefficients.push(e.parse()?);
        }
        let p = coefficients.len();
        let inference = match doc.section("covariance") {
            Some(sec) => {
                let mut cov = DMatrix::zeros(p, p);
                for i in 0..p {
                    let row: Vec<f64> = sec.require(&i.to_string())?.parse_list()?;
                    if row.len() != i + 1 {
                        return Err(Error::Config(format!("covariance row {i} has {} entries", row.len())));
                    }
                    for (j, v) in row.into_iter().enumerate() {
                        cov[(i, j)] = v;
                        cov[(j, i)] = v;
                    }
                }
                Some(Inference::from_covariance(&coefficients, cov))
            }
            None => None,
        };
        let separated: bool = meta.parse("separation")?;
        Ok(GlmFit {
            feature_names,
            coefficients,
            penalty,
            inference,
            iterations: meta.parse("iterations")?,
            deviance: meta.parse("deviance")?,
            deviance_trace: Vec::new(),
            warnings: if separated {
                vec![FitWarning::Separation { coefficient: 0 }]
            } else {
                Vec::new()
            },
        })
    }
}

impl ProbabilityModel for GlmFit {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        self.linear_predictor(x).into_iter().map(logistic).collect()
    }
}

pub fn predict_proba(fit: &GlmFit, data: &Dataset) -> Result<Vec<f64>> {
    fit.predict(data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddsRatio {
    pub feature: String,
    pub coefficient: f64,
    pub odds_ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `exp(θ_j)` with the Wald interval `exp(θ_j ± 1.96 SE_j)` for every slope.
pub fn odds_ratio_table(fit: &GlmFit) -> Result<Vec<OddsRatio>> {
    if fit.penalty != Penalty::None {
        return Err(Error::InferenceUnavailable(format!(
            "{} fits carry no standard errors",
            fit.penalty.tag()
        )));
    }
    let inf = fit
        .inference
        .as_ref()
        .ok_or_else(|| Error::InferenceUnavailable("information matrix was singular".into()))?;
    Ok(fit
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let c = fit.coefficients[j + 1];
            let se = inf.std_errors[j + 1];
            OddsRatio {
                feature: name.clone(),
                coefficient: c,
                odds_ratio: c.exp(),
                lower: (c - 1.96 * se).exp(),
                upper: (c + 1.96 * se).exp(),
            }
        })
        .collect())
}

fn design(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::from_element(n, x.ncols() + 1, 1.0);
    out.view_mut((0, 1), (n, x.ncols())).copy_from(x);
    out
}

fn labels(data: &Dataset) -> DVector<f64> {
    DVector::from_iterator(data.nrows(), data.labels().iter().map(|&v| v as f64))
}

fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, &v| m.max(v));
    let tol = max * 1e-10 * (x.nrows().max(x.ncols()) as f64).sqrt();
    sv.iter().filter(|&&v| v > tol).count()
}

pub fn fit_logistic(data: &Dataset, penalty: Penalty) -> Result<GlmFit> {
    fit_logistic_with(data, penalty, FitOptions::default())
}

pub fn fit_logistic_with(data: &Dataset, penalty: Penalty, options: FitOptions) -> Result<GlmFit> {
    if data.nrows() == 0 {
        return Err(Error::Schema("cannot fit on an empty dataset".into()));
    }
    if !(penalty.lambda() >= 0.0 && penalty.lambda().is_finite()) {
        return Err(Error::Config(format!("penalty weight {} must be finite and >= 0", penalty.lambda())));
    }
    let y = labels(data);
    match penalty {
        Penalty::None => {
            let x = design(data.features());
            let rank = numerical_rank(&x);
            if rank < x.ncols() {
                return Err(Error::Singular {
                    rank,
                    cols: x.ncols(),
                });
            }
            let state = newton(&x, &y, &DVector::zeros(x.ncols()), options);
            let inference = information(&x, &state.theta)
                .cholesky()
                .map(|c| Inference::from_covariance(state.theta.as_slice(), symmetrize(c.inverse())));
            Ok(state.into_fit(data, penalty, inference))
        }
        Penalty::Ridge(lambda) => {
            let std = Standardizer::new(data.features());
            let x = design(&std.apply(data.features()));
            let mut ridge = DVector::from_element(x.ncols(), 2.0 * lambda);
            ridge[0] = 0.0;
            let mut state = newton(&x, &y, &ridge, options);
            state.theta = std.back_transform(&state.theta);
            Ok(state.into_fit(data, penalty, None))
        }
        Penalty::Lasso(lambda) => {
            let std = Standardizer::new(data.features());
            let x = design(&std.apply(data.features()));
            let mut state = lasso(&x, &y, lambda, options);
            state.theta = std.back_transform(&state.theta);
            Ok(state.into_fit(data, penalty, None))
        }
    }
}

fn information(x: &DMatrix<f64>, theta: &DVector<f64>) -> DMatrix<f64> {
    let p = (x * theta).map(logistic);
    let w = p.map(|pi| pi * (1.0 - pi));
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    x.transpose() * xw
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

struct State {
    theta: DVector<f64>,
    iterations: usize,
    deviance: f64,
    trace: Vec<f64>,
    warnings: Vec<FitWarning>,
}

impl State {
    fn into_fit(self, data: &Dataset, penalty: Penalty, inference: Option<Inference>) -> GlmFit {
        GlmFit {
            feature_names: data.names(),
            coefficients: self.theta.iter().copied().collect(),
            penalty,
            inference,
            iterations: self.iterations,
            deviance: self.deviance,
            deviance_trace: self.trace,
            warnings: self.warnings,
        }
    }
}

fn separation_check(theta: &DVector<f64>) -> Option<FitWarning> {
    theta
        .iter()
        .position(|c| c.abs() > SEPARATION_BOUND)
        .map(|coefficient| FitWarning::Separation { coefficient })
}

/// Flags fits whose probabilities all sit on their labels; the likelihood
/// then has no finite maximiser even if the iterations stopped early.
fn perfect_fit_check(x: &DMatrix<f64>, y: &DVector<f64>, theta: &DVector<f64>) -> Option<FitWarning> {
    let eta = x * theta;
    let perfect = eta.iter().zip(y.iter()).all(|(&e, &t)| (logistic(e) - t).abs() < 1e-6);
    perfect.then(|| FitWarning::Separation {
        coefficient: theta.iamax(),
    })
}

/// Newton / IRLS on `deviance/2 + ½ Σ_j ridge_j θ_j²`.
fn newton(x: &DMatrix<f64>, y: &DVector<f64>, ridge: &DVector<f64>, options: FitOptions) -> State {
    let objective = |theta: &DVector<f64>| {
        deviance(&(x * theta), y) + ridge.component_mul(theta).dot(theta)
    };
    let mut theta = DVector::zeros(x.ncols());
    let mut current = objective(&theta);
    let mut trace = vec![deviance(&(x * &theta), y)];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        let p = (x * &theta).map(logistic);
        let score = x.transpose() * (y - &p) - ridge.component_mul(&theta);
        if score.amax() < options.tolerance {
            converged = true;
            break;
        }
        let mut info = information(x, &theta);
        for j in 0..info.nrows() {
            info[(j, j)] += ridge[j];
        }
        let Some(step) = info.cholesky().map(|c| c.solve(&score)) else {
            break;
        };
        iterations += 1;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = &theta + &step * scale;
            let value = objective(&candidate);
            if value <= current {
                accepted = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, value)) = accepted else {
            // no descent possible at machine precision
            converged = true;
            break;
        };
        theta = candidate;
        current = value;
        trace.push(deviance(&(x * &theta), y));
        if let Some(w) = separation_check(&theta) {
            warnings.push(w);
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(FitWarning::NotConverged { iterations });
    }
    if !warnings.iter().any(|w| matches!(w, FitWarning::Separation { .. })) {
        warnings.extend(perfect_fit_check(x, y, &theta));
    }
    State {
        deviance: deviance(&(x * &theta), y),
        theta,
        iterations,
        trace,
        warnings,
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Proximal Newton for `deviance/2 + λ Σ_{j≥1} |θ_j|`: each outer step
/// solves the weighted lasso on the IRLS working response by cyclic
/// coordinate descent, then backtracks on the true objective.
fn lasso(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, options: FitOptions) -> State {
    let (n, p) = x.shape();
    let objective = |theta: &DVector<f64>| {
        0.5 * deviance(&(x * theta), y) + lambda * theta.rows(1, p - 1).abs().sum()
    };
    let mut theta = DVector::zeros(p);
    let mut current = objective(&theta);
    let mut trace = vec![deviance(&(x * &theta), y)];
    let mut warnings = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let eta = x * &theta;
        let prob = eta.map(logistic);
        let w = prob.map(|pi| (pi * (1.0 - pi)).max(1e-10));
        let z = DVector::from_fn(n, |i, _| eta[i] + (y[i] - prob[i]) / w[i]);

        // coordinate descent on ½ Σ w (z - Xβ)² + λ Σ|β_j|
        let mut beta = theta.clone();
        let mut resid = &z - x * &beta;
        let col_w: Vec<f64> = (0..p)
            .map(|j| (0..n).map(|i| w[i] * x[(i, j)] * x[(i, j)]).sum())
            .collect();
        for _sweep in 0..10_000 {
            let mut max_change = 0.0f64;
            for j in 0..p {
                if col_w[j] == 0.0 {
                    continue;
                }
                let rho: f64 = (0..n).map(|i| w[i] * x[(i, j)] * resid[i]).sum::<f64>()
                    + col_w[j] * beta[j];
                let updated = if j == 0 {
                    rho / col_w[j]
                } else {
                    soft_threshold(rho, lambda) / col_w[j]
                };
                let delta = updated - beta[j];
                if delta != 0.0 {
                    for i in 0..n {
                        resid[i] -= delta * x[(i, j)];
                    }
                    beta[j] = updated;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < 1e-12 {
                break;
            }
        }

        let direction = &beta - &theta;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = &theta + &direction * scale;
            let value = objective(&candidate);
            if value <= current + 1e-12 * current.abs() {
                accepted = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, value)) = accepted else {
            converged = true;
            break;
        };
        let change = (&candidate - &theta).amax();
        theta = candidate;
        current = value;
        trace.push(deviance(&(x * &theta), y));
        if let Some(w) = separation_check(&theta) {
            warnings.push(w);
            converged = true;
            break;
        }
        if change < options.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(FitWarning::NotConverged { iterations });
    }
    if !warnings.iter().any(|w| matches!(w, FitWarning::Separation { .. })) {
        warnings.extend(perfect_fit_check(x, y, &theta));
    }
    State {
        deviance: deviance(&(x * &theta), y),
        theta,
        iterations,
        trace,
        warnings,
    }
}

/// Column centring and scaling for penalized fits.
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn new(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }

    fn back_transform(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut out = theta.clone();
        let mut intercept = theta[0];
        for j in 0..self.mean.len() {
            out[j + 1] = theta[j + 1] / self.scale[j];
            intercept -= out[j + 1] * self.mean[j];
        }
        out[0] = intercept;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;
    use crate::sim::{simulate, SimConfig};

    fn dataset(rows: &[&[f64]], y: &[u8]) -> Dataset {
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Dataset::new(
            (0..d).map(|j| Column::continuous(format!("f{j}"))).collect(),
            DMatrix::from_row_slice(rows.len(), d, &flat),
            y.to_vec(),
        )
        .unwrap()
    }

    fn study() -> Dataset {
        simulate(&SimConfig::default()).unwrap()
    }

    #[test]
    fn score_vanishes_at_optimum() {
        let d = study();
        let fit = fit_logistic(&d, Penalty::None).unwrap();
        assert!(fit.warnings.is_empty(), "{:?}", fit.warnings);
        let score = fit.score(&d).unwrap();
        assert!(score.iter().all(|s| s.abs() < 1e-6), "{score:?}");
    }

    #[test]
    fn deviance_never_increases() {
        let fit = fit_logistic(&study(), Penalty::None).unwrap();
        assert!(fit.deviance_trace.len() > 2);
        for w in fit.deviance_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{:?}", fit.deviance_trace);
        }
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let fit = fit_logistic(&study(), Penalty::None).unwrap();
        let inf = fit.inference.as_ref().unwrap();
        let cov = &inf.covariance;
        assert!((cov - cov.transpose()).amax() < 1e-15);
        let eig = cov.clone().symmetric_eigen().eigenvalues;
        assert!(eig.iter().all(|&v| v >= 0.0));
        assert!(inf.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn p_value_matches_normal_tail() {
        let fit = fit_logistic(&study(), Penalty::None).unwrap();
        let inf = fit.inference.unwrap();
        for (&z, &p) in inf.z.iter().zip(&inf.p_values) {
            let via_cdf = 2.0 * (1.0 - 0.5 * erfc(-z.abs() / std::f64::consts::SQRT_2));
            assert!((p - via_cdf).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_design_matches_grid_search() {
        // x=0: 1 of 4 positive, x=1: 3 of 4 positive; MLE a = logit(1/4), b = 2 logit(3/4)
        let rows: Vec<&[f64]> = vec![&[0.0], &[0.0], &[0.0], &[0.0], &[1.0], &[1.0], &[1.0], &[1.0]];
        let d = dataset(&rows, &[1, 0, 0, 0, 1, 1, 1, 0]);
        let fit = fit_logistic(&d, Penalty::None).unwrap();
        let logit = |p: f64| (p / (1.0 - p)).ln();
        assert!((fit.coefficients[0] - logit(0.25)).abs() < 1e-9);
        assert!((fit.coefficients[1] - 2.0 * logit(0.75)).abs() < 1e-9);
        // grid maximizer agrees
        let loglik = |a: f64, b: f64| {
            let p0 = logistic(a);
            let p1 = logistic(a + b);
            p0.ln() + 3.0 * (1.0 - p0).ln() + 3.0 * p1.ln() + (1.0 - p1).ln()
        };
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=800 {
            for k in 0..=800 {
                let a = -2.0 + 2.0 * i as f64 / 800.0;
                let b = 4.0 * k as f64 / 800.0;
                let l = loglik(a, b);
                if l > best.0 {
                    best = (l, a, b);
                }
            }
        }
        assert!((fit.coefficients[0] - best.1).abs() < 5e-3);
        assert!((fit.coefficients[1] - best.2).abs() < 5e-3);
    }

    #[test]
    fn all_zero_labels_warn_separation() {
        let d = dataset(&[&[0.1], &[0.7], &[1.3], &[2.0]], &[0, 0, 0, 0]);
        let fit = fit_logistic(&d, Penalty::None).unwrap();
        assert!(fit.separated());
        assert!(predict_proba(&fit, &d).unwrap().iter().all(|&p| p < 1e-6));
    }

    #[test]
    fn rank_deficiency_is_an_error() {
        let d = dataset(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0], &[0.0, 0.0]], &[0, 1, 0, 1]);
        assert!(matches!(fit_logistic(&d, Penalty::None), Err(Error::Singular { .. })));
        // penalties resolve the collinearity
        assert!(fit_logistic(&d, Penalty::Ridge(1.0)).is_ok());
    }

    #[test]
    fn zero_coefficients_predict_half() {
        let d = study();
        let fit = GlmFit {
            feature_names: d.names(),
            coefficients: vec![0.0; 7],
            penalty: Penalty::None,
            inference: None,
            iterations: 0,
            deviance: 0.0,
            deviance_trace: vec![],
            warnings: vec![],
        };
        assert!(predict_proba(&fit, &d).unwrap().iter().all(|&p| p == 0.5));
    }

    #[test]
    fn predictions_match_formula() {
        let d = study();
        let fit = fit_logistic(&d, Penalty::None).unwrap();
        let probs = predict_proba(&fit, &d).unwrap();
        for i in [0, 17, 256, 511, 999] {
            let row = d.row(i);
            let eta: f64 = fit.coefficients[0]
                + row.iter().zip(&fit.coefficients[1..]).map(|(a, b)| a * b).sum::<f64>();
            let direct = eta.exp() / (1.0 + eta.exp());
            assert!((probs[i] - direct).abs() < 1e-12);
            assert!(probs[i] > 0.0 && probs[i] < 1.0);
        }
        // zero features predict logistic(intercept)
        let zero = d.select_rows(&[0]).with_column(0, &[0.0]);
        let zero = (1..6).fold(zero, |acc, j| acc.with_column(j, &[0.0]));
        let p = predict_proba(&fit, &zero).unwrap()[0];
        assert!((p - logistic(fit.intercept())).abs() < 1e-15);
    }

    #[test]
    fn column_mismatch_is_schema_error() {
        let d = study();
        let fit = fit_logistic(&d, Penalty::None).unwrap();
        let other = dataset(&[&[1.0], &[0.0]], &[1, 0]);
        assert!(matches!(predict_proba(&fit, &other), Err(Error::Schema(_))));
    }

    #[test]
    fn odds_ratios() {
        let fit = GlmFit {
            feature_names: vec!["a".into(), "b".into()],
            coefficients: vec![0.3, 0.0, 2f64.ln()],
            penalty: Penalty::None,
            inference: Some(Inference::from_covariance(
                &[0.3, 0.0, 2f64.ln()],
                DMatrix::from_diagonal(&DVector::from_vec(vec![0.04, 0.01, 0.01])),
            )),
            iterations: 0,
            deviance: 0.0,
            deviance_trace: vec![],
            warnings: vec![],
        };
        let table = odds_ratio_table(&fit).unwrap();
        assert_eq!(table[0].odds_ratio, 1.0);
        assert!((table[0].lower - (-0.196f64).exp()).abs() < 1e-15);
        assert!((table[0].upper - 0.196f64.exp()).abs() < 1e-15);
        assert!((table[1].odds_ratio - 2.0).abs() < 1e-15);
        let ridge = GlmFit {
            penalty: Penalty::Ridge(1.0),
            ..fit
        };
        assert!(matches!(odds_ratio_table(&ridge), Err(Error::InferenceUnavailable(_))));
    }

    #[test]
    fn ridge_vanishing_penalty_matches_mle() {
        let d = study();
        let mle = fit_logistic(&d, Penalty::None).unwrap();
        let ridge = fit_logistic(&d, Penalty::Ridge(1e-8)).unwrap();
        assert!(ridge.inference.is_none());
        let diff = mle
            .coefficients
            .iter()
            .zip(&ridge.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-4, "{diff}");
        let lasso = fit_logistic(&d, Penalty::Lasso(1e-8)).unwrap();
        let diff = mle
            .coefficients
            .iter()
            .zip(&lasso.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn ridge_shrinks() {
        let d = study();
        let norm = |f: &GlmFit| f.slopes().iter().map(|c| c * c).sum::<f64>();
        let a = fit_logistic(&d, Penalty::Ridge(1.0)).unwrap();
        let b = fit_logistic(&d, Penalty::Ridge(100.0)).unwrap();
        assert!(norm(&b) < norm(&a));
    }

    #[test]
    fn lasso_large_penalty_gives_intercept_only() {
        let d = study();
        let fit = fit_logistic(&d, Penalty::Lasso(1e6)).unwrap();
        assert!(fit.slopes().iter().all(|&c| c == 0.0), "{:?}", fit.slopes());
        let rate = d.positive_rate();
        assert!((logistic(fit.intercept()) - rate).abs() < 1e-6);
        // a moderate penalty zeroes the irrelevant factors first
        let mid = fit_logistic(&d, Penalty::Lasso(25.0)).unwrap();
        assert!(mid.slopes()[1] != 0.0);
    }

    #[test]
    fn document_round_trip() {
        let fit = fit_logistic(&study(), Penalty::None).unwrap();
        let back = GlmFit::from_document(&Document::parse(&fit.to_document().render()).unwrap()).unwrap();
        assert_eq!(back.coefficients, fit.coefficients);
        assert_eq!(back.feature_names, fit.feature_names);
        let (a, b) = (back.inference.unwrap(), fit.inference.unwrap());
        assert!((a.covariance - b.covariance).amax() < 1e-18);
    }
}
