//! Feedforward classifier: affine layers with a shared activation, softmax
//! output over K classes.
//!
//! Every layer is stored as an `(inputs + 1) × outputs` matrix whose first
//! row is the bias, so a single hidden layer of `M` neurons on `d` inputs has
//! `(d + 1) × M` input weights and `(M + 1) × K` output weights. A binary
//! problem is handled as `K = 2`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, RowDVector};

use crate::data::{align_columns, Dataset};
use crate::doc::{join_floats, Document, Section};
use crate::error::{Error, Result};
use crate::model::ProbabilityModel;
use crate::rng;

/// Probabilities below this are clamped inside the cross-entropy.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Sigmoid,
    Tanh,
    /// `a (e^u - 1)` for `u < 0`, `u` otherwise.
    Elu { a: f64 },
    /// `a u` for `u < 0`, `u` otherwise; `a = 0` is the plain rectifier.
    Relu { a: f64 },
    /// `b` times the ELU branch.
    Selu { a: f64, b: f64 },
}

impl Activation {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Activation::Identity => u,
            Activation::Sigmoid => crate::glm::logistic(u),
            Activation::Tanh => u.tanh(),
            Activation::Elu { a } => {
                if u < 0.0 {
                    a * u.exp_m1()
                } else {
                    u
                }
            }
            Activation::Relu { a } => {
                if u < 0.0 {
                    a * u
                } else {
                    u
                }
            }
            Activation::Selu { a, b } => {
                b * if u < 0.0 { a * u.exp_m1() } else { u }
            }
        }
    }

    /// Derivative; at the ReLU kink the left slope is used.
    pub fn derivative(self, u: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = crate::glm::logistic(u);
                s * (1.0 - s)
            }
            Activation::Tanh => 1.0 - u.tanh().powi(2),
            Activation::Elu { a } => {
                if u < 0.0 {
                    a * u.exp()
                } else {
                    1.0
                }
            }
            Activation::Relu { a } => {
                if u > 0.0 {
                    1.0
                } else {
                    a
                }
            }
            Activation::Selu { a, b } => b * if u < 0.0 { a * u.exp() } else { 1.0 },
        }
    }

    /// Whether the derivative is continuous everywhere.
    pub fn is_smooth(self) -> bool {
        match self {
            Activation::Relu { a } => a == 1.0,
            Activation::Elu { a } => a == 1.0,
            Activation::Selu { a, .. } => a == 1.0,
            _ => true,
        }
    }

    fn validate(self) -> Result<Self> {
        let ok = match self {
            Activation::Elu { a } | Activation::Relu { a } => a.is_finite(),
            Activation::Selu { a, b } => a.is_finite() && b.is_finite(),
            _ => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Config(format!("activation parameters must be finite: {self}")))
        }
    }
}

pub fn activation(kind: Activation, u: f64) -> f64 {
    kind.apply(u)
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Activation::Identity => write!(f, "identity"),
            Activation::Sigmoid => write!(f, "sigmoid"),
            Activation::Tanh => write!(f, "tanh"),
            Activation::Elu { a } => write!(f, "elu({a:?})"),
            Activation::Relu { a } => write!(f, "relu({a:?})"),
            Activation::Selu { a, b } => write!(f, "selu({a:?},{b:?})"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("malformed activation `{s}`")))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("malformed activation parameters in `{s}`")))?;
                (name.trim(), args)
            }
            None => (s, Vec::new()),
        };
        let kind = match (name, args.as_slice()) {
            ("identity", []) => Activation::Identity,
            ("sigmoid", []) => Activation::Sigmoid,
            ("tanh", []) => Activation::Tanh,
            ("elu", []) => Activation::Elu { a: 1.0 },
            ("elu", [a]) => Activation::Elu { a: *a },
            ("relu", []) => Activation::Relu { a: 0.0 },
            ("relu", [a]) => Activation::Relu { a: *a },
            ("selu", []) => Activation::Selu { a: 1.6732632423543772, b: 1.0507009873554805 },
            ("selu", [a, b]) => Activation::Selu { a: *a, b: *b },
            _ => return Err(Error::Config(format!("unknown activation `{s}`"))),
        };
        kind.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Quadratic,
    CrossEntropy,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quadratic" => Ok(LossKind::Quadratic),
            "cross-entropy" | "cross_entropy" => Ok(LossKind::CrossEntropy),
            other => Err(Error::Config(format!("unknown loss `{other}`"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Quadratic => "quadratic",
            LossKind::CrossEntropy => "cross-entropy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub hidden: Vec<usize>,
    pub classes: usize,
    pub activation: Activation,
}

impl Architecture {
    /// One hidden layer of three sigmoid neurons.
    pub fn simulation_default() -> Self {
        Architecture {
            hidden: vec![3],
            classes: 2,
            activation: Activation::Sigmoid,
        }
    }

    /// Two hidden layers of three and two neurons.
    pub fn imbalanced_default() -> Self {
        Architecture {
            hidden: vec![3, 2],
            ..Self::simulation_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::Config("at least one hidden layer is required".into()));
        }
        if let Some(k) = self.hidden.iter().position(|&m| m == 0) {
            return Err(Error::Config(format!("hidden layer {k} has no neurons")));
        }
        if self.classes < 2 {
            return Err(Error::Config("at least two output classes are required".into()));
        }
        self.activation.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Half-width of the uniform initialisation; `None` uses `1/√fan_in`.
    pub init_scale: Option<f64>,
    /// Train on centred and scaled inputs, folding the scaling back into the
    /// first layer afterwards.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::CrossEntropy,
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 32,
            seed: 1,
            init_scale: None,
            standardize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be > 0", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if let Some(s) = self.init_scale {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("init scale {s} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnModel {
    pub feature_names: Vec<String>,
    pub activation: Activation,
    /// `(inputs + 1) × outputs` per layer, bias in row 0.
    pub layers: Vec<DMatrix<f64>>,
}

/// Intermediate values of a forward pass over a batch of rows.
struct Pass {
    /// Layer inputs: the data, then each hidden activation.
    inputs: Vec<DMatrix<f64>>,
    /// Hidden pre-activations.
    pre: Vec<DMatrix<f64>>,
    probs: DMatrix<f64>,
}

fn affine(a: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut u = a * w.rows(1, w.nrows() - 1);
    let bias = w.row(0);
    for mut row in u.row_iter_mut() {
        row += &bias;
    }
    u
}

fn softmax_rows(t: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = t.clone();
    for mut row in out.row_iter_mut() {
        let max = row.max();
        row.apply(|v| *v = (*v - max).exp());
        let total = row.sum();
        row /= total;
    }
    out
}

impl NnModel {
    /// Zero-weight model with the shapes of `arch`.
    pub fn zeros(feature_names: Vec<String>, arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let mut sizes = vec![feature_names.len()];
        sizes.extend(&arch.hidden);
        sizes.push(arch.classes);
        let layers = sizes
            .windows(2)
            .map(|w| DMatrix::zeros(w[0] + 1, w[1]))
            .collect();
        Ok(NnModel {
            feature_names,
            activation: arch.activation,
            layers,
        })
    }

    /// Uniform(-s, s) weights, `s = 1/√fan_in` unless `scale` is given.
    pub fn random(
        feature_names: Vec<String>,
        arch: &Architecture,
        scale: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let mut model = Self::zeros(feature_names, arch)?;
        let mut rng = rng::substream(seed, 0);
        for w in &mut model.layers {
            let s = scale.unwrap_or(1.0 / ((w.nrows() - 1) as f64).sqrt());
            w.iter_mut().for_each(|v| *v = rng::uniform(&mut rng, -s, s));
        }
        Ok(model)
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].nrows() - 1
    }

    pub fn classes(&self) -> usize {
        self.layers.last().map_or(0, |w| w.ncols())
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|w| w.ncols())
            .collect()
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            hidden: self.hidden(),
            classes: self.classes(),
            activation: self.activation,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|w| w.len()).sum()
    }

    fn pass(&self, x: &DMatrix<f64>) -> Pass {
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        for w in &self.layers[..last] {
            let u = affine(inputs.last().expect("input present"), w);
            let act = self.activation;
            inputs.push(u.map(|v| act.apply(v)));
            pre.push(u);
        }
        let t = affine(inputs.last().expect("input present"), &self.layers[last]);
        Pass {
            inputs,
            pre,
            probs: softmax_rows(&t),
        }
    }

    /// Class probabilities, one row per input row.
    pub fn forward_rows(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.pass(x).probs
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::Schema(format!(
                "model expects {} features, got {}",
                self.inputs(),
                x.len()
            )));
        }
        let row = DMatrix::from_row_slice(1, x.len(), x);
        Ok(self.forward_rows(&row).row(0).iter().copied().collect())
    }

    /// With identity activation the network is affine in `x`; returns the
    /// `(d + 1) × K` matrix of the equivalent multinomial-logistic scores.
    pub fn collapse_linear(&self) -> Option<DMatrix<f64>> {
        if self.activation != Activation::Identity {
            return None;
        }
        let mut acc = self.layers[0].clone();
        for w in &self.layers[1..] {
            // [1 | x] acc gives the layer input; prepend the constant column
            let mut bias_row = acc.row(0) * w.rows(1, w.nrows() - 1);
            bias_row += w.row(0);
            let body = acc.rows(1, acc.nrows() - 1) * w.rows(1, w.nrows() - 1);
            let mut next = DMatrix::zeros(acc.nrows(), w.ncols());
            next.row_mut(0).copy_from(&bias_row);
            next.rows_mut(1, acc.nrows() - 1).copy_from(&body);
            acc = next;
        }
        Some(acc)
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::with_kind("nn");
        let mut arch = Section::new("architecture");
        arch.push("inputs", self.inputs())
            .push(
                "hidden",
                self.hidden()
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            )
            .push("classes", self.classes())
            .push("activation", self.activation);
        doc.add(arch);
        let mut features = Section::new("features");
        for (j, name) in self.feature_names.iter().enumerate() {
            features.push(j.to_string(), name);
        }
        doc.add(features);
        for (l, w) in self.layers.iter().enumerate() {
            let mut sec = Section::new(format!("layer.{l}"));
            sec.push("rows", w.nrows()).push("cols", w.ncols());
            for i in 0..w.nrows() {
                sec.push(i.to_string(), join_floats(w.row(i).iter().copied()));
            }
            doc.add(sec);
        }
        doc
    }

    pub fn from_document(doc: &Document) -> Result<NnModel> {
        let kind = doc.kind()?;
        if kind != "nn" {
            return Err(Error::Config(format!("expected an nn document, found `{kind}`")));
        }
        let arch_sec = doc.require("architecture")?;
        let inputs: usize = arch_sec.parse("inputs")?;
        let arch = Architecture {
            hidden: arch_sec.require("hidden")?.parse_list()?,
            classes: arch_sec.parse("classes")?,
            activation: arch_sec.require("activation")?.value.parse()?,
        };
        let features = doc.require("features")?;
        let feature_names: Vec<String> = (0..inputs)
            .map(|j| features.require(&j.to_string()).map(|e| e.value.clone()))
            .collect::<Result<_>>()?;
        let mut model = NnModel::zeros(feature_names, &arch)?;
        for (l, w) in model.layers.iter_mut().enumerate() {
            let sec = doc.require(&format!("layer.{l}"))?;
            let (rows, cols): (usize, usize) = (sec.parse("rows")?, sec.parse("cols")?);
            if (rows, cols) != w.shape() {
                return Err(Error::Config(format!(
                    "layer {l} is {rows}×{cols}, architecture implies {}×{}",
                    w.nrows(),
                    w.ncols()
                )));
            }
            for i in 0..rows {
                let entry = sec.require(&i.to_string())?;
                let values: Vec<f64> = entry.parse_list()?;
                if values.len() != cols {
                    return Err(entry.error(format!("expected {cols} weights, found {}", values.len())));
                }
                w.row_mut(i).copy_from(&RowDVector::from_vec(values));
            }
        }
        Ok(model)
    }
}

impl ProbabilityModel for NnModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Probability of the last class (class 1 for binary problems).
    fn predict_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let probs = self.forward_rows(x);
        let k = probs.ncols() - 1;
        probs.column(k).iter().copied().collect()
    }
}

/// One-hot `n × K` targets from 0/1 labels.
pub fn one_hot(labels: &[u8], classes: usize) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(labels.len(), classes);
    for (i, &c) in labels.iter().enumerate() {
        y[(i, c as usize)] = 1.0;
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// Entries clamped at [`PROBABILITY_FLOOR`] inside the cross-entropy.
    pub clamped: usize,
}

/// `-Σ_i Σ_k y_ik ln f_ik` with `f` floored at [`PROBABILITY_FLOOR`].
pub fn cross_entropy(y: &DMatrix<f64>, f: &DMatrix<f64>) -> LossValue {
    let mut clamped = 0;
    let mut value = 0.0;
    for (yv, fv) in y.iter().zip(f.iter()) {
        if *yv == 0.0 {
            continue;
        }
        let p = if *fv < PROBABILITY_FLOOR {
            clamped += 1;
            PROBABILITY_FLOOR
        } else {
            *fv
        };
        value -= yv * p.ln();
    }
    LossValue { value, clamped }
}

/// `Σ_i Σ_k (y_ik - f_ik)²`.
pub fn quadratic_error(y: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
    y.iter().zip(f.iter()).map(|(a, b)| (a - b).powi(2)).sum()
}

/// `-Σ y ln y`, with `0 ln 0 = 0`.
pub fn entropy(y: &DMatrix<f64>) -> f64 {
    -y.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Row-summed Kullback-Leibler divergence `Σ_i Σ_k y_ik ln(y_ik / f_ik)`.
pub fn kl_divergence(y: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
    y.iter()
        .zip(f.iter())
        .filter(|(&a, _)| a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

impl NnModel {
    pub fn loss_rows(&self, x: &DMatrix<f64>, y: &DMatrix<f64>, kind: LossKind) -> LossValue {
        let f = self.forward_rows(x);
        match kind {
            LossKind::Quadratic => LossValue {
                value: quadratic_error(y, &f),
                clamped: 0,
            },
            LossKind::CrossEntropy => cross_entropy(y, &f),
        }
    }

    /// Gradients of the summed loss with respect to every layer matrix.
    pub fn gradients_rows(&self, x: &DMatrix<f64>, y: &DMatrix<f64>, kind: LossKind) -> Vec<DMatrix<f64>> {
        let pass = self.pass(x);
        let f = &pass.probs;
        // dL/dT for the output scores
        let mut delta = match kind {
            LossKind::CrossEntropy => {
                // -Σ y ln f with softmax f: (Σ_k y_k) f - y
                let mut d = f.clone();
                for (i, mut row) in d.row_iter_mut().enumerate() {
                    let mass = y.row(i).sum();
                    row *= mass;
                }
                d - y
            }
            LossKind::Quadratic => {
                let g = (f - y) * 2.0;
                let mut d = DMatrix::zeros(f.nrows(), f.ncols());
                for i in 0..f.nrows() {
                    let dot: f64 = (0..f.ncols()).map(|k| g[(i, k)] * f[(i, k)]).sum();
                    for j in 0..f.ncols() {
                        d[(i, j)] = f[(i, j)] * (g[(i, j)] - dot);
                    }
                }
                d
            }
        };
        let mut grads = vec![DMatrix::zeros(0, 0); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let a = &pass.inputs[l];
            let mut g = DMatrix::zeros(a.ncols() + 1, delta.ncols());
            g.row_mut(0).copy_from(&delta.row_sum());
            g.rows_mut(1, a.ncols()).copy_from(&(a.transpose() * &delta));
            grads[l] = g;
            if l > 0 {
                let w = &self.layers[l];
                let back = &delta * w.rows(1, w.nrows() - 1).transpose();
                let act = self.activation;
                delta = back.zip_map(&pass.pre[l - 1], |b, u| b * act.derivative(u));
            }
        }
        grads
    }
}

fn binary_targets(model: &NnModel, data: &Dataset) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if model.classes() != 2 {
        return Err(Error::Schema(format!(
            "binary labels need a 2-class model, this one has {}",
            model.classes()
        )));
    }
    let x = align_columns(data, &model.feature_names)?;
    Ok((x, one_hot(data.labels(), 2)))
}

pub fn loss(model: &NnModel, data: &Dataset, kind: LossKind) -> Result<LossValue> {
    let (x, y) = binary_targets(model, data)?;
    Ok(model.loss_rows(&x, &y, kind))
}

pub fn gradients(model: &NnModel, data: &Dataset, kind: LossKind) -> Result<Vec<DMatrix<f64>>> {
    let (x, y) = binary_targets(model, data)?;
    Ok(model.gradients_rows(&x, &y, kind))
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: NnModel,
    /// Mean training loss before the first epoch, then after each epoch.
    pub loss_history: Vec<f64>,
}

/// Mini-batch gradient descent on the mean loss.
pub fn train(data: &Dataset, arch: &Architecture, config: &TrainConfig) -> Result<Trained> {
    arch.validate()?;
    config.validate()?;
    if arch.classes != 2 {
        return Err(Error::Config("binary datasets train 2-class networks".into()));
    }
    if data.nrows() == 0 {
        return Err(Error::Schema("cannot train on an empty dataset".into()));
    }
    let y = one_hot(data.labels(), 2);
    train_rows(data.names(), data.features(), &y, arch, config)
}

/// Training on an explicit target matrix (one row per sample, K columns).
pub fn train_rows(
    feature_names: Vec<String>,
    x_raw: &DMatrix<f64>,
    y: &DMatrix<f64>,
    arch: &Architecture,
    config: &TrainConfig,
) -> Result<Trained> {
    arch.validate()?;
    config.validate()?;
    let n = x_raw.nrows();
    let scaling = config.standardize.then(|| Scaling::fit(x_raw));
    let x = match &scaling {
        Some(s) => s.apply(x_raw),
        None => x_raw.clone(),
    };
    let mut model = NnModel::random(feature_names, arch, config.init_scale, rng::derive_seed(config.seed, 1))?;
    let mut order_rng = rng::substream(rng::derive_seed(config.seed, 2), 0);
    let mean_loss = |m: &NnModel| m.loss_rows(&x, y, config.loss).value / n as f64;

    let mut history = vec![mean_loss(&model)];
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=config.epochs {
        rng::shuffle(&mut order_rng, &mut order);
        for batch in order.chunks(config.batch_size) {
            let xb = x.select_rows(batch);
            let yb = y.select_rows(batch);
            let grads = model.gradients_rows(&xb, &yb, config.loss);
            let step = config.learning_rate / batch.len() as f64;
            for (w, g) in model.layers.iter_mut().zip(&grads) {
                *w -= g * step;
            }
        }
        let value = mean_loss(&model);
        if !value.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.push(value);
    }
    if let Some(s) = &scaling {
        s.fold_into(&mut model.layers[0]);
    }
    Ok(Trained {
        model,
        loss_history: history,
    })
}

/// Per-column centring and scaling of the inputs.
struct Scaling {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaling {
    fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let (mut mean, mut scale) = (Vec::new(), Vec::new());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Scaling { mean, scale }
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }

    /// Rewrites first-layer weights trained on scaled inputs so they act on raw inputs.
    fn fold_into(&self, w: &mut DMatrix<f64>) {
        for m in 0..w.ncols() {
            let mut bias = w[(0, m)];
            for j in 0..self.mean.len() {
                let raw = w[(j + 1, m)] / self.scale[j];
                bias -= raw * self.mean[j];
                w[(j + 1, m)] = raw;
            }
            w[(0, m)] = bias;
        }
    }
}
