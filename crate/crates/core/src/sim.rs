//! Seeded synthetic cohorts from a logistic data-generating process.
//!
//! Six independent risk factors are drawn, three relevant (`x1..x3`) and
//! three irrelevant (`z1..z3`), and the label is Bernoulli with
//! `logit p = a0 + a·x + b·z + ε`, `ε ~ N(0, noise_sd²)`.
//!
//! Stream layout (see [`crate::rng`]): feature column `j` draws from
//! substream `j`, the noise term from [`NOISE_STREAM`], and the label of
//! row `i` from its own substream `LABEL_STREAM_BASE + i`. Changing `n`
//! therefore only appends rows, and regenerating one column never disturbs
//! the others.

use nalgebra::DMatrix;

use crate::data::{Column, Dataset};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

pub const NOISE_STREAM: u64 = 64;
pub const LABEL_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Binomial { size: u32, p: f64 },
    Exponential { rate: f64 },
    Poisson { lambda: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Distribution {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Distribution::Binomial { size, p } => size >= 1 && (0.0..=1.0).contains(&p),
            Distribution::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Distribution::Poisson { lambda } => lambda > 0.0 && lambda <= 700.0,
            Distribution::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid distribution for {name}: {self:?}")))
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Distribution::Binomial { size, p } => rng::binomial(rng, size, p) as f64,
            Distribution::Exponential { rate } => rng::exponential(rng, rate),
            Distribution::Poisson { lambda } => rng::poisson(rng, lambda) as f64,
            Distribution::Normal { mean, sd } => rng::normal(rng, mean, sd),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Binomial { size, p } => size as f64 * p,
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Poisson { lambda } => lambda,
            Distribution::Normal { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Binomial { size, p } => size as f64 * p * (1.0 - p),
            Distribution::Exponential { rate } => 1.0 / (rate * rate),
            Distribution::Poisson { lambda } => lambda,
            Distribution::Normal { sd, .. } => sd * sd,
        }
    }

    fn column(&self, name: &str) -> Column {
        match *self {
            Distribution::Binomial { size, .. } => Column::categorical(name, size as usize + 1),
            _ => Column::continuous(name),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Distribution::Binomial { size, p } => write!(f, "binomial({size}, {p:?})"),
            Distribution::Exponential { rate } => write!(f, "exponential({rate:?})"),
            Distribution::Poisson { lambda } => write!(f, "poisson({lambda:?})"),
            Distribution::Normal { mean, sd } => write!(f, "normal({mean:?}, {sd:?})"),
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    /// Parses `binomial(size, p)`, `exponential(rate)`, `poisson(lambda)` or
    /// `normal(mean, sd)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse distribution `{s}`"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let args: Vec<&str> = rest.strip_suffix(')').ok_or_else(bad)?.split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<f64> { args.get(k).and_then(|a| a.parse().ok()).ok_or_else(bad) };
        let d = match (name.trim(), args.len()) {
            ("binomial", 2) => Distribution::Binomial {
                size: args[0].parse().map_err(|_| bad())?,
                p: num(1)?,
            },
            ("exponential", 1) => Distribution::Exponential { rate: num(0)? },
            ("poisson", 1) => Distribution::Poisson { lambda: num(0)? },
            ("normal", 2) => Distribution::Normal { mean: num(0)?, sd: num(1)? },
            _ => return Err(bad()),
        };
        d.validate(s)?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    /// Coefficients of the relevant factors x1, x2, x3.
    pub a: [f64; 3],
    /// Coefficients of the irrelevant factors z1, z2, z3.
    pub b: [f64; 3],
    pub intercept: f64,
    /// Standard deviation of the logit noise term.
    pub noise_sd: f64,
    pub seed: u64,
    pub x: [Distribution; 3],
    pub z: [Distribution; 3],
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            a: [1.0, 2.0, -1.0],
            b: [0.0; 3],
            intercept: 0.0,
            noise_sd: 0.1,
            seed: 20220101,
            x: [
                Distribution::Binomial { size: 3, p: 0.3 },
                Distribution::Exponential { rate: 1.0 },
                Distribution::Poisson { lambda: 3.0 },
            ],
            z: [
                Distribution::Binomial { size: 2, p: 0.5 },
                Distribution::Normal { mean: 3.0, sd: 1.0 },
                Distribution::Poisson { lambda: 5.0 },
            ],
        }
    }
}

/// Intercept used to reproduce the published simulation study. It was chosen
/// so that the expected GLM test performance over independent samples is
/// closest to the published figures.
pub const STUDY_INTERCEPT: f64 = 0.7;

pub const FEATURE_NAMES: [&str; 6] = ["x1", "x2", "x3", "z1", "z2", "z3"];

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("sample size n must be at least 1".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config(format!("noise_sd {} must be finite and >= 0", self.noise_sd)));
        }
        if !self.intercept.is_finite() || self.a.iter().chain(&self.b).any(|c| !c.is_finite()) {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        for (d, name) in self.distributions().iter().zip(FEATURE_NAMES) {
            d.validate(name)?;
        }
        Ok(())
    }

    pub fn distributions(&self) -> [Distribution; 6] {
        [self.x[0], self.x[1], self.x[2], self.z[0], self.z[1], self.z[2]]
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a[0], self.a[1], self.a[2], self.b[0], self.b[1], self.b[2]]
    }

    /// Reads the noise parameter as a variance instead of a standard deviation.
    pub fn with_noise_variance(mut self, variance: f64) -> Self {
        self.noise_sd = variance.max(0.0).sqrt();
        self
    }
}

struct Draws {
    x: DMatrix<f64>,
    noise: Vec<f64>,
    uniforms: Vec<f64>,
}

fn draw(config: &SimConfig) -> Draws {
    let n = config.n;
    let dists = config.distributions();
    let mut x = DMatrix::zeros(n, dists.len());
    for (j, dist) in dists.iter().enumerate() {
        let mut rng = rng::substream(config.seed, j as u64);
        for i in 0..n {
            x[(i, j)] = dist.sample(&mut rng);
        }
    }
    let mut noise_rng = rng::substream(config.seed, NOISE_STREAM);
    let noise = (0..n)
        .map(|_| rng::normal(&mut noise_rng, 0.0, 1.0))
        .collect();
    let uniforms = (0..n)
        .map(|i| rng::unit(&mut rng::substream(config.seed, LABEL_STREAM_BASE + i as u64)))
        .collect();
    Draws { x, noise, uniforms }
}

fn labels(config: &SimConfig, draws: &Draws, intercept: f64) -> Vec<u8> {
    let coef = config.coefficients();
    (0..config.n)
        .map(|i| {
            let eta = intercept
                + coef
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * draws.x[(i, j)])
                    .sum::<f64>()
                + config.noise_sd * draws.noise[i];
            let p = crate::glm::logistic(eta);
            u8::from(draws.uniforms[i] < p)
        })
        .collect()
}

fn assemble(config: &SimConfig, draws: Draws, y: Vec<u8>) -> Result<Dataset> {
    let columns = config
        .distributions()
        .iter()
        .zip(FEATURE_NAMES)
        .map(|(d, name)| d.column(name))
        .collect();
    Dataset::new(columns, draws.x, y)
}

pub fn simulate(config: &SimConfig) -> Result<Dataset> {
    config.validate()?;
    let draws = draw(config);
    let y = labels(config, &draws, config.intercept);
    assemble(config, draws, y)
}

/// Simulates with the intercept shifted by bisection until the empirical
/// positive rate is within ±10% (relative) of `target_positive_rate`.
/// Returns the dataset together with the calibrated configuration.
pub fn simulate_imbalanced(
    config: &SimConfig,
    target_positive_rate: f64,
) -> Result<(Dataset, SimConfig)> {
    config.validate()?;
    if !(target_positive_rate > 0.0 && target_positive_rate < 0.5) {
        return Err(Error::Config(format!(
            "target positive rate {target_positive_rate} must lie in (0, 0.5)"
        )));
    }
    let draws = draw(config);
    let rate = |a0: f64| {
        let y = labels(config, &draws, a0);
        y.iter().filter(|&&v| v == 1).count() as f64 / config.n as f64
    };
    let tolerance = 0.1 * target_positive_rate;

    // the rate is non-decreasing in a0 for fixed draws
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if rate(lo) > target_positive_rate + tolerance || rate(hi) < target_positive_rate - tolerance {
        return Err(Error::Convergence(format!(
            "positive rate {target_positive_rate} is outside the reachable range"
        )));
    }
    // bisect to convergence and keep the closest rate seen
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rate(mid);
        let gap = (r - target_positive_rate).abs();
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, mid));
        }
        if gap == 0.0 {
            break;
        }
        if r < target_positive_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let found = best.filter(|&(gap, _)| gap <= tolerance).map(|(_, a0)| a0);
    let a0 = found.ok_or_else(|| {
        Error::Convergence(format!(
            "no intercept gives a positive rate within 10% of {target_positive_rate} for n = {}",
            config.n
        ))
    })?;
    let calibrated = SimConfig {
        intercept: a0,
        ..config.clone()
    };
    let y = labels(&calibrated, &draws, a0);
    Ok((assemble(&calibrated, draws, y)?, calibrated))
}
