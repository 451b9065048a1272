//! Experiment configuration files.
//!
//! ```text
//! seed = 20220101
//!
//! [sim]
//! n = 1000
//! intercept = 0.7
//! x2 = exponential(1.0)
//!
//! [eval]
//! replicates = 100
//! duplication = off
//! ```
//!
//! Every key is optional; missing keys keep their defaults. Unknown sections
//! and keys are rejected with their line number. `RISKLAB_SEED` overrides the
//! global seed.

use std::path::{Path, PathBuf};

use crate::doc::{join_floats, Document, Entry, Section};
use crate::error::{Error, Result};
use crate::eval::{CiKind, Duplication, MethodSpec, SplitSpec};
use crate::glm::{FitOptions, Penalty};
use crate::interpret::{Method, DEFAULT_QUANTILES};
use crate::metrics::Metric;
use crate::nn::{Activation, Architecture, LossKind, TrainConfig};
use crate::sim::{SimConfig, FEATURE_NAMES, STUDY_INTERCEPT};

pub const SEED_ENV: &str = "RISKLAB_SEED";
pub const DEFAULT_SEED: u64 = 20220101;

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub config: SimConfig,
    /// Shift the intercept until this positive rate is reached.
    pub target_rate: Option<f64>,
    /// Read the cohort from this CSV instead of simulating.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretConfig {
    pub method: Method,
    pub metric: Metric,
    pub permutations: usize,
    pub shapley_samples: usize,
    pub lime_features: usize,
    pub lime_samples: usize,
    pub lime_width: f64,
    /// Test-set row explained by LIME.
    pub lime_row: usize,
    pub lek_feature: String,
    pub lek_grid: usize,
    pub lek_quantiles: Vec<f64>,
}

impl Default for InterpretConfig {
    fn default() -> Self {
        InterpretConfig {
            method: Method::Permutation,
            metric: Metric::Sensitivity,
            permutations: 100,
            shapley_samples: 50,
            lime_features: 3,
            lime_samples: 1000,
            lime_width: 0.75 * (FEATURE_NAMES.len() as f64).sqrt(),
            lime_row: 0,
            lek_feature: "x2".into(),
            lek_grid: 25,
            lek_quantiles: DEFAULT_QUANTILES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sim: SimSection,
    pub penalty: Penalty,
    pub fit: FitOptions,
    pub arch: Architecture,
    pub train: TrainConfig,
    pub split: SplitSpec,
    /// Evaluated methods, by tag (`glm`, `nn`).
    pub methods: Vec<String>,
    pub interpret: InterpretConfig,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: DEFAULT_SEED,
            sim: SimSection {
                config: SimConfig {
                    intercept: STUDY_INTERCEPT,
                    seed: DEFAULT_SEED,
                    ..SimConfig::default()
                },
                target_rate: None,
                input: None,
            },
            penalty: Penalty::None,
            fit: FitOptions::default(),
            arch: Architecture::simulation_default(),
            train: TrainConfig {
                seed: DEFAULT_SEED,
                ..TrainConfig::default()
            },
            split: SplitSpec::simulation(DEFAULT_SEED),
            methods: vec!["glm".into(), "nn".into()],
            interpret: InterpretConfig::default(),
            output: PathBuf::from("out"),
        }
    }
}

fn unknown(entry: &Entry, section: &str) -> Error {
    entry.error(format!("unknown key `{}` in [{section}]", entry.key))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(&Document::parse(text)?)
    }

    /// Reads a config file; parse errors carry the path and line number.
    pub fn read(path: &Path) -> Result<Self> {
        let doc = Document::read(path)?;
        Self::from_document(&doc).map_err(|e| match e {
            Error::ConfigLine { line, message } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {line}: {message}"),
            },
            other => other,
        })
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for section in &doc.sections {
            match section.name.as_str() {
                "" => c.apply_global(section)?,
                "sim" => c.apply_sim(section)?,
                "glm" => c.apply_glm(section)?,
                "nn" => c.apply_nn(section)?,
                "eval" => c.apply_eval(section)?,
                "interpret" => c.apply_interpret(section)?,
                "output" => c.apply_output(section)?,
                other => {
                    return Err(Error::ConfigLine {
                        line: section.line,
                        message: format!(
                            "unknown section [{other}] (expected sim, glm, nn, eval, interpret or output)"
                        ),
                    })
                }
            }
        }
        let seed = c.seed;
        c.set_seed(seed);
        c.validate()?;
        Ok(c)
    }

    fn apply_global(&mut self, s: &Section) -> Result<()> {
        for e in &s.entries {
            match e.key.as_str() {
                "seed" => self.seed = e.parse()?,
                _ => return Err(e.error(format!("unknown top-level key `{}`", e.key))),
            }
        }
        Ok(())
    }

    fn apply_sim(&mut self, s: &Section) -> Result<()> {
        let sim = &mut self.sim;
        for e in &s.entries {
            match e.key.as_str() {
                "n" => sim.config.n = e.parse()?,
                "intercept" => sim.config.intercept = e.parse()?,
                "noise_sd" => sim.config.noise_sd = e.parse()?,
                "a" | "b" => {
                    let v: Vec<f64> = e.parse_list()?;
                    let v: [f64; 3] = v
                        .try_into()
                        .map_err(|_| e.error(format!("`{}` needs exactly three coefficients", e.key)))?;
                    if e.key == "a" {
                        sim.config.a = v;
                    } else {
                        sim.config.b = v;
                    }
                }
                "target_rate" => sim.target_rate = Some(e.parse()?),
                "input" => sim.input = Some(PathBuf::from(&e.value)),
                key => match FEATURE_NAMES.iter().position(|&f| f == key) {
                    Some(j) => {
                        let d = e.value.parse().map_err(|err: Error| e.error(err.to_string()))?;
                        if j < 3 {
                            sim.config.x[j] = d;
                        } else {
                            sim.config.z[j - 3] = d;
                        }
                    }
                    None => return Err(unknown(e, "sim")),
                },
            }
        }
        Ok(())
    }

    fn apply_glm(&mut self, s: &Section) -> Result<()> {
        let mut tag = self.penalty.tag().to_string();
        let mut lambda = self.penalty.lambda();
        let mut tag_line = s.line;
        for e in &s.entries {
            match e.key.as_str() {
                "penalty" => {
                    tag = e.value.clone();
                    tag_line = e.line;
                }
                "lambda" => lambda = e.parse()?,
                "tolerance" => self.fit.tolerance = e.parse()?,
                "max_iterations" => self.fit.max_iterations = e.parse()?,
                _ => return Err(unknown(e, "glm")),
            }
        }
        self.penalty = Penalty::from_tag(&tag, lambda).map_err(|err| Error::ConfigLine {
            line: tag_line,
            message: err.to_string(),
        })?;
        Ok(())
    }

    fn apply_nn(&mut self, s: &Section) -> Result<()> {
        for e in &s.entries {
            match e.key.as_str() {
                "hidden" => self.arch.hidden = e.parse_list()?,
                "classes" => self.arch.classes = e.parse()?,
                "activation" => {
                    self.arch.activation = e
                        .value
                        .parse::<Activation>()
                        .map_err(|err| e.error(err.to_string()))?
                }
                "loss" => {
                    self.train.loss = e
                        .value
                        .parse::<LossKind>()
                        .map_err(|err| e.error(err.to_string()))?
                }
                "learning_rate" => self.train.learning_rate = e.parse()?,
                "epochs" => self.train.epochs = e.parse()?,
                "batch_size" => self.train.batch_size = e.parse()?,
                "init_scale" => self.train.init_scale = Some(e.parse()?),
                "standardize" => self.train.standardize = e.parse()?,
                _ => return Err(unknown(e, "nn")),
            }
        }
        Ok(())
    }

    fn apply_eval(&mut self, s: &Section) -> Result<()> {
        for e in &s.entries {
            let tagged = |err: Error| e.error(err.to_string());
            match e.key.as_str() {
                "train_fraction" => self.split.train_fraction = e.parse()?,
                "replicates" => self.split.replicates = e.parse()?,
                "threshold" => self.split.threshold = e.parse()?,
                "duplication" => self.split.duplication = e.value.parse::<Duplication>().map_err(tagged)?,
                "ci" => self.split.ci = e.value.parse::<CiKind>().map_err(tagged)?,
                "methods" => {
                    let methods: Vec<String> = e.parse_list()?;
                    if let Some(bad) = methods.iter().find(|m| !matches!(m.as_str(), "glm" | "nn")) {
                        return Err(e.error(format!("unknown method `{bad}` (expected glm or nn)")));
                    }
                    self.methods = methods;
                }
                _ => return Err(unknown(e, "eval")),
            }
        }
        Ok(())
    }

    fn apply_interpret(&mut self, s: &Section) -> Result<()> {
        let it = &mut self.interpret;
        for e in &s.entries {
            let tagged = |err: Error| e.error(err.to_string());
            match e.key.as_str() {
                "method" => it.method = e.value.parse::<Method>().map_err(tagged)?,
                "metric" => it.metric = e.value.parse::<Metric>().map_err(tagged)?,
                "permutations" => it.permutations = e.parse()?,
                "shapley_samples" => it.shapley_samples = e.parse()?,
                "lime_features" => it.lime_features = e.parse()?,
                "lime_samples" => it.lime_samples = e.parse()?,
                "lime_width" => it.lime_width = e.parse()?,
                "lime_row" => it.lime_row = e.parse()?,
                "lek_feature" => it.lek_feature = e.value.clone(),
                "lek_grid" => it.lek_grid = e.parse()?,
                "lek_quantiles" => it.lek_quantiles = e.parse_list()?,
                _ => return Err(unknown(e, "interpret")),
            }
        }
        Ok(())
    }

    fn apply_output(&mut self, s: &Section) -> Result<()> {
        for e in &s.entries {
            match e.key.as_str() {
                "dir" => self.output = PathBuf::from(&e.value),
                _ => return Err(unknown(e, "output")),
            }
        }
        Ok(())
    }

    /// Sets the global seed and every module seed derived from it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.sim.config.seed = seed;
        self.split.seed = seed;
        self.train.seed = seed;
    }

    /// Applies a `RISKLAB_SEED`-style override.
    pub fn override_seed(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            let seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?;
            self.set_seed(seed);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.config.validate()?;
        if let Some(r) = self.sim.target_rate {
            if !(r > 0.0 && r < 0.5) {
                return Err(Error::Config(format!("target_rate {r} must lie in (0, 0.5)")));
            }
        }
        self.arch.validate()?;
        self.train.validate()?;
        self.split.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("[eval] methods is empty".into()));
        }
        if !(self.fit.tolerance > 0.0) || self.fit.max_iterations == 0 {
            return Err(Error::Config("[glm] tolerance and max_iterations must be positive".into()));
        }
        let it = &self.interpret;
        if it.permutations == 0 || it.shapley_samples == 0 || it.lek_grid < 2 {
            return Err(Error::Config(
                "[interpret] permutations and shapley_samples must be >= 1, lek_grid >= 2".into(),
            ));
        }
        if !(it.lime_width > 0.0) {
            return Err(Error::Config("[interpret] lime_width must be positive".into()));
        }
        Ok(())
    }

    /// Checks every referenced path before any computation: the input file
    /// must be readable and the output directory creatable.
    pub fn validate_paths(&self) -> Result<()> {
        if let Some(input) = &self.sim.input {
            std::fs::File::open(input).map_err(|e| Error::io(input, e))?;
        }
        prepare_output_dir(&self.output)
    }

    pub fn method_specs(&self) -> Vec<MethodSpec> {
        self.methods
            .iter()
            .map(|m| match m.as_str() {
                "glm" => MethodSpec::Glm {
                    penalty: self.penalty,
                    options: self.fit,
                },
                _ => MethodSpec::Nn {
                    arch: self.arch.clone(),
                    train: self.train.clone(),
                },
            })
            .collect()
    }

    /// The fully resolved configuration, in the same file format.
    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let mut global = Section::new("");
        global.push("seed", self.seed);
        doc.add(global);

        let mut sim = Section::new("sim");
        let c = &self.sim.config;
        sim.push("n", c.n)
            .push("intercept", format!("{:?}", c.intercept))
            .push("a", join_floats(c.a))
            .push("b", join_floats(c.b))
            .push("noise_sd", format!("{:?}", c.noise_sd));
        for (name, d) in FEATURE_NAMES.iter().zip(c.distributions()) {
            sim.push(*name, d);
        }
        if let Some(r) = self.sim.target_rate {
            sim.push("target_rate", format!("{r:?}"));
        }
        if let Some(p) = &self.sim.input {
            sim.push("input", p.display());
        }
        doc.add(sim);

        let mut glm = Section::new("glm");
        glm.push("penalty", self.penalty.tag())
            .push("lambda", format!("{:?}", self.penalty.lambda()))
            .push("tolerance", format!("{:?}", self.fit.tolerance))
            .push("max_iterations", self.fit.max_iterations);
        doc.add(glm);

        let mut nn = Section::new("nn");
        let hidden: Vec<String> = self.arch.hidden.iter().map(|h| h.to_string()).collect();
        nn.push("hidden", hidden.join(","))
            .push("classes", self.arch.classes)
            .push("activation", self.arch.activation)
            .push("loss", self.train.loss)
            .push("learning_rate", format!("{:?}", self.train.learning_rate))
            .push("epochs", self.train.epochs)
            .push("batch_size", self.train.batch_size)
            .push("standardize", self.train.standardize);
        if let Some(s) = self.train.init_scale {
            nn.push("init_scale", format!("{s:?}"));
        }
        doc.add(nn);

        let mut ev = Section::new("eval");
        ev.push("train_fraction", format!("{:?}", self.split.train_fraction))
            .push("replicates", self.split.replicates)
            .push("threshold", format!("{:?}", self.split.threshold))
            .push("duplication", self.split.duplication)
            .push("ci", self.split.ci)
            .push("methods", self.methods.join(","));
        doc.add(ev);

        let it = &self.interpret;
        let mut ip = Section::new("interpret");
        ip.push("method", it.method)
            .push("metric", it.metric)
            .push("permutations", it.permutations)
            .push("shapley_samples", it.shapley_samples)
            .push("lime_features", it.lime_features)
            .push("lime_samples", it.lime_samples)
            .push("lime_width", format!("{:?}", it.lime_width))
            .push("lime_row", it.lime_row)
            .push("lek_feature", &it.lek_feature)
            .push("lek_grid", it.lek_grid)
            .push("lek_quantiles", join_floats(it.lek_quantiles.iter().copied()));
        doc.add(ip);

        let mut out = Section::new("output");
        out.push("dir", self.output.display());
        doc.add(out);
        doc
    }
}

/// Creates the directory if needed and checks it accepts files.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".risklab-write-check");
    std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}
