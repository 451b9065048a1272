//! The `risklab` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};

use crate::config::{ExperimentConfig, SEED_ENV};
use crate::data::Dataset;
use crate::doc::Document;
use crate::error::{Error, Result};
use crate::eval;
use crate::glm::{self, GlmFit, Penalty};
use crate::interpret::{self, ImportanceReport, LimeConfig, Method};
use crate::model::ProbabilityModel;
use crate::nn::{self, Activation, NnModel};
use crate::plot;
use crate::rng;
use crate::tables;

#[derive(Debug, Parser)]
#[command(name = "risklab", version, about = "Logistic regression and small neural networks for risk-factor studies")]
pub struct Cli {
    /// Worker threads for parallel stages [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a cohort and write it as CSV
    Simulate {
        /// Experiment config file [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Output CSV
        #[arg(long, value_name = "PATH", default_value = "cohort.csv")]
        out: PathBuf,
        /// Override the number of rows [default: [sim] n, 1000]
        #[arg(long)]
        n: Option<usize>,
    },
    /// Fit a logistic regression and print the coefficient table
    FitGlm {
        /// Cohort CSV [default: simulate from the config]
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        /// Experiment config file [default: built-in defaults]
        config: Option<PathBuf>,
        /// Penalty: none, ridge or lasso [default: [glm] penalty, none]
        #[arg(long)]
        penalty: Option<String>,
        /// Penalty weight [default: [glm] lambda, 0]
        #[arg(long)]
        lambda: Option<f64>,
        /// Where to save the fitted model
        #[arg(long, value_name = "PATH", default_value = "glm.model")]
        out: PathBuf,
    },
    /// Train a feedforward network and save it
    FitNn {
        /// Cohort CSV [default: simulate from the config]
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Experiment config file [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Hidden layer sizes, comma separated [default: [nn] hidden, 3]
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
        /// sigmoid, tanh, identity, elu(a), relu(a) or selu(a,b) [default: [nn] activation, sigmoid]
        #[arg(long)]
        activation: Option<String>,
        /// Training epochs [default: [nn] epochs, 200]
        #[arg(long)]
        epochs: Option<usize>,
        /// Step size [default: [nn] learning_rate, 0.05]
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Where to save the trained model
        #[arg(long, value_name = "PATH", default_value = "nn.model")]
        out: PathBuf,
    },
    /// Repeated-split evaluation of GLM and NN
    Evaluate {
        /// Cohort CSV [default: simulate from the config]
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Experiment config file [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Number of splits [default: [eval] replicates, 100]
        #[arg(long)]
        replicates: Option<usize>,
        /// off, before-split or train-only [default: [eval] duplication, off]
        #[arg(long)]
        duplication: Option<String>,
        /// Output directory [default: [output] dir, out]
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Feature importance for a saved model
    Importance {
        /// Saved GLM or NN model
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Data to explain (CSV with the model's feature columns)
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// permutation, garson, lek, shapley or lime [default: [interpret] method, permutation]
        #[arg(long)]
        method: Option<String>,
        /// Experiment config file [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Permutations per feature [default: [interpret] permutations, 100]
        #[arg(long)]
        permutations: Option<usize>,
        /// p_d, p_nd or p_g [default: [interpret] metric, p_d]
        #[arg(long)]
        metric: Option<String>,
        /// Monte Carlo background rows for Shapley [default: [interpret] shapley_samples, 50]
        #[arg(long)]
        samples: Option<usize>,
        /// Feature profiled by Lek's method [default: [interpret] lek_feature, x2]
        #[arg(long)]
        feature: Option<String>,
        /// Row explained by LIME [default: [interpret] lime_row, 0]
        #[arg(long)]
        row: Option<usize>,
        /// Output directory [default: [output] dir, out]
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Regenerate the simulation-study tables
    ReproduceTables {
        /// Experiment config file [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Output directory [default: [output] dir, out]
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Ten splits and ten permutations instead of the configured counts [default: off]
        #[arg(long)]
        quick: bool,
    },
    /// Plot the activation functions as SVG
    PlotActivations {
        /// Output SVG
        #[arg(long, value_name = "PATH", default_value = "activations.svg")]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::FitGlm { .. } => "fit-glm",
            Command::FitNn { .. } => "fit-nn",
            Command::Evaluate { .. } => "evaluate",
            Command::Importance { .. } => "importance",
            Command::ReproduceTables { .. } => "reproduce-tables",
            Command::PlotActivations { .. } => "plot-activations",
        }
    }
}

/// Loads the config (or defaults) and applies the seed override.
fn load_config(path: Option<&Path>, seed_env: Option<&str>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) if !p.is_file() => {
            return Err(Error::Config(format!("config file {} not found", p.display())));
        }
        Some(p) => ExperimentConfig::read(p)?,
        None => ExperimentConfig::default(),
    };
    config.override_seed(seed_env)?;
    Ok(config)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Fails early when a file cannot be created at `path`.
fn check_writable(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
            ));
        }
    }
    if path.is_dir() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::IsADirectory, "is a directory"),
        ));
    }
    Ok(())
}

fn cohort(config: &ExperimentConfig, data: Option<&Path>) -> Result<Dataset> {
    match data {
        Some(p) => Dataset::read_csv(p),
        None => Ok(tables::load_cohort(config)?.0),
    }
}

enum LoadedModel {
    Glm(GlmFit),
    Nn(NnModel),
}

impl LoadedModel {
    fn read(path: &Path) -> Result<Self> {
        let doc = Document::read(path)?;
        match doc.kind()? {
            "glm" => Ok(LoadedModel::Glm(GlmFit::from_document(&doc)?)),
            "nn" => Ok(LoadedModel::Nn(NnModel::from_document(&doc)?)),
            other => Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("unknown model kind `{other}`"),
            }),
        }
    }

    fn as_model(&self) -> &dyn ProbabilityModel {
        match self {
            LoadedModel::Glm(m) => m,
            LoadedModel::Nn(m) => m,
        }
    }
}

fn run(cli: Cli, seed_env: Option<&str>) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // a pool that already exists (repeated in-process calls) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Simulate { config, out, n } => {
            let mut c = load_config(config.as_deref(), seed_env)?;
            if let Some(n) = n {
                c.sim.config.n = n;
            }
            c.validate()?;
            check_writable(&out)?;
            let data = tables::load_cohort(&c)?.0;
            data.write_csv(&out)?;
            println!(
                "wrote {}: n = {}, d = {}, positive rate = {:.4}",
                out.display(),
                data.nrows(),
                data.ncols(),
                data.positive_rate()
            );
        }
        Command::FitGlm {
            data,
            config,
            penalty,
            lambda,
            out,
        } => {
            let c = load_config(config.as_deref(), seed_env)?;
            let penalty = Penalty::from_tag(
                penalty.as_deref().unwrap_or(c.penalty.tag()),
                lambda.unwrap_or(c.penalty.lambda()),
            )?;
            if let Some(p) = &data {
                std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            }
            check_writable(&out)?;
            let d = cohort(&c, data.as_deref())?;
            let fit = glm::fit_logistic_with(&d, penalty, c.fit)?;
            fit.to_document().write(&out)?;
            if fit.inference.is_some() {
                print!("{}", tables::table2_markdown(&fit, None)?);
            } else {
                println!("| feature | coefficient |\n|---|---|");
                println!("| (intercept) | {:.4} |", fit.intercept());
                for (name, v) in fit.feature_names.iter().zip(fit.slopes()) {
                    println!("| {name} | {v:.4} |");
                }
            }
            for w in &fit.warnings {
                eprintln!("warning: {w:?}");
            }
            println!("model saved to {}", out.display());
        }
        Command::FitNn {
            data,
            config,
            hidden,
            activation,
            epochs,
            learning_rate,
            out,
        } => {
            let mut c = load_config(config.as_deref(), seed_env)?;
            if let Some(h) = hidden {
                c.arch.hidden = h;
            }
            if let Some(a) = activation {
                c.arch.activation = a.parse::<Activation>()?;
            }
            if let Some(e) = epochs {
                c.train.epochs = e;
            }
            if let Some(lr) = learning_rate {
                c.train.learning_rate = lr;
            }
            c.validate()?;
            if let Some(p) = &data {
                std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            }
            check_writable(&out)?;
            let d = cohort(&c, data.as_deref())?;
            let trained = nn::train(&d, &c.arch, &c.train)?;
            trained.model.to_document().write(&out)?;
            let probs = trained.model.predict(&d)?;
            let conf = crate::metrics::Confusion::from_probabilities(&probs, d.labels(), 0.5);
            println!(
                "trained {} parameters over {} epochs: final mean loss {:.6}, training accuracy {:.4}",
                trained.model.parameter_count(),
                c.train.epochs,
                trained.loss_history.last().copied().unwrap_or(f64::NAN),
                conf.accuracy().unwrap_or(f64::NAN)
            );
            println!("model saved to {}", out.display());
        }
        Command::Evaluate {
            data,
            config,
            replicates,
            duplication,
            out,
        } => {
            let mut c = load_config(config.as_deref(), seed_env)?;
            if let Some(r) = replicates {
                c.split.replicates = r;
            }
            if let Some(d) = duplication {
                c.split.duplication = d.parse()?;
            }
            if let Some(o) = out {
                c.output = o;
            }
            c.validate()?;
            if let Some(p) = &data {
                std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            }
            c.validate_paths()?;
            let started = Instant::now();
            let d = cohort(&c, data.as_deref())?;
            let report = eval::evaluate(&d, &c.method_specs(), &c.split)?;
            write_file(&c.output.join("eval.md"), &report.to_markdown())?;
            write_file(&c.output.join("eval.csv"), &report.to_csv())?;
            write_file(&c.output.join("eval_counts.csv"), &report.counts_csv())?;
            print!("{}", report.to_markdown());
            println!("runtime {:.2} s", started.elapsed().as_secs_f64());
        }
        Command::Importance {
            model,
            data,
            method,
            config,
            permutations,
            metric,
            samples,
            feature,
            row,
            out,
        } => {
            let mut c = load_config(config.as_deref(), seed_env)?;
            let it = &mut c.interpret;
            if let Some(m) = method {
                it.method = m.parse()?;
            }
            if let Some(p) = permutations {
                it.permutations = p;
            }
            if let Some(m) = metric {
                it.metric = m.parse()?;
            }
            if let Some(s) = samples {
                it.shapley_samples = s;
            }
            if let Some(f) = feature {
                it.lek_feature = f;
            }
            if let Some(r) = row {
                it.lime_row = r;
            }
            if let Some(o) = out {
                c.output = o;
            }
            c.validate()?;
            std::fs::File::open(&model).map_err(|e| Error::io(&model, e))?;
            std::fs::File::open(&data).map_err(|e| Error::io(&data, e))?;
            c.validate_paths()?;
            let loaded = LoadedModel::read(&model)?;
            let d = Dataset::read_csv(&data)?;
            importance(&c, &loaded, &d)?;
        }
        Command::ReproduceTables { config, out, quick } => {
            let mut c = load_config(config.as_deref(), seed_env)?;
            if quick {
                c.split.replicates = 10;
                c.interpret.permutations = 10;
            }
            if let Some(o) = out {
                c.output = o;
            }
            c.validate()?;
            c.validate_paths()?;
            let started = Instant::now();
            let t = tables::reproduce(&c)?;
            let files = tables::write_tables(&t, &c, &c.output)?;
            let elapsed = started.elapsed().as_secs_f64();
            for f in &files {
                println!("wrote {}", f.display());
            }
            println!("seed {}, runtime {elapsed:.2} s", c.seed);
        }
        Command::PlotActivations { out } => {
            check_writable(&out)?;
            write_file(&out, &plot::activations_svg())?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn importance(c: &ExperimentConfig, loaded: &LoadedModel, data: &Dataset) -> Result<()> {
    let it = &c.interpret;
    let model = loaded.as_model();
    let dir = &c.output;
    let stem = dir.join(format!("importance_{}", it.method));
    let seed = rng::derive_seed(c.seed, 5);
    let report: ImportanceReport = match it.method {
        Method::Permutation => interpret::permutation_importance(
            model,
            data,
            it.metric,
            c.split.threshold,
            it.permutations,
            seed,
        )?,
        Method::Garson => match loaded {
            LoadedModel::Nn(m) => interpret::garson(m)?,
            LoadedModel::Glm(_) => {
                return Err(Error::UnsupportedArchitecture(
                    "Garson's method applies to neural networks, not GLM fits".into(),
                ))
            }
        },
        Method::Shapley => interpret::shapley(model, data, it.shapley_samples, seed)?,
        Method::Lime => {
            let x = (it.lime_row < data.nrows())
                .then(|| data.row(it.lime_row))
                .ok_or_else(|| Error::Config(format!("row {} is out of range", it.lime_row)))?;
            let cfg = LimeConfig {
                max_features: it.lime_features.min(data.ncols()),
                samples: it.lime_samples,
                kernel_width: it.lime_width,
                seed,
            };
            interpret::lime_explain(model, &x, data, &cfg)?.to_report()
        }
        Method::Lek => {
            let j = data
                .column_index(&it.lek_feature)
                .ok_or_else(|| Error::Config(format!("no feature named `{}`", it.lek_feature)))?;
            let profile = interpret::lek_profile(model, data, j, it.lek_grid, &it.lek_quantiles)?;
            let curves: Vec<plot::Curve> = profile
                .quantiles
                .iter()
                .zip(&profile.values)
                .map(|(q, v)| plot::Curve {
                    label: format!("others at quantile {q}"),
                    points: profile.grid.iter().copied().zip(v.iter().copied()).collect(),
                })
                .collect();
            let svg = plot::line_chart(
                &format!("Lek profile of {}", profile.feature),
                &curves,
                &profile.feature,
                "predicted probability",
            );
            let mut md = format!("Lek profile of {}\n\n| {} |", profile.feature, profile.feature);
            for q in &profile.quantiles {
                md.push_str(&format!(" q = {q} |"));
            }
            md.push_str(&format!("\n|---|{}\n", "---|".repeat(profile.quantiles.len())));
            for (g, x) in profile.grid.iter().enumerate() {
                md.push_str(&format!("| {x:.3} |"));
                for v in &profile.values {
                    md.push_str(&format!(" {:.4} |", v[g]));
                }
                md.push('\n');
            }
            write_file(&stem.with_extension("csv"), &profile.to_csv())?;
            write_file(&stem.with_extension("md"), &md)?;
            write_file(&stem.with_extension("svg"), &svg)?;
            print!("{md}");
            return Ok(());
        }
    };
    let md = if report.method == Method::Permutation {
        report.to_grouped_markdown(tables::IRRELEVANCE_TOLERANCE)
    } else {
        report.to_markdown()
    };
    let reference = if report.method == Method::Permutation { report.baseline } else { None };
    let svg = plot::bar_chart(
        &format!("{} importance", report.method),
        &report.features,
        &report.scores,
        reference,
    );
    write_file(&stem.with_extension("csv"), &report.to_csv())?;
    write_file(&stem.with_extension("md"), &md)?;
    write_file(&stem.with_extension("svg"), &svg)?;
    print!("{md}");
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    let seed_env = std::env::var(SEED_ENV).ok();
    match run(cli, seed_env.as_deref()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == 1 {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_usage());
                    eprintln!("Run `risklab {name} --help` for the full list of options.");
                }
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_option_documents_a_default() {
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            for arg in sub.get_arguments() {
                if arg.is_required_set() || matches!(arg.get_id().as_str(), "help" | "version") {
                    continue;
                }
                let documented = !arg.get_default_values().is_empty()
                    || arg.get_help().is_some_and(|h| h.to_string().contains("[default:"));
                assert!(documented, "{} --{} has no default", sub.get_name(), arg.get_id());
            }
        }
    }

    #[test]
    fn config_not_found_is_usage_error() {
        let e = load_config(Some(Path::new("/nonexistent/risklab.cfg")), None).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
