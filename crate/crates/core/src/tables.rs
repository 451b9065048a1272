//! End-to-end reproduction of the simulation-study tables: prediction
//! performance (table 1), GLM coefficients (table 2) and permutation
//! importance for the network (table 3).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport, MethodSpec};
use crate::glm::{self, GlmFit};
use crate::interpret::{permutation_importance, ImportanceReport};
use crate::rng;
use crate::sim;

/// Relative tolerance used to label permutation row-groups as irrelevant.
pub const IRRELEVANCE_TOLERANCE: f64 = 0.01;

/// The cohort named by the config: read from `[sim] input`, or simulated
/// (with intercept calibration when `target_rate` is set).
pub fn load_cohort(config: &ExperimentConfig) -> Result<(Dataset, Option<[f64; 6]>)> {
    if let Some(path) = &config.sim.input {
        return Ok((Dataset::read_csv(path)?, None));
    }
    let sc = &config.sim.config;
    let data = match config.sim.target_rate {
        Some(rate) => sim::simulate_imbalanced(sc, rate)?.0,
        None => sim::simulate(sc)?,
    };
    Ok((data, Some(sc.coefficients())))
}

#[derive(Debug, Clone)]
pub struct Tables {
    pub eval: EvalReport,
    pub glm: GlmFit,
    pub importance: ImportanceReport,
    pub truth: Option<[f64; 6]>,
    pub seed: u64,
}

/// Table 2: the GLM fitted on the first training split of `data`.
pub fn coefficient_table(config: &ExperimentConfig, data: &Dataset) -> Result<GlmFit> {
    let prepared = eval::prepare(data, &config.split)?;
    let (train, _) = eval::replicate_split(&prepared, &config.split, 0)?;
    glm::fit_logistic_with(&train, config.penalty, config.fit)
}

/// Table 3: permutation importance of the network trained on the first
/// training split, measured on the matching test split.
pub fn permutation_table(config: &ExperimentConfig, data: &Dataset) -> Result<ImportanceReport> {
    let spec = &config.split;
    let prepared = eval::prepare(data, spec)?;
    let (train, test) = eval::replicate_split(&prepared, spec, 0)?;
    // same fit seed the evaluation uses for the network on replicate 0
    let nn_index = config.methods.iter().position(|m| m == "nn").unwrap_or(config.methods.len());
    let nn = MethodSpec::Nn {
        arch: config.arch.clone(),
        train: config.train.clone(),
    };
    let model = nn.fit(&train, eval::fit_seed(spec, nn_index, 0))?;
    permutation_importance(
        model.as_ref(),
        &test,
        config.interpret.metric,
        spec.threshold,
        config.interpret.permutations,
        rng::derive_seed(config.seed, 4),
    )
}

pub fn reproduce(config: &ExperimentConfig) -> Result<Tables> {
    let (data, truth) = load_cohort(config).map_err(|e| e.in_stage("loading the cohort"))?;
    let eval = eval::evaluate(&data, &config.method_specs(), &config.split)
        .map_err(|e| e.in_stage("table 1 (evaluation)"))?;
    let glm = coefficient_table(config, &data).map_err(|e| e.in_stage("table 2 (GLM fit)"))?;
    let importance =
        permutation_table(config, &data).map_err(|e| e.in_stage("table 3 (permutation importance)"))?;
    Ok(Tables {
        eval,
        glm,
        importance,
        truth,
        seed: config.seed,
    })
}

fn p_value(p: f64) -> String {
    if p >= 1e-3 {
        format!("{p:.3}")
    } else {
        format!("{p:.1e}")
    }
}

pub fn table2_markdown(fit: &GlmFit, truth: Option<&[f64; 6]>) -> Result<String> {
    let inference = fit
        .inference
        .as_ref()
        .ok_or_else(|| Error::InferenceUnavailable("Wald inference needs an unpenalized fit".into()))?;
    let odds = glm::odds_ratio_table(fit)?;
    let mut out = String::from(
        "| Risk factor | True coeff | coeff by GLM | SE | p-value | odds ratio | CI95(odds ratio) |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for (j, name) in fit.feature_names.iter().enumerate() {
        let t = truth
            .and_then(|t| t.get(j))
            .map_or("-".to_string(), |v| format!("{v}"));
        let _ = writeln!(
            out,
            "| {name} | {t} | {:.3} | {:.3} | {} | {:.3} | {:.3} {:.3} |",
            fit.slopes()[j],
            inference.std_errors[j + 1],
            p_value(inference.p_values[j + 1]),
            odds[j].odds_ratio,
            odds[j].lower,
            odds[j].upper
        );
    }
    let _ = write!(
        out,
        "\nIntercept {:.3} (SE {:.3}). Deviance {:.3} after {} iterations.\n",
        fit.intercept(),
        inference.std_errors[0],
        fit.deviance,
        fit.iterations
    );
    if fit.separated() {
        out.push_str("Warning: the data look separated; estimates are unreliable.\n");
    }
    Ok(out)
}

pub fn table2_csv(fit: &GlmFit, truth: Option<&[f64; 6]>) -> Result<String> {
    let inference = fit
        .inference
        .as_ref()
        .ok_or_else(|| Error::InferenceUnavailable("Wald inference needs an unpenalized fit".into()))?;
    let odds = glm::odds_ratio_table(fit)?;
    let mut out = String::from("feature,true_coefficient,coefficient,std_error,z,p_value,odds_ratio,or_lower,or_upper\n");
    for (j, name) in fit.feature_names.iter().enumerate() {
        let t = truth.and_then(|t| t.get(j)).map_or(String::new(), |v| format!("{v:?}"));
        let _ = writeln!(
            out,
            "{name},{t},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            fit.slopes()[j],
            inference.std_errors[j + 1],
            inference.z[j + 1],
            inference.p_values[j + 1],
            odds[j].odds_ratio,
            odds[j].lower,
            odds[j].upper
        );
    }
    Ok(out)
}

/// Appends a constant `seed` column to a CSV document.
fn with_seed(csv: &str, seed: u64) -> String {
    let mut out = String::with_capacity(csv.len() + 16 * csv.lines().count());
    for (i, line) in csv.lines().enumerate() {
        out.push_str(line);
        if i == 0 {
            out.push_str(",seed\n");
        } else {
            let _ = writeln!(out, ",{seed}");
        }
    }
    out
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `table{1,2,3}.{md,csv}`, the per-replicate counts and the resolved
/// config into `dir`.
pub fn write_tables(tables: &Tables, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let seed_line = format!("\nSeed: {}\n", tables.seed);

    let t1 = format!(
        "Probability of correct prediction on the test partitions\n\n{}{seed_line}",
        tables.eval.to_markdown()
    );
    write(dir.join("table1.md"), &t1, &mut written)?;
    write(dir.join("table1.csv"), &with_seed(&tables.eval.to_csv(), tables.seed), &mut written)?;
    write(dir.join("table1_counts.csv"), &tables.eval.counts_csv(), &mut written)?;

    let t2 = format!(
        "GLM coefficients with Wald p-values (first training split)\n\n{}{seed_line}",
        table2_markdown(&tables.glm, tables.truth.as_ref())?
    );
    write(dir.join("table2.md"), &t2, &mut written)?;
    write(dir.join("table2.csv"), &with_seed(&table2_csv(&tables.glm, tables.truth.as_ref())?, tables.seed), &mut written)?;

    let t3 = format!(
        "{}{seed_line}",
        tables.importance.to_grouped_markdown(IRRELEVANCE_TOLERANCE)
    );
    write(dir.join("table3.md"), &t3, &mut written)?;
    write(dir.join("table3.csv"), &with_seed(&tables.importance.to_csv(), tables.seed), &mut written)?;

    write(dir.join("config.used"), &config.to_document().render(), &mut written)?;
    Ok(written)
}
