use std::path::Path;
use std::process::{Command, Output};

fn risklab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risklab"))
        .args(args)
        .current_dir(dir)
        .env_remove("RISKLAB_SEED")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = "seed = 11\n[sim]\nn = 300\n[nn]\nepochs = 20\n[eval]\nreplicates = 3\n[interpret]\npermutations = 3\n";

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    dir
}

#[test]
fn help_lists_defaults_for_every_subcommand() {
    let dir = workspace();
    for sub in [
        "simulate",
        "fit-glm",
        "fit-nn",
        "evaluate",
        "importance",
        "reproduce-tables",
        "plot-activations",
    ] {
        let out = risklab(dir.path(), &[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        let usage = text.lines().find(|l| l.starts_with("Usage:")).unwrap();
        let required: Vec<&str> = usage.split_whitespace().filter(|w| w.starts_with("--")).collect();
        for line in text.lines().map(str::trim_start) {
            let Some(flag) = line.split_whitespace().find(|w| w.starts_with("--")) else {
                continue;
            };
            if flag == "--help" || required.contains(&flag) {
                continue;
            }
            assert!(line.contains("[default:"), "{sub}: {line}");
        }
        assert!(text.contains("--threads"), "{sub} lacks the global --threads flag");
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = workspace();
    assert_eq!(risklab(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(risklab(dir.path(), &["simulate", "--bogus"]).status.code(), Some(1));

    let missing = risklab(dir.path(), &["simulate", "--config", "absent.cfg"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("Usage: risklab simulate"));

    std::fs::write(dir.path().join("bad.cfg"), "[nn]\nepochs = 3\nmomentum = 0.9\n").unwrap();
    let bad = risklab(dir.path(), &["simulate", "--config", "bad.cfg"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("line 3"), "{}", stderr(&bad));
}

#[test]
fn io_errors_exit_2() {
    let dir = workspace();
    let out = risklab(dir.path(), &["fit-glm", "--data", "nowhere.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = risklab(dir.path(), &["plot-activations", "--out", "missing/dir/a.svg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let dir = workspace();
    std::fs::write(
        dir.path().join("diverge.cfg"),
        "[sim]\nn = 200\nx2 = exponential(0.001)\n[nn]\nactivation = identity\nlearning_rate = 1e308\nstandardize = false\nepochs = 5\n",
    )
    .unwrap();
    let out = risklab(dir.path(), &["fit-nn", "--config", "diverge.cfg"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn garson_rejects_two_hidden_layers() {
    let dir = workspace();
    let p = dir.path();
    assert!(risklab(p, &["simulate", "--config", "small.cfg", "--out", "c.csv"]).status.success());
    assert!(risklab(p, &["fit-nn", "--config", "small.cfg", "--data", "c.csv", "--hidden", "3,2", "--out", "deep.model"])
        .status
        .success());
    let out = risklab(p, &["importance", "--model", "deep.model", "--data", "c.csv", "--method", "garson"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("one hidden layer"), "{}", stderr(&out));
}

#[test]
fn shapley_rejects_sixteen_features() {
    let dir = workspace();
    let p = dir.path();
    let header: Vec<String> = (0..16).map(|j| format!("f{j}")).collect();
    let mut csv = format!("{},label\n", header.join(","));
    for i in 0..40 {
        let row: Vec<String> = (0..16).map(|j| ((i * 7 + j * 3) % 11).to_string()).collect();
        csv.push_str(&format!("{},{}\n", row.join(","), i % 2));
    }
    std::fs::write(p.join("wide.csv"), csv).unwrap();
    assert!(risklab(p, &["fit-glm", "--data", "wide.csv", "--penalty", "ridge", "--lambda", "1", "--out", "wide.model"])
        .status
        .success());
    let out = risklab(p, &["importance", "--model", "wide.model", "--data", "wide.csv", "--method", "shapley"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("too large"), "{}", stderr(&out));
}

#[test]
fn seed_environment_variable_overrides_config() {
    let dir = workspace();
    let p = dir.path();
    let run = |seed: Option<&str>, out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_risklab"));
        cmd.args(["simulate", "--config", "small.cfg", "--out", out]).current_dir(p);
        match seed {
            Some(s) => cmd.env("RISKLAB_SEED", s),
            None => cmd.env_remove("RISKLAB_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(p.join(out)).unwrap()
    };
    let base = run(None, "a.csv");
    assert_eq!(run(Some("11"), "b.csv"), base);
    assert_ne!(run(Some("12"), "c.csv"), base);

    let bad = Command::new(env!("CARGO_BIN_EXE_risklab"))
        .args(["simulate", "--config", "small.cfg"])
        .current_dir(p)
        .env("RISKLAB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn reproduce_tables_writes_seeded_outputs() {
    let dir = workspace();
    let p = dir.path();
    let out = risklab(p, &["--threads", "2", "reproduce-tables", "--config", "small.cfg", "--out", "tables"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["table1.md", "table1.csv", "table1_counts.csv", "table2.md", "table2.csv", "table3.md", "table3.csv", "config.used"] {
        assert!(p.join("tables").join(f).is_file(), "{f}");
    }
    let t1 = std::fs::read_to_string(p.join("tables/table1.csv")).unwrap();
    assert!(t1.lines().next().unwrap().ends_with(",seed"));
    assert!(t1.lines().skip(1).all(|l| l.ends_with(",11")));
    let t3 = std::fs::read_to_string(p.join("tables/table3.md")).unwrap();
    assert!(t3.contains("relevant factors") || t3.contains("irrelevant factors"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("runtime"));

    // the resolved config reproduces the same run
    let again = risklab(p, &["reproduce-tables", "--config", "tables/config.used", "--out", "tables2"]);
    assert!(again.status.success(), "{}", stderr(&again));
    for f in ["table1.csv", "table2.csv", "table3.csv"] {
        assert_eq!(
            std::fs::read(p.join("tables").join(f)).unwrap(),
            std::fs::read(p.join("tables2").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn importance_writes_csv_markdown_and_svg() {
    let dir = workspace();
    let p = dir.path();
    assert!(risklab(p, &["simulate", "--config", "small.cfg", "--out", "c.csv"]).status.success());
    assert!(risklab(p, &["fit-nn", "--config", "small.cfg", "--data", "c.csv", "--out", "nn.model"]).status.success());
    for method in ["permutation", "garson", "lek", "shapley", "lime"] {
        let out = risklab(
            p,
            &["importance", "--config", "small.cfg", "--model", "nn.model", "--data", "c.csv", "--method", method, "--samples", "5", "--out", "imp"],
        );
        assert!(out.status.success(), "{method}: {}", stderr(&out));
        for ext in ["csv", "md", "svg"] {
            assert!(p.join(format!("imp/importance_{method}.{ext}")).is_file(), "{method}.{ext}");
        }
    }
    let svg = std::fs::read_to_string(p.join("imp/importance_lek.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 5);
}

#[test]
fn plot_activations_is_stable() {
    let dir = workspace();
    let p = dir.path();
    assert!(risklab(p, &["plot-activations", "--out", "a.svg"]).status.success());
    assert!(risklab(p, &["plot-activations", "--out", "b.svg"]).status.success());
    let a = std::fs::read(p.join("a.svg")).unwrap();
    assert_eq!(a, std::fs::read(p.join("b.svg")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().matches("<path").count(), 5);
}
