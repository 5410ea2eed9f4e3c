use std::path::{Path, PathBuf};
use std::process::Command;

use arum_cli::{exit, run_scenario_file, RunOptions, MANIFEST_NAME, SCENARIO_SCHEMA};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    workspace().join("scenarios").join(name)
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reference")
}

fn run_into(path: &Path, dir: &Path) -> arum_cli::RunOutcome {
    let opts = RunOptions { output_dir: Some(dir.to_path_buf()), ..RunOptions::default() };
    run_scenario_file(path, &opts).unwrap()
}

fn arum(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_arum")).args(args).output().unwrap()
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn reference_scenario_matches_goldens() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(&scenario("reference.json"), tmp.path());
    let golden = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&golden).unwrap();
        for a in &out.artifacts {
            std::fs::write(golden.join(&a.name), &a.bytes).unwrap();
        }
    }
    let mut expected: Vec<String> =
        std::fs::read_dir(&golden).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    expected.sort();
    let mut produced: Vec<String> = out.artifacts.iter().map(|a| a.name.clone()).collect();
    produced.sort();
    assert_eq!(produced, expected);
    for a in &out.artifacts {
        let want = std::fs::read(golden.join(&a.name)).unwrap();
        assert!(want == a.bytes, "{} differs from golden", a.name);
        assert_eq!(std::fs::read(tmp.path().join(&a.name)).unwrap(), a.bytes);
    }
}

#[test]
fn reference_csvs_carry_expected_values() {
    let g = golden_dir();
    let identify = std::fs::read_to_string(g.join("01_identify.csv")).unwrap();
    assert!(identify.lines().nth(1).unwrap().starts_with("0,0.6,1 -1,0.6,1,true"));
    let attention = std::fs::read_to_string(g.join("02_attention.csv")).unwrap();
    assert_eq!(attention.lines().nth(1).unwrap(), "0,0,0.4,0.4");
    let welfare = std::fs::read_to_string(g.join("03_welfare.csv")).unwrap();
    for line in ["delta_exact,,-0.5", "attention_welfare_set,0,\"[0, inf)\"", "witness_guaranteed_gain,0,4"] {
        assert!(welfare.lines().any(|l| l == line), "missing {line}");
    }
    let plot = std::fs::read_to_string(g.join("03_welfare_plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 65);
}

#[test]
fn rerun_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = run_into(&scenario("tour.json"), a.path());
    let y = run_into(&scenario("tour.json"), b.path());
    assert_eq!(x.artifacts, y.artifacts);
}

#[test]
fn thread_count_does_not_change_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(a.path(), "1"), (b.path(), "4")] {
        let st = Command::new(env!("CARGO_BIN_EXE_arum"))
            .args(["run", "-q", "-o"])
            .arg(dir)
            .arg(scenario("tour.json"))
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let manifest = |d: &Path| std::fs::read(d.join(MANIFEST_NAME)).unwrap();
    assert_eq!(manifest(a.path()), manifest(b.path()));
}

#[test]
fn seed_override_changes_only_monte_carlo_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let x = run_into(&scenario("tour.json"), a.path());
    let opts = RunOptions { output_dir: Some(b.path().into()), seed: Some(1), ..RunOptions::default() };
    let y = run_scenario_file(&scenario("tour.json"), &opts).unwrap();
    for (p, q) in x.artifacts.iter().zip(&y.artifacts) {
        assert_eq!(p.name, q.name);
        let same = p.bytes == q.bytes;
        let random = p.name.starts_with("01_equivalence") || p.name == MANIFEST_NAME;
        assert_eq!(same, !random, "{}", p.name);
    }
}

#[test]
fn manifest_lists_every_file_with_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(&scenario("tour.json"), tmp.path());
    let m: Value = serde_json::from_slice(&std::fs::read(tmp.path().join(MANIFEST_NAME)).unwrap()).unwrap();
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["seed"], 2024);
    assert_eq!(m["arithmetic"], "rational");
    assert_eq!(m["library_version"], arum_core::VERSION);
    assert_eq!(m["inputs_sha256"].as_str().unwrap().len(), 64);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len() + 1, out.artifacts.len());
    for f in files {
        let name = f["path"].as_str().unwrap();
        let bytes = std::fs::read(tmp.path().join(name)).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    // one CSV and one JSON per analysis
    for i in 1..=7 {
        let n = files.iter().filter(|f| f["path"].as_str().unwrap().starts_with(&format!("{i:02}_"))).count();
        assert!(n >= 2);
    }
}

#[test]
fn plot_row_counts() {
    let tmp = tempfile::tempdir().unwrap();
    run_into(&scenario("tour.json"), tmp.path());
    let rows = |n: &str| std::fs::read_to_string(tmp.path().join(n)).unwrap().lines().count() - 1;
    assert_eq!(rows("03_discontinuity_plot.csv"), 4);
    assert_eq!(rows("06_welfare_plot.csv"), 65);
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("03_discontinuity_plot.csv")).unwrap(),
        "s,sup_pk,width\n1,0.6,0.4\n2,0.6,0.4\n4,0.6,0.4\n8,0.6,0.4\n"
    );
    let field = tempfile::tempdir().unwrap();
    run_into(&scenario("observed_field.json"), field.path());
    let diag = std::fs::read_to_string(field.path().join("03_diagnostics_plot.csv")).unwrap();
    assert_eq!(diag.lines().count() - 1, 6);
}

#[test]
fn counterfactual_scenario_reports_wide_interval() {
    let tmp = tempfile::tempdir().unwrap();
    run_into(&scenario("counterfactual_origin.json"), tmp.path());
    let csv = std::fs::read_to_string(tmp.path().join("01_counterfactual.csv")).unwrap();
    for class in ["arum", "arum_e", "arum_cs"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("{class},0,0.5,1,"))), "{csv}");
    }
}

#[test]
fn float_mode_runs_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        output_dir: Some(tmp.path().into()),
        arithmetic: Some(arum_cli::Arithmetic::Float),
        ..RunOptions::default()
    };
    run_scenario_file(&scenario("reference.json"), &opts).unwrap();
    let identify = std::fs::read_to_string(tmp.path().join("01_identify.csv")).unwrap();
    assert!(identify.lines().nth(1).unwrap().starts_with("0,0.6,1 -1,0.6,1,true"));
}

const MODEL: &str = r#"{"class": "arum_cs", "K": 2, "atoms": [
    {"eps": ["0.5", 0], "S": [0, 1], "w": "0.6"}, {"eps": ["0.5", 0], "S": [1], "w": "0.4"}]}"#;

fn exit_code_of(body: &str) -> (i32, String, bool) {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_scenario(tmp.path(), body);
    let out_dir = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_arum")).args(["run", "-q", "-o"]).arg(&out_dir).arg(&p).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stderr).unwrap(), out_dir.exists())
}

#[test]
fn empty_analyses_is_a_validation_error_before_any_output() {
    let body = format!(
        r#"{{"schema_version": 1, "name": "e", "model": {MODEL}, "grid": {{"axes": ["-1:1:2", "-1:1:2"]}}, "analyses": []}}"#
    );
    let (code, err, wrote) = exit_code_of(&body);
    assert_eq!(code, exit::VALIDATION);
    assert!(err.contains("analyses"));
    assert!(!wrote);
}

#[test]
fn exit_codes_are_distinct_per_failure_class() {
    let grid = r#""grid": {"axes": ["-1:1:2", "-1:1:2"]}"#;
    let cases: Vec<(String, i32)> = vec![
        ("{not json".into(), exit::PARSE),
        (format!(r#"{{"schema_version": 1, "name": "p", "model": {MODEL}, {grid}, "analyses": [{{"kind": "welfare", "u": ["x", 0], "u_tilde": [0, 0]}}]}}"#), exit::PARSE),
        (format!(r#"{{"schema_version": 1, "name": "u", "model": {MODEL}, {grid}, "analyses": [{{"kind": "identify", "plot": true}}]}}"#), exit::VALIDATION),
        (format!(r#"{{"schema_version": 1, "name": "r", "model": {MODEL}, {grid}, "analyses": [{{"kind": "identify", "k": 5}}]}}"#), exit::VALIDATION),
        (
            r#"{"schema_version": 1, "name": "t", "model": {"class": "arum", "K": 2, "atoms": [{"eps": [0, 0], "w": 1}]},
                "grid": {"points": [[0, 0]]}, "analyses": [{"kind": "identify"}]}"#.into(),
            exit::ARGMAX_TIE,
        ),
        (
            r#"{"schema_version": 1, "name": "i", "field": {"points": [[0, 0], [1, 0]], "probs": [["0.6", "0.4"], ["0.4", "0.6"]]},
                "analyses": [{"kind": "counterfactual", "k": 0, "u_c": ["0.5", "0"], "atom_grid": "-2:2:1"}]}"#.into(),
            exit::INFEASIBLE,
        ),
        (
            r#"{"schema_version": 1, "name": "n",
                "model": {"class": "arum_cs", "K": 3, "atoms": [{"eps": ["0.5", 0, 0], "S": [0, 1, 2], "w": "0.6"}, {"eps": ["0.5", 0, 0], "S": [1, 2], "w": "0.4"}]},
                "grid": {"points": [[1, 0, 1], [1, 1, 0]]},
                "analyses": [{"kind": "welfare", "u": [1, 0, 1], "u_tilde": [1, 1, 0], "k": 0}]}"#.into(),
            exit::NO_K_MAXIMAL_POINT,
        ),
        (
            r#"{"schema_version": 1, "name": "f",
                "model": {"class": "arum", "K": 3, "atoms": [{"eps": ["0.5", 0, 0], "w": "0.6"}, {"eps": ["-0.5", 0, 0], "w": "0.4"}]},
                "grid": {"points": [[1, 0, 1], [1, 1, 0]]},
                "analyses": [{"kind": "welfare", "u": [1, 0, 1], "u_tilde": [1, 1, 0], "k": 0, "extremely_attractive": true}]}"#.into(),
            exit::FULL_CONSIDERATION,
        ),
        (r#"{"schema_version": 1, "name": "io", "model_file": "missing.json", "grid": {"points": [[0, 0]]}, "analyses": [{"kind": "identify"}]}"#.into(), exit::IO),
    ];
    for (body, want) in cases {
        let (code, err, _) = exit_code_of(&body);
        assert_eq!(code, want, "{body}\n{err}");
        assert!(err.starts_with("error: "), "{err}");
        assert_eq!(err.lines().count(), 1, "{err}");
    }
    let o = arum(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(exit::IO));
}

#[test]
fn help_documents_exit_codes() {
    let o = arum(&["run", "--help"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for code in 2..=8 {
        assert!(text.contains(&format!("  {code}  ")), "{text}");
    }
}

#[test]
fn schema_subcommand_prints_json_schema() {
    let o = arum(&["schema"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), SCENARIO_SCHEMA);
    let v: Value = serde_json::from_str(SCENARIO_SCHEMA).unwrap();
    let kinds: Vec<&str> = v["$defs"]["analysis"]["oneOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["properties"]["kind"]["const"].as_str().unwrap())
        .collect();
    assert_eq!(
        kinds,
        ["equivalence", "identify", "discontinuity", "counterfactual", "attention", "welfare", "diagnostics"]
    );
}

#[test]
fn validate_subcommand() {
    let o = arum(&["validate", scenario("tour.json").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("7 analyses"));
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"schema_version": 1, "name": "d", "model": {MODEL}, "grid": {{"axes": ["-1:1:2", "-1:1:2"]}},
            "analyses": [{{"kind": "identify"}}], "output_dir": "from_scenario"}}"#
    );
    let p = write_scenario(tmp.path(), &body);
    let env_dir = tmp.path().join("from_env");
    let run = |flag: Option<&Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_arum"));
        c.args(["run", "-q"]).env("ARUM_OUTPUT_DIR", &env_dir).current_dir(tmp.path());
        if let Some(f) = flag {
            c.arg("-o").arg(f);
        }
        assert!(c.arg(&p).status().unwrap().success());
    };
    run(Some(&tmp.path().join("from_flag")));
    assert!(tmp.path().join("from_flag").join(MANIFEST_NAME).exists());
    run(None);
    assert!(tmp.path().join("from_scenario").join(MANIFEST_NAME).exists());
    assert!(!env_dir.exists());

    let bare = write_scenario(tmp.path(), &body.replace(r#", "output_dir": "from_scenario""#, ""));
    let st = Command::new(env!("CARGO_BIN_EXE_arum"))
        .args(["run", "-q"])
        .arg(&bare)
        .env("ARUM_OUTPUT_DIR", &env_dir)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(env_dir.join(MANIFEST_NAME).exists());
}
