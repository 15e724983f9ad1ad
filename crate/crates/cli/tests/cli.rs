use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dmc_cli::report::{Payload, Report, VerdictName};
use tempfile::TempDir;

fn dmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn coin(dir: &TempDir) -> PathBuf {
    let p = path(dir, "coin.json");
    assert_eq!(code(&dmc(&["gen", "coin", "-o", s(&p)])), 0);
    p
}

fn json_report(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad report ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

const BROKEN: &str = r#"{
  "agents": [
    {"name": "A", "states": ["a0", "a1"], "initial": "a0"},
    {"name": "B", "states": ["b0"], "initial": "b0"}
  ],
  "actions": [
    {"name": "x", "loc": ["A"], "distribution": [
      {"from": ["a0"], "to": [[["a1"], "1"]]},
      {"from": ["a1"], "to": [[["a0"], "1"]]}
    ]},
    {"name": "y", "loc": ["A", "B"], "distribution": [
      {"from": ["a0", "b0"], "to": [[["a0", "b0"], "1"]]}
    ]}
  ]
}"#;

#[test]
fn validate_accepts_the_coin_game() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let out = dmc(&["validate", s(&model)]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok"));
}

#[test]
fn validate_lists_determinacy_violations() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "broken.json");
    std::fs::write(&model, BROKEN).unwrap();
    let out = dmc(&["validate", "--model", s(&model), "--format", "json"]);
    assert_eq!(code(&out), 3);
    let r = json_report(&out);
    let Payload::Validate { valid, violations, .. } = r.result else {
        panic!("wrong payload")
    };
    assert!(!valid);
    assert!(violations
        .iter()
        .any(|v| v.kind == "nondeterminism" && v.message.contains("a0")));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = dmc(&["validate", "/nonexistent/model.json"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot access"));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "bad.json");
    std::fs::write(&model, "{ \"agents\": [").unwrap();
    assert_eq!(code(&dmc(&["validate", s(&model)])), 4);
}

#[test]
fn check_refuses_invalid_models() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "broken.json");
    std::fs::write(&model, BROKEN).unwrap();
    let out = dmc(&["check", s(&model), "--spec-inline", "P>=0.5 [ true ]"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let run = |spec: &str, extra: &[&str]| {
        let mut args = vec!["check", s(&model), "--spec-inline", spec, "--seed", "3"];
        args.extend_from_slice(extra);
        code(&dmc(&args))
    };
    assert_eq!(run("P>=0.2 [ F[7] W1 ]", &[]), 0);
    assert_eq!(run("P>=0.7 [ F[7] W1 ]", &[]), 1);
    assert_eq!(run("P>=0.4375 [ F[7] W1 ]", &["--max-samples", "10"]), 2);
    assert_eq!(run("P>=0.5 [ F[7] nowhere ]", &[]), 4);
}

#[test]
fn check_reports_are_identical_apart_from_timing() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let run = || {
        let out = dmc(&[
            "check",
            s(&model),
            "--spec-inline",
            "P>=0.3 [ F[7] W1 ] & !P>=0.9 [ F[7] W2 ]",
            "--seed",
            "42",
            "--format",
            "json",
        ]);
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["timing"] = serde_json::Value::Null;
        strip_elapsed(&mut v);
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

fn strip_elapsed(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("elapsed_secs");
            map.values_mut().for_each(strip_elapsed);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_elapsed),
        _ => {}
    }
}

#[test]
fn generated_seed_is_echoed() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let out = dmc(&[
        "check",
        s(&model),
        "--spec-inline",
        "P>=0.2 [ F[7] W1 ]",
        "--format",
        "json",
    ]);
    let r = json_report(&out);
    match r.config {
        dmc_cli::report::Config::Check {
            seed_generated, seed, ..
        } => {
            assert!(seed_generated);
            let again = dmc(&[
                "check",
                s(&model),
                "--spec-inline",
                "P>=0.2 [ F[7] W1 ]",
                "--seed",
                &seed.to_string(),
                "--format",
                "json",
            ]);
            let (Payload::Check { samples_used: a, .. }, Payload::Check { samples_used: b, .. }) =
                (r.result, json_report(&again).result)
            else {
                panic!("wrong payload")
            };
            assert_eq!(a, b);
        }
        _ => panic!("wrong config"),
    }
}

#[test]
fn reports_round_trip_through_the_schema() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let spec = path(&dir, "spec.pbltl");
    std::fs::write(&spec, "# comment\nP>=0.3 [ F[7] W1 ] | P>=0.3 [ F[7] W2 ]\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", s(&model)],
        vec!["check", s(&model), "--spec", s(&spec), "--seed", "1", "--record-scores"],
        vec!["chain", s(&model), "--interleaved"],
        vec!["oracle", s(&model), "--depth", "3", "--exact-rational"],
    ];
    for mut args in runs {
        let file = path(&dir, "report.json");
        args.extend_from_slice(&["--report", s(&file)]);
        assert!(code(&dmc(&args)) <= 1, "{args:?}");
        let text = std::fs::read_to_string(&file).unwrap();
        let r: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(r.format_version, 1);
        assert_eq!(r.to_json(), text);
    }
}

#[test]
fn check_short_circuits_disjunctions() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let out = dmc(&[
        "check",
        s(&model),
        "--spec-inline",
        "P>=0.2 [ F[7] W1 ] | P>=0.2 [ F[7] W2 ]",
        "--seed",
        "9",
        "--format",
        "json",
    ]);
    let Payload::Check { verdict, tree, .. } = json_report(&out).result else {
        panic!("wrong payload")
    };
    assert_eq!(verdict, VerdictName::Accept);
    assert_eq!(tree.leaves().len(), 1);
}

#[test]
fn chain_of_the_coin_game() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    let export = path(&dir, "chain.csv");
    let out = dmc(&[
        "chain",
        s(&model),
        "--exact-rational",
        "--interleaved",
        "--export",
        s(&export),
        "--export-format",
        "csv",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let Payload::Chain {
        states,
        edges,
        deadlock_states,
        row_stochastic,
        interleaved,
        ..
    } = json_report(&out).result
    else {
        panic!("wrong payload")
    };
    assert_eq!((states, edges, deadlock_states), (7, 10, 0));
    assert!(row_stochastic);
    let i = interleaved.unwrap();
    assert_eq!(i.states, 11);
    assert!(i.deadlocks.is_empty());
    let csv = std::fs::read_to_string(&export).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.contains("\"(in1,in2)\",\"(T1,T2)\",1/4"));
}

#[test]
fn chain_reports_dining_deadlock_freedom() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "dining.json");
    assert_eq!(code(&dmc(&["gen", "dining", "-n", "3", "-o", s(&model)])), 0);
    let out = dmc(&["chain", s(&model), "--interleaved", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let Payload::Chain {
        deadlock_states,
        interleaved,
        ..
    } = json_report(&out).result
    else {
        panic!("wrong payload")
    };
    assert_eq!(deadlock_states, 0);
    assert!(interleaved.unwrap().deadlocks.is_empty());
}

#[test]
fn chain_overflow_is_reported() {
    let dir = TempDir::new().unwrap();
    let model = path(&dir, "ring.json");
    assert_eq!(code(&dmc(&["gen", "itai-rodeh", "-n", "8", "-o", s(&model)])), 0);
    let out = dmc(&["chain", s(&model), "--max-states", "1000"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn oracle_on_the_coin_game() {
    let dir = TempDir::new().unwrap();
    let model = coin(&dir);
    for (mode, depth) in [("--exact-rational", "4"), ("--depth", "4"), ("--depth", "0")] {
        let mut args = vec!["oracle", s(&model), "--format", "json"];
        if mode == "--exact-rational" {
            args.extend_from_slice(&["--exact-rational", "--depth", depth]);
        } else {
            args.extend_from_slice(&[mode, depth]);
        }
        let out = dmc(&args);
        assert_eq!(code(&out), 0);
        let Payload::Oracle {
            passed,
            max_discrepancy,
            failures,
            mode,
            ..
        } = json_report(&out).result
        else {
            panic!("wrong payload")
        };
        assert!(passed && failures == 0);
        if mode == "rational" {
            assert_eq!(max_discrepancy, 0.0);
        } else {
            assert!(max_discrepancy <= 1e-12);
        }
    }
}

#[test]
fn gen_is_deterministic_and_writes_specs() {
    let dir = TempDir::new().unwrap();
    let a = dmc(&["gen", "itai-rodeh", "-n", "3", "--id-range", "2"]);
    let b = dmc(&["gen", "itai-rodeh", "-n", "3", "--id-range", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let spec = path(&dir, "leader.pbltl");
    let model = path(&dir, "ring.json");
    let report = path(&dir, "gen.json");
    let out = dmc(&[
        "gen",
        "itai-rodeh",
        "-n",
        "3",
        "-o",
        s(&model),
        "--spec-output",
        s(&spec),
        "--rounds",
        "3",
        "--report",
        s(&report),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(&spec).unwrap(),
        "P>=0.99 [ F[24] leader_1 | F[24] leader_2 | F[24] leader_3 ]\n"
    );
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let Payload::Gen { metadata, .. } = r.result else {
        panic!("wrong payload")
    };
    assert_eq!(metadata["moves_per_round"], 8);
    assert_eq!(code(&dmc(&["validate", s(&model)])), 0);
}

#[test]
fn gen_rejects_out_of_range_parameters() {
    assert_eq!(code(&dmc(&["gen", "itai-rodeh", "-n", "1"])), 4);
    assert_eq!(code(&dmc(&["gen", "dining", "-n", "2"])), 4);
}

#[test]
fn random_models_validate() {
    for seed in ["1", "2", "3"] {
        let dir = TempDir::new().unwrap();
        let model = path(&dir, "r.json");
        assert_eq!(code(&dmc(&["gen", "random", "--seed", seed, "-o", s(&model)])), 0);
        assert_eq!(code(&dmc(&["validate", s(&model)])), 0);
    }
}

#[test]
fn usage_errors_do_not_collide_with_verdict_codes() {
    assert_eq!(code(&dmc(&["frobnicate"])), 4);
    assert_eq!(code(&dmc(&["--help"])), 0);
}
