use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use selftest::cli::{run, EXIT_INPUT, EXIT_OK};

const CHSH: &str = r#"{"correlators": [["1/sqrt2", "1/sqrt2"], ["1/sqrt2", "-1/sqrt2"]]}"#;

fn selftest(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_selftest"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("selftest").chain(args.iter().copied()), &mut std::io::empty(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn classify_chsh_from_stdin() {
    let o = selftest(&["classify"], CHSH);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["tag"], "SelfTesting");
    assert_eq!(v["condition"]["i"], 1);
    assert_eq!(v["condition"]["j"], 1);
    assert_eq!(v["condition"]["xi"], 1);
    assert!(v["condition"]["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn classify_degenerate_and_wide_tables() {
    let (code, out, _) = in_process(&["classify", "--data", r#"{"correlators": [[1, 0], [0, 1]]}"#]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["tag"].as_str(), v["case"].as_str()), (Some("DegenerateLocal"), Some("iii")));

    let (code, out, _) = in_process(&["classify", "--data", r#"{"correlators": [[1, 0, "1/sqrt2"], [0, 1, "1/sqrt2"]]}"#]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["chsh_max"].as_f64().unwrap() - (1.0 + 2f64.sqrt())).abs() <= 1e-12);
}

#[test]
fn realize_and_verify_from_angles() {
    let angles = r#"{"angles": {"alpha": [["pi/4", "3pi/4"], ["pi/4", "pi/4"]]}}"#;
    let (code, out, _) = in_process(&["realize", "--data", angles]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let e01 = v["correlators"][0][1].as_f64().unwrap();
    assert!((e01 + std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);

    for variant in ["direct", "rotated"] {
        let (code, out, _) = in_process(&["verify", "--variant", variant, "--data", angles]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
        assert!((v["swap_fidelity"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn game_report() {
    let (code, out, _) = in_process(&["game", "--data", CHSH]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["quantum_value"].as_f64().unwrap() - 4.0).abs() <= 1e-6);
    assert!(v["classical_value"].as_f64().unwrap() < 3.0);
}

#[test]
fn bound_csv_and_json() {
    let (code, out, _) = in_process(&["bound", "--preset", "chsh", "--eps", "0.01", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "epsilon,bound,primal,gap,status");
    assert!(lines[1].starts_with("0.01,0.9455692"), "{}", lines[1]);
    assert!(lines[1].ends_with(",optimal"));

    let (code, out, _) = in_process(&["bound", "--data", CHSH, "--eps", "0"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v[0]["result"]["bound"].as_f64().unwrap() >= 0.999);
}

#[test]
fn fig5_sweep_has_five_blocks_and_is_reproducible() {
    let dir = std::env::temp_dir().join(format!("selftest-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig5.csv");
    let args = ["sweep", "--preset", "fig5", "--eps-grid", "0:0.01:0.01", "--out", path.to_str().unwrap()];
    let o = selftest(&args, "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(&path).unwrap();
    let blocks: Vec<&str> = first.split("\n\n").collect();
    assert_eq!(blocks.len(), 5);
    let names = ["alpha01=pi/2", "alpha01=7pi/12", "alpha01=2pi/3", "chsh", "mayers-yao"];
    for (block, name) in blocks.iter().zip(names) {
        let lines: Vec<&str> = block.trim_end().lines().collect();
        assert_eq!(lines[0], format!("# {name}"));
        assert_eq!(lines[1], "epsilon,bound,primal,gap,status");
        assert_eq!(lines.len(), 4);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_selftest")).args(args).env("SELFTEST_THREADS", "1").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_inputs_exit_2_with_structured_errors() {
    let cases: &[&[&str]] = &[
        &["classify", "--data", "not json"],
        &["classify", "--data", r#"{"correlators": [[2, 0], [0, 1]]}"#],
        &["classify", "--data", r#"{"correlators": [["pie", 0], [0, 1]]}"#],
        &["classify", "--data", r#"{"angles": {"alpha": [[0, 0]]}}"#],
        &["realize", "--data", r#"{"correlators": [[0.9, 0.9], [0.9, 0.9]]}"#],
        &["sweep", "--preset", "chsh", "--eps-grid", "0:1:0"],
        &["frobnicate"],
    ];
    for args in cases {
        let (code, out, err) = in_process(args);
        assert_eq!(code, EXIT_INPUT, "{args:?}");
        assert!(out.is_empty());
        let v: Value = serde_json::from_str(&err).unwrap_or_else(|e| panic!("{args:?}: {e}: {err}"));
        assert_eq!(v["error"]["code"], 2);
        assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_selftest"))
        .args(["sweep", "--preset", "chsh", "--eps-grid", "0.01"])
        .env("SELFTEST_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
