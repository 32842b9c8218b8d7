use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entrobound")).args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

/// A `file:` spec in a fresh temp dir; the dir must outlive the spec string.
fn sigma_file(values: &[&str]) -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sigma.txt");
    std::fs::write(&path, values.join("\n")).unwrap();
    let spec = format!("file:{}", path.display());
    (dir, spec)
}

fn rows(doc: &Value) -> &Vec<Value> {
    doc["rows"].as_array().expect("rows array")
}

fn verdict<'a>(doc: &'a Value, condition: &str) -> &'a str {
    rows(doc)
        .iter()
        .find(|r| r["condition"].as_str().is_some_and(|c| c.starts_with(condition)))
        .and_then(|r| r["verdict"].as_str())
        .unwrap_or_else(|| panic!("no {condition} row"))
}

#[test]
fn bound_rows_are_sandwiched() {
    let doc =
        run_json(&["bound", "--sigma", "geom:c=1,b=2", "--p", "1", "--q", "2", "--n", "1,16,256", "--forms", "ub,lb"]);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "bound");
    let rows = rows(&doc);
    assert_eq!(rows.len(), 6);
    for n in [1, 16, 256] {
        let at = |form: &str| {
            rows.iter().find(|r| r["n"] == n && r["form"].as_str().unwrap().starts_with(form)).unwrap()["log10_value"]
                .as_f64()
                .unwrap()
        };
        assert!(at("LB") <= at("UB"), "n={n}");
    }
}

#[test]
fn amp_form_is_a_dyadic_staircase() {
    // τ_k for σ_n = n^-2, r = 2: τ_k^2 = ζ(4) - Σ_{n<k} n^-4
    let doc = run_json(&[
        "bound",
        "--sigma",
        "poly:a=1,alpha=2",
        "--p",
        "2",
        "--q",
        "1",
        "--n",
        "2^1..2^10",
        "--forms",
        "opt-amp",
    ]);
    let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
    for (j, row) in rows(&doc).iter().enumerate() {
        let k = j as u64 + 2;
        let tau = (zeta4 - (1..k).map(|n| (n as f64).powi(-4)).sum::<f64>()).sqrt();
        let got = row["value"].as_f64().unwrap();
        assert!((got / tau - 1.0).abs() < 1e-8, "n=2^{}: {got} vs {tau}", j + 1);
    }
}

#[test]
fn classify_matches_known_verdicts() {
    let doc = run_json(&["classify", "--sigma", "expexp:a=1,lambda=1", "--p", "1", "--q", "2"]);
    assert_eq!(verdict(&doc, "EXP"), "holds");
    let doc = run_json(&["classify", "--sigma", "explog:a=1,lambda=2", "--p", "2", "--q", "1"]);
    assert_eq!(verdict(&doc, "ALP"), "holds");
    assert_eq!(verdict(&doc, "AMP"), "fails");
    let doc = run_json(&["classify", "--sigma", "exppoly:a=1,lambda=0.5", "--p", "2", "--q", "1"]);
    assert_eq!(verdict(&doc, "ALP"), "holds");
    assert_eq!(verdict(&doc, "AMP"), "fails");
    assert_eq!(verdict(&doc, "EXP"), "fails");
}

#[test]
fn table1_reports_full_agreement() {
    let doc = run_json(&["table1"]);
    let rows = rows(&doc);
    assert_eq!(rows.len(), 27);
    assert!(rows.iter().all(|r| r["agrees"] != false));
    let expexp: Vec<_> = rows.iter().filter(|r| r["family"] == "exp(-a e^(lambda n))").collect();
    for r in expexp {
        let want = if r["condition"] == "AMP" { "fails" } else { "holds" };
        assert_eq!(r["verdict"], want);
    }
}

#[test]
fn oracle_brackets_the_interval_entropy_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unit1.txt");
    writeln!(std::fs::File::create(&path).unwrap(), "1").unwrap();
    let spec = format!("file:{}", path.display());
    let doc = run_json(&["oracle", "--sigma", &spec, "--p", "inf", "--q", "inf", "--k", "1", "--n", "2"]);
    let row = &rows(&doc)[0];
    let (lo, hi) = (row["lo"].as_f64().unwrap(), row["hi"].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi && hi - lo <= 0.02, "[{lo}, {hi}]");
}

#[test]
fn exit_codes_follow_the_contract() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["bound", "--sigma", "geom:c=1,b=2", "--p", "2", "--q", "2", "--n", "4"]), Some(4));
    assert_eq!(code(&["bound", "--sigma", "geom:c=1,b=oops", "--p", "1", "--q", "2", "--n", "4"]), Some(2));
    assert_eq!(code(&["bound", "--sigma", "geom:c=1,b=2", "--p", "1", "--q", "2", "--n", "4,2"]), Some(2));
    // σ_n = 1/n is not in ℓ_1
    assert_eq!(code(&["bound", "--sigma", "poly:a=1,alpha=1", "--p", "inf", "--q", "1", "--n", "4"]), Some(3));
    assert_eq!(code(&["classify", "--sigma", "geom:c=1,b=2", "--p", "1", "--q", "1"]), Some(4));
    let (_dir, four) = sigma_file(&["1", "1", "1", "1"]);
    let out = run(&["oracle", "--sigma", &four, "--p", "2", "--q", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('4'), "dimension guard names k");
}

#[test]
fn quick_verify_passes() {
    let doc = run_json(&["verify", "--quick"]);
    assert!(rows(&doc).iter().all(|r| r["passed"] == true));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["bound", "--sigma", "exppoly:a=1,lambda=1", "--p", "2", "--q", "1", "--n", "2^0..2^12"];
    let first = run(&args).stdout;
    assert_eq!(first, run(&args).stdout);
    let single =
        Command::new(env!("CARGO_BIN_EXE_entrobound")).args(args).env("ENTROBOUND_THREADS", "1").output().unwrap();
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(first, single.stdout);

    let (_dir, spec) = sigma_file(&["1", "0.5"]);
    let oracle = ["oracle", "--sigma", &spec, "--p", "2", "--q", "1", "--n", "3", "--seed", "9", "--output", "csv"];
    let a = run(&oracle);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 2);
    assert_eq!(a.stdout, run(&oracle).stdout);
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_entrobound"))
        .args(["table1"])
        .env("ENTROBOUND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_headers_are_fixed() {
    let header = |args: &[&str]| {
        let out = run(args);
        String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_owned()
    };
    assert_eq!(
        header(&["bound", "--sigma", "geom:c=1,b=2", "--p", "1", "--q", "2", "--n", "1", "--output", "csv"]),
        "n,form,log10_value,value,argmax_k,k_first,k_last,certificate"
    );
    assert_eq!(
        header(&["tail", "--sigma", "geom:c=1,b=2", "--r", "1", "--k", "1,2", "--output", "csv"]),
        "k,log10_tau,tau,ln_power_lo,ln_power_hi,terms"
    );
    assert_eq!(header(&["verify", "--quick", "--output", "csv"]), "check,passed,margin,cases,counterexample");
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = run(&[
        "bound",
        "--sigma",
        "geom:c=1,b=2",
        "--p",
        "1",
        "--q",
        "2",
        "--n",
        "16",
        "--forms",
        "ub",
        "--output",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let field = text.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = field.split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17, "{field}");
}
