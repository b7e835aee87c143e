use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const O1_REAL: [&str; 6] = ["--lambda", "0.5", "--mu", "0.25", "--annulus", "O1"];

fn abelint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abelint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(doc: &Value, schema: &str) {
    let text = std::fs::read_to_string(schema_dir().join(format!("{schema}.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{doc:#}");
}

/// Runs a successful command and checks its JSON against the schema.
fn run_json(args: &[&str]) -> Value {
    let out = abelint(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    validate(&doc, args[0]);
    doc
}

fn with(base: &[&str], extra: &[&'static str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_json_owned(args: &[String]) -> Value {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run_json(&refs)
}

fn exit_code(args: &[&str]) -> (i32, Value) {
    let out = abelint(args);
    let code = out.status.code().unwrap();
    if code == 0 {
        return (0, Value::Null);
    }
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    validate(&err, "error");
    (code, err)
}

#[test]
fn classify_reports_three_annuli_above_gamma() {
    let doc = run_json(&["classify", "--lambda", "0.5", "--mu", "0.25"]);
    assert_eq!(doc["result"]["region"], "RealAboveGamma");
    assert_eq!(doc["result"]["annuli"].as_array().unwrap().len(), 3);
}

#[test]
fn classify_complex_and_degenerate_points() {
    let doc = run_json(&["classify", "--lambda-re", "-1", "--lambda-im", "0.5"]);
    assert_eq!(doc["result"]["annuli"][0]["exceptional"], true);
    let doc = run_json(&["classify", "--lambda", "0.5", "--mu", "0"]);
    assert_eq!(doc["result"]["region"]["RealDegenerate"], "MuZero");
}

#[test]
fn curves_sample_every_curve() {
    for curve in ["gamma", "Gamma", "gamma_c_real", "gamma_c_complex", "gamma_s"] {
        let doc = run_json(&["curves", "--curve", curve, "--n", "5"]);
        assert_eq!(doc["result"]["points"].as_array().unwrap().len(), 5, "{curve}");
    }
}

#[test]
fn integrate_near_the_center_gives_the_harmonic_period() {
    let h = format!("{}", -1.0 / 120.0 + 1e-8);
    let doc = run_json_owned(&with(&["integrate"], &O1_REAL).into_iter().chain(["--h".into(), h, "--k".into(), "0".into()]).collect::<Vec<_>>());
    let v = doc["result"]["val_re"].as_f64().unwrap();
    let expected = std::f64::consts::TAU / (0.5f64 * 0.75).sqrt();
    assert!(((v - expected) / expected).abs() < 1e-6, "{v} vs {expected}");
}

#[test]
fn continue_covers_both_sides_of_the_real_interval() {
    let below = run_json_owned(&with(&["continue"], &O1_REAL).into_iter().chain(["--h=-0.01".into(), "--k".into(), "1".into()]).collect::<Vec<_>>());
    assert_eq!(below["result"]["method"], "RCurve");
    let above = run_json_owned(&with(&["continue"], &O1_REAL).into_iter().chain(["--h".into(), "0.1".into()]).collect::<Vec<_>>());
    assert_eq!(above["result"]["method"], "ComplexContour");
}

#[test]
fn zeros_on_an_exceptional_annulus_are_at_most_one() {
    let doc = run_json_owned(&with(&["zeros"], &O1_REAL).into_iter().chain(["--a0=-0.7".into(), "--a1".into(), "1".into()]).collect::<Vec<_>>());
    assert!(doc["result"]["count"].as_u64().unwrap() <= 1);
}

#[test]
fn maxzeros_on_omega_mu_reaches_two() {
    let doc = run_json(&["maxzeros", "--lambda", "0.6", "--mu", "0.2585", "--annulus", "OMu"]);
    assert_eq!(doc["result"]["max_zeros"], 2);
}

#[test]
fn every_asymptote_kind_validates() {
    let reverse = run_json(&["asymptote", "--kind", "reverse", "--a", "1/10,1/20", "--order", "4"]);
    assert_eq!(reverse["result"]["exact"][1], "1");
    assert_eq!(reverse["result"]["exact"][2], "-1/20");
    let center = run_json(&["asymptote", "--kind", "center", "--a", "0.1,0.05,-0.2", "--order", "2"]);
    assert_eq!(center["result"]["exact_units"], "2pi");
    let endpoint = run_json(&["asymptote", "--kind", "endpoint", "--lambda", "0.5", "--mu", "0.1", "--annulus", "O1"]);
    assert_eq!(endpoint["result"]["model"], "LogLoop");
    let cusp = run_json(&["asymptote", "--kind", "endpoint", "--lambda", "0.4", "--mu", "0.4", "--annulus", "O1"]);
    assert_eq!(cusp["result"]["model"], "CuspPower");
    let infinity = with(&["asymptote", "--kind", "infinity"], &O1_REAL);
    assert_eq!(run_json_owned(&infinity)["result"]["expected"], -0.3);
    let limits = with(&["asymptote", "--kind", "limits"], &O1_REAL);
    assert_eq!(run_json_owned(&limits)["result"]["within_bounds"], true);
}

#[test]
fn delta_regular_and_critical_modes() {
    let regular = run_json_owned(&with(&["delta"], &O1_REAL).into_iter().chain(["--h".into(), "0.1".into()]).collect::<Vec<_>>());
    assert_eq!(regular["result"]["mode"], "regular");
    let critical = run_json_owned(&with(&["delta", "--critical"], &O1_REAL));
    assert_eq!(critical["result"]["mode"], "critical");
    // h₀ = 0 is a critical value, so an explicit level there routes the same way.
    let at_h0 = run_json_owned(&with(&["delta", "--h", "0"], &O1_REAL));
    assert_eq!(at_h0["result"]["mode"], "critical");
}

#[test]
fn winding_closes_the_contour() {
    let doc = run_json_owned(&with(&["winding"], &O1_REAL));
    assert!(doc["result"]["i0_total"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn cyclicity_and_nocheb_succeed() {
    let doc = run_json(&["cyclicity"]);
    assert_eq!(doc["result"]["zeros"]["count"], 2);
    let doc = run_json(&["nocheb", "--a", "0,0,0,-0.1"]);
    assert_eq!(doc["result"]["zeros"]["count"], 2);
}

#[test]
fn scans_validate_for_real_and_disk_regions() {
    let doc = run_json(&["scan", "--region", "omega_mu", "--samples", "3", "--grid", "200"]);
    assert_eq!(doc["result"]["theorem_violations"], 0);
    let doc = run_json(&["scan", "--region", "disk:-1,0.5,0.2", "--samples", "2", "--grid", "200"]);
    assert_eq!(doc["result"]["region"]["region"], "ComplexDisk");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["scan", "--region", "omega_e", "--samples", "4", "--grid", "200"],
        vec!["maxzeros", "--lambda", "0.6", "--mu", "0.2585", "--annulus", "OMu"],
        vec!["scan", "--region", "above_gamma", "--samples", "3", "--grid", "200", "--format", "csv"],
    ] {
        let a = abelint(&args);
        let b = abelint(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["scan", "--region", "omega_mu", "--samples", "4", "--grid", "200"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_abelint"))
            .args(args)
            .env("ABELINT_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("none").status.code(), Some(1));
}

#[test]
fn csv_headers_match_the_documented_columns() {
    let cases: [(&[&str], &str); 4] = [
        (&["scan", "--region", "omega_mu", "--samples", "1", "--grid", "100"], "re_lambda,im_lambda,mu,annulus,max_zeros,status"),
        (&["zeros", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--a0=-0.7", "--a1", "1"], "h,multiplicity,suspected"),
        (&["integrate", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--h", "hc+"], "h_re,h_im,k,val_re,val_im,err,method"),
        (&["winding", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1"], "piece,i0,f"),
    ];
    for (args, header) in cases {
        let mut args = args.to_vec();
        args.extend(["--format", "csv"]);
        let out = abelint(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().next(), Some(header), "{args:?}");
    }
}

#[test]
fn output_flag_writes_the_document_to_a_file() {
    let dir = std::env::temp_dir().join(format!("abelint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("classify.json");
    let out = abelint(&["classify", "--lambda", "0.5", "--mu", "0.25", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, abelint(&["classify", "--lambda", "0.5", "--mu", "0.25"]).stdout);
    let leftovers: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 1, "{leftovers:?}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_errors_exit_with_one() {
    let cases: [&[&str]; 6] = [
        &["classify", "--lambda-re", "-1", "--lambda-im", "0.5", "--mu", "0.3"],
        &["classify", "--lambda", "0.5"],
        &["frobnicate"],
        &["integrate", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--h", "1", "--tol", "0.5"],
        &["integrate", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--h", "1"],
        &["asymptote", "--kind", "infinity", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--format", "csv"],
    ];
    for args in cases {
        let out = abelint(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let (code, err) = exit_code(&["classify", "--lambda-re", "-1", "--lambda-im", "0.5", "--mu", "0.3"]);
    assert_eq!((code, err["error"]["kind"].as_str()), (1, Some("input")));
}

#[test]
fn unconverged_quadrature_exits_with_two() {
    let (code, err) = exit_code(&[
        "integrate", "--lambda", "0.5", "--mu", "0.25", "--annulus", "O1", "--h", "hs-", "--max-nodes", "16",
    ]);
    assert_eq!((code, err["error"]["kind"].as_str()), (2, Some("numerical")));
}

#[test]
fn indecisive_endpoint_fit_is_a_numerical_failure() {
    let mut args = vec!["asymptote", "--kind", "endpoint"];
    args.extend(O1_REAL);
    let (code, err) = exit_code(&args);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn help_exits_cleanly() {
    let out = abelint(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("scan"));
}
