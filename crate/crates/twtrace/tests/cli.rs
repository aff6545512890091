use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twtrace"))
        .args(args)
        .env_remove("TT_BITS")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classes_of_the_level_eleven_example() {
    let v = json(&["classes", "--level", "11", "--disc", "-40", "--beta", "2"]);
    let reps: Vec<Vec<i64>> = serde_json::from_value(v["reps"].clone()).unwrap();
    let forms: Vec<[i64; 3]> = reps.iter().map(|r| [r[0], r[1], r[2]]).collect();
    assert_eq!(
        forms,
        vec![[1001, 200, 10], [407, 90, 5], [-11, 2, -1], [-22, -20, -5]]
    );
    let v = json(&["classes", "--level", "1", "--disc", "-3", "--beta", "1"]);
    assert_eq!(v["reps"][0], serde_json::json!([1, 1, 1, 3]));
}

#[test]
fn invalid_parameters_exit_two() {
    assert_eq!(
        run(&["classes", "--level", "11", "--disc", "-41", "--beta", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["trace", "--level", "11", "--delta", "5", "--r", "1", "--h", "6", "--m", "2/11"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["trace", "--level", "11", "--delta", "5", "--r", "7", "--h", "6", "--m", "1/11"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["trace", "--level", "11", "--delta", "5", "--r", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn trace_table_and_normalizations() {
    let base = [
        "trace", "--level", "11", "--delta", "5", "--r", "7", "--h", "6", "--m", "8/44",
    ];
    let v = json(&base);
    assert_eq!(v["coefficients"][0]["value"], "380712960");
    let mut raw = base.to_vec();
    raw.extend(["--normalization", "raw"]);
    assert_eq!(json(&raw)["coefficients"][0]["value"], "380712960*sqrt(5)");

    let out = run(&[
        "trace", "--level", "11", "--delta", "5", "--r", "7", "--all", "--m-max", "40/44", "--csv",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    for line in [
        "6,2/11,380712960",
        "13,7/44,-105512960",
        "7,39/44,-10093084485445877760",
        "12,8/11,162066199437803520",
    ] {
        assert!(csv.lines().any(|l| l == line), "{line}");
    }
}

#[test]
fn untwisted_traces_at_level_one() {
    let out = run(&[
        "trace", "--f", "J(z)", "--level", "1", "--delta", "1", "--r", "1", "--all", "--m-max",
        "2", "--csv",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv,
        "h,m,value\n0,1,984\n0,2,14512\n1,3/4,-496\n1,7/4,-8238\n"
    );
}

#[test]
fn output_is_byte_stable_and_bits_come_from_the_environment() {
    let args = [
        "trace", "--level", "11", "--delta", "5", "--r", "7", "--all", "--m-max", "20/44",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let with_env = Command::new(env!("CARGO_BIN_EXE_twtrace"))
        .args(["eval", "--f", "J(z)", "--form", "1,1,1"])
        .env("TT_BITS", "200")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(v["bits"], 200);
}

#[test]
fn verify_suites_pass() {
    let v = json(&[
        "verify", "weilrep", "--level", "11", "--delta", "5", "--r", "7", "--bits", "128",
    ]);
    assert_eq!(v["pass"], true);
    let v = json(&[
        "verify", "hecke", "--delta", "5", "--m", "2", "--dmax", "20",
    ]);
    assert_eq!(v["pass"], true);
    let v = json(&[
        "verify",
        "jacobi-cross",
        "--level",
        "11",
        "--delta",
        "5",
        "--r",
        "7",
        "--qmax",
        "1",
    ]);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 16);
}

#[test]
fn minimal_polynomial_of_the_orbit() {
    let v = json(&[
        "eval", "--f", "J(11z)", "--level", "11", "--disc", "-40", "--beta", "2",
    ]);
    assert_eq!(v["minimal_polynomial"], "x^2 - 425691312x + 8786430582336");
    let re: f64 = v["points"][1]["re"].as_str().unwrap().parse().unwrap();
    assert!((re - 20641.38121).abs() < 1e-4);
}

#[test]
fn jacobi_commands() {
    let v = json(&["jacobi", "zagier", "--disc", "5", "--dmax", "8"]);
    let c = v["coefficients"].as_array().unwrap();
    assert!(c.iter().any(|e| e["d"] == 3 && e["c"] == "85995"));
    let v = json(&[
        "jacobi", "lift", "--level", "11", "--delta", "5", "--order", "2",
    ]);
    assert_eq!(v["kernel_dim"], 0);
    let terms = v["form"]["terms"].as_array().unwrap();
    assert!(terms
        .iter()
        .any(|t| t["n"] == 1 && t["r"] == -6 && t["c"] == "-190356480"));
    let v = json(&[
        "jacobi", "solve", "--index", "1", "--target", "-1=1", "--order", "2",
    ]);
    assert_eq!(v["form"]["weight"], 2);
    let v = json(&["jacobi", "generators", "--order", "2"]);
    assert_eq!(v["b"]["index"], 1);
    assert_eq!(
        run(&["jacobi", "solve", "--index", "1", "--target", "-2=1"])
            .status
            .code(),
        Some(2)
    );
}
