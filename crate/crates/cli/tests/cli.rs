use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use signrev_cli::{run, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

fn signrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signrev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("signrev").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).expect("valid json")
}

#[test]
fn verify_symbolic_report() {
    let (code, out, _) = in_process(&["verify", "--n", "2,2", "--symbolic-ab", "--mode", "symbolic"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["equal"], true);
    assert_eq!(v["difference"], "0");
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["equal", "mode", "difference"]);
}

#[test]
fn verify_random_and_enumerate_modes() {
    let (code, out, _) = in_process(&["verify", "--n", "1,2", "--symbolic-ab", "--mode", "random", "--trials", "50"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["trials"], 50);
    let (code, out, _) = in_process(&["verify", "--n", "2,1", "--alpha", "1", "--beta", "3", "--mode", "enumerate"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["mode"], "enumerate");
    let (code, _, err) = in_process(&["verify", "--n", "1", "--symbolic-ab", "--mode", "enumerate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error:"));
}

#[test]
fn verify_with_concrete_points() {
    let (code, out, _) = in_process(&[
        "verify", "--n", "2,1", "--alpha", "3", "--beta", "-2", "--x", "1/2,-3", "--y", "5,2/7", "--format", "jsonl",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out, "{\"equal\":true,\"mode\":\"symbolic\",\"difference\":\"0\"}\n");
    let (code, _, _) = in_process(&["verify", "--n", "2,1", "--symbolic-ab", "--x", "1"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = in_process(&["verify", "--n", "2,1", "--symbolic-ab", "--x", "1", "--y", "2"]);
    assert_eq!(code, EXIT_USAGE, "x of wrong length");
}

#[test]
fn corrupted_rhs_exits_with_one() {
    let (code, out, _) = in_process(&["verify", "--n", "1,1", "--symbolic-ab", "--drop-rhs-term", "0"]);
    assert_eq!(code, EXIT_CHECK_FAILED);
    assert_eq!(json(&out)["equal"], false);
    let (code, out, _) =
        in_process(&["verify", "--n", "1,1", "--symbolic-ab", "--drop-rhs-term", "3", "--mode", "random"]);
    assert_eq!(code, EXIT_CHECK_FAILED);
    assert!(json(&out)["witness"].is_object());
    let (code, _, _) = in_process(&["verify", "--n", "1,1", "--symbolic-ab", "--drop-rhs-term", "4"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn count_and_enumerate_small_space() {
    let (code, out, _) = in_process(&["count", "--n", "1", "--alpha", "1", "--beta", "1"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "5\n"));
    let (_, out, _) = in_process(&["count", "--n", "2,2", "--alpha", "2", "--beta", "4", "--k", "2,1", "--format", "json"]);
    assert_eq!(json(&out)["count"], "5040");

    let (code, out, _) = in_process(&["enumerate", "--n", "1", "--alpha", "1", "--beta", "1"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[0],
        r#"{"m":1,"n":[1],"alpha":1,"beta":1,"letters":["b1","a"],"marks":["y1","1"],"circled":[1]}"#
    );
    let (_, out, _) = in_process(&["enumerate", "--n", "2,2", "--alpha", "2", "--beta", "4", "--k", "2,1"]);
    assert_eq!(out.lines().count(), 5040);
}

#[test]
fn parameter_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["enumerate", "--n", "1", "--alpha", "2", "--beta", "1", "--format", "jsonl"],
        &["count", "--n", "1", "--alpha", "2", "--beta", "1"],
        &["audit", "--n", "1", "--alpha", "2", "--beta", "1"],
        &["fixed-points", "--n", "1", "--alpha", "2", "--beta", "1"],
        &["audit", "--n", "2,2", "--alpha", "2", "--beta", "4", "--max-configs", "100"],
        &["audit", "--n", "1", "--alpha", "0", "--beta", "1"],
        &["count", "--n", "1,-1", "--alpha", "1", "--beta", "1"],
        &["count", "--n", "1", "--alpha", "1", "--beta", "1", "--k", "2"],
        &["reduce", "--n", "1,1"],
        &["verify", "--n", "x"],
        &["frobnicate"],
    ];
    for args in cases {
        let (code, out, err) = in_process(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(out.is_empty(), "{args:?}");
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    }
    let (code, _, _) = in_process(&["audit", "--n", "1", "--alpha", "0", "--beta", "1", "--allow-zero-alpha"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn audit_and_fixed_points() {
    let (code, out, _) = in_process(&["audit", "--n", "2,1", "--alpha", "1", "--beta", "2"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert!(v["checks"].as_object().unwrap().values().all(|b| b == true));
    assert_eq!(v["counterexample"], Value::Null);
    let t = &v["totals"];
    assert_eq!(
        t["pairs"].as_u64().unwrap() * 2 + t["fixed_points"].as_u64().unwrap(),
        t["configurations"].as_u64().unwrap()
    );
    let (code, out, _) = in_process(&["fixed-points", "--n", "2,1", "--alpha", "1", "--beta", "2"]);
    assert_eq!(code, EXIT_OK);
    let f = json(&out);
    assert_eq!(f["equal"], true);
    assert_eq!(f["fixed_points"], t["fixed_points"]);
    assert_eq!(f["fixed_sum"], v["sums"]["rhs"]);
}

#[test]
fn reduce_reports_both_steps() {
    let (code, out, _) = in_process(&["reduce", "--n", "3"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["eq3_to_eq2"]["equal"], true);
    assert_eq!(v["eq2_to_eq1"]["equal"], true);
}

#[test]
fn enumerate_ingests_and_rejects_configurations() {
    let good = r#"{"m":2,"n":[2,2],"alpha":2,"beta":4,"letters":["a","b2","a","b1","b2","a","b1","a"],"marks":["1","x2","1","y1","y2","1","x1","1"],"circled":[5]}"#;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "{good}").unwrap();
    let path = f.path().to_str().unwrap().to_string();
    let (code, out, _) = in_process(&["enumerate", "--input", &path]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), good);

    let bad = good.replace("[5]", "[7]");
    let mut g = tempfile::NamedTempFile::new().unwrap();
    writeln!(g, "{good}\n{bad}").unwrap();
    let (code, _, err) = in_process(&["enumerate", "--input", g.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2") && err.contains("circled outside first segment"), "{err}");
}

#[test]
fn output_is_deterministic_across_runs_and_threading() {
    let args = ["audit", "--n", "2,2", "--alpha", "2", "--beta", "4"];
    let a = signrev(&args);
    let b = signrev(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let c = signrev(&seq_args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let r = ["verify", "--n", "2,1", "--symbolic-ab", "--mode", "random", "--seed", "9", "--drop-rhs-term", "1"];
    let (x, y) = (signrev(&r), signrev(&r));
    assert_eq!(x.status.code(), Some(1));
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn help_exits_zero() {
    let o = signrev(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("audit"));
}
