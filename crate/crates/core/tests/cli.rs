use std::fs;
use std::process::{Command, Output};

fn kloos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kloos")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn corrected_theorem_small_range_exits_zero() {
    let out = kloos(&["verify", "--family", "corrected", "-m", "3..6", "--format", "report"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["theorem_id"], "corrected-theorem");
        assert_eq!(r["pass"], true);
        assert_eq!(r["violations"].as_array().unwrap().len(), 0);
    }
}

#[test]
fn single_kloosterman_value() {
    let out = kloos(&["ksum", "-m", "3", "-a", "0x7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "m=3 poly=0xB a=0x7 K=3 K mod 12 = 3\n");
}

#[test]
fn field_info_m4() {
    let out = kloos(&["field-info", "-m", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("q=16"));
    assert!(text.contains("poly=0x13"));
    assert!(text.contains("Tr(1)=0"));
    assert!(text.contains("self_check=ok"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["ksum", "-m", "3", "-a", "0xZZ"],
        vec!["ksum", "-m", "40", "-a", "0x1"],
        vec!["ksum", "-m", "3", "-a", "0x8"],
        vec!["ksum-table", "-m", "17", "--method", "naive"],
        vec!["goethals-count", "-m", "11"],
        vec!["verify", "--family", "corrected", "-m", "9"],
        vec!["field-info", "-m", "8", "--poly", "0x11F"],
        vec!["field-info", "-m", "8", "--poly", "0x1B"],
        vec!["verify", "--family", "nope", "-m", "3"],
        vec!["ksum-table", "-m", "3..4", "--format", "csv"],
        vec!["bogus"],
    ] {
        let out = kloos(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_path_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("k.csv");
    let out = kloos(&["ksum-table", "-m", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forced_residue_mismatch_exits_one() {
    let out = kloos(&["verify", "--family", "a", "-m", "3", "--expect-residue", "5", "--format", "report"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let violations = reports[0]["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 6);
    assert!(violations.iter().all(|v| v["kind"] == "residue-mismatch"));
}

#[test]
fn table_exports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.csv");
    let k2 = dir.path().join("k2.csv");
    let mu = dir.path().join("mu.csv");
    for (path, args) in [
        (&k, vec!["ksum-table", "-m", "2", "--format", "csv"]),
        (&k2, vec!["ksum-table", "-m", "2", "--format", "csv"]),
        (&mu, vec!["goethals-count", "-m", "3", "--format", "csv"]),
    ] {
        let mut args = args.clone();
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(kloos(&args).status.code(), Some(0));
    }
    let k_text = fs::read_to_string(&k).unwrap();
    assert_eq!(k_text, fs::read_to_string(&k2).unwrap());
    assert_eq!(k_text, "a_hex,K,K_mod12\n0x0,-1,11\n0x1,3,3\n0x2,-1,11\n0x3,-1,11\n");

    let mu_text = fs::read_to_string(&mu).unwrap();
    let lines: Vec<_> = mu_text.lines().collect();
    assert_eq!(lines[0], "b_hex,c_hex,mu2_bruteforce,mu2_closed,degenerate_flag,match");
    assert_eq!(lines.len(), 65);
    let again = kloos(&["goethals-count", "-m", "3", "--format", "csv"]);
    assert_eq!(stdout(&again), mu_text);
}

#[test]
fn spectral_and_naive_exports_agree() {
    let naive = kloos(&["ksum-table", "-m", "6", "--method", "naive", "--format", "csv"]);
    let fast = kloos(&["ksum-table", "-m", "6", "--method", "spectral", "--format", "csv"]);
    assert_eq!(naive.status.code(), Some(0));
    assert_eq!(naive.stdout, fast.stdout);
}

#[test]
fn reported_polynomial_round_trips() {
    let info = stdout(&kloos(&["field-info", "-m", "8", "--poly", "0x11D"]));
    let poly = info
        .split_whitespace()
        .find_map(|w| w.strip_prefix("poly="))
        .unwrap()
        .to_string();
    assert_eq!(poly, "0x11D");
    let first = kloos(&["ksum-table", "-m", "8", "--poly", "0x11D", "--format", "csv"]);
    let second = kloos(&["ksum-table", "-m", "8", "--poly", &poly, "--format", "csv"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn conjecture_counterexample_exits_one() {
    let out = kloos(&["conjecture-scan", "-m", "4", "--n-max", "3", "--format", "report"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let inputs: Vec<_> = reports[0]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["inputs"].as_str().unwrap().to_string())
        .collect();
    assert!(inputs.iter().any(|s| s.starts_with("b=0x8 n=3")), "{inputs:?}");

    let pow2 = kloos(&["conjecture-scan", "-m", "4", "--n-max", "8", "--exponent", "pow2"]);
    assert_eq!(pow2.status.code(), Some(0));
}

#[test]
fn help_exits_zero() {
    assert_eq!(kloos(&["--help"]).status.code(), Some(0));
}
