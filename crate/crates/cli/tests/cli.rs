use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;

fn gift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gift"))
        .args(args)
        .output()
        .expect("gift runs")
}

fn scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn diode_solve_reports_v() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/diode-solve.toml");
    let out = gift(&["run", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let s = summary(tmp.path());
    let y = s["commands"][0]["details"]["y"][0].as_f64().unwrap();
    assert!((y - std::f64::consts::LN_2).abs() < 1e-6);
    for f in ["v-at-2.json", "sweep.csv", "sweep.json", "jacobians.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn annulus_monodromy_reports_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/annulus-monodromy.toml");
    let out = gift(&["run", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let gap = summary(tmp.path())["commands"][0]["details"]["gap"].as_f64().unwrap();
    assert!((gap - 0.25).abs() < 1e-3, "{gap}");
}

#[test]
fn bundled_scenarios_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let all = scenarios();
    assert!(all.len() >= 10);
    for cfg in all {
        let dir = tmp.path().join(cfg.file_stem().unwrap());
        let out = gift(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}: {}",
            cfg.display(),
            String::from_utf8_lossy(&out.stdout)
        );
        assert_eq!(summary(&dir)["passed"], true);
    }
}

#[test]
fn unmet_expectation_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
        name = "wrong"
        [problem]
        example = "annulus"
        [[commands]]
        kind = "monodromy"
        expect = "closed"
        "#,
    );
    let out = gift(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let s = summary(&tmp.path().join("o"));
    assert_eq!(s["passed"], false);
    assert_eq!(s["commands"][0]["observed"], "open");
}

#[test]
fn numerical_errors_become_report_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
        name = "escape"
        [problem]
        example = "diode"
        [[commands]]
        id = "too-far"
        kind = "evaluate"
        x = [-4.0]
        [[commands]]
        id = "fine"
        kind = "evaluate"
        x = [1.0]
        "#,
    );
    let out = gift(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let s = summary(&tmp.path().join("o"));
    assert!(s["commands"][0]["error"].as_str().unwrap().starts_with("Numerical"));
    assert_eq!(s["commands"][1]["passed"], true);
}

#[test]
fn malformed_configs_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, kind) in [
        ("name = \"x\"\n", "ConfigParse"),
        (
            "name = \"x\"\n[problem]\nexample = \"diode\"\n[[commands]]\nkind = \"evaluate\"\n",
            "ConfigParse",
        ),
        ("name = \"x\"\n[problem]\nexample = \"hyperbola\"\n", "UnknownExample"),
        (
            "name = \"x\"\n[problem]\nexample = \"diode\"\nparams = { zeta = 1.0 }\n",
            "ConfigParse",
        ),
    ] {
        let cfg = write_config(tmp.path(), text);
        let out = gift(&[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(kind), "{text}");
    }
    let out = gift(&["run", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_shows_catalog() {
    let out = gift(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("diode") && text.contains("annulus"));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&gift(&["list", "--json"]).stdout).unwrap();
    assert!(rows.len() >= 7);
}

#[test]
fn trace_and_certify_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("t");
    let out = gift(&[
        "trace",
        "--example",
        "cubic",
        "--path",
        "segment:0;4",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,x_1,y_1,residual,step,cert_lhs,cert_rhs"));

    let dir = tmp.path().join("c");
    let args = [
        "certify",
        "--example",
        "line",
        "--param",
        "y_min=-1",
        "--param",
        "y_max=1",
        "--path",
        "segment:-0.995;0.995",
        "--out",
        dir.to_str().unwrap(),
    ];
    assert_eq!(gift(&args).status.code(), Some(0));
    let mut mixed = args.to_vec();
    mixed.extend(["--charts", "identity/recommended"]);
    assert_eq!(gift(&mixed).status.code(), Some(1));

    let out = gift(&[
        "trace",
        "--example",
        "nope",
        "--path",
        "segment:0;1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = gift(&[
        "trace",
        "--example",
        "cubic",
        "--path",
        "zigzag:1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Exit status is 0 exactly when every command's expectation holds.
    #[test]
    fn exit_code_matches_summary(x in -1.8f64..15.0, claim_open in any::<bool>(), idx in 0usize..11) {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write_config(tmp.path(), &format!(
            "name = \"p\"\n[problem]\nexample = \"diode\"\n[[commands]]\nkind = \"evaluate\"\nx = [{x}]\nexpect_y = [{}]\n",
            (1.0 + x / 2.0).ln() + if claim_open { 0.1 } else { 0.0 }
        ));
        let out = gift(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
        let passed = summary(&tmp.path().join("o"))["passed"].as_bool().unwrap();
        prop_assert_eq!(passed, !claim_open);
        prop_assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));

        let all = scenarios();
        let cfg = &all[idx % all.len()];
        let dir = tmp.path().join("s");
        let out = gift(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        let passed = summary(&dir)["passed"].as_bool().unwrap();
        prop_assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));
    }
}
