use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wulfflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wulfflab")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn audit_isotropic_passes() {
    let out = wulfflab(&["audit"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!((v["min_eigenvalue"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn audit_strict_fails_on_a_nonconvex_family() {
    let lax = wulfflab(&["audit", "--anisotropy", "axisymmetric:1,-0.9"]);
    assert_eq!(lax.status.code(), Some(0));
    assert_eq!(json_of(&lax)["pass"], Value::Bool(false));
    let strict = wulfflab(&["audit", "--anisotropy", "axisymmetric:1,-0.9", "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn classify_cylinder_is_product() {
    let out = wulfflab(&["classify", "--entry", "cylinder:k=1,t=0.5", "--complete"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["case"], "product_k");
    assert_eq!(v["k"], 1);
    assert!(stderr(&out).starts_with("case=product_k"));
    let local = json_of(&wulfflab(&["classify", "--entry", "cylinder:k=1,t=0.5"]));
    assert_eq!(local["case"], "local_only");
}

#[test]
fn focal_reports_cartan_residual() {
    let out = wulfflab(&["focal", "--entry", "cylinder:k=1,t=0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert!(v["cartan_residual"].as_f64().unwrap().abs() < 1e-10);
    assert!((v["t"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let torus = wulfflab(&["focal", "--entry", "torus"]);
    assert_eq!(torus.status.code(), Some(2));
    assert!(stderr(&torus).contains("--pointwise"));
    let pointwise = wulfflab(&["focal", "--entry", "torus", "--pointwise"]);
    assert_eq!(pointwise.status.code(), Some(0));
}

#[test]
fn strict_negative_verdict_exits_one() {
    assert_eq!(wulfflab(&["classify", "--entry", "helicoid"]).status.code(), Some(0));
    assert_eq!(wulfflab(&["classify", "--entry", "helicoid", "--strict"]).status.code(), Some(1));
}

#[test]
fn input_errors_exit_two_with_the_flag() {
    let cases: [(&[&str], &str); 7] = [
        (&["classify"], "--entry"),
        (&["classify", "--entry", "cone"], "--entry"),
        (&["classify", "--entry", "plane", "--tol", "-1"], "--tol"),
        (&["classify", "--entry", "plane", "--format", "obj"], "--format"),
        (&["audit", "--anisotropy", "missing.json"], "--anisotropy"),
        (&["classify", "--bogus"], "--bogus"),
        (&["fit", "--degree", "3"], "--degree"),
    ];
    for (args, flag) in cases {
        let out = wulfflab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr(&out);
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn numerical_failure_exits_three() {
    let out = wulfflab(&["curvature", "--entry", "sphere:r=1e-300", "--grid", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("not an immersion"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (i, args) in [
        vec!["curvature", "--anisotropy", "quadratic", "--entry", "wulff", "--grid", "6"],
        vec!["translate", "--entry", "cylinder:k=1,t=2", "--grid", "4"],
        vec!["classify", "--anisotropy", "axisymmetric", "--entry", "helicoid"],
        vec!["wulff", "--format", "obj", "--grid", "8"],
        vec!["fit", "--entry", "helicoid", "--grid", "5", "--restarts", "2", "--max-iterations", "30", "--seed", "7"],
    ]
    .into_iter()
    .enumerate()
    {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("out{i}_{run}"));
            let mut a = args.clone();
            a.extend(["--out", path.to_str().unwrap()]);
            let out = wulfflab(&a);
            assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn thread_cap_keeps_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_wulfflab"))
            .args(["curvature", "--entry", "wulff", "--anisotropy", "axisymmetric", "--grid", "5"])
            .env("WULFFLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"entry": "cylinder:k=1,t=2", "complete": true, "grid": 5}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let v = json_of(&wulfflab(&["classify", "--config", c]));
    assert_eq!(v["case"], "product_k");
    assert!((v["groups"][0]["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let over = json_of(&wulfflab(&["classify", "--config", c, "--entry", "wulff"]));
    assert_eq!(over["case"], "wulff_shape");

    std::fs::write(&cfg, r#"{"entry": "plane", "colour": "red"}"#).unwrap();
    let bad = wulfflab(&["classify", "--config", c]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("colour"));
    let missing = wulfflab(&["classify", "--config", "/nonexistent/run.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn fit_emits_a_loadable_anisotropy() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fitted.json");
    let out = wulfflab(&[
        "fit",
        "--entry",
        "helicoid",
        "--grid",
        "5",
        "--restarts",
        "1",
        "--max-iterations",
        "40",
        "--emit-anisotropy",
        f.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json_of(&out);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 5);
    assert!(Path::new(&f).exists());
    let audit = wulfflab(&["audit", "--anisotropy", f.to_str().unwrap(), "--strict"]);
    assert_eq!(audit.status.code(), Some(0), "{}", stderr(&audit));
}

#[test]
fn catalog_lists_entries() {
    let v = json_of(&wulfflab(&["catalog", "--dim", "4"]));
    let names: Vec<&str> = v["anisotropies"].as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["isotropic", "quadratic-norm", "axisymmetric-series", "band-extension"]);
    let csv = wulfflab(&["catalog", "--format", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).contains("isotropic,\"cylinder:k=1,t=0.5\",2 0,true"));
}

#[test]
fn wulff_exports() {
    let csv = String::from_utf8(wulfflab(&["wulff", "--grid", "4"]).stdout).unwrap();
    assert!(csv.lines().count() > 10);
    let obj = String::from_utf8(wulfflab(&["wulff", "--format", "obj", "--grid", "4"]).stdout).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    let high = wulfflab(&["wulff", "--dim", "4", "--format", "obj", "--grid", "4"]);
    assert_eq!(high.status.code(), Some(2));
    let sub = wulfflab(&["wulff", "--dim", "4", "--k", "2", "--grid", "4"]);
    assert_eq!(sub.status.code(), Some(0), "{}", stderr(&sub));
}

#[test]
fn help_names_the_quantities() {
    let expect = [
        ("audit", "A_F"),
        ("wulff", "W_F"),
        ("curvature", "S_F"),
        ("translate", "x_t"),
        ("focal", "Cartan"),
        ("classify", "Wulff shape"),
        ("fit", "isoparametric"),
        ("catalog", "expected spectra"),
    ];
    for (cmd, word) in expect {
        let out = wulfflab(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains(word), "{cmd}");
    }
}
