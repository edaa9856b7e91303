use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ordquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordquant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_model(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const FIGURE_MODEL: &str = r#"{"N":2,"k":2,"g":0.1,"hbar":1,"omega":[1,1],"q0":[1,1],"p0":[1,1]}"#;

#[test]
fn order_outputs() {
    let cases = [
        (["--expr", "q^2*p", "--target", "qp"], "Q^2*P - i*hbar*Q\n"),
        (["--expr", "P*Q", "--target", "qp"], "Q*P - i*hbar\n"),
        (["--expr", "a*ad", "--target", "normal"], "ad*a + 1\n"),
    ];
    for (args, want) in cases {
        let mut full = vec!["order"];
        full.extend(args);
        let o = ordquant(&full);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), want);
        assert!(stderr(&o).is_empty());
    }
}

#[test]
fn order_parse_error_is_positioned() {
    let o = ordquant(&["order", "--expr", "q^2*(p", "--target", "qp"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    let e = stderr(&o);
    assert!(e.contains("offset 6") && e.contains("expected"), "{e}");
    let o = ordquant(&["order", "--expr", "qp", "--target", "qp"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn expect_outputs() {
    let o = ordquant(&["expect", "--expr", "q^2", "--center", "1,0", "--hbar", "0.1", "--mode", "symmetric"]);
    assert_eq!(stdout(&o), "1.05\n");
    let o = ordquant(&["expect", "--expr", "Q*P", "--center", "1,1", "--hbar", "1", "--mode", "raw"]);
    assert_eq!(stdout(&o), "1 + 0.5i\n");
    let o = ordquant(&["expect", "--expr", "q*p", "--center", "1,1", "--hbar", "1", "--mode", "symmetric"]);
    assert_eq!(stdout(&o), "1\n");
    let o = ordquant(&["expect", "--expr", "q1*q2", "--center", "-1,2", "--hbar", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ordquant(&["expect", "--expr", "Q", "--center", "1,1", "--hbar", "1", "--mode", "symmetric"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn smooth_outputs() {
    assert_eq!(stdout(&ordquant(&["smooth", "--expr", "q^2", "--sigma", "1"])), "q^2 + 1/2\n");
    assert_eq!(stdout(&ordquant(&["smooth", "--expr", "q^2 + 1/2", "--sigma", "1", "--inverse"])), "q^2\n");
    assert_eq!(stdout(&ordquant(&["smooth", "--expr", "q^4", "--sigma", "2"])), "q^4 + 6*q^2 + 3\n");
    assert_eq!(ordquant(&["smooth", "--expr", "q^", "--sigma", "1"]).status.code(), Some(2));
    assert_eq!(ordquant(&["smooth", "--expr", "q", "--sigma", "-1"]).status.code(), Some(2));
}

#[test]
fn ehrenfest_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "fig.json", FIGURE_MODEL);
    let o = ordquant(&["ehrenfest", "--model", &m, "--method", "analytic"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["t_analytic"].as_f64(), Some(3.75));
    assert!(v["t_numeric"].is_null());

    let m = write_model(dir.path(), "h001.json", &FIGURE_MODEL.replace(r#""hbar":1"#, r#""hbar":0.01"#));
    let v: Value = serde_json::from_str(&stdout(&ordquant(&["ehrenfest", "--model", &m, "--method", "both"]))).unwrap();
    let (ta, tn) = (v["t_analytic"].as_f64().unwrap(), v["t_numeric"].as_f64().unwrap());
    assert!((ta - 49.875).abs() < 1e-9);
    assert!((tn / ta - 1.0).abs() <= 0.05);

    let m = write_model(dir.path(), "free.json", &FIGURE_MODEL.replace(r#""g":0.1"#, r#""g":0"#));
    let v: Value = serde_json::from_str(&stdout(&ordquant(&["ehrenfest", "--model", &m, "--method", "both"]))).unwrap();
    assert_eq!(v["t_analytic"], "inf");
    assert_eq!(v["t_numeric"], "inf");
}

#[test]
fn ehrenfest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "bad.json", &FIGURE_MODEL.replace(r#""q0":[1,1]"#, r#""q0":[1]"#));
    let o = ordquant(&["ehrenfest", "--model", &m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q0"), "{}", stderr(&o));
    let m = write_model(dir.path(), "missing.json", r#"{"N":1,"k":2,"g":0.1,"hbar":1,"omega":[1],"q0":[1]}"#);
    let o = ordquant(&["ehrenfest", "--model", &m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p0"), "{}", stderr(&o));
    let o = ordquant(&["ehrenfest", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(4));
    // δ ≈ ℏ(t/Ω)²/4 stays below 1 up to the 10⁴ Ω scan horizon
    let m = write_model(dir.path(), "slow.json", &FIGURE_MODEL.replace(r#""hbar":1"#, r#""hbar":1e-10"#));
    let o = ordquant(&["ehrenfest", "--model", &m, "--method", "numeric"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn figure1_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let o = ordquant(&["figure1", "--hbar-list", "1,0.1,0.01", "--t-max", "60", "--points", "301", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index: Value = serde_json::from_str(&fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    let printed: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(index, printed);
    let curves = index["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    let m = write_model(dir.path(), "m.json", FIGURE_MODEL);
    for c in curves {
        let file = out.join(c["file"].as_str().unwrap());
        let csv = fs::read_to_string(&file).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,delta"));
        assert_eq!(lines.next(), Some("0,0"));
        assert_eq!(csv.lines().count(), 302);
        assert!(!csv.contains('\r'));
        let hbar = c["hbar"].as_f64().unwrap();
        let body = fs::read_to_string(&m).unwrap().replace(r#""hbar":1"#, &format!(r#""hbar":{hbar}"#));
        let mh = write_model(dir.path(), "mh.json", &body);
        let v: Value = serde_json::from_str(&stdout(&ordquant(&["ehrenfest", "--model", &mh, "--method", "numeric"]))).unwrap();
        let tn = v["t_numeric"].as_f64().unwrap();
        let crossing = c["crossing"].as_f64().unwrap();
        assert!((crossing - tn).abs() <= 1e-6, "ℏ={hbar}: {crossing} vs {tn}");
    }
}

#[test]
fn figure1_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = ordquant(&["figure1", "--points", "2", "--t-max", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = ordquant(&["figure1", "--points", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = ordquant(&["figure1", "--points", "3", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn mc_verify_reports() {
    let o = ordquant(&["mc-verify", "--flow", "harmonic", "--expr", "q1^3*p1", "--sigma", "0.2", "--t", "0.9", "--samples", "1000000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);

    let o = ordquant(&["mc-verify", "--flow", "identity", "--expr", "3*q1 - p1 + 2", "--center", "1,1", "--sigma", "0.2", "--t", "1", "--samples", "10000"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["reference"].as_f64(), Some(4.0));
    assert_eq!(v["pass"], true);

    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "one.json", r#"{"N":1,"k":2,"g":0.1,"hbar":0.02,"omega":[1],"q0":[1],"p0":[1]}"#);
    let o = ordquant(&["mc-verify", "--model", &m, "--expr", "q1", "--sigma", "0.02", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = ordquant(&["mc-verify", "--flow", "identity", "--expr", "q1", "--sigma", "0.2", "--t", "1", "--samples", "99"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ordquant(&["mc-verify", "--model", &m, "--expr", "q1*p1", "--sigma", "0.02", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mc_verify_is_reproducible_and_reports_failure() {
    let args = ["mc-verify", "--flow", "harmonic", "--expr", "q1^2", "--sigma", "0.5", "--t", "0.3", "--samples", "20000", "--seed", "3"];
    let a = ordquant(&args);
    let b = ordquant(&args);
    assert_eq!(a.stdout, b.stdout);
    let threaded = Command::new(env!("CARGO_BIN_EXE_ordquant")).args(args).env("ORDQUANT_THREADS", "2").output().unwrap();
    assert_eq!(a.stdout, threaded.stdout);
    // a huge ensemble under the nonlinear flow departs from the truncated prediction
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "wide.json", r#"{"N":1,"k":3,"g":0.5,"hbar":1,"omega":[1],"q0":[1],"p0":[1]}"#);
    let o = ordquant(&["mc-verify", "--model", &m, "--expr", "q1", "--sigma", "1.5", "--t", "3", "--samples", "100000"]);
    assert_eq!(o.status.code(), Some(5), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn selfcheck_modes() {
    let o = ordquant(&["selfcheck"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 6);

    let o = ordquant(&["selfcheck", "--filter", "symmetrize"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "symmetrize");

    let o = ordquant(&["selfcheck", "--filter", "symmetrize", "--corrupt-commutator"]);
    assert_eq!(o.status.code(), Some(5));
    let e = stderr(&o);
    assert!(e.contains("expected:") && e.contains("hbar"), "{e}");

    assert_eq!(ordquant(&["selfcheck", "--filter", "nope"]).status.code(), Some(2));
}

#[test]
fn verbose_report_goes_to_stderr() {
    let o = ordquant(&["--verbose", "smooth", "--expr", "q^2", "--sigma", "1"]);
    assert_eq!(stdout(&o), "q^2 + 1/2\n");
    let report: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(report["command"], "smooth");
    assert!(report["elapsed_seconds"].is_number());
    assert_eq!(report["outputs"], "q^2 + 1/2");
}

#[test]
fn usage_errors() {
    assert_eq!(ordquant(&[]).status.code(), Some(2));
    assert_eq!(ordquant(&["order"]).status.code(), Some(2));
    assert_eq!(ordquant(&["order", "--expr", "q", "--target", "weird"]).status.code(), Some(2));
    assert_eq!(ordquant(&["--help"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_ordquant")).args(["selfcheck", "--filter", "coherent-symmetric"]).env("ORDQUANT_THREADS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
