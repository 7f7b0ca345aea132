use diracspec::report::{ClassifyReport, CompareReport, Report, TimoshenkoReport, ValidationReport};
use diracspec::spectra::SpectrumReport;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diracspec")).args(args).env_remove("DIRACSPEC_WINDOW").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", &data("separated.json")]);
    assert_eq!(ok.status.code(), Some(0));
    let sign = run(&["validate", &data("sign_change.json"), "--format", "json"]);
    assert_eq!(sign.status.code(), Some(1));
    let r = ValidationReport::parse_json(&stdout(&sign)).unwrap();
    assert!(r.error.unwrap().contains("changes sign"));
    assert_eq!(run(&["validate", &data("rank_deficient.json")]).status.code(), Some(1));
    assert_eq!(run(&["validate", &data("beam_equal.json")]).status.code(), Some(0));
    assert_eq!(run(&["validate", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn classify_verdicts() {
    let o = run(&["classify", &data("periodic.json"), "--format", "json"]);
    let r = ClassifyReport::parse_json(&stdout(&o)).unwrap();
    assert_eq!((r.verdict.status.to_string().as_str(), r.verdict.clause.as_str()), ("regular-not-strict", "periodic"));
    let o = run(&["classify", &data("quasi_periodic.json")]);
    assert!(stdout(&o).lines().nth(1).unwrap().contains(",strictly-regular,ln-clause,"));
}

#[test]
fn spectrum_is_deterministic() {
    let args = ["spectrum", &data("separated_q.json"), "--window", "-10,10"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "re,im,multiplicity,residual,tolerance");
    assert_eq!(text.lines().count(), 8);
    let j = run(&["spectrum", &data("separated_q.json"), "--window", "-10,10", "--format", "json"]);
    let r = SpectrumReport::parse_json(&stdout(&j)).unwrap();
    assert_eq!(r.eigenvalues.len(), 7);
    assert_eq!(r.json(), stdout(&j));
}

#[test]
fn window_from_environment_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_diracspec"))
        .args(["spectrum", &data("separated.json"), "--out", out.to_str().unwrap()])
        .env("DIRACSPEC_WINDOW", "0,7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    // zeros πm − (i ln 2)/2 with 0 ≤ πm ≤ 7
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1 + 3);
    assert_eq!(run(&["spectrum", &data("separated.json"), "--window", "3,1"]).status.code(), Some(1));
}

#[test]
fn compare_and_count_mismatch() {
    let o = run(&["compare", &data("separated_q.json"), &data("separated.json"), "--window", "0,40", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = CompareReport::parse_json(&stdout(&o)).unwrap();
    assert!(r.pairing.count_mismatch.is_none());
    assert!(r.pairing.max_deviation < 0.2);
    // double zeros at 2πm against simple zeros at πm: 6 against 7 in the window
    let o = run(&["compare", &data("periodic.json"), &data("separated.json"), "--window", "0.5,23"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("re,im,re_ref,im_ref,deviation,band,tolerance"));
}

#[test]
fn timoshenko_report() {
    let o = run(&["timoshenko", &data("beam_separated.json"), "--window", "0,20", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = TimoshenkoReport::parse_json(&stdout(&o)).unwrap();
    assert_eq!(r.branches.len(), 2);
    assert_eq!(r.verdict.status.to_string(), "strictly-regular");
    assert_eq!(r.computed.len(), r.reference.len());
    let csv = run(&["timoshenko", &data("beam_equal.json"), "--window", "0,10"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(stdout(&csv).lines().skip(1).all(|l| l.contains(",root-")));
}
