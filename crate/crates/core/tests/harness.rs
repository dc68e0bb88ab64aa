use std::fs;
use std::process::Command;

use rieszlab::domains::{divergence_profile, MushroomSpec};
use rieszlab::harness::{run, Config, Subcommand, Verdict};
use rieszlab::orlicz::OrliczFunction;
use rieszlab::PhiKernel;

fn cli(sub: &str, config: &str) -> (Option<i32>, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_rieszlab"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (status.status.code(), dir)
}

#[test]
fn exit_codes() {
    let ok = r#"{"grid": {"resolutions": [16]}, "fields": {"families": ["indicator"], "count": 1}, "expect": {"verdict": "bounded"}}"#;
    let (code, dir) = cli("maximal", ok);
    assert_eq!(code, Some(0));
    let report = fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"bounded\""));
    assert!(dir.path().join("out/series.csv").exists());

    let mismatch = ok.replace("\"bounded\"", "\"unbounded-trend\"");
    assert_eq!(cli("maximal", &mismatch).0, Some(1));
    assert_eq!(cli("maximal", r#"{"grid": {"resolutionz": [16]}}"#).0, Some(2));
    assert_eq!(cli("nonsense", "{}").0, Some(2));
    assert_eq!(cli("sharpness", r#"{"grid": {"resolutions": [16]}, "sweep": {"ladder": [1, 8]}}"#).0, Some(2));
}

#[test]
fn zero_fields_are_vacuous() {
    let cfg = Config::from_json(r#"{"grid": {"resolutions": [16, 32]}, "fields": {"families": ["zero"], "count": 1}}"#).unwrap();
    for sub in [Subcommand::Pointwise, Subcommand::Bound, Subcommand::Potential, Subcommand::Maximal] {
        let r = run(sub, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous, "{sub}");
    }
    let r = run(Subcommand::Embedding, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Vacuous);
}

#[test]
fn linear_field_representation_is_stable() {
    let cfg = Config::from_json(
        r#"{"grid": {"resolutions": [32, 64]}, "fields": {"families": ["linear"], "count": 1}}"#,
    )
    .unwrap();
    let r = run(Subcommand::Representation, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Bounded);
    assert!(r.constants["sup"].is_finite() && r.constants["sup"] > 0.0);
}

fn scaled_pointwise(epsilon: f64) -> Verdict {
    let cfg = Config::from_json(&format!(
        r#"{{"kernel": {{"preset": "log-john(1.2,1)"}}, "params": {{"n": 2, "p": 1, "epsilon": {epsilon}}},
            "grid": {{"resolutions": [128]}}, "fields": {{"families": ["gaussian"], "count": 1}},
            "sweep": {{"ladder": [1, 2, 4, 8]}}}}"#
    ))
    .unwrap();
    run(Subcommand::Pointwise, &cfg).unwrap().verdict
}

#[test]
fn inflated_exponent_grows_with_scale() {
    assert_eq!(scaled_pointwise(0.5), Verdict::UnboundedTrend);
    assert_eq!(scaled_pointwise(0.0), Verdict::Bounded);
}

#[test]
fn profile_matches_direct_substitution() {
    let spec = MushroomSpec::geometric(2, PhiKernel::power(1.2).unwrap(), 1.0, 0.5, 30, 1).unwrap();
    let prof = divergence_profile(&spec, 1.0, &OrliczFunction::power(2.0), 30).unwrap();
    for (i, &e) in prof.lower_bound.iter().enumerate() {
        let k = (i + 1) as i32;
        let exact = 2f64.powf(0.4 * k as f64 - 1.0);
        assert!((e / exact - 1.0).abs() < 1e-12, "k = {k}: {e} vs {exact}");
    }
}

#[test]
fn conditions_table_marks_frontier() {
    let cfg = Config::from_json(r#"{"sweep": {"n": [2], "alpha": [1.0, 1.2, 2.0], "beta": [0], "p": [1.5, 2.4, 2.6]}}"#).unwrap();
    let r = run(Subcommand::Conditions, &cfg).unwrap();
    let frontier: Vec<f64> = r.values("p_frontier");
    assert_eq!(frontier[0], 2.0);
    assert!((frontier[1] - 2.5).abs() < 1e-12);
    let diverges = r.values("h_series_diverges");
    assert_eq!(diverges, vec![0.0, 0.0, 1.0]);
    let adm = r.values("admissible_analytic");
    assert_eq!(adm, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
}
