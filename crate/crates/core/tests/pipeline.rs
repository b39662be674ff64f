use calderon_core::pipeline::*;
use calderon_core::CoreError;

#[test]
fn defaults_are_filled() {
    let cfg = parse_config("{}").unwrap();
    assert_eq!((cfg.n, cfg.r, cfg.cutoff), (2, 1, 12));
    assert_eq!(cfg.tau, vec![1.0]);
    assert_eq!(cfg.sides, vec!["plus", "minus"]);
    assert_eq!(cfg.tolerance, 1e-9);
    assert!(cfg.checks.is_empty());
}

#[test]
fn invalid_configs_are_rejected() {
    for bad in [
        r#"{"n": 1}"#,
        r#"{"N": 3}"#,
        r#"{"frobnicate": 1}"#,
        r#"{"checks": ["nope"]}"#,
        r#"{"tau": [0]}"#,
        r#"{"sides": ["left"]}"#,
        r#"{"tolerance": -1}"#,
        r#"{"b": {"re": [[1, 0]]}}"#,
        r#"{"b": {"re": [["x", 0], [0, 1]]}}"#,
        r#"{"b": {"re": [[true, 0], [0, 1]]}}"#,
        "not json",
    ] {
        assert!(matches!(parse_config(bad), Err(CoreError::Config(_))), "{bad}");
    }
}

#[test]
fn b_accepts_fractions_and_numbers() {
    let cfg = parse_config(r#"{"n": 2, "b": {"re": [["1/3", 0], [0, 2]], "im": [[0, "-1/2"], ["-1/2", 0]]}}"#).unwrap();
    cfg.geometry().unwrap();
}

#[test]
fn per_check_tolerance_overrides_the_cap() {
    let cfg = parse_config(r#"{"tolerance": 1e-6, "tolerances": {"dirac_square": 1e-3}}"#).unwrap();
    assert_eq!(cfg.tolerance_for("dirac_square", 1e-10), 1e-3);
    assert_eq!(cfg.tolerance_for("ladder_oscillator", 1e-10), 1e-10);
    assert_eq!(cfg.tolerance_for("ladder_oscillator", 1e-4), 1e-6);
}

#[test]
fn mu_convention_maps_to_inverse_square() {
    let cfg = parse_config(r#"{"tau": [2], "width_convention": "mu"}"#).unwrap();
    assert_eq!(cfg.widths(), vec![0.25]);
}

#[test]
fn default_suite_passes() {
    let cfg = SuiteConfig::default();
    let rep = run_verification_suite(&cfg).unwrap();
    for c in &rep.checks {
        assert!(c.passed(), "{}", serde_json::to_string_pretty(c).unwrap());
        assert!(c.max_error <= c.tolerance);
    }
    assert_eq!(rep.checks.len(), check_names().len());
    assert_eq!(rep.failed, 0);
    let names: Vec<_> = rep.checks.iter().map(|c| c.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn selected_checks_only() {
    let cfg = parse_config(r#"{"checks": ["fiber_identities", "dd_square"], "n": 3}"#).unwrap();
    let rep = run_verification_suite(&cfg).unwrap();
    assert_eq!(rep.checks.len(), 2);
    assert!(rep.all_passed());
}

#[test]
fn generalized_mu_two_gives_four_fifths() {
    let cfg = parse_config(r#"{"tau": [2], "width_convention": "mu", "checks": ["generalized_szego"]}"#).unwrap();
    let rep = run_verification_suite(&cfg).unwrap();
    let c = &rep.checks[0];
    assert!(c.passed(), "{}", serde_json::to_string_pretty(c).unwrap());
    let t = c.parameters["widths"][0]["one_mode_trace"].as_f64().unwrap();
    assert!((t - 0.8).abs() < 1e-10, "{t}");
}

#[test]
fn report_is_reproducible() {
    let cfg = parse_config(r#"{"checks": ["classical_ellipticity", "subprincipal_contour"], "seed": 7}"#).unwrap();
    let a = run_verification_suite(&cfg).unwrap().without_timings();
    let b = run_verification_suite(&cfg).unwrap().without_timings();
    assert_eq!(a.to_json_string(), b.to_json_string());
}

#[test]
fn symbol_dumps() {
    let cfg = SuiteConfig::default();
    let j: serde_json::Value = serde_json::from_str(&dump(&cfg, "p0_plus_even", DumpFormat::Json).unwrap()).unwrap();
    assert_eq!(j["name"], "p0_plus_even");
    assert_eq!(j["variables"].as_array().unwrap().len(), 5);
    let tex = dump(&cfg, "dd", DumpFormat::Latex).unwrap();
    assert!(tex.contains("\\begin{pmatrix}"));
    for sel in dump_selectors().iter().filter(|s| !s.starts_with("model_")) {
        dump(&cfg, sel, DumpFormat::Json).unwrap();
    }
}

#[test]
fn model_dumps() {
    let cfg = parse_config(r#"{"N": 6}"#).unwrap();
    let j: serde_json::Value = serde_json::from_str(&dump(&cfg, "model_T_minus_odd", DumpFormat::Json).unwrap()).unwrap();
    assert_eq!(j["name"], "model_T_minus_odd");
    let tex = dump(&cfg, "model_U_plus_even", DumpFormat::Latex).unwrap();
    assert_eq!(tex.matches("\\begin{pmatrix}").count(), 4);
}

#[test]
fn unknown_selector_lists_names() {
    match dump(&SuiteConfig::default(), "p0_sideways_even", DumpFormat::Json) {
        Err(CoreError::UnknownSelector { available, .. }) => assert!(available.contains("model_P_plus_even")),
        other => panic!("{other:?}"),
    }
}
