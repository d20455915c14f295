use proptest::prelude::*;

use super::*;

fn parse_err(text: &str) -> String {
    ScenarioConfig::parse(text).unwrap_err().to_string()
}

#[test]
fn every_example_validates_and_round_trips() {
    for kind in ScenarioKind::ALL {
        let cfg = ScenarioConfig::parse(example(kind)).unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
        assert_eq!(cfg.kind, kind);
        prepare(&cfg, None).unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
        let again = ScenarioConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
}

#[test]
fn catalog_lists_seven_kinds_with_examples() {
    let text = list_scenarios();
    assert!(text.starts_with("7 scenario kinds\n"));
    for kind in ScenarioKind::ALL {
        assert!(text.contains(&format!("== {} ==", kind.name())));
    }
    assert_eq!(text, list_scenarios());
}

#[test]
fn unknown_keys_are_rejected() {
    let bad = example(ScenarioKind::NrSpin0).replace("sigma = 1.0", "sigma = 1.0\nsigmaa = 2.0");
    assert!(parse_err(&bad).contains("sigmaa"));
    let top = format!("{}\nfoo = 1\n", example(ScenarioKind::Verify));
    assert!(parse_err(&top).contains("foo"));
}

#[test]
fn keys_of_other_kinds_are_rejected() {
    let bad = example(ScenarioKind::NrSpin0).replace("[field]\n", "[field]\nseparation = 3.0\n");
    assert!(parse_err(&bad).contains("field.separation"));
    let grid = format!("{}\n[grid]\nnx = 4\n", example(ScenarioKind::NrSpin0));
    assert!(parse_err(&grid).contains("[grid]"));
}

#[test]
fn physical_parameters_have_no_defaults() {
    for (kind, line) in [
        (ScenarioKind::NrSpin0, "mass = 1.0\n"),
        (ScenarioKind::NrSpin0, "sigma = 1.0\n"),
        (ScenarioKind::TwoSlit, "sigma = 0.5\n"),
        (ScenarioKind::Coupled1p1, "charge = 1.0\n"),
    ] {
        let text = example(kind).replacen(line, "", 1);
        assert!(parse_err(&text).contains("missing required key"), "{}", kind.name());
    }
}

#[test]
fn parse_errors_name_the_line() {
    let e = parse_err("kind = \"nr-spin0\"\n[field\nmass = 1\n");
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn invalid_physics_fails_preparation() {
    let cfg = ScenarioConfig::parse(&example(ScenarioKind::NrSpin0).replace("sigma = 1.0", "sigma = -1.0")).unwrap();
    assert!(prepare(&cfg, None).is_err());
    let cfg = ScenarioConfig::parse(&example(ScenarioKind::NrSpin1).replace(
        "polarization = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]",
        "polarization = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]",
    ))
    .unwrap();
    assert!(prepare(&cfg, None).is_err());
    let cfg =
        ScenarioConfig::parse(&example(ScenarioKind::SingleRelativistic).replace("velocity = [0.2", "velocity = [1.2"))
            .unwrap();
    assert!(prepare(&cfg, None).is_err());
}

#[test]
fn seed_override_wins() {
    let cfg = ScenarioConfig::parse(example(ScenarioKind::NrSpin0)).unwrap();
    assert_eq!(prepare(&cfg, None).unwrap().seed(), 3);
    assert_eq!(prepare(&cfg, Some(11)).unwrap().seed(), 11);
    assert!(prepare(&cfg, Some(u64::MAX)).is_err());
}

fn run_example(kind: ScenarioKind) -> (RunReport, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse(example(kind)).unwrap();
    let report = execute(&prepare(&cfg, None).unwrap(), dir.path(), false).unwrap();
    (report, dir)
}

#[test]
fn examples_pass_their_checks() {
    for kind in [
        ScenarioKind::SingleRelativistic,
        ScenarioKind::ManyRelativistic,
        ScenarioKind::NrSpin0,
        ScenarioKind::NrSpin1,
        ScenarioKind::Coupled1p1,
    ] {
        let (report, dir) = run_example(kind);
        assert!(report.passed(), "{}", report.render());
        for f in ["report.txt", "scenario.toml", "trajectories.csv", "trajectories.summary", "plot.gp"] {
            assert!(dir.path().join(f).exists(), "{}: {f}", kind.name());
        }
    }
}

#[test]
fn coupled_run_exports_the_grid() {
    let (_, dir) = run_example(ScenarioKind::Coupled1p1);
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(grid.starts_with("t,x,re,im\n"));
    assert!(std::fs::read_to_string(dir.path().join("grid.meta")).unwrap().contains("boundary=Periodic"));
}

#[test]
fn report_overall_is_the_conjunction() {
    let (mut report, _dir) = run_example(ScenarioKind::NrSpin0);
    assert!(report.render().contains("overall=pass"));
    report.checks.push(crate::checks::CheckResult::new("forced", 1.0, crate::checks::Comparison::Below, 0.0));
    assert!(!report.passed());
    assert!(report.render().contains("overall=fail"));
}

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nr_configs_round_trip(
        mass in 0.01f64..100.0,
        sigma in 0.01f64..100.0,
        k in prop::array::uniform3(finite()),
        center in prop::option::of(prop::array::uniform3(finite())),
        seed in prop::option::of(0u64..=i64::MAX as u64),
        n in 1usize..1000,
        dt in 1e-4f64..1.0,
    ) {
        let cfg = ScenarioConfig {
            kind: ScenarioKind::NrSpin0,
            seed,
            field: Some(FieldSection { mass: Some(mass), sigma: Some(sigma), momentum: Some(k), center, ..Default::default() }),
            guidance: Some(GuidanceSection {
                dt: Some(dt),
                t_end: Some(1.0),
                trajectories: Some(n),
                domain_min: Some([-1.0; 3]),
                domain_max: Some([1.0; 3]),
                ..Default::default()
            }),
            grid: None,
            observer: None,
            verify: None,
            output: None,
        };
        let text = cfg.to_toml().unwrap();
        let parsed = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(ScenarioConfig::parse(&parsed.to_toml().unwrap()).unwrap(), parsed);
    }
}
