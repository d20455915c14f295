use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kemmer::scenario::{example, ScenarioKind};

fn kemmer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kemmer")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn list_prints_seven_kinds_identically() {
    let a = kemmer(&["list"]);
    let b = kemmer(&["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.matches("\n== ").count(), 7);
}

#[test]
fn unknown_key_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &example(ScenarioKind::NrSpin0).replace("[field]\n", "[field]\ncolour = 1\n"));
    let out = dir.path().join("artifacts");
    let o = kemmer(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert!(!out.exists());
}

#[test]
fn missing_mass_and_bad_physics_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    for text in [
        example(ScenarioKind::TwoSlit).replace("mass = 1.0\n", ""),
        example(ScenarioKind::TwoSlit).replace("sigma = 0.5", "sigma = 0.0"),
        "kind = \"two-slit\"\n[field\n".to_owned(),
    ] {
        let cfg = write_config(dir.path(), &text);
        let o = kemmer(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
    let o = kemmer(&["run", dir.path().join("absent.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn two_slit_spin0_writes_100_trajectories_without_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), example(ScenarioKind::TwoSlit));
    let out = dir.path().join("artifacts");
    let o = kemmer(&["run", &cfg, "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("two_slit.axis_crossings[100 trajectories]|0e0|==0e0|pass"), "{report}");
    assert!(report.contains("overall=pass"));
    let csv = fs::read_to_string(out.join("trajectories.csv")).unwrap();
    let mut particles: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    particles.sort_unstable();
    particles.dedup();
    assert_eq!(particles.len(), 100);
    assert_eq!(fs::read_to_string(out.join("trajectories.summary")).unwrap().lines().count(), 100);
    assert!(out.join("plot.gp").exists());
}

#[test]
fn same_seed_gives_identical_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), example(ScenarioKind::NrSpin1));
    let run = |name: &str, seed: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = kemmer(&["run", &cfg, "--out", out.to_str().unwrap(), "--seed", seed, "--workers", workers]);
        assert!(o.status.success());
        fs::read(out.join("trajectories.csv")).unwrap()
    };
    let a = run("a", "9", "1");
    assert_eq!(a, run("b", "9", "3"));
    assert_ne!(a, run("c", "10", "1"));
}

#[test]
fn failing_check_exits_1_with_report() {
    let dir = tempfile::tempdir().unwrap();
    // A Schrodinger packet with too few steps allowed: integration fails at runtime.
    let text = example(ScenarioKind::NrSpin0).replace("dt = 0.02\n", "dt = 0.02\nmax_steps = 3\n");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("artifacts");
    let o = kemmer(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("|fail"));
    assert!(report.contains("overall=fail"));
}

#[test]
fn verify_fast_emits_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let o = kemmer(&["verify", "--fast", "--out", out.to_str().unwrap(), "--dump-matrices"]);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(o.status.code(), Some(0), "{report}");
    assert!(report.contains("kind=verify"));
    assert!(report.lines().any(|l| l.starts_with("c1.")));
    assert!(report.lines().any(|l| l.starts_with("c10.")));
    assert!(out.join("matrices.txt").exists());
}

#[test]
fn zero_workers_is_rejected() {
    let o = kemmer(&["verify", "--workers", "0", "--out", "/nonexistent/never"]);
    assert_eq!(o.status.code(), Some(2));
}
