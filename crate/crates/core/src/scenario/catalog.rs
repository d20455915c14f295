use std::fmt::Write as _;

use super::config::{rules, ScenarioKind};

/// Ready-to-run example for each kind; every one passes its own checks.
pub fn example(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::SingleRelativistic => {
            r#"kind = "single-relativistic"
seed = 1

[field]
spin = "1"
mass = 1.0
modes = [
    { amplitude = [1.0, 0.0], momentum = [0.4, 0.0, 0.0], polarization = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]] },
    { amplitude = [0.6, 0.0], momentum = [-0.2, 0.3, 0.0], polarization = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] },
]

[guidance]
dt = 0.02
t_end = 2.0
trajectories = 16
domain_min = [-3.0, -3.0, 0.0]
domain_max = [3.0, 3.0, 0.0]

[observer]
velocity = [0.2, 0.0, 0.0]
"#
        }
        ScenarioKind::ManyRelativistic => {
            r#"kind = "many-relativistic"
seed = 2

[field]
spin = "0"
mass = 1.0

[[field.terms]]
weight = [1.0, 0.0]
factors = [
    { modes = [{ amplitude = [1.0, 0.0], momentum = [0.5, 0.0, 0.0] }] },
    { modes = [{ amplitude = [1.0, 0.0], momentum = [0.0, -0.4, 0.0] }] },
]

[[field.terms]]
weight = [0.0, 0.5]
factors = [
    { modes = [{ amplitude = [1.0, 0.0], momentum = [0.0, -0.4, 0.0] }] },
    { modes = [{ amplitude = [1.0, 0.0], momentum = [0.5, 0.0, 0.0] }] },
]

[guidance]
dt = 0.02
t_end = 1.0
starts = [
    [[0.0, 0.0, 0.0], [1.0, 0.5, 0.0]],
    [[-0.5, 0.2, 0.0], [0.3, -0.7, 0.0]],
]
"#
        }
        ScenarioKind::NrSpin0 => {
            r#"kind = "nr-spin0"
seed = 3

[field]
mass = 1.0
sigma = 1.0
momentum = [0.5, 0.0, 0.0]

[guidance]
dt = 0.02
t_end = 2.0
trajectories = 50
domain_min = [-4.0, -4.0, 0.0]
domain_max = [4.0, 4.0, 0.0]
"#
        }
        ScenarioKind::NrSpin1 => {
            r#"kind = "nr-spin1"
seed = 4

[field]
mass = 1.0
sigma = 1.0
momentum = [0.5, 0.0, 0.0]
polarization = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]

[guidance]
dt = 0.02
t_end = 2.0
trajectories = 50
domain_min = [-4.0, -4.0, 0.0]
domain_max = [4.0, 4.0, 0.0]
"#
        }
        ScenarioKind::TwoSlit => {
            r#"kind = "two-slit"
seed = 5

[field]
spin = "0"
mass = 1.0
sigma = 0.5
separation = 4.0
speed = 1.0

[guidance]
dt = 0.01
t_end = 10.0
trajectories = 100
"#
        }
        ScenarioKind::Coupled1p1 => {
            r#"kind = "coupled-1p1"
seed = 6

[field]
mass = 1.0
charge = 1.0
wave_number = 0.75
potential = { kind = "uniform-field-temporal-gauge", strength = 0.3 }

[grid]
x_min = 0.0
x_max = 25.132741228718345
nx = 128
t_end = 2.0
courant = 0.5
boundary = "periodic"
audit_t = 1.0
audit_x = 8.377580409572781

[guidance]
dt = 0.01
trajectories = 8
"#
        }
        ScenarioKind::Verify => {
            r#"kind = "verify"
seed = 7

[verify]
fast = true
"#
        }
    }
}

/// Defaults applied when an optional key is absent.
fn defaults(kind: ScenarioKind) -> &'static [(&'static str, &'static str)] {
    match kind {
        ScenarioKind::SingleRelativistic => &[
            ("seed", "0"),
            ("guidance.source", "kemmer-energy-momentum"),
            ("guidance.t_start", "0"),
            ("guidance.max_steps", "1000000"),
            ("guidance.node_fraction", "1e-12 (of the scanned density maximum)"),
            ("observer.velocity", "[0, 0, 0]"),
        ],
        ScenarioKind::ManyRelativistic => &[
            ("seed", "0"),
            ("guidance.t_start", "0"),
            ("guidance.max_steps", "1000000"),
            ("guidance.node_fraction", "1e-12 (of the largest starting density)"),
        ],
        ScenarioKind::NrSpin0 | ScenarioKind::NrSpin1 => &[
            ("seed", "0"),
            ("field.center", "[0, 0, 0]"),
            ("field.vector_potential", "none (uncoupled); needs field.charge when set"),
            ("guidance.t_start", "0"),
            ("guidance.max_steps", "1000000"),
            ("guidance.node_fraction", "1e-12 (of the scanned density maximum)"),
        ],
        ScenarioKind::TwoSlit => &[
            ("seed", "0"),
            ("field.polarization", "none for spin 0; required for spin 1"),
            ("guidance.domain_min", "[-1, -(separation/2 + 4 sigma), 0]"),
            ("guidance.domain_max", "[1, separation/2 + 4 sigma, 0]"),
            ("guidance.t_start", "0"),
            ("guidance.max_steps", "1000000"),
            ("guidance.node_fraction", "1e-12 (of the scanned density maximum)"),
        ],
        ScenarioKind::Coupled1p1 => &[
            ("seed", "0"),
            ("grid.audit_t", "t_end / 2"),
            ("grid.audit_x", "(x_min + x_max) / 2"),
            ("[guidance]", "absent: no trajectories"),
            ("guidance.t_start", "2 dt of the lattice"),
            ("guidance.t_end", "last lattice time - 2 dt"),
            ("guidance.max_steps", "1000000"),
            ("guidance.node_fraction", "1e-12 (of the largest starting density)"),
        ],
        ScenarioKind::Verify => &[("seed", "0"), ("verify.fast", "false")],
    }
}

/// Catalog of scenario kinds: keys, defaults and a runnable example each.
pub fn list_scenarios() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} scenario kinds", ScenarioKind::ALL.len());
    for kind in ScenarioKind::ALL {
        let r = rules(kind);
        let _ = writeln!(s, "\n== {} ==", kind.name());
        let _ = writeln!(s, "{}", r.summary);
        for sec in r.sections {
            let _ = writeln!(s, "[{}] required: {}", sec.section, join(sec.required));
            let _ = writeln!(s, "[{}] optional: {}", sec.section, join(sec.optional));
        }
        let _ = writeln!(s, "defaults:");
        for (k, v) in defaults(kind) {
            let _ = writeln!(s, "  {k} = {v}");
        }
        let _ = writeln!(s, "example:");
        for line in example(kind).lines() {
            let _ = writeln!(s, "  {line}");
        }
    }
    s
}

fn join(keys: &[&str]) -> String {
    if keys.is_empty() {
        "-".into()
    } else {
        keys.join(", ")
    }
}
