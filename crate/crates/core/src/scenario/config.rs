use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SingleRelativistic,
    ManyRelativistic,
    NrSpin0,
    NrSpin1,
    TwoSlit,
    #[serde(rename = "coupled-1p1")]
    Coupled1p1,
    Verify,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::SingleRelativistic,
        ScenarioKind::ManyRelativistic,
        ScenarioKind::NrSpin0,
        ScenarioKind::NrSpin1,
        ScenarioKind::TwoSlit,
        ScenarioKind::Coupled1p1,
        ScenarioKind::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SingleRelativistic => "single-relativistic",
            ScenarioKind::ManyRelativistic => "many-relativistic",
            ScenarioKind::NrSpin0 => "nr-spin0",
            ScenarioKind::NrSpin1 => "nr-spin1",
            ScenarioKind::TwoSlit => "two-slit",
            ScenarioKind::Coupled1p1 => "coupled-1p1",
            ScenarioKind::Verify => "verify",
        }
    }
}

/// Complex number written as `[re, im]`.
pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub amplitude: Complex,
    pub momentum: [f64; 3],
    /// Raw spin-1 polarisation; projected onto `p . eps = 0` and normalised.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<[Complex; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub modes: Vec<ModeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub weight: Complex,
    pub factors: Vec<FactorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// free | constant-scalar | uniform-field-scalar-gauge | uniform-field-temporal-gauge
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<[f64; 3]>,
    /// Spin-1 nonrelativistic polarisation; normalised on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<[Complex; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_potential: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Node threshold as a fraction of the scanned density maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_min: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<[f64; 3]>,
    /// Initial configurations, one position per particle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<Vec<[f64; 3]>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub courant: Option<f64>,
    /// periodic | dirichlet
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_x: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guidance: Option<GuidanceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Keys accepted by one section for one scenario kind.
pub struct SectionRule {
    pub section: &'static str,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
}

/// Sections and keys of one scenario kind, as listed by the catalog.
pub struct KindRules {
    pub kind: ScenarioKind,
    pub summary: &'static str,
    pub sections: &'static [SectionRule],
}

const TRAJ_OPT: &[&str] = &["t_start", "max_steps", "node_fraction"];

pub const RULES: [KindRules; 7] = [
    KindRules {
        kind: ScenarioKind::SingleRelativistic,
        summary: "embedded Klein-Gordon or Proca plane-wave superposition guided by an observer current",
        sections: &[
            SectionRule { section: "field", required: &["spin", "mass", "modes"], optional: &[] },
            SectionRule {
                section: "guidance",
                required: &["dt", "t_end", "trajectories", "domain_min", "domain_max"],
                optional: &["source", "t_start", "max_steps", "node_fraction"],
            },
            SectionRule { section: "observer", required: &[], optional: &["velocity"] },
        ],
    },
    KindRules {
        kind: ScenarioKind::ManyRelativistic,
        summary: "N-particle superposition of product states, equal-time guidance in the rest frame",
        sections: &[
            SectionRule { section: "field", required: &["spin", "mass", "terms"], optional: &[] },
            SectionRule { section: "guidance", required: &["dt", "t_end", "starts"], optional: TRAJ_OPT },
        ],
    },
    KindRules {
        kind: ScenarioKind::NrSpin0,
        summary: "free Schrodinger Gaussian packet, optional constant vector potential",
        sections: &[
            SectionRule {
                section: "field",
                required: &["mass", "sigma", "momentum"],
                optional: &["center", "charge", "vector_potential"],
            },
            SectionRule {
                section: "guidance",
                required: &["dt", "t_end", "trajectories", "domain_min", "domain_max"],
                optional: TRAJ_OPT,
            },
        ],
    },
    KindRules {
        kind: ScenarioKind::NrSpin1,
        summary: "spin-1 Gaussian eigenstate psi' eps with the spin term in the current",
        sections: &[
            SectionRule {
                section: "field",
                required: &["mass", "sigma", "momentum", "polarization"],
                optional: &["center", "charge", "vector_potential"],
            },
            SectionRule {
                section: "guidance",
                required: &["dt", "t_end", "trajectories", "domain_min", "domain_max"],
                optional: TRAJ_OPT,
            },
        ],
    },
    KindRules {
        kind: ScenarioKind::TwoSlit,
        summary: "two Gaussian slits on the y axis, plane wave along x; spin 0 or circular spin 1",
        sections: &[
            SectionRule {
                section: "field",
                required: &["spin", "mass", "sigma", "separation", "speed"],
                optional: &["polarization"],
            },
            SectionRule {
                section: "guidance",
                required: &["dt", "t_end", "trajectories"],
                optional: &["t_start", "max_steps", "node_fraction", "domain_min", "domain_max"],
            },
        ],
    },
    KindRules {
        kind: ScenarioKind::Coupled1p1,
        summary: "1+1D minimally coupled Klein-Gordon lattice with divergence audit and grid export",
        sections: &[
            SectionRule { section: "field", required: &["mass", "charge", "wave_number", "potential"], optional: &[] },
            SectionRule {
                section: "grid",
                required: &["x_min", "x_max", "nx", "t_end", "courant", "boundary"],
                optional: &["audit_t", "audit_x"],
            },
            SectionRule {
                section: "guidance",
                required: &[],
                optional: &["dt", "trajectories", "t_start", "t_end", "max_steps", "node_fraction"],
            },
        ],
    },
    KindRules {
        kind: ScenarioKind::Verify,
        summary: "the full acceptance suite",
        sections: &[SectionRule { section: "verify", required: &[], optional: &["fast"] }],
    },
];

pub fn rules(kind: ScenarioKind) -> &'static KindRules {
    RULES.iter().find(|r| r.kind == kind).expect("every kind has rules")
}

fn present_keys<T: Serialize>(section: &T) -> Result<Vec<String>> {
    let v = toml::Value::try_from(section).map_err(|e| Error::Config(e.to_string()))?;
    Ok(v.as_table().map(|t| t.keys().cloned().collect()).unwrap_or_default())
}

impl ScenarioConfig {
    /// Parses TOML and checks that every key belongs to the scenario kind
    /// and every required key is present.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check_keys()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn check_keys(&self) -> Result<()> {
        let r = rules(self.kind);
        let sections: [(&str, Option<Vec<String>>); 5] = [
            ("field", self.field.as_ref().map(present_keys).transpose()?),
            ("guidance", self.guidance.as_ref().map(present_keys).transpose()?),
            ("grid", self.grid.as_ref().map(present_keys).transpose()?),
            ("observer", self.observer.as_ref().map(present_keys).transpose()?),
            ("verify", self.verify.as_ref().map(present_keys).transpose()?),
        ];
        for (name, keys) in sections {
            let rule = r.sections.iter().find(|s| s.section == name);
            match (rule, keys) {
                (None, Some(_)) => {
                    return Err(Error::Config(format!("section [{name}] is not used by kind `{}`", self.kind.name())))
                }
                (Some(rule), keys) => {
                    let keys = keys.unwrap_or_default();
                    for k in &keys {
                        if !rule.required.contains(&k.as_str()) && !rule.optional.contains(&k.as_str()) {
                            return Err(Error::Config(format!(
                                "key `{name}.{k}` is not used by kind `{}`",
                                self.kind.name()
                            )));
                        }
                    }
                    if let Some(missing) = rule.required.iter().find(|k| !keys.iter().any(|p| p == *k)) {
                        return Err(Error::Config(format!("missing required key `{name}.{missing}`")));
                    }
                }
                (None, None) => {}
            }
        }
        Ok(())
    }
}
