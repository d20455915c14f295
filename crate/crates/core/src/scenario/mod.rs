//! Configuration-driven scenarios: TOML schema, validation, runs with
//! CSV/report artifacts, and the catalog printed by `kemmer list`.

mod catalog;
mod config;
mod run;

pub use catalog::{example, list_scenarios};
pub use config::{
    rules, FactorSpec, FieldSection, GridSection, GuidanceSection, KindRules, ModeSpec, ObserverSection, OutputSection,
    PotentialSpec, ScenarioConfig, ScenarioKind, SectionRule, TermSpec, VerifySection, RULES,
};
pub use run::{execute, prepare, Prepared, RunReport};

#[cfg(test)]
mod tests;
