use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::algebra::{FourVector, C64};
use crate::checks::{axis_crossings, run_all, CheckResult, Comparison, Scale};
use crate::currents::{current_divergence, grid_refinement, multi_divergence, Coupling, Observer};
use crate::dkp::{representation, SpinKind};
use crate::error::{Error, Result};
use crate::fields::{
    embed_spin0, embed_spin1, kg_superposition, nr_gaussian, nr_two_slit, proca_superposition, solve_coupled_kg_1p1,
    Boundary, GridField, GridKemmer, GridParams, KemmerField, NrFieldSpec, Potential, ProcaMode, ProductSuperposition,
    ScalarMode,
};
use crate::guidance::{
    causality_audit, density_at, integrate, integrate_many, propagate_ensemble, sample_ensemble, write_summary,
    write_trajectories_csv, CurrentSource, DomainBox, GuidanceConfig, GuideField, Termination, Trajectory,
};
use crate::random::derive_seed;

use super::config::{Complex, FieldSection, GuidanceSection, ModeSpec, ScenarioConfig, ScenarioKind};

const DEFAULT_MAX_STEPS: usize = 1_000_000;
const DEFAULT_NODE_FRACTION: f64 = 1e-12;
/// Finite-difference step of the conservation checks.
const AUDIT_STEP: f64 = 1e-2;
const DIVERGENCE_BOUND: f64 = 1e-4;
const SCHRODINGER_BOUND: f64 = 1e-8;
const AUDIT_STENCIL: usize = 2;

/// Outcome of one scenario run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: ScenarioKind,
    pub seed: u64,
    /// The validated configuration, re-serialised.
    pub scenario: String,
    pub checks: Vec<CheckResult>,
    pub duration: Duration,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Structured text: a header, the scenario echo, one
    /// `name|measured|threshold|status` line per check, then the totals.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind={}", self.kind.name());
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "[scenario]");
        s.push_str(&self.scenario);
        if !self.scenario.ends_with('\n') {
            s.push('\n');
        }
        let _ = writeln!(s, "[checks]");
        for c in &self.checks {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s, "[result]");
        let _ = writeln!(s, "overall={}", if self.passed() { "pass" } else { "fail" });
        let _ = writeln!(s, "duration_s={:.3}", self.duration.as_secs_f64());
        s
    }
}

enum Residual {
    Kemmer(Arc<dyn KemmerField>, Observer),
    Schrodinger(Arc<NrFieldSpec>),
}

struct EnsemblePlan {
    field: GuideField,
    config: GuidanceConfig,
    domain: DomainBox,
    n: usize,
    t0: f64,
    t1: f64,
    node_fraction: f64,
    residual: Residual,
    count_crossings: bool,
}

struct ManyPlan {
    field: Arc<ProductSuperposition>,
    config: GuidanceConfig,
    starts: Vec<Vec<[f64; 3]>>,
    t0: f64,
    t1: f64,
    node_fraction: f64,
}

struct CoupledTrajectories {
    n: usize,
    dt: f64,
    t0: Option<f64>,
    t1: Option<f64>,
    max_steps: usize,
    node_fraction: f64,
}

struct CoupledPlan {
    params: GridParams,
    potential: Potential,
    charge: f64,
    mass: f64,
    wave_number: f64,
    audit_t: f64,
    audit_x: f64,
    trajectories: Option<CoupledTrajectories>,
}

enum Plan {
    Ensemble(Box<EnsemblePlan>),
    Many(Box<ManyPlan>),
    Coupled(Box<CoupledPlan>),
    Verify { fast: bool },
}

/// A validated scenario with every field and parameter built; nothing has
/// been computed yet.
pub struct Prepared {
    config: ScenarioConfig,
    seed: u64,
    plan: Plan,
}

impl Prepared {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

fn positive(v: f64, name: &'static str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonPositive { name, value: v })
    }
}

fn c64(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn unit3(eps: [Complex; 3]) -> Result<[C64; 3]> {
    let e = eps.map(c64);
    let n = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Config("`field.polarization` must be a nonzero finite vector".into()));
    }
    Ok(e.map(|z| z / n))
}

fn spin(field: &FieldSection) -> Result<SpinKind> {
    SpinKind::parse(&need(&field.spin, "field.spin")?)
}

fn relativistic_field(kind: SpinKind, mass: f64, modes: &[ModeSpec]) -> Result<Arc<dyn KemmerField>> {
    if modes.is_empty() {
        return Err(Error::Config("`modes` must list at least one plane wave".into()));
    }
    match kind {
        SpinKind::Spin0 => {
            if modes.iter().any(|m| m.polarization.is_some()) {
                return Err(Error::Config("spin-0 modes take no polarization".into()));
            }
            let modes = modes.iter().map(|m| ScalarMode::on_shell(c64(m.amplitude), m.momentum, mass)).collect();
            Ok(Arc::new(embed_spin0(kg_superposition(modes, mass)?)))
        }
        SpinKind::Spin1 => {
            let modes = modes
                .iter()
                .map(|m| {
                    let raw = m.polarization.ok_or_else(|| Error::Config("spin-1 modes need a polarization".into()))?;
                    let e = (m.momentum.iter().map(|c| c * c).sum::<f64>() + mass * mass).sqrt();
                    Ok(ProcaMode::project(c64(m.amplitude), FourVector::from_parts(e, m.momentum), raw.map(c64)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Arc::new(embed_spin1(proca_superposition(modes, mass)?)))
        }
    }
}

fn node_fraction(g: &GuidanceSection) -> Result<f64> {
    positive(g.node_fraction.unwrap_or(DEFAULT_NODE_FRACTION), "node_fraction")
}

fn span(g: &GuidanceSection) -> Result<(f64, f64)> {
    let t0 = g.t_start.unwrap_or(0.0);
    let t1 = need(&g.t_end, "guidance.t_end")?;
    if !(t1 >= t0) {
        return Err(Error::Config(format!("guidance.t_end ({t1}) precedes guidance.t_start ({t0})")));
    }
    Ok((t0, t1))
}

/// Provisional threshold; replaced once the density scale is known.
fn guidance_config(source: CurrentSource, g: &GuidanceSection) -> Result<GuidanceConfig> {
    let dt = positive(need(&g.dt, "guidance.dt")?, "dt")?;
    GuidanceConfig::new(source, dt, g.max_steps.unwrap_or(DEFAULT_MAX_STEPS), f64::MIN_POSITIVE)
}

fn domain(g: &GuidanceSection) -> Result<DomainBox> {
    DomainBox::new(need(&g.domain_min, "guidance.domain_min")?, need(&g.domain_max, "guidance.domain_max")?)
}

fn count(n: Option<usize>, key: &str) -> Result<usize> {
    match n {
        Some(0) => Err(Error::Config(format!("`{key}` must be at least 1"))),
        Some(n) => Ok(n),
        None => Err(Error::Config(format!("missing required key `{key}`"))),
    }
}

fn nr_plan(cfg: &ScenarioConfig, kind: SpinKind) -> Result<Plan> {
    let f = need(&cfg.field, "field")?;
    let g = need(&cfg.guidance, "guidance")?;
    let mass = positive(need(&f.mass, "field.mass")?, "mass")?;
    let sigma = positive(need(&f.sigma, "field.sigma")?, "sigma")?;
    let eps = match kind {
        SpinKind::Spin0 => None,
        SpinKind::Spin1 => Some(unit3(need(&f.polarization, "field.polarization")?)?),
    };
    let spec = Arc::new(nr_gaussian(
        kind,
        mass,
        sigma,
        f.center.unwrap_or([0.0; 3]),
        need(&f.momentum, "field.momentum")?,
        eps,
    )?);
    let source = match kind {
        SpinKind::Spin0 => CurrentSource::NrSpin0,
        SpinKind::Spin1 => CurrentSource::NrSpin1,
    };
    let mut config = guidance_config(source, &g)?;
    if let Some(v) = f.vector_potential {
        let charge = f
            .charge
            .ok_or_else(|| Error::Config("`field.vector_potential` needs an explicit `field.charge`".into()))?;
        config = config.with_coupling(Coupling { vector_potential: v, charge });
    } else if f.charge.is_some() {
        return Err(Error::Config("`field.charge` has no effect without `field.vector_potential`".into()));
    }
    let (t0, t1) = span(&g)?;
    Ok(Plan::Ensemble(Box::new(EnsemblePlan {
        field: GuideField::Nr(spec.clone()),
        config,
        domain: domain(&g)?,
        n: count(g.trajectories, "guidance.trajectories")?,
        t0,
        t1,
        node_fraction: node_fraction(&g)?,
        residual: Residual::Schrodinger(spec),
        count_crossings: false,
    })))
}

fn single_plan(cfg: &ScenarioConfig) -> Result<Plan> {
    let f = need(&cfg.field, "field")?;
    let g = need(&cfg.guidance, "guidance")?;
    let mass = positive(need(&f.mass, "field.mass")?, "mass")?;
    let field = relativistic_field(spin(&f)?, mass, &need(&f.modes, "field.modes")?)?;
    let observer = match &cfg.observer {
        Some(o) => Observer::moving(o.velocity)?,
        None => Observer::rest(),
    };
    let source = CurrentSource::parse(g.source.as_deref().unwrap_or(CurrentSource::KemmerEnergyMomentum.name()))?;
    if !source.is_relativistic() {
        return Err(Error::Config(format!("`guidance.source = {}` is not a relativistic current", source.name())));
    }
    let config = guidance_config(source, &g)?.with_observer(observer);
    let (t0, t1) = span(&g)?;
    Ok(Plan::Ensemble(Box::new(EnsemblePlan {
        field: GuideField::Single(field.clone()),
        config,
        domain: domain(&g)?,
        n: count(g.trajectories, "guidance.trajectories")?,
        t0,
        t1,
        node_fraction: node_fraction(&g)?,
        residual: Residual::Kemmer(field, observer),
        count_crossings: false,
    })))
}

fn many_plan(cfg: &ScenarioConfig) -> Result<Plan> {
    let f = need(&cfg.field, "field")?;
    let g = need(&cfg.guidance, "guidance")?;
    let mass = positive(need(&f.mass, "field.mass")?, "mass")?;
    let kind = spin(&f)?;
    let terms = need(&f.terms, "field.terms")?
        .iter()
        .map(|t| {
            let factors =
                t.factors.iter().map(|p| relativistic_field(kind, mass, &p.modes)).collect::<Result<Vec<_>>>()?;
            Ok((c64(t.weight), factors))
        })
        .collect::<Result<Vec<_>>>()?;
    let field = Arc::new(ProductSuperposition::new(terms)?);
    let starts = need(&g.starts, "guidance.starts")?;
    if starts.is_empty() {
        return Err(Error::Config("`guidance.starts` must list at least one configuration".into()));
    }
    use crate::fields::MultiKemmerField;
    if let Some(bad) = starts.iter().find(|s| s.len() != field.particles()) {
        return Err(Error::DimensionMismatch { expected: field.particles(), found: bad.len() });
    }
    let (t0, t1) = span(&g)?;
    Ok(Plan::Many(Box::new(ManyPlan {
        config: guidance_config(CurrentSource::KemmerEnergyMomentum, &g)?,
        field,
        starts,
        t0,
        t1,
        node_fraction: node_fraction(&g)?,
    })))
}

fn two_slit_plan(cfg: &ScenarioConfig) -> Result<Plan> {
    let f = need(&cfg.field, "field")?;
    let g = need(&cfg.guidance, "guidance")?;
    let kind = spin(&f)?;
    let mass = positive(need(&f.mass, "field.mass")?, "mass")?;
    let sigma = positive(need(&f.sigma, "field.sigma")?, "sigma")?;
    let separation = need(&f.separation, "field.separation")?;
    let eps = match (kind, f.polarization) {
        (SpinKind::Spin0, None) => None,
        (SpinKind::Spin0, Some(_)) => {
            return Err(Error::Config("a spin-0 two-slit field takes no polarization".into()))
        }
        (SpinKind::Spin1, Some(e)) => Some(unit3(e)?),
        (SpinKind::Spin1, None) => {
            return Err(Error::Config("a spin-1 two-slit field needs `field.polarization`".into()))
        }
    };
    let spec = Arc::new(nr_two_slit(kind, mass, separation, sigma, need(&f.speed, "field.speed")?, eps)?);
    let source = match kind {
        SpinKind::Spin0 => CurrentSource::NrSpin0,
        SpinKind::Spin1 => CurrentSource::NrSpin1,
    };
    let domain = match (g.domain_min, g.domain_max) {
        (Some(a), Some(b)) => DomainBox::new(a, b)?,
        (None, None) => {
            let y = 0.5 * separation + 4.0 * sigma;
            DomainBox::new([-1.0, -y, 0.0], [1.0, y, 0.0])?
        }
        _ => return Err(Error::Config("give both `guidance.domain_min` and `guidance.domain_max` or neither".into())),
    };
    let (t0, t1) = span(&g)?;
    Ok(Plan::Ensemble(Box::new(EnsemblePlan {
        field: GuideField::Nr(spec.clone()),
        config: guidance_config(source, &g)?,
        domain,
        n: count(g.trajectories, "guidance.trajectories")?,
        t0,
        t1,
        node_fraction: node_fraction(&g)?,
        residual: Residual::Schrodinger(spec),
        count_crossings: kind == SpinKind::Spin0,
    })))
}

fn potential(f: &FieldSection) -> Result<Potential> {
    let p = need(&f.potential, "field.potential")?;
    let strength = || p.strength.ok_or_else(|| Error::Config(format!("potential `{}` needs `strength`", p.kind)));
    let pot = match p.kind.as_str() {
        "free" => {
            if p.strength.is_some() {
                return Err(Error::Config("the free potential takes no `strength`".into()));
            }
            Potential::Free
        }
        "constant-scalar" => Potential::ConstantScalar { v0: strength()? },
        "uniform-field-scalar-gauge" => Potential::UniformFieldScalarGauge { field: strength()? },
        "uniform-field-temporal-gauge" => Potential::UniformFieldTemporalGauge { field: strength()? },
        other => return Err(Error::Config(format!("unknown potential kind `{other}`"))),
    };
    Ok(pot)
}

fn coupled_plan(cfg: &ScenarioConfig) -> Result<Plan> {
    let f = need(&cfg.field, "field")?;
    let gr = need(&cfg.grid, "grid")?;
    let boundary = match need(&gr.boundary, "grid.boundary")?.as_str() {
        "periodic" => Boundary::Periodic,
        "dirichlet" => Boundary::Dirichlet,
        other => return Err(Error::Config(format!("unknown boundary `{other}`"))),
    };
    let (x_min, x_max) = (need(&gr.x_min, "grid.x_min")?, need(&gr.x_max, "grid.x_max")?);
    let nx = count(gr.nx, "grid.nx")?;
    let t_end = positive(need(&gr.t_end, "grid.t_end")?, "t_end")?;
    let params = GridParams::with_courant(x_min, x_max, nx, t_end, need(&gr.courant, "grid.courant")?, boundary);
    params.validate()?;
    let trajectories = match &cfg.guidance {
        None => None,
        Some(g) => Some(CoupledTrajectories {
            n: count(g.trajectories, "guidance.trajectories")?,
            dt: positive(need(&g.dt, "guidance.dt")?, "dt")?,
            t0: g.t_start,
            t1: g.t_end,
            max_steps: g.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            node_fraction: node_fraction(g)?,
        }),
    };
    Ok(Plan::Coupled(Box::new(CoupledPlan {
        params,
        potential: potential(&f)?,
        charge: need(&f.charge, "field.charge")?,
        mass: positive(need(&f.mass, "field.mass")?, "mass")?,
        wave_number: need(&f.wave_number, "field.wave_number")?,
        audit_t: gr.audit_t.unwrap_or(0.5 * t_end),
        audit_x: gr.audit_x.unwrap_or(0.5 * (x_min + x_max)),
        trajectories,
    })))
}

/// Validates `config` and builds every field it describes. `seed`
/// overrides the configured seed.
pub fn prepare(config: &ScenarioConfig, seed: Option<u64>) -> Result<Prepared> {
    let plan = match config.kind {
        ScenarioKind::SingleRelativistic => single_plan(config)?,
        ScenarioKind::ManyRelativistic => many_plan(config)?,
        ScenarioKind::NrSpin0 => nr_plan(config, SpinKind::Spin0)?,
        ScenarioKind::NrSpin1 => nr_plan(config, SpinKind::Spin1)?,
        ScenarioKind::TwoSlit => two_slit_plan(config)?,
        ScenarioKind::Coupled1p1 => coupled_plan(config)?,
        ScenarioKind::Verify => Plan::Verify { fast: config.verify.as_ref().and_then(|v| v.fast).unwrap_or(false) },
    };
    let mut config = config.clone();
    let seed = seed.or(config.seed).unwrap_or(0);
    if i64::try_from(seed).is_err() {
        return Err(Error::Config(format!("seed {seed} exceeds the TOML integer range (max {})", i64::MAX)));
    }
    config.seed = Some(seed);
    Ok(Prepared { config, seed, plan })
}

fn failure(name: &str, e: &Error) -> CheckResult {
    let mut c = CheckResult::new(format!("{name}.error[{e}]"), f64::NAN, Comparison::Equal, 0.0);
    c.passed = false;
    c
}

fn termination_checks(trajectories: &[Trajectory], out: &mut Vec<CheckResult>) {
    let count = |t: Termination| trajectories.iter().filter(|tr| tr.termination == t).count() as f64;
    out.push(CheckResult::info("trajectories.completed", count(Termination::Completed)));
    out.push(CheckResult::info("trajectories.node_abort", count(Termination::NodeAbort)));
    out.push(CheckResult::info("trajectories.domain_exit", count(Termination::DomainExit)));
}

fn causality_checks(trajectories: &[Trajectory], source: CurrentSource, out: &mut Vec<CheckResult>) {
    if !source.is_relativistic() {
        return;
    }
    let reports: Vec<_> = trajectories.iter().map(causality_audit).collect();
    let superluminal = reports.iter().map(|r| r.superluminal).sum::<usize>() as f64;
    let max_speed = reports.iter().map(|r| r.max_speed).fold(0.0, f64::max);
    if source == CurrentSource::KemmerChargeDemo {
        out.push(CheckResult::info("causality.superluminal_samples", superluminal));
    } else {
        out.push(CheckResult::new("causality.superluminal_samples", superluminal, Comparison::Equal, 0.0));
    }
    out.push(CheckResult::info("causality.max_speed", max_speed));
}

/// Largest of `|d_mu j^mu| / |j^0|` over the starting events.
fn kemmer_residual(field: &dyn KemmerField, obs: &Observer, t0: f64, starts: &[[f64; 3]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in starts {
        let x = FourVector::from_parts(t0, *p);
        let rep = current_divergence(field, obs, &x, AUDIT_STEP)?;
        let j0 =
            crate::currents::observer_current(&crate::currents::energy_momentum(field.rep(), &field.psi(&x)?)?, obs)[0];
        worst = worst.max(rep.max_residual() / j0.abs());
    }
    Ok(worst)
}

fn run_ensemble(plan: &EnsemblePlan, seed: u64, checks: &mut Vec<CheckResult>) -> Result<Vec<Trajectory>> {
    let ens = sample_ensemble(&plan.field, &plan.config, plan.domain, plan.t0, plan.n, derive_seed(seed, "ensemble"))?;
    let config = plan.config.with_node_threshold(plan.node_fraction * ens.supremum)?;
    checks.push(CheckResult::new("ensemble.envelope_overshoots", ens.overshoots as f64, Comparison::Equal, 0.0));
    let trajectories = propagate_ensemble(&plan.field, &config, &ens, plan.t1)?;
    match &plan.residual {
        Residual::Kemmer(f, obs) => {
            let r = kemmer_residual(f.as_ref(), obs, plan.t0, &ens.positions)?;
            checks.push(CheckResult::new("current.relative_divergence", r, Comparison::Below, DIVERGENCE_BOUND));
        }
        Residual::Schrodinger(spec) => {
            let r = ens
                .positions
                .iter()
                .map(|p| spec.schrodinger_residual(&FourVector::from_parts(plan.t0, *p)))
                .fold(0.0, f64::max);
            checks.push(CheckResult::new("field.schrodinger_residual", r, Comparison::Below, SCHRODINGER_BOUND));
        }
    }
    causality_checks(&trajectories, config.source(), checks);
    if plan.count_crossings {
        let crossings: usize = trajectories.iter().map(axis_crossings).sum();
        checks.push(CheckResult::new(
            format!("two_slit.axis_crossings[{} trajectories]", trajectories.len()),
            crossings as f64,
            Comparison::Equal,
            0.0,
        ));
    }
    termination_checks(&trajectories, checks);
    Ok(trajectories)
}

fn run_many(plan: &ManyPlan, checks: &mut Vec<CheckResult>) -> Result<Vec<Trajectory>> {
    use rayon::prelude::*;
    let field = GuideField::Many(plan.field.clone());
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for s in &plan.starts {
        let rho = density_at(&field, &plan.config, plan.t0, s)?;
        scale = scale.max(rho);
        let rep = multi_divergence(plan.field.as_ref(), &Observer::rest(), plan.t0, s, AUDIT_STEP)?;
        worst = worst.max(rep.max_residual() / rho.abs());
    }
    if !(scale > 0.0) {
        return Err(Error::DegenerateDensity);
    }
    let config = plan.config.with_node_threshold(plan.node_fraction * scale)?;
    checks.push(CheckResult::new("current.relative_divergence", worst, Comparison::Below, DIVERGENCE_BOUND));
    let trajectories: Vec<Trajectory> =
        plan.starts.par_iter().map(|s| integrate_many(&field, &config, s, plan.t0, plan.t1)).collect::<Result<_>>()?;
    causality_checks(&trajectories, config.source(), checks);
    termination_checks(&trajectories, checks);
    Ok(trajectories)
}

fn solve(plan: &CoupledPlan, params: GridParams) -> Result<GridField> {
    let (p, m) = (plan.wave_number, plan.mass);
    let e = (p * p + m * m).sqrt();
    solve_coupled_kg_1p1(params, plan.potential, plan.charge, m, &|x| C64::from_polar(1.0, p * x), &|x| {
        C64::new(0.0, -e) * C64::from_polar(1.0, p * x)
    })
}

fn run_coupled(plan: &CoupledPlan, out: &Path, checks: &mut Vec<CheckResult>) -> Result<Vec<Trajectory>> {
    let coarse = solve(plan, plan.params)?;
    let fine_params = GridParams { nx: 2 * plan.params.nx, dt: plan.params.dt / 2.0, ..plan.params };
    let fine = solve(plan, fine_params)?;
    let audit = grid_refinement(&coarse, &fine, plan.audit_t, plan.audit_x, AUDIT_STENCIL)?;
    checks.push(CheckResult::new(
        "grid.residual_order",
        audit.report.order().unwrap_or(f64::NAN),
        Comparison::AtLeast,
        1.9,
    ));
    let raw = audit.raw[0].abs();
    if plan.potential.field_strength() != 0.0 && plan.charge != 0.0 {
        checks.push(CheckResult::new(
            format!("grid.raw_divergence_over_residual[raw {raw:.3e}]"),
            raw / audit.report.max_residual(),
            Comparison::Above,
            10.0,
        ));
    }
    let charges = coarse.charge_series()?;
    let q0 = charges.first().map_or(0.0, |c| c.1);
    let drift = charges.iter().map(|c| (c.1 - q0).abs()).fold(0.0, f64::max);
    checks.push(CheckResult::info("grid.total_charge_drift", drift / q0.abs().max(f64::MIN_POSITIVE)));
    coarse.export_table(BufWriter::new(fs::File::create(out.join("grid.csv"))?))?;
    fs::write(out.join("grid.meta"), coarse.metadata())?;

    let Some(tp) = &plan.trajectories else { return Ok(Vec::new()) };
    let grid = Arc::new(coarse);
    let margin = 2.0 * grid.dt();
    let t0 = tp.t0.unwrap_or(margin);
    let t1 = tp.t1.unwrap_or(grid.t_final() - margin);
    let field = GuideField::Single(Arc::new(GridKemmer::new(grid.clone())));
    let base = GuidanceConfig::new(CurrentSource::KemmerEnergyMomentum, tp.dt, tp.max_steps, f64::MIN_POSITIVE)?;
    let (x_min, x_max) = (plan.params.x_min, plan.params.x_max);
    let starts: Vec<[f64; 3]> =
        (0..tp.n).map(|i| [x_min + (i as f64 + 0.5) * (x_max - x_min) / tp.n as f64, 0.0, 0.0]).collect();
    let scale = starts.iter().map(|p| density_at(&field, &base, t0, &[*p])).collect::<Result<Vec<_>>>()?;
    let scale = scale.into_iter().fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::DegenerateDensity);
    }
    let config = base.with_node_threshold(tp.node_fraction * scale)?;
    use rayon::prelude::*;
    let trajectories: Vec<Trajectory> =
        starts.par_iter().map(|p| integrate(&field, &config, *p, t0, t1)).collect::<Result<_>>()?;
    causality_checks(&trajectories, config.source(), checks);
    termination_checks(&trajectories, checks);
    Ok(trajectories)
}

fn plot_script(kind: ScenarioKind, trajectories: &[Trajectory]) -> String {
    let particles: usize = trajectories.iter().map(|t| t.particles).sum();
    let last = particles.saturating_sub(1);
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key off");
    if kind == ScenarioKind::Coupled1p1 {
        let _ = writeln!(s, "set multiplot layout 1,2");
        let _ = writeln!(s, "set xlabel 'x'\nset ylabel 't'\nset title '|phi|'");
        let _ = writeln!(s, "plot 'grid.csv' skip 1 using 2:1:(sqrt($3**2+$4**2)) with points pt 5 ps 0.2 palette");
        let _ = writeln!(s, "set title 'trajectories'");
        let _ = writeln!(s, "plot for [i=0:{last}] 'trajectories.csv' skip 1 using ($2==i ? $3 : NaN):1 with lines");
        let _ = writeln!(s, "unset multiplot");
    } else {
        let _ = writeln!(s, "set xlabel 'x'\nset ylabel 'y'");
        let _ = writeln!(s, "plot for [i=0:{last}] 'trajectories.csv' skip 1 using ($2==i ? $3 : NaN):4 with lines");
    }
    s
}

/// Runs a prepared scenario, writing artifacts into `out`, which must exist.
/// Failures of the computation become failing checks; only I/O errors are
/// returned.
pub fn execute(prepared: &Prepared, out: &Path, dump_matrices: bool) -> Result<RunReport> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let scenario = prepared.config.to_toml()?;
    fs::write(out.join("scenario.toml"), &scenario)?;
    if dump_matrices {
        let mut s = String::new();
        for kind in [SpinKind::Spin0, SpinKind::Spin1] {
            s.push_str(&representation(kind).dump());
        }
        fs::write(out.join("matrices.txt"), s)?;
    }
    let outcome = match &prepared.plan {
        Plan::Ensemble(p) => run_ensemble(p, prepared.seed, &mut checks).map(Some),
        Plan::Many(p) => run_many(p, &mut checks).map(Some),
        Plan::Coupled(p) => run_coupled(p, out, &mut checks).map(|t| (!t.is_empty()).then_some(t)),
        Plan::Verify { fast } => {
            let scale = if *fast { Scale::Fast } else { Scale::Full };
            for c in run_all(scale, prepared.seed) {
                checks.extend(c.checks);
            }
            Ok(None)
        }
    };
    match outcome {
        Ok(Some(trajectories)) => {
            write_trajectories_csv(BufWriter::new(fs::File::create(out.join("trajectories.csv"))?), &trajectories)?;
            write_summary(BufWriter::new(fs::File::create(out.join("trajectories.summary"))?), &trajectories)?;
            fs::write(out.join("plot.gp"), plot_script(prepared.config.kind, &trajectories))?;
        }
        Ok(None) => {}
        Err(e @ Error::Io(_)) => return Err(e),
        Err(e) => checks.push(failure("run", &e)),
    }
    let report =
        RunReport { kind: prepared.config.kind, seed: prepared.seed, scenario, checks, duration: start.elapsed() };
    fs::write(out.join("report.txt"), report.render())?;
    Ok(report)
}
