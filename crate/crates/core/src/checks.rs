//! The acceptance suite: ten numbered criteria, each a list of named checks
//! with a measured value and a threshold.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::algebra::vec3::{norm as norm3, sub};
use crate::algebra::{FourVector, C64};
use crate::currents::{
    charge_current, current_divergence, energy_momentum, grid_refinement, kg_tensor, multi_divergence,
    nr_current_spin0, nr_current_spin1, observer_current, perturbed_energy_density, perturbed_tensor, proca_tensor,
    tensor_divergence, AmbiguityTensor, Coupling, Observer,
};
use crate::dkp::{representation, verify_algebra, SpinKind};
use crate::error::Result;
use crate::fields::{
    embed_spin0, embed_spin1, kg_superposition, nr_gaussian, nr_plane_wave, nr_two_slit, proca_superposition,
    solve_coupled_kg_1p1, Boundary, FieldSample, GridField, GridParams, KemmerField, NrFieldSpec, NrLiftedProca,
    NrLiftedScalar, Potential, ProductSuperposition, Sampled,
};
use crate::guidance::{
    causality_audit, integrate, propagate_ensemble, sample_ensemble, CurrentSource, DomainBox, GuidanceConfig,
    GuideField, Trajectory, SPEED_TOLERANCE,
};
use crate::random::{derive_seed, random_observer, random_proca_modes, random_scalar_modes, rng, uniform, SimRng};

/// Full runs the sizes stated by the criteria; Fast shrinks sample counts
/// for smoke testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Fast,
}

impl Scale {
    fn pick(self, full: usize, fast: usize) -> usize {
        match self {
            Scale::Full => full,
            Scale::Fast => fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Below,
    AtMost,
    Above,
    AtLeast,
    Equal,
    /// Reported only; never fails.
    Info,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::Below => "<",
            Comparison::AtMost => "<=",
            Comparison::Above => ">",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
            Comparison::Info => "",
        }
    }

    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::Below => measured < threshold,
            Comparison::AtMost => measured <= threshold,
            Comparison::Above => measured > threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Equal => measured == threshold,
            Comparison::Info => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = comparison.holds(measured, threshold);
        CheckResult { name: name.into(), measured, comparison, threshold, passed }
    }

    /// Informational entry with no threshold.
    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        CheckResult { name: name.into(), measured, comparison: Comparison::Info, threshold: f64::NAN, passed: true }
    }

    pub fn status(&self) -> &'static str {
        if self.comparison == Comparison::Info {
            "info"
        } else if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

impl fmt::Display for CheckResult {
    /// `name|measured|threshold|status`, the threshold prefixed by its relation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comparison == Comparison::Info {
            return write!(f, "{}|{:e}|-|info", self.name, self.measured);
        }
        write!(
            f,
            "{}|{:e}|{}{:e}|{}",
            self.name,
            self.measured,
            self.comparison.symbol(),
            self.threshold,
            self.status()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<CheckResult>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One summary line: `criterion N (title): pass|fail`.
    pub fn summary(&self) -> String {
        format!("criterion {} ({}): {}", self.id, self.title, if self.passed() { "pass" } else { "fail" })
    }
}

pub const TITLES: [&str; 10] = [
    "DKP algebra",
    "embedding equivalence",
    "causality",
    "conservation",
    "ambiguity demonstrator",
    "nonrelativistic limit, spin 0",
    "nonrelativistic limit, spin 1",
    "spin-term trajectory effect",
    "minimal coupling",
    "ensemble equivariance",
];

/// Runs criterion `id` (1..=10). Errors from the engine are turned into a
/// failing check rather than propagated.
pub fn run_criterion(id: usize, scale: Scale, seed: u64) -> Criterion {
    let title = TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    let mut r = rng(derive_seed(seed, &format!("criterion-{id}")));
    let result = match id {
        1 => algebra(),
        2 => embedding(&mut r),
        3 => causality(&mut r, scale),
        4 => conservation(&mut r),
        5 => ambiguity(&mut r, scale),
        6 => nr_limit_spin0(&mut r, scale),
        7 => nr_limit_spin1(&mut r, scale),
        8 => spin_trajectories(scale, seed),
        9 => minimal_coupling(),
        10 => equivariance(scale, seed),
        _ => Ok(vec![]),
    };
    let checks = result
        .unwrap_or_else(|e| vec![CheckResult::new(format!("c{id}.error: {e}"), f64::NAN, Comparison::Equal, 0.0)]);
    Criterion { id, title, checks }
}

pub fn run_all(scale: Scale, seed: u64) -> Vec<Criterion> {
    (1..=10).map(|id| run_criterion(id, scale, seed)).collect()
}

fn random_event(r: &mut SimRng, half: f64) -> FourVector {
    FourVector::new(uniform(r, -half, half), uniform(r, -half, half), uniform(r, -half, half), uniform(r, -half, half))
}

fn algebra() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for kind in [SpinKind::Spin0, SpinKind::Spin1] {
        let rep = representation(kind);
        let n = kind.name();
        let report = verify_algebra(rep);
        out.push(CheckResult::new(format!("c1.{n}.trilinear_residual"), report.max_residual, Comparison::Below, 1e-12));
        out.push(CheckResult::new(
            format!("c1.{n}.eta0_squared_minus_identity"),
            report.eta_residual,
            Comparison::Equal,
            0.0,
        ));
        let id = crate::algebra::ComplexMatrix::identity(rep.dimension());
        let eta = &(&rep.beta(0).clone() * rep.beta(0)).scale_real(2.0) - &id;
        out.push(CheckResult::new(
            format!("c1.{n}.eta0_definition"),
            eta.max_abs_diff(rep.eta0()),
            Comparison::Equal,
            0.0,
        ));
        let tilde = (1..=3)
            .map(|i| {
                let c = &(rep.beta(0) * rep.beta(i)) - &(rep.beta(i) * rep.beta(0));
                c.max_abs_diff(rep.beta_tilde(i))
            })
            .fold(0.0, f64::max);
        out.push(CheckResult::new(format!("c1.{n}.beta_tilde_definition"), tilde, Comparison::Equal, 0.0));
    }
    Ok(out)
}

fn embedding(r: &mut SimRng) -> Result<Vec<CheckResult>> {
    let m = 1.3;
    let scalar = kg_superposition(random_scalar_modes(r, 4, m, 1.0), m)?;
    let proca = proca_superposition(random_proca_modes(r, 4, m, 1.0), m)?;
    let (es, ep) = (embed_spin0(scalar.clone()), embed_spin1(proca.clone()));
    let (mut res_s, mut res_p, mut dt_s, mut dt_p) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let x = random_event(r, 3.0);
        res_s = res_s.max(es.kemmer_residual(&x)?);
        res_p = res_p.max(ep.kemmer_residual(&x)?);
        let ts = energy_momentum(es.rep(), &es.psi(&x)?)?;
        dt_s = dt_s.max(ts.max_abs_diff(&kg_tensor(scalar.phi(&x), &scalar.dphi(&x), m)));
        let tp = energy_momentum(ep.rep(), &ep.psi(&x)?)?;
        dt_p = dt_p.max(tp.max_abs_diff(&proca_tensor(&proca.potential(&x), &proca.gradient(&x), m)));
    }
    Ok(vec![
        CheckResult::new("c2.spin0.kemmer_residual", res_s, Comparison::Below, 1e-9),
        CheckResult::new("c2.spin1.kemmer_residual", res_p, Comparison::Below, 1e-9),
        CheckResult::new("c2.spin0.theta_vs_kg_tensor", dt_s, Comparison::Below, 1e-10),
        CheckResult::new("c2.spin1.theta_vs_proca_tensor", dt_p, Comparison::Below, 1e-10),
    ])
}

fn random_embedded(r: &mut SimRng, spin1: bool) -> Result<Arc<dyn KemmerField>> {
    let count = 1 + (uniform(r, 0.0, 3.0) as usize);
    let m = uniform(r, 0.5, 2.0);
    Ok(if spin1 {
        Arc::new(embed_spin1(proca_superposition(random_proca_modes(r, count, m, 2.0), m)?))
    } else {
        Arc::new(embed_spin0(kg_superposition(random_scalar_modes(r, count, m, 2.0), m)?))
    })
}

fn causality(r: &mut SimRng, scale: Scale) -> Result<Vec<CheckResult>> {
    let pairs = scale.pick(10_000, 1_000);
    let (mut min_j0, mut min_jj) = (f64::INFINITY, f64::INFINITY);
    for k in 0..pairs {
        let f = random_embedded(r, k % 2 == 1)?;
        let psi = f.psi(&random_event(r, 5.0))?;
        let n = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|z| z / n).collect();
        let obs = random_observer(r, 0.99);
        let j = observer_current(&energy_momentum(f.rep(), &psi)?, &obs);
        min_j0 = min_j0.min(j[0]);
        min_jj = min_jj.min(j.norm_sq());
    }
    let runs = scale.pick(40, 8);
    let mut max_speed = 0.0f64;
    let mut audited = 0;
    for k in 0..runs {
        let f = random_embedded(r, k % 2 == 1)?;
        let cfg = GuidanceConfig::new(CurrentSource::KemmerEnergyMomentum, 0.05, 10_000, 1e-12)?
            .with_observer(random_observer(r, 0.9));
        let x0 = [uniform(r, -2.0, 2.0), uniform(r, -2.0, 2.0), uniform(r, -2.0, 2.0)];
        let tr = integrate(&GuideField::Single(f), &cfg, x0, 0.0, 5.0)?;
        let a = causality_audit(&tr);
        max_speed = max_speed.max(a.max_speed);
        audited += a.samples;
    }
    Ok(vec![
        CheckResult::new("c3.min_j0", min_j0, Comparison::AtLeast, -1e-10),
        CheckResult::new("c3.min_j_dot_j", min_jj, Comparison::AtLeast, -1e-10),
        CheckResult::new(
            format!("c3.max_trajectory_speed[{audited} samples]"),
            max_speed,
            Comparison::AtMost,
            1.0 + SPEED_TOLERANCE,
        ),
    ])
}

fn conservation(r: &mut SimRng) -> Result<Vec<CheckResult>> {
    let m = 1.0;
    let s = embed_spin0(kg_superposition(random_scalar_modes(r, 3, m, 1.0), m)?);
    let p = embed_spin1(proca_superposition(random_proca_modes(r, 3, m, 1.0), m)?);
    let obs = random_observer(r, 0.5);
    let mut single = f64::INFINITY;
    for _ in 0..5 {
        let x = random_event(r, 1.0);
        for f in [&s as &dyn KemmerField, &p] {
            for rep in [current_divergence(f, &obs, &x, 0.1)?, tensor_divergence(f, &x, 0.1, None)?] {
                single = single.min(rep.ratio.unwrap_or(0.0));
            }
        }
    }
    let a: Arc<dyn KemmerField> = Arc::new(embed_spin0(kg_superposition(random_scalar_modes(r, 2, m, 1.0), m)?));
    let b: Arc<dyn KemmerField> = Arc::new(embed_spin0(kg_superposition(random_scalar_modes(r, 2, m, 1.0), m)?));
    let pair = ProductSuperposition::new(vec![
        (C64::new(1.0, 0.0), vec![a.clone(), b.clone()]),
        (C64::new(0.0, 0.6), vec![b, a]),
    ])?;
    let mut two = f64::INFINITY;
    for _ in 0..3 {
        let t = uniform(r, -1.0, 1.0);
        let xs = [
            [uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0)],
            [uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0), uniform(r, -1.0, 1.0)],
        ];
        two = two.min(multi_divergence(&pair, &Observer::rest(), t, &xs, 0.1)?.ratio.unwrap_or(0.0));
    }
    Ok(vec![
        CheckResult::new(
            format!("c4.single_particle.min_ratio[order {:.3}]", single.log2()),
            single,
            Comparison::AtLeast,
            3.5,
        ),
        CheckResult::new(format!("c4.two_particle.min_ratio[order {:.3}]", two.log2()), two, Comparison::AtLeast, 3.5),
    ])
}

fn ambiguity(r: &mut SimRng, scale: Scale) -> Result<Vec<CheckResult>> {
    let observers = scale.pick(1_000, 200);
    let (mut contraction, mut density_shift, mut naive_shift, mut max_dj) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..20 {
        let f = random_embedded(r, k % 2 == 1)?;
        let theta = energy_momentum(f.rep(), &f.psi(&random_event(r, 2.0))?)?;
        let a = AmbiguityTensor::from_components(std::array::from_fn(|_| uniform(r, -1.0, 1.0)));
        let bar = perturbed_tensor(&theta, &a);
        for _ in 0..observers / 20 {
            let obs = random_observer(r, 0.95);
            let u = obs.four_velocity();
            contraction = contraction.max(a.tensor().double_contract(&u).abs());
            let e = theta.double_contract(&u);
            density_shift = density_shift.max((perturbed_energy_density(&theta, &a, &obs) - e).abs());
            naive_shift = naive_shift.max((bar.double_contract(&u) - e).abs() / e.abs().max(1.0));
            max_dj = max_dj.max(observer_current(&bar, &obs).max_abs_diff(&observer_current(&theta, &obs)));
        }
    }
    Ok(vec![
        CheckResult::new("c5.antisymmetric_contraction", contraction, Comparison::Equal, 0.0),
        CheckResult::new("c5.energy_density_shift", density_shift, Comparison::Equal, 0.0),
        CheckResult::new("c5.summed_tensor_density_shift_relative", naive_shift, Comparison::Below, 1e-14),
        CheckResult::new("c5.max_current_shift", max_dj, Comparison::Above, 0.0),
    ])
}

/// Events inside a packet of width `sigma` moving with `v`, over `t in [0, t_max]`.
fn packet_events(r: &mut SimRng, n: usize, sigma: f64, v: [f64; 3], t_max: f64) -> Vec<FourVector> {
    (0..n)
        .map(|_| {
            let t = uniform(r, 0.0, t_max);
            FourVector::new(
                t,
                v[0] * t + uniform(r, -sigma, sigma),
                v[1] * t + uniform(r, -sigma, sigma),
                v[2] * t + uniform(r, -sigma, sigma),
            )
        })
        .collect()
}

fn nr_sample(spec: &NrFieldSpec, x: &FourVector) -> Result<crate::fields::NrSample> {
    match spec.sample(x)? {
        FieldSample::Nr(s) => Ok(s),
        _ => unreachable!("nonrelativistic fields sample as Nr"),
    }
}

fn relative(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm3(&sub(a, b)) / norm3(b)
}

fn ratio3(j: &FourVector) -> [f64; 3] {
    [j[1] / j[0], j[2] / j[0], j[3] / j[0]]
}

const NR_SIGMA: f64 = 100.0;
const NR_K: f64 = 0.02;

fn nr_limit_spin0(r: &mut SimRng, scale: Scale) -> Result<Vec<CheckResult>> {
    let m = 1.0;
    let bound = 5.0 * (NR_K / m).powi(2);
    let spec = nr_gaussian(SpinKind::Spin0, m, NR_SIGMA, [0.0; 3], [NR_K, 0.0, 0.0], None)?;
    let lifted = NrLiftedScalar::new(spec.clone())?;
    let (mut e_theta, mut e_charge) = (0.0f64, 0.0f64);
    for x in packet_events(r, scale.pick(200, 40), NR_SIGMA, [NR_K / m, 0.0, 0.0], 2.0 * NR_SIGMA) {
        let v_nr = nr_current_spin0(&nr_sample(&spec, &x)?, m, None)?.velocity();
        let psi = lifted.psi(&x)?;
        let j = observer_current(&energy_momentum(lifted.rep(), &psi)?, &Observer::rest());
        e_theta = e_theta.max(relative(&ratio3(&j), &v_nr));
        let s = charge_current(lifted.rep(), &psi, m)?;
        e_charge = e_charge.max(relative(&ratio3(&s), &v_nr));
    }
    Ok(vec![
        CheckResult::new("c6.energy_momentum_velocity.relative_error", e_theta, Comparison::Below, bound),
        CheckResult::new("c6.charge_velocity.relative_error", e_charge, Comparison::Below, bound),
    ])
}

fn circular() -> [C64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, 0.0)]
}

fn nr_limit_spin1(r: &mut SimRng, scale: Scale) -> Result<Vec<CheckResult>> {
    let m = 1.0;
    let bound = 5.0 * (NR_K / m).powi(2);
    let spec = nr_gaussian(SpinKind::Spin1, m, NR_SIGMA, [0.0; 3], [NR_K, 0.0, 0.0], Some(circular()))?;
    let lifted = NrLiftedProca::new(spec.clone())?;
    let (mut err, mut without_spin) = (0.0f64, 0.0f64);
    for x in packet_events(r, scale.pick(200, 40), NR_SIGMA, [NR_K / m, 0.0, 0.0], 2.0 * NR_SIGMA) {
        let c = nr_current_spin1(&nr_sample(&spec, &x)?, m, None)?;
        let v_nr = c.velocity();
        let j = observer_current(&energy_momentum(lifted.rep(), &lifted.psi(&x)?)?, &Observer::rest());
        let v = ratio3(&j);
        err = err.max(relative(&v, &v_nr));
        let conv: [f64; 3] = std::array::from_fn(|i| (c.current[i] - c.spin_term[i]) / c.density);
        without_spin = without_spin.max(relative(&v, &conv));
    }
    let real_eps = [C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.8, 0.0)];
    let k = [0.3, -0.2, 0.1];
    let f1 = nr_gaussian(SpinKind::Spin1, m, 1.0, [0.0; 3], k, Some(real_eps))?;
    let f0 = nr_gaussian(SpinKind::Spin0, m, 1.0, [0.0; 3], k, None)?;
    let mut real_diff = 0.0f64;
    for _ in 0..100 {
        let x =
            FourVector::new(uniform(r, 0.0, 2.0), uniform(r, -2.0, 2.0), uniform(r, -2.0, 2.0), uniform(r, -2.0, 2.0));
        let a = nr_current_spin1(&nr_sample(&f1, &x)?, m, None)?;
        let b = nr_current_spin0(&nr_sample(&f0, &x)?, m, None)?;
        for i in 0..3 {
            real_diff = real_diff.max((a.current[i] - b.current[i]).abs()).max(a.spin_term[i].abs());
        }
        real_diff = real_diff.max((a.density - b.density).abs());
    }
    Ok(vec![
        CheckResult::new("c7.proca_velocity.relative_error", err, Comparison::Below, bound),
        CheckResult::new("c7.spin_term_needed.relative_error_without_it", without_spin, Comparison::Above, bound),
        CheckResult::new("c7.real_polarisation_vs_spin0.max_difference", real_diff, Comparison::Equal, 0.0),
    ])
}

/// Parameters of the two-slit comparison.
pub struct TwoSlit {
    pub mass: f64,
    pub separation: f64,
    pub sigma: f64,
    pub speed: f64,
    pub t_end: f64,
    pub dt: f64,
    pub trajectories: usize,
}

impl TwoSlit {
    pub fn standard(scale: Scale) -> Self {
        TwoSlit {
            mass: 1.0,
            separation: 4.0,
            sigma: 0.5,
            speed: 1.0,
            t_end: match scale {
                Scale::Full => 10.0,
                Scale::Fast => 5.0,
            },
            dt: 0.01,
            trajectories: scale.pick(100, 20),
        }
    }

    pub fn field(&self, kind: SpinKind) -> Result<GuideField> {
        let eps = (kind == SpinKind::Spin1).then(circular);
        Ok(GuideField::Nr(Arc::new(nr_two_slit(kind, self.mass, self.separation, self.sigma, self.speed, eps)?)))
    }

    pub fn config(&self, kind: SpinKind, dt: f64) -> Result<GuidanceConfig> {
        let source = match kind {
            SpinKind::Spin0 => CurrentSource::NrSpin0,
            SpinKind::Spin1 => CurrentSource::NrSpin1,
        };
        GuidanceConfig::new(source, dt, 1_000_000, 1e-14)
    }

    pub fn domain(&self) -> Result<DomainBox> {
        let y = 0.5 * self.separation + 4.0 * self.sigma;
        DomainBox::new([-1.0, -y, 0.0], [1.0, y, 0.0])
    }
}

/// Sign changes of y along a trajectory, counting a landing on y = 0.
pub fn axis_crossings(tr: &Trajectory) -> usize {
    let ys: Vec<f64> = tr.samples.iter().map(|s| s.positions[0][1]).collect();
    ys.windows(2).filter(|w| w[0].signum() != w[1].signum() || w[1] == 0.0).count()
}

fn max_pointwise(a: &Trajectory, b: &Trajectory) -> f64 {
    a.samples.iter().zip(&b.samples).map(|(p, q)| norm3(&sub(&p.positions[0], &q.positions[0]))).fold(0.0, f64::max)
}

fn spin_trajectories(scale: Scale, seed: u64) -> Result<Vec<CheckResult>> {
    let ts = TwoSlit::standard(scale);
    let (f0, f1) = (ts.field(SpinKind::Spin0)?, ts.field(SpinKind::Spin1)?);
    let (c0, c1) = (ts.config(SpinKind::Spin0, ts.dt)?, ts.config(SpinKind::Spin1, ts.dt)?);
    let ens = sample_ensemble(&f0, &c0, ts.domain()?, 0.0, ts.trajectories, derive_seed(seed, "two-slit"))?;
    let tr0 = propagate_ensemble(&f0, &c0, &ens, ts.t_end)?;
    let tr1 = propagate_ensemble(&f1, &c1, &ens, ts.t_end)?;
    let crossings: usize = tr0.iter().map(axis_crossings).sum();
    let deviation = tr0.iter().zip(&tr1).map(|(a, b)| max_pointwise(a, b)).fold(0.0, f64::max);
    // Integrator tolerance by step doubling on the spin-1 flow.
    let half = ts.config(SpinKind::Spin1, ts.dt / 2.0)?;
    let tolerance = ens
        .positions
        .par_iter()
        .zip(&tr1)
        .take(scale.pick(10, 4))
        .map(|(p, a)| {
            let b = integrate(&f1, &half, *p, 0.0, ts.t_end)?;
            let thinned = Trajectory { samples: b.samples.iter().step_by(2).cloned().collect(), ..b };
            Ok(max_pointwise(a, &thinned))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let incomplete =
        tr0.iter().chain(&tr1).filter(|t| t.termination != crate::guidance::Termination::Completed).count();
    Ok(vec![
        CheckResult::new(
            format!("c8.spin0.axis_crossings[{} trajectories]", tr0.len()),
            crossings as f64,
            Comparison::Equal,
            0.0,
        ),
        CheckResult::new(
            format!("c8.spin1_vs_spin0.max_deviation_over_10x_tolerance[tol {tolerance:.3e}]"),
            deviation / (10.0 * tolerance),
            Comparison::Above,
            1.0,
        ),
        CheckResult::new("c8.incomplete_trajectories", incomplete as f64, Comparison::Equal, 0.0),
    ])
}

/// Plane wave `exp(i (p x - E t))` on the periodic `[0, 8 pi)` lattice.
pub fn coupled_grid(nx: usize, potential: Potential) -> Result<GridField> {
    let l = 8.0 * std::f64::consts::PI;
    let p = 0.75;
    let e = (p * p + 1.0f64).sqrt();
    let params = GridParams::with_courant(0.0, l, nx, 2.0, 0.5, Boundary::Periodic);
    solve_coupled_kg_1p1(params, potential, 1.0, 1.0, &|x| C64::from_polar(1.0, p * x), &|x| {
        C64::new(0.0, -e) * C64::from_polar(1.0, p * x)
    })
}

fn minimal_coupling() -> Result<Vec<CheckResult>> {
    let l = 8.0 * std::f64::consts::PI;
    let (t, x, k) = (1.0, l / 3.0, 2);
    let mut out = Vec::new();
    for (label, pot) in [("coupled", Potential::UniformFieldTemporalGauge { field: 0.3 }), ("free", Potential::Free)] {
        let (c, f) = (coupled_grid(128, pot)?, coupled_grid(256, pot)?);
        let a = grid_refinement(&c, &f, t, x, k)?;
        let order = a.report.order().unwrap_or(f64::NAN);
        out.push(CheckResult::new(format!("c9.{label}.residual_order"), order, Comparison::AtLeast, 1.9));
        if label == "coupled" {
            let raw = a.raw[0].abs();
            out.push(CheckResult::new(
                format!("c9.coupled.raw_divergence_over_residual[raw {raw:.3e}]"),
                raw / a.report.max_residual(),
                Comparison::Above,
                10.0,
            ));
        }
    }
    let (m, e) = (1.3, 0.7);
    let mut worst = 0.0f64;
    for (k, v) in
        [([0.4, 0.0, 0.0], [0.25, 0.0, 0.0]), ([0.1, -0.3, 0.2], [-0.2, 0.5, 0.1]), ([0.0; 3], [0.3, 0.3, -0.3])]
    {
        let coupling = Coupling { vector_potential: v, charge: e };
        for (kind, eps) in [(SpinKind::Spin0, None), (SpinKind::Spin1, Some(circular()))] {
            let f = nr_plane_wave(kind, m, k, eps)?;
            let x = FourVector::new(0.7, 1.1, -0.4, 2.3);
            let s = nr_sample(&f, &x)?;
            let c = match kind {
                SpinKind::Spin0 => nr_current_spin0(&s, m, Some(coupling))?,
                SpinKind::Spin1 => nr_current_spin1(&s, m, Some(coupling))?,
            };
            for i in 0..3 {
                let want = (k[i] - e * v[i]) * c.density / m;
                worst = worst.max((c.current[i] - want).abs() / c.density);
            }
        }
    }
    out.push(CheckResult::new("c9.coupled_nr_plane_wave_current.max_error", worst, Comparison::Below, 1e-8));
    Ok(out)
}

/// Free Gaussian equivariance run: sampled at `t = 0`, propagated to `t_end`,
/// binned in x and compared with the density there.
pub struct Equivariance {
    pub sigma: f64,
    pub k: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n: usize,
    pub bins: usize,
}

impl Equivariance {
    pub fn standard(scale: Scale) -> Self {
        Equivariance { sigma: 1.0, k: 0.5, t_end: 2.0, dt: 0.02, n: scale.pick(10_000, 2_000), bins: 16 }
    }

    /// Returns the chi-square statistic and its p-value.
    pub fn run(&self, seed: u64) -> Result<(f64, f64)> {
        let m = 1.0;
        let spec = Arc::new(nr_gaussian(SpinKind::Spin0, m, self.sigma, [0.0; 3], [self.k, 0.0, 0.0], None)?);
        let field = GuideField::Nr(spec.clone());
        let cfg = GuidanceConfig::new(CurrentSource::NrSpin0, self.dt, 100_000, 1e-300)?;
        let w = 6.0 * self.sigma;
        let ens = sample_ensemble(
            &field,
            &cfg,
            DomainBox::new([-w, 0.0, 0.0], [w, 0.0, 0.0])?,
            0.0,
            self.n,
            derive_seed(seed, "equivariance"),
        )?;
        let trs = propagate_ensemble(&field, &cfg, &ens, self.t_end)?;
        let finals: Vec<f64> = trs.iter().filter_map(|t| t.last()).map(|s| s.positions[0][0]).collect();

        // Expected bin masses by quadrature of |psi|^2 on the line at t_end.
        let tau = self.t_end / (2.0 * m * self.sigma * self.sigma);
        let (centre, width) = (self.k / m * self.t_end, self.sigma * (1.0 + tau * tau).sqrt());
        let (lo, hi) = (centre - 3.0 * width, centre + 3.0 * width);
        let edges: Vec<f64> = (0..=self.bins).map(|b| lo + (hi - lo) * b as f64 / self.bins as f64).collect();
        let density = |x: f64| spec.density(&FourVector::new(self.t_end, x, 0.0, 0.0));
        let (a, b) = (centre - 10.0 * width, centre + 10.0 * width);
        let mass = |from: f64, to: f64| simpson(&density, from, to, 2000);
        let total = mass(a, b);
        let mut expected = Vec::with_capacity(self.bins);
        for i in 0..self.bins {
            let from = if i == 0 { a } else { edges[i] };
            let to = if i + 1 == self.bins { b } else { edges[i + 1] };
            expected.push(mass(from, to) / total * finals.len() as f64);
        }
        let mut counts = vec![0usize; self.bins];
        for x in &finals {
            let i = (((x - lo) / (hi - lo)) * self.bins as f64).floor();
            counts[(i.max(0.0) as usize).min(self.bins - 1)] += 1;
        }
        let stat: f64 = counts.iter().zip(&expected).map(|(&c, &e)| (c as f64 - e).powi(2) / e).sum();
        let chi = ChiSquared::new((self.bins - 1) as f64).expect("positive degrees of freedom");
        Ok((stat, 1.0 - chi.cdf(stat)))
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn equivariance(scale: Scale, seed: u64) -> Result<Vec<CheckResult>> {
    let eq = Equivariance::standard(scale);
    let (stat, p) = eq.run(seed)?;
    Ok(vec![CheckResult::new(format!("c10.chi_square_p_value[n {} stat {stat:.2}]", eq.n), p, Comparison::Above, 0.01)])
}
