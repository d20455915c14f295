//! Bohmian trajectories: velocity fields from the currents, fixed-step RK4
//! integration, density-sampled ensembles and a causality audit.

mod ensemble;
mod output;

pub use ensemble::{propagate_ensemble, sample_ensemble, DomainBox, Ensemble};
pub use output::{write_summary, write_trajectories_csv, CSV_HEADER};

use std::sync::Arc;

use crate::algebra::{vec3, FourVector};
use crate::currents::{charge_current, multi_current, nr_current_spin0, nr_current_spin1, Coupling, Observer};
use crate::dkp::SpinKind;
use crate::error::{Error, Result};
use crate::fields::{FieldSample, KemmerField, MultiKemmerField, NrFieldSpec, Sampled};

/// Speeds up to this far above 1 are accepted as round-off.
pub const SPEED_TOLERANCE: f64 = 1e-9;

/// Which current defines the velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentSource {
    /// `j^mu = Theta^{mu nu} a_nu`.
    KemmerEnergyMomentum,
    /// `s^mu`; its time component can be negative, so this is a demonstrator.
    KemmerChargeDemo,
    NrSpin0,
    NrSpin1,
}

impl CurrentSource {
    pub fn name(self) -> &'static str {
        match self {
            CurrentSource::KemmerEnergyMomentum => "kemmer-energy-momentum",
            CurrentSource::KemmerChargeDemo => "kemmer-charge-demo",
            CurrentSource::NrSpin0 => "nr-spin0",
            CurrentSource::NrSpin1 => "nr-spin1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Self::KemmerEnergyMomentum, Self::KemmerChargeDemo, Self::NrSpin0, Self::NrSpin1]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown current source `{s}`")))
    }

    pub fn is_relativistic(self) -> bool {
        matches!(self, CurrentSource::KemmerEnergyMomentum | CurrentSource::KemmerChargeDemo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    source: CurrentSource,
    observer: Observer,
    dt: f64,
    max_steps: usize,
    node_threshold: f64,
    coupling: Option<Coupling>,
}

impl GuidanceConfig {
    pub fn new(source: CurrentSource, dt: f64, max_steps: usize, node_threshold: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::NonPositive { name: "dt", value: dt });
        }
        if !(node_threshold > 0.0) {
            return Err(Error::NonPositive { name: "node_threshold", value: node_threshold });
        }
        if max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(GuidanceConfig { source, observer: Observer::rest(), dt, max_steps, node_threshold, coupling: None })
    }

    pub fn with_observer(mut self, observer: Observer) -> Self {
        self.observer = observer;
        self
    }

    /// External vector potential entering the nonrelativistic currents.
    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = Some(coupling);
        self
    }

    pub fn with_node_threshold(mut self, node_threshold: f64) -> Result<Self> {
        if !(node_threshold > 0.0) {
            return Err(Error::NonPositive { name: "node_threshold", value: node_threshold });
        }
        self.node_threshold = node_threshold;
        Ok(self)
    }

    pub fn source(&self) -> CurrentSource {
        self.source
    }

    pub fn observer(&self) -> &Observer {
        &self.observer
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn node_threshold(&self) -> f64 {
        self.node_threshold
    }

    pub fn coupling(&self) -> Option<Coupling> {
        self.coupling
    }
}

/// The wavefunction a trajectory is guided by.
#[derive(Clone)]
pub enum GuideField {
    Single(Arc<dyn KemmerField>),
    Many(Arc<dyn MultiKemmerField>),
    Nr(Arc<NrFieldSpec>),
}

impl std::fmt::Debug for GuideField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GuideField::Single(k) => write!(f, "Single({:?}, {:?})", k.rep().kind(), k.provenance()),
            GuideField::Many(m) => write!(f, "Many({} particles)", m.particles()),
            GuideField::Nr(n) => write!(f, "Nr({:?})", n.kind()),
        }
    }
}

impl GuideField {
    pub fn particles(&self) -> usize {
        match self {
            GuideField::Many(m) => m.particles(),
            _ => 1,
        }
    }

    fn check(&self, config: &GuidanceConfig) -> Result<()> {
        let ok = match (self, config.source) {
            (GuideField::Single(_), CurrentSource::KemmerEnergyMomentum | CurrentSource::KemmerChargeDemo) => true,
            (GuideField::Many(_), CurrentSource::KemmerEnergyMomentum) => {
                if !config.observer.is_rest() {
                    return Err(Error::Config("many-particle guidance is defined in the rest frame only".into()));
                }
                true
            }
            (GuideField::Nr(n), CurrentSource::NrSpin0) => n.kind() == SpinKind::Spin0,
            (GuideField::Nr(n), CurrentSource::NrSpin1) => n.kind() == SpinKind::Spin1,
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!("current source `{}` does not apply to {self:?}", config.source.name())));
        }
        if config.coupling.is_some() && config.source.is_relativistic() {
            return Err(Error::Config("a coupling applies to nonrelativistic sources only".into()));
        }
        Ok(())
    }
}

/// Velocities of every particle and the guiding density at one event.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySample {
    pub velocities: Vec<[f64; 3]>,
    pub density: f64,
}

fn event(t: f64, p: &[f64; 3]) -> FourVector {
    FourVector::new(t, p[0], p[1], p[2])
}

fn ratio(j: &FourVector) -> [f64; 3] {
    [j[1] / j[0], j[2] / j[0], j[3] / j[0]]
}

/// `v^i = j^i / j^0` for every particle; fails with a node error when the
/// density does not exceed the configured threshold.
pub fn velocity_at(
    field: &GuideField,
    config: &GuidanceConfig,
    t: f64,
    positions: &[[f64; 3]],
) -> Result<VelocitySample> {
    field.check(config)?;
    if positions.len() != field.particles() {
        return Err(Error::DimensionMismatch { expected: field.particles(), found: positions.len() });
    }
    let (density, velocities) = match field {
        GuideField::Single(k) => {
            let psi = k.psi(&event(t, &positions[0]))?;
            match config.source {
                CurrentSource::KemmerChargeDemo => {
                    let s = charge_current(k.rep(), &psi, k.mass())?;
                    (s[0], vec![ratio(&s)])
                }
                _ => {
                    // Same routine as the N-particle case so N = 1 agrees bit for bit.
                    let mc = multi_current(&[k.rep()], &psi, &config.observer)?;
                    (mc.density, vec![mc.velocity(0)])
                }
            }
        }
        GuideField::Many(m) => {
            let psi = m.psi(t, positions)?;
            let reps = m.reps();
            let mc = multi_current(&reps, &psi, &config.observer)?;
            (mc.density, (0..reps.len()).map(|a| mc.velocity(a)).collect())
        }
        GuideField::Nr(n) => {
            let s = match n.sample(&event(t, &positions[0]))? {
                FieldSample::Nr(s) => s,
                _ => unreachable!("nonrelativistic fields sample as Nr"),
            };
            let c = match config.source {
                CurrentSource::NrSpin1 => nr_current_spin1(&s, n.mass(), config.coupling)?,
                _ => nr_current_spin0(&s, n.mass(), config.coupling)?,
            };
            (c.density, vec![c.velocity()])
        }
    };
    if !(density > config.node_threshold) {
        return Err(Error::Node { t, density });
    }
    Ok(VelocitySample { velocities, density })
}

/// Guiding density `j^0` at one configuration.
pub fn density_at(field: &GuideField, config: &GuidanceConfig, t: f64, positions: &[[f64; 3]]) -> Result<f64> {
    match velocity_at(field, config, t, positions) {
        Ok(v) => Ok(v.density),
        Err(Error::Node { density, .. }) => Ok(density),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    NodeAbort,
    DomainExit,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::NodeAbort => "node-abort",
            Termination::DomainExit => "domain-exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub density: f64,
    /// Euclidean norm of each particle's velocity.
    pub speeds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub source: CurrentSource,
    pub particles: usize,
    pub samples: Vec<TrajectorySample>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

fn record(t: f64, positions: Vec<[f64; 3]>, v: VelocitySample) -> TrajectorySample {
    let speeds = v.velocities.iter().map(vec3::norm).collect();
    TrajectorySample { t, positions, velocities: v.velocities, density: v.density, speeds }
}

fn axpy(x: &[[f64; 3]], h: f64, v: &[[f64; 3]]) -> Vec<[f64; 3]> {
    x.iter().zip(v).map(|(p, u)| std::array::from_fn(|i| p[i] + h * u[i])).collect()
}

fn stop(e: Error) -> Result<Termination> {
    match e {
        Error::Node { .. } => Ok(Termination::NodeAbort),
        Error::OutOfDomain { .. } => Ok(Termination::DomainExit),
        e => Err(e),
    }
}

/// Integrates all positions of `field` with classical RK4 from `t0` to `t1`
/// using the largest uniform step not exceeding `config.dt`.
pub fn integrate_many(
    field: &GuideField,
    config: &GuidanceConfig,
    x0: &[[f64; 3]],
    t0: f64,
    t1: f64,
) -> Result<Trajectory> {
    field.check(config)?;
    if positions_invalid(x0) {
        return Err(Error::Config("initial positions must be finite".into()));
    }
    if !(t1 >= t0) {
        return Err(Error::Config(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let span = t1 - t0;
    let steps = if span == 0.0 { 0 } else { ((span / config.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize };
    if steps > config.max_steps {
        return Err(Error::Config(format!("{steps} steps needed, max_steps is {}", config.max_steps)));
    }
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let vel = |t: f64, x: &[[f64; 3]]| velocity_at(field, config, t, x);

    let mut x = x0.to_vec();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut v = match vel(t0, &x) {
        Ok(v) => v,
        Err(e) => return Ok(Trajectory { source: config.source, particles: x0.len(), samples, termination: stop(e)? }),
    };
    samples.push(record(t0, x.clone(), v.clone()));
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let t_next = if n + 1 == steps { t1 } else { t0 + (n + 1) as f64 * h };
        let step = (|| -> Result<(Vec<[f64; 3]>, VelocitySample)> {
            let k1 = &v.velocities;
            let k2 = vel(t + 0.5 * h, &axpy(&x, 0.5 * h, k1))?.velocities;
            let k3 = vel(t + 0.5 * h, &axpy(&x, 0.5 * h, &k2))?.velocities;
            let k4 = vel(t + h, &axpy(&x, h, &k3))?.velocities;
            let next: Vec<[f64; 3]> = (0..x.len())
                .map(|a| {
                    std::array::from_fn(|i| x[a][i] + h / 6.0 * (k1[a][i] + 2.0 * k2[a][i] + 2.0 * k3[a][i] + k4[a][i]))
                })
                .collect();
            let vn = vel(t_next, &next)?;
            Ok((next, vn))
        })();
        match step {
            Ok((next, vn)) => {
                x = next;
                v = vn;
                samples.push(record(t_next, x.clone(), v.clone()));
            }
            Err(e) => {
                return Ok(Trajectory { source: config.source, particles: x0.len(), samples, termination: stop(e)? })
            }
        }
    }
    Ok(Trajectory { source: config.source, particles: x0.len(), samples, termination: Termination::Completed })
}

fn positions_invalid(x: &[[f64; 3]]) -> bool {
    x.iter().flatten().any(|c| !c.is_finite())
}

/// Single-particle form of [`integrate_many`].
pub fn integrate(field: &GuideField, config: &GuidanceConfig, x0: [f64; 3], t0: f64, t1: f64) -> Result<Trajectory> {
    integrate_many(field, config, &[x0], t0, t1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalityReport {
    /// False for nonrelativistic trajectories, which carry no speed bound.
    pub applicable: bool,
    pub max_speed: f64,
    /// Samples with speed above `1 + SPEED_TOLERANCE`.
    pub superluminal: usize,
    pub samples: usize,
}

impl CausalityReport {
    pub fn passed(&self) -> bool {
        !self.applicable || self.superluminal == 0
    }
}

pub fn causality_audit(trajectory: &Trajectory) -> CausalityReport {
    let speeds = trajectory.samples.iter().flat_map(|s| s.speeds.iter().copied());
    let (mut max_speed, mut superluminal, mut samples) = (0.0f64, 0, 0);
    for s in speeds {
        max_speed = max_speed.max(s);
        superluminal += usize::from(s > 1.0 + SPEED_TOLERANCE);
        samples += 1;
    }
    CausalityReport { applicable: trajectory.source.is_relativistic(), max_speed, superluminal, samples }
}
