use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::random::rng;

use super::{density_at, integrate, GuidanceConfig, GuideField, Trajectory};

/// Scan points per non-degenerate axis when estimating the supremum.
const SCAN_POINTS: usize = 33;
const SAFETY: f64 = 1.1;
const MAX_ATTEMPTS_PER_SAMPLE: usize = 100_000;

/// Axis-aligned box; an axis with `min == max` is held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl DomainBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|i| !(min[i] <= max[i]) || !min[i].is_finite() || !max[i].is_finite()) {
            return Err(Error::Config(format!("invalid domain box {min:?}..{max:?}")));
        }
        Ok(DomainBox { min, max })
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    fn scan(&self) -> Vec<[f64; 3]> {
        let axis = |i: usize| -> Vec<f64> {
            if self.min[i] == self.max[i] {
                vec![self.min[i]]
            } else {
                let w = self.max[i] - self.min[i];
                (0..SCAN_POINTS).map(|k| self.min[i] + w * k as f64 / (SCAN_POINTS - 1) as f64).collect()
            }
        };
        let (xs, ys, zs) = (axis(0), axis(1), axis(2));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

/// Initial positions drawn with probability proportional to the guiding
/// density at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub seed: u64,
    pub domain: DomainBox,
    pub t0: f64,
    pub positions: Vec<[f64; 3]>,
    /// Scanned maximum of the density, before the safety factor.
    pub supremum: f64,
    /// Accepted draws whose density exceeded the rejection envelope.
    pub overshoots: usize,
}

/// Rejection sampling against `1.1 x` the grid-scanned density maximum.
pub fn sample_ensemble(
    field: &GuideField,
    config: &GuidanceConfig,
    domain: DomainBox,
    t0: f64,
    n: usize,
    seed: u64,
) -> Result<Ensemble> {
    if field.particles() != 1 {
        return Err(Error::Config("ensembles are sampled for single-particle fields".into()));
    }
    if n == 0 {
        return Err(Error::Config("an ensemble needs at least one member".into()));
    }
    let scanned: Vec<f64> = domain
        .scan()
        .par_iter()
        .map(|p| density_at(field, config, t0, std::slice::from_ref(p)))
        .collect::<Result<_>>()?;
    let supremum = scanned.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(supremum > config.node_threshold()) {
        return Err(Error::DegenerateDensity);
    }
    let envelope = SAFETY * supremum;
    let mut r = rng(seed);
    let mut positions = Vec::with_capacity(n);
    let mut overshoots = 0;
    let mut attempts = 0usize;
    while positions.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(n) {
            return Err(Error::DegenerateDensity);
        }
        let p: [f64; 3] = std::array::from_fn(|i| {
            if domain.min[i] == domain.max[i] {
                domain.min[i]
            } else {
                r.gen_range(domain.min[i]..domain.max[i])
            }
        });
        let u: f64 = r.gen();
        let rho = density_at(field, config, t0, &[p])?.max(0.0);
        if u * envelope < rho {
            overshoots += usize::from(rho > envelope);
            positions.push(p);
        }
    }
    Ok(Ensemble { seed, domain, t0, positions, supremum, overshoots })
}

/// Integrates every member independently to `t1`, in parallel on the
/// current rayon pool. Output order matches `ensemble.positions`.
pub fn propagate_ensemble(
    field: &GuideField,
    config: &GuidanceConfig,
    ensemble: &Ensemble,
    t1: f64,
) -> Result<Vec<Trajectory>> {
    ensemble.positions.par_iter().map(|&p| integrate(field, config, p, ensemble.t0, t1)).collect()
}
