use crate::algebra::{FourVector, C64, METRIC};
use crate::dkp::{gamma_contracted, product_dimension, DkpRep, LiftedOp, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};

use super::{real_part, Observer};

/// Observer-contracted slices `j^{0..mu_alpha..0}` of the N-particle tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCurrent {
    /// `per_particle[alpha][mu] = j^{0..mu_alpha..0}`; every time component
    /// equals `density`.
    pub per_particle: Vec<FourVector>,
    pub density: f64,
}

impl MultiCurrent {
    pub fn particles(&self) -> usize {
        self.per_particle.len()
    }

    /// `v_alpha^i = j^{0..i_alpha..0} / j^{0..0}`.
    pub fn velocity(&self, alpha: usize) -> [f64; 3] {
        let j = &self.per_particle[alpha];
        [j[1] / self.density, j[2] / self.density, j[3] / self.density]
    }
}

/// Computes every `j^{0..mu_alpha..0} = psi^dagger Gamma^(1)_{0 nu} a^nu ...
/// Gamma^(alpha)_{mu nu} a^nu ... psi` without forming the rank-2N tensor.
pub fn multi_current(reps: &[&DkpRep], psi: &[C64], obs: &Observer) -> Result<MultiCurrent> {
    let dims: Vec<usize> = reps.iter().map(|r| r.dimension()).collect();
    let total = product_dimension(&dims).filter(|&d| d <= DEFAULT_DIMENSION_CAP).ok_or(Error::CapacityExceeded {
        dimension: product_dimension(&dims).unwrap_or(usize::MAX),
        cap: DEFAULT_DIMENSION_CAP,
    })?;
    if psi.len() != total {
        return Err(Error::DimensionMismatch { expected: total, found: psi.len() });
    }
    let a = obs.four_velocity().0;
    let n = reps.len();
    let time_ops: Vec<LiftedOp> = (0..n)
        .map(|b| LiftedOp::new(dims.clone(), b + 1, gamma_contracted(reps[b], 0, &a), DEFAULT_DIMENSION_CAP))
        .collect::<Result<_>>()?;
    let scale: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let dot = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(x, y)| x.conj() * y).sum() };

    let mut per_particle = Vec::with_capacity(n);
    for alpha in 0..n {
        let mut chi = psi.to_vec();
        for (b, op) in time_ops.iter().enumerate() {
            if b != alpha {
                chi = op.apply(&chi)?;
            }
        }
        let mut j = FourVector::ZERO;
        for mu in 0..4 {
            let op =
                LiftedOp::new(dims.clone(), alpha + 1, gamma_contracted(reps[alpha], mu, &a), DEFAULT_DIMENSION_CAP)?;
            j[mu] = METRIC[mu] * real_part(dot(psi, &op.apply(&chi)?), scale)?;
        }
        per_particle.push(j);
    }
    let density = per_particle[0][0];
    for j in &mut per_particle {
        if (j[0] - density).abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::Consistency { imaginary: j[0] - density });
        }
        j[0] = density;
    }
    Ok(MultiCurrent { per_particle, density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::is_future_causal;
    use crate::currents::{energy_momentum, observer_current};
    use crate::dkp::{representation, SpinKind};
    use crate::fields::kron_vec as kron;
    use crate::random::{random_observer, random_state, rng};

    #[test]
    fn product_state_density_factorises() {
        let mut r = rng(50);
        let (r0, r1) = (representation(SpinKind::Spin0), representation(SpinKind::Spin1));
        let (a, b) = (random_state(&mut r, 5), random_state(&mut r, 10));
        let psi = kron(&a, &b);
        let mc = multi_current(&[r0, r1], &psi, &Observer::rest()).unwrap();
        let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        assert!((mc.density - na * nb).abs() < 1e-12 * na * nb);
    }

    #[test]
    fn product_state_velocity_is_single_particle_velocity() {
        // For psi = a (x) b and any observer, particle 1 sees
        // j_b^0 * (Theta_a^{mu nu} a_nu).
        let mut r = rng(51);
        let rep = representation(SpinKind::Spin1);
        for _ in 0..20 {
            let (a, b) = (random_state(&mut r, 10), random_state(&mut r, 10));
            let obs = random_observer(&mut r, 0.9);
            let mc = multi_current(&[rep, rep], &kron(&a, &b), &obs).unwrap();
            let ja = observer_current(&energy_momentum(rep, &a).unwrap(), &obs);
            let jb = observer_current(&energy_momentum(rep, &b).unwrap(), &obs);
            let want = ja.scale(jb[0]);
            assert!(mc.per_particle[0].max_abs_diff(&want) < 1e-10 * want[0].abs().max(1.0));
            let want2 = jb.scale(ja[0]);
            assert!(mc.per_particle[1].max_abs_diff(&want2) < 1e-10 * want2[0].abs().max(1.0));
        }
    }

    #[test]
    fn entangled_states_stay_future_causal() {
        let mut r = rng(52);
        let rep = representation(SpinKind::Spin0);
        for _ in 0..1000 {
            let psi = random_state(&mut r, 25);
            let obs = random_observer(&mut r, 0.9);
            let mc = multi_current(&[rep, rep], &psi, &obs).unwrap();
            assert!(mc.density >= -1e-10);
            for j in &mc.per_particle {
                assert!(is_future_causal(j, 1e-10), "{j:?}");
            }
        }
    }

    #[test]
    fn wrong_dimension_rejected() {
        let rep = representation(SpinKind::Spin0);
        let psi = vec![C64::new(1.0, 0.0); 24];
        assert!(matches!(multi_current(&[rep, rep], &psi, &Observer::rest()), Err(Error::DimensionMismatch { .. })));
    }
}
