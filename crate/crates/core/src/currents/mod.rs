//! Energy-momentum tensors, charge currents, observer currents and their
//! nonrelativistic and many-particle forms, plus divergence audits.

mod audit;
mod multi;
mod nr;
mod reference;

pub use audit::{
    charge_divergence, current_divergence, divergence_audit, grid_divergence, grid_refinement, multi_divergence,
    tensor_divergence, DivergenceReport, GridAudit,
};
pub use multi::{multi_current, MultiCurrent};
pub use nr::{nr_current_spin0, nr_current_spin1, spin_density, Coupling, NrCurrent};
pub use reference::{kg_charge, kg_tensor, proca_charge, proca_tensor};

use crate::algebra::{boost, FourVector, Tensor2, C64};
use crate::dkp::DkpRep;
use crate::error::{Error, Result};

/// Imaginary parts of provably real bilinears are discarded below this
/// fraction of `max(1, psi^dagger psi)`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Unit, future-directed observer four-velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observer {
    a: FourVector,
}

impl Observer {
    pub fn new(a: FourVector) -> Result<Self> {
        let n = a.norm_sq();
        if !((n - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidObserver(format!("a.a = {n}, expected 1")));
        }
        if !(a[0] > 0.0) {
            return Err(Error::InvalidObserver(format!("a^0 = {} is not positive", a[0])));
        }
        Ok(Observer { a })
    }

    pub fn rest() -> Self {
        Observer { a: FourVector::new(1.0, 0.0, 0.0, 0.0) }
    }

    /// Observer moving with three-velocity `beta`.
    pub fn moving(beta: [f64; 3]) -> Result<Self> {
        let l = boost(beta)?;
        Ok(Observer { a: l.apply(&FourVector::new(1.0, 0.0, 0.0, 0.0)) })
    }

    pub fn four_velocity(&self) -> FourVector {
        self.a
    }

    pub fn is_rest(&self) -> bool {
        self.a.0 == [1.0, 0.0, 0.0, 0.0]
    }
}

pub(crate) fn real_part(z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOLERANCE * scale.max(1.0) {
        return Err(Error::Consistency { imaginary: z.im });
    }
    Ok(z.re)
}

fn norm_sq(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

fn check_dim(rep: &DkpRep, psi: &[C64]) -> Result<()> {
    if psi.len() != rep.dimension() {
        return Err(Error::DimensionMismatch { expected: rep.dimension(), found: psi.len() });
    }
    Ok(())
}

/// `Theta^{mu nu} = psi_bar (beta^mu beta^nu + beta^nu beta^mu - g^{mu nu}) psi`.
pub fn energy_momentum(rep: &DkpRep, psi: &[C64]) -> Result<Tensor2> {
    check_dim(rep, psi)?;
    let scale = norm_sq(psi);
    let mut t = Tensor2::ZERO;
    for mu in 0..4 {
        for nu in mu..4 {
            let v = real_part(rep.theta_operator(mu, nu).quadratic_form(psi)?, scale)?;
            t.c[mu][nu] = v;
            t.c[nu][mu] = v;
        }
    }
    Ok(t)
}

/// `s^mu = psi_bar beta^mu psi / m`.
pub fn charge_current(rep: &DkpRep, psi: &[C64], mass: f64) -> Result<FourVector> {
    if !(mass > 0.0) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    check_dim(rep, psi)?;
    let scale = norm_sq(psi);
    let mut s = FourVector::ZERO;
    for mu in 0..4 {
        s[mu] = real_part(rep.charge_operator(mu).quadratic_form(psi)?, scale)? / mass;
    }
    Ok(s)
}

/// `j^mu = Theta^{mu nu} a_nu`.
pub fn observer_current(theta: &Tensor2, obs: &Observer) -> FourVector {
    theta.contract_second(&obs.a)
}

/// Constant antisymmetric tensor that may be added to Theta without
/// spoiling conservation or any observer's energy density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityTensor {
    t: Tensor2,
}

impl AmbiguityTensor {
    /// Accepts `t` when `max |t + t^T| <= 1e-12` and stores its exact antisymmetric part.
    pub fn new(t: Tensor2) -> Result<Self> {
        let residual = t.antisymmetry_residual();
        if residual > 1e-12 {
            return Err(Error::NotAntisymmetric { residual });
        }
        Ok(AmbiguityTensor { t: t.antisymmetric_part() })
    }

    /// Builds `A` from `A^{01}, A^{02}, A^{03}, A^{12}, A^{13}, A^{23}`.
    pub fn from_components(c: [f64; 6]) -> Self {
        let mut t = Tensor2::ZERO;
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for ((mu, nu), v) in pairs.into_iter().zip(c) {
            t.c[mu][nu] = v;
            t.c[nu][mu] = -v;
        }
        AmbiguityTensor { t }
    }

    pub fn tensor(&self) -> &Tensor2 {
        &self.t
    }
}

pub fn perturbed_tensor(theta: &Tensor2, a: &AmbiguityTensor) -> Tensor2 {
    *theta + a.t
}

/// `(Theta + A)^{mu nu} a_mu a_nu` evaluated term by term. The antisymmetric
/// contraction is exactly zero, so this equals the unperturbed energy density
/// bit for bit.
pub fn perturbed_energy_density(theta: &Tensor2, a: &AmbiguityTensor, obs: &Observer) -> f64 {
    theta.double_contract(&obs.a) + a.t.double_contract(&obs.a)
}

/// `f^nu = e F^{nu mu} s_mu`.
pub fn lorentz_force_density(f: &Tensor2, s: &FourVector, charge: f64) -> Result<FourVector> {
    let residual = f.antisymmetry_residual();
    if residual > 1e-12 {
        return Err(Error::NotAntisymmetric { residual });
    }
    Ok(f.contract_second(s).scale(charge))
}

/// Field tensor of a 1+1D uniform electric field, `F^{10} = -F^{01} = field`.
pub fn uniform_field_tensor(field: f64) -> Tensor2 {
    let mut f = Tensor2::ZERO;
    f.c[1][0] = field;
    f.c[0][1] = -field;
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::is_future_causal;
    use crate::dkp::{representation, SpinKind};
    use crate::fields::{embed_spin0, kg_superposition, KemmerField, ScalarMode};
    use crate::random::{random_observer, random_state, rng};
    use proptest::prelude::*;

    const KINDS: [SpinKind; 2] = [SpinKind::Spin0, SpinKind::Spin1];

    #[test]
    fn energy_density_is_norm_and_zero_state_gives_zero() {
        let mut r = rng(30);
        for kind in KINDS {
            let rep = representation(kind);
            for _ in 0..100 {
                let psi = random_state(&mut r, rep.dimension());
                let t = energy_momentum(rep, &psi).unwrap();
                assert!((t.c[0][0] - norm_sq(&psi)).abs() < 1e-12 * norm_sq(&psi).max(1.0));
            }
            let zero = vec![C64::new(0.0, 0.0); rep.dimension()];
            assert_eq!(energy_momentum(rep, &zero).unwrap(), Tensor2::ZERO);
            assert_eq!(charge_current(rep, &zero, 1.0).unwrap(), FourVector::ZERO);
            assert!(matches!(energy_momentum(rep, &[C64::new(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
        }
    }

    #[test]
    fn tensor_is_symmetric_without_forcing() {
        // Compute both triangles independently of the symmetric fill above.
        let mut r = rng(31);
        for kind in KINDS {
            let rep = representation(kind);
            for _ in 0..1000 {
                let psi = random_state(&mut r, rep.dimension());
                for mu in 0..4 {
                    for nu in 0..4 {
                        let a = rep.theta_operator(mu, nu).quadratic_form(&psi).unwrap();
                        let b = rep.theta_operator(nu, mu).quadratic_form(&psi).unwrap();
                        assert!((a - b).norm() < 1e-12 * norm_sq(&psi).max(1.0));
                        assert!(a.im.abs() < 1e-12 * norm_sq(&psi).max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn plane_wave_velocity_and_tensor_components() {
        let (p, m): (f64, f64) = (0.6, 0.8);
        let e = (p * p + m * m).sqrt();
        let spec = kg_superposition(vec![ScalarMode::on_shell(C64::new(1.0, 0.0), [p, 0.0, 0.0], m)], m).unwrap();
        let f = embed_spin0(spec);
        let t = energy_momentum(f.rep(), &f.psi(&FourVector::new(0.3, 1.0, 2.0, 3.0)).unwrap()).unwrap();
        // Theta^{10} = 2 E p, Theta^{00} = 2 E^2 for unit amplitude.
        assert!((t.c[1][0] - 2.0 * e * p).abs() < 1e-12);
        assert!((t.c[0][0] - 2.0 * e * e).abs() < 1e-12);
        assert!((t.c[1][0] / t.c[0][0] - p / e).abs() < 1e-10);
    }

    #[test]
    fn kg_charge_matches_direct_formula_and_can_be_negative() {
        let m = 1.0;
        for sign in [1.0, -1.0] {
            let mode = if sign > 0.0 {
                ScalarMode::on_shell(C64::new(1.0, 0.0), [0.3, 0.0, 0.0], m)
            } else {
                ScalarMode::negative_frequency(C64::new(1.0, 0.0), [0.0; 3], m)
            };
            let spec = kg_superposition(vec![mode], m).unwrap();
            let x = FourVector::new(0.2, 0.1, 0.0, 0.0);
            let f = embed_spin0(spec.clone());
            let s = charge_current(f.rep(), &f.psi(&x).unwrap(), m).unwrap();
            let d = kg_charge(spec.phi(&x), &spec.dphi(&x));
            assert!(s.max_abs_diff(&d) < 1e-10);
            assert_eq!(s[0] > 0.0, sign > 0.0);
            if sign > 0.0 {
                assert!((s[0] - 2.0 * mode.momentum[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rest_observer_sees_energy_density() {
        let mut r = rng(32);
        let rep = representation(SpinKind::Spin1);
        let psi = random_state(&mut r, 10);
        let t = energy_momentum(rep, &psi).unwrap();
        let j = observer_current(&t, &Observer::rest());
        assert_eq!(j[0], t.c[0][0]);
        assert_eq!(observer_current(&Tensor2::ZERO, &Observer::rest()), FourVector::ZERO);
    }

    #[test]
    fn future_causality_over_random_states_and_observers() {
        let mut r = rng(33);
        for kind in KINDS {
            let rep = representation(kind);
            for _ in 0..1000 {
                let psi = random_state(&mut r, rep.dimension());
                let obs = random_observer(&mut r, 0.99);
                let t = energy_momentum(rep, &psi).unwrap();
                let j = observer_current(&t, &obs);
                assert!(is_future_causal(&j, 1e-10), "{j:?}");
                assert!(t.column(0).norm_sq() >= -1e-10);
            }
        }
    }

    #[test]
    fn observer_validation() {
        assert!(Observer::new(FourVector::new(1.0, 0.0, 0.0, 0.0)).is_ok());
        assert!(Observer::new(FourVector::new(-1.0, 0.0, 0.0, 0.0)).is_err());
        assert!(Observer::new(FourVector::new(2.0, 0.0, 0.0, 0.0)).is_err());
        assert!(Observer::moving([0.6, 0.0, 0.0]).is_ok());
        assert!(Observer::moving([1.0, 0.0, 0.0]).is_err());
        let g = 1.25;
        let a = Observer::moving([0.6, 0.0, 0.0]).unwrap().four_velocity();
        assert!(a.max_abs_diff(&FourVector::new(g, 0.6 * g, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn ambiguity_shifts_flux_but_not_density() {
        let mut r = rng(34);
        let rep = representation(SpinKind::Spin0);
        let t = energy_momentum(rep, &random_state(&mut r, 5)).unwrap();
        let a = AmbiguityTensor::from_components([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(a.tensor().c[1][0], 1.0);
        let tb = perturbed_tensor(&t, &a);
        let rest = Observer::rest();
        let (j, jb) = (observer_current(&t, &rest), observer_current(&tb, &rest));
        assert_eq!(j[0], jb[0]);
        assert!((jb[1] - j[1] - 1.0).abs() < 1e-15);
        assert_eq!(perturbed_tensor(&t, &AmbiguityTensor::from_components([0.0; 6])), t);
        for _ in 0..1000 {
            let obs = random_observer(&mut r, 0.99).four_velocity();
            assert_eq!(a.tensor().double_contract(&obs), 0.0);
        }
        let mut bad = Tensor2::ZERO;
        bad.c[0][1] = 1.0;
        assert!(AmbiguityTensor::new(bad).is_err());
    }

    #[test]
    fn lorentz_force_contractions() {
        let s = FourVector::new(2.0, 0.0, 0.0, 0.0);
        let f = lorentz_force_density(&uniform_field_tensor(0.3), &s, 1.5).unwrap();
        // f^1 = e F^{10} s_0 = e E s^0.
        assert!((f[1] - 1.5 * 0.3 * 2.0).abs() < 1e-15);
        assert_eq!(f[0], 0.0);
        assert_eq!(lorentz_force_density(&Tensor2::ZERO, &s, 1.0).unwrap(), FourVector::ZERO);
        let mut bad = Tensor2::ZERO;
        bad.c[1][0] = 1.0;
        assert!(lorentz_force_density(&bad, &s, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn force_is_orthogonal_to_charge(
            c in proptest::array::uniform6(-2.0f64..2.0),
            s in proptest::array::uniform4(-2.0f64..2.0),
        ) {
            let a = AmbiguityTensor::from_components(c);
            let s = FourVector(s);
            let f = lorentz_force_density(a.tensor(), &s, 0.7).unwrap();
            prop_assert!(f.dot(&s).abs() < 1e-12);
        }

        #[test]
        fn antisymmetric_perturbation_keeps_every_energy_density(
            c in proptest::array::uniform6(-5.0f64..5.0),
            beta in proptest::array::uniform3(-0.5f64..0.5),
        ) {
            let a = AmbiguityTensor::from_components(c);
            let obs = Observer::moving(beta).unwrap().four_velocity();
            prop_assert_eq!(a.tensor().double_contract(&obs), 0.0);
        }
    }
}
