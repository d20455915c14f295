//! Wavefunctions: exact Klein-Gordon and Proca superpositions, their Kemmer
//! embeddings, nonrelativistic packets, a 1+1D coupled Klein-Gordon lattice
//! solver and N-particle product states.

mod grid;
mod multi;
mod nr;
mod proca;
mod scalar;

pub use grid::{solve_coupled_kg_1p1, Boundary, GridField, GridKemmer, GridParams, GridSample, Potential};
#[cfg(test)]
pub(crate) use multi::kron_vec;
pub use multi::{MultiKemmerField, ProductSuperposition};
pub use nr::{
    nr_gaussian, nr_plane_wave, nr_two_slit, NrFieldSpec, NrJet, NrLiftedProca, NrLiftedScalar, NrSample, Profile1d,
    SpinEigenSample,
};
pub use proca::{proca_superposition, ProcaFieldSpec, ProcaMode, ProcaSample};
pub use scalar::{kg_superposition, ScalarFieldSpec, ScalarMode, ScalarSample};

use crate::algebra::{levi_civita, FourVector, C64};
use crate::dkp::{kemmer_residual, representation, DkpRep, SpinKind};
use crate::error::Result;

/// Default step for centered finite differences of analytic evaluators.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    EmbeddedScalar,
    EmbeddedProca,
    /// Relativistic field built from a nonrelativistic packet by restoring
    /// the rest-energy phase. Not an exact solution.
    NrLifted,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMethod {
    Analytic,
    /// Centered differences with the given time and space steps; one-sided
    /// second-order stencils are used at lattice boundaries.
    FiniteDifference {
        dt: f64,
        dx: f64,
    },
}

/// A Kemmer wavefunction evaluated at spacetime events.
pub trait KemmerField: Send + Sync {
    fn rep(&self) -> &'static DkpRep;

    fn mass(&self) -> f64;

    fn provenance(&self) -> Provenance;

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>>;

    /// d psi / d x^mu for mu = 0..3.
    fn psi_derivatives(&self, x: &FourVector) -> Result<[Vec<C64>; 4]> {
        centered_derivatives(|y| self.psi(y), x, DEFAULT_FD_STEP)
    }

    /// Relative Kemmer-equation residual |i beta.d psi - m psi| / (m |psi|).
    fn kemmer_residual(&self, x: &FourVector) -> Result<f64> {
        let psi = self.psi(x)?;
        let d = self.psi_derivatives(x)?;
        let res = kemmer_residual(self.rep(), self.mass(), &psi, &d)?;
        let num = res.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let den = psi.iter().fold(0.0f64, |m, z| m.max(z.norm())) * self.mass();
        Ok(num / den.max(f64::MIN_POSITIVE))
    }
}

/// Centered differences of a vector-valued evaluator in all four directions.
pub fn centered_derivatives<F>(f: F, x: &FourVector, h: f64) -> Result<[Vec<C64>; 4]>
where
    F: Fn(&FourVector) -> Result<Vec<C64>>,
{
    let mut out: [Vec<C64>; 4] = Default::default();
    for (mu, slot) in out.iter_mut().enumerate() {
        let mut xp = *x;
        let mut xm = *x;
        xp[mu] += h;
        xm[mu] -= h;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        *slot = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    }
    Ok(out)
}

/// `(d_0 phi, d_1 phi, d_2 phi, d_3 phi, m phi)`; `dphi` holds covariant
/// derivatives d_mu phi (or D_mu phi for coupled fields).
pub fn spin0_components(phi: C64, dphi: &[C64; 4], mass: f64) -> Vec<C64> {
    vec![dphi[0], dphi[1], dphi[2], dphi[3], phi * mass]
}

/// `(-E, B, m A, -m A^0)` from the potential `a[nu] = A^nu` and its
/// derivatives `da[mu][nu] = d_mu A^nu`, with `E = -grad A^0 - d_0 A` and
/// `B = curl A`.
pub fn spin1_components(a: &[C64; 4], da: &[[C64; 4]; 4], mass: f64) -> Vec<C64> {
    let mut psi = vec![C64::new(0.0, 0.0); 10];
    for i in 0..3 {
        let e = -da[i + 1][0] - da[0][i + 1];
        let mut b = C64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                let s = levi_civita(i, j, k);
                if s != 0.0 {
                    b += da[j + 1][k + 1] * s;
                }
            }
        }
        psi[i] = -e;
        psi[3 + i] = b;
        psi[6 + i] = a[i + 1] * mass;
    }
    psi[9] = -a[0] * mass;
    psi
}

/// Any sample produced by [`Sampled::sample`].
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSample {
    Scalar(ScalarSample),
    Proca(ProcaSample),
    Nr(NrSample),
    Grid(GridSample),
}

impl FieldSample {
    pub fn method(&self) -> DerivativeMethod {
        match self {
            FieldSample::Scalar(s) => s.method,
            FieldSample::Proca(s) => s.method,
            FieldSample::Nr(s) => s.method,
            FieldSample::Grid(s) => s.method,
        }
    }
}

/// Deterministic evaluation of a field and its first derivatives at an event.
pub trait Sampled {
    fn sample(&self, x: &FourVector) -> Result<FieldSample>;
}

pub fn sample<F: Sampled + ?Sized>(field: &F, x: &FourVector) -> Result<FieldSample> {
    field.sample(x)
}

/// Kemmer embedding of a Klein-Gordon superposition.
#[derive(Debug, Clone)]
pub struct EmbeddedScalar {
    spec: ScalarFieldSpec,
}

pub fn embed_spin0(spec: ScalarFieldSpec) -> EmbeddedScalar {
    EmbeddedScalar { spec }
}

impl EmbeddedScalar {
    pub fn spec(&self) -> &ScalarFieldSpec {
        &self.spec
    }
}

impl KemmerField for EmbeddedScalar {
    fn rep(&self) -> &'static DkpRep {
        representation(SpinKind::Spin0)
    }

    fn mass(&self) -> f64 {
        self.spec.mass()
    }

    fn provenance(&self) -> Provenance {
        Provenance::EmbeddedScalar
    }

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>> {
        Ok(spin0_components(self.spec.phi(x), &self.spec.dphi(x), self.spec.mass()))
    }

    fn psi_derivatives(&self, x: &FourVector) -> Result<[Vec<C64>; 4]> {
        let d1 = self.spec.dphi(x);
        let d2 = self.spec.d2phi(x);
        Ok(std::array::from_fn(|nu| spin0_components(d1[nu], &d2[nu], self.spec.mass())))
    }
}

/// Kemmer embedding of a Proca superposition.
#[derive(Debug, Clone)]
pub struct EmbeddedProca {
    spec: ProcaFieldSpec,
}

pub fn embed_spin1(spec: ProcaFieldSpec) -> EmbeddedProca {
    EmbeddedProca { spec }
}

impl EmbeddedProca {
    pub fn spec(&self) -> &ProcaFieldSpec {
        &self.spec
    }
}

impl KemmerField for EmbeddedProca {
    fn rep(&self) -> &'static DkpRep {
        representation(SpinKind::Spin1)
    }

    fn mass(&self) -> f64 {
        self.spec.mass()
    }

    fn provenance(&self) -> Provenance {
        Provenance::EmbeddedProca
    }

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>> {
        Ok(spin1_components(&self.spec.potential(x), &self.spec.gradient(x), self.spec.mass()))
    }

    fn psi_derivatives(&self, x: &FourVector) -> Result<[Vec<C64>; 4]> {
        // The embedding is linear in (A, dA), so its derivative is the
        // embedding of (dA, ddA).
        let d1 = self.spec.gradient(x);
        let d2 = self.spec.hessian(x);
        Ok(std::array::from_fn(|la| spin1_components(&d1[la], &d2[la], self.spec.mass())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::{energy_momentum, kg_tensor, proca_tensor};
    use crate::random::{random_proca_modes, random_scalar_modes, rng, uniform};

    fn random_event(r: &mut crate::random::SimRng) -> FourVector {
        FourVector::new(uniform(r, -3.0, 3.0), uniform(r, -3.0, 3.0), uniform(r, -3.0, 3.0), uniform(r, -3.0, 3.0))
    }

    #[test]
    fn rest_mode_embedding() {
        let spec = kg_superposition(vec![ScalarMode::on_shell(C64::new(1.0, 0.0), [0.0; 3], 1.0)], 1.0).unwrap();
        let psi = embed_spin0(spec).psi(&FourVector::ZERO).unwrap();
        let want =
            [C64::new(0.0, -1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        for (a, b) in psi.iter().zip(&want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn embedded_superpositions_solve_kemmer_equation() {
        let mut r = rng(21);
        let s = embed_spin0(kg_superposition(random_scalar_modes(&mut r, 3, 1.3, 1.0), 1.3).unwrap());
        let p = embed_spin1(proca_superposition(random_proca_modes(&mut r, 3, 0.8, 1.0), 0.8).unwrap());
        for _ in 0..100 {
            let x = random_event(&mut r);
            assert!(s.kemmer_residual(&x).unwrap() < 1e-9);
            assert!(p.kemmer_residual(&x).unwrap() < 1e-9);
        }
    }

    #[test]
    fn finite_difference_oracle_agrees_with_analytic_residual() {
        let mut r = rng(22);
        let s = embed_spin0(kg_superposition(random_scalar_modes(&mut r, 2, 1.0, 0.7), 1.0).unwrap());
        let p = embed_spin1(proca_superposition(random_proca_modes(&mut r, 2, 1.0, 0.7), 1.0).unwrap());
        for _ in 0..10 {
            let x = random_event(&mut r);
            for field in [&s as &dyn KemmerField, &p as &dyn KemmerField] {
                let d = centered_derivatives(|y| field.psi(y), &x, 1e-4).unwrap();
                let psi = field.psi(&x).unwrap();
                let res = kemmer_residual(field.rep(), field.mass(), &psi, &d).unwrap();
                let scale = psi.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                assert!(res.iter().all(|z| z.norm() < 1e-6 * scale.max(1.0)));
            }
        }
    }

    #[test]
    fn off_shell_scalar_breaks_the_kemmer_equation() {
        // An off-shell exponential embedded the same way must fail, which is
        // the converse direction of the embedding equivalence.
        let bad = ScalarMode { amplitude: C64::new(1.0, 0.0), momentum: FourVector::new(1.5, 0.2, 0.0, 0.0) };
        let spec = ScalarFieldSpec::unchecked(vec![bad], 1.0);
        assert!(embed_spin0(spec).kemmer_residual(&FourVector::ZERO).unwrap() > 0.1);
    }

    #[test]
    fn embedded_tensors_match_direct_formulas() {
        let mut r = rng(23);
        let sspec = kg_superposition(random_scalar_modes(&mut r, 2, 1.1, 1.0), 1.1).unwrap();
        let pspec = proca_superposition(random_proca_modes(&mut r, 2, 0.9, 1.0), 0.9).unwrap();
        let s = embed_spin0(sspec.clone());
        let p = embed_spin1(pspec.clone());
        for _ in 0..50 {
            let x = random_event(&mut r);
            let tk = energy_momentum(s.rep(), &s.psi(&x).unwrap()).unwrap();
            let tkg = kg_tensor(sspec.phi(&x), &sspec.dphi(&x), 1.1);
            assert!(tk.max_abs_diff(&tkg) < 1e-10);
            let tp = energy_momentum(p.rep(), &p.psi(&x).unwrap()).unwrap();
            let tpr = proca_tensor(&pspec.potential(&x), &pspec.gradient(&x), 0.9);
            assert!(tp.max_abs_diff(&tpr) < 1e-10);
        }
    }

    #[test]
    fn embedding_is_linear() {
        let mut r = rng(24);
        let ma = random_scalar_modes(&mut r, 1, 1.0, 1.0);
        let mb = random_scalar_modes(&mut r, 1, 1.0, 1.0);
        let a = embed_spin0(kg_superposition(ma.clone(), 1.0).unwrap());
        let b = embed_spin0(kg_superposition(mb.clone(), 1.0).unwrap());
        let ab = embed_spin0(kg_superposition([ma, mb].concat(), 1.0).unwrap());
        let pa = random_proca_modes(&mut r, 1, 1.0, 1.0);
        let pb = random_proca_modes(&mut r, 1, 1.0, 1.0);
        let qa = embed_spin1(proca_superposition(pa.clone(), 1.0).unwrap());
        let qb = embed_spin1(proca_superposition(pb.clone(), 1.0).unwrap());
        let qab = embed_spin1(proca_superposition([pa, pb].concat(), 1.0).unwrap());
        for _ in 0..20 {
            let x = random_event(&mut r);
            let (sa, sb, sab) = (a.psi(&x).unwrap(), b.psi(&x).unwrap(), ab.psi(&x).unwrap());
            assert!(sab.iter().zip(sa.iter().zip(&sb)).all(|(c, (u, v))| (c - (u + v)).norm() < 1e-13));
            let (sa, sb, sab) = (qa.psi(&x).unwrap(), qb.psi(&x).unwrap(), qab.psi(&x).unwrap());
            assert!(sab.iter().zip(sa.iter().zip(&sb)).all(|(c, (u, v))| (c - (u + v)).norm() < 1e-13));
        }
    }
}
