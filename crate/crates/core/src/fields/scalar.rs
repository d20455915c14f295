use crate::algebra::{FourVector, C64};
use crate::error::{Error, Result};

use super::{DerivativeMethod, FieldSample, Sampled};

/// Mass-shell tolerance relative to m^2.
pub const SHELL_TOLERANCE: f64 = 1e-10;

/// One plane wave `A exp(-i p.x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMode {
    pub amplitude: C64,
    /// Contravariant four-momentum; `p^0 < 0` gives a negative-frequency mode.
    pub momentum: FourVector,
}

impl ScalarMode {
    /// Positive-frequency mode with `p^0 = +sqrt(|p|^2 + m^2)`.
    pub fn on_shell(amplitude: C64, p: [f64; 3], mass: f64) -> Self {
        let e = (p.iter().map(|c| c * c).sum::<f64>() + mass * mass).sqrt();
        ScalarMode { amplitude, momentum: FourVector::from_parts(e, p) }
    }

    /// Negative-frequency mode `A exp(+i(E t + p.x))`, i.e. momentum `-(E, p)`.
    pub fn negative_frequency(amplitude: C64, p: [f64; 3], mass: f64) -> Self {
        let m = Self::on_shell(amplitude, p, mass);
        ScalarMode { amplitude, momentum: -m.momentum }
    }

    pub fn shell_residual(&self, mass: f64) -> f64 {
        (self.momentum.norm_sq() - mass * mass).abs()
    }

    fn value(&self, x: &FourVector) -> C64 {
        let phase = self.momentum.dot(x);
        self.amplitude * C64::from_polar(1.0, -phase)
    }
}

/// Finite superposition of on-shell Klein-Gordon plane waves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldSpec {
    modes: Vec<ScalarMode>,
    mass: f64,
}

pub fn kg_superposition(modes: Vec<ScalarMode>, mass: f64) -> Result<ScalarFieldSpec> {
    if !(mass > 0.0) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    if modes.is_empty() {
        return Err(Error::Config("a superposition needs at least one mode".into()));
    }
    for (index, m) in modes.iter().enumerate() {
        let residual = m.shell_residual(mass);
        if !(residual < SHELL_TOLERANCE * mass * mass) {
            return Err(Error::OffShell { index, residual });
        }
    }
    Ok(ScalarFieldSpec { modes, mass })
}

impl ScalarFieldSpec {
    /// Skips validation; only for building deliberately broken fields in tests.
    #[cfg(test)]
    pub(crate) fn unchecked(modes: Vec<ScalarMode>, mass: f64) -> Self {
        ScalarFieldSpec { modes, mass }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn modes(&self) -> &[ScalarMode] {
        &self.modes
    }

    pub fn phi(&self, x: &FourVector) -> C64 {
        self.modes.iter().map(|m| m.value(x)).sum()
    }

    /// Covariant derivatives `d_mu phi`.
    pub fn dphi(&self, x: &FourVector) -> [C64; 4] {
        let mut d = [C64::new(0.0, 0.0); 4];
        for m in &self.modes {
            let v = m.value(x);
            let pl = m.momentum.lower();
            for (mu, slot) in d.iter_mut().enumerate() {
                *slot += C64::new(0.0, -pl[mu]) * v;
            }
        }
        d
    }

    /// `d_mu d_nu phi`.
    pub fn d2phi(&self, x: &FourVector) -> [[C64; 4]; 4] {
        let mut d = [[C64::new(0.0, 0.0); 4]; 4];
        for m in &self.modes {
            let v = m.value(x);
            let pl = m.momentum.lower();
            for (mu, row) in d.iter_mut().enumerate() {
                for (nu, slot) in row.iter_mut().enumerate() {
                    *slot -= v * (pl[mu] * pl[nu]);
                }
            }
        }
        d
    }

    /// `|d^mu d_mu phi + m^2 phi|`.
    pub fn kg_residual(&self, x: &FourVector) -> f64 {
        let d2 = self.d2phi(x);
        let box_phi = d2[0][0] - d2[1][1] - d2[2][2] - d2[3][3];
        (box_phi + self.phi(x) * (self.mass * self.mass)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSample {
    pub phi: C64,
    pub dphi: [C64; 4],
    pub method: DerivativeMethod,
}

impl Sampled for ScalarFieldSpec {
    fn sample(&self, x: &FourVector) -> Result<FieldSample> {
        Ok(FieldSample::Scalar(ScalarSample {
            phi: self.phi(x),
            dphi: self.dphi(x),
            method: DerivativeMethod::Analytic,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::centered_derivatives;
    use crate::random::{random_scalar_modes, rng, uniform};

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn rest_mode() {
        let f = kg_superposition(vec![ScalarMode::on_shell(one(), [0.0; 3], 1.0)], 1.0).unwrap();
        for t in [0.0, 0.7, 2.0] {
            let x = FourVector::new(t, 0.3, -1.0, 2.0);
            assert!((f.phi(&x) - C64::from_polar(1.0, -t)).norm() < 1e-15);
            assert!(f.kg_residual(&x) < 1e-15);
        }
        let FieldSample::Scalar(s) = f.sample(&FourVector::ZERO).unwrap() else { panic!() };
        assert_eq!(s.phi, one());
        assert!((s.dphi[0] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(s.method, DerivativeMethod::Analytic);
    }

    #[test]
    fn moving_mode_dispersion() {
        let m = ScalarMode::on_shell(one(), [0.3, 0.0, 0.0], 1.0);
        assert!((m.momentum[0] - 1.09f64.sqrt()).abs() < 1e-15);
        let f = kg_superposition(vec![m], 1.0).unwrap();
        assert!(f.kg_residual(&FourVector::new(1.0, 2.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn superposition_residual_by_substitution() {
        // Oracle: second differences of phi itself, independent of d2phi.
        let mut r = rng(1);
        let f = kg_superposition(random_scalar_modes(&mut r, 2, 1.0, 1.0), 1.0).unwrap();
        for _ in 0..100 {
            let x = FourVector::new(
                uniform(&mut r, -5.0, 5.0),
                uniform(&mut r, -5.0, 5.0),
                uniform(&mut r, -5.0, 5.0),
                uniform(&mut r, -5.0, 5.0),
            );
            assert!(f.kg_residual(&x) < 1e-12);
            let h = 1e-3;
            let mut lap = C64::new(0.0, 0.0);
            for mu in 0..4 {
                let (mut xp, mut xm) = (x, x);
                xp[mu] += h;
                xm[mu] -= h;
                let second = (f.phi(&xp) - f.phi(&x) * 2.0 + f.phi(&xm)) / (h * h);
                lap += second * crate::algebra::METRIC[mu];
            }
            assert!((lap + f.phi(&x)).norm() < 1e-5);
        }
    }

    #[test]
    fn off_shell_rejected_with_index() {
        let good = ScalarMode::on_shell(one(), [0.1, 0.0, 0.0], 1.0);
        let bad = ScalarMode { amplitude: one(), momentum: FourVector::new(1.0, 0.5, 0.0, 0.0) };
        match kg_superposition(vec![good, bad], 1.0) {
            Err(Error::OffShell { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(kg_superposition(vec![], 1.0).is_err());
        assert!(kg_superposition(vec![good], 0.0).is_err());
    }

    #[test]
    fn negative_frequency_mode_is_on_shell() {
        let m = ScalarMode::negative_frequency(one(), [0.2, 0.0, 0.1], 1.0);
        assert!(m.momentum[0] < 0.0);
        let f = kg_superposition(vec![m], 1.0).unwrap();
        assert!(f.kg_residual(&FourVector::new(0.4, 1.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn analytic_and_finite_difference_derivatives_agree_at_second_order() {
        let mut r = rng(2);
        let f = kg_superposition(random_scalar_modes(&mut r, 3, 1.0, 1.0), 1.0).unwrap();
        let x = FourVector::new(0.3, -0.2, 0.5, 1.1);
        let exact = f.dphi(&x);
        let err = |h: f64| {
            let d = centered_derivatives(|y| Ok(vec![f.phi(y)]), &x, h).unwrap();
            (0..4).map(|mu| (d[mu][0] - exact[mu]).norm()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }
}
