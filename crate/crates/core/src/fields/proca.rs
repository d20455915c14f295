use crate::algebra::{levi_civita, FourVector, C64, METRIC};
use crate::error::{Error, Result};

use super::scalar::SHELL_TOLERANCE;
use super::{DerivativeMethod, FieldSample, Sampled};

/// Tolerance on `|p_mu eps^mu|`.
pub const LORENZ_TOLERANCE: f64 = 1e-10;

/// One plane wave `A^mu = a eps^mu exp(-i p.x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcaMode {
    pub amplitude: C64,
    pub momentum: FourVector,
    /// Contravariant polarisation `eps^mu`.
    pub polarization: [C64; 4],
}

fn mdot(p: &FourVector, e: &[C64; 4]) -> C64 {
    (0..4).map(|mu| e[mu] * (METRIC[mu] * p[mu])).sum()
}

impl ProcaMode {
    pub fn new(amplitude: C64, momentum: FourVector, polarization: [C64; 4]) -> Self {
        ProcaMode { amplitude, momentum, polarization }
    }

    /// Rest-frame mode with a purely spatial polarisation, normalised.
    pub fn transverse_rest(amplitude: C64, mass: f64, eps: [C64; 3]) -> Self {
        let n = eps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let pol = [C64::new(0.0, 0.0), eps[0] / n, eps[1] / n, eps[2] / n];
        ProcaMode { amplitude, momentum: FourVector::new(mass, 0.0, 0.0, 0.0), polarization: pol }
    }

    /// Mode moving along z with `eps = (k, 0, 0, E) / m`.
    pub fn longitudinal(amplitude: C64, k: f64, mass: f64) -> Self {
        let e = (k * k + mass * mass).sqrt();
        let pol = [C64::new(k / mass, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(e / mass, 0.0)];
        ProcaMode { amplitude, momentum: FourVector::new(e, 0.0, 0.0, k), polarization: pol }
    }

    /// Removes the component of `raw` along `p` and normalises to `eps* . eps = -1`.
    pub fn project(amplitude: C64, momentum: FourVector, raw: [C64; 4]) -> Self {
        let pp = momentum.norm_sq();
        let c = mdot(&momentum, &raw) / pp;
        let mut eps: [C64; 4] = std::array::from_fn(|mu| raw[mu] - c * momentum[mu]);
        let norm: f64 = (0..4).map(|mu| METRIC[mu] * eps[mu].norm_sqr()).sum();
        let s = norm.abs().sqrt();
        if s > 0.0 {
            eps.iter_mut().for_each(|e| *e /= s);
        }
        ProcaMode { amplitude, momentum, polarization: eps }
    }

    pub fn lorenz_residual(&self) -> f64 {
        mdot(&self.momentum, &self.polarization).norm()
    }

    fn factor(&self, x: &FourVector) -> C64 {
        self.amplitude * C64::from_polar(1.0, -self.momentum.dot(x))
    }
}

/// Finite superposition of Proca plane waves.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcaFieldSpec {
    modes: Vec<ProcaMode>,
    mass: f64,
}

pub fn proca_superposition(modes: Vec<ProcaMode>, mass: f64) -> Result<ProcaFieldSpec> {
    if !(mass > 0.0) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    if modes.is_empty() {
        return Err(Error::Config("a superposition needs at least one mode".into()));
    }
    for (index, m) in modes.iter().enumerate() {
        let residual = (m.momentum.norm_sq() - mass * mass).abs();
        if !(residual < SHELL_TOLERANCE * mass * mass) {
            return Err(Error::OffShell { index, residual });
        }
        let residual = m.lorenz_residual();
        if !(residual < LORENZ_TOLERANCE) {
            return Err(Error::Transversality { index, residual });
        }
    }
    Ok(ProcaFieldSpec { modes, mass })
}

type Grad = [[C64; 4]; 4];

impl ProcaFieldSpec {
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn modes(&self) -> &[ProcaMode] {
        &self.modes
    }

    /// `A^nu`.
    pub fn potential(&self, x: &FourVector) -> [C64; 4] {
        let mut a = [C64::new(0.0, 0.0); 4];
        for m in &self.modes {
            let f = m.factor(x);
            for nu in 0..4 {
                a[nu] += f * m.polarization[nu];
            }
        }
        a
    }

    /// `g[mu][nu] = d_mu A^nu`.
    pub fn gradient(&self, x: &FourVector) -> Grad {
        let mut g = [[C64::new(0.0, 0.0); 4]; 4];
        for m in &self.modes {
            let f = m.factor(x);
            let pl = m.momentum.lower();
            for mu in 0..4 {
                for nu in 0..4 {
                    g[mu][nu] += C64::new(0.0, -pl[mu]) * f * m.polarization[nu];
                }
            }
        }
        g
    }

    /// `h[la][mu][nu] = d_la d_mu A^nu`.
    pub fn hessian(&self, x: &FourVector) -> [Grad; 4] {
        let mut h = [[[C64::new(0.0, 0.0); 4]; 4]; 4];
        for m in &self.modes {
            let f = m.factor(x);
            let pl = m.momentum.lower();
            for la in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        h[la][mu][nu] -= f * m.polarization[nu] * (pl[la] * pl[mu]);
                    }
                }
            }
        }
        h
    }

    pub fn electric(&self, x: &FourVector) -> [C64; 3] {
        electric_from(&self.gradient(x))
    }

    pub fn magnetic(&self, x: &FourVector) -> [C64; 3] {
        magnetic_from(&self.gradient(x))
    }

    /// `|d_mu A^mu|`.
    pub fn lorenz_residual(&self, x: &FourVector) -> f64 {
        let g = self.gradient(x);
        (g[0][0] + g[1][1] + g[2][2] + g[3][3]).norm()
    }

    /// Largest residual among the field relations
    /// `div E = -m^2 A^0`, `d_0 E = curl B + m^2 A`, `d_0 B = -curl E` and
    /// `d_mu A^mu = 0`, with E and B defined from the potential.
    pub fn relations_residual(&self, x: &FourVector) -> f64 {
        let a = self.potential(x);
        let h = self.hessian(x);
        let m2 = self.mass * self.mass;
        // dE[la][i], dB[la][i] from the Hessian.
        let de: [[C64; 3]; 4] = std::array::from_fn(|la| electric_from(&h[la]));
        let db: [[C64; 3]; 4] = std::array::from_fn(|la| magnetic_from(&h[la]));
        let curl = |d: &[[C64; 3]; 4], i: usize| -> C64 {
            let mut c = C64::new(0.0, 0.0);
            for j in 0..3 {
                for k in 0..3 {
                    let s = levi_civita(i, j, k);
                    if s != 0.0 {
                        c += d[j + 1][k] * s;
                    }
                }
            }
            c
        };
        let mut worst = (de[1][0] + de[2][1] + de[3][2] + a[0] * m2).norm();
        for i in 0..3 {
            worst = worst.max((de[0][i] - curl(&db, i) - a[i + 1] * m2).norm());
            worst = worst.max((db[0][i] + curl(&de, i)).norm());
        }
        worst.max(self.lorenz_residual(x))
    }
}

pub(crate) fn electric_from(g: &Grad) -> [C64; 3] {
    std::array::from_fn(|i| -g[i + 1][0] - g[0][i + 1])
}

pub(crate) fn magnetic_from(g: &Grad) -> [C64; 3] {
    std::array::from_fn(|i| {
        let mut b = C64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                let s = levi_civita(i, j, k);
                if s != 0.0 {
                    b += g[j + 1][k + 1] * s;
                }
            }
        }
        b
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcaSample {
    pub potential: [C64; 4],
    pub gradient: [[C64; 4]; 4],
    pub method: DerivativeMethod,
}

impl Sampled for ProcaFieldSpec {
    fn sample(&self, x: &FourVector) -> Result<FieldSample> {
        Ok(FieldSample::Proca(ProcaSample {
            potential: self.potential(x),
            gradient: self.gradient(x),
            method: DerivativeMethod::Analytic,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_proca_modes, rng, uniform};

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn rest_frame_transverse_mode() {
        let m = ProcaMode::transverse_rest(one(), 1.0, [one(), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let f = proca_superposition(vec![m], 1.0).unwrap();
        let x = FourVector::new(0.4, 1.0, -2.0, 0.5);
        let g = f.gradient(&x);
        // div E and A^0 both vanish.
        let h = f.hessian(&x);
        let div_e: C64 = (0..3).map(|i| -h[i + 1][i + 1][0] - h[i + 1][0][i + 1]).sum();
        assert!(div_e.norm() < 1e-15);
        assert!(f.potential(&x)[0].norm() < 1e-15);
        assert!(f.relations_residual(&x) < 1e-12);
        assert!((g[0][0] + g[1][1] + g[2][2] + g[3][3]).norm() < 1e-15);
    }

    #[test]
    fn longitudinal_mode_solves_constraints_directly() {
        let (k, m) = (0.7, 1.3);
        let mode = ProcaMode::longitudinal(one(), k, m);
        let e = (k * k + m * m).sqrt();
        // p.eps = (E k - k E) / m = 0 and eps.eps* = (k^2 - E^2)/m^2 = -1.
        assert!(mode.lorenz_residual() < 1e-15);
        let n: f64 = (0..4).map(|mu| METRIC[mu] * mode.polarization[mu].norm_sqr()).sum();
        assert!((n + 1.0).abs() < 1e-14);
        assert!((mode.momentum[0] - e).abs() < 1e-15);
        assert!(proca_superposition(vec![mode], m).is_ok());
    }

    #[test]
    fn timelike_polarisation_rejected() {
        let z = C64::new(0.0, 0.0);
        let mode = ProcaMode::new(one(), FourVector::new(1.0, 0.0, 0.0, 0.0), [one(), z, z, z]);
        match proca_superposition(vec![mode], 1.0) {
            Err(Error::Transversality { index: 0, residual }) => assert!((residual - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_superpositions_satisfy_all_relations() {
        let mut r = rng(3);
        let f = proca_superposition(random_proca_modes(&mut r, 3, 1.0, 1.0), 1.0).unwrap();
        for _ in 0..100 {
            let x = FourVector::new(
                uniform(&mut r, -4.0, 4.0),
                uniform(&mut r, -4.0, 4.0),
                uniform(&mut r, -4.0, 4.0),
                uniform(&mut r, -4.0, 4.0),
            );
            assert!(f.lorenz_residual(&x) < 1e-10);
            assert!(f.relations_residual(&x) < 1e-9);
        }
    }

    #[test]
    fn faraday_law_against_finite_differences() {
        // d_0 B = -curl E with every derivative taken numerically from E and B.
        let mut r = rng(4);
        let f = proca_superposition(random_proca_modes(&mut r, 2, 1.0, 0.8), 1.0).unwrap();
        let x = FourVector::new(0.2, 0.1, -0.4, 0.9);
        let h = 1e-4;
        let shift = |mu: usize, s: f64| {
            let mut y = x;
            y[mu] += s;
            y
        };
        let d = |g: &dyn Fn(&FourVector) -> [C64; 3], mu: usize, i: usize| {
            (g(&shift(mu, h))[i] - g(&shift(mu, -h))[i]) / (2.0 * h)
        };
        let e = |y: &FourVector| f.electric(y);
        let b = |y: &FourVector| f.magnetic(y);
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let curl_e = d(&e, j + 1, k) - d(&e, k + 1, j);
            assert!((d(&b, 0, i) + curl_e).norm() < 1e-7);
        }
    }
}
