use crate::algebra::{levi_civita, vec3, C64};
use crate::error::{Error, Result};
use crate::fields::{NrSample, SpinEigenSample};

/// Uniform external vector potential `V^i` and charge `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub vector_potential: [f64; 3],
    pub charge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrCurrent {
    pub density: f64,
    /// Full current, spin term included.
    pub current: [f64; 3],
    /// `curl(Phi^dagger S Phi) / 2m`; zero for spin 0.
    pub spin_term: [f64; 3],
}

impl NrCurrent {
    pub fn velocity(&self) -> [f64; 3] {
        self.current.map(|c| c / self.density)
    }
}

fn convective(sample: &NrSample, mass: f64, coupling: Option<Coupling>) -> ([f64; 3], f64) {
    let rho: f64 = sample.spinor.iter().map(|z| z.norm_sqr()).sum();
    let mut j = [0.0; 3];
    for (i, slot) in j.iter_mut().enumerate() {
        let im: f64 = sample.spinor.iter().zip(&sample.gradient[i]).map(|(p, d)| (p.conj() * d).im).sum();
        let shift = coupling.map_or(0.0, |c| c.charge * c.vector_potential[i] * rho);
        *slot = (im - shift) / mass;
    }
    (j, rho)
}

fn check(sample: &NrSample, n: usize, mass: f64) -> Result<()> {
    if !(mass > 0.0) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    if sample.spinor.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sample.spinor.len() });
    }
    Ok(())
}

/// `rho = |psi'|^2`, `j = Im(psi'* (grad - i e V) psi') / m`.
pub fn nr_current_spin0(sample: &NrSample, mass: f64, coupling: Option<Coupling>) -> Result<NrCurrent> {
    check(sample, 1, mass)?;
    let (current, density) = convective(sample, mass, coupling);
    Ok(NrCurrent { density, current, spin_term: [0.0; 3] })
}

/// `Phi^dagger S_j Phi` with `(S_j)_{ik} = i eps_{ijk}`, summed pairwise as
/// `-2 eps_{ijk} Im(Phi_i^* Phi_k)` so a real spinor gives exactly zero.
pub fn spin_density(phi: &[C64]) -> [f64; 3] {
    std::array::from_fn(|j| {
        let (i, k) = ((j + 1) % 3, (j + 2) % 3);
        let z = phi[i].conj() * phi[k];
        2.0 * z.im
    })
}

fn spin_bilinear(u: &[C64], v: &[C64], j: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..3 {
        for k in 0..3 {
            let e = levi_civita(i, j, k);
            if e != 0.0 {
                s += u[i].conj() * C64::new(0.0, e) * v[k];
            }
        }
    }
    s
}

/// Spin-0 form plus the spin term `curl(Phi^dagger S Phi) / 2m`.
pub fn nr_current_spin1(sample: &NrSample, mass: f64, coupling: Option<Coupling>) -> Result<NrCurrent> {
    check(sample, 3, mass)?;
    if let Some(e) = &sample.eigen {
        return Ok(eigen_current(e, mass, coupling));
    }
    let (mut current, density) = convective(sample, mass, coupling);
    // d_l (Phi^dagger S_j Phi) = 2 Re((d_l Phi)^dagger S_j Phi) since S_j is Hermitian.
    let ds: [[f64; 3]; 3] = std::array::from_fn(|l| {
        std::array::from_fn(|j| 2.0 * spin_bilinear(&sample.gradient[l], &sample.spinor, j).re)
    });
    let mut spin_term = [0.0; 3];
    for (i, slot) in spin_term.iter_mut().enumerate() {
        for l in 0..3 {
            for j in 0..3 {
                let e = levi_civita(i, l, j);
                if e != 0.0 {
                    *slot += e * ds[l][j];
                }
            }
        }
        *slot /= 2.0 * mass;
        current[i] += *slot;
    }
    Ok(NrCurrent { density, current, spin_term })
}

/// For `Phi = psi' eps` with unit `eps` the current is the spin-0 current of
/// psi' plus `grad|psi'|^2 x s / 2m`, `s = eps^dagger S eps`.
fn eigen_current(e: &SpinEigenSample, mass: f64, coupling: Option<Coupling>) -> NrCurrent {
    let scalar = NrSample {
        spinor: vec![e.amplitude],
        gradient: e.gradient.map(|g| vec![g]),
        eigen: None,
        method: crate::fields::DerivativeMethod::Analytic,
    };
    let (mut current, density) = convective(&scalar, mass, coupling);
    let s = spin_density(&e.polarization);
    let grad_rho = e.gradient.map(|g| 2.0 * (e.amplitude.conj() * g).re);
    let spin_term = vec3::cross(&grad_rho, &s).map(|v| v / (2.0 * mass));
    for i in 0..3 {
        current[i] += spin_term[i];
    }
    NrCurrent { density, current, spin_term }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FourVector;
    use crate::dkp::SpinKind;
    use crate::fields::{nr_gaussian, nr_plane_wave, nr_two_slit, DerivativeMethod, FieldSample, NrFieldSpec, Sampled};
    use crate::random::{rng, uniform};

    fn sample(f: &NrFieldSpec, x: &FourVector) -> NrSample {
        match f.sample(x).unwrap() {
            FieldSample::Nr(s) => s,
            _ => unreachable!(),
        }
    }

    fn circular() -> [C64; 3] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, 0.0)]
    }

    #[test]
    fn plane_wave_current() {
        let f = nr_plane_wave(SpinKind::Spin0, 2.0, [0.6, 0.0, 0.0], None).unwrap();
        let c = nr_current_spin0(&sample(&f, &FourVector::new(0.3, 1.0, 0.0, 0.0)), 2.0, None).unwrap();
        assert!((c.current[0] - 0.3 * c.density).abs() < 1e-15);
        let v = Coupling { vector_potential: [0.25, 0.0, 0.0], charge: 1.0 };
        let c = nr_current_spin0(&sample(&f, &FourVector::ZERO), 2.0, Some(v)).unwrap();
        assert!((c.current[0] - (0.6 - 0.25) * c.density / 2.0).abs() < 1e-15);
    }

    #[test]
    fn real_amplitude_carries_no_current() {
        let s = NrSample {
            spinor: vec![C64::new(0.7, 0.0)],
            gradient: [vec![C64::new(0.3, 0.0)], vec![C64::new(-1.0, 0.0)], vec![C64::new(0.0, 0.0)]],
            eigen: None,
            method: DerivativeMethod::Analytic,
        };
        assert_eq!(nr_current_spin0(&s, 1.0, None).unwrap().current, [0.0; 3]);
    }

    #[test]
    fn resting_gaussian_has_zero_velocity_at_center() {
        let f = nr_gaussian(SpinKind::Spin0, 1.0, 1.0, [0.5, 0.0, -0.5], [0.0; 3], None).unwrap();
        let c = nr_current_spin0(&sample(&f, &FourVector::new(0.0, 0.5, 0.0, -0.5)), 1.0, None).unwrap();
        assert!(c.velocity().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn circular_polarisation_spin_vector() {
        // Direct 3x3 contraction eps^dagger S_j eps.
        let e = circular();
        let mut s = [0.0; 3];
        for (j, sj) in s.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..3 {
                for k in 0..3 {
                    let m = C64::new(0.0, levi_civita(i, j, k));
                    acc += e[i].conj() * m * e[k];
                }
            }
            *sj = acc.re;
        }
        let got = spin_density(&e);
        for j in 0..3 {
            assert!((s[j] - [0.0, 0.0, 1.0][j]).abs() < 1e-15);
            assert!((got[j] - s[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_term_is_curl_of_density_times_spin() {
        let m = 1.3;
        let f = nr_gaussian(SpinKind::Spin1, m, 0.9, [0.0; 3], [0.0; 3], Some(circular())).unwrap();
        let ds = spin_density(&circular());
        let mut r = rng(60);
        for _ in 0..20 {
            let x = FourVector::new(
                uniform(&mut r, 0.0, 2.0),
                uniform(&mut r, -1.5, 1.5),
                uniform(&mut r, -1.5, 1.5),
                uniform(&mut r, -1.5, 1.5),
            );
            let c = nr_current_spin1(&sample(&f, &x), m, None).unwrap();
            // grad rho by central differences of the density itself.
            let h = 1e-5;
            let grad: [f64; 3] = std::array::from_fn(|a| {
                let (mut p, mut q) = (x, x);
                p[a + 1] += h;
                q[a + 1] -= h;
                (f.density(&p) - f.density(&q)) / (2.0 * h)
            });
            let want = vec3::cross(&grad, &ds).map(|v| v / (2.0 * m));
            for i in 0..3 {
                assert!(
                    (c.spin_term[i] - want[i]).abs() < 1e-8 * (1.0 + want[i].abs()),
                    "{:?} {:?}",
                    c.spin_term,
                    want
                );
            }
        }
    }

    #[test]
    fn real_polarisation_reduces_to_spin0() {
        let eps = [C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.8, 0.0)];
        let f1 = nr_gaussian(SpinKind::Spin1, 1.0, 1.0, [0.0; 3], [0.2, 0.1, 0.0], Some(eps)).unwrap();
        let f0 = nr_gaussian(SpinKind::Spin0, 1.0, 1.0, [0.0; 3], [0.2, 0.1, 0.0], None).unwrap();
        let x = FourVector::new(0.5, 0.3, -0.2, 0.7);
        let c1 = nr_current_spin1(&sample(&f1, &x), 1.0, None).unwrap();
        let c0 = nr_current_spin0(&sample(&f0, &x), 1.0, None).unwrap();
        assert_eq!(c1.spin_term, [0.0; 3]);
        for i in 0..3 {
            assert!((c1.current[i] - c0.current[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn factorised_and_generic_paths_agree() {
        let m = 0.8;
        let eps = {
            let n = (0.5f64 * 0.5 + 0.3 * 0.3 + 0.2 * 0.2 + 0.7 * 0.7).sqrt();
            [C64::new(0.5 / n, 0.3 / n), C64::new(0.0, 0.2 / n), C64::new(0.7 / n, 0.0)]
        };
        let f = nr_gaussian(SpinKind::Spin1, m, 1.1, [0.2, 0.0, 0.0], [0.3, -0.1, 0.2], Some(eps)).unwrap();
        let v = Coupling { vector_potential: [0.1, 0.2, -0.3], charge: 0.5 };
        let mut r = rng(62);
        for _ in 0..20 {
            let x = FourVector::new(
                uniform(&mut r, 0.0, 2.0),
                uniform(&mut r, -1.5, 1.5),
                uniform(&mut r, -1.5, 1.5),
                uniform(&mut r, -1.5, 1.5),
            );
            let full = sample(&f, &x);
            let generic = NrSample { eigen: None, ..full.clone() };
            let a = nr_current_spin1(&full, m, Some(v)).unwrap();
            let b = nr_current_spin1(&generic, m, Some(v)).unwrap();
            assert!((a.density - b.density).abs() < 1e-12 * b.density.max(1e-300) + 1e-300);
            for i in 0..3 {
                assert!((a.current[i] - b.current[i]).abs() < 1e-12 * (b.current[i].abs() + b.density));
                assert!((a.spin_term[i] - b.spin_term[i]).abs() < 1e-12 * (b.spin_term[i].abs() + b.density));
            }
        }
    }

    #[test]
    fn uniform_density_has_no_spin_term() {
        let f = nr_plane_wave(SpinKind::Spin1, 1.0, [0.3, 0.0, 0.0], Some(circular())).unwrap();
        let c = nr_current_spin1(&sample(&f, &FourVector::new(1.0, 2.0, 3.0, 4.0)), 1.0, None).unwrap();
        assert!(c.spin_term.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn two_slit_transverse_current_is_odd() {
        let f = nr_two_slit(SpinKind::Spin0, 1.0, 4.0, 0.5, 1.0, None).unwrap();
        let mut r = rng(61);
        for _ in 0..50 {
            let (t, x, y) = (uniform(&mut r, 0.0, 10.0), uniform(&mut r, -3.0, 3.0), uniform(&mut r, -6.0, 6.0));
            let a = nr_current_spin0(&sample(&f, &FourVector::new(t, x, y, 0.0)), 1.0, None).unwrap();
            let b = nr_current_spin0(&sample(&f, &FourVector::new(t, x, -y, 0.0)), 1.0, None).unwrap();
            assert!((a.current[1] + b.current[1]).abs() < 1e-10);
            let c = nr_current_spin0(&sample(&f, &FourVector::new(t, x, 0.0, 0.0)), 1.0, None).unwrap();
            assert_eq!(c.current[1], 0.0);
        }
    }

    #[test]
    fn wrong_component_count() {
        let f = nr_plane_wave(SpinKind::Spin0, 1.0, [0.0; 3], None).unwrap();
        assert!(nr_current_spin1(&sample(&f, &FourVector::ZERO), 1.0, None).is_err());
        assert!(nr_current_spin0(&sample(&f, &FourVector::ZERO), 0.0, None).is_err());
    }
}
