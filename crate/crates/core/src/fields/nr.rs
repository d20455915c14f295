//! Closed-form solutions of the free Schrodinger equation built as products
//! of one-dimensional profiles, and their lifts to relativistic fields.

use std::f64::consts::PI;

use crate::algebra::{FourVector, C64};
use crate::dkp::{representation, DkpRep, SpinKind};
use crate::error::{Error, Result};

use super::{spin0_components, spin1_components, DerivativeMethod, FieldSample, KemmerField, Provenance, Sampled};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// One-dimensional factor of a separable packet.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile1d {
    Uniform,
    PlaneWave {
        k: f64,
    },
    /// Freely spreading Gaussian of initial width `sigma` and mean momentum `k`.
    Gaussian {
        center: f64,
        sigma: f64,
        k: f64,
    },
    Sum(Vec<(C64, Profile1d)>),
}

/// Value and derivatives of a 1D profile: g, g_x, g_xx, g_t, g_tx.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet1 {
    g: C64,
    dx: C64,
    dxx: C64,
    dt: C64,
    dtx: C64,
}

impl Jet1 {
    /// Builds the jet from the logarithmic derivatives of g.
    fn from_log(g: C64, l: C64, lx: C64, t: C64, tl: C64) -> Self {
        Jet1 { g, dx: g * l, dxx: g * (l * l + lx), dt: g * t, dtx: g * (t * l + tl) }
    }

    fn scaled(self, w: C64) -> Self {
        Jet1 { g: self.g * w, dx: self.dx * w, dxx: self.dxx * w, dt: self.dt * w, dtx: self.dtx * w }
    }

    fn add(self, o: Jet1) -> Self {
        Jet1 { g: self.g + o.g, dx: self.dx + o.dx, dxx: self.dxx + o.dxx, dt: self.dt + o.dt, dtx: self.dtx + o.dtx }
    }
}

impl Profile1d {
    fn jet(&self, t: f64, x: f64, mass: f64) -> Jet1 {
        match *self {
            Profile1d::Uniform => Jet1 { g: C64::new(1.0, 0.0), dx: ZERO, dxx: ZERO, dt: ZERO, dtx: ZERO },
            Profile1d::PlaneWave { k } => {
                let w = -k * k / (2.0 * mass);
                let g = C64::from_polar(1.0, k * x + w * t);
                Jet1::from_log(g, I * k, ZERO, I * w, ZERO)
            }
            Profile1d::Gaussian { center, sigma, k } => {
                let s2 = sigma * sigma;
                let v = k / mass;
                let c = C64::new(1.0, t / (2.0 * mass * s2));
                let u = x - center - v * t;
                let norm = (2.0 * PI * s2).powf(-0.25);
                let expo = -u * u / (4.0 * s2 * c) + I * (k * (x - center) - k * k * t / (2.0 * mass));
                let g = expo.exp() * norm / c.sqrt();
                let l = -u / (2.0 * s2 * c) + I * k;
                let lx = -1.0 / (2.0 * s2 * c);
                let lt =
                    -I / (4.0 * mass * s2 * c) + u * v / (2.0 * s2 * c) + I * u * u / (8.0 * mass * s2 * s2 * c * c)
                        - I * (k * k / (2.0 * mass));
                let dl = v / (2.0 * s2 * c) + I * u / (4.0 * mass * s2 * s2 * c * c);
                Jet1::from_log(g, l, lx, lt, dl)
            }
            Profile1d::Sum(ref parts) => {
                parts.iter().fold(Jet1 { g: ZERO, dx: ZERO, dxx: ZERO, dt: ZERO, dtx: ZERO }, |acc, (w, p)| {
                    acc.add(p.jet(t, x, mass).scaled(*w))
                })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Profile1d::Gaussian { sigma, .. } if !(*sigma > 0.0) => {
                Err(Error::NonPositive { name: "sigma", value: *sigma })
            }
            Profile1d::Sum(parts) => parts.iter().try_for_each(|(_, p)| p.validate()),
            _ => Ok(()),
        }
    }
}

/// Scalar amplitude psi' with its first and second spatial derivatives and
/// first time derivatives at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrJet {
    pub psi: C64,
    pub grad: [C64; 3],
    pub hess: [[C64; 3]; 3],
    pub dt: C64,
    pub dt_grad: [C64; 3],
}

impl NrJet {
    pub fn laplacian(&self) -> C64 {
        self.hess[0][0] + self.hess[1][1] + self.hess[2][2]
    }
}

/// Nonrelativistic spin-0 amplitude psi' or spin-1 eigenstate `psi' eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct NrFieldSpec {
    kind: SpinKind,
    mass: f64,
    axes: [Profile1d; 3],
    polarization: Option<[C64; 3]>,
}

impl NrFieldSpec {
    pub fn new(kind: SpinKind, mass: f64, axes: [Profile1d; 3], polarization: Option<[C64; 3]>) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::NonPositive { name: "mass", value: mass });
        }
        axes.iter().try_for_each(Profile1d::validate)?;
        match (kind, &polarization) {
            (SpinKind::Spin0, Some(_)) => return Err(Error::Config("a spin-0 packet takes no polarisation".into())),
            (SpinKind::Spin1, None) => return Err(Error::Config("a spin-1 packet needs a polarisation".into())),
            (SpinKind::Spin1, Some(e)) => {
                let n: f64 = e.iter().map(|c| c.norm_sqr()).sum();
                if (n - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("polarisation must have unit norm, got {n}")));
                }
            }
            _ => {}
        }
        Ok(NrFieldSpec { kind, mass, axes, polarization })
    }

    pub fn kind(&self) -> SpinKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn axes(&self) -> &[Profile1d; 3] {
        &self.axes
    }

    pub fn polarization(&self) -> Option<[C64; 3]> {
        self.polarization
    }

    pub fn components(&self) -> usize {
        match self.kind {
            SpinKind::Spin0 => 1,
            SpinKind::Spin1 => 3,
        }
    }

    pub fn jet(&self, x: &FourVector) -> NrJet {
        let t = x.time();
        let j: [Jet1; 3] = std::array::from_fn(|a| self.axes[a].jet(t, x[a + 1], self.mass));
        let psi = j[0].g * j[1].g * j[2].g;
        let others = |a: usize| -> C64 { (0..3).filter(|&b| b != a).map(|b| j[b].g).product() };
        let grad = std::array::from_fn(|a| j[a].dx * others(a));
        let hess = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                if a == b {
                    j[a].dxx * others(a)
                } else {
                    let c = 3 - a - b;
                    j[a].dx * j[b].dx * j[c].g
                }
            })
        });
        let dt = (0..3).map(|a| j[a].dt * others(a)).sum();
        let dt_grad = std::array::from_fn(|a| {
            let mut s = j[a].dtx * others(a);
            for b in (0..3).filter(|&b| b != a) {
                let c = 3 - a - b;
                s += j[a].dx * j[b].dt * j[c].g;
            }
            s
        });
        NrJet { psi, grad, hess, dt, dt_grad }
    }

    pub fn psi_prime(&self, x: &FourVector) -> C64 {
        let t = x.time();
        (0..3).map(|a| self.axes[a].jet(t, x[a + 1], self.mass).g).product()
    }

    fn eps(&self) -> [C64; 3] {
        self.polarization.unwrap_or([C64::new(1.0, 0.0), ZERO, ZERO])
    }

    /// psi' for spin 0, `psi' eps` for spin 1.
    pub fn spinor(&self, x: &FourVector) -> Vec<C64> {
        let p = self.psi_prime(x);
        match self.kind {
            SpinKind::Spin0 => vec![p],
            SpinKind::Spin1 => self.eps().iter().map(|e| e * p).collect(),
        }
    }

    /// `out[i]` is the spatial derivative along axis i of [`Self::spinor`].
    pub fn spinor_gradient(&self, x: &FourVector) -> [Vec<C64>; 3] {
        let g = self.jet(x).grad;
        std::array::from_fn(|i| match self.kind {
            SpinKind::Spin0 => vec![g[i]],
            SpinKind::Spin1 => self.eps().iter().map(|e| e * g[i]).collect(),
        })
    }

    pub fn density(&self, x: &FourVector) -> f64 {
        let p = self.psi_prime(x).norm_sqr();
        match self.kind {
            SpinKind::Spin0 => p,
            SpinKind::Spin1 => p * self.eps().iter().map(|c| c.norm_sqr()).sum::<f64>(),
        }
    }

    /// `|i d_t psi' + lap psi' / 2m|` relative to the size of either term.
    pub fn schrodinger_residual(&self, x: &FourVector) -> f64 {
        let j = self.jet(x);
        let a = I * j.dt;
        let b = j.laplacian() / (2.0 * self.mass);
        let scale = a.norm() + b.norm();
        if scale == 0.0 {
            0.0
        } else {
            (a + b).norm() / scale
        }
    }
}

fn check_spin(kind: SpinKind, eps: Option<[C64; 3]>) -> Option<[C64; 3]> {
    match kind {
        SpinKind::Spin0 => None,
        SpinKind::Spin1 => eps,
    }
}

/// Gaussian packet of width `sigma` in every direction.
pub fn nr_gaussian(
    kind: SpinKind,
    mass: f64,
    sigma: f64,
    center: [f64; 3],
    k: [f64; 3],
    eps: Option<[C64; 3]>,
) -> Result<NrFieldSpec> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositive { name: "sigma", value: sigma });
    }
    if kind == SpinKind::Spin0 && eps.is_some() {
        return Err(Error::Config("a spin-0 packet takes no polarisation".into()));
    }
    let axes = std::array::from_fn(|a| Profile1d::Gaussian { center: center[a], sigma, k: k[a] });
    NrFieldSpec::new(kind, mass, axes, check_spin(kind, eps))
}

/// Two equal-weight Gaussian slits at `y = +-d/2`, a plane wave along x with
/// `k_x = m * speed`, uniform in z.
pub fn nr_two_slit(
    kind: SpinKind,
    mass: f64,
    separation: f64,
    sigma: f64,
    speed: f64,
    eps: Option<[C64; 3]>,
) -> Result<NrFieldSpec> {
    if !(separation > 0.0) {
        return Err(Error::NonPositive { name: "separation", value: separation });
    }
    if !(sigma > 0.0) {
        return Err(Error::NonPositive { name: "sigma", value: sigma });
    }
    if kind == SpinKind::Spin0 && eps.is_some() {
        return Err(Error::Config("a spin-0 packet takes no polarisation".into()));
    }
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let slit = |c: f64| Profile1d::Gaussian { center: c, sigma, k: 0.0 };
    let axes = [
        Profile1d::PlaneWave { k: mass * speed },
        Profile1d::Sum(vec![(w, slit(separation / 2.0)), (w, slit(-separation / 2.0))]),
        Profile1d::Uniform,
    ];
    NrFieldSpec::new(kind, mass, axes, check_spin(kind, eps))
}

pub fn nr_plane_wave(kind: SpinKind, mass: f64, k: [f64; 3], eps: Option<[C64; 3]>) -> Result<NrFieldSpec> {
    if kind == SpinKind::Spin0 && eps.is_some() {
        return Err(Error::Config("a spin-0 packet takes no polarisation".into()));
    }
    let axes = std::array::from_fn(|a| Profile1d::PlaneWave { k: k[a] });
    NrFieldSpec::new(kind, mass, axes, check_spin(kind, eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NrSample {
    pub spinor: Vec<C64>,
    pub gradient: [Vec<C64>; 3],
    /// Factorised form `Phi = psi' eps`, present for spin-1 eigenstates.
    pub eigen: Option<SpinEigenSample>,
    pub method: DerivativeMethod,
}

/// `psi'`, `grad psi'` and the constant unit polarisation of a spin eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinEigenSample {
    pub amplitude: C64,
    pub gradient: [C64; 3],
    pub polarization: [C64; 3],
}

impl Sampled for NrFieldSpec {
    fn sample(&self, x: &FourVector) -> Result<FieldSample> {
        let eigen = self.polarization.map(|polarization| {
            let j = self.jet(x);
            SpinEigenSample { amplitude: j.psi, gradient: j.grad, polarization }
        });
        Ok(FieldSample::Nr(NrSample {
            spinor: self.spinor(x),
            gradient: self.spinor_gradient(x),
            eigen,
            method: DerivativeMethod::Analytic,
        }))
    }
}

fn rest_phase(mass: f64, t: f64) -> C64 {
    C64::from_polar(1.0 / (std::f64::consts::SQRT_2 * mass), -mass * t)
}

/// Klein-Gordon field `phi = exp(-i m t) psi' / (sqrt(2) m)` embedded in
/// Kemmer form. Approximate: exact only to leading order in k/m.
#[derive(Debug, Clone)]
pub struct NrLiftedScalar {
    spec: NrFieldSpec,
}

impl NrLiftedScalar {
    pub fn new(spec: NrFieldSpec) -> Result<Self> {
        if spec.kind != SpinKind::Spin0 {
            return Err(Error::Config("scalar lift needs a spin-0 packet".into()));
        }
        Ok(NrLiftedScalar { spec })
    }

    pub fn spec(&self) -> &NrFieldSpec {
        &self.spec
    }

    /// `(phi, d_mu phi)`.
    pub fn phi_and_gradient(&self, x: &FourVector) -> (C64, [C64; 4]) {
        let m = self.spec.mass;
        let f = rest_phase(m, x.time());
        let j = self.spec.jet(x);
        let d0 = f * (j.dt - I * m * j.psi);
        (f * j.psi, [d0, f * j.grad[0], f * j.grad[1], f * j.grad[2]])
    }
}

impl KemmerField for NrLiftedScalar {
    fn rep(&self) -> &'static DkpRep {
        representation(SpinKind::Spin0)
    }

    fn mass(&self) -> f64 {
        self.spec.mass
    }

    fn provenance(&self) -> Provenance {
        Provenance::NrLifted
    }

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>> {
        let (phi, d) = self.phi_and_gradient(x);
        Ok(spin0_components(phi, &d, self.spec.mass))
    }
}

/// Proca field `A = f psi' eps`, `A^0 = f (eps . grad psi') / (i m)` with
/// `f = exp(-i m t) / (sqrt(2) m)`, embedded in Kemmer form. The time
/// component follows from the Lorenz condition at leading order.
#[derive(Debug, Clone)]
pub struct NrLiftedProca {
    spec: NrFieldSpec,
}

impl NrLiftedProca {
    pub fn new(spec: NrFieldSpec) -> Result<Self> {
        if spec.kind != SpinKind::Spin1 {
            return Err(Error::Config("Proca lift needs a spin-1 packet".into()));
        }
        Ok(NrLiftedProca { spec })
    }

    pub fn spec(&self) -> &NrFieldSpec {
        &self.spec
    }

    /// `(A^nu, d_mu A^nu)`.
    pub fn potential_and_gradient(&self, x: &FourVector) -> ([C64; 4], [[C64; 4]; 4]) {
        let m = self.spec.mass;
        let f = rest_phase(m, x.time());
        let j = self.spec.jet(x);
        let e = self.spec.eps();
        let im = I * m;
        let s: C64 = (0..3).map(|k| e[k] * j.grad[k]).sum();
        let ds_t: C64 = (0..3).map(|k| e[k] * j.dt_grad[k]).sum();
        let mut a = [ZERO; 4];
        let mut da = [[ZERO; 4]; 4];
        a[0] = f * s / im;
        da[0][0] = f * (ds_t - im * s) / im;
        for i in 0..3 {
            a[i + 1] = f * j.psi * e[i];
            da[0][i + 1] = f * (j.dt - im * j.psi) * e[i];
            let hs: C64 = (0..3).map(|k| e[k] * j.hess[i][k]).sum();
            da[i + 1][0] = f * hs / im;
            for k in 0..3 {
                da[i + 1][k + 1] = f * j.grad[i] * e[k];
            }
        }
        (a, da)
    }
}

impl KemmerField for NrLiftedProca {
    fn rep(&self) -> &'static DkpRep {
        representation(SpinKind::Spin1)
    }

    fn mass(&self) -> f64 {
        self.spec.mass
    }

    fn provenance(&self) -> Provenance {
        Provenance::NrLifted
    }

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>> {
        let (a, da) = self.potential_and_gradient(x);
        Ok(spin1_components(&a, &da, self.spec.mass))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::centered_derivatives;
    use crate::random::{rng, uniform};

    fn circular() -> [C64; 3] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(0.0, s), ZERO]
    }

    fn events(seed: u64, n: usize, t: (f64, f64), r3: f64) -> Vec<FourVector> {
        let mut r = rng(seed);
        (0..n)
            .map(|_| {
                FourVector::new(
                    uniform(&mut r, t.0, t.1),
                    uniform(&mut r, -r3, r3),
                    uniform(&mut r, -r3, r3),
                    uniform(&mut r, -r3, r3),
                )
            })
            .collect()
    }

    #[test]
    fn gaussian_solves_schrodinger() {
        let f = nr_gaussian(SpinKind::Spin0, 1.3, 0.8, [0.1, -0.2, 0.3], [0.5, -0.4, 0.2], None).unwrap();
        for x in events(5, 100, (0.0, 4.0), 2.0) {
            assert!(f.schrodinger_residual(&x) < 1e-8, "{}", f.schrodinger_residual(&x));
        }
        let s = nr_two_slit(SpinKind::Spin1, 1.0, 4.0, 0.5, 1.0, Some(circular())).unwrap();
        for x in events(6, 100, (0.0, 10.0), 4.0) {
            assert!(s.schrodinger_residual(&x) < 1e-8);
        }
    }

    #[test]
    fn gaussian_is_normalised_at_all_times() {
        // Riemann sum of |g|^2 along one axis.
        let p = Profile1d::Gaussian { center: 0.3, sigma: 0.7, k: 1.1 };
        for t in [0.0, 1.0, 5.0] {
            let h = 0.01;
            let s: f64 = (-3000..3000).map(|n| p.jet(t, n as f64 * h, 1.0).g.norm_sqr() * h).sum();
            assert!((s - 1.0).abs() < 1e-9, "t={t} norm={s}");
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let f = nr_two_slit(SpinKind::Spin0, 1.0, 3.0, 0.6, 0.8, None).unwrap();
        let g = nr_gaussian(SpinKind::Spin0, 1.0, 0.9, [0.0; 3], [0.3, 0.1, -0.2], None).unwrap();
        let x = FourVector::new(0.7, 0.4, 0.9, -0.3);
        let h = 1e-4;
        for spec in [&f, &g] {
            let j = spec.jet(&x);
            let d = centered_derivatives(|y| Ok(vec![spec.psi_prime(y)]), &x, h).unwrap();
            assert!((d[0][0] - j.dt).norm() < 1e-7);
            for a in 0..3 {
                assert!((d[a + 1][0] - j.grad[a]).norm() < 1e-7);
                let dg = centered_derivatives(|y| Ok(spec.jet(y).grad.to_vec()), &x, h).unwrap();
                assert!((dg[0][a] - j.dt_grad[a]).norm() < 1e-6);
                for b in 0..3 {
                    assert!((dg[b + 1][a] - j.hess[b][a]).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn two_slit_is_mirror_symmetric() {
        let f = nr_two_slit(SpinKind::Spin0, 1.0, 4.0, 0.5, 1.0, None).unwrap();
        let mut r = rng(7);
        for _ in 0..50 {
            let (x, y) = (uniform(&mut r, -5.0, 5.0), uniform(&mut r, -5.0, 5.0));
            let a = f.psi_prime(&FourVector::new(0.0, x, y, 0.0));
            let b = f.psi_prime(&FourVector::new(0.0, x, -y, 0.0));
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn constructor_errors() {
        assert!(matches!(
            nr_gaussian(SpinKind::Spin0, 1.0, 0.0, [0.0; 3], [0.0; 3], None),
            Err(Error::NonPositive { name: "sigma", .. })
        ));
        assert!(nr_gaussian(SpinKind::Spin1, 1.0, 1.0, [0.0; 3], [0.0; 3], None).is_err());
        let bad = [C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO];
        assert!(nr_gaussian(SpinKind::Spin1, 1.0, 1.0, [0.0; 3], [0.0; 3], Some(bad)).is_err());
        assert!(nr_two_slit(SpinKind::Spin0, 1.0, -1.0, 0.5, 1.0, None).is_err());
        assert!(nr_plane_wave(SpinKind::Spin0, 0.0, [0.0; 3], None).is_err());
    }

    #[test]
    fn lifted_fields_approach_kemmer_solutions() {
        // The lift is exact up to terms of relative order (k/m)^2 and 1/(m sigma)^2.
        let s = nr_gaussian(SpinKind::Spin0, 1.0, 100.0, [0.0; 3], [0.02, 0.0, 0.0], None).unwrap();
        let v = nr_gaussian(SpinKind::Spin1, 1.0, 100.0, [0.0; 3], [0.02, 0.0, 0.0], Some(circular())).unwrap();
        let ls = NrLiftedScalar::new(s).unwrap();
        let lv = NrLiftedProca::new(v).unwrap();
        let x = FourVector::new(10.0, 30.0, -20.0, 5.0);
        assert!(ls.kemmer_residual(&x).unwrap() < 1e-3);
        assert!(lv.kemmer_residual(&x).unwrap() < 1e-3);
        assert!(NrLiftedScalar::new(nr_plane_wave(SpinKind::Spin1, 1.0, [0.0; 3], Some(circular())).unwrap()).is_err());
    }

    #[test]
    fn lifted_rest_plane_wave_is_exact() {
        let f = NrLiftedScalar::new(nr_plane_wave(SpinKind::Spin0, 2.0, [0.0; 3], None).unwrap()).unwrap();
        let x = FourVector::new(0.3, 0.0, 0.0, 0.0);
        let (phi, d) = f.phi_and_gradient(&x);
        assert!((phi - C64::from_polar(1.0 / (8.0f64).sqrt(), -0.6)).norm() < 1e-15);
        assert!((d[0] + I * 2.0 * phi).norm() < 1e-15);
        assert!(f.kemmer_residual(&x).unwrap() < 1e-8);
    }
}
