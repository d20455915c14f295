//! Minkowski four-vectors, rank-2 tensors, Lorentz boosts and small dense
//! complex matrices.
//!
//! Conventions used throughout the crate: natural units (c = hbar = 1) and the
//! metric g = diag(+1, -1, -1, -1). Four-vectors store contravariant
//! components v^mu; [`FourVector::lower`] returns the covariant v_mu.
//! [`Tensor2`] stores contravariant components T^{mu nu}.

use std::fmt::Write as _;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Diagonal of the metric tensor.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// g_{mu nu} (numerically equal to g^{mu nu}).
#[inline]
pub fn metric(mu: usize, nu: usize) -> f64 {
    if mu == nu {
        METRIC[mu]
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(v0: f64, v1: f64, v2: f64, v3: f64) -> Self {
        FourVector([v0, v1, v2, v3])
    }

    pub fn from_parts(time: f64, space: [f64; 3]) -> Self {
        FourVector([time, space[0], space[1], space[2]])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn lower(&self) -> FourVector {
        FourVector([self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        minkowski_dot(self, self)
    }

    pub fn scale(&self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }

    pub fn max_abs_diff(&self, other: &FourVector) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for FourVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self.scale(-1.0)
    }
}

/// u^0 v^0 - u^1 v^1 - u^2 v^2 - u^3 v^3.
pub fn minkowski_dot(u: &FourVector, v: &FourVector) -> f64 {
    u.0[0] * v.0[0] - u.0[1] * v.0[1] - u.0[2] * v.0[2] - u.0[3] * v.0[3]
}

/// Future-directed timelike or null, up to `tol`.
pub fn is_future_causal(v: &FourVector, tol: f64) -> bool {
    v.0[0] >= -tol && v.norm_sq() >= -tol
}

/// Real rank-2 tensor with contravariant components `c[mu][nu] = T^{mu nu}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor2 {
    pub c: [[f64; 4]; 4],
}

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2 { c: [[0.0; 4]; 4] };

    pub fn new(c: [[f64; 4]; 4]) -> Self {
        Tensor2 { c }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Tensor2 { c: std::array::from_fn(|mu| std::array::from_fn(|nu| f(mu, nu))) }
    }

    pub fn transpose(&self) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| self.c[nu][mu])
    }

    pub fn symmetric_part(&self) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| 0.5 * (self.c[mu][nu] + self.c[nu][mu]))
    }

    pub fn antisymmetric_part(&self) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| 0.5 * (self.c[mu][nu] - self.c[nu][mu]))
    }

    /// max |T^{mu nu} + T^{nu mu}|
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                r = r.max((self.c[mu][nu] + self.c[nu][mu]).abs());
            }
        }
        r
    }

    /// max |T^{mu nu} - T^{nu mu}|
    pub fn symmetry_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                r = r.max((self.c[mu][nu] - self.c[nu][mu]).abs());
            }
        }
        r
    }

    /// T^{mu nu} a_nu for a contravariant `a`.
    pub fn contract_second(&self, a: &FourVector) -> FourVector {
        let al = a.lower();
        FourVector(std::array::from_fn(|mu| (0..4).map(|nu| self.c[mu][nu] * al.0[nu]).sum()))
    }

    /// T^{mu nu} a_mu a_nu. Off-diagonal pairs are summed before scaling, so
    /// an exactly antisymmetric tensor contracts to exactly zero.
    pub fn double_contract(&self, a: &FourVector) -> f64 {
        let al = a.lower();
        let mut s = 0.0;
        for mu in 0..4 {
            s += self.c[mu][mu] * al.0[mu] * al.0[mu];
            for nu in mu + 1..4 {
                s += (self.c[mu][nu] + self.c[nu][mu]) * (al.0[mu] * al.0[nu]);
            }
        }
        s
    }

    /// Lambda^mu_a Lambda^nu_b T^{ab}.
    pub fn transform(&self, l: &LorentzTransform) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += l.m[mu][a] * l.m[nu][b] * self.c[a][b];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor2) -> f64 {
        (*self - *other).max_abs()
    }

    /// The column T^{mu nu} for fixed `nu`, indexed by mu.
    pub fn column(&self, nu: usize) -> FourVector {
        FourVector(std::array::from_fn(|mu| self.c[mu][nu]))
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Tensor2) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| self.c[mu][nu] + rhs.c[mu][nu])
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Tensor2) -> Tensor2 {
        Tensor2::from_fn(|mu, nu| self.c[mu][nu] - rhs.c[mu][nu])
    }
}

/// Lambda^mu_nu acting on contravariant vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTransform {
    pub m: [[f64; 4]; 4],
}

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform { m: std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 })) }
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector(std::array::from_fn(|mu| (0..4).map(|nu| self.m[mu][nu] * v.0[nu]).sum()))
    }

    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        LorentzTransform {
            m: std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum())),
        }
    }

    /// max |(Lambda^T g Lambda - g)_{ij}|
    pub fn metric_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| self.m[k][i] * METRIC[k] * self.m[k][j]).sum();
                r = r.max((s - metric(i, j)).abs());
            }
        }
        r
    }
}

/// Pure boost with three-velocity `beta`; maps (1,0,0,0) to gamma (1, beta).
pub fn boost(beta: [f64; 3]) -> Result<LorentzTransform> {
    let b2: f64 = beta.iter().map(|b| b * b).sum();
    if !b2.is_finite() || b2 >= 1.0 {
        return Err(Error::InvalidVelocity { speed: b2.sqrt() });
    }
    if b2 == 0.0 {
        return Ok(LorentzTransform::identity());
    }
    let gamma = 1.0 / (1.0 - b2).sqrt();
    let mut m = [[0.0; 4]; 4];
    m[0][0] = gamma;
    for i in 0..3 {
        m[0][i + 1] = gamma * beta[i];
        m[i + 1][0] = gamma * beta[i];
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i + 1][j + 1] = delta + (gamma - 1.0) * beta[i] * beta[j] / b2;
        }
    }
    Ok(LorentzTransform { m })
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        &(self * other) - &(other * self)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (p, q) = (self.n, other.n);
        Self::from_fn(p * q, |i, j| self[(i / q, j / q)] * other[(i % q, j % q)])
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        Ok((0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// psi^dagger A psi.
    pub fn quadratic_form(&self, psi: &[C64]) -> Result<C64> {
        let av = self.apply(psi)?;
        Ok(psi.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }

    /// Row-major text table with `re+im i` entries.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{}{:+}i", z.re, z.im)
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Euclidean helpers for spatial three-vectors.
pub(crate) mod vec3 {
    pub fn norm(v: &[f64; 3]) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    pub fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
}

/// Levi-Civita symbol on {0,1,2}.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
