//! Duffin-Kemmer-Petiau representations.
//!
//! The beta matrices are not tabulated. They are read off from the component
//! relations that the Kemmer equation `(i beta^mu d_mu - m) psi = 0` must
//! reproduce for a fixed embedding of the physical field:
//!
//! * spin 0: `psi = (d_0 phi, d_1 phi, d_2 phi, d_3 phi, m phi)`, where the
//!   component relations are `m psi_mu = d_mu psi_4` and
//!   `m psi_4 = -g^{mu mu} d_mu psi_mu` (the Klein-Gordon equation);
//! * spin 1: `psi = (-E, B, m A, -m A^0)`, where the relations are the
//!   definitions of E and B in terms of A together with the Proca equations.
//!
//! Each relation has the form `m psi_r = c d_nu psi_s`, which fixes the single
//! entry `(beta^nu)_{rs} = -i c`. The resulting matrices are then audited
//! against the trilinear DKP algebra by [`verify_algebra`].

use std::sync::OnceLock;

use crate::algebra::{levi_civita, metric, ComplexMatrix, C64, METRIC};
use crate::error::{Error, Result};

/// Default bound on the tensor-product spin-space dimension M^N.
pub const DEFAULT_DIMENSION_CAP: usize = 10_000;

/// Tolerance for the DKP algebra audit.
pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinKind {
    Spin0,
    Spin1,
}

impl SpinKind {
    pub fn dimension(self) -> usize {
        match self {
            SpinKind::Spin0 => 5,
            SpinKind::Spin1 => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinKind::Spin0 => "spin0",
            SpinKind::Spin1 => "spin1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "spin0" | "0" => Ok(SpinKind::Spin0),
            "spin1" | "1" => Ok(SpinKind::Spin1),
            other => Err(Error::Config(format!("unknown spin kind `{other}`"))),
        }
    }
}

/// A concrete DKP representation. `beta[mu]` holds the contravariant beta^mu.
#[derive(Debug, Clone)]
pub struct DkpRep {
    kind: SpinKind,
    beta: [ComplexMatrix; 4],
    eta0: ComplexMatrix,
    beta_tilde: [ComplexMatrix; 3],
    // eta0 (beta^mu beta^nu + beta^nu beta^mu - g^{mu nu}), contravariant
    theta_ops: Vec<ComplexMatrix>,
    // eta0 beta^mu
    charge_ops: [ComplexMatrix; 4],
}

impl DkpRep {
    /// Assemble a representation from explicit contravariant beta matrices.
    /// No algebra check is performed here; see [`verify_algebra`].
    pub fn from_betas(kind: SpinKind, beta: [ComplexMatrix; 4]) -> Result<Self> {
        let m = kind.dimension();
        for b in &beta {
            if b.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, found: b.dim() });
            }
        }
        let id = ComplexMatrix::identity(m);
        let b0sq = &beta[0] * &beta[0];
        let eta0 = &b0sq.scale_real(2.0) - &id;
        let beta_tilde = std::array::from_fn(|i| beta[0].commutator(&beta[i + 1]));
        let mut theta_ops = Vec::with_capacity(16);
        for mu in 0..4 {
            for nu in 0..4 {
                let sym = &(&beta[mu] * &beta[nu]) + &(&beta[nu] * &beta[mu]);
                let inner = &sym - &id.scale_real(metric(mu, nu));
                theta_ops.push(&eta0 * &inner);
            }
        }
        let charge_ops = std::array::from_fn(|mu| &eta0 * &beta[mu]);
        Ok(DkpRep { kind, beta, eta0, beta_tilde, theta_ops, charge_ops })
    }

    pub fn kind(&self) -> SpinKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    /// Contravariant beta^mu.
    pub fn beta(&self, mu: usize) -> &ComplexMatrix {
        &self.beta[mu]
    }

    /// Covariant beta_mu = g_{mu mu} beta^mu.
    pub fn beta_lower(&self, mu: usize) -> ComplexMatrix {
        self.beta[mu].scale_real(METRIC[mu])
    }

    pub fn eta0(&self) -> &ComplexMatrix {
        &self.eta0
    }

    /// beta_tilde_i = beta^0 beta^i - beta^i beta^0 for i = 1..=3.
    pub fn beta_tilde(&self, i: usize) -> &ComplexMatrix {
        &self.beta_tilde[i - 1]
    }

    /// eta0 (beta^mu beta^nu + beta^nu beta^mu - g^{mu nu}).
    pub fn theta_operator(&self, mu: usize, nu: usize) -> &ComplexMatrix {
        &self.theta_ops[mu * 4 + nu]
    }

    /// eta0 beta^mu.
    pub fn charge_operator(&self, mu: usize) -> &ComplexMatrix {
        &self.charge_ops[mu]
    }

    /// Plain-text dump of every matrix of the representation.
    pub fn dump(&self) -> String {
        let mut s = format!("# {} representation, dimension {}\n", self.kind.name(), self.dimension());
        for mu in 0..4 {
            s.push_str(&format!("## beta^{mu}\n"));
            s.push_str(&self.beta[mu].to_table());
        }
        s.push_str("## eta0\n");
        s.push_str(&self.eta0.to_table());
        for i in 1..=3 {
            s.push_str(&format!("## beta_tilde_{i}\n"));
            s.push_str(&self.beta_tilde[i - 1].to_table());
        }
        s
    }
}

/// `m psi_row = coeff * d_nu psi_col`
struct Relation {
    row: usize,
    nu: usize,
    col: usize,
    coeff: f64,
}

fn spin0_relations() -> Vec<Relation> {
    let mut rel = Vec::new();
    for mu in 0..4 {
        rel.push(Relation { row: mu, nu: mu, col: 4, coeff: 1.0 });
        rel.push(Relation { row: 4, nu: mu, col: mu, coeff: -METRIC[mu] });
    }
    rel
}

fn spin1_relations() -> Vec<Relation> {
    // Component blocks: 0..3 = -E, 3..6 = B, 6..9 = m A, 9 = -m A^0.
    let mut rel = Vec::new();
    for i in 0..3 {
        // -E_i = d_0 A^i + d_i A^0
        rel.push(Relation { row: i, nu: 0, col: 6 + i, coeff: 1.0 });
        rel.push(Relation { row: i, nu: i + 1, col: 9, coeff: -1.0 });
        // d_0 E = curl B + m^2 A
        rel.push(Relation { row: 6 + i, nu: 0, col: i, coeff: -1.0 });
        // div E = -m^2 A^0
        rel.push(Relation { row: 9, nu: i + 1, col: i, coeff: -1.0 });
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    // B = curl A
                    rel.push(Relation { row: 3 + i, nu: j + 1, col: 6 + k, coeff: e });
                    rel.push(Relation { row: 6 + i, nu: j + 1, col: 3 + k, coeff: -e });
                }
            }
        }
    }
    rel
}

/// Build the spin-0 (5x5) or spin-1 (10x10) representation.
pub fn build_representation(kind: SpinKind) -> DkpRep {
    let m = kind.dimension();
    let relations = match kind {
        SpinKind::Spin0 => spin0_relations(),
        SpinKind::Spin1 => spin1_relations(),
    };
    let mut beta: [ComplexMatrix; 4] = std::array::from_fn(|_| ComplexMatrix::zeros(m));
    for r in relations {
        beta[r.nu][(r.row, r.col)] += C64::new(0.0, -r.coeff);
    }
    DkpRep::from_betas(kind, beta).expect("relation tables match the representation dimension")
}

/// Shared, lazily built representation.
pub fn representation(kind: SpinKind) -> &'static DkpRep {
    static SPIN0: OnceLock<DkpRep> = OnceLock::new();
    static SPIN1: OnceLock<DkpRep> = OnceLock::new();
    match kind {
        SpinKind::Spin0 => SPIN0.get_or_init(|| build_representation(SpinKind::Spin0)),
        SpinKind::Spin1 => SPIN1.get_or_init(|| build_representation(SpinKind::Spin1)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    pub max_residual: f64,
    pub worst_triple: (usize, usize, usize),
    /// max |eta0^2 - 1|
    pub eta_residual: f64,
    pub passed: bool,
}

/// Exhaustive check of
/// `beta_mu beta_nu beta_lambda + beta_lambda beta_nu beta_mu = beta_mu g_{nu lambda} + beta_lambda g_{nu mu}`
/// over all 64 index triples.
pub fn verify_algebra(rep: &DkpRep) -> AlgebraReport {
    let lower: Vec<ComplexMatrix> = (0..4).map(|mu| rep.beta_lower(mu)).collect();
    let mut max_residual = -1.0;
    let mut worst_triple = (0, 0, 0);
    for mu in 0..4 {
        for nu in 0..4 {
            let bmn = &lower[mu] * &lower[nu];
            for la in 0..4 {
                let lhs = &(&bmn * &lower[la]) + &(&(&lower[la] * &lower[nu]) * &lower[mu]);
                let rhs = &lower[mu].scale_real(metric(nu, la)) + &lower[la].scale_real(metric(nu, mu));
                let r = lhs.max_abs_diff(&rhs);
                if r > max_residual {
                    max_residual = r;
                    worst_triple = (mu, nu, la);
                }
            }
        }
    }
    let id = ComplexMatrix::identity(rep.dimension());
    let eta_residual = (rep.eta0() * rep.eta0()).max_abs_diff(&id);
    AlgebraReport {
        max_residual,
        worst_triple,
        eta_residual,
        passed: max_residual < ALGEBRA_TOLERANCE && eta_residual < ALGEBRA_TOLERANCE,
    }
}

/// Gamma_{mu nu} = eta0 (beta_mu beta_nu + beta_nu beta_mu - g_{mu nu}), covariant indices.
#[derive(Debug, Clone)]
pub struct GammaOp {
    pub mu: usize,
    pub nu: usize,
    pub matrix: ComplexMatrix,
}

pub fn gamma_operator(rep: &DkpRep, mu: usize, nu: usize) -> Result<GammaOp> {
    if mu > 3 || nu > 3 {
        return Err(Error::Config(format!("gamma index ({mu}, {nu}) out of range 0..=3")));
    }
    // Lowering both indices only rescales by g_{mu mu} g_{nu nu}.
    let matrix = rep.theta_operator(mu, nu).scale_real(METRIC[mu] * METRIC[nu]);
    Ok(GammaOp { mu, nu, matrix })
}

/// Gamma_{mu nu} a^nu for a contravariant observer four-velocity.
pub fn gamma_contracted(rep: &DkpRep, mu: usize, a: &[f64; 4]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rep.dimension());
    for nu in 0..4 {
        if a[nu] != 0.0 {
            let g = rep.theta_operator(mu, nu).scale_real(METRIC[mu] * METRIC[nu] * a[nu]);
            out = &out + &g;
        }
    }
    out
}

/// An operator acting on the spin index of one particle of an N-particle
/// tensor-product space. Particle indices are 1-based; particle 1 is the
/// slowest-varying index of the flattened state.
#[derive(Debug, Clone)]
pub struct LiftedOp {
    dims: Vec<usize>,
    alpha: usize,
    factor: ComplexMatrix,
}

pub fn lift_to_particle(reps: &[&DkpRep], alpha: usize, op: &ComplexMatrix) -> Result<LiftedOp> {
    lift_to_particle_with_cap(reps, alpha, op, DEFAULT_DIMENSION_CAP)
}

pub fn lift_to_particle_with_cap(reps: &[&DkpRep], alpha: usize, op: &ComplexMatrix, cap: usize) -> Result<LiftedOp> {
    let dims: Vec<usize> = reps.iter().map(|r| r.dimension()).collect();
    LiftedOp::new(dims, alpha, op.clone(), cap)
}

/// Product of the factor dimensions, or `None` on overflow.
pub fn product_dimension(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d))
}

impl LiftedOp {
    pub fn new(dims: Vec<usize>, alpha: usize, factor: ComplexMatrix, cap: usize) -> Result<Self> {
        let n = dims.len();
        if alpha == 0 || alpha > n {
            return Err(Error::ParticleIndex { index: alpha, count: n });
        }
        if factor.dim() != dims[alpha - 1] {
            return Err(Error::DimensionMismatch { expected: dims[alpha - 1], found: factor.dim() });
        }
        match product_dimension(&dims) {
            Some(d) if d <= cap => {}
            Some(d) => return Err(Error::CapacityExceeded { dimension: d, cap }),
            None => return Err(Error::CapacityExceeded { dimension: usize::MAX, cap }),
        }
        Ok(LiftedOp { dims, alpha, factor })
    }

    pub fn particles(&self) -> usize {
        self.dims.len()
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn dimension(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.factor
    }

    /// Apply to a flattened N-particle spin vector without materialising the
    /// full operator.
    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let total = self.dimension();
        if psi.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: psi.len() });
        }
        let a = self.alpha - 1;
        let d = self.dims[a];
        let right: usize = self.dims[a + 1..].iter().product();
        let left = total / (d * right);
        let mut out = vec![C64::new(0.0, 0.0); total];
        for l in 0..left {
            for i in 0..d {
                for j in 0..d {
                    let f = self.factor[(i, j)];
                    if f == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = (l * d + i) * right;
                    let src = (l * d + j) * right;
                    for r in 0..right {
                        out[dst + r] += f * psi[src + r];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense `1 (x) .. (x) op (x) .. (x) 1`; limited to dimension 1000.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        let total = self.dimension();
        if total > 1000 {
            return Err(Error::CapacityExceeded { dimension: total, cap: 1000 });
        }
        let a = self.alpha - 1;
        let left: usize = self.dims[..a].iter().product();
        let right: usize = self.dims[a + 1..].iter().product();
        Ok(ComplexMatrix::identity(left).kron(&self.factor).kron(&ComplexMatrix::identity(right)))
    }
}

/// Kemmer-equation residual `i beta^mu d_mu psi - m psi` given the four
/// partial derivatives `dpsi[mu] = d psi / d x^mu`.
pub fn kemmer_residual(rep: &DkpRep, mass: f64, psi: &[C64], dpsi: &[Vec<C64>; 4]) -> Result<Vec<C64>> {
    let mut res: Vec<C64> = psi.iter().map(|z| -z * mass).collect();
    for mu in 0..4 {
        let b = rep.beta(mu).apply(&dpsi[mu])?;
        for (r, v) in res.iter_mut().zip(b) {
            *r += C64::new(0.0, 1.0) * v;
        }
    }
    Ok(res)
}

/// Residuals of the Schroedinger-like form:
/// `i d_0 psi - (-i beta_tilde_i d_i + m beta^0) psi` and the constraint
/// `i beta^i (beta^0)^2 d_i psi - m (1 - (beta^0)^2) psi`.
pub fn schrodinger_form_residuals(
    rep: &DkpRep,
    mass: f64,
    psi: &[C64],
    dpsi: &[Vec<C64>; 4],
) -> Result<(Vec<C64>, Vec<C64>)> {
    let i = C64::new(0.0, 1.0);
    let n = rep.dimension();
    let b0psi = rep.beta(0).apply(psi)?;
    let mut evolution: Vec<C64> = (0..n).map(|r| i * dpsi[0][r] - mass * b0psi[r]).collect();
    let b0sq = rep.beta(0) * rep.beta(0);
    let proj = &ComplexMatrix::identity(n) - &b0sq;
    let mut constraint: Vec<C64> = proj.apply(psi)?.into_iter().map(|z| -mass * z).collect();
    for k in 1..=3 {
        let bt = rep.beta_tilde(k).apply(&dpsi[k])?;
        let c = (rep.beta(k) * &b0sq).apply(&dpsi[k])?;
        for r in 0..n {
            evolution[r] += -i * bt[r];
            constraint[r] += i * c[r];
        }
    }
    Ok((evolution, constraint))
}
