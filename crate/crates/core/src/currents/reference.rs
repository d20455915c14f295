//! Tensors and currents written directly in terms of the Klein-Gordon and
//! Proca fields. Used to cross-check the Kemmer bilinears.

use crate::algebra::{metric, FourVector, Tensor2, C64, METRIC};

/// Klein-Gordon tensor from `phi` and covariant derivatives `dphi[mu] = d_mu phi`
/// (or `D_mu phi` for a coupled field).
pub fn kg_tensor(phi: C64, dphi: &[C64; 4], mass: f64) -> Tensor2 {
    let up: [C64; 4] = std::array::from_fn(|mu| dphi[mu] * METRIC[mu]);
    let lag: f64 = (0..4).map(|a| (dphi[a] * up[a].conj()).re).sum::<f64>() - mass * mass * phi.norm_sqr();
    Tensor2::from_fn(|mu, nu| 2.0 * (up[mu] * up[nu].conj()).re - metric(mu, nu) * lag)
}

/// `s^mu = i (phi* d^mu phi - phi d^mu phi*)`.
pub fn kg_charge(phi: C64, dphi: &[C64; 4]) -> FourVector {
    FourVector(std::array::from_fn(|mu| -2.0 * (phi.conj() * dphi[mu]).im * METRIC[mu]))
}

/// `G^{mu nu}` from `da[mu][nu] = d_mu A^nu`.
fn field_upper(da: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    std::array::from_fn(|mu| std::array::from_fn(|nu| da[mu][nu] * METRIC[mu] - da[nu][mu] * METRIC[nu]))
}

/// Symmetrised Proca tensor from `A^nu` and `da[mu][nu] = d_mu A^nu`.
pub fn proca_tensor(a: &[C64; 4], da: &[[C64; 4]; 4], mass: f64) -> Tensor2 {
    let g = field_upper(da);
    let m2 = mass * mass;
    let mut lag = 0.0;
    for mu in 0..4 {
        lag += m2 * METRIC[mu] * a[mu].norm_sqr();
        for nu in 0..4 {
            lag -= 0.5 * METRIC[mu] * METRIC[nu] * g[mu][nu].norm_sqr();
        }
    }
    Tensor2::from_fn(|mu, nu| {
        let mut s = C64::new(0.0, 0.0);
        for al in 0..4 {
            s -= (g[mu][al].conj() * g[nu][al] + g[mu][al] * g[nu][al].conj()) * METRIC[al];
        }
        s += (a[mu] * a[nu].conj() + a[mu].conj() * a[nu]) * m2;
        s.re - metric(mu, nu) * lag
    })
}

/// `s^mu` raised from `s_mu = i (A^nu G*_{mu nu} - G_{mu nu} A*^nu)`.
pub fn proca_charge(a: &[C64; 4], da: &[[C64; 4]; 4]) -> FourVector {
    let g = field_upper(da);
    FourVector(std::array::from_fn(|mu| {
        let mut s = C64::new(0.0, 0.0);
        for nu in 0..4 {
            let lower = g[mu][nu] * (METRIC[mu] * METRIC[nu]);
            s += C64::new(0.0, 1.0) * (a[nu] * lower.conj() - lower * a[nu].conj());
        }
        s.re * METRIC[mu]
    }))
}
