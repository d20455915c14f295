//! Centered-difference divergence checks with a two-step convergence ratio.

use crate::algebra::{FourVector, Tensor2, C64};
use crate::dkp::{representation, SpinKind};
use crate::error::{Error, Result};
use crate::fields::{spin0_components, Boundary, GridField, KemmerField, MultiKemmerField};

use super::{
    charge_current, energy_momentum, lorentz_force_density, multi_current, observer_current, uniform_field_tensor,
    Observer,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    /// For many-particle audits only the time component is meaningful.
    pub event: FourVector,
    pub h: f64,
    /// One entry per audited component at step `h`.
    pub residual: Vec<f64>,
    /// The same at `h / 2`, when evaluated.
    pub refined: Option<Vec<f64>>,
    /// `max |residual| / max |refined|`; present only with `refined`.
    pub ratio: Option<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl DivergenceReport {
    fn new(event: FourVector, h: f64, residual: Vec<f64>, refined: Option<Vec<f64>>) -> Self {
        let ratio = refined.as_ref().map(|r| max_abs(&residual) / max_abs(r));
        DivergenceReport { event, h, residual, refined, ratio }
    }

    /// Largest residual at the finest step evaluated.
    pub fn max_residual(&self) -> f64 {
        max_abs(self.refined.as_deref().unwrap_or(&self.residual))
    }

    /// Convergence order implied by the ratio, `log2(ratio)`.
    pub fn order(&self) -> Option<f64> {
        self.ratio.map(f64::log2)
    }

    /// `event=..;h=..;residual=..;refined=..;ratio=..` on one line.
    pub fn to_record(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let e = self.event.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("event={e};h={};residual={}", self.h, join(&self.residual));
        if let Some(r) = &self.refined {
            s.push_str(&format!(";refined={}", join(r)));
        }
        if let Some(r) = self.ratio {
            s.push_str(&format!(";ratio={r}"));
        }
        s
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { name: "h", value: h })
    }
}

/// `flux(x)[k]` is the vector `J_k^mu`; the residual is
/// `d_mu J_k^mu - source(x)[k]` by centered differences.
fn divergence_at<F, S>(x: &FourVector, h: f64, flux: &F, source: &S) -> Result<Vec<f64>>
where
    F: Fn(&FourVector) -> Result<Vec<FourVector>>,
    S: Fn(&FourVector) -> Result<Vec<f64>>,
{
    let mut res: Vec<f64> = source(x)?.into_iter().map(|s| -s).collect();
    for mu in 0..4 {
        let (mut p, mut m) = (*x, *x);
        p[mu] += h;
        m[mu] -= h;
        let (fp, fm) = (flux(&p)?, flux(&m)?);
        if fp.len() != res.len() || fm.len() != res.len() {
            return Err(Error::DimensionMismatch { expected: res.len(), found: fp.len() });
        }
        for (k, r) in res.iter_mut().enumerate() {
            *r += (fp[k][mu] - fm[k][mu]) / (2.0 * h);
        }
    }
    Ok(res)
}

/// Divergence of a family of vector fields at `x` with step `h`, and at
/// `h / 2` as well when `refine` is set.
pub fn divergence_audit<F, S>(x: &FourVector, h: f64, refine: bool, flux: F, source: S) -> Result<DivergenceReport>
where
    F: Fn(&FourVector) -> Result<Vec<FourVector>>,
    S: Fn(&FourVector) -> Result<Vec<f64>>,
{
    check_step(h)?;
    let coarse = divergence_at(x, h, &flux, &source)?;
    let fine = if refine { Some(divergence_at(x, h / 2.0, &flux, &source)?) } else { None };
    Ok(DivergenceReport::new(*x, h, coarse, fine))
}

/// `d_mu (Theta^{mu nu} a_nu)` for an observer current.
pub fn current_divergence(field: &dyn KemmerField, obs: &Observer, x: &FourVector, h: f64) -> Result<DivergenceReport> {
    divergence_audit(
        x,
        h,
        true,
        |y| Ok(vec![observer_current(&energy_momentum(field.rep(), &field.psi(y)?)?, obs)]),
        |_| Ok(vec![0.0]),
    )
}

/// `d_mu s^mu`.
pub fn charge_divergence(field: &dyn KemmerField, x: &FourVector, h: f64) -> Result<DivergenceReport> {
    divergence_audit(
        x,
        h,
        true,
        |y| Ok(vec![charge_current(field.rep(), &field.psi(y)?, field.mass())?]),
        |_| Ok(vec![0.0]),
    )
}

/// `d_mu Theta^{mu nu} - e F^{nu mu} s_mu` for nu = 0..3; `force` supplies
/// `(F, e)` for a coupled field and is `None` in the free case.
pub fn tensor_divergence(
    field: &dyn KemmerField,
    x: &FourVector,
    h: f64,
    force: Option<(Tensor2, f64)>,
) -> Result<DivergenceReport> {
    divergence_audit(
        x,
        h,
        true,
        |y| {
            let t = energy_momentum(field.rep(), &field.psi(y)?)?;
            Ok((0..4).map(|nu| t.column(nu)).collect())
        },
        |y| match &force {
            None => Ok(vec![0.0; 4]),
            Some((f, e)) => {
                let s = charge_current(field.rep(), &field.psi(y)?, field.mass())?;
                Ok(lorentz_force_density(f, &s, *e)?.0.to_vec())
            }
        },
    )
}

fn multi_residual(field: &dyn MultiKemmerField, obs: &Observer, t: f64, positions: &[[f64; 3]], h: f64) -> Result<f64> {
    let reps = field.reps();
    let eval = |t: f64, pos: &[[f64; 3]]| multi_current(&reps, &field.psi(t, pos)?, obs);
    let mut r = (eval(t + h, positions)?.density - eval(t - h, positions)?.density) / (2.0 * h);
    for alpha in 0..positions.len() {
        for i in 0..3 {
            let (mut p, mut m) = (positions.to_vec(), positions.to_vec());
            p[alpha][i] += h;
            m[alpha][i] -= h;
            r += (eval(t, &p)?.per_particle[alpha][i + 1] - eval(t, &m)?.per_particle[alpha][i + 1]) / (2.0 * h);
        }
    }
    Ok(r)
}

/// `d_t j^{0..0} + sum_alpha d_i^(alpha) j^{0..i_alpha..0}` on equal-time
/// configuration space.
pub fn multi_divergence(
    field: &dyn MultiKemmerField,
    obs: &Observer,
    t: f64,
    positions: &[[f64; 3]],
    h: f64,
) -> Result<DivergenceReport> {
    check_step(h)?;
    if positions.len() != field.particles() {
        return Err(Error::DimensionMismatch { expected: field.particles(), found: positions.len() });
    }
    let coarse = multi_residual(field, obs, t, positions, h)?;
    let fine = multi_residual(field, obs, t, positions, h / 2.0)?;
    let event = FourVector::from_parts(t, positions[0]);
    Ok(DivergenceReport::new(event, h, vec![coarse], Some(vec![fine])))
}

/// Lattice audit at one node: `(residual, raw)` where `raw[nu] =
/// d_mu Theta^{mu nu}` and `residual[nu] = raw[nu] - e F^{nu mu} s_mu`,
/// for nu = 0, 1, with stencils of half-width `k` nodes.
pub fn grid_divergence(grid: &GridField, n: usize, j: usize, k: usize) -> Result<([f64; 2], [f64; 2])> {
    let nn = grid.nodes();
    let out = || Error::OutOfDomain { t: grid.node_t(n), x: grid.node_x(j.min(nn - 1)) };
    if k == 0 || n < k || n + k > grid.steps() || j >= nn {
        return Err(out());
    }
    let (jp, jm) = match grid.params().boundary {
        Boundary::Periodic => ((j + k) % nn, (j + nn - k) % nn),
        Boundary::Dirichlet if j >= k && j + k < nn => (j + k, j - k),
        Boundary::Dirichlet => return Err(out()),
    };
    let rep = representation(SpinKind::Spin0);
    let psi = |n: usize, j: usize| -> Result<Vec<C64>> {
        let (phi, d) = grid.node_covariant(n, j, grid.params().fd_nodes)?;
        let z = C64::new(0.0, 0.0);
        Ok(spin0_components(phi, &[d[0], d[1], z, z], grid.mass()))
    };
    let theta = |n: usize, j: usize| energy_momentum(rep, &psi(n, j)?);
    let (tp, tm) = (theta(n + k, j)?, theta(n - k, j)?);
    let (xp, xm) = (theta(n, jp)?, theta(n, jm)?);
    let kd = k as f64;
    let raw: [f64; 2] = std::array::from_fn(|nu| {
        (tp.c[0][nu] - tm.c[0][nu]) / (2.0 * kd * grid.dt()) + (xp.c[1][nu] - xm.c[1][nu]) / (2.0 * kd * grid.h())
    });
    let s = charge_current(rep, &psi(n, j)?, grid.mass())?;
    let f = lorentz_force_density(&uniform_field_tensor(grid.potential().field_strength()), &s, grid.charge())?;
    Ok(([raw[0] - f[0], raw[1] - f[1]], raw))
}

/// Two-resolution lattice audit.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAudit {
    /// Residuals on the coarse grid (`residual`) and the fine grid (`refined`).
    pub report: DivergenceReport,
    /// Uncorrected `d_mu Theta^{mu nu}` on the fine grid.
    pub raw: [f64; 2],
}

/// Audits the node of `coarse` nearest to `(t, x)` and the coincident node of
/// `fine`, which must have exactly half the spacings.
pub fn grid_refinement(coarse: &GridField, fine: &GridField, t: f64, x: f64, k: usize) -> Result<GridAudit> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !close(fine.h() * 2.0, coarse.h())
        || !close(fine.dt() * 2.0, coarse.dt())
        || !close(fine.params().x_min, coarse.params().x_min)
    {
        return Err(Error::Config("refined grid must halve both spacings over the same domain".into()));
    }
    let n = (t / coarse.dt()).round() as usize;
    let j = ((x - coarse.params().x_min) / coarse.h()).round() as usize;
    let (rc, _) = grid_divergence(coarse, n, j, k)?;
    let (rf, raw) = grid_divergence(fine, 2 * n, 2 * j, k)?;
    let event = FourVector::new(coarse.node_t(n), coarse.node_x(j), 0.0, 0.0);
    Ok(GridAudit { report: DivergenceReport::new(event, coarse.h(), rc.to_vec(), Some(rf.to_vec())), raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        embed_spin0, embed_spin1, kg_superposition, proca_superposition, solve_coupled_kg_1p1, GridParams, Potential,
        ProductSuperposition,
    };
    use crate::random::{random_observer, random_proca_modes, random_scalar_modes, rng};
    use std::sync::Arc;

    #[test]
    fn free_currents_converge_at_second_order() {
        let mut r = rng(70);
        let s = embed_spin0(kg_superposition(random_scalar_modes(&mut r, 3, 1.0, 1.0), 1.0).unwrap());
        let p = embed_spin1(proca_superposition(random_proca_modes(&mut r, 3, 1.0, 1.0), 1.0).unwrap());
        let x = FourVector::new(0.3, 0.2, -0.1, 0.4);
        let obs = random_observer(&mut r, 0.5);
        for f in [&s as &dyn KemmerField, &p] {
            for rep in [
                current_divergence(f, &obs, &x, 0.1).unwrap(),
                charge_divergence(f, &x, 0.1).unwrap(),
                tensor_divergence(f, &x, 0.1, None).unwrap(),
            ] {
                assert!(rep.ratio.unwrap() >= 3.5, "{}", rep.to_record());
                assert!(rep.max_residual() < 1e-2);
            }
        }
    }

    #[test]
    fn two_particle_conservation() {
        let mut r = rng(71);
        let a: Arc<dyn KemmerField> =
            Arc::new(embed_spin0(kg_superposition(random_scalar_modes(&mut r, 2, 1.0, 1.0), 1.0).unwrap()));
        let b: Arc<dyn KemmerField> =
            Arc::new(embed_spin0(kg_superposition(random_scalar_modes(&mut r, 2, 1.0, 1.0), 1.0).unwrap()));
        let one = C64::new(1.0, 0.0);
        let f = ProductSuperposition::new(vec![(one, vec![a.clone(), b.clone()]), (C64::new(0.0, 0.5), vec![b, a])])
            .unwrap();
        let rep = multi_divergence(&f, &Observer::rest(), 0.2, &[[0.1, 0.0, 0.3], [-0.4, 0.2, 0.0]], 0.1).unwrap();
        assert!(rep.ratio.unwrap() >= 3.5, "{}", rep.to_record());
    }

    #[test]
    fn report_ratio_only_with_two_steps() {
        let rep =
            divergence_audit(&FourVector::ZERO, 0.1, false, |_| Ok(vec![FourVector::ZERO]), |_| Ok(vec![0.0])).unwrap();
        assert!(rep.ratio.is_none() && rep.refined.is_none());
        assert!(!rep.to_record().contains("ratio"));
        assert!(
            divergence_audit(&FourVector::ZERO, 0.0, false, |_| Ok(vec![FourVector::ZERO]), |_| Ok(vec![0.0])).is_err()
        );
    }

    #[test]
    fn free_grid_is_conserved_and_coupled_grid_obeys_force_law() {
        let l = 8.0 * std::f64::consts::PI;
        let p = 0.75;
        let e = (p * p + 1.0f64).sqrt();
        let run = |nx: usize, pot: Potential| {
            let params = GridParams::with_courant(0.0, l, nx, 2.0, 0.5, Boundary::Periodic);
            solve_coupled_kg_1p1(params, pot, 1.0, 1.0, &|x| C64::from_polar(1.0, p * x), &|x| {
                C64::new(0.0, -e) * C64::from_polar(1.0, p * x)
            })
            .unwrap()
        };
        for pot in [Potential::Free, Potential::UniformFieldTemporalGauge { field: 0.3 }] {
            let (c, f) = (run(128, pot), run(256, pot));
            let a = grid_refinement(&c, &f, 1.0, l / 3.0, 2).unwrap();
            assert!(a.report.ratio.unwrap() >= 3.5, "{}", a.report.to_record());
            if pot != Potential::Free {
                assert!(a.raw[0].abs() > 10.0 * a.report.max_residual());
            }
        }
        let c = run(128, Potential::Free);
        assert!(grid_refinement(&c, &run(200, Potential::Free), 1.0, 1.0, 2).is_err());
        assert!(matches!(grid_divergence(&c, 0, 3, 2), Err(Error::OutOfDomain { .. })));
    }
}
