//! Explicit leapfrog solver for `(D_mu D^mu + m^2) phi = 0` in 1+1 dimensions
//! with `D_mu = d_mu + i e V_mu`.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;

use crate::algebra::{FourVector, C64};
use crate::dkp::{representation, DkpRep, SpinKind};
use crate::error::{Error, Result};

use super::{spin0_components, DerivativeMethod, FieldSample, KemmerField, Provenance, Sampled};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Nodes `x_min + j h` for `j < nx`, wrapping around.
    Periodic,
    /// Nodes `x_min + j h` for `j <= nx` with `phi = 0` on both ends.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of cells.
    pub nx: usize,
    /// Time step; the run takes `round(t_end / dt)` steps from t = 0.
    pub dt: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Half-width, in lattice steps, of the stencils used for sampled derivatives.
    pub fd_nodes: usize,
}

impl GridParams {
    /// Parameters with `dt = courant * h` and unit derivative stencils.
    pub fn with_courant(x_min: f64, x_max: f64, nx: usize, t_end: f64, courant: f64, boundary: Boundary) -> Self {
        let h = (x_max - x_min) / nx as f64;
        GridParams { x_min, x_max, nx, dt: courant * h, t_end, boundary, fd_nodes: 1 }
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn nt(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn nodes(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.nx,
            Boundary::Dirichlet => self.nx + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name, value: f64| if value > 0.0 { Ok(()) } else { Err(Error::NonPositive { name, value }) };
        pos("x_max - x_min", self.x_max - self.x_min)?;
        pos("dt", self.dt)?;
        pos("t_end", self.t_end)?;
        if self.nx < 4 {
            return Err(Error::Config(format!("grid needs at least 4 cells, got {}", self.nx)));
        }
        if self.fd_nodes == 0 {
            return Err(Error::Config("fd_nodes must be at least 1".into()));
        }
        if self.nt() < 2 * self.fd_nodes {
            return Err(Error::Config("too few time steps for the derivative stencil".into()));
        }
        Ok(())
    }
}

/// External potential in 1+1D, given by its contravariant components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Free,
    ConstantScalar {
        v0: f64,
    },
    /// `V^0 = -E x`.
    UniformFieldScalarGauge {
        field: f64,
    },
    /// `V^1 = -E t`; consistent with periodic boundaries.
    UniformFieldTemporalGauge {
        field: f64,
    },
}

impl Potential {
    /// `(V^0, V^1)`.
    pub fn upper(&self, t: f64, x: f64) -> [f64; 2] {
        match *self {
            Potential::Free => [0.0, 0.0],
            Potential::ConstantScalar { v0 } => [v0, 0.0],
            Potential::UniformFieldScalarGauge { field } => [-field * x, 0.0],
            Potential::UniformFieldTemporalGauge { field } => [0.0, -field * t],
        }
    }

    /// `(V_0, V_1)`.
    pub fn lower(&self, t: f64, x: f64) -> [f64; 2] {
        let [a, b] = self.upper(t, x);
        [a, -b]
    }

    /// `(d_t V_0, d_x V_1)`; both vanish for every variant here.
    fn sources(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// `F^{10} = d^1 V^0 - d^0 V^1`.
    pub fn field_strength(&self) -> f64 {
        match *self {
            Potential::Free | Potential::ConstantScalar { .. } => 0.0,
            Potential::UniformFieldScalarGauge { field } | Potential::UniformFieldTemporalGauge { field } => field,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Potential::Free => "free".into(),
            Potential::ConstantScalar { v0 } => format!("constant V0={v0}"),
            Potential::UniformFieldScalarGauge { field } => format!("uniform field E={field} (V0=-E x)"),
            Potential::UniformFieldTemporalGauge { field } => format!("uniform field E={field} (V1=-E t)"),
        }
    }
}

/// Finished lattice solution; immutable and shareable.
#[derive(Debug, Clone)]
pub struct GridField {
    params: GridParams,
    potential: Potential,
    charge: f64,
    mass: f64,
    values: Vec<C64>,
}

pub fn solve_coupled_kg_1p1(
    params: GridParams,
    potential: Potential,
    charge: f64,
    mass: f64,
    phi0: &dyn Fn(f64) -> C64,
    dphi0: &dyn Fn(f64) -> C64,
) -> Result<GridField> {
    params.validate()?;
    if !(mass > 0.0) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    let (h, dt, nt, nn) = (params.h(), params.dt, params.nt(), params.nodes());
    let xs: Vec<f64> = (0..nn).map(|j| params.x_min + j as f64 * h).collect();
    let t_final = nt as f64 * dt;
    let mut vmax = 0.0f64;
    for &t in &[0.0, t_final] {
        for &x in &[params.x_min, params.x_max] {
            let v = potential.upper(t, x);
            vmax = vmax.max(v[0].abs()).max(v[1].abs());
        }
    }
    let bound = 0.9 * h / (1.0 + (charge * vmax).abs() * h);
    if dt > bound {
        return Err(Error::Stability { dt, bound });
    }

    let mut u0: Vec<C64> = xs.iter().map(|&x| phi0(x)).collect();
    let mut v0: Vec<C64> = xs.iter().map(|&x| dphi0(x)).collect();
    if u0.iter().chain(&v0).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Config("initial data must be finite".into()));
    }
    if params.boundary == Boundary::Dirichlet {
        for v in [&mut u0, &mut v0] {
            v[0] = C64::new(0.0, 0.0);
            v[nn - 1] = C64::new(0.0, 0.0);
        }
    }

    let e = charge;
    let [dv0, dv1] = potential.sources();
    // S = D_1 D_1 u - m^2 u at time t.
    let spatial = |t: f64, u: &[C64], out: &mut [C64]| {
        for j in 0..nn {
            let (l, r) = match params.boundary {
                Boundary::Periodic => (u[(j + nn - 1) % nn], u[(j + 1) % nn]),
                Boundary::Dirichlet => {
                    if j == 0 || j == nn - 1 {
                        out[j] = C64::new(0.0, 0.0);
                        continue;
                    }
                    (u[j - 1], u[j + 1])
                }
            };
            let v1 = potential.lower(t, xs[j])[1];
            let ux = (r - l) / (2.0 * h);
            let uxx = (r - u[j] * 2.0 + l) / (h * h);
            out[j] = uxx + I * (2.0 * e * v1) * ux + u[j] * (I * e * dv1 - e * e * v1 * v1 - mass * mass);
        }
    };

    let mut values = Vec::with_capacity((nt + 1) * nn);
    values.extend_from_slice(&u0);
    let mut s = vec![C64::new(0.0, 0.0); nn];
    spatial(0.0, &u0, &mut s);
    let u1: Vec<C64> = (0..nn)
        .map(|j| {
            let v0l = potential.lower(0.0, xs[j])[0];
            let acc = s[j] - I * (2.0 * e * v0l) * v0[j] - u0[j] * (I * e * dv0 - e * e * v0l * v0l);
            u0[j] + v0[j] * dt + acc * (0.5 * dt * dt)
        })
        .collect();
    values.extend_from_slice(&u1);
    for n in 1..nt {
        let t = n as f64 * dt;
        let (prev, cur) = (&values[(n - 1) * nn..n * nn], &values[n * nn..(n + 1) * nn]);
        spatial(t, cur, &mut s);
        let next: Vec<C64> = (0..nn)
            .map(|j| {
                if params.boundary == Boundary::Dirichlet && (j == 0 || j == nn - 1) {
                    return C64::new(0.0, 0.0);
                }
                let v0l = potential.lower(t, xs[j])[0];
                let a = C64::new(1.0 / (dt * dt), e * v0l / dt);
                let rhs = s[j] + (cur[j] * 2.0 - prev[j]) / (dt * dt) + I * (e * v0l / dt) * prev[j]
                    - cur[j] * (I * e * dv0 - e * e * v0l * v0l);
                rhs / a
            })
            .collect();
        values.extend_from_slice(&next);
    }
    Ok(GridField { params, potential, charge, mass, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub phi: C64,
    /// `(d_t phi, d_x phi)`.
    pub dphi: [C64; 2],
    /// `(D_0 phi, D_1 phi)`.
    pub covariant: [C64; 2],
    pub method: DerivativeMethod,
}

impl GridField {
    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn h(&self) -> f64 {
        self.params.h()
    }

    pub fn dt(&self) -> f64 {
        self.params.dt
    }

    pub fn steps(&self) -> usize {
        self.params.nt()
    }

    pub fn nodes(&self) -> usize {
        self.params.nodes()
    }

    pub fn t_final(&self) -> f64 {
        self.steps() as f64 * self.dt()
    }

    pub fn node_x(&self, j: usize) -> f64 {
        self.params.x_min + j as f64 * self.h()
    }

    pub fn node_t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    pub fn value(&self, n: usize, j: usize) -> C64 {
        self.values[n * self.nodes() + j]
    }

    /// Time level `n` as a slice over nodes.
    pub fn level(&self, n: usize) -> &[C64] {
        let nn = self.nodes();
        &self.values[n * nn..(n + 1) * nn]
    }

    fn check_node(&self, n: usize, j: usize) -> Result<()> {
        if n > self.steps() || j >= self.nodes() {
            return Err(Error::OutOfDomain { t: n as f64 * self.dt(), x: self.params.x_min + j as f64 * self.h() });
        }
        Ok(())
    }

    /// `(phi, [d_t phi, d_x phi])` at a node with stencils of half-width `k`
    /// lattice steps; one-sided second-order stencils at the lattice edges.
    pub fn node_derivatives(&self, n: usize, j: usize, k: usize) -> Result<(C64, [C64; 2])> {
        self.check_node(n, j)?;
        let (nt, nn) = (self.steps(), self.nodes());
        if k == 0 || 2 * k > nt || 2 * k >= nn {
            return Err(Error::Config(format!("stencil half-width {k} does not fit the lattice")));
        }
        let kd = k as f64;
        let dt = if n >= k && n + k <= nt {
            (self.value(n + k, j) - self.value(n - k, j)) / (2.0 * kd * self.dt())
        } else if n < k {
            (self.value(n + k, j) * 4.0 - self.value(n, j) * 3.0 - self.value(n + 2 * k, j)) / (2.0 * kd * self.dt())
        } else {
            (self.value(n, j) * 3.0 - self.value(n - k, j) * 4.0 + self.value(n - 2 * k, j)) / (2.0 * kd * self.dt())
        };
        let hx = 2.0 * kd * self.h();
        let dx = match self.params.boundary {
            Boundary::Periodic => (self.value(n, (j + k) % nn) - self.value(n, (j + nn - k) % nn)) / hx,
            Boundary::Dirichlet if j >= k && j + k < nn => (self.value(n, j + k) - self.value(n, j - k)) / hx,
            Boundary::Dirichlet if j < k => {
                (self.value(n, j + k) * 4.0 - self.value(n, j) * 3.0 - self.value(n, j + 2 * k)) / hx
            }
            Boundary::Dirichlet => {
                (self.value(n, j) * 3.0 - self.value(n, j - k) * 4.0 + self.value(n, j - 2 * k)) / hx
            }
        };
        Ok((self.value(n, j), [dt, dx]))
    }

    /// `(phi, [D_0 phi, D_1 phi])` at a node.
    pub fn node_covariant(&self, n: usize, j: usize, k: usize) -> Result<(C64, [C64; 2])> {
        let (phi, d) = self.node_derivatives(n, j, k)?;
        let v = self.potential.lower(self.node_t(n), self.node_x(j));
        let e = self.charge;
        Ok((phi, [d[0] + I * (e * v[0]) * phi, d[1] + I * (e * v[1]) * phi]))
    }

    /// Bilinear interpolation of the node samples.
    pub fn sample_at(&self, t: f64, x: f64) -> Result<GridSample> {
        let (h, dt) = (self.h(), self.dt());
        let span_x = match self.params.boundary {
            Boundary::Periodic => self.params.x_max,
            Boundary::Dirichlet => self.params.x_max + 1e-12 * h,
        };
        let tol = 1e-12 * dt;
        if !(t >= -tol && t <= self.t_final() + tol && x >= self.params.x_min && x < span_x) {
            return Err(Error::OutOfDomain { t, x });
        }
        let sx = ((x - self.params.x_min) / h).max(0.0);
        let st = (t / dt).max(0.0);
        let j0 = (sx.floor() as usize).min(self.params.nx - 1);
        let n0 = (st.floor() as usize).min(self.steps() - 1);
        let (fx, ft) = (sx - j0 as f64, st - n0 as f64);
        let j1 = (j0 + 1) % self.nodes();
        let k = self.params.fd_nodes;
        let corners = [
            (n0, j0, (1.0 - ft) * (1.0 - fx)),
            (n0, j1, (1.0 - ft) * fx),
            (n0 + 1, j0, ft * (1.0 - fx)),
            (n0 + 1, j1, ft * fx),
        ];
        let mut phi = C64::new(0.0, 0.0);
        let mut d = [C64::new(0.0, 0.0); 2];
        for (n, j, w) in corners {
            let (p, dd) = self.node_derivatives(n, j, k)?;
            phi += p * w;
            d[0] += dd[0] * w;
            d[1] += dd[1] * w;
        }
        let v = self.potential.lower(t, x);
        let e = self.charge;
        let covariant = [d[0] + I * (e * v[0]) * phi, d[1] + I * (e * v[1]) * phi];
        Ok(GridSample {
            phi,
            dphi: d,
            covariant,
            method: DerivativeMethod::FiniteDifference { dt: k as f64 * dt, dx: k as f64 * h },
        })
    }

    /// Charge density `s^0 = i (phi* D^0 phi - phi (D^0 phi)*)` at a node.
    pub fn charge_density(&self, n: usize, j: usize) -> Result<f64> {
        let (phi, d) = self.node_covariant(n, j, self.params.fd_nodes)?;
        Ok(-2.0 * (phi.conj() * d[0]).im)
    }

    /// `(t_n, sum_j s^0 h)` for every time level.
    pub fn charge_series(&self) -> Result<Vec<(f64, f64)>> {
        (0..=self.steps())
            .map(|n| {
                let q: f64 = (0..self.nodes()).map(|j| self.charge_density(n, j)).sum::<Result<f64>>()?;
                Ok((self.node_t(n), q * self.h()))
            })
            .collect()
    }

    /// Plain-text table `t x re im`, one line per node and level.
    pub fn export_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,re,im")?;
        for n in 0..=self.steps() {
            for j in 0..self.nodes() {
                let z = self.value(n, j);
                writeln!(w, "{},{},{},{}", self.node_t(n), self.node_x(j), z.re, z.im)?;
            }
        }
        Ok(())
    }

    /// Sidecar record describing the run.
    pub fn metadata(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "h={}", p.h());
        let _ = writeln!(s, "dt={}", p.dt);
        let _ = writeln!(s, "steps={}", p.nt());
        let _ = writeln!(s, "x_min={}", p.x_min);
        let _ = writeln!(s, "x_max={}", p.x_max);
        let _ = writeln!(s, "boundary={:?}", p.boundary);
        let _ = writeln!(s, "e={}", self.charge);
        let _ = writeln!(s, "m={}", self.mass);
        let _ = writeln!(s, "potential={}", self.potential.describe());
        s
    }
}

impl Sampled for GridField {
    fn sample(&self, x: &FourVector) -> Result<FieldSample> {
        Ok(FieldSample::Grid(self.sample_at(x.time(), x[1])?))
    }
}

/// Kemmer spin-0 form `(D_0 phi, D_1 phi, 0, 0, m phi)` of a lattice solution.
#[derive(Debug, Clone)]
pub struct GridKemmer {
    grid: Arc<GridField>,
}

impl GridKemmer {
    pub fn new(grid: Arc<GridField>) -> Self {
        GridKemmer { grid }
    }

    pub fn grid(&self) -> &GridField {
        &self.grid
    }

    pub fn node_psi(&self, n: usize, j: usize) -> Result<Vec<C64>> {
        let (phi, d) = self.grid.node_covariant(n, j, self.grid.params.fd_nodes)?;
        Ok(spin0_components(phi, &[d[0], d[1], C64::new(0.0, 0.0), C64::new(0.0, 0.0)], self.grid.mass))
    }
}

impl KemmerField for GridKemmer {
    fn rep(&self) -> &'static DkpRep {
        representation(SpinKind::Spin0)
    }

    fn mass(&self) -> f64 {
        self.grid.mass
    }

    fn provenance(&self) -> Provenance {
        Provenance::Grid
    }

    fn psi(&self, x: &FourVector) -> Result<Vec<C64>> {
        let s = self.grid.sample_at(x.time(), x[1])?;
        let z = C64::new(0.0, 0.0);
        Ok(spin0_components(s.phi, &[s.covariant[0], s.covariant[1], z, z], self.grid.mass))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 8.0 * std::f64::consts::PI;

    fn plane_wave(nx: usize, potential: Potential) -> (GridField, f64, f64) {
        let p = 2.0 * std::f64::consts::PI * 3.0 / L;
        let e = (p * p + 1.0).sqrt();
        let params = GridParams::with_courant(0.0, L, nx, 2.0, 0.5, Boundary::Periodic);
        let g = solve_coupled_kg_1p1(params, potential, 1.0, 1.0, &|x| C64::from_polar(1.0, p * x), &|x| {
            C64::new(0.0, -e) * C64::from_polar(1.0, p * x)
        })
        .unwrap();
        (g, p, e)
    }

    fn max_error(g: &GridField, exact: impl Fn(f64, f64) -> C64) -> f64 {
        let n = g.steps();
        (0..g.nodes()).map(|j| (g.value(n, j) - exact(g.node_t(n), g.node_x(j))).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn free_plane_wave_converges_at_second_order() {
        let errs: Vec<f64> = [128, 256]
            .iter()
            .map(|&nx| {
                let (g, p, e) = plane_wave(nx, Potential::Free);
                max_error(&g, |t, x| C64::from_polar(1.0, p * x - e * t))
            })
            .collect();
        assert!(errs[0] / errs[1] >= 3.5, "{errs:?}");
    }

    #[test]
    fn constant_scalar_potential_is_a_phase() {
        // phi = phi_free exp(-i e v0 t), so d_t phi(0) carries the extra phase rate.
        let v0 = 0.4;
        let errs: Vec<f64> = [128, 256]
            .iter()
            .map(|&nx| {
                let p = 2.0 * std::f64::consts::PI * 3.0 / L;
                let w = (p * p + 1.0).sqrt() + v0;
                let params = GridParams::with_courant(0.0, L, nx, 2.0, 0.5, Boundary::Periodic);
                let g = solve_coupled_kg_1p1(
                    params,
                    Potential::ConstantScalar { v0 },
                    1.0,
                    1.0,
                    &|x| C64::from_polar(1.0, p * x),
                    &|x| C64::new(0.0, -w) * C64::from_polar(1.0, p * x),
                )
                .unwrap();
                max_error(&g, |t, x| C64::from_polar(1.0, p * x - w * t))
            })
            .collect();
        assert!(errs[0] < 1e-2 && errs[0] / errs[1] >= 3.5, "{errs:?}");
    }

    #[test]
    fn unstable_step_rejected_before_stepping() {
        let mut params = GridParams::with_courant(0.0, L, 64, 1.0, 0.95, Boundary::Periodic);
        params.fd_nodes = 1;
        let r =
            solve_coupled_kg_1p1(params, Potential::Free, 1.0, 1.0, &|_| C64::new(1.0, 0.0), &|_| C64::new(0.0, 0.0));
        assert!(matches!(r, Err(Error::Stability { .. })));
    }

    #[test]
    fn sampling_outside_lattice_is_a_domain_error() {
        let (g, _, _) = plane_wave(64, Potential::Free);
        assert!(matches!(g.sample_at(3.0, 1.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(g.sample_at(0.5, -0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(g.sample_at(0.5, L), Err(Error::OutOfDomain { .. })));
        let s = g.sample_at(0.5, 1.0).unwrap();
        assert!(matches!(s.method, DerivativeMethod::FiniteDifference { .. }));
    }

    #[test]
    fn uniform_field_charge_is_conserved_to_second_order() {
        let drift = |nx: usize| {
            let sigma: f64 = 2.0;
            let (p, m): (f64, f64) = (0.5, 1.0);
            let e = (p * p + m * m).sqrt();
            let packet = move |x: f64| C64::from_polar((-x * x / (4.0 * sigma * sigma)).exp(), p * x);
            let params = GridParams::with_courant(-20.0, 20.0, nx, 2.0, 0.5, Boundary::Dirichlet);
            let g = solve_coupled_kg_1p1(
                params,
                Potential::UniformFieldScalarGauge { field: 0.02 },
                1.0,
                m,
                &packet,
                &move |x| packet(x) * C64::new(0.0, -e),
            )
            .unwrap();
            let q = g.charge_series().unwrap();
            q.iter().map(|(_, c)| (c - q[0].1).abs()).fold(0.0, f64::max) / q[0].1.abs()
        };
        let (a, b) = (drift(200), drift(400));
        assert!(a < 1e-2 && a / b >= 3.5, "{a} {b}");
    }

    #[test]
    fn field_strength_matches_both_gauges() {
        for pot in
            [Potential::UniformFieldScalarGauge { field: 0.3 }, Potential::UniformFieldTemporalGauge { field: 0.3 }]
        {
            // F^{10} = d^1 V^0 - d^0 V^1 by differences of the potential.
            let h = 1e-3;
            let d1v0 = -(pot.upper(1.0, 2.0 + h)[0] - pot.upper(1.0, 2.0 - h)[0]) / (2.0 * h);
            let d0v1 = (pot.upper(1.0 + h, 2.0)[1] - pot.upper(1.0 - h, 2.0)[1]) / (2.0 * h);
            assert!((d1v0 - d0v1 - pot.field_strength()).abs() < 1e-12);
        }
    }

    #[test]
    fn export_and_metadata() {
        let (g, _, _) = plane_wave(16, Potential::Free);
        let mut buf = Vec::new();
        g.export_table(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + (g.steps() + 1) * g.nodes());
        assert!(g.metadata().contains("potential=free"));
    }
}
