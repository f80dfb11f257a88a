//! Assembly of `u = e^{iσ'(φ+t)}(a₁ + σ'⁻¹a₂) + R_σ` with `σ' = ±σ` or `±2σ`,
//! and the remainder problem `𝒫R = −𝒫(ansatz)` with zero data.

use crate::cgo::amplitude::{transport_table, AmplitudeFields, AmplitudeSpec};
use crate::cgo::geometry::{eikonal_phase, ProbeGeometry};
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{BoundaryField, DataTuple, Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::mgt::MgtSolver;
use crate::mgt::{discrete_norm, NormKind};
use crate::prelude::*;
use crate::stencil::gradient;
use alloc::format;
use core::f64::consts::PI;

/// Minimum grid points per spatial (and temporal) wavelength.
pub const POINTS_PER_WAVELENGTH: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct CgoProbe {
    pub sigma: f64,
    /// Signed effective frequency `sign·scale·σ`.
    pub sigma_eff: f64,
    pub phase: Vec<f64>,
    pub a1: SpaceTimeField,
    pub a2: SpaceTimeField,
    /// The ansatz and its first two time derivatives.
    pub ansatz: Solution,
    /// Boundary trace and initial triple of the ansatz.
    pub induced_data: DataTuple,
    /// `−𝒫(ansatz)`.
    pub remainder_source: SpaceTimeField,
}

/// `L²(Q)` norms of a remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderReport {
    pub sigma: f64,
    pub norm_r: f64,
    pub norm_rt: f64,
    pub norm_grad_r: f64,
}

/// Refuses frequencies the grid cannot resolve.
pub fn check_resolution(sigma_eff: f64, b: f64, grid: &Grid) -> Result<()> {
    let s = sigma_eff.abs();
    let h = grid.hx().max(grid.hy());
    let ppw_x = 2.0 * PI * b.sqrt() / (s * h);
    let ppw_t = 2.0 * PI / (s * grid.dt());
    if ppw_x >= POINTS_PER_WAVELENGTH && ppw_t >= POINTS_PER_WAVELENGTH {
        return Ok(());
    }
    let extent = ((grid.nx() - 1) as f64 * grid.hx()).max((grid.ny() - 1) as f64 * grid.hy());
    let required_nx = (POINTS_PER_WAVELENGTH * s * extent / (2.0 * PI * b.sqrt())).ceil() as usize + 1;
    let required_nt = (POINTS_PER_WAVELENGTH * s * grid.t_final() / (2.0 * PI)).ceil() as usize;
    Err(Error::Resolution {
        sigma: sigma_eff,
        points_per_wavelength: ppw_x.min(ppw_t),
        required_nx: required_nx.max(grid.nx()),
        required_nt: required_nt.max(grid.nt()),
    })
}

/// Assembles a probe from precomputed amplitudes (which do not depend on `σ`).
pub fn assemble_probe(
    sigma: f64,
    sign: f64,
    scale: f64,
    amps: &AmplitudeFields,
    geom: &ProbeGeometry,
    coeff: &Coefficients,
    grid: &Grid,
) -> Result<CgoProbe> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Argument(format!("sigma = {sigma} must be positive")));
    }
    if sign.abs() != 1.0 || !(scale == 1.0 || scale == 2.0) {
        return Err(Error::Argument(format!("sign must be ±1 and scale 1 or 2, got {sign}, {scale}")));
    }
    let s = sign * scale * sigma;
    check_resolution(s, coeff.b(), grid)?;
    amps.a1[0].check_shape(grid)?;
    let phase = eikonal_phase(geom, grid);
    let inv = 1.0 / s;
    let i = C64::new(0.0, 1.0);
    let mut ansatz = Solution::zeros(grid);
    let mut a2 = SpaceTimeField::zeros(grid, Role::U);
    let mut a1 = SpaceTimeField::zeros(grid, Role::U);
    let mut src = SpaceTimeField::zeros(grid, Role::Source);
    for n in 0..grid.levels() {
        let t = grid.time(n);
        for k in 0..grid.n_nodes() {
            if !grid.is_active(k) {
                continue;
            }
            let e = (i * (s * (phase[k] + t))).exp();
            let a = amps.a1[0].get(n, k) + amps.a2[0].get(n, k) * inv;
            let at = amps.a1[1].get(n, k) + amps.a2[1].get(n, k) * inv;
            let att = amps.a1[2].get(n, k) + amps.a2[2].get(n, k) * inv;
            ansatz.u.set(n, k, e * a);
            ansatz.u_t.set(n, k, e * (i * s * a + at));
            ansatz.u_tt.set(n, k, e * (a * (-s * s) + i * (2.0 * s) * at + att));
            a1.set(n, k, amps.a1[0].get(n, k));
            a2.set(n, k, amps.a2[0].get(n, k));
            src.set(n, k, -e * (amps.order0.get(n, k) + amps.order_minus1.get(n, k) * inv));
        }
    }
    let mut h = BoundaryField::zeros(grid);
    for n in 0..grid.levels() {
        for (slot, b) in grid.boundary().iter().enumerate() {
            h.h.set(n, slot, ansatz.u.get(n, b.node));
            h.h_t.set(n, slot, ansatz.u_t.get(n, b.node));
            h.h_tt.set(n, slot, ansatz.u_tt.get(n, b.node));
        }
    }
    let induced_data = DataTuple {
        h,
        u0: ansatz.u.level(0).to_vec(),
        u1: ansatz.u_t.level(0).to_vec(),
        u2: ansatz.u_tt.level(0).to_vec(),
        f: None,
    };
    Ok(CgoProbe { sigma, sigma_eff: s, phase, a1, a2, ansatz, induced_data, remainder_source: src })
}

impl CgoProbe {
    /// Computes the transport table and amplitudes, then assembles.
    pub fn build(
        sigma: f64,
        sign: f64,
        scale: f64,
        spec: &AmplitudeSpec,
        geom: &ProbeGeometry,
        coeff: &Coefficients,
        grid: &Grid,
    ) -> Result<Self> {
        check_resolution(sign * scale * sigma, coeff.b(), grid)?;
        let table = transport_table(spec, coeff, core::slice::from_ref(geom), grid)?;
        let amps = AmplitudeFields::compute(spec, geom, coeff, grid, &table)?;
        assemble_probe(sigma, sign, scale, &amps, geom, coeff, grid)
    }

    /// `ansatz + R`.
    pub fn with_remainder(&self, r: &Solution) -> Result<Solution> {
        self.ansatz.add_scaled(C64::new(1.0, 0.0), r)
    }
}

/// Solves for `R_σ` and reports `‖R‖`, `‖R_t‖`, `‖∇R‖` in `L²(Q)`.
pub fn remainder_solve(probe: &CgoProbe, solver: &MgtSolver) -> Result<(Solution, RemainderReport)> {
    let grid = solver.grid();
    let data = DataTuple::source_only(grid, probe.remainder_source.clone());
    let r = solver.solve(&data)?;
    let norm_r = discrete_norm(&r.u, grid, NormKind::L2Q)?;
    let norm_rt = discrete_norm(&r.u_t, grid, NormKind::L2Q)?;
    let mut g = 0.0;
    for n in 0..grid.levels() {
        let u = r.u.level(n);
        let mut s = 0.0;
        for k in 0..grid.n_nodes() {
            let w = grid.area_weight(k);
            if w > 0.0 {
                let [gx, gy] = gradient(grid, u, k);
                s += w * (gx.norm_sqr() + gy.norm_sqr());
            }
        }
        g += grid.time_weight(n) * s;
    }
    Ok((r, RemainderReport { sigma: probe.sigma, norm_r, norm_rt, norm_grad_r: g.sqrt() }))
}
