//! Grid-level checks of the σ-power cancellations from sampled fields.

use crate::cgo::amplitude::AmplitudeFields;
use crate::cgo::geometry::ProbeGeometry;
use crate::coeff::Coefficients;
use crate::error::Result;
use crate::field::SpaceTimeField;
use crate::grid::Grid;
use crate::prelude::*;
use crate::stencil::{gradient, laplacian_at};

/// Sup-norms over interior nodes and inner time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaAudit {
    /// `max |b|∇φ|² − 1|`.
    pub eikonal: f64,
    /// Coefficient of `σ³`: `iA(b|∇φ|² − 1)` with `A = a₁`.
    pub cubic: f64,
    /// Coefficient of `σ²`.
    pub quadratic: f64,
    /// Coefficient of `σ¹`.
    pub linear: f64,
    /// `sup |a₁|`, `sup |∂_t a₁|`, `sup |S₁[a₁]|` for scale.
    pub reference: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportResiduals {
    /// `sup |∂_t a₁ − ∂_r a₁ + ζa₁|`.
    pub a1: f64,
    /// `sup |∂_t a₂ − ∂_r a₂ + ζa₂ − ξ̃|`.
    pub a2: f64,
    /// `sup |∂_t a₁|`, `sup |ξ̃|`.
    pub reference: [f64; 2],
}

struct Coeffs<'a> {
    grid: &'a Grid,
    phase: &'a [f64],
    b: f64,
    c2: f64,
    alpha: f64,
}

impl Coeffs<'_> {
    fn grad_phase(&self, k: usize) -> ([f64; 2], f64) {
        (gradient(self.grid, self.phase, k), laplacian_at(self.grid, self.phase, k))
    }

    /// `(σ³, σ², σ¹)` coefficients for amplitude slices `A, A_t, A_tt` at node `k`.
    fn powers(&self, a: [&[C64]; 3], k: usize) -> [C64; 3] {
        let i = C64::new(0.0, 1.0);
        let ([px, py], lap_phi) = self.grad_phase(k);
        let g2 = px * px + py * py;
        let dot = |v: &[C64]| {
            let [gx, gy] = gradient(self.grid, v, k);
            gx * px + gy * py
        };
        let (v, vt, vtt) = (a[0][k], a[1][k], a[2][k]);
        let cubic = i * v * (self.b * g2 - 1.0);
        let quad = -vt * 3.0 - v * self.alpha + vt * (self.b * g2) + (dot(a[0]) * 2.0 + v * lap_phi) * self.b + v * (self.c2 * g2);
        let lin = i
            * (vtt * 3.0 + vt * (2.0 * self.alpha)
                - (dot(a[1]) * 2.0 + vt * lap_phi) * self.b
                - laplacian_at(self.grid, a[0], k) * self.b
                - (dot(a[0]) * 2.0 + v * lap_phi) * self.c2);
        [cubic, quad, lin]
    }
}

/// Evaluates the `σ³, σ², σ¹` coefficients of `e^{−iσΦ}𝒫(e^{iσΦ}(a₁ + σ⁻¹a₂))`
/// by finite differences of the sampled phase and amplitudes.
pub fn sigma_expansion_audit(phase: &[f64], amps: &AmplitudeFields, coeff: &Coefficients, grid: &Grid) -> Result<SigmaAudit> {
    amps.a1[0].check_shape(grid)?;
    let c = Coeffs { grid, phase, b: coeff.b(), c2: coeff.c2(), alpha: coeff.alpha() };
    let mut out = SigmaAudit { eikonal: 0.0, cubic: 0.0, quadratic: 0.0, linear: 0.0, reference: [0.0; 3] };
    for &k in grid.interior() {
        let ([px, py], _) = c.grad_phase(k);
        out.eikonal = out.eikonal.max((c.b * (px * px + py * py) - 1.0).abs());
    }
    for n in 1..grid.nt() {
        let f1 = [amps.a1[0].level(n), amps.a1[1].level(n), amps.a1[2].level(n)];
        let f2 = [amps.a2[0].level(n), amps.a2[1].level(n), amps.a2[2].level(n)];
        for &k in grid.interior() {
            let p1 = c.powers(f1, k);
            let p2 = c.powers(f2, k);
            out.cubic = out.cubic.max(p1[0].norm());
            out.quadratic = out.quadratic.max((p1[1] + p2[0]).norm());
            out.linear = out.linear.max((p1[2] + p2[1]).norm());
            out.reference[0] = out.reference[0].max(f1[0][k].norm());
            out.reference[1] = out.reference[1].max(f1[1][k].norm());
            out.reference[2] = out.reference[2].max(p1[2].norm());
        }
    }
    Ok(out)
}

fn radial_derivative(geom: &ProbeGeometry, grid: &Grid, u: &[C64], k: usize) -> C64 {
    let [gx, gy] = gradient(grid, u, k);
    let q = geom.q();
    let x = grid.coords(k);
    let (dx, dy) = (x[0] - q[0], x[1] - q[1]);
    let d = dx.hypot(dy);
    (gx * dx + gy * dy) * (geom.sqrt_b() / d)
}

/// Residuals of both transport equations on interior nodes.
pub fn transport_residuals(amps: &AmplitudeFields, geom: &ProbeGeometry, coeff: &Coefficients, grid: &Grid) -> Result<TransportResiduals> {
    amps.a1[0].check_shape(grid)?;
    let gamma = coeff.gamma();
    let mut out = TransportResiduals { a1: 0.0, a2: 0.0, reference: [0.0; 2] };
    let res = |f: &[SpaceTimeField; 3], n: usize, k: usize, r: f64| {
        let u = f[0].level(n);
        f[1].get(n, k) - radial_derivative(geom, grid, u, k) + u[k] * (0.5 * gamma - 0.5 / r)
    };
    for n in 0..grid.levels() {
        for &k in grid.interior() {
            let (r, _) = geom.polar(grid.coords(k));
            out.a1 = out.a1.max(res(&amps.a1, n, k, r).norm());
            out.a2 = out.a2.max((res(&amps.a2, n, k, r) - amps.xi.get(n, k)).norm());
            out.reference[0] = out.reference[0].max(amps.a1[1].get(n, k).norm());
            out.reference[1] = out.reference[1].max(amps.xi.get(n, k).norm());
        }
    }
    Ok(out)
}
