//! Crank–Nicolson solver for the linear MGT problem
//!
//! ```text
//! u_ttt + αu_tt − bΔu_t − c²Δu = f,   u|_Σ = h,   (u, u_t, u_tt)|_{t=0} = (u0, u1, u2)
//! ```
//!
//! written as the first-order system `u' = v, v' = a, a' = −αa + bΔv + c²Δu + f`
//! and integrated with the trapezoidal rule. Eliminating `u, v` leaves one
//! SPD system per step for the interior values of `a`:
//!
//! ```text
//! [(1 + αk) − (bk² + c²k³)Δ₀] aⁿ⁺¹ = (1 − αk)aⁿ + kΔ[b(vⁿ + ṽ) + c²(uⁿ + ũ)] + k(fⁿ + fⁿ⁺¹)
//! ```
//!
//! with `k = dt/2`, `ṽ = v + ka`, `ũ = u + 2kv + k²a` (set to `h_t`, `h` on Σ).
//! The matrix is factored once. The scheme is unconditionally stable for
//! `α ≥ c²/b`; accuracy is second order in `dt` and `h`.

use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{DataTuple, Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::linalg::{factor_shifted_laplacian, BandedCholesky};
use crate::prelude::*;
use crate::stencil::laplacian_interior;

/// Factored stepper for one `(coefficients, grid)` pair.
#[derive(Debug, Clone)]
pub struct MgtSolver {
    coeff: Coefficients,
    grid: Grid,
    chol: BandedCholesky,
}

impl MgtSolver {
    pub fn new(coeff: &Coefficients, grid: &Grid) -> Result<Self> {
        let k = 0.5 * grid.dt();
        let chol = factor_shifted_laplacian(grid, 1.0 + coeff.alpha() * k, coeff.b() * k * k + coeff.c2() * k * k * k)?;
        Ok(Self { coeff: *coeff, grid: grid.clone(), chol })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn coefficients(&self) -> &Coefficients {
        &self.coeff
    }

    pub fn solve(&self, data: &DataTuple) -> Result<Solution> {
        let grid = &self.grid;
        data.check_shape(grid)?;
        let (alpha, b, c2) = (self.coeff.alpha(), self.coeff.b(), self.coeff.c2());
        let k = 0.5 * grid.dt();
        let nn = grid.n_nodes();
        let zero = C64::new(0.0, 0.0);
        let mut sol = Solution::zeros(grid);

        let mut u = vec![zero; nn];
        let mut v = vec![zero; nn];
        let mut a = vec![zero; nn];
        for kk in 0..nn {
            if grid.is_active(kk) {
                u[kk] = data.u0[kk];
                v[kk] = data.u1[kk];
                a[kk] = data.u2[kk];
            }
        }
        for (slot, bn) in grid.boundary().iter().enumerate() {
            u[bn.node] = data.h.h.get(0, slot);
            v[bn.node] = data.h.h_t.get(0, slot);
            a[bn.node] = data.h.h_tt.get(0, slot);
        }
        store(&mut sol, 0, &u, &v, &a);
        if !(finite(&u) && finite(&v) && finite(&a)) {
            return Err(Error::Divergence { step: 0 });
        }

        let mut ut = vec![zero; nn];
        let mut vt = vec![zero; nn];
        let mut comb = vec![zero; nn];
        let mut lap = vec![zero; nn];
        let mut rhs = vec![zero; grid.interior().len()];
        let mut scratch = Vec::new();
        for n in 0..grid.nt() {
            for kk in 0..nn {
                ut[kk] = u[kk] + v[kk] * (2.0 * k) + a[kk] * (k * k);
                vt[kk] = v[kk] + a[kk] * k;
            }
            for (slot, bn) in grid.boundary().iter().enumerate() {
                ut[bn.node] = data.h.h.get(n + 1, slot);
                vt[bn.node] = data.h.h_t.get(n + 1, slot);
            }
            for kk in 0..nn {
                comb[kk] = (v[kk] + vt[kk]) * b + (u[kk] + ut[kk]) * c2;
            }
            laplacian_interior(grid, &comb, &mut lap);
            for (slot, &kk) in grid.interior().iter().enumerate() {
                let mut r = a[kk] * (1.0 - alpha * k) + lap[kk] * k;
                if let Some(f) = &data.f {
                    r += (f.get(n, kk) + f.get(n + 1, kk)) * k;
                }
                rhs[slot] = r;
            }
            self.chol.solve_complex(&mut rhs, &mut scratch);
            for (slot, &kk) in grid.interior().iter().enumerate() {
                let an = rhs[slot];
                a[kk] = an;
                u[kk] = ut[kk] + an * (k * k);
                v[kk] = vt[kk] + an * k;
            }
            for (slot, bn) in grid.boundary().iter().enumerate() {
                u[bn.node] = ut[bn.node];
                v[bn.node] = vt[bn.node];
                a[bn.node] = data.h.h_tt.get(n + 1, slot);
            }
            if !(finite(&u) && finite(&v) && finite(&a)) {
                return Err(Error::Divergence { step: n + 1 });
            }
            store(&mut sol, n + 1, &u, &v, &a);
        }
        Ok(sol)
    }
}

fn finite(x: &[C64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn store(sol: &mut Solution, n: usize, u: &[C64], v: &[C64], a: &[C64]) {
    sol.u.level_mut(n).copy_from_slice(u);
    sol.u_t.level_mut(n).copy_from_slice(v);
    sol.u_tt.level_mut(n).copy_from_slice(a);
}

/// One-shot solve; see [`MgtSolver`].
pub fn solve_linear(data: &DataTuple, coeff: &Coefficients, grid: &Grid) -> Result<Solution> {
    MgtSolver::new(coeff, grid)?.solve(data)
}

/// Half-level residual of the discrete third equation,
/// `(aⁿ⁺¹ − aⁿ)/dt − ½(Gⁿ + Gⁿ⁺¹)` with `G = −αa + bΔv + c²Δu + f`,
/// at interior nodes (stored at level `n + 1`; level 0 is zero).
///
/// Vanishes to rounding on output of [`MgtSolver`]; a consistent
/// discretization of `𝒫u − f` for any smooth triple.
pub fn scheme_residual(sol: &Solution, f: Option<&SpaceTimeField>, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    sol.u.check_shape(grid)?;
    sol.u_t.check_shape(grid)?;
    sol.u_tt.check_shape(grid)?;
    if let Some(f) = f {
        sol.u.same_shape(f)?;
    }
    let (alpha, b, c2) = (coeff.alpha(), coeff.b(), coeff.c2());
    let nn = grid.n_nodes();
    let zero = C64::new(0.0, 0.0);
    let dt = grid.dt();
    let mut out = SpaceTimeField::zeros(grid, Role::Source);
    let mut comb = vec![zero; nn];
    let mut lap_prev = vec![zero; nn];
    let mut lap = vec![zero; nn];
    let g_lap = |n: usize, comb: &mut Vec<C64>, lap: &mut Vec<C64>| {
        let (u, v) = (sol.u.level(n), sol.u_t.level(n));
        for kk in 0..nn {
            comb[kk] = v[kk] * b + u[kk] * c2;
        }
        laplacian_interior(grid, comb, lap);
    };
    g_lap(0, &mut comb, &mut lap_prev);
    for n in 0..grid.nt() {
        g_lap(n + 1, &mut comb, &mut lap);
        let (a0, a1) = (sol.u_tt.level(n), sol.u_tt.level(n + 1));
        let row = out.level_mut(n + 1);
        for &kk in grid.interior() {
            let mut g = -(a0[kk] + a1[kk]) * alpha + lap_prev[kk] + lap[kk];
            if let Some(f) = f {
                g += f.get(n, kk) + f.get(n + 1, kk);
            }
            row[kk] = (a1[kk] - a0[kk]) / dt - g * 0.5;
        }
        core::mem::swap(&mut lap_prev, &mut lap);
    }
    Ok(out)
}
