//! Second-order-in-time companions of the MGT solver.
//!
//! * [`DampedWaveSolver`]: Crank–Nicolson for `y_tt − bΔy + κy_t = f` with
//!   Dirichlet data. `κ = −γ` gives the adjoint operator, `κ = γ` the
//!   equation satisfied by `W = u_t + βu`.
//! * [`solve_w_scheme`]: independent MGT solver through the reduction
//!   `W_tt − bΔW + γW_t = f + γβW − γβ²u`, `u_t + βu = W`, with `u` advanced
//!   by exponential integrating-factor quadrature.

use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{DataTuple, Solution};
use crate::grid::Grid;
use crate::linalg::{factor_shifted_laplacian, BandedCholesky};
use crate::prelude::*;
use crate::stencil::laplacian_interior;
use alloc::format;

#[derive(Debug, Clone)]
pub struct DampedWaveSolver {
    b: f64,
    kappa: f64,
    grid: Grid,
    chol: BandedCholesky,
}

impl DampedWaveSolver {
    pub fn new(b: f64, kappa: f64, grid: &Grid) -> Result<Self> {
        let k = 0.5 * grid.dt();
        let diag = 1.0 + kappa * k;
        if !(diag > 0.0) {
            return Err(Error::Argument(format!("time step {} too large for damping {kappa}", grid.dt())));
        }
        let chol = factor_shifted_laplacian(grid, diag, b * k * k)?;
        Ok(Self { b, kappa, grid: grid.clone(), chol })
    }

    /// Uses `data.h` (`h`, `h_t`, `h_tt`), `u0`, `u1` and `f`; `u2` is ignored.
    /// The returned `u_tt` is `bΔy − κy_t + f` inside and `h_tt` on Σ.
    pub fn solve(&self, data: &DataTuple) -> Result<Solution> {
        let grid = &self.grid;
        data.check_shape(grid)?;
        let (b, kappa) = (self.b, self.kappa);
        let k = 0.5 * grid.dt();
        let nn = grid.n_nodes();
        let zero = C64::new(0.0, 0.0);
        let mut sol = Solution::zeros(grid);
        let mut y = vec![zero; nn];
        let mut z = vec![zero; nn];
        for kk in 0..nn {
            if grid.is_active(kk) {
                y[kk] = data.u0[kk];
                z[kk] = data.u1[kk];
            }
        }
        for (slot, bn) in grid.boundary().iter().enumerate() {
            y[bn.node] = data.h.h.get(0, slot);
            z[bn.node] = data.h.h_t.get(0, slot);
        }
        let mut yt = vec![zero; nn];
        let mut comb = vec![zero; nn];
        let mut lap = vec![zero; nn];
        let mut rhs = vec![zero; grid.interior().len()];
        let mut scratch = Vec::new();
        self.store(&mut sol, 0, &y, &z, data, &mut lap);
        for n in 0..grid.nt() {
            for kk in 0..nn {
                yt[kk] = y[kk] + z[kk] * k;
            }
            for (slot, bn) in grid.boundary().iter().enumerate() {
                yt[bn.node] = data.h.h.get(n + 1, slot);
            }
            for kk in 0..nn {
                comb[kk] = (y[kk] + yt[kk]) * b;
            }
            laplacian_interior(grid, &comb, &mut lap);
            for (slot, &kk) in grid.interior().iter().enumerate() {
                let mut r = z[kk] * (1.0 - kappa * k) + lap[kk] * k;
                if let Some(f) = &data.f {
                    r += (f.get(n, kk) + f.get(n + 1, kk)) * k;
                }
                rhs[slot] = r;
            }
            self.chol.solve_complex(&mut rhs, &mut scratch);
            for (slot, &kk) in grid.interior().iter().enumerate() {
                z[kk] = rhs[slot];
                y[kk] = yt[kk] + rhs[slot] * k;
            }
            for (slot, bn) in grid.boundary().iter().enumerate() {
                y[bn.node] = yt[bn.node];
                z[bn.node] = data.h.h_t.get(n + 1, slot);
            }
            if !y.iter().chain(&z).all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Divergence { step: n + 1 });
            }
            self.store(&mut sol, n + 1, &y, &z, data, &mut lap);
        }
        Ok(sol)
    }

    fn store(&self, sol: &mut Solution, n: usize, y: &[C64], z: &[C64], data: &DataTuple, lap: &mut [C64]) {
        let grid = &self.grid;
        sol.u.level_mut(n).copy_from_slice(y);
        sol.u_t.level_mut(n).copy_from_slice(z);
        laplacian_interior(grid, y, lap);
        let row = sol.u_tt.level_mut(n);
        for &kk in grid.interior() {
            let mut a = lap[kk] * self.b - z[kk] * self.kappa;
            if let Some(f) = &data.f {
                a += f.get(n, kk);
            }
            row[kk] = a;
        }
        for (slot, bn) in grid.boundary().iter().enumerate() {
            row[bn.node] = data.h.h_tt.get(n, slot);
        }
    }
}

/// One-shot damped wave solve.
pub fn solve_damped_wave(b: f64, kappa: f64, data: &DataTuple, grid: &Grid) -> Result<Solution> {
    DampedWaveSolver::new(b, kappa, grid)?.solve(data)
}

/// Weights `(E, c0, c1)` of `u(t+dt) ≈ E·u(t) + c0·W(t) + c1·W(t+dt)` for
/// `u' = −βu + W` with `W` linear over the step.
pub fn integrating_factor_weights(beta: f64, dt: f64) -> (f64, f64, f64) {
    let x = beta * dt;
    let e = (-x).exp();
    let (i0, i1) = if x < 1e-3 {
        (dt * (1.0 - x / 2.0 + x * x / 6.0), dt * (0.5 - x / 3.0 + x * x / 8.0))
    } else {
        ((1.0 - e) / x * dt, dt * ((1.0 - e) / x - (1.0 - e * (1.0 + x)) / (x * x)))
    };
    (e, i0 - i1, i1)
}

/// MGT solve through the `W` reduction (cross-check scheme).
pub fn solve_w_scheme(data: &DataTuple, coeff: &Coefficients, grid: &Grid) -> Result<Solution> {
    data.check_shape(grid)?;
    let (b, beta, gamma) = (coeff.b(), coeff.beta(), coeff.gamma());
    let dt = grid.dt();
    let k = 0.5 * dt;
    let (e, c0, c1) = integrating_factor_weights(beta, dt);
    let diag = 1.0 + gamma * k - gamma * beta * k * k + gamma * beta * beta * c1 * k * k;
    if !(diag > 0.0) {
        return Err(Error::Argument(format!("time step {dt} too large for the reduced scheme")));
    }
    let chol = factor_shifted_laplacian(grid, diag, b * k * k)?;
    let nn = grid.n_nodes();
    let zero = C64::new(0.0, 0.0);
    let mut sol = Solution::zeros(grid);

    let bnd_w = |n: usize, slot: usize| data.h.h_t.get(n, slot) + data.h.h.get(n, slot) * beta;
    let bnd_v = |n: usize, slot: usize| data.h.h_tt.get(n, slot) + data.h.h_t.get(n, slot) * beta;
    let mut u = vec![zero; nn];
    let mut w = vec![zero; nn];
    let mut v = vec![zero; nn];
    for kk in 0..nn {
        if grid.is_active(kk) {
            u[kk] = data.u0[kk];
            w[kk] = data.u1[kk] + data.u0[kk] * beta;
            v[kk] = data.u2[kk] + data.u1[kk] * beta;
        }
    }
    for (slot, bn) in grid.boundary().iter().enumerate() {
        u[bn.node] = data.h.h.get(0, slot);
        w[bn.node] = bnd_w(0, slot);
        v[bn.node] = bnd_v(0, slot);
    }
    let store = |sol: &mut Solution, n: usize, u: &[C64], w: &[C64], v: &[C64]| {
        let lu = sol.u.level_mut(n);
        lu.copy_from_slice(u);
        let ut: Vec<C64> = (0..nn).map(|kk| w[kk] - u[kk] * beta).collect();
        let utt: Vec<C64> = (0..nn).map(|kk| v[kk] - ut[kk] * beta).collect();
        sol.u_t.level_mut(n).copy_from_slice(&ut);
        sol.u_tt.level_mut(n).copy_from_slice(&utt);
    };
    store(&mut sol, 0, &u, &w, &v);

    let mut wt = vec![zero; nn];
    let mut comb = vec![zero; nn];
    let mut lap = vec![zero; nn];
    let mut rhs = vec![zero; grid.interior().len()];
    let mut scratch = Vec::new();
    for n in 0..grid.nt() {
        for kk in 0..nn {
            wt[kk] = w[kk] + v[kk] * k;
        }
        for (slot, bn) in grid.boundary().iter().enumerate() {
            wt[bn.node] = bnd_w(n + 1, slot);
        }
        for kk in 0..nn {
            comb[kk] = (w[kk] + wt[kk]) * b;
        }
        laplacian_interior(grid, &comb, &mut lap);
        for (slot, &kk) in grid.interior().iter().enumerate() {
            let mut r = v[kk] * (1.0 - gamma * k) + lap[kk] * k + (w[kk] + wt[kk]) * (k * gamma * beta)
                - (u[kk] + u[kk] * e + w[kk] * c0 + wt[kk] * c1) * (k * gamma * beta * beta);
            if let Some(f) = &data.f {
                r += (f.get(n, kk) + f.get(n + 1, kk)) * k;
            }
            rhs[slot] = r;
        }
        chol.solve_complex(&mut rhs, &mut scratch);
        for (slot, &kk) in grid.interior().iter().enumerate() {
            let vn = rhs[slot];
            let wn = wt[kk] + vn * k;
            u[kk] = u[kk] * e + w[kk] * c0 + wn * c1;
            w[kk] = wn;
            v[kk] = vn;
        }
        for (slot, bn) in grid.boundary().iter().enumerate() {
            u[bn.node] = data.h.h.get(n + 1, slot);
            w[bn.node] = wt[bn.node];
            v[bn.node] = bnd_v(n + 1, slot);
        }
        if !u.iter().chain(&w).chain(&v).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Divergence { step: n + 1 });
        }
        store(&mut sol, n + 1, &u, &w, &v);
    }
    Ok(sol)
}
