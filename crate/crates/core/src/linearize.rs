//! Second-order linearization of the solution map `ε ↦ u(ε₁h₁ + ε₂h₂)`.
//!
//! `w = ∂²u/∂ε₁∂ε₂|₀` solves `𝒫w = F(p, w₁, w₂)` with zero data, where
//! `w_j` solve the linear problem with data `h_j`. With `W = w_t + βw`,
//!
//! ```text
//! W_tt − bΔW + γW_t = F(p, w₁, w₂) + γβw_t.
//! ```

use crate::coeff::Coefficients;
use crate::error::Result;
use crate::field::{DataTuple, Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::mgt::{discrete_norm, MgtSolver, NormKind};
use crate::nonlinear::{bilinear_source, solve_nonlinear_with, NonlinearityField, PicardOptions, PicardReport};
use crate::prelude::*;
use crate::stencil::laplacian_interior;

/// Two inputs and their step sizes.
#[derive(Debug, Clone)]
pub struct EpsilonDesign {
    pub eps1: f64,
    pub eps2: f64,
    pub d1: DataTuple,
    pub d2: DataTuple,
}

#[derive(Debug, Clone)]
pub struct CrossDifference {
    pub w: Solution,
    /// Picard reports for `u(ε₁, ε₂)`, `u(ε₁, 0)`, `u(0, ε₂)`.
    pub reports: [PicardReport; 3],
}

/// `[u(ε₁,ε₂) − u(ε₁,0) − u(0,ε₂)]/(ε₁ε₂)`; `u(0,0) = 0` is not solved.
pub fn cross_difference(design: &EpsilonDesign, p: &NonlinearityField, solver: &MgtSolver, opts: &PicardOptions) -> Result<CrossDifference> {
    let one = C64::new(1.0, 0.0);
    let (e1, e2) = (C64::new(design.eps1, 0.0), C64::new(design.eps2, 0.0));
    let zero = DataTuple::zeros(solver.grid());
    let both = design.d1.combine(e1, &design.d2, e2)?;
    let first = design.d1.combine(e1, &zero, one)?;
    let second = design.d2.combine(e2, &zero, one)?;
    let (u12, r12) = solve_nonlinear_with(solver, &both, p, opts)?;
    let (u1, r1) = solve_nonlinear_with(solver, &first, p, opts)?;
    let (u2, r2) = solve_nonlinear_with(solver, &second, p, opts)?;
    let scale = C64::new(1.0 / (design.eps1 * design.eps2), 0.0);
    let mut w = u12.add_scaled(-one, &u1)?.add_scaled(-one, &u2)?;
    for f in [&mut w.u, &mut w.u_t, &mut w.u_tt] {
        f.scale(scale);
    }
    Ok(CrossDifference { w, reports: [r12, r1, r2] })
}

/// Solves `𝒫w = F(p, w₁, w₂)` with zero data.
pub fn direct_linearized(w1: &Solution, w2: &Solution, p: &NonlinearityField, solver: &MgtSolver) -> Result<Solution> {
    let f = bilinear_source(p, w1, w2)?;
    solver.solve(&DataTuple::source_only(solver.grid(), f))
}

/// First-order solutions, the second-order linearization and its reduction.
#[derive(Debug, Clone)]
pub struct LinearizedPair {
    pub w1: Solution,
    pub w2: Solution,
    pub w: Solution,
    pub big_w: Solution,
}

impl LinearizedPair {
    pub fn solve(d1: &DataTuple, d2: &DataTuple, p: &NonlinearityField, solver: &MgtSolver) -> Result<Self> {
        let w1 = solver.solve(d1)?;
        let w2 = solver.solve(d2)?;
        Self::from_first_order(w1, w2, p, solver)
    }

    pub fn from_first_order(w1: Solution, w2: Solution, p: &NonlinearityField, solver: &MgtSolver) -> Result<Self> {
        let w = direct_linearized(&w1, &w2, p, solver)?;
        let big_w = reduce_to_w(&w, solver.coefficients(), solver.grid())?;
        Ok(Self { w1, w2, w, big_w })
    }
}

/// `W = w_t + βw` with `W_t = w_tt + βw_t` and `W_tt` by differencing `W_t` in time.
pub fn reduce_to_w(w: &Solution, coeff: &Coefficients, grid: &Grid) -> Result<Solution> {
    let beta = C64::new(coeff.beta(), 0.0);
    let big = w.u_t.zip_with(&w.u, |a, b| a + beta * b)?;
    let big_t = w.u_tt.zip_with(&w.u_t, |a, b| a + beta * b)?;
    let big_tt = big_t.derivative(grid.dt(), 1)?;
    Ok(Solution { u: big.with_role(Role::U), u_t: big_t.with_role(Role::Ut), u_tt: big_tt.with_role(Role::Utt) })
}

/// Half-level residual of `W_tt − bΔW + γW_t = F + γβw_t` at interior nodes,
/// `(W_tⁿ⁺¹ − W_tⁿ)/dt − ½(Gⁿ + Gⁿ⁺¹)` with `G = bΔW − γW_t + F + γβw_t`.
pub fn w_residual(w: &Solution, big_w: &Solution, f: Option<&SpaceTimeField>, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    big_w.u.check_shape(grid)?;
    w.u_t.same_shape(&big_w.u)?;
    if let Some(f) = f {
        f.same_shape(&big_w.u)?;
    }
    let (b, gamma, beta) = (coeff.b(), coeff.gamma(), coeff.beta());
    let nn = grid.n_nodes();
    let zero = C64::new(0.0, 0.0);
    let mut out = SpaceTimeField::zeros(grid, Role::Source);
    let mut lap0 = vec![zero; nn];
    let mut lap1 = vec![zero; nn];
    let g = |n: usize, k: usize, lap: &[C64]| {
        let mut v = lap[k] * b - big_w.u_t.get(n, k) * gamma + w.u_t.get(n, k) * (gamma * beta);
        if let Some(f) = f {
            v += f.get(n, k);
        }
        v
    };
    laplacian_interior(grid, big_w.u.level(0), &mut lap0);
    for n in 0..grid.nt() {
        laplacian_interior(grid, big_w.u.level(n + 1), &mut lap1);
        for &k in grid.interior() {
            let d = (big_w.u_t.get(n + 1, k) - big_w.u_t.get(n, k)) / grid.dt();
            out.set(n + 1, k, d - (g(n, k, &lap0) + g(n + 1, k, &lap1)) * 0.5);
        }
        core::mem::swap(&mut lap0, &mut lap1);
    }
    Ok(out)
}

/// `‖w_residual‖ / (‖F‖ + ‖W‖)` in `L²(Q)`.
pub fn relative_w_residual(w: &Solution, big_w: &Solution, f: Option<&SpaceTimeField>, coeff: &Coefficients, grid: &Grid) -> Result<f64> {
    let r = w_residual(w, big_w, f, coeff, grid)?;
    let num = discrete_norm(&r, grid, NormKind::L2Q)?;
    let mut den = discrete_norm(&big_w.u, grid, NormKind::L2Q)?;
    if let Some(f) = f {
        den += discrete_norm(f, grid, NormKind::L2Q)?;
    }
    Ok(if den > 0.0 { num / den } else { num })
}
