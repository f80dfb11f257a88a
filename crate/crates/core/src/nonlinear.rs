//! Westervelt-type nonlinearity `F = (p u²)_tt` and the Picard construction
//! `u = v₁ + v₂`, `v₂ = fixed point of ŵ ↦ solve(0, F(p, v₁ + ŵ))`.

use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{DataTuple, Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::mgt::norms::{discrete_norm, NormKind};
use crate::mgt::solver::{scheme_residual, MgtSolver};
use crate::prelude::*;
use crate::stencil::time_stencil;
use alloc::format;

/// Smooth bump `A·exp(−|x − x₀|²/(2w²))·g(t)` with an optional compactly
/// supported time window `g` on `(t_lo, t_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub width: f64,
    pub amplitude: f64,
    pub window: Option<(f64, f64)>,
}

impl GaussianBump {
    /// `[p, p_t, p_tt]` at `(x, t)`.
    pub fn eval(&self, x: [f64; 2], t: f64) -> [f64; 3] {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let s = self.amplitude * (-(dx * dx + dy * dy) / (2.0 * self.width * self.width)).exp();
        let [g, gt, gtt] = match self.window {
            None => [1.0, 0.0, 0.0],
            Some((lo, hi)) => bump_window(t, lo, hi),
        };
        [s * g, s * gt, s * gtt]
    }
}

/// `exp(1 − 1/(1 − τ²))` on `τ ∈ (−1, 1)` with `τ` affine in `t`, and its
/// first two time derivatives.
pub fn bump_window(t: f64, lo: f64, hi: f64) -> [f64; 3] {
    let ts = 2.0 / (hi - lo);
    let tau = (2.0 * t - lo - hi) / (hi - lo);
    if !(tau.abs() < 1.0) {
        return [0.0; 3];
    }
    let q = 1.0 / (1.0 - tau * tau);
    let g = (1.0 - q).exp();
    let q1 = 2.0 * tau * q * q;
    let q2 = 2.0 * q * q + 8.0 * tau * tau * q * q * q;
    [g, -q1 * g * ts, (q1 * q1 - q2) * g * ts * ts]
}

/// Sampled `p` with `p_t`, `p_tt` companions (level-major, all nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityField {
    points: usize,
    levels: usize,
    pub p: Vec<f64>,
    pub p_t: Vec<f64>,
    pub p_tt: Vec<f64>,
    pub support_window: Option<(f64, f64)>,
}

impl NonlinearityField {
    pub fn zero(grid: &Grid) -> Self {
        let z = vec![0.0; grid.n_nodes() * grid.levels()];
        Self { points: grid.n_nodes(), levels: grid.levels(), p: z.clone(), p_t: z.clone(), p_tt: z, support_window: None }
    }

    /// Analytic family: `f(x, t) = [p, p_t, p_tt]`, sampled on active nodes.
    pub fn from_fn(grid: &Grid, support_window: Option<(f64, f64)>, f: impl Fn([f64; 2], f64) -> [f64; 3]) -> Self {
        let mut out = Self::zero(grid);
        out.support_window = support_window;
        let nn = grid.n_nodes();
        for n in 0..grid.levels() {
            let t = grid.time(n);
            for k in 0..nn {
                if grid.is_active(k) {
                    let [a, b, c] = f(grid.coords(k), t);
                    out.p[n * nn + k] = a;
                    out.p_t[n * nn + k] = b;
                    out.p_tt[n * nn + k] = c;
                }
            }
        }
        out
    }

    pub fn gaussian_bump(grid: &Grid, bump: &GaussianBump) -> Self {
        Self::from_fn(grid, bump.window, |x, t| bump.eval(x, t))
    }

    /// Sampled `p`; companions by central differences (one-sided second order at the ends).
    pub fn from_samples(grid: &Grid, p: Vec<f64>, support_window: Option<(f64, f64)>) -> Result<Self> {
        let nn = grid.n_nodes();
        if p.len() != nn * grid.levels() {
            return Err(Error::Shape(format!("p has {} values, grid needs {}", p.len(), nn * grid.levels())));
        }
        if grid.levels() < 4 {
            return Err(Error::InsufficientData("p companions need at least 4 time levels".into()));
        }
        let deriv = |m: usize| -> Vec<f64> {
            let mut out = vec![0.0; p.len()];
            for n in 0..grid.levels() {
                let (start, w) = time_stencil(n, grid.levels(), m, grid.dt());
                for (j, wj) in w.iter().enumerate() {
                    for k in 0..nn {
                        out[n * nn + k] += wj * p[(start + j) * nn + k];
                    }
                }
            }
            out
        };
        let p_t = deriv(1);
        let p_tt = deriv(2);
        Ok(Self { points: nn, levels: grid.levels(), p, p_t, p_tt, support_window })
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        if self.points != grid.n_nodes() || self.levels != grid.levels() {
            return Err(Error::Shape(format!(
                "p is {}x{}, grid expects {}x{}",
                self.points,
                self.levels,
                grid.n_nodes(),
                grid.levels()
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().chain(&self.p_t).chain(&self.p_tt).all(|v| *v == 0.0)
    }

    pub fn as_field(&self) -> SpaceTimeField {
        let data = self.p.iter().map(|&v| C64::new(v, 0.0)).collect();
        SpaceTimeField::from_raw(self.points, self.levels, Role::Source, data).expect("consistent shape")
    }

    /// `E²`-type surrogate of `p` (compare with `M`).
    pub fn surrogate_norm(&self, grid: &Grid) -> Result<f64> {
        self.check_shape(grid)?;
        discrete_norm(&self.as_field().with_role(Role::U), grid, NormKind::EmSurrogate(2))
    }

    /// Largest `|p|` at levels outside the support window (0 when no window is set).
    pub fn window_violation(&self, grid: &Grid) -> f64 {
        let Some((lo, hi)) = self.support_window else { return 0.0 };
        let mut worst = 0.0f64;
        for n in 0..self.levels {
            let t = grid.time(n);
            if t > lo && t < hi {
                continue;
            }
            for k in 0..self.points {
                worst = worst.max(self.p[n * self.points + k].abs());
            }
        }
        worst
    }

    /// Largest `|p|` at times `t ≤ t_min`.
    pub fn max_before(&self, grid: &Grid, t_min: f64) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..self.levels {
            if grid.time(n) > t_min {
                break;
            }
            for k in 0..self.points {
                worst = worst.max(self.p[n * self.points + k].abs());
            }
        }
        worst
    }
}

/// `F = p_tt u² + 4p_t u u_t + 2p(u_t² + u u_tt)`.
pub fn westervelt_source(p: &NonlinearityField, u: &Solution) -> Result<SpaceTimeField> {
    u.u.same_shape(&u.u_t)?;
    u.u.same_shape(&u.u_tt)?;
    if u.u.points() != p.points || u.u.levels() != p.levels {
        return Err(Error::Shape(format!("p is {}x{}, u is {}x{}", p.points, p.levels, u.u.points(), u.u.levels())));
    }
    let mut out = u.u.clone().with_role(Role::Source);
    let (a, b, c) = (u.u.values(), u.u_t.values(), u.u_tt.values());
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        *v = a[i] * a[i] * p.p_tt[i] + a[i] * b[i] * (4.0 * p.p_t[i]) + (b[i] * b[i] + a[i] * c[i]) * (2.0 * p.p[i]);
    }
    Ok(out)
}

/// Symmetric bilinear source `∂²/∂ε₁∂ε₂ (p(ε₁w₁ + ε₂w₂)²)_tt`
/// `= 2p(w₁_tt w₂ + 2w₁_t w₂_t + w₁w₂_tt) + 4p_t(w₁_t w₂ + w₁w₂_t) + 2p_tt w₁w₂`.
pub fn bilinear_source(p: &NonlinearityField, w1: &Solution, w2: &Solution) -> Result<SpaceTimeField> {
    for s in [&w1.u_t, &w1.u_tt, &w2.u, &w2.u_t, &w2.u_tt] {
        w1.u.same_shape(s)?;
    }
    if w1.u.points() != p.points || w1.u.levels() != p.levels {
        return Err(Error::Shape("p and w fields differ in shape".into()));
    }
    let mut out = w1.u.clone().with_role(Role::Source);
    let (a1, b1, c1) = (w1.u.values(), w1.u_t.values(), w1.u_tt.values());
    let (a2, b2, c2) = (w2.u.values(), w2.u_t.values(), w2.u_tt.values());
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        *v = (c1[i] * a2[i] + b1[i] * b2[i] * 2.0 + a1[i] * c2[i]) * (2.0 * p.p[i])
            + (b1[i] * a2[i] + a1[i] * b2[i]) * (4.0 * p.p_t[i])
            + a1[i] * a2[i] * (2.0 * p.p_tt[i]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Smallness bound on the data size; exceeding it only warns.
    pub delta: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { delta: 1e-2, max_iterations: 50, tolerance: 1e-10 }
    }
}

/// Residuals below this are rounding noise and excluded from the contraction estimate.
const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    /// `‖ŵ_{k+1} − ŵ_k‖ / ‖ŵ_{k+1}‖` in `L²(Q)`.
    pub residual_history: Vec<f64>,
    /// Largest ratio of successive residuals above the rounding floor.
    pub contraction_estimate: f64,
    pub converged: bool,
    pub data_size: f64,
    pub smallness_violated: bool,
    /// `‖scheme residual of 𝒫u − F(u)‖ / ‖F(u)‖` (0 when `F ≡ 0`).
    pub solution_residual: f64,
}

fn contraction(history: &[f64]) -> f64 {
    history
        .windows(2)
        .filter(|w| w[1] > ROUNDING_FLOOR && w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Picard solve with a prepared linear solver.
pub fn solve_nonlinear_with(solver: &MgtSolver, data: &DataTuple, p: &NonlinearityField, opts: &PicardOptions) -> Result<(Solution, PicardReport)> {
    let grid = solver.grid();
    p.check_shape(grid)?;
    let data_size = data.size();
    let smallness_violated = data_size > opts.delta;
    if smallness_violated {
        log::warn!("data size {data_size:e} exceeds smallness bound {:e}; Picard may not contract", opts.delta);
    }
    let v1 = solver.solve(data)?;
    if p.is_zero() {
        let report = PicardReport {
            iterations: 1,
            residual_history: vec![0.0],
            contraction_estimate: 0.0,
            converged: true,
            data_size,
            smallness_violated,
            solution_residual: 0.0,
        };
        return Ok((v1, report));
    }
    let mut w = Solution::zeros(grid);
    let mut history = Vec::new();
    let mut converged = false;
    let mut u = v1.clone();
    for it in 1..=opts.max_iterations {
        let f = westervelt_source(p, &u)?;
        let w_next = solver.solve(&DataTuple::source_only(grid, f))?;
        let diff = w_next.u.zip_with(&w.u, |a, b| a - b)?;
        let dn = discrete_norm(&diff, grid, NormKind::L2Q)?;
        let wn = discrete_norm(&w_next.u, grid, NormKind::L2Q)?;
        let r = if wn > 0.0 { dn / wn } else { 0.0 };
        history.push(r);
        w = w_next;
        u = v1.add_scaled(C64::new(1.0, 0.0), &w)?;
        if !u.is_finite() {
            return Err(Error::Divergence { step: it });
        }
        if r <= opts.tolerance {
            converged = true;
            break;
        }
        if r > 1e6 {
            break;
        }
    }
    let iterations = history.len();
    if !converged {
        let residual = history.last().copied().unwrap_or(f64::NAN);
        return Err(Error::PicardDivergence { iterations, residual, history });
    }
    let f = westervelt_source(p, &u)?;
    let res = scheme_residual(&u, Some(&f), solver.coefficients(), grid)?;
    let fnorm = discrete_norm(&f, grid, NormKind::L2Q)?;
    let solution_residual = if fnorm > 0.0 { discrete_norm(&res, grid, NormKind::L2Q)? / fnorm } else { 0.0 };
    let report = PicardReport {
        iterations,
        contraction_estimate: contraction(&history),
        residual_history: history,
        converged,
        data_size,
        smallness_violated,
        solution_residual,
    };
    Ok((u, report))
}

pub fn solve_nonlinear(data: &DataTuple, p: &NonlinearityField, coeff: &Coefficients, grid: &Grid, opts: &PicardOptions) -> Result<(Solution, PicardReport)> {
    solve_nonlinear_with(&MgtSolver::new(coeff, grid)?, data, p, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorRow {
    pub eps: f64,
    /// `‖u(ε·data) − ε·w₁‖_{L²(Q)}`.
    pub error: f64,
}

/// Second-order Taylor remainder table for unit data `h1`.
pub fn taylor_check(h1: &DataTuple, p: &NonlinearityField, coeff: &Coefficients, grid: &Grid, eps_list: &[f64], opts: &PicardOptions) -> Result<Vec<TaylorRow>> {
    if eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Argument("eps_list must be descending".into()));
    }
    let solver = MgtSolver::new(coeff, grid)?;
    let w1 = solver.solve(h1)?;
    let zero = DataTuple::zeros(grid);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let scaled = h1.combine(C64::new(eps, 0.0), &zero, C64::new(0.0, 0.0))?;
        let (u, _) = solve_nonlinear_with(&solver, &scaled, p, opts)?;
        let diff = u.u.zip_with(&w1.u, |a, b| a - b * eps)?;
        rows.push(TaylorRow { eps, error: discrete_norm(&diff, grid, NormKind::L2Q)? });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::rectangle(0.0, 1.0, 0.0, 1.0, 5, 5, 1.0, 10).unwrap()
    }

    fn sol_from(g: &Grid, f: impl Fn(f64) -> [f64; 3]) -> Solution {
        let mk = |i: usize, r: Role| SpaceTimeField::from_fn(g, r, |_, t| C64::new(f(t)[i], 0.0));
        Solution { u: mk(0, Role::U), u_t: mk(1, Role::Ut), u_tt: mk(2, Role::Utt) }
    }

    #[test]
    fn source_examples() {
        let g = grid();
        let one = NonlinearityField::from_fn(&g, None, |_, _| [1.0, 0.0, 0.0]);
        let f = westervelt_source(&one, &sol_from(&g, |t| [t, 1.0, 0.0])).unwrap();
        assert!(f.values().iter().all(|z| (z - C64::new(2.0, 0.0)).norm() < 1e-14));
        let lin = NonlinearityField::from_fn(&g, None, |_, t| [t, 1.0, 0.0]);
        let f = westervelt_source(&lin, &sol_from(&g, |_| [1.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let zero = NonlinearityField::zero(&g);
        assert_eq!(westervelt_source(&zero, &sol_from(&g, |t| [t.sin(), t.cos(), -t.sin()])).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn bilinear_is_twice_the_quadratic_on_the_diagonal() {
        let g = grid();
        let p = NonlinearityField::from_fn(&g, None, |x, t| [x[0] + t * t, 2.0 * t, 2.0]);
        let w = sol_from(&g, |t| [t.sin(), t.cos(), -t.sin()]);
        let a = bilinear_source(&p, &w, &w).unwrap();
        let b = westervelt_source(&p, &w).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y * 2.0).norm() < 1e-13);
        }
    }

    #[test]
    fn window_derivatives_match_finite_differences() {
        let (lo, hi) = (0.2, 0.9);
        for &t in &[0.3, 0.55, 0.8] {
            let h = 1e-5;
            let [_, gt, gtt] = bump_window(t, lo, hi);
            let fd1 = (bump_window(t + h, lo, hi)[0] - bump_window(t - h, lo, hi)[0]) / (2.0 * h);
            let fd2 = (bump_window(t + h, lo, hi)[1] - bump_window(t - h, lo, hi)[1]) / (2.0 * h);
            assert!((gt - fd1).abs() < 1e-6 * (1.0 + gt.abs()));
            assert!((gtt - fd2).abs() < 1e-5 * (1.0 + gtt.abs()));
        }
        assert_eq!(bump_window(0.1, lo, hi), [0.0; 3]);
        assert_eq!(bump_window(0.55, lo, hi)[0], 1.0);
    }

    #[test]
    fn sampled_companions_are_exact_for_quadratics() {
        let g = grid();
        let nn = g.n_nodes();
        let p: Vec<f64> = (0..g.levels() * nn).map(|i| {
            let t = g.time(i / nn);
            3.0 * t * t - t
        }).collect();
        let f = NonlinearityField::from_samples(&g, p, None).unwrap();
        for n in 0..g.levels() {
            let t = g.time(n);
            assert!((f.p_t[n * nn] - (6.0 * t - 1.0)).abs() < 1e-10);
            assert!((f.p_tt[n * nn] - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn contraction_ignores_rounding_floor() {
        assert_eq!(contraction(&[1.0, 1e-3, 1e-6, 1e-15]), 1e-3);
    }
}
