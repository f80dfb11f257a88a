//! Finite-difference stencils on the active nodes of a [`Grid`].
//!
//! Central differences where both neighbours are active, second-order
//! one-sided differences otherwise, first order as a last resort.

use crate::grid::Grid;
use crate::prelude::*;
use core::ops::{Add, Mul, Sub};
use num_traits::Zero;

/// Scalar types the stencils operate on (`f64`, `C64`).
pub trait Scalar: Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Zero + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>> Scalar for T {}

/// Five-point Laplacian at interior nodes; zero elsewhere.
pub fn laplacian_interior<T: Scalar>(grid: &Grid, u: &[T], out: &mut [T]) {
    let nx = grid.nx();
    let ix2 = 1.0 / (grid.hx() * grid.hx());
    let iy2 = 1.0 / (grid.hy() * grid.hy());
    for v in out.iter_mut() {
        *v = T::zero();
    }
    for &k in grid.interior() {
        let c = u[k] * 2.0;
        out[k] = (u[k - 1] + u[k + 1] - c) * ix2 + (u[k - nx] + u[k + nx] - c) * iy2;
    }
}

pub fn laplacian_interior_vec<T: Scalar>(grid: &Grid, u: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); u.len()];
    laplacian_interior(grid, u, &mut out);
    out
}

fn step(grid: &Grid, k: usize, axis: usize, s: isize) -> Option<usize> {
    if axis == 0 {
        grid.neighbor(k, s, 0)
    } else {
        grid.neighbor(k, 0, s)
    }
}

/// First (`order = 1`) or second (`order = 2`) derivative along `axis`.
pub fn axis_derivative<T: Scalar>(grid: &Grid, u: &[T], k: usize, axis: usize, order: u8) -> T {
    let h = if axis == 0 { grid.hx() } else { grid.hy() };
    let m = step(grid, k, axis, -1);
    let p = step(grid, k, axis, 1);
    if let (Some(m), Some(p)) = (m, p) {
        return if order == 1 { (u[p] - u[m]) * (0.5 / h) } else { (u[p] + u[m] - u[k] * 2.0) * (1.0 / (h * h)) };
    }
    // one-sided towards whichever side is available
    let dir: isize = if p.is_some() { 1 } else if m.is_some() { -1 } else { return T::zero() };
    let s = dir as f64;
    let n1 = step(grid, k, axis, dir);
    let n2 = step(grid, k, axis, 2 * dir);
    let n3 = step(grid, k, axis, 3 * dir);
    match (order, n1, n2, n3) {
        (1, Some(a), Some(b), _) => (u[a] * 4.0 - u[k] * 3.0 - u[b]) * (s * 0.5 / h),
        (1, Some(a), None, _) => (u[a] - u[k]) * (s / h),
        (_, Some(a), Some(b), Some(c)) => (u[k] * 2.0 - u[a] * 5.0 + u[b] * 4.0 - u[c]) * (1.0 / (h * h)),
        (_, Some(a), Some(b), None) => (u[k] - u[a] * 2.0 + u[b]) * (1.0 / (h * h)),
        _ => T::zero(),
    }
}

pub fn gradient<T: Scalar>(grid: &Grid, u: &[T], k: usize) -> [T; 2] {
    [axis_derivative(grid, u, k, 0, 1), axis_derivative(grid, u, k, 1, 1)]
}

/// Laplacian at any active node (equals the five-point stencil at interior nodes).
pub fn laplacian_at<T: Scalar>(grid: &Grid, u: &[T], k: usize) -> T {
    axis_derivative(grid, u, k, 0, 2) + axis_derivative(grid, u, k, 1, 2)
}

/// Laplacian at every active node.
pub fn laplacian_active<T: Scalar>(grid: &Grid, u: &[T]) -> Vec<T> {
    (0..u.len()).map(|k| if grid.is_active(k) { laplacian_at(grid, u, k) } else { T::zero() }).collect()
}

/// Outward normal derivative at each boundary node.
pub fn normal_derivative<T: Scalar>(grid: &Grid, u: &[T]) -> Vec<T> {
    grid.boundary()
        .iter()
        .map(|b| {
            let [gx, gy] = gradient(grid, u, b.node);
            gx * b.normal[0] + gy * b.normal[1]
        })
        .collect()
}

/// Finite-difference weights for the `m`-th derivative at `x0` from nodes `xs`
/// (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Time-stencil for the `m`-th derivative at level `n` of `levels`:
/// central where it fits, one-sided second order near the ends.
/// Returns the first level used and the weights (already scaled by `dt^-m`).
pub fn time_stencil(n: usize, levels: usize, m: usize, dt: f64) -> (usize, Vec<f64>) {
    let central = if m <= 2 { 3 } else { 2 * ((m + 1) / 2) + 1 };
    let half = central / 2;
    let (start, width) = if n >= half && n + half < levels {
        (n - half, central)
    } else {
        let width = (m + 2).min(levels);
        let start = if n < half { 0 } else { levels - width };
        (start, width)
    };
    let xs: Vec<f64> = (start..start + width).map(|i| i as f64).collect();
    let scale = 1.0 / dt.powi(m as i32);
    (start, fd_weights(n as f64, &xs, m).into_iter().map(|w| w * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = Grid::rectangle(-1.0, 1.0, 0.0, 2.0, 9, 11, 1.0, 1).unwrap();
        let u: Vec<f64> = (0..g.n_nodes()).map(|k| {
            let [x, y] = g.coords(k);
            x * x + 3.0 * x * y - y * y + 2.0 * x
        }).collect();
        for k in 0..g.n_nodes() {
            let [x, y] = g.coords(k);
            let [gx, gy] = gradient(&g, &u, k);
            assert!((gx - (2.0 * x + 3.0 * y + 2.0)).abs() < 1e-10);
            assert!((gy - (3.0 * x - 2.0 * y)).abs() < 1e-10);
            assert!(laplacian_at(&g, &u, k).abs() < 1e-9);
        }
        let dn = normal_derivative(&g, &u);
        for (b, d) in g.boundary().iter().zip(&dn) {
            let [x, y] = g.coords(b.node);
            let exact = (2.0 * x + 3.0 * y + 2.0) * b.normal[0] + (3.0 * x - 2.0 * y) * b.normal[1];
            assert!((d - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn fornberg_reproduces_known_stencils() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 3);
        for (a, b) in w.iter().zip([-0.5, 1.0, 0.0, -1.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let w = fd_weights(0.0, &[0.0, 1.0, 2.0, 3.0, 4.0], 3);
        for (a, b) in w.iter().zip([-2.5, 9.0, -12.0, 7.0, -1.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let (s, w) = time_stencil(0, 10, 2, 1.0);
        assert_eq!(s, 0);
        for (a, b) in w.iter().zip([2.0, -5.0, 4.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn five_point_matches_active() {
        let g = Grid::disc([0.0, 0.0], 1.0, 21, 21, 1.0, 1).unwrap();
        let u: Vec<C64> = (0..g.n_nodes()).map(|k| {
            let [x, y] = g.coords(k);
            C64::new(x.sin() * y.cos(), x * y)
        }).collect();
        let a = laplacian_interior_vec(&g, &u);
        for &k in g.interior() {
            assert!((a[k] - laplacian_at(&g, &u, k)).norm() < 1e-12);
        }
    }
}
