//! Small dense/banded/sparse linear algebra used by the solvers.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::prelude::*;
use alloc::format;

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds columns i - bw ..= i
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the matrix given by `entry(i, j)` for `i - bw <= j <= i`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = entry(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + k + bw - i] * l[j * w + k + bw - j];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::SolverFailure { step: 0, reason: format!("matrix not positive definite at row {i}") });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + j + bw - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + k + bw - i] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k * w + i + bw - k] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
    }

    /// Solves with a complex right-hand side (real matrix).
    pub fn solve_complex(&self, x: &mut [C64], scratch: &mut Vec<f64>) {
        scratch.resize(self.n, 0.0);
        for part in 0..2 {
            for (s, z) in scratch.iter_mut().zip(x.iter()) {
                *s = if part == 0 { z.re } else { z.im };
            }
            self.solve_in_place(scratch);
            for (z, s) in x.iter_mut().zip(scratch.iter()) {
                if part == 0 {
                    z.re = *s;
                } else {
                    z.im = *s;
                }
            }
        }
    }
}

/// Factors `diag·I − coef·Δ₀` on the interior nodes (homogeneous Dirichlet).
pub fn factor_shifted_laplacian(grid: &Grid, diag: f64, coef: f64) -> Result<BandedCholesky> {
    let nx = grid.nx();
    let interior = grid.interior();
    let mut bw = 0;
    for &k in interior {
        if let Some(s) = grid.interior_slot(k - nx) {
            bw = bw.max(grid.interior_slot(k).unwrap() - s);
        }
        if let Some(s) = grid.interior_slot(k - 1) {
            bw = bw.max(grid.interior_slot(k).unwrap() - s);
        }
    }
    let ax = coef / (grid.hx() * grid.hx());
    let ay = coef / (grid.hy() * grid.hy());
    let d = diag + 2.0 * ax + 2.0 * ay;
    BandedCholesky::factor(interior.len(), bw, |i, j| {
        if i == j {
            return d;
        }
        let (ki, kj) = (interior[i], interior[j]);
        if ki - kj == 1 {
            -ax
        } else if ki - kj == nx {
            -ay
        } else {
            0.0
        }
    })
}

/// Adds `coef·(Δ₀ contributions of boundary neighbours)` to an interior right-hand side.
pub fn add_dirichlet_lift(grid: &Grid, coef: f64, values: &[C64], rhs: &mut [C64]) {
    let nx = grid.nx();
    let ax = coef / (grid.hx() * grid.hx());
    let ay = coef / (grid.hy() * grid.hy());
    for (slot, &k) in grid.interior().iter().enumerate() {
        for (nb, a) in [(k - 1, ax), (k + 1, ax), (k - nx, ay), (k + nx, ay)] {
            if grid.interior_slot(nb).is_none() {
                rhs[slot] += values[nb] * a;
            }
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = t.iter().find(|(r, c, _)| *r >= nrows || *c >= ncols) {
            return Err(Error::Shape(format!("entry ({r}, {c}) outside {nrows}x{ncols}")));
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { nrows, ncols, indptr, indices, data })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.data.len()
    }
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.indptr[r]..self.indptr[r + 1];
        self.indices[s.clone()].iter().copied().zip(self.data[s].iter().copied())
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_transpose(&self, y: &[f64], x: &mut [f64]) {
        for v in x.iter_mut() {
            *v = 0.0;
        }
        for (r, &yr) in y.iter().enumerate().take(self.nrows) {
            for (c, v) in self.row(r) {
                x[c] += v * yr;
            }
        }
    }

    /// Column sums, used to find unknowns no row touches.
    pub fn column_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.ncols];
        for (c, v) in self.indices.iter().zip(&self.data) {
            w[*c] += v.abs();
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive semi-definite operator.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        return CgOutcome { x, iterations: 0, relative_residual: 0.0 };
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while it < max_iter && rr.sqrt() > tol * bnorm {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let a = rr / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        it += 1;
    }
    CgOutcome { x, iterations: it, relative_residual: rr.sqrt() / bnorm }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData(format!("slope fit needs >= 2 paired points, got {} and {}", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Argument("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Composite Simpson weights for `n` uniform nodes of spacing `h`
/// (trapezoid on the last panel when `n` is even).
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 => {}
        1 => {}
        2 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let m = if n % 2 == 1 { n } else { n - 1 };
            for i in (0..m - 1).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if m < n {
                w[n - 2] += 0.5 * h;
                w[n - 1] += 0.5 * h;
            }
        }
    }
    w
}
