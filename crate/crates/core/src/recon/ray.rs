//! Weighted light-ray transform of the reduced nonlinearity `u = e^{−γt/2}p`
//! and its regularized inversion.
//!
//! Each row pairs `u` with the kernel of one `(source, η, ψ)` triple,
//!
//! ```text
//! ∫∫∫ b r^{−1/2} u(q + √b r e_θ, t) η(θ) ψ(r+t) E(r+t)² dr dθ dt,
//! ```
//!
//! where `E(s) = e^{−μ₀s/2}χ(s)` is the probe envelope. Integration runs over
//! polar normal coordinates about `q`; `u` is extended by zero outside `Ω`
//! and interpolated trilinearly from a coarse nodal `(x, y, t)` grid.

use crate::cgo::{AmplitudeSpec, AngularProfile, ProbeGeometry};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::linalg::{conjugate_gradient, Csr};
use crate::prelude::*;
use crate::recon::identity::{AdjointSpec, SWeight};
use alloc::format;

/// Nodal grid on `[x₀, x₁] × [y₀, y₁] × [t₀, t₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseGrid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub t: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl CoarseGrid {
    pub fn new(x: (f64, f64), y: (f64, f64), t: (f64, f64), nx: usize, ny: usize, nt: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || nt < 2 || !(x.1 > x.0) || !(y.1 > y.0) || !(t.1 > t.0) {
            return Err(Error::Argument(format!("coarse grid needs >= 2 nodes per axis and positive extents, got {nx}x{ny}x{nt}")));
        }
        Ok(Self { x, y, t, nx, ny, nt })
    }

    /// Bounding box of a simulation grid over `[0, T]`.
    pub fn covering(grid: &Grid, nx: usize, ny: usize, nt: usize) -> Result<Self> {
        let o = grid.origin();
        let x1 = o[0] + (grid.nx() - 1) as f64 * grid.hx();
        let y1 = o[1] + (grid.ny() - 1) as f64 * grid.hy();
        Self::new((o[0], x1), (o[1], y1), (0.0, grid.t_final()), nx, ny, nt)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            (self.x.1 - self.x.0) / (self.nx - 1) as f64,
            (self.y.1 - self.y.0) / (self.ny - 1) as f64,
            (self.t.1 - self.t.0) / (self.nt - 1) as f64,
        ]
    }

    /// Index of node `(ix, iy, it)` (time-major).
    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (it * self.ny + iy) * self.nx + ix
    }

    pub fn coords(&self, idx: usize) -> ([f64; 2], f64) {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let it = idx / (self.nx * self.ny);
        let [hx, hy, ht] = self.spacing();
        ([self.x.0 + ix as f64 * hx, self.y.0 + iy as f64 * hy], self.t.0 + it as f64 * ht)
    }

    pub fn sample(&self, f: impl Fn([f64; 2], f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| {
            let (x, t) = self.coords(i);
            f(x, t)
        }).collect()
    }

    fn axis(lo: f64, h: f64, n: usize, v: f64) -> Option<(usize, f64)> {
        let s = (v - lo) / h;
        if !(s >= -1e-12 && s <= (n - 1) as f64 + 1e-12) {
            return None;
        }
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        Some((i, (s - i as f64).clamp(0.0, 1.0)))
    }

    /// Bilinear spatial weights `[(column offset, weight); 4]` at `x`.
    pub(crate) fn spatial(&self, x: [f64; 2]) -> Option<[(usize, f64); 4]> {
        let [hx, hy, _] = self.spacing();
        let (i, fx) = Self::axis(self.x.0, hx, self.nx, x[0])?;
        let (j, fy) = Self::axis(self.y.0, hy, self.ny, x[1])?;
        let b = j * self.nx + i;
        Some([
            (b, (1.0 - fx) * (1.0 - fy)),
            (b + 1, fx * (1.0 - fy)),
            (b + self.nx, (1.0 - fx) * fy),
            (b + self.nx + 1, fx * fy),
        ])
    }

    pub(crate) fn temporal(&self, t: f64) -> Option<(usize, f64)> {
        let [_, _, ht] = self.spacing();
        Self::axis(self.t.0, ht, self.nt, t)
    }

    /// Trilinear interpolation of nodal values.
    pub fn interpolate(&self, values: &[f64], x: [f64; 2], t: f64) -> Option<f64> {
        let sp = self.spatial(x)?;
        let (it, ft) = self.temporal(t)?;
        let plane = self.nx * self.ny;
        let mut v = 0.0;
        for (off, w) in sp {
            v += w * ((1.0 - ft) * values[it * plane + off] + ft * values[(it + 1) * plane + off]);
        }
        Some(v)
    }
}

/// Angular profiles per source and a common list of `s`-windows; rows are
/// ordered source-major, then profile, then window.
#[derive(Debug, Clone, PartialEq)]
pub struct RayDesign {
    pub profiles_per_source: usize,
    pub windows: Vec<SWeight>,
}

impl RayDesign {
    /// `count` overlapping windows of half-width equal to their spacing, centred on `[lo, hi]`.
    pub fn uniform(profiles_per_source: usize, count: usize, s_range: (f64, f64)) -> Result<Self> {
        if profiles_per_source == 0 || count == 0 || !(s_range.1 > s_range.0) {
            return Err(Error::Argument("ray design needs profiles, windows and a nonempty s-range".into()));
        }
        let h = (s_range.1 - s_range.0) / count as f64;
        let windows = (0..count).map(|m| SWeight::Window { center: s_range.0 + (m as f64 + 0.5) * h, half_width: h }).collect();
        Ok(Self { profiles_per_source, windows })
    }

    /// Like [`RayDesign::uniform`], with every window support inside `s_range`.
    pub fn within(profiles_per_source: usize, count: usize, s_range: (f64, f64)) -> Result<Self> {
        let k = 2.0 * count as f64;
        let shrink = |a: f64, b: f64| (a * k + b) / (k + 1.0);
        Self::uniform(profiles_per_source, count, (shrink(s_range.0, s_range.1), shrink(s_range.1, s_range.0)))
    }

    /// Range of `s = r + t` met by `Ω × [t₀, t₁]` from a source.
    pub fn s_range(geom: &ProbeGeometry, t: (f64, f64)) -> (f64, f64) {
        (geom.r_floor() + t.0, geom.r_floor() + geom.diam_omega() + t.1)
    }

    pub fn rows_per_source(&self) -> usize {
        self.profiles_per_source * self.windows.len()
    }

    /// Periodic bumps centred on the aperture samples, half-width twice their spacing.
    pub fn profiles(&self, geom: &ProbeGeometry) -> Vec<AngularProfile> {
        let n = self.profiles_per_source;
        if n == 1 {
            return vec![AngularProfile::Constant];
        }
        let hw = (2.0 * geom.aperture() / n as f64 * 2.0).min(3.0);
        geom.theta_samples(n).into_iter().map(|center| AngularProfile::Bump { center, half_width: hw }).collect()
    }

    pub fn adjoint_specs(&self, geom: &ProbeGeometry) -> Vec<AdjointSpec> {
        let mut out = Vec::with_capacity(self.rows_per_source());
        for profile in self.profiles(geom) {
            for &weight in &self.windows {
                out.push(AdjointSpec { profile, weight });
            }
        }
        out
    }
}

/// Identifies one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RayRow {
    pub source: usize,
    pub profile: usize,
    pub window: usize,
}

/// Three-point Gauss–Legendre nodes on `panels` equal panels of `[a, b]`.
pub fn gauss_panels(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let g = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(3 * panels);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in g {
            out.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// `∫∫ f(r, t) w(r + t) dr dt` over a box, by the rule used for system rows.
pub fn ray_integral(f: impl Fn(f64, f64) -> f64, w: impl Fn(f64) -> f64, r: (f64, f64), t: (f64, f64), panels: usize) -> f64 {
    let rq = gauss_panels(r.0, r.1, panels);
    let tq = gauss_panels(t.0, t.1, panels);
    let mut acc = 0.0;
    for &(rr, wr) in &rq {
        for &(tt, wt) in &tq {
            acc += wr * wt * f(rr, tt) * w(rr + tt);
        }
    }
    acc
}

/// `∫₀^L∫₀^T e^{−μ(r+t)} dr dt`.
pub fn constant_ray_value(mu: f64, l: f64, t: f64) -> f64 {
    let one = |x: f64| if mu == 0.0 { x } else { (1.0 - (-mu * x).exp()) / mu };
    one(l) * one(t)
}

#[derive(Debug, Clone)]
pub struct RayTransformSystem {
    pub coarse: CoarseGrid,
    pub rows: Vec<RayRow>,
    pub matrix: Csr,
}

impl RayTransformSystem {
    /// Assembles the forward matrix for all sources of `geoms`.
    pub fn assemble(geoms: &[ProbeGeometry], design: &RayDesign, probe: &AmplitudeSpec, b: f64, domain: &Domain, coarse: CoarseGrid) -> Result<Self> {
        probe.validate()?;
        if geoms.is_empty() || design.rows_per_source() == 0 {
            return Err(Error::Argument("ray system needs sources and rows".into()));
        }
        let nw = design.windows.len();
        let npr = design.profiles_per_source;
        let ncol = coarse.len();
        let plane = coarse.nx * coarse.ny;
        let [hx, hy, ht] = coarse.spacing();
        let h = hx.min(hy);
        let mut rows = Vec::new();
        let mut triplets = Vec::new();
        for (si, geom) in geoms.iter().enumerate() {
            let profiles = design.profiles(geom);
            let sb = geom.sqrt_b();
            let r_lo = geom.r_floor();
            let r_hi = r_lo + geom.diam_omega();
            let (c, a) = (geom.inward_angle(), geom.aperture());
            let th_panels = ((2.0 * a * r_hi * sb / h).ceil() as usize).max(4);
            let r_panels = (((r_hi - r_lo) * sb / h).ceil() as usize).max(4);
            let t_panels = (((coarse.t.1 - coarse.t.0) / ht).ceil() as usize).max(4);
            let thq = gauss_panels(c - a, c + a, th_panels);
            let rq = gauss_panels(r_lo, r_hi, r_panels);
            let tq = gauss_panels(coarse.t.0, coarse.t.1, t_panels);
            let tloc: Vec<(usize, f64)> = tq.iter().map(|&(t, _)| coarse.temporal(t).expect("quadrature inside the time range")).collect();
            let mut dense = vec![0.0; npr * nw * ncol];
            let mut etas = Vec::with_capacity(npr);
            let mut psis = Vec::with_capacity(nw);
            for &(th, wth) in &thq {
                etas.clear();
                for (j, pr) in profiles.iter().enumerate() {
                    let v = pr.value(th);
                    if v != 0.0 {
                        etas.push((j, v));
                    }
                }
                if etas.is_empty() {
                    continue;
                }
                let dir = [th.cos(), th.sin()];
                for &(r, wr) in &rq {
                    let q = geom.q();
                    let x = [q[0] + sb * r * dir[0], q[1] + sb * r * dir[1]];
                    if !domain.contains(x) {
                        continue;
                    }
                    let Some(sp) = coarse.spatial(x) else { continue };
                    let base = wth * wr * b / r.sqrt();
                    for (ti, &(t, wt)) in tq.iter().enumerate() {
                        let s = r + t;
                        let env = probe.envelope(s)[0];
                        let env2 = env * env;
                        if env2 == 0.0 {
                            continue;
                        }
                        psis.clear();
                        for (m, win) in design.windows.iter().enumerate() {
                            let (lo, hi) = win.support();
                            if s > lo && s < hi {
                                let v = win.value(s);
                                if v != 0.0 {
                                    psis.push((m, v));
                                }
                            }
                        }
                        if psis.is_empty() {
                            continue;
                        }
                        let (it, ft) = tloc[ti];
                        let k = base * wt * env2;
                        for &(j, eta) in &etas {
                            for &(m, psi) in &psis {
                                let row = &mut dense[(j * nw + m) * ncol..(j * nw + m + 1) * ncol];
                                let c = k * eta * psi;
                                for &(off, ws) in &sp {
                                    row[it * plane + off] += c * ws * (1.0 - ft);
                                    row[(it + 1) * plane + off] += c * ws * ft;
                                }
                            }
                        }
                    }
                }
            }
            for j in 0..npr {
                for m in 0..nw {
                    let r = rows.len();
                    rows.push(RayRow { source: si, profile: j, window: m });
                    let dr = &dense[(j * nw + m) * ncol..(j * nw + m + 1) * ncol];
                    for (col, &v) in dr.iter().enumerate() {
                        if v != 0.0 {
                            triplets.push((r, col, v));
                        }
                    }
                }
            }
        }
        let matrix = Csr::from_triplets(rows.len(), ncol, triplets)?;
        Ok(Self { coarse, rows, matrix })
    }

    /// Fraction of coarse nodes touched by at least one row (above `1e-3` of the largest column weight).
    pub fn coverage_mask(&self) -> Vec<bool> {
        coverage_of(&self.matrix)
    }
}

/// Data vector `A·u`.
pub fn ray_forward(u: &[f64], system: &RayTransformSystem) -> Result<Vec<f64>> {
    if u.len() != system.matrix.ncols() {
        return Err(Error::Shape(format!("field has {} values, system expects {}", u.len(), system.matrix.ncols())));
    }
    let mut out = vec![0.0; system.matrix.nrows()];
    system.matrix.mul(u, &mut out);
    Ok(out)
}

/// Tikhonov penalty `λ·s·(‖u‖² + g‖∇u‖²)` with `s` the mean diagonal of the
/// row-normalized normal matrix and `∇` the nodal first differences.
///
/// Rows are divided by `max(‖row‖, row_floor·max‖row‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub lambda: f64,
    pub smoothing: f64,
    pub row_floor: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Regularization {
    fn default() -> Self {
        Self { lambda: 1e-3, smoothing: 4.0, row_floor: 0.05, tol: 1e-8, max_iter: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub u: Vec<f64>,
    pub covered: Vec<bool>,
    pub coverage: f64,
    /// `‖W(Au − d)‖/‖Wd‖` with row normalization `W`.
    pub relative_residual: f64,
    /// `‖Im d‖/‖d‖`; the exact data are real.
    pub imaginary_ratio: f64,
    pub iterations: usize,
}

/// Regularized least squares for real `u` from complex data.
///
/// The kernel is real, so the imaginary parts only enter the consistency ratio.
pub fn ray_invert(data: &[C64], system: &RayTransformSystem, reg: &Regularization) -> Result<Inversion> {
    let re: Vec<f64> = data.iter().map(|z| z.re).collect();
    let mut inv = regularized_solve(&system.matrix, &system.coarse, system.coverage_mask(), &re, reg)?;
    let im: f64 = data.iter().map(|z| z.im * z.im).sum();
    let all: f64 = data.iter().map(|z| z.norm_sqr()).sum();
    inv.imaginary_ratio = if all > 0.0 { (im / all).sqrt() } else { 0.0 };
    Ok(inv)
}

/// Column weight above `1e-3` of the largest.
pub fn coverage_of(a: &Csr) -> Vec<bool> {
    let w = a.column_weights();
    let top = w.iter().cloned().fold(0.0, f64::max);
    w.iter().map(|v| *v > 1e-3 * top && top > 0.0).collect()
}

/// `min ‖S(Ax − d)‖² + μ(‖x‖² + g‖∇x‖²)` by conjugate gradients on the normal equations.
pub fn regularized_solve(a: &Csr, cg: &CoarseGrid, covered: Vec<bool>, data: &[f64], reg: &Regularization) -> Result<Inversion> {
    if data.len() != a.nrows() {
        return Err(Error::Shape(format!("{} data for {} rows", data.len(), a.nrows())));
    }
    if a.ncols() != cg.len() || covered.len() != cg.len() {
        return Err(Error::Shape(format!("{} columns for {} coarse nodes", a.ncols(), cg.len())));
    }
    if !(reg.lambda >= 0.0) || !(reg.smoothing >= 0.0) {
        return Err(Error::Argument("regularization weights must be non-negative".into()));
    }
    if reg.lambda == 0.0 && (a.nrows() < a.ncols() || covered.iter().any(|c| !c)) {
        return Err(Error::RegularizationRequired);
    }
    let norms: Vec<f64> = (0..a.nrows()).map(|r| a.row(r).map(|(_, v)| v * v).sum::<f64>().sqrt()).collect();
    let floor = reg.row_floor * norms.iter().cloned().fold(0.0, f64::max);
    let scale: Vec<f64> = norms.iter().map(|n| if *n > 0.0 { 1.0 / n.max(floor) } else { 0.0 }).collect();
    let d: Vec<f64> = data.iter().zip(&scale).map(|(z, s)| z * s).collect();
    let live = scale.iter().filter(|s| **s > 0.0).count().max(1) as f64;
    let mu = reg.lambda * live / a.ncols() as f64;
    let sd: Vec<f64> = d.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let mut rhs = vec![0.0; a.ncols()];
    a.mul_transpose(&sd, &mut rhs);
    let nrows = a.nrows();
    let apply = |x: &[f64], out: &mut [f64]| {
        let mut tmp = vec![0.0; nrows];
        a.mul(x, &mut tmp);
        for (t, s) in tmp.iter_mut().zip(&scale) {
            *t *= s * s;
        }
        a.mul_transpose(&tmp, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += mu * xi;
        }
        if reg.smoothing > 0.0 {
            add_gradient_penalty(cg, x, mu * reg.smoothing, out);
        }
    };
    let sol = conjugate_gradient(apply, &rhs, reg.tol, reg.max_iter);
    let mut fit = vec![0.0; nrows];
    a.mul(&sol.x, &mut fit);
    let mut num = 0.0;
    for ((f, s), dd) in fit.iter().zip(&scale).zip(&d) {
        num += (f * s - dd).powi(2);
    }
    let den: f64 = d.iter().map(|v| v * v).sum();
    let coverage = covered.iter().filter(|c| **c).count() as f64 / covered.len() as f64;
    Ok(Inversion {
        u: sol.x,
        covered,
        coverage,
        relative_residual: if den > 0.0 { (num / den).sqrt() } else { 0.0 },
        imaginary_ratio: 0.0,
        iterations: sol.iterations,
    })
}

/// `out += c·DᵀD x` for first differences along each axis of the coarse grid.
fn add_gradient_penalty(cg: &CoarseGrid, x: &[f64], c: f64, out: &mut [f64]) {
    let strides = [1, cg.nx, cg.nx * cg.ny];
    let dims = [cg.nx, cg.ny, cg.nt];
    for idx in 0..x.len() {
        let pos = [idx % cg.nx, (idx / cg.nx) % cg.ny, idx / (cg.nx * cg.ny)];
        for ax in 0..3 {
            if pos[ax] + 1 < dims[ax] {
                let j = idx + strides[ax];
                let d = x[j] - x[idx];
                out[j] += c * d;
                out[idx] -= c * d;
            }
        }
    }
}

/// `p = e^{γt/2}u` at the coarse nodes.
pub fn recover_p(u: &[f64], coarse: &CoarseGrid, gamma: f64) -> Result<Vec<f64>> {
    if u.len() != coarse.len() {
        return Err(Error::Shape(format!("field has {} values, grid has {}", u.len(), coarse.len())));
    }
    Ok(u.iter().enumerate().map(|(i, v)| v * (0.5 * gamma * coarse.coords(i).1).exp()).collect())
}

/// `u = e^{−γt/2}p` sampled at the coarse nodes.
pub fn reduce_p(p: impl Fn([f64; 2], f64) -> f64, coarse: &CoarseGrid, gamma: f64) -> Vec<f64> {
    coarse.sample(|x, t| p(x, t) * (-0.5 * gamma * t).exp())
}

/// Relative `L²` error over the masked nodes.
pub fn relative_error(estimate: &[f64], truth: &[f64], mask: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((e, t), m) in estimate.iter().zip(truth).zip(mask) {
        if *m {
            num += (e - t).powi(2);
            den += t * t;
        }
    }
    if den > 0.0 { (num / den).sqrt() } else { num.sqrt() }
}
