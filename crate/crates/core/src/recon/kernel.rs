//! The exact linear map from `p` on the coarse grid to the normalized pairings.
//!
//! For fixed probes the left side of the identity is linear in `p`:
//!
//! ```text
//! ∫∫ y F = ∫∫ p [2y g₀ − ∂_t(4y g₁) + ∂_t²(2y g₂)]
//! g₀ = w₁_tt w₂ + 2w₁_t w₂_t + w₁w₂_tt,  g₁ = w₁_t w₂ + w₁w₂_t,  g₂ = w₁w₂
//! ```
//!
//! after moving the time derivatives of `p` onto the rest, which assumes `p`
//! and `p_t` vanish at `t = 0` and `t = T`. The term `γβ∫∫ y w_t` is dropped.
//! Its relative size is about `1e-3` at the scales used here. Each complex
//! row is split into a real row and an imaginary row.

use crate::cgo::ProbeGeometry;
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::Csr;
use crate::field::Solution;
use crate::prelude::*;
use crate::recon::identity::{pairing_scale, AdjointSpec};
use crate::recon::ray::CoarseGrid;
use alloc::format;

/// Complex rows over the coarse columns for one source and one `σ`, one per spec.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRows {
    pub sigma: f64,
    pub rows: Vec<Vec<(usize, C64)>>,
}

/// Kernel rows of `p ↦ ∫∫ y F(p, w₁, w₂) / (−2σ²)` with the corrected bare adjoint of every spec.
#[allow(clippy::too_many_arguments)]
pub fn pairing_kernel(
    sigma: f64,
    w1: &Solution,
    w2: &Solution,
    specs: &[AdjointSpec],
    geom: &ProbeGeometry,
    coeff: &Coefficients,
    grid: &Grid,
    coarse: &CoarseGrid,
) -> Result<KernelRows> {
    for f in [&w1.u, &w1.u_t, &w1.u_tt, &w2.u, &w2.u_t, &w2.u_tt] {
        f.check_shape(grid)?;
    }
    if !(sigma > 0.0) {
        return Err(Error::Argument(format!("sigma = {sigma} must be positive")));
    }
    let levels = grid.levels();
    let nodes = grid.n_nodes();
    let (a1, b1, c1) = (w1.u.values(), w1.u_t.values(), w1.u_tt.values());
    let (a2, b2, c2) = (w2.u.values(), w2.u_t.values(), w2.u_tt.values());
    let g = |i: usize| -> [C64; 3] {
        [
            (c1[i] * a2[i] + b1[i] * b2[i] * 2.0 + a1[i] * c2[i]) * 2.0,
            (b1[i] * a2[i] + a1[i] * b2[i]) * 4.0,
            a1[i] * a2[i] * 2.0,
        ]
    };
    let gamma = coeff.gamma();
    let dt = grid.dt();
    let plane = coarse.nx * coarse.ny;
    let scale = pairing_scale(sigma);
    let i = C64::new(0.0, 1.0);
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(specs.len());
    let polar: Vec<Option<(f64, f64)>> = (0..nodes)
        .map(|k| (grid.area_weight(k) > 0.0).then(|| geom.polar(grid.coords(k))))
        .collect();
    let mut h = Vec::new();
    for spec in specs {
        let (lo, hi) = spec.weight.support();
        let mut dense = vec![zero; coarse.len()];
        for k in 0..nodes {
            let Some((r, theta)) = polar[k] else { continue };
            if spec.profile.value(theta) == 0.0 {
                continue;
            }
            let Some(sp) = coarse.spatial(grid.coords(k)) else { continue };
            // levels where y can be non-zero, padded by one for the differences
            let first = ((lo - r) / dt).floor().max(0.0) as usize;
            let last = (((hi - r) / dt).ceil().max(0.0) as usize).min(levels - 1);
            if first > last {
                continue;
            }
            let n0 = first.saturating_sub(1);
            let n1 = (last + 1).min(levels - 1);
            h.clear();
            for n in n0..=n1 {
                let t = grid.time(n);
                let a = spec.amplitude(r, theta, t, gamma, 1.0 / sigma)[0];
                if a == zero {
                    h.push([zero; 3]);
                    continue;
                }
                let y = (-i * sigma * (r + t)).exp() * a;
                let [g0, g1, g2] = g(n * nodes + k);
                h.push([y * g0, y * g1, y * g2]);
            }
            let at = |n: usize, c: usize| if n < n0 || n > n1 { zero } else { h[n - n0][c] };
            let aw = grid.area_weight(k);
            for n in n0..=n1 {
                // p and p_t vanish at both ends, so the end levels carry no weight
                if n == 0 || n + 1 == levels {
                    continue;
                }
                let kv = at(n, 0) - (at(n + 1, 1) - at(n - 1, 1)) / (2.0 * dt) + (at(n + 1, 2) - at(n, 2) * 2.0 + at(n - 1, 2)) / (dt * dt);
                if kv == zero {
                    continue;
                }
                let t = grid.time(n);
                let Some((it, ft)) = coarse.temporal(t) else { continue };
                let v = kv * (aw * grid.time_weight(n)) / scale;
                for &(off, ws) in &sp {
                    dense[it * plane + off] += v * (ws * (1.0 - ft));
                    dense[(it + 1) * plane + off] += v * (ws * ft);
                }
            }
        }
        out.push(dense.into_iter().enumerate().filter(|(_, v)| *v != zero).collect());
    }
    Ok(KernelRows { sigma, rows: out })
}

/// Stacks complex kernel rows as real and imaginary row pairs.
pub fn stack_kernels(blocks: &[KernelRows], ncols: usize) -> Result<Csr> {
    let mut triplets = Vec::new();
    let mut r = 0;
    for block in blocks {
        for row in &block.rows {
            for &(c, v) in row {
                triplets.push((r, c, v.re));
                triplets.push((r + 1, c, v.im));
            }
            r += 2;
        }
    }
    Csr::from_triplets(r, ncols, triplets)
}

/// Data in the same order as [`stack_kernels`].
pub fn stack_data(blocks: &[Vec<C64>]) -> Vec<f64> {
    blocks.iter().flat_map(|b| b.iter().flat_map(|z| [z.re, z.im])).collect()
}
