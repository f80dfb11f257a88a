use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::DataTuple;
use crate::grid::Grid;
use crate::prelude::*;
use crate::stencil::{fd_weights, laplacian_at};
use alloc::format;

/// Per-order residuals of the compatibility conditions at `t = 0` on Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    /// `residuals[k]` = max over Σ of `|∂_t^k h(0) − u_k|` (with `u_3` from the equation).
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    pub compatible: bool,
    /// Highest order whose residuals all pass, if any.
    pub compatible_order: Option<usize>,
}

/// Checks orders `0..=order` (at most 3) using forward differences of the
/// sampled `h` at `t = 0`; order 3 compares with `−αu2 + bΔu1 + c²Δu0 + f(0)`.
pub fn check_compatibility(data: &DataTuple, coeff: &Coefficients, grid: &Grid, order: usize, tolerance: f64) -> Result<CompatibilityReport> {
    data.check_shape(grid)?;
    if order > 3 {
        return Err(Error::Argument(format!("compatibility order {order} not supported (max 3)")));
    }
    if grid.levels() < order + 2 {
        return Err(Error::InsufficientData(format!(
            "order {order} needs {} time levels, have {}",
            order + 2,
            grid.levels()
        )));
    }
    let dt = grid.dt();
    let h = &data.h.h;
    let dh = |slot: usize, m: usize| -> C64 {
        if m == 0 {
            return h.get(0, slot);
        }
        let xs: Vec<f64> = (0..m + 2).map(|i| i as f64).collect();
        let w = fd_weights(0.0, &xs, m);
        let mut s = C64::new(0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            s += h.get(i, slot) * *wi;
        }
        s / dt.powi(m as i32)
    };
    let mut residuals = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let mut r = 0.0f64;
        for (slot, b) in grid.boundary().iter().enumerate() {
            let k = b.node;
            let target = match m {
                0 => data.u0[k],
                1 => data.u1[k],
                2 => data.u2[k],
                _ => {
                    let mut v = -data.u2[k] * coeff.alpha()
                        + laplacian_at(grid, &data.u1, k) * coeff.b()
                        + laplacian_at(grid, &data.u0, k) * coeff.c2();
                    if let Some(f) = &data.f {
                        v += f.get(0, k);
                    }
                    v
                }
            };
            r = r.max((dh(slot, m) - target).norm());
        }
        residuals.push(r);
    }
    let compatible_order = residuals.iter().position(|r| !(*r <= tolerance)).map_or(Some(order), |p| p.checked_sub(1));
    Ok(CompatibilityReport { compatible: compatible_order == Some(order), residuals, tolerance, compatible_order })
}
