use crate::error::{Error, Result};
use crate::field::{Role, SpaceTimeField};
use crate::grid::Grid;
use crate::prelude::*;
use crate::stencil::{gradient, laplacian_at};
use alloc::format;

/// Supported discrete norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `L²(Ω × (0,T))`.
    L2Q,
    /// `L²(Ω)` at a time level.
    L2OmegaAt(usize),
    /// `H¹(Ω)` at a time level.
    H1OmegaAt(usize),
    /// `sup_t Σ_{k≤m} ‖∂_t^k u‖_{H^{m−k}}`, `m ≤ 2`.
    EmSurrogate(usize),
}

fn sobolev_sq(u: &[C64], grid: &Grid, m: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..grid.n_nodes() {
        let w = grid.area_weight(k);
        if w == 0.0 {
            continue;
        }
        let mut d = u[k].norm_sqr();
        if m >= 1 {
            let [gx, gy] = gradient(grid, u, k);
            d += gx.norm_sqr() + gy.norm_sqr();
        }
        if m >= 2 {
            d += laplacian_at(grid, u, k).norm_sqr();
        }
        s += w * d;
    }
    s
}

/// Discrete norm of a full field (trapezoidal quadrature in space and time).
pub fn discrete_norm(field: &SpaceTimeField, grid: &Grid, kind: NormKind) -> Result<f64> {
    if field.role() == Role::Trace {
        return Err(Error::Argument("use boundary_l2 for trace fields".into()));
    }
    field.check_shape(grid)?;
    let level_ok = |n: usize| -> Result<()> {
        if n >= grid.levels() {
            return Err(Error::Argument(format!("time level {n} beyond {}", grid.nt())));
        }
        Ok(())
    };
    match kind {
        NormKind::L2Q => {
            let mut s = 0.0;
            for n in 0..grid.levels() {
                s += grid.time_weight(n) * sobolev_sq(field.level(n), grid, 0);
            }
            Ok(s.sqrt())
        }
        NormKind::L2OmegaAt(n) => {
            level_ok(n)?;
            Ok(sobolev_sq(field.level(n), grid, 0).sqrt())
        }
        NormKind::H1OmegaAt(n) => {
            level_ok(n)?;
            Ok(sobolev_sq(field.level(n), grid, 1).sqrt())
        }
        NormKind::EmSurrogate(m) => {
            if m > 2 {
                return Err(Error::Argument(format!("E^{m} surrogate not supported (m <= 2)")));
            }
            let mut derivs = vec![field.clone()];
            for k in 1..=m {
                derivs.push(field.derivative(grid.dt(), k)?);
            }
            let mut best = 0.0f64;
            for n in 0..grid.levels() {
                let s: f64 = (0..=m).map(|k| sobolev_sq(derivs[k].level(n), grid, m - k).sqrt()).sum();
                best = best.max(s);
            }
            Ok(best)
        }
    }
}

/// `L²(Σ)` norm of a trace field (arc-length weights, trapezoid in time).
pub fn boundary_l2(trace: &SpaceTimeField, grid: &Grid) -> Result<f64> {
    if trace.role() != Role::Trace {
        return Err(Error::Argument("boundary_l2 expects a trace field".into()));
    }
    trace.check_shape(grid)?;
    let mut s = 0.0;
    for n in 0..grid.levels() {
        let row = trace.level(n);
        let sp: f64 = grid.boundary().iter().zip(row).map(|(b, z)| b.weight * z.norm_sqr()).sum();
        s += grid.time_weight(n) * sp;
    }
    Ok(s.sqrt())
}

/// `L²(Ω)`-type norm of a single spatial slice, including derivatives up to order `m ≤ 2`.
pub fn slice_norm(u: &[C64], grid: &Grid, m: usize) -> f64 {
    sobolev_sq(u, grid, m.min(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_norms() {
        let g = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 11, 11, 1.0, 400).unwrap();
        let one = SpaceTimeField::from_fn(&g, Role::U, |_, _| C64::new(1.0, 0.0));
        assert!((discrete_norm(&one, &g, NormKind::L2OmegaAt(3)).unwrap() - 1.0).abs() < 1e-12);
        let t = SpaceTimeField::from_fn(&g, Role::U, |_, t| C64::new(t, 0.0));
        assert!((discrete_norm(&t, &g, NormKind::L2Q).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-5);
        let z = SpaceTimeField::zeros(&g, Role::U);
        assert_eq!(discrete_norm(&z, &g, NormKind::EmSurrogate(2)).unwrap(), 0.0);
        assert!(matches!(discrete_norm(&z, &g, NormKind::EmSurrogate(3)), Err(Error::Argument(_))));
    }
}
