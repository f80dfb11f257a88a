use crate::error::{Error, Result};
use crate::field::{Role, SpaceTimeField};
use crate::grid::Grid;
use crate::stencil::normal_derivative;
#[allow(unused_imports)]
use crate::prelude::*;

/// Discrete Dirichlet-to-Neumann trace `∂_ν u` on Σ (second-order one-sided
/// differences along the grid axes, projected on the node normal).
pub fn dtn_trace(u: &SpaceTimeField, grid: &Grid) -> Result<SpaceTimeField> {
    u.check_shape(grid)?;
    if u.role() == Role::Trace {
        return Err(Error::Shape("DtN trace of a trace field".into()));
    }
    if grid.boundary().iter().any(|b| !(b.normal[0].hypot(b.normal[1]) > 0.5)) {
        return Err(Error::Geometry("boundary node without a unit normal".into()));
    }
    let mut out = SpaceTimeField::zeros(grid, Role::Trace);
    for n in 0..u.levels() {
        let d = normal_derivative(grid, u.level(n));
        out.level_mut(n).copy_from_slice(&d);
    }
    Ok(out)
}
