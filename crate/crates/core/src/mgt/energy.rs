use crate::error::Result;
use crate::field::Solution;
use crate::grid::Grid;
use crate::prelude::*;
use crate::stencil::{gradient, laplacian_at};

/// `E(t) = ½∫(|u_t|² + |u_tt|² + |∇u|² + |∇u_t|² + |Δu|²)` per time level,
/// trapezoidal quadrature over the active nodes.
pub fn energy(sol: &Solution, grid: &Grid) -> Result<Vec<f64>> {
    sol.u.check_shape(grid)?;
    sol.u_t.check_shape(grid)?;
    sol.u_tt.check_shape(grid)?;
    let mut out = Vec::with_capacity(grid.levels());
    for n in 0..grid.levels() {
        let (u, ut, utt) = (sol.u.level(n), sol.u_t.level(n), sol.u_tt.level(n));
        let mut e = 0.0;
        for k in 0..grid.n_nodes() {
            let w = grid.area_weight(k);
            if w == 0.0 {
                continue;
            }
            let [gx, gy] = gradient(grid, u, k);
            let [hx, hy] = gradient(grid, ut, k);
            let lap = laplacian_at(grid, u, k);
            let density = ut[k].norm_sqr() + utt[k].norm_sqr() + gx.norm_sqr() + gy.norm_sqr() + hx.norm_sqr() + hy.norm_sqr() + lap.norm_sqr();
            e += w * density;
        }
        out.push(0.5 * e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Role, SpaceTimeField};

    #[test]
    fn closed_form_energies() {
        let g = Grid::rectangle(0.0, 2.0, 0.0, 1.0, 9, 9, 1.0, 8).unwrap();
        let sol = Solution {
            u: SpaceTimeField::from_fn(&g, Role::U, |_, t| C64::new(t * t, 0.0)),
            u_t: SpaceTimeField::from_fn(&g, Role::Ut, |_, t| C64::new(2.0 * t, 0.0)),
            u_tt: SpaceTimeField::from_fn(&g, Role::Utt, |_, _| C64::new(2.0, 0.0)),
        };
        let e = energy(&sol, &g).unwrap();
        for n in 0..g.levels() {
            let t = g.time(n);
            assert!((e[n] - 0.5 * 2.0 * (4.0 * t * t + 4.0)).abs() < 1e-10);
        }
        let mut lin = Solution::zeros(&g);
        lin.u = SpaceTimeField::from_fn(&g, Role::U, |x, _| C64::new(x[0], 0.0));
        assert!(energy(&lin, &g).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }
}
