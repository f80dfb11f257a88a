//! Discrete MGT operator `𝒫 = ∂_t³ + α∂_t² − bΔ∂_t − c²Δ` and `L = ∂_t² − bΔ`.
//!
//! Values are produced at interior nodes; boundary and exterior entries are zero.

use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::prelude::*;
use crate::stencil::laplacian_interior;
use alloc::format;

fn laplacian_field(f: &SpaceTimeField, grid: &Grid) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(grid, f.role());
    for n in 0..f.levels() {
        laplacian_interior(grid, f.level(n), out.level_mut(n));
    }
    out
}

fn mask_interior(f: &mut SpaceTimeField, grid: &Grid) {
    for n in 0..f.levels() {
        let row = f.level_mut(n);
        for (k, v) in row.iter_mut().enumerate() {
            if grid.interior_slot(k).is_none() {
                *v = C64::new(0.0, 0.0);
            }
        }
    }
}

fn check(u: &SpaceTimeField, grid: &Grid) -> Result<()> {
    if u.role() == Role::Trace {
        return Err(Error::Shape("operator needs a full field, got a trace".into()));
    }
    u.check_shape(grid)?;
    if u.levels() < 5 {
        return Err(Error::Shape(format!("operator needs at least 5 time levels, have {}", u.levels())));
    }
    Ok(())
}

/// Direct stencil: five-point central third difference in time.
pub fn apply_p(u: &SpaceTimeField, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    check(u, grid)?;
    let dt = grid.dt();
    let d3 = u.derivative(dt, 3)?;
    let d2 = u.derivative(dt, 2)?;
    let d1 = u.derivative(dt, 1)?;
    let lap = laplacian_field(u, grid);
    let lap_d1 = laplacian_field(&d1, grid);
    let (a, b, c2) = (coeff.alpha(), coeff.b(), coeff.c2());
    let mut out = d3.with_role(Role::Source);
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        *v += d2.values()[i] * a - lap_d1.values()[i] * b - lap.values()[i] * c2;
    }
    mask_interior(&mut out, grid);
    Ok(out)
}

/// `L v = v_tt − bΔv`.
pub fn apply_l(v: &SpaceTimeField, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    v.check_shape(grid)?;
    let d2 = v.derivative(grid.dt(), 2)?;
    let lap = laplacian_field(v, grid);
    let mut out = d2.zip_with(&lap, |x, y| x - y * coeff.b())?.with_role(Role::Source);
    mask_interior(&mut out, grid);
    Ok(out)
}

/// Factored evaluation `L(u_t) + βL(u) + γu_tt`.
///
/// Agrees with [`apply_p`] to rounding on levels `2..=nt−2`, where the
/// composed central differences coincide with the five-point third difference.
pub fn apply_p_factored(u: &SpaceTimeField, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    check(u, grid)?;
    let dt = grid.dt();
    let ut = u.derivative(dt, 1)?;
    let l_ut = apply_l(&ut, coeff, grid)?;
    let l_u = apply_l(u, coeff, grid)?;
    let utt = u.derivative(dt, 2)?;
    let (beta, gamma) = (coeff.beta(), coeff.gamma());
    let mut out = l_ut;
    out.axpy(C64::new(beta, 0.0), &l_u)?;
    out.axpy(C64::new(gamma, 0.0), &utt)?;
    mask_interior(&mut out, grid);
    Ok(out)
}

/// `𝒫` evaluated from stored companions: `∂_t(u_tt) + αu_tt − bΔu_t − c²Δu`.
pub fn apply_p_companions(sol: &Solution, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
    sol.u.check_shape(grid)?;
    sol.u_t.check_shape(grid)?;
    sol.u_tt.check_shape(grid)?;
    let d = sol.u_tt.derivative(grid.dt(), 1)?;
    let lap_u = laplacian_field(&sol.u, grid);
    let lap_ut = laplacian_field(&sol.u_t, grid);
    let (a, b, c2) = (coeff.alpha(), coeff.b(), coeff.c2());
    let mut out = d.with_role(Role::Source);
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        *v += sol.u_tt.values()[i] * a - lap_ut.values()[i] * b - lap_u.values()[i] * c2;
    }
    mask_interior(&mut out, grid);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Coefficients, Grid) {
        (Coefficients::new(3.0, 2.0, 1.0, 10.0).unwrap(), Grid::rectangle(0.0, 1.0, 0.0, 1.0, 9, 9, 1.0, 16).unwrap())
    }

    #[test]
    fn constants_and_linear_fields_are_annihilated() {
        let (c, g) = setup();
        for f in [|_: [f64; 2], _: f64| C64::new(1.0, 0.0), |x: [f64; 2], _: f64| C64::new(x[0], 0.0)] {
            let u = SpaceTimeField::from_fn(&g, Role::U, f);
            assert!(apply_p(&u, &c, &g).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn t_squared_gives_two_alpha() {
        let (c, g) = setup();
        let u = SpaceTimeField::from_fn(&g, Role::U, |_, t| C64::new(t * t, 0.0));
        let p = apply_p(&u, &c, &g).unwrap();
        for n in 0..g.levels() {
            for &k in g.interior() {
                assert!((p.get(n, k) - C64::new(6.0, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn too_few_levels_is_a_shape_error() {
        let (c, _) = setup();
        let g = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 5, 5, 1.0, 3).unwrap();
        let u = SpaceTimeField::zeros(&g, Role::U);
        assert!(matches!(apply_p(&u, &c, &g), Err(Error::Shape(_))));
    }
}
