//! Input data families with known answers.

use jmgt_core::{BoundaryField, Coefficients, DataTuple, Grid, Role, SpaceTimeField, C64};

const KX: f64 = 1.3;
const KY: f64 = -0.7;
const OMEGA: f64 = 2.0;

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// `u = t²`: boundary `t²`, initial triple `(0, 0, 2)`, source `2α`.
pub fn t_squared(grid: &Grid, coeff: &Coefficients) -> DataTuple {
    let mut d = DataTuple::zeros(grid);
    d.h = BoundaryField::from_fn(grid, |_, t| [re(t * t), re(2.0 * t), re(2.0)]);
    d.set_initial(grid, |_| [re(0.0), re(0.0), re(2.0)]);
    let a = coeff.alpha();
    d.f = Some(SpaceTimeField::from_fn(grid, Role::Source, |_, _| re(2.0 * a)));
    d
}

pub fn t_squared_exact(grid: &Grid) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, Role::U, |_, t| re(t * t))
}

fn wave(x: [f64; 2], t: f64) -> f64 {
    KX * x[0] + KY * x[1] + OMEGA * t
}

/// `u = sin(k·x + ωt)` with the forcing that makes it exact.
pub fn manufactured(grid: &Grid, coeff: &Coefficients) -> DataTuple {
    let k2 = KX * KX + KY * KY;
    let triple = |s: f64| [re(s.sin()), re(OMEGA * s.cos()), re(-OMEGA * OMEGA * s.sin())];
    let mut d = DataTuple::zeros(grid);
    d.h = BoundaryField::from_fn(grid, |x, t| triple(wave(x, t)));
    d.set_initial(grid, |x| triple(wave(x, 0.0)));
    let (a, b, c2) = (coeff.alpha(), coeff.b(), coeff.c2());
    d.f = Some(SpaceTimeField::from_fn(grid, Role::Source, |x, t| {
        let s = wave(x, t);
        re(-OMEGA.powi(3) * s.cos() - a * OMEGA * OMEGA * s.sin() + b * k2 * OMEGA * s.cos() + c2 * k2 * s.sin())
    }));
    d
}

pub fn manufactured_exact(grid: &Grid) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, Role::U, |x, t| re(wave(x, t).sin()))
}

/// Boundary data `amplitude·t³·shape(x)` with zero initial data.
pub fn cubic_ramp(grid: &Grid, amplitude: f64, shape: impl Fn([f64; 2]) -> f64) -> DataTuple {
    let mut d = DataTuple::zeros(grid);
    d.h = BoundaryField::from_fn(grid, |x, t| {
        let s = amplitude * shape(x);
        [re(s * t * t * t), re(3.0 * s * t * t), re(6.0 * s * t)]
    });
    d
}
