//! Space-time fields, Dirichlet data and solver outputs.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::prelude::*;
use alloc::format;

/// What a field represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    U,
    Ut,
    Utt,
    Source,
    Trace,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::U => "u",
            Role::Ut => "u_t",
            Role::Utt => "u_tt",
            Role::Source => "source",
            Role::Trace => "trace",
        }
    }
}

/// Complex values per (time level, point), stored level-major.
///
/// For `Role::Trace` the points are the boundary nodes of the owning grid
/// in [`Grid::boundary`] order; otherwise they are all grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    points: usize,
    levels: usize,
    role: Role,
    data: Vec<C64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &Grid, role: Role) -> Self {
        let points = points_for(grid, role);
        Self { points, levels: grid.levels(), role, data: vec![C64::new(0.0, 0.0); points * grid.levels()] }
    }

    pub fn from_raw(points: usize, levels: usize, role: Role, data: Vec<C64>) -> Result<Self> {
        if data.len() != points * levels {
            return Err(Error::Shape(format!("{} values for {points} points x {levels} levels", data.len())));
        }
        Ok(Self { points, levels, role, data })
    }

    /// Samples `f(x, t)` on every node (or boundary node, for traces).
    pub fn from_fn(grid: &Grid, role: Role, f: impl Fn([f64; 2], f64) -> C64) -> Self {
        let mut out = Self::zeros(grid, role);
        for n in 0..grid.levels() {
            let t = grid.time(n);
            let row = out.level_mut(n);
            if role == Role::Trace {
                for (slot, b) in grid.boundary().iter().enumerate() {
                    row[slot] = f(grid.coords(b.node), t);
                }
            } else {
                for (k, v) in row.iter_mut().enumerate() {
                    if grid.is_active(k) {
                        *v = f(grid.coords(k), t);
                    }
                }
            }
        }
        out
    }

    pub fn points(&self) -> usize {
        self.points
    }
    pub fn levels(&self) -> usize {
        self.levels
    }
    pub fn role(&self) -> Role {
        self.role
    }
    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }
    pub fn values(&self) -> &[C64] {
        &self.data
    }
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_values(self) -> Vec<C64> {
        self.data
    }
    pub fn level(&self, n: usize) -> &[C64] {
        &self.data[n * self.points..(n + 1) * self.points]
    }
    pub fn level_mut(&mut self, n: usize) -> &mut [C64] {
        &mut self.data[n * self.points..(n + 1) * self.points]
    }
    pub fn get(&self, n: usize, k: usize) -> C64 {
        self.data[n * self.points + k]
    }
    pub fn set(&mut self, n: usize, k: usize, v: C64) {
        self.data[n * self.points + k] = v;
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        let points = points_for(grid, self.role);
        if self.points != points || self.levels != grid.levels() {
            return Err(Error::Shape(format!(
                "{} field is {}x{}, grid expects {}x{}",
                self.role.as_str(),
                self.points,
                self.levels,
                points,
                grid.levels()
            )));
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.points != other.points || self.levels != other.levels {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.points, self.levels, other.points, other.levels
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: C64, other: &Self) -> Result<()> {
        self.same_shape(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: C64) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { points: self.points, levels: self.levels, role: self.role, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// Pointwise combination of two same-shaped fields.
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { points: self.points, levels: self.levels, role: self.role, data })
    }

    /// Values on the boundary nodes as a trace field.
    pub fn boundary_trace(&self, grid: &Grid) -> Result<Self> {
        self.check_shape(grid)?;
        let mut out = Self::zeros(grid, Role::Trace);
        for n in 0..self.levels {
            let src = self.level(n);
            let dst = out.level_mut(n);
            for (slot, b) in grid.boundary().iter().enumerate() {
                dst[slot] = src[b.node];
            }
        }
        Ok(out)
    }

    /// Centered second-order time derivative, one-sided second order at the ends.
    pub fn time_derivative(&self, dt: f64) -> Result<Self> {
        if self.levels < 3 {
            return Err(Error::InsufficientData(format!("time derivative needs 3 levels, have {}", self.levels)));
        }
        let mut out = self.clone();
        let p = self.points;
        let last = self.levels - 1;
        let s = 1.0 / (2.0 * dt);
        for n in 0..self.levels {
            for k in 0..p {
                let d = if n == 0 {
                    -3.0 * self.get(0, k) + 4.0 * self.get(1, k) - self.get(2, k)
                } else if n == last {
                    3.0 * self.get(last, k) - 4.0 * self.get(last - 1, k) + self.get(last - 2, k)
                } else {
                    self.get(n + 1, k) - self.get(n - 1, k)
                };
                out.data[n * p + k] = d * s;
            }
        }
        Ok(out)
    }

    /// `m`-th time derivative: central where it fits, one-sided second order at the ends.
    pub fn derivative(&self, dt: f64, m: usize) -> Result<Self> {
        if self.levels < m + 2 {
            return Err(Error::InsufficientData(format!(
                "order-{m} time derivative needs {} levels, have {}",
                m + 2,
                self.levels
            )));
        }
        let mut out = self.clone();
        let p = self.points;
        for n in 0..self.levels {
            let (start, w) = crate::stencil::time_stencil(n, self.levels, m, dt);
            let dst = &mut out.data[n * p..(n + 1) * p];
            for v in dst.iter_mut() {
                *v = C64::new(0.0, 0.0);
            }
            for (j, wj) in w.iter().enumerate() {
                let src = &self.data[(start + j) * p..(start + j + 1) * p];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * wj;
                }
            }
        }
        Ok(out)
    }

    /// Time derivative with the role advanced (`u → u_t → u_tt`).
    pub fn d_dt(&self, dt: f64) -> Result<Self> {
        let role = match self.role {
            Role::U => Role::Ut,
            Role::Ut => Role::Utt,
            r => r,
        };
        Ok(self.time_derivative(dt)?.with_role(role))
    }
}

fn points_for(grid: &Grid, role: Role) -> usize {
    if role == Role::Trace {
        grid.boundary().len()
    } else {
        grid.n_nodes()
    }
}

/// Dirichlet data `h` on Σ together with `h_t` and `h_tt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub h: SpaceTimeField,
    pub h_t: SpaceTimeField,
    pub h_tt: SpaceTimeField,
}

impl BoundaryField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = SpaceTimeField::zeros(grid, Role::Trace);
        Self { h: z.clone(), h_t: z.clone(), h_tt: z }
    }

    /// Analytic data: `f(x, t) = [h, h_t, h_tt]`.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2], f64) -> [C64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for n in 0..grid.levels() {
            let t = grid.time(n);
            for (slot, b) in grid.boundary().iter().enumerate() {
                let [h, ht, htt] = f(grid.coords(b.node), t);
                out.h.set(n, slot, h);
                out.h_t.set(n, slot, ht);
                out.h_tt.set(n, slot, htt);
            }
        }
        out
    }

    /// Sampled data; time derivatives by second-order finite differences.
    pub fn from_samples(grid: &Grid, h: SpaceTimeField) -> Result<Self> {
        let h = h.with_role(Role::Trace);
        h.check_shape(grid)?;
        let h_t = h.time_derivative(grid.dt())?;
        let h_tt = h_t.time_derivative(grid.dt())?;
        Ok(Self { h, h_t, h_tt })
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        self.h.check_shape(grid)?;
        self.h_t.check_shape(grid)?;
        self.h_tt.check_shape(grid)
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self { h: self.h.map(|z| a * z), h_t: self.h_t.map(|z| a * z), h_tt: self.h_tt.map(|z| a * z) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            h: self.h.zip_with(&other.h, |a, b| a + b)?,
            h_t: self.h_t.zip_with(&other.h_t, |a, b| a + b)?,
            h_tt: self.h_tt.zip_with(&other.h_tt, |a, b| a + b)?,
        })
    }
}

/// Data of the linear problem: boundary values, initial triple, source.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTuple {
    pub h: BoundaryField,
    pub u0: Vec<C64>,
    pub u1: Vec<C64>,
    pub u2: Vec<C64>,
    pub f: Option<SpaceTimeField>,
}

impl DataTuple {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.n_nodes()];
        Self { h: BoundaryField::zeros(grid), u0: z.clone(), u1: z.clone(), u2: z, f: None }
    }

    /// Zero boundary and initial data with the given source.
    pub fn source_only(grid: &Grid, f: SpaceTimeField) -> Self {
        let mut d = Self::zeros(grid);
        d.f = Some(f.with_role(Role::Source));
        d
    }

    /// Samples the initial triple from `g(x) = [u0, u1, u2]` on active nodes.
    pub fn set_initial(&mut self, grid: &Grid, g: impl Fn([f64; 2]) -> [C64; 3]) {
        for k in 0..grid.n_nodes() {
            if grid.is_active(k) {
                let [a, b, c] = g(grid.coords(k));
                self.u0[k] = a;
                self.u1[k] = b;
                self.u2[k] = c;
            }
        }
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        self.h.check_shape(grid)?;
        for (name, v) in [("u0", &self.u0), ("u1", &self.u1), ("u2", &self.u2)] {
            if v.len() != grid.n_nodes() {
                return Err(Error::Shape(format!("{name} has {} values, grid has {} nodes", v.len(), grid.n_nodes())));
            }
        }
        if let Some(f) = &self.f {
            if f.points() != grid.n_nodes() || f.levels() != grid.levels() {
                return Err(Error::Shape(format!(
                    "source is {}x{}, grid expects {}x{}",
                    f.points(),
                    f.levels(),
                    grid.n_nodes(),
                    grid.levels()
                )));
            }
        }
        Ok(())
    }

    /// `a·self + b·other`, componentwise.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        let lin = |x: &[C64], y: &[C64]| -> Vec<C64> { x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect() };
        let f = match (&self.f, &other.f) {
            (None, None) => None,
            (Some(f), None) => Some(f.map(|z| a * z)),
            (None, Some(g)) => Some(g.map(|z| b * z)),
            (Some(f), Some(g)) => Some(f.zip_with(g, |p, q| a * p + b * q)?),
        };
        Ok(Self {
            h: self.h.scaled(a).add(&other.h.scaled(b))?,
            u0: lin(&self.u0, &other.u0),
            u1: lin(&self.u1, &other.u1),
            u2: lin(&self.u2, &other.u2),
            f,
        })
    }

    /// Discrete size surrogate: max of the sup-norms of all components.
    pub fn size(&self) -> f64 {
        let sup = |v: &[C64]| v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let mut s = sup(&self.u0).max(sup(&self.u1)).max(sup(&self.u2));
        s = s.max(self.h.h.max_abs()).max(self.h.h_t.max_abs()).max(self.h.h_tt.max_abs());
        if let Some(f) = &self.f {
            s = s.max(f.max_abs());
        }
        s
    }
}

/// A solved field with its first two time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: SpaceTimeField,
    pub u_t: SpaceTimeField,
    pub u_tt: SpaceTimeField,
}

impl Solution {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: SpaceTimeField::zeros(grid, Role::U),
            u_t: SpaceTimeField::zeros(grid, Role::Ut),
            u_tt: SpaceTimeField::zeros(grid, Role::Utt),
        }
    }

    /// `self + a·other` on all three components.
    pub fn add_scaled(&self, a: C64, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.u.axpy(a, &other.u)?;
        out.u_t.axpy(a, &other.u_t)?;
        out.u_tt.axpy(a, &other.u_tt)?;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.u_t.is_finite() && self.u_tt.is_finite()
    }
}
