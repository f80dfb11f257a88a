//! Source points, the padded disc `Ω₁` and polar normal coordinates.
//!
//! For constant `b` the metric is `g = b⁻¹(dx² + dy²)`, so geodesic
//! distances are Euclidean distances divided by `√b` and the polar normal
//! coordinates about `q` are `r = |x − q|/√b` with the Euclidean angle `θ`.
//! In these coordinates `d(r, θ) = det g₀ = r²`.

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::prelude::*;
use alloc::format;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGeometry {
    q: [f64; 2],
    pad: f64,
    center: [f64; 2],
    omega_radius: f64,
    omega1_radius: f64,
    sqrt_b: f64,
}

impl ProbeGeometry {
    /// Source on `∂Ω₁` at polar angle `angle` about the circumcentre of `Ω`.
    ///
    /// `Ω₁` is the disc concentric with the circumcircle of `Ω` whose
    /// `g`-diameter is `diam_g Ω + pad`.
    pub fn new(domain: &Domain, b: f64, pad: f64, angle: f64) -> Result<Self> {
        if !(pad > 0.0) || !(b > 0.0) {
            return Err(Error::Argument(format!("need pad > 0 and b > 0, got pad = {pad}, b = {b}")));
        }
        let (center, rc) = domain.circumcircle();
        let sqrt_b = b.sqrt();
        let r1 = rc + 0.5 * pad * sqrt_b;
        let q = [center[0] + r1 * angle.cos(), center[1] + r1 * angle.sin()];
        let g = Self { q, pad, center, omega_radius: rc, omega1_radius: r1, sqrt_b };
        if domain.contains(q) {
            return Err(Error::Geometry(format!("source point {q:?} lies in the closed domain")));
        }
        Ok(g)
    }

    /// `count` sources uniformly spaced on `∂Ω₁`.
    pub fn ring(domain: &Domain, b: f64, pad: f64, count: usize, offset: f64) -> Result<Vec<Self>> {
        (0..count).map(|i| Self::new(domain, b, pad, offset + 2.0 * PI * i as f64 / count as f64)).collect()
    }

    pub fn q(&self) -> [f64; 2] {
        self.q
    }
    pub fn pad(&self) -> f64 {
        self.pad
    }
    pub fn sqrt_b(&self) -> f64 {
        self.sqrt_b
    }
    pub fn center(&self) -> [f64; 2] {
        self.center
    }
    /// Euclidean radius of `Ω₁`.
    pub fn omega1_radius(&self) -> f64 {
        self.omega1_radius
    }
    /// `diam_g Ω`.
    pub fn diam_omega(&self) -> f64 {
        2.0 * self.omega_radius / self.sqrt_b
    }
    /// `diam_g Ω₁ = diam_g Ω + pad`.
    pub fn diam_omega1(&self) -> f64 {
        2.0 * self.omega1_radius / self.sqrt_b
    }
    /// `T* = diam_g Ω + pad`.
    pub fn t_star(&self) -> f64 {
        self.diam_omega() + self.pad
    }
    /// Lower bound on `r` over `Ω` (`g`-distance from `∂Ω₁` to the circumcircle).
    pub fn r_floor(&self) -> f64 {
        0.5 * self.pad
    }

    /// Polar normal coordinates `(r, θ)` of `x` about `q`.
    pub fn polar(&self, x: [f64; 2]) -> (f64, f64) {
        let dx = x[0] - self.q[0];
        let dy = x[1] - self.q[1];
        (dx.hypot(dy) / self.sqrt_b, dy.atan2(dx))
    }

    /// Inward direction from `q` to the circumcentre.
    pub fn inward_angle(&self) -> f64 {
        (self.center[1] - self.q[1]).atan2(self.center[0] - self.q[0])
    }

    /// Half-angle of the cone of directions at `q` that meet the circumcircle of `Ω`.
    pub fn aperture(&self) -> f64 {
        (self.omega_radius / self.omega1_radius).asin()
    }

    /// `n` directions sampled uniformly over the aperture cone.
    pub fn theta_samples(&self, n: usize) -> Vec<f64> {
        let (c, a) = (self.inward_angle(), self.aperture());
        (0..n).map(|i| c - a + 2.0 * a * (i as f64 + 0.5) / n as f64).collect()
    }

    /// Exit time `τ₊(q, θ)`: `g`-length of the chord of `Ω₁` from `q` in direction `θ`.
    pub fn exit_time(&self, theta: f64) -> f64 {
        let d = [theta.cos(), theta.sin()];
        let rel = [self.q[0] - self.center[0], self.q[1] - self.center[1]];
        (-2.0 * (rel[0] * d[0] + rel[1] * d[1])).max(0.0) / self.sqrt_b
    }

    /// Range of `r` over the active nodes of `grid`.
    pub fn r_range(&self, grid: &Grid) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..grid.n_nodes() {
            if grid.is_active(k) {
                let (r, _) = self.polar(grid.coords(k));
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }
}

/// Eikonal phase `φ(x) = |x − q|/√b` on every node.
pub fn eikonal_phase(geom: &ProbeGeometry, grid: &Grid) -> Vec<f64> {
    (0..grid.n_nodes()).map(|k| geom.polar(grid.coords(k)).0).collect()
}
