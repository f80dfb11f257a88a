//! Amplitudes of the CGO ansatz `e^{iσ(φ+t)}(a₁ + σ⁻¹a₂)`.
//!
//! `a₁ = e^{−μ(r+t)/2}χ(r+t)Θ(θ)e^{−γt/2}r^{−1/2}` solves the homogeneous
//! transport equation; `a₂` solves it with source `ξ̃ = S₁[a₁]/2` and
//! initial value `χ(r)Θ(θ)`. Here
//!
//! ```text
//! S₁[A] = i[3A_tt + 2αA_t − 2⟨∇φ, c²∇A + b∇A_t⟩ − (c²A + bA_t)Δφ − bΔA]
//! ```
//!
//! is the coefficient of `σ¹` in `e^{−iσ(φ+t)}𝒫(e^{iσ(φ+t)}A)`.

use crate::cgo::geometry::ProbeGeometry;
use crate::cgo::profile::{jet_exp, jet_mul, jet_pow, rt_jet, AngularProfile, Cutoff, Jet, RtJet};
use crate::cgo::transport::A2Table;
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Role, SpaceTimeField};
use crate::grid::Grid;
use crate::prelude::*;
use alloc::format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSpec {
    pub mu: f64,
    pub profile: AngularProfile,
    pub cutoff: Option<Cutoff>,
}

/// Derivatives of a function of `(r, t)`:
/// `[K, K_t, K_tt, K_ttt, K_r, K_rr, K_rt, K_rrt]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDerivs(pub [C64; 8]);

impl RadialDerivs {
    pub fn from_array(a: [C64; 8]) -> Self {
        Self(a)
    }

    pub fn from_jet(j: &RtJet) -> Self {
        let c = |v: f64| C64::new(v, 0.0);
        Self([c(j[0][0]), c(j[1][0]), c(j[2][0]), c(j[3][0]), c(j[0][1]), c(j[0][2]), c(j[1][1]), c(j[1][2])])
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(o.0) {
            *x += y;
        }
        Self(a)
    }

    /// `S₁[Θ·K] = Θ·s + Θ''·s₂`; returns `(s, s₂)`.
    pub fn s1(&self, r: f64, coeff: &Coefficients) -> (C64, C64) {
        let [k, kt, ktt, _, kr, krr, krt, _] = self.0;
        let (alpha, beta) = (coeff.alpha(), coeff.beta());
        let i = C64::new(0.0, 1.0);
        let s = i * (ktt * 3.0 + kt * (2.0 * alpha) - krt * 2.0 - kr * (2.0 * beta) - (kt + k * beta) / r - krr - kr / r);
        (s, -i * k / (r * r))
    }

    /// `𝒫[Θ·K] = Θ·p + Θ''·p₂`; returns `(p, p₂)`.
    pub fn p(&self, r: f64, coeff: &Coefficients) -> (C64, C64) {
        let [k, kt, ktt, kttt, kr, krr, krt, krrt] = self.0;
        let (alpha, beta) = (coeff.alpha(), coeff.beta());
        let p = kttt + ktt * alpha - (krrt + krt / r) - (krr + kr / r) * beta;
        (p, -(kt + k * beta) / (r * r))
    }
}

impl AmplitudeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Argument(format!("mu = {} must be a finite non-negative number", self.mu)));
        }
        if let Some(c) = self.cutoff {
            if !(c.hi > c.lo) {
                return Err(Error::Argument(format!("cutoff knots {} < {} required", c.lo, c.hi)));
            }
        }
        if let AngularProfile::Bump { half_width, .. } = self.profile {
            if !(half_width > 0.0 && half_width < core::f64::consts::PI) {
                return Err(Error::Argument(format!("profile half-width {half_width} outside (0, π)")));
            }
        }
        Ok(())
    }

    /// Standard cutoff knots `(T* + δ̃, T* + 2δ̃)` of a geometry.
    pub fn cutoff_for(geom: &ProbeGeometry) -> Cutoff {
        Cutoff { lo: geom.t_star() + geom.pad(), hi: geom.t_star() + 2.0 * geom.pad() }
    }

    fn chi(&self, s: f64) -> Jet {
        match self.cutoff {
            Some(c) => c.jet(s),
            None => [1.0, 0.0, 0.0, 0.0],
        }
    }

    /// `E(s) = e^{−μs/2}χ(s)`.
    pub fn envelope(&self, s: f64) -> Jet {
        jet_mul(jet_exp(-0.5 * self.mu, s), self.chi(s))
    }

    /// Radial-time factor of `a₁` (without `Θ`).
    pub fn a1_jet(&self, r: f64, t: f64, gamma: f64) -> RtJet {
        rt_jet(self.envelope(r + t), r, t, gamma)
    }

    /// Homogeneous part of `a₂` (without `Θ`): `ψ(r+t)·e^{−∫_r^{r+t}ζ}`, `ψ = χ`,
    /// which equals `χ(r+t)(r+t)^{1/2}·e^{−γt/2}r^{−1/2}`.
    pub fn a2_hom_jet(&self, r: f64, t: f64, gamma: f64) -> RtJet {
        rt_jet(jet_mul(self.chi(r + t), jet_pow(0.5, r + t)), r, t, gamma)
    }

    /// `(X₁, X₂)` with `ξ̃ = Θ·X₁ + Θ''·X₂`.
    pub fn xi_parts(&self, r: f64, t: f64, coeff: &Coefficients) -> (C64, C64) {
        let d = RadialDerivs::from_jet(&self.a1_jet(r, t, coeff.gamma()));
        let (s, s2) = d.s1(r, coeff);
        (s * 0.5, s2 * 0.5)
    }
}

/// σ-independent amplitude data of one probe on a grid.
#[derive(Debug, Clone)]
pub struct AmplitudeFields {
    /// `a₁`, `∂_t a₁`, `∂_t² a₁`.
    pub a1: [SpaceTimeField; 3],
    /// `a₂`, `∂_t a₂`, `∂_t² a₂`.
    pub a2: [SpaceTimeField; 3],
    /// `𝒫a₁ + S₁[a₂]` (the `σ⁰` coefficient).
    pub order0: SpaceTimeField,
    /// `𝒫a₂` (the `σ⁻¹` coefficient).
    pub order_minus1: SpaceTimeField,
    /// Transport source `ξ̃`.
    pub xi: SpaceTimeField,
}

impl AmplitudeFields {
    pub fn compute(spec: &AmplitudeSpec, geom: &ProbeGeometry, coeff: &Coefficients, grid: &Grid, table: &A2Table) -> Result<Self> {
        spec.validate()?;
        let gamma = coeff.gamma();
        let mk = || SpaceTimeField::zeros(grid, Role::U);
        let mut a1 = [mk(), mk().with_role(Role::Ut), mk().with_role(Role::Utt)];
        let mut a2 = [mk(), mk().with_role(Role::Ut), mk().with_role(Role::Utt)];
        let mut order0 = mk().with_role(Role::Source);
        let mut order_minus1 = mk().with_role(Role::Source);
        let mut xi = mk().with_role(Role::Source);
        let nodes: Vec<(usize, f64, [f64; 3])> = (0..grid.n_nodes())
            .filter(|&k| grid.is_active(k))
            .map(|k| {
                let (r, th) = geom.polar(grid.coords(k));
                (k, r, spec.profile.eval(th))
            })
            .collect();
        for n in 0..grid.levels() {
            let t = grid.time(n);
            for &(k, r, [th, th2, th4]) in &nodes {
                if th == 0.0 && th2 == 0.0 && th4 == 0.0 {
                    continue;
                }
                let f = RadialDerivs::from_jet(&spec.a1_jet(r, t, gamma));
                let (j1, j2) = table.eval(r, n)?;
                let k1 = RadialDerivs::from_jet(&spec.a2_hom_jet(r, t, gamma)).add(&j1);
                for m in 0..3 {
                    a1[m].set(n, k, f.0[m] * th);
                    a2[m].set(n, k, k1.0[m] * th + j2.0[m] * th2);
                }
                let (p1, p1b) = f.p(r, coeff);
                let (s1, s1b) = k1.s1(r, coeff);
                let (s2, s2b) = j2.s1(r, coeff);
                let (q1, q1b) = k1.p(r, coeff);
                let (q2, q2b) = j2.p(r, coeff);
                order0.set(n, k, (p1 + s1) * th + (p1b + s1b + s2) * th2 + s2b * th4);
                order_minus1.set(n, k, q1 * th + (q1b + q2) * th2 + q2b * th4);
                let (x1, x2) = f.s1(r, coeff);
                xi.set(n, k, (x1 * th + x2 * th2) * 0.5);
            }
        }
        Ok(Self { a1, a2, order0, order_minus1, xi })
    }
}

/// Builds the shared transport table for a spec covering every `r` a probe on `grid` can see.
pub fn transport_table(spec: &AmplitudeSpec, coeff: &Coefficients, geoms: &[ProbeGeometry], grid: &Grid) -> Result<A2Table> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for g in geoms {
        let (a, b) = g.r_range(grid);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if geoms.is_empty() {
        return Err(Error::Argument("no probe geometries".into()));
    }
    A2Table::build(spec, coeff, lo, hi, grid.dt(), grid.levels())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_examples() {
        let spec = AmplitudeSpec { mu: 0.0, profile: AngularProfile::Constant, cutoff: None };
        for t in [0.0, 0.5, 2.0] {
            assert!((spec.a1_jet(4.0, t, 0.0)[0][0] - 0.5).abs() < 1e-15);
        }
        let spec = AmplitudeSpec { mu: 2.0, profile: AngularProfile::Constant, cutoff: None };
        let (r, t) = (0.7, 0.3);
        assert!((spec.a1_jet(r, t, 0.0)[0][0] * r.sqrt() - (-(r + t)).exp()).abs() < 1e-15);
        let spec = AmplitudeSpec { mu: 1.0, profile: AngularProfile::Constant, cutoff: Some(Cutoff { lo: 1.0, hi: 1.2 }) };
        assert_eq!(spec.a1_jet(0.4, 0.5, 1.0), [[0.0; 4]; 4]);
    }

    #[test]
    fn a1_radial_factor_solves_transport() {
        let spec = AmplitudeSpec { mu: 1.3, profile: AngularProfile::Constant, cutoff: Some(Cutoff { lo: 0.5, hi: 1.5 }) };
        let gamma = 0.9;
        for &(r, t) in &[(0.3, 0.9), (0.6, 0.6), (1.0, 1.0)] {
            let j = spec.a1_jet(r, t, gamma);
            let res = j[1][0] - j[0][1] + (0.5 * gamma - 0.5 / r) * j[0][0];
            assert!(res.abs() < 1e-13);
            let h = spec.a2_hom_jet(r, t, gamma);
            let res = h[1][0] - h[0][1] + (0.5 * gamma - 0.5 / r) * h[0][0];
            assert!(res.abs() < 1e-13);
        }
    }
}
