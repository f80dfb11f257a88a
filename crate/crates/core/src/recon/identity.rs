//! Adjoint probes, measurement records and the two sides of the integral
//! identity
//!
//! ```text
//! ∫∫ y(F + γβw_t) = −b∫∫_Σ y∂_νW + ∫(yW_t − y_tW + γyW)|_{t=T}
//! ```
//!
//! for `y_tt − bΔy − γy_t = 0`, `W = w_t + βw` with `W|_Σ = 0` and
//! `W(0) = W_t(0) = 0`.

use crate::cgo::{assemble_probe, AmplitudeFields, AngularProfile, ProbeGeometry};
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::field::{DataTuple, Role, Solution, SpaceTimeField};
use crate::grid::Grid;
use crate::linearize::direct_linearized;
use crate::mgt::{discrete_norm, dtn_trace, DampedWaveSolver, MgtSolver, NormKind};
use crate::nonlinear::{bilinear_source, bump_window, NonlinearityField};
use crate::prelude::*;
use crate::stencil::laplacian_at;
use alloc::format;

/// Which measurement map is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    /// Boundary flux plus the state at `t = T`.
    WithFinalState,
    /// Boundary flux only; probes are cut off so all initial data vanish.
    BoundaryOnly,
}

impl MeasurementMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementMode::WithFinalState => "lambda_T",
            MeasurementMode::BoundaryOnly => "B_T",
        }
    }
}

/// Weight in `s = r + t` carried by an adjoint amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SWeight {
    /// `e^{−μs}`.
    Exponential { mu: f64 },
    /// Smooth bump of half-width `half_width` about `center`.
    Window { center: f64, half_width: f64 },
}

impl SWeight {
    /// `[ψ(s), ψ'(s)]`.
    pub fn eval(&self, s: f64) -> [f64; 2] {
        match *self {
            SWeight::Exponential { mu } => {
                let e = (-mu * s).exp();
                [e, -mu * e]
            }
            SWeight::Window { center, half_width } => {
                let [v, d, _] = bump_window(s, center - half_width, center + half_width);
                [v, d]
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s)[0]
    }

    /// Interval outside which the weight vanishes.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SWeight::Exponential { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            SWeight::Window { center, half_width } => (center - half_width, center + half_width),
        }
    }
}

/// Angular and `s` factors of `a₀ = e^{γt/2}r^{−1/2}η(θ)ψ(r+t)`.
///
/// The adjoint amplitude is `A = a₀ + σ⁻¹a₀'` with
/// `a₀' = e^{γt/2}r^{−1/2}·(i/2)ψ(r+t)[ηγ²t/4 + (η/4 + η'')/r]`, which
/// cancels the `σ⁰` term of `e^{iσ(φ+t)}L₀(e^{−iσ(φ+t)}A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointSpec {
    pub profile: AngularProfile,
    pub weight: SWeight,
}

impl AdjointSpec {
    pub const PLAIN: AdjointSpec = AdjointSpec { profile: AngularProfile::Constant, weight: SWeight::Exponential { mu: 0.0 } };

    /// `[A, ∂_t A]` at polar point `(r, θ)` and time `t`; `inv_sigma = 0` gives `a₀` alone.
    pub fn amplitude(&self, r: f64, theta: f64, t: f64, gamma: f64, inv_sigma: f64) -> [C64; 2] {
        let [eta, eta2, _] = self.profile.eval(theta);
        let [psi, dpsi] = self.weight.eval(r + t);
        let base = (0.5 * gamma * t).exp() / r.sqrt();
        let lead = eta * psi;
        let lead_t = eta * dpsi;
        let q = eta * gamma * gamma * t / 4.0 + (0.25 * eta + eta2) / r;
        let corr = C64::new(0.0, 0.5 * psi * q * inv_sigma);
        let corr_t = C64::new(0.0, 0.5 * (dpsi * q + psi * eta * gamma * gamma / 4.0) * inv_sigma);
        let a = corr + lead;
        [a * base, (a * (0.5 * gamma) + corr_t + lead_t) * base]
    }
}

/// `y = e^{−iσ(φ+t)}A + r₀` on the grid.
#[derive(Debug, Clone)]
pub struct AdjointProbe {
    pub sigma: f64,
    pub spec: AdjointSpec,
    pub y: Solution,
    /// `(‖r₀‖, ‖∂_t r₀‖)` in `L²(Q)` when the remainder was solved.
    pub r0_norms: Option<[f64; 2]>,
}

impl AdjointProbe {
    /// The geometric-optics part only (`r₀ = 0`); `corrected` adds the `σ⁻¹` amplitude.
    pub fn bare(sigma: f64, spec: AdjointSpec, corrected: bool, geom: &ProbeGeometry, coeff: &Coefficients, grid: &Grid) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Argument(format!("sigma = {sigma} must be positive")));
        }
        let gamma = coeff.gamma();
        let inv = if corrected { 1.0 / sigma } else { 0.0 };
        let i = C64::new(0.0, 1.0);
        let h = 1e-5;
        let mut y = Solution::zeros(grid);
        for n in 0..grid.levels() {
            let t = grid.time(n);
            for k in 0..grid.n_nodes() {
                if !grid.is_active(k) {
                    continue;
                }
                let (r, theta) = geom.polar(grid.coords(k));
                let e = (-i * sigma * (r + t)).exp();
                let [a, at] = spec.amplitude(r, theta, t, gamma, inv);
                let att = (spec.amplitude(r, theta, t + h, gamma, inv)[1] - spec.amplitude(r, theta, t - h, gamma, inv)[1]) / (2.0 * h);
                y.u.set(n, k, e * a);
                y.u_t.set(n, k, e * (at - i * sigma * a));
                y.u_tt.set(n, k, e * (att - i * sigma * 2.0 * at - a * sigma * sigma));
            }
        }
        Ok(Self { sigma, spec, y, r0_norms: None })
    }

    /// Adds `r₀` with zero data cancelling the discrete residual `y_tt − bΔ_h y − γy_t`.
    pub fn with_remainder(mut self, coeff: &Coefficients, grid: &Grid) -> Result<Self> {
        let wave = DampedWaveSolver::new(coeff.b(), -coeff.gamma(), grid)?;
        let src = self.residual(coeff, grid)?.map(|v| -v);
        let r0 = wave.solve(&DataTuple::source_only(grid, src))?;
        self.r0_norms = Some([discrete_norm(&r0.u, grid, NormKind::L2Q)?, discrete_norm(&r0.u_t, grid, NormKind::L2Q)?]);
        self.y = self.y.add_scaled(C64::new(1.0, 0.0), &r0)?;
        Ok(self)
    }

    /// `y_tt − bΔ_h y − γy_t` at interior nodes (zero elsewhere).
    pub fn residual(&self, coeff: &Coefficients, grid: &Grid) -> Result<SpaceTimeField> {
        self.y.u.check_shape(grid)?;
        let (b, gamma) = (coeff.b(), coeff.gamma());
        let mut out = SpaceTimeField::zeros(grid, Role::Source);
        for n in 0..grid.levels() {
            let u = self.y.u.level(n);
            for &k in grid.interior() {
                out.set(n, k, self.y.u_tt.get(n, k) - laplacian_at(grid, u, k) * b - self.y.u_t.get(n, k) * gamma);
            }
        }
        Ok(out)
    }

    /// Largest interior residual relative to `σ²·max|y|`.
    pub fn l0_residual(&self, coeff: &Coefficients, grid: &Grid) -> Result<f64> {
        let res = self.residual(coeff, grid)?;
        Ok(res.max_abs() / (self.sigma * self.sigma * self.y.u.max_abs().max(f64::MIN_POSITIVE)))
    }
}

/// Boundary flux and final state of one linearized response.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub mode: MeasurementMode,
    pub sigma: f64,
    pub source: usize,
    /// `∂_ν w` on Σ.
    pub dtn: SpaceTimeField,
    /// `∂_ν w_t` on Σ.
    pub dtn_t: SpaceTimeField,
    /// `(w, w_t, w_tt)` at `t = T`; absent in boundary-only mode.
    pub final_triple: Option<[Vec<C64>; 3]>,
}

impl MeasurementRecord {
    pub fn from_solution(w: &Solution, mode: MeasurementMode, sigma: f64, source: usize, grid: &Grid) -> Result<Self> {
        let dtn = dtn_trace(&w.u, grid)?;
        let dtn_t = dtn_trace(&w.u_t, grid)?;
        let final_triple = match mode {
            MeasurementMode::WithFinalState => {
                let n = grid.nt();
                Some([w.u.level(n).to_vec(), w.u_t.level(n).to_vec(), w.u_tt.level(n).to_vec()])
            }
            MeasurementMode::BoundaryOnly => None,
        };
        Ok(Self { mode, sigma, source, dtn, dtn_t, final_triple })
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        self.dtn.check_shape(grid)?;
        self.dtn_t.check_shape(grid)?;
        match (&self.final_triple, self.mode) {
            (Some(f), _) => {
                if f.iter().any(|v| v.len() != grid.n_nodes()) {
                    return Err(Error::Shape(format!("final state must have {} nodes", grid.n_nodes())));
                }
            }
            (None, MeasurementMode::WithFinalState) => return Err(Error::MissingData("final state of a lambda_T record".into())),
            (None, MeasurementMode::BoundaryOnly) => {}
        }
        Ok(())
    }

    /// `∂_ν W = ∂_ν w_t + β∂_ν w`.
    pub fn flux_w(&self, beta: f64) -> SpaceTimeField {
        let mut out = self.dtn_t.clone();
        out.axpy(C64::new(beta, 0.0), &self.dtn).expect("same shape");
        out
    }

    /// `(W, W_t)` at `t = T`.
    pub fn final_w(&self, beta: f64) -> Option<(Vec<C64>, Vec<C64>)> {
        let [w, wt, wtt] = self.final_triple.as_ref()?;
        let big = w.iter().zip(wt).map(|(a, b)| *b + *a * beta).collect();
        let big_t = wt.iter().zip(wtt).map(|(a, b)| *b + *a * beta).collect();
        Some((big, big_t))
    }
}

/// `−2σ²`: the factor multiplying the leading term of `y·F`.
pub fn pairing_scale(sigma: f64) -> f64 {
    -2.0 * sigma * sigma
}

/// Probes `w₁ = e^{2iσ(φ+t)}(…)` and `w₂ = e^{−iσ(φ+t)}(…)` solved exactly
/// from their induced data, and the linearized response `w`.
pub fn simulate_measurement(
    sigma: f64,
    source: usize,
    amps: &AmplitudeFields,
    geom: &ProbeGeometry,
    p: &NonlinearityField,
    solver: &MgtSolver,
    mode: MeasurementMode,
) -> Result<MeasurementRecord> {
    let (coeff, grid) = (solver.coefficients(), solver.grid());
    let w1 = solver.solve(&assemble_probe(sigma, 1.0, 2.0, amps, geom, coeff, grid)?.induced_data)?;
    let w2 = solver.solve(&assemble_probe(sigma, -1.0, 1.0, amps, geom, coeff, grid)?.induced_data)?;
    let w = direct_linearized(&w1, &w2, p, solver)?;
    MeasurementRecord::from_solution(&w, mode, sigma, source, grid)
}

/// Trapezoid-in-time quadrature of `∫∫ y·f dx dt`.
pub fn spacetime_pairing(y: &SpaceTimeField, f: &SpaceTimeField, grid: &Grid) -> Result<C64> {
    y.check_shape(grid)?;
    f.check_shape(grid)?;
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..grid.levels() {
        let (a, b) = (y.level(n), f.level(n));
        let mut s = C64::new(0.0, 0.0);
        for k in 0..grid.n_nodes() {
            let w = grid.area_weight(k);
            if w > 0.0 {
                s += a[k] * b[k] * w;
            }
        }
        acc += s * grid.time_weight(n);
    }
    Ok(acc)
}

/// `∫∫ y·F(p, w₁, w₂)`, plus `γβ∫∫ y·w_t` when `w` is given.
pub fn identity_lhs(
    y: &Solution,
    p: &NonlinearityField,
    w1: &Solution,
    w2: &Solution,
    w: Option<&Solution>,
    coeff: &Coefficients,
    grid: &Grid,
) -> Result<C64> {
    let f = bilinear_source(p, w1, w2)?;
    let mut v = spacetime_pairing(&y.u, &f, grid)?;
    if let Some(w) = w {
        v += spacetime_pairing(&y.u, &w.u_t, grid)? * (coeff.gamma() * coeff.beta());
    }
    Ok(v)
}

/// `−b∫∫_Σ y∂_νW`, plus `∫(yW_t − y_tW + γyW)|_T` for records with a final state.
pub fn identity_rhs(y: &Solution, record: &MeasurementRecord, coeff: &Coefficients, grid: &Grid) -> Result<C64> {
    y.u.check_shape(grid)?;
    y.u_t.check_shape(grid)?;
    record.check_shape(grid)?;
    let flux = record.flux_w(coeff.beta());
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..grid.levels() {
        let mut s = C64::new(0.0, 0.0);
        for (slot, bn) in grid.boundary().iter().enumerate() {
            s += y.u.get(n, bn.node) * flux.get(n, slot) * bn.weight;
        }
        acc += s * grid.time_weight(n);
    }
    acc *= -coeff.b();
    if let Some((big, big_t)) = record.final_w(coeff.beta()) {
        let n = grid.nt();
        let gamma = coeff.gamma();
        for k in 0..grid.n_nodes() {
            let w = grid.area_weight(k);
            if w > 0.0 {
                let (a, at) = (y.u.get(n, k), y.u_t.get(n, k));
                acc += (a * big_t[k] - at * big[k] + a * big[k] * gamma) * w;
            }
        }
    }
    Ok(acc)
}

/// `identity_rhs / (−2σ²)` for every adjoint spec, with corrected bare adjoints
/// evaluated only where the measurement lives.
pub fn record_pairings(record: &MeasurementRecord, specs: &[AdjointSpec], geom: &ProbeGeometry, coeff: &Coefficients, grid: &Grid) -> Result<Vec<C64>> {
    record.check_shape(grid)?;
    let sigma = record.sigma;
    let (b, beta, gamma) = (coeff.b(), coeff.beta(), coeff.gamma());
    let i = C64::new(0.0, 1.0);
    let flux = record.flux_w(beta);
    let mut out = vec![C64::new(0.0, 0.0); specs.len()];
    for n in 0..grid.levels() {
        let t = grid.time(n);
        let tw = grid.time_weight(n);
        for (slot, bn) in grid.boundary().iter().enumerate() {
            let d = flux.get(n, slot);
            if d == C64::new(0.0, 0.0) {
                continue;
            }
            let (r, theta) = geom.polar(grid.coords(bn.node));
            let e = (-i * sigma * (r + t)).exp() * d * (-b * tw * bn.weight);
            for (o, spec) in out.iter_mut().zip(specs) {
                let a = spec.amplitude(r, theta, t, gamma, 1.0 / sigma)[0];
                *o += e * a;
            }
        }
    }
    if let Some((big, big_t)) = record.final_w(beta) {
        let t = grid.t_final();
        for k in 0..grid.n_nodes() {
            let w = grid.area_weight(k);
            if w == 0.0 {
                continue;
            }
            let (r, theta) = geom.polar(grid.coords(k));
            let e = (-i * sigma * (r + t)).exp();
            for (o, spec) in out.iter_mut().zip(specs) {
                let [a, at] = spec.amplitude(r, theta, t, gamma, 1.0 / sigma);
                let y = e * a;
                let yt = e * (at - i * sigma * a);
                *o += (y * big_t[k] - yt * big[k] + y * big[k] * gamma) * w;
            }
        }
    }
    let scale = pairing_scale(sigma);
    Ok(out.into_iter().map(|v| v / scale).collect())
}
