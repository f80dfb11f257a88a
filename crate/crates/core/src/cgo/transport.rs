//! Transport equations `a_t − a_r + ζ(r)a = ξ(r, t)` along the
//! characteristics `r + t = const`:
//!
//! ```text
//! a(r, t) = a(r + t, 0)·e^{−∫_r^{r+t} ζ} + ∫_0^t ξ(r + t − s, s)·e^{−∫_r^{r+t−s} ζ} ds
//! ```

use crate::cgo::amplitude::{AmplitudeSpec, RadialDerivs};
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::linalg::simpson_weights;
use crate::prelude::*;
use crate::stencil::time_stencil;
use alloc::format;

/// Attenuation coefficient `ζ(r)` with its antiderivative.
pub trait Attenuation {
    fn zeta(&self, r: f64) -> f64;
    /// `∫_{ra}^{rb} ζ(ρ) dρ`.
    fn integral(&self, ra: f64, rb: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantZeta(pub f64);

impl Attenuation for ConstantZeta {
    fn zeta(&self, _: f64) -> f64 {
        self.0
    }
    fn integral(&self, ra: f64, rb: f64) -> f64 {
        self.0 * (rb - ra)
    }
}

/// `ζ(r) = γ/2 − d_r/(4d) = γ/2 − 1/(2r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgtZeta {
    pub gamma: f64,
}

impl Attenuation for MgtZeta {
    fn zeta(&self, r: f64) -> f64 {
        0.5 * self.gamma - 0.5 / r
    }
    fn integral(&self, ra: f64, rb: f64) -> f64 {
        0.5 * self.gamma * (rb - ra) - 0.5 * (rb / ra).ln()
    }
}

/// Characteristic quadrature at one point (composite Simpson, `panels` even).
pub fn transport_solve(
    att: &impl Attenuation,
    initial: impl Fn(f64) -> C64,
    source: impl Fn(f64, f64) -> C64,
    r: f64,
    t: f64,
    panels: usize,
) -> C64 {
    let mut a = initial(r + t) * (-att.integral(r, r + t)).exp();
    if t > 0.0 {
        let n = panels.max(2) + panels % 2;
        let h = t / n as f64;
        let w = simpson_weights(n + 1, h);
        for (i, wi) in w.iter().enumerate() {
            let s = i as f64 * h;
            let rr = r + t - s;
            a += source(rr, s) * (wi * (-att.integral(r, rr)).exp());
        }
    }
    a
}

/// Tabulated inhomogeneous parts of `a₂ = Θ·(ψ-term + J₁) + Θ''·J₂`, where
/// `J_m` solves the transport equation with zero initial data and source
/// `X_m` (`ξ̃ = Θ·X₁ + Θ''·X₂`). Independent of the source point and of `Θ`.
///
/// Rows are time levels; the `r` spacing equals `dt` so each step follows a
/// characteristic exactly (Simpson on the last sub-interval).
#[derive(Debug, Clone)]
pub struct A2Table {
    r0: f64,
    dr: f64,
    nr: usize,
    levels: usize,
    valid_nr: usize,
    // derivative tables, [level][r-index][k] with k in RadialDerivs order
    d1: Vec<[C64; 8]>,
    d2: Vec<[C64; 8]>,
}

impl A2Table {
    /// Covers `r ∈ [r_lo, r_hi]` at times `n·dt`, `n < levels`.
    pub fn build(spec: &AmplitudeSpec, coeff: &Coefficients, r_lo: f64, r_hi: f64, dt: f64, levels: usize) -> Result<Self> {
        if !(r_lo > 0.0) || !(r_hi >= r_lo) || !(dt > 0.0) || levels == 0 {
            return Err(Error::Range(format!("bad table extent r ∈ [{r_lo}, {r_hi}], dt = {dt}")));
        }
        // sub-steps keep the table start away from r = 0
        let sub = ((8.0 * dt / r_lo).ceil() as usize).max(1);
        let dr = dt / sub as f64;
        let r0 = r_lo - 4.0 * dr;
        let fine = (levels - 1) * sub + 1;
        let valid_nr = ((r_hi - r0) / dr).ceil() as usize + 8;
        let nr = valid_nr + fine + 4;
        let att = MgtZeta { gamma: coeff.gamma() };
        let zero = C64::new(0.0, 0.0);
        let mut j1 = vec![zero; nr * fine];
        let mut j2 = vec![zero; nr * fine];
        for n in 0..fine - 1 {
            let t1 = (n + 1) as f64 * dr;
            for i in 0..nr - n - 1 {
                let r = r0 + i as f64 * dr;
                let decay = (-att.integral(r, r + dr)).exp();
                let mut v1 = j1[n * nr + i + 1] * decay;
                let mut v2 = j2[n * nr + i + 1] * decay;
                for (s, w) in [(t1 - dr, dr / 6.0), (t1 - 0.5 * dr, 4.0 * dr / 6.0), (t1, dr / 6.0)] {
                    let rr = r + t1 - s;
                    let (x1, x2) = spec.xi_parts(rr, s, coeff);
                    let e = w * (-att.integral(r, rr)).exp();
                    v1 += x1 * e;
                    v2 += x2 * e;
                }
                if !(v1.re.is_finite() && v1.im.is_finite() && v2.re.is_finite() && v2.im.is_finite()) {
                    return Err(Error::Range(format!("transport quadrature overflow at r = {r}, t = {t1}")));
                }
                j1[(n + 1) * nr + i] = v1;
                j2[(n + 1) * nr + i] = v2;
            }
        }
        let d1 = derivative_table(&j1, nr, valid_nr, fine, sub, dr);
        let d2 = derivative_table(&j2, nr, valid_nr, fine, sub, dr);
        Ok(Self { r0, dr, nr: valid_nr, levels, valid_nr, d1, d2 })
    }

    pub fn r_span(&self) -> (f64, f64) {
        (self.r0 + 2.0 * self.dr, self.r0 + (self.valid_nr as f64 - 3.0) * self.dr)
    }

    /// Interpolated derivative sets of `J₁`, `J₂` at `(r, level)` (cubic in `r`).
    pub fn eval(&self, r: f64, level: usize) -> Result<(RadialDerivs, RadialDerivs)> {
        let x = (r - self.r0) / self.dr;
        let i = x.floor() as isize;
        if i < 1 || i as usize + 2 >= self.nr || level >= self.levels {
            return Err(Error::Range(format!("r = {r} at level {level} outside the transport table")));
        }
        let i = i as usize;
        let f = x - i as f64;
        // four-point Lagrange weights on i-1, i, i+1, i+2
        let w = [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ];
        let mut a = [C64::new(0.0, 0.0); 8];
        let mut b = [C64::new(0.0, 0.0); 8];
        for (m, wm) in w.iter().enumerate() {
            let row = level * self.nr + i - 1 + m;
            for k in 0..8 {
                a[k] += self.d1[row][k] * *wm;
                b[k] += self.d2[row][k] * *wm;
            }
        }
        Ok((RadialDerivs::from_array(a), RadialDerivs::from_array(b)))
    }
}

/// Finite-difference derivative sets at every `sub`-th table row (central where possible).
fn derivative_table(j: &[C64], nr_full: usize, nr: usize, fine: usize, sub: usize, dr: f64) -> Vec<[C64; 8]> {
    let zero = C64::new(0.0, 0.0);
    let at = |n: usize, i: usize| j[n * nr_full + i];
    let levels = (fine - 1) / sub + 1;
    // time derivatives of orders 1..3 at each (level, i)
    let mut tder = vec![[zero; 4]; levels * nr];
    for l in 0..levels {
        let n = l * sub;
        let st: Vec<(usize, Vec<f64>)> = (1..=3).map(|m| time_stencil(n, fine, m, dr)).collect();
        for i in 0..nr {
            let mut d = [at(n, i), zero, zero, zero];
            for (m, (start, w)) in st.iter().enumerate() {
                for (q, wq) in w.iter().enumerate() {
                    d[m + 1] += at(start + q, i) * *wq;
                }
            }
            tder[l * nr + i] = d;
        }
    }
    let r1 = |v: &dyn Fn(usize) -> C64, i: usize| -> C64 {
        if i == 0 {
            (v(1) * 4.0 - v(0) * 3.0 - v(2)) / (2.0 * dr)
        } else if i + 1 == nr {
            (v(i) * 3.0 - v(i - 1) * 4.0 + v(i - 2)) / (2.0 * dr)
        } else {
            (v(i + 1) - v(i - 1)) / (2.0 * dr)
        }
    };
    let r2 = |v: &dyn Fn(usize) -> C64, i: usize| -> C64 {
        let c = i.clamp(1, nr - 2);
        (v(c + 1) - v(c) * 2.0 + v(c - 1)) / (dr * dr)
    };
    let mut out = vec![[zero; 8]; levels * nr];
    for n in 0..levels {
        let row = &tder[n * nr..(n + 1) * nr];
        let val = |i: usize| row[i][0];
        let dtv = |i: usize| row[i][1];
        for i in 0..nr {
            out[n * nr + i] = [row[i][0], row[i][1], row[i][2], row[i][3], r1(&val, i), r2(&val, i), r1(&dtv, i), r2(&dtv, i)];
        }
    }
    out
}
