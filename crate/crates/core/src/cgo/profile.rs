//! One-dimensional building blocks of the amplitudes: derivative jets, the
//! time cutoff `χ` and angular profiles.

use crate::nonlinear::bump_window;
#[allow(unused_imports)]
use crate::prelude::*;
use core::f64::consts::PI;

/// Value and first three derivatives of a function of one variable.
pub type Jet = [f64; 4];

pub fn jet_mul(a: Jet, b: Jet) -> Jet {
    [
        a[0] * b[0],
        a[1] * b[0] + a[0] * b[1],
        a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
        a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
    ]
}

/// `e^{λs}`.
pub fn jet_exp(lambda: f64, s: f64) -> Jet {
    let e = (lambda * s).exp();
    [e, lambda * e, lambda * lambda * e, lambda * lambda * lambda * e]
}

/// `s^p`.
pub fn jet_pow(p: f64, s: f64) -> Jet {
    let v = s.powf(p);
    [v, p * v / s, p * (p - 1.0) * v / (s * s), p * (p - 1.0) * (p - 2.0) * v / (s * s * s)]
}

/// `J[i][j] = ∂_t^i ∂_r^j F` for `i + j ≤ 3`.
pub type RtJet = [[f64; 4]; 4];

/// Jet of `F(r, t) = E(r + t)·e^{−γt/2}·r^{−1/2}` given the jet of `E` at `s = r + t`.
pub fn rt_jet(e: Jet, r: f64, t: f64, gamma: f64) -> RtJet {
    let g = jet_exp(-0.5 * gamma, t);
    let h = jet_pow(-0.5, r);
    const C: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 - i {
            let mut s = 0.0;
            for a in 0..=i {
                for bb in 0..=j {
                    s += C[i][a] * C[j][bb] * e[a + bb] * g[i - a] * h[j - bb];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

/// Quintic smoothstep cutoff: 0 below `lo`, 1 above `hi`, `C²` in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub lo: f64,
    pub hi: f64,
}

impl Cutoff {
    pub fn jet(&self, s: f64) -> Jet {
        if s <= self.lo {
            return [0.0; 4];
        }
        if s >= self.hi {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let w = self.hi - self.lo;
        let x = (s - self.lo) / w;
        let x2 = x * x;
        let x3 = x2 * x;
        [
            x3 * (10.0 - 15.0 * x + 6.0 * x2),
            30.0 * x2 * (1.0 - x) * (1.0 - x) / w,
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (w * w),
            60.0 * (1.0 - 6.0 * x + 6.0 * x2) / (w * w * w),
        ]
    }

    pub fn value(&self, s: f64) -> f64 {
        self.jet(s)[0]
    }
}

/// Angular weight `Θ(θ)` at the source point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularProfile {
    Constant,
    /// Periodic `C^∞` bump `exp(1 − 1/(1 − (δθ/w)²))` of half-width `w` about `center`.
    Bump { center: f64, half_width: f64 },
}

fn wrap(a: f64) -> f64 {
    let mut x = (a + PI) % (2.0 * PI);
    if x < 0.0 {
        x += 2.0 * PI;
    }
    x - PI
}

impl AngularProfile {
    /// `[Θ, Θ'', Θ'''']`.
    pub fn eval(&self, theta: f64) -> [f64; 3] {
        match *self {
            AngularProfile::Constant => [1.0, 0.0, 0.0],
            AngularProfile::Bump { center, half_width } => {
                let d = wrap(theta - center);
                let at = |x: f64| bump_window(x, -half_width, half_width);
                let [v, _, d2] = at(d);
                let h = 1e-3 * half_width;
                let d4 = (at(d + h)[2] - 2.0 * d2 + at(d - h)[2]) / (h * h);
                [v, d2, d4]
            }
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval(theta)[0]
    }

    /// `∫ Θ dθ` over a full turn (Simpson on 4096 panels).
    pub fn integral(&self) -> f64 {
        match *self {
            AngularProfile::Constant => 2.0 * PI,
            AngularProfile::Bump { center, half_width } => {
                let n = 4096;
                let h = 2.0 * half_width / n as f64;
                let w = crate::linalg::simpson_weights(n + 1, h);
                (0..=n).map(|i| w[i] * self.value(center - half_width + i as f64 * h)).sum()
            }
        }
    }
}
