use crate::error::{Error, Result};

/// Physical coefficients of the (normalized, τ = 1) MGT operator
/// `∂_t³ + α∂_t² − bΔ∂_t − c²Δ`.
///
/// `β = c²/b` and `γ = α − β` are always recomputed from `(α, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    alpha: f64,
    b: f64,
    c: f64,
    big_m: f64,
}

impl Coefficients {
    /// Checks `1/M ≤ α, b, c ≤ M` with `M > 1`.
    pub fn new(alpha: f64, b: f64, c: f64, big_m: f64) -> Result<Self> {
        if !(big_m > 1.0) || !big_m.is_finite() {
            return Err(Error::Argument(alloc::format!("bound M = {big_m} must exceed 1")));
        }
        for (name, value) in [("alpha", alpha), ("b", b), ("c", c)] {
            if !(value >= 1.0 / big_m && value <= big_m) {
                return Err(Error::Admissibility { name, value, bound: big_m });
            }
        }
        Ok(Self { alpha, b, c, big_m })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    pub fn beta(&self) -> f64 {
        self.c * self.c / self.b
    }

    pub fn gamma(&self) -> f64 {
        self.alpha - self.beta()
    }

    /// Thermal relaxation time, normalized.
    pub fn tau(&self) -> f64 {
        1.0
    }
}
