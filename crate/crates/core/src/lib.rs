//! Numerical core for the forward and inverse problems of the
//! Jordan–Moore–Gibson–Thompson (JMGT) equation of nonlinear acoustics
//!
//! ```text
//! u_ttt + α u_tt − c² Δu − b Δu_t = (p(x,t) u²)_tt   in Ω × (0,T)
//! ```
//!
//! The crate is `no_std` (with `alloc`): all file formats, configuration and
//! scheduling live in the companion `jmgt-lab` crate. Module map:
//!
//!  - [`mgt`]: linear MGT solver (Crank–Nicolson on `(u, u_t, u_tt)`), the
//!    W-reduction cross-check scheme, energy, norms, DtN traces, compatibility.
//!  - [`nonlinear`]: Westervelt source and the Picard construction.
//!  - [`cgo`]: complex geometric optics probes and their remainders.
//!  - [`linearize`]: second-order linearization (ε cross differences and the
//!    direct linearized solve) and the `W = w_t + βw` reduction.
//!  - [`recon`]: integral identity, adjoint probes, ray data extraction,
//!    weighted light-ray transform and its regularized inversion.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cgo;
pub mod coeff;
pub mod error;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod linearize;
pub mod mgt;
pub mod nonlinear;
pub mod recon;
pub mod stencil;

pub(crate) mod prelude {
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use num_complex::Complex64 as C64;
    pub use num_traits::Float;
}

pub use coeff::Coefficients;
pub use error::{Error, Result};
pub use field::{BoundaryField, DataTuple, Role, Solution, SpaceTimeField};
pub use grid::{Domain, Grid, NodeKind};
pub use num_complex::Complex64 as C64;
