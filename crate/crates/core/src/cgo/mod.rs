//! Complex geometric optics probes for `𝒫u = 0`.

pub mod amplitude;
pub mod audit;
pub mod geometry;
pub mod probe;
pub mod profile;
pub mod transport;

pub use amplitude::{transport_table, AmplitudeFields, AmplitudeSpec};
pub use audit::{sigma_expansion_audit, transport_residuals, SigmaAudit, TransportResiduals};
pub use geometry::{eikonal_phase, ProbeGeometry};
pub use probe::{assemble_probe, check_resolution, remainder_solve, CgoProbe, RemainderReport};
pub use profile::{AngularProfile, Cutoff};
pub use transport::{transport_solve, A2Table, Attenuation, ConstantZeta, MgtZeta};
