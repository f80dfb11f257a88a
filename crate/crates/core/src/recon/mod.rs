//! Integral identity, ray data and reconstruction of `p`.

mod extract;
mod identity;
mod kernel;
mod pipeline;
mod ray;

pub use extract::{extract_ray_data, Extraction, RaySample};
pub use identity::{
    identity_lhs, identity_rhs, pairing_scale, record_pairings, simulate_measurement, spacetime_pairing, AdjointProbe, AdjointSpec,
    MeasurementMode, MeasurementRecord, SWeight,
};
pub use kernel::{pairing_kernel, stack_data, stack_kernels, KernelRows};
pub use pipeline::{combine_sources, finish, measure_source, reconstruct, InversionKind, Prepared, Reconstruction, ReconstructionSetup, SourceData};
pub use ray::{
    constant_ray_value, coverage_of, gauss_panels, ray_forward, ray_integral, ray_invert, recover_p, reduce_p, regularized_solve, relative_error, CoarseGrid, Inversion,
    RayDesign, RayRow, RayTransformSystem, Regularization,
};
