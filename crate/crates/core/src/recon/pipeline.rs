//! Measurement simulation and inversion for a ring of sources.

use crate::cgo::{check_resolution, transport_table, A2Table, AmplitudeFields, AmplitudeSpec, ProbeGeometry};
use crate::coeff::Coefficients;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mgt::MgtSolver;
use crate::nonlinear::NonlinearityField;
use crate::prelude::*;
use crate::recon::extract::{extract_ray_data, Extraction};
use crate::linearize::direct_linearized;
use crate::recon::identity::{record_pairings, MeasurementMode, MeasurementRecord, SWeight};
use crate::recon::kernel::{pairing_kernel, stack_data, stack_kernels, KernelRows};
use crate::recon::ray::{coverage_of, ray_invert, recover_p, regularized_solve, CoarseGrid, Inversion, RayDesign, RayTransformSystem, Regularization};
use crate::cgo::assemble_probe;
use alloc::format;

#[derive(Debug, Clone)]
pub struct ReconstructionSetup {
    pub coeff: Coefficients,
    pub grid: Grid,
    pub geoms: Vec<ProbeGeometry>,
    /// Amplitude of both probes; must carry a cutoff in boundary-only mode.
    pub probe: AmplitudeSpec,
    pub sigmas: Vec<f64>,
    pub mode: MeasurementMode,
    pub design: RayDesign,
    pub coarse: CoarseGrid,
    pub inversion: InversionKind,
}

/// Which forward operator the final least-squares solve uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionKind {
    /// Leading-order ray transform of `e^{−γt/2}p` applied to `σ`-extrapolated data.
    RayTransform,
    /// The exact linear map `p ↦ pairings` built from the probe solutions, all `σ` stacked.
    ExactKernel,
}

impl InversionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InversionKind::RayTransform => "ray",
            InversionKind::ExactKernel => "exact",
        }
    }
}

impl ReconstructionSetup {
    /// Checks everything that can be checked before any solve.
    pub fn validate(&self, p: Option<&NonlinearityField>) -> Result<()> {
        self.probe.validate()?;
        if self.geoms.is_empty() {
            return Err(Error::Argument("no sources".into()));
        }
        if self.sigmas.len() < 2 || self.sigmas.windows(2).any(|w| !(w[1] > w[0])) || !(self.sigmas[0] > 0.0) {
            return Err(Error::Argument(format!("need >= 2 increasing positive sigma values, got {:?}", self.sigmas)));
        }
        check_resolution(2.0 * self.sigmas[self.sigmas.len() - 1], self.coeff.b(), &self.grid)?;
        if let Some(p) = p {
            p.check_shape(&self.grid)?;
        }
        if self.mode == MeasurementMode::BoundaryOnly {
            let Some(cut) = self.probe.cutoff else {
                return Err(Error::Argument("boundary-only mode needs cut-off probes".into()));
            };
            if !(self.grid.t_final() > cut.hi) {
                return Err(Error::Support(format!("T = {} must exceed the cutoff end {}", self.grid.t_final(), cut.hi)));
            }
            let t = self.grid.t_final();
            for geom in &self.geoms {
                let last = geom.r_floor() + t;
                for w in &self.design.windows {
                    let hi = match *w {
                        SWeight::Window { .. } => w.support().1,
                        SWeight::Exponential { .. } => f64::INFINITY,
                    };
                    if hi > last + 1e-12 {
                        return Err(Error::Support(format!("s-window ending at {hi:.4} reaches t = T; boundary-only mode needs windows below {last:.4}")));
                    }
                }
            }
            if let Some(p) = p {
                let early = p.max_before(&self.grid, cut.hi);
                if early > 0.0 {
                    return Err(Error::Support(format!("p reaches {early:e} before t = {:.4}", cut.hi)));
                }
            }
        }
        Ok(())
    }

    /// The solver and the shared transport table.
    pub fn prepare(&self) -> Result<Prepared> {
        Ok(Prepared {
            solver: MgtSolver::new(&self.coeff, &self.grid)?,
            table: transport_table(&self.probe, &self.coeff, &self.geoms, &self.grid)?,
        })
    }

    pub fn system(&self) -> Result<RayTransformSystem> {
        RayTransformSystem::assemble(&self.geoms, &self.design, &self.probe, self.coeff.b(), self.grid.domain(), self.coarse)
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub solver: MgtSolver,
    pub table: A2Table,
}

/// What one source contributes: pairings per `σ` and, for the exact kernel, the matching rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceData {
    pub pairings: Vec<Vec<C64>>,
    pub kernels: Vec<KernelRows>,
}

/// Simulates the measurements of one source at every `σ` and pairs them with the adjoint specs.
pub fn measure_source(setup: &ReconstructionSetup, prep: &Prepared, source: usize, p: &NonlinearityField) -> Result<SourceData> {
    let geom = setup.geoms.get(source).ok_or_else(|| Error::Argument(format!("no source {source}")))?;
    let (coeff, grid) = (&setup.coeff, &setup.grid);
    let amps = AmplitudeFields::compute(&setup.probe, geom, coeff, grid, &prep.table)?;
    let specs = setup.design.adjoint_specs(geom);
    let mut out = SourceData { pairings: Vec::new(), kernels: Vec::new() };
    for &sigma in &setup.sigmas {
        let w1 = prep.solver.solve(&assemble_probe(sigma, 1.0, 2.0, &amps, geom, coeff, grid)?.induced_data)?;
        let w2 = prep.solver.solve(&assemble_probe(sigma, -1.0, 1.0, &amps, geom, coeff, grid)?.induced_data)?;
        let w = direct_linearized(&w1, &w2, p, &prep.solver)?;
        let rec = MeasurementRecord::from_solution(&w, setup.mode, sigma, source, grid)?;
        out.pairings.push(record_pairings(&rec, &specs, geom, coeff, grid)?);
        if setup.inversion == InversionKind::ExactKernel {
            out.kernels.push(pairing_kernel(sigma, &w1, &w2, &specs, geom, coeff, grid, &setup.coarse)?);
        }
    }
    Ok(out)
}

/// Concatenates per-source pairings into system row order and extrapolates in `σ`.
pub fn combine_sources(setup: &ReconstructionSetup, per_source: &[SourceData]) -> Result<Extraction> {
    if per_source.len() != setup.geoms.len() {
        return Err(Error::Shape(format!("{} sources measured, {} configured", per_source.len(), setup.geoms.len())));
    }
    let values: Vec<Vec<C64>> = (0..setup.sigmas.len())
        .map(|i| per_source.iter().flat_map(|s| s.pairings[i].iter().copied()).collect())
        .collect();
    extract_ray_data(&setup.sigmas, &values)
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub extraction: Extraction,
    pub inversion: Inversion,
    /// `p` at the coarse nodes.
    pub p: Vec<f64>,
}

/// Full sequential run: measure every source, extrapolate, invert.
pub fn reconstruct(setup: &ReconstructionSetup, p: &NonlinearityField, reg: &Regularization) -> Result<Reconstruction> {
    setup.validate(Some(p))?;
    let prep = setup.prepare()?;
    let per_source = (0..setup.geoms.len()).map(|s| measure_source(setup, &prep, s, p)).collect::<Result<Vec<_>>>()?;
    finish(setup, &per_source, reg)
}

/// Extrapolation and inversion from already measured sources.
pub fn finish(setup: &ReconstructionSetup, per_source: &[SourceData], reg: &Regularization) -> Result<Reconstruction> {
    let extraction = combine_sources(setup, per_source)?;
    match setup.inversion {
        InversionKind::RayTransform => {
            let system = setup.system()?;
            let inversion = ray_invert(&extraction.estimates(), &system, reg)?;
            let p = recover_p(&inversion.u, &setup.coarse, setup.coeff.gamma())?;
            Ok(Reconstruction { extraction, inversion, p })
        }
        InversionKind::ExactKernel => {
            let mut blocks = Vec::new();
            let mut data = Vec::new();
            for src in per_source {
                if src.kernels.len() != src.pairings.len() {
                    return Err(Error::Shape("exact inversion needs kernel rows for every sigma".into()));
                }
                blocks.extend(src.kernels.iter().cloned());
                data.extend(src.pairings.iter().cloned());
            }
            let a = stack_kernels(&blocks, setup.coarse.len())?;
            let inversion = regularized_solve(&a, &setup.coarse, coverage_of(&a), &stack_data(&data), reg)?;
            let p = inversion.u.clone();
            Ok(Reconstruction { extraction, inversion, p })
        }
    }
}
