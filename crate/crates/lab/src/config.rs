//! TOML experiment configuration.

use crate::error::LabError;
use jmgt_core::cgo::{check_resolution, AmplitudeSpec, AngularProfile, ProbeGeometry};
use jmgt_core::nonlinear::{GaussianBump, NonlinearityField};
use jmgt_core::recon::{CoarseGrid, InversionKind, MeasurementMode, RayDesign, Regularization, ReconstructionSetup};
use jmgt_core::{Coefficients, Grid};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub coefficients: CoefficientsSection,
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub nonlinearity: NonlinearitySection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub linearize: LinearizeSection,
    #[serde(default)]
    pub recon: ReconSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
    /// Admissibility bound `M`.
    #[serde(default = "default_bound")]
    pub bound: f64,
}

fn default_bound() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rectangle,
    Disc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_shape")]
    pub shape: Shape,
    /// `[x0, x1]` for rectangles.
    #[serde(default = "unit")]
    pub x: [f64; 2],
    #[serde(default = "unit")]
    pub y: [f64; 2],
    /// Centre and radius for discs.
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub radius: f64,
    pub nx: usize,
    pub ny: usize,
    pub t_final: f64,
    pub nt: usize,
}

fn default_shape() -> Shape {
    Shape::Rectangle
}
fn unit() -> [f64; 2] {
    [0.0, 1.0]
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Zero,
    /// `u = t²` with the matching constant source.
    TSquared,
    /// `u = sin(k·x + ωt)` with its forcing; errors are reported against it.
    Manufactured,
    /// Boundary data `amplitude·t³(1 + x)/2`, compatible to second order.
    CubicRamp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub kind: DataKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Number of halvings for the convergence table of manufactured runs.
    #[serde(default = "default_levels")]
    pub refinements: usize,
}

fn default_levels() -> usize {
    3
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: DataKind::Zero, amplitude: 1.0, refinements: default_levels() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub kind: NonlinearityKind,
    #[serde(default = "centre")]
    pub center: [f64; 2],
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Smooth time window `(lo, hi)`; `None` means all of `[0, T]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Picard tolerance and cap for nonlinear forward runs.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_iters")]
    pub max_iterations: usize,
    /// Data-size bound above which Picard contraction is not expected; exceeding it only warns.
    #[serde(default = "default_smallness")]
    pub smallness: f64,
}

fn centre() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_width() -> f64 {
    0.15
}
fn default_tol() -> f64 {
    1e-10
}
fn default_iters() -> usize {
    50
}
fn default_smallness() -> f64 {
    0.1
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            center: centre(),
            width: default_width(),
            amplitude: 1.0,
            window: None,
            tolerance: default_tol(),
            max_iterations: default_iters(),
            smallness: default_smallness(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// Decay rate of the probe envelope.
    pub mu: f64,
    /// Offset of the source circle outside the circumcircle, in `g`-distance.
    pub pad: f64,
    pub sources: usize,
    /// Angle of the first source.
    pub offset: f64,
    pub sigmas: Vec<f64>,
    pub cutoff: bool,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { mu: 1.0, pad: 0.4, sources: 16, offset: 0.1, sigmas: vec![10.0, 20.0, 40.0, 80.0], cutoff: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizeSection {
    pub eps: Vec<f64>,
}

impl Default for LinearizeSection {
    fn default() -> Self {
        Self { eps: vec![4e-3, 2e-3, 1e-3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "lambda_T")]
    LambdaT,
    #[serde(rename = "B_T")]
    BT,
}

impl Mode {
    pub fn measurement(self) -> MeasurementMode {
        match self {
            Mode::LambdaT => MeasurementMode::WithFinalState,
            Mode::BT => MeasurementMode::BoundaryOnly,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lambda_T" => Ok(Mode::LambdaT),
            "B_T" => Ok(Mode::BT),
            _ => Err(format!("unknown mode {s:?}, expected lambda_T or B_T")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inversion {
    Ray,
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconSection {
    pub mode: Mode,
    pub inversion: Inversion,
    pub sigmas: Vec<f64>,
    pub profiles: usize,
    pub windows: usize,
    /// Coarse unknown grid `[nx, ny, nt]`, spanning the `p` time window.
    pub coarse: [usize; 3],
    pub lambda: f64,
    pub smoothing: f64,
    /// Relative additive noise on the pairings, drawn from the run seed.
    pub noise: f64,
}

impl Default for ReconSection {
    fn default() -> Self {
        Self {
            mode: Mode::LambdaT,
            inversion: Inversion::Exact,
            sigmas: vec![20.0, 40.0],
            profiles: 2,
            windows: 20,
            coarse: [8, 8, 8],
            lambda: 1e-2,
            smoothing: 4.0,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker cap; 0 means one per core.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 0, out: PathBuf::from("out"), threads: 0 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn coefficients(&self) -> Result<Coefficients, LabError> {
        let c = &self.coefficients;
        Coefficients::new(c.alpha, c.b, c.c, c.bound).map_err(|e| LabError::Config(format!("[coefficients]: {e}")))
    }

    pub fn grid(&self) -> Result<Grid, LabError> {
        let g = &self.grid;
        let made = match g.shape {
            Shape::Rectangle => Grid::rectangle(g.x[0], g.x[1], g.y[0], g.y[1], g.nx, g.ny, g.t_final, g.nt),
            Shape::Disc => Grid::disc(g.center, g.radius, g.nx, g.ny, g.t_final, g.nt),
        };
        made.map_err(|e| LabError::Config(format!("[grid]: {e}")))
    }

    pub fn nonlinearity(&self, grid: &Grid) -> NonlinearityField {
        match self.nonlinearity.kind {
            NonlinearityKind::Zero => NonlinearityField::zero(grid),
            NonlinearityKind::Gaussian => NonlinearityField::gaussian_bump(grid, &self.bump()),
        }
    }

    pub fn bump(&self) -> GaussianBump {
        let n = &self.nonlinearity;
        GaussianBump { center: n.center, width: n.width, amplitude: n.amplitude, window: n.window.map(|w| (w[0], w[1])) }
    }

    pub fn geometries(&self, grid: &Grid, coeff: &Coefficients) -> Result<Vec<ProbeGeometry>, LabError> {
        let p = &self.probe;
        if p.sources == 0 {
            return Err(LabError::Config("[probe]: sources must be at least 1".into()));
        }
        ProbeGeometry::ring(grid.domain(), coeff.b(), p.pad, p.sources, p.offset).map_err(|e| LabError::Config(format!("[probe]: {e}")))
    }

    pub fn amplitude_spec(&self, geom: &ProbeGeometry) -> AmplitudeSpec {
        AmplitudeSpec { mu: self.probe.mu, profile: AngularProfile::Constant, cutoff: self.probe.cutoff.then(|| AmplitudeSpec::cutoff_for(geom)) }
    }

    /// Everything `reconstruct` needs, checked against the grid and `p`.
    pub fn reconstruction(&self) -> Result<(ReconstructionSetup, NonlinearityField, Regularization), LabError> {
        let coeff = self.coefficients()?;
        let grid = self.grid()?;
        let geoms = self.geometries(&grid, &coeff)?;
        let r = &self.recon;
        if r.mode == Mode::BT && !self.probe.cutoff {
            return Err(LabError::Config("[recon] mode B_T needs [probe] cutoff = true".into()));
        }
        if r.sigmas.len() < 2 {
            return Err(LabError::Config(format!("[recon]: need at least 2 sigma values, got {}", r.sigmas.len())));
        }
        if self.nonlinearity.kind == NonlinearityKind::Gaussian && self.nonlinearity.window.is_none() {
            return Err(LabError::Config("[nonlinearity]: reconstruction needs a time window".into()));
        }
        let window = self.nonlinearity.window.unwrap_or([0.0, grid.t_final()]);
        let probe = self.amplitude_spec(&geoms[0]);
        let t = grid.t_final();
        let design = match r.mode {
            Mode::LambdaT => RayDesign::uniform(r.profiles, r.windows, RayDesign::s_range(&geoms[0], (window[0], window[1]))),
            Mode::BT => RayDesign::within(r.profiles, r.windows, (geoms[0].r_floor() + window[0], geoms[0].r_floor() + t)),
        }
        .map_err(|e| LabError::Config(format!("[recon]: {e}")))?;
        let (x, y) = match grid.domain() {
            jmgt_core::Domain::Rectangle { x0, x1, y0, y1 } => ((*x0, *x1), (*y0, *y1)),
            jmgt_core::Domain::Disc { center, radius } => ((center[0] - radius, center[0] + radius), (center[1] - radius, center[1] + radius)),
        };
        let [cx, cy, ct] = r.coarse;
        let coarse = CoarseGrid::new(x, y, (window[0], window[1]), cx, cy, ct).map_err(|e| LabError::Config(format!("[recon] coarse: {e}")))?;
        let inversion = match r.inversion {
            Inversion::Ray => InversionKind::RayTransform,
            Inversion::Exact => InversionKind::ExactKernel,
        };
        let setup = ReconstructionSetup { coeff, grid, geoms, probe, sigmas: r.sigmas.clone(), mode: r.mode.measurement(), design, coarse, inversion };
        let p = self.nonlinearity(&setup.grid);
        setup.validate(Some(&p))?;
        let reg = Regularization { lambda: r.lambda, smoothing: r.smoothing, ..Default::default() };
        Ok((setup, p, reg))
    }

    /// Cross-section checks for the probe sweep: at least three `σ`, all resolved.
    pub fn check_sweep(&self, grid: &Grid, coeff: &Coefficients) -> Result<(), LabError> {
        let s = &self.probe.sigmas;
        if s.len() < 3 {
            return Err(LabError::Config(format!("[probe]: the sweep needs at least 3 sigma values, got {}", s.len())));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) || !(s[0] > 0.0) {
            return Err(LabError::Config("[probe]: sigma values must be positive and increasing".into()));
        }
        check_resolution(s[s.len() - 1], coeff.b(), grid)?;
        Ok(())
    }
}
