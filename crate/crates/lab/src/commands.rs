//! Subcommand bodies. Each validates its whole configuration before the first solve.

use crate::cases;
use crate::config::{DataKind, ExperimentConfig, NonlinearityKind};
use crate::error::LabError;
use crate::io::{num, FieldMeta, OutputDir};
use jmgt_core::cgo::{assemble_probe, remainder_solve, transport_table, AmplitudeFields, RemainderReport};
use jmgt_core::linalg::loglog_slope;
use jmgt_core::linearize::{cross_difference, relative_w_residual, EpsilonDesign, LinearizedPair};
use jmgt_core::mgt::{discrete_norm, dtn_trace, energy, MgtSolver, NormKind};
use jmgt_core::nonlinear::{bilinear_source, solve_nonlinear_with, PicardOptions};
use jmgt_core::recon::{finish, measure_source, relative_error, ReconstructionSetup, SourceData};
use jmgt_core::{Coefficients, DataTuple, Grid, SpaceTimeField, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

fn interleave(f: &SpaceTimeField) -> Vec<f64> {
    f.values().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn extent(grid: &Grid) -> Vec<[f64; 2]> {
    let o = grid.origin();
    vec![
        [0.0, grid.t_final()],
        [o[1], o[1] + (grid.ny() - 1) as f64 * grid.hy()],
        [o[0], o[0] + (grid.nx() - 1) as f64 * grid.hx()],
    ]
}

fn input_data(cfg: &ExperimentConfig, grid: &Grid, coeff: &Coefficients) -> DataTuple {
    let a = cfg.data.amplitude;
    match cfg.data.kind {
        DataKind::Zero => DataTuple::zeros(grid),
        DataKind::TSquared => cases::t_squared(grid, coeff),
        DataKind::Manufactured => cases::manufactured(grid, coeff),
        DataKind::CubicRamp => cases::cubic_ramp(grid, a, |x| (1.0 + x[0]) / 2.0),
    }
}

fn exact(cfg: &ExperimentConfig, grid: &Grid) -> Option<SpaceTimeField> {
    match cfg.data.kind {
        DataKind::TSquared => Some(cases::t_squared_exact(grid)),
        DataKind::Manufactured => Some(cases::manufactured_exact(grid)),
        _ => None,
    }
}

fn picard_options(cfg: &ExperimentConfig) -> PicardOptions {
    let n = &cfg.nonlinearity;
    PicardOptions { delta: n.smallness, max_iterations: n.max_iterations, tolerance: n.tolerance }
}

#[derive(Debug, Serialize)]
struct ForwardSummary {
    nonlinear: bool,
    picard_iterations: Option<usize>,
    picard_contraction: Option<f64>,
    max_abs_u: f64,
    relative_error: Option<f64>,
}

/// Linear or nonlinear forward run: field, energy, DtN trace and, for data
/// with a known solution, an error-vs-resolution table.
pub fn forward(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, LabError> {
    let coeff = cfg.coefficients()?;
    let grid = cfg.grid()?;
    let p = cfg.nonlinearity(&grid);
    let levels = refinement_grids(cfg)?;
    let solver = MgtSolver::new(&coeff, &grid)?;
    let data = input_data(cfg, &grid, &coeff);
    let (sol, report) = out.task("solve", |_| {
        if cfg.nonlinearity.kind == NonlinearityKind::Zero {
            Ok((solver.solve(&data)?, None))
        } else {
            let (s, r) = solve_nonlinear_with(&solver, &data, &p, &picard_options(cfg))?;
            Ok((s, Some(r)))
        }
    })?;
    let meta = FieldMeta {
        dtype: "complex128 little-endian (re, im)",
        shape: vec![grid.levels(), grid.ny(), grid.nx()],
        axes: vec!["t", "y", "x"],
        extent: extent(&grid),
        description: "u on the full grid; nodes outside the domain are zero".into(),
    };
    out.write_field("u", &interleave(&sol.u), &meta)?;
    let e = energy(&sol, &grid)?;
    let flux = dtn_trace(&sol.u, &grid)?;
    let mut erows = Vec::new();
    let mut drows = Vec::new();
    for n in 0..grid.levels() {
        erows.push(vec![n.to_string(), num(grid.time(n)), num(e[n])]);
        let mut s = 0.0;
        for (slot, bn) in grid.boundary().iter().enumerate() {
            s += bn.weight * flux.get(n, slot).norm_sqr();
        }
        drows.push(vec![n.to_string(), num(grid.time(n)), num(s.sqrt())]);
    }
    out.write_csv("energy.csv", &["level", "t", "energy"], &erows)?;
    out.write_csv("dtn.csv", &["level", "t", "dtn_l2"], &drows)?;
    if let Some(r) = &report {
        let rows: Vec<Vec<String>> = r.residual_history.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]).collect();
        out.write_csv("picard.csv", &["iteration", "residual"], &rows)?;
    }
    let mut rel = None;
    if let Some(ex) = exact(cfg, &grid) {
        rel = Some(relative_l2(&sol.u, &ex, &grid)?);
        let rows = out.task("refinement", |_| convergence_table(cfg, &coeff, &levels))?;
        out.write_csv("errors.csv", &["nx", "ny", "nt", "error", "relative_error", "order"], &rows)?;
    }
    let summary = ForwardSummary {
        nonlinear: report.is_some(),
        picard_iterations: report.as_ref().map(|r| r.iterations),
        picard_contraction: report.as_ref().map(|r| r.contraction_estimate),
        max_abs_u: sol.u.max_abs(),
        relative_error: rel,
    };
    out.write_json("forward.json", &summary)?;
    Ok(serde_json::to_value(summary)?)
}

fn relative_l2(u: &SpaceTimeField, exact: &SpaceTimeField, grid: &Grid) -> Result<f64, LabError> {
    let diff = u.zip_with(exact, |a, b| a - b)?;
    let den = discrete_norm(exact, grid, NormKind::L2Q)?;
    let num = discrete_norm(&diff, grid, NormKind::L2Q)?;
    Ok(if den > 0.0 { num / den } else { num })
}

/// Grids halved `refinements − 1` times from the configured one, coarsest first.
fn refinement_grids(cfg: &ExperimentConfig) -> Result<Vec<Grid>, LabError> {
    let g = &cfg.grid;
    let r = cfg.data.refinements.max(1);
    let f = 1usize << (r - 1);
    if exact_kind(cfg.data.kind) && ((g.nx - 1) % f != 0 || (g.ny - 1) % f != 0 || g.nt % f != 0) {
        return Err(LabError::Config(format!("[data]: {r} refinement levels need nx - 1, ny - 1 and nt divisible by {f}")));
    }
    if !exact_kind(cfg.data.kind) {
        return Ok(Vec::new());
    }
    (0..r)
        .rev()
        .map(|j| {
            let k = 1usize << j;
            let mut c = cfg.clone();
            c.grid.nx = (g.nx - 1) / k + 1;
            c.grid.ny = (g.ny - 1) / k + 1;
            c.grid.nt = g.nt / k;
            c.grid()
        })
        .collect()
}

fn exact_kind(k: DataKind) -> bool {
    matches!(k, DataKind::TSquared | DataKind::Manufactured)
}

fn convergence_table(cfg: &ExperimentConfig, coeff: &Coefficients, grids: &[Grid]) -> Result<Vec<Vec<String>>, LabError> {
    let mut rows = Vec::new();
    let mut prev: Option<f64> = None;
    for g in grids {
        let s = MgtSolver::new(coeff, g)?.solve(&input_data(cfg, g, coeff))?;
        let ex = exact(cfg, g).expect("refinement only runs for exact data");
        let err = discrete_norm(&s.u.zip_with(&ex, |a, b| a - b)?, g, NormKind::L2Q)?;
        let rel = relative_l2(&s.u, &ex, g)?;
        let order = match prev {
            Some(p) if err > 0.0 && p > 0.0 => num((p / err).log2()),
            _ => String::new(),
        };
        rows.push(vec![g.nx().to_string(), g.ny().to_string(), g.nt().to_string(), num(err), num(rel), order]);
        prev = Some(err);
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub sigmas: Vec<f64>,
    pub slope_r: f64,
    pub slope_rt: f64,
    pub max_rt_ratio: f64,
}

/// Remainder norms of the first probe over the `σ` list, with fitted log-log slopes.
pub fn cgo_sweep(cfg: &ExperimentConfig, out: &mut OutputDir, pool: &rayon::ThreadPool) -> Result<serde_json::Value, LabError> {
    let coeff = cfg.coefficients()?;
    let grid = cfg.grid()?;
    cfg.check_sweep(&grid, &coeff)?;
    let geom = cfg.geometries(&grid, &coeff)?[0];
    let spec = cfg.amplitude_spec(&geom);
    let sigmas = cfg.probe.sigmas.clone();
    let reports: Vec<RemainderReport> = out.task("remainders", |_| {
        let table = transport_table(&spec, &coeff, &[geom], &grid)?;
        let amps = AmplitudeFields::compute(&spec, &geom, &coeff, &grid, &table)?;
        let solver = MgtSolver::new(&coeff, &grid)?;
        let r: Result<Vec<_>, jmgt_core::Error> = pool.install(|| {
            sigmas
                .par_iter()
                .map(|&s| {
                    let probe = assemble_probe(s, 1.0, 1.0, &amps, &geom, &coeff, &grid)?;
                    remainder_solve(&probe, &solver).map(|(_, rep)| rep)
                })
                .collect()
        });
        Ok(r?)
    })?;
    let nr: Vec<f64> = reports.iter().map(|r| r.norm_r).collect();
    let nrt: Vec<f64> = reports.iter().map(|r| r.norm_rt).collect();
    let slope_r = loglog_slope(&sigmas, &nr)?;
    let slope_rt = loglog_slope(&sigmas, &nrt)?;
    let mut rows: Vec<Vec<String>> = reports.iter().map(|r| vec![num(r.sigma), num(r.norm_r), num(r.norm_rt), num(r.norm_grad_r)]).collect();
    rows.push(vec!["slope".into(), num(slope_r), num(slope_rt), num(loglog_slope(&sigmas, &reports.iter().map(|r| r.norm_grad_r).collect::<Vec<_>>())?)]);
    out.write_csv("decay.csv", &["sigma", "norm_r", "norm_rt", "norm_grad_r"], &rows)?;
    let lo = nrt.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nrt.iter().cloned().fold(0.0, f64::max);
    let summary = SweepSummary { sigmas, slope_r, slope_rt, max_rt_ratio: if lo > 0.0 { hi / lo } else { f64::INFINITY } };
    out.write_json("sweep.json", &summary)?;
    if slope_r > -0.5 {
        log::warn!("asymptotic regime not reached: remainder slope {slope_r:.3}");
        return Err(LabError::NotAsymptotic(format!("remainder slope {slope_r:.3} > -0.5")));
    }
    Ok(serde_json::to_value(summary)?)
}

/// Cross differences against the direct linearized solve over the `ε` list.
pub fn linearize(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, LabError> {
    let coeff = cfg.coefficients()?;
    let grid = cfg.grid()?;
    if cfg.linearize.eps.is_empty() || cfg.linearize.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::Config("[linearize]: eps must be a non-empty list of positive values".into()));
    }
    let p = cfg.nonlinearity(&grid);
    let solver = MgtSolver::new(&coeff, &grid)?;
    let a = cfg.data.amplitude;
    let d1 = cases::cubic_ramp(&grid, a, |x| 1.0 + x[0]);
    let d2 = cases::cubic_ramp(&grid, a, |x| (1.0 + x[1]) * (1.0 + x[1]));
    let pair = out.task("direct", |_| Ok(LinearizedPair::solve(&d1, &d2, &p, &solver)?))?;
    let f = bilinear_source(&p, &pair.w1, &pair.w2)?;
    let w_residual = relative_w_residual(&pair.w, &pair.big_w, Some(&f), &coeff, &grid)?;
    let norm_w = discrete_norm(&pair.w.u, &grid, NormKind::L2Q)?;
    let opts = picard_options(cfg);
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &eps in &cfg.linearize.eps {
        let design = EpsilonDesign { eps1: eps, eps2: eps, d1: d1.clone(), d2: d2.clone() };
        let cd = out.task(&format!("cross eps={eps}"), |_| Ok(cross_difference(&design, &p, &solver, &opts)?))?;
        let diff = cd.w.u.zip_with(&pair.w.u, |x, y| x - y)?;
        let gap = if norm_w > 0.0 { discrete_norm(&diff, &grid, NormKind::L2Q)? / norm_w } else { discrete_norm(&diff, &grid, NormKind::L2Q)? };
        let iters = cd.reports.iter().map(|r| r.iterations).max().unwrap_or(0);
        rows.push(vec![num(eps), num(gap), iters.to_string()]);
        gaps.push(gap);
    }
    out.write_csv("linearize.csv", &["eps", "relative_gap", "picard_iterations"], &rows)?;
    let summary = serde_json::json!({ "eps": cfg.linearize.eps, "relative_gap": gaps, "w_reduction_residual": w_residual });
    out.write_json("linearize.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct ReconReport {
    pub mode: &'static str,
    pub inversion: &'static str,
    pub sources: usize,
    pub rows: usize,
    pub sigmas: Vec<f64>,
    /// Relative `L²` error on covered coarse nodes; absolute max when the truth is zero.
    pub relative_error: f64,
    pub max_abs_p: f64,
    pub coverage: f64,
    pub relative_residual: f64,
    pub imaginary_ratio: f64,
    pub iterations: usize,
    pub sigma_spread: Vec<f64>,
    pub extrapolation_order: f64,
    pub asymptotic: Option<bool>,
    pub noise: f64,
    pub measure_seconds: f64,
}

/// Full pipeline: per-source measurements in parallel, then one inversion.
pub fn reconstruct(cfg: &ExperimentConfig, out: &mut OutputDir, pool: &rayon::ThreadPool) -> Result<ReconReport, LabError> {
    let (setup, p, reg) = cfg.reconstruction()?;
    let truth = setup.coarse.sample(|x, t| if cfg.nonlinearity.kind == NonlinearityKind::Zero { 0.0 } else { cfg.bump().eval(x, t)[0] });
    let start = Instant::now();
    let mut per = out.task("measure", |_| measure_all(&setup, &p, pool))?;
    let measure_seconds = start.elapsed().as_secs_f64();
    add_noise(&mut per, cfg.recon.noise, cfg.run.seed);
    let rec = out.task("invert", |_| Ok(finish(&setup, &per, &reg)?))?;
    let err = if truth.iter().all(|v| *v == 0.0) {
        rec.p.iter().zip(&rec.inversion.covered).filter(|(_, c)| **c).map(|(v, _)| v.abs()).fold(0.0, f64::max)
    } else {
        relative_error(&rec.p, &truth, &rec.inversion.covered)
    };
    let c = setup.coarse;
    let meta = FieldMeta {
        dtype: "float64 little-endian",
        shape: vec![c.nt, c.ny, c.nx],
        axes: vec!["t", "y", "x"],
        extent: vec![[c.t.0, c.t.1], [c.y.0, c.y.1], [c.x.0, c.x.1]],
        description: "reconstructed p at the coarse nodes".into(),
    };
    out.write_field("reconstruction", &rec.p, &meta)?;
    let covered: Vec<f64> = rec.inversion.covered.iter().map(|c| if *c { 1.0 } else { 0.0 }).collect();
    out.write_field("coverage", &covered, &FieldMeta { description: "1 where the node is covered by the rows".into(), ..meta })?;
    out.write_csv("ray_data.csv", &["source", "profile", "window", "sigma", "real", "imag", "error_bar"], &ray_rows(&setup, &rec.extraction))?;
    let report = ReconReport {
        mode: setup.mode.as_str(),
        inversion: setup.inversion.as_str(),
        sources: setup.geoms.len(),
        rows: rec.extraction.samples.len(),
        sigmas: setup.sigmas.clone(),
        relative_error: err,
        max_abs_p: rec.p.iter().map(|v| v.abs()).fold(0.0, f64::max),
        coverage: rec.inversion.coverage,
        relative_residual: rec.inversion.relative_residual,
        imaginary_ratio: rec.inversion.imaginary_ratio,
        iterations: rec.inversion.iterations,
        sigma_spread: rec.extraction.spread.clone(),
        extrapolation_order: rec.extraction.order,
        asymptotic: rec.extraction.asymptotic,
        noise: cfg.recon.noise,
        measure_seconds,
    };
    out.write_json("report.json", &report)?;
    Ok(report)
}

pub fn measure_all(setup: &ReconstructionSetup, p: &jmgt_core::nonlinear::NonlinearityField, pool: &rayon::ThreadPool) -> Result<Vec<SourceData>, LabError> {
    let prep = setup.prepare()?;
    let r: Result<Vec<_>, jmgt_core::Error> = pool.install(|| (0..setup.geoms.len()).into_par_iter().map(|s| measure_source(setup, &prep, s, p)).collect());
    Ok(r?)
}

fn add_noise(per: &mut [SourceData], level: f64, seed: u64) {
    if level <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<f64> = per.iter().flat_map(|s| s.pairings.iter().flatten().map(|z| z.norm_sqr())).collect();
    let rms = (all.iter().sum::<f64>() / all.len().max(1) as f64).sqrt();
    for s in per.iter_mut() {
        for v in s.pairings.iter_mut().flatten() {
            *v += C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (level * rms);
        }
    }
}

fn ray_rows(setup: &ReconstructionSetup, ex: &jmgt_core::recon::Extraction) -> Vec<Vec<String>> {
    let nw = setup.design.windows.len();
    let per_source = setup.design.rows_per_source();
    let mut rows = Vec::new();
    for (i, s) in ex.samples.iter().enumerate() {
        let (src, j) = (i / per_source, i % per_source);
        let (prof, win) = (j / nw, j % nw);
        let head = [src.to_string(), prof.to_string(), win.to_string()];
        for (sig, v) in ex.sigmas.iter().zip(&s.by_sigma) {
            rows.push(head.iter().cloned().chain([num(*sig), num(v.re), num(v.im), String::new()]).collect());
        }
        rows.push(head.iter().cloned().chain(["inf".into(), num(s.estimate.re), num(s.estimate.im), num(s.error_bar)]).collect());
    }
    rows
}

/// Checks every section that is present without solving anything.
pub fn validate(cfg: &ExperimentConfig, text: &str) -> Result<serde_json::Value, LabError> {
    let coeff = cfg.coefficients()?;
    let grid = cfg.grid()?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
    let mut checked = vec!["coefficients", "grid"];
    if table.contains_key("data") {
        refinement_grids(cfg)?;
        checked.push("data");
    }
    if let Some(probe) = table.get("probe") {
        cfg.geometries(&grid, &coeff)?;
        if probe.get("sigmas").is_some() {
            cfg.check_sweep(&grid, &coeff)?;
        }
        checked.push("probe");
    }
    if table.contains_key("recon") {
        cfg.reconstruction()?;
        checked.push("recon");
    }
    Ok(serde_json::json!({ "valid": true, "checked": checked, "nodes": grid.n_nodes(), "levels": grid.levels() }))
}
