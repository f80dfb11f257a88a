use jmgt_core::cgo::{assemble_probe, transport_table, AmplitudeFields, AmplitudeSpec, AngularProfile, ProbeGeometry};
use jmgt_core::linearize::direct_linearized;
use jmgt_core::mgt::MgtSolver;
use jmgt_core::nonlinear::{GaussianBump, NonlinearityField};
use jmgt_core::recon::*;
use jmgt_core::{BoundaryField, Coefficients, DataTuple, Error, Grid, C64};
use proptest::prelude::*;

fn boundary_input(g: &Grid, shape: impl Fn([f64; 2]) -> f64) -> DataTuple {
    let mut d = DataTuple::zeros(g);
    d.h = BoundaryField::from_fn(g, |x, t| {
        let s = shape(x);
        [C64::new(s * t * t * t, 0.0), C64::new(3.0 * s * t * t, 0.0), C64::new(6.0 * s * t, 0.0)]
    });
    d
}

/// `|lhs − rhs| / |lhs|` for a solved adjoint and solver-generated `w`.
fn identity_gap(n: usize, nt: usize, mode: MeasurementMode) -> f64 {
    let coeff = Coefficients::new(3.0, 2.0, 1.0, 10.0).unwrap();
    let grid = Grid::rectangle(0.0, 1.0, 0.0, 1.0, n, n, 1.0, nt).unwrap();
    let solver = MgtSolver::new(&coeff, &grid).unwrap();
    let p = NonlinearityField::gaussian_bump(&grid, &GaussianBump { center: [0.5, 0.5], width: 0.2, amplitude: 2.0, window: Some((0.1, 0.9)) });
    let w1 = solver.solve(&boundary_input(&grid, |x| 1.0 + x[0])).unwrap();
    let w2 = solver.solve(&boundary_input(&grid, |x| (1.0 + x[1]).powi(2))).unwrap();
    let w = direct_linearized(&w1, &w2, &p, &solver).unwrap();
    let geom = ProbeGeometry::new(grid.domain(), coeff.b(), 0.3, 0.4).unwrap();
    let y = AdjointProbe::bare(3.0, AdjointSpec::PLAIN, false, &geom, &coeff, &grid).unwrap().with_remainder(&coeff, &grid).unwrap();
    let rec = MeasurementRecord::from_solution(&w, mode, 3.0, 0, &grid).unwrap();
    let lhs = identity_lhs(&y.y, &p, &w1, &w2, Some(&w), &coeff, &grid).unwrap();
    let rhs = identity_rhs(&y.y, &rec, &coeff, &grid).unwrap();
    (lhs - rhs).norm() / lhs.norm()
}

#[test]
fn identity_gap_shrinks_at_second_order() {
    let coarse = identity_gap(17, 32, MeasurementMode::WithFinalState);
    let fine = identity_gap(33, 64, MeasurementMode::WithFinalState);
    let order = (coarse / fine).log2();
    assert!(order > 1.6, "gap {coarse:e} -> {fine:e}, order {order}");
    assert!(fine < 1e-2, "{fine}");
}

#[test]
fn boundary_only_record_drops_the_final_state() {
    let coeff = Coefficients::new(3.0, 2.0, 1.0, 10.0).unwrap();
    let grid = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 9, 9, 1.0, 8).unwrap();
    let solver = MgtSolver::new(&coeff, &grid).unwrap();
    let w = solver.solve(&boundary_input(&grid, |x| x[0])).unwrap();
    let a = MeasurementRecord::from_solution(&w, MeasurementMode::WithFinalState, 1.0, 0, &grid).unwrap();
    let b = MeasurementRecord::from_solution(&w, MeasurementMode::BoundaryOnly, 1.0, 0, &grid).unwrap();
    assert!(a.final_triple.is_some() && b.final_triple.is_none());
    assert_eq!(a.dtn.values(), b.dtn.values());
    assert_eq!(MeasurementMode::BoundaryOnly.as_str(), "B_T");
}

#[test]
fn zero_measurements_pair_to_zero() {
    let coeff = Coefficients::new(3.0, 2.0, 1.0, 10.0).unwrap();
    let grid = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 9, 9, 1.0, 8).unwrap();
    let solver = MgtSolver::new(&coeff, &grid).unwrap();
    let w = solver.solve(&DataTuple::zeros(&grid)).unwrap();
    assert!(w.u.values().iter().all(|v| *v == C64::new(0.0, 0.0)));
    let rec = MeasurementRecord::from_solution(&w, MeasurementMode::WithFinalState, 5.0, 0, &grid).unwrap();
    let geom = ProbeGeometry::new(grid.domain(), coeff.b(), 0.3, 0.0).unwrap();
    let y = AdjointProbe::bare(5.0, AdjointSpec::PLAIN, true, &geom, &coeff, &grid).unwrap();
    assert_eq!(identity_rhs(&y.y, &rec, &coeff, &grid).unwrap(), C64::new(0.0, 0.0));
    let specs = RayDesign::uniform(2, 3, (0.2, 2.0)).unwrap().adjoint_specs(&geom);
    assert!(record_pairings(&rec, &specs, &geom, &coeff, &grid).unwrap().iter().all(|v| *v == C64::new(0.0, 0.0)));
}

#[test]
fn constant_field_pairs_to_box_volume() {
    let grid = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 11, 11, 1.0, 10).unwrap();
    let one = jmgt_core::SpaceTimeField::from_fn(&grid, jmgt_core::Role::Source, |_, _| C64::new(1.0, 0.0));
    let v = spacetime_pairing(&one, &one, &grid).unwrap();
    assert!((v.re - 1.0).abs() < 1e-12 && v.im == 0.0, "{v}");
}

#[test]
fn unit_ray_value_matches_quadrature() {
    for (mu, l, t) in [(1.0, 0.8, 1.2), (3.0, 1.5, 0.5), (0.0, 1.0, 2.0)] {
        let exact = constant_ray_value(mu, l, t);
        let quad = ray_integral(|_, _| 1.0, |s| (-mu * s).exp(), (0.0, l), (0.0, t), 4);
        assert!((quad - exact).abs() <= 1e-2 * exact, "{mu} {l} {t}: {quad} vs {exact}");
        assert!((quad - exact).abs() <= 1e-5 * exact);
    }
}

fn round_trip_setup() -> (Coefficients, Grid, Vec<ProbeGeometry>, RayTransformSystem) {
    let coeff = Coefficients::new(1.0, 4.0, 1.0, 10.0).unwrap();
    let grid = Grid::rectangle(0.0, 0.9, 0.0, 0.9, 17, 17, 1.2, 16).unwrap();
    let geoms = ProbeGeometry::ring(grid.domain(), coeff.b(), 0.4, 16, 0.1).unwrap();
    let design = RayDesign::uniform(12, 16, RayDesign::s_range(&geoms[0], (0.0, 1.2))).unwrap();
    let probe = AmplitudeSpec { mu: 1.0, profile: AngularProfile::Constant, cutoff: None };
    let coarse = CoarseGrid::covering(&grid, 16, 16, 32).unwrap();
    let system = RayTransformSystem::assemble(&geoms, &design, &probe, coeff.b(), grid.domain(), coarse).unwrap();
    (coeff, grid, geoms, system)
}

#[test]
fn ray_round_trip_recovers_a_smooth_field() {
    let (coeff, _, _, system) = round_trip_setup();
    let bump = GaussianBump { center: [0.45, 0.45], width: 0.15, amplitude: 1.0, window: Some((0.1, 1.1)) };
    let truth = reduce_p(|x, t| bump.eval(x, t)[0], &system.coarse, coeff.gamma());
    let data: Vec<C64> = ray_forward(&truth, &system).unwrap().into_iter().map(|v| C64::new(v, 0.0)).collect();
    let inv = ray_invert(&data, &system, &Regularization::default()).unwrap();
    let err = relative_error(&inv.u, &truth, &inv.covered);
    assert!(err <= 0.10, "round trip error {err}");
    assert!(inv.coverage > 0.9);
    assert_eq!(inv.imaginary_ratio, 0.0);

    let zero = ray_invert(&vec![C64::new(0.0, 0.0); data.len()], &system, &Regularization::default()).unwrap();
    assert!(zero.u.iter().all(|v| *v == 0.0));
    let err = ray_invert(&data, &system, &Regularization { lambda: 0.0, ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::RegularizationRequired));
}

#[test]
fn ray_forward_is_nonnegative_on_nonnegative_fields() {
    let (_, _, _, system) = round_trip_setup();
    let u = system.coarse.sample(|x, t| 1.0 + x[0] * t);
    assert!(ray_forward(&u, &system).unwrap().iter().all(|v| *v >= 0.0));
    assert!(ray_forward(&vec![0.0; system.coarse.len()], &system).unwrap().iter().all(|v| *v == 0.0));
    assert!(matches!(ray_forward(&[1.0], &system), Err(Error::Shape(_))));
}

#[test]
fn recover_p_undoes_the_damping_weight() {
    let coarse = CoarseGrid::new((0.0, 1.0), (0.0, 1.0), (0.0, 2.0), 3, 3, 5).unwrap();
    let u = reduce_p(|_, _| 1.0, &coarse, 0.7);
    for v in recover_p(&u, &coarse, 0.7).unwrap() {
        assert!((v - 1.0).abs() < 1e-14);
    }
    assert!(recover_p(&vec![0.0; coarse.len()], &coarse, 0.7).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn richardson_removes_a_first_order_error() {
    let sig = [10.0, 20.0];
    let limit = [C64::new(1.0, 0.0), C64::new(-2.0, 0.5)];
    let vals: Vec<Vec<C64>> = sig.iter().map(|s| limit.iter().map(|l| l + C64::new(3.0, 1.0) / s).collect()).collect();
    let ex = extract_ray_data(&sig, &vals).unwrap();
    for (s, l) in ex.samples.iter().zip(&limit) {
        assert!((s.estimate - l).norm() < 1e-12);
        assert!(s.error_bar > 0.0);
    }
    assert_eq!(ex.asymptotic, None);
}

#[test]
fn growing_spread_is_flagged() {
    let sig = [10.0, 20.0, 40.0];
    let vals = vec![vec![C64::new(1.0, 0.0)], vec![C64::new(1.1, 0.0)], vec![C64::new(1.5, 0.0)]];
    assert_eq!(extract_ray_data(&sig, &vals).unwrap().asymptotic, Some(false));
    let vals = vec![vec![C64::new(1.4, 0.0)], vec![C64::new(1.2, 0.0)], vec![C64::new(1.1, 0.0)]];
    let ex = extract_ray_data(&sig, &vals).unwrap();
    assert_eq!(ex.asymptotic, Some(true));
    assert!((ex.order - 1.0).abs() < 1e-12);
    assert!(extract_ray_data(&[10.0], &vals[..1]).is_err());
}

fn small_setup(mode: MeasurementMode, window: (f64, f64)) -> (ReconstructionSetup, NonlinearityField) {
    let coeff = Coefficients::new(1.0, 4.0, 1.0, 10.0).unwrap();
    let grid = Grid::rectangle(0.0, 0.9, 0.0, 0.9, 33, 33, 2.0, 100).unwrap();
    let geoms = ProbeGeometry::ring(grid.domain(), coeff.b(), 0.4, 2, 0.1).unwrap();
    let cutoff = (mode == MeasurementMode::BoundaryOnly).then(|| AmplitudeSpec::cutoff_for(&geoms[0]));
    let probe = AmplitudeSpec { mu: 1.0, profile: AngularProfile::Constant, cutoff };
    let s_range = (geoms[0].r_floor() + 0.1, geoms[0].r_floor() + 2.0);
    let design = RayDesign::within(1, 6, s_range).unwrap();
    let coarse = CoarseGrid::covering(&grid, 12, 12, 24).unwrap();
    let p = NonlinearityField::gaussian_bump(&grid, &GaussianBump { center: [0.45, 0.45], width: 0.15, amplitude: 1.0, window: Some(window) });
    let setup = ReconstructionSetup { coeff, grid, geoms, probe, sigmas: vec![4.0, 8.0], mode, design, coarse, inversion: InversionKind::ExactKernel };
    (setup, p)
}

#[test]
fn kernel_rows_reproduce_the_measured_pairings() {
    let (setup, p) = small_setup(MeasurementMode::WithFinalState, (0.2, 1.8));
    let prep = setup.prepare().unwrap();
    let src = measure_source(&setup, &prep, 0, &p).unwrap();
    let truth = setup.coarse.sample(|x, t| p_at(x, t, (0.2, 1.8)));
    let a = stack_kernels(&src.kernels, setup.coarse.len()).unwrap();
    let mut model = vec![0.0; a.nrows()];
    a.mul(&truth, &mut model);
    let data = stack_data(&src.pairings);
    let num: f64 = model.iter().zip(&data).map(|(m, d)| (m - d).powi(2)).sum::<f64>().sqrt();
    let den: f64 = data.iter().map(|d| d * d).sum::<f64>().sqrt();
    assert!(den > 0.0);
    assert!(num / den < 0.15, "kernel mismatch {}", num / den);
}

fn p_at(x: [f64; 2], t: f64, window: (f64, f64)) -> f64 {
    GaussianBump { center: [0.45, 0.45], width: 0.15, amplitude: 1.0, window: Some(window) }.eval(x, t)[0]
}

#[test]
fn zero_nonlinearity_reconstructs_zero() {
    let (setup, _) = small_setup(MeasurementMode::WithFinalState, (0.2, 1.8));
    let zero = NonlinearityField::zero(&setup.grid);
    let rec = reconstruct(&setup, &zero, &Regularization::default()).unwrap();
    assert!(rec.p.iter().all(|v| *v == 0.0));
    assert!(rec.extraction.estimates().iter().all(|v| *v == C64::new(0.0, 0.0)));
}

#[test]
fn boundary_only_mode_checks_support_and_windows() {
    let (setup, early) = small_setup(MeasurementMode::BoundaryOnly, (0.2, 1.8));
    assert!(matches!(setup.validate(Some(&early)), Err(Error::Support(_))));
    let cut = setup.probe.cutoff.unwrap();
    let (setup, late) = small_setup(MeasurementMode::BoundaryOnly, (cut.hi + 0.01, 1.9));
    setup.validate(Some(&late)).unwrap();
    let mut long = setup.clone();
    long.design = RayDesign::uniform(1, 6, (1.0, 3.0)).unwrap();
    assert!(matches!(long.validate(None), Err(Error::Support(_))));
    let mut bare = setup;
    bare.probe.cutoff = None;
    assert!(bare.validate(None).is_err());
}

#[test]
fn setup_rejects_a_single_sigma() {
    let (mut setup, _) = small_setup(MeasurementMode::WithFinalState, (0.2, 1.8));
    setup.sigmas = vec![8.0];
    assert!(matches!(setup.validate(None), Err(Error::Argument(_))));
}

#[test]
fn cutoff_probe_has_zero_initial_data() {
    let (setup, _) = small_setup(MeasurementMode::BoundaryOnly, (1.5, 1.9));
    let table = transport_table(&setup.probe, &setup.coeff, &setup.geoms, &setup.grid).unwrap();
    let amps = AmplitudeFields::compute(&setup.probe, &setup.geoms[0], &setup.coeff, &setup.grid, &table).unwrap();
    let probe = assemble_probe(8.0, 1.0, 1.0, &amps, &setup.geoms[0], &setup.coeff, &setup.grid).unwrap();
    for f in [&probe.induced_data.u0, &probe.induced_data.u1, &probe.induced_data.u2] {
        assert!(f.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn ray_forward_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0) {
        let coarse = CoarseGrid::new((0.0, 0.9), (0.0, 0.9), (0.0, 1.0), 5, 5, 5).unwrap();
        let grid = Grid::rectangle(0.0, 0.9, 0.0, 0.9, 9, 9, 1.0, 8).unwrap();
        let geoms = ProbeGeometry::ring(grid.domain(), 4.0, 0.4, 2, 0.3).unwrap();
        let design = RayDesign::uniform(2, 4, RayDesign::s_range(&geoms[0], (0.0, 1.0))).unwrap();
        let probe = AmplitudeSpec { mu: 1.0, profile: AngularProfile::Constant, cutoff: None };
        let sys = RayTransformSystem::assemble(&geoms, &design, &probe, 4.0, grid.domain(), coarse).unwrap();
        let u = coarse.sample(|x, t| (k * x[0]).sin() + t);
        let v = coarse.sample(|x, t| x[1] * t * k);
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let (fu, fv, fm) = (ray_forward(&u, &sys).unwrap(), ray_forward(&v, &sys).unwrap(), ray_forward(&mix, &sys).unwrap());
        for i in 0..fm.len() {
            prop_assert!((fm[i] - a * fu[i] - b * fv[i]).abs() <= 1e-10 * (1.0 + fm[i].abs()));
        }
    }

    #[test]
    fn window_weights_stay_inside_their_range(lo in 0.1f64..1.0, len in 0.2f64..2.0, count in 1usize..12) {
        let d = RayDesign::within(1, count, (lo, lo + len)).unwrap();
        for w in &d.windows {
            let (a, b) = w.support();
            prop_assert!(a >= lo - 1e-12 && b <= lo + len + 1e-12);
        }
    }
}
