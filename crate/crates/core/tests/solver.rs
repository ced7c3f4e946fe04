use std::f64::consts::PI;

use cascade_core::solver::io::{read_series_json, read_snapshot, write_series_json, SeriesRecorder, SnapshotWriter};
use cascade_core::solver::*;
use cascade_core::spectral::{divergence_residual, inner, l2_norm, Fft3, PhysicalVector, VectorField};
use cascade_core::Grid;

fn cfg(n: usize, nu: f64) -> SimulationConfig {
    SimulationConfig {
        n,
        l: 2.0 * PI,
        nu,
        dt: None,
        cfl: 0.4,
        dt_max: None,
        horizon: 1.0,
        spin_up: 0.0,
        spin_up_max: None,
        cadence: 0.1,
        forcing: None,
        initial: InitialCondition::Zero,
        nonlinear_form: NonlinearFormConfig::Rotational,
    }
}

fn diff_norm(a: &VectorField, b: &VectorField) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b).unwrap();
    l2_norm(&d)
}

#[test]
fn single_mode_decays_at_the_stokes_rate() {
    let mut c = cfg(16, 0.07);
    c.initial = InitialCondition::TaylorGreen { amplitude: 1.3 };
    let mut sim = Simulation::from_config(&c).unwrap();
    let u0 = sim.velocity().clone();
    let t = 1.7;
    sim.advance(t).unwrap();
    let kappa_sq = 2.0;
    let want = u0.scaled((-c.nu * kappa_sq * t).exp());
    assert!(diff_norm(sim.velocity(), &want) <= 1e-10 * l2_norm(&want));
}

#[test]
fn manufactured_solution_is_reproduced() {
    let mut c = cfg(32, 0.05);
    c.dt = Some(2e-3);
    let g = c.grid().unwrap();
    let fft = Fft3::new(g);
    let ms = ManufacturedSolution::new(g, c.nu, 1.0, 0.6, 1.5, &fft).unwrap();
    let u0 = ms.velocity(0.0);
    let eddy = g.r0() / (inner(&u0, &u0) / g.volume()).sqrt();
    let mut sim = Simulation::with_forcing(&c, Forcing::Manufactured(ms.clone()), u0).unwrap();
    sim.advance(eddy).unwrap();
    let want = ms.velocity(eddy);
    let err = diff_norm(sim.velocity(), &want) / l2_norm(&want);
    assert!(err <= 1e-6, "relative error {err}");
}

#[test]
fn energy_balance_of_a_forced_run() {
    let mut c = cfg(16, 0.05);
    c.forcing = Some(ForcingConfig {
        k_f: 1.0,
        shell: ShellKind::Band,
        target: ForceTarget::Norm(2.0),
        seed: 2,
    });
    c.initial = InitialCondition::Random {
        rms: 0.5,
        k_lo: 1.0,
        k_hi: 3.0,
        seed: 9,
    };
    c.dt = Some(5e-3);
    c.horizon = 2.0;
    let mut sim = Simulation::from_config(&c).unwrap();
    let summary = sim.run(&mut NullSink).unwrap();
    let b = &summary.budget;
    // d/dt ||u||^2/2 = (f, u) - nu ||grad u||^2, integrated by trapezoid.
    let mut rhs = 0.0;
    for w in b.windows(2) {
        let h = w[1].t - w[0].t;
        let g = |r: &BudgetRow| r.force_work - c.nu * r.grad_sq;
        rhs += 0.5 * h * (g(&w[0]) + g(&w[1]));
    }
    let lhs = 0.5 * (b[b.len() - 1].u_sq - b[0].u_sq);
    let scale = b.iter().map(|r| 0.5 * r.u_sq).fold(0.0, f64::max);
    assert!((lhs - rhs).abs() <= 1e-4 * scale, "{lhs} vs {rhs}");
    assert!(summary.max_divergence < 1e-10);
    assert_eq!(summary.snapshots, c.snapshot_count());
}

#[test]
fn nonlinear_forms_agree() {
    let mut c = cfg(16, 0.05);
    c.initial = InitialCondition::Random {
        rms: 1.0,
        k_lo: 1.0,
        k_hi: 4.0,
        seed: 1,
    };
    c.dt = Some(4e-3);
    let mut a = Simulation::from_config(&c).unwrap();
    c.nonlinear_form = NonlinearFormConfig::Convective;
    let mut b = Simulation::from_config(&c).unwrap();
    a.advance(0.2).unwrap();
    b.advance(0.2).unwrap();
    // Both forms differ only by a gradient, which the projection removes.
    assert!(diff_norm(a.velocity(), b.velocity()) <= 1e-8 * l2_norm(a.velocity()));
}

#[test]
fn unforced_energy_decreases_monotonically() {
    let mut c = cfg(16, 0.02);
    c.initial = InitialCondition::Random {
        rms: 1.0,
        k_lo: 1.0,
        k_hi: 5.0,
        seed: 4,
    };
    c.horizon = 1.0;
    let mut rec = SeriesRecorder::default();
    let summary = Simulation::from_config(&c).unwrap().run(&mut rec).unwrap();
    assert!(summary.attractor.is_none());
    for w in rec.rows.windows(2) {
        assert!(w[1].u_sq <= w[0].u_sq * (1.0 + 1e-12));
        assert!(w[1].trilinear.abs() <= 1e-10 * w[0].grad_sq.max(1.0));
    }
}

#[test]
fn snapshots_and_series_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(8, 0.1);
    c.initial = InitialCondition::TaylorGreen { amplitude: 1.0 };
    c.horizon = 0.2;
    let mut sim = Simulation::from_config(&c).unwrap();
    let mut w = SnapshotWriter::new(dir.path(), c.nu).unwrap();
    let mut rec = SeriesRecorder::default();
    let mut both: Vec<Box<dyn SnapshotSink>> = vec![Box::new(&mut w), Box::new(&mut rec)];
    sim.run(&mut both).unwrap();
    drop(both);
    assert_eq!(w.written.len(), c.snapshot_count());
    let last = read_snapshot(w.written.last().unwrap()).unwrap();
    let fft = Fft3::new(c.grid().unwrap());
    let (u, _) = last.spectral(&fft).unwrap();
    assert!(diff_norm(&u, sim.velocity()) <= 1e-12 * l2_norm(&u));
    let path = dir.path().join("series.json");
    write_series_json(&path, &rec.rows).unwrap();
    assert_eq!(read_series_json(&path).unwrap(), rec.rows);
}

#[test]
fn force_targets_are_met() {
    let g = Grid::new(16, 2.0 * PI).unwrap();
    let nu = 0.03;
    let f = make_force(g, 2.0, ShellKind::Band, ForceTarget::Norm(3.5), nu, 1).unwrap();
    assert!((f.norms.norm - 3.5).abs() < 1e-12);
    let gr = make_force(g, 2.0, ShellKind::Band, ForceTarget::Grashof(500.0), nu, 1).unwrap();
    assert!((gr.norms.grashof(nu, g.r0()) - 500.0).abs() < 1e-9);
    assert!(divergence_residual(&f.f) < 1e-12);
    assert!(make_force(g, 6.0, ShellKind::Band, ForceTarget::Norm(1.0), nu, 1).is_err());
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut c = cfg(16, 0.1);
    c.nu = 0.0;
    assert!(c.validate().is_err());
    let mut c = cfg(16, 0.1);
    c.cadence = -1.0;
    assert!(c.validate().is_err());
    let c = cfg(16, 0.1);
    assert!(c.validate_for_statistics().is_err());
    let g = c.grid().unwrap();
    let bad = VectorField::from_physical(
        &PhysicalVector::from_fn(g, |x| [x[0].sin(), 0.0, 0.0]),
        &Fft3::new(g),
    )
    .unwrap();
    assert!(Simulation::with_forcing(&c, Forcing::None, bad).is_err());
}
