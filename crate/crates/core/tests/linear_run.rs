use dampflow::diagnostics::{read_csv, series, write_csv, DiagnosticsRecord, Recorder};
use dampflow::dynamics::{run, IntegratorConfig, RunStatus, Scheme, State};
use dampflow::greens::apply_semigroup;
use dampflow::spectral::{CutoffProfile, Grid, RealField, Spectral};

fn bump_state(grid: Grid) -> State {
    let half = 0.5 * grid.length();
    let g = move |x: [f64; 3]| (-((x[0] - half).powi(2) + (x[1] - half).powi(2)) / 9.0).exp();
    let a = RealField::from_fn(grid, 1, |_, x| 0.05 * g(x));
    let u = RealField::from_fn(grid, 2, |c, x| if c == 0 { 0.02 * g(x) } else { -0.01 * g(x) });
    State::new(a, u, 0.0, 1.0).unwrap()
}

#[test]
fn linear_run_matches_semigroup_and_csv_round_trips() {
    let grid = Grid::new(2, 32, 40.0).unwrap();
    let sp = Spectral::new(grid);
    let s0 = bump_state(grid);
    let mut cfg = IntegratorConfig::new(Scheme::StrangExponential, 0.1, 2.0);
    cfg.linear_only = true;
    cfg.output_every = 5;

    let mut rec = Recorder::new(&sp, CutoffProfile::default()).unwrap();
    let out = run(&sp, &s0, &cfg, &mut rec).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    assert_eq!(out.steps, 20);

    let exact = apply_semigroup(2.0, &sp, &s0.to_spectral(&sp).unwrap()).unwrap();
    let got = out.state.to_spectral(&sp).unwrap();
    let scale = exact.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = exact.data().iter().zip(got.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * scale, "err {err:e}");

    let records = rec.records().to_vec();
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    assert_eq!(times.len(), 5);
    assert!((times[4] - 2.0).abs() < 1e-12);

    let mut buf = Vec::new();
    write_csv(&mut buf, &records).unwrap();
    let back = read_csv(&mut buf.as_slice()).unwrap();
    assert_eq!(back.len(), records.len());
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(a.values(), b.values());
    }

    // damping: per mode d/dt(|â|² + |û|²) = −2|û|², so both energies are non-increasing
    let energy = |r: &DiagnosticsRecord| (r.d_a[0].powi(2) + r.d_u[0].powi(2), r.d_a_low[0].powi(2) + r.d_u_low[0].powi(2));
    for w in records.windows(2) {
        let (e0, l0) = energy(&w[0]);
        let (e1, l1) = energy(&w[1]);
        assert!(e1 <= e0 * (1.0 + 1e-12) && l1 <= l0 * (1.0 + 1e-12), "t = {}", w[1].t);
    }
    assert_eq!(series(&records, "d0_u").unwrap().len(), records.len());
}

#[test]
fn nonlinear_run_is_reproducible() {
    let grid = Grid::new(2, 32, 40.0).unwrap();
    let sp = Spectral::new(grid);
    let s0 = bump_state(grid);
    let cfg = IntegratorConfig::new(Scheme::Rk4, 0.05, 1.0);
    let first = run(&sp, &s0, &cfg, &mut |_: &State, _: &_| Ok(())).unwrap();
    let second = run(&sp, &s0, &cfg, &mut |_: &State, _: &_| Ok(())).unwrap();
    assert_eq!(first.state.a().data(), second.state.a().data());
    assert_eq!(first.state.u().data(), second.state.u().data());
}
