use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn centered(grid: &Grid, x: [f64; 3]) -> [f64; 3] {
    let c = grid.length() / 2.0;
    [x[0] - c, x[1] - c, x[2] - c]
}

fn gaussian_1d(n: usize, length: f64) -> (Spectral, RealField) {
    let grid = Grid::new(1, n, length).unwrap();
    let f = RealField::from_fn(grid, 1, |_, x| {
        let y = centered(&grid, x)[0];
        (-y * y).exp()
    });
    (Spectral::new(grid), f)
}

#[test]
fn constant_has_only_mean_mode() {
    for dim in 1..=3 {
        let grid = Grid::new(dim, 8, 3.0).unwrap();
        let sp = Spectral::new(grid);
        let f = RealField::from_fn(grid, 1, |_, _| 3.0);
        let spec = sp.forward(&f).unwrap();
        for (i, v) in spec.data().iter().enumerate() {
            let expected = if i == 0 { 3.0 * grid.volume() } else { 0.0 };
            assert_abs_diff_eq!(v.re, expected, epsilon = 1e-12 * grid.volume());
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12 * grid.volume());
        }
    }
}

#[test]
fn cosine_has_two_modes() {
    let grid = Grid::new(3, 8, 2.0).unwrap();
    let sp = Spectral::new(grid);
    let f = RealField::from_fn(grid, 1, |_, x| (2.0 * PI * x[0] / 2.0).cos());
    let spec = sp.forward(&f).unwrap();
    let vol = grid.volume();
    for (i, v) in spec.data().iter().enumerate() {
        let k = grid.wavevector(i);
        let expected = if k == [0.5, 0.0, 0.0] || k == [-0.5, 0.0, 0.0] { vol / 2.0 } else { 0.0 };
        assert_abs_diff_eq!(v.re, expected, epsilon = 1e-13);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
    }
}

#[test]
fn gaussian_zero_mode_matches_integral() {
    let (sp, f) = gaussian_1d(256, 40.0);
    let spec = sp.forward(&f).unwrap();
    assert_abs_diff_eq!(spec.data()[0].re, PI.sqrt(), epsilon = 1e-10);
}

#[test]
fn forward_rejects_non_finite() {
    let grid = Grid::new(2, 4, 1.0).unwrap();
    let mut f = RealField::zeros(grid, 2);
    f.component_mut(1)[5] = f64::NAN;
    let err = Spectral::new(grid).forward(&f).unwrap_err();
    assert_eq!(err, Error::NonFinite { component: 1, index: 5 });
}

#[test]
fn inverse_rejects_asymmetric() {
    let grid = Grid::new(1, 8, 1.0).unwrap();
    let mut spec = SpectralField::zeros(grid, 1);
    spec.set_mode(0, [1, 0, 0], Complex64::new(1.0, 0.0));
    assert!(matches!(Spectral::new(grid).inverse(&spec), Err(Error::NotHermitian { .. })));
}

#[test]
fn zero_spectrum_inverts_to_zero() {
    let grid = Grid::new(2, 8, 1.0).unwrap();
    let f = Spectral::new(grid).inverse(&SpectralField::zeros(grid, 3)).unwrap();
    assert!(f.data().iter().all(|&v| v == 0.0));
}

#[test]
fn derivative_examples() {
    let grid = Grid::new(2, 16, 3.0).unwrap();
    let sp = Spectral::new(grid);
    let c = sp.forward(&RealField::from_fn(grid, 1, |_, _| 2.5)).unwrap();
    let dc = sp.inverse(&sp.derivative(&c, [1, 1, 0]).unwrap()).unwrap();
    assert!(dc.max_abs() < 1e-12);

    let w = 2.0 * PI / 3.0;
    let s = sp.forward(&RealField::from_fn(grid, 1, |_, x| (w * x[0]).sin())).unwrap();
    let ds = sp.inverse(&sp.derivative(&s, [1, 0, 0]).unwrap()).unwrap();
    for i in 0..grid.points() {
        let x = grid.position(i);
        assert_abs_diff_eq!(ds.data()[i], w * (w * x[0]).cos(), epsilon = 1e-12);
    }
}

#[test]
fn laplacian_of_gaussian_at_center() {
    let (sp, f) = gaussian_1d(256, 40.0);
    let spec = sp.forward(&f).unwrap();
    let lap = sp.inverse(&sp.derivative(&spec, [2, 0, 0]).unwrap()).unwrap();
    // f'' = (4x² - 2) e^{-x²}; center sample is index N/2
    assert_abs_diff_eq!(lap.data()[128], -2.0, epsilon = 1e-8);
}

#[test]
fn derivative_order_limit() {
    let grid = Grid::new(3, 4, 1.0).unwrap();
    let sp = Spectral::new(grid);
    let z = SpectralField::zeros(grid, 1);
    assert!(sp.derivative(&z, [2, 2, 0]).is_ok());
    assert_eq!(sp.derivative(&z, [2, 2, 1]).unwrap_err(), Error::DerivativeOrder(5));
    let line = Spectral::new(Grid::new(1, 4, 1.0).unwrap());
    assert!(line.derivative(&SpectralField::zeros(*line.grid(), 1), [0, 1, 0]).is_err());
}

#[test]
fn odd_derivative_stays_hermitian() {
    let grid = Grid::new(2, 8, 1.0).unwrap();
    let sp = Spectral::new(grid);
    let f = RealField::from_fn(grid, 1, |_, x| (x[0] * 7.0).sin() + (x[1] * 13.0 + x[0]).cos() + x[0] * x[1]);
    let spec = sp.forward(&f).unwrap();
    let d = sp.derivative(&spec, [1, 2, 0]).unwrap();
    assert_eq!(d.hermitian_defect().0, 0.0);
    assert!(sp.inverse(&d).is_ok());
}

fn single_mode(grid: Grid, j: i64) -> SpectralField {
    let mut s = SpectralField::zeros(grid, 1);
    s.set_mode(0, [j, 0, 0], Complex64::new(1.5, 0.0));
    s.set_mode(0, [-j, 0, 0], Complex64::new(1.5, 0.0));
    s
}

#[test]
fn projector_examples() {
    let cutoff = CutoffProfile::default();
    let sharp = CutoffProfile::sharp(0.25).unwrap();

    // |ξ| = r0/2
    let g = Grid::new(1, 64, 2.0 * PI / 0.125).unwrap();
    let sp = Spectral::new(g);
    let s = single_mode(g, 1);
    assert_eq!(sp.project(&s, &sharp, Part::Low).unwrap(), s);
    assert!(sp.project(&s, &sharp, Part::High).unwrap().max_abs() == 0.0);

    // |ξ| = 2 R0
    let g = Grid::new(1, 64, 2.0 * PI / 0.09).unwrap();
    let sp = Spectral::new(g);
    let s = single_mode(g, 10);
    assert!(sp.project(&s, &cutoff, Part::Low).unwrap().max_abs() == 0.0);
    assert_eq!(sp.project(&s, &cutoff, Part::High).unwrap(), s);

    // raised-cosine midpoint
    let g = Grid::new(1, 64, 2.0 * PI / 0.035).unwrap();
    let sp = Spectral::new(g);
    let s = single_mode(g, 10);
    let low = sp.project(&s, &cutoff, Part::Low).unwrap();
    assert_abs_diff_eq!(low.mode(0, [10, 0, 0]).re, 0.75, epsilon = 1e-12);
}

#[test]
fn unresolved_cutoff_rejected() {
    let g = Grid::new(1, 4, 40.0).unwrap();
    let sp = Spectral::new(g);
    let err = sp.project(&SpectralField::zeros(g, 1), &CutoffProfile::default(), Part::Low);
    assert!(matches!(err, Err(Error::UnresolvedCutoff { .. })));
}

#[test]
fn sobolev_examples() {
    let grid = Grid::new(3, 8, 1.0).unwrap();
    let sp = Spectral::new(grid);
    for k in 0..=3 {
        assert_eq!(sp.sobolev_norm(&SpectralField::zeros(grid, 3), k).unwrap(), 0.0);
    }
    assert!(sp.sobolev_norm(&SpectralField::zeros(grid, 1), 4).is_err());

    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let sp = Spectral::new(grid);
    let s = sp.forward(&RealField::from_fn(grid, 1, |_, x| x[0].sin())).unwrap();
    let n0 = sp.sobolev_norm(&s, 0).unwrap();
    let n1 = sp.sobolev_norm(&s, 1).unwrap();
    assert_abs_diff_eq!(n0, n1, epsilon = 1e-14);
    assert_abs_diff_eq!(n0, PI.sqrt(), epsilon = 1e-13);
    assert_abs_diff_eq!(sp.h_norm(&s, 1).unwrap(), (2.0 * PI).sqrt(), epsilon = 1e-13);
}

/// Rectangle-rule value of `∫ e^{-2|x|²}` on the lattice by Poisson
/// summation over aliased images: `Π_axis Σ_m √(π/2) e^{-π² m² / (2h²)}`.
fn gaussian_l2_with_images(h: f64) -> f64 {
    let per_axis: f64 = (-3..=3_i32)
        .map(|m| (PI / 2.0).sqrt() * (-(PI * PI) * (m * m) as f64 / (2.0 * h * h)).exp())
        .sum();
    per_axis.powi(3).sqrt()
}

#[test]
fn gaussian_l2_norm_3d() {
    let grid = Grid::new(3, 64, 40.0).unwrap();
    let sp = Spectral::new(grid);
    let f = RealField::from_fn(grid, 1, |_, x| {
        let y = centered(&grid, x);
        (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])).exp()
    });
    let norm = sp.sobolev_norm(&sp.forward(&f).unwrap(), 0).unwrap();
    // the lattice sum differs from the continuum integral by its aliased images
    assert_abs_diff_eq!(norm, gaussian_l2_with_images(grid.spacing()), epsilon = 1e-10);
    assert_abs_diff_eq!(norm, (PI / 2.0).powf(0.75), epsilon = 2e-5);
}

#[test]
fn linf_gradient_examples() {
    let grid = Grid::new(2, 16, 3.0).unwrap();
    let sp = Spectral::new(grid);
    assert_eq!(sp.linf_gradient(&RealField::from_fn(grid, 1, |_, _| 4.0)).unwrap(), 0.0);
    let w = 2.0 * PI / 3.0;
    let g = sp.linf_gradient(&RealField::from_fn(grid, 1, |_, x| (w * x[0]).sin())).unwrap();
    assert_abs_diff_eq!(g, w, epsilon = 1e-10);
}

fn random_field(grid: Grid, comps: usize, seed: u64) -> RealField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let data = (0..comps * grid.points()).map(|_| rng.random_range(-1.0..1.0)).collect();
    RealField::new(grid, comps, data).unwrap()
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3, 2u32..=4, 1.0f64..60.0).prop_map(|(d, p, l)| {
        let n = if d == 3 { 1 << p.min(3) } else { 1 << (p + 1) };
        Grid::new(d, n, l).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_and_parseval(grid in grid_strategy(), comps in 1usize..4, seed in any::<u64>()) {
        let sp = Spectral::new(grid);
        let f = random_field(grid, comps, seed);
        let spec = sp.forward(&f).unwrap();
        prop_assert_eq!(spec.hermitian_defect().0, 0.0);
        let back = sp.inverse(&spec).unwrap();
        let scale = f.max_abs();
        for (a, b) in f.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        let quad = f.l2_quadrature();
        let pars = sp.sobolev_norm(&spec, 0).unwrap();
        prop_assert!((quad - pars).abs() <= 1e-10 * quad);
    }

    #[test]
    fn partition_of_unity_is_exact(seed in any::<u64>(), r0 in 0.05f64..0.49, width in 0.01f64..2.0, sharp in any::<bool>()) {
        let grid = Grid::new(2, 32, 60.0).unwrap();
        let sp = Spectral::new(grid);
        let cutoff = if sharp {
            CutoffProfile::sharp(r0).unwrap()
        } else {
            CutoffProfile::new(r0, (r0 + width).min(1.6), CutoffKind::Smooth).unwrap()
        };
        let spec = sp.forward(&random_field(grid, 2, seed)).unwrap();
        let (low, high) = sp.split(&spec, &cutoff).unwrap();
        for ((l, h), f) in low.data().iter().zip(high.data()).zip(spec.data()) {
            prop_assert_eq!(l + h, *f);
        }
        prop_assert_eq!(sp.project(&spec, &cutoff, Part::Low).unwrap(), low.clone());
        if sharp {
            prop_assert_eq!(sp.project(&low, &cutoff, Part::Low).unwrap(), low);
        }
    }

    #[test]
    fn low_high_frequency_inequalities(seed in any::<u64>(), n in 0usize..=3, gap in 0usize..=3) {
        let m = (n + gap).min(3);
        let grid = Grid::new(3, 16, 80.0).unwrap();
        let sp = Spectral::new(grid);
        let cutoff = CutoffProfile::default();
        let spec = sp.forward(&random_field(grid, 1, seed)).unwrap();
        let (low, high) = sp.split(&spec, &cutoff).unwrap();
        let (ln, lm) = (sp.sobolev_norm(&low, n).unwrap(), sp.sobolev_norm(&low, m).unwrap());
        let (hn, hm) = (sp.sobolev_norm(&high, n).unwrap(), sp.sobolev_norm(&high, m).unwrap());
        let p = (m - n) as i32;
        prop_assert!(lm <= cutoff.r_big().powi(p) * ln * (1.0 + 1e-12));
        prop_assert!(hn <= cutoff.r0().powi(-p) * hm * (1.0 + 1e-12));
        for k in 0..=3 {
            let full = sp.sobolev_norm(&spec, k).unwrap();
            prop_assert!(sp.sobolev_norm(&low, k).unwrap() <= full + 1e-12);
            prop_assert!(sp.sobolev_norm(&high, k).unwrap() <= full + 1e-12);
        }
    }

    #[test]
    fn derivative_commutes_with_sharp_projection(seed in any::<u64>(), a in 0usize..=2, b in 0usize..=2) {
        let grid = Grid::new(2, 16, 50.0).unwrap();
        let sp = Spectral::new(grid);
        let cutoff = CutoffProfile::sharp(0.3).unwrap();
        let spec = sp.forward(&random_field(grid, 1, seed)).unwrap();
        let one = sp.project(&sp.derivative(&spec, [a, b, 0]).unwrap(), &cutoff, Part::Low).unwrap();
        let two = sp.derivative(&sp.project(&spec, &cutoff, Part::Low).unwrap(), [a, b, 0]).unwrap();
        prop_assert_eq!(one, two);
    }
}

#[test]
fn derivative_commutes_with_smooth_projection() {
    let grid = Grid::new(2, 16, 50.0).unwrap();
    let sp = Spectral::new(grid);
    let cutoff = CutoffProfile::default();
    let spec = sp.forward(&random_field(grid, 1, 7)).unwrap();
    let one = sp.project(&sp.derivative(&spec, [1, 1, 0]).unwrap(), &cutoff, Part::High).unwrap();
    let two = sp.derivative(&sp.project(&spec, &cutoff, Part::High).unwrap(), [1, 1, 0]).unwrap();
    let scale = one.max_abs();
    for (x, y) in one.data().iter().zip(two.data()) {
        assert!((x - y).norm() <= 1e-15 * scale);
    }
}

#[test]
fn reductions_are_repeatable() {
    let grid = Grid::new(3, 16, 10.0).unwrap();
    let sp = Spectral::new(grid);
    let spec = sp.forward(&random_field(grid, 3, 11)).unwrap();
    let first = sp.sobolev_norms(&spec);
    for _ in 0..3 {
        assert_eq!(sp.sobolev_norms(&spec), first);
    }
}
