use mimo_capacity::cf::CapacityCf;
use mimo_capacity::cumulants::cumulants_of;
use mimo_capacity::distribution::*;
use mimo_capacity::model::*;
use mimo_capacity::Error;
use proptest::prelude::*;

fn normal_cdf(x: f64, m: f64, v: f64) -> f64 {
    0.5 * libm::erfc(-(x - m) / (2.0 * v).sqrt())
}

fn correlated(nt: usize, nr: usize, rt: f64, rr: f64, snr: f64) -> CapacityCf {
    let c = ChannelConfig::new(nt, nr, snr).unwrap();
    let p = exponential_pair(&c, rt, rr, &ValidationOptions::default()).unwrap();
    CapacityCf::correlated(&c, &p).unwrap()
}

fn auto_grid(cf: &CapacityCf) -> DistributionGrid {
    let k = cumulants_of(cf, 2).unwrap();
    invert_cf(cf, &InversionSpec::auto(k.kappa[0], k.kappa[1]), &Sequential).unwrap()
}

#[test]
fn gaussian_is_recovered() {
    let g = GaussianCf { mean: 3.0, variance: 0.8 };
    let grid = invert_cf(&g, &InversionSpec::auto(3.0, 0.8), &Sequential).unwrap();
    let (m, v) = moments_from_grid(&grid);
    assert!((m - 3.0).abs() < 1e-6 && (v - 0.8).abs() < 1e-6, "{m} {v}");
    for (&x, &f) in grid.capacity_axis.iter().zip(&grid.cdf).step_by(97) {
        assert!((f - normal_cdf(x, 3.0, 0.8)).abs() < 1e-7, "x={x}");
        assert!((grid.cdf_at(x) - normal_cdf(x, 3.0, 0.8)).abs() < 1e-7, "x={x}");
    }
    let q = grid.outage_capacity(0.1).unwrap();
    assert!((normal_cdf(q, 3.0, 0.8) - 0.1).abs() < 1e-7);
    let (em, ev) = estimate_mean_variance(&g, 1e-3).unwrap();
    assert!((em - 3.0).abs() < 1e-9 && (ev - 0.8).abs() < 1e-5);
}

#[test]
fn grid_invariants_hold_for_capacity() {
    let mut cases = vec![correlated(3, 2, 0.3, 0.6, 10.0), correlated(4, 4, 0.5, 0.5, 20.0)];
    cases.extend((2..=5).map(|n| correlated(n, n, 0.5, 0.7, 15.0)));
    for cf in cases {
        let grid = auto_grid(&cf);
        let mass = grid_mass(&grid);
        assert!((0.99..=1.01).contains(&mass), "mass {mass}");
        assert!(grid.cdf.windows(2).all(|w| w[0] <= w[1]));
        assert!(*grid.cdf.last().unwrap() >= 0.995);
        assert!(grid.pdf.iter().all(|&f| f >= 0.0));
        assert!(grid.tail_mass < 1e-6);
        assert!(grid.ripple < 1e-4, "ripple {}", grid.ripple);
        let k = cumulants_of(&cf, 2).unwrap();
        let (m, v) = moments_from_grid(&grid);
        assert!((m - k.kappa[0]).abs() < 1e-5 && (v - k.kappa[1]).abs() < 1e-4);
    }
}

#[test]
fn series_and_pointwise_cdfs_agree() {
    let cf = correlated(3, 3, 0.5, 0.7, 15.0);
    let grid = auto_grid(&cf);
    let mut gp_spec = grid.spec;
    gp_spec.method = InversionMethod::GilPelaez;
    let gp = invert_cf(&cf, &gp_spec, &Sequential).unwrap();
    let n = grid.capacity_axis.len();
    for i in (0..20).map(|j| j * (n - 1) / 19) {
        assert!((grid.cdf[i] - gp.cdf[i]).abs() < 2e-4, "x={}", grid.capacity_axis[i]);
    }
}

#[test]
fn quantiles_invert_the_cdf() {
    let cf = correlated(2, 3, 0.4, 0.6, 12.0);
    let grid = auto_grid(&cf);
    let mut prev = f64::NEG_INFINITY;
    for q in [0.001, 0.01, 0.1, 0.5, 0.9, 0.99] {
        let x = grid.outage_capacity(q).unwrap();
        assert!((grid.cdf_at(x) - q).abs() < 1e-4, "q={q}");
        assert!(x > prev);
        prev = x;
    }
    assert!(matches!(grid.outage_capacity(0.0), Err(Error::Domain(_))));
    assert!(matches!(grid.outage_capacity(1.0), Err(Error::Domain(_))));

    // a window that cuts off ~1e-3 of each tail cannot answer q = 1e-5
    let k = cumulants_of(&cf, 2).unwrap();
    let sd = k.kappa[1].sqrt();
    let spec = InversionSpec { c_min: k.kappa[0] - 3.2 * sd, c_max: k.kappa[0] + 3.2 * sd, max_tail_mass: 0.01, ..InversionSpec::auto(k.kappa[0], k.kappa[1]) };
    let clipped = invert_cf(&cf, &spec, &Sequential).unwrap();
    assert!(matches!(clipped.outage_capacity(1e-5), Err(Error::Range { .. })));
    assert!(matches!(clipped.outage_capacity(1.0 - 1e-5), Err(Error::Range { .. })));
    assert!(clipped.outage_capacity(0.1).is_ok());
}

#[test]
fn refining_the_grid_does_not_move_the_cdf() {
    let cf = correlated(3, 3, 0.5, 0.7, 15.0);
    let coarse = auto_grid(&cf);
    let mut spec = coarse.spec;
    spec.n_points *= 2;
    let fine = invert_cf(&cf, &spec, &Sequential).unwrap();
    for i in (0..coarse.cdf.len()).step_by(64) {
        assert!((coarse.cdf[i] - fine.cdf[2 * i]).abs() < 1e-6);
    }
}

#[test]
fn correlated_three_by_three_rarely_falls_below_four() {
    let cf = correlated(3, 3, 0.5, 0.7, 15.0);
    assert!(auto_grid(&cf).cdf_at(4.0) < 0.05);
}

#[test]
fn inversion_failures_are_reported() {
    let cf = correlated(2, 2, 0.5, 0.7, 15.0);
    let k = cumulants_of(&cf, 2).unwrap();
    let base = InversionSpec::auto(k.kappa[0], k.kappa[1]);

    let short = InversionSpec { omega_max: Some(0.5), ..base };
    assert!(matches!(invert_cf(&cf, &short, &Sequential), Err(Error::Truncation { .. })));

    let sd = k.kappa[1].sqrt();
    let narrow = InversionSpec { c_min: k.kappa[0] - sd, c_max: k.kappa[0] + sd, ..base };
    assert!(matches!(invert_cf(&cf, &narrow, &Sequential), Err(Error::Bracketing { .. })));

    for bad in [
        InversionSpec { n_points: 1000, ..base },
        InversionSpec { n_points: 128, ..base },
        InversionSpec { c_max: base.c_min, ..base },
        InversionSpec { omega_max: Some(-1.0), ..base },
    ] {
        assert!(matches!(invert_cf(&cf, &bad, &Sequential), Err(Error::Domain(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_mass_and_monotonicity(mean in -5.0f64..20.0, var in 0.05f64..10.0) {
        let g = GaussianCf { mean, variance: var };
        let grid = invert_cf(&g, &InversionSpec::auto(mean, var), &Sequential).unwrap();
        prop_assert!((grid_mass(&grid) - 1.0).abs() < 1e-6);
        prop_assert!(grid.cdf.windows(2).all(|w| w[0] <= w[1]));
        let med = grid.outage_capacity(0.5).unwrap();
        prop_assert!((med - mean).abs() < 1e-5 * var.sqrt().max(1.0));
    }
}
