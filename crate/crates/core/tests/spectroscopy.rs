use std::f64::consts::TAU;

use qspec_core::filters::default_comb_order;
use qspec_core::noise::NoiseSource;
use qspec_core::spectroscopy::{
    jitter_smear, model_rates, omega_grid, peak_localization, reconstruct, scan, CombFamily, PeakLocalization,
    ScanMode, TauRule,
};
use qspec_core::spectrum::{SpectrumComponent, SpectrumModel};

const MEASUREMENT: CombFamily = CombFamily::Measurement {
    tau: TauRule::FractionOfPeriod(0.01),
};

fn line(weight: f64, center: f64) -> SpectrumModel {
    let mut components = vec![SpectrumComponent::White { level: 0.5 }];
    if weight > 0.0 {
        components.push(SpectrumComponent::NarrowPeak {
            weight,
            center,
            width: 1e-4,
        });
    }
    SpectrumModel::new(components).unwrap()
}

fn analytic(
    family: CombFamily,
    n: usize,
    s: &SpectrumModel,
    grid: &[f64],
) -> qspec_core::spectroscopy::SpectroscopyScan {
    scan(
        family,
        n,
        &NoiseSource::spectrum(s.clone(), 1),
        grid,
        ScanMode::Analytic,
    )
    .unwrap()
}

#[test]
fn white_floor_measurement_scan() {
    let level = 50.0;
    let grid = omega_grid(100.0, 500.0, 9).unwrap();
    let sc = analytic(MEASUREMENT, 16, &SpectrumModel::white(level).unwrap(), &grid);
    for p in &sc.points {
        let want = p.total_time * level * p.tau / (2.0 * (p.tau + p.dt));
        assert!(
            (p.chi - want).abs() < 0.1 * want,
            "ω_p = {}: {} vs {want}",
            p.omega_p,
            p.chi
        );
    }
}

#[test]
fn white_spectrum_reconstruction() {
    let s = SpectrumModel::white(50.0).unwrap();
    let grid = omega_grid(1.0, 40.0, 40).unwrap();
    for family in [CombFamily::Dd, MEASUREMENT] {
        let rates = model_rates(family, &s, &grid, 2001).unwrap();
        let m0 = default_comb_order(rates[0].tau, rates[0].dt);
        let r = reconstruct(&rates, m0).unwrap();
        for (w, est) in r.frequencies.iter().zip(&r.s_est) {
            assert!((est - 50.0).abs() < 2.5, "{} at ω = {w}: {est}", family.name());
        }
    }
}

#[test]
fn narrow_line_is_localized_within_the_comb_resolution() {
    let grid = omega_grid(40.0, 60.0, 401).unwrap();
    let sc = analytic(MEASUREMENT, 16, &line(1e5, 50.0), &grid);
    let t = 16.0 * TAU / 50.0;
    match peak_localization(&sc, None) {
        PeakLocalization::Localized { omega_hat, resolution } => {
            assert!((omega_hat - 50.0).abs() <= TAU / t, "{omega_hat}");
            assert!(resolution > 0.0 && resolution < 4.0 * TAU / t, "{resolution}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn weaker_lines_localize_worse() {
    let grid = omega_grid(40.0, 60.0, 401).unwrap();
    let res = |w: f64| peak_localization(&analytic(MEASUREMENT, 16, &line(w, 50.0), &grid), None);
    let strong = res(1e5).resolution().unwrap();
    let weak = res(5e2).resolution();
    assert!(weak.is_none_or(|r| r > strong), "{weak:?} vs {strong}");
    assert!(res(0.0).omega_hat().is_none());
}

#[test]
fn doubling_the_comb_halves_the_linewidth() {
    let grid = omega_grid(45.0, 55.0, 801).unwrap();
    let s = line(1e5, 50.0);
    let fwhm = |n| {
        peak_localization(&analytic(CombFamily::Dd, n, &s, &grid), None)
            .resolution()
            .unwrap()
    };
    let ratio = fwhm(16) / fwhm(32);
    assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
}

#[test]
fn clock_jitter_blurs_the_line() {
    let grid = omega_grid(44.0, 56.0, 121).unwrap();
    let s = line(1e5, 50.0);
    let sharp = analytic(MEASUREMENT, 16, &s, &grid);
    let blurred = jitter_smear(&sharp, &s, 2e-3, 16).unwrap();
    let top = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    assert!(top(blurred.chi()) <= top(sharp.chi()) * (1.0 + 1e-9));
    let a = peak_localization(&sharp, None).resolution().unwrap();
    let b = peak_localization(&blurred, None).resolution().unwrap();
    assert!(b > a, "{b} vs {a}");
}

#[test]
fn monte_carlo_scan_tracks_the_analytic_one() {
    let s = SpectrumModel::lorentzian(1.0, 0.2).unwrap();
    let grid = omega_grid(2.0, 20.0, 4).unwrap();
    let exact = analytic(CombFamily::Dd, 4, &s, &grid);
    let mc = scan(
        CombFamily::Dd,
        4,
        &NoiseSource::ou(1.0, 0.2),
        &grid,
        ScanMode::MonteCarlo {
            n_traj: 20_000,
            seed: 9,
        },
    )
    .unwrap();
    for (a, m) in exact.points.iter().zip(&mc.points) {
        assert!(m.chi.is_finite());
        assert!(
            (a.chi - m.chi).abs() < 3.0 * m.chi_error + 0.01 * a.chi,
            "ω_p = {}: {} vs {}",
            a.omega_p,
            m.chi,
            a.chi
        );
    }
}
