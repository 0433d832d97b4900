//! Decoherence under Gaussian noise: `g = e^{iΩΣs_kτ_k} e^{−χ}` with
//! `χ = ∫₀^∞ S(ω) |f̃(ω)|² dω/2π`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::filters::{
    build_filter, comb_weight, filter_fourier, filter_power, MeasurementProtocol, PiecewiseFilter, SignPattern,
};
use crate::noise::NARROW_PEAK_TONE_THRESHOLD;
use crate::quadrature::{integrate, QuadOptions};
use crate::spectrum::{SpectrumComponent, SpectrumModel};

/// Relative size of the neglected high-frequency tail.
const TAIL_REL_TOL: f64 = 1e-6;
const MAX_PANELS: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationResult {
    pub chi: f64,
    /// Deterministic phase `Ω Σ s_k τ_k`; zero when only a filter is known.
    pub phase: f64,
    /// Quadrature error estimate plus the bound on the truncated tail.
    pub quadrature_error: f64,
}

impl AttenuationResult {
    /// `e^{iφ} e^{−χ}`.
    pub fn coherence(&self) -> Complex64 {
        Complex64::from_polar((-self.chi).exp(), self.phase)
    }
}

/// Overlap of the filter with the spectrum.
///
/// White components use Parseval (`½ S_B ∫f² dt`), lines narrower than
/// `0.1/T` are sifted (`σ₀²|f̃(ω₀)|²/2π`), and everything else is integrated
/// by adaptive Gauss–Kronrod on panels of width `π/T` refined around the
/// spectrum's features. The upper limit grows until the tail bound
/// `sup S · J²/(2π ω_hi)` (with `J` the filter's total variation) drops
/// below `10⁻⁶ χ`.
pub fn chi_overlap(filter: &PiecewiseFilter, spectrum: &SpectrumModel) -> Result<AttenuationResult> {
    let duration = filter.total_duration();
    if filter.exposure() == 0.0 || spectrum.is_zero() {
        return Ok(AttenuationResult {
            chi: 0.0,
            phase: 0.0,
            quadrature_error: 0.0,
        });
    }
    let mut chi = 0.0;
    let mut continuous = Vec::new();
    for &c in spectrum.components() {
        match c {
            SpectrumComponent::White { level } => chi += 0.5 * level * filter.exposure(),
            SpectrumComponent::NarrowPeak { weight, center, width }
                if width * duration < NARROW_PEAK_TONE_THRESHOLD =>
            {
                chi += weight * filter_power(filter, center) / (2.0 * PI);
            }
            other => continuous.push(other),
        }
    }
    let mut error = 0.0;
    if !continuous.is_empty() {
        let part = SpectrumModel::new(continuous)?;
        let (value, err) = continuous_overlap(filter, &part, chi)?;
        chi += value;
        error += err;
    }
    Ok(AttenuationResult {
        chi: chi.max(0.0),
        phase: 0.0,
        quadrature_error: error,
    })
}

fn continuous_overlap(filter: &PiecewiseFilter, spectrum: &SpectrumModel, known: f64) -> Result<(f64, f64)> {
    let duration = filter.total_duration();
    let step = PI / duration;
    let jumps = filter.total_variation();
    let features = spectrum.features();
    let top_feature = features.iter().copied().fold(0.0, f64::max);
    let cutoff = spectrum
        .components()
        .iter()
        .all(|c| matches!(c, SpectrumComponent::PowerLaw { .. }))
        .then_some(top_feature);

    let integrand = |w: f64| spectrum.density(w) * filter_power(filter, w) / (2.0 * PI);
    let mut hi = match cutoff {
        Some(c) => c,
        None => (64.0 * step).max(20.0 * top_feature),
    };
    let mut lo = 0.0;
    let mut value = 0.0;
    let mut error = 0.0;
    for _ in 0..60 {
        let breaks = panel_breaks(lo, hi, step, &features, spectrum);
        if breaks.len() > MAX_PANELS {
            return Err(Error::Numerical(format!(
                "chi quadrature needs more than {MAX_PANELS} panels up to omega = {hi:.3e}; \
                 subdivide the filter or shorten the protocol"
            )));
        }
        let opts = QuadOptions {
            abs_tol: 1e-11 * (value + known),
            rel_tol: 1e-10,
            max_intervals: MAX_PANELS,
        };
        let r = integrate(integrand, &breaks, opts)?;
        value += r.value;
        error += r.error;
        if cutoff.is_some() {
            return Ok((value, error));
        }
        let tail = spectrum.sup_above(hi) * jumps * jumps / (2.0 * PI * hi);
        if tail <= TAIL_REL_TOL * (value + known) || tail < 1e-300 {
            return Ok((value, error + tail));
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Numerical(
        "chi quadrature tail did not converge; the spectrum decays too slowly for this filter".into(),
    ))
}

/// Panel boundaries on `[lo, hi]`: a uniform grid of width `step` plus
/// geometric refinement around each spectral feature.
fn panel_breaks(lo: f64, hi: f64, step: f64, features: &[f64], spectrum: &SpectrumModel) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
    const SCALES: [f64; 13] = [
        1e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0,
    ];
    for &f in features {
        pts.extend(SCALES.iter().map(|s| s * f));
    }
    for c in spectrum.components() {
        if let SpectrumComponent::NarrowPeak { center, width, .. } = *c {
            for k in [-30.0, -10.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 10.0, 30.0] {
                pts.push(center + k * width);
            }
        }
    }
    pts.retain(|&p| p >= lo && p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    pts
}

/// `g(1, s₂, …, s_n) = e^{iΩΣs_kτ_k} e^{−χ}` for Gaussian noise.
pub fn g_gaussian(protocol: &MeasurementProtocol, signs: &SignPattern, spectrum: &SpectrumModel) -> Result<Complex64> {
    Ok(attenuation(protocol, signs, spectrum)?.coherence())
}

/// [`chi_overlap`] on the protocol filter, with the deterministic phase.
pub fn attenuation(
    protocol: &MeasurementProtocol,
    signs: &SignPattern,
    spectrum: &SpectrumModel,
) -> Result<AttenuationResult> {
    let filter = build_filter(protocol, signs)?;
    let mut r = chi_overlap(&filter, spectrum)?;
    r.phase = protocol.omega() * signs.weighted_sum(&protocol.taus());
    Ok(r)
}

/// `C_xx(τ,τ; τ+δt,τ) = ½cos(2Ωτ) e^{−χ₁,₁} + ½ e^{−χ₁,₋₁}`.
pub fn cxx_two_measurement(tau: f64, dt: f64, omega: f64, spectrum: &SpectrumModel) -> Result<f64> {
    ensure_positive("tau", tau)?;
    ensure_non_negative("delta", dt)?;
    let p = MeasurementProtocol::uniform(2, tau, dt, crate::filters::Axis::X, omega)?;
    let plus = attenuation(&p, &SignPattern::all_plus(2), spectrum)?;
    let minus = attenuation(&p, &SignPattern::alternating(2), spectrum)?;
    Ok(0.5 * (2.0 * omega * tau).cos() * (-plus.chi).exp() + 0.5 * (-minus.chi).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub rate: f64,
    /// Bound on the harmonics above `m_max`, from `|c_m|² ≤ 4/(π²m²)`.
    pub truncation_bound: f64,
}

/// Comb decay rate `R(ω_p) = Σ_{m odd, 0<m≤m_max} |c_m|² S(mω_p)` with
/// `ω_p = π/(τ+δt)`.
pub fn decay_rate(tau: f64, dt: f64, spectrum: &SpectrumModel, m_max: usize) -> Result<DecayRate> {
    ensure_positive("tau", tau)?;
    ensure_non_negative("delta", dt)?;
    if m_max == 0 {
        return Err(Error::config("m_max", "must be at least 1"));
    }
    let wp = PI / (tau + dt);
    let rate = (1..=m_max as i64)
        .step_by(2)
        .map(|m| comb_weight(m, tau, dt) * spectrum.density(m as f64 * wp))
        .sum();
    let truncation_bound = spectrum.sup_above((m_max + 1) as f64 * wp) * 2.0 / (PI * PI * m_max as f64);
    Ok(DecayRate { rate, truncation_bound })
}

/// `f̃` of a filter at `ω` (re-exported for CLI scans).
pub fn filter_response(filter: &PiecewiseFilter, omega: f64) -> Complex64 {
    filter_fourier(filter, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{Axis, PiecewiseFilter};

    #[test]
    fn white_noise_is_parseval() {
        let s = SpectrumModel::white(2.0).unwrap();
        let p = MeasurementProtocol::echo(1.0).unwrap();
        let r = attenuation(&p, &SignPattern::alternating(2), &s).unwrap();
        assert!((r.chi - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_spectrum() {
        let p = MeasurementProtocol::echo(1.0).unwrap();
        let g = g_gaussian(&p, &SignPattern::alternating(2), &SpectrumModel::zero()).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn deterministic_phase() {
        let tau = 0.8;
        let p = MeasurementProtocol::uniform(2, tau, 0.0, Axis::X, PI / (2.0 * tau)).unwrap();
        let g = g_gaussian(&p, &SignPattern::all_plus(2), &SpectrumModel::zero()).unwrap();
        assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cxx_zero_noise() {
        let z = SpectrumModel::zero();
        assert!((cxx_two_measurement(1.0, 0.5, 0.0, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(cxx_two_measurement(1.0, 0.5, PI / 2.0, &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn lorentzian_fid_closed_form() {
        // ½∬ e^{-|t-s|} over [0,1]² = e^{-1}.
        let f = PiecewiseFilter::from_pieces([(1.0, 1)]).unwrap();
        let r = chi_overlap(&f, &SpectrumModel::lorentzian(1.0, 1.0).unwrap()).unwrap();
        assert!((r.chi - (-1.0f64).exp()).abs() < 1e-6 * r.chi, "{}", r.chi);
    }

    #[test]
    fn power_law_uses_finite_band() {
        let f = PiecewiseFilter::from_pieces([(1.0, 1)]).unwrap();
        let s = SpectrumModel::new(vec![SpectrumComponent::PowerLaw {
            amplitude: 1.0,
            exponent: 1.0,
            low_cutoff: 0.01,
            high_cutoff: 100.0,
        }])
        .unwrap();
        let r = chi_overlap(&f, &s).unwrap();
        assert!(r.chi > 0.0 && r.chi.is_finite());
    }

    #[test]
    fn decay_rate_dd_first_peak() {
        let s = SpectrumModel::white(50.0).unwrap();
        let r = decay_rate(0.3, 0.0, &s, 1).unwrap();
        assert!((r.rate - 4.0 / (PI * PI) * 50.0).abs() < 1e-12);
        assert!(r.truncation_bound > 0.0);
    }
}
