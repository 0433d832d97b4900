//! Witnesses of non-Gaussian dephasing noise.
//!
//! At `Ω = 0`, correlators with an odd number of `y` measurements vanish for
//! Gaussian noise, so a significant nonzero value certifies odd cumulants.
//! The reference non-Gaussian model is `ξ = v₂(x² − σ²)` with `x` an OU
//! process of variance `σ²` and correlation time `τ_c`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_positive, Error, Result};
use crate::filters::{build_filter, Axis, MeasurementProtocol, SignPattern};
use crate::gaussian::chi_overlap;
use crate::montecarlo::{CorrelatorEstimate, Ensemble, EstimatorMode};
use crate::noise::NoiseSource;
use crate::rng::RngStream;
use crate::spectrum::SpectrumModel;

/// z-score above which a witness reports a detection.
pub const DETECTION_Z: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithGaussian,
    NonGaussianDetected,
}

impl Verdict {
    pub fn from_z(z: f64) -> Self {
        if z > DETECTION_Z {
            Verdict::NonGaussianDetected
        } else {
            Verdict::ConsistentWithGaussian
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithGaussian => "consistent_with_gaussian",
            Verdict::NonGaussianDetected => "non_gaussian_detected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    pub value: CorrelatorEstimate,
    /// Zero: odd-`y` correlators vanish for Gaussian noise at `Ω = 0`.
    pub gaussian_prediction: f64,
    pub z_score: f64,
    pub verdict: Verdict,
}

impl WitnessReport {
    fn new(value: CorrelatorEstimate) -> Self {
        let z_score = value.mean.re.abs() / value.se_re;
        Self {
            value,
            gaussian_prediction: 0.0,
            z_score,
            verdict: Verdict::from_z(z_score),
        }
    }
}

fn require_rotating_frame(protocol: &MeasurementProtocol) -> Result<()> {
    if protocol.omega() != 0.0 {
        return Err(Error::config(
            "omega",
            "the witness holds only in the rotating frame (omega = 0); nonzero omega gives trivially nonzero values",
        ));
    }
    Ok(())
}

/// `C_xy = ⟨cos α₁ sin α₂⟩` on a two-measurement protocol.
pub fn witness_cxy(protocol: &MeasurementProtocol, ensemble: &Ensemble) -> Result<WitnessReport> {
    if protocol.len() != 2 {
        return Err(Error::config(
            "protocol",
            format!("C_xy needs 2 measurements, got {}", protocol.len()),
        ));
    }
    require_rotating_frame(protocol)?;
    let p = protocol.with_axes(&[Axis::X, Axis::Y])?;
    let est = crate::montecarlo::correlator_axes(&p, ensemble, EstimatorMode::AnalyticPerTrajectory)?;
    Ok(WitnessReport::new(est))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CxyxReport {
    /// `C_xyx = ⟨cos α₁ sin α₂ cos α₃⟩`.
    pub full: WitnessReport,
    /// `g(1, −1, 1)`.
    pub coherence: CorrelatorEstimate,
    /// `−¼ Im g(1, −1, 1)`, per trajectory.
    pub approximation: CorrelatorEstimate,
    /// `C_xyx + ¼ Im g(1, −1, 1)`, per trajectory.
    pub difference: CorrelatorEstimate,
}

/// `C_xyx` at CP-2 timing `(τ, 2τ, τ)` alongside `−¼ Im g(1, −1, 1)` on the
/// same trajectories. The two agree when strong low-frequency noise
/// suppresses every other phase combination.
pub fn witness_cxyx(tau: f64, ensemble: &Ensemble) -> Result<CxyxReport> {
    let p = MeasurementProtocol::cp2(tau)?;
    let m = ensemble.estimate(&p, 4, |a, _, out| {
        let full = a[0].cos() * a[1].sin() * a[2].cos();
        let g = Complex64::from_polar(1.0, a[0] - a[1] + a[2]);
        let approx = -0.25 * g.im;
        out[0] = Complex64::new(full, 0.0);
        out[1] = g;
        out[2] = Complex64::new(approx, 0.0);
        out[3] = Complex64::new(full - approx, 0.0);
    })?;
    let n = ensemble.n_traj();
    let est = |k: usize| CorrelatorEstimate {
        mean: m[k].mean,
        std_error: m[k].std_error(),
        se_re: m[k].se_re,
        se_im: m[k].se_im,
        n_traj: n,
        n_shots_per_traj: 0,
        mode: EstimatorMode::AnalyticPerTrajectory,
    };
    Ok(CxyxReport {
        full: WitnessReport::new(est(0)),
        coherence: est(1),
        approximation: est(2),
        difference: est(3),
    })
}

/// Gaussian process with the autocovariance `2v₂²σ⁴e^{−2|t|/τ_c}` of the
/// mean-subtracted quadratic noise.
pub fn second_cumulant_spectrum(sigma: f64, corr_time: f64, v2: f64) -> Result<SpectrumModel> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("corr_time", corr_time)?;
    if v2 == 0.0 {
        return Ok(SpectrumModel::zero());
    }
    SpectrumModel::lorentzian(2.0 * v2 * v2 * sigma.powi(4), 0.5 * corr_time)
}

/// `|W|` at CP-2 timing from the second cumulant of `v₂(x² − σ²)` alone.
pub fn gaussian_truncation_cp2(tau: f64, sigma: f64, corr_time: f64, v2: f64) -> Result<f64> {
    let p = MeasurementProtocol::cp2(tau)?;
    let f = build_filter(&p, &SignPattern::alternating(3))?;
    let chi = chi_overlap(&f, &second_cumulant_spectrum(sigma, corr_time, v2)?)?.chi;
    Ok((-chi).exp())
}

/// One point of a CP-2 sweep: `W = g(1, −1, 1)` at total time `T = 4τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessPoint {
    pub total_time: f64,
    pub w: CorrelatorEstimate,
    pub w_gauss2: f64,
    /// From `|Im W|/SE(Im W)`.
    pub verdict: Verdict,
}

impl WitnessPoint {
    pub fn im_z(&self) -> f64 {
        self.w.mean.im.abs() / self.w.se_im
    }

    /// `(|W| − W_gauss2)` in units of the standard error of `|W|`.
    pub fn gap_z(&self) -> f64 {
        let g = self.w.mean;
        let norm = g.norm();
        let se = ((g.re * self.w.se_re).powi(2) + (g.im * self.w.se_im).powi(2)).sqrt() / norm;
        (norm - self.w_gauss2) / se
    }
}

/// `W(T)` for quadratic-OU noise at CP-2 timing over `total_times`, each
/// point on its own stream `(seed, i)`, with the second-cumulant prediction.
pub fn witness_sweep(
    sigma: f64,
    corr_time: f64,
    v2: f64,
    total_times: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<Vec<WitnessPoint>> {
    let source = NoiseSource::quadratic_ou(sigma, corr_time, v2);
    total_times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            ensure_positive("T", t)?;
            let tau = 0.25 * t;
            let ensemble = Ensemble::new(source.clone(), n_traj, RngStream::new(seed, i as u64))?;
            let p = MeasurementProtocol::cp2(tau)?;
            let w = crate::montecarlo::correlator_g(&p, &SignPattern::alternating(3), &ensemble)?;
            let point = WitnessPoint {
                total_time: t,
                w,
                w_gauss2: gaussian_truncation_cp2(tau, sigma, corr_time, v2)?,
                verdict: Verdict::ConsistentWithGaussian,
            };
            Ok(WitnessPoint {
                verdict: Verdict::from_z(point.im_z()),
                ..point
            })
        })
        .collect()
}

/// Logarithmically spaced times on `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure_positive("T_min", lo)?;
    if hi.is_nan() || hi <= lo || n < 2 {
        return Err(Error::config("T_max", "needs T_max > T_min and at least two points"));
    }
    let r = (hi / lo).ln();
    Ok((0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect())
}
