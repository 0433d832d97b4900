//! Frequency-comb spectroscopy: scans over the comb frequency `ω_p`,
//! decay-rate inversion for `S(mω_p)`, peak localization and clock jitter.
//!
//! Both families use `N` comb blocks of period `T_B = 2π/ω_p`, so the total
//! time is `T = N·T_B`. The measurement family places two measurements of
//! length `τ` per block with dead time `δt = T_B/2 − τ`; the pulse family
//! flips the filter every `τ' = π/ω_p` without gaps.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::filters::{
    build_filter, comb_protocol, comb_weight, periodic_dd_filter, MeasurementProtocol, PiecewiseFilter, SignPattern,
};
use crate::gaussian::{chi_overlap, decay_rate};
use crate::montecarlo::{correlator_g, Ensemble};
use crate::nnls::{condition_number, nnls};
use crate::noise::NoiseSource;
use crate::rng::RngStream;
use crate::spectrum::SpectrumModel;

/// Largest condition number accepted by [`reconstruct`].
pub const MAX_CONDITION: f64 = 1e8;

/// Evolution time per measurement in the measurement family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    Fixed(f64),
    /// `τ = fraction · T_B`.
    FractionOfPeriod(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombFamily {
    Measurement {
        tau: TauRule,
    },
    /// Instantaneous π pulses, no measurements.
    Dd,
}

impl CombFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CombFamily::Measurement { .. } => "measurement",
            CombFamily::Dd => "dd",
        }
    }

    /// `(τ, δt)` of the comb block at `ω_p`; the pulse family has `δt = 0`.
    pub fn timing(&self, omega_p: f64) -> Result<(f64, f64)> {
        ensure_positive("omega_p", omega_p)?;
        let half = PI / omega_p;
        match *self {
            CombFamily::Dd => Ok((half, 0.0)),
            CombFamily::Measurement { tau } => {
                let tau = match tau {
                    TauRule::Fixed(t) => t,
                    TauRule::FractionOfPeriod(f) => {
                        if !(f > 0.0 && f <= 0.5) {
                            return Err(Error::config(
                                "tau",
                                format!("fraction of the period must lie in (0, 0.5], got {f}"),
                            ));
                        }
                        f * 2.0 * half
                    }
                };
                ensure_positive("tau", tau)?;
                if tau > half * (1.0 + 1e-12) {
                    return Err(Error::config(
                        "tau",
                        format!("tau = {tau} exceeds half the comb period {half} at omega_p = {omega_p}"),
                    ));
                }
                Ok((tau, (half - tau).max(0.0)))
            }
        }
    }

    /// The `2N`-measurement protocol (measurement family) or its gapless
    /// analogue (pulse family).
    pub fn protocol(&self, omega_p: f64, n_blocks: usize) -> Result<MeasurementProtocol> {
        let (tau, dt) = self.timing(omega_p)?;
        comb_protocol(tau, dt, n_blocks)
    }

    pub fn filter(&self, omega_p: f64, n_blocks: usize) -> Result<PiecewiseFilter> {
        match self {
            CombFamily::Dd => periodic_dd_filter(PI / omega_p, n_blocks),
            CombFamily::Measurement { .. } => {
                let p = self.protocol(omega_p, n_blocks)?;
                build_filter(&p, &SignPattern::alternating(p.len()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Analytic,
    MonteCarlo { n_traj: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMode {
    Analytic,
    MonteCarlo,
    /// `|g|` within 3 standard errors of zero; `χ` is NaN.
    Unmeasurable,
}

impl PointMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointMode::Analytic => "analytic",
            PointMode::MonteCarlo => "mc",
            PointMode::Unmeasurable => "unmeasurable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub omega_p: f64,
    pub tau: f64,
    pub dt: f64,
    /// `N·T_B`.
    pub total_time: f64,
    pub chi: f64,
    pub w: f64,
    /// Standard error of `χ`; zero for analytic points.
    pub chi_error: f64,
    pub mode: PointMode,
}

impl ScanPoint {
    /// `R = χ/T`.
    pub fn rate(&self) -> f64 {
        self.chi / self.total_time
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyScan {
    pub family: CombFamily,
    pub n_blocks: usize,
    pub points: Vec<ScanPoint>,
}

impl SpectroscopyScan {
    pub fn omega_p(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega_p).collect()
    }

    pub fn chi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.chi).collect()
    }

    pub fn w(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.w).collect()
    }

    /// Decay rates `χ/T` of the measurable points.
    pub fn decay_rates(&self) -> Vec<RateSample> {
        self.points
            .iter()
            .filter(|p| p.chi.is_finite())
            .map(|p| RateSample {
                omega_p: p.omega_p,
                tau: p.tau,
                dt: p.dt,
                rate: p.rate(),
            })
            .collect()
    }
}

/// Uniform grid of `steps` points on `[min, max]`.
pub fn omega_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    ensure_positive("omega_p_min", min)?;
    if max.is_nan() || max <= min {
        return Err(Error::config("omega_p_max", "must exceed omega_p_min"));
    }
    if steps < 2 {
        return Err(Error::config("omega_p_steps", "at least 2 points are needed"));
    }
    Ok((0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("omega_p", "empty grid"));
    }
    if grid.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::config("omega_p", "frequencies must be positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("omega_p", "grid must be strictly increasing"));
    }
    Ok(())
}

fn check_blocks(n_blocks: usize) -> Result<()> {
    if n_blocks == 0 {
        return Err(Error::config("N", "must be at least 1"));
    }
    Ok(())
}

/// `χ(ω_p)` and `W = e^{−χ}` over the grid.
///
/// Analytic points need a Gaussian source. Monte Carlo points estimate
/// `g` for the alternating pattern on `n_traj` trajectories from stream
/// `(seed, i)` and report `χ = −ln|g| + SE²/(2|g|²)`.
pub fn scan(
    family: CombFamily,
    n_blocks: usize,
    source: &NoiseSource,
    grid: &[f64],
    mode: ScanMode,
) -> Result<SpectroscopyScan> {
    check_blocks(n_blocks)?;
    check_grid(grid)?;
    for &w in grid {
        family.timing(w)?;
    }
    let points = match mode {
        ScanMode::Analytic => {
            let spectrum = source
                .gaussian_spectrum()
                .ok_or_else(|| Error::Argument("analytic scans need a Gaussian noise source".into()))?;
            grid.par_iter()
                .map(|&w| analytic_point(family, n_blocks, &spectrum, w))
                .collect::<Result<Vec<_>>>()?
        }
        ScanMode::MonteCarlo { n_traj, seed } => grid
            .par_iter()
            .enumerate()
            .map(|(i, &w)| {
                let ensemble = Ensemble::new(source.clone(), n_traj, RngStream::new(seed, i as u64))?;
                mc_point(family, n_blocks, &ensemble, w)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SpectroscopyScan {
        family,
        n_blocks,
        points,
    })
}

fn analytic_point(family: CombFamily, n_blocks: usize, spectrum: &SpectrumModel, omega_p: f64) -> Result<ScanPoint> {
    let (tau, dt) = family.timing(omega_p)?;
    let chi = chi_overlap(&family.filter(omega_p, n_blocks)?, spectrum)?.chi;
    Ok(ScanPoint {
        omega_p,
        tau,
        dt,
        total_time: n_blocks as f64 * TAU / omega_p,
        chi,
        w: (-chi).exp(),
        chi_error: 0.0,
        mode: PointMode::Analytic,
    })
}

fn mc_point(family: CombFamily, n_blocks: usize, ensemble: &Ensemble, omega_p: f64) -> Result<ScanPoint> {
    let (tau, dt) = family.timing(omega_p)?;
    let p = family.protocol(omega_p, n_blocks)?;
    let est = correlator_g(&p, &SignPattern::alternating(p.len()), ensemble)?;
    let g = est.mean.norm();
    let se = est.std_error;
    let (chi, chi_error, mode) = if g <= 3.0 * se {
        (f64::NAN, f64::NAN, PointMode::Unmeasurable)
    } else {
        (-g.ln() + se * se / (2.0 * g * g), se / g, PointMode::MonteCarlo)
    };
    Ok(ScanPoint {
        omega_p,
        tau,
        dt,
        total_time: n_blocks as f64 * TAU / omega_p,
        chi,
        w: g,
        chi_error,
        mode,
    })
}

/// A decay rate `R(ω_p)` together with the comb timing that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub omega_p: f64,
    pub tau: f64,
    pub dt: f64,
    pub rate: f64,
}

/// Rates `Σ_{m odd ≤ m_max} |c_m|² S(mω_p)` from the model spectrum.
pub fn model_rates(
    family: CombFamily,
    spectrum: &SpectrumModel,
    grid: &[f64],
    m_max: usize,
) -> Result<Vec<RateSample>> {
    check_grid(grid)?;
    grid.iter()
        .map(|&w| {
            let (tau, dt) = family.timing(w)?;
            Ok(RateSample {
                omega_p: w,
                tau,
                dt,
                rate: decay_rate(tau, dt, spectrum, m_max)?.rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Node frequencies (the `ω_p` grid).
    pub frequencies: Vec<f64>,
    pub s_est: Vec<f64>,
    /// `R_i − Σ_j A_ij S_j` per input rate.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub m0: usize,
    pub condition_number: f64,
}

/// Inverts `R(ω_p) = Σ_{m odd ≤ m₀} |c_m|² S(mω_p)` for `S` on the `ω_p`
/// nodes by non-negative least squares.
///
/// Each harmonic `mω_p` is assigned to the nearest node; harmonics above the
/// top node take the top node's value.
pub fn reconstruct(rates: &[RateSample], m0: usize) -> Result<ReconstructionResult> {
    if m0 == 0 {
        return Err(Error::config("m0", "must be at least 1"));
    }
    let nodes: Vec<f64> = rates.iter().map(|r| r.omega_p).collect();
    check_grid(&nodes)?;
    let n = nodes.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, r) in rates.iter().enumerate() {
        for m in (1..=m0 as i64).step_by(2) {
            let w = m as f64 * r.omega_p;
            a[(i, nearest_node(&nodes, w))] += comb_weight(m, r.tau, r.dt);
        }
    }
    let condition = condition_number(&a);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Numerical(format!(
            "reconstruction system is ill-conditioned (condition number {condition:.3e}); \
             use a denser omega_p grid or a smaller m0"
        )));
    }
    let b = DVector::from_iterator(n, rates.iter().map(|r| r.rate));
    let s = nnls(&a, &b)?;
    let res = &b - &a * &s;
    Ok(ReconstructionResult {
        frequencies: nodes,
        s_est: s.iter().copied().collect(),
        residuals: res.iter().copied().collect(),
        residual_norm: res.norm(),
        m0,
        condition_number: condition,
    })
}

fn nearest_node(nodes: &[f64], w: f64) -> usize {
    match nodes.binary_search_by(|x| x.total_cmp(&w)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i == nodes.len() => nodes.len() - 1,
        Err(i) => {
            if w - nodes[i - 1] <= nodes[i] - w {
                i - 1
            } else {
                i
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PeakLocalization {
    Localized {
        omega_hat: f64,
        /// Full width of the `χ` peak at half its maximum.
        resolution: f64,
    },
    NotLocalizable {
        reason: String,
    },
}

impl PeakLocalization {
    pub fn omega_hat(&self) -> Option<f64> {
        match self {
            PeakLocalization::Localized { omega_hat, .. } => Some(*omega_hat),
            PeakLocalization::NotLocalizable { .. } => None,
        }
    }

    pub fn resolution(&self) -> Option<f64> {
        match self {
            PeakLocalization::Localized { resolution, .. } => Some(*resolution),
            PeakLocalization::NotLocalizable { .. } => None,
        }
    }
}

/// Locates the `χ` maximum inside `window` (the whole scan if `None`).
///
/// The peak must rise above the window's median by more than three times
/// the scan noise (the median `χ` standard error, floored at `10⁻⁹ max χ`),
/// must not sit on the window edge, and must fall below half its height on
/// both sides inside the window.
pub fn peak_localization(scan: &SpectroscopyScan, window: Option<(f64, f64)>) -> PeakLocalization {
    let pts: Vec<&ScanPoint> = scan
        .points
        .iter()
        .filter(|p| p.chi.is_finite())
        .filter(|p| window.is_none_or(|(lo, hi)| p.omega_p >= lo && p.omega_p <= hi))
        .collect();
    let not = |reason: &str| PeakLocalization::NotLocalizable { reason: reason.into() };
    if pts.len() < 3 {
        return not("fewer than three measurable points in the window");
    }
    let (imax, top) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.chi.total_cmp(&b.1.chi))
        .map(|(i, p)| (i, p.chi))
        .expect("non-empty");
    let median = median(pts.iter().map(|p| p.chi).collect());
    let noise = median_of(pts.iter().map(|p| p.chi_error).collect()).max(1e-9 * top.abs());
    if top - median <= 3.0 * noise {
        return not("no peak above the background");
    }
    if imax == 0 || imax == pts.len() - 1 {
        return not("maximum on the edge of the scan");
    }
    let half = 0.5 * top;
    let cross = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Option<f64> {
        for i in range {
            let j = (i as isize + step) as usize;
            if pts[j].chi < half {
                let (a, b) = (pts[i], pts[j]);
                return Some(a.omega_p + (half - a.chi) * (b.omega_p - a.omega_p) / (b.chi - a.chi));
            }
        }
        None
    };
    let left = cross(&mut (1..=imax).rev(), -1);
    let right = cross(&mut (imax..pts.len() - 1), 1);
    match (left, right) {
        (Some(l), Some(r)) => PeakLocalization::Localized {
            omega_hat: pts[imax].omega_p,
            resolution: r - l,
        },
        _ => not("half-maximum not reached inside the scan"),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_of(v: Vec<f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        0.0
    } else {
        median(v)
    }
}

/// Averages `W` over dead-time errors `δt + σ_δt z_j`, with `z_j` the
/// `(j+½)/n` quantiles of the standard normal and `δt` clipped at zero, and
/// reports `χ = −ln⟨W⟩`. Each realization shifts every dead time of the
/// protocol by the same amount.
pub fn jitter_smear(
    scan: &SpectroscopyScan,
    spectrum: &SpectrumModel,
    sigma_dt: f64,
    n_samples: usize,
) -> Result<SpectroscopyScan> {
    ensure_non_negative("sigma_dt", sigma_dt)?;
    if sigma_dt == 0.0 {
        return Ok(scan.clone());
    }
    if n_samples == 0 {
        return Err(Error::config("n_samples", "must be at least 1"));
    }
    if scan.family == CombFamily::Dd {
        return Err(Error::Argument(
            "dead-time jitter applies to the measurement family only".into(),
        ));
    }
    let normal = Normal::standard();
    let z: Vec<f64> = (0..n_samples)
        .map(|j| normal.inverse_cdf((j as f64 + 0.5) / n_samples as f64))
        .collect();
    let points = scan
        .points
        .par_iter()
        .map(|p| {
            let chis = z
                .iter()
                .map(|&zj| {
                    let dt = (p.dt + sigma_dt * zj).max(0.0);
                    let proto = comb_protocol(p.tau, dt, scan.n_blocks)?;
                    let f = build_filter(&proto, &SignPattern::alternating(proto.len()))?;
                    Ok(chi_overlap(&f, spectrum)?.chi)
                })
                .collect::<Result<Vec<f64>>>()?;
            let lo = chis.iter().copied().fold(f64::INFINITY, f64::min);
            let mean_w = chis.iter().map(|c| (lo - c).exp()).sum::<f64>() / n_samples as f64;
            let chi = lo - mean_w.ln();
            Ok(ScanPoint {
                chi,
                w: (-chi).exp(),
                ..*p
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectroscopyScan { points, ..scan.clone() })
}
