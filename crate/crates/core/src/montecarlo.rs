//! Trajectory-by-trajectory simulation of measurement protocols.
//!
//! Every estimator draws the same noise realization for trajectory `i`
//! (stream `seed`, word position `i`), so estimators evaluated on one
//! [`Ensemble`] are paired. Trajectories are grouped into at most 100
//! contiguous batches; batch sums are computed in parallel and reduced in
//! order, which makes results independent of the number of worker threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::{axes_to_string, Axis, MeasurementProtocol, SignPattern};
use crate::gaussian::g_gaussian;
use crate::noise::{NoiseGenerator, NoiseSource, NoiseTrajectory};
use crate::rng::RngStream;

const MAX_BATCHES: usize = 100;
/// Largest `n` for which all `2ⁿ` axis strings or sign patterns are enumerated.
pub const MAX_ENUMERATED_MEASUREMENTS: usize = 12;

/// Accumulated noise phases `Φ_k = ∫_{t_k−τ_k}^{t_k} ξ dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    /// Average the conditional expectation `Π e_{a_k}(α_k)` per trajectory.
    #[default]
    AnalyticPerTrajectory,
    /// Draw one ±1 outcome per measurement and average their product.
    SampledOutcomes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorEstimate {
    pub mean: Complex64,
    /// `√(se_re² + se_im²)`.
    pub std_error: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub n_traj: usize,
    /// Outcome draws per trajectory; 0 when outcomes are averaged exactly.
    pub n_shots_per_traj: usize,
    pub mode: EstimatorMode,
}

impl CorrelatorEstimate {
    /// `|mean − expected| / std_error`.
    pub fn z_score(&self, expected: Complex64) -> f64 {
        (self.mean - expected).norm() / self.std_error
    }

    /// Whether `expected` lies within `k` standard errors (with a rounding
    /// floor for estimates whose error vanishes).
    pub fn agrees_with(&self, expected: Complex64, k: f64) -> bool {
        (self.mean - expected).norm() <= k * self.std_error + 1e-12
    }
}

/// Mean and batch-means standard error of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl Moments {
    pub fn std_error(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

/// An ensemble of noise trajectories: source, size, grid and seed.
#[derive(Debug, Clone)]
pub struct Ensemble {
    source: NoiseSource,
    n_traj: usize,
    dt: Option<f64>,
    stream: RngStream,
}

impl Ensemble {
    pub fn new(source: NoiseSource, n_traj: usize, stream: RngStream) -> Result<Self> {
        if n_traj < 2 {
            return Err(Error::config(
                "n_traj",
                "at least 2 trajectories are needed for an error estimate",
            ));
        }
        Ok(Self {
            source,
            n_traj,
            dt: None,
            stream,
        })
    }

    /// Overrides the default grid step.
    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        crate::error::ensure_positive("dt", dt)?;
        self.dt = Some(dt);
        Ok(self)
    }

    pub fn source(&self) -> &NoiseSource {
        &self.source
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    /// Grid step used for `protocol`.
    pub fn dt_for(&self, protocol: &MeasurementProtocol) -> f64 {
        self.dt
            .unwrap_or_else(|| self.source.default_dt(protocol.shortest_segment()))
    }

    pub fn generator(&self, protocol: &MeasurementProtocol) -> Result<NoiseGenerator> {
        self.source.generator(protocol.span(), self.dt_for(protocol))
    }

    /// Noise realization of trajectory `index`.
    pub fn trajectory(&self, protocol: &MeasurementProtocol, index: u64) -> Result<NoiseTrajectory> {
        Ok(self.generator(protocol)?.sample(&mut self.stream.trajectory_rng(index)))
    }

    /// Runs `observe(α, outcome_rng, out)` on every trajectory, where
    /// `α_k = Ωτ_k + Φ_k` and `out` has `n_obs` slots, and returns the
    /// moments of each slot.
    pub fn estimate<F>(&self, protocol: &MeasurementProtocol, n_obs: usize, observe: F) -> Result<Vec<Moments>>
    where
        F: Fn(&[f64], &mut ChaCha8Rng, &mut [Complex64]) + Sync,
    {
        let generator = self.generator(protocol)?;
        let windows = protocol.windows();
        let offsets: Vec<f64> = protocol.taus().iter().map(|t| protocol.omega() * t).collect();
        let outcome_stream = self.stream.fork(1);
        let n_batches = self.n_traj.min(MAX_BATCHES);

        let batch_sums: Vec<Vec<Complex64>> = (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let (start, end) = batch_range(self.n_traj, n_batches, b);
                let mut sum = vec![Complex64::new(0.0, 0.0); n_obs];
                let mut out = vec![Complex64::new(0.0, 0.0); n_obs];
                let mut alphas = vec![0.0; windows.len()];
                let mut cumulative = Vec::with_capacity(generator.len());
                for i in start..end {
                    let traj = generator.sample(&mut self.stream.trajectory_rng(i as u64));
                    cumulative_trapezoid(&traj, &mut cumulative);
                    for ((a, &(lo, hi)), off) in alphas.iter_mut().zip(&windows).zip(&offsets) {
                        *a = off + running_integral(&traj, &cumulative, hi) - running_integral(&traj, &cumulative, lo);
                    }
                    let mut rng = outcome_stream.trajectory_rng(i as u64);
                    out.fill(Complex64::new(0.0, 0.0));
                    observe(&alphas, &mut rng, &mut out);
                    sum.iter_mut().zip(&out).for_each(|(s, o)| *s += o);
                }
                sum
            })
            .collect();

        Ok((0..n_obs)
            .map(|j| {
                let sums: Vec<(Complex64, usize)> = batch_sums
                    .iter()
                    .enumerate()
                    .map(|(b, s)| {
                        let (start, end) = batch_range(self.n_traj, n_batches, b);
                        (s[j], end - start)
                    })
                    .collect();
                batch_moments(&sums, self.n_traj)
            })
            .collect())
    }
}

fn batch_range(n: usize, batches: usize, b: usize) -> (usize, usize) {
    (b * n / batches, (b + 1) * n / batches)
}

fn batch_moments(sums: &[(Complex64, usize)], n: usize) -> Moments {
    let total: Complex64 = sums.iter().map(|(s, _)| s).sum();
    let mean = total / n as f64;
    let k = sums.len() as f64;
    let means: Vec<Complex64> = sums.iter().map(|&(s, c)| s / c as f64).collect();
    let centre: Complex64 = means.iter().sum::<Complex64>() / k;
    let (vr, vi) = means.iter().fold((0.0, 0.0), |(vr, vi), m| {
        let d = m - centre;
        (vr + d.re * d.re, vi + d.im * d.im)
    });
    let denom = k * (k - 1.0);
    Moments {
        mean,
        se_re: (vr / denom).sqrt(),
        se_im: (vi / denom).sqrt(),
    }
}

/// `C[i] = ∫₀^{i·dt} ξ` for the linear interpolant of the samples.
fn cumulative_trapezoid(traj: &NoiseTrajectory, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    let mut acc = 0.0;
    for w in traj.samples.windows(2) {
        acc += 0.5 * traj.dt * (w[0] + w[1]);
        out.push(acc);
    }
}

/// `∫₀^t ξ` of the linear interpolant, `0 ≤ t ≤ duration`.
fn running_integral(traj: &NoiseTrajectory, cumulative: &[f64], t: f64) -> f64 {
    let x = &traj.samples;
    let pos = t / traj.dt;
    let i = (pos.floor() as usize).min(x.len() - 1);
    let frac = pos - i as f64;
    if frac <= 0.0 || i + 1 >= x.len() {
        return cumulative[i];
    }
    let slope = x[i + 1] - x[i];
    cumulative[i] + traj.dt * frac * (x[i] + 0.5 * frac * slope)
}

/// Trapezoidal phases of one trajectory over the protocol's windows.
pub fn phases(traj: &NoiseTrajectory, protocol: &MeasurementProtocol) -> Result<PhaseVector> {
    let span = protocol.span();
    if traj.samples.is_empty() || traj.duration() < span * (1.0 - 1e-12) {
        return Err(Error::Argument(format!(
            "trajectory covers {:.6e} but the protocol ends at {span:.6e}",
            traj.duration()
        )));
    }
    let mut cumulative = Vec::with_capacity(traj.samples.len());
    cumulative_trapezoid(traj, &mut cumulative);
    let phases = protocol
        .windows()
        .into_iter()
        .map(|(lo, hi)| running_integral(traj, &cumulative, hi) - running_integral(traj, &cumulative, lo))
        .collect();
    Ok(PhaseVector { phases })
}

fn axis_factor(axis: Axis, alpha: f64) -> f64 {
    match axis {
        Axis::X => alpha.cos(),
        Axis::Y => alpha.sin(),
    }
}

/// One ±1 outcome with `P(+1) = ½(1 + e)`.
fn draw_outcome(rng: &mut ChaCha8Rng, e: f64) -> f64 {
    if rng.random::<f64>() < 0.5 * (1.0 + e) {
        1.0
    } else {
        -1.0
    }
}

fn axes_observable(axes: &[Axis], alphas: &[f64], mode: EstimatorMode, rng: &mut ChaCha8Rng) -> f64 {
    match mode {
        EstimatorMode::AnalyticPerTrajectory => axes.iter().zip(alphas).map(|(&a, &x)| axis_factor(a, x)).product(),
        EstimatorMode::SampledOutcomes => axes
            .iter()
            .zip(alphas)
            .map(|(&a, &x)| draw_outcome(rng, axis_factor(a, x)))
            .product(),
    }
}

fn g_observable(signs: &[i8], alphas: &[f64]) -> Complex64 {
    let phase: f64 = signs.iter().zip(alphas).map(|(&s, &a)| f64::from(s) * a).sum();
    Complex64::from_polar(1.0, phase)
}

fn estimate(m: Moments, n_traj: usize, mode: EstimatorMode) -> CorrelatorEstimate {
    CorrelatorEstimate {
        mean: m.mean,
        std_error: m.std_error(),
        se_re: m.se_re,
        se_im: m.se_im,
        n_traj,
        n_shots_per_traj: match mode {
            EstimatorMode::AnalyticPerTrajectory => 0,
            EstimatorMode::SampledOutcomes => 1,
        },
        mode,
    }
}

/// Multi-axis correlator `C_{a₁…a_n} = ⟨m₁⋯m_n⟩` with repreparation, for the
/// axes stored in the protocol.
pub fn correlator_axes(
    protocol: &MeasurementProtocol,
    ensemble: &Ensemble,
    mode: EstimatorMode,
) -> Result<CorrelatorEstimate> {
    let axes = protocol.axes();
    let m = ensemble.estimate(protocol, 1, |alphas, rng, out| {
        out[0] = Complex64::new(axes_observable(&axes, alphas, mode, rng), 0.0);
    })?;
    Ok(estimate(m[0], ensemble.n_traj(), mode))
}

/// Filtered coherence `g(s) = ⟨exp(i Σ s_k α_k)⟩`.
pub fn correlator_g(
    protocol: &MeasurementProtocol,
    signs: &SignPattern,
    ensemble: &Ensemble,
) -> Result<CorrelatorEstimate> {
    check_len(protocol, signs.len())?;
    let s = signs.signs().to_vec();
    let m = ensemble.estimate(protocol, 1, |alphas, _, out| out[0] = g_observable(&s, alphas))?;
    Ok(estimate(m[0], ensemble.n_traj(), EstimatorMode::AnalyticPerTrajectory))
}

fn check_len(protocol: &MeasurementProtocol, n: usize) -> Result<()> {
    if protocol.len() != n {
        return Err(Error::Argument(format!(
            "sign pattern of length {n} for a {}-measurement protocol",
            protocol.len()
        )));
    }
    Ok(())
}

/// All `2ⁿ` axis strings in binary order (`x` = 0), `x…x` first.
pub fn axis_strings(n: usize) -> Result<Vec<Vec<Axis>>> {
    if n == 0 || n > MAX_ENUMERATED_MEASUREMENTS {
        return Err(Error::Argument(format!(
            "axis enumeration supports 1 to {MAX_ENUMERATED_MEASUREMENTS} measurements, got {n}"
        )));
    }
    Ok((0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|k| if bits >> (n - 1 - k) & 1 == 1 { Axis::Y } else { Axis::X })
                .collect()
        })
        .collect())
}

/// Weight of `C_{axes}` in `g(s)`: the product of `i·s_k` over the
/// `y` positions, from `e^{isα} = cos α + i s sin α`.
pub fn axis_coefficient(axes: &[Axis], signs: &[i8]) -> Complex64 {
    axes.iter()
        .zip(signs)
        .filter(|(&a, _)| a == Axis::Y)
        .fold(Complex64::new(1.0, 0.0), |acc, (_, &s)| {
            acc * Complex64::new(0.0, f64::from(s))
        })
}

/// `g(1, −1, 1, …)` from the `2ⁿ` axis correlators keyed by axis string
/// (`"xyx"`).
pub fn combine_to_g(correlators: &BTreeMap<String, f64>, n: usize) -> Result<Complex64> {
    combine_to_g_signs(correlators, &SignPattern::alternating(n))
}

/// `g(s)` for an arbitrary sign pattern from the `2ⁿ` axis correlators.
pub fn combine_to_g_signs(correlators: &BTreeMap<String, f64>, signs: &SignPattern) -> Result<Complex64> {
    let mut g = Complex64::new(0.0, 0.0);
    for axes in axis_strings(signs.len())? {
        let key = axes_to_string(&axes);
        let c = correlators
            .get(&key)
            .ok_or_else(|| Error::Argument(format!("missing correlator `{key}`")))?;
        g += axis_coefficient(&axes, signs.signs()) * c;
    }
    Ok(g)
}

/// Paired comparison of two estimators on shared trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCheck {
    pub lhs: CorrelatorEstimate,
    pub rhs: CorrelatorEstimate,
    /// `lhs − rhs` evaluated per trajectory.
    pub difference: CorrelatorEstimate,
}

impl PairedCheck {
    pub fn within(&self, k: f64) -> bool {
        self.difference.agrees_with(Complex64::new(0.0, 0.0), k)
    }
}

/// Estimates all `2ⁿ` axis correlators on one ensemble, keyed by axis string.
pub fn all_axis_correlators(
    protocol: &MeasurementProtocol,
    ensemble: &Ensemble,
    mode: EstimatorMode,
) -> Result<BTreeMap<String, CorrelatorEstimate>> {
    let strings = axis_strings(protocol.len())?;
    let m = ensemble.estimate(protocol, strings.len(), |alphas, rng, out| {
        for (o, axes) in out.iter_mut().zip(&strings) {
            *o = Complex64::new(axes_observable(axes, alphas, mode, rng), 0.0);
        }
    })?;
    Ok(strings
        .iter()
        .zip(m)
        .map(|(axes, m)| (axes_to_string(axes), estimate(m, ensemble.n_traj(), mode)))
        .collect())
}

/// The axis-correlator combination for `signs` against the directly
/// estimated `g(s)`, on shared trajectories. In sampled mode each axis
/// string draws its own outcomes.
pub fn combination_check(
    protocol: &MeasurementProtocol,
    signs: &SignPattern,
    ensemble: &Ensemble,
    mode: EstimatorMode,
) -> Result<PairedCheck> {
    check_len(protocol, signs.len())?;
    let strings = axis_strings(protocol.len())?;
    let coeffs: Vec<Complex64> = strings.iter().map(|a| axis_coefficient(a, signs.signs())).collect();
    let s = signs.signs().to_vec();
    let m = ensemble.estimate(protocol, 3, |alphas, rng, out| {
        let combined: Complex64 = strings
            .iter()
            .zip(&coeffs)
            .map(|(axes, c)| c * axes_observable(axes, alphas, mode, rng))
            .sum();
        let direct = g_observable(&s, alphas);
        out[0] = combined;
        out[1] = direct;
        out[2] = combined - direct;
    })?;
    let n = ensemble.n_traj();
    Ok(PairedCheck {
        lhs: estimate(m[0], n, mode),
        rhs: estimate(m[1], n, EstimatorMode::AnalyticPerTrajectory),
        difference: estimate(m[2], n, mode),
    })
}

/// Same-axis correlator against the Gaussian sign-pattern sum
/// `C_{x…x} = 2⁻ⁿ Σ_s g(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub monte_carlo: CorrelatorEstimate,
    pub analytic: f64,
}

impl DecompositionReport {
    pub fn within(&self, k: f64) -> bool {
        self.monte_carlo.agrees_with(Complex64::new(self.analytic, 0.0), k)
    }
}

/// `2⁻ⁿ Σ_{all s} g(s) = 2^{1−n} Re Σ_{s₁=+1} g(s)` for Gaussian noise.
pub fn same_axis_gaussian(protocol: &MeasurementProtocol, spectrum: &crate::spectrum::SpectrumModel) -> Result<f64> {
    let n = protocol.len();
    if n > MAX_ENUMERATED_MEASUREMENTS {
        return Err(Error::Argument(format!(
            "sign-pattern sum supports at most {MAX_ENUMERATED_MEASUREMENTS} measurements, got {n}"
        )));
    }
    let mut sum = 0.0;
    for s in SignPattern::enumerate(n) {
        sum += g_gaussian(protocol, &s, spectrum)?.re;
    }
    Ok(sum * 2f64.powi(1 - n as i32))
}

pub fn same_axis_decomposition_check(
    protocol: &MeasurementProtocol,
    ensemble: &Ensemble,
    mode: EstimatorMode,
) -> Result<DecompositionReport> {
    let spectrum = ensemble
        .source()
        .gaussian_spectrum()
        .ok_or_else(|| Error::Argument("the sign-pattern decomposition needs Gaussian noise".into()))?;
    let xs = protocol.with_axes(&vec![Axis::X; protocol.len()])?;
    let analytic = same_axis_gaussian(&xs, &spectrum)?;
    let monte_carlo = correlator_axes(&xs, ensemble, mode)?;
    Ok(DecompositionReport { monte_carlo, analytic })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCorrelators {
    /// `⟨P₊(t₁)⟩ = ½(1 + ⟨cos α₁⟩)`.
    pub c_plus: CorrelatorEstimate,
    /// `⟨P₊(t₁)P₊(t₂)⟩ = ¼⟨(1 + cos α₁)(1 + cos α₂)⟩`.
    pub c_plus_plus: CorrelatorEstimate,
}

fn projection_protocol(t1: f64, t2: f64, omega: f64) -> Result<MeasurementProtocol> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::Argument(format!(
            "projection times need 0 < t1 < t2, got {t1} and {t2}"
        )));
    }
    MeasurementProtocol::from_times(&[t1, t2 - t1], &[0.0], &[Axis::X; 2], omega)
}

/// Projector expectations at `t₁` and `t₂` with repreparation at `t₁`.
pub fn projection_correlators(t1: f64, t2: f64, omega: f64, ensemble: &Ensemble) -> Result<ProjectionCorrelators> {
    let p = projection_protocol(t1, t2, omega)?;
    let m = ensemble.estimate(&p, 2, |a, _, out| {
        let (c1, c2) = (a[0].cos(), a[1].cos());
        out[0] = Complex64::new(0.5 * (1.0 + c1), 0.0);
        out[1] = Complex64::new(0.25 * (1.0 + c1) * (1.0 + c2), 0.0);
    })?;
    let mode = EstimatorMode::AnalyticPerTrajectory;
    Ok(ProjectionCorrelators {
        c_plus: estimate(m[0], ensemble.n_traj(), mode),
        c_plus_plus: estimate(m[1], ensemble.n_traj(), mode),
    })
}

/// Gaussian prediction `(c₊, c₊₊)`, with
/// `c₊₊ = ¼[1 + C_x(t₁) + C_x(t₂−t₁) + ½Re g(1,1) + ½Re g(1,−1)]`.
pub fn projection_correlators_gaussian(
    t1: f64,
    t2: f64,
    omega: f64,
    spectrum: &crate::spectrum::SpectrumModel,
) -> Result<(f64, f64)> {
    let p = projection_protocol(t1, t2, omega)?;
    let single = |tau: f64| -> Result<f64> {
        let q = MeasurementProtocol::uniform(1, tau, 0.0, Axis::X, omega)?;
        Ok(g_gaussian(&q, &SignPattern::all_plus(1), spectrum)?.re)
    };
    let c1 = single(t1)?;
    let c2 = single(t2 - t1)?;
    let gpp = g_gaussian(&p, &SignPattern::all_plus(2), spectrum)?.re;
    let gpm = g_gaussian(&p, &SignPattern::alternating(2), spectrum)?.re;
    Ok((0.5 * (1.0 + c1), 0.25 * (1.0 + c1 + c2 + 0.5 * gpp + 0.5 * gpm)))
}

/// `⟨m_n⟩` without repreparation: each measurement starts from the previous
/// outcome's eigenstate, which dead time leaves untouched.
pub fn no_reprep_expectation(protocol: &MeasurementProtocol, ensemble: &Ensemble) -> Result<CorrelatorEstimate> {
    Ok(no_reprep_check(protocol, ensemble)?.lhs)
}

fn no_reprep_chain(alphas: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    alphas.iter().fold(1.0, |r, a| draw_outcome(rng, r * a.cos()))
}

/// No-repreparation `⟨m_n⟩` against the repreparation `⟨m₁⋯m_n⟩`
/// (conditional expectation per trajectory), on shared trajectories.
pub fn no_reprep_check(protocol: &MeasurementProtocol, ensemble: &Ensemble) -> Result<PairedCheck> {
    if protocol.axes().iter().any(|&a| a != Axis::X) {
        return Err(Error::config(
            "axes",
            "the no-repreparation protocol measures along x only",
        ));
    }
    let m = ensemble.estimate(protocol, 3, |alphas, rng, out| {
        let chain = no_reprep_chain(alphas, rng);
        let reprep: f64 = alphas.iter().map(|a| a.cos()).product();
        out[0] = Complex64::new(chain, 0.0);
        out[1] = Complex64::new(reprep, 0.0);
        out[2] = Complex64::new(chain - reprep, 0.0);
    })?;
    let n = ensemble.n_traj();
    Ok(PairedCheck {
        lhs: estimate(m[0], n, EstimatorMode::SampledOutcomes),
        rhs: estimate(m[1], n, EstimatorMode::AnalyticPerTrajectory),
        difference: estimate(m[2], n, EstimatorMode::SampledOutcomes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_ensemble() -> Ensemble {
        Ensemble::new(NoiseSource::Zero, 16, RngStream::new(1, 0)).unwrap()
    }

    #[test]
    fn constant_noise_phases() {
        let traj = NoiseTrajectory {
            dt: 0.1,
            samples: vec![2.0; 31],
        };
        let p = MeasurementProtocol::from_times(&[0.35, 1.0], &[0.5], &[Axis::X; 2], 0.0).unwrap();
        let ph = phases(&traj, &p).unwrap();
        assert!((ph.phases[0] - 0.7).abs() < 1e-12);
        assert!((ph.phases[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_phase() {
        let (w0, tau) = (1.0, 0.5);
        let line = crate::spectrum::SpectrumModel::new(vec![crate::spectrum::SpectrumComponent::NarrowPeak {
            weight: 1.0,
            center: w0,
            width: 1e-3,
        }])
        .unwrap();
        let dt = NoiseSource::spectrum(line, 1).default_dt(tau);
        let n = NoiseTrajectory::grid_len(tau, dt);
        let traj = NoiseTrajectory {
            dt,
            samples: (0..n).map(|i| (w0 * i as f64 * dt).cos()).collect(),
        };
        let p = MeasurementProtocol::uniform(1, tau, 0.0, Axis::X, 0.0).unwrap();
        let ph = phases(&traj, &p).unwrap();
        assert!((ph.phases[0] - (w0 * tau).sin() / w0).abs() < 1e-4);
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let traj = NoiseTrajectory {
            dt: 0.1,
            samples: vec![0.0; 5],
        };
        let p = MeasurementProtocol::echo(1.0).unwrap();
        assert!(matches!(phases(&traj, &p), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_noise_correlators() {
        let e = zero_ensemble();
        let p = MeasurementProtocol::uniform(3, 0.5, 0.1, Axis::X, 0.0).unwrap();
        for mode in [EstimatorMode::AnalyticPerTrajectory, EstimatorMode::SampledOutcomes] {
            assert_eq!(correlator_axes(&p, &e, mode).unwrap().mean.re, 1.0);
        }
        let py = p.with_axes(&[Axis::X, Axis::Y, Axis::X]).unwrap();
        assert_eq!(
            correlator_axes(&py, &e, EstimatorMode::AnalyticPerTrajectory)
                .unwrap()
                .mean
                .re,
            0.0
        );
        let g = correlator_g(&p, &SignPattern::alternating(3), &e).unwrap();
        assert!((g.mean - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(no_reprep_expectation(&p, &e).unwrap().mean.re, 1.0);
    }

    #[test]
    fn too_few_trajectories() {
        assert!(matches!(
            Ensemble::new(NoiseSource::Zero, 1, RngStream::new(0, 0)),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn combine_two_measurements() {
        let map: BTreeMap<String, f64> = [("xx", 0.5), ("yy", 0.5), ("xy", 0.0), ("yx", 0.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!((combine_to_g(&map, 2).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let mut short = map.clone();
        short.remove("yx");
        let err = combine_to_g(&short, 2).unwrap_err();
        assert!(err.to_string().contains("yx"));
    }

    #[test]
    fn coefficients_match_two_and_three_point_forms() {
        let alt = [1, -1];
        let c = |s: &str| axis_coefficient(&crate::filters::parse_axes(s).unwrap(), &alt);
        assert_eq!(c("xx"), Complex64::new(1.0, 0.0));
        assert_eq!(c("yy"), Complex64::new(1.0, 0.0));
        assert_eq!(c("xy"), Complex64::new(0.0, -1.0));
        assert_eq!(c("yx"), Complex64::new(0.0, 1.0));
        let alt3 = [1, -1, 1];
        let c3 = |s: &str| axis_coefficient(&crate::filters::parse_axes(s).unwrap(), &alt3);
        assert_eq!(c3("yxy"), Complex64::new(-1.0, 0.0));
        assert_eq!(c3("yyy"), Complex64::new(0.0, 1.0));
        assert_eq!(c3("xyy"), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn batch_partition_covers_everything() {
        let n = 1037;
        let mut covered = 0;
        for b in 0..100 {
            let (s, e) = batch_range(n, 100, b);
            assert_eq!(s, covered);
            covered = e;
        }
        assert_eq!(covered, n);
    }

    #[test]
    fn projection_needs_ordered_times() {
        assert!(projection_correlators(2.0, 1.0, 0.0, &zero_ensemble()).is_err());
        let r = projection_correlators(1.0, 2.0, 0.0, &zero_ensemble()).unwrap();
        assert_eq!(r.c_plus.mean.re, 1.0);
        assert_eq!(r.c_plus_plus.mean.re, 1.0);
    }
}
