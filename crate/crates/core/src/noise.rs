//! Classical stationary noise trajectories.
//!
//! Three generators are provided: the exact discrete Ornstein–Uhlenbeck
//! recursion, harmonic superposition targeting an arbitrary
//! [`SpectrumModel`], and the quadratic map `ξ → v₂(ξ² − m)` that turns a
//! Gaussian process into a non-Gaussian one. [`NoiseSource`] composes them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::rng::RngStream;
use crate::spectrum::{SpectrumComponent, SpectrumModel};

/// Below this `Δω·T`, a narrow peak is synthesized as a single tone.
pub const NARROW_PEAK_TONE_THRESHOLD: f64 = 0.1;

/// Minimum OU oversampling: `dt ≤ τ_c / OU_MIN_STEPS_PER_CORR_TIME`.
pub const OU_MIN_STEPS_PER_CORR_TIME: f64 = 20.0;

/// A realization of `ξ(t)` sampled at `t = i·dt`, `i = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl NoiseTrajectory {
    /// Number of grid points needed so that `dt·(len−1) ≥ duration`.
    pub fn grid_len(duration: f64, dt: f64) -> usize {
        let steps = (duration / dt * (1.0 - 1e-12)).ceil().max(0.0) as usize;
        steps + 1
    }

    pub fn zeros(duration: f64, dt: f64) -> Result<Self> {
        ensure_non_negative("duration", duration)?;
        ensure_positive("dt", dt)?;
        Ok(Self {
            dt,
            samples: vec![0.0; Self::grid_len(duration, dt)],
        })
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len().saturating_sub(1)) as f64
    }

    pub fn t0(&self) -> f64 {
        0.0
    }
}

fn check_grid(duration: f64, dt: f64) -> Result<()> {
    ensure_non_negative("duration", duration)?;
    ensure_positive("dt", dt)
}

/// Exact Ornstein–Uhlenbeck process with autocovariance `σ² e^{-|t|/τ_c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuProcess {
    sigma: f64,
    corr_time: f64,
}

impl OuProcess {
    pub fn new(sigma: f64, corr_time: f64) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        ensure_positive("tau_c", corr_time)?;
        Ok(Self { sigma, corr_time })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn corr_time(&self) -> f64 {
        self.corr_time
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if dt > self.corr_time / OU_MIN_STEPS_PER_CORR_TIME {
            return Err(Error::config(
                "dt",
                format!(
                    "dt = {dt} undersamples the correlation time {}; need dt <= tau_c/{}",
                    self.corr_time, OU_MIN_STEPS_PER_CORR_TIME
                ),
            ));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, duration: f64, dt: f64, rng: &mut R) -> Result<NoiseTrajectory> {
        check_grid(duration, dt)?;
        self.check_dt(dt)?;
        let len = NoiseTrajectory::grid_len(duration, dt);
        let mut samples = Vec::with_capacity(len);
        self.fill(dt, len, rng, &mut samples);
        Ok(NoiseTrajectory { dt, samples })
    }

    fn fill<R: Rng + ?Sized>(&self, dt: f64, len: usize, rng: &mut R, out: &mut Vec<f64>) {
        let decay = (-dt / self.corr_time).exp();
        let kick = self.sigma * (-(-2.0 * dt / self.corr_time).exp_m1()).sqrt();
        let mut x = self.sigma * rng.sample::<f64, _>(StandardNormal);
        out.push(x);
        for _ in 1..len {
            x = x * decay + kick * rng.sample::<f64, _>(StandardNormal);
            out.push(x);
        }
    }
}

/// Samples `ξ_{n+1} = ξ_n e^{-dt/τ_c} + σ√(1−e^{-2dt/τ_c}) z_n` with `ξ_0`
/// drawn from the stationary law.
pub fn ou_trajectory(sigma: f64, corr_time: f64, duration: f64, dt: f64, rng: &RngStream) -> Result<NoiseTrajectory> {
    OuProcess::new(sigma, corr_time)?.sample(duration, dt, &mut rng.rng())
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisWarning {
    /// A spectral feature lies above the band resolved by `dt`.
    FeatureAboveBand { frequency: f64, band: f64 },
}

#[derive(Debug, Clone)]
struct Stratified {
    component: SpectrumComponent,
    mass: f64,
}

/// Precomputed plan for harmonic synthesis of Gaussian noise.
///
/// Each continuous component is split into `n_modes` cells of equal spectral
/// mass on `[0, band]`, `band = π/(5·dt)`. Every realization draws one
/// frequency per cell from the component's own density restricted to that
/// cell, so the ensemble autocovariance equals `∫ S cos(ωt) dω/π` over the
/// band exactly, and the random frequencies remove the periodicity of a
/// fixed grid. Amplitudes are Rayleigh with uniform phase (two independent
/// normal quadratures), so every marginal is exactly Gaussian.
#[derive(Debug, Clone)]
pub struct HarmonicSynthesis {
    dt: f64,
    len: usize,
    band: f64,
    n_modes: usize,
    tones: Vec<(f64, f64)>,
    strata: Vec<Stratified>,
    variance: f64,
    warnings: Vec<SynthesisWarning>,
}

impl HarmonicSynthesis {
    pub fn new(spectrum: &SpectrumModel, duration: f64, dt: f64, n_modes: usize) -> Result<Self> {
        check_grid(duration, dt)?;
        if n_modes == 0 {
            return Err(Error::config("n_modes", "must be at least 1"));
        }
        let band = PI / (5.0 * dt);
        let len = NoiseTrajectory::grid_len(duration, dt);
        let mut tones = Vec::new();
        let mut strata = Vec::new();
        let mut warnings = Vec::new();
        for &component in spectrum.components() {
            for f in component.features() {
                if f > band {
                    warnings.push(SynthesisWarning::FeatureAboveBand { frequency: f, band });
                }
            }
            match component {
                SpectrumComponent::NarrowPeak { weight, center, width }
                    if width * duration < NARROW_PEAK_TONE_THRESHOLD =>
                {
                    if weight > 0.0 {
                        tones.push((center, weight / PI));
                    }
                }
                _ => {
                    let mass = component.cumulative(band);
                    if mass > 0.0 {
                        strata.push(Stratified { component, mass });
                    }
                }
            }
        }
        let variance = tones.iter().map(|t| t.1).sum::<f64>() + strata.iter().map(|s| s.mass).sum::<f64>() / PI;
        if !variance.is_finite() {
            return Err(Error::config(
                "spectrum",
                "total variance in the synthesis band overflows",
            ));
        }
        Ok(Self {
            dt,
            len,
            band,
            n_modes,
            tones,
            strata,
            variance,
            warnings,
        })
    }

    /// Variance of the synthesized process.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn warnings(&self) -> &[SynthesisWarning] {
        &self.warnings
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseTrajectory {
        let mut samples = vec![0.0; self.len];
        self.add_into(rng, &mut samples);
        NoiseTrajectory { dt: self.dt, samples }
    }

    fn add_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for &(omega, var) in &self.tones {
            add_mode(out, self.dt, omega, var.sqrt(), rng);
        }
        let n = self.n_modes as f64;
        for s in &self.strata {
            let sd = (s.mass / (PI * n)).sqrt();
            for j in 0..self.n_modes {
                let u: f64 = rng.random();
                let omega = s.component.inverse_cumulative((j as f64 + u) / n * s.mass, self.band);
                add_mode(out, self.dt, omega, sd, rng);
            }
        }
    }
}

/// Adds `A cos ωt + B sin ωt` with `A, B ~ N(0, sd²)` to `out`.
fn add_mode<R: Rng + ?Sized>(out: &mut [f64], dt: f64, omega: f64, sd: f64, rng: &mut R) {
    const REANCHOR: usize = 128;
    let a: f64 = sd * rng.sample::<f64, _>(StandardNormal);
    let b: f64 = sd * rng.sample::<f64, _>(StandardNormal);
    let amp = Complex64::new(a, -b);
    let step = Complex64::from_polar(1.0, omega * dt);
    for (block, chunk) in out.chunks_mut(REANCHOR).enumerate() {
        let t0 = (block * REANCHOR) as f64 * dt;
        let mut z = amp * Complex64::from_polar(1.0, omega * t0);
        for x in chunk {
            *x += z.re;
            z *= step;
        }
    }
}

/// `ξ(t) = Σ_j a_j cos(ω_j t + φ_j)` targeting `spectrum`. See
/// [`HarmonicSynthesis`] for the construction.
pub fn gaussian_trajectory(
    spectrum: &SpectrumModel,
    duration: f64,
    dt: f64,
    n_modes: usize,
    rng: &RngStream,
) -> Result<(NoiseTrajectory, Vec<SynthesisWarning>)> {
    let synth = HarmonicSynthesis::new(spectrum, duration, dt, n_modes)?;
    let traj = synth.sample(&mut rng.rng());
    Ok((traj, synth.warnings))
}

/// `ξ'_n = v₂(ξ_n² − m)` with `m = base_variance` if `subtract_mean`, else 0.
pub fn quadratic_transform(
    traj: &NoiseTrajectory,
    v2: f64,
    base_variance: f64,
    subtract_mean: bool,
) -> NoiseTrajectory {
    let m = if subtract_mean { base_variance } else { 0.0 };
    NoiseTrajectory {
        dt: traj.dt,
        samples: traj.samples.iter().map(|x| v2 * (x * x - m)).collect(),
    }
}

/// A composable description of the noise seen by the qubit.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSource {
    Zero,
    Ou {
        sigma: f64,
        corr_time: f64,
    },
    /// Harmonic synthesis of a Gaussian process with this spectrum.
    Spectrum {
        model: SpectrumModel,
        n_modes: usize,
    },
    /// `v₂(ξ² − m)` of a Gaussian base process; `m` is the base variance when
    /// `subtract_mean` is set.
    Quadratic {
        base: Box<NoiseSource>,
        v2: f64,
        subtract_mean: bool,
    },
    Sum(Vec<NoiseSource>),
}

impl NoiseSource {
    pub fn ou(sigma: f64, corr_time: f64) -> Self {
        NoiseSource::Ou { sigma, corr_time }
    }

    pub fn spectrum(model: SpectrumModel, n_modes: usize) -> Self {
        NoiseSource::Spectrum { model, n_modes }
    }

    /// Quadratic coupling to an OU process, mean subtracted.
    pub fn quadratic_ou(sigma: f64, corr_time: f64, v2: f64) -> Self {
        NoiseSource::Quadratic {
            base: Box::new(NoiseSource::ou(sigma, corr_time)),
            v2,
            subtract_mean: true,
        }
    }

    /// The spectrum of an equivalent Gaussian process, or `None` when the
    /// source is not Gaussian.
    pub fn gaussian_spectrum(&self) -> Option<SpectrumModel> {
        match self {
            NoiseSource::Zero => Some(SpectrumModel::zero()),
            NoiseSource::Ou { sigma, corr_time } => SpectrumModel::lorentzian(sigma * sigma, *corr_time).ok(),
            NoiseSource::Spectrum { model, .. } => Some(model.clone()),
            NoiseSource::Quadratic { v2, .. } if *v2 == 0.0 => Some(SpectrumModel::zero()),
            NoiseSource::Quadratic { .. } => None,
            NoiseSource::Sum(parts) => parts
                .iter()
                .map(NoiseSource::gaussian_spectrum)
                .try_fold(SpectrumModel::zero(), |acc, s| s.map(|s| acc + s)),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.gaussian_spectrum().is_some()
    }

    /// Default grid step for a protocol whose shortest segment is
    /// `shortest_segment`: `min(τ_c/50, 2π/(20·ω_max), τ_min/20)`, with the
    /// first two terms quartered under a quadratic map.
    pub fn default_dt(&self, shortest_segment: f64) -> f64 {
        self.dt_limit().min(shortest_segment / 20.0)
    }

    fn dt_limit(&self) -> f64 {
        match self {
            NoiseSource::Zero => f64::INFINITY,
            NoiseSource::Ou { corr_time, .. } => corr_time / 50.0,
            NoiseSource::Spectrum { model, .. } => model
                .components()
                .iter()
                .map(|c| match *c {
                    SpectrumComponent::White { .. } => f64::INFINITY,
                    SpectrumComponent::Lorentzian { corr_time, .. } => corr_time / 50.0,
                    SpectrumComponent::NarrowPeak { center, .. } => TAU / (20.0 * center),
                    SpectrumComponent::PowerLaw { high_cutoff, .. } => TAU / (20.0 * high_cutoff),
                })
                .fold(f64::INFINITY, f64::min),
            // Squaring roughens the base process.
            NoiseSource::Quadratic { base, .. } => base.dt_limit() / 4.0,
            NoiseSource::Sum(parts) => parts.iter().map(NoiseSource::dt_limit).fold(f64::INFINITY, f64::min),
        }
    }

    /// Validates parameters and precomputes what a trajectory of the given
    /// span needs.
    pub fn generator(&self, duration: f64, dt: f64) -> Result<NoiseGenerator> {
        check_grid(duration, dt)?;
        let len = NoiseTrajectory::grid_len(duration, dt);
        let kind = self.build(duration, dt)?;
        Ok(NoiseGenerator { dt, len, kind })
    }

    fn build(&self, duration: f64, dt: f64) -> Result<GeneratorKind> {
        Ok(match self {
            NoiseSource::Zero => GeneratorKind::Zero,
            NoiseSource::Ou { sigma, corr_time } => {
                let p = OuProcess::new(*sigma, *corr_time)?;
                p.check_dt(dt)?;
                GeneratorKind::Ou(p)
            }
            NoiseSource::Spectrum { model, n_modes } => {
                GeneratorKind::Harmonic(HarmonicSynthesis::new(model, duration, dt, *n_modes)?)
            }
            NoiseSource::Quadratic {
                base,
                v2,
                subtract_mean,
            } => {
                if !v2.is_finite() {
                    return Err(Error::config("v2", "must be finite"));
                }
                let inner = base.build(duration, dt)?;
                let variance = match inner.variance() {
                    Some(v) => v,
                    None if !subtract_mean => 0.0,
                    None => {
                        return Err(Error::config(
                            "noise.base",
                            "mean subtraction needs a Gaussian base process",
                        ))
                    }
                };
                let mean = if *subtract_mean { variance } else { 0.0 };
                GeneratorKind::Quadratic {
                    base: Box::new(inner),
                    v2: *v2,
                    mean,
                }
            }
            NoiseSource::Sum(parts) => {
                GeneratorKind::Sum(parts.iter().map(|p| p.build(duration, dt)).collect::<Result<_>>()?)
            }
        })
    }
}

#[derive(Debug, Clone)]
enum GeneratorKind {
    Zero,
    Ou(OuProcess),
    Harmonic(HarmonicSynthesis),
    Quadratic {
        base: Box<GeneratorKind>,
        v2: f64,
        mean: f64,
    },
    Sum(Vec<GeneratorKind>),
}

impl GeneratorKind {
    /// Variance of Gaussian generators.
    fn variance(&self) -> Option<f64> {
        match self {
            GeneratorKind::Zero => Some(0.0),
            GeneratorKind::Ou(p) => Some(p.sigma * p.sigma),
            GeneratorKind::Harmonic(h) => Some(h.variance),
            GeneratorKind::Quadratic { .. } => None,
            GeneratorKind::Sum(parts) => parts.iter().map(GeneratorKind::variance).sum(),
        }
    }

    fn add_into<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            GeneratorKind::Zero => {}
            GeneratorKind::Ou(p) => {
                scratch.clear();
                p.fill(dt, out.len(), rng, scratch);
                out.iter_mut().zip(scratch.iter()).for_each(|(o, x)| *o += x);
            }
            GeneratorKind::Harmonic(h) => h.add_into(rng, out),
            GeneratorKind::Quadratic { base, v2, mean } => {
                let mut inner = vec![0.0; out.len()];
                base.add_into(dt, rng, &mut inner, scratch);
                out.iter_mut().zip(inner).for_each(|(o, x)| *o += v2 * (x * x - mean));
            }
            GeneratorKind::Sum(parts) => {
                for p in parts {
                    p.add_into(dt, rng, out, scratch);
                }
            }
        }
    }

    fn warnings(&self, acc: &mut Vec<SynthesisWarning>) {
        match self {
            GeneratorKind::Harmonic(h) => acc.extend(h.warnings.iter().cloned()),
            GeneratorKind::Quadratic { base, .. } => base.warnings(acc),
            GeneratorKind::Sum(parts) => parts.iter().for_each(|p| p.warnings(acc)),
            _ => {}
        }
    }
}

/// A validated generator for trajectories of a fixed length.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    dt: f64,
    len: usize,
    kind: GeneratorKind,
}

impl NoiseGenerator {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn warnings(&self) -> Vec<SynthesisWarning> {
        let mut acc = Vec::new();
        self.kind.warnings(&mut acc);
        acc
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseTrajectory {
        let mut samples = vec![0.0; self.len];
        let mut scratch = Vec::with_capacity(self.len);
        self.kind.add_into(self.dt, rng, &mut samples, &mut scratch);
        NoiseTrajectory { dt: self.dt, samples }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ou_is_deterministic_per_stream() {
        let s = RngStream::new(42, 0);
        let a = ou_trajectory(1.0, 1.0, 2.0, 0.02, &s).unwrap();
        let b = ou_trajectory(1.0, 1.0, 2.0, 0.02, &s).unwrap();
        assert_eq!(a, b);
        let c = ou_trajectory(1.0, 1.0, 2.0, 0.02, &RngStream::new(42, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ou_rejects_undersampling() {
        let err = ou_trajectory(1.0, 1.0, 2.0, 0.1, &RngStream::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "dt"));
    }

    #[test]
    fn ou_rejects_non_positive_sigma() {
        assert!(ou_trajectory(0.0, 1.0, 1.0, 0.01, &RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn zero_noise_is_zero() {
        let t = NoiseTrajectory::zeros(3.0, 0.1).unwrap();
        assert_eq!(t.samples.len(), 31);
        assert!(t.samples.iter().all(|&x| x == 0.0));
        let g = NoiseSource::Zero.generator(3.0, 0.1).unwrap();
        assert!(g
            .sample(&mut RngStream::new(0, 0).rng())
            .samples
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn grid_covers_duration() {
        let t = NoiseTrajectory::zeros(1.0, 0.3).unwrap();
        assert!(t.duration() >= 1.0);
        assert_eq!(NoiseTrajectory::grid_len(1.0, 0.25), 5);
    }

    #[test]
    fn empty_spectrum_gives_zero_trajectory() {
        let (t, w) = gaussian_trajectory(&SpectrumModel::zero(), 1.0, 0.01, 1000, &RngStream::new(3, 0)).unwrap();
        assert!(w.is_empty());
        assert!(t.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quadratic_transform_of_constant() {
        let t = NoiseTrajectory {
            dt: 0.1,
            samples: vec![2.0; 5],
        };
        let q = quadratic_transform(&t, 3.0, 1.0, false);
        assert!(q.samples.iter().all(|&x| x == 12.0));
        let q = quadratic_transform(&t, 3.0, 1.0, true);
        assert!(q.samples.iter().all(|&x| x == 9.0));
    }

    #[test]
    fn narrow_peak_becomes_a_tone() {
        let s = SpectrumModel::new(vec![SpectrumComponent::NarrowPeak {
            weight: 10.0,
            center: 5.0,
            width: 1e-3,
        }])
        .unwrap();
        let h = HarmonicSynthesis::new(&s, 2.0, 0.01, 100).unwrap();
        assert_eq!(h.tones.len(), 1);
        assert!(h.strata.is_empty());
        assert!((h.variance() - 10.0 / PI).abs() < 1e-12);
        // Wide relative to 1/T: synthesized as a cluster.
        let s = SpectrumModel::new(vec![SpectrumComponent::NarrowPeak {
            weight: 10.0,
            center: 5.0,
            width: 1.0,
        }])
        .unwrap();
        let h = HarmonicSynthesis::new(&s, 2.0, 0.01, 100).unwrap();
        assert!(h.tones.is_empty());
        assert_eq!(h.strata.len(), 1);
    }

    #[test]
    fn flags_features_above_band() {
        let s = SpectrumModel::new(vec![SpectrumComponent::NarrowPeak {
            weight: 1.0,
            center: 1e4,
            width: 1e-3,
        }])
        .unwrap();
        let (_, w) = gaussian_trajectory(&s, 1.0, 0.01, 10, &RngStream::new(0, 0)).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn mean_subtraction_requires_gaussian_base() {
        let nested = NoiseSource::Quadratic {
            base: Box::new(NoiseSource::quadratic_ou(1.0, 1.0, 1.0)),
            v2: 1.0,
            subtract_mean: true,
        };
        assert!(nested.generator(1.0, 0.01).is_err());
        assert!(nested.gaussian_spectrum().is_none());
    }

    #[test]
    fn default_dt_rule() {
        let src = NoiseSource::ou(1.0, 1.0);
        assert!((src.default_dt(1.0) - 0.02).abs() < 1e-15);
        assert!((src.default_dt(0.2) - 0.01).abs() < 1e-15);
    }
}
