//! Two-sided, even power spectral densities built from simple components.
//!
//! Conventions: `S(ω) = ∫ C(t) e^{iωt} dt`, so the variance of the noise is
//! `σ² = ∫₀^∞ S(ω) dω/π`. Every component is evaluated at `|ω|`.

use std::f64::consts::PI;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumComponent {
    /// Flat level `S_B` at all frequencies.
    White { level: f64 },
    /// `2σ²τ_c / (1 + ω²τ_c²)`, the spectrum of an Ornstein–Uhlenbeck
    /// process with autocovariance `σ² e^{-|t|/τ_c}`.
    Lorentzian { variance: f64, corr_time: f64 },
    /// A sharp line of integrated weight `σ₀²` at `±center`, i.e.
    /// `σ₀²[L(ω-ω₀) + L(ω+ω₀)]` with `L` a unit-area Lorentzian of full
    /// width `width`. Contributes `σ₀²/π` to the variance.
    NarrowPeak { weight: f64, center: f64, width: f64 },
    /// `A / |ω|^exponent` on `[low_cutoff, high_cutoff]`, zero elsewhere.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        low_cutoff: f64,
        high_cutoff: f64,
    },
}

impl SpectrumComponent {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectrumComponent::White { level } => ensure_non_negative("level", level),
            SpectrumComponent::Lorentzian { variance, corr_time } => {
                ensure_non_negative("variance", variance)?;
                ensure_positive("corr_time", corr_time)
            }
            SpectrumComponent::NarrowPeak { weight, center, width } => {
                ensure_non_negative("weight", weight)?;
                ensure_positive("center", center)?;
                ensure_positive("width", width)
            }
            SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            } => {
                ensure_non_negative("amplitude", amplitude)?;
                if !exponent.is_finite() {
                    return Err(Error::config("exponent", "must be finite"));
                }
                ensure_positive("low_cutoff", low_cutoff)?;
                ensure_positive("high_cutoff", high_cutoff)?;
                if high_cutoff <= low_cutoff {
                    return Err(Error::config("high_cutoff", "must exceed low_cutoff"));
                }
                Ok(())
            }
        }
    }

    pub fn density(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match *self {
            SpectrumComponent::White { level } => level,
            SpectrumComponent::Lorentzian { variance, corr_time } => {
                2.0 * variance * corr_time / (1.0 + (w * corr_time).powi(2))
            }
            SpectrumComponent::NarrowPeak { weight, center, width } => {
                let g = 0.5 * width;
                let line = |x: f64| g / PI / (x * x + g * g);
                weight * (line(w - center) + line(w + center))
            }
            SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            } => {
                if w < low_cutoff || w > high_cutoff {
                    0.0
                } else {
                    amplitude * w.powf(-exponent)
                }
            }
        }
    }

    /// `∫₀^ω S(x) dx` for `ω ≥ 0`.
    pub fn cumulative(&self, omega: f64) -> f64 {
        let w = omega.max(0.0);
        match *self {
            SpectrumComponent::White { level } => level * w,
            SpectrumComponent::Lorentzian { variance, corr_time } => 2.0 * variance * (w * corr_time).atan(),
            SpectrumComponent::NarrowPeak { weight, center, width } => {
                let g = 0.5 * width;
                let f = |x: f64| (x / g).atan() / PI;
                weight * ((f(w - center) - f(-center)) + (f(w + center) - f(center)))
            }
            SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            } => {
                let x = w.clamp(low_cutoff, high_cutoff);
                amplitude * power_integral(low_cutoff, x, exponent)
            }
        }
    }

    /// Inverse of [`cumulative`](Self::cumulative) restricted to `[0, band]`.
    pub(crate) fn inverse_cumulative(&self, mass: f64, band: f64) -> f64 {
        match *self {
            SpectrumComponent::White { level } if level > 0.0 => (mass / level).min(band),
            SpectrumComponent::Lorentzian { variance, corr_time } if variance > 0.0 => {
                let phi = (mass / (2.0 * variance)).min(0.5 * PI * (1.0 - 1e-15));
                (phi.tan() / corr_time).min(band)
            }
            SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                ..
            } if amplitude > 0.0 => {
                let m = mass / amplitude;
                let w = if (exponent - 1.0).abs() < 1e-12 {
                    low_cutoff * m.exp()
                } else {
                    let e = 1.0 - exponent;
                    (low_cutoff.powf(e) + e * m).powf(1.0 / e)
                };
                w.min(band)
            }
            _ => bisect_inverse(|w| self.cumulative(w), mass, band),
        }
    }

    /// Frequencies at which the density changes character (knees, lines,
    /// cutoffs). Used to place quadrature breakpoints.
    pub fn features(&self) -> Vec<f64> {
        match *self {
            SpectrumComponent::White { .. } => vec![],
            SpectrumComponent::Lorentzian { corr_time, .. } => vec![1.0 / corr_time],
            SpectrumComponent::NarrowPeak { center, .. } => vec![center],
            SpectrumComponent::PowerLaw {
                low_cutoff,
                high_cutoff,
                ..
            } => vec![low_cutoff, high_cutoff],
        }
    }

    /// Upper bound on `S(ω')` for all `ω' ≥ ω`.
    pub fn sup_above(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match *self {
            SpectrumComponent::White { level } => level,
            SpectrumComponent::Lorentzian { .. } => self.density(w),
            SpectrumComponent::NarrowPeak { center, .. } => {
                if w <= center {
                    self.density(center)
                } else {
                    self.density(w)
                }
            }
            SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            } => {
                if w > high_cutoff {
                    0.0
                } else {
                    let lo = w.max(low_cutoff);
                    if exponent >= 0.0 {
                        amplitude * lo.powf(-exponent)
                    } else {
                        amplitude * high_cutoff.powf(-exponent)
                    }
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        match *self {
            SpectrumComponent::White { level } => level == 0.0,
            SpectrumComponent::Lorentzian { variance, .. } => variance == 0.0,
            SpectrumComponent::NarrowPeak { weight, .. } => weight == 0.0,
            SpectrumComponent::PowerLaw { amplitude, .. } => amplitude == 0.0,
        }
    }
}

fn power_integral(a: f64, b: f64, exponent: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if (exponent - 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        let e = 1.0 - exponent;
        (b.powf(e) - a.powf(e)) / e
    }
}

fn bisect_inverse(cdf: impl Fn(f64) -> f64, mass: f64, band: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, band);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// A sum of spectral components.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectrumModel {
    components: Vec<SpectrumComponent>,
}

impl SpectrumModel {
    pub fn new(components: Vec<SpectrumComponent>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn white(level: f64) -> Result<Self> {
        Self::new(vec![SpectrumComponent::White { level }])
    }

    pub fn lorentzian(variance: f64, corr_time: f64) -> Result<Self> {
        Self::new(vec![SpectrumComponent::Lorentzian { variance, corr_time }])
    }

    pub fn with(mut self, component: SpectrumComponent) -> Result<Self> {
        component.validate()?;
        self.components.push(component);
        Ok(self)
    }

    pub fn components(&self) -> &[SpectrumComponent] {
        &self.components
    }

    /// True when every component carries no power.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SpectrumComponent::is_zero)
    }

    pub fn density(&self, omega: f64) -> f64 {
        self.components.iter().map(|c| c.density(omega)).sum()
    }

    /// Variance carried by frequencies in `[0, band]`, `∫₀^band S dω/π`.
    pub fn band_variance(&self, band: f64) -> f64 {
        self.components.iter().map(|c| c.cumulative(band)).sum::<f64>() / PI
    }

    /// Total variance, or `None` if a white component makes it diverge.
    pub fn variance(&self) -> Option<f64> {
        let mut total = 0.0;
        for c in &self.components {
            total += match *c {
                SpectrumComponent::White { level } if level > 0.0 => return None,
                SpectrumComponent::White { .. } => 0.0,
                _ => c.cumulative(f64::INFINITY) / PI,
            };
        }
        Some(total)
    }

    pub fn sup_above(&self, omega: f64) -> f64 {
        self.components.iter().map(|c| c.sup_above(omega)).sum()
    }

    pub fn features(&self) -> Vec<f64> {
        self.components.iter().flat_map(|c| c.features()).collect()
    }
}

impl std::ops::Add for SpectrumModel {
    type Output = SpectrumModel;

    fn add(mut self, rhs: SpectrumModel) -> SpectrumModel {
        self.components.extend(rhs.components);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_variance_is_sigma_squared() {
        let s = SpectrumModel::lorentzian(2.5, 0.3).unwrap();
        assert!((s.variance().unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_variance() {
        let s = SpectrumModel::new(vec![SpectrumComponent::NarrowPeak {
            weight: 1e7,
            center: 500.0,
            width: 1.5e-2,
        }])
        .unwrap();
        let v = s.variance().unwrap();
        assert!((v - 1e7 / PI).abs() / v < 1e-12);
    }

    #[test]
    fn white_variance_diverges_but_band_is_finite() {
        let s = SpectrumModel::white(50.0).unwrap();
        assert!(s.variance().is_none());
        assert!((s.band_variance(10.0) - 500.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            SpectrumModel::lorentzian(1.0, -1.0),
            Err(Error::Config { ref key, .. }) if key == "corr_time"
        ));
        assert!(SpectrumModel::new(vec![SpectrumComponent::PowerLaw {
            amplitude: 1.0,
            exponent: 1.0,
            low_cutoff: 2.0,
            high_cutoff: 1.0,
        }])
        .is_err());
    }

    #[test]
    fn inverse_cumulative_roundtrips() {
        let comps = [
            SpectrumComponent::White { level: 3.0 },
            SpectrumComponent::Lorentzian {
                variance: 1.5,
                corr_time: 0.7,
            },
            SpectrumComponent::PowerLaw {
                amplitude: 2.0,
                exponent: 1.0,
                low_cutoff: 0.1,
                high_cutoff: 50.0,
            },
            SpectrumComponent::PowerLaw {
                amplitude: 2.0,
                exponent: 0.5,
                low_cutoff: 0.1,
                high_cutoff: 50.0,
            },
            SpectrumComponent::NarrowPeak {
                weight: 4.0,
                center: 20.0,
                width: 0.5,
            },
        ];
        for c in comps {
            for w in [0.3, 5.0, 21.0, 40.0] {
                let m = c.cumulative(w);
                let back = c.inverse_cumulative(m, 100.0);
                assert!((back - w).abs() < 1e-8 * w.max(1.0), "{c:?} at {w}: {back}");
            }
        }
    }

    #[test]
    fn density_is_even_and_non_negative() {
        let s = SpectrumModel::new(vec![
            SpectrumComponent::White { level: 1.0 },
            SpectrumComponent::Lorentzian {
                variance: 1.0,
                corr_time: 1.0,
            },
            SpectrumComponent::NarrowPeak {
                weight: 1.0,
                center: 3.0,
                width: 0.1,
            },
        ])
        .unwrap();
        for w in [0.0, 0.5, 2.9, 3.0, 10.0] {
            assert_eq!(s.density(w), s.density(-w));
            assert!(s.density(w) >= 0.0);
        }
    }
}
