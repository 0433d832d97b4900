//! Experiment configuration file (TOML). Unknown keys are rejected.

use serde::Deserialize;

use qspec_core::filters::{parse_axes, Axis, MeasurementProtocol};
use qspec_core::montecarlo::EstimatorMode;
use qspec_core::noise::NoiseSource;
use qspec_core::spectroscopy::{CombFamily, TauRule};
use qspec_core::spectrum::{SpectrumComponent, SpectrumModel};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub protocol: Option<ProtocolConfig>,
    pub noise: Option<NoiseConfig>,
    pub ensemble: Option<EnsembleConfig>,
    pub simulate: Option<SimulateConfig>,
    pub scan: Option<ScanConfig>,
    pub reconstruct: Option<ReconstructConfig>,
    pub witness: Option<WitnessConfig>,
    pub filter_dump: Option<FilterDumpConfig>,
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }
}

fn missing(section: &str) -> CliError {
    CliError::invalid(section, "section is required for this experiment")
}

pub fn require<'a, T>(value: &'a Option<T>, section: &str) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| missing(section))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Evolution times; a scalar needs `n`.
    pub tau: OneOrMany,
    pub n: Option<usize>,
    /// Dead times between measurements (scalar or `n − 1` values).
    pub delta: Option<OneOrMany>,
    pub axes: Option<String>,
    #[serde(default)]
    pub omega: f64,
}

impl ProtocolConfig {
    pub fn build(&self) -> CliResult<MeasurementProtocol> {
        let taus = match (&self.tau, self.n) {
            (OneOrMany::One(t), Some(n)) => vec![*t; n],
            (OneOrMany::One(t), None) => vec![*t],
            (OneOrMany::Many(v), None) => v.clone(),
            (OneOrMany::Many(v), Some(n)) if v.len() == n => v.clone(),
            (OneOrMany::Many(v), Some(n)) => {
                return Err(CliError::invalid(
                    "protocol.n",
                    format!("n = {n} but {} values of tau", v.len()),
                ))
            }
        };
        if taus.is_empty() {
            return Err(CliError::invalid("tau", "at least one evolution time is required"));
        }
        let n = taus.len();
        let deltas = match &self.delta {
            None => vec![0.0; n - 1],
            Some(OneOrMany::One(d)) => vec![*d; n - 1],
            Some(OneOrMany::Many(v)) if v.len() + 1 == n => v.clone(),
            Some(OneOrMany::Many(v)) => {
                return Err(CliError::invalid(
                    "delta",
                    format!("expected {} dead times, got {}", n - 1, v.len()),
                ))
            }
        };
        let axes = match &self.axes {
            None => vec![Axis::X; n],
            Some(s) => {
                let a = parse_axes(s)?;
                if a.len() != n {
                    return Err(CliError::invalid(
                        "axes",
                        format!("{} axes for {n} measurements", a.len()),
                    ));
                }
                a
            }
        };
        Ok(MeasurementProtocol::from_times(&taus, &deltas, &axes, self.omega)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentConfig {
    White {
        level: f64,
    },
    Lorentzian {
        variance: f64,
        corr_time: f64,
    },
    NarrowPeak {
        weight: f64,
        center: f64,
        width: f64,
    },
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        low_cutoff: f64,
        high_cutoff: f64,
    },
}

impl ComponentConfig {
    fn build(&self) -> SpectrumComponent {
        match *self {
            ComponentConfig::White { level } => SpectrumComponent::White { level },
            ComponentConfig::Lorentzian { variance, corr_time } => {
                SpectrumComponent::Lorentzian { variance, corr_time }
            }
            ComponentConfig::NarrowPeak { weight, center, width } => {
                SpectrumComponent::NarrowPeak { weight, center, width }
            }
            ComponentConfig::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            } => SpectrumComponent::PowerLaw {
                amplitude,
                exponent,
                low_cutoff,
                high_cutoff,
            },
        }
    }
}

fn default_modes() -> usize {
    4000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    Zero,
    Ou {
        sigma: f64,
        corr_time: f64,
    },
    Spectrum {
        components: Vec<ComponentConfig>,
        #[serde(default = "default_modes")]
        n_modes: usize,
    },
    QuadraticOu {
        sigma: f64,
        corr_time: f64,
        v2: f64,
    },
    Sum {
        parts: Vec<NoiseConfig>,
    },
}

impl NoiseConfig {
    pub fn build(&self) -> CliResult<NoiseSource> {
        Ok(match self {
            NoiseConfig::Zero => NoiseSource::Zero,
            NoiseConfig::Ou { sigma, corr_time } => {
                qspec_core::noise::OuProcess::new(*sigma, *corr_time)?;
                NoiseSource::ou(*sigma, *corr_time)
            }
            NoiseConfig::Spectrum { components, n_modes } => {
                if *n_modes == 0 {
                    return Err(CliError::invalid("n_modes", "must be at least 1"));
                }
                let model = SpectrumModel::new(components.iter().map(ComponentConfig::build).collect())?;
                NoiseSource::spectrum(model, *n_modes)
            }
            NoiseConfig::QuadraticOu { sigma, corr_time, v2 } => {
                qspec_core::noise::OuProcess::new(*sigma, *corr_time)?;
                if !v2.is_finite() {
                    return Err(CliError::invalid("v2", "must be finite"));
                }
                NoiseSource::quadratic_ou(*sigma, *corr_time, *v2)
            }
            NoiseConfig::Sum { parts } => {
                NoiseSource::Sum(parts.iter().map(NoiseConfig::build).collect::<CliResult<_>>()?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Analytic,
    Sampled,
}

impl From<ModeConfig> for EstimatorMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Analytic => EstimatorMode::AnalyticPerTrajectory,
            ModeConfig::Sampled => EstimatorMode::SampledOutcomes,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    #[serde(default)]
    pub mode: ModeConfig,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub correlators: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FamilySelection {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ScanModeConfig {
    #[default]
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub family: Option<FamilySelection>,
    #[serde(rename = "N")]
    pub n_blocks: usize,
    pub tau: Option<f64>,
    pub tau_fraction: Option<f64>,
    pub omega_p_min: f64,
    pub omega_p_max: f64,
    pub omega_p_steps: usize,
    #[serde(default)]
    pub mode: ScanModeConfig,
    /// Search window `[lo, hi]` for peak localization.
    pub localize: Option<[f64; 2]>,
}

impl ScanConfig {
    pub fn families(&self) -> CliResult<Vec<CombFamily>> {
        let names = match &self.family {
            None => vec!["measurement".to_string(), "dd".to_string()],
            Some(FamilySelection::One(s)) => vec![s.clone()],
            Some(FamilySelection::Many(v)) => v.clone(),
        };
        if names.is_empty() {
            return Err(CliError::invalid("family", "at least one family is required"));
        }
        names.iter().map(|n| self.family_named(n)).collect()
    }

    pub fn family_named(&self, name: &str) -> CliResult<CombFamily> {
        match name {
            "dd" => Ok(CombFamily::Dd),
            "measurement" => Ok(CombFamily::Measurement { tau: self.tau_rule()? }),
            other => Err(CliError::invalid(
                "family",
                format!("unknown family `{other}` (expected measurement or dd)"),
            )),
        }
    }

    fn tau_rule(&self) -> CliResult<TauRule> {
        match (self.tau, self.tau_fraction) {
            (Some(t), None) => Ok(TauRule::Fixed(t)),
            (None, Some(f)) => Ok(TauRule::FractionOfPeriod(f)),
            (None, None) => Err(CliError::invalid(
                "tau",
                "the measurement family needs tau or tau_fraction",
            )),
            (Some(_), Some(_)) => Err(CliError::invalid("tau", "give either tau or tau_fraction, not both")),
        }
    }

    pub fn grid(&self) -> CliResult<Vec<f64>> {
        Ok(qspec_core::spectroscopy::omega_grid(
            self.omega_p_min,
            self.omega_p_max,
            self.omega_p_steps,
        )?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    /// `Σ |c_m|² S(mω_p)` from the configured spectrum.
    Model,
    /// `χ/T` from an analytic scan.
    Scan,
    /// `omega_p,R` pairs from a CSV file.
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub source: RateSource,
    pub family: Option<String>,
    pub input: Option<String>,
    pub m0: Option<usize>,
    pub m_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub sigma: f64,
    pub corr_time: f64,
    pub v2: f64,
    #[serde(rename = "T_min")]
    pub t_min: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDumpConfig {
    pub signs: Option<String>,
    pub omega_max: f64,
    pub points: usize,
}
