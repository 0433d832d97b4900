//! Time-domain filters induced by measurement protocols and pulse
//! sequences, and their exact frequency-domain transforms.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Measurement axis of a projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'x' | 'X' => Some(Axis::X),
            'y' | 'Y' => Some(Axis::Y),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
        }
    }
}

/// Parses an axis string such as `"xyx"`.
pub fn parse_axes(s: &str) -> Result<Vec<Axis>> {
    s.chars()
        .map(|c| Axis::from_char(c).ok_or_else(|| Error::config("axes", format!("unknown axis `{c}` in `{s}`"))))
        .collect()
}

pub fn axes_to_string(axes: &[Axis]) -> String {
    axes.iter().map(|a| a.as_char()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Free evolution before the measurement.
    pub tau: f64,
    /// Dead time between the measurement and the next initialization.
    pub delta: f64,
    pub axis: Axis,
}

/// Timing and axes of an `n`-measurement run.
///
/// The `k`-th initialization happens at `t_k − τ_k` and the measurement at
/// `t_k`, with `t_k = Σ_{j≤k} τ_j + Σ_{j<k} δt_j`. The dead time after the
/// last measurement is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProtocol {
    segments: Vec<Segment>,
    omega: f64,
}

impl MeasurementProtocol {
    pub fn new(mut segments: Vec<Segment>, omega: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::config("protocol", "needs at least one measurement"));
        }
        for s in &segments {
            ensure_positive("tau", s.tau)?;
            ensure_non_negative("delta", s.delta)?;
        }
        if !omega.is_finite() {
            return Err(Error::config("omega", "must be finite"));
        }
        if let Some(last) = segments.last_mut() {
            last.delta = 0.0;
        }
        Ok(Self { segments, omega })
    }

    /// Equal-axis protocol from evolution times and the dead times between
    /// them (`deltas.len()` is `taus.len() − 1`, or empty for no gaps).
    pub fn from_times(taus: &[f64], deltas: &[f64], axes: &[Axis], omega: f64) -> Result<Self> {
        if axes.len() != taus.len() {
            return Err(Error::Argument(format!(
                "{} axes for {} segments",
                axes.len(),
                taus.len()
            )));
        }
        if !deltas.is_empty() && deltas.len() + 1 != taus.len() {
            return Err(Error::Argument(format!(
                "expected {} dead times, got {}",
                taus.len().saturating_sub(1),
                deltas.len()
            )));
        }
        let segments = taus
            .iter()
            .zip(axes)
            .enumerate()
            .map(|(k, (&tau, &axis))| Segment {
                tau,
                delta: deltas.get(k).copied().unwrap_or(0.0),
                axis,
            })
            .collect();
        Self::new(segments, omega)
    }

    /// `n` segments of length `tau` separated by `delta`, all along `axis`.
    pub fn uniform(n: usize, tau: f64, delta: f64, axis: Axis, omega: f64) -> Result<Self> {
        Self::new(vec![Segment { tau, delta, axis }; n], omega)
    }

    /// Two-arm echo timing `(τ, τ)` without dead time.
    pub fn echo(tau: f64) -> Result<Self> {
        Self::uniform(2, tau, 0.0, Axis::X, 0.0)
    }

    /// CP-2 timing `(τ, 2τ, τ)` without dead time.
    pub fn cp2(tau: f64) -> Result<Self> {
        Self::from_times(&[tau, 2.0 * tau, tau], &[], &[Axis::X; 3], 0.0)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.segments.iter().map(|s| s.axis).collect()
    }

    pub fn with_axes(&self, axes: &[Axis]) -> Result<Self> {
        if axes.len() != self.len() {
            return Err(Error::Argument(format!(
                "{} axes for {} segments",
                axes.len(),
                self.len()
            )));
        }
        let mut out = self.clone();
        for (s, &a) in out.segments.iter_mut().zip(axes) {
            s.axis = a;
        }
        Ok(out)
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self {
            segments: self.segments.clone(),
            omega,
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.tau).collect()
    }

    /// Measurement times `t_k`.
    pub fn measurement_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.len());
        for s in &self.segments {
            t += s.tau;
            out.push(t);
            t += s.delta;
        }
        out
    }

    /// Evolution windows `(t_k − τ_k, t_k)`.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        self.measurement_times()
            .into_iter()
            .zip(&self.segments)
            .map(|(t, s)| (t - s.tau, t))
            .collect()
    }

    /// `t_n`, the time of the last measurement.
    pub fn span(&self) -> f64 {
        *self.measurement_times().last().expect("non-empty protocol")
    }

    pub fn shortest_segment(&self) -> f64 {
        self.segments.iter().map(|s| s.tau).fold(f64::INFINITY, f64::min)
    }
}

/// Signs `s_k ∈ {+1, −1}` selecting a filter; `s_1 = +1` by convention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Argument("empty sign pattern".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Argument("signs must be +1 or -1".into()));
        }
        if signs[0] != 1 {
            return Err(Error::Argument("the first sign must be +1".into()));
        }
        Ok(Self(signs))
    }

    /// `(1, −1, 1, …)` of length `n`: the pulse-sequence analogue.
    pub fn alternating(n: usize) -> Self {
        Self((0..n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect())
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// All `2^{n−1}` patterns with `s_1 = +1`, in binary order of the tail.
    pub fn enumerate(n: usize) -> impl Iterator<Item = SignPattern> {
        (0..1usize << n.saturating_sub(1)).map(move |bits| {
            let mut v = vec![1i8; n];
            for (k, s) in v.iter_mut().enumerate().skip(1) {
                if bits >> (k - 1) & 1 == 1 {
                    *s = -1;
                }
            }
            SignPattern(v)
        })
    }

    /// Parses `"+-+"` or `"1,-1,1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let signs: Option<Vec<i8>> = if s.contains(',') {
            s.split(',')
                .map(|p| match p.trim() {
                    "1" | "+1" => Some(1),
                    "-1" => Some(-1),
                    _ => None,
                })
                .collect()
        } else {
            s.chars()
                .map(|c| match c {
                    '+' => Some(1),
                    '-' => Some(-1),
                    _ => None,
                })
                .collect()
        };
        Self::new(signs.ok_or_else(|| Error::config("signs", format!("cannot parse `{s}`")))?)
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ s_k τ_k`; zero for balanced filters.
    pub fn weighted_sum(&self, taus: &[f64]) -> f64 {
        self.0.iter().zip(taus).map(|(&s, &t)| f64::from(s) * t).sum()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// A piecewise-constant filter taking values in `{−1, 0, +1}`.
///
/// Interval `i` is `[breakpoints[i], breakpoints[i+1])` with value
/// `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFilter {
    breakpoints: Vec<f64>,
    values: Vec<i8>,
}

impl PiecewiseFilter {
    /// Builds a filter from consecutive `(duration, value)` pieces starting
    /// at `t = 0`. Zero-length pieces are dropped and equal neighbours merged.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (f64, i8)>) -> Result<Self> {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<i8> = Vec::new();
        let mut t = 0.0;
        for (len, v) in pieces {
            ensure_non_negative("duration", len)?;
            if !(-1..=1).contains(&v) {
                return Err(Error::Argument(format!("filter value {v} not in {{-1,0,1}}")));
            }
            if len == 0.0 {
                continue;
            }
            t += len;
            if values.last() == Some(&v) {
                *breakpoints.last_mut().expect("non-empty") = t;
            } else {
                values.push(v);
                breakpoints.push(t);
            }
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn total_duration(&self) -> f64 {
        *self.breakpoints.last().expect("at least the origin")
    }

    /// `(start, end, value)` for each interval.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, i8)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn value_at(&self, t: f64) -> i8 {
        if t < 0.0 || t >= self.total_duration() {
            return 0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= t) - 1;
        self.values[i]
    }

    /// `∫ f dt`.
    pub fn integral(&self) -> f64 {
        self.intervals().map(|(a, b, v)| f64::from(v) * (b - a)).sum()
    }

    /// `∫ f² dt`, the time the qubit is exposed to noise.
    pub fn exposure(&self) -> f64 {
        self.intervals().filter(|i| i.2 != 0).map(|(a, b, _)| b - a).sum()
    }

    /// Sum of absolute jumps including the edges, so `|f̃(ω)| ≤ J/|ω|`.
    pub fn total_variation(&self) -> f64 {
        let mut prev = 0i8;
        let mut j = 0.0;
        for &v in &self.values {
            j += f64::from((v - prev).abs());
            prev = v;
        }
        j + f64::from(prev.abs())
    }
}

/// Filter of a measurement protocol for the correlator selected by `signs`:
/// `s_k` on `(t_k − τ_k, t_k)` and `0` during dead times.
pub fn build_filter(protocol: &MeasurementProtocol, signs: &SignPattern) -> Result<PiecewiseFilter> {
    if protocol.len() != signs.len() {
        return Err(Error::Argument(format!(
            "protocol has {} measurements but sign pattern has {}",
            protocol.len(),
            signs.len()
        )));
    }
    PiecewiseFilter::from_pieces(
        protocol
            .segments()
            .iter()
            .zip(signs.signs())
            .flat_map(|(seg, &s)| [(seg.tau, s), (seg.delta, 0)]),
    )
}

/// Filter of an ideal pulse sequence: starts at `+1` and flips sign at each
/// pulse, never zero.
pub fn dd_filter(pulse_times: &[f64], total_time: f64) -> Result<PiecewiseFilter> {
    ensure_positive("total_time", total_time)?;
    let mut prev = 0.0;
    for &t in pulse_times {
        if !(t > prev && t < total_time) {
            return Err(Error::Argument(format!(
                "pulse times must be strictly increasing inside (0, {total_time})"
            )));
        }
        prev = t;
    }
    let mut pieces = Vec::with_capacity(pulse_times.len() + 1);
    let mut start = 0.0;
    let mut sign = 1i8;
    for &t in pulse_times.iter().chain(std::iter::once(&total_time)) {
        pieces.push((t - start, sign));
        start = t;
        sign = -sign;
    }
    PiecewiseFilter::from_pieces(pieces)
}

/// Pulse times `k·τ'` for `k = 1..2N−1` and total time `2Nτ'`: `N` blocks of
/// the periodic sequence whose base frequency is `π/τ'`.
pub fn periodic_dd_filter(interpulse: f64, n_blocks: usize) -> Result<PiecewiseFilter> {
    ensure_positive("interpulse", interpulse)?;
    if n_blocks == 0 {
        return Err(Error::config("N", "must be at least 1"));
    }
    let pulses: Vec<f64> = (1..2 * n_blocks).map(|k| k as f64 * interpulse).collect();
    dd_filter(&pulses, 2.0 * n_blocks as f64 * interpulse)
}

/// `sin(x)/x`, with the series below `|x| < 1e-6`.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `f̃(ω) = ∫ f(t) e^{iωt} dt`, exact for piecewise-constant `f`.
///
/// Each interval contributes `v (b−a) e^{iω(a+b)/2} sinc(ω(b−a)/2)`, which is
/// the closed form `v (e^{iωb} − e^{iωa})/(iω)` written so that it stays
/// accurate as `ω → 0`.
pub fn filter_fourier(filter: &PiecewiseFilter, omega: f64) -> Complex64 {
    filter
        .intervals()
        .filter(|i| i.2 != 0)
        .map(|(a, b, v)| {
            let len = b - a;
            Complex64::from_polar(f64::from(v) * len * sinc(0.5 * omega * len), 0.5 * omega * (a + b))
        })
        .sum()
}

/// `|f̃(ω)|²`.
pub fn filter_power(filter: &PiecewiseFilter, omega: f64) -> f64 {
    filter_fourier(filter, omega).norm_sqr()
}

/// Fourier coefficient of the periodic measurement block
/// `(τ on, δt off, τ on with flipped sign, δt off)` at harmonic `m`:
/// `(2i/πm) cos(πm δt / (2(τ+δt)))` for odd `m`, zero for even `m`.
pub fn comb_coefficient(m: i64, tau: f64, dt: f64) -> Complex64 {
    if m % 2 == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mf = m as f64;
    let amp = 2.0 / (PI * mf) * (PI * mf * dt / (2.0 * (tau + dt))).cos();
    Complex64::new(0.0, amp)
}

/// `|c_m|²`.
pub fn comb_weight(m: i64, tau: f64, dt: f64) -> f64 {
    comb_coefficient(m, tau, dt).norm_sqr()
}

/// Default harmonic truncation `max(51, 10⌈δt/τ⌉)`.
pub fn default_comb_order(tau: f64, dt: f64) -> usize {
    51usize.max(10 * (dt / tau).ceil() as usize)
}

/// Comb approximation `T Σ_m |c_m|² T sinc²((ω − mω_p)T/2)` over odd
/// `|m| ≤ m_max`, with `T = N·T_B`, `T_B = 2(τ+δt)`, `ω_p = π/(τ+δt)`.
pub fn comb_power_approx(omega: f64, tau: f64, dt: f64, n_blocks: usize, m_max: usize) -> f64 {
    let tb = 2.0 * (tau + dt);
    let t = n_blocks as f64 * tb;
    let wp = PI / (tau + dt);
    let m_max = m_max as i64;
    (-m_max..=m_max)
        .filter(|m| m % 2 != 0)
        .map(|m| {
            let x = 0.5 * (omega - m as f64 * wp) * t;
            comb_weight(m, tau, dt) * t * t * sinc(x).powi(2)
        })
        .sum()
}

/// The `2N`-measurement protocol with uniform `τ`, `δt` whose alternating
/// filter is `N` copies of the comb block.
pub fn comb_protocol(tau: f64, dt: f64, n_blocks: usize) -> Result<MeasurementProtocol> {
    if n_blocks == 0 {
        return Err(Error::config("N", "must be at least 1"));
    }
    MeasurementProtocol::uniform(2 * n_blocks, tau, dt, Axis::X, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn echo_filter() {
        let p = MeasurementProtocol::echo(1.5).unwrap();
        let f = build_filter(&p, &SignPattern::alternating(2)).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 1.5, 3.0]);
        assert_eq!(f.values(), &[1, -1]);
        assert_eq!(f.integral(), 0.0);
    }

    #[test]
    fn cp2_filter() {
        let p = MeasurementProtocol::cp2(1.0).unwrap();
        let f = build_filter(&p, &SignPattern::alternating(3)).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 1.0, 3.0, 4.0]);
        assert_eq!(f.values(), &[1, -1, 1]);
    }

    #[test]
    fn free_induction_filter() {
        let p = MeasurementProtocol::uniform(1, 2.0, 5.0, Axis::X, 0.0).unwrap();
        let f = build_filter(&p, &SignPattern::all_plus(1)).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 2.0]);
        assert_eq!(f.values(), &[1]);
    }

    #[test]
    fn dead_times_are_zero() {
        let p = MeasurementProtocol::from_times(&[1.0, 2.0], &[0.5], &[Axis::X, Axis::Y], 0.0).unwrap();
        assert_eq!(p.measurement_times(), vec![1.0, 3.5]);
        let f = build_filter(&p, &SignPattern::alternating(2)).unwrap();
        assert_eq!(f.value_at(0.5), 1);
        assert_eq!(f.value_at(1.2), 0);
        assert_eq!(f.value_at(2.0), -1);
        assert_eq!(f.exposure(), 3.0);
    }

    #[test]
    fn sign_length_mismatch() {
        let p = MeasurementProtocol::echo(1.0).unwrap();
        assert!(matches!(
            build_filter(&p, &SignPattern::alternating(3)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn protocol_validation_names_tau() {
        let err = MeasurementProtocol::uniform(2, -1.0, 0.0, Axis::X, 0.0).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "tau"));
    }

    #[test]
    fn first_sign_must_be_plus() {
        assert!(SignPattern::new(vec![-1, 1]).is_err());
        assert_eq!(SignPattern::parse("+-+").unwrap(), SignPattern::alternating(3));
        assert_eq!(SignPattern::parse("1,-1").unwrap(), SignPattern::alternating(2));
        assert_eq!(SignPattern::enumerate(3).count(), 4);
    }

    #[test]
    fn dd_filter_cases() {
        let f = dd_filter(&[], 2.0).unwrap();
        assert_eq!(f.values(), &[1]);
        let echo = dd_filter(&[1.0], 2.0).unwrap();
        let m = build_filter(&MeasurementProtocol::echo(1.0).unwrap(), &SignPattern::alternating(2)).unwrap();
        assert_eq!(echo, m);
        assert!(dd_filter(&[1.0, 0.5], 2.0).is_err());
        assert!(dd_filter(&[2.0], 2.0).is_err());
    }

    #[test]
    fn block_transform_magnitude() {
        // |f̃|² of a unit block is (4/ω²) sin²(ωτ/2).
        let f = PiecewiseFilter::from_pieces([(0.7, 1)]).unwrap();
        for w in [0.1, 1.0, 3.3, 40.0] {
            let expect = 4.0 / (w * w) * (0.5 * w * 0.7_f64).sin().powi(2);
            assert!(approx(filter_power(&f, w), expect, 1e-12));
        }
        assert!(approx(filter_fourier(&f, 0.0).re, 0.7, 1e-15));
    }

    #[test]
    fn two_block_transform_matches_product_form() {
        // (τ, δt, τ) with signs (1,1): 16/ω² sin²(ωτ/2) cos²(ω(τ+δt)/2).
        let (tau, dt) = (0.4, 1.3);
        let p = MeasurementProtocol::uniform(2, tau, dt, Axis::X, 0.0).unwrap();
        let f = build_filter(&p, &SignPattern::all_plus(2)).unwrap();
        for w in [0.2, 1.7, 9.0] {
            let expect = 16.0 / (w * w) * (0.5 * w * tau).sin().powi(2) * (0.5 * w * (tau + dt)).cos().powi(2);
            assert!(approx(filter_power(&f, w), expect, 1e-12));
        }
    }

    #[test]
    fn dd_coefficient_limit() {
        assert!(approx(comb_weight(1, 1.0, 0.0), 4.0 / (PI * PI), 1e-15));
        assert!(approx(comb_weight(3, 1.0, 0.0), 4.0 / (9.0 * PI * PI), 1e-15));
        assert_eq!(comb_weight(2, 1.0, 0.3), 0.0);
        assert!(approx(comb_weight(-5, 1.0, 0.3), comb_weight(5, 1.0, 0.3), 1e-15));
    }

    #[test]
    fn default_order() {
        assert_eq!(default_comb_order(1.0, 1.0), 51);
        assert_eq!(default_comb_order(0.01, 0.49), 490);
    }
}
