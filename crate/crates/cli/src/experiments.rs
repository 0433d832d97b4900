//! Experiments behind each subcommand. Everything is validated and built in
//! `prepare`, so `--dry-run` catches the same errors as a real run.

use std::path::Path;

use qspec_core::filters::{
    axes_to_string, build_filter, default_comb_order, filter_power, parse_axes, Axis, MeasurementProtocol, SignPattern,
};
use qspec_core::gaussian::g_gaussian;
use qspec_core::montecarlo::{
    all_axis_correlators, combination_check, correlator_axes, correlator_g, no_reprep_check, projection_correlators,
    projection_correlators_gaussian, same_axis_decomposition_check, CorrelatorEstimate, Ensemble, EstimatorMode,
};
use qspec_core::noise::NoiseSource;
use qspec_core::nongaussian::{log_times, witness_sweep};
use qspec_core::rng::RngStream;
use qspec_core::spectroscopy::{
    model_rates, peak_localization, reconstruct, scan, CombFamily, PeakLocalization, RateSample, ScanMode,
};
use qspec_core::spectrum::SpectrumModel;

use crate::config::{require, Config, RateSource, ScanConfig, ScanModeConfig};
use crate::error::{CliError, CliResult};
use crate::table::{num, Table};

pub struct Report {
    pub tables: Vec<Table>,
    /// Human-readable summary lines.
    pub notes: Vec<String>,
}

pub trait Experiment {
    /// Derived timing, printed by `--dry-run`.
    fn schedule(&self) -> Table;
    fn run(&self) -> CliResult<Report>;
}

fn protocol_schedule(p: &MeasurementProtocol) -> Table {
    let mut t = Table::new("schedule", &["k", "t_start", "t_k", "tau", "delta", "axis"]);
    for (k, ((s, (a, b)), seg)) in p.taus().iter().zip(p.windows()).zip(p.segments()).enumerate() {
        t.push(vec![
            (k + 1).to_string(),
            num(a),
            num(b),
            num(*s),
            num(seg.delta),
            seg.axis.as_char().to_string(),
        ]);
    }
    t
}

fn gaussian_spectrum(source: &NoiseSource, what: &str) -> CliResult<SpectrumModel> {
    source
        .gaussian_spectrum()
        .ok_or_else(|| CliError::invalid("noise", format!("{what} needs a Gaussian noise source")))
}

fn build_ensemble(cfg: &Config, seed: u64, stream: u64) -> CliResult<(Ensemble, EstimatorMode)> {
    let ens = require(&cfg.ensemble, "ensemble")?;
    let source = require(&cfg.noise, "noise")?.build()?;
    let mut e = Ensemble::new(source, ens.n_traj, RngStream::new(seed, stream))?;
    if let Some(dt) = ens.dt {
        e = e.with_dt(dt)?;
    }
    Ok((e, ens.mode.into()))
}

// ---------------------------------------------------------------- simulate

enum Request {
    Axes(Vec<Axis>),
    G(SignPattern),
    AllAxes,
    Combine(SignPattern),
    NoReprep,
    SameAxis,
    Projection,
}

fn parse_signs(arg: Option<&str>, n: usize) -> CliResult<SignPattern> {
    let s = match arg {
        None => SignPattern::alternating(n),
        Some(a) => SignPattern::parse(a)?,
    };
    if s.len() != n {
        return Err(CliError::invalid(
            "correlators",
            format!("sign pattern of length {} for {n} measurements", s.len()),
        ));
    }
    Ok(s)
}

/// `name` or `name(args)`.
fn split_call(spec: &str) -> CliResult<(&str, Option<&str>)> {
    match spec.split_once('(') {
        None => Ok((spec, None)),
        Some((name, rest)) => rest
            .strip_suffix(')')
            .map(|args| (name, Some(args)))
            .ok_or_else(|| CliError::invalid("correlators", format!("unbalanced parentheses in `{spec}`"))),
    }
}

fn parse_request(spec: &str, protocol: &MeasurementProtocol) -> CliResult<Request> {
    let n = protocol.len();
    let (name, args) = split_call(spec.trim())?;
    let req = match (name, args) {
        ("C", None) => Request::Axes(protocol.axes()),
        (c, None) if c.starts_with("C_") => {
            let axes = parse_axes(&c[2..])?;
            if axes.len() != n {
                return Err(CliError::invalid(
                    "correlators",
                    format!("`{c}` has {} axes for {n} measurements", axes.len()),
                ));
            }
            Request::Axes(axes)
        }
        ("g", a) => Request::G(parse_signs(a, n)?),
        ("combine", a) => Request::Combine(parse_signs(a, n)?),
        ("all_axes", None) => Request::AllAxes,
        ("no_reprep", None) => Request::NoReprep,
        ("same_axis", None) => Request::SameAxis,
        ("projection", None) if n == 2 => Request::Projection,
        ("projection", None) => {
            return Err(CliError::invalid(
                "correlators",
                "projection needs a two-measurement protocol",
            ));
        }
        _ => return Err(CliError::invalid("correlators", format!("unknown correlator `{spec}`"))),
    };
    Ok(req)
}

fn signs_label(s: &SignPattern) -> String {
    s.signs().iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
}

pub struct Simulate {
    protocol: MeasurementProtocol,
    ensemble: Ensemble,
    mode: EstimatorMode,
    requests: Vec<Request>,
    dump_trajectory: bool,
}

impl Simulate {
    pub fn prepare(cfg: &Config, seed: u64, dump_trajectory: bool) -> CliResult<Self> {
        let protocol = require(&cfg.protocol, "protocol")?.build()?;
        let (ensemble, mode) = build_ensemble(cfg, seed, 0)?;
        ensemble.generator(&protocol)?;
        let specs = &require(&cfg.simulate, "simulate")?.correlators;
        if specs.is_empty() {
            return Err(CliError::invalid("correlators", "at least one correlator is required"));
        }
        let requests = specs
            .iter()
            .map(|s| parse_request(s, &protocol))
            .collect::<CliResult<Vec<_>>>()?;
        let gaussian = ensemble.source().is_gaussian();
        for r in &requests {
            match r {
                Request::SameAxis if !gaussian => {
                    return Err(CliError::invalid(
                        "correlators",
                        "same_axis needs a Gaussian noise source",
                    ))
                }
                Request::NoReprep if protocol.axes().iter().any(|&a| a != Axis::X) => {
                    return Err(CliError::invalid("axes", "no_reprep measures along x only"))
                }
                _ => {}
            }
        }
        Ok(Self {
            protocol,
            ensemble,
            mode,
            requests,
            dump_trajectory,
        })
    }
}

fn estimate_row(t: &mut Table, name: &str, e: &CorrelatorEstimate) {
    t.push(vec![
        name.to_string(),
        num(e.mean.re),
        num(e.mean.im),
        num(e.std_error),
        e.n_traj.to_string(),
    ]);
}

fn exact_row(t: &mut Table, name: &str, re: f64, im: f64) {
    t.push(vec![name.to_string(), num(re), num(im), num(0.0), "0".into()]);
}

impl Experiment for Simulate {
    fn schedule(&self) -> Table {
        protocol_schedule(&self.protocol)
    }

    fn run(&self) -> CliResult<Report> {
        let mut t = Table::new("simulate", &["name", "re_mean", "im_mean", "std_error", "n_traj"]);
        let p = &self.protocol;
        let spectrum = self.ensemble.source().gaussian_spectrum();
        for r in &self.requests {
            match r {
                Request::Axes(axes) => {
                    let e = correlator_axes(&p.with_axes(axes)?, &self.ensemble, self.mode)?;
                    estimate_row(&mut t, &format!("C_{}", axes_to_string(axes)), &e);
                }
                Request::G(s) => {
                    let name = format!("g({})", signs_label(s));
                    estimate_row(&mut t, &name, &correlator_g(p, s, &self.ensemble)?);
                    if let Some(sp) = &spectrum {
                        let g = g_gaussian(p, s, sp)?;
                        exact_row(&mut t, &format!("{name}:gaussian"), g.re, g.im);
                    }
                }
                Request::AllAxes => {
                    for (axes, e) in all_axis_correlators(p, &self.ensemble, self.mode)? {
                        estimate_row(&mut t, &format!("C_{axes}"), &e);
                    }
                }
                Request::Combine(s) => {
                    let label = signs_label(s);
                    let c = combination_check(p, s, &self.ensemble, self.mode)?;
                    estimate_row(&mut t, &format!("combine({label})"), &c.lhs);
                    estimate_row(&mut t, &format!("g({label})"), &c.rhs);
                    estimate_row(&mut t, &format!("combine({label})-g({label})"), &c.difference);
                }
                Request::NoReprep => {
                    let c = no_reprep_check(p, &self.ensemble)?;
                    estimate_row(&mut t, "no_reprep", &c.lhs);
                    estimate_row(&mut t, "reprep", &c.rhs);
                    estimate_row(&mut t, "no_reprep-reprep", &c.difference);
                }
                Request::SameAxis => {
                    let d = same_axis_decomposition_check(p, &self.ensemble, self.mode)?;
                    let name = format!("C_{}", "x".repeat(p.len()));
                    estimate_row(&mut t, &name, &d.monte_carlo);
                    exact_row(&mut t, &format!("{name}:gaussian"), d.analytic, 0.0);
                }
                Request::Projection => {
                    let (t1, t2) = (p.taus()[0], p.taus()[0] + p.taus()[1]);
                    let c = projection_correlators(t1, t2, p.omega(), &self.ensemble)?;
                    estimate_row(&mut t, "c_plus", &c.c_plus);
                    estimate_row(&mut t, "c_plus_plus", &c.c_plus_plus);
                    if let Some(sp) = &spectrum {
                        let (a, b) = projection_correlators_gaussian(t1, t2, p.omega(), sp)?;
                        exact_row(&mut t, "c_plus:gaussian", a, 0.0);
                        exact_row(&mut t, "c_plus_plus:gaussian", b, 0.0);
                    }
                }
            }
        }
        let mut tables = vec![t];
        if self.dump_trajectory {
            let traj = self.ensemble.trajectory(p, 0)?;
            let mut d = Table::new("trajectory", &["t", "xi"]);
            for (i, x) in traj.samples.iter().enumerate() {
                d.push(vec![num(i as f64 * traj.dt), num(*x)]);
            }
            tables.push(d);
        }
        let dt = self.ensemble.dt_for(p);
        Ok(Report {
            tables,
            notes: vec![format!("{} trajectories, dt = {dt}", self.ensemble.n_traj())],
        })
    }
}

// ------------------------------------------------------------------- scans

fn scan_schedule(families: &[CombFamily], n_blocks: usize, grid: &[f64]) -> CliResult<Table> {
    let mut t = Table::new(
        "schedule",
        &["family", "omega_p", "tau", "delta", "n_measurements", "T"],
    );
    for f in families {
        for &w in grid {
            let (tau, dt) = f.timing(w)?;
            let n = match f {
                CombFamily::Dd => 0,
                CombFamily::Measurement { .. } => 2 * n_blocks,
            };
            t.push(vec![
                f.name().to_string(),
                num(w),
                num(tau),
                num(dt),
                n.to_string(),
                num(n_blocks as f64 * std::f64::consts::TAU / w),
            ]);
        }
    }
    Ok(t)
}

struct ScanSetup {
    families: Vec<CombFamily>,
    n_blocks: usize,
    grid: Vec<f64>,
    source: NoiseSource,
    schedule: Table,
}

fn scan_setup(sc: &ScanConfig, cfg: &Config) -> CliResult<ScanSetup> {
    let families = sc.families()?;
    if sc.n_blocks == 0 {
        return Err(CliError::invalid("N", "must be at least 1"));
    }
    let grid = sc.grid()?;
    let schedule = scan_schedule(&families, sc.n_blocks, &grid)?;
    let source = require(&cfg.noise, "noise")?.build()?;
    Ok(ScanSetup {
        families,
        n_blocks: sc.n_blocks,
        grid,
        source,
        schedule,
    })
}

fn localization_note(family: &str, loc: &PeakLocalization) -> String {
    match loc {
        PeakLocalization::Localized { omega_hat, resolution } => {
            format!("{family}: peak at omega_p = {omega_hat} (FWHM {resolution})")
        }
        PeakLocalization::NotLocalizable { reason } => format!("{family}: no localizable peak ({reason})"),
    }
}

/// Analytic `χ` and `W` for both comb families.
pub struct ChiScan {
    setup: ScanSetup,
    localize: Option<(f64, f64)>,
}

impl ChiScan {
    pub fn prepare(cfg: &Config) -> CliResult<Self> {
        let sc = require(&cfg.scan, "scan")?;
        let setup = scan_setup(sc, cfg)?;
        gaussian_spectrum(&setup.source, "chi-scan")?;
        Ok(Self {
            setup,
            localize: sc.localize.map(|[a, b]| (a, b)),
        })
    }
}

impl Experiment for ChiScan {
    fn schedule(&self) -> Table {
        self.setup.schedule.clone()
    }

    fn run(&self) -> CliResult<Report> {
        let s = &self.setup;
        let mut tables = Vec::new();
        let mut notes = Vec::new();
        for &f in &s.families {
            let r = scan(f, s.n_blocks, &s.source, &s.grid, ScanMode::Analytic)?;
            let mut t = Table::new(&format!("chi_scan_{}", f.name()), &["omega_p", "chi", "W"]);
            for p in &r.points {
                t.push(vec![num(p.omega_p), num(p.chi), num(p.w)]);
            }
            tables.push(t);
            notes.push(localization_note(f.name(), &peak_localization(&r, self.localize)));
        }
        Ok(Report { tables, notes })
    }
}

/// Comb scan in analytic or Monte Carlo mode.
pub struct Scan {
    setup: ScanSetup,
    mode: ScanMode,
    localize: Option<(f64, f64)>,
}

impl Scan {
    pub fn prepare(cfg: &Config, seed: u64) -> CliResult<Self> {
        let sc = require(&cfg.scan, "scan")?;
        let setup = scan_setup(sc, cfg)?;
        let mode = match sc.mode {
            ScanModeConfig::Analytic => {
                gaussian_spectrum(&setup.source, "an analytic scan")?;
                ScanMode::Analytic
            }
            ScanModeConfig::Mc => {
                let ens = require(&cfg.ensemble, "ensemble")?;
                if ens.n_traj < 2 {
                    return Err(CliError::invalid("n_traj", "needs at least 2 trajectories"));
                }
                ScanMode::MonteCarlo {
                    n_traj: ens.n_traj,
                    seed,
                }
            }
        };
        Ok(Self {
            setup,
            mode,
            localize: sc.localize.map(|[a, b]| (a, b)),
        })
    }
}

impl Experiment for Scan {
    fn schedule(&self) -> Table {
        self.setup.schedule.clone()
    }

    fn run(&self) -> CliResult<Report> {
        let s = &self.setup;
        let mut tables = Vec::new();
        let mut notes = Vec::new();
        for &f in &s.families {
            let r = scan(f, s.n_blocks, &s.source, &s.grid, self.mode)?;
            let mut t = Table::new(&format!("scan_{}", f.name()), &["omega_p", "chi", "W", "mode"]);
            for p in &r.points {
                t.push(vec![num(p.omega_p), num(p.chi), num(p.w), p.mode.as_str().to_string()]);
            }
            tables.push(t);
            notes.push(localization_note(f.name(), &peak_localization(&r, self.localize)));
        }
        Ok(Report { tables, notes })
    }
}

// ------------------------------------------------------------- reconstruct

const DEFAULT_MODEL_HARMONICS: usize = 2001;

enum Rates {
    Model { spectrum: SpectrumModel, m_max: usize },
    Scan { source: NoiseSource, mode: ScanMode },
    Csv(Vec<RateSample>),
}

pub struct Reconstruct {
    family: CombFamily,
    n_blocks: usize,
    grid: Vec<f64>,
    rates: Rates,
    m0: Option<usize>,
    truth: Option<SpectrumModel>,
    schedule: Table,
}

fn read_rates(path: &str, family: CombFamily) -> CliResult<Vec<RateSample>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_string(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::invalid("input", format!("{path} has no `{name}` column")))
    };
    let (iw, ir) = (col("omega_p")?, col("R")?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::invalid("input", format!("{path}: bad number on data row {}", line + 1)))
        };
        let omega_p = field(iw)?;
        let (tau, dt) = family.timing(omega_p)?;
        out.push(RateSample {
            omega_p,
            tau,
            dt,
            rate: field(ir)?,
        });
    }
    if out.len() < 2 {
        return Err(CliError::invalid("input", format!("{path} needs at least two rates")));
    }
    Ok(out)
}

impl Reconstruct {
    pub fn prepare(cfg: &Config, seed: u64) -> CliResult<Self> {
        let rc = require(&cfg.reconstruct, "reconstruct")?;
        let truth = match &cfg.noise {
            Some(n) => n.build()?.gaussian_spectrum(),
            None => None,
        };
        let (family, n_blocks, grid, schedule) = match (&cfg.scan, rc.source) {
            (Some(sc), _) => {
                let family = match &rc.family {
                    Some(name) => sc.family_named(name)?,
                    None => sc.families()?[0],
                };
                let grid = sc.grid()?;
                let schedule = scan_schedule(&[family], sc.n_blocks.max(1), &grid)?;
                (family, sc.n_blocks, grid, schedule)
            }
            (None, RateSource::Csv) => {
                let family = match rc.family.as_deref() {
                    Some("dd") | None => CombFamily::Dd,
                    Some(other) => {
                        return Err(CliError::invalid(
                            "family",
                            format!("`{other}` needs a [scan] section for its timing rule"),
                        ))
                    }
                };
                (family, 1, Vec::new(), Table::new("schedule", &[]))
            }
            (None, _) => return Err(CliError::invalid("scan", "section is required for this experiment")),
        };
        let rates = match rc.source {
            RateSource::Model => Rates::Model {
                spectrum: truth
                    .clone()
                    .ok_or_else(|| CliError::invalid("noise", "model rates need a Gaussian noise source"))?,
                m_max: rc.m_max.unwrap_or(DEFAULT_MODEL_HARMONICS),
            },
            RateSource::Scan => {
                let source = require(&cfg.noise, "noise")?.build()?;
                let sc = require(&cfg.scan, "scan")?;
                if sc.n_blocks == 0 {
                    return Err(CliError::invalid("N", "must be at least 1"));
                }
                let mode = match sc.mode {
                    ScanModeConfig::Analytic => {
                        gaussian_spectrum(&source, "an analytic scan")?;
                        ScanMode::Analytic
                    }
                    ScanModeConfig::Mc => ScanMode::MonteCarlo {
                        n_traj: require(&cfg.ensemble, "ensemble")?.n_traj,
                        seed,
                    },
                };
                Rates::Scan { source, mode }
            }
            RateSource::Csv => {
                let path = rc
                    .input
                    .as_deref()
                    .ok_or_else(|| CliError::invalid("input", "a CSV path is required for source = \"csv\""))?;
                Rates::Csv(read_rates(path, family)?)
            }
        };
        if rc.m0 == Some(0) {
            return Err(CliError::invalid("m0", "must be at least 1"));
        }
        Ok(Self {
            family,
            n_blocks,
            grid,
            rates,
            m0: rc.m0,
            truth,
            schedule,
        })
    }
}

impl Experiment for Reconstruct {
    fn schedule(&self) -> Table {
        self.schedule.clone()
    }

    fn run(&self) -> CliResult<Report> {
        let rates = match &self.rates {
            Rates::Model { spectrum, m_max } => model_rates(self.family, spectrum, &self.grid, *m_max)?,
            Rates::Scan { source, mode } => scan(self.family, self.n_blocks, source, &self.grid, *mode)?.decay_rates(),
            Rates::Csv(r) => r.clone(),
        };
        let first = rates
            .first()
            .ok_or_else(|| qspec_core::Error::Numerical("no measurable rates to invert".into()))?;
        let m0 = self.m0.unwrap_or_else(|| default_comb_order(first.tau, first.dt));
        let r = reconstruct(&rates, m0)?;
        let mut t = Table::new("reconstruct", &["omega", "S_est", "S_model", "residual"]);
        for ((w, s), res) in r.frequencies.iter().zip(&r.s_est).zip(&r.residuals) {
            let model = self.truth.as_ref().map(|m| num(m.density(*w))).unwrap_or_default();
            t.push(vec![num(*w), num(*s), model, num(*res)]);
        }
        Ok(Report {
            tables: vec![t],
            notes: vec![format!(
                "{} nodes, m0 = {}, residual norm {}, condition number {}",
                r.frequencies.len(),
                r.m0,
                r.residual_norm,
                r.condition_number
            )],
        })
    }
}

// ----------------------------------------------------------------- witness

pub struct Witness {
    sigma: f64,
    corr_time: f64,
    v2: f64,
    times: Vec<f64>,
    n_traj: usize,
    seed: u64,
}

impl Witness {
    pub fn prepare(cfg: &Config, seed: u64) -> CliResult<Self> {
        let w = require(&cfg.witness, "witness")?;
        let n_traj = require(&cfg.ensemble, "ensemble")?.n_traj;
        qspec_core::noise::OuProcess::new(w.sigma, w.corr_time)?;
        if !w.v2.is_finite() {
            return Err(CliError::invalid("v2", "must be finite"));
        }
        if n_traj < 2 {
            return Err(CliError::invalid("n_traj", "needs at least 2 trajectories"));
        }
        Ok(Self {
            sigma: w.sigma,
            corr_time: w.corr_time,
            v2: w.v2,
            times: log_times(w.t_min, w.t_max, w.points)?,
            n_traj,
            seed,
        })
    }
}

impl Experiment for Witness {
    fn schedule(&self) -> Table {
        let mut t = Table::new("schedule", &["T", "tau", "t_1", "t_2", "t_3"]);
        for &total in &self.times {
            let tau = 0.25 * total;
            t.push(vec![num(total), num(tau), num(tau), num(3.0 * tau), num(total)]);
        }
        t
    }

    fn run(&self) -> CliResult<Report> {
        let pts = witness_sweep(self.sigma, self.corr_time, self.v2, &self.times, self.n_traj, self.seed)?;
        let mut t = Table::new(
            "witness",
            &["T", "re_W", "im_W", "se_re", "se_im", "W_gauss2", "verdict"],
        );
        let mut detected = 0;
        for p in &pts {
            if p.verdict == qspec_core::nongaussian::Verdict::NonGaussianDetected {
                detected += 1;
            }
            t.push(vec![
                num(p.total_time),
                num(p.w.mean.re),
                num(p.w.mean.im),
                num(p.w.se_re),
                num(p.w.se_im),
                num(p.w_gauss2),
                p.verdict.as_str().to_string(),
            ]);
        }
        Ok(Report {
            tables: vec![t],
            notes: vec![format!(
                "non-Gaussian noise detected at {detected} of {} times",
                pts.len()
            )],
        })
    }
}

// ------------------------------------------------------------- filter-dump

pub struct FilterDump {
    protocol: MeasurementProtocol,
    signs: SignPattern,
    omega_max: f64,
    points: usize,
}

impl FilterDump {
    pub fn prepare(cfg: &Config) -> CliResult<Self> {
        let protocol = require(&cfg.protocol, "protocol")?.build()?;
        let fd = require(&cfg.filter_dump, "filter_dump")?;
        let signs = match &fd.signs {
            None => SignPattern::alternating(protocol.len()),
            Some(s) => SignPattern::parse(s)?,
        };
        if signs.len() != protocol.len() {
            return Err(CliError::invalid(
                "signs",
                format!("{} signs for {} measurements", signs.len(), protocol.len()),
            ));
        }
        if !(fd.omega_max > 0.0 && fd.omega_max.is_finite()) {
            return Err(CliError::invalid("omega_max", "must be positive and finite"));
        }
        if fd.points < 2 {
            return Err(CliError::invalid("points", "needs at least two points"));
        }
        Ok(Self {
            protocol,
            signs,
            omega_max: fd.omega_max,
            points: fd.points,
        })
    }
}

impl Experiment for FilterDump {
    fn schedule(&self) -> Table {
        protocol_schedule(&self.protocol)
    }

    fn run(&self) -> CliResult<Report> {
        let f = build_filter(&self.protocol, &self.signs)?;
        let mut bp = Table::new("filter_breakpoints", &["t", "f"]);
        for (a, _, v) in f.intervals() {
            bp.push(vec![num(a), v.to_string()]);
        }
        bp.push(vec![num(f.total_duration()), "0".into()]);
        let mut sp = Table::new("filter_spectrum", &["omega", "f2"]);
        let step = self.omega_max / (self.points - 1) as f64;
        for i in 0..self.points {
            let w = step * i as f64;
            sp.push(vec![num(w), num(filter_power(&f, w))]);
        }
        Ok(Report {
            tables: vec![bp, sp],
            notes: vec![format!(
                "filter over [0, {}] with {} pieces",
                f.total_duration(),
                f.values().len()
            )],
        })
    }
}

pub fn read_config(path: &Path) -> CliResult<(Vec<u8>, Config)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Parse("configuration is not UTF-8".into()))?;
    let cfg = Config::parse(text)?;
    Ok((bytes, cfg))
}
