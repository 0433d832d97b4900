use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ECHO: &str = r#"
seed = 42

[protocol]
tau = 1.0
n = 2

[noise]
kind = "ou"
sigma = 1.0
corr_time = 1.0

[ensemble]
n_traj = 4000

[simulate]
correlators = ["g(+-)", "C_xy", "all_axes", "combine(+-)", "no_reprep", "projection"]
"#;

const MC_SCAN: &str = r#"
[noise]
kind = "ou"
sigma = 1.0
corr_time = 0.2

[ensemble]
n_traj = 500

[scan]
family = ["measurement", "dd"]
N = 4
tau_fraction = 0.25
omega_p_min = 2.0
omega_p_max = 20.0
omega_p_steps = 7
mode = "mc"
"#;

const WITNESS: &str = r#"
seed = 7

[ensemble]
n_traj = 2000

[witness]
sigma = 1.0
corr_time = 1.0
v2 = 100.0
T_min = 0.02
T_max = 0.3
points = 4
"#;

fn qspec(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qspec"));
    cmd.args(args).env_remove("QSPEC_THREADS");
    if let Some(t) = threads {
        cmd.env("QSPEC_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_in(dir: &Path, sub: &str, config: &Path, out: &str, threads: &str) -> PathBuf {
    let out_dir = dir.join(out);
    let o = qspec(
        &[
            sub,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out_dir
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "toml"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn assert_thread_independent(sub: &str, config: &str) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", config);
    let one = csv_files(&run_in(tmp.path(), sub, &cfg, "one", "1"));
    let two = csv_files(&run_in(tmp.path(), sub, &cfg, "two", "2"));
    let again = csv_files(&run_in(tmp.path(), sub, &cfg, "again", "1"));
    assert!(!one.is_empty());
    assert_eq!(one, two, "{sub}: outputs depend on the thread count");
    assert_eq!(one, again, "{sub}: reruns differ");
}

#[test]
fn simulate_is_byte_identical_across_threads() {
    assert_thread_independent("simulate", ECHO);
}

#[test]
fn mc_scan_is_byte_identical_across_threads() {
    assert_thread_independent("scan", MC_SCAN);
}

#[test]
fn witness_is_byte_identical_across_threads() {
    assert_thread_independent("witness", WITNESS);
}

#[test]
fn simulate_csv_contract() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", ECHO);
    let out = run_in(tmp.path(), "simulate", &cfg, "o", "1");
    let text = fs::read_to_string(out.join("simulate.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,re_mean,im_mean,std_error,n_traj"));
    let names: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    for n in [
        "g(+-)",
        "g(+-):gaussian",
        "C_xy",
        "C_yy",
        "combine(+-)",
        "no_reprep",
        "c_plus_plus",
    ] {
        assert!(names.contains(&n), "missing row {n}");
    }
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 42"));
    assert!(manifest.contains("config_sha256"));
    assert!(manifest.contains("\"simulate.csv\""));
    assert!(!manifest.contains("thread"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", ECHO);
    let a = run_in(tmp.path(), "simulate", &cfg, "a", "1");
    let b = tmp.path().join("b");
    let o = qspec(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
            "--seed",
            "43",
        ],
        Some("1"),
    );
    assert!(o.status.success());
    assert_ne!(
        fs::read(a.join("simulate.csv")).unwrap(),
        fs::read(b.join("simulate.csv")).unwrap()
    );
    assert!(fs::read_to_string(b.join("manifest.toml"))
        .unwrap()
        .contains("seed = 43"));
}

#[test]
fn negative_tau_exits_one_naming_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[protocol]\ntau = [1.0, -0.5]\n[filter_dump]\nomega_max = 10.0\npoints = 11\n",
    );
    for dry in [false, true] {
        let mut args = vec!["filter-dump", "--config", cfg.to_str().unwrap(), "--out"];
        let out = tmp.path().join("o");
        args.push(out.to_str().unwrap());
        if dry {
            args.push("--dry-run");
        }
        let o = qspec(&args, None);
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains("`tau`"));
        assert!(!out.exists());
    }
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &ECHO.replace("n_traj = 4000", "n_traj = 4000\nshots = 3"),
    );
    let o = qspec(&["simulate", "--config", cfg.to_str().unwrap(), "--dry-run"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shots"));
}

#[test]
fn zero_threads_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", ECHO);
    let o = qspec(&["simulate", "--config", cfg.to_str().unwrap(), "--dry-run"], Some("0"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`threads`"));
}

#[test]
fn dry_run_prints_measurement_times() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[protocol]\ntau = [1.0, 2.0, 0.5]\ndelta = 0.25\naxes = \"xyx\"\n[filter_dump]\nomega_max = 10.0\npoints = 11\n",
    );
    let out = tmp.path().join("o");
    let o = qspec(
        &[
            "filter-dump",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--dry-run",
        ],
        None,
    );
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[1][2], "3.25");
    assert_eq!(rows[2][2], "4");
    assert_eq!(rows[1][5], "y");
    assert!(!out.exists());
}

#[test]
fn filter_dump_csv_contract() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[protocol]\ntau = 1.0\nn = 2\n[filter_dump]\nomega_max = 10.0\npoints = 11\n",
    );
    let out = run_in(tmp.path(), "filter-dump", &cfg, "o", "1");
    let bp = fs::read_to_string(out.join("filter_breakpoints.csv")).unwrap();
    assert_eq!(bp, "t,f\n0,1\n1,-1\n2,0\n");
    let sp = fs::read_to_string(out.join("filter_spectrum.csv")).unwrap();
    let mut lines = sp.lines();
    assert_eq!(lines.next(), Some("omega,f2"));
    assert_eq!(lines.next(), Some("0,0"));
    assert_eq!(sp.lines().count(), 12);
}

#[test]
fn chi_scan_writes_both_families() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        r#"
[noise]
kind = "spectrum"
components = [{ kind = "white", level = 1.0 }]

[scan]
N = 4
tau_fraction = 0.25
omega_p_min = 1.0
omega_p_max = 4.0
omega_p_steps = 4
"#,
    );
    let out = run_in(tmp.path(), "chi-scan", &cfg, "o", "1");
    for f in ["chi_scan_measurement.csv", "chi_scan_dd.csv"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(text.starts_with("omega_p,chi,W\n"));
        assert_eq!(text.lines().count(), 5);
    }
}

#[test]
fn reconstruct_from_csv_rates() {
    let tmp = TempDir::new().unwrap();
    let rates: String = (1..=30).map(|k| format!("{},{}\n", k as f64 * 0.5, 0.5)).collect();
    let input = write_config(tmp.path(), "rates.csv", &format!("omega_p,R\n{rates}"));
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &format!(
            "[reconstruct]\nsource = \"csv\"\nfamily = \"dd\"\ninput = \"{}\"\n",
            input.to_str().unwrap()
        ),
    );
    let out = run_in(tmp.path(), "reconstruct", &cfg, "o", "1");
    let text = fs::read_to_string(out.join("reconstruct.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,S_est,S_model,residual"));
    // Gapless comb weights 4/(πm)² over odd m up to the default order 51.
    let weight: f64 = (1..=51)
        .step_by(2)
        .map(|m| 4.0 / (std::f64::consts::PI * m as f64).powi(2))
        .sum();
    for l in lines {
        let cells: Vec<&str> = l.split(',').collect();
        let s: f64 = cells[1].parse().unwrap();
        assert!(
            (s - 0.5 / weight).abs() < 1e-9,
            "flat rates invert to a flat spectrum: {l}"
        );
        assert_eq!(cells[2], "");
    }
}

#[test]
fn analytic_scan_rejects_non_gaussian_noise() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        &MC_SCAN
            .replace("kind = \"ou\"", "kind = \"quadratic_ou\"\nv2 = 10.0")
            .replace("mode = \"mc\"", "mode = \"analytic\""),
    );
    let o = qspec(&["scan", "--config", cfg.to_str().unwrap(), "--dry-run"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`noise`"));
}
