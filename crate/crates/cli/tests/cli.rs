use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use lyman_cli::cache::ResultCache;
use lyman_cli::config::TimeGrid;
use lyman_cli::run::{build_spectrum, CacheStatus};
use lyman_cli::{parse_config, run, ConfigError, Mode, Preset, RunOptions};
use lyman_core::units::MagneticNumber;
use tempfile::tempdir;

fn opts(dir: &Path, out: &str, cache: Option<&str>) -> RunOptions {
    RunOptions {
        out: Some(dir.join(out)),
        cache: cache.map(|c| dir.join(c)),
    }
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn decay_hydrogen_config_parses() {
    let cfg = parse_config("mode = decay\npreset = hydrogen\nm_e = 0").unwrap();
    assert_eq!(cfg.mode, Mode::Decay);
    assert_eq!(cfg.preset, Preset::Hydrogen);
    assert_eq!(cfg.m_e, MagneticNumber::Zero);
}

#[test]
fn hydrogen_rejects_scaled_overrides() {
    let err = parse_config("preset = hydrogen\nA = 0.05").unwrap_err();
    assert!(matches!(err, ConfigError::Conflict { ref key, .. } if key == "A"), "{err}");
}

#[test]
fn synthetic_field_config_parses() {
    let cfg = parse_config(
        "mode = field\npreset = synthetic\nA = 0.05\nB = 0.3\np = 5\nr_grid = logspace(1e2,1e4,25)",
    )
    .unwrap();
    assert_eq!(cfg.preset, Preset::Synthetic { a: 0.05, b: 0.3 });
    assert_eq!(cfg.time, Some(5.0));
    let grid = cfg.r_grid.unwrap();
    assert_eq!((grid.len(), grid[0], grid[24]), (25, 1e2, 1e4));
}

#[test]
fn malformed_configs_are_errors() {
    let cases = [
        ("preset = hydrogen\n", "missing mode"),
        ("mode = decay\n", "missing preset"),
        ("mode = decay\npreset = hydrogen\nM_e = 0\n", "keys are case-sensitive"),
        ("mode = decay\npreset = hydrogen\nm_e = 2\n", "bad sublevel"),
        ("mode = decay\npreset = hydrogen\nmode = field\n", "duplicate"),
        ("mode = decay\npreset = synthetic\nA = 0.05\n", "synthetic needs B"),
        ("mode = field\npreset = synthetic\nA = 0.05\nB = 0.3\nt = 5\nr_grid = 1\n", "t on synthetic"),
        ("mode = field\npreset = hydrogen\nt = 1e-15\nr_grid = 1e-9, x\n", "bad number"),
        ("mode = field\npreset = hydrogen\nt = 1e-15\n", "no r_grid"),
        ("mode = decay\npreset = hydrogen\nomega_grid = 1e16\n", "key unused by mode"),
        ("mode = decay\npreset = hydrogen\nt_grid = 0\ntau_grid = 1\n", "two time axes"),
        ("mode = angular\npreset = hydrogen\nr = 1e-6\n", "r without t"),
        ("mode = decay preset = hydrogen\n", "no line break"),
        ("mode = orbit\npreset = hydrogen\n", "unknown mode"),
    ];
    for (text, why) in cases {
        assert!(parse_config(text).is_err(), "{why}: accepted {text:?}");
    }
}

#[test]
fn grid_forms() {
    let cfg = parse_config("mode = decay\npreset = hydrogen\ntau_grid = [0, 0.5, 1e0]\n").unwrap();
    assert_eq!(cfg.time_grid, Some(TimeGrid::Tau(vec![0.0, 0.5, 1.0])));
    let cfg = parse_config("mode = angular\npreset = hydrogen\ntheta_grid = linspace(0, pi, 3)\n")
        .unwrap();
    assert_eq!(cfg.theta_grid, Some(vec![0.0, PI / 2.0, PI]));
}

#[test]
fn angular_m0_peaks_at_equator() {
    let dir = tempdir().unwrap();
    let text = "mode = angular\npreset = hydrogen\nm_e = 0\ntheta_grid = linspace(0, pi, 25)\n";
    let out = run(&parse_config(text).unwrap(), text, &opts(dir.path(), "a.csv", None)).unwrap();
    assert_eq!(out.exit_code(), 0);
    let table = rows(&out.csv);
    assert_eq!(table[0], ["theta [rad]", "gamma [1]"]);
    let equator = &table[13];
    assert_eq!(equator[0].parse::<f64>().unwrap(), PI / 2.0);
    assert_eq!(equator[1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn csv_numbers_have_seventeen_digits() {
    let dir = tempdir().unwrap();
    let text = "mode = decay\npreset = synthetic\nA = 0.001\nB = 0.3\ntau_grid = 0, 1\n";
    let out = run(&parse_config(text).unwrap(), text, &opts(dir.path(), "d.csv", None)).unwrap();
    let table = rows(&out.csv);
    assert!(table[0].iter().all(|h| h == "status" || h.ends_with(']')));
    for cell in &table[1][..8] {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }
    assert_eq!(table[1][8], "ok");
}

#[test]
fn identical_config_gives_identical_csv() {
    let dir = tempdir().unwrap();
    let text = "mode = field\npreset = synthetic\nA = 0.05\nB = 0.3\np = 5\n\
                r_grid = logspace(1,1e3,7)\ntheta = pi/3\nphi = 0.4\n";
    let cfg = parse_config(text).unwrap();
    let a = run(&cfg, text, &opts(dir.path(), "a.csv", None)).unwrap();
    let b = run(&cfg, text, &opts(dir.path(), "b.csv", None)).unwrap();
    assert_eq!(fs::read(&a.csv).unwrap(), fs::read(&b.csv).unwrap());
    assert_eq!(fs::read(&a.meta).unwrap(), fs::read(&b.meta).unwrap());
}

#[test]
fn warm_cache_reproduces_cold_run() {
    let dir = tempdir().unwrap();
    let text = "mode = decay\npreset = hydrogen\nm_e = 1\ntau_grid = linspace(0, 3, 7)\n";
    let cfg = parse_config(text).unwrap();
    let cold = run(&cfg, text, &opts(dir.path(), "cold.csv", Some("c.txt"))).unwrap();
    let warm = run(&cfg, text, &opts(dir.path(), "warm.csv", Some("c.txt"))).unwrap();
    assert_eq!(cold.cache, CacheStatus::Miss);
    assert_eq!(warm.cache, CacheStatus::Hit);
    assert_eq!(fs::read(&cold.csv).unwrap(), fs::read(&warm.csv).unwrap());

    let mut cache = ResultCache::open(&dir.path().join("c.txt")).unwrap();
    let (hit, status) = build_spectrum(&cfg, &mut cache).unwrap();
    assert_eq!(status, CacheStatus::Hit);
    let (fresh, _) = build_spectrum(&cfg, &mut ResultCache::disabled()).unwrap();
    assert_eq!(hit.gamma_a.to_bits(), fresh.gamma_a.to_bits());
    assert_eq!(hit.delta_a.to_bits(), fresh.delta_a.to_bits());
}

#[test]
fn stale_cache_version_is_a_miss() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("c.txt");
    let text = "mode = spectrum\npreset = synthetic\nA = 0.05\nB = 0.3\nomega_grid = 0.3\n";
    let cfg = parse_config(text).unwrap();
    run(&cfg, text, &opts(dir.path(), "s.csv", Some("c.txt"))).unwrap();
    let stored = fs::read_to_string(&path).unwrap();
    fs::write(&path, stored.replace("version=", "version=0.0.0-")).unwrap();
    let again = run(&cfg, text, &opts(dir.path(), "s2.csv", Some("c.txt"))).unwrap();
    assert_eq!(again.cache, CacheStatus::Miss);
    assert_eq!(fs::read_to_string(&path).unwrap(), stored);
}

#[test]
fn hydrogen_constants_do_not_depend_on_sublevel() {
    let spectrum = |m: i32| {
        let text = format!("mode = decay\npreset = hydrogen\nm_e = {m}\n");
        build_spectrum(&parse_config(&text).unwrap(), &mut ResultCache::disabled())
            .unwrap()
            .0
    };
    let (a, b) = (spectrum(0), spectrum(1));
    assert_eq!(a.gamma_a.to_bits(), b.gamma_a.to_bits());
    assert_eq!(a.delta_a.to_bits(), b.delta_a.to_bits());
}

#[test]
fn synthetic_asymptotics_fit_is_inverse_sixth_power() {
    let dir = tempdir().unwrap();
    let text = "mode = asymptotics\npreset = synthetic\nA = 0.05\nB = 0.3\np = 5\n";
    let out = run(&parse_config(text).unwrap(), text, &opts(dir.path(), "f.csv", None)).unwrap();
    assert_eq!(out.exit_code(), 0);
    let meta = fs::read_to_string(&out.meta).unwrap();
    let exponent: f64 = meta
        .lines()
        .find_map(|l| l.strip_prefix("fit_exponent = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent + 6.0).abs() < 0.1, "exponent {exponent}");
    assert!(rows(&out.csv)[1..].iter().all(|r| r.last().unwrap() == "ok"));
}

#[test]
fn validate_hydrogen_passes() {
    let dir = tempdir().unwrap();
    let text = "mode = validate\npreset = hydrogen\n";
    let out = run(&parse_config(text).unwrap(), text, &opts(dir.path(), "v.csv", None)).unwrap();
    assert_eq!(out.failures, 0, "{:#?}", out.report);
    assert_eq!(out.exit_code(), 0);
    let table = rows(&out.csv);
    assert_eq!(table.len(), 8);
    assert!(table[1..].iter().all(|r| r[2] == "1"));
}

fn lyman(dir: &Path, config: &str) -> std::process::Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lyman"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out.csv"))
        .args(["--threads", "2"])
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempdir().unwrap();
    let ok = lyman(dir.path(), "mode = angular\npreset = hydrogen\nm_e = 1\n");
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("out.csv.meta").exists());

    let bad = lyman(dir.path(), "mode = angular\npreset = hydrogen\nA = 1\n");
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("conflicts"));
}

#[test]
fn binary_reports_failed_checks() {
    let dir = tempdir().unwrap();
    let out = lyman(dir.path(), "mode = validate\npreset = synthetic\nA = 0.05\nB = 0.3\np = 5\n");
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL  8"), "{stdout}");
    assert!(stdout.contains("PASS  7"), "{stdout}");
}
