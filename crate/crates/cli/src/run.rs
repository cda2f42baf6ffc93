//! Mode dispatch: build the spectrum (through the cache), evaluate, write CSV and sidecar.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::{info, warn};
use lyman_core::asymptotics::{
    energy_density_asymptotic, energy_density_asymptotic_scaled, fit_scan, gamma_angular,
    PowerLawFit,
};
use lyman_core::field::{FieldEvaluator, FieldMode, FieldScan, DEFAULT_FIELD_TOL};
use lyman_core::solver::{DecayModel, DecaySpectrum, DEFAULT_WINDOW};
use lyman_core::units::make_atom_params;
use lyman_core::validation::{far_field_suite, hydrogen_suite, Check};
use rayon::prelude::*;

use crate::cache::{check_value, preset_key, ResultCache};
use crate::config::{Mode, Preset, RunConfig, TimeGrid};
use crate::output::{column, meta_path, sha256_hex, Cell, Meta, Table};

/// Paths given on the command line; they win over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
}

impl CacheStatus {
    fn name(self) -> &'static str {
        match self {
            CacheStatus::Disabled => "disabled",
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub meta: PathBuf,
    /// Failed checks, unconverged points and failed fits.
    pub failures: usize,
    pub cache: CacheStatus,
    /// Human-readable lines for the terminal.
    pub report: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            1
        }
    }
}

/// Column units for a preset.
struct Units {
    time: &'static str,
    length: &'static str,
    freq: &'static str,
    rate: &'static str,
    g: &'static str,
    density: &'static str,
    field: &'static str,
}

fn units(preset: &Preset) -> Units {
    match preset {
        Preset::Hydrogen => Units {
            time: "s",
            length: "m",
            freq: "rad/s",
            rate: "1/s",
            g: "s/rad",
            density: "J/m^3",
            field: "m^-3/2 s^-1/2",
        },
        Preset::Synthetic { .. } => Units {
            time: "1",
            length: "1",
            freq: "1",
            rate: "1",
            g: "1",
            density: "1",
            field: "1",
        },
    }
}

pub fn run(cfg: &RunConfig, config_text: &str, opts: &RunOptions) -> Result<RunOutcome> {
    let csv = opts
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.mode)));
    let cache_path = opts.cache.clone().or_else(|| cfg.cache.clone());
    let mut cache = match &cache_path {
        Some(p) => ResultCache::open(p)?,
        None => ResultCache::disabled(),
    };

    let (spectrum, cache_status) = build_spectrum(cfg, &mut cache)?;
    cache.save()?;
    info!(
        "Gamma_a = {:e}, Delta_a = {:e} (cache {})",
        spectrum.gamma_a,
        spectrum.delta_a,
        cache_status.name()
    );

    let mut meta = Meta::default();
    meta.set("config_sha256", sha256_hex(config_text.as_bytes()));
    meta.set("mode", cfg.mode);
    meta.set("preset", cfg.preset.name());
    meta.set("m_e", cfg.m_e);
    meta.set("gamma_a", format!("{:e}", spectrum.gamma_a));
    meta.set("gamma_a_bits", format!("{:016x}", spectrum.gamma_a.to_bits()));
    meta.set("delta_a", format!("{:e}", spectrum.delta_a));
    meta.set("delta_a_bits", format!("{:016x}", spectrum.delta_a.to_bits()));
    meta.set("scaled_a", format!("{:e}", spectrum.a()));
    meta.set("scaled_b", format!("{:e}", spectrum.b()));
    meta.set("pv_window", format!("{:e}", spectrum.window));
    meta.set("tau_max", format!("{:e}", spectrum.tau_max));
    meta.set("field_tol", format!("{:e}", cfg.tol.unwrap_or(DEFAULT_FIELD_TOL)));
    meta.set("cache", cache_status.name());
    meta.set("lyman_core_version", lyman_core::VERSION);
    meta.set("lyman_cli_version", crate::cache::CODE_VERSION);

    let u = units(&cfg.preset);
    let mut report = Vec::new();
    let (table, failures) = match cfg.mode {
        Mode::Decay => decay(cfg, &spectrum, &u)?,
        Mode::Spectrum => spectrum_table(cfg, &spectrum, &u)?,
        Mode::Field => {
            let scan = radial_scan(cfg, &spectrum, cfg.r_grid.as_deref().unwrap_or_default())?;
            field_table(&scan, &u)
        }
        Mode::Asymptotics => asymptotics(cfg, &spectrum, &u, &mut meta, &mut report)?,
        Mode::Angular => angular(cfg, &spectrum, &u)?,
        Mode::Validate => validate(cfg, &spectrum, &mut report)?,
    };
    meta.set("rows", table.rows.len());
    meta.set("failures", failures);

    table.write(&csv)?;
    let meta_file = meta_path(&csv);
    meta.write(&meta_file)?;
    report.push(format!(
        "wrote {} rows to {} ({} failures)",
        table.rows.len(),
        csv.display(),
        failures
    ));
    Ok(RunOutcome {
        csv,
        meta: meta_file,
        failures,
        cache: cache_status,
        report,
    })
}

/// Spectrum for the preset, taking `Γ_a`, `Δ_a` from the cache when both are stored.
pub fn build_spectrum(cfg: &RunConfig, cache: &mut ResultCache) -> Result<(DecaySpectrum, CacheStatus)> {
    let (model, key) = match cfg.preset {
        Preset::Hydrogen => {
            let atom = make_atom_params(cfg.m_e.value())?;
            (DecayModel::hydrogen(&atom), preset_key(None))
        }
        Preset::Synthetic { a, b } => (DecayModel::synthetic(a, b)?, preset_key(Some((a, b)))),
    };
    if !cache.is_enabled() {
        return Ok((DecaySpectrum::new(model)?, CacheStatus::Disabled));
    }
    let stored = (
        cache.get(&key, "gamma_a", DEFAULT_WINDOW),
        cache.get(&key, "delta_a", DEFAULT_WINDOW),
    );
    if let (Some(g), Some(d)) = stored {
        let spectrum = DecaySpectrum::from_constants(
            model,
            check_value("gamma_a", g)?,
            check_value("delta_a", d)?,
        )?;
        return Ok((spectrum, CacheStatus::Hit));
    }
    let spectrum = DecaySpectrum::new(model)?;
    cache.put(&key, "gamma_a", spectrum.gamma_a, spectrum.window);
    cache.put(&key, "delta_a", spectrum.delta_a, spectrum.window);
    Ok((spectrum, CacheStatus::Miss))
}

fn status(err: Option<String>) -> Cell {
    match err {
        None => Cell::Text("ok".into()),
        Some(e) => Cell::Text(format!("failed: {e}")),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn decay(cfg: &RunConfig, s: &DecaySpectrum, u: &Units) -> Result<(Table, usize)> {
    let times: Vec<f64> = match &cfg.time_grid {
        Some(TimeGrid::Time(t)) => t.clone(),
        Some(TimeGrid::Tau(tau)) => tau.iter().map(|x| x / s.gamma_a).collect(),
        None => linspace(0.0, 5.0, 51).iter().map(|x| x / s.gamma_a).collect(),
    };
    let rows: Vec<_> = times
        .par_iter()
        .map(|&t| (t, s.c0_exact_with_error(t), s.c0_weak(t)))
        .collect();
    let mut table = Table::new(vec![
        column("t", u.time),
        column("tau", "1"),
        column("re_c0", "1"),
        column("im_c0", "1"),
        column("abs2_c0", "1"),
        column("abs2_c0_weak", "1"),
        column("rel_dev", "1"),
        column("c0_err", "1"),
        "status".into(),
    ]);
    let mut failures = 0;
    for (t, exact, weak) in rows {
        let (c0, err, st) = match exact {
            Ok((c0, err)) => (c0, err, None),
            Err(e) => {
                failures += 1;
                warn!("c0 at t = {t:e}: {e}");
                (num_complex::Complex64::new(f64::NAN, f64::NAN), f64::NAN, Some(e.to_string()))
            }
        };
        table.push(vec![
            Cell::Num(t),
            Cell::Num(s.tau(t)),
            Cell::Num(c0.re),
            Cell::Num(c0.im),
            Cell::Num(c0.norm_sqr()),
            Cell::Num(weak.norm_sqr()),
            Cell::Num((c0.norm() - weak.norm()) / weak.norm()),
            Cell::Num(err),
            status(st),
        ])?;
    }
    Ok((table, failures))
}

fn spectrum_table(cfg: &RunConfig, s: &DecaySpectrum, u: &Units) -> Result<(Table, usize)> {
    let omegas = match &cfg.omega_grid {
        Some(g) => g.clone(),
        None => linspace(-20.0, 20.0, 401)
            .into_iter()
            .map(|x| s.omega_shifted + x * s.gamma_a)
            .filter(|&w| w > 0.0)
            .collect(),
    };
    let rows: Vec<_> = omegas.par_iter().map(|&w| (w, s.sample(w))).collect();
    let mut table = Table::new(vec![
        column("omega", u.freq),
        column("gamma", u.rate),
        column("delta", u.freq),
        column("g", u.g),
        column("g_weak", u.g),
        "status".into(),
    ]);
    let mut failures = 0;
    for (w, sample) in rows {
        let row = match sample {
            Ok(x) => vec![
                Cell::Num(w),
                Cell::Num(x.gamma),
                Cell::Num(x.delta),
                Cell::Num(x.g),
                Cell::Num(x.g_weak),
                status(None),
            ],
            Err(e) => {
                failures += 1;
                warn!("spectrum at omega = {w:e}: {e}");
                let nan = Cell::Num(f64::NAN);
                vec![
                    Cell::Num(w),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    Cell::Num(s.weak_density(w)),
                    status(Some(e.to_string())),
                ]
            }
        };
        table.push(row)?;
    }
    Ok((table, failures))
}

fn evaluator<'a>(cfg: &RunConfig, s: &'a DecaySpectrum) -> FieldEvaluator<'a> {
    FieldEvaluator::new(s, cfg.m_e).with_tol(cfg.tol.unwrap_or(DEFAULT_FIELD_TOL))
}

fn field_mode(cfg: &RunConfig) -> FieldMode {
    match cfg.preset {
        Preset::Hydrogen => FieldMode::Physical,
        Preset::Synthetic { .. } => FieldMode::Dimensionless,
    }
}

fn radial_scan(cfg: &RunConfig, s: &DecaySpectrum, r: &[f64]) -> Result<FieldScan> {
    let t = cfg.time.context("field scans need a time")?;
    info!("radial scan over {} points", r.len());
    Ok(evaluator(cfg, s).radial_scan(r, cfg.theta, cfg.phi, t, field_mode(cfg))?)
}

fn field_header(u: &Units) -> Vec<String> {
    let mut h = vec![
        column("r", u.length),
        column("theta", "rad"),
        column("phi", "rad"),
        column("t", u.time),
        column("density", u.density),
        column("density_err", u.density),
    ];
    for l in 0..3 {
        h.push(column(&format!("re_f{l}"), u.field));
        h.push(column(&format!("im_f{l}"), u.field));
    }
    h
}

fn field_cells(x: &lyman_core::field::FieldSample) -> Vec<Cell> {
    let mut row = vec![
        Cell::Num(x.point.r),
        Cell::Num(x.point.theta),
        Cell::Num(x.point.phi),
        Cell::Num(x.point.t),
        Cell::Num(x.density),
        Cell::Num(x.error),
    ];
    for f in x.f {
        row.push(Cell::Num(f.re));
        row.push(Cell::Num(f.im));
    }
    row
}

fn field_table(scan: &FieldScan, u: &Units) -> (Table, usize) {
    let mut h = field_header(u);
    h.push("status".into());
    let mut table = Table::new(h);
    for x in &scan.samples {
        let mut row = field_cells(x);
        row.push(status(x.failure.clone()));
        table.rows.push(row);
    }
    (table, scan.failures())
}

fn asymptotics(
    cfg: &RunConfig,
    s: &DecaySpectrum,
    u: &Units,
    meta: &mut Meta,
    report: &mut Vec<String>,
) -> Result<(Table, usize)> {
    let default_grid = || -> Vec<f64> {
        (0..21).map(|i| 10f64.powf(3.0 + 0.1 * i as f64)).collect()
    };
    let grid = cfg.r_grid.clone().unwrap_or_else(default_grid);
    let scan = radial_scan(cfg, s, &grid)?;
    let ev = evaluator(cfg, s);

    let mut h = field_header(u);
    h.extend([
        column("density_asymptotic", u.density),
        column("ratio", "1"),
        column("asymptote_valid", "1"),
        "status".into(),
    ]);
    let mut table = Table::new(h);
    let mut failures = scan.failures();
    for x in &scan.samples {
        let params = ev.params(&x.point)?;
        let asym = match cfg.preset {
            Preset::Synthetic { .. } => energy_density_asymptotic_scaled(&params, x.point.theta, cfg.m_e),
            Preset::Hydrogen => {
                let atom = s.model.atom.context("hydrogen spectrum without an atom")?;
                energy_density_asymptotic(&atom, &params, x.point.r, x.point.theta)
            }
        };
        let mut row = field_cells(x);
        let mut fail = x.failure.clone();
        match asym {
            Ok(a) => {
                row.push(Cell::Num(a.value));
                row.push(Cell::Num(x.density / a.value));
                row.push(Cell::Int(a.valid as i64));
            }
            Err(e) => {
                if fail.is_none() {
                    failures += 1;
                }
                fail.get_or_insert_with(|| e.to_string());
                row.extend([Cell::Num(f64::NAN), Cell::Num(f64::NAN), Cell::Int(0)]);
            }
        }
        row.push(status(fail));
        table.push(row)?;
    }

    match fit_scan(&scan) {
        Ok(PowerLawFit {
            exponent,
            stderr,
            intercept,
            used,
            rejected,
        }) => {
            meta.set("fit_exponent", format!("{exponent:.6}"));
            meta.set("fit_stderr", format!("{stderr:.2e}"));
            meta.set("fit_log_prefactor", format!("{intercept:.6}"));
            meta.set("fit_points_used", used);
            meta.set("fit_points_rejected", rejected);
            report.push(format!(
                "density ~ r^{exponent:.4} (+/- {stderr:.1e}), {used} points used, {rejected} rejected"
            ));
        }
        Err(e) => {
            failures += 1;
            meta.set("fit_error", &e);
            report.push(format!("power-law fit failed: {e}"));
        }
    }
    Ok((table, failures))
}

fn angular(cfg: &RunConfig, s: &DecaySpectrum, u: &Units) -> Result<(Table, usize)> {
    let thetas = cfg
        .theta_grid
        .clone()
        .unwrap_or_else(|| linspace(0.0, PI, 25));
    let gammas = thetas
        .iter()
        .map(|&th| gamma_angular(cfg.m_e.value(), th))
        .collect::<lyman_core::Result<Vec<_>>>()?;

    let (Some(r), Some(t)) = (cfg.r, cfg.time) else {
        let mut table = Table::new(vec![column("theta", "rad"), column("gamma", "1")]);
        for (th, g) in thetas.iter().zip(gammas) {
            table.push(vec![Cell::Num(*th), Cell::Num(g)])?;
        }
        return Ok((table, 0));
    };

    let scan = evaluator(cfg, s).angular_scan(&thetas, r, cfg.phi, t, field_mode(cfg))?;
    let peak = scan
        .samples
        .iter()
        .map(|x| x.density)
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let mut table = Table::new(vec![
        column("theta", "rad"),
        column("gamma", "1"),
        column("density", u.density),
        column("density_err", u.density),
        column("density_norm", "1"),
        "status".into(),
    ]);
    for (x, g) in scan.samples.iter().zip(gammas) {
        let norm = if peak > 0.0 { x.density / peak } else { f64::NAN };
        table.push(vec![
            Cell::Num(x.point.theta),
            Cell::Num(g),
            Cell::Num(x.density),
            Cell::Num(x.error),
            Cell::Num(norm),
            status(x.failure.clone()),
        ])?;
    }
    Ok((table, scan.failures()))
}

fn validate(cfg: &RunConfig, s: &DecaySpectrum, report: &mut Vec<String>) -> Result<(Table, usize)> {
    let checks: Vec<Check> = match cfg.preset {
        Preset::Hydrogen => hydrogen_suite(s),
        Preset::Synthetic { .. } => far_field_suite(s, cfg.time.context("validate needs `p`")?),
    };
    let mut table = Table::new(vec![
        column("id", "1"),
        column("name", "-"),
        column("passed", "1"),
        column("detail", "-"),
    ]);
    for c in &checks {
        report.push(c.line());
        table.push(vec![
            Cell::Int(c.id as i64),
            Cell::Text(c.name.to_string()),
            Cell::Int(c.passed as i64),
            Cell::Text(c.detail.clone()),
        ])?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    report.push(format!("{} of {} checks passed", checks.len() - failed, checks.len()));
    Ok((table, failed))
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<(RunConfig, String)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = crate::config::parse_config(&text)
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok((cfg, text))
}
