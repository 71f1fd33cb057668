//! Config-file driven command-line front end.
//!
//! `freqshape <mode> --config <path> [--out <dir>] [--quote-figure <name>]`
//!
//! The config is line-oriented `key = value` under `[params]` and `[run]`
//! section headers. Modes: synth, certify, simulate, pareto, mismatch,
//! sensitivity. Exit codes: 0 success, 1 validation error, 2 computation
//! error. `FREQSHAPE_THREADS` caps sweep parallelism.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{
    self, calibrate, default_rho_grid, mismatch_sweep, pareto_sweep, quote_table, sensitivity_rows,
    simulate_and_measure, solve_min_peak, table_names, AnalysisError, Anchor, CalibrationOptions,
    SimConfig,
};
use crate::plant::{ShapingSpec, SystemParams};
use crate::synthesis::{self, StabilityCertificate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("computation error: {0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Computation(_) => 2,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        use crate::plant::PlantError;
        match e {
            AnalysisError::InvalidInput(msg) => CliError::Config(msg),
            AnalysisError::Plant(PlantError::AlgebraicDegeneracy) => {
                CliError::Computation(PlantError::AlgebraicDegeneracy.to_string())
            }
            AnalysisError::Plant(p) => CliError::Config(p.to_string()),
            other => CliError::Computation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Synth,
    Certify,
    Simulate,
    Pareto,
    Mismatch,
    Sensitivity,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Synth => "synth",
            Mode::Certify => "certify",
            Mode::Simulate => "simulate",
            Mode::Pareto => "pareto",
            Mode::Mismatch => "mismatch",
            Mode::Sensitivity => "sensitivity",
        }
    }
}

impl FromStr for Mode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "synth" => Ok(Mode::Synth),
            "certify" => Ok(Mode::Certify),
            "simulate" => Ok(Mode::Simulate),
            "pareto" => Ok(Mode::Pareto),
            "mismatch" => Ok(Mode::Mismatch),
            "sensitivity" => Ok(Mode::Sensitivity),
            other => Err(CliError::Usage(format!(
                "unknown mode '{other}' (expected synth|certify|simulate|pareto|mismatch|sensitivity)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the plant parameters come from: explicit values, or a calibration
/// run against an anchor table (a CSV path or `builtin:<table>`).
#[derive(Debug, Clone, PartialEq)]
pub enum ParamsSource {
    Explicit(SystemParams),
    Calibrate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ParamsSource,
    pub mode: Mode,
    pub rho: Option<f64>,
    pub rho_grid: Option<Vec<f64>>,
    pub c_grid: Option<Vec<f64>>,
    pub b_grid: Option<Vec<f64>>,
    pub step_pu: f64,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub nadir_bound_mhz: Option<f64>,
    pub output_dir: PathBuf,
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .map_err(|_| CliError::Config(format!("{key}: expected a number, got '{v}'")))
}

/// Grids accept `a,b,c`, `lin:start:stop:count`, or `log:start:stop:count`.
fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Config(format!("{key}: {msg} in '{v}'"));
    if let Some(rest) = v.strip_prefix("lin:").or_else(|| v.strip_prefix("log:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let start = parse_f64(key, parts[0])?;
        let stop = parse_f64(key, parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| bad("count must be an integer"))?;
        if count < 2 || stop <= start {
            return Err(bad("need count >= 2 and stop > start"));
        }
        let grid = if v.starts_with("log:") {
            if start <= 0.0 {
                return Err(bad("log grid needs start > 0"));
            }
            let ratio = (stop / start).ln();
            (0..count)
                .map(|k| start * (ratio * k as f64 / (count - 1) as f64).exp())
                .collect()
        } else {
            (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect()
        };
        return Ok(grid);
    }
    v.split(',').map(|tok| parse_f64(key, tok.trim())).collect()
}

fn grid_to_string(grid: &[f64]) -> String {
    grid.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parse the line-oriented config text.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut section = String::new();
    let mut params_kv: Vec<(String, String)> = Vec::new();
    let mut run_kv: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if section != "params" && section != "run" {
                return Err(CliError::Config(format!(
                    "line {}: unknown section [{section}]",
                    lineno + 1
                )));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match section.as_str() {
            "params" => params_kv.push((key, value)),
            "run" => run_kv.push((key, value)),
            _ => {
                return Err(CliError::Config(format!(
                    "line {}: key outside of a [params]/[run] section",
                    lineno + 1
                )))
            }
        }
    }

    let params = parse_params_section(&params_kv)?;

    let mut mode = None;
    let mut rho = None;
    let mut rho_grid = None;
    let mut c_grid = None;
    let mut b_grid = None;
    let mut step_pu = 1.0;
    let mut dt = None;
    let mut horizon = None;
    let mut nadir_bound_mhz = None;
    let mut output_dir = PathBuf::from("out");
    for (key, value) in &run_kv {
        match key.as_str() {
            "mode" => mode = Some(Mode::from_str(value)?),
            "rho" => rho = Some(parse_f64(key, value)?),
            "rho_grid" => rho_grid = Some(parse_grid(key, value)?),
            "c_grid" => c_grid = Some(parse_grid(key, value)?),
            "b_grid" => b_grid = Some(parse_grid(key, value)?),
            "step_pu" => step_pu = parse_f64(key, value)?,
            "dt" => dt = Some(parse_f64(key, value)?),
            "horizon" => horizon = Some(parse_f64(key, value)?),
            "nadir_bound_mhz" => nadir_bound_mhz = Some(parse_f64(key, value)?),
            "output_dir" => output_dir = PathBuf::from(value),
            other => {
                return Err(CliError::Config(format!("unknown [run] key '{other}'")));
            }
        }
    }
    let mode = mode.ok_or_else(|| CliError::Config("missing [run] mode".into()))?;

    let config = RunConfig {
        params,
        mode,
        rho,
        rho_grid,
        c_grid,
        b_grid,
        step_pu,
        dt,
        horizon,
        nadir_bound_mhz,
        output_dir,
    };
    config.validate_structure()?;
    Ok(config)
}

fn parse_params_section(kv: &[(String, String)]) -> Result<ParamsSource, CliError> {
    if let Some((_, v)) = kv.iter().find(|(k, _)| k == "calibrate") {
        if kv.len() > 1 {
            return Err(CliError::Config(
                "[params] calibrate cannot be combined with explicit values".into(),
            ));
        }
        return Ok(ParamsSource::Calibrate(v.clone()));
    }
    let mut p = SystemParams {
        h: f64::NAN,
        alpha_l: f64::NAN,
        alpha_g: f64::NAN,
        tau: f64::NAN,
        b: f64::NAN,
        b_hat: f64::NAN,
        f_base: 60.0,
    };
    for (key, value) in kv {
        let v = parse_f64(key, value)?;
        match key.as_str() {
            "h" => p.h = v,
            "alpha_l" => p.alpha_l = v,
            "alpha_g" => p.alpha_g = v,
            "tau" => p.tau = v,
            "b" => p.b = v,
            "b_hat" => p.b_hat = v,
            "f_base" => p.f_base = v,
            other => {
                return Err(CliError::Config(format!("unknown [params] key '{other}'")));
            }
        }
    }
    if p.b_hat.is_nan() {
        p.b_hat = p.b;
    }
    for (name, v) in [
        ("h", p.h),
        ("alpha_l", p.alpha_l),
        ("alpha_g", p.alpha_g),
        ("tau", p.tau),
        ("b", p.b),
    ] {
        if v.is_nan() {
            return Err(CliError::Config(format!("missing [params] key '{name}'")));
        }
    }
    p.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(ParamsSource::Explicit(p))
}

impl RunConfig {
    /// Structural checks that do not need resolved parameters.
    fn validate_structure(&self) -> Result<(), CliError> {
        let need = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(CliError::Config(msg.to_string()))
            }
        };
        if !(self.step_pu.is_finite() && self.step_pu != 0.0) {
            return Err(CliError::Config(
                "step_pu must be finite and nonzero".into(),
            ));
        }
        if let Some(dt) = self.dt {
            need(dt > 0.0, "dt must be > 0")?;
        }
        if let Some(h) = self.horizon {
            need(h > 0.0, "horizon must be > 0")?;
        }
        match self.mode {
            Mode::Synth | Mode::Simulate => need(self.rho.is_some(), "mode requires rho"),
            Mode::Certify | Mode::Sensitivity => need(
                self.rho.is_some() || self.rho_grid.is_some(),
                "mode requires rho or rho_grid",
            ),
            Mode::Mismatch => {
                need(self.rho.is_some(), "mismatch mode requires rho")?;
                need(
                    self.c_grid.is_some() && self.b_grid.is_some(),
                    "mismatch mode requires c_grid and b_grid",
                )
            }
            Mode::Pareto => Ok(()),
        }
    }

    /// Canonical config text; parsing it back yields an equal config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::from("[params]\n");
        match &self.params {
            ParamsSource::Calibrate(spec) => out.push_str(&format!("calibrate = {spec}\n")),
            ParamsSource::Explicit(p) => {
                out.push_str(&format!("h = {}\n", p.h));
                out.push_str(&format!("alpha_l = {}\n", p.alpha_l));
                out.push_str(&format!("alpha_g = {}\n", p.alpha_g));
                out.push_str(&format!("tau = {}\n", p.tau));
                out.push_str(&format!("b = {}\n", p.b));
                out.push_str(&format!("b_hat = {}\n", p.b_hat));
                out.push_str(&format!("f_base = {}\n", p.f_base));
            }
        }
        out.push_str("\n[run]\n");
        out.push_str(&format!("mode = {}\n", self.mode));
        if let Some(rho) = self.rho {
            out.push_str(&format!("rho = {rho}\n"));
        }
        if let Some(grid) = &self.rho_grid {
            out.push_str(&format!("rho_grid = {}\n", grid_to_string(grid)));
        }
        if let Some(grid) = &self.c_grid {
            out.push_str(&format!("c_grid = {}\n", grid_to_string(grid)));
        }
        if let Some(grid) = &self.b_grid {
            out.push_str(&format!("b_grid = {}\n", grid_to_string(grid)));
        }
        out.push_str(&format!("step_pu = {}\n", self.step_pu));
        if let Some(dt) = self.dt {
            out.push_str(&format!("dt = {dt}\n"));
        }
        if let Some(h) = self.horizon {
            out.push_str(&format!("horizon = {h}\n"));
        }
        if let Some(bound) = self.nadir_bound_mhz {
            out.push_str(&format!("nadir_bound_mhz = {bound}\n"));
        }
        out.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        out
    }
}

/// Anchor CSV rows: `rho,nadir_mhz[,peak_pu]` with `no_ibr` for the
/// inverter-free point. A header row is skipped.
pub fn parse_anchor_csv(text: &str) -> Result<Vec<Anchor>, CliError> {
    let mut anchors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.contains("nadir") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CliError::Config(format!(
                "anchor line {}: expected rho,nadir_mhz[,peak_pu]",
                lineno + 1
            )));
        }
        let rho = if fields[0] == "no_ibr" {
            None
        } else {
            Some(parse_f64("rho", fields[0])?)
        };
        let nadir_mhz = parse_f64("nadir_mhz", fields[1])?;
        let peak_pu = fields
            .get(2)
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64("peak_pu", s))
            .transpose()?;
        anchors.push(Anchor {
            rho,
            nadir_mhz,
            peak_pu,
        });
    }
    Ok(anchors)
}

fn resolve_params(source: &ParamsSource, out_dir: &Path) -> Result<SystemParams, CliError> {
    match source {
        ParamsSource::Explicit(p) => {
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            Ok(*p)
        }
        ParamsSource::Calibrate(spec) => {
            let anchors = if let Some(name) = spec.strip_prefix("builtin:") {
                let table = quote_table(name).ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown builtin table '{name}' (available: {})",
                        table_names().join(", ")
                    ))
                })?;
                parse_anchor_csv(&table)?
            } else {
                let text = fs::read_to_string(spec)
                    .map_err(|e| CliError::Io(format!("cannot read anchor file {spec}: {e}")))?;
                parse_anchor_csv(&text)?
            };
            let report = calibrate(&anchors, &CalibrationOptions::default())
                .map_err(|e| CliError::Computation(e.to_string()))?;
            write_text(&out_dir.join("calibration.txt"), &report.to_text())?;
            println!(
                "calibrated: h={} alpha_l={} alpha_g={} tau={} f_base={} (max residual {:.3e})",
                report.params.h,
                report.params.alpha_l,
                report.params.alpha_g,
                report.params.tau,
                report.params.f_base,
                report.max_rel_residual
            );
            Ok(report.params)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut out = String::with_capacity(rows.len() * 32 + 64);
    out.push_str(&format!("# freqshape {VERSION}\n"));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    write_text(path, &out)
}

fn sweep_threads(cells: usize) -> usize {
    let from_env = std::env::var("FREQSHAPE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let avail = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    from_env.unwrap_or(avail).min(cells.max(1))
}

/// Execute one run. Output files land in `config.output_dir` unless
/// overridden.
pub fn run(config: &RunConfig, out_override: Option<&Path>) -> Result<(), CliError> {
    let out_dir = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output_dir.clone());
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let params = resolve_params(&config.params, &out_dir)?;
    let sim_cfg = SimConfig {
        step_pu: config.step_pu,
        dt: config.dt,
        horizon: config.horizon,
    };

    match config.mode {
        Mode::Synth => {
            let spec = shaping_spec(config.rho, &params)?;
            let gains = synthesis::synthesize(&params, &spec)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("k_d = {}", gains.kd);
            println!("k_p = {}", gains.kp);
            println!("k_i = {}", gains.ki);
        }
        Mode::Certify => {
            let grid = rho_list(config, &params)?;
            let rows = analysis::certify_grid(&params, &grid)?;
            let mut csv_rows = Vec::with_capacity(rows.len());
            for (rho, cert) in &rows {
                print!("{}", cert.report(&params, *rho));
                println!();
                csv_rows.push(cert.csv_row(&params, *rho));
            }
            write_csv(
                &out_dir.join("certificates.csv"),
                StabilityCertificate::csv_header(),
                &csv_rows,
            )?;
        }
        Mode::Simulate => {
            let spec = shaping_spec(config.rho, &params)?;
            let gains = synthesis::synthesize(&params, &spec)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let freq = crate::plant::closed_loop(&params, &gains)
                .map_err(|e| CliError::Computation(e.to_string()))?;
            let power = analysis::power_channel(&params, &gains)?;
            let sim = simulate_and_measure(&freq, &power, params.f_base, &sim_cfg)?;
            let power_y = sim.power.as_ref().map(|tr| tr.y().to_vec());
            let rows: Vec<String> = sim
                .freq
                .t()
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let f_mhz = sim.freq.y()[k] * params.f_base * 1e3;
                    let p_pu = power_y.as_ref().map_or(0.0, |y| y[k]);
                    format!("{t},{f_mhz},{p_pu}")
                })
                .collect();
            write_csv(
                &out_dir.join("trajectory.csv"),
                "t_s,freq_mhz,power_pu",
                &rows,
            )?;
            let m = sim.metrics;
            println!("nadir_mhz = {}", m.nadir_mhz);
            println!("peak_power_pu = {}", m.peak_power_pu);
            println!("steady_state_freq_pu = {}", m.steady_state_freq_pu);
            println!("t_nadir_s = {}", m.t_nadir);
        }
        Mode::Pareto => {
            let grid = config
                .rho_grid
                .clone()
                .unwrap_or_else(|| default_rho_grid(params.tau));
            let points = pareto_sweep(&params, &grid)?;
            let rows: Vec<String> = points
                .iter()
                .map(|p| format!("{},{},{}", p.rho, p.nadir_mhz, p.peak_power_pu))
                .collect();
            write_csv(&out_dir.join("pareto.csv"), "rho,nadir_mhz,peak_pu", &rows)?;
            if let Some(bound) = config.nadir_bound_mhz {
                match solve_min_peak(&params, &grid, bound)? {
                    Some(best) => println!(
                        "min_peak: rho = {}, nadir_mhz = {}, peak_pu = {}",
                        best.rho, best.nadir_mhz, best.peak_power_pu
                    ),
                    None => println!("min_peak: infeasible (no grid point meets {bound} mHz)"),
                }
            }
        }
        Mode::Mismatch => {
            let rho = config.rho.expect("validated");
            let c_grid = config.c_grid.as_ref().expect("validated");
            let b_grid = config.b_grid.as_ref().expect("validated");
            let threads = sweep_threads(c_grid.len() * b_grid.len());
            let cells = mismatch_sweep(&params, rho, c_grid, b_grid, threads)?;
            let rows: Vec<String> = cells
                .iter()
                .map(|cell| {
                    let nadir = cell.nadir_mhz.map(|v| v.to_string()).unwrap_or_default();
                    let flag = if cell.stable { "stable" } else { "UNSTABLE" };
                    format!("{},{},{},{nadir},{flag}", cell.rho, cell.c, cell.b)
                })
                .collect();
            write_csv(
                &out_dir.join("mismatch.csv"),
                "rho,c,b,nadir_mhz,stable",
                &rows,
            )?;
        }
        Mode::Sensitivity => {
            let grid = rho_list(config, &params)?;
            let rows = sensitivity_rows(&params, &grid)?;
            let csv_rows: Vec<String> = rows
                .iter()
                .map(|r| format!("{},{},{}", r.rho, r.norm_closed, r.norm_numeric))
                .collect();
            write_csv(
                &out_dir.join("sensitivity.csv"),
                "rho,norm_closed,norm_numeric",
                &csv_rows,
            )?;
        }
    }
    Ok(())
}

fn shaping_spec(rho: Option<f64>, params: &SystemParams) -> Result<ShapingSpec, CliError> {
    let rho = rho.ok_or_else(|| CliError::Config("missing rho".into()))?;
    let spec = ShapingSpec::new(rho).map_err(|e| CliError::Config(e.to_string()))?;
    spec.check_against(params)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

fn rho_list(config: &RunConfig, params: &SystemParams) -> Result<Vec<f64>, CliError> {
    let grid = match (&config.rho_grid, config.rho) {
        (Some(grid), _) => grid.clone(),
        (None, Some(rho)) => vec![rho],
        (None, None) => return Err(CliError::Config("missing rho or rho_grid".into())),
    };
    for &rho in &grid {
        ShapingSpec::new(rho)
            .and_then(|s| s.check_against(params))
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(grid)
}

const USAGE: &str =
    "usage: freqshape <mode> --config <path> [--out <dir>] [--quote-figure <name>]\n\
       freqshape --quote-figure <name>\n\
modes: synth | certify | simulate | pareto | mismatch | sensitivity";

/// Argument parsing and dispatch; returns the process exit code.
pub fn main_entry(args: &[String]) -> i32 {
    match main_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("freqshape: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{USAGE}");
            }
            e.exit_code()
        }
    }
}

fn main_inner(args: &[String]) -> Result<(), CliError> {
    let mut mode_arg: Option<String> = None;
    let mut config_path: Option<String> = None;
    let mut out_dir: Option<String> = None;
    let mut quote: Option<String> = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                config_path = Some(
                    it.next()
                        .ok_or_else(|| CliError::Usage("--config needs a path".into()))?
                        .clone(),
                )
            }
            "--out" => {
                out_dir = Some(
                    it.next()
                        .ok_or_else(|| CliError::Usage("--out needs a directory".into()))?
                        .clone(),
                )
            }
            "--quote-figure" => {
                quote = Some(
                    it.next()
                        .ok_or_else(|| CliError::Usage("--quote-figure needs a name".into()))?
                        .clone(),
                )
            }
            "--help" | "-h" => {
                println!("{USAGE}");
                return Ok(());
            }
            "--version" => {
                println!("freqshape {VERSION}");
                return Ok(());
            }
            other if !other.starts_with('-') && mode_arg.is_none() => {
                mode_arg = Some(other.to_string());
            }
            other => return Err(CliError::Usage(format!("unexpected argument '{other}'"))),
        }
    }

    if let Some(name) = quote {
        let table = quote_table(&name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown table '{name}' (available: {})",
                table_names().join(", ")
            ))
        })?;
        print!("{table}");
        return Ok(());
    }

    let mode_arg = mode_arg.ok_or_else(|| CliError::Usage("missing mode".into()))?;
    let mode = Mode::from_str(&mode_arg)?;
    let config_path =
        config_path.ok_or_else(|| CliError::Usage("missing --config <path>".into()))?;
    let text = fs::read_to_string(&config_path)
        .map_err(|e| CliError::Io(format!("cannot read config {config_path}: {e}")))?;
    let mut config = parse_config(&text)?;
    if config.mode != mode {
        // The positional mode wins; the config must agree or omit nothing.
        return Err(CliError::Usage(format!(
            "mode '{mode}' does not match config mode '{}'",
            config.mode
        )));
    }
    if let Some(dir) = &out_dir {
        config.output_dir = PathBuf::from(dir);
    }
    run(&config, None)
}
