//! Step-response metrics, the nadir/peak-power trade-off sweep, the
//! min-peak-power grid solver, susceptance-mismatch robustness sweeps,
//! sensitivity evaluation, and parameter calibration against the bundled
//! benchmark anchors.
//!
//! Sweeps are embarrassingly parallel over grid cells: every cell computes
//! on immutable inputs and writes its own output slot, so assembly is
//! deterministic regardless of execution order.

mod anchors;
mod calibrate;

pub use anchors::{
    matched_nadir_anchors, pareto_calibration_anchors, quote_table, table_names, MatchedNadirRow,
    MismatchSweepRow, ParetoAnchorRow, RhoMismatchRow, MATCHED_NADIR_TABLE, MISMATCH_C105_TABLE,
    MISMATCH_RHO07_TABLE, PARETO_ANCHOR_TABLE,
};
pub use calibrate::{calibrate, Anchor, AnchorResidual, CalibrationOptions, CalibrationReport};

use thiserror::Error;

use crate::lti::{FrequencyGrid, Trajectory, TransferFunction};
use crate::plant::{self, PlantError, ShapingSpec, SystemParams};
use crate::synthesis::{self, PidGains, StabilityCertificate, SynthesisError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("unstable system: simulation requires a strictly stable model")]
    UnstableSystem,
    #[error("monotonicity violated: {0}")]
    MonotonicityViolated(String),
    #[error("calibration diverged: best relative residual {residual:.4} exceeds 5%")]
    CalibrationDiverged { residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<SynthesisError> for AnalysisError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::Plant(p) => AnalysisError::Plant(p),
        }
    }
}

/// Simulation controls. Unset time steps are derived from the pole set:
/// dt = 1/(50 max|pole|), horizon = 10/min|Re(pole)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub step_pu: f64,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step_pu: 1.0,
            dt: None,
            horizon: None,
        }
    }
}

/// Metrics of a simulated load-step response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    /// Peak absolute frequency deviation (p.u.).
    pub nadir_pu: f64,
    /// Peak absolute frequency deviation (mHz at the reporting base).
    pub nadir_mhz: f64,
    /// Peak absolute inverter power injection (p.u.).
    pub peak_power_pu: f64,
    /// Terminal frequency deviation, taken from the DC gain rather than
    /// the trajectory tail (p.u., signed).
    pub steady_state_freq_pu: f64,
    /// Time of the frequency nadir (s).
    pub t_nadir: f64,
}

/// Upper bound on simulation steps; the step is coarsened if the horizon
/// would exceed it.
const MAX_SIM_STEPS: f64 = 4e6;

fn sim_grid(tfs: &[&TransferFunction], cfg: &SimConfig) -> Result<(f64, f64), AnalysisError> {
    let mut fastest = 0.0f64;
    let mut slowest = f64::INFINITY;
    for tf in tfs {
        if tf.den().degree().unwrap_or(0) == 0 {
            continue;
        }
        if !tf.is_stable() {
            return Err(AnalysisError::UnstableSystem);
        }
        for p in tf.poles() {
            fastest = fastest.max(p.norm());
            slowest = slowest.min(p.re.abs());
        }
    }
    let (mut dt, horizon) = if fastest == 0.0 {
        (cfg.dt.unwrap_or(0.01), cfg.horizon.unwrap_or(1.0))
    } else {
        (
            cfg.dt.unwrap_or(1.0 / (50.0 * fastest)),
            cfg.horizon.unwrap_or(10.0 / slowest),
        )
    };
    if !(dt > 0.0 && horizon >= dt) {
        return Err(AnalysisError::InvalidInput(format!(
            "simulation needs dt > 0 and horizon >= dt, got dt = {dt}, horizon = {horizon}"
        )));
    }
    if horizon / dt > MAX_SIM_STEPS {
        dt = horizon / MAX_SIM_STEPS;
    }
    Ok((dt, horizon))
}

/// Peak of |y| with local quadratic refinement: a parabola is fit through
/// the three samples bracketing the discrete maximum and its vertex value
/// is used when it improves on the samples.
fn refined_abs_peak(traj: &Trajectory) -> (f64, f64) {
    let y = traj.y();
    let t = traj.t();
    if y.is_empty() {
        return (0.0, 0.0);
    }
    let mut idx = 0usize;
    let mut best = 0.0f64;
    for (k, v) in y.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = k;
        }
    }
    let mut peak = best;
    let mut t_peak = t[idx];
    if idx > 0 && idx + 1 < y.len() {
        let (f0, f1, f2) = (y[idx - 1].abs(), y[idx].abs(), y[idx + 1].abs());
        let a = (f2 + f0 - 2.0 * f1) / 2.0;
        let b = (f2 - f0) / 2.0;
        if a < 0.0 {
            let delta = -b / (2.0 * a);
            if delta.abs() <= 1.0 {
                let vertex = f1 + b * delta / 2.0;
                if vertex > peak {
                    peak = vertex;
                    t_peak = t[idx] + delta * traj.dt();
                }
            }
        }
    }
    (peak, t_peak)
}

/// Simulated step response of both channels plus the extracted metrics.
#[derive(Debug, Clone)]
pub struct StepSimulation {
    pub metrics: StepMetrics,
    pub freq: Trajectory,
    /// Empty iff the power channel is identically zero.
    pub power: Option<Trajectory>,
}

/// Simulate the frequency and power channels on a shared time grid and
/// extract nadir, peak power, and steady state. The steady state comes
/// from the DC gain; the nadir is the larger of the refined interior peak
/// and the steady-state magnitude, so first-order (monotone) responses
/// report nadir equal to steady state.
pub fn step_metrics(
    freq_tf: &TransferFunction,
    power_tf: &TransferFunction,
    f_base: f64,
    cfg: &SimConfig,
) -> Result<StepMetrics, AnalysisError> {
    simulate_and_measure(freq_tf, power_tf, f_base, cfg).map(|sim| sim.metrics)
}

/// As [`step_metrics`], but retaining the trajectories.
pub fn simulate_and_measure(
    freq_tf: &TransferFunction,
    power_tf: &TransferFunction,
    f_base: f64,
    cfg: &SimConfig,
) -> Result<StepSimulation, AnalysisError> {
    if !freq_tf.is_proper() || !power_tf.is_proper() {
        return Err(AnalysisError::InvalidInput(
            "step metrics require proper transfer functions".into(),
        ));
    }
    let power_is_zero = power_tf.num().is_zero();
    let tfs: Vec<&TransferFunction> = if power_is_zero {
        vec![freq_tf]
    } else {
        vec![freq_tf, power_tf]
    };
    let (dt, horizon) = sim_grid(&tfs, cfg)?;

    let freq_traj = freq_tf
        .step_response(cfg.step_pu, dt, horizon)
        .map_err(|_| AnalysisError::UnstableSystem)?;
    let steady_state = cfg.step_pu * freq_tf.dc_gain();
    let (interior_peak, t_at) = refined_abs_peak(&freq_traj);
    let (nadir_pu, t_nadir) = if interior_peak >= steady_state.abs() {
        (interior_peak, t_at)
    } else {
        (steady_state.abs(), *freq_traj.t().last().unwrap_or(&0.0))
    };

    let mut power_traj = None;
    let peak_power_pu = if power_is_zero {
        0.0
    } else {
        let traj = power_tf
            .step_response(cfg.step_pu, dt, horizon)
            .map_err(|_| AnalysisError::UnstableSystem)?;
        let (peak, _) = refined_abs_peak(&traj);
        let peak = peak.max((cfg.step_pu * power_tf.dc_gain()).abs());
        power_traj = Some(traj);
        peak
    };

    Ok(StepSimulation {
        metrics: StepMetrics {
            nadir_pu,
            nadir_mhz: nadir_pu * f_base * 1e3,
            peak_power_pu,
            steady_state_freq_pu: steady_state,
            t_nadir,
        },
        freq: freq_traj,
        power: power_traj,
    })
}

/// One point of the nadir/peak-power trade-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub rho: f64,
    pub nadir_mhz: f64,
    pub peak_power_pu: f64,
}

/// Default trade-off grid: 19 evenly spaced points over [0.05 tau,
/// 0.95 tau] plus the no-IBR endpoint rho = tau.
pub fn default_rho_grid(tau: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..19)
        .map(|k| tau * (0.05 + 0.9 * k as f64 / 18.0))
        .collect();
    grid.push(tau);
    grid
}

fn is_no_ibr_rho(rho: f64, tau: f64) -> bool {
    (rho - tau).abs() <= 1e-12 * tau
}

/// Matched-design trade-off sweep over a rho grid (entries equal to tau
/// are treated as the no-IBR endpoint). Output is sorted by rho and the
/// monotonicity of both metrics is asserted.
pub fn pareto_sweep(
    params: &SystemParams,
    rho_grid: &[f64],
) -> Result<Vec<ParetoPoint>, AnalysisError> {
    let mut grid = rho_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut points = Vec::with_capacity(grid.len());
    for &rho in &grid {
        points.push(pareto_point(params, rho)?);
    }
    for w in points.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if next.nadir_mhz < prev.nadir_mhz * (1.0 - 1e-6) {
            return Err(AnalysisError::MonotonicityViolated(format!(
                "nadir decreased from {} to {} between rho {} and {}",
                prev.nadir_mhz, next.nadir_mhz, prev.rho, next.rho
            )));
        }
        if next.peak_power_pu > prev.peak_power_pu * (1.0 + 1e-6) + 1e-12 {
            return Err(AnalysisError::MonotonicityViolated(format!(
                "peak power increased from {} to {} between rho {} and {}",
                prev.peak_power_pu, next.peak_power_pu, prev.rho, next.rho
            )));
        }
    }
    Ok(points)
}

fn pareto_point(params: &SystemParams, rho: f64) -> Result<ParetoPoint, AnalysisError> {
    let cfg = SimConfig::default();
    let metrics = if is_no_ibr_rho(rho, params.tau) {
        step_metrics(
            &plant::no_ibr_transfer(params),
            &TransferFunction::zero(),
            params.f_base,
            &cfg,
        )?
    } else {
        let spec = ShapingSpec::new(rho)?;
        let freq = plant::target_transfer(params, &spec)?;
        let power = plant::ibr_power_from_load(params, &spec)?;
        step_metrics(&freq, &power, params.f_base, &cfg)?
    };
    Ok(ParetoPoint {
        rho,
        nadir_mhz: metrics.nadir_mhz,
        peak_power_pu: metrics.peak_power_pu,
    })
}

/// Minimize peak inverter power over the grid subject to a nadir bound
/// (mHz). By monotonicity the optimum is the largest feasible rho;
/// `None` means no grid point meets the bound.
pub fn solve_min_peak(
    params: &SystemParams,
    rho_grid: &[f64],
    nadir_bound_mhz: f64,
) -> Result<Option<ParetoPoint>, AnalysisError> {
    let points = pareto_sweep(params, rho_grid)?;
    Ok(points
        .into_iter()
        .filter(|p| p.nadir_mhz <= nadir_bound_mhz)
        .min_by(|a, b| a.peak_power_pu.partial_cmp(&b.peak_power_pu).unwrap()))
}

fn check_sensitivity_rho(params: &SystemParams, rho: f64) -> Result<(), AnalysisError> {
    if !(rho > 0.0 && rho < params.tau) {
        return Err(AnalysisError::Plant(PlantError::RhoOutOfRange(format!(
            "sensitivity requires 0 < rho < tau, got rho = {rho}, tau = {}",
            params.tau
        ))));
    }
    Ok(())
}

/// Closed-form peak sensitivity of the relative closed-loop mismatch to
/// the scaled inverse susceptance mismatch: alpha_g (tau - rho)/(tau^2 rho).
pub fn sensitivity_norm_closed_form(params: &SystemParams, rho: f64) -> Result<f64, AnalysisError> {
    check_sensitivity_rho(params, rho)?;
    Ok(params.alpha_g * (params.tau - rho) / (params.tau * params.tau * rho))
}

/// The sensitivity transfer function
/// S(s) = alpha_g (tau - rho) s^3 / ((rho s + 1)(tau s + 1)^2).
pub fn sensitivity_tf(params: &SystemParams, rho: f64) -> Result<TransferFunction, AnalysisError> {
    check_sensitivity_rho(params, rho)?;
    let (tau, gain) = (params.tau, params.alpha_g * (params.tau - rho));
    let num = [0.0, 0.0, 0.0, gain];
    let den = [
        1.0,
        2.0 * tau + rho,
        tau * tau + 2.0 * tau * rho,
        rho * tau * tau,
    ];
    Ok(TransferFunction::from_coeffs(&num, &den).expect("denominator is nonzero"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub rho: f64,
    pub norm_closed: f64,
    pub norm_numeric: f64,
}

/// Evaluate the sensitivity norm over a rho grid through both routes: the
/// closed form and the H-infinity norm of S(s).
pub fn sensitivity_rows(
    params: &SystemParams,
    rho_grid: &[f64],
) -> Result<Vec<SensitivityRow>, AnalysisError> {
    let grid = FrequencyGrid::default();
    rho_grid
        .iter()
        .map(|&rho| {
            let norm_closed = sensitivity_norm_closed_form(params, rho)?;
            let norm_numeric = sensitivity_tf(params, rho)?
                .hinf_norm(&grid)
                .map_err(|_| AnalysisError::UnstableSystem)?;
            Ok(SensitivityRow {
                rho,
                norm_closed,
                norm_numeric,
            })
        })
        .collect()
}

/// Susceptance mismatch description: multiplicative estimate factor `c`
/// (b_hat = c b) and the scaled inverse mismatch
/// beta = alpha_g (tau - rho)(1/b - 1/b_hat).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    pub c: f64,
    pub beta: f64,
}

impl MismatchSpec {
    pub fn new(params: &SystemParams, rho: f64, c: f64) -> Result<Self, AnalysisError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(AnalysisError::InvalidInput(format!(
                "estimate factor c must be positive, got {c}"
            )));
        }
        let b_hat = c * params.b;
        let beta = params.alpha_g * (params.tau - rho) * (1.0 / params.b - 1.0 / b_hat);
        Ok(MismatchSpec { c, beta })
    }
}

/// One cell of a mismatch sweep. Unstable cells carry no nadir; instability
/// is data, not an error.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchCell {
    pub rho: f64,
    pub c: f64,
    pub b: f64,
    pub nadir_mhz: Option<f64>,
    pub stable: bool,
}

/// Robustness sweep over estimate factors and true susceptances at fixed
/// rho. Each cell synthesizes gains with b_hat = c*b, certifies stability
/// first, and simulates the true closed loop only when certified stable.
/// `threads` caps the worker count (1 = sequential).
pub fn mismatch_sweep(
    params: &SystemParams,
    rho: f64,
    c_grid: &[f64],
    b_grid: &[f64],
    threads: usize,
) -> Result<Vec<MismatchCell>, AnalysisError> {
    let spec = ShapingSpec::new(rho)?;
    spec.check_against(params)?;
    let cells: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| b_grid.iter().map(move |&b| (c, b)))
        .collect();
    let results = run_parallel(&cells, threads, |&(c, b)| {
        mismatch_cell(params, &spec, c, b)
    });
    results.into_iter().collect()
}

fn mismatch_cell(
    params: &SystemParams,
    spec: &ShapingSpec,
    c: f64,
    b: f64,
) -> Result<MismatchCell, AnalysisError> {
    let rho = spec.rho();
    if !(b.is_finite() && b > 0.0) || !(c.is_finite() && c > 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "mismatch sweep grids must be positive, got c = {c}, b = {b}"
        )));
    }
    let cell_params = params.with_b(b).with_b_hat(c * b);
    let cert = synthesis::certify(&cell_params, spec)?;
    if !cert.verdict.is_stable() {
        return Ok(MismatchCell {
            rho,
            c,
            b,
            nadir_mhz: None,
            stable: false,
        });
    }
    let gains = cert.gains;
    let freq = plant::closed_loop(&cell_params, &gains)?;
    let metrics = step_metrics(
        &freq,
        &TransferFunction::zero(),
        cell_params.f_base,
        &SimConfig::default(),
    )?;
    Ok(MismatchCell {
        rho,
        c,
        b,
        nadir_mhz: Some(metrics.nadir_mhz),
        stable: true,
    })
}

/// Certify a whole rho grid (report/CSV helper for the CLI).
pub fn certify_grid(
    params: &SystemParams,
    rho_grid: &[f64],
) -> Result<Vec<(f64, StabilityCertificate)>, AnalysisError> {
    rho_grid
        .iter()
        .map(|&rho| {
            let cert = synthesis::certify(params, &ShapingSpec::new(rho)?)?;
            Ok((rho, cert))
        })
        .collect()
}

/// Power channel for simulation with explicit gains: the inverter power
/// response to a load step, i.e. the power path composed with the true
/// closed loop.
pub fn power_channel(
    params: &SystemParams,
    gains: &PidGains,
) -> Result<TransferFunction, AnalysisError> {
    let path = plant::pvsi_from_wsm(params, gains)?;
    let cl = plant::closed_loop(params, gains)?;
    Ok(&path * &cl)
}

/// Run one closure per input cell on up to `threads` workers, preserving
/// input order in the output.
fn run_parallel<I, T, F>(inputs: &[I], threads: usize, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    let n = inputs.len();
    if n == 0 {
        return Vec::new();
    }
    let workers = threads.clamp(1, n);
    if workers == 1 {
        return inputs.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (inputs_chunk, slots_chunk) in inputs.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (inp, slot) in inputs_chunk.iter().zip(slots_chunk.iter_mut()) {
                    *slot = Some(f(inp));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}
