//! Python bindings for the frequency-shaping control library: the main
//! domain types (system parameters, shaping gains, transfer functions,
//! step metrics, stability certificates) and the design/analysis
//! pipelines behind them.
//!
//! Build with `cargo build -p freqshape-python` and load the produced
//! `libfreqshape_py.so` as the module `freqshape_py` (see
//! `python/smoke_test.py`).

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use freqshape::analysis::{self, AnalysisError, CalibrationOptions, SimConfig};
use freqshape::plant::{self, PlantError};
use freqshape::synthesis;
use freqshape::FrequencyGrid;

fn plant_err(e: PlantError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn analysis_err(e: AnalysisError) -> PyErr {
    match e {
        AnalysisError::Plant(p) => plant_err(p),
        AnalysisError::InvalidInput(msg) => PyValueError::new_err(msg),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn synthesis_err(e: synthesis::SynthesisError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Aggregate grid parameters.
#[pyclass(name = "SystemParams", skip_from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: plant::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (h, alpha_l, alpha_g, tau, b, b_hat=None, f_base=60.0))]
    fn new(
        h: f64,
        alpha_l: f64,
        alpha_g: f64,
        tau: f64,
        b: f64,
        b_hat: Option<f64>,
        f_base: f64,
    ) -> PyResult<Self> {
        let inner =
            plant::SystemParams::new(h, alpha_l, alpha_g, tau, b, b_hat.unwrap_or(b), f_base)
                .map_err(plant_err)?;
        Ok(PySystemParams { inner })
    }

    /// The built-in demo parameter set.
    #[staticmethod]
    fn demo() -> Self {
        PySystemParams {
            inner: plant::SystemParams::default(),
        }
    }

    /// Fit parameters to the bundled trade-off anchor table.
    #[staticmethod]
    fn calibrated() -> PyResult<Self> {
        let anchors = analysis::pareto_calibration_anchors();
        let report =
            analysis::calibrate(&anchors, &CalibrationOptions::default()).map_err(analysis_err)?;
        Ok(PySystemParams {
            inner: report.params,
        })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn alpha_l(&self) -> f64 {
        self.inner.alpha_l
    }

    #[getter]
    fn alpha_g(&self) -> f64 {
        self.inner.alpha_g
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn b_hat(&self) -> f64 {
        self.inner.b_hat
    }

    #[getter]
    fn f_base(&self) -> f64 {
        self.inner.f_base
    }

    fn with_b(&self, b: f64) -> Self {
        PySystemParams {
            inner: self.inner.with_b(b),
        }
    }

    fn with_b_hat(&self, b_hat: f64) -> Self {
        PySystemParams {
            inner: self.inner.with_b_hat(b_hat),
        }
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(h={}, alpha_l={}, alpha_g={}, tau={}, b={}, b_hat={}, f_base={})",
            p.h, p.alpha_l, p.alpha_g, p.tau, p.b, p.b_hat, p.f_base
        )
    }
}

/// Shaping controller gains.
#[pyclass(name = "PidGains", skip_from_py_object)]
#[derive(Clone)]
struct PyPidGains {
    inner: synthesis::PidGains,
}

#[pymethods]
impl PyPidGains {
    #[new]
    fn new(kp: f64, ki: f64, kd: f64) -> Self {
        PyPidGains {
            inner: synthesis::PidGains { kp, ki, kd },
        }
    }

    #[getter]
    fn kp(&self) -> f64 {
        self.inner.kp
    }

    #[getter]
    fn ki(&self) -> f64 {
        self.inner.ki
    }

    #[getter]
    fn kd(&self) -> f64 {
        self.inner.kd
    }

    fn __repr__(&self) -> String {
        format!(
            "PidGains(kp={}, ki={}, kd={})",
            self.inner.kp, self.inner.ki, self.inner.kd
        )
    }
}

/// Rational transfer function in the Laplace variable.
#[pyclass(name = "TransferFunction", skip_from_py_object)]
#[derive(Clone)]
struct PyTransferFunction {
    inner: freqshape::TransferFunction,
}

#[pymethods]
impl PyTransferFunction {
    #[new]
    fn new(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        freqshape::TransferFunction::from_coeffs(&num, &den)
            .map(|inner| PyTransferFunction { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Numerator coefficients, ascending powers of s.
    #[getter]
    fn num(&self) -> Vec<f64> {
        self.inner.num().coeffs().to_vec()
    }

    /// Denominator coefficients, ascending powers of s (monic).
    #[getter]
    fn den(&self) -> Vec<f64> {
        self.inner.den().coeffs().to_vec()
    }

    fn dc_gain(&self) -> f64 {
        self.inner.dc_gain()
    }

    fn is_stable(&self) -> bool {
        self.inner.is_stable()
    }

    fn poles(&self) -> Vec<Complex64> {
        self.inner.poles()
    }

    fn evaluate(&self, s: Complex64) -> Complex64 {
        self.inner.evaluate(s)
    }

    fn hinf_norm(&self) -> PyResult<f64> {
        self.inner
            .hinf_norm(&FrequencyGrid::default())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("TransferFunction({})", self.inner)
    }
}

/// Metrics of a simulated load-step response.
#[pyclass(name = "StepMetrics", skip_from_py_object)]
#[derive(Clone)]
struct PyStepMetrics {
    #[pyo3(get)]
    nadir_pu: f64,
    #[pyo3(get)]
    nadir_mhz: f64,
    #[pyo3(get)]
    peak_power_pu: f64,
    #[pyo3(get)]
    steady_state_freq_pu: f64,
    #[pyo3(get)]
    t_nadir: f64,
}

impl From<analysis::StepMetrics> for PyStepMetrics {
    fn from(m: analysis::StepMetrics) -> Self {
        PyStepMetrics {
            nadir_pu: m.nadir_pu,
            nadir_mhz: m.nadir_mhz,
            peak_power_pu: m.peak_power_pu,
            steady_state_freq_pu: m.steady_state_freq_pu,
            t_nadir: m.t_nadir,
        }
    }
}

#[pymethods]
impl PyStepMetrics {
    fn __repr__(&self) -> String {
        format!(
            "StepMetrics(nadir_mhz={}, peak_power_pu={}, steady_state_freq_pu={}, t_nadir={})",
            self.nadir_mhz, self.peak_power_pu, self.steady_state_freq_pu, self.t_nadir
        )
    }
}

/// Stability certificate for one design point.
#[pyclass(name = "StabilityCertificate", skip_from_py_object)]
#[derive(Clone)]
struct PyStabilityCertificate {
    #[pyo3(get)]
    verdict: String,
    #[pyo3(get)]
    stable: bool,
    #[pyo3(get)]
    xi: f64,
    #[pyo3(get)]
    in_u: bool,
    #[pyo3(get)]
    in_n: bool,
    #[pyo3(get)]
    in_m: bool,
    #[pyo3(get)]
    min_phase: bool,
    #[pyo3(get)]
    branch_positive_real: bool,
    #[pyo3(get)]
    poles: Vec<Complex64>,
    #[pyo3(get)]
    gains: PyPidGains,
    report_text: String,
}

#[pymethods]
impl PyStabilityCertificate {
    fn report(&self) -> String {
        self.report_text.clone()
    }

    fn __repr__(&self) -> String {
        format!("StabilityCertificate(verdict={})", self.verdict)
    }
}

fn shaping(params: &PySystemParams, rho: f64) -> PyResult<plant::ShapingSpec> {
    let spec = plant::ShapingSpec::new(rho).map_err(plant_err)?;
    spec.check_against(&params.inner).map_err(plant_err)?;
    Ok(spec)
}

/// Shaping gains from the matching condition (uses the estimate b_hat).
#[pyfunction]
fn synthesize(params: &PySystemParams, rho: f64) -> PyResult<PyPidGains> {
    let spec = shaping(params, rho)?;
    synthesis::synthesize(&params.inner, &spec)
        .map(|inner| PyPidGains { inner })
        .map_err(synthesis_err)
}

/// Full stability certificate for one design point.
#[pyfunction]
fn certify(params: &PySystemParams, rho: f64) -> PyResult<PyStabilityCertificate> {
    let spec = shaping(params, rho)?;
    let cert = synthesis::certify(&params.inner, &spec).map_err(synthesis_err)?;
    Ok(PyStabilityCertificate {
        verdict: cert.verdict.to_string(),
        stable: cert.verdict.is_stable(),
        xi: cert.xi,
        in_u: cert.sets.in_u,
        in_n: cert.sets.in_n,
        in_m: cert.sets.in_m,
        min_phase: cert.min_phase,
        branch_positive_real: cert.branch_positive_real,
        poles: cert.poles.clone(),
        gains: PyPidGains { inner: cert.gains },
        report_text: cert.report(&params.inner, rho),
    })
}

/// Target load-to-frequency response for the given rho.
#[pyfunction]
fn target_transfer(params: &PySystemParams, rho: f64) -> PyResult<PyTransferFunction> {
    let spec = shaping(params, rho)?;
    plant::target_transfer(&params.inner, &spec)
        .map(|inner| PyTransferFunction { inner })
        .map_err(plant_err)
}

/// Assembled closed loop with gains synthesized from b_hat and the network
/// closed with the true b.
#[pyfunction]
fn closed_loop(params: &PySystemParams, rho: f64) -> PyResult<PyTransferFunction> {
    let spec = shaping(params, rho)?;
    let gains = synthesis::synthesize(&params.inner, &spec).map_err(synthesis_err)?;
    plant::closed_loop(&params.inner, &gains)
        .map(|inner| PyTransferFunction { inner })
        .map_err(plant_err)
}

/// Inverter power per unit load step for the matched design.
#[pyfunction]
fn ibr_power_from_load(params: &PySystemParams, rho: f64) -> PyResult<PyTransferFunction> {
    let spec = shaping(params, rho)?;
    plant::ibr_power_from_load(&params.inner, &spec)
        .map(|inner| PyTransferFunction { inner })
        .map_err(plant_err)
}

/// Nadir/peak metrics of the matched design (rho = tau gives the no-IBR
/// response with zero inverter power).
#[pyfunction]
#[pyo3(signature = (params, rho, step_pu=1.0))]
fn matched_step_metrics(
    params: &PySystemParams,
    rho: f64,
    step_pu: f64,
) -> PyResult<PyStepMetrics> {
    let p = &params.inner;
    let cfg = SimConfig {
        step_pu,
        ..SimConfig::default()
    };
    let (freq, power) = if (rho - p.tau).abs() <= 1e-12 * p.tau {
        (
            plant::no_ibr_transfer(p),
            freqshape::TransferFunction::zero(),
        )
    } else {
        let spec = shaping(params, rho)?;
        (
            plant::target_transfer(p, &spec).map_err(plant_err)?,
            plant::ibr_power_from_load(p, &spec).map_err(plant_err)?,
        )
    };
    analysis::step_metrics(&freq, &power, p.f_base, &cfg)
        .map(PyStepMetrics::from)
        .map_err(analysis_err)
}

/// Nadir metrics of the true (possibly mismatched) closed loop.
#[pyfunction]
#[pyo3(signature = (params, rho, step_pu=1.0))]
fn simulate_closed_loop(
    params: &PySystemParams,
    rho: f64,
    step_pu: f64,
) -> PyResult<PyStepMetrics> {
    let spec = shaping(params, rho)?;
    let gains = synthesis::synthesize(&params.inner, &spec).map_err(synthesis_err)?;
    let freq = plant::closed_loop(&params.inner, &gains).map_err(plant_err)?;
    let power = analysis::power_channel(&params.inner, &gains).map_err(analysis_err)?;
    let cfg = SimConfig {
        step_pu,
        ..SimConfig::default()
    };
    analysis::step_metrics(&freq, &power, params.inner.f_base, &cfg)
        .map(PyStepMetrics::from)
        .map_err(analysis_err)
}

/// Trade-off sweep: list of (rho, nadir_mhz, peak_power_pu), sorted by rho.
#[pyfunction]
#[pyo3(signature = (params, rho_grid=None))]
fn pareto_sweep(
    params: &PySystemParams,
    rho_grid: Option<Vec<f64>>,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let grid = rho_grid.unwrap_or_else(|| analysis::default_rho_grid(params.inner.tau));
    analysis::pareto_sweep(&params.inner, &grid)
        .map(|points| {
            points
                .into_iter()
                .map(|p| (p.rho, p.nadir_mhz, p.peak_power_pu))
                .collect()
        })
        .map_err(analysis_err)
}

/// One sweep cell: (c, b, nadir_mhz or None, stable).
type MismatchRow = (f64, f64, Option<f64>, bool);

/// Mismatch robustness sweep: list of (c, b, nadir_mhz or None, stable).
#[pyfunction]
#[pyo3(signature = (params, rho, c_grid, b_grid, threads=1))]
fn mismatch_sweep(
    params: &PySystemParams,
    rho: f64,
    c_grid: Vec<f64>,
    b_grid: Vec<f64>,
    threads: usize,
) -> PyResult<Vec<MismatchRow>> {
    analysis::mismatch_sweep(&params.inner, rho, &c_grid, &b_grid, threads)
        .map(|cells| {
            cells
                .into_iter()
                .map(|c| (c.c, c.b, c.nadir_mhz, c.stable))
                .collect()
        })
        .map_err(analysis_err)
}

/// Closed-form peak sensitivity alpha_g (tau - rho)/(tau^2 rho).
#[pyfunction]
fn sensitivity_norm_closed_form(params: &PySystemParams, rho: f64) -> PyResult<f64> {
    analysis::sensitivity_norm_closed_form(&params.inner, rho).map_err(analysis_err)
}

/// The sensitivity transfer function S(s).
#[pyfunction]
fn sensitivity_tf(params: &PySystemParams, rho: f64) -> PyResult<PyTransferFunction> {
    analysis::sensitivity_tf(&params.inner, rho)
        .map(|inner| PyTransferFunction { inner })
        .map_err(analysis_err)
}

/// Default trade-off rho grid (19 points plus the no-IBR endpoint).
#[pyfunction]
fn default_rho_grid(tau: f64) -> Vec<f64> {
    analysis::default_rho_grid(tau)
}

/// Bundled reference table as CSV text (names: pareto, mismatch-c1,
/// mismatch-rho07).
#[pyfunction]
fn quote_table(name: &str) -> PyResult<String> {
    analysis::quote_table(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown table '{name}'")))
}

#[pymodule]
fn freqshape_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyPidGains>()?;
    m.add_class::<PyTransferFunction>()?;
    m.add_class::<PyStepMetrics>()?;
    m.add_class::<PyStabilityCertificate>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(target_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(closed_loop, m)?)?;
    m.add_function(wrap_pyfunction!(ibr_power_from_load, m)?)?;
    m.add_function(wrap_pyfunction!(matched_step_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_closed_loop, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(mismatch_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_norm_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_tf, m)?)?;
    m.add_function(wrap_pyfunction!(default_rho_grid, m)?)?;
    m.add_function(wrap_pyfunction!(quote_table, m)?)?;
    Ok(())
}
