//! Transfer-function models of the aggregate synchronous machine, the line
//! coupling, the grid-forming inverter loop, and their interconnections.
//!
//! Sign convention: all signals are deviations from the operating point. A
//! load step enters with positive sign, so the frequency response is
//! negative-going; nadirs are reported as magnitudes downstream.

use thiserror::Error;

use crate::lti::{LtiError, Polynomial, TransferFunction};
use crate::synthesis::PidGains;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlantError {
    #[error("effective turbine time constant out of range: {0}")]
    RhoOutOfRange(String),
    #[error("algebraic degeneracy: interconnection denominator vanished")]
    AlgebraicDegeneracy,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<LtiError> for PlantError {
    fn from(e: LtiError) -> Self {
        match e {
            LtiError::AlgebraicDegeneracy => PlantError::AlgebraicDegeneracy,
            other => PlantError::InvalidParameter(other.to_string()),
        }
    }
}

/// Aggregate grid parameters: inertia constant `h` (s), load frequency
/// sensitivity `alpha_l` (p.u./p.u.), governor gain `alpha_g` (p.u./p.u.),
/// turbine time constant `tau` (s), true line susceptance `b` (p.u.), the
/// controller's susceptance estimate `b_hat` (p.u.), and the reporting base
/// frequency `f_base` (Hz, used only for mHz conversion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub h: f64,
    pub alpha_l: f64,
    pub alpha_g: f64,
    pub tau: f64,
    pub b: f64,
    pub b_hat: f64,
    pub f_base: f64,
}

impl SystemParams {
    pub fn new(
        h: f64,
        alpha_l: f64,
        alpha_g: f64,
        tau: f64,
        b: f64,
        b_hat: f64,
        f_base: f64,
    ) -> Result<Self, PlantError> {
        let p = SystemParams {
            h,
            alpha_l,
            alpha_g,
            tau,
            b,
            b_hat,
            f_base,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let fields = [
            ("h", self.h),
            ("alpha_l", self.alpha_l),
            ("alpha_g", self.alpha_g),
            ("tau", self.tau),
            ("b", self.b),
            ("b_hat", self.b_hat),
            ("f_base", self.f_base),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlantError::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_b_hat(mut self, b_hat: f64) -> Self {
        self.b_hat = b_hat;
        self
    }

    pub fn with_f_base(mut self, f_base: f64) -> Self {
        self.f_base = f_base;
        self
    }

    /// Swing denominator (2Hs + alpha_l)(tau s + 1) + alpha_g, ascending.
    pub(crate) fn machine_den(&self) -> Polynomial {
        Polynomial::from_coeffs(&[
            self.alpha_l + self.alpha_g,
            2.0 * self.h + self.alpha_l * self.tau,
            2.0 * self.h * self.tau,
        ])
    }

    /// Swing numerator tau s + 1.
    pub(crate) fn machine_num(&self) -> Polynomial {
        Polynomial::from_coeffs(&[1.0, self.tau])
    }
}

impl Default for SystemParams {
    /// Placeholder demo set: H = 4 s, alpha_l = 1, alpha_g = 20, tau = 1 s,
    /// b = b_hat = 1 p.u., 60 Hz base. Figure regressions use calibrated
    /// values instead (see `analysis::calibrate`).
    fn default() -> Self {
        SystemParams {
            h: 4.0,
            alpha_l: 1.0,
            alpha_g: 20.0,
            tau: 1.0,
            b: 1.0,
            b_hat: 1.0,
            f_base: 60.0,
        }
    }
}

/// Design choice for the target response: the effective turbine time
/// constant `rho` in seconds. Admissible designs require 0 <= rho < tau;
/// the boundary rho = tau is the no-IBR case, exposed separately via
/// [`no_ibr_transfer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingSpec {
    rho: f64,
}

impl ShapingSpec {
    pub fn new(rho: f64) -> Result<Self, PlantError> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(PlantError::RhoOutOfRange(format!(
                "rho must be finite and >= 0, got {rho}"
            )));
        }
        Ok(ShapingSpec { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn check_against(&self, params: &SystemParams) -> Result<(), PlantError> {
        if self.rho >= params.tau {
            return Err(PlantError::RhoOutOfRange(format!(
                "rho = {} must be < tau = {}",
                self.rho, params.tau
            )));
        }
        Ok(())
    }
}

/// Standalone machine response from injected power to frequency deviation:
/// (tau s + 1) / ((2Hs + alpha_l)(tau s + 1) + alpha_g).
pub fn sm_transfer(params: &SystemParams) -> TransferFunction {
    TransferFunction::new(params.machine_num(), params.machine_den())
        .expect("machine denominator is nonzero")
}

fn target_at_rho(params: &SystemParams, rho: f64) -> TransferFunction {
    let num = Polynomial::from_coeffs(&[-1.0, -rho]);
    let den = Polynomial::from_coeffs(&[
        params.alpha_l + params.alpha_g,
        params.alpha_l * rho + 2.0 * params.h,
        2.0 * params.h * rho,
    ]);
    TransferFunction::new(num, den).expect("target denominator is nonzero")
}

/// Target closed-loop response from load step to frequency deviation:
/// -(rho s + 1) / (2H rho s^2 + (alpha_l rho + 2H) s + (alpha_l + alpha_g)).
/// At rho = 0 the degree drops and the first-order response is recovered.
pub fn target_transfer(
    params: &SystemParams,
    spec: &ShapingSpec,
) -> Result<TransferFunction, PlantError> {
    spec.check_against(params)?;
    Ok(target_at_rho(params, spec.rho()))
}

/// Load-to-frequency response of the machine alone (the rho = tau boundary
/// of the target family, which is excluded from the admissible set but
/// plotted as the "no IBR" reference).
pub fn no_ibr_transfer(params: &SystemParams) -> TransferFunction {
    target_at_rho(params, params.tau)
}

/// PID control law as a transfer function (k_d s^2 + k_p s + k_i)/s.
/// Improper by construction; it only ever enters algebraic assembly and is
/// never realized on its own.
pub fn vsi_pid_transfer(gains: &PidGains) -> TransferFunction {
    TransferFunction::new(
        Polynomial::from_coeffs(&[gains.ki, gains.kp, gains.kd]),
        Polynomial::s(),
    )
    .expect("s is nonzero")
}

/// Numerator of (1/b)s + PID(s) after clearing the 1/s: the quadratic
/// (k_d + 1/b)s^2 + k_p s + k_i that governs the inverter power path.
fn coupling_quadratic(b: f64, gains: &PidGains) -> Polynomial {
    Polynomial::from_coeffs(&[gains.ki, gains.kp, gains.kd + 1.0 / b])
}

/// Inverter power injection per unit machine frequency deviation:
/// -b s / ((k_d b + 1)s^2 + k_p b s + k_i b).
pub fn pvsi_from_wsm(
    params: &SystemParams,
    gains: &PidGains,
) -> Result<TransferFunction, PlantError> {
    let nx = coupling_quadratic(params.b, gains);
    if nx.is_zero() {
        return Err(PlantError::AlgebraicDegeneracy);
    }
    Ok(TransferFunction::new(
        Polynomial::from_coeffs(&[0.0, -1.0]),
        nx,
    )?)
}

/// Full closed loop from load perturbation to machine frequency, assembled
/// by polynomial algebra (no pole-zero cancellation is performed):
///
/// num = -((1/b)s + PID) * G_sm,  den = (1/b)s + PID + G_sm, both cleared
/// of fractions over the common denominator.
pub fn closed_loop(
    params: &SystemParams,
    gains: &PidGains,
) -> Result<TransferFunction, PlantError> {
    let nx = coupling_quadratic(params.b, gains);
    let nm = params.machine_num();
    let dm = params.machine_den();
    let num = -&(&nx * &nm);
    let den = &(&nx * &dm) + &(&Polynomial::s() * &nm);
    Ok(TransferFunction::new(num, den)?)
}

/// Closed loop parameterized directly by the scaled inverse susceptance
/// mismatch `beta` instead of (b, b_hat): an independent algebraic route to
/// the same map, used for sensitivity analysis.
///
/// G(s) = -(tau s + 1) Q(s) / ((2Hs + alpha_l)(tau s + 1) Q(s)
///         + alpha_g [beta s^2 + (tau s + 1)^2]),
/// with Q(s) = beta s^2 + (tau s + 1)(rho s + 1).
pub fn closed_loop_from_mismatch(
    params: &SystemParams,
    spec: &ShapingSpec,
    beta: f64,
) -> Result<TransferFunction, PlantError> {
    spec.check_against(params)?;
    let rho = spec.rho();
    let tau = params.tau;
    let nm = params.machine_num();
    let q = Polynomial::from_coeffs(&[1.0, tau + rho, tau * rho + beta]);
    let rotor = Polynomial::from_coeffs(&[params.alpha_l, 2.0 * params.h]);
    let beta_s2_nm2 = &Polynomial::from_coeffs(&[0.0, 0.0, beta]) + &(&nm * &nm);
    let num = -&(&nm * &q);
    let den = &(&(&rotor * &nm) * &q) + &beta_s2_nm2.scaled(params.alpha_g);
    Ok(TransferFunction::new(num, den)?)
}

/// Inverter power injection per unit load step for the matched design:
/// the required-power map composed with the target response, with the
/// stable pole-zero cancellation applied. Third order in the denominator
/// for rho > 0.
pub fn ibr_power_from_load(
    params: &SystemParams,
    spec: &ShapingSpec,
) -> Result<TransferFunction, PlantError> {
    spec.check_against(params)?;
    let rho = spec.rho();
    let gain = params.alpha_g * (params.tau - rho);
    // -gain * s / ((tau s + 1)(rho s + 1)) composed with the target.
    let req_num = Polynomial::from_coeffs(&[0.0, -gain]);
    let req_den =
        &Polynomial::from_coeffs(&[1.0, params.tau]) * &Polynomial::from_coeffs(&[1.0, rho]);
    let target = target_at_rho(params, rho);
    let num = &req_num * target.num();
    let den = &req_den * target.den();
    Ok(TransferFunction::new(num, den)?.cancel_common_roots(1e-8))
}

/// One inverter leg of a star interconnection: its line susceptance and its
/// PID gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarBranch {
    pub susceptance: f64,
    pub gains: PidGains,
}

/// Closed loop for several inverters connected to the machine in a star:
///
/// omega = -G_sm / (1 + sum_i G_sm / ((s/b_i) + PID_i)) * p_load,
/// assembled over the common denominator.
pub fn star_closed_loop(
    params: &SystemParams,
    branches: &[StarBranch],
) -> Result<TransferFunction, PlantError> {
    if branches.is_empty() {
        return Err(PlantError::InvalidParameter(
            "star topology needs at least one branch".into(),
        ));
    }
    let nm = params.machine_num();
    let dm = params.machine_den();
    let legs: Vec<Polynomial> = branches
        .iter()
        .map(|br| coupling_quadratic(br.susceptance, &br.gains))
        .collect();
    if legs.iter().any(|nx| nx.is_zero()) {
        return Err(PlantError::AlgebraicDegeneracy);
    }
    let product_all = legs
        .iter()
        .fold(Polynomial::constant(1.0), |acc, nx| &acc * nx);
    let mut sum_partial = Polynomial::zero();
    for i in 0..legs.len() {
        let partial = legs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .fold(Polynomial::constant(1.0), |acc, (_, nx)| &acc * nx);
        sum_partial = &sum_partial + &partial;
    }
    let num = -&(&nm * &product_all);
    let den = &(&dm * &product_all) + &(&(&Polynomial::s() * &nm) * &sum_partial);
    Ok(TransferFunction::new(num, den)?)
}
