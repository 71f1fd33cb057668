//! PID shaping-gain synthesis, admissible-set membership, and closed-loop
//! stability certificates.
//!
//! The certificate combines the sufficient passivity-based conditions
//! (susceptance overestimate, or underestimate inside the admissible
//! mismatch set) with an independent numeric pole check; the theorem-based
//! verdicts take precedence when they apply.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::lti::{FrequencyGrid, Polynomial, TransferFunction};
use crate::plant::{self, PlantError, ShapingSpec, SystemParams};

/// Poles with real part at or above this margin count as unstable;
/// marginal closed loops are never certified stable.
pub const POLE_MARGIN: f64 = 1e-9;

/// Pairing tolerance used when reducing the assembled closed loop before
/// the pole check. The matched design hides a double mode at -1/tau, and
/// eigenvalue splitting of a double root is of order sqrt(machine eps), so
/// the pairing tolerance must sit well above 1e-8.
pub const CANCEL_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Plant(#[from] PlantError),
}

/// Shaping controller gains. `kp` and `ki` are positive for every
/// admissible design; `kd` may be negative (non-minimum-phase regime).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Shaping gains from the matching condition:
/// k_d = tau*rho/(alpha_g (tau - rho)) - 1/b_hat,
/// k_p = (tau + rho)/(alpha_g (tau - rho)),
/// k_i = 1/(alpha_g (tau - rho)).
///
/// Only the susceptance estimate `b_hat` enters; the true `b` is never
/// read.
pub fn synthesize(params: &SystemParams, spec: &ShapingSpec) -> Result<PidGains, SynthesisError> {
    spec.check_against(params)?;
    let rho = spec.rho();
    let denom = params.alpha_g * (params.tau - rho);
    Ok(PidGains {
        kp: (params.tau + rho) / denom,
        ki: 1.0 / denom,
        kd: params.tau * rho / denom - 1.0 / params.b_hat,
    })
}

/// Effective derivative coefficient of the inverse power path once the
/// true susceptance is accounted for:
/// xi = tau*rho/(alpha_g (tau - rho)) + (1/b - 1/b_hat).
pub fn xi_coefficient(params: &SystemParams, rho: f64) -> f64 {
    params.tau * rho / (params.alpha_g * (params.tau - rho)) + 1.0 / params.b - 1.0 / params.b_hat
}

/// Admissible effective time constants: 0 <= rho < tau.
pub fn in_set_u(params: &SystemParams, rho: f64) -> bool {
    (0.0..params.tau).contains(&rho)
}

/// Nonnegative-derivative-gain designs:
/// alpha_g tau / (b_hat tau + alpha_g) <= rho < tau.
pub fn in_set_n(params: &SystemParams, rho: f64) -> bool {
    let lower = params.alpha_g * params.tau / (params.b_hat * params.tau + params.alpha_g);
    lower <= rho && rho < params.tau
}

/// Stable-underestimate region:
/// b_hat < b and tau alpha_g (b - b_hat) / (tau b_hat b + alpha_g (b - b_hat))
/// <= rho < tau.
pub fn in_set_m(params: &SystemParams, rho: f64) -> bool {
    if params.b_hat >= params.b {
        return false;
    }
    let gap = params.b - params.b_hat;
    let lower = params.tau * params.alpha_g * gap
        / (params.tau * params.b_hat * params.b + params.alpha_g * gap);
    lower <= rho && rho < params.tau
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetMembership {
    pub in_u: bool,
    pub in_n: bool,
    pub in_m: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// Certified by the overestimate condition b_hat >= b.
    StableByConditionI,
    /// Certified by membership of (rho, b_hat) in the admissible mismatch
    /// set.
    StableByConditionII,
    /// Neither sufficient condition applies, but every pole is strictly in
    /// the left half-plane.
    StableNumerically,
    Unstable,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        !matches!(self, StabilityVerdict::Unstable)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityVerdict::StableByConditionI => "StableByConditionI",
            StabilityVerdict::StableByConditionII => "StableByConditionII",
            StabilityVerdict::StableNumerically => "StableNumerically",
            StabilityVerdict::Unstable => "Unstable",
        }
    }
}

impl fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stability certificate for one (params, rho) design point.
#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub verdict: StabilityVerdict,
    /// Closed-loop poles after reduction of the assembled loop.
    pub poles: Vec<Complex64>,
    pub sets: SetMembership,
    pub xi: f64,
    pub gains: PidGains,
    /// Zeros of the negated control law lie in the open left half-plane
    /// (degree-dropped boundary kd = 0 counts as minimum phase).
    pub min_phase: bool,
    /// The effective turbine branch (governor path plus inverter power
    /// path) passes the numeric positive-real certificate.
    pub branch_positive_real: bool,
    /// Set when the interconnection degenerated algebraically; the verdict
    /// is then Unstable with no pole list.
    pub note: Option<String>,
}

impl StabilityCertificate {
    pub fn max_pole_re(&self) -> f64 {
        self.poles
            .iter()
            .map(|p| p.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Line-oriented human-readable report.
    pub fn report(&self, params: &SystemParams, rho: f64) -> String {
        let mut out = String::new();
        out.push_str(&format!("verdict = {}\n", self.verdict));
        out.push_str(&format!("rho = {rho}\n"));
        out.push_str(&format!("b = {}\n", params.b));
        out.push_str(&format!("b_hat = {}\n", params.b_hat));
        out.push_str(&format!("xi = {}\n", self.xi));
        out.push_str(&format!(
            "gains = kp={} ki={} kd={}\n",
            self.gains.kp, self.gains.ki, self.gains.kd
        ));
        out.push_str(&format!(
            "sets = in_U={} in_N={} in_M={}\n",
            self.sets.in_u, self.sets.in_n, self.sets.in_m
        ));
        out.push_str(&format!("min_phase = {}\n", self.min_phase));
        out.push_str(&format!(
            "branch_positive_real = {}\n",
            self.branch_positive_real
        ));
        let poles = self
            .poles
            .iter()
            .map(|p| {
                format!(
                    "{}{}{}j",
                    p.re,
                    if p.im < 0.0 { "-" } else { "+" },
                    p.im.abs()
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!("poles = {poles}\n"));
        if let Some(note) = &self.note {
            out.push_str(&format!("note = {note}\n"));
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "rho,b,b_hat,xi,kp,ki,kd,in_u,in_n,in_m,min_phase,branch_positive_real,max_pole_re,verdict"
    }

    pub fn csv_row(&self, params: &SystemParams, rho: f64) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rho,
            params.b,
            params.b_hat,
            self.xi,
            self.gains.kp,
            self.gains.ki,
            self.gains.kd,
            self.sets.in_u,
            self.sets.in_n,
            self.sets.in_m,
            self.min_phase,
            self.branch_positive_real,
            self.max_pole_re(),
            self.verdict
        )
    }
}

/// Evaluate the full certificate: synthesize gains from b_hat, assemble the
/// closed loop with the true b, reduce it, compute its poles, and combine
/// the sufficient conditions with the numeric pole check. Verdict
/// precedence among stable outcomes: overestimate condition, then mismatch
/// set, then numeric-only.
pub fn certify(
    params: &SystemParams,
    spec: &ShapingSpec,
) -> Result<StabilityCertificate, SynthesisError> {
    let rho = spec.rho();
    let gains = synthesize(params, spec)?;
    let xi = xi_coefficient(params, rho);
    let sets = SetMembership {
        in_u: in_set_u(params, rho),
        in_n: in_set_n(params, rho),
        in_m: in_set_m(params, rho),
    };

    // The reported pole list comes from the reduced loop (hidden modes at
    // -1/tau stripped), but the stability verdict is taken over the raw
    // denominator: an unstable mode that happens to be cancelled is still
    // an internal instability.
    let (poles, raw_poles, mut note) = match plant::closed_loop(params, &gains) {
        Ok(cl) => {
            let raw = cl.poles();
            (cl.cancel_common_roots(CANCEL_REL_TOL).poles(), raw, None)
        }
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
    };
    let numerically_stable =
        note.is_none() && !raw_poles.is_empty() && raw_poles.iter().all(|p| p.re < -POLE_MARGIN);
    if !numerically_stable && poles.iter().all(|p| p.re < -POLE_MARGIN) && note.is_none() {
        note = Some("instability sits in a mode removed by reduction".into());
    }

    let verdict = if !numerically_stable {
        StabilityVerdict::Unstable
    } else if params.b_hat >= params.b {
        StabilityVerdict::StableByConditionI
    } else if sets.in_m {
        StabilityVerdict::StableByConditionII
    } else {
        StabilityVerdict::StableNumerically
    };

    Ok(StabilityCertificate {
        verdict,
        poles,
        sets,
        xi,
        gains,
        min_phase: control_law_min_phase(&gains),
        branch_positive_real: effective_branch_positive_real(params, &gains, xi),
        note,
    })
}

/// Zeros of -(k_d s^2 + k_p s + k_i): minimum phase iff all in the open
/// left half-plane. At kd = 0 the degree drops; a first-order numerator
/// with positive coefficients counts as minimum phase.
fn control_law_min_phase(gains: &PidGains) -> bool {
    let numerator = Polynomial::from_coeffs(&[gains.ki, gains.kp, gains.kd]);
    match numerator.degree() {
        Some(d) if d >= 1 => numerator.is_hurwitz().expect("degree checked"),
        _ => true,
    }
}

/// The effective turbine branch seen by the rotor:
/// alpha_g/(tau s + 1) + s/(xi s^2 + k_p s + k_i). At matched gains this
/// collapses to alpha_g/(rho s + 1); passivity of the branch is what the
/// sufficient stability conditions rest on.
fn effective_branch_positive_real(params: &SystemParams, gains: &PidGains, xi: f64) -> bool {
    let governor_den = Polynomial::from_coeffs(&[1.0, params.tau]);
    let inverse_path = Polynomial::from_coeffs(&[gains.ki, gains.kp, xi]);
    if inverse_path.is_zero() {
        return false;
    }
    let num = &inverse_path.scaled(params.alpha_g) + &(&Polynomial::s() * &governor_den);
    let den = &governor_den * &inverse_path;
    match TransferFunction::new(num, den) {
        Ok(branch) => branch.is_positive_real(&FrequencyGrid::default()),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn params_with(tau: f64, alpha_g: f64, b: f64, b_hat: f64) -> SystemParams {
        SystemParams {
            tau,
            alpha_g,
            b,
            b_hat,
            ..SystemParams::default()
        }
    }

    #[test]
    fn gain_formula_direct_evaluation() {
        let p = params_with(1.0, 1.0, 1.0, 1.0);
        let g = synthesize(&p, &ShapingSpec::new(0.5).unwrap()).unwrap();
        assert!((g.kd - 0.0).abs() < 1e-15);
        assert!((g.kp - 3.0).abs() < 1e-15);
        assert!((g.ki - 2.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_gain_tight_estimate_limit() {
        let p = params_with(2.0, 10.0, 1.0, 1e12);
        let rho = 0.8;
        let g = synthesize(&p, &ShapingSpec::new(rho).unwrap()).unwrap();
        let limit = p.tau * rho / (p.alpha_g * (p.tau - rho));
        assert!((g.kd - limit).abs() <= 1e-11 * limit);
    }

    #[test]
    fn derivative_gain_vanishes_on_n_boundary() {
        let p = params_with(1.5, 12.0, 3.0, 3.0);
        let rho = p.alpha_g * p.tau / (p.b_hat * p.tau + p.alpha_g);
        let g = synthesize(&p, &ShapingSpec::new(rho).unwrap()).unwrap();
        assert!(g.kd.abs() < 1e-14);
        assert!(in_set_n(&p, rho));
        assert!(!in_set_n(&p, rho * (1.0 - 1e-9)));
    }

    #[test]
    fn synthesize_never_reads_true_susceptance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let tau = rng.random_range(0.5..5.0);
            let rho = rng.random_range(0.0..tau * 0.99);
            let base = params_with(tau, rng.random_range(5.0..50.0), 1.0, 2.0);
            let spec = ShapingSpec::new(rho).unwrap();
            let g1 = synthesize(&base, &spec).unwrap();
            let g2 = synthesize(&base.with_b(837.5), &spec).unwrap();
            assert_eq!(g1, g2);
        }
    }

    #[test]
    fn gains_positive_for_admissible_designs() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let tau = rng.random_range(0.5..5.0);
            let p = params_with(
                tau,
                rng.random_range(5.0..50.0),
                rng.random_range(0.01..100.0),
                rng.random_range(0.01..100.0),
            );
            let rho = rng.random_range(0.0..tau * 0.999);
            let g = synthesize(&p, &ShapingSpec::new(rho).unwrap()).unwrap();
            assert!(g.kp > 0.0 && g.ki > 0.0);
        }
    }

    #[test]
    fn sets_are_empty_at_rho_equal_tau() {
        let p = params_with(1.0, 20.0, 1.0, 0.5);
        assert!(!in_set_u(&p, 1.0));
        assert!(!in_set_n(&p, 1.0));
        assert!(!in_set_m(&p, 1.0));
    }

    #[test]
    fn mismatch_set_requires_strict_underestimate() {
        let p = params_with(1.0, 20.0, 1.0, 1.0);
        for rho in [0.1, 0.5, 0.9] {
            assert!(!in_set_m(&p, rho));
        }
    }

    #[test]
    fn n_membership_implies_m_membership_for_underestimates() {
        // kd >= 0 forces xi = kd + 1/b > 0, so every design in the
        // nonnegative-derivative set is also inside the admissible
        // mismatch set whenever b_hat < b.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let tau = rng.random_range(0.5..5.0);
            let b = rng.random_range(0.01..100.0);
            let p = params_with(
                tau,
                rng.random_range(5.0..50.0),
                b,
                b * rng.random_range(0.01..1.0),
            );
            let rho = rng.random_range(0.0..tau);
            if in_set_n(&p, rho) {
                assert!(in_set_m(&p, rho));
                assert!(in_set_u(&p, rho));
            }
        }
    }

    #[test]
    fn m_membership_does_not_imply_n_membership() {
        // Witness: a barely-underestimated susceptance admits designs with
        // kd < 0 (outside N) whose xi is still positive (inside M).
        let p = params_with(1.0, 20.0, 1.0, 0.999);
        let rho = 0.5;
        assert!(in_set_m(&p, rho));
        assert!(!in_set_n(&p, rho));
        let g = synthesize(&p, &ShapingSpec::new(rho).unwrap()).unwrap();
        assert!(g.kd < 0.0);
        assert!(xi_coefficient(&p, rho) > 0.0);
    }

    #[test]
    fn xi_positive_under_either_sufficient_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..1000 {
            let tau = rng.random_range(0.5..5.0);
            let b = rng.random_range(0.01..100.0);
            let b_hat = b * rng.random_range(0.01..10.0);
            let p = params_with(tau, rng.random_range(5.0..50.0), b, b_hat);
            let rho = rng.random_range(1e-6..tau * 0.999);
            if p.b_hat >= p.b || in_set_m(&p, rho) {
                assert!(
                    xi_coefficient(&p, rho) > 0.0,
                    "xi must be positive when a sufficient condition holds"
                );
            }
        }
    }

    #[test]
    fn matched_design_certified_by_condition_one() {
        let p = SystemParams::default();
        let spec = ShapingSpec::new(0.5).unwrap();
        let cert = certify(&p, &spec).unwrap();
        assert_eq!(cert.verdict, StabilityVerdict::StableByConditionI);
        assert!(cert.branch_positive_real);
        // Poles reduce to the target denominator roots.
        let target = plant::target_transfer(&p, &spec).unwrap();
        let mut expected = target.poles();
        let mut got = cert.poles.clone();
        expected.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        got.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_eq!(got.len(), expected.len());
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-6 * b.norm().max(1.0));
        }
    }

    #[test]
    fn severe_underestimate_below_m_is_unstable() {
        // Grid-searched counterexample: small true b, strong underestimate,
        // rho far below the admissible mismatch threshold.
        let mut found = None;
        'outer: for &b in &[0.01, 0.05, 0.1, 1.0] {
            for &ratio in &[0.1, 0.3, 0.5, 0.9] {
                for &rho in &[0.02, 0.05, 0.1, 0.3] {
                    let p = params_with(1.0, 20.0, b, b * ratio);
                    if in_set_m(&p, rho) {
                        continue;
                    }
                    let cert = certify(&p, &ShapingSpec::new(rho).unwrap()).unwrap();
                    if cert.verdict == StabilityVerdict::Unstable {
                        found = Some((p, rho, cert));
                        break 'outer;
                    }
                }
            }
        }
        let (_, _, cert) = found.expect("an unstable underestimate design must exist");
        assert!(cert.max_pole_re() >= -POLE_MARGIN);
    }

    #[test]
    fn min_phase_tracks_derivative_gain_sign() {
        let p = params_with(1.0, 20.0, 1.0, 1.0);
        for rho in [0.05, 0.2, 0.5, 0.8, 0.95] {
            let spec = ShapingSpec::new(rho).unwrap();
            let cert = certify(&p, &spec).unwrap();
            let g = cert.gains;
            assert_eq!(cert.min_phase, g.kd >= 0.0, "rho = {rho}");
            assert_eq!(cert.min_phase, in_set_n(&p, rho), "rho = {rho}");
        }
    }

    #[test]
    fn report_contains_verdict_line() {
        let p = SystemParams::default();
        let cert = certify(&p, &ShapingSpec::new(0.5).unwrap()).unwrap();
        let report = cert.report(&p, 0.5);
        assert!(report.contains("verdict = StableByConditionI"));
        assert!(report.contains("xi ="));
        let row = cert.csv_row(&p, 0.5);
        assert_eq!(
            row.split(',').count(),
            StabilityCertificate::csv_header().split(',').count()
        );
    }
}
