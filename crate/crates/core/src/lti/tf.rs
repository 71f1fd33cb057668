use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use super::{LtiError, Polynomial};

/// Feedback interconnection sign: the closed loop is
/// `forward / (1 - sign * forward * loop)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackSign {
    Positive,
    Negative,
}

impl FeedbackSign {
    fn value(self) -> f64 {
        match self {
            FeedbackSign::Positive => 1.0,
            FeedbackSign::Negative => -1.0,
        }
    }
}

/// Logarithmic frequency grid (rad/s) used by the numeric positive-real and
/// H-infinity certificates. The grid is part of the documented contract of
/// those tests: they certify behavior on the grid, not symbolically.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Self {
        assert!(lo > 0.0 && hi > lo && n >= 2);
        let ratio = (hi / lo).ln();
        let omegas = (0..n)
            .map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp())
            .collect();
        FrequencyGrid { omegas }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
}

impl Default for FrequencyGrid {
    /// 400 points, logarithmic over [1e-4, 1e4] rad/s.
    fn default() -> Self {
        Self::log_spaced(1e-4, 1e4, 400)
    }
}

/// Rational transfer function `num(s) / den(s)` in canonical form: the
/// denominator is monic and both polynomials are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::AlgebraicDegeneracy);
        }
        let lead = den.leading();
        Ok(TransferFunction {
            num: num.scaled(1.0 / lead),
            den: den.scaled(1.0 / lead),
        })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, LtiError> {
        Self::new(Polynomial::from_coeffs(num), Polynomial::from_coeffs(den))
    }

    /// The zero transfer function 0/1.
    pub fn zero() -> Self {
        TransferFunction {
            num: Polynomial::zero(),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_proper(&self) -> bool {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => true,
            (Some(n), Some(d)) => n <= d,
            (Some(_), None) => unreachable!("denominator is never zero"),
        }
    }

    pub fn is_strictly_proper(&self) -> bool {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => true,
            (Some(n), Some(d)) => n < d,
            (Some(_), None) => unreachable!("denominator is never zero"),
        }
    }

    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn evaluate_at_omega(&self, omega: f64) -> Complex64 {
        self.evaluate(Complex64::new(0.0, omega))
    }

    /// Gain at s = 0; infinite for a pole at the origin.
    pub fn dc_gain(&self) -> f64 {
        self.num.coeff(0) / self.den.coeff(0)
    }

    pub fn scaled(&self, k: f64) -> TransferFunction {
        TransferFunction {
            num: self.num.scaled(k),
            den: self.den.clone(),
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        match self.den.degree() {
            Some(d) if d >= 1 => self.den.roots().expect("degree checked"),
            _ => Vec::new(),
        }
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        match self.num.degree() {
            Some(d) if d >= 1 => self.num.roots().expect("degree checked"),
            _ => Vec::new(),
        }
    }

    /// Strict stability of the denominator (constant denominators count as
    /// stable).
    pub fn is_stable(&self) -> bool {
        match self.den.degree() {
            Some(d) if d >= 1 => self.den.is_hurwitz().expect("degree checked"),
            _ => true,
        }
    }

    /// Closed loop `self / (1 - sign * self * loop)`. No pole-zero
    /// cancellation is performed on the result.
    pub fn feedback(
        &self,
        loop_tf: &TransferFunction,
        sign: FeedbackSign,
    ) -> Result<TransferFunction, LtiError> {
        let num = &self.num * &loop_tf.den;
        let den = &(&self.den * &loop_tf.den) - &(&self.num * &loop_tf.num).scaled(sign.value());
        TransferFunction::new(num, den)
    }

    /// Remove numerator/denominator root pairs closer than `rel_tol`
    /// (relative to the root magnitude, floored at absolute magnitude 1e-6),
    /// pairing greedily by distance, and rebuild from the surviving roots
    /// and the original gain.
    pub fn cancel_common_roots(&self, rel_tol: f64) -> TransferFunction {
        assert!(rel_tol > 0.0);
        let num_deg = self.num.degree().unwrap_or(0);
        let den_deg = self.den.degree().unwrap_or(0);
        if self.num.is_zero() || num_deg == 0 || den_deg == 0 {
            return self.clone();
        }
        let zn = self.num.roots().expect("degree checked");
        let zd = self.den.roots().expect("degree checked");

        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(zn.len() * zd.len());
        for (i, a) in zn.iter().enumerate() {
            for (j, b) in zd.iter().enumerate() {
                pairs.push((i, j, (a - b).norm()));
            }
        }
        pairs.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap());

        let mut num_used = vec![false; zn.len()];
        let mut den_used = vec![false; zd.len()];
        for (i, j, dist) in pairs {
            if num_used[i] || den_used[j] {
                continue;
            }
            let scale = zn[i].norm().max(zd[j].norm()).max(1e-6);
            if dist <= rel_tol * scale {
                num_used[i] = true;
                den_used[j] = true;
            }
        }
        if !num_used.iter().any(|&u| u) {
            return self.clone();
        }

        let kept_n: Vec<Complex64> = zn
            .iter()
            .zip(&num_used)
            .filter(|(_, &u)| !u)
            .map(|(r, _)| *r)
            .collect();
        let kept_d: Vec<Complex64> = zd
            .iter()
            .zip(&den_used)
            .filter(|(_, &u)| !u)
            .map(|(r, _)| *r)
            .collect();
        let num = Polynomial::from_roots(self.num.leading(), &kept_n);
        let den = Polynomial::from_roots(self.den.leading(), &kept_d);
        TransferFunction::new(num, den).expect("kept denominator is nonzero")
    }

    /// Numeric positive-real certificate: (a) the denominator is Hurwitz or
    /// every imaginary-axis pole is simple with nonnegative residue, and
    /// (b) Re[G(jw)] >= -1e-10 at every grid point.
    pub fn is_positive_real(&self, grid: &FrequencyGrid) -> bool {
        if !self.is_proper() {
            return false;
        }
        if !self.pole_condition_positive_real() {
            return false;
        }
        for &omega in grid.omegas() {
            let s = Complex64::new(0.0, omega);
            let d = self.den.eval(s);
            if d.norm() < 1e-300 {
                continue; // exactly on a pole; the residue condition governs
            }
            if (self.num.eval(s) / d).re < -1e-10 {
                return false;
            }
        }
        true
    }

    fn pole_condition_positive_real(&self) -> bool {
        let poles = self.poles();
        if poles.is_empty() {
            return true;
        }
        let re_tol = |p: &Complex64| 1e-9 * p.norm().max(1.0);
        if poles.iter().any(|p| p.re > re_tol(p)) {
            return false;
        }
        let axis: Vec<Complex64> = poles
            .iter()
            .filter(|p| p.re.abs() <= re_tol(p))
            .copied()
            .collect();
        let dden = self.den.derivative();
        for (k, p) in axis.iter().enumerate() {
            // Simplicity: no other imaginary-axis pole within tolerance.
            for (m, q) in axis.iter().enumerate() {
                if m != k && (p - q).norm() <= 1e-7 * p.norm().max(1.0) {
                    return false;
                }
            }
            let res = self.num.eval(*p) / dden.eval(*p);
            if res.re < -1e-10 || res.im.abs() > 1e-7 * (1.0 + res.norm()) {
                return false;
            }
        }
        true
    }

    /// Peak magnitude over frequency: the grid supremum, the limits at
    /// omega = 0 and omega -> infinity, and a golden-section refinement
    /// around the grid argmax.
    pub fn hinf_norm(&self, grid: &FrequencyGrid) -> Result<f64, LtiError> {
        if !self.is_proper() {
            return Err(LtiError::ImproperSystem);
        }
        if !self.is_stable() {
            return Err(LtiError::UnstableSystem);
        }
        let mag = |omega: f64| self.evaluate_at_omega(omega).norm();

        let omegas = grid.omegas();
        let mut best = 0.0f64;
        let mut best_idx = 0usize;
        for (k, &w) in omegas.iter().enumerate() {
            let v = mag(w);
            if v > best {
                best = v;
                best_idx = k;
            }
        }

        let dc = self.dc_gain().abs();
        let inf_limit = if self.num.degree() == self.den.degree() {
            (self.num.leading() / self.den.leading()).abs()
        } else {
            0.0
        };

        // Refine around the argmax in log frequency.
        let n = omegas.len();
        let (lo, hi) = if n >= 2 {
            let step = (omegas[1] / omegas[0]).ln();
            let u = omegas[best_idx].ln();
            (u - step, u + step)
        } else {
            (omegas[best_idx].ln() - 1.0, omegas[best_idx].ln() + 1.0)
        };
        let refined = golden_section_max(|u| mag(u.exp()), lo, hi, 120);

        Ok(best.max(dc).max(inf_limit).max(refined))
    }

    /// Largest relative coefficient discrepancy between two canonical-form
    /// transfer functions (numerator and denominator compared separately,
    /// each scaled by its own largest coefficient magnitude).
    pub fn max_rel_coeff_distance(&self, other: &TransferFunction) -> f64 {
        fn poly_dist(a: &Polynomial, b: &Polynomial) -> f64 {
            let len = a.coeffs().len().max(b.coeffs().len());
            let scale = a
                .coeffs()
                .iter()
                .chain(b.coeffs())
                .fold(0.0f64, |m, c| m.max(c.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            (0..len)
                .map(|k| (a.coeff(k) - b.coeff(k)).abs() / scale)
                .fold(0.0, f64::max)
        }
        poly_dist(&self.num, &other.num).max(poly_dist(&self.den, &other.den))
    }
}

impl Mul for &TransferFunction {
    type Output = TransferFunction;
    fn mul(self, rhs: &TransferFunction) -> TransferFunction {
        TransferFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product denominator is nonzero")
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(num: &[f64], den: &[f64]) -> TransferFunction {
        TransferFunction::from_coeffs(num, den).unwrap()
    }

    #[test]
    fn canonical_form_is_monic() {
        let g = tf(&[2.0], &[4.0, 2.0]); // 2/(2s+4) -> 1/(s+2)
        assert_eq!(g.den().coeffs(), &[2.0, 1.0]);
        assert_eq!(g.num().coeffs(), &[1.0]);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            TransferFunction::from_coeffs(&[1.0], &[0.0]),
            Err(LtiError::AlgebraicDegeneracy)
        );
    }

    #[test]
    fn unity_negative_feedback() {
        let g = tf(&[1.0], &[1.0, 1.0]);
        let unity = tf(&[1.0], &[1.0]);
        let cl = g.feedback(&unity, FeedbackSign::Negative).unwrap();
        assert!(cl.max_rel_coeff_distance(&tf(&[1.0], &[2.0, 1.0])) < 1e-15);
    }

    #[test]
    fn open_loop_feedback_is_identity() {
        let g = tf(&[1.0, 2.0], &[3.0, 4.0, 1.0]);
        let cl = g
            .feedback(&TransferFunction::zero(), FeedbackSign::Negative)
            .unwrap();
        assert!(cl.max_rel_coeff_distance(&g) < 1e-15);
    }

    #[test]
    fn exact_common_factor_cancels() {
        // (s+1)(s+2) / ((s+1)(s+3)) -> (s+2)/(s+3)
        let g = tf(&[2.0, 3.0, 1.0], &[3.0, 4.0, 1.0]);
        let c = g.cancel_common_roots(1e-8);
        assert!(c.max_rel_coeff_distance(&tf(&[2.0, 1.0], &[3.0, 1.0])) < 1e-12);
    }

    #[test]
    fn distant_roots_survive_cancellation() {
        let g = tf(&[1.0, 1.0], &[1.0001, 1.0]);
        let c = g.cancel_common_roots(1e-8);
        assert!(c.max_rel_coeff_distance(&g) < 1e-12);
    }

    #[test]
    fn cancellation_preserves_frequency_response() {
        // ((s+2)(s+0.5)) / ((s+2)(s^2+3s+5)) with an exact common factor.
        let common = Polynomial::from_coeffs(&[2.0, 1.0]);
        let num = &common * &Polynomial::from_coeffs(&[0.5, 1.0]);
        let den = &common * &Polynomial::from_coeffs(&[5.0, 3.0, 1.0]);
        let g = TransferFunction::new(num, den).unwrap();
        let c = g.cancel_common_roots(1e-8);
        assert_eq!(c.den().degree(), Some(2));
        for k in 0..100 {
            let w = 1e-2 * (1e4f64).powf(k as f64 / 99.0);
            let a = g.evaluate_at_omega(w);
            let b = c.evaluate_at_omega(w);
            assert!((a - b).norm() <= 1e-6 * a.norm().max(1e-12));
        }
    }

    #[test]
    fn positive_real_examples() {
        let grid = FrequencyGrid::default();
        assert!(tf(&[1.0], &[1.0, 1.0]).is_positive_real(&grid));
        assert!(!tf(&[-1.0, 1.0], &[1.0, 1.0]).is_positive_real(&grid));
        // alpha_g/(rho s + 1) with alpha_g = 20, rho = 0.5
        assert!(tf(&[20.0], &[1.0, 0.5]).is_positive_real(&grid));
        // Integrator k/s: simple imaginary-axis pole, positive residue.
        assert!(tf(&[3.0], &[0.0, 1.0]).is_positive_real(&grid));
        // -k/s: negative residue.
        assert!(!tf(&[-3.0], &[0.0, 1.0]).is_positive_real(&grid));
        // Double pole at the origin.
        assert!(!tf(&[1.0], &[0.0, 0.0, 1.0]).is_positive_real(&grid));
    }

    #[test]
    fn hinf_norm_examples() {
        let grid = FrequencyGrid::default();
        let lp = tf(&[1.0], &[1.0, 1.0]);
        assert!((lp.hinf_norm(&grid).unwrap() - 1.0).abs() < 1e-10);
        let hp = tf(&[0.0, 1.0], &[1.0, 1.0]);
        assert!((hp.hinf_norm(&grid).unwrap() - 1.0).abs() < 1e-10);
        // Resonant peak with known value: 1/(s^2 + 2*zeta*s + 1), peak
        // 1/(2 zeta sqrt(1-zeta^2)) at omega = sqrt(1-2 zeta^2).
        let zeta = 0.1f64;
        let g = tf(&[1.0], &[1.0, 2.0 * zeta, 1.0]);
        let expected = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        let got = g.hinf_norm(&grid).unwrap();
        assert!((got - expected).abs() <= 1e-8 * expected);
        assert_eq!(
            tf(&[1.0], &[-1.0, 1.0]).hinf_norm(&grid),
            Err(LtiError::UnstableSystem)
        );
    }

    #[test]
    fn hinf_norm_scales_linearly() {
        let grid = FrequencyGrid::default();
        let g = tf(&[2.0, 0.5], &[1.0, 0.4, 1.0]);
        let base = g.hinf_norm(&grid).unwrap();
        for k in [-3.5, -1.0, 0.25, 7.0] {
            let scaled = g.scaled(k).hinf_norm(&grid).unwrap();
            assert!((scaled - k.abs() * base).abs() <= 1e-12 * base.max(1.0));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn proper_tf() -> impl Strategy<Value = TransferFunction> {
            (1..=4usize)
                .prop_flat_map(|n| {
                    (
                        prop::collection::vec(-3.0..3.0f64, 1..=n + 1),
                        prop::collection::vec(-3.0..3.0f64, n),
                    )
                })
                .prop_filter_map("nonzero trimmed parts", |(num, mut den)| {
                    den.push(1.0);
                    let g =
                        TransferFunction::new(Polynomial::new(num), Polynomial::new(den)).ok()?;
                    (!g.num().is_zero() && g.is_proper()).then_some(g)
                })
        }

        proptest! {
            #[test]
            fn open_loop_feedback_is_identity(g in proper_tf()) {
                let cl = g
                    .feedback(&TransferFunction::zero(), FeedbackSign::Negative)
                    .unwrap();
                prop_assert!(cl.max_rel_coeff_distance(&g) < 1e-12);
            }

            #[test]
            fn feedback_matches_pointwise_formula(g in proper_tf(), k in 0.1..3.0f64) {
                let loop_tf = tf(&[k], &[1.0]);
                let cl = g.feedback(&loop_tf, FeedbackSign::Negative).unwrap();
                for omega in [0.1, 1.0, 10.0] {
                    let gv = g.evaluate_at_omega(omega);
                    let expected = gv / (1.0 + gv * k);
                    let got = cl.evaluate_at_omega(omega);
                    prop_assert!(
                        (got - expected).norm() <= 1e-6 * (1.0 + expected.norm())
                    );
                }
            }
        }
    }
}
