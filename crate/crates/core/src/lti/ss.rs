use nalgebra::{DMatrix, DVector, RowDVector};

use super::{LtiError, Polynomial, TransferFunction};

/// Single-input single-output state-space realization
/// `x' = Ax + Bu, y = Cx + Du`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: RowDVector<f64>,
    d: f64,
}

/// Uniformly sampled scalar trajectory starting at t = 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t: Vec<f64>,
    y: Vec<f64>,
}

impl Trajectory {
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.t.len() >= 2 {
            self.t[1] - self.t[0]
        } else {
            0.0
        }
    }
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &RowDVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Recover the transfer function via the Faddeev-LeVerrier recursion:
    /// den(s) = det(sI - A), num(s) = C adj(sI - A) B + D den(s).
    pub fn to_transfer_function(&self) -> TransferFunction {
        let n = self.order();
        if n == 0 {
            return TransferFunction::from_coeffs(&[self.d], &[1.0]).expect("constant den");
        }
        // den coefficients, descending: s^n + a1 s^(n-1) + ... + an
        let mut den_desc = vec![1.0];
        // strict numerator coefficients e_k for s^(n-k)
        let mut num_desc = Vec::with_capacity(n);
        let mut m = DMatrix::<f64>::identity(n, n);
        for k in 1..=n {
            num_desc.push((&self.c * &m * &self.b)[(0, 0)]);
            let am = &self.a * &m;
            let ak = -am.trace() / k as f64;
            den_desc.push(ak);
            m = am + DMatrix::<f64>::identity(n, n) * ak;
        }
        let den: Vec<f64> = den_desc.iter().rev().copied().collect();
        let mut num = vec![0.0; n + 1];
        for (k, &e) in num_desc.iter().enumerate() {
            num[n - 1 - k] += e;
        }
        for (k, &a) in den.iter().enumerate() {
            num[k] += self.d * a;
        }
        TransferFunction::new(Polynomial::new(num), Polynomial::new(den))
            .expect("characteristic polynomial is monic")
    }

    /// Step response under exact zero-order-hold discretization: the
    /// discrete propagators come from the matrix exponential of the
    /// augmented [A B; 0 0] block, so the samples are exact for the
    /// constant input.
    pub fn step_response(&self, magnitude: f64, dt: f64, horizon: f64) -> Trajectory {
        assert!(
            dt > 0.0 && horizon >= dt,
            "dt > 0 and horizon >= dt required"
        );
        let steps = (horizon / dt).ceil() as usize;
        let n = self.order();
        let mut t = Vec::with_capacity(steps + 1);
        let mut y = Vec::with_capacity(steps + 1);
        if n == 0 {
            for k in 0..=steps {
                t.push(k as f64 * dt);
                y.push(self.d * magnitude);
            }
            return Trajectory { t, y };
        }
        let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.a * dt));
        aug.view_mut((0, n), (n, 1)).copy_from(&(&self.b * dt));
        let e = aug.exp();
        let ad = e.view((0, 0), (n, n)).into_owned();
        let bd = e.view((0, n), (n, 1)).into_owned();
        let mut x = DVector::<f64>::zeros(n);
        for k in 0..=steps {
            t.push(k as f64 * dt);
            y.push((&self.c * &x)[(0, 0)] + self.d * magnitude);
            x = &ad * x + &bd * magnitude;
        }
        Trajectory { t, y }
    }
}

impl TransferFunction {
    /// Controllable canonical realization. Errors for improper systems.
    pub fn to_state_space(&self) -> Result<StateSpace, LtiError> {
        if !self.is_proper() {
            return Err(LtiError::ImproperSystem);
        }
        let n = self.den().degree().expect("denominator nonzero");
        let d = self.num().coeff(n);
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        let mut c = RowDVector::<f64>::zeros(n);
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -self.den().coeff(j);
                c[j] = self.num().coeff(j) - d * self.den().coeff(j);
            }
            b[n - 1] = 1.0;
        }
        Ok(StateSpace { a, b, c, d })
    }

    /// Simulate the step response (see [`StateSpace::step_response`]).
    pub fn step_response(
        &self,
        magnitude: f64,
        dt: f64,
        horizon: f64,
    ) -> Result<Trajectory, LtiError> {
        Ok(self.to_state_space()?.step_response(magnitude, dt, horizon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_order_step_is_analytic() {
        let g = TransferFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
        let traj = g.step_response(1.0, 0.01, 10.0).unwrap();
        let expected = 1.0 - (-10.0f64).exp();
        assert!((traj.y().last().unwrap() - expected).abs() < 1e-12);
        // ZOH samples are exact for all times, not just the last.
        let mid = traj.y()[500];
        assert!((mid - (1.0 - (-5.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn feedthrough_appears_at_t0() {
        let g = TransferFunction::from_coeffs(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let traj = g.step_response(1.0, 0.01, 1.0).unwrap();
        assert!((traj.y()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn improper_systems_are_rejected() {
        let g = TransferFunction::from_coeffs(&[1.0, 0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(g.to_state_space(), Err(LtiError::ImproperSystem)));
    }

    #[test]
    fn constant_gain_realizes_as_order_zero() {
        let g = TransferFunction::from_coeffs(&[2.5], &[1.0]).unwrap();
        let ss = g.to_state_space().unwrap();
        assert_eq!(ss.order(), 0);
        let traj = ss.step_response(2.0, 0.1, 1.0);
        assert!(traj.y().iter().all(|&v| (v - 5.0).abs() < 1e-15));
        assert!(ss.to_transfer_function().max_rel_coeff_distance(&g).abs() < 1e-15);
    }

    #[test]
    fn realization_round_trip_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let n = rng.random_range(1..=5usize);
            let mut den = vec![0.0; n + 1];
            den[n] = 1.0;
            for c in den.iter_mut().take(n) {
                *c = rng.random_range(-2.0..2.0);
            }
            let m = rng.random_range(0..=n);
            let num: Vec<f64> = (0..=m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = TransferFunction::from_coeffs(&num, &den).unwrap();
            let back = g.to_state_space().unwrap().to_transfer_function();
            let dist = g.max_rel_coeff_distance(&back);
            assert!(dist < 1e-9, "round trip distance {dist} for {g}");
        }
    }

    #[test]
    fn terminal_value_matches_dc_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..50 {
            let n = rng.random_range(1..=4usize);
            // Build a stable denominator from random left-half-plane roots.
            let mut poles = Vec::new();
            let mut k = 0;
            while k < n {
                if n - k >= 2 && rng.random_bool(0.5) {
                    let re = -rng.random_range(0.1..3.0);
                    let im = rng.random_range(0.1..3.0);
                    poles.push(num_complex::Complex64::new(re, im));
                    poles.push(num_complex::Complex64::new(re, -im));
                    k += 2;
                } else {
                    poles.push(num_complex::Complex64::new(
                        -rng.random_range(0.1..3.0),
                        0.0,
                    ));
                    k += 1;
                }
            }
            let den = Polynomial::from_roots(1.0, &poles);
            let m = rng.random_range(0..n.max(1));
            let num: Vec<f64> = (0..=m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = TransferFunction::new(Polynomial::new(num), den).unwrap();
            let slowest = poles
                .iter()
                .map(|p| p.re.abs())
                .fold(f64::INFINITY, f64::min);
            let fastest = poles.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
            let dt = 1.0 / (50.0 * fastest);
            let horizon = 25.0 / slowest;
            let traj = g.step_response(1.0, dt, horizon).unwrap();
            let terminal = *traj.y().last().unwrap();
            assert!(
                (terminal - g.dc_gain()).abs() < 1e-6,
                "terminal {terminal} vs dc {}",
                g.dc_gain()
            );
        }
    }
}
