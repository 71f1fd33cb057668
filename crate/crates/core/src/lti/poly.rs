use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{LtiError, TRIM_REL_TOL};

/// Real-coefficient polynomial in the Laplace variable `s`, stored as
/// coefficients in ascending powers. The zero polynomial is the empty
/// coefficient list; its degree is `None`.
///
/// Construction trims leading coefficients whose magnitude is below
/// [`TRIM_REL_TOL`] relative to the largest coefficient, so the leading
/// coefficient of a nonzero polynomial is always meaningfully nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from ascending-power coefficients, trimming the top.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    /// `gain * prod_i (s - r_i)`, realified. Complex roots are expected to
    /// appear in (approximately) conjugate pairs; any residual imaginary
    /// parts of the expanded coefficients are discarded.
    pub fn from_roots(gain: f64, roots: &[Complex64]) -> Self {
        let mut acc: Vec<Complex64> = vec![Complex64::new(gain, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, a) in acc.iter().enumerate() {
                next[k] -= a * r;
                next[k + 1] += a;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect())
    }

    fn trim(&mut self) {
        let max_mag = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max_mag == 0.0 || !max_mag.is_finite() {
            if max_mag == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        while let Some(&last) = self.coeffs.last() {
            if last.abs() < TRIM_REL_TOL * max_mag {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Leading coefficient; 0.0 for the zero polynomial.
    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scaled(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// All complex roots via the companion-matrix eigenvalue method.
    pub fn roots(&self) -> Result<Vec<Complex64>, LtiError> {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return Err(LtiError::DegreeZero),
        };
        let lead = self.coeffs[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        Ok(companion.complex_eigenvalues().as_slice().to_vec())
    }

    /// Routh-Hurwitz test: `true` iff every root has strictly negative real
    /// part. Zero first-column pivots are handled with the epsilon
    /// substitution; an all-zero row (imaginary-axis root pairs) is reported
    /// as not Hurwitz, since marginal stability is not strict stability.
    pub fn is_hurwitz(&self) -> Result<bool, LtiError> {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return Err(LtiError::DegreeZero),
        };
        // Normalize so the leading coefficient is +1.
        let lead = self.coeffs[n];
        let desc: Vec<f64> = self.coeffs.iter().rev().map(|c| c / lead).collect();
        // Necessary condition: all coefficients strictly positive.
        if desc.iter().any(|&c| c <= 0.0) {
            return Ok(false);
        }
        let width = n / 2 + 1;
        let row_at = |offset: usize| -> Vec<f64> {
            (0..width)
                .map(|j| desc.get(offset + 2 * j).copied().unwrap_or(0.0))
                .collect()
        };
        let mut prev2 = row_at(0);
        let mut prev = row_at(1);
        for _ in 2..=n {
            let row_max = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if row_max <= 1e-250 {
                // Persistent zero row: roots symmetric about the origin.
                return Ok(false);
            }
            if prev[0].abs() <= 1e-14 * row_max {
                prev[0] = 1e-150 * row_max;
            }
            let pivot = prev[0];
            let mut next = vec![0.0; width];
            for j in 0..width - 1 {
                next[j] = (pivot * prev2[j + 1] - prev2[0] * prev[j + 1]) / pivot;
            }
            if next.iter().any(|v| v.is_nan()) {
                return Ok(false);
            }
            if next[0] <= 0.0 {
                return Ok(false);
            }
            prev2 = prev;
            prev = next;
        }
        Ok(true)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}*s", c.abs())?,
                _ => write!(f, "{}*s^{}", c.abs(), k)?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scaled(-1.0)
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
