//! Continuous-time LTI machinery: polynomial and rational-function algebra,
//! state-space realization, step simulation, and frequency-domain tests
//! (Routh-Hurwitz stability, positive realness, H-infinity norm).
//!
//! Everything here is a pure function over immutable values; there is no
//! shared state and no interior mutability.

mod poly;
mod ss;
mod tf;

pub use poly::Polynomial;
pub use ss::{StateSpace, Trajectory};
pub use tf::{FeedbackSign, FrequencyGrid, TransferFunction};

use thiserror::Error;

/// Relative coefficient trim tolerance. Leading coefficients whose magnitude
/// falls below this fraction of the largest coefficient are dropped, so that
/// algebraic limits (e.g. a time constant going to zero) collapse the degree
/// cleanly instead of leaving a near-zero leading term.
pub const TRIM_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtiError {
    /// An interconnection or constructor produced an identically-zero
    /// denominator.
    #[error("algebraic degeneracy: denominator vanished")]
    AlgebraicDegeneracy,
    /// Root finding requested on a constant polynomial.
    #[error("cannot compute roots of a degree-zero polynomial")]
    DegreeZero,
    /// Realization or simulation requested for an improper transfer function.
    #[error("improper system: numerator degree exceeds denominator degree")]
    ImproperSystem,
    /// An operation that requires a Hurwitz denominator was handed an
    /// unstable (or marginal) system.
    #[error("unstable system: denominator is not Hurwitz")]
    UnstableSystem,
}
