//! Frequency-shaping control design for a grid-forming inverter weakly
//! coupled to an aggregate synchronous machine.
//!
//! The crate builds the transfer-function models of the machine/inverter
//! interconnection ([`plant`]), synthesizes the PID shaping controller and
//! certifies closed-loop stability ([`synthesis`]), and provides the
//! nadir/peak-power trade-off, susceptance-mismatch robustness, and
//! sensitivity analyses ([`analysis`]) on top of a small general-purpose
//! LTI toolbox ([`lti`]). The `freqshape` binary exposes the pipelines
//! behind a config-file driven CLI ([`cli`]).

pub mod analysis;
pub mod cli;
pub mod lti;
pub mod plant;
pub mod synthesis;

pub use lti::{
    FeedbackSign, FrequencyGrid, LtiError, Polynomial, StateSpace, Trajectory, TransferFunction,
};
pub use plant::{ShapingSpec, SystemParams};
pub use synthesis::PidGains;
