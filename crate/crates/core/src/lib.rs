//! Exact simulation of a two-photon Hardy interferometer.
//!
//! Amplitudes live in `Q(i, √2, √3)` and are manipulated exactly, so the
//! interferometer's wave functions, Born weights and post-selection rates
//! come out as exact rationals. On top of the simulator, [`paradox`]
//! enumerates full-wave trajectory assignments and checks them against the
//! predicted statistics under local-counterfactual or contextual rules.

pub mod amplitude;
pub mod circuit;
pub mod engine;
pub mod montecarlo;
pub mod optics;
pub mod paradox;
pub mod state;

pub use amplitude::{rat, RadicalComplex, Rational};
pub use circuit::{parse, render, Circuit, Diagnostic, Stage};
pub use engine::OutcomeTable;
pub use state::{Arm, ModeLabel, TwoPhotonState};
