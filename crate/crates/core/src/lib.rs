//! Cutoff-regularized Wigner–Weisskopf decay of a two-level atom.
//!
//! The excited amplitude obeys ċ(t) = −∫₀ᵗ M(t−t')c(t')dt' with a memory
//! kernel fixed by the high-frequency cutoff. This crate evaluates that
//! kernel, integrates the equation both as a Volterra problem and as a
//! discretized bath of modes, and compares both against the pole
//! (Markov) approximation.

pub mod cutoff;
pub mod dipole;
pub mod error;
pub mod kernel;
pub mod markov;
pub mod modes;
pub mod params;
pub mod quad;
mod soe;
pub mod special;
pub mod volterra;

pub use cutoff::CutoffSpec;
pub use error::{Error, Result};
pub use params::{AtomFieldParams, UnitSystem, ValidityReport};
