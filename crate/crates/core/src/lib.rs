//! Simulation of source-independent quantum networks.
//!
//! Three (or `n`) independent sources each emit an entangled multi-qubit
//! state. Intermediate parties perform two-outcome partial GHZ-basis
//! measurements on one qubit from every source while extreme parties measure
//! a single qubit projectively. The crate computes the exact Born-rule
//! behavior of such networks, scores it against the trilocal / local /
//! n-local inequality families, and searches measurement settings that
//! maximize violations.
//!
//! Module map:
//!
//! * [`linalg`] dense complex matrices, state vectors and qubit bookkeeping
//! * [`states`] source-state families and single-qubit Kraus channels
//! * [`measurements`] Bloch observables and partial GHZ-basis observables
//! * [`network`] network assembly, behaviors, I-values and scores
//! * [`analysis`] separability criteria, negativity, generic Bell functionals
//! * [`optimize`] Nelder-Mead violation search and threshold bisection
//! * [`lhv`] classical reference models
//! * [`exec`] parallel / sequential execution switch

pub mod analysis;
pub mod error;
pub mod exec;
pub mod lhv;
pub mod linalg;
pub mod measurements;
pub mod network;
pub mod optimize;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
