//! Network assembly, Born-rule behaviors, I-values, scores and swapped states.
//!
//! An `n`-local network has `n` sources of `n` qubits each, `n` extreme
//! parties `A_1..A_n` holding one qubit and `n - 1` intermediate parties
//! `B_1..B_{n-1}` holding one qubit from every source. For `n = 3` the
//! parties are Alice, Bob, Charlie, Dick and Tom (`A, B, C, D, T`).
//!
//! Source qubit order: source 1 emits `(A_1, B_1, ..., B_{n-1})`, every
//! other source `i` emits `(B_1, ..., B_{n-1}, A_i)`. Party (wire) order
//! of the assembled state: `A_1 | B_1 | ... | B_{n-1} | A_2 ... A_n`, each
//! intermediate party's wires ordered by source index. Behaviors use the
//! same party order for their input and output bits.

mod behavior;
mod conditional;
mod sparse;

pub use behavior::{
    local_score, nlocal_i_value, nlocal_local_score, nlocal_score, score_from_i_values,
    trilocal_score, i_value, Behavior, IValue, ScoreKind, ScoreReport, ROOT_FLOOR, VERDICT_TOL,
};
pub use conditional::{ConditionalOperators, CorrelationOperators, Route};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{kron_all, permute_matrix, ComplexMatrix, QubitPermutation};
use crate::measurements::{default_intermediate_settings, BlochObservable, GhzGrouping};
use crate::states::SourceState;

/// Largest `n` with exact support.
pub const MAX_N: usize = 4;
/// Largest `n` assembled as a dense density matrix.
pub const MAX_DENSE_N: usize = 3;
/// Default cap on the number of pure global components in a mixture expansion.
pub const DEFAULT_COMPONENT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    sources: Vec<SourceState>,
}

/// The three-source, five-party network.
pub type TrilocalNetwork = Network;
pub type NLocalNetwork = Network;

impl Network {
    pub fn new(sources: Vec<SourceState>) -> Result<Self> {
        let n = sources.len();
        if !(2..=MAX_N).contains(&n) {
            return Err(Error::Unsupported(format!(
                "n = {n}; networks with 2..={MAX_N} sources are supported"
            )));
        }
        for s in &sources {
            if s.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: s.num_qubits(),
                });
            }
        }
        Ok(Self { n, sources })
    }

    pub fn trilocal(s1: SourceState, s2: SourceState, s3: SourceState) -> Result<Self> {
        Self::new(vec![s1, s2, s3])
    }

    /// `n` identical copies of one source.
    pub fn identical(state: SourceState, n: usize) -> Result<Self> {
        Self::new(vec![state; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.n
    }

    pub fn sources(&self) -> &[SourceState] {
        &self.sources
    }

    pub fn all_pure(&self) -> bool {
        self.sources.iter().all(SourceState::is_pure)
    }

    /// Dense global state in party order. Only for `n <= 3`.
    pub fn assemble(&self) -> Result<ComplexMatrix> {
        if self.n > MAX_DENSE_N {
            return Err(Error::Unsupported(format!(
                "dense assembly of {} qubits",
                self.num_qubits()
            )));
        }
        let rhos: Vec<ComplexMatrix> = self.sources.iter().map(SourceState::density).collect();
        permute_matrix(&kron_all(&rhos), &wiring_permutation(self.n))
    }

    pub fn conditional_operators(&self, intermediates: &[[GhzGrouping; 2]]) -> Result<ConditionalOperators> {
        ConditionalOperators::compute(self, intermediates, Route::Auto, Execution::default())
    }

    pub fn behavior(&self, settings: &Settings) -> Result<Behavior> {
        settings.validate(self.n)?;
        self.conditional_operators(&settings.intermediates)?.behavior(&settings.extremes)
    }

    pub fn correlation_operators(&self, intermediates: &[[GhzGrouping; 2]]) -> Result<CorrelationOperators> {
        CorrelationOperators::compute(self, intermediates, Route::Auto, Execution::default())
    }

    /// State of the extreme qubits conditioned on intermediate inputs `y`
    /// and outputs `b`, with the probability of `b` given `y`.
    pub fn swapped_state(
        &self,
        intermediates: &[[GhzGrouping; 2]],
        y: &[u8],
        b: &[u8],
    ) -> Result<(ComplexMatrix, f64)> {
        self.conditional_operators(intermediates)?.swapped_state(y, b)
    }
}

/// Born-rule behavior of an `n`-local network; same as [`Network::behavior`].
pub fn nlocal_behavior(net: &Network, settings: &Settings) -> Result<Behavior> {
    net.behavior(settings)
}

/// Source-order qubit `i` goes to party-order wire `dest[i]`.
pub fn wiring_permutation(n: usize) -> QubitPermutation {
    let mut dest = Vec::with_capacity(n * n);
    for src in 0..n {
        if src == 0 {
            dest.push(extreme_wire(n, 0));
            dest.extend((0..n - 1).map(|j| intermediate_wire(n, j, 0)));
        } else {
            dest.extend((0..n - 1).map(|j| intermediate_wire(n, j, src)));
            dest.push(extreme_wire(n, src));
        }
    }
    QubitPermutation::new(dest).unwrap()
}

/// Party-order wire of extreme party `A_{i+1}`.
pub fn extreme_wire(n: usize, i: usize) -> usize {
    if i == 0 {
        0
    } else {
        1 + (n - 1) * n + (i - 1)
    }
}

/// Party-order wire of intermediate party `B_{j+1}`'s qubit from source `src`.
pub fn intermediate_wire(n: usize, j: usize, src: usize) -> usize {
    1 + j * n + src
}

/// Two observables for every party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// `A_1..A_n` (for `n = 3`: Alice, Dick, Tom).
    pub extremes: Vec<[BlochObservable; 2]>,
    /// `B_1..B_{n-1}` (for `n = 3`: Bob, Charlie).
    pub intermediates: Vec<[GhzGrouping; 2]>,
}

pub type SettingsBundle = Settings;

impl Settings {
    pub fn n(&self) -> usize {
        self.extremes.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.extremes.len() != n || self.intermediates.len() != n - 1 {
            return Err(Error::InvalidParameter(format!(
                "settings for {} extreme / {} intermediate parties, network has n = {n}",
                self.extremes.len(),
                self.intermediates.len()
            )));
        }
        if self.intermediates.iter().flatten().any(|g| g.num_qubits() != n) {
            return Err(Error::InvalidParameter(format!(
                "intermediate groupings must act on {n} qubits"
            )));
        }
        Ok(())
    }

    /// Default intermediate groupings with the given extreme observables.
    pub fn with_default_groupings(extremes: Vec<[BlochObservable; 2]>) -> Self {
        let n = extremes.len();
        Self {
            extremes,
            intermediates: default_intermediate_settings(n),
        }
    }

    /// Trilocal convenience constructor, parties named as in the five-party network.
    pub fn trilocal(
        a: [BlochObservable; 2],
        b: [GhzGrouping; 2],
        c: [GhzGrouping; 2],
        d: [BlochObservable; 2],
        t: [BlochObservable; 2],
    ) -> Self {
        Self {
            extremes: vec![a, d, t],
            intermediates: vec![b, c],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, StateVector};
    use crate::states::{depolarized_ghz, ghz_plus};

    #[test]
    fn trilocal_wiring_matches_fixed_convention() {
        assert_eq!(wiring_permutation(3).destinations(), &[0, 1, 4, 2, 5, 7, 3, 6, 8]);
        assert_eq!(wiring_permutation(2).destinations(), &[0, 1, 2, 3]);
    }

    #[test]
    fn assemble_examples() {
        let mixed = SourceState::Mixed(depolarized_ghz(0.0).unwrap());
        let net = Network::identical(mixed, 3).unwrap();
        let rho = net.assemble().unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(512).scale(1.0 / 512.0)) < 1e-15);

        let zero = SourceState::Pure(StateVector::basis(3, 0));
        let rho = Network::identical(zero, 3).unwrap().assemble().unwrap();
        assert_eq!(rho, StateVector::basis(9, 0).projector());

        let ghz = Network::identical(SourceState::Pure(ghz_plus()), 3).unwrap();
        let rho = ghz.assemble().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let a = partial_trace(&rho, 9, &[0]).unwrap();
        assert!(a.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn assemble_routes_source_qubits() {
        // source 2 = |001>: its last qubit goes to Dick (wire 7)
        let zero = SourceState::Pure(StateVector::basis(3, 0));
        let s2 = SourceState::Pure(StateVector::basis(3, 0b001));
        let net = Network::trilocal(zero.clone(), s2, zero).unwrap();
        let rho = net.assemble().unwrap();
        let idx = 1 << (8 - 7);
        assert!((rho[(idx, idx)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_networks() {
        let s = SourceState::Pure(ghz_plus());
        assert!(Network::new(vec![s.clone(); 2]).is_err());
        assert!(Network::new(vec![s.clone()]).is_err());
        let g5 = SourceState::Pure(crate::states::ghz_n_state(5).unwrap());
        assert!(Network::new(vec![g5; 5]).is_err());
        let g4 = SourceState::Pure(crate::states::ghz_n_state(4).unwrap());
        assert!(Network::identical(g4, 4).unwrap().assemble().is_err());
    }
}
