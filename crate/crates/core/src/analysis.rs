//! Entanglement and locality diagnostics for three-qubit states.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron_all, partial_transpose, ComplexMatrix};
use crate::measurements::BlochObservable;

/// Partial-transpose eigenvalues above `-PPT_TOL` count as zero.
pub const PPT_TOL: f64 = 1e-10;
/// Functional values above `bound + BELL_TOL` count as a violation.
pub const BELL_TOL: f64 = 1e-9;

fn check_density(rho: &ComplexMatrix, num_qubits: usize) -> Result<()> {
    let dim = 1usize << num_qubits;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: rho.rows(),
        });
    }
    let h = rho.hermiticity_error();
    if h > 1e-9 {
        return Err(Error::NotHermitian(h));
    }
    if (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("trace {} is not 1", rho.trace().re)));
    }
    Ok(())
}

/// Outcome of the two diagonal/corner separability tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    /// `|rho_{1,8}|` (1-based indices).
    pub lhs: f64,
    /// `(prod_{i=2..7} rho_{i,i})^{1/6}`.
    pub rhs1: f64,
    /// `(rho_{1,1} rho_{4,4} prod_{i=4..7} rho_{i,i})^{1/6}`.
    pub rhs2: f64,
    pub criterion1_satisfied: bool,
    pub criterion2_satisfied: bool,
}

impl SeparabilityReport {
    /// True if either criterion fails, which certifies entanglement.
    pub fn entangled(&self) -> bool {
        !(self.criterion1_satisfied && self.criterion2_satisfied)
    }
}

pub fn separability_check(rho: &ComplexMatrix) -> Result<SeparabilityReport> {
    check_density(rho, 3)?;
    // 1-based accessors, as the criteria are written
    let d = |i: usize| rho[(i - 1, i - 1)].re.max(0.0);
    let lhs = rho[(0, 7)].norm();
    let rhs1 = (2..=7).map(d).product::<f64>().powf(1.0 / 6.0);
    let rhs2 = (d(1) * d(4) * (4..=7).map(d).product::<f64>()).powf(1.0 / 6.0);
    const SLACK: f64 = 1e-12;
    Ok(SeparabilityReport {
        lhs,
        rhs1,
        rhs2,
        criterion1_satisfied: lhs <= rhs1 + SLACK,
        criterion2_satisfied: lhs <= rhs2 + SLACK,
    })
}

/// Sum of `|lambda|` over negative eigenvalues of the partial transpose on `cut`.
pub fn negativity(rho: &ComplexMatrix, num_qubits: usize, cut: &[usize]) -> Result<f64> {
    check_density(rho, num_qubits)?;
    if cut.is_empty() || cut.len() >= num_qubits {
        return Err(Error::InvalidParameter(format!(
            "cut {cut:?} is not a proper bipartition of {num_qubits} qubits"
        )));
    }
    let mut sorted = cut.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != cut.len() {
        return Err(Error::InvalidParameter(format!("cut {cut:?} repeats a qubit")));
    }
    let pt = partial_transpose(rho, num_qubits, cut)?;
    Ok(hermitian_eigenvalues(&pt)?
        .into_iter()
        .filter(|&l| l < -PPT_TOL)
        .fold(0.0, |acc, l| acc - l))
}

/// Negativity across each single-qubit cut `q | rest`.
pub fn one_vs_rest_negativities(rho: &ComplexMatrix, num_qubits: usize) -> Result<Vec<f64>> {
    (0..num_qubits).map(|q| negativity(rho, num_qubits, &[q])).collect()
}

/// `P(a, b, c | x, y, z)` for three binary-input, binary-output parties.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteBehavior {
    probs: [f64; 64],
}

impl TripartiteBehavior {
    /// Index bits: `x y z a b c`, `x` most significant.
    pub fn new(probs: [f64; 64]) -> Self {
        Self { probs }
    }

    pub fn from_fn(mut f: impl FnMut([u8; 3], [u8; 3]) -> f64) -> Self {
        let mut probs = [0.0; 64];
        for (i, p) in probs.iter_mut().enumerate() {
            let bit = |k: usize| (i >> (5 - k)) as u8 & 1;
            *p = f([bit(3), bit(4), bit(5)], [bit(0), bit(1), bit(2)]);
        }
        Self { probs }
    }

    /// Born-rule statistics of single-qubit measurements on a three-qubit state.
    pub fn from_state(rho: &ComplexMatrix, observables: &[[BlochObservable; 2]; 3]) -> Result<Self> {
        check_density(rho, 3)?;
        let proj = |o: &BlochObservable, a: u8| {
            let mut p = ComplexMatrix::identity(2).scale(0.5);
            p.add_scaled(&o.matrix(), if a == 0 { 0.5 } else { -0.5 });
            p
        };
        Ok(Self::from_fn(|out, set| {
            let f: Vec<ComplexMatrix> = (0..3).map(|k| proj(&observables[k][set[k] as usize], out[k])).collect();
            rho.trace_product(&kron_all(&f)).re
        }))
    }

    pub fn prob(&self, outcomes: [u8; 3], settings: [u8; 3]) -> f64 {
        let s = (settings[0] as usize) << 2 | (settings[1] as usize) << 1 | settings[2] as usize;
        let o = (outcomes[0] as usize) << 2 | (outcomes[1] as usize) << 1 | outcomes[2] as usize;
        self.probs[s << 3 | o]
    }

    pub fn mix(&self, other: &Self, w: f64) -> Self {
        let mut probs = [0.0; 64];
        for (i, p) in probs.iter_mut().enumerate() {
            *p = w * self.probs[i] + (1.0 - w) * other.probs[i];
        }
        Self { probs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellTerm {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub x: u8,
    pub y: u8,
    pub z: u8,
    pub coeff: f64,
}

/// `sum coeff * P(a b c | x y z) <= bound` in full-probability form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellFunctional {
    /// Parties, inputs per party, outputs per party. Only `[3, 2, 2]`.
    pub scenario: [usize; 3],
    pub bound: f64,
    pub terms: Vec<BellTerm>,
}

impl BellFunctional {
    pub fn validate(&self) -> Result<()> {
        if self.scenario != [3, 2, 2] {
            return Err(Error::Unsupported(format!("scenario {:?}; only [3,2,2]", self.scenario)));
        }
        if !self.bound.is_finite() {
            return Err(Error::InvalidParameter("bound must be finite".into()));
        }
        for t in &self.terms {
            if [t.a, t.b, t.c, t.x, t.y, t.z].iter().any(|&v| v > 1) || !t.coeff.is_finite() {
                return Err(Error::InvalidParameter(format!("term out of range: {t:?}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: BellFunctional = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Mermin functional `<A1B0C0> + <A0B1C0> + <A0B0C1> - <A1B1C1> <= 2`
    /// in full-probability form.
    pub fn mermin() -> Self {
        let correlators: [([u8; 3], f64); 4] = [([1, 0, 0], 1.0), ([0, 1, 0], 1.0), ([0, 0, 1], 1.0), ([1, 1, 1], -1.0)];
        let mut terms = Vec::new();
        for (s, sign) in correlators {
            for o in 0..8u8 {
                let (a, b, c) = (o >> 2 & 1, o >> 1 & 1, o & 1);
                let parity = if (a + b + c) % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(BellTerm {
                    a,
                    b,
                    c,
                    x: s[0],
                    y: s[1],
                    z: s[2],
                    coeff: sign * parity,
                });
            }
        }
        Self {
            scenario: [3, 2, 2],
            bound: 2.0,
            terms,
        }
    }
}

/// Functional value and whether it exceeds the bound.
pub fn bell_evaluate(b: &TripartiteBehavior, f: &BellFunctional) -> Result<(f64, bool)> {
    f.validate()?;
    let value: f64 = f
        .terms
        .iter()
        .map(|t| t.coeff * b.prob([t.a, t.b, t.c], [t.x, t.y, t.z]))
        .sum();
    Ok((value, value > f.bound + BELL_TOL))
}
