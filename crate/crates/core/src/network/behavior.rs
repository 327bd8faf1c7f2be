use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores above `1 + VERDICT_TOL` count as a violation.
pub const VERDICT_TOL: f64 = 1e-9;
/// I-values below this magnitude are treated as zero before taking roots.
pub const ROOT_FLOOR: f64 = 1e-14;

/// Full table `P(outputs | inputs)` of a `(2n - 1)`-party network.
///
/// Parties are ordered `A_1, B_1, ..., B_{n-1}, A_2, ..., A_n`; the first
/// party is the most significant bit of both the input and output index.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    n: usize,
    probs: Vec<f64>,
}

impl Behavior {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        let size = 1usize << (2 * (2 * n - 1));
        if probs.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                actual: probs.len(),
            });
        }
        Ok(Self { n, probs })
    }

    /// Builds the table from `f(inputs, outputs)`, bits in party order.
    pub fn from_fn(n: usize, mut f: impl FnMut(&[u8], &[u8]) -> f64) -> Self {
        let parties = 2 * n - 1;
        let size = 1usize << parties;
        let mut probs = Vec::with_capacity(size * size);
        for s in 0..size {
            let inputs = unpack(s, parties);
            for o in 0..size {
                probs.push(f(&inputs, &unpack(o, parties)));
            }
        }
        Self { n, probs }
    }

    pub fn uniform(n: usize) -> Self {
        let parties = 2 * n - 1;
        let w = 1.0 / (1usize << parties) as f64;
        Self::from_fn(n, |_, _| w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_parties(&self) -> usize {
        2 * self.n - 1
    }

    pub fn num_settings(&self) -> usize {
        1 << self.num_parties()
    }

    pub fn prob(&self, setting: usize, outcome: usize) -> f64 {
        self.probs[setting * self.num_settings() + outcome]
    }

    pub fn distribution(&self, setting: usize) -> &[f64] {
        let s = self.num_settings();
        &self.probs[setting * s..(setting + 1) * s]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Input index from extreme inputs `x` (`A_1..A_n`) and intermediate inputs `y`.
    pub fn setting_index(&self, x: &[u8], y: &[u8]) -> usize {
        pack(&party_order(x, y))
    }

    /// `sum_o (-1)^{|o|} P(o | setting)`.
    pub fn correlator(&self, setting: usize) -> f64 {
        self.distribution(setting)
            .iter()
            .enumerate()
            .map(|(o, p)| if o.count_ones() % 2 == 0 { *p } else { -p })
            .sum()
    }

    /// Largest deviation of a conditional distribution's total from one.
    pub fn normalization_error(&self) -> f64 {
        (0..self.num_settings())
            .map(|s| (self.distribution(s).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let err = self.normalization_error();
        if err > tol {
            return Err(Error::InvalidParameter(format!("behavior not normalized (error {err:e})")));
        }
        if let Some(p) = self.probs.iter().find(|p| **p < -1e-12 || **p > 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        Ok(())
    }

    /// Output distribution of one party under a full input assignment.
    pub fn marginal(&self, party: usize, setting: usize) -> [f64; 2] {
        let parties = self.num_parties();
        let mut m = [0.0; 2];
        for (o, p) in self.distribution(setting).iter().enumerate() {
            m[o >> (parties - 1 - party) & 1] += p;
        }
        m
    }

    /// `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Behavior, w: f64) -> Result<Behavior> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(Behavior {
            n: self.n,
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| w * a + (1.0 - w) * b)
                .collect(),
        })
    }
}

pub(crate) fn unpack(index: usize, bits: usize) -> Vec<u8> {
    (0..bits).map(|j| (index >> (bits - 1 - j)) as u8 & 1).collect()
}

pub(crate) fn pack(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

/// Interleaves extreme and intermediate bits into party order.
pub(crate) fn party_order(x: &[u8], y: &[u8]) -> Vec<u8> {
    let mut v = Vec::with_capacity(x.len() + y.len());
    v.push(x[0]);
    v.extend_from_slice(y);
    v.extend_from_slice(&x[1..]);
    v
}

/// `I_{indices, k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IValue {
    pub indices: Vec<u8>,
    pub k: u8,
    pub value: f64,
}

/// `2^{-n} sum_x (-1)^{k |x|} <A_{x_1} B_{i_1} ... A_{x_n}>`.
pub fn nlocal_i_value(b: &Behavior, indices: &[u8], k: u8) -> Result<IValue> {
    let n = b.n();
    if indices.len() != n - 1 || k > 1 || indices.iter().any(|&i| i > 1) {
        return Err(Error::InvalidParameter(format!(
            "I-value needs {} index bits and k in {{0,1}}",
            n - 1
        )));
    }
    let mut acc = 0.0;
    for xi in 0..1usize << n {
        let x = unpack(xi, n);
        let sign = if k == 1 && xi.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * b.correlator(b.setting_index(&x, indices));
    }
    Ok(IValue {
        indices: indices.to_vec(),
        k,
        value: acc / (1usize << n) as f64,
    })
}

/// Trilocal `I_{i1,i2,k}`.
pub fn i_value(b: &Behavior, i1: u8, i2: u8, k: u8) -> Result<IValue> {
    require_n(b, 3)?;
    nlocal_i_value(b, &[i1, i2], k)
}

fn require_n(b: &Behavior, n: usize) -> Result<()> {
    if b.n() != n {
        return Err(Error::InvalidParameter(format!("expected an n = {n} behavior, got n = {}", b.n())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    /// `|I|^{1/n} + |J|^{1/n}` (trilocal for `n = 3`, bilocal for `n = 2`).
    NLocal,
    /// `|I| + |J|`.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub kind: ScoreKind,
    pub n: usize,
    pub score: f64,
    /// Intermediate inputs of the `k = 0` term at the maximum.
    pub argmax_i: Vec<u8>,
    /// Intermediate inputs of the `k = 1` term at the maximum.
    pub argmax_j: Vec<u8>,
    pub violated: bool,
    pub i_values: Vec<IValue>,
}

fn term(kind: ScoreKind, n: usize, v: f64) -> f64 {
    match kind {
        ScoreKind::Local => v.abs(),
        ScoreKind::NLocal => {
            if v.abs() < ROOT_FLOOR {
                0.0
            } else {
                v.abs().powf(1.0 / n as f64)
            }
        }
    }
}

/// Maximum over all index tuples given `I_{i,0}` (`i0`) and `I_{j,1}` (`i1`),
/// both indexed by the packed intermediate inputs. Ties resolve to the
/// lowest index.
pub fn score_from_i_values(kind: ScoreKind, n: usize, i0: &[f64], i1: &[f64]) -> (f64, usize, usize) {
    let best = |vals: &[f64]| -> (f64, usize) {
        let mut top = (f64::NEG_INFINITY, 0);
        for (i, &v) in vals.iter().enumerate() {
            let t = term(kind, n, v);
            if t > top.0 {
                top = (t, i);
            }
        }
        top
    };
    let (s0, a0) = best(i0);
    let (s1, a1) = best(i1);
    (s0 + s1, a0, a1)
}

fn report(b: &Behavior, kind: ScoreKind) -> ScoreReport {
    let n = b.n();
    let m = 1usize << (n - 1);
    let mut i_values = Vec::with_capacity(2 * m);
    let mut vals = [vec![0.0; m], vec![0.0; m]];
    for k in 0..2u8 {
        for i in 0..m {
            let iv = nlocal_i_value(b, &unpack(i, n - 1), k).unwrap();
            vals[k as usize][i] = iv.value;
            i_values.push(iv);
        }
    }
    let (score, a0, a1) = score_from_i_values(kind, n, &vals[0], &vals[1]);
    ScoreReport {
        kind,
        n,
        score,
        argmax_i: unpack(a0, n - 1),
        argmax_j: unpack(a1, n - 1),
        violated: score > 1.0 + VERDICT_TOL,
        i_values,
    }
}

pub fn trilocal_score(b: &Behavior) -> Result<ScoreReport> {
    require_n(b, 3)?;
    Ok(report(b, ScoreKind::NLocal))
}

pub fn local_score(b: &Behavior) -> Result<ScoreReport> {
    require_n(b, 3)?;
    Ok(report(b, ScoreKind::Local))
}

pub fn nlocal_score(b: &Behavior) -> ScoreReport {
    report(b, ScoreKind::NLocal)
}

pub fn nlocal_local_score(b: &Behavior) -> ScoreReport {
    report(b, ScoreKind::Local)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deterministic_zero(n: usize) -> Behavior {
        Behavior::from_fn(n, |_, o| if o.iter().all(|&b| b == 0) { 1.0 } else { 0.0 })
    }

    #[test]
    fn uniform_behavior_has_zero_i_values() {
        let b = Behavior::uniform(3);
        b.check(1e-12).unwrap();
        for k in 0..2 {
            for i in 0..4u8 {
                assert_eq!(i_value(&b, i >> 1, i & 1, k).unwrap().value, 0.0);
            }
        }
        assert_eq!(trilocal_score(&b).unwrap().score, 0.0);
        assert_eq!(local_score(&b).unwrap().score, 0.0);
    }

    #[test]
    fn constant_output_saturates_both_scores() {
        let b = deterministic_zero(3);
        let tri = trilocal_score(&b).unwrap();
        let loc = local_score(&b).unwrap();
        assert_eq!(tri.score, 1.0);
        assert_eq!(loc.score, 1.0);
        assert!(!tri.violated && !loc.violated);
        assert_eq!(i_value(&b, 0, 0, 0).unwrap().value, 1.0);
        assert_eq!(i_value(&b, 1, 0, 1).unwrap().value, 0.0);
        assert_eq!(tri.i_values.len(), 8);
    }

    #[test]
    fn argmax_reports_first_maximizing_tuple() {
        let (s, a0, a1) = score_from_i_values(ScoreKind::NLocal, 3, &[0.0, 0.125, 0.125, 0.0], &[0.0, 0.0, 0.0, -0.125]);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!((a0, a1), (1, 3));
    }

    #[test]
    fn tiny_values_do_not_blow_up_roots() {
        let (s, _, _) = score_from_i_values(ScoreKind::NLocal, 3, &[1e-16; 4], &[1e-16; 4]);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn index_helpers() {
        let b = Behavior::uniform(3);
        // A=1, B=0, C=1, D=1, T=0 -> 10110
        assert_eq!(b.setting_index(&[1, 1, 0], &[0, 1]), 0b10110);
        assert_eq!(pack(&unpack(0b1011, 4)), 0b1011);
        assert!(Behavior::new(3, vec![0.0; 10]).is_err());
        assert!(i_value(&Behavior::uniform(2), 0, 0, 0).is_err());
        assert!(nlocal_i_value(&b, &[0], 0).is_err());
    }

    #[test]
    fn marginals_and_mixing() {
        let b = deterministic_zero(3);
        assert_eq!(b.marginal(4, 7), [1.0, 0.0]);
        let m = b.mix(&Behavior::uniform(3), 0.5).unwrap();
        m.check(1e-12).unwrap();
        assert!((m.marginal(0, 0)[0] - 0.75).abs() < 1e-15);
    }
}
