//! Measurement operators: Bloch observables for extreme parties and
//! two-outcome partial GHZ-basis observables for intermediate parties.
//!
//! GHZ-basis labels are bit strings `m f_1 ... f_{n-1}` naming
//! `(|0 f> + (-1)^m |1 ~f>)/sqrt(2)`. A label's index is the string read as a
//! big-endian binary number.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// `sin(theta)cos(phi) X + sin(theta)sin(phi) Y + cos(theta) Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochObservable {
    pub theta: f64,
    pub phi: f64,
}

impl BlochObservable {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn equatorial(phi: f64) -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, phi)
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn matrix(&self) -> ComplexMatrix {
        bloch_observable(*self)
    }
}

pub fn bloch_observable(b: BlochObservable) -> ComplexMatrix {
    let [x, y, z] = b.direction();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        ],
    )
    .unwrap()
}

/// `(1/sqrt 2) sum_l (-1)^{m l} |l>|l ^ f_1>...|l ^ f_{n-1}>`.
pub fn ghz_basis_vector_n(m: u8, flips: &[u8]) -> Result<StateVector> {
    let n = flips.len() + 1;
    if n < 2 {
        return Err(Error::InvalidParameter("GHZ basis needs n >= 2".into()));
    }
    if m > 1 || flips.iter().any(|&f| f > 1) {
        return Err(Error::InvalidParameter("GHZ labels are bits".into()));
    }
    let mut amps = vec![0.0; 1 << n];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for l in 0..2u8 {
        let mut idx = l as usize;
        for &f in flips {
            idx = idx << 1 | (l ^ f) as usize;
        }
        amps[idx] += if m == 1 && l == 1 { -s } else { s };
    }
    StateVector::from_real(&amps)
}

pub fn ghz_basis_vector(m: u8, n: u8, k: u8) -> Result<StateVector> {
    ghz_basis_vector_n(m, &[n, k])
}

fn label_vector(n: usize, label: usize) -> StateVector {
    let m = (label >> (n - 1)) as u8 & 1;
    let flips: Vec<u8> = (0..n - 1).map(|j| (label >> (n - 2 - j)) as u8 & 1).collect();
    ghz_basis_vector_n(m, &flips).unwrap()
}

/// Partition of the `2^n` GHZ-basis labels into a `+1` and a `-1` group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GhzGrouping {
    n: usize,
    plus: Vec<bool>,
}

impl GhzGrouping {
    pub fn new(n: usize, plus: Vec<bool>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrouping(format!("n = {n} < 2")));
        }
        if plus.len() != 1 << n {
            return Err(Error::InvalidGrouping(format!(
                "{} labels given, expected {}",
                plus.len(),
                1 << n
            )));
        }
        if plus.iter().all(|&p| p) || plus.iter().all(|&p| !p) {
            return Err(Error::InvalidGrouping("both groups must be non-empty".into()));
        }
        Ok(Self { n, plus })
    }

    /// Grouping whose `+1` outcome collects the given labels.
    pub fn from_plus_labels(n: usize, labels: &[usize]) -> Result<Self> {
        let mut plus = vec![false; 1 << n];
        for &l in labels {
            if l >= plus.len() {
                return Err(Error::InvalidGrouping(format!("label {l} out of range")));
            }
            if plus[l] {
                return Err(Error::InvalidGrouping(format!("label {l} repeated")));
            }
            plus[l] = true;
        }
        Self::new(n, plus)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_plus(&self, label: usize) -> bool {
        self.plus[label]
    }

    pub fn plus_labels(&self) -> Vec<usize> {
        (0..self.plus.len()).filter(|&l| self.plus[l]).collect()
    }

    pub fn minus_labels(&self) -> Vec<usize> {
        (0..self.plus.len()).filter(|&l| !self.plus[l]).collect()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.plus_labels().len() == self.plus.len()
    }

    /// Same measurement with outcomes relabeled.
    pub fn flipped(&self) -> Self {
        Self {
            n: self.n,
            plus: self.plus.iter().map(|p| !p).collect(),
        }
    }

    pub fn observable(&self) -> ComplexMatrix {
        partial_ghz_observable(self)
    }

    fn format_label(&self, l: usize) -> String {
        (0..self.n)
            .map(|j| if l >> (self.n - 1 - j) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

/// `sum_{plus} P_label - sum_{minus} P_label`.
pub fn partial_ghz_observable(g: &GhzGrouping) -> ComplexMatrix {
    let dim = 1 << g.n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for l in 0..dim {
        let sign = if g.plus[l] { 1.0 } else { -1.0 };
        out.add_scaled(&label_vector(g.n, l).projector(), sign);
    }
    out
}

impl fmt::Display for GhzGrouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plus: Vec<String> = self.plus_labels().into_iter().map(|l| self.format_label(l)).collect();
        let minus: Vec<String> = self.minus_labels().into_iter().map(|l| self.format_label(l)).collect();
        write!(f, "{}|{}", plus.join(","), minus.join(","))
    }
}

impl FromStr for GhzGrouping {
    type Err = Error;

    /// Parses `"000,001,010,100|011,101,110,111"`.
    fn from_str(s: &str) -> Result<Self> {
        let (plus, minus) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("grouping {s:?} lacks '|'")))?;
        let parse_side = |side: &str| -> Result<Vec<String>> {
            side.split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    if t.chars().all(|c| c == '0' || c == '1') {
                        Ok(t)
                    } else {
                        Err(Error::Parse(format!("bad GHZ label {t:?}")))
                    }
                })
                .collect()
        };
        let plus = parse_side(plus)?;
        let minus = parse_side(minus)?;
        let n = plus
            .first()
            .or(minus.first())
            .map(|t| t.len())
            .ok_or_else(|| Error::Parse("empty grouping".into()))?;
        if plus.iter().chain(&minus).any(|t| t.len() != n) {
            return Err(Error::Parse("labels of unequal length".into()));
        }
        let to_index = |t: &String| usize::from_str_radix(t, 2).unwrap();
        let mut seen = vec![false; 1 << n];
        for t in plus.iter().chain(&minus) {
            let i = to_index(t);
            if seen[i] {
                return Err(Error::InvalidGrouping(format!("label {t} appears twice")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGrouping("labels do not cover the basis".into()));
        }
        let plus: Vec<usize> = plus.iter().map(to_index).collect();
        Self::from_plus_labels(n, &plus)
    }
}

impl Serialize for GhzGrouping {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GhzGrouping {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The four intermediate-party groupings used for the GGHZ family.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub b1: GhzGrouping,
    pub b2: GhzGrouping,
    pub c1: GhzGrouping,
    pub c2: GhzGrouping,
}

pub fn table1_settings() -> Table1 {
    let g = |s: &str| s.parse::<GhzGrouping>().unwrap();
    Table1 {
        b1: g("000,001,010,100|011,101,110,111"),
        b2: g("000,001,110,011|010,100,101,111"),
        c1: g("000,001,010,100|011,101,110,111"),
        c2: g("101,110,000,011|010,100,001,111"),
    }
}

/// Balanced splits with label `0` in the plus group (one per sign class).
/// 35 for `n = 3`.
pub fn balanced_groupings(n: usize) -> Vec<GhzGrouping> {
    canonical_groupings(n, true)
}

/// Every split with label `0` in the plus group, balanced or not.
pub fn all_groupings(n: usize) -> Vec<GhzGrouping> {
    canonical_groupings(n, false)
}

fn canonical_groupings(n: usize, balanced: bool) -> Vec<GhzGrouping> {
    let dim = 1usize << n;
    assert!(n <= 4, "grouping enumeration is limited to n <= 4");
    let rest = dim - 1;
    (0u64..1 << rest)
        .filter(|mask| !balanced || mask.count_ones() as usize == dim / 2 - 1)
        .filter_map(|mask| {
            let mut plus = vec![false; dim];
            plus[0] = true;
            for (j, p) in plus.iter_mut().skip(1).enumerate() {
                *p = mask >> j & 1 == 1;
            }
            GhzGrouping::new(n, plus).ok()
        })
        .collect()
}

/// Parity-type pair for even `n`: observable 0 groups the `m = 0` labels
/// (an `X...X` parity), observable 1 groups labels with `m + |f|` even
/// (a `Y...Y` parity up to sign).
pub fn parity_groupings(n: usize) -> [GhzGrouping; 2] {
    let dim = 1usize << n;
    let x_plus: Vec<bool> = (0..dim).map(|l| l >> (n - 1) == 0).collect();
    let y_plus: Vec<bool> = (0..dim).map(|l| l.count_ones() % 2 == 0).collect();
    [
        GhzGrouping::new(n, x_plus).unwrap(),
        GhzGrouping::new(n, y_plus).unwrap(),
    ]
}

/// Default intermediate-party settings, one pair per intermediate party.
/// The Table I groupings for `n = 3`, parity groupings otherwise.
pub fn default_intermediate_settings(n: usize) -> Vec<[GhzGrouping; 2]> {
    if n == 3 {
        let t = table1_settings();
        vec![[t.b1, t.b2], [t.c1, t.c2]]
    } else {
        (0..n - 1).map(|_| parity_groupings(n)).collect()
    }
}
