//! Sparse pure-state route.
//!
//! Works in an extreme-first wire layout: `A_1..A_n` on wires `0..n`, then
//! intermediate party `B_{j+1}` on wires `n + j n .. n + (j + 1) n` in source
//! order. A basis index is therefore `e * 2^{n(n-1)} + beta`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::linalg::{ComplexMatrix, StateVector};

const DROP: f64 = 1e-300;

#[derive(Debug, Clone)]
pub(crate) struct SparseState {
    pub amps: Vec<(usize, Complex64)>,
}

/// Column-sparse form of a `2^n x 2^n` operator.
pub(crate) struct SparseOp {
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn new(m: &ComplexMatrix) -> Self {
        let cols = (0..m.cols())
            .map(|c| {
                (0..m.rows())
                    .filter(|&r| m[(r, c)].norm() > 1e-15)
                    .map(|r| (r, m[(r, c)]))
                    .collect()
            })
            .collect();
        Self { cols }
    }
}

fn bit(n_total: usize, wire: usize) -> usize {
    1 << (n_total - 1 - wire)
}

fn layout_wire(n: usize, src: usize, q: usize) -> usize {
    let inter = |j: usize| n + j * n + src;
    if src == 0 {
        if q == 0 {
            0
        } else {
            inter(q - 1)
        }
    } else if q == n - 1 {
        src
    } else {
        inter(q)
    }
}

/// Product of one pure component per source, laid out extreme-first.
pub(crate) fn product_state(n: usize, comps: &[&StateVector]) -> SparseState {
    let total = n * n;
    let mut amps: Vec<(usize, Complex64)> = vec![(0, Complex64::new(1.0, 0.0))];
    for (src, psi) in comps.iter().enumerate() {
        let local: Vec<(usize, Complex64)> = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > DROP)
            .map(|(s, &a)| {
                let mask = (0..n)
                    .filter(|q| s >> (n - 1 - q) & 1 == 1)
                    .map(|q| bit(total, layout_wire(n, src, q)))
                    .sum::<usize>();
                (mask, a)
            })
            .collect();
        let mut next = Vec::with_capacity(amps.len() * local.len());
        for &(i, a) in &amps {
            for &(m, b) in &local {
                next.push((i | m, a * b));
            }
        }
        amps = next;
    }
    SparseState { amps }
}

impl SparseState {
    /// Applies `op` to intermediate party `j`.
    pub fn apply(&self, op: &SparseOp, n: usize, j: usize) -> SparseState {
        let total = n * n;
        let shift = total - n - (n + j * n);
        let mask = ((1usize << n) - 1) << shift;
        let mut out: HashMap<usize, Complex64> = HashMap::with_capacity(self.amps.len() * 2);
        for &(idx, a) in &self.amps {
            let sub = (idx & mask) >> shift;
            let base = idx & !mask;
            for &(r, v) in &op.cols[sub] {
                *out.entry(base | r << shift).or_default() += v * a;
            }
        }
        let mut amps: Vec<(usize, Complex64)> = out.into_iter().filter(|(_, a)| a.norm() > DROP).collect();
        amps.sort_unstable_by_key(|&(i, _)| i);
        SparseState { amps }
    }

    /// `Tr_B[|self><phi|]` on the extreme qubits, i.e. entries
    /// `sum_beta self[e, beta] conj(phi[e', beta])`.
    pub fn reduce_against(&self, phi: &SparseState, n: usize, out: &mut ComplexMatrix, weight: f64) {
        let inter_bits = n * (n - 1);
        let low = (1usize << inter_bits) - 1;
        let mut by_beta: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
        for &(idx, a) in &self.amps {
            by_beta.entry(idx & low).or_default().push((idx >> inter_bits, a));
        }
        for &(idx, b) in &phi.amps {
            if let Some(list) = by_beta.get(&(idx & low)) {
                let e2 = idx >> inter_bits;
                let bc = b.conj() * weight;
                for &(e, a) in list {
                    out[(e, e2)] += a * bc;
                }
            }
        }
    }
}
