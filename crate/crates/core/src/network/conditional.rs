//! Operators on the extreme qubits conditioned on the intermediate parties.
//!
//! `R_{y,b} = Tr_B[rho (1 ⊗ Pi^{B_1}_{b_1|y_1} ⊗ ... )]` is the unnormalized
//! state of `A_1..A_n` given intermediate inputs `y` and outputs `b`, and
//! `M_y = sum_b (-1)^{|b|} R_{y,b}`. Everything the extreme parties do is a
//! cheap trace against these.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::behavior::{pack, party_order, unpack, Behavior};
use super::sparse::{product_state, SparseOp, SparseState};
use super::{extreme_wire, intermediate_wire, Network, DEFAULT_COMPONENT_CAP, MAX_DENSE_N};
use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};
use crate::linalg::{kron_all, permute_matrix, ComplexMatrix, QubitPermutation, StateVector};
use crate::measurements::{BlochObservable, GhzGrouping};
use crate::states::SourceState;

/// How the conditional operators are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Sparse for pure states and explicit mixtures, dense for other `n <= 3` states.
    #[default]
    Auto,
    /// Full density matrix contraction (`n <= 3`).
    Dense,
    /// Pure-state expansion over products of source components.
    Sparse,
}

/// `R_{y,b}` for every intermediate input/output pair, indexed `y * 2^{n-1} + b`
/// with `B_1` the most significant bit of both.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOperators {
    n: usize,
    ops: Vec<ComplexMatrix>,
}

/// `M_y` for every intermediate input string `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOperators {
    n: usize,
    ops: Vec<ComplexMatrix>,
}

fn check_intermediates(n: usize, intermediates: &[[GhzGrouping; 2]]) -> Result<()> {
    if intermediates.len() != n - 1 {
        return Err(Error::InvalidParameter(format!(
            "{} intermediate settings for a network with {} intermediate parties",
            intermediates.len(),
            n - 1
        )));
    }
    if intermediates.iter().flatten().any(|g| g.num_qubits() != n) {
        return Err(Error::InvalidParameter(format!("intermediate groupings must act on {n} qubits")));
    }
    Ok(())
}

fn resolve(net: &Network, route: Route) -> Result<Route> {
    let dense_ok = net.n() <= MAX_DENSE_N;
    match route {
        Route::Dense if !dense_ok => Err(Error::Unsupported(format!("dense route for n = {}", net.n()))),
        Route::Auto => {
            let explicit = net.sources().iter().all(|s| !matches!(s, SourceState::Mixed(_)));
            Ok(if explicit || !dense_ok { Route::Sparse } else { Route::Dense })
        }
        r => Ok(r),
    }
}

/// `(1 + (-1)^b O) / 2`.
fn projector(obs: &ComplexMatrix, b: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(obs.rows()).scale(0.5);
    p.add_scaled(obs, if b == 0 { 0.5 } else { -0.5 });
    p
}

/// Party-order state permuted to the extreme-first layout.
fn dense_layout(net: &Network) -> Result<ComplexMatrix> {
    let n = net.n();
    let mut dest = vec![0; n * n];
    for i in 0..n {
        dest[extreme_wire(n, i)] = i;
    }
    for j in 0..n - 1 {
        for s in 0..n {
            dest[intermediate_wire(n, j, s)] = n + j * n + s;
        }
    }
    permute_matrix(&net.assemble()?, &QubitPermutation::new(dest)?)
}

/// `sum_{beta, beta'} rho[(e, beta), (e', beta')] op[beta', beta]`.
fn contract(rho: &ComplexMatrix, n: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let e_dim = 1usize << n;
    let b_dim = op.rows();
    let dim = rho.rows();
    let data = rho.data();
    let od = op.data();
    ComplexMatrix::from_fn(e_dim, e_dim, |e, e2| {
        let mut acc = Complex64::new(0.0, 0.0);
        for beta in 0..b_dim {
            let row = &data[(e * b_dim + beta) * dim + e2 * b_dim..][..b_dim];
            for (beta2, r) in row.iter().enumerate() {
                acc += r * od[beta2 * b_dim + beta];
            }
        }
        acc
    })
}

/// Per-source pure components and the list of component tuples.
fn expansion(net: &Network, cap: usize) -> Result<(Vec<Vec<(f64, StateVector)>>, Vec<Vec<usize>>)> {
    let comps: Vec<Vec<(f64, StateVector)>> = net.sources().iter().map(SourceState::components).collect::<Result<_>>()?;
    let count = comps.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match count {
        Some(c) if c <= cap => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "mixture expansion with more than {cap} pure components"
            )))
        }
    }
    let mut tuples = vec![vec![]];
    for c in &comps {
        tuples = tuples
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..c.len()).map(move |k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    Ok((comps, tuples))
}

/// Runs `leaf_ops` (one list of per-party operators per intermediate party)
/// down a tree over all product components and accumulates
/// `Tr_B[|psi><phi_leaf|]` into one matrix per leaf.
fn sparse_accumulate(
    net: &Network,
    per_party: &[Vec<SparseOp>],
    cap: usize,
    exec: Execution,
) -> Result<Vec<ComplexMatrix>> {
    let n = net.n();
    let (comps, tuples) = expansion(net, cap)?;
    let leaves: usize = per_party.iter().map(Vec::len).product();
    let e_dim = 1usize << n;
    let chunk = tuples.len().div_ceil(64).max(1);
    let chunks: Vec<Vec<Vec<usize>>> = tuples.chunks(chunk).map(<[_]>::to_vec).collect();
    let partials = map_collect(exec, chunks, |chunk| {
        let mut out = vec![ComplexMatrix::zeros(e_dim, e_dim); leaves];
        for t in chunk {
            let w: f64 = t.iter().enumerate().map(|(s, &k)| comps[s][k].0).product();
            let vecs: Vec<&StateVector> = t.iter().enumerate().map(|(s, &k)| &comps[s][k].1).collect();
            let psi = product_state(n, &vecs);
            descend(&psi, &psi, per_party, n, 0, 0, w, &mut out);
        }
        out
    });
    let mut total = vec![ComplexMatrix::zeros(e_dim, e_dim); leaves];
    for part in partials {
        for (acc, p) in total.iter_mut().zip(&part) {
            acc.add_scaled(p, 1.0);
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    psi: &SparseState,
    cur: &SparseState,
    per_party: &[Vec<SparseOp>],
    n: usize,
    j: usize,
    leaf: usize,
    w: f64,
    out: &mut [ComplexMatrix],
) {
    if j == per_party.len() {
        psi.reduce_against(cur, n, &mut out[leaf], w);
        return;
    }
    let k = per_party[j].len();
    for (idx, op) in per_party[j].iter().enumerate() {
        let next = cur.apply(op, n, j);
        descend(psi, &next, per_party, n, j + 1, leaf * k + idx, w, out);
    }
}

impl ConditionalOperators {
    pub fn compute(net: &Network, intermediates: &[[GhzGrouping; 2]], route: Route, exec: Execution) -> Result<Self> {
        Self::compute_with_cap(net, intermediates, route, exec, DEFAULT_COMPONENT_CAP)
    }

    pub fn compute_with_cap(
        net: &Network,
        intermediates: &[[GhzGrouping; 2]],
        route: Route,
        exec: Execution,
        cap: usize,
    ) -> Result<Self> {
        let n = net.n();
        check_intermediates(n, intermediates)?;
        let obs: Vec<[ComplexMatrix; 2]> = intermediates
            .iter()
            .map(|[g0, g1]| [g0.observable(), g1.observable()])
            .collect();
        let m = 1usize << (n - 1);
        let ops = match resolve(net, route)? {
            Route::Dense => {
                let rho = dense_layout(net)?;
                let items: Vec<usize> = (0..m * m).collect();
                map_collect(exec, items, |idx| {
                    let (y, b) = (unpack(idx / m, n - 1), unpack(idx % m, n - 1));
                    let factors: Vec<ComplexMatrix> = (0..n - 1)
                        .map(|j| projector(&obs[j][y[j] as usize], b[j] as usize))
                        .collect();
                    contract(&rho, n, &kron_all(&factors))
                })
            }
            _ => {
                // per party: (y_j, b_j) pairs in order y_j * 2 + b_j
                let per_party: Vec<Vec<SparseOp>> = obs
                    .iter()
                    .map(|pair| {
                        (0..4)
                            .map(|yb| SparseOp::new(&projector(&pair[yb >> 1], yb & 1)))
                            .collect()
                    })
                    .collect();
                let raw = sparse_accumulate(net, &per_party, cap, exec)?;
                // leaf index interleaves (y_1 b_1 y_2 b_2 ...); regroup to y * m + b
                let mut ops = vec![ComplexMatrix::zeros(1 << n, 1 << n); m * m];
                for (leaf, r) in raw.into_iter().enumerate() {
                    let bits = unpack(leaf, 2 * (n - 1));
                    let y: Vec<u8> = bits.iter().step_by(2).copied().collect();
                    let b: Vec<u8> = bits.iter().skip(1).step_by(2).copied().collect();
                    ops[pack(&y) * m + pack(&b)] = r;
                }
                ops
            }
        };
        Ok(Self { n, ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, y: &[u8], b: &[u8]) -> &ComplexMatrix {
        &self.ops[pack(y) * (1 << (self.n - 1)) + pack(b)]
    }

    /// `P(b | y)`.
    pub fn probability(&self, y: &[u8], b: &[u8]) -> f64 {
        self.get(y, b).trace().re
    }

    /// Normalized extreme-qubit state after `(y, b)`, with `P(b | y)`.
    /// Qubit order `A_1, ..., A_n`.
    pub fn swapped_state(&self, y: &[u8], b: &[u8]) -> Result<(ComplexMatrix, f64)> {
        if y.len() != self.n - 1 || b.len() != self.n - 1 || y.iter().chain(b).any(|&v| v > 1) {
            return Err(Error::InvalidParameter(format!("y and b need {} bits each", self.n - 1)));
        }
        let r = self.get(y, b);
        let p = r.trace().re;
        if p < 1e-12 {
            return Err(Error::NullEvent(p));
        }
        Ok((r.scale(1.0 / p), p))
    }

    pub fn correlation_operators(&self) -> CorrelationOperators {
        let m = 1usize << (self.n - 1);
        let e_dim = 1usize << self.n;
        let ops = (0..m)
            .map(|y| {
                let mut acc = ComplexMatrix::zeros(e_dim, e_dim);
                for b in 0..m {
                    let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    acc.add_scaled(&self.ops[y * m + b], sign);
                }
                acc
            })
            .collect();
        CorrelationOperators { n: self.n, ops }
    }

    /// Full behavior given the extreme parties' observables.
    pub fn behavior(&self, extremes: &[[BlochObservable; 2]]) -> Result<Behavior> {
        let n = self.n;
        if extremes.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: extremes.len(),
            });
        }
        let m = 1usize << (n - 1);
        let e_dim = 1usize << n;
        let parties = 2 * n - 1;
        let proj: Vec<[[ComplexMatrix; 2]; 2]> = extremes
            .iter()
            .map(|pair| {
                let o = [pair[0].matrix(), pair[1].matrix()];
                [
                    [projector(&o[0], 0), projector(&o[0], 1)],
                    [projector(&o[1], 0), projector(&o[1], 1)],
                ]
            })
            .collect();
        let size = 1usize << parties;
        let mut probs = vec![0.0; size * size];
        for xi in 0..e_dim {
            let x = unpack(xi, n);
            for ai in 0..e_dim {
                let a = unpack(ai, n);
                let factors: Vec<&ComplexMatrix> = (0..n).map(|l| &proj[l][x[l] as usize][a[l] as usize]).collect();
                let e = kron_all(factors);
                for yi in 0..m {
                    let y = unpack(yi, n - 1);
                    let s = pack(&party_order(&x, &y));
                    for bi in 0..m {
                        let b = unpack(bi, n - 1);
                        let o = pack(&party_order(&a, &b));
                        probs[s * size + o] = self.ops[yi * m + bi].trace_product(&e).re;
                    }
                }
            }
        }
        Behavior::new(n, probs)
    }
}

impl CorrelationOperators {
    /// Computes `M_y` directly, applying observables instead of projectors.
    pub fn compute(net: &Network, intermediates: &[[GhzGrouping; 2]], route: Route, exec: Execution) -> Result<Self> {
        let n = net.n();
        check_intermediates(n, intermediates)?;
        match resolve(net, route)? {
            Route::Dense => Ok(ConditionalOperators::compute(net, intermediates, Route::Dense, exec)?.correlation_operators()),
            _ => {
                let per_party: Vec<Vec<SparseOp>> = intermediates
                    .iter()
                    .map(|[g0, g1]| vec![SparseOp::new(&g0.observable()), SparseOp::new(&g1.observable())])
                    .collect();
                let ops = sparse_accumulate(net, &per_party, DEFAULT_COMPONENT_CAP, exec)?;
                Ok(Self { n, ops })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, y: &[u8]) -> &ComplexMatrix {
        &self.ops[pack(y)]
    }

    /// `(I_{y,0}, I_{y,1})` for all `y`, from per-party sums
    /// `S_{l,k} = A_{l,0} + (-1)^k A_{l,1}`.
    pub fn i_values_from_sums(&self, sums: &[[ComplexMatrix; 2]]) -> [Vec<f64>; 2] {
        let norm = 1.0 / (1usize << self.n) as f64;
        let mut out = [Vec::with_capacity(self.ops.len()), Vec::with_capacity(self.ops.len())];
        for (k, slot) in out.iter_mut().enumerate() {
            let e = kron_all(sums.iter().map(|s| &s[k]));
            slot.extend(self.ops.iter().map(|m| m.trace_product(&e).re * norm));
        }
        out
    }

    pub fn i_values(&self, extremes: &[[BlochObservable; 2]]) -> Result<[Vec<f64>; 2]> {
        if extremes.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: extremes.len(),
            });
        }
        let sums: Vec<[ComplexMatrix; 2]> = extremes
            .iter()
            .map(|[a0, a1]| {
                let (m0, m1) = (a0.matrix(), a1.matrix());
                [&m0 + &m1, &m0 - &m1]
            })
            .collect();
        Ok(self.i_values_from_sums(&sums))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::default_intermediate_settings;
    use crate::states::{amplitude_damped_ghz, gghz_state, ghz_plus, GghzParams};
    use std::f64::consts::FRAC_PI_4;

    fn nets() -> Vec<Network> {
        let g = SourceState::Pure(gghz_state(GghzParams::new(0.4).unwrap()));
        let amp = SourceState::Mixed(amplitude_damped_ghz(0.2).unwrap());
        vec![
            Network::identical(g.clone(), 3).unwrap(),
            Network::trilocal(g, SourceState::Pure(ghz_plus()), amp.clone()).unwrap(),
            Network::identical(amp, 3).unwrap(),
        ]
    }

    #[test]
    fn dense_and_sparse_routes_agree() {
        let inter = default_intermediate_settings(3);
        for net in nets() {
            let d = ConditionalOperators::compute(&net, &inter, Route::Dense, Execution::Sequential).unwrap();
            let s = ConditionalOperators::compute(&net, &inter, Route::Sparse, Execution::Parallel).unwrap();
            for (a, b) in d.ops.iter().zip(&s.ops) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
            let c = CorrelationOperators::compute(&net, &inter, Route::Sparse, Execution::Sequential).unwrap();
            for (a, b) in d.correlation_operators().ops.iter().zip(&c.ops) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_probabilities_sum_to_one() {
        let inter = default_intermediate_settings(3);
        for net in nets() {
            let r = net.conditional_operators(&inter).unwrap();
            for y in 0..4usize {
                let y = unpack(y, 2);
                let total: f64 = (0..4).map(|b| r.probability(&y, &unpack(b, 2))).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ghz_swapping_gives_unit_trace_states() {
        let net = Network::identical(SourceState::Pure(ghz_plus()), 3).unwrap();
        let inter = default_intermediate_settings(3);
        let (rho, p) = net.swapped_state(&inter, &[0, 0], &[0, 0]).unwrap();
        assert!(p > 0.0);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.is_hermitian(1e-12));
    }

    #[test]
    fn i_values_match_behavior() {
        let inter = default_intermediate_settings(3);
        let ext = vec![
            [BlochObservable::equatorial(0.0), BlochObservable::equatorial(FRAC_PI_4)],
            [BlochObservable::new(0.3, 1.0), BlochObservable::equatorial(2.0)],
            [BlochObservable::new(1.1, -0.5), BlochObservable::new(2.0, 0.2)],
        ];
        for net in nets() {
            let r = net.conditional_operators(&inter).unwrap();
            let b = r.behavior(&ext).unwrap();
            b.check(1e-12).unwrap();
            let iv = r.correlation_operators().i_values(&ext).unwrap();
            for k in 0..2u8 {
                for y in 0..4usize {
                    let want = super::super::nlocal_i_value(&b, &unpack(y, 2), k).unwrap().value;
                    assert!((iv[k as usize][y] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let net = &nets()[0];
        let inter = default_intermediate_settings(3);
        assert!(ConditionalOperators::compute(net, &inter[..1], Route::Auto, Execution::Sequential).is_err());
        let r = net.conditional_operators(&inter).unwrap();
        assert!(r.swapped_state(&[0], &[0, 0]).is_err());
        assert!(r.behavior(&[]).is_err());
        let g4 = SourceState::Pure(crate::states::ghz_n_state(4).unwrap());
        let n4 = Network::identical(g4, 4).unwrap();
        assert!(ConditionalOperators::compute(&n4, &default_intermediate_settings(4), Route::Dense, Execution::Sequential).is_err());
        let mixed = SourceState::Mixed(amplitude_damped_ghz(0.2).unwrap());
        let n3 = Network::identical(mixed, 3).unwrap();
        assert!(ConditionalOperators::compute_with_cap(&n3, &inter, Route::Sparse, Execution::Sequential, 10).is_err());
    }
}
