//! Classical reference models: the saturating trilocal model with local
//! randomness, and deterministic strategies (vertices of the local set).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};
use crate::network::{score_from_i_values, Behavior, ScoreKind};

/// Trilocal model with shared variables `lambda_i` (point mass at 0) and
/// local coins `tau_i` with `P(tau_i = 0) = r` at Alice, Dick and Tom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixBModel {
    r: f64,
}

impl AppendixBModel {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("r = {r} outside [0, 1]")));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `rho_i(lambda_i)`.
    pub fn lambda_weight(&self, lambda: u8) -> f64 {
        if lambda == 0 {
            1.0
        } else {
            0.0
        }
    }

    /// `kappa_i(tau_i)`.
    pub fn tau_weight(&self, tau: u8) -> f64 {
        if tau == 0 {
            self.r
        } else {
            1.0 - self.r
        }
    }

    /// Extreme party response `lambda XOR tau * input`.
    pub fn extreme_output(lambda: u8, tau: u8, input: u8) -> u8 {
        lambda ^ (tau & input)
    }

    /// Bob's response `l1 l3 XOR l2 l3`; ignores his input.
    pub fn bob_output(l: [u8; 3]) -> u8 {
        (l[0] & l[2]) ^ (l[1] & l[2])
    }

    /// Charlie's response `l2 XOR l1 l3`; ignores his input.
    pub fn charlie_output(l: [u8; 3]) -> u8 {
        l[1] ^ (l[0] & l[2])
    }
}

/// Exact behavior of the model, summing over all `lambda` and `tau`.
pub fn appendix_b_behavior(m: AppendixBModel) -> Behavior {
    Behavior::from_fn(3, |inp, out| {
        // party order A B C D T
        let (x, w, u) = (inp[0], inp[3], inp[4]);
        let mut p = 0.0;
        for lam in 0..8u8 {
            let l = [lam >> 2 & 1, lam >> 1 & 1, lam & 1];
            let wl: f64 = l.iter().map(|&v| m.lambda_weight(v)).product();
            if wl == 0.0 {
                continue;
            }
            if out[1] != AppendixBModel::bob_output(l) || out[2] != AppendixBModel::charlie_output(l) {
                continue;
            }
            for tau in 0..8u8 {
                let t = [tau >> 2 & 1, tau >> 1 & 1, tau & 1];
                let hit = out[0] == AppendixBModel::extreme_output(l[0], t[0], x)
                    && out[3] == AppendixBModel::extreme_output(l[1], t[1], w)
                    && out[4] == AppendixBModel::extreme_output(l[2], t[2], u);
                if hit {
                    p += wl * t.iter().map(|&v| m.tau_weight(v)).product::<f64>();
                }
            }
        }
        p
    })
}

/// Each party's output as a function of its binary input: `outputs[p] = [f(0), f(1)]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub outputs: Vec<[u8; 2]>,
}

impl DeterministicStrategy {
    /// Strategy number `index` for `parties` parties; party 0 uses the top two bits.
    pub fn from_index(parties: usize, index: usize) -> Self {
        let outputs = (0..parties)
            .map(|p| {
                let code = index >> (2 * (parties - 1 - p)) & 3;
                [(code >> 1) as u8, (code & 1) as u8]
            })
            .collect();
        Self { outputs }
    }

    pub fn num_parties(&self) -> usize {
        self.outputs.len()
    }

    /// Behavior of the strategy in the `n`-local scenario with `2n - 1` parties.
    pub fn behavior(&self, n: usize) -> Result<Behavior> {
        self.check(n)?;
        Ok(Behavior::from_fn(n, |inp, out| {
            let hit = self.outputs.iter().zip(inp).zip(out).all(|((f, &i), &o)| f[i as usize] == o);
            if hit {
                1.0
            } else {
                0.0
            }
        }))
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.outputs.len() != 2 * n - 1 || self.outputs.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidParameter(format!(
                "strategy for {} parties, scenario has {}",
                self.outputs.len(),
                2 * n - 1
            )));
        }
        Ok(())
    }

    /// `(I_{.,0}, I_{.,1})` computed from the product correlators directly.
    pub fn i_values(&self, n: usize) -> Result<[Vec<f64>; 2]> {
        self.check(n)?;
        let sign = |p: usize, i: u8| if self.outputs[p][i as usize] == 0 { 1.0 } else { -1.0 };
        // extreme parties sit at party positions 0 and n..2n-1
        let ext: Vec<usize> = std::iter::once(0).chain(n..2 * n - 1).collect();
        let ext_sums: Vec<[f64; 2]> = ext
            .iter()
            .map(|&p| [(sign(p, 0) + sign(p, 1)) / 2.0, (sign(p, 0) - sign(p, 1)) / 2.0])
            .collect();
        let m = 1usize << (n - 1);
        let mut out = [vec![0.0; m], vec![0.0; m]];
        for (k, slot) in out.iter_mut().enumerate() {
            let e: f64 = ext_sums.iter().map(|v| v[k]).product();
            for (y, v) in slot.iter_mut().enumerate() {
                let b: f64 = (0..n - 1)
                    .map(|j| sign(1 + j, (y >> (n - 2 - j) & 1) as u8))
                    .product();
                *v = e * b;
            }
        }
        Ok(out)
    }
}

/// Exact maximum of the chosen score over all `4^{2n-1}` deterministic strategies.
pub fn enumerate_deterministic_n(n: usize, kind: ScoreKind, exec: Execution) -> Result<(f64, DeterministicStrategy)> {
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!("n = {n}")));
    }
    let parties = 2 * n - 1;
    let count = 1usize << (2 * parties);
    let scores = map_collect(exec, (0..count).collect(), |idx| {
        let s = DeterministicStrategy::from_index(parties, idx);
        let [i0, i1] = s.i_values(n).unwrap();
        score_from_i_values(kind, n, &i0, &i1).0
    });
    let (best, idx) = scores
        .iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |acc, (i, &v)| if v > acc.0 { (v, i) } else { acc });
    Ok((best, DeterministicStrategy::from_index(parties, idx)))
}

/// The five-party case.
pub fn enumerate_deterministic(kind: ScoreKind, exec: Execution) -> (f64, DeterministicStrategy) {
    enumerate_deterministic_n(3, kind, exec).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{i_value, local_score, nlocal_i_value, nlocal_score, trilocal_score};

    #[test]
    fn model_reaches_the_bound() {
        for k in 0..=20 {
            let r = k as f64 / 20.0;
            let b = appendix_b_behavior(AppendixBModel::new(r).unwrap());
            b.check(1e-12).unwrap();
            for i in 0..4u8 {
                let i0 = i_value(&b, i >> 1, i & 1, 0).unwrap().value;
                let i1 = i_value(&b, i >> 1, i & 1, 1).unwrap().value;
                assert!((i0 - r.powi(3)).abs() < 1e-12);
                assert!((i1 - (1.0 - r).powi(3)).abs() < 1e-12);
            }
            assert!((trilocal_score(&b).unwrap().score - 1.0).abs() < 1e-12);
            let loc = local_score(&b).unwrap().score;
            assert!((loc - (r.powi(3) + (1.0 - r).powi(3))).abs() < 1e-12);
        }
        assert!(AppendixBModel::new(1.5).is_err());
    }

    #[test]
    fn deterministic_model_at_r_one() {
        let b = appendix_b_behavior(AppendixBModel::new(1.0).unwrap());
        assert!(b.probabilities().iter().all(|&p| p == 0.0 || p == 1.0));
        assert_eq!(local_score(&b).unwrap().score, 1.0);
    }

    #[test]
    fn behavior_factorizes_over_independent_sources() {
        // P = sum over lambda, tau of independent weights times product responses
        let m = AppendixBModel::new(0.3).unwrap();
        let b = appendix_b_behavior(m);
        let direct = Behavior::from_fn(3, |inp, out| {
            let pa = |x: u8, a: u8| (0..2u8).filter(|&t| AppendixBModel::extreme_output(0, t, x) == a).map(|t| m.tau_weight(t)).sum::<f64>();
            let bc = if out[1] == 0 && out[2] == 0 { 1.0 } else { 0.0 };
            pa(inp[0], out[0]) * bc * pa(inp[3], out[3]) * pa(inp[4], out[4])
        });
        for (x, y) in b.probabilities().iter().zip(direct.probabilities()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn vertex_enumeration() {
        let (loc, _) = enumerate_deterministic(ScoreKind::Local, Execution::Parallel);
        assert_eq!(loc, 1.0);
        let (tri, _) = enumerate_deterministic(ScoreKind::NLocal, Execution::Sequential);
        assert!(tri <= 1.0 + 1e-12);
        for n in [2, 4] {
            let (v, _) = enumerate_deterministic_n(n, ScoreKind::NLocal, Execution::Parallel).unwrap();
            assert!(v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn fast_i_values_match_behavior() {
        for idx in [0usize, 1, 77, 500, 1023] {
            let s = DeterministicStrategy::from_index(5, idx);
            let b = s.behavior(3).unwrap();
            b.check(0.0).unwrap();
            let [i0, i1] = s.i_values(3).unwrap();
            for y in 0..4 {
                let bits = [(y >> 1) as u8, (y & 1) as u8];
                assert_eq!(i0[y], nlocal_i_value(&b, &bits, 0).unwrap().value);
                assert_eq!(i1[y], nlocal_i_value(&b, &bits, 1).unwrap().value);
            }
            let sc = nlocal_score(&b).score;
            assert_eq!(sc, score_from_i_values(ScoreKind::NLocal, 3, &i0, &i1).0);
        }
    }

    #[test]
    fn every_vertex_is_normalized_and_no_signaling() {
        for idx in 0..1024 {
            let b = DeterministicStrategy::from_index(5, idx).behavior(3).unwrap();
            b.check(0.0).unwrap();
            for party in 0..5 {
                let own = |s: usize| s >> (4 - party) & 1;
                for s in 0..32 {
                    let ref_s = if own(s) == 1 { 1 << (4 - party) } else { 0 };
                    assert_eq!(b.marginal(party, s), b.marginal(party, ref_s));
                }
            }
        }
    }

    #[test]
    fn constant_strategy_pattern() {
        let s = DeterministicStrategy::from_index(5, 0);
        let [i0, i1] = s.i_values(3).unwrap();
        assert!(i0.iter().all(|&v| v == 1.0) && i1.iter().all(|&v| v == 0.0));
        let b = s.behavior(3).unwrap();
        assert_eq!(trilocal_score(&b).unwrap().score, 1.0);
        assert_eq!(local_score(&b).unwrap().score, 1.0);
    }
}
