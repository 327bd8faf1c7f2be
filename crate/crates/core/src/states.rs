//! Source-state families and single-qubit noise channels.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, kron_all, permute_state, ComplexMatrix, QubitPermutation, StateVector};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const PARAM_TOL: f64 = 1e-12;

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// `cos(alpha)|000> + sin(alpha)|111>`, alpha in `[0, pi/4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GghzParams {
    alpha: f64,
}

impl GghzParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(-PARAM_TOL..=FRAC_PI_4 + PARAM_TOL).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, pi/4]")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn gghz_state(p: GghzParams) -> StateVector {
    let mut amps = [0.0; 8];
    amps[0] = p.alpha.cos();
    amps[7] = p.alpha.sin();
    StateVector::from_real(&amps).unwrap()
}

/// `(cos(eta)|00> + sin(eta)|11>) (x) (sigma1|0> + sigma2|1>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiseparableParams {
    eta: f64,
    sigma1: Complex64,
    sigma2: Complex64,
}

impl BiseparableParams {
    pub fn new(eta: f64, sigma1: Complex64, sigma2: Complex64) -> Result<Self> {
        if !(-PARAM_TOL..=FRAC_PI_4 + PARAM_TOL).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta = {eta} outside [0, pi/4]")));
        }
        let norm = sigma1.norm_sqr() + sigma2.norm_sqr();
        if (norm - 1.0).abs() > PARAM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|sigma1|^2 + |sigma2|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { eta, sigma1, sigma2 })
    }

    /// Real, non-negative amplitudes with `sigma2 = sqrt(1 - sigma1^2)`.
    pub fn real(eta: f64, sigma1: f64) -> Result<Self> {
        check_unit_interval("sigma1", sigma1)?;
        let s2 = (1.0 - sigma1 * sigma1).max(0.0).sqrt();
        Self::new(eta, Complex64::new(sigma1, 0.0), Complex64::new(s2, 0.0))
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn sigma1(&self) -> Complex64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> Complex64 {
        self.sigma2
    }
}

pub fn biseparable_state(p: BiseparableParams) -> StateVector {
    let pair = StateVector::from_real(&[p.eta.cos(), 0.0, 0.0, p.eta.sin()]).unwrap();
    let single = StateVector::new(vec![p.sigma1, p.sigma2]).unwrap();
    pair.kron(&single)
}

/// Parameters of the GHZ-symmetric family, validated against positivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzSymmetricParams {
    p1: f64,
    p2: f64,
}

impl GhzSymmetricParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let lo = -1.0 / (4.0 * SQRT_3);
        let hi = SQRT_3 / 4.0;
        if p2 < lo - PARAM_TOL || p2 > hi + PARAM_TOL {
            return Err(Error::InvalidParameter(format!(
                "p2 = {p2} outside [{lo}, {hi}]"
            )));
        }
        let bound = 0.125 + SQRT_3 / 2.0 * p2;
        if p1.abs() > bound + PARAM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|p1| = {} exceeds 1/8 + sqrt(3)/2 p2 = {bound}",
                p1.abs()
            )));
        }
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// Weights of `|GHZ+><GHZ+|`, `|GHZ-><GHZ-|` and `I/8`.
    pub fn weights(&self) -> (f64, f64, f64) {
        let a = 2.0 * self.p2 / SQRT_3;
        (a + self.p1, a - self.p1, 1.0 - 4.0 * self.p2 / SQRT_3)
    }
}

pub fn ghz_plus() -> StateVector {
    ghz_n_state(3).unwrap()
}

pub fn ghz_minus() -> StateVector {
    let mut amps = [0.0; 8];
    amps[0] = FRAC_1_SQRT_2;
    amps[7] = -FRAC_1_SQRT_2;
    StateVector::from_real(&amps).unwrap()
}

/// `(|0..0> + |1..1>)/sqrt(2)` on `n >= 2` qubits.
pub fn ghz_n_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ state needs n >= 2, got {n}")));
    }
    let mut amps = vec![0.0; 1 << n];
    amps[0] = FRAC_1_SQRT_2;
    amps[(1 << n) - 1] = FRAC_1_SQRT_2;
    StateVector::from_real(&amps)
}

pub fn ghz_symmetric_state(p: GhzSymmetricParams) -> Result<ComplexMatrix> {
    let (wp, wm, wi) = p.weights();
    let mut rho = ComplexMatrix::identity(8).scale(wi / 8.0);
    rho.add_scaled(&ghz_plus().projector(), wp);
    rho.add_scaled(&ghz_minus().projector(), wm);
    // spectral cross-check of the closed-form positivity constraints
    let ev = hermitian_eigenvalues(&rho)?;
    if ev[0] < -1e-10 {
        return Err(Error::InvalidParameter(format!(
            "GHZ-symmetric state has negative eigenvalue {}",
            ev[0]
        )));
    }
    Ok(rho)
}

/// `eps |GHZ+><GHZ+| + (1 - eps) I/8`.
pub fn depolarized_ghz(epsilon: f64) -> Result<ComplexMatrix> {
    depolarized_ghz_n(3, epsilon)
}

pub fn depolarized_ghz_n(n: usize, epsilon: f64) -> Result<ComplexMatrix> {
    check_unit_interval("epsilon", epsilon)?;
    let dim = 1 << n;
    let mut rho = ComplexMatrix::identity(dim).scale((1.0 - epsilon) / dim as f64);
    rho.add_scaled(&ghz_n_state(n)?.projector(), epsilon);
    Ok(rho)
}

/// Single-qubit Kraus operators with `sum K^dagger K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus set".into()));
        }
        let mut sum = ComplexMatrix::zeros(2, 2);
        for k in &operators {
            if k.rows() != 2 || k.cols() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    actual: k.rows(),
                });
            }
            sum = &sum + &(&k.dagger() * k);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(2));
        if dev > 1e-12 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }
}

pub fn amplitude_damping_kraus(gamma: f64) -> Result<KrausSet> {
    check_unit_interval("gamma", gamma)?;
    let w0 = ComplexMatrix::from_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let w1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
    KrausSet::new(vec![w0, w1])
}

pub fn phase_damping_kraus(gamma: f64) -> Result<KrausSet> {
    check_unit_interval("gamma", gamma)?;
    let q0 = ComplexMatrix::from_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let q1 = ComplexMatrix::from_diagonal(&[0.0, gamma.sqrt()]);
    KrausSet::new(vec![q0, q1])
}

fn embed(op: &ComplexMatrix, wire: usize, num_qubits: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (0..num_qubits)
        .map(|q| if q == wire { op } else { &id })
        .collect();
    kron_all(factors)
}

/// Sends every wire through the same channel, wires in ascending order.
pub fn apply_channel_per_qubit(rho: &ComplexMatrix, kraus: &KrausSet, num_qubits: usize) -> Result<ComplexMatrix> {
    if !rho.is_square() || rho.rows() != 1 << num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << num_qubits,
            actual: rho.rows(),
        });
    }
    let mut cur = rho.clone();
    for wire in 0..num_qubits {
        let mut next = ComplexMatrix::zeros(cur.rows(), cur.cols());
        for k in kraus.operators() {
            let full = embed(k, wire, num_qubits);
            let term = &(&full * &cur) * &full.dagger();
            next = &next + &term;
        }
        cur = next;
    }
    Ok(cur)
}

pub fn amplitude_damped_ghz(gamma: f64) -> Result<ComplexMatrix> {
    apply_channel_per_qubit(&ghz_plus().projector(), &amplitude_damping_kraus(gamma)?, 3)
}

pub fn phase_damped_ghz(gamma: f64) -> Result<ComplexMatrix> {
    apply_channel_per_qubit(&ghz_plus().projector(), &phase_damping_kraus(gamma)?, 3)
}

/// A source state, kept pure where possible.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceState {
    Pure(StateVector),
    Mixed(ComplexMatrix),
    /// Convex mixture of pure states with weights summing to one.
    Mixture(Vec<(f64, StateVector)>),
}

impl SourceState {
    pub fn num_qubits(&self) -> usize {
        match self {
            SourceState::Pure(psi) => psi.num_qubits(),
            SourceState::Mixed(rho) => rho.rows().trailing_zeros() as usize,
            SourceState::Mixture(parts) => parts[0].1.num_qubits(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, SourceState::Pure(_))
    }

    pub fn density(&self) -> ComplexMatrix {
        match self {
            SourceState::Pure(psi) => psi.projector(),
            SourceState::Mixed(rho) => rho.clone(),
            SourceState::Mixture(parts) => {
                let d = parts[0].1.dim();
                let mut rho = ComplexMatrix::zeros(d, d);
                for (w, psi) in parts {
                    rho.add_scaled(&psi.projector(), *w);
                }
                rho
            }
        }
    }

    /// Decomposition into weighted pure states (spectral for `Mixed`).
    pub fn components(&self) -> Result<Vec<(f64, StateVector)>> {
        match self {
            SourceState::Pure(psi) => Ok(vec![(1.0, psi.clone())]),
            SourceState::Mixture(parts) => Ok(parts.clone()),
            SourceState::Mixed(rho) => Ok(hermitian_eigen(rho)?
                .into_iter()
                .filter(|(w, _)| *w > 1e-14)
                .collect()),
        }
    }
}

/// Depolarized `n`-qubit GHZ as `eps` GHZ plus a uniform mixture of basis states.
pub fn depolarized_ghz_n_mixture(n: usize, epsilon: f64) -> Result<SourceState> {
    check_unit_interval("epsilon", epsilon)?;
    let mut parts = Vec::with_capacity((1 << n) + 1);
    if epsilon > 0.0 {
        parts.push((epsilon, ghz_n_state(n)?));
    }
    if epsilon < 1.0 {
        let w = (1.0 - epsilon) / (1 << n) as f64;
        parts.extend((0..1 << n).map(|i| (w, StateVector::basis(n, i))));
    }
    Ok(SourceState::Mixture(parts))
}

/// Named source families with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateFamily {
    Gghz {
        alpha: f64,
    },
    Biseparable {
        eta: f64,
        sigma1: f64,
        #[serde(default)]
        sigma_phase: f64,
        /// Source-order position of the unentangled qubit.
        #[serde(default = "default_product_qubit")]
        product_qubit: usize,
    },
    GhzSymmetric {
        p1: f64,
        p2: f64,
    },
    Depolarized {
        epsilon: f64,
    },
    AmplitudeDamped {
        gamma: f64,
    },
    PhaseDamped {
        gamma: f64,
    },
    /// `n`-qubit GHZ, noiseless.
    Ghz,
    /// `|0...0>`.
    Product,
}

/// The unentangled qubit sits in the middle by default: under the fixed
/// wiring that connects every extreme party to an intermediate one.
pub const DEFAULT_PRODUCT_QUBIT: usize = 1;

fn default_product_qubit() -> usize {
    DEFAULT_PRODUCT_QUBIT
}

impl StateFamily {
    /// Biseparable family point with real amplitudes and the default placement.
    pub fn biseparable(eta: f64, sigma1: f64) -> Self {
        StateFamily::Biseparable {
            eta,
            sigma1,
            sigma_phase: 0.0,
            product_qubit: DEFAULT_PRODUCT_QUBIT,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::Gghz { .. } => "gghz",
            StateFamily::Biseparable { .. } => "biseparable",
            StateFamily::GhzSymmetric { .. } => "ghz-symmetric",
            StateFamily::Depolarized { .. } => "depolarized",
            StateFamily::AmplitudeDamped { .. } => "amplitude-damped",
            StateFamily::PhaseDamped { .. } => "phase-damped",
            StateFamily::Ghz => "ghz",
            StateFamily::Product => "product",
        }
    }

    /// Source state on `n` qubits. Only GHZ, depolarized and product
    /// families exist for `n != 3`.
    pub fn source_state(&self, n: usize) -> Result<SourceState> {
        let needs_three = || -> Result<()> {
            if n != 3 {
                return Err(Error::Unsupported(format!(
                    "{} family is defined for three qubits only",
                    self.name()
                )));
            }
            Ok(())
        };
        match *self {
            StateFamily::Gghz { alpha } => {
                needs_three()?;
                Ok(SourceState::Pure(gghz_state(GghzParams::new(alpha)?)))
            }
            StateFamily::Biseparable {
                eta,
                sigma1,
                sigma_phase,
                product_qubit,
            } => {
                needs_three()?;
                if product_qubit > 2 {
                    return Err(Error::InvalidParameter(format!("product_qubit = {product_qubit} outside 0..3")));
                }
                let mut p = BiseparableParams::real(eta, sigma1)?;
                p.sigma2 *= Complex64::from_polar(1.0, sigma_phase);
                // the pair keeps its order, the single qubit moves to `product_qubit`
                let mut dest = vec![0, 1];
                for d in &mut dest {
                    if *d >= product_qubit {
                        *d += 1;
                    }
                }
                dest.push(product_qubit);
                let perm = QubitPermutation::new(dest)?;
                Ok(SourceState::Pure(permute_state(&biseparable_state(p), &perm)?))
            }
            StateFamily::GhzSymmetric { p1, p2 } => {
                needs_three()?;
                Ok(SourceState::Mixed(ghz_symmetric_state(GhzSymmetricParams::new(p1, p2)?)?))
            }
            StateFamily::Depolarized { epsilon } => {
                if epsilon == 1.0 {
                    Ok(SourceState::Pure(ghz_n_state(n)?))
                } else if n > 3 {
                    depolarized_ghz_n_mixture(n, epsilon)
                } else {
                    Ok(SourceState::Mixed(depolarized_ghz_n(n, epsilon)?))
                }
            }
            StateFamily::AmplitudeDamped { gamma } => {
                needs_three()?;
                Ok(SourceState::Mixed(amplitude_damped_ghz(gamma)?))
            }
            StateFamily::PhaseDamped { gamma } => {
                needs_three()?;
                Ok(SourceState::Mixed(phase_damped_ghz(gamma)?))
            }
            StateFamily::Ghz => Ok(SourceState::Pure(ghz_n_state(n)?)),
            StateFamily::Product => {
                if n < 2 {
                    return Err(Error::InvalidParameter(format!("n = {n}")));
                }
                Ok(SourceState::Pure(StateVector::basis(n, 0)))
            }
        }
    }
}
