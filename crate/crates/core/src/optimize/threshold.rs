//! Noise thresholds: the parameter value where the optimized trilocal score crosses 1.

use serde::{Deserialize, Serialize};

use super::{maximize_network, OptimizerConfig};
use crate::error::{Error, Result};
use crate::network::{Network, ScoreKind};
use crate::states::StateFamily;

/// Scalar-parametrized noisy GHZ families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisyFamily {
    /// Parameter `epsilon`, the GHZ weight; clean at 1.
    Depolarized,
    /// Parameter `gamma`; clean at 0.
    AmplitudeDamped,
    /// Parameter `gamma`; clean at 0.
    PhaseDamped,
}

impl NoisyFamily {
    pub fn parameter(&self) -> &'static str {
        match self {
            NoisyFamily::Depolarized => "epsilon",
            _ => "gamma",
        }
    }

    pub fn at(&self, t: f64) -> StateFamily {
        match self {
            NoisyFamily::Depolarized => StateFamily::Depolarized { epsilon: t },
            NoisyFamily::AmplitudeDamped => StateFamily::AmplitudeDamped { gamma: t },
            NoisyFamily::PhaseDamped => StateFamily::PhaseDamped { gamma: t },
        }
    }

    pub fn clean_value(&self) -> f64 {
        match self {
            NoisyFamily::Depolarized => 1.0,
            _ => 0.0,
        }
    }

    /// Per-source visibility: `epsilon`, or `1 - gamma` for the damping channels.
    pub fn visibility(&self, t: f64) -> f64 {
        match self {
            NoisyFamily::Depolarized => t,
            _ => 1.0 - t,
        }
    }
}

/// Which sources carry the noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VaryMode {
    /// Every source at the scanned parameter.
    #[default]
    Joint,
    /// Source 1 at the scanned parameter, the others clean.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub family: NoisyFamily,
    pub mode: VaryMode,
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    /// Target bracket width.
    pub width: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            family: NoisyFamily::Depolarized,
            mode: VaryMode::Joint,
            lo: 0.0,
            hi: 1.0,
            grid_points: 11,
            width: 1e-4,
        }
    }
}

impl ThresholdConfig {
    pub fn for_family(family: NoisyFamily) -> Self {
        Self {
            family,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub parameter: String,
    pub family: NoisyFamily,
    pub mode: VaryMode,
    /// Midpoint of the final bracket.
    pub critical: f64,
    /// Bracket end where the score is at most 1.
    pub no_violation_end: f64,
    /// Bracket end where the score exceeds 1.
    pub violation_end: f64,
    pub width: f64,
    pub score_no_violation: f64,
    pub score_violation: f64,
    /// Product of per-source visibilities at `critical`.
    pub product_visibility: f64,
    /// `(parameter, score)` on the coarse grid.
    pub grid: Vec<(f64, f64)>,
}

fn network(family: NoisyFamily, mode: VaryMode, t: f64) -> Result<Network> {
    let noisy = family.at(t).source_state(3)?;
    match mode {
        VaryMode::Joint => Network::identical(noisy, 3),
        VaryMode::Single => {
            let clean = family.at(family.clean_value()).source_state(3)?;
            Network::trilocal(noisy, clean.clone(), clean)
        }
    }
}

fn score(tc: &ThresholdConfig, cfg: &OptimizerConfig, t: f64) -> Result<f64> {
    Ok(maximize_network(&network(tc.family, tc.mode, t)?, ScoreKind::NLocal, cfg)?.score)
}

/// Grid scan then bisection on `score - 1`.
pub fn visibility_threshold(tc: &ThresholdConfig, cfg: &OptimizerConfig) -> Result<ThresholdResult> {
    cfg.validate()?;
    let ordered = tc.lo < tc.hi && tc.width > 0.0;
    if !ordered || tc.grid_points < 2 {
        return Err(Error::InvalidParameter("threshold scan needs lo < hi, >= 2 grid points, width > 0".into()));
    }
    let mut grid = Vec::with_capacity(tc.grid_points);
    for k in 0..tc.grid_points {
        let t = tc.lo + (tc.hi - tc.lo) * k as f64 / (tc.grid_points - 1) as f64;
        grid.push((t, score(tc, cfg, t)?));
    }
    let diffs: Vec<f64> = grid.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let up = diffs.iter().all(|d| *d >= -1e-6);
    let down = diffs.iter().all(|d| *d <= 1e-6);
    if !up && !down {
        return Err(Error::NotMonotone(format!(
            "score is not monotone in {} on the scan grid",
            tc.family.parameter()
        )));
    }
    let cell = grid
        .windows(2)
        .position(|w| (w[0].1 > 1.0) != (w[1].1 > 1.0))
        .ok_or(Error::NoBracket)?;
    let (mut a, mut sa) = grid[cell];
    let (mut b, mut sb) = grid[cell + 1];
    while (b - a).abs() > tc.width {
        let m = 0.5 * (a + b);
        let sm = score(tc, cfg, m)?;
        if (sm > 1.0) == (sa > 1.0) {
            (a, sa) = (m, sm);
        } else {
            (b, sb) = (m, sm);
        }
    }
    let ((nv, snv), (v, sv)) = if sa > 1.0 { ((b, sb), (a, sa)) } else { ((a, sa), (b, sb)) };
    let critical = 0.5 * (a + b);
    let vis = tc.family.visibility(critical);
    let product_visibility = match tc.mode {
        VaryMode::Joint => vis.powi(3),
        VaryMode::Single => vis,
    };
    Ok(ThresholdResult {
        parameter: tc.family.parameter().to_string(),
        family: tc.family,
        mode: tc.mode,
        critical,
        no_violation_end: nv,
        violation_end: v,
        width: (b - a).abs(),
        score_no_violation: snv,
        score_violation: sv,
        product_visibility,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            ..Default::default()
        }
    }

    #[test]
    fn depolarized_single_source_threshold() {
        let tc = ThresholdConfig {
            mode: VaryMode::Single,
            width: 1e-3,
            ..ThresholdConfig::for_family(NoisyFamily::Depolarized)
        };
        let r = visibility_threshold(&tc, &quick()).unwrap();
        assert!((r.product_visibility - 0.5).abs() < 2e-3, "{r:?}");
        assert!(r.score_no_violation <= 1.0 && r.score_violation > 1.0);
        assert!(r.width <= 1e-3);
    }

    #[test]
    fn no_bracket_is_reported() {
        let tc = ThresholdConfig {
            lo: 0.0,
            hi: 0.5,
            grid_points: 3,
            ..ThresholdConfig::for_family(NoisyFamily::Depolarized)
        };
        assert!(matches!(visibility_threshold(&tc, &quick()), Err(Error::NoBracket)));
        let bad = ThresholdConfig { lo: 1.0, hi: 0.0, ..Default::default() };
        assert!(visibility_threshold(&bad, &quick()).is_err());
    }
}
