//! Run configuration: a JSON file merged with command-line flags of the same name.

use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};
use trilocal_core::exec::Execution;
use trilocal_core::optimize::{MeasurementClass, NoisyFamily, OptimizerConfig, ThresholdConfig, VaryMode};
use trilocal_core::states::{StateFamily, DEFAULT_PRODUCT_QUBIT};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "TRILOCAL_THREADS";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Every field is optional; unset fields fall back to defaults at resolve time.
/// JSON keys and flag names coincide (`max-iter` in the file, `--max-iter` on the command line).
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    /// Source family: gghz, biseparable, ghz-symmetric, depolarized, amplitude-damped, phase-damped, ghz, product.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_phase: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_qubit: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,

    /// Number of parties per source (nlocal only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Score to maximize: n-local or local.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// equatorial or bloch.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement_class: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_groupings: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unbalanced: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_cross_product: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_cap: Option<usize>,
    /// parallel or sequential.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub execution: Option<String>,
    /// Worker threads; defaults to $TRILOCAL_THREADS, then the number of CPUs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// Scanned family parameter (scan).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Also write scan rows as CSV to this path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,

    /// joint or single (threshold).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,

    /// Bell functional file evaluated on every swapped state (swap).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    /// Equatorial angles `[A0, A1, D0, D1, T0, T1]` for the functional (swap).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bell_phis: Option<Vec<f64>>,

    /// Spacing of the r grid (lhv-check).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_step: Option<f64>,

    /// Report path; stdout when unset.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// `self.field = other.field` wherever `other` sets it.
macro_rules! overlay {
    ($dst:expr, $src:expr; $($f:ident),* $(,)?) => {
        $(if $src.$f.is_some() { $dst.$f = $src.$f.clone(); })*
    };
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Flags win over the file.
    pub fn overlay(&mut self, flags: &Config) {
        overlay!(self, flags;
            family, alpha, eta, sigma1, sigma_phase, product_qubit, p1, p2, epsilon, gamma,
            n, kind, restarts, max_iter, tol, seed, measurement_class, search_groupings, unbalanced,
            full_cross_product, component_cap, execution, threads,
            parameter, from, to, steps, csv, mode, lo, hi, grid_points, width,
            functional, bell_phis, r_step, output,
        );
    }

    /// Fills the optimizer and thread fields with their defaults so reports
    /// record every value that was used.
    pub fn resolve_common(&mut self) -> Result<(), ConfigError> {
        let d = OptimizerConfig::default();
        self.restarts.get_or_insert(d.restarts);
        self.max_iter.get_or_insert(d.max_iter);
        self.tol.get_or_insert(d.tol);
        self.seed.get_or_insert(d.seed);
        self.measurement_class.get_or_insert_with(|| enum_name(&d.measurement_class));
        self.search_groupings.get_or_insert(d.search_groupings);
        self.unbalanced.get_or_insert(d.unbalanced);
        self.full_cross_product.get_or_insert(d.full_cross_product);
        self.component_cap.get_or_insert(d.component_cap);
        self.execution.get_or_insert_with(|| enum_name(&d.execution));
        if self.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                let t = v
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("{THREADS_ENV} = {v:?} is not a thread count")))?;
                self.threads = Some(t);
            }
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig, ConfigError> {
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed.unwrap_or(d.seed),
            search_groupings: self.search_groupings.unwrap_or(d.search_groupings),
            full_cross_product: self.full_cross_product.unwrap_or(d.full_cross_product),
            unbalanced: self.unbalanced.unwrap_or(d.unbalanced),
            measurement_class: match &self.measurement_class {
                Some(s) => parse_enum::<MeasurementClass>("measurement-class", s)?,
                None => d.measurement_class,
            },
            execution: match &self.execution {
                Some(s) => parse_enum::<Execution>("execution", s)?,
                None => d.execution,
            },
            component_cap: self.component_cap.unwrap_or(d.component_cap),
        };
        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }

    fn need(&self, name: &str, v: Option<f64>) -> Result<f64, ConfigError> {
        v.ok_or_else(|| bad(format!("family {} needs {name}", self.family.as_deref().unwrap_or("?"))))
    }

    pub fn family(&self) -> Result<StateFamily, ConfigError> {
        let name = self.family.as_deref().ok_or_else(|| bad("no family given"))?;
        Ok(match name {
            "gghz" => StateFamily::Gghz {
                alpha: self.need("alpha", self.alpha)?,
            },
            "biseparable" => StateFamily::Biseparable {
                eta: self.need("eta", self.eta)?,
                sigma1: self.need("sigma1", self.sigma1)?,
                sigma_phase: self.sigma_phase.unwrap_or(0.0),
                product_qubit: self.product_qubit.unwrap_or(DEFAULT_PRODUCT_QUBIT),
            },
            "ghz-symmetric" => StateFamily::GhzSymmetric {
                p1: self.need("p1", self.p1)?,
                p2: self.need("p2", self.p2)?,
            },
            "depolarized" => StateFamily::Depolarized {
                epsilon: self.need("epsilon", self.epsilon)?,
            },
            "amplitude-damped" => StateFamily::AmplitudeDamped {
                gamma: self.need("gamma", self.gamma)?,
            },
            "phase-damped" => StateFamily::PhaseDamped {
                gamma: self.need("gamma", self.gamma)?,
            },
            "ghz" => StateFamily::Ghz,
            "product" => StateFamily::Product,
            other => return Err(bad(format!("unknown family {other:?}"))),
        })
    }

    /// Sets a family parameter by name, for scans.
    pub fn set_parameter(&mut self, name: &str, v: f64) -> Result<(), ConfigError> {
        let slot = match name {
            "alpha" => &mut self.alpha,
            "eta" => &mut self.eta,
            "sigma1" => &mut self.sigma1,
            "sigma-phase" => &mut self.sigma_phase,
            "p1" => &mut self.p1,
            "p2" => &mut self.p2,
            "epsilon" => &mut self.epsilon,
            "gamma" => &mut self.gamma,
            other => return Err(bad(format!("{other:?} is not a scannable parameter"))),
        };
        *slot = Some(v);
        Ok(())
    }

    pub fn noisy_family(&self) -> Result<NoisyFamily, ConfigError> {
        match self.family.as_deref() {
            Some("depolarized") | None => Ok(NoisyFamily::Depolarized),
            Some("amplitude-damped") => Ok(NoisyFamily::AmplitudeDamped),
            Some("phase-damped") => Ok(NoisyFamily::PhaseDamped),
            Some(other) => Err(bad(format!("threshold needs a noisy family, got {other:?}"))),
        }
    }

    pub fn threshold(&mut self) -> Result<ThresholdConfig, ConfigError> {
        let family = self.noisy_family()?;
        self.family = Some(enum_name(&family));
        let d = ThresholdConfig::for_family(family);
        let tc = ThresholdConfig {
            family,
            mode: match &self.mode {
                Some(s) => parse_enum::<VaryMode>("mode", s)?,
                None => d.mode,
            },
            lo: *self.lo.get_or_insert(d.lo),
            hi: *self.hi.get_or_insert(d.hi),
            grid_points: *self.grid_points.get_or_insert(d.grid_points),
            width: *self.width.get_or_insert(d.width),
        };
        self.mode = Some(enum_name(&tc.mode));
        Ok(tc)
    }
}

/// Parses a unit enum through its serde name.
pub fn parse_enum<T: serde::de::DeserializeOwned>(field: &str, s: &str) -> Result<T, ConfigError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| bad(format!("{field}: unknown value {s:?}")))
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enum"),
    }
}
