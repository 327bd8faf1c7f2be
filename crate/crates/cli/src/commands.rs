use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use trilocal_core::analysis::{negativity, separability_check, bell_evaluate, BellFunctional, TripartiteBehavior};
use trilocal_core::exec::map_collect;
use trilocal_core::lhv::{appendix_b_behavior, enumerate_deterministic, AppendixBModel};
use trilocal_core::measurements::{default_intermediate_settings, BlochObservable};
use trilocal_core::network::{i_value, local_score, trilocal_score, Network, ScoreKind};
use trilocal_core::optimize::{closed_form_bound, maximize_nlocal, visibility_threshold, OptimizeResult};
use trilocal_core::{Error, Result};

use crate::config::{parse_enum, Config, ConfigError};

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

pub type Outcome = std::result::Result<Vec<Value>, Failure>;

fn verdict(violated: bool) -> &'static str {
    if violated {
        "violation"
    } else {
        "no violation found"
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// The 2^(n-1) values of each I family, labelled by their index tuple.
fn labelled_i_values(r: &OptimizeResult) -> Value {
    let bits = r.n - 1;
    let label = |y: usize| (0..bits).map(|j| ((y >> (bits - 1 - j)) & 1).to_string()).collect::<String>();
    let family = |v: &[f64]| -> Value {
        v.iter()
            .enumerate()
            .map(|(y, x)| (label(y), json!(x)))
            .collect::<serde_json::Map<_, _>>()
            .into()
    };
    json!({ "k0": family(&r.i0), "k1": family(&r.i1) })
}

fn optimum(r: &OptimizeResult) -> Value {
    json!({
        "score": r.score,
        "verdict": verdict(r.violated),
        "argmax_i": r.argmax_i,
        "argmax_j": r.argmax_j,
        "i_values": labelled_i_values(r),
        "settings": to_value(&r.settings),
        "best_restart": r.best_restart,
        "evaluations": r.evaluations,
    })
}

pub fn violation(cfg: &Config) -> Outcome {
    let fam = cfg.family()?;
    let opt = cfg.optimizer()?;
    let tri = maximize_nlocal(3, &fam, ScoreKind::NLocal, &opt)?;
    let loc = maximize_nlocal(3, &fam, ScoreKind::Local, &opt)?;
    Ok(vec![json!({
        "family": to_value(&fam),
        "closed_form_bound": closed_form_bound(&fam).ok(),
        "trilocal": optimum(&tri),
        "local": optimum(&loc),
    })])
}

/// One scan row; also the CSV record.
#[derive(Debug, Serialize)]
pub struct ScanRow {
    pub parameter: String,
    pub value: f64,
    pub score: f64,
    pub local_score: f64,
    pub bound: Option<f64>,
    pub violated: bool,
}

pub fn scan(cfg: &Config) -> std::result::Result<(Vec<Value>, Vec<ScanRow>), Failure> {
    let name = cfg.parameter.clone().ok_or_else(|| Failure::Config("scan needs parameter".into()))?;
    let (from, to) = match (cfg.from, cfg.to) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Failure::Config("scan needs from and to".into())),
    };
    let steps = cfg.steps.unwrap_or(11);
    if steps < 2 {
        return Err(Failure::Config("steps must be at least 2".into()));
    }
    let opt = cfg.optimizer()?;
    let mut points = Vec::with_capacity(steps);
    for k in 0..steps {
        let v = from + (to - from) * k as f64 / (steps - 1) as f64;
        let mut c = cfg.clone();
        c.set_parameter(&name, v)?;
        points.push((v, c.family()?));
    }
    let rows: Vec<Result<ScanRow>> = map_collect(opt.execution, points, |(value, fam)| {
        let tri = maximize_nlocal(3, &fam, ScoreKind::NLocal, &opt)?;
        let loc = maximize_nlocal(3, &fam, ScoreKind::Local, &opt)?;
        Ok(ScanRow {
            parameter: name.clone(),
            value,
            score: tri.score,
            local_score: loc.score,
            bound: closed_form_bound(&fam).ok(),
            violated: tri.violated,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((rows.iter().map(to_value).collect(), rows))
}

pub fn write_csv(path: &Path, rows: &[ScanRow]) -> std::result::Result<(), Failure> {
    let io = |e: csv::Error| Failure::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

pub fn threshold(cfg: &mut Config) -> Outcome {
    let tc = cfg.threshold()?;
    let opt = cfg.optimizer()?;
    Ok(vec![to_value(&visibility_threshold(&tc, &opt)?)])
}

pub fn swap(cfg: &Config) -> Outcome {
    let fam = cfg.family()?;
    let net = Network::identical(fam.source_state(3)?, 3)?;
    let ops = net.conditional_operators(&default_intermediate_settings(3))?;
    let functional = match &cfg.functional {
        Some(p) => Some(BellFunctional::load(Path::new(p)).map_err(|e| Failure::Config(format!("{p}: {e}")))?),
        None => None,
    };
    let phis = cfg.bell_phis.clone().unwrap_or_else(|| vec![PI / 2.0, PI, PI / 2.0, PI, PI / 2.0, PI]);
    if phis.len() != 6 {
        return Err(Failure::Config(format!("bell-phis needs 6 angles, got {}", phis.len())));
    }
    let obs: [[BlochObservable; 2]; 3] =
        std::array::from_fn(|p| [BlochObservable::equatorial(phis[2 * p]), BlochObservable::equatorial(phis[2 * p + 1])]);
    let mut out = Vec::with_capacity(16);
    for (y, b, z, c) in (0..16u8).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1)) {
        let mut row = json!({ "y": y, "b": b, "z": z, "c": c });
        match ops.swapped_state(&[y, z], &[b, c]) {
            Ok((chi, p)) => {
                let neg: Vec<f64> = (0..3).map(|q| negativity(&chi, 3, &[q])).collect::<Result<_>>()?;
                row["probability"] = json!(p);
                row["negativity"] = json!({ "A|DT": neg[0], "D|AT": neg[1], "T|AD": neg[2] });
                row["separability"] = to_value(&separability_check(&chi)?);
                if let Some(f) = &functional {
                    let (value, violated) = bell_evaluate(&TripartiteBehavior::from_state(&chi, &obs)?, f)?;
                    row["bell"] = json!({ "value": value, "bound": f.bound, "violated": violated });
                }
            }
            Err(Error::NullEvent(p)) => {
                row["probability"] = json!(p);
                row["null_event"] = json!(true);
            }
            Err(e) => return Err(e.into()),
        }
        out.push(row);
    }
    Ok(out)
}

pub fn lhv_check(cfg: &mut Config) -> Outcome {
    let step = *cfg.r_step.get_or_insert(0.05);
    if !(step > 0.0 && step <= 1.0) {
        return Err(Failure::Config(format!("r-step = {step} outside (0, 1]")));
    }
    let count = (1.0 / step).round() as usize;
    let mut out = Vec::with_capacity(count + 2);
    for k in 0..=count {
        let r = (k as f64 * step).min(1.0);
        let b = appendix_b_behavior(AppendixBModel::new(r)?);
        let mut dev: f64 = 0.0;
        for i in 0..4u8 {
            dev = dev.max((i_value(&b, i >> 1, i & 1, 0)?.value - r.powi(3)).abs());
            dev = dev.max((i_value(&b, i >> 1, i & 1, 1)?.value - (1.0 - r).powi(3)).abs());
        }
        out.push(json!({
            "r": r,
            "trilocal_score": trilocal_score(&b)?.score,
            "local_score": local_score(&b)?.score,
            "i_value_deviation": dev,
        }));
    }
    let opt = cfg.optimizer()?;
    let (loc, _) = enumerate_deterministic(ScoreKind::Local, opt.execution);
    let (tri, _) = enumerate_deterministic(ScoreKind::NLocal, opt.execution);
    out.push(json!({ "deterministic_vertices": 1024, "max_local_score": loc, "max_trilocal_score": tri }));
    Ok(out)
}

pub fn nlocal(cfg: &mut Config) -> Outcome {
    let n = *cfg.n.get_or_insert(3);
    let kind_name = cfg.kind.get_or_insert_with(|| "n-local".into()).clone();
    let kind: ScoreKind = parse_enum("kind", &kind_name)?;
    let fam = cfg.family()?;
    let r = maximize_nlocal(n, &fam, kind, &cfg.optimizer()?)?;
    Ok(vec![json!({ "n": n, "kind": kind_name, "family": to_value(&fam), "optimum": optimum(&r) })])
}
