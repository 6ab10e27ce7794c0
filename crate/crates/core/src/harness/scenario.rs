//! Parameter sweeps over protocols and seeds.

use rayon::prelude::*;
use thiserror::Error;

use crate::mac::run_metrics;
use crate::metrics::{avg_service_time, throughput};
use crate::model::config::parse_kv_lines;
use crate::model::{ConfigError, Protocol, SimConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (presets: fig4, fig5, fig6, fig7, fig8)")]
    UnknownPreset(String),
    #[error("swept parameter `{0}` is not a config field")]
    BadSweepParam(String),
    #[error("scenario needs at least one {0}")]
    Empty(&'static str),
    #[error("sweep point {param} = {value}: {source}")]
    Point {
        param: String,
        value: String,
        source: ConfigError,
    },
    #[error("scenario file: {0}")]
    Spec(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub base: SimConfig,
    pub sweep: Sweep,
    pub protocols: Vec<Protocol>,
    pub seeds: Vec<u64>,
}

/// One `(protocol, sweep value, seed)` run, flattened for CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub protocol: Protocol,
    pub seed: u64,
    pub num_channels: usize,
    pub num_pairs: usize,
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub throughput_bps: f64,
    pub avg_service_time_s: Option<f64>,
    pub pu_su_collision_slots: u64,
    pub su_su_collision_slots: u64,
    pub handoffs: u64,
}

impl ResultRow {
    /// Numeric value of a CSV column, `None` for text columns or undefined values.
    pub fn numeric(&self, column: &str) -> Option<f64> {
        Some(match column {
            "seed" => self.seed as f64,
            "M" => self.num_channels as f64,
            "K" => self.num_pairs as f64,
            "lambda_p" => self.lambda_p,
            "lambda_s" => self.lambda_s,
            "throughput_bps" => self.throughput_bps,
            "avg_service_time_s" => return self.avg_service_time_s,
            "pu_su_collision_slots" => self.pu_su_collision_slots as f64,
            "su_su_collision_slots" => self.su_su_collision_slots as f64,
            "handoffs" => self.handoffs as f64,
            _ => return None,
        })
    }

    /// Textual value of any CSV column.
    pub fn text(&self, column: &str) -> Option<String> {
        match column {
            "scenario" => Some(self.scenario.clone()),
            "protocol" => Some(self.protocol.to_string()),
            "avg_service_time_s" => Some(
                self.avg_service_time_s
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            ),
            "seed" => Some(self.seed.to_string()),
            "M" => Some(self.num_channels.to_string()),
            "K" => Some(self.num_pairs.to_string()),
            "pu_su_collision_slots" => Some(self.pu_su_collision_slots.to_string()),
            "su_su_collision_slots" => Some(self.su_su_collision_slots.to_string()),
            "handoffs" => Some(self.handoffs.to_string()),
            c => self.numeric(c).map(|v| v.to_string()),
        }
    }
}

fn range(from: u64, to: u64, step: u64) -> Vec<String> {
    (from..=to)
        .step_by(step as usize)
        .map(|v| v.to_string())
        .collect()
}

/// Baseline defaults for every preset: 10^5 slots, `D = 10`, `t_h = 1`, `W = 1000`.
fn preset_base() -> SimConfig {
    SimConfig {
        num_channels: 10,
        num_pairs: 10,
        lambda_p: 5.0,
        lambda_s: 500.0,
        horizon: 100_000,
        data_phase_slots: 10,
        handoff_delay: 1,
        prob_window: 1_000,
        ..SimConfig::default()
    }
}

pub const PRESETS: [&str; 5] = ["fig4", "fig5", "fig6", "fig7", "fig8"];

pub fn preset(name: &str, seeds: usize) -> Result<ScenarioSpec, ScenarioError> {
    let base = preset_base();
    let all = vec![Protocol::GcsSrv, Protocol::Probability, Protocol::Random];
    let (sweep, protocols) = match name {
        "fig4" => (
            Sweep {
                param: "lambda_p".into(),
                values: range(1, 9, 1),
            },
            vec![Protocol::GcsSrv],
        ),
        "fig5" | "fig6" => (
            Sweep {
                param: "lambda_p".into(),
                values: range(1, 9, 1),
            },
            all,
        ),
        "fig7" => (
            Sweep {
                param: "num_pairs".into(),
                values: range(2, 20, 2),
            },
            all,
        ),
        "fig8" => (
            Sweep {
                param: "num_channels".into(),
                values: range(2, 30, 2),
            },
            all,
        ),
        other => return Err(ScenarioError::UnknownPreset(other.into())),
    };
    let base = match name {
        "fig7" => SimConfig {
            num_channels: 20,
            ..base
        },
        _ => base,
    };
    Ok(ScenarioSpec {
        name: name.into(),
        base,
        sweep,
        protocols,
        seeds: (1..=seeds as u64).collect(),
    })
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl ScenarioSpec {
    /// Reads a flat key-value scenario file. Besides config fields it accepts
    /// `name`, `sweep`, `values`, `protocols` and `seeds` (a count or a list).
    pub fn from_kv_text(text: &str) -> Result<ScenarioSpec, ScenarioError> {
        let mut spec = ScenarioSpec {
            name: "custom".into(),
            base: preset_base(),
            sweep: Sweep {
                param: String::new(),
                values: Vec::new(),
            },
            protocols: Protocol::ALL.to_vec(),
            seeds: (1..=10).collect(),
        };
        for (key, value, line) in parse_kv_lines(text)? {
            let at = |e: ConfigError| ConfigError::Syntax {
                line,
                message: e.to_string(),
            };
            match key.as_str() {
                "name" => spec.name = value,
                "sweep" => spec.sweep.param = value,
                "values" => spec.sweep.values = split_list(&value),
                "protocols" => {
                    spec.protocols = split_list(&value)
                        .iter()
                        .map(|p| p.parse::<Protocol>())
                        .collect::<Result<_, _>>()
                        .map_err(at)?
                }
                "seeds" => {
                    let items = split_list(&value);
                    let nums = items
                        .iter()
                        .map(|s| s.parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| {
                            at(ConfigError::BadValue {
                                key: "seeds".into(),
                                value: value.clone(),
                                reason: e.to_string(),
                            })
                        })?;
                    spec.seeds = match nums.as_slice() {
                        [n] => (1..=*n).collect(),
                        _ => nums,
                    };
                }
                _ => spec.base.set(&key, &value).map_err(at)?,
            }
        }
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        if self.seeds.is_empty() {
            return Err(ScenarioError::Empty("seed"));
        }
        if self.protocols.is_empty() {
            return Err(ScenarioError::Empty("protocol"));
        }
        if self.sweep.values.is_empty() {
            return Err(ScenarioError::Empty("sweep value"));
        }
        if self.sweep.param == "protocol" || self.sweep.param == "seed" {
            return Err(ScenarioError::BadSweepParam(self.sweep.param.clone()));
        }
        if SimConfig::default().get(&self.sweep.param).is_none() {
            return Err(ScenarioError::BadSweepParam(self.sweep.param.clone()));
        }
        Ok(())
    }

    /// Validated config of every run, in row order.
    pub fn points(&self) -> Result<Vec<SimConfig>, ScenarioError> {
        self.check()?;
        let mut out =
            Vec::with_capacity(self.protocols.len() * self.sweep.values.len() * self.seeds.len());
        for &protocol in &self.protocols {
            for value in &self.sweep.values {
                let point_err = |source: ConfigError| ScenarioError::Point {
                    param: self.sweep.param.clone(),
                    value: value.clone(),
                    source,
                };
                let mut cfg = self.base.clone();
                cfg.set(&self.sweep.param, value).map_err(point_err)?;
                cfg.protocol = protocol;
                for &seed in &self.seeds {
                    let cfg = SimConfig {
                        seed,
                        ..cfg.clone()
                    };
                    out.push(cfg.validate().map_err(point_err)?);
                }
            }
        }
        Ok(out)
    }
}

fn row_for(name: &str, cfg: &SimConfig) -> ResultRow {
    let m = run_metrics(cfg).expect("points are validated");
    ResultRow {
        scenario: name.into(),
        protocol: cfg.protocol,
        seed: cfg.seed,
        num_channels: cfg.num_channels,
        num_pairs: cfg.num_pairs,
        lambda_p: cfg.lambda_p,
        lambda_s: cfg.lambda_s,
        throughput_bps: throughput(&m, cfg),
        avg_service_time_s: avg_service_time(&m, cfg),
        pu_su_collision_slots: m.pu_su_collision_slots,
        su_su_collision_slots: m.su_su_collision_slots,
        handoffs: m.handoffs,
    }
}

/// Runs every point, in parallel, and returns rows ordered by protocol, then
/// sweep value, then seed.
///
/// A seed fixes the traffic of every sweep point it is used with, so points
/// along a sweep are compared on common random numbers.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<Vec<ResultRow>, ScenarioError> {
    let points = spec.points()?;
    Ok(points
        .par_iter()
        .map(|cfg| row_for(&spec.name, cfg))
        .collect())
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
