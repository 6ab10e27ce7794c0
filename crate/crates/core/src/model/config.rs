//! Scenario parameters and their flat `key = value` text form.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Channel-access protocol driven by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// Greedy channel selection with single-rendezvous split-phase coordination.
    GcsSrv,
    /// Uniformly random channel choice, reactive to PU arrivals.
    Random,
    /// Channel choice by observed idle probability, reactive to PU arrivals.
    Probability,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::GcsSrv, Protocol::Probability, Protocol::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::GcsSrv => "gcs_srv",
            Protocol::Random => "random",
            Protocol::Probability => "probability",
        }
    }

    /// Whether the protocol reads the PU schedule ahead of time.
    pub fn has_oracle(self) -> bool {
        matches!(self, Protocol::GcsSrv)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "gcs_srv" => Ok(Protocol::GcsSrv),
            "random" => Ok(Protocol::Random),
            "probability" => Ok(Protocol::Probability),
            other => Err(ConfigError::BadValue {
                key: "protocol".into(),
                value: other.into(),
                reason: "expected one of gcs_srv, random, probability".into(),
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Every knob of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_channels: usize,
    pub num_pairs: usize,
    /// Channel bit rate in bits per second.
    pub bit_rate: u64,
    /// Slot length in seconds.
    pub slot_duration: f64,
    /// PU packet arrivals per second on each channel.
    pub lambda_p: f64,
    /// SU packet arrivals per second for each transmitter/receiver pair.
    pub lambda_s: f64,
    pub pu_packet_bits: u64,
    pub su_packet_bits: u64,
    /// Retuning cost in slots when a pair moves to another channel.
    pub handoff_delay: u64,
    /// Slots per data phase.
    pub data_phase_slots: u64,
    /// Total simulated slots.
    pub horizon: u64,
    pub seed: u64,
    pub protocol: Protocol,
    /// History length in slots for the probability baseline.
    pub prob_window: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_channels: 10,
            num_pairs: 10,
            bit_rate: 1_000_000,
            slot_duration: 0.001,
            lambda_p: 5.0,
            lambda_s: 500.0,
            pu_packet_bits: 100_000,
            su_packet_bits: 60_000,
            handoff_delay: 1,
            data_phase_slots: 10,
            horizon: 100_000,
            seed: 1,
            protocol: Protocol::GcsSrv,
            prob_window: 1_000,
        }
    }
}

/// Field names accepted by [`SimConfig::set`], in declaration order.
pub const CONFIG_KEYS: [&str; 14] = [
    "num_channels",
    "num_pairs",
    "bit_rate",
    "slot_duration",
    "lambda_p",
    "lambda_s",
    "pu_packet_bits",
    "su_packet_bits",
    "handoff_delay",
    "data_phase_slots",
    "horizon",
    "seed",
    "protocol",
    "prob_window",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    let cleaned: String = value.trim().chars().filter(|c| *c != '_').collect();
    cleaned.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.into(),
        value: value.trim().into(),
        reason: e.to_string(),
    })
}

/// Accepts plain integers as well as `1e5`-style notation for integral fields.
fn parse_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    if let Ok(v) = parse_num::<u64>(key, value) {
        return Ok(v);
    }
    let f: f64 = parse_num(key, value)?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(ConfigError::BadValue {
            key: key.into(),
            value: value.trim().into(),
            reason: "expected a non-negative integer".into(),
        })
    }
}

impl SimConfig {
    /// Bits a single slot carries at the channel rate.
    pub fn bits_per_slot(&self) -> u64 {
        (self.bit_rate as f64 * self.slot_duration).round() as u64
    }

    pub fn pu_packet_slots(&self) -> u64 {
        self.pu_packet_bits / self.bits_per_slot().max(1)
    }

    pub fn su_packet_slots(&self) -> u64 {
        self.su_packet_bits / self.bits_per_slot().max(1)
    }

    /// Offered PU load per channel, `lambda_p * pu_packet_bits / bit_rate`.
    pub fn pu_load(&self) -> f64 {
        self.lambda_p * self.pu_packet_bits as f64 / self.bit_rate as f64
    }

    /// Checks every invariant and hands the config back unchanged.
    pub fn validate(self) -> Result<SimConfig, ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.num_channels < 1 {
            return bad("num_channels must be ≥ 1".into());
        }
        if self.num_pairs < 1 {
            return bad("num_pairs must be ≥ 1".into());
        }
        if self.bit_rate < 1 {
            return bad("bit_rate must be ≥ 1".into());
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return bad("slot_duration must be a positive finite number".into());
        }
        let exact = self.bit_rate as f64 * self.slot_duration;
        if exact < 0.5 || (exact - exact.round()).abs() > 1e-9 * exact.max(1.0) {
            return bad(format!(
                "bit_rate × slot_duration must be a whole number of bits per slot (got {exact})"
            ));
        }
        for (name, v) in [("lambda_p", self.lambda_p), ("lambda_s", self.lambda_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a finite rate ≥ 0"));
            }
        }
        let bps = self.bits_per_slot();
        for (name, bits) in [
            ("pu_packet_bits", self.pu_packet_bits),
            ("su_packet_bits", self.su_packet_bits),
        ] {
            if bits == 0 || bits % bps != 0 {
                return bad(format!(
                    "{name} must be a positive multiple of the {bps} bits carried per slot (got {bits})"
                ));
            }
        }
        if self.data_phase_slots < 1 {
            return bad("data_phase_slots must be ≥ 1".into());
        }
        let frame_len = self.data_phase_slots + super::frame::CONTROL_SLOTS;
        if self.horizon < frame_len {
            return bad(format!(
                "horizon must cover at least one frame ({frame_len} slots), got {}",
                self.horizon
            ));
        }
        if self.prob_window < 1 {
            return bad("prob_window must be ≥ 1".into());
        }
        if self.pu_load() >= 1.0 {
            log::warn!(
                "PU load {:.3} ≥ 1: channels will be busy almost all the time",
                self.pu_load()
            );
        }
        Ok(self)
    }

    /// Assigns one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        match key {
            "num_channels" => self.num_channels = parse_count(key, value)? as usize,
            "num_pairs" => self.num_pairs = parse_count(key, value)? as usize,
            "bit_rate" => self.bit_rate = parse_count(key, value)?,
            "slot_duration" => self.slot_duration = parse_num(key, value)?,
            "lambda_p" => self.lambda_p = parse_num(key, value)?,
            "lambda_s" => self.lambda_s = parse_num(key, value)?,
            "pu_packet_bits" => self.pu_packet_bits = parse_count(key, value)?,
            "su_packet_bits" => self.su_packet_bits = parse_count(key, value)?,
            "handoff_delay" => self.handoff_delay = parse_count(key, value)?,
            "data_phase_slots" => self.data_phase_slots = parse_count(key, value)?,
            "horizon" => self.horizon = parse_count(key, value)?,
            "seed" => self.seed = parse_count(key, value)?,
            "protocol" => self.protocol = value.parse()?,
            "prob_window" => self.prob_window = parse_count(key, value)? as usize,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Textual value of a field, the inverse of [`SimConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "num_channels" => self.num_channels.to_string(),
            "num_pairs" => self.num_pairs.to_string(),
            "bit_rate" => self.bit_rate.to_string(),
            "slot_duration" => self.slot_duration.to_string(),
            "lambda_p" => self.lambda_p.to_string(),
            "lambda_s" => self.lambda_s.to_string(),
            "pu_packet_bits" => self.pu_packet_bits.to_string(),
            "su_packet_bits" => self.su_packet_bits.to_string(),
            "handoff_delay" => self.handoff_delay.to_string(),
            "data_phase_slots" => self.data_phase_slots.to_string(),
            "horizon" => self.horizon.to_string(),
            "seed" => self.seed.to_string(),
            "protocol" => self.protocol.to_string(),
            "prob_window" => self.prob_window.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (key, value, line) in parse_kv_lines(text)? {
            self.set(&key, &value).map_err(|e| ConfigError::Syntax {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Defaults overlaid with a key-value document, then validated.
    pub fn from_kv_text(text: &str) -> Result<SimConfig, ConfigError> {
        let mut cfg = SimConfig::default();
        cfg.apply_kv_text(text)?;
        cfg.validate()
    }

    pub fn to_kv_text(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap_or_default()))
            .collect()
    }
}

/// Splits a `key = value` document into `(key, value, line_number)` triples.
pub fn parse_kv_lines(text: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}
