//! Cycle-level model of a three-stage core whose every stage has a cold
//! spare.
//!
//! Stages talk over 36-bit inter-stage buses (32 data bits plus one even
//! parity bit per byte). Each boundary has a 2-way switch box choosing the
//! main or spare producer. A duplicated controller, checked by a two-rail
//! comparator, watches the parity checkers, classifies errors as transient
//! or permanent, and on a permanent error flushes the pipeline, powers the
//! faulty copy down, powers the spare up and replays from the oldest
//! uncommitted instruction.

mod bus;
mod checker;
mod controller;
mod core;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use self::bus::{
    estimate_switch_transistors, parity_check, parity_encode, switch_route, InterStageBus, SwitchError, SwitchSetting,
    BUS_BITS, DATA_BITS,
};
pub use self::checker::{trc_compare, ControllerOutputs, Rail, TrcError, CONTROLLER_OUTPUT_BITS};
pub use self::controller::{controller_step, Actions, BlockSet, ControllerState, Mode, StageSet};
pub use self::core::{run_core, DeadCause, FaultClass, Outcome, RecoveryEvent, SimReport, PIPELINE_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StageKind {
    Predecode,
    Decode,
    Execute,
}

impl StageKind {
    /// Pipeline order.
    pub const ALL: [StageKind; 3] = [StageKind::Predecode, StageKind::Decode, StageKind::Execute];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StageKind::Predecode => "predecode",
            StageKind::Decode => "decode",
            StageKind::Execute => "execute",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Copy {
    Main,
    Spare,
}

impl Copy {
    pub fn name(self) -> &'static str {
        match self {
            Copy::Main => "main",
            Copy::Spare => "spare",
        }
    }

    pub fn other(self) -> Copy {
        match self {
            Copy::Main => Copy::Spare,
            Copy::Spare => Copy::Main,
        }
    }
}

impl fmt::Display for Copy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Copy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(Copy::Main),
            "spare" => Ok(Copy::Spare),
            _ => Err(format!("unknown copy `{s}`")),
        }
    }
}

/// One physical stage block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub kind: StageKind,
    pub copy: Copy,
}

impl BlockId {
    pub const fn new(kind: StageKind, copy: Copy) -> Self {
        BlockId { kind, copy }
    }

    /// All six blocks, mains first in pipeline order.
    pub fn all() -> [BlockId; 6] {
        let mut out = [BlockId::new(StageKind::Predecode, Copy::Main); 6];
        for (i, kind) in StageKind::ALL.into_iter().enumerate() {
            out[i] = BlockId::new(kind, Copy::Main);
            out[i + 3] = BlockId::new(kind, Copy::Spare);
        }
        out
    }

    /// Dense index 0..6 (mains 0..3, spares 3..6).
    pub fn index(self) -> usize {
        self.kind.index() + if self.copy == Copy::Spare { 3 } else { 0 }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.kind, self.copy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerState {
    On,
    Off,
    /// Ramping up; becomes `On` when `remaining` reaches zero.
    PoweringUp {
        remaining: u32,
    },
}

/// A pipeline block together with its current power state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockInstance {
    pub id: BlockId,
    pub power: PowerState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {value}")]
    BadValue { line: usize, key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// Machine configuration of the repairable core.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreConfig {
    pub clock_hz: f64,
    /// Consecutive error cycles on one stage before the fault is taken as
    /// permanent.
    pub permanent_threshold: u32,
    pub flush_cycles: u32,
    /// Ramp time per block; blocks power up one after another.
    pub powerup_cycles_per_block: u32,
    /// Seed for the randomized scenario and program generators.
    pub rng_seed: u64,
    /// Simulation cycle budget; runs that hit it end as `Exhausted`.
    pub max_cycles: u64,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig {
            clock_hz: 1.0e8,
            permanent_threshold: 16,
            flush_cycles: 3,
            powerup_cycles_per_block: 64,
            rng_seed: 0,
            max_cycles: 1_000_000,
        }
    }
}

impl CoreConfig {
    pub const KEYS: [&'static str; 6] = [
        "clock_hz",
        "permanent_threshold",
        "flush_cycles",
        "powerup_cycles_per_block",
        "rng_seed",
        "max_cycles",
    ];

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(ConfigError::Invalid("clock_hz must be positive".into()));
        }
        for (name, v) in [
            ("permanent_threshold", self.permanent_threshold),
            ("flush_cycles", self.flush_cycles),
            ("powerup_cycles_per_block", self.powerup_cycles_per_block),
        ] {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be at least 1")));
            }
        }
        if self.max_cycles == 0 {
            return Err(ConfigError::Invalid("max_cycles must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `key = value` lines (`#` comments allowed) on top of `self`.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Malformed { line })?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                ConfigError::BadValue { key, value, .. } => ConfigError::BadValue { line, key, value },
                other => other,
            })?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                line: 0,
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "clock_hz" => self.clock_hz = num(key, value)?,
            "permanent_threshold" => self.permanent_threshold = num(key, value)?,
            "flush_cycles" => self.flush_cycles = num(key, value)?,
            "powerup_cycles_per_block" => self.powerup_cycles_per_block = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            "max_cycles" => self.max_cycles = num(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Resolved configuration as `(key, value)` pairs, in `KEYS` order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("clock_hz", format!("{:.8e}", self.clock_hz)),
            ("permanent_threshold", self.permanent_threshold.to_string()),
            ("flush_cycles", self.flush_cycles.to_string()),
            ("powerup_cycles_per_block", self.powerup_cycles_per_block.to_string()),
            ("rng_seed", self.rng_seed.to_string()),
            ("max_cycles", self.max_cycles.to_string()),
        ]
    }

    pub fn cycles_to_us(&self, cycles: u64) -> f64 {
        cycles as f64 / self.clock_hz * 1.0e6
    }
}
