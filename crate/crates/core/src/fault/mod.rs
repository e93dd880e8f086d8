//! Declarative, cycle-timed fault injection.
//!
//! Faults sit on a block's output bus after its parity encoder, so any
//! change they make to a line is visible to the downstream parity checker
//! unless it flips an even number of bits in one byte. Faults on the
//! controller copies act on their observable output vector and are caught
//! by the two-rail checker.

mod scenario;
mod stress;

use std::fmt;

use crate::pipeline::{InterStageBus, BUS_BITS, DATA_BITS};

pub use scenario::{parse_scenario, ScenarioError};
pub use stress::{update_stress, BlockStress, StressLedger};

use crate::pipeline::{BlockId, CONTROLLER_OUTPUT_BITS};

/// Ground-truth or controller-assigned fault class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultClass {
    Permanent,
    Transient,
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultClass::Permanent => "permanent",
            FaultClass::Transient => "transient",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    StuckAt {
        bit: u32,
        value: bool,
    },
    /// Affected data lines lag: a new value takes `extra` additional cycles
    /// to appear. `line: None` delays all 32 data lines; parity lines are
    /// never delayed.
    Delay {
        extra: u32,
        line: Option<u32>,
    },
    TransientFlip {
        bit: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerCopy {
    /// The copy whose outputs drive the hardware.
    A,
    /// The checking copy with complemented outputs.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultSite {
    /// Output bus of one stage block.
    Bus(BlockId),
    /// Observable outputs of one controller copy.
    Controller(ControllerCopy),
}

impl FaultSite {
    fn width(self) -> u32 {
        match self {
            FaultSite::Bus(_) => BUS_BITS,
            FaultSite::Controller(_) => CONTROLLER_OUTPUT_BITS,
        }
    }
}

impl fmt::Display for FaultSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultSite::Bus(b) => write!(f, "{b}"),
            FaultSite::Controller(ControllerCopy::A) => f.write_str("ctrl.a"),
            FaultSite::Controller(ControllerCopy::B) => f.write_str("ctrl.b"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultDuration {
    Permanent,
    Cycles(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimedFault {
    pub kind: FaultKind,
    pub site: FaultSite,
    pub start: u64,
    pub duration: FaultDuration,
}

impl TimedFault {
    pub fn is_active(&self, cycle: u64) -> bool {
        cycle >= self.start
            && match self.duration {
                FaultDuration::Permanent => true,
                FaultDuration::Cycles(d) => cycle - self.start < d,
            }
    }

    /// Permanent iff it never ends or outlasts the classification threshold.
    pub fn ground_truth(&self, permanent_threshold: u32) -> FaultClass {
        match self.duration {
            FaultDuration::Permanent => FaultClass::Permanent,
            FaultDuration::Cycles(d) if d >= permanent_threshold as u64 => FaultClass::Permanent,
            FaultDuration::Cycles(_) => FaultClass::Transient,
        }
    }
}

impl fmt::Display for TimedFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{} ", self.start)?;
        match self.duration {
            FaultDuration::Permanent => f.write_str("PERM ")?,
            FaultDuration::Cycles(d) => write!(f, "T:{d} ")?,
        }
        write!(f, "{} ", self.site)?;
        match self.kind {
            FaultKind::StuckAt { bit, value } => write!(f, "stuckat {bit} {}", value as u8),
            FaultKind::Delay { extra, line: None } => write!(f, "delay {extra}"),
            FaultKind::Delay { extra, line: Some(l) } => write!(f, "delay {extra} {l}"),
            FaultKind::TransientFlip { bit } => write!(f, "flip {bit}"),
        }
    }
}

/// An ordered list of timed faults. Fault ids are list indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaultScenario {
    pub faults: Vec<TimedFault>,
}

impl FaultScenario {
    pub fn new(faults: Vec<TimedFault>) -> Self {
        FaultScenario { faults }
    }

    pub fn empty() -> Self {
        FaultScenario::default()
    }

    /// Ground-truth label of every fault, in list order.
    pub fn labels(&self, permanent_threshold: u32) -> Vec<FaultClass> {
        self.faults
            .iter()
            .map(|f| f.ground_truth(permanent_threshold))
            .collect()
    }

    /// Structural problems are errors; suspicious but legal faults come back
    /// as warnings.
    pub fn validate(&self, permanent_threshold: u32) -> Result<Vec<String>, ScenarioError> {
        let mut warnings = Vec::new();
        for (id, f) in self.faults.iter().enumerate() {
            let width = f.site.width();
            let bit = match f.kind {
                FaultKind::StuckAt { bit, .. } | FaultKind::TransientFlip { bit } => Some(bit),
                FaultKind::Delay { line, extra } => {
                    if extra == 0 {
                        return Err(ScenarioError::Invalid {
                            fault: id,
                            msg: "delay needs at least one extra cycle".into(),
                        });
                    }
                    if matches!(f.site, FaultSite::Controller(_)) {
                        return Err(ScenarioError::Invalid {
                            fault: id,
                            msg: "delay faults apply to stage buses only".into(),
                        });
                    }
                    if let Some(l) = line {
                        if l >= DATA_BITS {
                            return Err(ScenarioError::Invalid {
                                fault: id,
                                msg: format!("delay line {l} is not a data line (0..{DATA_BITS})"),
                            });
                        }
                    }
                    None
                }
            };
            if let Some(bit) = bit {
                if bit >= width {
                    return Err(ScenarioError::Invalid {
                        fault: id,
                        msg: format!("bit {bit} outside 0..{width} for {}", f.site),
                    });
                }
            }
            if f.duration == FaultDuration::Cycles(0) {
                return Err(ScenarioError::Invalid {
                    fault: id,
                    msg: "zero-length fault".into(),
                });
            }
            if matches!(f.kind, FaultKind::TransientFlip { .. })
                && f.ground_truth(permanent_threshold) == FaultClass::Permanent
            {
                warnings.push(format!(
                    "fault {id}: flip lasting >= {permanent_threshold} cycles will be classified permanent"
                ));
            }
        }
        Ok(warnings)
    }
}

impl fmt::Display for FaultScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fault in &self.faults {
            writeln!(f, "{fault}")?;
        }
        Ok(())
    }
}

/// Faults active at `cycle`, in scenario order.
pub fn active_faults(scenario: &FaultScenario, cycle: u64) -> Vec<&TimedFault> {
    scenario.faults.iter().filter(|f| f.is_active(cycle)).collect()
}

/// Applies faults to one bus. Delays go first, then flips, then stuck-at
/// lines, which therefore dominate.
pub fn apply_faults<'a, I>(bus: InterStageBus, faults: I, previous_bus: InterStageBus) -> InterStageBus
where
    I: IntoIterator<Item = &'a FaultKind>,
{
    let faults: Vec<&FaultKind> = faults.into_iter().collect();
    let mut data = bus.data;
    for f in &faults {
        if let FaultKind::Delay { line, .. } = f {
            let mask = match line {
                Some(l) => 1u32 << l,
                None => u32::MAX,
            };
            data = (data & !mask) | (previous_bus.data & mask);
        }
    }
    let mut lines = InterStageBus { data, ..bus }.lines();
    for f in &faults {
        if let FaultKind::TransientFlip { bit } = f {
            lines ^= 1 << bit;
        }
    }
    for f in &faults {
        if let FaultKind::StuckAt { bit, value } = f {
            if *value {
                lines |= 1 << bit;
            } else {
                lines &= !(1 << bit);
            }
        }
    }
    InterStageBus::from_lines(lines)
}

/// Applies stuck-at and flip faults to a controller output vector.
pub(crate) fn apply_output_faults<'a, I>(bits: u32, faults: I) -> u32
where
    I: IntoIterator<Item = &'a FaultKind>,
{
    let faults: Vec<&FaultKind> = faults.into_iter().collect();
    let mut out = bits;
    for f in &faults {
        if let FaultKind::TransientFlip { bit } = f {
            out ^= 1 << bit;
        }
    }
    for f in &faults {
        if let FaultKind::StuckAt { bit, value } = f {
            if *value {
                out |= 1 << bit;
            } else {
                out &= !(1 << bit);
            }
        }
    }
    out
}

/// Slow-line model for delay faults on one bus.
///
/// `observe` returns the value the slow lines still hold: a new fresh value
/// only replaces it after being presented for more than `extra` consecutive
/// cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DelayLine {
    settled: InterStageBus,
    pending: InterStageBus,
    presented: u32,
}

impl DelayLine {
    pub fn new(initial: InterStageBus) -> Self {
        DelayLine {
            settled: initial,
            pending: initial,
            presented: u32::MAX,
        }
    }

    pub fn observe(&mut self, fresh: InterStageBus, extra: u32) -> InterStageBus {
        if fresh != self.pending {
            self.pending = fresh;
            self.presented = 0;
        }
        self.presented = self.presented.saturating_add(1);
        if self.presented > extra {
            self.settled = fresh;
        }
        self.settled
    }

    pub fn reset(&mut self, value: InterStageBus) {
        *self = DelayLine::new(value);
    }
}
