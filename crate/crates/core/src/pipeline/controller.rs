//! Repair controller finite-state machine.
//!
//! ```text
//! Monitor --error--> Suspect --(threshold reached)--> Flush --> PowerSwap --> Resume --> Monitor
//!    ^                  |
//!    +--error clears----+   (classified transient)
//! ```
//!
//! Any two-rail checker mismatch, or a permanent error on a stage already
//! running on its spare, ends in `Dead`.

use super::{BlockId, Copy, CoreConfig, StageKind};

/// A set of stages (3-bit mask in pipeline order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StageSet(u8);

impl StageSet {
    pub const EMPTY: StageSet = StageSet(0);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn insert(&mut self, s: StageKind) {
        self.0 |= 1 << s.index();
    }

    pub fn remove(&mut self, s: StageKind) {
        self.0 &= !(1 << s.index());
    }

    pub fn contains(self, s: StageKind) -> bool {
        self.0 & (1 << s.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = StageKind> {
        StageKind::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn first(self) -> Option<StageKind> {
        self.iter().next()
    }
}

impl FromIterator<StageKind> for StageSet {
    fn from_iter<I: IntoIterator<Item = StageKind>>(iter: I) -> Self {
        let mut set = StageSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// A set of blocks (6-bit mask indexed by [`BlockId::index`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BlockSet(u8);

impl BlockSet {
    pub const EMPTY: BlockSet = BlockSet(0);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn insert(&mut self, b: BlockId) {
        self.0 |= 1 << b.index();
    }

    pub fn contains(self, b: BlockId) -> bool {
        self.0 & (1 << b.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = BlockId> {
        BlockId::all().into_iter().filter(move |b| self.contains(*b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Monitor,
    Suspect { stage: StageKind, count: u32 },
    Flush { remaining: u32 },
    PowerSwap { stage: StageKind, remaining: u32 },
    Resume,
    Dead,
}

impl Mode {
    pub(crate) fn code(&self) -> u8 {
        match self {
            Mode::Monitor => 0,
            Mode::Suspect { .. } => 1,
            Mode::Flush { .. } => 2,
            Mode::PowerSwap { .. } => 3,
            Mode::Resume => 4,
            Mode::Dead => 5,
        }
    }

    /// Whether the pipeline may fetch and commit in this mode.
    pub fn pipeline_running(&self) -> bool {
        matches!(self, Mode::Monitor | Mode::Suspect { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControllerState {
    pub mode: Mode,
    /// Consecutive error cycles seen per stage.
    pub error_counters: [u32; 3],
    /// Oldest uncommitted instruction; refreshed by the pipeline each cycle.
    pub replay_pc: u32,
    /// Stages currently running on their spare.
    pub on_spare: StageSet,
    /// Stages classified permanent and still waiting for their spare.
    pub pending_swaps: StageSet,
}

impl ControllerState {
    pub fn new(replay_pc: u32) -> Self {
        ControllerState {
            mode: Mode::Monitor,
            error_counters: [0; 3],
            replay_pc,
            on_spare: StageSet::EMPTY,
            pending_swaps: StageSet::EMPTY,
        }
    }

    fn active(&self, stage: StageKind) -> BlockId {
        let copy = if self.on_spare.contains(stage) {
            Copy::Spare
        } else {
            Copy::Main
        };
        BlockId::new(stage, copy)
    }
}

/// Outputs of one controller step. `flush`, the power sets, `switch_flip`
/// and `replay` drive the hardware; the classification sets are the
/// controller's own event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Actions {
    pub flush: bool,
    pub power_off: BlockSet,
    pub power_on: BlockSet,
    pub switch_flip: StageSet,
    pub replay: bool,
    /// Stages whose error streak cleared before the threshold.
    pub transient: StageSet,
    /// Stages whose error streak reached the threshold this step.
    pub permanent: StageSet,
}

impl Actions {
    pub fn is_idle(&self) -> bool {
        !self.flush
            && !self.replay
            && self.power_off.is_empty()
            && self.power_on.is_empty()
            && self.switch_flip.is_empty()
    }
}

/// Advances the controller by one clock cycle.
///
/// `parity_errors[k]` is the parity checker mask of the boundary after stage
/// `k`. Errors are only counted in `Monitor`/`Suspect`; during a repair the
/// pipeline is idle and the controller ignores the checkers.
pub fn controller_step(
    state: &ControllerState,
    parity_errors: [u8; 3],
    trc_error: bool,
    config: &CoreConfig,
) -> (ControllerState, Actions) {
    let mut next = state.clone();
    let mut actions = Actions::default();
    if trc_error || state.mode == Mode::Dead {
        next.mode = Mode::Dead;
        return (next, actions);
    }

    match state.mode {
        Mode::Monitor | Mode::Suspect { .. } => {
            let mut reached = StageSet::EMPTY;
            for stage in StageKind::ALL {
                let counter = &mut next.error_counters[stage.index()];
                if parity_errors[stage.index()] != 0 {
                    *counter += 1;
                    if *counter >= config.permanent_threshold {
                        reached.insert(stage);
                    }
                } else {
                    if *counter > 0 {
                        actions.transient.insert(stage);
                    }
                    *counter = 0;
                }
            }
            if !reached.is_empty() {
                actions.permanent = reached;
                next.error_counters = [0; 3];
                if reached.iter().any(|s| state.on_spare.contains(s)) {
                    // No second spare.
                    next.mode = Mode::Dead;
                    return (next, actions);
                }
                actions.flush = true;
                for s in reached.iter() {
                    actions.power_off.insert(state.active(s));
                }
                next.pending_swaps = reached;
                next.mode = Mode::Flush {
                    remaining: config.flush_cycles,
                };
            } else {
                // Report the longest streak; ties go to the earliest stage.
                let best = StageKind::ALL
                    .into_iter()
                    .map(|s| (s, next.error_counters[s.index()]))
                    .filter(|&(_, c)| c > 0)
                    .fold(None, |best: Option<(StageKind, u32)>, cur| match best {
                        Some(b) if b.1 >= cur.1 => Some(b),
                        _ => Some(cur),
                    });
                next.mode = match best {
                    Some((stage, count)) => Mode::Suspect { stage, count },
                    None => Mode::Monitor,
                };
            }
        }
        Mode::Flush { remaining } => {
            if remaining > 1 {
                next.mode = Mode::Flush {
                    remaining: remaining - 1,
                };
            } else {
                begin_power_up(&mut next, &mut actions, config);
            }
        }
        Mode::PowerSwap { stage, remaining } => {
            if remaining > 1 {
                next.mode = Mode::PowerSwap {
                    stage,
                    remaining: remaining - 1,
                };
            } else {
                actions.switch_flip.insert(stage);
                next.on_spare.insert(stage);
                next.pending_swaps.remove(stage);
                // Daisy chain: the next block starts only once this one is up.
                begin_power_up(&mut next, &mut actions, config);
            }
        }
        Mode::Resume => {
            actions.replay = true;
            next.mode = Mode::Monitor;
        }
        Mode::Dead => unreachable!(),
    }
    (next, actions)
}

fn begin_power_up(next: &mut ControllerState, actions: &mut Actions, config: &CoreConfig) {
    match next.pending_swaps.first() {
        Some(stage) => {
            actions.power_on.insert(BlockId::new(stage, Copy::Spare));
            next.mode = Mode::PowerSwap {
                stage,
                remaining: config.powerup_cycles_per_block,
            };
        }
        None => next.mode = Mode::Resume,
    }
}
