//! Per-block electrical stress accounting.
//!
//! Wear-out only accrues while a block is powered, so the ledger keeps the
//! raw on/off/ramping cycle counts for each of the six blocks.

use crate::pipeline::{BlockId, PowerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BlockStress {
    pub on_cycles: u64,
    pub off_cycles: u64,
    pub powering_cycles: u64,
}

impl BlockStress {
    pub fn total(&self) -> u64 {
        self.on_cycles + self.off_cycles + self.powering_cycles
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct StressLedger {
    blocks: [BlockStress; 6],
    elapsed: u64,
}

impl StressLedger {
    pub fn new() -> Self {
        StressLedger::default()
    }

    pub fn get(&self, block: BlockId) -> BlockStress {
        self.blocks[block.index()]
    }

    pub fn elapsed(&self) -> u64 {
        self.elapsed
    }

    /// Records one cycle. `power` is indexed by [`BlockId::index`].
    pub fn record(&mut self, power: &[PowerState; 6]) {
        for (entry, state) in self.blocks.iter_mut().zip(power) {
            match state {
                PowerState::On => entry.on_cycles += 1,
                PowerState::Off => entry.off_cycles += 1,
                PowerState::PoweringUp { .. } => entry.powering_cycles += 1,
            }
        }
        self.elapsed += 1;
    }

    /// on + off + powering equals elapsed cycles for every block.
    pub fn is_conserved(&self) -> bool {
        self.blocks.iter().all(|b| b.total() == self.elapsed)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BlockId, BlockStress)> + '_ {
        BlockId::all().into_iter().map(|b| (b, self.blocks[b.index()]))
    }
}

/// Value-returning form of [`StressLedger::record`].
pub fn update_stress(ledger: &StressLedger, power: &[PowerState; 6]) -> StressLedger {
    let mut next = ledger.clone();
    next.record(power);
    next
}
