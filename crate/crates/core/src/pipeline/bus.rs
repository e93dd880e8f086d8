use thiserror::Error;

use super::StageKind;

/// Data lines on an inter-stage bus.
pub const DATA_BITS: u32 = 32;
/// Data lines plus one parity line per byte. Bits 32..36 are parity.
pub const BUS_BITS: u32 = 36;

/// A 32-bit word and its four per-byte parity bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct InterStageBus {
    pub data: u32,
    pub parity: u8,
}

impl InterStageBus {
    /// A bus carrying `data` with freshly generated parity.
    pub fn encode(data: u32) -> Self {
        InterStageBus {
            data,
            parity: parity_encode(data),
        }
    }

    /// Bus lines as one 36-bit value (data in the low 32 bits).
    pub fn lines(&self) -> u64 {
        self.data as u64 | ((self.parity as u64 & 0xF) << 32)
    }

    pub fn from_lines(lines: u64) -> Self {
        InterStageBus {
            data: lines as u32,
            parity: ((lines >> 32) & 0xF) as u8,
        }
    }

    pub fn bit(&self, bit: u32) -> bool {
        (self.lines() >> bit) & 1 == 1
    }
}

/// Even parity per byte: bit `i` is the XOR of byte `i` (byte 0 least
/// significant).
pub fn parity_encode(word: u32) -> u8 {
    (0..4).fold(0u8, |acc, i| {
        let byte = (word >> (8 * i)) as u8;
        acc | (((byte.count_ones() & 1) as u8) << i)
    })
}

/// Bit `i` of the result is set when byte `i` disagrees with its parity bit.
pub fn parity_check(bus: &InterStageBus) -> u8 {
    (parity_encode(bus.data) ^ bus.parity) & 0xF
}

/// Per-boundary switch-box select. The boundary after stage `k` is indexed
/// by `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchSetting {
    pub select: [super::Copy; 3],
}

impl Default for SwitchSetting {
    fn default() -> Self {
        SwitchSetting {
            select: [super::Copy::Main; 3],
        }
    }
}

impl SwitchSetting {
    pub fn get(&self, stage: StageKind) -> super::Copy {
        self.select[stage.index()]
    }

    pub(crate) fn flip(&mut self, stage: StageKind) {
        let s = &mut self.select[stage.index()];
        *s = s.other();
    }
}

/// Routes the selected producer's bus onto the boundary.
pub fn switch_route(select: super::Copy, main_bus: InterStageBus, spare_bus: InterStageBus) -> InterStageBus {
    match select {
        super::Copy::Main => main_bus,
        super::Copy::Spare => spare_bus,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwitchError {
    #[error("bus width must be at least one bit")]
    ZeroWidth,
    #[error("only 2-way switch boxes are modelled (got {0}-way)")]
    UnsupportedWays(u32),
}

/// Transistors per 2-way single-bit switch box in the reference 45nm library.
const TRANSISTORS_PER_SWITCH_BIT: u64 = 20;

/// Transistor cost of a switch box spanning `bus_bits` lines.
pub fn estimate_switch_transistors(bus_bits: u32, ways: u32) -> Result<u64, SwitchError> {
    if ways != 2 {
        return Err(SwitchError::UnsupportedWays(ways));
    }
    if bus_bits == 0 {
        return Err(SwitchError::ZeroWidth);
    }
    Ok(TRANSISTORS_PER_SWITCH_BIT * bus_bits as u64)
}

#[cfg(test)]
mod tests {
    use super::super::Copy;
    use super::*;

    #[test]
    fn parity_examples() {
        assert_eq!(parity_encode(0x0000_0000), 0b0000);
        assert_eq!(parity_encode(0x0000_0001), 0b0001);
        assert_eq!(parity_encode(0xFF00_0001), 0b0001);
        assert_eq!(parity_encode(0x0101_0100), 0b1110);
    }

    #[test]
    fn parity_check_examples() {
        let bus = InterStageBus::encode(0xDEAD_BEEF);
        assert_eq!(parity_check(&bus), 0);
        let one = InterStageBus {
            data: bus.data ^ 1,
            ..bus
        };
        assert_eq!(parity_check(&one), 0b0001);
        let two = InterStageBus {
            data: bus.data ^ 0b11,
            ..bus
        };
        assert_eq!(parity_check(&two), 0b0000);
        let high = InterStageBus {
            data: bus.data ^ (1 << 30),
            ..bus
        };
        assert_eq!(parity_check(&high), 0b1000);
    }

    #[test]
    fn parity_line_flip_is_detected() {
        let bus = InterStageBus::encode(0x1234_5678);
        for bit in 32..36 {
            let hit = InterStageBus::from_lines(bus.lines() ^ (1 << bit));
            assert_eq!(parity_check(&hit), 1 << (bit - 32));
        }
    }

    #[test]
    fn route_examples() {
        let a = InterStageBus::encode(1);
        let b = InterStageBus::encode(2);
        assert_eq!(switch_route(Copy::Main, a, b), a);
        assert_eq!(switch_route(Copy::Spare, a, b), b);
        assert_eq!(switch_route(Copy::Spare, a, a), a);
        assert_eq!(switch_route(Copy::Main, a, a), a);
    }

    #[test]
    fn switch_cost() {
        assert_eq!(estimate_switch_transistors(1, 2), Ok(20));
        assert_eq!(estimate_switch_transistors(36, 2), Ok(720));
        assert_eq!(estimate_switch_transistors(0, 2), Err(SwitchError::ZeroWidth));
        assert_eq!(estimate_switch_transistors(8, 3), Err(SwitchError::UnsupportedWays(3)));
    }
}
