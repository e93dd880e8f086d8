//! Two-rail checking of the duplicated controller.
//!
//! The second controller copy drives complemented outputs, so in fault-free
//! operation every output pair `(a_i, b_i)` is a two-rail code word
//! (`a_i != b_i`). The checker reduces the pairs with a tree of two-rail
//! cells; the root pair is a code word iff every input pair is.

use thiserror::Error;

use super::controller::{Actions, Mode};

/// Width of the controller's observable output vector.
///
/// Layout (LSB first): flush, power_off[6], power_on[6], switch_flip[3],
/// replay, mode[3].
pub const CONTROLLER_OUTPUT_BITS: u32 = 20;

const OUTPUT_MASK: u32 = (1 << CONTROLLER_OUTPUT_BITS) - 1;

/// Encoded observable outputs of one controller copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControllerOutputs(pub u32);

impl ControllerOutputs {
    pub fn encode(mode: &Mode, actions: &Actions) -> Self {
        let mut bits = actions.flush as u32;
        bits |= (actions.power_off.bits() as u32) << 1;
        bits |= (actions.power_on.bits() as u32) << 7;
        bits |= (actions.switch_flip.bits() as u32) << 13;
        bits |= (actions.replay as u32) << 16;
        bits |= (mode.code() as u32) << 17;
        ControllerOutputs(bits)
    }

    /// The complemented rail, as driven by the checking copy.
    pub fn complemented(self) -> Self {
        ControllerOutputs(!self.0 & OUTPUT_MASK)
    }

    pub fn with_bit(self, bit: u32, value: bool) -> Self {
        if value {
            ControllerOutputs(self.0 | (1 << bit))
        } else {
            ControllerOutputs(self.0 & !(1 << bit))
        }
    }

    pub fn bit(self, bit: u32) -> bool {
        (self.0 >> bit) & 1 == 1
    }

    pub fn as_rail(self) -> Rail {
        Rail::new(self.0 as u64, CONTROLLER_OUTPUT_BITS)
    }
}

/// A fixed-width bit vector, one rail of a two-rail signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rail {
    bits: u64,
    width: u32,
}

impl Rail {
    /// `width` is clamped to 64; bits above it are dropped.
    pub fn new(bits: u64, width: u32) -> Self {
        let width = width.min(64);
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Rail {
            bits: bits & mask,
            width,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TrcError {
    #[error("rail width mismatch: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("empty rails")]
    Empty,
}

/// Returns `Ok(true)` when `out_b_complemented` is the exact bitwise
/// complement of `out_a`.
pub fn trc_compare(out_a: Rail, out_b_complemented: Rail) -> Result<bool, TrcError> {
    if out_a.width != out_b_complemented.width {
        return Err(TrcError::WidthMismatch(out_a.width, out_b_complemented.width));
    }
    if out_a.width == 0 {
        return Err(TrcError::Empty);
    }
    // Bit-parallel tree: at stride `s` the live cells sit at multiples of
    // `s`, and each layer combines the cells at `2js` and `2js + s`.
    const EVERY: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x1111_1111_1111_1111,
        0x0101_0101_0101_0101,
        0x0001_0001_0001_0001,
        0x0000_0001_0000_0001,
        0x0000_0000_0000_0001,
    ];
    let (mut r0, mut r1) = (out_a.bits, out_b_complemented.bits);
    let mut len = out_a.width;
    let mut level = 0;
    while len > 1 {
        let stride = 1u32 << level;
        let half = len / 2;
        let span = half * 2 * stride;
        let pairs = EVERY[level] & if span >= 64 { u64::MAX } else { (1u64 << span) - 1 };
        let (a0, a1) = (r0 & pairs, r1 & pairs);
        let (b0, b1) = ((r0 >> stride) & pairs, (r1 >> stride) & pairs);
        let (z0, z1) = ((a0 & b0) | (a1 & b1), (a0 & b1) | (a1 & b0));
        // An odd leftover cell at `(len - 1) * stride` passes through.
        let keep = if len % 2 == 1 { 1u64 << ((len - 1) * stride) } else { 0 };
        r0 = z0 | (r0 & keep);
        r1 = z1 | (r1 & keep);
        len = half + len % 2;
        level += 1;
    }
    Ok(r0 & 1 != r1 & 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r4(bits: u64) -> Rail {
        Rail::new(bits, 4)
    }

    /// One two-rail cell: two code-word inputs give a code-word output; any
    /// non-code input gives a non-code output.
    fn trc_cell((a0, a1): (bool, bool), (b0, b1): (bool, bool)) -> (bool, bool) {
        ((a0 && b0) || (a1 && b1), (a0 && b1) || (a1 && b0))
    }

    /// The cell tree written out one pair at a time.
    fn tree_reference(a: u64, b: u64, width: usize) -> bool {
        let mut layer: Vec<(bool, bool)> = (0..width).map(|i| ((a >> i) & 1 == 1, (b >> i) & 1 == 1)).collect();
        while layer.len() > 1 {
            let mut next: Vec<_> = layer
                .chunks(2)
                .filter(|c| c.len() == 2)
                .map(|c| trc_cell(c[0], c[1]))
                .collect();
            if layer.len() % 2 == 1 {
                next.push(layer[layer.len() - 1]);
            }
            layer = next;
        }
        layer[0].0 != layer[0].1
    }

    #[test]
    fn bit_parallel_matches_cell_tree() {
        let mut x = 0x9E37_79B9_7F4A_7C15u64;
        for width in 1..=64u32 {
            let mask = if width == 64 { u64::MAX } else { (1 << width) - 1 };
            for k in 0..200 {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                let a = x & mask;
                let b = if k % 3 == 0 { !a & mask } else { (x >> 3) & mask };
                let got = trc_compare(Rail::new(a, width), Rail::new(b, width)).unwrap();
                assert_eq!(got, tree_reference(a, b, width as usize), "width {width}");
                assert_eq!(got, b == !a & mask);
            }
        }
    }

    #[test]
    fn examples() {
        assert_eq!(trc_compare(r4(0b1010), r4(0b0101)), Ok(true));
        assert_eq!(trc_compare(r4(0b1010), r4(0b0111)), Ok(false));
        assert_eq!(trc_compare(r4(0b0000), r4(0b1111)), Ok(true));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        assert_eq!(
            trc_compare(Rail::new(0, 3), Rail::new(0, 4)),
            Err(TrcError::WidthMismatch(3, 4))
        );
        assert_eq!(trc_compare(Rail::new(0, 0), Rail::new(0, 0)), Err(TrcError::Empty));
    }

    #[test]
    fn tree_matches_plain_complement_check_exhaustively() {
        for width in 1..=5u32 {
            let n = 1u64 << width;
            let mask = n - 1;
            for a in 0..n {
                for b in 0..n {
                    let expect = a == (!b & mask);
                    let got = trc_compare(Rail::new(a, width), Rail::new(b, width)).unwrap();
                    assert_eq!(got, expect, "width={width} a={a:b} b={b:b}");
                }
            }
        }
    }

    #[test]
    fn complemented_round_trips() {
        let o = ControllerOutputs(0b1011_0000_1111_0000_1010);
        assert_eq!(o.complemented().complemented(), o);
        assert_eq!(trc_compare(o.as_rail(), o.complemented().as_rail()), Ok(true));
    }
}
