//! Workloads and fault campaigns: the canonical four-row fault test and
//! seeded random generators for programs and scenarios.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::fault::{FaultDuration, FaultKind, FaultScenario, FaultSite, TimedFault};
use crate::isa::{assemble, run_reference, Instruction, Opcode, Program};
use crate::pipeline::{BlockId, Copy, StageKind, BUS_BITS};

/// Accumulates 1..=10 into memory, reads the result back and halts.
pub const CANONICAL_SOURCE: &str = "\
; running sum of 1..=10, stored after every step
        LDI r1, 0          ; sum
        LDI r2, 1          ; i
        LDI r3, 11         ; bound
        LDI r4, 1
loop:   ADD r1, r1, r2
        ST  r1, r2, 64     ; mem[64 + i] = sum
        ADD r2, r2, r4
        BEQ r2, r3, done
        JMP loop
done:   LD  r5, r3, 63     ; mem[74] = 55
        XOR r6, r5, r1     ; 0 when the readback matches
        ST  r6, r0, 100
        HALT
";

pub fn canonical_program() -> Program {
    assemble(CANONICAL_SOURCE).expect("canonical program assembles")
}

/// One row of the canonical fault test.
#[derive(Debug, Clone)]
pub struct CanonicalCase {
    pub name: &'static str,
    pub scenario: FaultScenario,
}

/// Stuck-at and delay faults on the Decode and Execute main copies, each
/// injected mid-loop.
pub fn canonical_cases() -> Vec<CanonicalCase> {
    let main = |kind| FaultSite::Bus(BlockId::new(kind, Copy::Main));
    let perm = |kind, site, start| {
        FaultScenario::new(vec![TimedFault {
            kind,
            site,
            start,
            duration: FaultDuration::Permanent,
        }])
    };
    vec![
        CanonicalCase {
            name: "stuck-at decode",
            scenario: perm(FaultKind::StuckAt { bit: 3, value: true }, main(StageKind::Decode), 10),
        },
        CanonicalCase {
            name: "stuck-at execute",
            scenario: perm(FaultKind::StuckAt { bit: 3, value: true }, main(StageKind::Execute), 10),
        },
        CanonicalCase {
            name: "delay decode",
            scenario: perm(
                FaultKind::Delay {
                    extra: 20,
                    line: Some(0),
                },
                main(StageKind::Decode),
                10,
            ),
        },
        CanonicalCase {
            name: "delay execute",
            scenario: perm(
                FaultKind::Delay {
                    extra: 20,
                    line: Some(0),
                },
                main(StageKind::Execute),
                10,
            ),
        },
    ]
}

const ALU: [Opcode; 5] = [Opcode::Add, Opcode::Sub, Opcode::And, Opcode::Or, Opcode::Xor];

/// Random terminating program: a prologue of immediates, a body of ALU,
/// memory and forward-branch instructions, optionally wrapped in a bounded
/// countdown loop, then `HALT`.
///
/// The loop uses r14 (step) and r15 (counter); the body never writes them.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R) -> Program {
    let mut code = Vec::new();
    for rd in 1..=4 {
        code.push(Instruction::new(Opcode::Ldi, rd, 0, 0, rng.random_range(-300..300)));
    }
    let looped = rng.random_bool(0.6);
    let loop_start = if looped {
        code.push(Instruction::new(Opcode::Ldi, 14, 0, 0, 1));
        code.push(Instruction::new(Opcode::Ldi, 15, 0, 0, rng.random_range(2..6)));
        Some(code.len() as i16)
    } else {
        None
    };

    let body_len = rng.random_range(4..20);
    let body_start = code.len();
    for k in 0..body_len {
        let reg = |rng: &mut R| rng.random_range(0..14u8);
        let dst = |rng: &mut R| rng.random_range(1..14u8);
        let remaining = (body_len - k) as i16;
        let instr = match rng.random_range(0..10) {
            0..=4 => Instruction::new(*ALU.choose(rng).unwrap(), dst(rng), reg(rng), reg(rng), 0),
            5 => Instruction::new(Opcode::Ldi, dst(rng), 0, 0, rng.random_range(i16::MIN..i16::MAX)),
            6 => Instruction::new(Opcode::Ld, dst(rng), 0, 0, rng.random_range(0..16)),
            7 => Instruction::new(
                Opcode::St,
                0,
                if rng.random_bool(0.5) { 0 } else { reg(rng) },
                reg(rng),
                rng.random_range(0..16),
            ),
            8 if remaining > 1 => Instruction::new(Opcode::Beq, 0, reg(rng), reg(rng), rng.random_range(1..=remaining)),
            8 => Instruction::new(Opcode::Mov, dst(rng), reg(rng), 0, 0),
            _ => Instruction::NOP,
        };
        code.push(instr);
    }
    // Forward jumps are patched in after layout so their targets are absolute.
    if body_len > 2 && rng.random_bool(0.5) {
        let at = body_start + rng.random_range(0..body_len - 1);
        let target = rng.random_range(at + 1..=body_start + body_len);
        code[at] = Instruction::new(Opcode::Jmp, 0, 0, 0, target as i16);
    }
    if let Some(start) = loop_start {
        let here = code.len() as i16;
        code.push(Instruction::new(Opcode::Sub, 15, 15, 14, 0));
        code.push(Instruction::new(Opcode::Beq, 0, 15, 0, 2));
        code.push(Instruction::new(Opcode::Jmp, 0, 0, 0, start));
        debug_assert!(here > start);
    }
    code.push(Instruction::HALT);
    let program = Program::new(code, 0).expect("non-empty");
    debug_assert!(run_reference(&program, 10_000).0.halted);
    program
}

/// Transient-only scenario: up to four flips or short single-line delays on
/// the main copies, each shorter than `threshold` and separated from the
/// previous fault on the same stage by at least one clean cycle.
pub fn random_transient_scenario<R: Rng + ?Sized>(rng: &mut R, threshold: u32, horizon: u64) -> FaultScenario {
    let mut faults = Vec::new();
    let mut next_free = [0u64; 3];
    for _ in 0..rng.random_range(1..=4) {
        let stage = StageKind::ALL[rng.random_range(0..3)];
        let duration = rng.random_range(1..threshold.max(2) as u64);
        let earliest = next_free[stage.index()];
        let start = earliest + rng.random_range(0..horizon.max(1));
        next_free[stage.index()] = start + duration + 1;
        let kind = if rng.random_bool(0.7) {
            FaultKind::TransientFlip {
                bit: rng.random_range(0..BUS_BITS),
            }
        } else {
            FaultKind::Delay {
                extra: rng.random_range(1..=threshold.max(2) - 1),
                line: Some(rng.random_range(0..32)),
            }
        };
        faults.push(TimedFault {
            kind,
            site: FaultSite::Bus(BlockId::new(stage, Copy::Main)),
            start,
            duration: FaultDuration::Cycles(duration),
        });
    }
    FaultScenario::new(faults)
}

/// Bus word `HALT` leaves on each stage's output while it sits there.
pub fn halt_bus_word(stage: StageKind) -> u32 {
    match stage {
        StageKind::Predecode => Instruction::HALT.encode(),
        StageKind::Decode | StageKind::Execute => 0,
    }
}

/// One permanent stuck-at on an active main copy whose stuck value differs
/// from the bus line while `HALT` passes the stage, so the fault is
/// exercised on every program provided it starts before `HALT` is fetched
/// (`horizon` at most the fault-free cycle count minus the pipeline depth).
pub fn random_permanent_scenario<R: Rng + ?Sized>(rng: &mut R, horizon: u64) -> FaultScenario {
    let stage = StageKind::ALL[rng.random_range(0..3)];
    let bit = rng.random_range(0..BUS_BITS);
    let bus = crate::pipeline::InterStageBus::encode(halt_bus_word(stage));
    let value = !bus.bit(bit);
    FaultScenario::new(vec![TimedFault {
        kind: FaultKind::StuckAt { bit, value },
        site: FaultSite::Bus(BlockId::new(stage, Copy::Main)),
        start: rng.random_range(0..horizon.max(1)),
        duration: FaultDuration::Permanent,
    }])
}
