//! A 13-opcode, 16-register, word-addressed instruction set and its
//! single-step reference interpreter.
//!
//! The interpreter is the golden model: every pipeline run that completes
//! must leave exactly the architectural state that [`run_reference`]
//! produces for the same program.
//!
//! Encoding (one 32-bit word per instruction):
//!
//! ```text
//!  31    28 27  24 23  20 19  16 15             0
//! +--------+------+------+------+----------------+
//! | opcode |  rd  | rs1  | rs2  |      imm       |
//! +--------+------+------+------+----------------+
//! ```

mod asm;

use std::collections::BTreeMap;
use std::fmt;

pub use asm::{assemble, AsmError};

/// Number of architectural registers.
pub const NUM_REGS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    Nop,
    Halt,
    Ldi,
    Mov,
    Add,
    Sub,
    And,
    Or,
    Xor,
    Ld,
    St,
    Beq,
    Jmp,
}

impl Opcode {
    pub const ALL: [Opcode; 13] = [
        Opcode::Nop,
        Opcode::Halt,
        Opcode::Ldi,
        Opcode::Mov,
        Opcode::Add,
        Opcode::Sub,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Ld,
        Opcode::St,
        Opcode::Beq,
        Opcode::Jmp,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Nop => "NOP",
            Opcode::Halt => "HALT",
            Opcode::Ldi => "LDI",
            Opcode::Mov => "MOV",
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::And => "AND",
            Opcode::Or => "OR",
            Opcode::Xor => "XOR",
            Opcode::Ld => "LD",
            Opcode::St => "ST",
            Opcode::Beq => "BEQ",
            Opcode::Jmp => "JMP",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Opcode::ALL.into_iter().find(|op| op.mnemonic().eq_ignore_ascii_case(s))
    }

    fn code(self) -> u32 {
        self as u32
    }

    fn from_code(code: u32) -> Option<Opcode> {
        Opcode::ALL.get(code as usize).copied()
    }

    /// Whether this opcode writes `rd`.
    pub fn writes_rd(self) -> bool {
        matches!(
            self,
            Opcode::Ldi | Opcode::Mov | Opcode::Add | Opcode::Sub | Opcode::And | Opcode::Or | Opcode::Xor | Opcode::Ld
        )
    }

    /// Whether this opcode reads `rs1`.
    pub fn reads_rs1(self) -> bool {
        matches!(
            self,
            Opcode::Mov
                | Opcode::Add
                | Opcode::Sub
                | Opcode::And
                | Opcode::Or
                | Opcode::Xor
                | Opcode::Ld
                | Opcode::St
                | Opcode::Beq
        )
    }

    /// Whether this opcode reads `rs2`.
    pub fn reads_rs2(self) -> bool {
        matches!(
            self,
            Opcode::Add | Opcode::Sub | Opcode::And | Opcode::Or | Opcode::Xor | Opcode::St | Opcode::Beq
        )
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// One decoded instruction. Fields an opcode does not use are zero.
///
/// Operand roles:
/// - `LDI rd, imm`: `rd = sext(imm)`
/// - `MOV rd, rs1`
/// - `ADD|SUB|AND|OR|XOR rd, rs1, rs2`
/// - `LD rd, rs1, imm`: `rd = mem[rs1 + imm]`
/// - `ST rs2, rs1, imm`: `mem[rs1 + imm] = rs2`
/// - `BEQ rs1, rs2, imm`: `pc += imm` when equal (pc-relative)
/// - `JMP imm`: `pc = imm` (absolute word address)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i16,
}

impl Instruction {
    pub const NOP: Instruction = Instruction::new(Opcode::Nop, 0, 0, 0, 0);
    pub const HALT: Instruction = Instruction::new(Opcode::Halt, 0, 0, 0, 0);

    pub const fn new(opcode: Opcode, rd: u8, rs1: u8, rs2: u8, imm: i16) -> Self {
        Instruction {
            opcode,
            rd,
            rs1,
            rs2,
            imm,
        }
    }

    pub fn encode(&self) -> u32 {
        (self.opcode.code() << 28)
            | ((self.rd as u32 & 0xF) << 24)
            | ((self.rs1 as u32 & 0xF) << 20)
            | ((self.rs2 as u32 & 0xF) << 16)
            | (self.imm as u16 as u32)
    }

    /// Decodes an instruction word. Unassigned opcode values decode as `NOP`.
    pub fn decode(word: u32) -> Instruction {
        match Opcode::from_code(word >> 28) {
            Some(opcode) => Instruction {
                opcode,
                rd: ((word >> 24) & 0xF) as u8,
                rs1: ((word >> 20) & 0xF) as u8,
                rs2: ((word >> 16) & 0xF) as u8,
                imm: (word & 0xFFFF) as u16 as i16,
            },
            None => Instruction::NOP,
        }
    }

    /// Sign-extended immediate as a 32-bit word.
    pub fn imm_word(&self) -> u32 {
        self.imm as i32 as u32
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = self.opcode;
        match op {
            Opcode::Nop | Opcode::Halt => write!(f, "{op}"),
            Opcode::Ldi => write!(f, "{op} r{}, {}", self.rd, self.imm),
            Opcode::Mov => write!(f, "{op} r{}, r{}", self.rd, self.rs1),
            Opcode::Add | Opcode::Sub | Opcode::And | Opcode::Or | Opcode::Xor => {
                write!(f, "{op} r{}, r{}, r{}", self.rd, self.rs1, self.rs2)
            }
            Opcode::Ld => write!(f, "{op} r{}, r{}, {}", self.rd, self.rs1, self.imm),
            Opcode::St => write!(f, "{op} r{}, r{}, {}", self.rs2, self.rs1, self.imm),
            Opcode::Beq => write!(f, "{op} r{}, r{}, {:+}", self.rs1, self.rs2, self.imm),
            Opcode::Jmp => write!(f, "{op} {}", self.imm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    instructions: Vec<Instruction>,
    origin: u32,
    /// Source line (1-based) of each instruction, for diagnostics.
    lines: Vec<usize>,
}

impl Program {
    /// Builds a program from already-decoded instructions. Returns `None`
    /// for an empty list.
    pub fn new(instructions: Vec<Instruction>, origin: u32) -> Option<Program> {
        if instructions.is_empty() {
            return None;
        }
        let lines = (1..=instructions.len()).collect();
        Some(Program {
            instructions,
            origin,
            lines,
        })
    }

    pub(crate) fn with_lines(instructions: Vec<Instruction>, origin: u32, lines: Vec<usize>) -> Program {
        debug_assert_eq!(instructions.len(), lines.len());
        Program {
            instructions,
            origin,
            lines,
        }
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn origin(&self) -> u32 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Source line of the instruction at word address `pc`.
    pub fn source_line(&self, pc: u32) -> Option<usize> {
        self.index_of(pc).map(|i| self.lines[i])
    }

    fn index_of(&self, pc: u32) -> Option<usize> {
        let idx = pc.checked_sub(self.origin)? as usize;
        (idx < self.instructions.len()).then_some(idx)
    }

    /// Instruction at word address `pc`. Addresses outside the program
    /// fetch an implicit `HALT`.
    pub fn fetch(&self, pc: u32) -> Instruction {
        self.index_of(pc)
            .map(|i| self.instructions[i])
            .unwrap_or(Instruction::HALT)
    }

    pub fn contains(&self, pc: u32) -> bool {
        self.index_of(pc).is_some()
    }
}

/// Architectural state: the only thing a correct implementation must agree
/// on with the reference interpreter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArchState {
    pub regs: [u32; NUM_REGS],
    pub pc: u32,
    pub mem: BTreeMap<u32, u32>,
    pub halted: bool,
}

impl ArchState {
    pub fn new(pc: u32) -> Self {
        ArchState {
            regs: [0; NUM_REGS],
            pc,
            mem: BTreeMap::new(),
            halted: false,
        }
    }

    pub fn for_program(program: &Program) -> Self {
        ArchState::new(program.origin())
    }

    pub fn reg(&self, r: u8) -> u32 {
        if r == 0 {
            0
        } else {
            self.regs[r as usize]
        }
    }

    pub fn set_reg(&mut self, r: u8, value: u32) {
        if r != 0 {
            self.regs[r as usize] = value;
        }
    }

    /// Memory read; never-written words read as zero.
    pub fn load(&self, addr: u32) -> u32 {
        self.mem.get(&addr).copied().unwrap_or(0)
    }
}

/// Applies one instruction's architectural effect. Pure: the input state is
/// not modified.
pub fn step_reference(state: &ArchState, instr: &Instruction) -> ArchState {
    let mut next = state.clone();
    let a = state.reg(instr.rs1);
    let b = state.reg(instr.rs2);
    let mut pc = state.pc.wrapping_add(1);
    match instr.opcode {
        Opcode::Nop => {}
        Opcode::Halt => {
            next.halted = true;
            pc = state.pc;
        }
        Opcode::Ldi => next.set_reg(instr.rd, instr.imm_word()),
        Opcode::Mov => next.set_reg(instr.rd, a),
        Opcode::Add => next.set_reg(instr.rd, a.wrapping_add(b)),
        Opcode::Sub => next.set_reg(instr.rd, a.wrapping_sub(b)),
        Opcode::And => next.set_reg(instr.rd, a & b),
        Opcode::Or => next.set_reg(instr.rd, a | b),
        Opcode::Xor => next.set_reg(instr.rd, a ^ b),
        Opcode::Ld => {
            let addr = a.wrapping_add(instr.imm_word());
            next.set_reg(instr.rd, state.load(addr));
        }
        Opcode::St => {
            let addr = a.wrapping_add(instr.imm_word());
            next.mem.insert(addr, b);
        }
        Opcode::Beq => {
            if a == b {
                pc = state.pc.wrapping_add(instr.imm_word());
            }
        }
        Opcode::Jmp => pc = instr.imm as u16 as u32,
    }
    next.pc = pc;
    next
}

/// Runs the reference interpreter until `HALT` or `max_steps` instructions.
/// Returns the final state and the number of instructions executed; callers
/// detect exhaustion by `!state.halted`.
pub fn run_reference(program: &Program, max_steps: u64) -> (ArchState, u64) {
    let mut state = ArchState::for_program(program);
    let mut executed = 0;
    while !state.halted && executed < max_steps {
        let instr = program.fetch(state.pc);
        state = step_reference(&state, &instr);
        executed += 1;
    }
    (state, executed)
}
