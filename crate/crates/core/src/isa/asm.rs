//! Line-oriented assembler.
//!
//! One instruction per line, `;` starts a comment, registers are `r0`..`r15`.
//! A line may carry a `label:` prefix; `BEQ` and `JMP` accept a label in place
//! of the immediate. An optional `.org <addr>` before the first instruction
//! sets the load address.

use std::collections::HashMap;

use thiserror::Error;

use super::{Instruction, Opcode, Program, NUM_REGS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown mnemonic `{mnemonic}`")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("line {line}: register `{text}` out of range (r0..r15)")]
    BadRegister { line: usize, text: String },
    #[error("line {line}: immediate {value} does not fit in 16 signed bits")]
    ImmediateRange { line: usize, value: i64 },
    #[error("line {line}: branch target {target} lies outside the program")]
    TargetOutOfRange { line: usize, target: i64 },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("program contains no instructions")]
    Empty,
}

struct Pending<'a> {
    line: usize,
    mnemonic: &'a str,
    operands: Vec<&'a str>,
}

pub fn assemble(source: &str) -> Result<Program, AsmError> {
    let mut origin = 0u32;
    let mut labels: HashMap<&str, u32> = HashMap::new();
    let mut pending = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let mut text = raw.split(';').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix(".org") {
            if !pending.is_empty() {
                return Err(syntax(line, ".org must precede all instructions"));
            }
            let value = parse_int(rest.trim()).ok_or_else(|| syntax(line, "bad .org address"))?;
            origin = u32::try_from(value).map_err(|_| syntax(line, "bad .org address"))?;
            continue;
        }
        if let Some((label, rest)) = text.split_once(':') {
            let label = label.trim();
            if !is_ident(label) {
                return Err(syntax(line, format!("bad label `{label}`")));
            }
            let addr = origin + pending.len() as u32;
            if labels.insert(label, addr).is_some() {
                return Err(AsmError::DuplicateLabel {
                    line,
                    label: label.to_string(),
                });
            }
            text = rest.trim();
            if text.is_empty() {
                continue;
            }
        }
        let (mnemonic, rest) = match text.split_once(char::is_whitespace) {
            Some((m, r)) => (m, r.trim()),
            None => (text, ""),
        };
        let operands = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',').map(str::trim).collect()
        };
        pending.push(Pending {
            line,
            mnemonic,
            operands,
        });
    }

    if pending.is_empty() {
        return Err(AsmError::Empty);
    }
    let end = origin as i64 + pending.len() as i64;
    let mut instructions = Vec::with_capacity(pending.len());
    let mut lines = Vec::with_capacity(pending.len());
    for (i, p) in pending.iter().enumerate() {
        let pc = origin as i64 + i as i64;
        let instr = encode_line(p, pc, &labels)?;
        let target = match instr.opcode {
            Opcode::Beq => Some(pc + instr.imm as i64),
            Opcode::Jmp => Some(instr.imm as u16 as i64),
            _ => None,
        };
        if let Some(target) = target {
            if target < origin as i64 || target >= end {
                return Err(AsmError::TargetOutOfRange { line: p.line, target });
            }
        }
        instructions.push(instr);
        lines.push(p.line);
    }
    Ok(Program::with_lines(instructions, origin, lines))
}

fn encode_line(p: &Pending<'_>, pc: i64, labels: &HashMap<&str, u32>) -> Result<Instruction, AsmError> {
    let line = p.line;
    let op = Opcode::from_mnemonic(p.mnemonic).ok_or_else(|| AsmError::UnknownMnemonic {
        line,
        mnemonic: p.mnemonic.to_string(),
    })?;
    let arity = match op {
        Opcode::Nop | Opcode::Halt => 0,
        Opcode::Jmp => 1,
        Opcode::Ldi | Opcode::Mov => 2,
        _ => 3,
    };
    if p.operands.len() != arity {
        return Err(syntax(
            line,
            format!("{op} takes {arity} operand(s), found {}", p.operands.len()),
        ));
    }
    let reg = |i: usize| parse_reg(line, p.operands[i]);
    let imm = |i: usize| parse_imm(line, p.operands[i]);
    let target = |i: usize, relative: bool| -> Result<i16, AsmError> {
        let text = p.operands[i];
        if is_ident(text) && !looks_numeric(text) {
            let addr = *labels.get(text).ok_or_else(|| AsmError::UndefinedLabel {
                line,
                label: text.to_string(),
            })? as i64;
            let value = if relative { addr - pc } else { addr };
            fit_i16(line, value)
        } else {
            imm(i)
        }
    };
    let instr = match op {
        Opcode::Nop | Opcode::Halt => Instruction::new(op, 0, 0, 0, 0),
        Opcode::Ldi => Instruction::new(op, reg(0)?, 0, 0, imm(1)?),
        Opcode::Mov => Instruction::new(op, reg(0)?, reg(1)?, 0, 0),
        Opcode::Add | Opcode::Sub | Opcode::And | Opcode::Or | Opcode::Xor => {
            Instruction::new(op, reg(0)?, reg(1)?, reg(2)?, 0)
        }
        Opcode::Ld => Instruction::new(op, reg(0)?, reg(1)?, 0, imm(2)?),
        Opcode::St => Instruction::new(op, 0, reg(1)?, reg(0)?, imm(2)?),
        Opcode::Beq => Instruction::new(op, 0, reg(0)?, reg(1)?, target(2, true)?),
        Opcode::Jmp => {
            let t = target(0, false)?;
            if t < 0 {
                return Err(AsmError::TargetOutOfRange { line, target: t as i64 });
            }
            Instruction::new(op, 0, 0, 0, t)
        }
    };
    Ok(instr)
}

fn syntax(line: usize, msg: impl Into<String>) -> AsmError {
    AsmError::Syntax { line, msg: msg.into() }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn looks_numeric(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_digit() || c == '+' || c == '-')
}

fn parse_reg(line: usize, text: &str) -> Result<u8, AsmError> {
    let digits = text
        .strip_prefix(['r', 'R'])
        .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
        .ok_or_else(|| syntax(line, format!("expected register, found `{text}`")))?;
    match digits.parse::<usize>() {
        Ok(n) if n < NUM_REGS => Ok(n as u8),
        _ => Err(AsmError::BadRegister {
            line,
            text: text.to_string(),
        }),
    }
}

fn parse_int(text: &str) -> Option<i64> {
    let (neg, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let value = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        body.parse::<i64>().ok()?
    };
    Some(if neg { -value } else { value })
}

fn parse_imm(line: usize, text: &str) -> Result<i16, AsmError> {
    let value = parse_int(text).ok_or_else(|| syntax(line, format!("expected immediate, found `{text}`")))?;
    fit_i16(line, value)
}

fn fit_i16(line: usize, value: i64) -> Result<i16, AsmError> {
    i16::try_from(value).map_err(|_| AsmError::ImmediateRange { line, value })
}
