//! Fault scenario text format, one fault per line:
//!
//! ```text
//! @<start> <PERM|T:<duration>> <site> <stuckat <bit> <0|1> | delay <extra> [<line>] | flip <bit>>
//! ```
//!
//! `<site>` is `<stage>.<copy>` (`decode.main`, `execute.spare`, ...) or a
//! controller copy `ctrl.a` / `ctrl.b`. `#` starts a comment.

use thiserror::Error;

use super::{ControllerCopy, FaultDuration, FaultKind, FaultScenario, FaultSite, TimedFault};
use crate::pipeline::{BlockId, Copy, StageKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("fault {fault}: {msg}")]
    Invalid { fault: usize, msg: String },
}

pub fn parse_scenario(text: &str) -> Result<FaultScenario, ScenarioError> {
    let mut faults = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        faults.push(parse_line(body).map_err(|msg| ScenarioError::Syntax { line, msg })?);
    }
    let scenario = FaultScenario::new(faults);
    // Structural checks only; threshold-dependent warnings are the caller's.
    scenario.validate(u32::MAX)?;
    Ok(scenario)
}

fn parse_line(body: &str) -> Result<TimedFault, String> {
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let [start, duration, site, kind, args @ ..] = tokens.as_slice() else {
        return Err("expected `@<start> <PERM|T:<n>> <site> <fault> ...`".into());
    };
    let start = start
        .strip_prefix('@')
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| format!("bad start cycle `{start}`"))?;
    let duration = if duration.eq_ignore_ascii_case("PERM") {
        FaultDuration::Permanent
    } else {
        duration
            .strip_prefix("T:")
            .and_then(|d| d.parse::<u64>().ok())
            .map(FaultDuration::Cycles)
            .ok_or_else(|| format!("bad duration `{duration}`"))?
    };
    let site = parse_site(site)?;
    let num = |s: &str| s.parse::<u32>().map_err(|_| format!("bad number `{s}`"));
    let kind = match (kind.to_ascii_lowercase().as_str(), args) {
        ("stuckat", [bit, value]) => FaultKind::StuckAt {
            bit: num(bit)?,
            value: match *value {
                "0" => false,
                "1" => true,
                v => return Err(format!("stuck value must be 0 or 1, found `{v}`")),
            },
        },
        ("delay", [extra]) => FaultKind::Delay {
            extra: num(extra)?,
            line: None,
        },
        ("delay", [extra, line]) => FaultKind::Delay {
            extra: num(extra)?,
            line: Some(num(line)?),
        },
        ("flip", [bit]) => FaultKind::TransientFlip { bit: num(bit)? },
        (k, _) => return Err(format!("bad fault `{k}` or wrong argument count")),
    };
    Ok(TimedFault {
        kind,
        site,
        start,
        duration,
    })
}

fn parse_site(text: &str) -> Result<FaultSite, String> {
    let (unit, copy) = text
        .split_once('.')
        .ok_or_else(|| format!("bad site `{text}`, expected <stage>.<copy>"))?;
    if unit.eq_ignore_ascii_case("ctrl") {
        return match copy.to_ascii_lowercase().as_str() {
            "a" => Ok(FaultSite::Controller(ControllerCopy::A)),
            "b" => Ok(FaultSite::Controller(ControllerCopy::B)),
            _ => Err(format!("unknown controller copy `{copy}`")),
        };
    }
    let kind: StageKind = unit.parse()?;
    let copy: Copy = copy.parse()?;
    Ok(FaultSite::Bus(BlockId::new(kind, copy)))
}
