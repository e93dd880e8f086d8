use std::fmt::Write as _;

use super::{fmt_f64, meta_config, CmdError, CmdOutput, CsvReport, Status};
use crate::fault::parse_scenario;
use crate::isa::{assemble, run_reference};
use crate::pipeline::{run_core, BlockId, CoreConfig, DeadCause, Outcome};

const COLUMNS: [&str; 10] = [
    "case",
    "event",
    "stage",
    "class",
    "fault_ids",
    "detect_cycle",
    "classify_cycle",
    "swap_complete_cycle",
    "recovery_cycles",
    "recovery_us",
];

/// Runs `program_source` once per `(name, scenario text)` case and reports
/// every classified event.
///
/// The status is `Dead` if any case died, else `GoldenMismatch` if any
/// completed run disagrees with the reference interpreter, else `Exhausted`
/// if any run hit the cycle budget.
pub fn cmd_sim(
    program_name: &str,
    program_source: &str,
    cases: &[(String, String)],
    config: &CoreConfig,
) -> Result<CmdOutput, CmdError> {
    config.validate().map_err(|e| CmdError::parse(format!("config: {e}")))?;
    let program = assemble(program_source).map_err(|e| CmdError::parse(format!("{program_name}: {e}")))?;
    let (reference, _) = run_reference(&program, config.max_cycles);

    let mut report = CsvReport::new(&COLUMNS);
    report.meta("command", "sim").meta("program", program_name);
    meta_config(&mut report, config);
    report.meta("cases", cases.len());

    let mut summary = String::new();
    let mut status = Status::Ok;
    for (idx, (name, text)) in cases.iter().enumerate() {
        let scenario = parse_scenario(text).map_err(|e| CmdError::parse(format!("{name}: {e}")))?;
        let warnings = scenario
            .validate(config.permanent_threshold)
            .map_err(|e| CmdError::parse(format!("{name}: {e}")))?;
        let sim = run_core(&program, config, &scenario);
        let golden = sim.outcome == Outcome::Completed && sim.final_state == reference;

        let key = |k: &str| format!("case.{idx}.{k}");
        report.meta(key("name"), name);
        report.meta(
            key("scenario"),
            scenario
                .faults
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(" | "),
        );
        report.meta(key("outcome"), sim.outcome.name());
        report.meta(key("golden_match"), golden);
        report.meta(key("total_cycles"), sim.total_cycles);
        report.meta(key("committed"), sim.committed);
        report.meta(
            key("dead_cause"),
            match sim.dead_cause {
                None => String::new(),
                Some(DeadCause::ControllerMismatch { cycle }) => format!("controller mismatch at cycle {cycle}"),
                Some(DeadCause::SparesExhausted { stage, cycle }) => format!("{stage} spare failed at cycle {cycle}"),
            },
        );
        report.meta(key("warnings"), warnings.join(" | "));
        report.meta(key("classifier_mismatches"), sim.classifier_mismatches.join(" | "));
        report.meta(
            key("unobserved_faults"),
            sim.unobserved_faults
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        report.meta(key("stress_conserved"), sim.stress.is_conserved());
        for block in BlockId::all() {
            let s = sim.stress.get(block);
            report.meta(
                key(&format!("stress.{block}")),
                format!("on={} off={} powering={}", s.on_cycles, s.off_cycles, s.powering_cycles),
            );
        }

        for (n, e) in sim.recovery_events.iter().enumerate() {
            let opt = |v: Option<u64>| v.map_or(String::new(), |c| c.to_string());
            report.push_row(vec![
                name.clone(),
                n.to_string(),
                e.stage.to_string(),
                e.class.to_string(),
                e.faults.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";"),
                e.detect_cycle.to_string(),
                e.classify_cycle.to_string(),
                opt(e.swap_complete_cycle),
                opt(e.recovery_cycles()),
                e.recovery_cycles()
                    .map_or(String::new(), |c| fmt_f64(config.cycles_to_us(c))),
            ]);
        }

        let _ = write!(
            summary,
            "{name}: {} after {} cycles",
            sim.outcome.name(),
            sim.total_cycles
        );
        for e in sim.permanent_events() {
            match e.recovery_cycles() {
                Some(c) => {
                    let _ = write!(
                        summary,
                        ", {} repaired in {c} cycles ({:.2} us)",
                        e.stage,
                        config.cycles_to_us(c)
                    );
                }
                None => {
                    let _ = write!(summary, ", {} not repaired", e.stage);
                }
            }
        }
        let transients = sim.transient_events().count();
        if transients > 0 {
            let _ = write!(summary, ", {transients} transient");
        }
        let _ = writeln!(summary, ", golden match: {golden}");

        let case_status = match sim.outcome {
            Outcome::Dead => Status::Dead,
            Outcome::Exhausted => Status::Exhausted,
            Outcome::Completed if !golden => Status::GoldenMismatch,
            Outcome::Completed => Status::Ok,
        };
        status = worst(status, case_status);
    }
    Ok(CmdOutput {
        report,
        summary,
        status,
    })
}

fn worst(a: Status, b: Status) -> Status {
    let rank = |s| match s {
        Status::Dead => 3,
        Status::GoldenMismatch => 2,
        Status::Exhausted => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::CANONICAL_SOURCE;

    fn case(name: &str, text: &str) -> (String, String) {
        (name.to_string(), text.to_string())
    }

    #[test]
    fn stuck_at_decode_row() {
        let cfg = CoreConfig::default();
        let out = cmd_sim(
            "canonical",
            CANONICAL_SOURCE,
            &[case("decode", "@10 PERM decode.main stuckat 3 1")],
            &cfg,
        )
        .unwrap();
        assert_eq!(out.status, Status::Ok);
        assert_eq!(out.report.rows().len(), 1);
        let us: f64 = out.report.cell(0, "recovery_us").unwrap().parse().unwrap();
        assert!(us > 0.0 && us < 2.0);
        assert_eq!(out.report.cell(0, "class"), Some("permanent"));
        assert_eq!(out.report.meta_value("case.0.golden_match"), Some("true"));
    }

    #[test]
    fn fault_free_has_no_rows() {
        let out = cmd_sim("p", "LDI r1, 7\nHALT", &[case("clean", "")], &CoreConfig::default()).unwrap();
        assert!(out.report.rows().is_empty());
        assert_eq!(out.report.meta_value("case.0.outcome"), Some("Completed"));
        assert_eq!(out.status, Status::Ok);
    }

    #[test]
    fn controller_fault_is_dead() {
        let out = cmd_sim(
            "p",
            CANONICAL_SOURCE,
            &[case("ctrl", "@7 PERM ctrl.a stuckat 0 1")],
            &CoreConfig::default(),
        )
        .unwrap();
        assert_eq!(out.status, Status::Dead);
        assert_eq!(out.report.meta_value("case.0.outcome"), Some("Dead"));
    }

    #[test]
    fn parse_failures() {
        let cfg = CoreConfig::default();
        let e = cmd_sim("p", "FOO r1", &[], &cfg).unwrap_err();
        assert_eq!(e.status, Status::Parse);
        let e = cmd_sim("p", "HALT", &[case("bad", "@1 PERM nowhere.main flip 1")], &cfg).unwrap_err();
        assert_eq!(e.status, Status::Parse);
    }

    #[test]
    fn every_config_field_is_recorded() {
        let out = cmd_sim("p", "HALT", &[], &CoreConfig::default()).unwrap();
        for key in CoreConfig::KEYS {
            assert!(out.report.meta_value(&format!("config.{key}")).is_some(), "{key}");
        }
    }
}
