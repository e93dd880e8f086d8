use std::fmt::Write as _;

use super::{fmt_f64, meta_config, CmdError, CmdOutput, CsvReport, FormulaArgs, Status};
use crate::pipeline::CoreConfig;
use crate::redundancy::{
    availability, r_ifr, r_ifr_pipeline, r_standby, r_tmr, reliability_from_rate, AvailabilityInputs, CoverageFactor,
    DomainError, FailureRate, MissionTime, Reliability,
};

/// Expands a grid: `x`, a comma list `a,b,c`, or an inclusive range `a..b`
/// stepped by `step`. Range endpoints are hit exactly.
pub fn parse_grid(text: &str, step: f64) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", s.trim()))
    };
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if !(step.is_finite() && step > 0.0) {
            return Err(format!("step must be positive, got {step}"));
        }
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(format!("range `{text}` is empty"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        let mut out: Vec<f64> = (0..=n).map(|i| a + i as f64 * step).collect();
        if let Some(last) = out.last_mut() {
            if (*last - b).abs() <= 1e-9 * step {
                *last = b;
            }
        }
        return Ok(out);
    }
    text.split(',').map(num).collect()
}

fn integer_grid(text: &str) -> Result<Vec<u32>, String> {
    parse_grid(text, 1.0)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(format!("spare count {v} must be a non-negative integer"))
            }
        })
        .collect()
}

/// Tabulates the selected formulas over the grid of their inputs.
///
/// Three groups exist: the reliability formulas (`--tmr`, `--standby`,
/// `--ifr`, `--ifr-pipeline`) over `R` and `s`, `--availability` over MTTF
/// and MTTR, and `--exp` over failure rate and time. Out-of-domain inputs
/// produce a row with an `error` cell and exit status `Domain`.
pub fn cmd_formulas(args: &FormulaArgs, config: &CoreConfig) -> Result<CmdOutput, CmdError> {
    let reliability = args.tmr || args.standby || args.ifr || args.ifr_pipeline;
    let groups = usize::from(reliability) + usize::from(args.availability) + usize::from(args.exp);
    if groups == 0 {
        return Err(CmdError::parse(
            "select a formula: --tmr, --standby, --ifr, --ifr-pipeline, --availability or --exp",
        ));
    }
    if groups > 1 {
        return Err(CmdError::parse(
            "reliability formulas, --availability and --exp take different inputs; request one group per run",
        ));
    }
    let mut out = if reliability {
        reliability_table(args)?
    } else if args.availability {
        availability_table(args)?
    } else {
        exp_table(args)?
    };
    meta_config(&mut out.report, config);
    Ok(out)
}

fn grid(text: &str, step: f64) -> Result<Vec<f64>, CmdError> {
    parse_grid(text, step).map_err(CmdError::parse)
}

fn finish(mut report: CsvReport, rows: usize, errors: usize) -> CmdOutput {
    report.meta("rows", rows);
    let status = if errors > 0 { Status::Domain } else { Status::Ok };
    let mut summary = format!("{rows} rows");
    if errors > 0 {
        let _ = write!(summary, ", {errors} outside the formula domain");
    }
    summary.push('\n');
    CmdOutput {
        report,
        summary,
        status,
    }
}

fn reliability_table(args: &FormulaArgs) -> Result<CmdOutput, CmdError> {
    let rs = grid(&args.r, args.step)?;
    let spares = integer_grid(&args.spares).map_err(CmdError::parse)?;
    let mut columns = vec!["R", "s"];
    let picks = [
        (args.tmr, "tmr"),
        (args.standby, "standby"),
        (args.ifr, "ifr"),
        (args.ifr_pipeline, "ifr_pipeline"),
    ];
    columns.extend(picks.iter().filter(|(on, _)| *on).map(|(_, name)| *name));
    columns.push("error");

    let mut report = CsvReport::new(&columns);
    report
        .meta("command", "formulas")
        .meta("r", &args.r)
        .meta("step", fmt_f64(args.step))
        .meta("spares", &args.spares)
        .meta("coverage", fmt_f64(args.coverage))
        .meta("rsw", fmt_f64(args.rsw))
        .meta("rctrl", fmt_f64(args.rctrl));

    // Spares only matter to the single-block formula.
    let spare_grid = if args.ifr { spares } else { vec![1] };
    let (mut rows, mut errors) = (0, 0);
    for &rv in &rs {
        for &s in &spare_grid {
            let values: Result<Vec<f64>, DomainError> = (|| {
                let r = Reliability::new(rv)?;
                let mut v = Vec::new();
                if args.tmr {
                    v.push(r_tmr(r).value());
                }
                if args.standby {
                    v.push(r_standby(r).value());
                }
                if args.ifr {
                    v.push(r_ifr(r, s).value());
                }
                if args.ifr_pipeline {
                    let c = CoverageFactor::new(args.coverage)?;
                    let sw = Reliability::new(args.rsw)?;
                    let ctrl = Reliability::new(args.rctrl)?;
                    v.push(r_ifr_pipeline(r, c, sw, ctrl).value());
                }
                Ok(v)
            })();
            let mut row = vec![fmt_f64(rv), s.to_string()];
            push_values(&mut row, values, columns.len() - 3, &mut errors);
            report.push_row(row);
            rows += 1;
        }
    }
    Ok(finish(report, rows, errors))
}

fn push_values(row: &mut Vec<String>, values: Result<Vec<f64>, DomainError>, width: usize, errors: &mut usize) {
    match values {
        Ok(v) => {
            row.extend(v.into_iter().map(fmt_f64));
            row.push(String::new());
        }
        Err(e) => {
            *errors += 1;
            row.extend(std::iter::repeat_n(String::new(), width));
            row.push(e.to_string());
        }
    }
}

fn availability_table(args: &FormulaArgs) -> Result<CmdOutput, CmdError> {
    let mttfs = grid(&args.mttf, args.step)?;
    let mttrs = grid(&args.mttr, args.step)?;
    let mut report = CsvReport::new(&["mttf", "mttr", "mtbf", "availability", "error"]);
    report
        .meta("command", "formulas")
        .meta("mttf", &args.mttf)
        .meta("mttr", &args.mttr);
    let (mut rows, mut errors) = (0, 0);
    for &f in &mttfs {
        for &r in &mttrs {
            let values = AvailabilityInputs::new(f, r).map(|i| vec![i.mtbf(), availability(&i)]);
            let mut row = vec![fmt_f64(f), fmt_f64(r)];
            push_values(&mut row, values, 2, &mut errors);
            report.push_row(row);
            rows += 1;
        }
    }
    Ok(finish(report, rows, errors))
}

fn exp_table(args: &FormulaArgs) -> Result<CmdOutput, CmdError> {
    let lambdas = grid(&args.lambda, args.step)?;
    let times = grid(&args.time, args.step)?;
    let mut report = CsvReport::new(&["lambda", "t", "reliability", "error"]);
    report
        .meta("command", "formulas")
        .meta("lambda", &args.lambda)
        .meta("time", &args.time);
    let (mut rows, mut errors) = (0, 0);
    for &l in &lambdas {
        for &t in &times {
            let values = FailureRate::new(l)
                .and_then(|rate| Ok(vec![reliability_from_rate(rate, MissionTime::new(t)?).value()]));
            let mut row = vec![fmt_f64(l), fmt_f64(t)];
            push_values(&mut row, values, 1, &mut errors);
            report.push_row(row);
            rows += 1;
        }
    }
    Ok(finish(report, rows, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(out: &CmdOutput, row: usize, col: &str) -> f64 {
        out.report.cell(row, col).unwrap().parse().unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5", 0.1).unwrap(), vec![0.5]);
        assert_eq!(parse_grid("1,2,4", 0.1).unwrap(), vec![1.0, 2.0, 4.0]);
        let g = parse_grid("0..1", 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert!(parse_grid("1..0", 0.1).is_err());
        assert!(parse_grid("0..1", 0.0).is_err());
        assert!(parse_grid("x", 0.1).is_err());
        assert!(integer_grid("0.5").is_err());
    }

    #[test]
    fn tmr_and_standby_grid() {
        let args = FormulaArgs {
            tmr: true,
            standby: true,
            ..FormulaArgs::default()
        };
        let out = cmd_formulas(&args, &CoreConfig::default()).unwrap();
        assert_eq!(out.report.rows().len(), 11);
        for i in 0..11 {
            assert!(num(&out, i, "standby") >= num(&out, i, "tmr"));
        }
        assert_eq!(out.status, Status::Ok);
    }

    #[test]
    fn ifr_spares() {
        let args = FormulaArgs {
            ifr: true,
            r: "0.9".into(),
            spares: "0..3".into(),
            ..FormulaArgs::default()
        };
        let out = cmd_formulas(&args, &CoreConfig::default()).unwrap();
        let got: Vec<f64> = (0..4).map(|i| num(&out, i, "ifr")).collect();
        for (g, want) in got.iter().zip([0.9, 0.99, 0.999, 0.9999]) {
            assert!((g - want).abs() < 1e-12, "{g} vs {want}");
        }
    }

    #[test]
    fn availability_example() {
        let args = FormulaArgs {
            availability: true,
            mttf: "999".into(),
            mttr: "1".into(),
            ..FormulaArgs::default()
        };
        let out = cmd_formulas(&args, &CoreConfig::default()).unwrap();
        assert!((num(&out, 0, "availability") - 0.999).abs() < 1e-12);
        assert_eq!(num(&out, 0, "mtbf"), 1000.0);
    }

    #[test]
    fn domain_errors_are_per_row() {
        let args = FormulaArgs {
            tmr: true,
            r: "0.5,1.5".into(),
            ..FormulaArgs::default()
        };
        let out = cmd_formulas(&args, &CoreConfig::default()).unwrap();
        assert_eq!(out.status, Status::Domain);
        assert_eq!(out.report.cell(0, "error"), Some(""));
        assert_eq!(out.report.cell(1, "tmr"), Some(""));
        assert!(!out.report.cell(1, "error").unwrap().is_empty());
    }

    #[test]
    fn group_selection() {
        let none = cmd_formulas(&FormulaArgs::default(), &CoreConfig::default()).unwrap_err();
        assert_eq!(none.status, Status::Parse);
        let mixed = FormulaArgs {
            tmr: true,
            exp: true,
            ..FormulaArgs::default()
        };
        assert_eq!(
            cmd_formulas(&mixed, &CoreConfig::default()).unwrap_err().status,
            Status::Parse
        );
    }

    #[test]
    fn exp_reliability() {
        let args = FormulaArgs {
            exp: true,
            lambda: "1e-6".into(),
            time: "1000".into(),
            ..FormulaArgs::default()
        };
        let out = cmd_formulas(&args, &CoreConfig::default()).unwrap();
        assert!((num(&out, 0, "reliability") - (-1e-3f64).exp()).abs() < 1e-9);
    }
}
