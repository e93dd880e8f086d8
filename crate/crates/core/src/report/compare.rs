use rayon::prelude::*;

use super::{fmt_f64, meta_config, parse_range, CmdError, CmdOutput, CompareArgs, CsvReport, Status};
use crate::markov::{death_probability, log_space, BoundedProbability, BuiltinModel, SolverError};
use crate::pipeline::CoreConfig;
use crate::redundancy::{FailureRate, MissionTime};

const ARCHS: [&str; 4] = ["simplex", "tmr", "standby", "ifr"];

/// Death-probability brackets of the four architectures, one row per rate.
///
/// `tmr_le_3x_standby` compares TMR's lower bound against three times
/// standby's upper bound, so it only reads `false` when the brackets prove
/// the ordering is violated.
pub fn cmd_compare(args: &CompareArgs, config: &CoreConfig) -> Result<CmdOutput, CmdError> {
    let t = MissionTime::new(args.time).map_err(|e| CmdError::parse(e.to_string()))?;
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(CmdError::parse(format!("--tol must lie in (0, 1), got {}", args.tol)));
    }
    let lambdas = match args.lambda {
        Some(l) => vec![l],
        None => {
            let (lo, hi) = parse_range(&args.range)?;
            if args.points < 2 {
                return Err(CmdError::parse("a range needs at least 2 points"));
            }
            log_space(lo, hi, args.points)
        }
    };
    let rates = lambdas
        .iter()
        .map(|&l| FailureRate::new(l).map_err(|e| CmdError::parse(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let models = [
        BuiltinModel::Simplex,
        BuiltinModel::Tmr,
        BuiltinModel::Standby,
        BuiltinModel::IfrPipeline {
            sw_ratio: args.sw_ratio,
            ctrl_ratio: args.ctrl_ratio,
        },
    ];

    let rows: Vec<Result<[BoundedProbability; 4], String>> = rates
        .par_iter()
        .map(|&rate| {
            let mut out = [BoundedProbability::ZERO; 4];
            for (slot, b) in out.iter_mut().zip(&models) {
                let m = b.build(rate).map_err(|e| e.to_string())?;
                *slot = death_probability(&m, t, args.tol).map_err(|e: SolverError| format!("{b}: {e}"))?;
            }
            Ok(out)
        })
        .collect();

    let mut columns = vec!["lambda".to_string()];
    for a in ARCHS {
        columns.push(format!("{a}_lower"));
        columns.push(format!("{a}_upper"));
    }
    columns.push("tmr_le_3x_standby".into());
    columns.push("error".into());
    let mut report = CsvReport::new(&columns);
    report
        .meta("command", "compare")
        .meta("T", fmt_f64(args.time))
        .meta("range", args.lambda.map_or(args.range.clone(), fmt_f64))
        .meta("points", lambdas.len())
        .meta("tol", fmt_f64(args.tol))
        .meta("sw_ratio", fmt_f64(args.sw_ratio))
        .meta("ctrl_ratio", fmt_f64(args.ctrl_ratio));
    meta_config(&mut report, config);

    let (mut failures, mut violations) = (0, 0);
    for (l, result) in lambdas.iter().zip(&rows) {
        let mut row = vec![fmt_f64(*l)];
        match result {
            Ok(b) => {
                for x in b {
                    row.push(fmt_f64(x.lower));
                    row.push(fmt_f64(x.upper));
                }
                let ok = b[1].lower <= 3.0 * b[2].upper;
                violations += usize::from(!ok);
                row.push(ok.to_string());
                row.push(String::new());
            }
            Err(e) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(e.clone());
            }
        }
        report.push_row(row);
    }
    let summary = format!(
        "{} rates at T = {} h, {failures} unresolved, {violations} rows with TMR above 3x standby\n",
        lambdas.len(),
        args.time
    );
    let status = if failures > 0 { Status::Solver } else { Status::Ok };
    Ok(CmdOutput {
        report,
        summary,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(out: &CmdOutput, row: usize, col: &str) -> f64 {
        out.report.cell(row, col).unwrap().parse().unwrap()
    }

    #[test]
    fn single_rate_row() {
        let a = CompareArgs {
            lambda: Some(1e-6),
            ..CompareArgs::default()
        };
        let out = cmd_compare(&a, &CoreConfig::default()).unwrap();
        assert_eq!(out.report.rows().len(), 1);
        let simplex = num(&out, 0, "simplex_upper");
        assert!((simplex - 1e-3).abs() < 1e-5);
        assert!(num(&out, 0, "standby_upper") < simplex);
        assert_eq!(out.report.cell(0, "tmr_le_3x_standby"), Some("true"));
    }

    #[test]
    fn default_range_rows() {
        let out = cmd_compare(&CompareArgs::default(), &CoreConfig::default()).unwrap();
        assert_eq!(out.report.rows().len(), 25);
        for i in 0..25 {
            assert_eq!(out.report.cell(i, "tmr_le_3x_standby"), Some("true"));
        }
    }

    #[test]
    fn empty_range_rejected() {
        let a = CompareArgs {
            range: "1e-2..1e-6".into(),
            ..CompareArgs::default()
        };
        assert_eq!(
            cmd_compare(&a, &CoreConfig::default()).unwrap_err().status,
            Status::Parse
        );
    }
}
