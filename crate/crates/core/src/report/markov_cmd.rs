use std::fmt::Write as _;

use rayon::prelude::*;

use super::{fmt_f64, meta_config, parse_range, CmdError, CmdOutput, CsvReport, MarkovArgs, Status};
use crate::markov::{
    death_probability, log_space, monte_carlo_death_probability, parse_model, BuiltinModel, MarkovModel,
};
use crate::pipeline::CoreConfig;
use crate::redundancy::{FailureRate, MissionTime};

const COLUMNS: [&str; 8] = [
    "model",
    "constant",
    "value",
    "T",
    "lower",
    "upper",
    "width_rel",
    "error",
];
const MC_COLUMNS: [&str; 4] = ["mc_trials", "mc_estimate", "mc_ci99", "mc_overlaps"];

enum Source {
    Builtin(BuiltinModel),
    File(MarkovModel),
}

impl Source {
    fn at(&self, constant: Option<&str>, value: Option<f64>) -> Result<MarkovModel, CmdError> {
        let bad = |e: String| CmdError::parse(e);
        match (self, value) {
            (Source::Builtin(b), Some(v)) => {
                let rate = FailureRate::new(v).map_err(|e| bad(e.to_string()))?;
                b.build(rate).map_err(|e| bad(e.to_string()))
            }
            (Source::Builtin(_), None) => unreachable!("builtins always carry a rate"),
            (Source::File(m), Some(v)) => m
                .with_constant(constant.expect("value implies a constant"), v)
                .map_err(|e| bad(e.to_string())),
            (Source::File(m), None) => Ok(m.clone()),
        }
    }
}

/// Brackets the death probability of a model file (`model_text` as
/// `(name, text)`) or a builtin at one point or across a log-spaced sweep.
///
/// Builtins default to a rate of `1e-6` per hour. Points whose bracket
/// cannot be narrowed to `--tol` carry the solver message in `error` and
/// make the exit status `Solver`.
pub fn cmd_markov(
    args: &MarkovArgs,
    model_text: Option<(&str, &str)>,
    config: &CoreConfig,
) -> Result<CmdOutput, CmdError> {
    let t = MissionTime::new(args.time).map_err(|e| CmdError::parse(e.to_string()))?;
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(CmdError::parse(format!("--tol must lie in (0, 1), got {}", args.tol)));
    }
    let (name, source) = match (model_text, args.builtin) {
        (Some((name, text)), _) => {
            let m = parse_model(text).map_err(|e| CmdError::parse(format!("{name}: {e}")))?;
            (name.to_string(), Source::File(m))
        }
        (None, Some(b)) => {
            let b = match b {
                BuiltinModel::IfrPipeline { .. } => BuiltinModel::IfrPipeline {
                    sw_ratio: args.sw_ratio,
                    ctrl_ratio: args.ctrl_ratio,
                },
                other => other,
            };
            (b.name().to_string(), Source::Builtin(b))
        }
        (None, None) => return Err(CmdError::parse("give --model FILE or --builtin NAME")),
    };

    let constant: Option<String> = match &source {
        Source::Builtin(b) => Some(args.constant.clone().unwrap_or_else(|| b.rate_constant().to_string())),
        Source::File(_) if args.lambda.is_some() || args.sweep.is_some() => {
            Some(args.constant.clone().unwrap_or_else(|| "lambda".to_string()))
        }
        Source::File(_) => None,
    };
    if let (Source::Builtin(b), Some(c)) = (&source, &constant) {
        if c != b.rate_constant() {
            return Err(CmdError::parse(format!(
                "builtin {} is swept over `{}`",
                b.name(),
                b.rate_constant()
            )));
        }
    }

    let values: Vec<Option<f64>> = match &args.sweep {
        Some(range) => {
            let (lo, hi) = parse_range(range)?;
            if args.points < 2 {
                return Err(CmdError::parse("a sweep needs at least 2 points"));
            }
            log_space(lo, hi, args.points).into_iter().map(Some).collect()
        }
        None => match (&source, args.lambda) {
            (Source::Builtin(_), l) => vec![Some(l.unwrap_or(1e-6))],
            (Source::File(_), l) => vec![l],
        },
    };
    let models = values
        .iter()
        .map(|&v| source.at(constant.as_deref(), v))
        .collect::<Result<Vec<_>, _>>()?;

    let results: Vec<_> = models.par_iter().map(|m| death_probability(m, t, args.tol)).collect();
    let mc: Option<Vec<_>> = args.mc.map(|trials| {
        models
            .iter()
            .map(|m| monte_carlo_death_probability(m, t, trials, config.rng_seed))
            .collect()
    });

    let mut columns: Vec<&str> = COLUMNS.to_vec();
    if mc.is_some() {
        columns.extend(MC_COLUMNS);
    }
    let mut report = CsvReport::new(&columns);
    report
        .meta("command", "markov")
        .meta("model", &name)
        .meta("T", fmt_f64(args.time))
        .meta("tol", fmt_f64(args.tol))
        .meta("sweep", args.sweep.as_deref().unwrap_or(""))
        .meta("points", values.len())
        .meta("mc_trials", args.mc.map_or(String::new(), |n| n.to_string()));
    if let Source::Builtin(BuiltinModel::IfrPipeline { sw_ratio, ctrl_ratio }) = &source {
        report
            .meta("sw_ratio", fmt_f64(*sw_ratio))
            .meta("ctrl_ratio", fmt_f64(*ctrl_ratio));
    }
    meta_config(&mut report, config);

    let mut failures = 0;
    for (i, (value, result)) in values.iter().zip(&results).enumerate() {
        let mut row = vec![
            name.clone(),
            constant.clone().unwrap_or_default(),
            value.map(fmt_f64).unwrap_or_default(),
            fmt_f64(args.time),
        ];
        match result {
            Ok(b) => {
                row.extend([
                    fmt_f64(b.lower),
                    fmt_f64(b.upper),
                    fmt_f64(b.rel_width()),
                    String::new(),
                ]);
            }
            Err(e) => {
                failures += 1;
                row.extend([String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
        if let Some(mc) = &mc {
            let est = &mc[i];
            let overlaps = match result {
                Ok(b) => est.overlaps(b.lower, b.upper).to_string(),
                Err(_) => String::new(),
            };
            row.extend([
                est.trials.to_string(),
                fmt_f64(est.estimate),
                fmt_f64(est.ci99),
                overlaps,
            ]);
        }
        report.push_row(row);
    }

    let mut summary = String::new();
    if let [Ok(b)] = results.as_slice() {
        let _ = writeln!(
            summary,
            "{name}: D({}) in [{:.6e}, {:.6e}]",
            args.time, b.lower, b.upper
        );
    } else {
        let _ = writeln!(summary, "{name}: {} points, {failures} unresolved", results.len());
    }
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

    fn args() -> MarkovArgs {
        MarkovArgs::default()
    }

    fn num(out: &CmdOutput, row: usize, col: &str) -> f64 {
        out.report.cell(row, col).unwrap().parse().unwrap()
    }

    #[test]
    fn simplex_point() {
        let a = MarkovArgs {
            builtin: Some(BuiltinModel::Simplex),
            lambda: Some(1e-6),
            ..args()
        };
        let out = cmd_markov(&a, None, &CoreConfig::default()).unwrap();
        let exact = -(-1e-3f64).exp_m1();
        assert!(num(&out, 0, "lower") <= exact && exact <= num(&out, 0, "upper"));
        assert_eq!(out.status, Status::Ok);
    }

    #[test]
    fn tmr_sweep_is_increasing() {
        let a = MarkovArgs {
            builtin: Some(BuiltinModel::Tmr),
            sweep: Some("1e-6..1e-2".into()),
            points: 9,
            tol: 1e-9,
            ..args()
        };
        let out = cmd_markov(&a, None, &CoreConfig::default()).unwrap();
        assert_eq!(out.report.rows().len(), 9);
        for i in 1..9 {
            assert!(num(&out, i, "lower") > num(&out, i - 1, "upper"));
        }
    }

    #[test]
    fn model_file_with_constant() {
        let text = "CONST lambda = 1e-3;\nINIT up;\nSTATE dead DEATH;\nup -> dead : lambda;\n";
        let a = MarkovArgs {
            lambda: Some(2e-3),
            ..args()
        };
        let out = cmd_markov(&a, Some(("m.model", text)), &CoreConfig::default()).unwrap();
        let exact = -(-2.0f64).exp_m1();
        assert!(num(&out, 0, "lower") <= exact && exact <= num(&out, 0, "upper"));
        let plain = cmd_markov(&args(), Some(("m.model", text)), &CoreConfig::default()).unwrap();
        assert_eq!(plain.report.cell(0, "value"), Some(""));
    }

    #[test]
    fn malformed_model_reports_location() {
        let err = cmd_markov(
            &args(),
            Some(("bad.model", "INIT a;\na => b : 1;")),
            &CoreConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.status, Status::Parse);
        assert!(
            err.message.contains("bad.model") && err.message.contains("2:"),
            "{}",
            err.message
        );
    }

    #[test]
    fn monte_carlo_columns() {
        let a = MarkovArgs {
            builtin: Some(BuiltinModel::Tmr),
            lambda: Some(1e-3),
            mc: Some(20_000),
            ..args()
        };
        let out = cmd_markov(&a, None, &CoreConfig::default()).unwrap();
        assert_eq!(out.report.cell(0, "mc_trials"), Some("20000"));
        assert_eq!(out.report.cell(0, "mc_overlaps"), Some("true"));
    }

    #[test]
    fn needs_a_model() {
        assert_eq!(
            cmd_markov(&args(), None, &CoreConfig::default()).unwrap_err().status,
            Status::Parse
        );
    }
}
