//! Prebuilt architectures. Every builder checks rate conservation: the exit
//! rate of each live state equals the summed failure rates of the components
//! still working in it.

use std::fmt;
use std::str::FromStr;

use super::{MarkovModel, ModelBuilder, ModelError, RateExpr, Span};
use crate::redundancy::FailureRate;

fn build(
    name: &str,
    constants: &[(&str, f64)],
    death: &[&str],
    init: &str,
    transitions: &[(&str, &str, RateExpr)],
) -> Result<MarkovModel, ModelError> {
    let at = Span::default();
    let mut b = ModelBuilder::new(name);
    for &(c, v) in constants {
        b.constant(c, v, at)?;
    }
    b.init(init, at)?;
    for &d in death {
        b.state(d, true, at)?;
    }
    for (from, to, expr) in transitions {
        b.transition(from, to, expr.clone(), at)?;
    }
    b.finish()
}

fn expect_valid(model: Result<MarkovModel, ModelError>) -> MarkovModel {
    // Failure rates are validated positive, so construction cannot fail.
    model.expect("builtin model is well formed")
}

/// `up -(lambda)-> dead`.
pub fn build_simplex_model(lambda: FailureRate) -> MarkovModel {
    let l = lambda.per_hour();
    let m = expect_valid(build(
        "simplex",
        &[("lambda", l)],
        &["dead"],
        "up",
        &[("up", "dead", RateExpr::constant("lambda"))],
    ));
    m.check_rate_conservation(&[("up", l)]).expect("simplex conserves rate");
    m
}

/// Majority of three: the first failure is masked, the second is fatal.
pub fn build_tmr_model(lambda: FailureRate) -> MarkovModel {
    let l = lambda.per_hour();
    let m = expect_valid(build(
        "tmr",
        &[("lambda", l)],
        &["dead"],
        "up3",
        &[
            ("up3", "up2", RateExpr::scaled(3.0, "lambda")),
            ("up2", "dead", RateExpr::scaled(2.0, "lambda")),
        ],
    ));
    m.check_rate_conservation(&[("up3", 3.0 * l), ("up2", 2.0 * l)])
        .expect("tmr conserves rate");
    m
}

/// Two components, either of which keeps the system up; survival
/// `2R - R^2` under exponential lifetimes.
pub fn build_standby_model(lambda: FailureRate) -> MarkovModel {
    let l = lambda.per_hour();
    let m = expect_valid(build(
        "standby",
        &[("lambda", l)],
        &["dead"],
        "up2",
        &[
            ("up2", "up1", RateExpr::scaled(2.0, "lambda")),
            ("up1", "dead", RateExpr::constant("lambda")),
        ],
    ));
    m.check_rate_conservation(&[("up2", 2.0 * l), ("up1", l)])
        .expect("standby conserves rate");
    m
}

/// Repairable pipeline: state `s1` runs on the main stages, one pipeline
/// failure moves to `s2` on the spares and a second is fatal. Switch boxes
/// and controller are single points of failure in both live states.
pub fn build_ifr_pipeline_model(
    lambda_p: FailureRate,
    lambda_sw: FailureRate,
    lambda_ctrl: FailureRate,
) -> MarkovModel {
    let (p, sw, ctrl) = (lambda_p.per_hour(), lambda_sw.per_hour(), lambda_ctrl.per_hour());
    let c = RateExpr::constant;
    let m = expect_valid(build(
        "ifr-pipeline",
        &[("lambda_p", p), ("lambda_sw", sw), ("lambda_ctrl", ctrl)],
        &["d_pipe", "d_sw", "d_ctrl"],
        "s1",
        &[
            ("s1", "s2", c("lambda_p")),
            ("s1", "d_sw", c("lambda_sw")),
            ("s1", "d_ctrl", c("lambda_ctrl")),
            ("s2", "d_pipe", c("lambda_p")),
            ("s2", "d_sw", c("lambda_sw")),
            ("s2", "d_ctrl", c("lambda_ctrl")),
        ],
    ));
    m.check_rate_conservation(&[("s1", p + sw + ctrl), ("s2", p + sw + ctrl)])
        .expect("ifr pipeline conserves rate");
    m
}

/// Builtin model families parameterised by one failure rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel {
    Simplex,
    Tmr,
    Standby,
    /// Switch and controller rates are `sw_ratio` and `ctrl_ratio` times
    /// the pipeline rate.
    IfrPipeline {
        sw_ratio: f64,
        ctrl_ratio: f64,
    },
}

impl BuiltinModel {
    /// Auxiliary-rate ratio used when none is given: switch boxes and the
    /// controller are small next to a pipeline stage.
    pub const DEFAULT_AUX_RATIO: f64 = 0.01;

    pub const ALL: [BuiltinModel; 4] = [
        BuiltinModel::Simplex,
        BuiltinModel::Tmr,
        BuiltinModel::Standby,
        BuiltinModel::IfrPipeline {
            sw_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
            ctrl_ratio: BuiltinModel::DEFAULT_AUX_RATIO,
        },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinModel::Simplex => "simplex",
            BuiltinModel::Tmr => "tmr",
            BuiltinModel::Standby => "standby",
            BuiltinModel::IfrPipeline { .. } => "ifr-pipeline",
        }
    }

    /// Name of the constant a sweep varies.
    pub fn rate_constant(&self) -> &'static str {
        match self {
            BuiltinModel::IfrPipeline { .. } => "lambda_p",
            _ => "lambda",
        }
    }

    pub fn build(&self, lambda: FailureRate) -> Result<MarkovModel, ModelError> {
        Ok(match *self {
            BuiltinModel::Simplex => build_simplex_model(lambda),
            BuiltinModel::Tmr => build_tmr_model(lambda),
            BuiltinModel::Standby => build_standby_model(lambda),
            BuiltinModel::IfrPipeline { sw_ratio, ctrl_ratio } => {
                let aux = |name: &str, ratio: f64| {
                    let value = lambda.per_hour() * ratio;
                    FailureRate::new(value).map_err(|_| ModelError::BadConstant {
                        at: Span::default(),
                        name: name.to_string(),
                        value,
                    })
                };
                build_ifr_pipeline_model(lambda, aux("lambda_sw", sw_ratio)?, aux("lambda_ctrl", ctrl_ratio)?)
            }
        })
    }
}

impl fmt::Display for BuiltinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "simplex" => Ok(BuiltinModel::Simplex),
            "tmr" => Ok(BuiltinModel::Tmr),
            "standby" => Ok(BuiltinModel::Standby),
            "ifr" | "ifr-pipeline" | "ifr_pipeline" => Ok(BuiltinModel::ALL[3]),
            _ => Err(format!(
                "unknown builtin model `{s}` (simplex, tmr, standby, ifr-pipeline)"
            )),
        }
    }
}
