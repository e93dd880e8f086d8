//! Continuous-time Markov dependability models: a small model language,
//! prebuilt architectures, a bounded transient solver for the probability of
//! having reached a death state, a trajectory-sampling oracle and parameter
//! sweeps.

mod builders;
mod monte_carlo;
mod parse;
mod solver;
mod sweep;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub use builders::{build_ifr_pipeline_model, build_simplex_model, build_standby_model, build_tmr_model, BuiltinModel};
pub use monte_carlo::{monte_carlo_death_probability, monte_carlo_semi_markov, HoldingTime, McEstimate, Z_99};
pub use parse::parse_model;
pub use solver::{death_probability, death_probability_with_budget, BoundedProbability, SolverError, DEFAULT_TOL};
pub use sweep::{log_space, sweep, sweep_constant, CurvePoint, ReliabilityCurve, SweepError, SweepSpec};

/// Source position of a statement, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{at}: {msg}")]
    Syntax { at: Span, msg: String },
    #[error("{at}: unknown constant `{name}`")]
    UnknownConstant { at: Span, name: String },
    #[error("{at}: {what} `{name}` declared twice")]
    Duplicate { at: Span, what: &'static str, name: String },
    #[error("no INIT statement")]
    NoInitial,
    #[error("initial state `{0}` is a death state")]
    InitialIsDeath(String),
    #[error("{at}: death state `{state}` has an outgoing transition")]
    DeathHasExit { at: Span, state: String },
    #[error("{at}: rate of {from} -> {to} evaluates to {rate}, must be positive and finite")]
    NonPositiveRate {
        at: Span,
        from: String,
        to: String,
        rate: f64,
    },
    #[error("{at}: constant `{name}` = {value} must be positive and finite")]
    BadConstant { at: Span, name: String, value: f64 },
    #[error("state `{0}` is unreachable from the initial state")]
    Unreachable(String),
    #[error("state `{state}`: outgoing rate {actual} differs from the component rate sum {expected}")]
    RateConservation { state: String, actual: f64, expected: f64 },
}

/// Rate expression over named constants: literals, `+`, `*`, parentheses.
#[derive(Debug, Clone, PartialEq)]
pub enum RateExpr {
    Num(f64),
    Const(String),
    Sum(Box<RateExpr>, Box<RateExpr>),
    Product(Box<RateExpr>, Box<RateExpr>),
}

impl RateExpr {
    pub fn constant(name: &str) -> Self {
        RateExpr::Const(name.to_string())
    }

    pub fn scaled(k: f64, name: &str) -> Self {
        RateExpr::Product(Box::new(RateExpr::Num(k)), Box::new(RateExpr::constant(name)))
    }

    /// Evaluates the expression; `Err` carries the first unknown name.
    pub fn eval(&self, constants: &BTreeMap<String, f64>) -> Result<f64, String> {
        Ok(match self {
            RateExpr::Num(v) => *v,
            RateExpr::Const(name) => *constants.get(name).ok_or_else(|| name.clone())?,
            RateExpr::Sum(a, b) => a.eval(constants)? + b.eval(constants)?,
            RateExpr::Product(a, b) => a.eval(constants)? * b.eval(constants)?,
        })
    }

    fn names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            RateExpr::Num(_) => {}
            RateExpr::Const(n) => out.push(n),
            RateExpr::Sum(a, b) | RateExpr::Product(a, b) => {
                a.names(out);
                b.names(out);
            }
        }
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateExpr::Num(v) => write!(f, "{v:?}"),
            RateExpr::Const(n) => f.write_str(n),
            RateExpr::Sum(a, b) => write!(f, "{a} + {b}"),
            RateExpr::Product(a, b) => {
                let wrap = |e: &RateExpr, f: &mut fmt::Formatter<'_>| match e {
                    RateExpr::Sum(..) => write!(f, "({e})"),
                    _ => write!(f, "{e}"),
                };
                wrap(a, f)?;
                f.write_str("*")?;
                wrap(b, f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub name: String,
    pub death: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub expr: RateExpr,
    /// `expr` evaluated against the model's constants.
    pub rate: f64,
    pub at: Span,
}

/// A validated model: the initial state is live, every rate is positive,
/// death states are absorbing and every state is reachable.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    name: String,
    constants: BTreeMap<String, f64>,
    constant_spans: BTreeMap<String, Span>,
    states: Vec<State>,
    initial: usize,
    transitions: Vec<Transition>,
}

impl MarkovModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn death_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.states.iter().enumerate().filter(|(_, s)| s.death).map(|(i, _)| i)
    }

    pub fn is_death(&self, state: usize) -> bool {
        self.states[state].death
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn constants(&self) -> &BTreeMap<String, f64> {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    /// Total exit rate of `state`.
    pub fn outgoing_rate(&self, state: usize) -> f64 {
        self.transitions
            .iter()
            .filter(|t| t.from == state)
            .map(|t| t.rate)
            .sum()
    }

    /// Rebinds one constant and re-evaluates every rate.
    pub fn with_constant(&self, name: &str, value: f64) -> Result<Self, ModelError> {
        if !self.constants.contains_key(name) {
            return Err(ModelError::UnknownConstant {
                at: Span::default(),
                name: name.to_string(),
            });
        }
        let mut next = self.clone();
        next.constants.insert(name.to_string(), value);
        next.evaluate()?;
        Ok(next)
    }

    fn evaluate(&mut self) -> Result<(), ModelError> {
        for (name, &value) in &self.constants {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::BadConstant {
                    at: self.constant_spans.get(name).copied().unwrap_or_default(),
                    name: name.clone(),
                    value,
                });
            }
        }
        for t in &mut self.transitions {
            let rate = t
                .expr
                .eval(&self.constants)
                .map_err(|name| ModelError::UnknownConstant { at: t.at, name })?;
            if !(rate.is_finite() && rate > 0.0) {
                return Err(ModelError::NonPositiveRate {
                    at: t.at,
                    from: self.states[t.from].name.clone(),
                    to: self.states[t.to].name.clone(),
                    rate,
                });
            }
            t.rate = rate;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.states[self.initial].death {
            return Err(ModelError::InitialIsDeath(self.states[self.initial].name.clone()));
        }
        if let Some(t) = self.transitions.iter().find(|t| self.states[t.from].death) {
            return Err(ModelError::DeathHasExit {
                at: t.at,
                state: self.states[t.from].name.clone(),
            });
        }
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.transitions.iter().filter(|t| t.from == s) {
                if !seen[t.to] {
                    seen[t.to] = true;
                    queue.push_back(t.to);
                }
            }
        }
        if let Some(i) = seen.iter().position(|&r| !r) {
            return Err(ModelError::Unreachable(self.states[i].name.clone()));
        }
        Ok(())
    }

    /// Checks that each listed state's exit rate equals the sum of the
    /// failure rates of its non-failed components.
    pub fn check_rate_conservation(&self, expected: &[(&str, f64)]) -> Result<(), ModelError> {
        for &(name, sum) in expected {
            let idx = self
                .state_index(name)
                .ok_or_else(|| ModelError::Unreachable(name.to_string()))?;
            let actual = self.outgoing_rate(idx);
            if (actual - sum).abs() > 1e-12 * sum.abs().max(f64::MIN_POSITIVE) {
                return Err(ModelError::RateConservation {
                    state: name.to_string(),
                    actual,
                    expected: sum,
                });
            }
        }
        Ok(())
    }

    /// Constants referenced by at least one transition.
    pub fn used_constants(&self) -> Vec<&str> {
        let mut names = Vec::new();
        for t in &self.transitions {
            t.expr.names(&mut names);
        }
        names.sort_unstable();
        names.dedup();
        names
    }
}

/// Prints the model in the input language; the output parses back to an
/// equal model (up to source spans).
impl fmt::Display for MarkovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.constants {
            writeln!(f, "CONST {name} = {value:?};")?;
        }
        writeln!(f, "INIT {};", self.states[self.initial].name)?;
        for s in &self.states {
            if s.death {
                writeln!(f, "STATE {} DEATH;", s.name)?;
            } else {
                writeln!(f, "STATE {};", s.name)?;
            }
        }
        for t in &self.transitions {
            writeln!(
                f,
                "{} -> {} : {};",
                self.states[t.from].name, self.states[t.to].name, t.expr
            )?;
        }
        Ok(())
    }
}

/// Incremental construction shared by the parser and the builders.
#[derive(Debug, Default)]
pub(crate) struct ModelBuilder {
    name: String,
    constants: BTreeMap<String, f64>,
    constant_spans: BTreeMap<String, Span>,
    states: Vec<State>,
    declared: Vec<bool>,
    initial: Option<(usize, Span)>,
    transitions: Vec<Transition>,
}

impl ModelBuilder {
    pub(crate) fn new(name: &str) -> Self {
        ModelBuilder {
            name: name.to_string(),
            ..ModelBuilder::default()
        }
    }

    pub(crate) fn constant(&mut self, name: &str, value: f64, at: Span) -> Result<&mut Self, ModelError> {
        if self.constants.insert(name.to_string(), value).is_some() {
            return Err(ModelError::Duplicate {
                at,
                what: "constant",
                name: name.to_string(),
            });
        }
        self.constant_spans.insert(name.to_string(), at);
        Ok(self)
    }

    fn intern(&mut self, name: &str) -> usize {
        match self.states.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                self.states.push(State {
                    name: name.to_string(),
                    death: false,
                });
                self.declared.push(false);
                self.states.len() - 1
            }
        }
    }

    /// Explicit declaration; states are otherwise created on first use.
    pub(crate) fn state(&mut self, name: &str, death: bool, at: Span) -> Result<&mut Self, ModelError> {
        let i = self.intern(name);
        if self.declared[i] {
            return Err(ModelError::Duplicate {
                at,
                what: "state",
                name: name.to_string(),
            });
        }
        self.declared[i] = true;
        self.states[i].death = death;
        Ok(self)
    }

    pub(crate) fn init(&mut self, name: &str, at: Span) -> Result<&mut Self, ModelError> {
        if self.initial.is_some() {
            return Err(ModelError::Duplicate {
                at,
                what: "INIT",
                name: name.to_string(),
            });
        }
        let i = self.intern(name);
        self.initial = Some((i, at));
        Ok(self)
    }

    pub(crate) fn transition(
        &mut self,
        from: &str,
        to: &str,
        expr: RateExpr,
        at: Span,
    ) -> Result<&mut Self, ModelError> {
        let mut names = Vec::new();
        expr.names(&mut names);
        if let Some(unknown) = names.into_iter().find(|n| !self.constants.contains_key(*n)) {
            return Err(ModelError::UnknownConstant {
                at,
                name: unknown.to_string(),
            });
        }
        let from = self.intern(from);
        let to = self.intern(to);
        self.transitions.push(Transition {
            from,
            to,
            expr,
            rate: 0.0,
            at,
        });
        Ok(self)
    }

    pub(crate) fn finish(self) -> Result<MarkovModel, ModelError> {
        let (initial, _) = self.initial.ok_or(ModelError::NoInitial)?;
        let mut model = MarkovModel {
            name: self.name,
            constants: self.constants,
            constant_spans: self.constant_spans,
            states: self.states,
            initial,
            transitions: self.transitions,
        };
        model.evaluate()?;
        model.validate()?;
        Ok(model)
    }
}
