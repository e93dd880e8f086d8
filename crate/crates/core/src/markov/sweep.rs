//! Log-spaced parameter sweeps. Points are solved in parallel and returned
//! in increasing parameter order.

use rayon::prelude::*;
use thiserror::Error;

use super::{death_probability, BoundedProbability, MarkovModel, ModelError, SolverError};
use crate::redundancy::{FailureRate, MissionTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep range must satisfy 0 < lo < hi, got [{lo}, {hi}]")]
    BadRange { lo: f64, hi: f64 },
    #[error("a sweep needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("mission time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Constant varied across the sweep.
    pub constant: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub mission_time: f64,
}

impl SweepSpec {
    pub fn new(constant: &str, lo: f64, hi: f64, points: usize, mission_time: f64) -> Result<Self, SweepError> {
        let spec = SweepSpec {
            constant: constant.to_string(),
            lo,
            hi,
            points,
            mission_time,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(SweepError::BadRange {
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.points < 2 {
            return Err(SweepError::TooFewPoints(self.points));
        }
        MissionTime::new(self.mission_time).map_err(|_| SweepError::BadTime(self.mission_time))?;
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        log_space(self.lo, self.hi, self.points)
    }
}

/// `n` log-spaced values from `lo` to `hi`, endpoints exact.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub value: f64,
    pub result: Result<BoundedProbability, SolverError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    pub model: String,
    pub constant: String,
    pub mission_time: f64,
    pub points: Vec<CurvePoint>,
}

impl ReliabilityCurve {
    pub fn failures(&self) -> impl Iterator<Item = (f64, &SolverError)> {
        self.points
            .iter()
            .filter_map(|p| p.result.as_ref().err().map(|e| (p.value, e)))
    }
}

/// Solves `builder(value)` at every sweep point.
pub fn sweep<B>(name: &str, builder: B, spec: &SweepSpec, tol: f64) -> Result<ReliabilityCurve, SweepError>
where
    B: Fn(FailureRate) -> Result<MarkovModel, ModelError> + Sync,
{
    spec.validate()?;
    let t = MissionTime::new(spec.mission_time).map_err(|_| SweepError::BadTime(spec.mission_time))?;
    let models: Vec<(f64, MarkovModel)> = spec
        .values()
        .into_iter()
        .map(|v| {
            let rate = FailureRate::new(v).map_err(|_| SweepError::BadRange {
                lo: spec.lo,
                hi: spec.hi,
            })?;
            Ok((v, builder(rate)?))
        })
        .collect::<Result<_, SweepError>>()?;
    let points = models
        .par_iter()
        .map(|(value, model)| CurvePoint {
            value: *value,
            result: death_probability(model, t, tol),
        })
        .collect();
    Ok(ReliabilityCurve {
        model: name.to_string(),
        constant: spec.constant.clone(),
        mission_time: spec.mission_time,
        points,
    })
}

/// Sweeps one constant of an existing model.
pub fn sweep_constant(model: &MarkovModel, spec: &SweepSpec, tol: f64) -> Result<ReliabilityCurve, SweepError> {
    let name = spec.constant.clone();
    sweep(
        model.name(),
        move |rate| model.with_constant(&name, rate.per_hour()),
        spec,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{parse_model, BuiltinModel, DEFAULT_TOL};

    #[test]
    fn log_space_endpoints_and_ratio() {
        let v = log_space(1e-6, 1e-2, 25);
        assert_eq!(v.len(), 25);
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[24], 1e-2);
        for w in v.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] / w[0] - 10f64.powf(4.0 / 24.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_bounds_are_validated() {
        assert!(SweepSpec::new("lambda", 1e-3, 1e-3, 2, 1000.0).is_err());
        assert!(SweepSpec::new("lambda", 0.0, 1.0, 5, 1000.0).is_err());
        assert!(SweepSpec::new("lambda", 1e-6, 1e-2, 1, 1000.0).is_err());
        assert!(SweepSpec::new("lambda", 1e-6, 1e-2, 2, -1.0).is_err());
    }

    #[test]
    fn simplex_curve_starts_near_one_in_a_thousand() {
        let b = BuiltinModel::Simplex;
        let spec = SweepSpec::new(b.rate_constant(), 1e-6, 1e-2, 25, 1000.0).unwrap();
        let curve = sweep(b.name(), |r| b.build(r), &spec, DEFAULT_TOL).unwrap();
        let first = curve.points[0].result.as_ref().unwrap();
        assert!((first.midpoint() - 9.995e-4).abs() < 1e-6);
        let uppers: Vec<f64> = curve.points.iter().map(|p| p.result.as_ref().unwrap().upper).collect();
        assert!(uppers.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn parsed_model_sweep_matches_builtin() {
        let m = parse_model("CONST lambda = 1; INIT up; STATE dead DEATH; up -> dead : lambda;").unwrap();
        let spec = SweepSpec::new("lambda", 1e-5, 1e-3, 5, 1000.0).unwrap();
        let a = sweep_constant(&m, &spec, DEFAULT_TOL).unwrap();
        let b = sweep("simplex", |r| BuiltinModel::Simplex.build(r), &spec, DEFAULT_TOL).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.result, q.result);
        }
        let bad = SweepSpec::new("mu", 1e-5, 1e-3, 5, 1000.0).unwrap();
        assert!(sweep_constant(&m, &bad, DEFAULT_TOL).is_err());
    }
}
