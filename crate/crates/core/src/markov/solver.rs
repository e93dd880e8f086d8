//! Transient death-state probability by uniformization.
//!
//! With `L` at least the largest exit rate, the chain at time `T` is the
//! jump chain `P = I + Q/L` observed after a Poisson(`L T`) number of steps:
//!
//! ```text
//! D(T) = sum_k  Poisson(k; L T) * d_k,     d_k = P(death after k jumps)
//! ```
//!
//! Summing the first `K` terms gives a lower bound. Every omitted `d_k` is
//! at most 1, so adding the omitted Poisson mass gives an upper bound. Past
//! the Poisson mode that mass is below the geometric series
//! `w_{K+1} / (1 - L T / (K + 2))`, which is evaluated directly rather than
//! as `1 - sum w_k` to avoid cancellation. Terms are added until the
//! bracket is narrow enough.

use thiserror::Error;

use super::MarkovModel;
use crate::redundancy::MissionTime;

/// Default relative bracket width.
pub const DEFAULT_TOL: f64 = 0.05;

/// Relative width is measured against `max(upper, FLOOR)` so answers near
/// zero need not be resolved to full relative precision.
const FLOOR: f64 = 1e-12;

/// Default cap on the number of series terms.
const DEFAULT_BUDGET: usize = 1_000_000;

/// Slack for floating-point rounding in the summed series.
const ROUNDING: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedProbability {
    pub lower: f64,
    pub upper: f64,
}

impl BoundedProbability {
    pub const ZERO: BoundedProbability = BoundedProbability { lower: 0.0, upper: 0.0 };

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Width relative to the upper bound; zero for the `[0, 0]` bracket.
    pub fn rel_width(&self) -> f64 {
        if self.upper > 0.0 {
            self.width() / self.upper
        } else {
            0.0
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("tolerance {0} must lie in (0, 1)")]
    BadTolerance(f64),
    #[error("bracket width {width:.3e} still above target {target:.3e} after {terms} terms")]
    WidthUnreachable { width: f64, target: f64, terms: usize },
}

/// Brackets the probability of occupying a death state at `t`.
pub fn death_probability(model: &MarkovModel, t: MissionTime, tol: f64) -> Result<BoundedProbability, SolverError> {
    death_probability_with_budget(model, t, tol, DEFAULT_BUDGET)
}

/// As [`death_probability`] with an explicit cap on series terms.
pub fn death_probability_with_budget(
    model: &MarkovModel,
    t: MissionTime,
    tol: f64,
    max_terms: usize,
) -> Result<BoundedProbability, SolverError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(SolverError::BadTolerance(tol));
    }
    let n = model.states().len();
    let exit: Vec<f64> = (0..n).map(|s| model.outgoing_rate(s)).collect();
    let big_l = exit.iter().copied().fold(0.0, f64::max);
    let lt = big_l * t.hours();
    if lt == 0.0 {
        return Ok(BoundedProbability::ZERO);
    }

    // Jump chain as adjacency lists; self-loops carry the slack 1 - exit/L.
    let mut jumps: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for tr in model.transitions() {
        jumps[tr.from].push((tr.to, tr.rate / big_l));
    }
    let stay: Vec<f64> = exit.iter().map(|e| 1.0 - e / big_l).collect();
    let death: Vec<bool> = (0..n).map(|s| model.is_death(s)).collect();

    let mut v = vec![0.0; n];
    v[model.initial()] = 1.0;
    let mut next = vec![0.0; n];

    // Log-space weights so large L T does not underflow the early terms.
    let ln_lt = lt.ln();
    let mut ln_fact = 0.0;
    let mut lower = 0.0;
    for k in 0..max_terms {
        if k > 0 {
            ln_fact += (k as f64).ln();
            next.iter_mut().for_each(|x| *x = 0.0);
            for s in 0..n {
                let p = v[s];
                if p == 0.0 {
                    continue;
                }
                next[s] += p * stay[s];
                for &(to, q) in &jumps[s] {
                    next[to] += p * q;
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        let w = (-lt + k as f64 * ln_lt - ln_fact).exp();
        let d_k: f64 = v.iter().zip(&death).filter(|(_, &d)| d).map(|(p, _)| p).sum();
        lower += w * d_k;

        if (k as f64) >= lt {
            let kf = k as f64;
            let tail = w * lt / (kf + 1.0) / (1.0 - lt / (kf + 2.0));
            let lo = (lower * (1.0 - ROUNDING)).max(0.0);
            let hi = (lower * (1.0 + ROUNDING) + tail).min(1.0);
            if hi - lo <= tol * hi.max(FLOOR) {
                return Ok(BoundedProbability { lower: lo, upper: hi });
            }
            if k + 1 == max_terms {
                return Err(SolverError::WidthUnreachable {
                    width: hi - lo,
                    target: tol * hi.max(FLOOR),
                    terms: max_terms,
                });
            }
        }
    }
    Err(SolverError::WidthUnreachable {
        width: 1.0,
        target: tol,
        terms: max_terms,
    })
}
