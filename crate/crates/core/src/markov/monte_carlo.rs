//! Trajectory sampling: an estimator for the death probability that shares
//! nothing with the series solver but the model.
//!
//! Trials are split into a fixed number of partitions, each with its own
//! ChaCha stream derived from the root seed, so the estimate does not
//! depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Weibull};
use rayon::prelude::*;

use super::MarkovModel;
use crate::redundancy::MissionTime;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

const PARTITIONS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Half-width of the 99% normal-approximation interval.
    pub ci99: f64,
    pub hits: u64,
    pub trials: u64,
}

impl McEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.estimate - self.ci99, self.estimate + self.ci99)
    }

    pub fn overlaps(&self, lower: f64, upper: f64) -> bool {
        let (lo, hi) = self.interval();
        lo <= upper && lower <= hi
    }
}

/// Holding-time law of one transition, in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldingTime {
    /// Exponential with the transition's own rate.
    Exponential,
    Weibull {
        scale: f64,
        shape: f64,
    },
    Fixed(f64),
}

enum Sampler {
    Exp(f64),
    Weibull(Weibull<f64>),
    Fixed(f64),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Exp(rate) => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Sampler::Weibull(w) => w.sample(rng),
            Sampler::Fixed(t) => *t,
        }
    }
}

/// Estimates the death probability at `t` from exponential races.
pub fn monte_carlo_death_probability(model: &MarkovModel, t: MissionTime, trials: u64, seed: u64) -> McEstimate {
    let laws = vec![HoldingTime::Exponential; model.transitions().len()];
    monte_carlo_semi_markov(model, &laws, t, trials, seed)
}

/// Semi-Markov variant: `laws[i]` is the holding-time law of transition `i`.
/// In each state every outgoing transition draws a time and the earliest
/// one fires.
///
/// # Panics
/// If `laws` does not have one entry per transition or a Weibull law has a
/// non-positive parameter.
pub fn monte_carlo_semi_markov(
    model: &MarkovModel,
    laws: &[HoldingTime],
    t: MissionTime,
    trials: u64,
    seed: u64,
) -> McEstimate {
    assert_eq!(
        laws.len(),
        model.transitions().len(),
        "one holding-time law per transition"
    );
    let n = model.states().len();
    let mut out: Vec<Vec<(usize, Sampler)>> = (0..n).map(|_| Vec::new()).collect();
    for (tr, law) in model.transitions().iter().zip(laws) {
        let sampler = match *law {
            HoldingTime::Exponential => Sampler::Exp(tr.rate),
            HoldingTime::Weibull { scale, shape } => {
                Sampler::Weibull(Weibull::new(scale, shape).expect("positive Weibull parameters"))
            }
            HoldingTime::Fixed(h) => Sampler::Fixed(h),
        };
        out[tr.from].push((tr.to, sampler));
    }
    let horizon = t.hours();
    let death: Vec<bool> = (0..n).map(|s| model.is_death(s)).collect();

    let hits: u64 = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let share = trials / PARTITIONS + u64::from(part < trials % PARTITIONS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(part);
            let mut hits = 0u64;
            for _ in 0..share {
                let mut state = model.initial();
                let mut clock = 0.0;
                loop {
                    if death[state] {
                        hits += 1;
                        break;
                    }
                    let Some((to, dt)) = out[state]
                        .iter()
                        .map(|(to, s)| (*to, s.sample(&mut rng)))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                    else {
                        break;
                    };
                    clock += dt;
                    if clock > horizon {
                        break;
                    }
                    state = to;
                }
            }
            hits
        })
        .sum();

    let estimate = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let ci99 = if trials == 0 {
        0.0
    } else {
        Z_99 * (estimate * (1.0 - estimate) / trials as f64).sqrt()
    };
    McEstimate {
        estimate,
        ci99,
        hits,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{build_simplex_model, parse_model};
    use crate::redundancy::FailureRate;

    fn t(h: f64) -> MissionTime {
        MissionTime::new(h).unwrap()
    }

    #[test]
    fn single_trial_is_reproducible_bernoulli() {
        let m = build_simplex_model(FailureRate::new(1e-3).unwrap());
        let a = monte_carlo_death_probability(&m, t(1000.0), 1, 7);
        let b = monte_carlo_death_probability(&m, t(1000.0), 1, 7);
        assert!(a.estimate == 0.0 || a.estimate == 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_horizon_never_dies() {
        let m = build_simplex_model(FailureRate::new(1e-3).unwrap());
        assert_eq!(monte_carlo_death_probability(&m, t(0.0), 10_000, 1).estimate, 0.0);
    }

    #[test]
    fn simplex_estimate_covers_analytic() {
        let m = build_simplex_model(FailureRate::new(1e-3).unwrap());
        let e = monte_carlo_death_probability(&m, t(1000.0), 200_000, 11);
        let exact = 1.0 - (-1.0f64).exp();
        assert!((e.estimate - exact).abs() <= e.ci99, "{e:?}");
    }

    #[test]
    fn fixed_holding_times_are_deterministic() {
        let m = parse_model("CONST l = 1; INIT a; STATE d DEATH; a -> b : l; b -> d : l;").unwrap();
        let laws = [HoldingTime::Fixed(4.0), HoldingTime::Fixed(5.0)];
        assert_eq!(monte_carlo_semi_markov(&m, &laws, t(8.9), 100, 0).estimate, 0.0);
        assert_eq!(monte_carlo_semi_markov(&m, &laws, t(9.0), 100, 0).estimate, 1.0);
    }

    #[test]
    fn weibull_shape_one_matches_exponential() {
        let m = build_simplex_model(FailureRate::new(1e-3).unwrap());
        let laws = [HoldingTime::Weibull {
            scale: 1000.0,
            shape: 1.0,
        }];
        let e = monte_carlo_semi_markov(&m, &laws, t(1000.0), 200_000, 3);
        let exact = 1.0 - (-1.0f64).exp();
        assert!((e.estimate - exact).abs() <= e.ci99, "{e:?}");
    }
}
