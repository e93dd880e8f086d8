//! Closed-form dependability formulas: inherent availability, the
//! exponential lifetime bridge, TMR, two-component standby, block-level
//! in-field repair with `s` spares and the repairable pipeline with
//! coverage, switch and controller terms.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

fn finite(name: &'static str, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::NonFinite { name, value })
    }
}

fn unit_interval(name: &'static str, value: f64) -> Result<f64, DomainError> {
    let value = finite(name, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(DomainError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// Probability of surviving to the mission time.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Reliability(f64);

impl Reliability {
    pub const ONE: Reliability = Reliability(1.0);
    pub const ZERO: Reliability = Reliability(0.0);

    pub fn new(value: f64) -> Result<Self, DomainError> {
        unit_interval("reliability", value).map(Reliability)
    }

    /// Rounding can push a polynomial a few ulps past the unit interval.
    fn clamped(value: f64) -> Self {
        Reliability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Failure probability `1 - R`.
    pub fn unreliability(self) -> f64 {
        1.0 - self.0
    }
}

/// Constant failure rate in failures per hour.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FailureRate(f64);

impl FailureRate {
    pub fn new(per_hour: f64) -> Result<Self, DomainError> {
        let v = finite("failure rate", per_hour)?;
        if v > 0.0 {
            Ok(FailureRate(v))
        } else {
            Err(DomainError::OutOfRange {
                name: "failure rate",
                value: v,
                range: "(0, inf)",
            })
        }
    }

    pub fn per_hour(self) -> f64 {
        self.0
    }
}

/// Mission time in hours.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MissionTime(f64);

impl MissionTime {
    pub fn new(hours: f64) -> Result<Self, DomainError> {
        let v = finite("mission time", hours)?;
        if v >= 0.0 {
            Ok(MissionTime(v))
        } else {
            Err(DomainError::OutOfRange {
                name: "mission time",
                value: v,
                range: "[0, inf)",
            })
        }
    }

    pub fn hours(self) -> f64 {
        self.0
    }
}

/// Probability that a fault is detected and the swap engages.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoverageFactor(f64);

impl CoverageFactor {
    pub const FULL: CoverageFactor = CoverageFactor(1.0);

    pub fn new(c: f64) -> Result<Self, DomainError> {
        unit_interval("coverage", c).map(CoverageFactor)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for CoverageFactor {
    fn default() -> Self {
        CoverageFactor::FULL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvailabilityInputs {
    mttf: f64,
    mttr: f64,
}

impl AvailabilityInputs {
    pub fn new(mttf: f64, mttr: f64) -> Result<Self, DomainError> {
        let mttf = finite("mttf", mttf)?;
        let mttr = finite("mttr", mttr)?;
        if mttf <= 0.0 {
            return Err(DomainError::OutOfRange {
                name: "mttf",
                value: mttf,
                range: "(0, inf)",
            });
        }
        if mttr < 0.0 {
            return Err(DomainError::OutOfRange {
                name: "mttr",
                value: mttr,
                range: "[0, inf)",
            });
        }
        Ok(AvailabilityInputs { mttf, mttr })
    }

    pub fn mttf(&self) -> f64 {
        self.mttf
    }

    pub fn mttr(&self) -> f64 {
        self.mttr
    }

    pub fn mtbf(&self) -> f64 {
        self.mttf + self.mttr
    }
}

/// Inherent availability `MTTF / MTBF`.
pub fn availability(inputs: &AvailabilityInputs) -> f64 {
    inputs.mttf / inputs.mtbf()
}

/// `exp(-lambda t)`.
pub fn reliability_from_rate(rate: FailureRate, t: MissionTime) -> Reliability {
    Reliability::clamped((-rate.0 * t.0).exp())
}

/// Two-out-of-three majority: `3R^2 - 2R^3`.
pub fn r_tmr(r: Reliability) -> Reliability {
    let r = r.0;
    Reliability::clamped(r * r * (3.0 - 2.0 * r))
}

/// One active component with one spare: `2R - R^2`.
pub fn r_standby(r: Reliability) -> Reliability {
    let r = r.0;
    Reliability::clamped(r * (2.0 - r))
}

/// A block with `spares` spare copies survives unless all `spares + 1` fail.
pub fn r_ifr(rb: Reliability, spares: u32) -> Reliability {
    let copies = i32::try_from(spares).unwrap_or(i32::MAX - 1) + 1;
    Reliability::clamped(1.0 - (1.0 - rb.0).powi(copies))
}

/// Pipeline with one spare per stage set, coverage `c`, in series with the
/// switch boxes and the controller: `(Rp^2 + 2 C Rp (1 - Rp)) Rsw Rctrl`.
///
/// The bracketed term is a sum of non-negative products on the unit cube,
/// so no absolute value is needed.
pub fn r_ifr_pipeline(rp: Reliability, c: CoverageFactor, rsw: Reliability, rctrl: Reliability) -> Reliability {
    let p = rp.0;
    let core = p * p + 2.0 * c.0 * p * (1.0 - p);
    Reliability::clamped(core * rsw.0 * rctrl.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Reliability {
        Reliability::new(v).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn availability_examples() {
        let a = |f, r| availability(&AvailabilityInputs::new(f, r).unwrap());
        assert_eq!(a(5.0, 0.0), 1.0);
        assert_eq!(a(1.0, 1.0), 0.5);
        close(a(999.0, 1.0), 0.999, 1e-15);
        assert!(AvailabilityInputs::new(0.0, 1.0).is_err());
        assert!(AvailabilityInputs::new(1.0, -1.0).is_err());
        assert!(AvailabilityInputs::new(f64::NAN, 1.0).is_err());
        assert!(AvailabilityInputs::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn exponential_bridge() {
        let rate = |l| FailureRate::new(l).unwrap();
        let t = |h| MissionTime::new(h).unwrap();
        assert_eq!(reliability_from_rate(rate(1e-3), t(0.0)).value(), 1.0);
        // Taylor series of exp(-x) at x = 1e-3, summed high to low.
        let x: f64 = 1e-3;
        let series = 1.0 - x + x * x / 2.0 - x.powi(3) / 6.0 + x.powi(4) / 24.0;
        close(reliability_from_rate(rate(1e-6), t(1000.0)).value(), series, 1e-15);
        close(reliability_from_rate(rate(1e-6), t(1000.0)).value(), 0.9990005, 1e-7);
        close(reliability_from_rate(rate(1e-3), t(1000.0)).value(), 0.3678794, 1e-7);
        assert!(FailureRate::new(0.0).is_err());
        assert!(MissionTime::new(-1.0).is_err());
    }

    #[test]
    fn tmr_and_standby_examples() {
        assert_eq!(r_tmr(r(1.0)).value(), 1.0);
        assert_eq!(r_tmr(r(0.5)).value(), 0.5);
        close(r_tmr(r(0.9)).value(), 3.0 * 0.81 - 2.0 * 0.729, 1e-15);
        assert_eq!(r_standby(r(0.0)).value(), 0.0);
        assert_eq!(r_standby(r(1.0)).value(), 1.0);
        close(r_standby(r(0.9)).value(), 1.8 - 0.81, 1e-15);
        assert!(Reliability::new(1.1).is_err());
        assert!(Reliability::new(-0.1).is_err());
    }

    #[test]
    fn ifr_examples() {
        assert_eq!(r_ifr(r(0.37), 0).value(), 0.37);
        close(r_ifr(r(0.9), 1).value(), 0.99, 1e-15);
        close(r_ifr(r(0.9), 1).value(), r_standby(r(0.9)).value(), 1e-15);
        close(r_ifr(r(0.9), 2).value(), 0.999, 1e-15);
        assert_eq!(r_ifr(r(0.5), u32::MAX).value(), 1.0);
    }

    #[test]
    fn ifr_pipeline_examples() {
        let c = |v| CoverageFactor::new(v).unwrap();
        close(r_ifr_pipeline(r(0.9), c(1.0), r(1.0), r(1.0)).value(), 0.99, 1e-15);
        close(r_ifr_pipeline(r(0.9), c(0.0), r(1.0), r(1.0)).value(), 0.81, 1e-15);
        close(
            r_ifr_pipeline(r(0.9), c(1.0), r(0.99), r(0.99)).value(),
            0.99 * 0.9801,
            1e-15,
        );
        assert!(CoverageFactor::new(1.5).is_err());
    }
}
