//! Solver brackets against closed forms and against trajectory sampling.

use ifr::markov::{
    build_ifr_pipeline_model, build_simplex_model, build_standby_model, build_tmr_model, death_probability,
    monte_carlo_death_probability, parse_model, sweep, BuiltinModel, ModelError, SweepSpec, DEFAULT_TOL,
};
use ifr::redundancy::{FailureRate, MissionTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rate(l: f64) -> FailureRate {
    FailureRate::new(l).unwrap()
}

fn hours(t: f64) -> MissionTime {
    MissionTime::new(t).unwrap()
}

fn simplex_exact(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `1 - (3e^{-2x} - 2e^{-3x})` rewritten as `u^2 (3 - 2u)` with
/// `u = 1 - e^{-x}`, which keeps full precision for tiny `x`.
fn tmr_exact(x: f64) -> f64 {
    let u = simplex_exact(x);
    u * u * (3.0 - 2.0 * u)
}

fn standby_exact(x: f64) -> f64 {
    simplex_exact(x).powi(2)
}

/// Live states form a chain `s1 -> s2 -> dead` at `p` with an independent
/// exit at `aux`, so survival is `e^{-aux T} P(Poisson(p T) <= 1)`.
fn ifr_exact(p: f64, aux: f64, t: f64) -> f64 {
    let y = (p + aux) * t;
    -(-y).exp_m1() - p * t * (-y).exp()
}

#[test]
fn stable_forms_agree_with_textbook_forms() {
    for x in [0.1f64, 1.0, 3.0] {
        let naive = 1.0 - (3.0 * (-2.0 * x).exp() - 2.0 * (-3.0 * x).exp());
        assert!((tmr_exact(x) - naive).abs() < 1e-15);
        let naive = 1.0 - (-0.02 * x).exp() * (-x).exp() * (1.0 + x);
        assert!((ifr_exact(x, 0.02 * x, 1.0) - naive).abs() < 1e-15);
    }
}

#[test]
fn brackets_contain_closed_forms_for_random_missions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    type Case = (
        &'static str,
        fn(FailureRate) -> ifr::markov::MarkovModel,
        fn(f64) -> f64,
    );
    let cases: [Case; 3] = [
        ("simplex", build_simplex_model, simplex_exact),
        ("tmr", build_tmr_model, tmr_exact),
        ("standby", build_standby_model, standby_exact),
    ];
    for (name, build, exact) in cases {
        for _ in 0..50 {
            let l = 10f64.powf(rng.random_range(-7.0..-1.0));
            let t = 10f64.powf(rng.random_range(0.0..4.0));
            let b = death_probability(&build(rate(l)), hours(t), DEFAULT_TOL).unwrap();
            let want = exact(l * t);
            assert!(b.contains(want), "{name} l={l} t={t}: {want} outside {b:?}");
            assert!(b.rel_width() <= DEFAULT_TOL);
            assert!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0);
        }
    }
}

#[test]
fn ifr_pipeline_bracket_contains_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let p = 10f64.powf(rng.random_range(-7.0..-2.0));
        let sw = p * rng.random_range(1e-3..1.0);
        let ctrl = p * rng.random_range(1e-3..1.0);
        let t = 10f64.powf(rng.random_range(1.0..4.0));
        let m = build_ifr_pipeline_model(rate(p), rate(sw), rate(ctrl));
        let b = death_probability(&m, hours(t), 1e-6).unwrap();
        let want = ifr_exact(p, sw + ctrl, t);
        assert!(
            b.contains(want),
            "p={p} sw={sw} ctrl={ctrl} t={t}: {want} outside {b:?}"
        );
    }
}

#[test]
fn ifr_with_vanishing_aux_rates_tends_to_erlang_not_squared_exponential() {
    let (p, t) = (1e-3, 1000.0);
    let m = build_ifr_pipeline_model(rate(p), rate(1e-15), rate(1e-15));
    let b = death_probability(&m, hours(t), 1e-9).unwrap();
    let erlang = 1.0 - (-1.0f64).exp() * 2.0;
    assert!((b.midpoint() - erlang).abs() < 1e-9, "{b:?} vs {erlang}");
    // The two-component parallel complement is clearly different here.
    assert!(!b.contains(standby_exact(p * t)));
}

#[test]
fn ifr_default_ratio_values() {
    let b = BuiltinModel::ALL[3].build(rate(1e-6)).unwrap();
    let bracket = death_probability(&b, hours(1000.0), DEFAULT_TOL).unwrap();
    let want = ifr_exact(1e-6, 2e-8, 1000.0);
    assert!(bracket.contains(want));
    assert!((want - 2.05e-5).abs() < 1e-7);

    let at_1e3 = death_probability(&BuiltinModel::ALL[3].build(rate(1e-3)).unwrap(), hours(1000.0), 1e-9).unwrap();
    assert!((at_1e3.midpoint() - ifr_exact(1e-3, 2e-5, 1000.0)).abs() < 1e-9);
}

#[test]
fn monte_carlo_overlaps_every_builtin() {
    let t = hours(1000.0);
    for b in BuiltinModel::ALL {
        let m = b.build(rate(1e-3)).unwrap();
        let bracket = death_probability(&m, t, DEFAULT_TOL).unwrap();
        let mc = monte_carlo_death_probability(&m, t, 1_000_000, 42);
        assert!(mc.overlaps(bracket.lower, bracket.upper), "{b}: {mc:?} vs {bracket:?}");
    }
}

#[test]
fn monte_carlo_simplex_value_and_trivial_cases() {
    let m = build_simplex_model(rate(1e-3));
    let mc = monte_carlo_death_probability(&m, hours(1000.0), 1_000_000, 9);
    assert!((mc.estimate - simplex_exact(1.0)).abs() <= mc.ci99);

    let one = monte_carlo_death_probability(&m, hours(1000.0), 1, 3);
    assert!(one.estimate == 0.0 || one.estimate == 1.0);
    assert_eq!(one, monte_carlo_death_probability(&m, hours(1000.0), 1, 3));
    assert_eq!(monte_carlo_death_probability(&m, hours(0.0), 1000, 3).estimate, 0.0);
}

#[test]
fn solver_and_sampler_are_bit_reproducible() {
    let m = build_tmr_model(rate(3e-4));
    let a = death_probability(&m, hours(700.0), 1e-4).unwrap();
    let b = death_probability(&m, hours(700.0), 1e-4).unwrap();
    assert_eq!(
        (a.lower.to_bits(), a.upper.to_bits()),
        (b.lower.to_bits(), b.upper.to_bits())
    );
    let x = monte_carlo_death_probability(&m, hours(700.0), 50_000, 11);
    let y = monte_carlo_death_probability(&m, hours(700.0), 50_000, 11);
    assert_eq!(x.estimate.to_bits(), y.estimate.to_bits());
}

#[test]
fn builtin_sweeps_are_monotone_and_tight() {
    let spec = SweepSpec::new("lambda", 1e-6, 1e-2, 25, 1000.0).unwrap();
    for b in BuiltinModel::ALL {
        let curve = sweep(b.name(), |l| b.build(l), &spec, DEFAULT_TOL).unwrap();
        assert_eq!(curve.failures().count(), 0);
        let bounds: Vec<_> = curve.points.iter().map(|p| *p.result.as_ref().unwrap()).collect();
        for w in curve.points.windows(2) {
            assert!(w[1].value > w[0].value);
        }
        for (i, pair) in bounds.windows(2).enumerate() {
            assert!(pair[1].upper >= pair[0].upper, "{b} point {i}");
        }
        assert!(bounds.iter().all(|x| x.rel_width() <= DEFAULT_TOL));
    }
}

#[test]
fn simplex_sweep_starts_near_one_in_a_thousand() {
    let spec = SweepSpec::new("lambda", 1e-6, 1e-2, 25, 1000.0).unwrap();
    let curve = sweep("simplex", |l| Ok(build_simplex_model(l)), &spec, DEFAULT_TOL).unwrap();
    let first = curve.points[0].result.as_ref().unwrap();
    assert!((first.midpoint() - 9.995e-4).abs() < 1e-6);
}

#[test]
fn degenerate_sweeps_are_rejected() {
    assert!(SweepSpec::new("lambda", 1e-3, 1e-3, 2, 1000.0).is_err());
    assert!(SweepSpec::new("lambda", 1e-6, 1e-2, 1, 1000.0).is_err());
}

#[test]
fn model_language_examples() {
    let m = parse_model("CONST lambda = 0.001; INIT up; STATE dead DEATH; up -> dead : lambda;").unwrap();
    assert_eq!(m.states().len(), 2);
    let tmr = parse_model("CONST lambda = 0.001; INIT a; STATE dead DEATH; a -> dead : 3*lambda;").unwrap();
    assert!((tmr.transitions()[0].rate - 0.003).abs() < 1e-18);
    let err = parse_model("CONST l = 1; INIT a; STATE d DEATH; a -> d : l; d -> a : l;").unwrap_err();
    assert!(matches!(err, ModelError::DeathHasExit { .. }), "{err}");
    assert!(parse_model("INIT a; STATE d DEATH; a -> d : 0;").is_err());
    assert!(parse_model("INIT a; STATE d DEATH; STATE z; a -> d : 1;").is_err());
}

#[test]
fn custom_model_from_assets_solves() {
    let m = parse_model(include_str!("../assets/ifr_pipeline.model")).unwrap();
    let b = death_probability(&m, hours(1000.0), DEFAULT_TOL).unwrap();
    assert!(b.contains(ifr_exact(1e-6, 2e-8, 1000.0)));
}
