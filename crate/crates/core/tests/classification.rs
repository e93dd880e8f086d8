//! Transient faults never cost a spare; exercised permanent faults cost
//! exactly one, and the run still ends in the reference state.

use ifr::fault::{FaultClass, FaultScenario, FaultSite};
use ifr::isa::run_reference;
use ifr::pipeline::{run_core, Copy, CoreConfig, Outcome, SwitchSetting, PIPELINE_DEPTH};
use ifr::workload::{random_permanent_scenario, random_program, random_transient_scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn transient_only_scenarios_never_swap() {
    let cfg = CoreConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let program = random_program(&mut rng);
        let (reference, _) = run_reference(&program, cfg.max_cycles);
        let horizon = run_core(&program, &cfg, &FaultScenario::empty()).total_cycles - PIPELINE_DEPTH;
        let scenario = random_transient_scenario(&mut rng, cfg.permanent_threshold, horizon);
        let r = run_core(&program, &cfg, &scenario);
        assert_eq!(r.outcome, Outcome::Completed, "case {i}: {scenario}");
        assert_eq!(r.permanent_events().count(), 0, "case {i}: {scenario}");
        assert_eq!(r.final_switch, SwitchSetting::default());
        assert_eq!(r.final_state, reference);
        assert!(r.stress.is_conserved());
        assert!(r.classifier_mismatches.is_empty(), "{:?}", r.classifier_mismatches);
    }
}

#[test]
fn exercised_stuck_at_is_classified_permanent_once() {
    let cfg = CoreConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..200 {
        let program = random_program(&mut rng);
        let (reference, _) = run_reference(&program, cfg.max_cycles);
        let horizon = run_core(&program, &cfg, &FaultScenario::empty()).total_cycles - PIPELINE_DEPTH;
        let scenario = random_permanent_scenario(&mut rng, horizon);
        let FaultSite::Bus(block) = scenario.faults[0].site else {
            unreachable!()
        };
        let r = run_core(&program, &cfg, &scenario);
        let permanent: Vec<_> = r.permanent_events().collect();
        assert_eq!(permanent.len(), 1, "case {i}: {scenario}");
        assert_eq!(permanent[0].stage, block.kind);
        assert_eq!(permanent[0].class, FaultClass::Permanent);
        assert!(permanent[0].swap_complete_cycle.is_some());
        assert_eq!(r.outcome, Outcome::Completed);
        assert_eq!(r.final_state, reference, "case {i}: {scenario}");
        assert_eq!(r.final_switch.get(block.kind), Copy::Spare);
        assert!(r.stress.is_conserved());
    }
}
