//! Recovery time of the four stuck-at and delay cases on the sum loop,
//! in cycles and in microseconds at the configured clock.
//!
//! cargo run --example recovery_table

use ifr::isa::run_reference;
use ifr::pipeline::{run_core, CoreConfig, Outcome};
use ifr::workload::{canonical_cases, canonical_program};

fn main() {
    let config = CoreConfig::default();
    let program = canonical_program();
    let (reference, _) = run_reference(&program, config.max_cycles);

    println!(
        "{:<18} {:>7} {:>9} {:>8} {:>9}  golden",
        "fault", "detect", "complete", "cycles", "us"
    );
    for case in canonical_cases() {
        let sim = run_core(&program, &config, &case.scenario);
        let golden = sim.outcome == Outcome::Completed && sim.final_state == reference;
        for e in sim.permanent_events() {
            let cycles = e.recovery_cycles().expect("repair finished");
            println!(
                "{:<18} {:>7} {:>9} {:>8} {:>9.3}  {golden}",
                case.name,
                e.detect_cycle,
                e.swap_complete_cycle.unwrap_or(0),
                cycles,
                config.cycles_to_us(cycles),
            );
        }
    }
    let fixed = config.permanent_threshold + config.flush_cycles + config.powerup_cycles_per_block + 3;
    println!("\nthreshold + flush + power-up + refill = {fixed} cycles");
}
