//! Per-block power ledger of a run with one permanent fault: how long each
//! copy was on, off or ramping. Cold spares accumulate no on-time until
//! they are needed.
//!
//! cargo run --example stress_ledger

use ifr::fault::parse_scenario;
use ifr::pipeline::{run_core, BlockId, CoreConfig};
use ifr::workload::canonical_program;

fn main() {
    let config = CoreConfig::default();
    let scenario = parse_scenario(include_str!("../assets/stuck_decode.scenario")).unwrap();
    let sim = run_core(&canonical_program(), &config, &scenario);

    println!("{} cycles, outcome {}\n", sim.total_cycles, sim.outcome.name());
    println!(
        "{:<16} {:>6} {:>6} {:>9} {:>7}",
        "block", "on", "off", "powering", "duty"
    );
    for block in BlockId::all() {
        let s = sim.stress.get(block);
        println!(
            "{:<16} {:>6} {:>6} {:>9} {:>6.1}%",
            block.to_string(),
            s.on_cycles,
            s.off_cycles,
            s.powering_cycles,
            100.0 * s.on_cycles as f64 / s.total() as f64
        );
    }
    assert!(sim.stress.is_conserved());
    println!("\nfinal power: {:?}", sim.final_power);
}
