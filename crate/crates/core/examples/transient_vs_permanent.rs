//! Sweep the length of a bit-flip burst on Decode and watch where the
//! controller stops calling it transient and starts swapping in the spare.
//!
//! cargo run --example transient_vs_permanent

use ifr::fault::{parse_scenario, FaultClass};
use ifr::pipeline::{run_core, CoreConfig};
use ifr::workload::canonical_program;

fn main() {
    let config = CoreConfig::default();
    let program = canonical_program();
    println!("threshold = {} consecutive error cycles\n", config.permanent_threshold);
    println!("{:>6}  {:<10} {:>10}  spare used", "burst", "verdict", "cycles");
    for burst in [1, 2, 4, 8, 12, 15, 16, 17, 24, 40] {
        let scenario = parse_scenario(&format!("@10 T:{burst} decode.main flip 9")).unwrap();
        let sim = run_core(&program, &config, &scenario);
        let spare = sim.permanent_events().next().is_some();
        let verdict = if spare {
            FaultClass::Permanent
        } else {
            FaultClass::Transient
        };
        println!(
            "{burst:>6}  {:<10} {:>10}  {spare}",
            verdict.to_string(),
            sim.total_cycles
        );
    }
}
