//! Assemble a program, run it on the reference interpreter and on the
//! fault-free pipelined core, and compare the two.
//!
//! cargo run --example assemble_and_run [-- program.asm]

use ifr::fault::FaultScenario;
use ifr::isa::{assemble, run_reference};
use ifr::pipeline::{run_core, CoreConfig};

fn main() {
    let source = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => include_str!("../assets/fibonacci.asm").to_string(),
    };
    let program = match assemble(&source) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let config = CoreConfig::default();
    let (reference, steps) = run_reference(&program, config.max_cycles);
    let sim = run_core(&program, &config, &FaultScenario::empty());

    println!("{} instructions at origin {:#x}", program.len(), program.origin());
    println!("reference: {steps} steps, halted = {}", reference.halted);
    println!(
        "pipeline:  {} cycles, {} commits, CPI {:.2}",
        sim.total_cycles,
        sim.committed,
        sim.total_cycles as f64 / sim.committed as f64
    );
    println!("registers: {:?}", &sim.final_state.regs[..8]);
    for (addr, value) in sim.final_state.mem.iter().take(12) {
        println!("  mem[{addr}] = {value}");
    }
    assert_eq!(sim.final_state, reference, "pipeline diverged from the reference");
    println!("final state matches the reference");
}
