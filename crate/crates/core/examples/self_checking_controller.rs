//! The duplicated controller with complemented outputs: a stuck output bit
//! on either copy is caught by the two-rail checker the first time the
//! healthy copy drives the opposite value, and the core stops.
//!
//! cargo run --example self_checking_controller

use ifr::fault::parse_scenario;
use ifr::pipeline::{run_core, trc_compare, ControllerOutputs, CoreConfig, DeadCause, CONTROLLER_OUTPUT_BITS};
use ifr::workload::canonical_program;

fn main() {
    let healthy = ControllerOutputs(0b1010_0000_0000_0100_0001);
    let ok = trc_compare(healthy.as_rail(), healthy.complemented().as_rail()).unwrap();
    println!("healthy pair checks as {ok}");
    let mut caught = 0;
    for bit in 0..CONTROLLER_OUTPUT_BITS {
        let forced = healthy.with_bit(bit, !healthy.bit(bit));
        caught += usize::from(!trc_compare(forced.as_rail(), healthy.complemented().as_rail()).unwrap());
    }
    println!("single-bit corruptions caught: {caught}/{CONTROLLER_OUTPUT_BITS}\n");

    let program = canonical_program();
    for text in [
        "@7 PERM ctrl.a stuckat 0 1",
        "@20 PERM ctrl.b stuckat 17 1",
        "@3 T:1 ctrl.a flip 0",
    ] {
        let sim = run_core(&program, &CoreConfig::default(), &parse_scenario(text).unwrap());
        let how = match sim.dead_cause {
            Some(DeadCause::ControllerMismatch { cycle }) => format!("halted at cycle {cycle}"),
            // The healthy copy never drove the other value on that pin.
            _ => format!("latent, {} after {} cycles", sim.outcome.name(), sim.total_cycles),
        };
        println!("{text:<30} -> {how}");
    }
}
