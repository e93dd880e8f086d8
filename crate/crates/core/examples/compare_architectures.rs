//! Mission failure probability of simplex, TMR, standby and the repairable
//! pipeline across failure rates, with the bracket of each solve.
//!
//! cargo run --release --example compare_architectures

use ifr::markov::{death_probability, log_space, BuiltinModel};
use ifr::redundancy::{FailureRate, MissionTime};

fn main() {
    let t = MissionTime::new(1000.0).unwrap();
    println!(
        "{:>9}  {:>10} {:>10} {:>10} {:>10}",
        "lambda", "simplex", "tmr", "standby", "ifr"
    );
    for l in log_space(1e-6, 1e-2, 9) {
        let rate = FailureRate::new(l).unwrap();
        print!("{l:>9.1e} ");
        for b in BuiltinModel::ALL {
            let d = death_probability(&b.build(rate).unwrap(), t, 1e-6).unwrap();
            print!(" {:>10.3e}", d.midpoint());
        }
        println!();
    }
    println!(
        "\nifr-pipeline uses switch and controller rates of {} x lambda_p",
        BuiltinModel::DEFAULT_AUX_RATIO
    );
}
