//! Closed-form survival probabilities of the classic redundancy schemes
//! next to the spare-based block and pipeline formulas.
//!
//! cargo run --example redundancy_formulas

use ifr::redundancy::{
    availability, r_ifr, r_ifr_pipeline, r_standby, r_tmr, AvailabilityInputs, CoverageFactor, Reliability,
};

fn main() {
    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>11}",
        "R", "TMR", "standby", "ifr s=2", "ifr s=3", "pipe c=0.9"
    );
    let c = CoverageFactor::new(0.9).unwrap();
    for i in 0..=10 {
        let r = Reliability::new(i as f64 / 10.0).unwrap();
        println!(
            "{:>5.2} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>11.5}",
            r.value(),
            r_tmr(r).value(),
            r_standby(r).value(),
            r_ifr(r, 2).value(),
            r_ifr(r, 3).value(),
            r_ifr_pipeline(r, c, Reliability::new(0.999).unwrap(), Reliability::new(0.999).unwrap()).value(),
        );
    }

    // Below R = 0.5 majority voting is worse than a single unit.
    let r = Reliability::new(0.4).unwrap();
    println!("\nR = 0.4: TMR {:.3} < simplex {:.3}", r_tmr(r).value(), r.value());

    let a = AvailabilityInputs::new(999.0, 1.0).unwrap();
    println!(
        "MTTF 999 h, MTTR 1 h: A = {:.4}, MTBF = {} h",
        availability(&a),
        a.mtbf()
    );
}
