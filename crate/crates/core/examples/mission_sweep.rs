//! Failure-probability curves of simplex, TMR and standby over a decade
//! sweep of the component failure rate at a 1000 h mission, written as CSV.
//!
//! cargo run --example mission_sweep > sweep.csv

use ifr::markov::{sweep, BuiltinModel, SweepSpec, DEFAULT_TOL};

fn main() {
    let spec = SweepSpec::new("lambda", 1e-6, 1e-2, 17, 1000.0).unwrap();
    let curves: Vec<_> = [BuiltinModel::Simplex, BuiltinModel::Tmr, BuiltinModel::Standby]
        .iter()
        .map(|b| sweep(b.name(), |l| b.build(l), &spec, DEFAULT_TOL).unwrap())
        .collect();

    print!("lambda");
    for c in &curves {
        print!(",{0}_lower,{0}_upper", c.model);
    }
    println!();
    for i in 0..spec.points {
        print!("{:.8e}", curves[0].points[i].value);
        for c in &curves {
            let b = c.points[i].result.as_ref().expect("bracket resolved");
            print!(",{:.8e},{:.8e}", b.lower, b.upper);
        }
        println!();
    }
}
