//! Parse a model description, bracket its death probability and check the
//! bracket against a Monte-Carlo estimate. A Weibull wear-out law on the
//! voter shows the semi-Markov path.
//!
//! cargo run --release --example custom_model [-- file.model]

use ifr::markov::{
    death_probability, monte_carlo_death_probability, monte_carlo_semi_markov, parse_model, HoldingTime,
};
use ifr::redundancy::MissionTime;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => include_str!("../assets/tmr_with_voter.model").to_string(),
    };
    let model = match parse_model(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    print!("{model}");

    let t = MissionTime::new(1000.0).unwrap();
    let bounds = death_probability(&model, t, 1e-6).unwrap();
    println!("\nD(1000 h) in [{:.6e}, {:.6e}]", bounds.lower, bounds.upper);

    let mc = monte_carlo_death_probability(&model, t, 200_000, 1);
    println!(
        "Monte Carlo: {:.6e} +/- {:.1e} (99%), overlaps: {}",
        mc.estimate,
        mc.ci99,
        mc.overlaps(bounds.lower, bounds.upper)
    );

    // Same structure with wearing-out voters: scale 5000 h, shape 3.
    let laws: Vec<HoldingTime> = model
        .transitions()
        .iter()
        .map(|tr| {
            if tr.expr.to_string() == "voter" {
                HoldingTime::Weibull {
                    scale: 5000.0,
                    shape: 3.0,
                }
            } else {
                HoldingTime::Exponential
            }
        })
        .collect();
    let worn = monte_carlo_semi_markov(&model, &laws, t, 200_000, 1);
    println!("with Weibull voters: {:.6e} +/- {:.1e}", worn.estimate, worn.ci99);
}
