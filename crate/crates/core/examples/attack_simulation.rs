//! An adversary that can score guesses against the true Hamiltonian tries
//! every reverse index and optimizes the magnitude.
//!
//! Usage: cargo run --release --example attack_simulation [n] [seed]

use riccati_disguise::privacy::true_reverse_sequence;
use riccati_disguise::{attack_simulate, generate_benchmark, lqr_to_are, perturb, BenchmarkSpec, SamplingWindow};

fn main() -> riccati_disguise::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);

    let mut spec = BenchmarkSpec::new(n, 2, 2, seed);
    spec.real_fraction = 1.0;
    let problem = lqr_to_are(&generate_benchmark(&spec)?)?;
    let h = problem.hamiltonian();
    let (h_tilde, plan) = perturb(&h, 1, SamplingWindow::default(), seed)?;
    let (truth, gammas) = true_reverse_sequence(&h_tilde, &plan.records)?;
    println!("secret: reverse index {:?} with γ = {:.5}", truth, gammas[0]);

    let report = attack_simulate(&h_tilde, &h, 1, 1000, seed)?;
    println!(
        "{} candidates, ambiguity ({}, {})",
        report.candidates, report.ambiguity.sequences, report.ambiguity.magnitudes
    );
    for outcome in &report.outcomes {
        println!(
            "  index {:?}: best γ = {:.5}, distance {:.3e}",
            outcome.indices, outcome.gammas[0], outcome.distance
        );
    }
    println!("recovered: {:?}", report.recovered);
    Ok(())
}
