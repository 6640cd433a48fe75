//! Privacy measures versus number of shifts on a 100-state LQR benchmark,
//! compared with a single semidefiniteness-preserving shift.
//!
//! Usage: cargo run --release --example case_study [seed] [shifts]

use std::time::Instant;

use riccati_disguise::io::Mode;
use riccati_disguise::lqr::{case_study_on, generate_benchmark, lqr_to_are, BenchmarkSpec};

fn main() -> riccati_disguise::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let shifts: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);

    let spec = BenchmarkSpec::new(100, 10, 10, seed).with_isolated_modes(2);
    let start = Instant::now();
    let problem = lqr_to_are(&generate_benchmark(&spec)?)?;
    println!("instance generated in {:.2?}", start.elapsed());

    let start = Instant::now();
    let unconstrained = case_study_on(&problem, &spec, shifts, Mode::Problem1)?;
    println!(
        "problem1: {} of {} requested shifts ({} negative real eigenvalues) in {:.2?}",
        unconstrained.applied,
        unconstrained.requested,
        unconstrained.negative_real_count,
        start.elapsed()
    );
    println!("iteration  relA     relD     relQ");
    for row in &unconstrained.rows {
        println!(
            "{:>9}  {:.4}   {:.4}   {:.4}",
            row.iteration, row.rel_a, row.rel_d, row.rel_q
        );
    }
    println!(
        "solution change {:.2e}, closed loop stable: {}",
        unconstrained.solution_rel_diff, unconstrained.closed_loop_stable
    );

    let start = Instant::now();
    let realizable = case_study_on(&problem, &spec, 1, Mode::Problem2)?;
    let row = realizable.last_row();
    println!(
        "problem2, one shift: relA {:.4}  relD {:.4}  relQ {:.4}  ({:.2?})",
        row.rel_a,
        row.rel_d,
        row.rel_q,
        start.elapsed()
    );
    Ok(())
}
