//! A shift that keeps Q and D positive semidefinite, so the disguised
//! equation still comes from an LQR problem.
//!
//! Usage: cargo run --release --example realizable_disguise [seed]

use riccati_disguise::numerics::min_sym_eigenvalue;
use riccati_disguise::{
    algorithm2, are_to_lqr_realization, generate_benchmark, lqr_to_are, privacy_measures,
    solve_stabilizing, BenchmarkSpec,
};

fn main() -> riccati_disguise::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let spec = BenchmarkSpec::new(12, 3, 3, seed).with_isolated_modes(2);
    let problem = lqr_to_are(&generate_benchmark(&spec)?)?;

    let shift = algorithm2(&problem, seed)?;
    let w = &shift.window;
    println!(
        "λ = {:.4}, branch {:?}, window ({:.4}, {:.4}), Δ = {:+.4}",
        shift.record.eigenvalue.re, w.branch, w.lower, w.upper, shift.record.delta
    );
    let m = &shift.problem;
    println!(
        "min eig Q̃ = {:.3e}, min eig D̃ = {:.3e}",
        min_sym_eigenvalue(m.q())?,
        min_sym_eigenvalue(m.d())?
    );
    let report = privacy_measures(&problem, m, 1)?;
    let [ra, rd, rq] = report.ratios();
    println!("relative changes: A {ra:.4}, D {rd:.4}, Q {rq:.4}");

    let dummy = are_to_lqr_realization(m)?;
    println!(
        "dummy LQR: B̃ is {}x{}, C̃ is {}x{}, R̃ = I",
        dummy.b().nrows(),
        dummy.b().ncols(),
        dummy.c().nrows(),
        dummy.c().ncols()
    );
    let p = solve_stabilizing(&problem)?.p;
    let pt = solve_stabilizing(m)?.p;
    println!("‖P̃ − P‖ / ‖P‖ = {:.2e}", (&pt - &p).norm() / p.norm());
    Ok(())
}
