//! Disguise a small LQR design with unconstrained real shifts and check that
//! the returned gain is the original one.
//!
//! Usage: cargo run --example disguise_lqr [shifts] [seed]

use riccati_disguise::numerics::Matrix;
use riccati_disguise::{lqr_to_are, perturb, privacy_measures, solve_stabilizing, LqrProblem, SamplingWindow};

fn main() -> riccati_disguise::Result<()> {
    let mut args = std::env::args().skip(1);
    let shifts: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    // Four tanks in series, one inflow, first and last levels measured.
    let a = Matrix::from_row_slice(4, 4, &[
        -1.0, 0.0, 0.0, 0.0,
        0.8, -0.5, 0.0, 0.0,
        0.0, 0.4, 0.2, 0.0,
        0.0, 0.0, 0.6, -0.7,
    ]);
    let b = Matrix::from_row_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
    let c = Matrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let r = Matrix::from_row_slice(1, 1, &[0.5]);
    let lqr = LqrProblem::new(a, b.clone(), c, r.clone())?;
    let problem = lqr_to_are(&lqr)?;

    let (h_tilde, plan) = perturb(&problem.hamiltonian(), shifts, SamplingWindow::default(), seed)?;
    let disguised = h_tilde.split()?;
    for record in &plan.records {
        println!("moved λ = {:.4} by Δ = {:+.4}", record.eigenvalue.re, record.delta);
    }
    let report = privacy_measures(&problem, &disguised, plan.len())?;
    let [ra, rd, rq] = report.ratios();
    println!("relative changes: A {ra:.3}, D {rd:.3}, Q {rq:.3}");

    let p = solve_stabilizing(&problem)?.p;
    let pt = solve_stabilizing(&disguised)?.p;
    let gain = r.try_inverse().expect("R is invertible") * b.transpose();
    println!("K (original)  = {:.5?}", (&gain * &p).as_slice());
    println!("K (disguised) = {:.5?}", (&gain * &pt).as_slice());
    println!("‖P̃ − P‖ / ‖P‖ = {:.2e}", (&pt - &p).norm() / p.norm());
    Ok(())
}
