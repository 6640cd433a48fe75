//! The scalar equation 2x + 1 − x² = 0 traced through one real shift in
//! each direction.
//!
//! Usage: cargo run --example scalar_walkthrough

use riccati_disguise::numerics::RealSchur;
use riccati_disguise::shift::pq_vectors_real;
use riccati_disguise::{fg_matrices, real_shift, solve_stabilizing, AreProblem};

fn main() -> riccati_disguise::Result<()> {
    let problem = AreProblem::scalar(1.0, 1.0, 1.0);
    let p = solve_stabilizing(&problem)?.p[(0, 0)];
    println!("P = {p:.5} (1 + √2 = {:.5})", 1.0 + 2f64.sqrt());

    let h = problem.hamiltonian();
    let schur = RealSchur::new(h.matrix())?;
    let idx = schur
        .eigenvalues()
        .iter()
        .position(|l| l.re < 0.0)
        .expect("stable eigenvalue");
    let pair = schur.eigenpair(idx)?;
    let v = pair.real_vector().expect("real eigenvector");
    let (pv, qv) = pq_vectors_real(&v)?;
    println!("λ = {:.5}", pair.value.re);
    println!("v = ({:.5}, {:.5})", v[0], v[1]);
    println!("p = ({:.5}, {:.5})  q = ({:.5}, {:.5})", pv[0], pv[1], qv[0], qv[1]);
    let fg = fg_matrices(&v)?;
    println!("F = {:.5}  G = {:.5}", fg.f[(0, 0)], fg.g[(0, 0)]);

    for delta in [0.5, -0.5] {
        let shifted = real_shift(&h, &pair, delta)?;
        let m = shifted.split()?;
        let mut spectrum: Vec<f64> = shifted.eigenvalues()?.iter().map(|l| l.re).collect();
        spectrum.sort_by(f64::total_cmp);
        let pt = solve_stabilizing(&m)?.p[(0, 0)];
        println!(
            "Δ = {delta:+}: (A, Q, D) = ({:.5}, {:.5}, {:.5}), eigenvalues {:.5} and {:.5}, P = {pt:.5}",
            m.a()[(0, 0)],
            m.q()[(0, 0)],
            m.d()[(0, 0)],
            spectrum[0],
            spectrum[1]
        );
    }
    Ok(())
}
