//! Moving the real part of a complex quadruple of Hamiltonian eigenvalues,
//! checked against the rank-one update spectrum formula.
//!
//! Usage: cargo run --example complex_shift [delta]

use riccati_disguise::numerics::{eig_all, spectrum_distance, Matrix};
use riccati_disguise::shift::predicted_complex_shift_spectrum;
use riccati_disguise::{complex_shift, solve_stabilizing, AreProblem};

fn main() -> riccati_disguise::Result<()> {
    let delta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    // Lightly damped oscillator.
    let a = Matrix::from_row_slice(2, 2, &[-0.2, 2.0, -2.0, -0.3]);
    let q = Matrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.4]);
    let d = Matrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.2]);
    let problem = AreProblem::new(a, q, d)?;
    let h = problem.hamiltonian();

    let pairs = eig_all(h.matrix())?;
    let plus = pairs
        .iter()
        .find(|p| p.value.re < 0.0 && p.value.im > 0.0)
        .expect("complex stable eigenvalue");
    let minus = pairs
        .iter()
        .min_by(|x, y| (x.value + plus.value).norm().total_cmp(&(y.value + plus.value).norm()))
        .expect("paired eigenvalue");
    println!("μ = {:.5}", plus.value);

    let shifted = complex_shift(&h, plus, minus, delta)?;
    let predicted = predicted_complex_shift_spectrum(&h, plus, minus, delta)?;
    let actual = shifted.eigenvalues()?;
    for l in &actual {
        println!("  {l:.5}");
    }
    println!(
        "distance to predicted spectrum {:.2e}",
        spectrum_distance(&predicted, &actual).expect("same size")
    );

    let p = solve_stabilizing(&problem)?.p;
    let pt = solve_stabilizing(&shifted.split()?)?.p;
    println!("‖P̃ − P‖ / ‖P‖ = {:.2e}", (&pt - &p).norm() / p.norm());
    Ok(())
}
