//! File-level round trip: the owner writes a disguised problem, an untrusted
//! solver sees only that file, and the owner checks the returned solution
//! against the original coefficients.
//!
//! Usage: cargo run --example outsourcing_roundtrip [dir]

use std::path::PathBuf;

use riccati_disguise::are::residual;
use riccati_disguise::io::{ProblemFile, SolutionFile};
use riccati_disguise::numerics::{eigenvalues, is_hurwitz};
use riccati_disguise::{generate_benchmark, lqr_to_are, perturb, solve_stabilizing, BenchmarkSpec, SamplingWindow};

fn main() -> riccati_disguise::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let shipped = dir.join("disguised.json");
    let returned = dir.join("solution.json");

    // Owner side.
    let mut spec = BenchmarkSpec::new(8, 2, 2, 21);
    spec.real_fraction = 0.75;
    let original = lqr_to_are(&generate_benchmark(&spec)?)?;
    let (h_tilde, plan) = perturb(&original.hamiltonian(), 3, SamplingWindow::default(), 21)?;
    ProblemFile::from_are(&h_tilde.split()?).write(&shipped)?;
    println!("owner: {} shifts applied, wrote {}", plan.len(), shipped.display());

    // Solver side, which reads nothing but the shipped file.
    let received = ProblemFile::read(&shipped)?.are_problem()?;
    SolutionFile::from(solve_stabilizing(&received)?).write(&returned)?;
    println!("solver: wrote {}", returned.display());

    // Owner checks the answer against the undisguised equation.
    let p = SolutionFile::read(&returned)?.p;
    let res = residual(&original, &p)?;
    let closed_loop = eigenvalues(&(original.a() - original.d() * &p))?;
    println!(
        "owner: residual {res:.2e}, A − DP Hurwitz: {}",
        is_hurwitz(&closed_loop)
    );
    Ok(())
}
