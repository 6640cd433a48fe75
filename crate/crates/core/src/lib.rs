//! Disguise algebraic Riccati equations before handing them to an untrusted
//! solver.
//!
//! The coefficients `(A, Q, D)` of `AᵀX + XA + Q − XDX = 0` define the
//! Hamiltonian `H = [[A, −D], [−Q, −Aᵀ]]`. Low-rank updates of `H` move
//! selected eigenvalues while keeping its stable invariant subspace, so the
//! disguised equation has the same stabilizing solution. See the `examples/`
//! directory for end-to-end walkthroughs.

pub mod are;
pub mod cli;
pub mod error;
pub mod io;
pub mod lqr;
pub mod numerics;
pub mod privacy;
pub mod realizability;
pub mod shift;

pub use are::{
    build_hamiltonian, check_assumptions, solve_stabilizing, split_hamiltonian, AreProblem,
    HamiltonianMatrix, StabilizingSolution,
};
pub use error::{Error, Result};
pub use lqr::{are_to_lqr_realization, case_study, generate_benchmark, lqr_to_are, BenchmarkSpec, LqrProblem};
pub use privacy::{attack_simulate, confusion_member, privacy_measures, PrivacyReport};
pub use realizability::{algorithm2, fg_matrices, prop1_verdict, prop2_window};
pub use shift::{complex_shift, perturb, real_shift, SamplingWindow, ShiftPlan, ShiftRecord};
