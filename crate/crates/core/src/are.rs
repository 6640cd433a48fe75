//! Continuous-time algebraic Riccati equations `AᵀX + XA + Q − XDX = 0`,
//! their Hamiltonian matrices and the stabilizing solution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    self, complexify, ensure_finite, ensure_square, is_hurwitz, symmetrize, symmetry_defect,
    Matrix, Vector, AXIS_TOL, SYM_TOL,
};

/// Relative structure defect tolerated when reading blocks off a Hamiltonian.
pub const HAMILTONIAN_TOL: f64 = 1e-9;
/// Relative singular value threshold of the PBH rank tests.
pub const RANK_TOL: f64 = 1e-10;
/// Smallest singular value accepted for the upper block of the stable basis.
const GRAPH_TOL: f64 = 1e-12;

/// Coefficients `(A, Q, D)` of an ARE; `Q` and `D` are symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct AreProblem {
    a: Matrix,
    q: Matrix,
    d: Matrix,
}

impl AreProblem {
    /// Validates shapes and finiteness, then symmetrizes `Q` and `D`.
    pub fn new(a: Matrix, q: Matrix, d: Matrix) -> Result<Self> {
        ensure_square(&a, "A")?;
        let n = a.nrows();
        for (m, what) in [(&q, "Q"), (&d, "D")] {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "{what} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        ensure_finite(&a, "A")?;
        ensure_finite(&q, "Q")?;
        ensure_finite(&d, "D")?;
        for (m, what) in [(&q, "Q"), (&d, "D")] {
            let defect = symmetry_defect(m);
            if defect > SYM_TOL * m.norm().max(1.0) {
                return Err(Error::NotSymmetric { what, defect });
            }
        }
        Ok(Self {
            q: symmetrize(&q),
            d: symmetrize(&d),
            a,
        })
    }

    pub fn scalar(a: f64, q: f64, d: f64) -> Self {
        Self::new(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, q),
            Matrix::from_element(1, 1, d),
        )
        .expect("finite scalars form a valid problem")
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn into_parts(self) -> (Matrix, Matrix, Matrix) {
        (self.a, self.q, self.d)
    }

    pub fn hamiltonian(&self) -> HamiltonianMatrix {
        build_hamiltonian(self)
    }
}

/// The `2n x 2n` matrix `[[A, −D], [−Q, −Aᵀ]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    h: Matrix,
    n: usize,
}

impl HamiltonianMatrix {
    /// Wraps `h` after checking `(JH)ᵀ = JH` to [`HAMILTONIAN_TOL`].
    pub fn new(h: Matrix) -> Result<Self> {
        ensure_square(&h, "Hamiltonian")?;
        ensure_finite(&h, "Hamiltonian")?;
        if h.nrows() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "Hamiltonian order {} is odd",
                h.nrows()
            )));
        }
        let defect = structure_defect(&h);
        if defect > HAMILTONIAN_TOL * h.norm().max(1.0) {
            return Err(Error::NotHamiltonian(defect));
        }
        let n = h.nrows() / 2;
        Ok(Self { h, n })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn into_matrix(self) -> Matrix {
        self.h
    }

    pub fn half_order(&self) -> usize {
        self.n
    }

    pub fn norm(&self) -> f64 {
        self.h.norm()
    }

    /// `‖(JH)ᵀ − JH‖_F`.
    pub fn structure_defect(&self) -> f64 {
        structure_defect(&self.h)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        numerics::eigenvalues(&self.h)
    }

    pub fn split(&self) -> Result<AreProblem> {
        split_hamiltonian(self)
    }
}

/// `J = [[0, I], [−I, 0]]` of order `2n`.
pub fn symplectic_j(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `Jv` without forming `J`.
pub fn apply_j(v: &Vector) -> Vector {
    let n = v.len() / 2;
    Vector::from_fn(2 * n, |i, _| if i < n { v[n + i] } else { -v[i - n] })
}

pub fn structure_defect(h: &Matrix) -> f64 {
    let n = h.nrows() / 2;
    let jh = symplectic_j(n) * h;
    (jh.transpose() - jh).norm()
}

pub fn build_hamiltonian(p: &AreProblem) -> HamiltonianMatrix {
    let n = p.order();
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&p.a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&p.d));
    h.view_mut((n, 0), (n, n)).copy_from(&(-&p.q));
    h.view_mut((n, n), (n, n)).copy_from(&(-p.a.transpose()));
    HamiltonianMatrix { h, n }
}

/// Reads `(Ã, Q̃, D̃)` back from the blocks, averaging the two copies of `Ã`
/// and symmetrizing `Q̃` and `D̃`.
pub fn split_hamiltonian(h: &HamiltonianMatrix) -> Result<AreProblem> {
    let n = h.n;
    let m = &h.h;
    let h11 = m.view((0, 0), (n, n));
    let h12 = m.view((0, n), (n, n));
    let h21 = m.view((n, 0), (n, n));
    let h22 = m.view((n, n), (n, n));
    let mismatch = (h22 + h11.transpose()).norm();
    if mismatch > HAMILTONIAN_TOL * m.norm().max(1.0) {
        return Err(Error::NotHamiltonian(mismatch));
    }
    let a = (h11 - h22.transpose()) * 0.5;
    let d = symmetrize(&(-h12.into_owned()));
    let q = symmetrize(&(-h21.into_owned()));
    Ok(AreProblem { a, q, d })
}

/// Frobenius norm of `AᵀX + XA + Q − XDX`.
pub fn residual(p: &AreProblem, x: &Matrix) -> Result<f64> {
    let n = p.order();
    if x.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "solution is {}x{}, expected {n}x{n}",
            x.nrows(),
            x.ncols()
        )));
    }
    let r = p.a.transpose() * x + x * &p.a + &p.q - x * &p.d * x;
    Ok(r.norm())
}

/// The unique symmetric `P` with `A − DP` Hurwitz.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizingSolution {
    #[serde(with = "crate::io::matrix_rows")]
    pub p: Matrix,
    pub closed_loop: Vec<Complex64>,
    pub residual: f64,
}

/// Stabilizing solution from the stable invariant subspace `col(U₁₁, U₂₁)` of
/// the Hamiltonian: `P = U₂₁ U₁₁⁻¹`.
pub fn solve_stabilizing(p: &AreProblem) -> Result<StabilizingSolution> {
    let n = p.order();
    if n == 0 {
        return Ok(StabilizingSolution {
            p: Matrix::zeros(0, 0),
            closed_loop: Vec::new(),
            residual: 0.0,
        });
    }
    let h = build_hamiltonian(p);
    let schur = numerics::ordered_stable_schur(&h.h)?;
    if schur.stable_dim != n {
        return Err(Error::Assumption(format!(
            "Hamiltonian has {} stable eigenvalues, expected {n}",
            schur.stable_dim
        )));
    }
    let u11 = schur.q.view((0, 0), (n, n)).into_owned();
    let u21 = schur.q.view((n, 0), (n, n)).into_owned();
    let smallest = u11.singular_values().min();
    if smallest < GRAPH_TOL {
        return Err(Error::SingularBasis(smallest));
    }
    let pt = u11
        .transpose()
        .lu()
        .solve(&u21.transpose())
        .ok_or(Error::SingularBasis(smallest))?;
    let x = symmetrize(&pt.transpose());
    let closed_loop = numerics::eigenvalues(&(&p.a - &p.d * &x))?;
    let residual = residual(p, &x)?;
    Ok(StabilizingSolution {
        p: x,
        closed_loop,
        residual,
    })
}

impl StabilizingSolution {
    pub fn is_stabilizing(&self) -> bool {
        is_hurwitz(&self.closed_loop)
    }
}

/// Outcome of the PBH rank tests.
///
/// Margins are the smallest relative singular value met among the tested
/// unstable modes; `None` when `A` has no mode with `Re λ >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub stabilizable: bool,
    pub detectable: bool,
    pub stabilizability_margin: Option<f64>,
    pub detectability_margin: Option<f64>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.stabilizable && self.detectable
    }
}

/// Stabilizability of `(A, D)` and detectability of `(Q, A)`.
pub fn check_assumptions(p: &AreProblem) -> Result<AssumptionReport> {
    let n = p.order();
    let scale = p.a.norm().max(1.0);
    let modes: Vec<Complex64> = numerics::eigenvalues(&p.a)?
        .into_iter()
        .filter(|l| l.re >= -AXIS_TOL * scale)
        .collect();
    let ac = complexify(&p.a);
    let at = complexify(&p.a.transpose());
    let dc = complexify(&p.d);
    let qc = complexify(&p.q);

    let mut stab_margin: Option<f64> = None;
    let mut det_margin: Option<f64> = None;
    for lambda in modes {
        let eye = numerics::CMatrix::identity(n, n);
        let mut left = numerics::CMatrix::zeros(n, 2 * n);
        left.view_mut((0, 0), (n, n))
            .copy_from(&(&ac - &eye * lambda));
        left.view_mut((0, n), (n, n)).copy_from(&dc);
        let mut right = numerics::CMatrix::zeros(n, 2 * n);
        right
            .view_mut((0, 0), (n, n))
            .copy_from(&(&at - &eye * lambda.conj()));
        right.view_mut((0, n), (n, n)).copy_from(&qc);
        let s = relative_smallest_singular(&left);
        let d = relative_smallest_singular(&right);
        stab_margin = Some(stab_margin.map_or(s, |m| m.min(s)));
        det_margin = Some(det_margin.map_or(d, |m| m.min(d)));
    }
    Ok(AssumptionReport {
        stabilizable: stab_margin.is_none_or(|m| m > RANK_TOL),
        detectable: det_margin.is_none_or(|m| m > RANK_TOL),
        stabilizability_margin: stab_margin,
        detectability_margin: det_margin,
    })
}

fn relative_smallest_singular(m: &numerics::CMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn random_problem(n: usize, seed: u64) -> AreProblem {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let c = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        AreProblem::new(a, c.transpose() * &c, &b * b.transpose()).unwrap()
    }

    #[test]
    fn scalar_hamiltonian_blocks() {
        let h = AreProblem::scalar(1.0, 1.0, 1.0).hamiltonian();
        assert_eq!(h.matrix(), &Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, -1.0]));
        let back = h.split().unwrap();
        assert_eq!(back, AreProblem::scalar(1.0, 1.0, 1.0));
    }

    #[test]
    fn zero_problem_zero_hamiltonian() {
        let z = Matrix::zeros(3, 3);
        let h = AreProblem::new(z.clone(), z.clone(), z).unwrap().hamiltonian();
        assert_eq!(h.matrix(), &Matrix::zeros(6, 6));
        assert_eq!(h.split().unwrap().a(), &Matrix::zeros(3, 3));
    }

    #[test]
    fn round_trip_is_exact() {
        for seed in 0..5 {
            let p = random_problem(4, seed);
            assert_eq!(p.hamiltonian().split().unwrap(), p);
        }
    }

    #[test]
    fn hamiltonian_structure_and_symmetry() {
        let p = random_problem(5, 3);
        let h = p.hamiltonian();
        assert!(h.structure_defect() < 1e-14);
        let spec = h.eigenvalues().unwrap();
        let neg: Vec<Complex64> = spec.iter().map(|l| -l).collect();
        assert!(numerics::spectrum_distance(&spec, &neg).unwrap() < 1e-8 * h.norm());
    }

    #[test]
    fn left_right_duality() {
        let h = random_problem(4, 9).hamiltonian();
        for pair in numerics::eig_all(h.matrix()).unwrap() {
            let j = complexify(&symplectic_j(4));
            let w = &j * &pair.vector;
            let left = numerics::EigenPair {
                value: -pair.value,
                vector: w,
                side: numerics::Side::Left,
            };
            assert!(left.residual(h.matrix()) < 1e-10 * h.norm());
        }
    }

    #[test]
    fn split_rejects_broken_structure() {
        let mut m = AreProblem::scalar(1.0, 1.0, 1.0).hamiltonian().into_matrix();
        m[(1, 1)] = 3.0;
        assert!(HamiltonianMatrix::new(m).is_err());
    }

    #[test]
    fn asymmetric_q_rejected() {
        let a = Matrix::identity(2, 2);
        let q = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            AreProblem::new(a.clone(), q, a),
            Err(Error::NotSymmetric { what: "Q", .. })
        ));
    }

    #[test]
    fn scalar_stabilizing_root() {
        let sol = solve_stabilizing(&AreProblem::scalar(1.0, 1.0, 1.0)).unwrap();
        assert_relative_eq!(sol.p[(0, 0)], 1.0 + 2f64.sqrt(), epsilon = 1e-12);
        assert!(sol.is_stabilizing());
        assert_relative_eq!(sol.closed_loop[0].re, -(2f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn hurwitz_a_zero_q_gives_zero() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 3.0, 0.0, -2.0]);
        let p = AreProblem::new(a, Matrix::zeros(2, 2), Matrix::identity(2, 2)).unwrap();
        let sol = solve_stabilizing(&p).unwrap();
        assert!(sol.p.norm() < 1e-12);
    }

    #[test]
    fn random_lqr_solution_is_accurate() {
        let p = random_problem(5, 21);
        let sol = solve_stabilizing(&p).unwrap();
        assert!(sol.residual <= 1e-10 * (1.0 + sol.p.norm().powi(2)));
        assert!(sol.is_stabilizing());
        assert!(symmetry_defect(&sol.p) == 0.0);
        // col(I, P) spans an invariant subspace with A − DP as the restriction.
        let n = 5;
        let mut basis = Matrix::zeros(2 * n, n);
        basis.view_mut((0, 0), (n, n)).fill_with_identity();
        basis.view_mut((n, 0), (n, n)).copy_from(&sol.p);
        let lhs = p.hamiltonian().matrix() * &basis;
        let rhs = &basis * (p.a() - p.d() * &sol.p);
        assert!((lhs - rhs).norm() < 1e-9 * (1.0 + sol.p.norm()));
    }

    #[test]
    fn residual_examples() {
        let p = AreProblem::scalar(1.0, 1.0, 1.0);
        let x = Matrix::from_element(1, 1, 1.0 + 2f64.sqrt());
        assert!(residual(&p, &x).unwrap() < 1e-12);
        assert_relative_eq!(residual(&p, &Matrix::zeros(1, 1)).unwrap(), 1.0);
        assert!(residual(&p, &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn assumption_examples() {
        let minus_i = -Matrix::identity(2, 2);
        let z = Matrix::zeros(2, 2);
        let r = check_assumptions(&AreProblem::new(minus_i, z.clone(), z.clone()).unwrap()).unwrap();
        assert!(r.stabilizable && r.detectable);
        assert!(r.stabilizability_margin.is_none());

        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        let r = check_assumptions(&AreProblem::new(a, Matrix::identity(2, 2), z).unwrap()).unwrap();
        assert!(!r.stabilizable);
        assert!(r.detectable);

        let r = check_assumptions(&AreProblem::scalar(1.0, 1.0, 1.0)).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn apply_j_matches_matrix() {
        let v = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(apply_j(&v), symplectic_j(2) * &v);
    }
}
