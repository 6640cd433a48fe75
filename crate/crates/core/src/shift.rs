//! Structured eigenvalue shifts of a Hamiltonian matrix.
//!
//! A real shift moves a pair `{λ, −λ}` to `{λ + Δ, −λ − Δ}` through the rank
//! two update `H + Δ(v pᵀ − q qᵀ)` with `q = Jv`, `p = (J + I)v`. A complex
//! shift moves the real parts of a quadruple `{±μ, ±μ̄}` by `±Δ`. Both keep
//! the Hamiltonian structure and the stable invariant subspace `col(I, P)`,
//! so the stabilizing solution is unchanged as long as no eigenvalue crosses
//! the imaginary axis.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::are::{apply_j, HamiltonianMatrix};
use crate::error::{Error, Result};
use crate::numerics::{
    complex_eigenvalues, complexify, eigen_residual_tol, CMatrix, CVector, EigenPair, Matrix,
    RealSchur, Side, Vector,
};

/// Relative distance (to `‖H‖`) under which two eigenvalues are treated as one.
pub const SEPARATION_TOL: f64 = 1e-6;
/// Relative threshold for `|vⱼᵀ J v₋ⱼ|`.
pub const THETA_TOL: f64 = 1e-8;
/// Entrywise change (relative to the block scale) that counts as a modification.
pub const CHANGE_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-10;
const MAX_RESAMPLE: usize = 32;
/// Eigenpair residuals are accepted up to this multiple of [`eigen_residual_tol`].
const RESIDUAL_SLACK: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    Real,
    Complex,
}

/// Eigenvector snapshot of a shift; this is the part of a record that must
/// stay local.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftVectors {
    Real { v: Vec<f64> },
    Complex { plus: Vec<Complex64>, minus: Vec<Complex64> },
}

/// One applied shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub kind: ShiftKind,
    /// Position of the shifted eigenvalue among the candidates of its step.
    pub index: usize,
    /// Eigenvalue before the shift (`λ`, or `μ` with `Re μ < 0`, `Im μ > 0`).
    pub eigenvalue: Complex64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<ShiftVectors>,
}

impl ShiftRecord {
    pub fn shifted_eigenvalue(&self) -> Complex64 {
        self.eigenvalue + self.delta
    }

    pub fn without_vectors(&self) -> Self {
        Self {
            vectors: None,
            ..self.clone()
        }
    }

    pub fn real_vector(&self) -> Option<Vector> {
        match &self.vectors {
            Some(ShiftVectors::Real { v }) => Some(Vector::from_column_slice(v)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKinds {
    Real,
    Complex,
    Mixed,
}

/// Where shift magnitudes are drawn from, relative to `|Re λ|` of the target.
///
/// Positive draws come from `(margin, 1 − margin)·|Re λ|`, negative ones from
/// `(−negative_scale, −margin)·|Re λ|`, each with probability one half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingWindow {
    pub margin: f64,
    pub negative_scale: f64,
    pub kinds: ShiftKinds,
}

impl Default for SamplingWindow {
    fn default() -> Self {
        Self {
            margin: 0.05,
            negative_scale: 1.0,
            kinds: ShiftKinds::Real,
        }
    }
}

impl SamplingWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "margin {} must lie in (0, 0.5)",
                self.margin
            )));
        }
        if !(self.negative_scale > self.margin && self.negative_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "negative scale {} must exceed the margin",
                self.negative_scale
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, magnitude: f64, rng: &mut R) -> f64 {
        if rng.random_bool(0.5) {
            rng.random_range(self.margin * magnitude..(1.0 - self.margin) * magnitude)
        } else {
            -rng.random_range(self.margin * magnitude..self.negative_scale * magnitude)
        }
    }
}

/// Ordered shifts applied by [`perturb`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftPlan {
    pub records: Vec<ShiftRecord>,
    pub seed: u64,
    pub window: SamplingWindow,
}

impl ShiftPlan {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// `p = (J + I)v` and `q = Jv` for a real unit vector `v` of even length.
pub fn pq_vectors_real(v: &Vector) -> Result<(Vector, Vector)> {
    if v.len() % 2 != 0 || v.is_empty() {
        return Err(Error::Dimension(format!("vector length {} is not even", v.len())));
    }
    if (v.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidArgument(format!(
            "eigenvector norm {} is not 1",
            v.norm()
        )));
    }
    let q = apply_j(v);
    let p = &q + v;
    Ok((p, q))
}

/// `Δ (v pᵀ − q qᵀ)`.
pub fn real_perturbation(v: &Vector, delta: f64) -> Result<Matrix> {
    let (p, q) = pq_vectors_real(v)?;
    Ok((v * p.transpose() - &q * q.transpose()) * delta)
}

fn check_residual(h: &HamiltonianMatrix, pair: &EigenPair) -> Result<()> {
    let tol = RESIDUAL_SLACK * eigen_residual_tol(h.matrix().nrows()) * h.norm().max(1.0);
    let residual = pair.residual(h.matrix());
    if residual > tol {
        return Err(Error::EigenResidual { residual, tol });
    }
    Ok(())
}

/// Shifts the real negative eigenvalue of `pair` by `delta`.
///
/// `delta = 0` is accepted and returns `H` unchanged.
pub fn real_shift(h: &HamiltonianMatrix, pair: &EigenPair, delta: f64) -> Result<HamiltonianMatrix> {
    if pair.side != Side::Right {
        return Err(Error::InvalidArgument("a right eigenpair is required".into()));
    }
    let v = pair.real_vector().ok_or_else(|| {
        Error::InvalidArgument(format!("eigenvalue {} is not real", pair.value))
    })?;
    let lambda = pair.value.re;
    if lambda >= 0.0 {
        return Err(Error::InadmissibleShift {
            delta,
            reason: format!("eigenvalue {lambda} is not negative"),
        });
    }
    if !delta.is_finite() || delta >= -lambda {
        return Err(Error::InadmissibleShift {
            delta,
            reason: format!("shift must stay below {}", -lambda),
        });
    }
    if v.len() != h.matrix().nrows() {
        return Err(Error::Dimension("eigenvector length does not match H".into()));
    }
    check_residual(h, pair)?;
    let update = real_perturbation(&v, delta)?;
    HamiltonianMatrix::new(h.matrix() + update)
}

/// Shifts the real parts of the quadruple of `plus = (μ, vⱼ)` and
/// `minus = (−μ, v₋ⱼ)` by `delta` (and `−delta`).
pub fn complex_shift(
    h: &HamiltonianMatrix,
    plus: &EigenPair,
    minus: &EigenPair,
    delta: f64,
) -> Result<HamiltonianMatrix> {
    let mu = plus.value;
    let scale = h.norm().max(1.0);
    if plus.side != Side::Right || minus.side != Side::Right {
        return Err(Error::InvalidArgument("right eigenpairs are required".into()));
    }
    if plus.is_real() || mu.re == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue {mu} is not complex off the imaginary axis"
        )));
    }
    if (minus.value + mu).norm() > SEPARATION_TOL * scale {
        return Err(Error::InvalidArgument(format!(
            "{} is not the negative of {mu}",
            minus.value
        )));
    }
    if !delta.is_finite() || delta / mu.re <= -1.0 {
        return Err(Error::InadmissibleShift {
            delta,
            reason: format!("requires delta / Re(mu) > -1 with Re(mu) = {}", mu.re),
        });
    }
    check_residual(h, plus)?;
    check_residual(h, minus)?;
    let spectrum = h.eigenvalues()?;
    let close = spectrum
        .iter()
        .filter(|l| (*l - mu).norm() <= SEPARATION_TOL * scale)
        .count();
    if close != 1 {
        return Err(Error::NotSimple(mu));
    }

    let (vp, vm) = (&plus.vector, &minus.vector);
    let jvp = apply_j_complex(vp);
    let jvm = apply_j_complex(vm);
    let pairing = vp.transpose() * &jvm;
    let pairing = pairing[(0, 0)];
    if pairing.norm() <= THETA_TOL * vp.norm() * vm.norm() {
        return Err(Error::InvalidArgument(format!(
            "v_j^T J v_-j = {pairing} is numerically zero"
        )));
    }
    let theta = pairing.inv();
    let p = jvm * theta;
    let q = jvp * theta;
    let outer = vp * p.transpose() + vm * q.transpose();
    let update = outer.map(|z| 2.0 * delta * z.re);
    HamiltonianMatrix::new(h.matrix() + update)
}

fn apply_j_complex(v: &CVector) -> CVector {
    let n = v.len() / 2;
    CVector::from_fn(2 * n, |i, _| if i < n { v[n + i] } else { -v[i - n] })
}

/// Applies `k` shifts, each to the current matrix with freshly computed
/// eigenpairs. Targets are drawn uniformly from the admissible eigenvalues
/// that have not been produced by an earlier shift.
pub fn perturb(
    h: &HamiltonianMatrix,
    k: usize,
    window: SamplingWindow,
    seed: u64,
) -> Result<(HamiltonianMatrix, ShiftPlan)> {
    let (mut steps, plan) = perturb_trajectory(h, k, window, seed, |_| true)?;
    Ok((steps.pop().unwrap_or_else(|| h.clone()), plan))
}

/// Same as [`perturb`], also returning the matrix after every shift.
///
/// `accept` sees every otherwise admissible next matrix; a draw it rejects
/// is resampled like a collision.
pub fn perturb_trajectory(
    h: &HamiltonianMatrix,
    k: usize,
    window: SamplingWindow,
    seed: u64,
    mut accept: impl FnMut(&HamiltonianMatrix) -> bool,
) -> Result<(Vec<HamiltonianMatrix>, ShiftPlan)> {
    window.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let original = h.split()?;
    let mut current = h.clone();
    let mut steps = Vec::with_capacity(k);
    let mut records = Vec::with_capacity(k);
    let mut produced: Vec<Complex64> = Vec::new();

    for step in 0..k {
        let last = step + 1 == k;
        let scale = current.norm().max(1.0);
        let schur = RealSchur::new(current.matrix())?;
        let values = classified(schur.eigenvalues());
        let candidates = shift_candidates(&values, &produced, window.kinds, scale);
        if candidates.len() < k - step {
            return Err(Error::NotEnoughEigenvalues {
                available: step + candidates.len(),
                requested: k,
            });
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.shuffle(&mut rng);

        let mut accepted = None;
        'candidates: for ordinal in order {
            let idx = candidates[ordinal];
            let Ok(pair) = schur.eigenpair(idx) else {
                continue;
            };
            let partner = if pair.is_real() {
                None
            } else {
                let target = -pair.value;
                let j = nearest(&values, target);
                match schur.eigenpair(j) {
                    Ok(m) => Some(m),
                    Err(_) => continue,
                }
            };
            for _ in 0..MAX_RESAMPLE {
                let delta = window.sample(pair.value.re.abs(), &mut rng);
                let moved = pair.value + delta;
                if collides(&values, pair.value, moved, scale) {
                    continue;
                }
                let next = match &partner {
                    None => real_shift(&current, &pair, delta),
                    Some(minus) => complex_shift(&current, &pair, minus, delta),
                };
                let Ok(next) = next else {
                    continue 'candidates;
                };
                if last && !modifies_all_blocks(&original, &next)? {
                    continue;
                }
                if !accept(&next) {
                    continue;
                }
                accepted = Some((ordinal, pair.clone(), partner.clone(), delta, next));
                break 'candidates;
            }
        }
        let Some((ordinal, pair, partner, delta, next)) = accepted else {
            return Err(Error::SamplingFailed(MAX_RESAMPLE));
        };
        let record = match partner {
            None => ShiftRecord {
                kind: ShiftKind::Real,
                index: ordinal,
                eigenvalue: pair.value,
                delta,
                vectors: Some(ShiftVectors::Real {
                    v: pair.vector.iter().map(|z| z.re).collect(),
                }),
            },
            Some(minus) => ShiftRecord {
                kind: ShiftKind::Complex,
                index: ordinal,
                eigenvalue: pair.value,
                delta,
                vectors: Some(ShiftVectors::Complex {
                    plus: pair.vector.iter().copied().collect(),
                    minus: minus.vector.iter().copied().collect(),
                }),
            },
        };
        let moved = record.shifted_eigenvalue();
        produced.push(moved);
        if record.kind == ShiftKind::Complex {
            produced.push(moved.conj());
        }
        records.push(record);
        steps.push(next.clone());
        current = next;
    }
    Ok((
        steps,
        ShiftPlan {
            records,
            seed,
            window,
        },
    ))
}

fn classified(values: Vec<Complex64>) -> Vec<Complex64> {
    values
        .into_iter()
        .map(|mut l| {
            if crate::numerics::is_real_eigenvalue(l) {
                l.im = 0.0;
            }
            l
        })
        .collect()
}

fn nearest(values: &[Complex64], target: Complex64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn is_simple(values: &[Complex64], i: usize, scale: f64) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(j, l)| j == i || (l - values[i]).norm() > SEPARATION_TOL * scale)
}

/// Indices (into `values`) of shiftable eigenvalues: real negatives sorted
/// ascending, then complex `μ` with `Re μ < 0`, `Im μ > 0` sorted by real part.
fn shift_candidates(
    values: &[Complex64],
    produced: &[Complex64],
    kinds: ShiftKinds,
    scale: f64,
) -> Vec<usize> {
    let fresh = |l: &Complex64| {
        produced
            .iter()
            .all(|p| (p - l).norm() > SEPARATION_TOL * scale)
    };
    let mut real: Vec<usize> = Vec::new();
    let mut complex: Vec<usize> = Vec::new();
    for (i, l) in values.iter().enumerate() {
        if l.re >= 0.0 || !fresh(l) || !is_simple(values, i, scale) {
            continue;
        }
        if l.im == 0.0 {
            real.push(i);
        } else if l.im > 0.0 {
            complex.push(i);
        }
    }
    real.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    complex.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });
    match kinds {
        ShiftKinds::Real => real,
        ShiftKinds::Complex => complex,
        ShiftKinds::Mixed => real.into_iter().chain(complex).collect(),
    }
}

/// Negative real eigenvalues sorted ascending; the indexing used by the
/// privacy analysis.
pub fn negative_real_eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = h
        .eigenvalues()?
        .into_iter()
        .filter(|l| l.im == 0.0 && l.re < 0.0)
        .map(|l| l.re)
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn collides(values: &[Complex64], from: Complex64, to: Complex64, scale: f64) -> bool {
    let own = |l: &Complex64| {
        (l - from).norm() <= SEPARATION_TOL * scale
            || (l + from).norm() <= SEPARATION_TOL * scale
            || (l - from.conj()).norm() <= SEPARATION_TOL * scale
            || (l + from.conj()).norm() <= SEPARATION_TOL * scale
    };
    values
        .iter()
        .filter(|l| !own(l))
        .any(|l| (l - to).norm() <= SEPARATION_TOL * scale || (l + to).norm() <= SEPARATION_TOL * scale)
}

fn modifies_all_blocks(
    original: &crate::are::AreProblem,
    next: &HamiltonianMatrix,
) -> Result<bool> {
    let modified = next.split()?;
    let changed = |a: &Matrix, b: &Matrix| {
        let scale = a.amax().max(b.amax()).max(1.0);
        (a - b).amax() > CHANGE_TOL * scale
    };
    Ok(changed(original.a(), modified.a())
        && changed(original.q(), modified.q())
        && changed(original.d(), modified.d()))
}

/// Predicted spectrum of `L + MN` when the columns of `M` are right
/// eigenvectors of `L` for the eigenvalues `lambda`:
/// `σ(Λ + NM) ∪ (σ(L) ∖ σ(Λ))`.
pub fn rado_oracle(
    l: &Matrix,
    m: &CMatrix,
    lambda: &[Complex64],
    n: &CMatrix,
) -> Result<Vec<Complex64>> {
    let order = l.nrows();
    let r = m.ncols();
    if m.nrows() != order || lambda.len() != r || n.shape() != (r, order) {
        return Err(Error::Dimension(format!(
            "oracle shapes: L {order}x{order}, M {}x{r}, {} eigenvalues, N {}x{}",
            m.nrows(),
            lambda.len(),
            n.nrows(),
            n.ncols()
        )));
    }
    let lc = complexify(l);
    let scale = l.norm().max(1.0);
    for (j, &value) in lambda.iter().enumerate() {
        let col = m.column(j);
        let residual = (&lc * col - col * value).norm();
        if residual > 1e-8 * scale * col.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::EigenResidual {
                residual,
                tol: 1e-8 * scale,
            });
        }
    }
    if r > 0 {
        let sv = m.singular_values();
        if sv.min() <= 1e-10 * sv.max() {
            return Err(Error::RankDeficient(
                "eigenvector columns are linearly dependent".into(),
            ));
        }
    }
    let small = CMatrix::from_diagonal(&DVector::from_column_slice(lambda)) + n * m;
    let mut predicted = complex_eigenvalues(&small)?;
    let mut rest = crate::numerics::eigenvalues(l)?;
    for value in lambda {
        let j = nearest(&rest, *value);
        rest.swap_remove(j);
    }
    predicted.extend(rest);
    Ok(predicted)
}

/// Two-stage oracle for a real shift: the right factor `v (Δ pᵀ)` first,
/// then the left factor `(−Δ q) qᵀ` on the transposed intermediate matrix.
pub fn predicted_real_shift_spectrum(
    h: &HamiltonianMatrix,
    lambda: f64,
    v: &Vector,
    delta: f64,
) -> Result<Vec<Complex64>> {
    let (p, q) = pq_vectors_real(v)?;
    let m1 = complexify(&Matrix::from_column_slice(v.len(), 1, v.as_slice()));
    let n1 = complexify(&Matrix::from_row_slice(1, p.len(), (&p * delta).as_slice()));
    let lam = Complex64::new(lambda, 0.0);
    let _ = rado_oracle(h.matrix(), &m1, &[lam], &n1)?;
    let intermediate = h.matrix() + v * p.transpose() * delta;
    let m2 = complexify(&Matrix::from_column_slice(q.len(), 1, q.as_slice()));
    let n2 = complexify(&Matrix::from_row_slice(1, q.len(), (&q * -delta).as_slice()));
    rado_oracle(&intermediate.transpose(), &m2, &[-lam], &n2)
}

/// Oracle prediction for [`complex_shift`] with `M = [vⱼ, v₋ⱼ, v̄ⱼ, v̄₋ⱼ]`.
pub fn predicted_complex_shift_spectrum(
    h: &HamiltonianMatrix,
    plus: &EigenPair,
    minus: &EigenPair,
    delta: f64,
) -> Result<Vec<Complex64>> {
    let (vp, vm) = (&plus.vector, &minus.vector);
    let pairing = (vp.transpose() * apply_j_complex(vm))[(0, 0)];
    let theta = pairing.inv();
    let p = apply_j_complex(vm) * theta;
    let q = apply_j_complex(vp) * theta;
    let len = vp.len();
    let conj = |x: &CVector| x.map(|z| z.conj());
    let m = CMatrix::from_columns(&[vp.clone(), vm.clone(), conj(vp), conj(vm)]);
    let mut n = CMatrix::zeros(4, len);
    for (row, vec) in [p.clone(), q.clone(), conj(&p), conj(&q)].iter().enumerate() {
        n.set_row(row, &(vec.transpose() * Complex64::new(delta, 0.0)));
    }
    let mu = plus.value;
    rado_oracle(h.matrix(), &m, &[mu, -mu, mu.conj(), -mu.conj()], &n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::are::AreProblem;
    use crate::numerics::{eig_all, spectrum_distance};
    use approx::assert_relative_eq;

    fn scalar_h() -> HamiltonianMatrix {
        AreProblem::scalar(1.0, 1.0, 1.0).hamiltonian()
    }

    fn stable_real_pair(h: &HamiltonianMatrix) -> EigenPair {
        eig_all(h.matrix())
            .unwrap()
            .into_iter()
            .find(|p| p.is_real() && p.value.re < 0.0)
            .unwrap()
    }

    #[test]
    fn pq_for_unit_basis_vector() {
        let v = Vector::from_vec(vec![1.0, 0.0]);
        let (p, q) = pq_vectors_real(&v).unwrap();
        assert_eq!(p.as_slice(), &[1.0, -1.0]);
        assert_eq!(q.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn pq_identities() {
        let v = Vector::from_vec(vec![0.3, -0.1, 0.5, 0.2, 0.7, -0.4]).normalize();
        let (p, q) = pq_vectors_real(&v).unwrap();
        assert_relative_eq!(p.dot(&v), 1.0, epsilon = 1e-14);
        assert_relative_eq!(q.dot(&v), 0.0, epsilon = 1e-14);
        assert_relative_eq!(q.dot(&q), 1.0, epsilon = 1e-14);
        assert!(pq_vectors_real(&(v * 2.0)).is_err());
    }

    #[test]
    fn perturbation_is_sign_invariant() {
        let v = Vector::from_vec(vec![0.6, 0.8]);
        let a = real_perturbation(&v, 0.3).unwrap();
        let b = real_perturbation(&(-v), 0.3).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn scalar_real_shift_values() {
        let h = scalar_h();
        let pair = stable_real_pair(&h);
        let v = pair.real_vector().unwrap();
        assert_relative_eq!(v[0], 0.38268343236, epsilon = 1e-9);
        assert_relative_eq!(v[1], 0.92387953251, epsilon = 1e-9);
        let shifted = real_shift(&h, &pair, 0.5).unwrap().split().unwrap();
        assert_relative_eq!(shifted.a()[(0, 0)], 0.82322, epsilon = 1e-5);
        assert_relative_eq!(shifted.q()[(0, 0)], 0.21967, epsilon = 1e-5);
        assert_relative_eq!(shifted.d()[(0, 0)], 0.71967, epsilon = 1e-5);
        let shifted = real_shift(&h, &pair, -0.5).unwrap().split().unwrap();
        assert_relative_eq!(shifted.a()[(0, 0)], 1.17678, epsilon = 1e-5);
        assert_relative_eq!(shifted.q()[(0, 0)], 1.78033, epsilon = 1e-5);
        assert_relative_eq!(shifted.d()[(0, 0)], 1.28033, epsilon = 1e-5);
    }

    #[test]
    fn zero_shift_is_identity() {
        let h = scalar_h();
        let pair = stable_real_pair(&h);
        assert_eq!(real_shift(&h, &pair, 0.0).unwrap(), h);
    }

    #[test]
    fn real_shift_rejects_out_of_range() {
        let h = scalar_h();
        let pair = stable_real_pair(&h);
        assert!(matches!(
            real_shift(&h, &pair, 2f64.sqrt()),
            Err(Error::InadmissibleShift { .. })
        ));
        let positive = eig_all(h.matrix())
            .unwrap()
            .into_iter()
            .find(|p| p.value.re > 0.0)
            .unwrap();
        assert!(real_shift(&h, &positive, 0.1).is_err());
    }

    #[test]
    fn real_shift_keeps_eigenvector() {
        let h = scalar_h();
        let pair = stable_real_pair(&h);
        let shifted = real_shift(&h, &pair, 0.5).unwrap();
        let v = pair.real_vector().unwrap();
        let image = shifted.matrix() * &v;
        assert!((image - &v * (pair.value.re + 0.5)).norm() < 1e-14);
        let mut vals = shifted.eigenvalues().unwrap();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_relative_eq!(vals[0].re, -(2f64.sqrt()) + 0.5, epsilon = 1e-12);
    }

    fn complex_problem() -> HamiltonianMatrix {
        // A with a lightly damped oscillatory mode gives a complex quadruple.
        let a = Matrix::from_row_slice(2, 2, &[-0.2, 2.0, -2.0, -0.3]);
        let q = Matrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.4]);
        let d = Matrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.2]);
        AreProblem::new(a, q, d).unwrap().hamiltonian()
    }

    fn quadruple(h: &HamiltonianMatrix) -> (EigenPair, EigenPair) {
        let pairs = eig_all(h.matrix()).unwrap();
        let plus = pairs
            .iter()
            .find(|p| p.value.re < 0.0 && p.value.im > 0.0)
            .unwrap()
            .clone();
        let minus = pairs
            .iter()
            .min_by(|a, b| {
                (a.value + plus.value)
                    .norm()
                    .total_cmp(&(b.value + plus.value).norm())
            })
            .unwrap()
            .clone();
        (plus, minus)
    }

    #[test]
    fn complex_shift_moves_real_parts() {
        let h = complex_problem();
        let (plus, minus) = quadruple(&h);
        let a = plus.value.re;
        let shifted = complex_shift(&h, &plus, &minus, a / 2.0).unwrap();
        assert!(shifted.structure_defect() < 1e-12 * shifted.norm());
        let moved = plus.value + a / 2.0;
        assert_relative_eq!(moved.re, 1.5 * a, epsilon = 1e-14);
        let vals = shifted.eigenvalues().unwrap();
        for target in [moved, -moved, moved.conj(), -moved.conj()] {
            assert!(vals.iter().any(|l| (l - target).norm() < 1e-8), "{target} not in {vals:?}");
        }
        let predicted = predicted_complex_shift_spectrum(&h, &plus, &minus, a / 2.0).unwrap();
        assert!(spectrum_distance(&predicted, &vals).unwrap() < 1e-8);
    }

    #[test]
    fn zero_complex_shift_is_identity() {
        let h = complex_problem();
        let (plus, minus) = quadruple(&h);
        let shifted = complex_shift(&h, &plus, &minus, 0.0).unwrap();
        assert!((shifted.matrix() - h.matrix()).norm() == 0.0);
    }

    #[test]
    fn complex_shift_rejects_crossing() {
        let h = complex_problem();
        let (plus, minus) = quadruple(&h);
        let bad = -plus.value.re * 1.5;
        assert!(matches!(
            complex_shift(&h, &plus, &minus, bad),
            Err(Error::InadmissibleShift { .. })
        ));
    }

    #[test]
    fn perturb_zero_is_identity() {
        let h = scalar_h();
        let (out, plan) = perturb(&h, 0, SamplingWindow::default(), 1).unwrap();
        assert_eq!(out, h);
        assert!(plan.is_empty());
    }

    #[test]
    fn perturb_scalar_matches_real_shift() {
        let h = scalar_h();
        let (out, plan) = perturb(&h, 1, SamplingWindow::default(), 99).unwrap();
        let rec = &plan.records[0];
        let direct = real_shift(&h, &stable_real_pair(&h), rec.delta).unwrap();
        assert_eq!(out, direct);
        let (again, plan2) = perturb(&h, 1, SamplingWindow::default(), 99).unwrap();
        assert_eq!(again, out);
        assert_eq!(plan2, plan);
    }

    #[test]
    fn perturb_requests_too_many() {
        let h = scalar_h();
        assert!(matches!(
            perturb(&h, 2, SamplingWindow::default(), 1),
            Err(Error::NotEnoughEigenvalues { available: 1, requested: 2 })
        ));
    }

    #[test]
    fn rado_examples() {
        let l = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        let m = complexify(&Matrix::from_column_slice(2, 1, &[1.0, 0.0]));
        let lam = [Complex64::new(1.0, 0.0)];
        let n = complexify(&Matrix::from_row_slice(1, 2, &[3.0, 0.0]));
        let mut got = rado_oracle(&l, &m, &lam, &n).unwrap();
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_relative_eq!(got[0].re, 2.0, epsilon = 1e-14);
        assert_relative_eq!(got[1].re, 4.0, epsilon = 1e-14);

        let zero = CMatrix::zeros(1, 2);
        let got = rado_oracle(&l, &m, &lam, &zero).unwrap();
        let expected = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        assert!(spectrum_distance(&got, &expected).unwrap() < 1e-14);
    }

    #[test]
    fn rado_rejects_dependent_columns() {
        let l = Matrix::identity(2, 2);
        let m = complexify(&Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]));
        let lam = [Complex64::new(1.0, 0.0); 2];
        assert!(matches!(
            rado_oracle(&l, &m, &lam, &CMatrix::zeros(2, 2)),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn rado_factor_product_is_delta() {
        let h = scalar_h();
        let v = stable_real_pair(&h).real_vector().unwrap();
        let (p, _) = pq_vectors_real(&v).unwrap();
        assert_relative_eq!((p.transpose() * 0.7).dot(&v.transpose()), 0.7, epsilon = 1e-14);
    }

    #[test]
    fn oracle_agrees_with_real_shift() {
        let h = scalar_h();
        let pair = stable_real_pair(&h);
        let v = pair.real_vector().unwrap();
        let shifted = real_shift(&h, &pair, 0.5).unwrap();
        let predicted = predicted_real_shift_spectrum(&h, pair.value.re, &v, 0.5).unwrap();
        let actual = shifted.eigenvalues().unwrap();
        assert!(spectrum_distance(&predicted, &actual).unwrap() < 1e-12);
    }
}
