//! Shifts that keep the disguised `Q̃` and `D̃` positive semidefinite.
//!
//! A real shift of `(λ, v)` by `Δ` changes the coefficient blocks to
//! `D̃ = D + ΔF` and `Q̃ = Q + ΔG`, where `F` and `G` are symmetric matrices of
//! rank at most two built from the halves of `v`. Sign tests on six inner
//! products certify that `F` (or `G`) is semidefinite; otherwise, when the
//! kernel of `D` (or `Q`) is contained in that of `F` (or `G`), an interval of
//! safe shifts follows from extreme eigenvalues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::are::{check_assumptions, AreProblem, HamiltonianMatrix, RANK_TOL};
use crate::error::{Error, Result};
use crate::numerics::{
    kernel_basis, min_sym_eigenvalue, sym_eig_extremes, Matrix, RealSchur, Vector, ZERO_TOL,
};
use crate::shift::{
    pq_vectors_real, real_shift, ShiftKind, ShiftRecord, ShiftVectors, SEPARATION_TOL,
};

/// Rounding slack for the vanishing Cauchy-Schwarz gap in the sign tests.
const GAP_TOL: f64 = 64.0 * f64::EPSILON;
const SIGN_TOL: f64 = 1e-12;
/// Minimum eigenvalue accepted for `Q̃`, `D̃`, relative to their scale.
pub const PSD_TOL: f64 = 1e-8;
/// Kernel inclusion `‖T·ker S‖ ≤ KERNEL_TOL·max(‖T‖, 1)`.
pub const KERNEL_TOL: f64 = 1e-10;
const MAX_DRAWS: usize = 16;

/// `F`, `G` and the half-vectors they are built from.
#[derive(Clone, Debug, PartialEq)]
pub struct FgPair {
    pub f: Matrix,
    pub g: Matrix,
    pub v_u: Vector,
    pub v_l: Vector,
    pub p_u: Vector,
    pub p_l: Vector,
    pub q_u: Vector,
    pub q_l: Vector,
}

/// `F = q_u q_lᵀ − v_u p_lᵀ`, `G = q_l q_uᵀ − v_l p_uᵀ`.
pub fn fg_matrices(v: &Vector) -> Result<FgPair> {
    let (p, q) = pq_vectors_real(v)?;
    let n = v.len() / 2;
    let upper = |x: &Vector| x.rows(0, n).into_owned();
    let lower = |x: &Vector| x.rows(n, n).into_owned();
    let (v_u, v_l) = (upper(v), lower(v));
    let (p_u, p_l) = (upper(&p), lower(&p));
    let (q_u, q_l) = (upper(&q), lower(&q));
    let f = &q_u * q_l.transpose() - &v_u * p_l.transpose();
    let g = &q_l * q_u.transpose() - &v_l * p_u.transpose();
    Ok(FgPair {
        f,
        g,
        v_u,
        v_l,
        p_u,
        p_l,
        q_u,
        q_l,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Psd,
    Nsd,
    Inconclusive,
}

/// The six inner products behind a sign test of `x yᵀ − w zᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignScalars {
    pub alpha_self: f64,
    pub beta_self: f64,
    pub gamma: f64,
    pub alpha_cross: f64,
    pub beta_cross: f64,
    pub delta: f64,
}

impl SignScalars {
    /// For `F`: `x = q_u`, `y = q_l`, `w = v_u`, `z = p_l`; for `G` the roles
    /// of the halves are exchanged.
    fn new(x: &Vector, y: &Vector, w: &Vector, z: &Vector) -> Self {
        Self {
            alpha_self: x.dot(x),
            beta_self: w.dot(x),
            gamma: x.dot(z),
            alpha_cross: x.dot(y),
            beta_cross: w.dot(y),
            delta: w.dot(z),
        }
    }

    /// `α_cross·δ − γ·β_cross`, never positive when the test applies.
    pub fn gap(&self) -> f64 {
        self.alpha_cross * self.delta - self.gamma * self.beta_cross
    }

    /// `α_self·α_cross − β_self·γ`, whose sign gives the definiteness.
    pub fn sign_term(&self) -> f64 {
        self.alpha_self * self.alpha_cross - self.beta_self * self.gamma
    }

    /// `xᵀy − wᵀz`, the trace of the matrix.
    pub fn trace(&self) -> f64 {
        self.alpha_cross - self.delta
    }

    pub fn verdict(&self) -> Verdict {
        let gap_scale = (self.alpha_cross * self.delta).abs() + (self.gamma * self.beta_cross).abs();
        if self.gap() > GAP_TOL * gap_scale {
            return Verdict::Inconclusive;
        }
        // With a vanishing gap the matrix has rank at most one, so a zero sign
        // term is settled by the trace; both zero means the zero matrix.
        let sign_scale =
            (self.alpha_self * self.alpha_cross).abs() + (self.beta_self * self.gamma).abs();
        let s = self.sign_term();
        if s.abs() > SIGN_TOL * sign_scale && sign_scale > 0.0 {
            return if s > 0.0 { Verdict::Psd } else { Verdict::Nsd };
        }
        let t = self.trace();
        let trace_scale = self.alpha_cross.abs() + self.delta.abs();
        if t < -SIGN_TOL * trace_scale {
            Verdict::Nsd
        } else {
            Verdict::Psd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Verdict {
    pub f: Verdict,
    pub g: Verdict,
    pub f_scalars: SignScalars,
    pub g_scalars: SignScalars,
}

pub fn prop1_verdict(fg: &FgPair) -> Prop1Verdict {
    let f_scalars = SignScalars::new(&fg.q_u, &fg.q_l, &fg.v_u, &fg.p_l);
    let g_scalars = SignScalars::new(&fg.q_l, &fg.q_u, &fg.v_l, &fg.p_u);
    Prop1Verdict {
        f: f_scalars.verdict(),
        g: g_scalars.verdict(),
        f_scalars,
        g_scalars,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowBranch {
    Prop1Psd,
    Prop1Nsd,
    Prop2Kernel,
}

/// Closed interval of shifts, possibly unbounded on either side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const ALL: Self = Self {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn intersect(self, other: Self) -> Self {
        Self {
            lower: self.lower.max(other.lower),
            upper: self.upper.min(other.upper),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Shifts `Δ` with `S + ΔT ⪰ 0`, or `None` when `ker S ⊄ ker T`.
///
/// Uses the smallest nonzero eigenvalue `μ` of `S` and the signed extremes of
/// `T`: `[−μ/λ_max(T), −μ/λ_min(T)]`, unbounded on a side where the relevant
/// extreme of `T` has the harmless sign.
pub fn prop2_window(s: &Matrix, t: &Matrix) -> Result<Option<Interval>> {
    let s_ext = sym_eig_extremes(s, ZERO_TOL)?;
    let scale = s.norm().max(f64::MIN_POSITIVE);
    if s_ext.min < -PSD_TOL * scale {
        return Err(Error::NotPsd {
            what: "semidefinite block",
            min_eig: s_ext.min,
        });
    }
    let kernel = kernel_basis(s, RANK_TOL)?;
    if kernel.dim() > 0 && (t * &kernel.basis).norm() > KERNEL_TOL * t.norm().max(1.0) {
        return Ok(None);
    }
    let Some(mu) = s_ext.min_nonzero.filter(|m| *m > 0.0) else {
        // S vanishes, so T must as well.
        return Ok(Some(Interval::ALL));
    };
    let t_ext = sym_eig_extremes(t, ZERO_TOL)?;
    let lower = if t_ext.max > 0.0 {
        -mu / t_ext.max
    } else {
        f64::NEG_INFINITY
    };
    let upper = if t_ext.min < 0.0 {
        -mu / t_ext.min
    } else {
        f64::INFINITY
    };
    Ok(Some(Interval { lower, upper }))
}

/// Admissible shifts for one candidate eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityWindow {
    pub lower: f64,
    pub upper: f64,
    pub branch: WindowBranch,
    pub candidate: usize,
}

/// Tuning of [`algorithm2`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealizableOptions {
    /// Fraction of `|λ|` kept away from `0` and from `−λ`.
    pub margin: f64,
    /// Negative shifts are bounded below by `−negative_scale·|λ|`.
    pub negative_scale: f64,
    /// Eigenvalues that must not be shifted again.
    pub exclude: Vec<f64>,
}

impl Default for RealizableOptions {
    fn default() -> Self {
        Self {
            margin: 0.05,
            negative_scale: 1.0,
            exclude: Vec::new(),
        }
    }
}

/// Result of a successful semidefiniteness-preserving shift.
#[derive(Clone, Debug)]
pub struct RealizableShift {
    pub problem: AreProblem,
    pub hamiltonian: HamiltonianMatrix,
    pub record: ShiftRecord,
    pub window: RealizabilityWindow,
}

pub fn algorithm2(p: &AreProblem, seed: u64) -> Result<RealizableShift> {
    algorithm2_with(p, seed, &RealizableOptions::default())
}

/// One shift keeping `Q̃ ⪰ 0` and `D̃ ⪰ 0`.
///
/// Candidates are the simple negative real eigenvalues of `H` in increasing
/// `|λ|`. A candidate whose `F` and `G` share a certified sign gets a shift of
/// that sign; otherwise the kernel-based windows are intersected with
/// `Δ < −λ`. The first candidate yielding a verified nontrivial shift wins.
pub fn algorithm2_with(
    p: &AreProblem,
    seed: u64,
    options: &RealizableOptions,
) -> Result<RealizableShift> {
    if !(options.margin > 0.0 && options.margin < 0.5 && options.negative_scale > options.margin)
    {
        return Err(Error::InvalidArgument(format!(
            "margin {} and negative scale {} are inconsistent",
            options.margin, options.negative_scale
        )));
    }
    for (m, what) in [(p.q(), "Q"), (p.d(), "D")] {
        let min_eig = min_sym_eigenvalue(m)?;
        if min_eig < -PSD_TOL * m.norm().max(1.0) {
            return Err(Error::NotPsd { what, min_eig });
        }
    }
    let assumptions = check_assumptions(p)?;
    if !assumptions.holds() {
        return Err(Error::Assumption(format!(
            "stabilizable: {}, detectable: {}",
            assumptions.stabilizable, assumptions.detectable
        )));
    }

    let h = p.hamiltonian();
    let scale = h.norm().max(1.0);
    let schur = RealSchur::new(h.matrix())?;
    let values = schur.eigenvalues();
    let mut candidates: Vec<usize> = (0..values.len())
        .filter(|&i| {
            let l = values[i];
            l.im == 0.0
                && l.re < 0.0
                && values
                    .iter()
                    .enumerate()
                    .all(|(j, m)| j == i || (m - l).norm() > SEPARATION_TOL * scale)
                && options
                    .exclude
                    .iter()
                    .all(|e| (e - l.re).abs() > SEPARATION_TOL * scale)
        })
        .collect();
    candidates.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (ordinal, &idx) in candidates.iter().enumerate() {
        let Ok(pair) = schur.eigenpair(idx) else {
            continue;
        };
        let Some(v) = pair.real_vector() else {
            continue;
        };
        let lambda = pair.value.re;
        let mag = -lambda;
        let Some(window) = candidate_window(p, &v, mag, ordinal, options)? else {
            continue;
        };
        let sides = usable_sides(&window, mag, options);
        if sides.is_empty() {
            continue;
        }
        for _ in 0..MAX_DRAWS {
            let bound = sides[rng.random_range(0..sides.len())];
            let frac = rng.random_range(options.margin..1.0 - options.margin);
            let delta = bound * frac;
            let Ok(next) = real_shift(&h, &pair, delta) else {
                continue;
            };
            let Ok(problem) = next.split() else {
                continue;
            };
            if !realizable(&problem)? || !nontrivial(p, &problem) {
                continue;
            }
            let record = ShiftRecord {
                kind: ShiftKind::Real,
                index: ordinal,
                eigenvalue: pair.value,
                delta,
                vectors: Some(ShiftVectors::Real {
                    v: v.iter().copied().collect(),
                }),
            };
            return Ok(RealizableShift {
                problem,
                hamiltonian: next,
                record,
                window,
            });
        }
    }
    Err(Error::NoAdmissibleEigenvalue)
}

/// Window for one candidate, following the sign tests first and the kernel
/// bounds second. `None` when neither applies or the window is empty.
fn candidate_window(
    p: &AreProblem,
    v: &Vector,
    mag: f64,
    ordinal: usize,
    options: &RealizableOptions,
) -> Result<Option<RealizabilityWindow>> {
    let fg = fg_matrices(v)?;
    let verdict = prop1_verdict(&fg);
    let floor = -options.negative_scale * mag;
    let window = match (verdict.f, verdict.g) {
        (Verdict::Psd, Verdict::Psd) => RealizabilityWindow {
            lower: 0.0,
            upper: mag,
            branch: WindowBranch::Prop1Psd,
            candidate: ordinal,
        },
        (Verdict::Nsd, Verdict::Nsd) => RealizabilityWindow {
            lower: floor,
            upper: 0.0,
            branch: WindowBranch::Prop1Nsd,
            candidate: ordinal,
        },
        _ => {
            let (Some(wf), Some(wg)) = (prop2_window(p.d(), &fg.f)?, prop2_window(p.q(), &fg.g)?)
            else {
                return Ok(None);
            };
            let w = wf.intersect(wg).intersect(Interval {
                lower: floor,
                upper: mag,
            });
            RealizabilityWindow {
                lower: w.lower,
                upper: w.upper,
                branch: WindowBranch::Prop2Kernel,
                candidate: ordinal,
            }
        }
    };
    Ok((window.lower < window.upper).then_some(window))
}

/// Endpoints of the nonempty one-sided parts of the window, each far enough
/// from zero to give a nontrivial shift.
fn usable_sides(window: &RealizabilityWindow, mag: f64, options: &RealizableOptions) -> Vec<f64> {
    let min_bound = 1e-6 * mag;
    let mut sides = Vec::new();
    let upper = window.upper.min(mag);
    if upper > min_bound && window.lower <= options.margin * upper {
        sides.push(upper);
    }
    let lower = window.lower.max(-options.negative_scale * mag);
    if lower < -min_bound && window.upper >= options.margin * lower {
        sides.push(lower);
    }
    sides
}

fn realizable(p: &AreProblem) -> Result<bool> {
    let ok = |m: &Matrix| -> Result<bool> {
        Ok(min_sym_eigenvalue(m)? >= -PSD_TOL * m.norm().max(1.0))
    };
    Ok(ok(p.q())? && ok(p.d())?)
}

fn nontrivial(original: &AreProblem, modified: &AreProblem) -> bool {
    let changed = |a: &Matrix, b: &Matrix| {
        (a - b).amax() > crate::shift::CHANGE_TOL * a.amax().max(b.amax()).max(1.0)
    };
    changed(original.a(), modified.a())
        && changed(original.q(), modified.q())
        && changed(original.d(), modified.d())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::are::solve_stabilizing;
    use crate::numerics::{eig_all, sym_eigenvalues};
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn scalar_vector() -> Vector {
        let h = AreProblem::scalar(1.0, 1.0, 1.0).hamiltonian();
        eig_all(h.matrix())
            .unwrap()
            .into_iter()
            .find(|p| p.is_real() && p.value.re < 0.0)
            .unwrap()
            .real_vector()
            .unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vector {
        Vector::from_fn(len, |_, _| StandardNormal.sample(rng)).normalize()
    }

    #[test]
    fn scalar_f_and_g() {
        let fg = fg_matrices(&scalar_vector()).unwrap();
        assert_relative_eq!(fg.f[(0, 0)], -0.56066, epsilon = 1e-5);
        assert_relative_eq!(fg.g[(0, 0)], -1.56066, epsilon = 1e-5);
        assert_relative_eq!(1.0 + 0.5 * fg.f[(0, 0)], 0.71967, epsilon = 1e-5);
    }

    #[test]
    fn scalar_sign_scalars() {
        let fg = fg_matrices(&scalar_vector()).unwrap();
        let v = prop1_verdict(&fg);
        let s = v.f_scalars;
        assert_relative_eq!(s.alpha_self, 0.85355, epsilon = 1e-5);
        assert_relative_eq!(s.beta_self, 0.35355, epsilon = 1e-5);
        assert_relative_eq!(s.gamma, 0.5, epsilon = 1e-5);
        assert_relative_eq!(s.alpha_cross, -0.35355, epsilon = 1e-5);
        assert_relative_eq!(s.beta_cross, -0.14645, epsilon = 1e-5);
        assert_relative_eq!(s.delta, 0.20711, epsilon = 1e-5);
        assert!(s.gap().abs() < 1e-15);
        assert_relative_eq!(s.sign_term(), -0.47855, epsilon = 1e-5);
        assert_eq!(v.f, Verdict::Nsd);
        assert_eq!(v.g, Verdict::Nsd);
    }

    #[test]
    fn fg_symmetric_and_low_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let fg = fg_matrices(&random_unit(&mut rng, 12)).unwrap();
            for m in [&fg.f, &fg.g] {
                assert!((m - m.transpose()).amax() < 1e-15);
                let sv = m.singular_values();
                let rank = sv.iter().filter(|s| **s > 1e-12 * sv.max()).count();
                assert!(rank <= 2);
            }
        }
    }

    #[test]
    fn fg_reproduces_shifted_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let a = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let b = Matrix::from_fn(n, 2, |_, _| StandardNormal.sample(&mut rng));
        let c = Matrix::from_fn(2, n, |_, _| StandardNormal.sample(&mut rng));
        let p = AreProblem::new(a, c.transpose() * &c, &b * b.transpose()).unwrap();
        let h = p.hamiltonian();
        for pair in eig_all(h.matrix()).unwrap() {
            if !(pair.is_real() && pair.value.re < 0.0) {
                continue;
            }
            let v = pair.real_vector().unwrap();
            let fg = fg_matrices(&v).unwrap();
            let delta = -0.3 * pair.value.re;
            let shifted = real_shift(&h, &pair, delta).unwrap().split().unwrap();
            let scale = h.norm();
            assert!((shifted.d() - (p.d() + &fg.f * delta)).amax() < 1e-12 * scale);
            assert!((shifted.q() - (p.q() + &fg.g * delta)).amax() < 1e-12 * scale);
        }
    }

    #[test]
    fn zero_upper_half_forces_trace_tiebreak() {
        // v_u = 0 gives F = 0 and G = −v_l v_lᵀ; both sign terms vanish.
        let v = Vector::from_vec(vec![0.0, 0.0, 0.6, 0.8]);
        let fg = fg_matrices(&v).unwrap();
        let verdict = prop1_verdict(&fg);
        assert_eq!(verdict.g_scalars.sign_term(), 0.0);
        assert_eq!(verdict.g, Verdict::Nsd);
        assert_eq!(verdict.f, Verdict::Psd);
        assert!(fg.f.amax() == 0.0);
    }

    #[test]
    fn zero_lower_half() {
        // q_u = v_l = 0 makes F = v_u v_uᵀ.
        let v = Vector::from_vec(vec![0.6, 0.8, 0.0, 0.0]);
        let fg = fg_matrices(&v).unwrap();
        let verdict = prop1_verdict(&fg);
        assert_eq!(verdict.f, Verdict::Psd);
        assert!((&fg.f - &fg.v_u * fg.v_u.transpose()).amax() < 1e-15);
        assert!(fg.q_u.amax() == 0.0);
    }

    fn check_verdict(m: &Matrix, verdict: Verdict) -> bool {
        let values = sym_eigenvalues(m).unwrap();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match verdict {
            Verdict::Psd => min >= -1e-10,
            Verdict::Nsd => max <= 1e-10,
            Verdict::Inconclusive => true,
        }
    }

    #[test]
    fn prop1_soundness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut decided = 0;
        for i in 0..10_000 {
            let n = 1 + i % 8;
            let v = if i % 2 == 0 {
                random_unit(&mut rng, 2 * n)
            } else {
                // Parallel halves make the tests decisive.
                let u = random_unit(&mut rng, n);
                let c: f64 = rng.random_range(-3.0..3.0);
                let mut v = Vector::zeros(2 * n);
                v.rows_mut(0, n).copy_from(&(&u * c));
                v.rows_mut(n, n).copy_from(&u);
                v.normalize()
            };
            let fg = fg_matrices(&v).unwrap();
            let verdict = prop1_verdict(&fg);
            assert!(check_verdict(&fg.f, verdict.f), "F {verdict:?}");
            assert!(check_verdict(&fg.g, verdict.g), "G {verdict:?}");
            decided += (verdict.f != Verdict::Inconclusive) as usize;
        }
        assert!(decided > 5000);
    }

    #[test]
    fn prop2_examples() {
        let w = prop2_window(&Matrix::identity(3, 3), &Matrix::zeros(3, 3))
            .unwrap()
            .unwrap();
        assert_eq!(w, Interval::ALL);

        let t = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -1.0, 0.0]));
        let s = Matrix::identity(3, 3);
        let w = prop2_window(&s, &t).unwrap().unwrap();
        assert_relative_eq!(w.lower, -0.5, epsilon = 1e-14);
        assert_relative_eq!(w.upper, 1.0, epsilon = 1e-14);
        for k in 0..100 {
            let d = w.lower + (w.upper - w.lower) * k as f64 / 99.0;
            assert!(min_sym_eigenvalue(&(&s + &t * d)).unwrap() >= -1e-10);
        }

        let s = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0]));
        assert!(prop2_window(&s, &Matrix::identity(2, 2)).unwrap().is_none());
    }

    #[test]
    fn prop2_rejects_indefinite_s() {
        let s = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        assert!(prop2_window(&s, &Matrix::identity(2, 2)).is_err());
    }

    #[test]
    fn prop2_soundness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(2..7);
            let b = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            let s = &b * b.transpose();
            let fg = fg_matrices(&random_unit(&mut rng, 2 * n)).unwrap();
            let w = prop2_window(&s, &fg.f).unwrap().unwrap();
            let lo = w.lower.max(-1e3);
            let hi = w.upper.min(1e3);
            for k in 0..100 {
                let d = lo + (hi - lo) * k as f64 / 99.0;
                let m = min_sym_eigenvalue(&(&s + &fg.f * d)).unwrap();
                assert!(m >= -1e-10 * s.norm(), "{m} at {d} in {w:?}");
            }
        }
    }

    #[test]
    fn scalar_algorithm2() {
        let p = AreProblem::scalar(1.0, 1.0, 1.0);
        let out = algorithm2(&p, 7).unwrap();
        assert_eq!(out.window.branch, WindowBranch::Prop1Nsd);
        assert!(out.record.delta < 0.0);
        assert!(out.problem.q()[(0, 0)] > 0.0 && out.problem.d()[(0, 0)] > 0.0);
        let before = solve_stabilizing(&p).unwrap().p;
        let after = solve_stabilizing(&out.problem).unwrap().p;
        assert_relative_eq!(before[(0, 0)], after[(0, 0)], epsilon = 1e-10);
    }

    #[test]
    fn algorithm2_rejects_indefinite() {
        let p = AreProblem::scalar(1.0, -1.0, 1.0);
        assert!(matches!(algorithm2(&p, 1), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn algorithm2_excludes() {
        let p = AreProblem::scalar(1.0, 1.0, 1.0);
        let options = RealizableOptions {
            exclude: vec![-(2f64.sqrt())],
            ..RealizableOptions::default()
        };
        assert!(matches!(
            algorithm2_with(&p, 1, &options),
            Err(Error::NoAdmissibleEigenvalue)
        ));
    }
}
