//! How much a disguise hides, and what a curious solver can recover.
//!
//! The solver receives `H̃` only. Each unknown shift is a choice of a negative
//! real eigenvalue plus a real magnitude, so `k` shifts among `r` candidates
//! leave `r!/(r−k)!` index sequences and `k` continuous unknowns. The reverse
//! step `H = Hⱼ − γ f(i, Hⱼ)` with `f(i, H) = v pᵀ − q qᵀ` generates the set of
//! Hamiltonians consistent with `H̃`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::are::{AreProblem, HamiltonianMatrix};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RealSchur};
use crate::shift::{real_shift, ShiftKind, ShiftRecord, SEPARATION_TOL};

/// `(r!/(r−k)!, k)`: index sequences and continuous magnitudes to resolve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityPair {
    #[serde(serialize_with = "big_to_string", deserialize_with = "big_from_string")]
    pub sequences: BigUint,
    pub magnitudes: usize,
}

fn big_to_string<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn big_from_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
    let text = String::deserialize(d)?;
    text.parse().map_err(serde::de::Error::custom)
}

/// Falling factorial `r·(r−1)⋯(r−k+1)`; zero when `k > r`.
pub fn ambiguity_pair(r: usize, k: usize) -> AmbiguityPair {
    let sequences = if k > r {
        BigUint::from(0u32)
    } else {
        ((r - k + 1)..=r).fold(BigUint::from(1u32), |acc, x| acc * BigUint::from(x))
    };
    AmbiguityPair {
        sequences,
        magnitudes: k,
    }
}

/// Relative Frobenius changes of the coefficient blocks plus the
/// combinatorial ambiguity. A ratio is absent when the original block is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub rel_change_a: Option<f64>,
    pub rel_change_d: Option<f64>,
    pub rel_change_q: Option<f64>,
    pub shifts: usize,
    pub negative_real_count: usize,
    pub ambiguity: AmbiguityPair,
}

impl PrivacyReport {
    /// `(relA, relD, relQ)` with absent ratios read as zero.
    pub fn ratios(&self) -> [f64; 3] {
        [self.rel_change_a, self.rel_change_d, self.rel_change_q].map(|x| x.unwrap_or(0.0))
    }
}

pub fn relative_change(original: &Matrix, modified: &Matrix) -> Option<f64> {
    let base = original.norm();
    (base > 0.0).then(|| (modified - original).norm() / base)
}

/// Measures for `modified` obtained from `original` by `shifts` real shifts.
pub fn privacy_measures(
    original: &AreProblem,
    modified: &AreProblem,
    shifts: usize,
) -> Result<PrivacyReport> {
    if original.order() != modified.order() {
        return Err(Error::Dimension(format!(
            "orders {} and {} differ",
            original.order(),
            modified.order()
        )));
    }
    let r = negative_real_eigenvalues(&modified.hamiltonian())?.len();
    Ok(PrivacyReport {
        rel_change_a: relative_change(original.a(), modified.a()),
        rel_change_d: relative_change(original.d(), modified.d()),
        rel_change_q: relative_change(original.q(), modified.q()),
        shifts,
        negative_real_count: r,
        ambiguity: ambiguity_pair(r, shifts),
    })
}

pub fn negative_real_eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    crate::shift::negative_real_eigenvalues(h)
}

/// Candidate eigenvalues of one reverse level: the negative real eigenvalues
/// of `h` in ascending order, minus those produced by earlier reverse steps.
struct Level {
    schur: RealSchur,
    /// `(eigenvalue, Schur index)`.
    candidates: Vec<(f64, usize)>,
}

impl Level {
    fn new(h: &HamiltonianMatrix, produced: &[f64]) -> Result<Self> {
        let scale = h.norm().max(1.0);
        let schur = RealSchur::new(h.matrix())?;
        let mut candidates: Vec<(f64, usize)> = schur
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.im == 0.0 && l.re < 0.0)
            .filter(|(_, l)| {
                produced
                    .iter()
                    .all(|p| (p - l.re).abs() > SEPARATION_TOL * scale)
            })
            .map(|(i, l)| (l.re, i))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { schur, candidates })
    }

    /// `Hⱼ − γ f(i, Hⱼ)` and the eigenvalue it produced.
    fn reverse(&self, h: &HamiltonianMatrix, position: usize, gamma: f64) -> Result<(HamiltonianMatrix, f64)> {
        let &(lambda, idx) = self.candidates.get(position).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "index {position} out of range ({} candidates)",
                self.candidates.len()
            ))
        })?;
        if gamma.is_nan() || gamma <= lambda {
            return Err(Error::InadmissibleShift {
                delta: gamma,
                reason: format!("reverse magnitude must exceed {lambda}"),
            });
        }
        let pair = self.schur.eigenpair(idx)?;
        Ok((real_shift(h, &pair, -gamma)?, lambda - gamma))
    }
}

/// A member of the confusion set together with the choices producing it.
#[derive(Clone, Debug)]
pub struct ConfusionCandidate {
    pub indices: Vec<usize>,
    pub gammas: Vec<f64>,
    pub hamiltonian: HamiltonianMatrix,
}

/// Applies the reverse steps `(indices[j], gammas[j])` to `h_tilde` in order.
pub fn confusion_member(
    h_tilde: &HamiltonianMatrix,
    indices: &[usize],
    gammas: &[f64],
) -> Result<ConfusionCandidate> {
    if indices.len() != gammas.len() {
        return Err(Error::Dimension(format!(
            "{} indices but {} magnitudes",
            indices.len(),
            gammas.len()
        )));
    }
    let mut current = h_tilde.clone();
    let mut produced = Vec::with_capacity(indices.len());
    for (&position, &gamma) in indices.iter().zip(gammas) {
        let level = Level::new(&current, &produced)?;
        let (next, moved) = level.reverse(&current, position, gamma)?;
        produced.push(moved);
        current = next;
    }
    Ok(ConfusionCandidate {
        indices: indices.to_vec(),
        gammas: gammas.to_vec(),
        hamiltonian: current,
    })
}

/// Reverse indices and magnitudes that undo `records` (applied in order to
/// reach `h_tilde`): the last shift is undone first with `γ = Δ`.
pub fn true_reverse_sequence(
    h_tilde: &HamiltonianMatrix,
    records: &[ShiftRecord],
) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut current = h_tilde.clone();
    let mut produced = Vec::new();
    let mut indices = Vec::new();
    let mut gammas = Vec::new();
    for record in records.iter().rev() {
        if record.kind != ShiftKind::Real {
            return Err(Error::InvalidArgument(
                "only real shifts can be reversed by index".into(),
            ));
        }
        let level = Level::new(&current, &produced)?;
        let target = record.shifted_eigenvalue().re;
        let position = level
            .candidates
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - target).abs().total_cmp(&(b.1 .0 - target).abs()))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::InvalidArgument("no reverse candidate left".into()))?;
        let (next, moved) = level.reverse(&current, position, record.delta)?;
        indices.push(position);
        gammas.push(record.delta);
        produced.push(moved);
        current = next;
    }
    Ok((indices, gammas))
}

/// Best reconstruction found for one index sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    pub indices: Vec<usize>,
    pub gammas: Vec<f64>,
    /// `‖candidate − H_true‖_F / ‖H_true‖_F`; infinite if no feasible point.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub shifts: usize,
    pub candidates: usize,
    pub ambiguity: AmbiguityPair,
    pub budget: usize,
    pub budget_exhausted: bool,
    pub outcomes: Vec<SequenceOutcome>,
    /// The only sequence reaching [`RECOVERY_TOL`], if exactly one does.
    pub recovered: Option<Vec<usize>>,
}

/// Relative distance counting as a reconstruction.
pub const RECOVERY_TOL: f64 = 1e-6;
const GOLDEN_ITERS: usize = 120;

/// Scores every index sequence (up to `budget` of them) by minimizing the
/// distance to `h_true` over the magnitudes. `h_true` plays the part of an
/// oracle that a real adversary lacks; it only scores guesses.
pub fn attack_simulate(
    h_tilde: &HamiltonianMatrix,
    h_true: &HamiltonianMatrix,
    k: usize,
    budget: usize,
    seed: u64,
) -> Result<AttackReport> {
    if h_tilde.matrix().shape() != h_true.matrix().shape() {
        return Err(Error::Dimension("attack matrices differ in size".into()));
    }
    let r = negative_real_eigenvalues(h_tilde)?.len();
    if k > r {
        return Err(Error::NotEnoughEigenvalues {
            available: r,
            requested: k,
        });
    }
    let ambiguity = ambiguity_pair(r, k);
    let total = usize::try_from(&ambiguity.sequences).ok();
    let exhaustive = total.is_some_and(|t| t <= budget);
    let sequences: Vec<Vec<usize>> = if exhaustive {
        all_sequences(r, k)
    } else {
        sample_sequences(r, k, budget, seed)
    };
    let scale = h_true.norm().max(f64::MIN_POSITIVE);
    let mut outcomes: Vec<SequenceOutcome> = sequences
        .into_par_iter()
        .map(|indices| optimize_sequence(h_tilde, h_true, indices, scale))
        .collect();
    outcomes.sort_by(|a, b| a.indices.cmp(&b.indices));
    let hits: Vec<&SequenceOutcome> = outcomes
        .iter()
        .filter(|o| o.distance <= RECOVERY_TOL)
        .collect();
    let recovered = (hits.len() == 1).then(|| hits[0].indices.clone());
    Ok(AttackReport {
        shifts: k,
        candidates: r,
        ambiguity,
        budget,
        budget_exhausted: !exhaustive,
        outcomes,
        recovered,
    })
}

fn all_sequences(r: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for level in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r - level).map(move |i| {
                    let mut next = prefix.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    out
}

fn sample_sequences(r: usize, k: usize, budget: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < budget {
        let seq: Vec<usize> = (0..k).map(|level| rng.random_range(0..r - level)).collect();
        seen.insert(seq);
    }
    seen.into_iter().collect()
}

fn optimize_sequence(
    h_tilde: &HamiltonianMatrix,
    h_true: &HamiltonianMatrix,
    indices: Vec<usize>,
    scale: f64,
) -> SequenceOutcome {
    let k = indices.len();
    let objective = |gammas: &[f64]| -> f64 {
        match confusion_member(h_tilde, &indices, gammas) {
            Ok(c) => (c.hamiltonian.matrix() - h_true.matrix()).norm() / scale,
            Err(_) => f64::INFINITY,
        }
    };
    let mut gammas = vec![0.0; k];
    let mut best = objective(&gammas);
    let sweeps = if k == 1 { 1 } else { 6 * k };
    for _ in 0..sweeps {
        for level in (0..k).rev() {
            let Some((lo, hi)) = bracket(h_tilde, &indices, &gammas, level) else {
                continue;
            };
            let mut trial = gammas.clone();
            let (g, value) = golden_section(lo, hi, |x| {
                trial[level] = x;
                objective(&trial)
            });
            if value < best {
                best = value;
                gammas[level] = g;
            }
        }
    }
    SequenceOutcome {
        indices,
        gammas,
        distance: best,
    }
}

/// Search interval for the magnitude at `level`: from just above the
/// feasibility bound `λ` to `20|λ|`, the widest forward window.
fn bracket(
    h_tilde: &HamiltonianMatrix,
    indices: &[usize],
    gammas: &[f64],
    level: usize,
) -> Option<(f64, f64)> {
    let mut produced: Vec<f64> = Vec::new();
    let mut current = h_tilde.clone();
    for j in 0..level {
        let lvl = Level::new(&current, &produced).ok()?;
        let (next, moved) = lvl.reverse(&current, indices[j], gammas[j]).ok()?;
        produced.push(moved);
        current = next;
    }
    let lvl = Level::new(&current, &produced).ok()?;
    let lambda = lvl.candidates.get(indices[level])?.0;
    Some((lambda * (1.0 - 1e-6), 20.0 * lambda.abs()))
}

fn golden_section(mut a: f64, mut b: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{perturb, SamplingWindow};
    use crate::lqr::{generate_benchmark, lqr_to_are, BenchmarkSpec};

    fn instance(n: usize, seed: u64) -> AreProblem {
        let mut spec = BenchmarkSpec::new(n, 2, 2, seed);
        spec.real_fraction = 1.0;
        lqr_to_are(&generate_benchmark(&spec).unwrap()).unwrap()
    }

    #[test]
    fn ambiguity_arithmetic() {
        assert_eq!(ambiguity_pair(10, 3).sequences, BigUint::from(720u32));
        assert_eq!(ambiguity_pair(6, 2).sequences, BigUint::from(30u32));
        assert_eq!(ambiguity_pair(5, 0).sequences, BigUint::from(1u32));
        assert_eq!(ambiguity_pair(2, 3).sequences, BigUint::from(0u32));
        let big = ambiguity_pair(40, 20).sequences.to_string();
        assert_eq!(big, "335367096786357081410764800000");
    }

    #[test]
    fn ambiguity_serializes_as_string() {
        let json = serde_json::to_string(&ambiguity_pair(10, 3)).unwrap();
        assert_eq!(json, r#"{"sequences":"720","magnitudes":3}"#);
        let back: AmbiguityPair = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ambiguity_pair(10, 3));
    }

    #[test]
    fn identical_problems_have_zero_measures() {
        let p = instance(3, 1);
        let report = privacy_measures(&p, &p, 0).unwrap();
        assert_eq!(report.ratios(), [0.0; 3]);
        let zero = AreProblem::scalar(0.0, 0.0, 0.0);
        assert_eq!(privacy_measures(&zero, &zero, 0).unwrap().rel_change_a, None);
    }

    #[test]
    fn zero_gammas_return_h_tilde() {
        let h = instance(4, 2).hamiltonian();
        let r = negative_real_eigenvalues(&h).unwrap().len();
        assert!(r >= 2);
        let c = confusion_member(&h, &[1, 0], &[0.0, 0.0]).unwrap();
        assert_eq!(c.hamiltonian, h);
    }

    #[test]
    fn true_sequence_reconstructs() {
        for seed in 0..5 {
            let p = instance(5, 10 + seed);
            let h = p.hamiltonian();
            let (h_tilde, plan) = perturb(&h, 3, SamplingWindow::default(), seed).unwrap();
            let (indices, gammas) = true_reverse_sequence(&h_tilde, &plan.records).unwrap();
            let back = confusion_member(&h_tilde, &indices, &gammas).unwrap();
            assert!((back.hamiltonian.matrix() - h.matrix()).norm() <= 1e-9 * h.norm());
        }
    }

    #[test]
    fn infeasible_gamma_rejected() {
        let h = instance(3, 4).hamiltonian();
        let lambda = negative_real_eigenvalues(&h).unwrap()[0];
        assert!(confusion_member(&h, &[0], &[lambda - 1.0]).is_err());
        assert!(confusion_member(&h, &[99], &[0.0]).is_err());
    }

    #[test]
    fn attack_recovers_single_shift() {
        let p = instance(3, 21);
        let h = p.hamiltonian();
        let (h_tilde, plan) = perturb(&h, 1, SamplingWindow::default(), 5).unwrap();
        let report = attack_simulate(&h_tilde, &h, 1, 100, 0).unwrap();
        assert!(!report.budget_exhausted);
        assert_eq!(report.outcomes.len(), report.candidates);
        let (indices, _) = true_reverse_sequence(&h_tilde, &plan.records).unwrap();
        assert_eq!(report.recovered.as_deref(), Some(indices.as_slice()));
        for o in &report.outcomes {
            if o.indices != indices {
                assert!(o.distance > 1e-3, "{o:?}");
            }
        }
    }

    #[test]
    fn attack_with_zero_budget_is_empty() {
        let h = instance(3, 22).hamiltonian();
        let report = attack_simulate(&h, &h, 1, 0, 0).unwrap();
        assert!(report.outcomes.is_empty());
        assert!(report.budget_exhausted);
    }

    #[test]
    fn enumeration_matches_ambiguity() {
        assert_eq!(all_sequences(6, 2).len(), 30);
        assert_eq!(all_sequences(4, 0).len(), 1);
        assert_eq!(sample_sequences(6, 2, 10, 3).len(), 10);
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, fx) = golden_section(-3.0, 5.0, |x| (x - 1.25).abs());
        assert!((x - 1.25).abs() < 1e-9 && fx < 1e-9);
    }
}
