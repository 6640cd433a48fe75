//! LQR problems, their AREs, synthetic benchmarks and the case-study driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::are::{check_assumptions, solve_stabilizing, AreProblem, HamiltonianMatrix};
use crate::error::{Error, Result};
use crate::io::Mode;
use crate::numerics::{ensure_finite, ensure_square, symmetrize, symmetry_defect, Matrix, SYM_TOL};
use crate::privacy::{privacy_measures, relative_change, PrivacyReport};
use crate::realizability::{algorithm2_with, RealizableOptions, PSD_TOL};
use crate::shift::{perturb_trajectory, SamplingWindow};

/// `ẋ = Ax + Bu`, `y = Cx`, cost `∫ yᵀy + uᵀRu`.
#[derive(Clone, Debug, PartialEq)]
pub struct LqrProblem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    r: Matrix,
}

impl LqrProblem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, r: Matrix) -> Result<Self> {
        ensure_square(&a, "A")?;
        ensure_square(&r, "R")?;
        let n = a.nrows();
        if b.nrows() != n || c.ncols() != n || r.nrows() != b.ncols() {
            return Err(Error::Dimension(format!(
                "A {n}x{n}, B {}x{}, C {}x{}, R {}x{}",
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                r.nrows(),
                r.ncols()
            )));
        }
        for (m, what) in [(&a, "A"), (&b, "B"), (&c, "C"), (&r, "R")] {
            ensure_finite(m, what)?;
        }
        let defect = symmetry_defect(&r);
        if defect > SYM_TOL * r.norm().max(1.0) {
            return Err(Error::NotSymmetric { what: "R", defect });
        }
        let r = symmetrize(&r);
        if r.nrows() > 0 {
            let min_eig = r.symmetric_eigenvalues().min();
            if min_eig <= 0.0 {
                return Err(Error::NotPsd { what: "R", min_eig });
            }
        }
        Ok(Self { a, b, c, r })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
}

/// `(A, CᵀC, B R⁻¹ Bᵀ)`.
pub fn lqr_to_are(l: &LqrProblem) -> Result<AreProblem> {
    let n = l.a.nrows();
    let d = if l.b.ncols() == 0 {
        Matrix::zeros(n, n)
    } else {
        let chol = l.r.clone().cholesky().ok_or_else(|| Error::NotPsd {
            what: "R",
            min_eig: l.r.symmetric_eigenvalues().min(),
        })?;
        &l.b * chol.solve(&l.b.transpose())
    };
    let q = l.c.transpose() * &l.c;
    AreProblem::new(l.a.clone(), symmetrize(&q), symmetrize(&d))
}

/// `F` with `S = F Fᵀ`, one column per retained eigenvalue of `S`.
fn psd_factor(s: &Matrix, what: &'static str) -> Result<Matrix> {
    let n = s.nrows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let eig = s.clone().symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL * top.max(1.0) {
        return Err(Error::NotPsd { what, min_eig: min });
    }
    let keep_tol = n as f64 * f64::EPSILON * top;
    let mut order: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > keep_tol).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut f = Matrix::zeros(n, order.len());
    for (col, &i) in order.iter().enumerate() {
        let mut u = eig.eigenvectors.column(i).into_owned();
        let lead = u.iter().copied().fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            u = -u;
        }
        f.set_column(col, &(u * eig.eigenvalues[i].sqrt()));
    }
    Ok(f)
}

/// A dummy LQR problem producing the given coefficients: `R = I`,
/// `D = BBᵀ`, `Q = CᵀC`, with `B` and `C` from eigenfactorizations.
pub fn are_to_lqr_realization(p: &AreProblem) -> Result<LqrProblem> {
    let b = psd_factor(p.d(), "D")?;
    let c = psd_factor(p.q(), "Q")?.transpose();
    let m = b.ncols();
    let n = p.order();
    let b = if m == 0 { Matrix::zeros(n, 0) } else { b };
    let c = if c.nrows() == 0 { Matrix::zeros(0, n) } else { c };
    LqrProblem::new(p.a().clone(), b, c, Matrix::identity(m, m))
}

/// Seeded random LQR instance.
///
/// `A = S Λ S⁻¹` where `Λ` holds real eigenvalues and rotation blocks with
/// real parts of magnitude in `[margin, 1]`, a fraction of them unstable, and
/// `S = I + coupling·G/√n`. `B` and `C` are Gaussian scaled by `1/√n`, `R = I`.
///
/// Isolated modes are scalar subsystems `ẋ = a x + b u`, `y = c x` with
/// `a > 0` and their own input and output. Their Hamiltonian eigenvectors
/// have parallel upper and lower halves, which is what a semidefiniteness
/// preserving shift needs when `D` and `Q` are rank deficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    pub stability_margin: f64,
    pub real_fraction: f64,
    pub unstable_fraction: f64,
    pub coupling: f64,
    /// Unstable real modes with a dedicated input and output each, not
    /// coupled to the rest of the system.
    pub isolated_modes: usize,
    /// Draws whose stabilizing solution exceeds this Frobenius norm are
    /// rejected as ill-conditioned.
    pub max_solution_norm: f64,
    pub max_attempts: usize,
}

impl BenchmarkSpec {
    pub fn new(n: usize, m: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            p,
            seed,
            stability_margin: 0.1,
            real_fraction: 0.5,
            unstable_fraction: 0.3,
            coupling: 0.3,
            isolated_modes: 0,
            max_solution_norm: 1e4,
            max_attempts: 50,
        }
    }

    pub fn with_isolated_modes(mut self, count: usize) -> Self {
        self.isolated_modes = count;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.p == 0 || self.m > self.n || self.p > self.n {
            return Err(Error::InvalidArgument(format!(
                "need 0 < m, p <= n, got n={} m={} p={}",
                self.n, self.m, self.p
            )));
        }
        if self.isolated_modes > self.m.min(self.p) {
            return Err(Error::InvalidArgument(format!(
                "{} isolated modes need as many inputs and outputs",
                self.isolated_modes
            )));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.real_fraction) && unit(self.unstable_fraction))
            || !(self.stability_margin > 0.0 && self.stability_margin < 1.0)
            || !(self.coupling >= 0.0 && self.coupling.is_finite())
            || !(self.max_solution_norm > 0.0)
        {
            return Err(Error::InvalidArgument("benchmark knobs out of range".into()));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        x * scale
    })
}

fn draw_instance(spec: &BenchmarkSpec, rng: &mut ChaCha8Rng) -> Result<LqrProblem> {
    let n = spec.n;
    let iso = spec.isolated_modes;
    let core = n - iso;
    let mut real = ((spec.real_fraction * core as f64).round() as usize).min(core);
    if (core - real) % 2 == 1 {
        real += 1;
    }
    let mut lambda = Matrix::zeros(core, core);
    let part = |rng: &mut ChaCha8Rng| {
        let mag = rng.random_range(spec.stability_margin..=1.0);
        if rng.random_bool(spec.unstable_fraction) {
            mag
        } else {
            -mag
        }
    };
    for i in 0..real {
        lambda[(i, i)] = part(rng);
    }
    let mut i = real;
    while i + 1 < core {
        let re = part(rng);
        let im = rng.random_range(0.2..1.5);
        lambda[(i, i)] = re;
        lambda[(i + 1, i + 1)] = re;
        lambda[(i, i + 1)] = im;
        lambda[(i + 1, i)] = -im;
        i += 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    let s = Matrix::identity(core, core) + gaussian(rng, core, core, spec.coupling * scale);
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("similarity is singular".into()))?;
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, spec.m);
    let mut c = Matrix::zeros(spec.p, n);
    a.view_mut((0, 0), (core, core)).copy_from(&(&s * lambda * s_inv));
    b.view_mut((0, 0), (core, spec.m - iso))
        .copy_from(&gaussian(rng, core, spec.m - iso, scale));
    c.view_mut((0, 0), (spec.p - iso, core))
        .copy_from(&gaussian(rng, spec.p - iso, core, scale));
    let gain = |rng: &mut ChaCha8Rng| {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        sign * rng.random_range(0.5..1.5) * scale
    };
    for j in 0..iso {
        let (x, u, y) = (core + j, spec.m - iso + j, spec.p - iso + j);
        a[(x, x)] = rng.random_range(spec.stability_margin..=1.0);
        b[(x, u)] = gain(rng);
        c[(y, x)] = gain(rng);
    }
    if iso > 0 {
        // Hide the block structure behind an orthogonal change of state.
        let t = gaussian(rng, n, n, 1.0).qr().q();
        a = &t * a * t.transpose();
        b = &t * b;
        c = c * t.transpose();
    }
    LqrProblem::new(a, b, c, Matrix::identity(spec.m, spec.m))
}

/// Instance passing the stabilizability and detectability checks with a
/// stabilizing solution no larger than `max_solution_norm`; draws again
/// (from the same stream) until one does.
pub fn generate_benchmark(spec: &BenchmarkSpec) -> Result<LqrProblem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.max_attempts {
        let instance = draw_instance(spec, &mut rng)?;
        let are = lqr_to_are(&instance)?;
        if !check_assumptions(&are)?.holds() {
            continue;
        }
        if matches!(solve_stabilizing(&are), Ok(s) if s.p.norm() <= spec.max_solution_norm) {
            return Ok(instance);
        }
    }
    Err(Error::Assumption(format!(
        "no stabilizable, detectable and well-conditioned instance after {} draws",
        spec.max_attempts
    )))
}

/// One line of the measure table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub iteration: usize,
    #[serde(rename = "relA")]
    pub rel_a: f64,
    #[serde(rename = "relD")]
    pub rel_d: f64,
    #[serde(rename = "relQ")]
    pub rel_q: f64,
}

impl MeasureRow {
    fn from_report(iteration: usize, report: &PrivacyReport) -> Self {
        let [rel_a, rel_d, rel_q] = report.ratios();
        Self {
            iteration,
            rel_a,
            rel_d,
            rel_q,
        }
    }
}

/// Measures after every shift plus the end-to-end solution check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseStudy {
    pub mode: Mode,
    pub spec: BenchmarkSpec,
    /// Negative real Hamiltonian eigenvalues of the original instance.
    pub negative_real_count: usize,
    pub requested: usize,
    pub applied: usize,
    pub rows: Vec<MeasureRow>,
    pub reports: Vec<PrivacyReport>,
    /// `‖P̃ − P‖_F / ‖P‖_F` after the last shift.
    pub solution_rel_diff: f64,
    pub closed_loop_stable: bool,
}

impl CaseStudy {
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn last_row(&self) -> MeasureRow {
        *self.rows.last().expect("rows start with iteration 0")
    }
}

/// Runs the shift driver of `mode` on a generated instance.
///
/// Problem 1 applies up to `shifts` real shifts (as many as there are
/// negative real eigenvalues), redrawing any shift that would undo part of
/// the earlier disguise so that no measure decreases; Problem 2 repeats the semidefiniteness
/// preserving shift, never reusing an eigenvalue it produced.
pub fn case_study(spec: &BenchmarkSpec, shifts: usize, mode: Mode) -> Result<CaseStudy> {
    let instance = generate_benchmark(spec)?;
    let original = lqr_to_are(&instance)?;
    case_study_on(&original, spec, shifts, mode)
}

pub fn case_study_on(
    original: &AreProblem,
    spec: &BenchmarkSpec,
    shifts: usize,
    mode: Mode,
) -> Result<CaseStudy> {
    let h = original.hamiltonian();
    let available = crate::shift::negative_real_eigenvalues(&h)?.len();
    let k = shifts.min(available);
    let mut problems: Vec<AreProblem> = Vec::with_capacity(k);
    match mode {
        Mode::Problem1 => {
            // Resample any shift that would lower one of the measures.
            let mut floor = [0.0; 3];
            let guard = |next: &HamiltonianMatrix| match next.split() {
                Ok(p) => {
                    let ratios = [
                        relative_change(original.a(), p.a()),
                        relative_change(original.d(), p.d()),
                        relative_change(original.q(), p.q()),
                    ]
                    .map(|x| x.unwrap_or(0.0));
                    let ok = ratios.iter().zip(&floor).all(|(r, f)| r >= f);
                    if ok {
                        floor = ratios;
                    }
                    ok
                }
                Err(_) => false,
            };
            let (steps, _) =
                perturb_trajectory(&h, k, SamplingWindow::default(), spec.seed, guard)?;
            for step in steps {
                problems.push(step.split()?);
            }
        }
        Mode::Problem2 => {
            let mut options = RealizableOptions::default();
            let mut current = original.clone();
            for i in 0..k {
                let out = algorithm2_with(&current, spec.seed.wrapping_add(i as u64), &options)?;
                options.exclude.push(out.record.shifted_eigenvalue().re);
                current = out.problem;
                problems.push(current.clone());
            }
        }
    }
    let mut reports = vec![privacy_measures(original, original, 0)?];
    for (i, p) in problems.iter().enumerate() {
        reports.push(privacy_measures(original, p, i + 1)?);
    }
    let rows = reports
        .iter()
        .enumerate()
        .map(|(i, r)| MeasureRow::from_report(i, r))
        .collect();
    let last = problems.last().unwrap_or(original);
    let before = solve_stabilizing(original)?;
    let after = solve_stabilizing(last)?;
    let solution_rel_diff = (&after.p - &before.p).norm() / before.p.norm().max(f64::MIN_POSITIVE);
    let closed_loop_stable = crate::numerics::is_hurwitz(&crate::numerics::eigenvalues(
        &(original.a() - original.d() * &after.p),
    )?);
    Ok(CaseStudy {
        mode,
        spec: spec.clone(),
        negative_real_count: available,
        requested: shifts,
        applied: k,
        rows,
        reports,
        solution_rel_diff,
        closed_loop_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{min_sym_eigenvalue, Vector};
    use approx::assert_relative_eq;

    #[test]
    fn single_input_gives_rank_one_d() {
        let l = LqrProblem::new(
            Matrix::identity(2, 2),
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            Matrix::identity(2, 2),
            Matrix::identity(1, 1),
        )
        .unwrap();
        let p = lqr_to_are(&l).unwrap();
        assert_eq!(p.d(), &Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0])));
    }

    #[test]
    fn identity_system() {
        let i = Matrix::identity(3, 3);
        let l = LqrProblem::new(i.clone(), i.clone(), i.clone(), i.clone()).unwrap();
        let p = lqr_to_are(&l).unwrap();
        assert_eq!(p.q(), &i);
        assert_eq!(p.d(), &i);
    }

    #[test]
    fn weighted_inputs() {
        let l = LqrProblem::new(
            Matrix::zeros(1, 1),
            Matrix::from_element(1, 1, 2.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 4.0),
        )
        .unwrap();
        assert_relative_eq!(lqr_to_are(&l).unwrap().d()[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_r() {
        let z = Matrix::zeros(1, 1);
        assert!(LqrProblem::new(z.clone(), z.clone(), z.clone(), z.clone()).is_err());
        let r = Matrix::from_row_slice(1, 1, &[-1.0]);
        assert!(LqrProblem::new(z.clone(), z.clone(), z, r).is_err());
    }

    #[test]
    fn random_instance_ranks() {
        let spec = BenchmarkSpec::new(5, 2, 2, 3);
        let l = generate_benchmark(&spec).unwrap();
        let p = lqr_to_are(&l).unwrap();
        for m in [p.q(), p.d()] {
            assert!(min_sym_eigenvalue(m).unwrap() >= -1e-12);
            assert!(m.rank(1e-10) <= 2);
        }
    }

    #[test]
    fn realization_examples() {
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0]));
        let p = AreProblem::new(Matrix::zeros(2, 2), Matrix::identity(2, 2), d).unwrap();
        let l = are_to_lqr_realization(&p).unwrap();
        assert_eq!(l.inputs(), 1);
        assert_relative_eq!(l.b()[(0, 0)].abs(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(l.b()[(1, 0)], 0.0, epsilon = 1e-15);
        assert!((l.c().transpose() * l.c() - Matrix::identity(2, 2)).amax() < 1e-15);

        let zero = AreProblem::new(Matrix::zeros(2, 2), Matrix::identity(2, 2), Matrix::zeros(2, 2))
            .unwrap();
        let l = are_to_lqr_realization(&zero).unwrap();
        assert_eq!(l.b().shape(), (2, 0));
        assert_eq!(lqr_to_are(&l).unwrap(), zero);
    }

    #[test]
    fn scalar_realization() {
        let p = AreProblem::scalar(1.1767767, 1.7803301, 1.2803301);
        let l = are_to_lqr_realization(&p).unwrap();
        assert_relative_eq!(l.b()[(0, 0)], 1.13152, epsilon = 1e-5);
        assert_relative_eq!(l.c()[(0, 0)], 1.33429, epsilon = 1e-5);
    }

    #[test]
    fn realization_round_trip() {
        let spec = BenchmarkSpec::new(6, 3, 2, 9);
        let p = lqr_to_are(&generate_benchmark(&spec).unwrap()).unwrap();
        let back = lqr_to_are(&are_to_lqr_realization(&p).unwrap()).unwrap();
        let scale = p.q().norm().max(p.d().norm());
        assert!((back.q() - p.q()).amax() <= 1e-10 * scale);
        assert!((back.d() - p.d()).amax() <= 1e-10 * scale);
    }

    #[test]
    fn realization_rejects_indefinite() {
        let p = AreProblem::scalar(1.0, -1.0, 1.0);
        assert!(matches!(are_to_lqr_realization(&p), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn benchmark_is_deterministic() {
        let spec = BenchmarkSpec::new(8, 2, 3, 42);
        assert_eq!(generate_benchmark(&spec).unwrap(), generate_benchmark(&spec).unwrap());
        let scalar = generate_benchmark(&BenchmarkSpec::new(1, 1, 1, 0)).unwrap();
        assert!(solve_stabilizing(&lqr_to_are(&scalar).unwrap()).is_ok());
    }

    #[test]
    fn zero_shift_case_study() {
        let spec = BenchmarkSpec::new(6, 2, 2, 1);
        let study = case_study(&spec, 0, Mode::Problem1).unwrap();
        assert_eq!(study.rows.len(), 1);
        assert_eq!(study.last_row().rel_a, 0.0);
        assert!(study.to_csv().unwrap().starts_with("iteration,relA,relD,relQ\n"));
    }

    #[test]
    fn small_case_study_keeps_solution() {
        let spec = BenchmarkSpec::new(10, 4, 4, 4).with_isolated_modes(3);
        for mode in [Mode::Problem1, Mode::Problem2] {
            let study = case_study(&spec, 3, mode).unwrap();
            assert_eq!(study.rows.len(), study.applied + 1);
            assert!(study.solution_rel_diff < 1e-8, "{mode:?} {}", study.solution_rel_diff);
            assert!(study.closed_loop_stable);
        }
    }
}
