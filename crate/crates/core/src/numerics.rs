//! Dense real linear algebra: eigenpairs from a real Schur form, Schur
//! reordering that moves the stable spectrum to the leading block, numeric
//! kernels and extreme eigenvalues of symmetric matrices.
//!
//! The Hessenberg/QR iteration itself comes from `nalgebra`; eigenvector
//! back-substitution and block reordering are done here because `nalgebra`
//! offers neither for nonsymmetric matrices.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance under which an eigenvalue counts as real.
pub const IMAG_TOL: f64 = 1e-9;
/// Relative tolerance separating zero from nonzero eigenvalues.
pub const ZERO_TOL: f64 = 1e-10;
/// Relative distance from the imaginary axis below which the stable/unstable
/// split is refused.
pub const AXIS_TOL: f64 = 1e-12;
/// Relative symmetry defect accepted before symmetrizing.
pub const SYM_TOL: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;
const SCHUR_RESTARTS: usize = 4;

pub fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_square(m: &Matrix, what: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Frobenius norm of `M - Mᵀ`.
pub fn symmetry_defect(m: &Matrix) -> f64 {
    (m - m.transpose()).norm()
}

pub fn complexify(m: &Matrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `true` when `|Im λ| <= IMAG_TOL (1 + |λ|)`.
pub fn is_real_eigenvalue(value: Complex64) -> bool {
    value.im.abs() <= IMAG_TOL * (1.0 + value.norm())
}

pub fn is_hurwitz(spectrum: &[Complex64]) -> bool {
    spectrum.iter().all(|l| l.re < 0.0)
}

/// Which side of the matrix an eigenvector multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An eigenvalue with a unit-norm eigenvector.
///
/// For a left pair the stored vector `w` satisfies `wᵀM = λwᵀ`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: CVector,
    pub side: Side,
}

impl EigenPair {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }

    /// The eigenvector as a real vector, if the pair is real.
    pub fn real_vector(&self) -> Option<Vector> {
        self.is_real().then(|| self.vector.map(|z| z.re))
    }

    /// `‖Mv − λv‖` (right) or `‖wᵀM − λwᵀ‖` (left).
    pub fn residual(&self, m: &Matrix) -> f64 {
        let mc = complexify(m);
        let image = match self.side {
            Side::Right => &mc * &self.vector,
            Side::Left => mc.transpose() * &self.vector,
        };
        (image - &self.vector * self.value).norm()
    }
}

/// Residual tolerance for eigenpairs of an `order x order` matrix, relative to `‖M‖`.
pub fn eigen_residual_tol(order: usize) -> f64 {
    1e3 * f64::EPSILON * order.max(1) as f64
}

/// Real Schur decomposition `M = Q T Qᵀ` with `T` upper quasi-triangular.
///
/// Every 2x2 diagonal block of `T` carries a complex conjugate pair; real
/// eigenvalues always sit in 1x1 blocks.
#[derive(Clone, Debug)]
pub struct RealSchur {
    m: Matrix,
    q: Matrix,
    t: Matrix,
    blocks: Vec<(usize, usize)>,
}

impl RealSchur {
    pub fn new(m: &Matrix) -> Result<Self> {
        ensure_square(m, "matrix")?;
        ensure_finite(m, "matrix")?;
        let n = m.nrows();
        let (q, t) = if n == 0 {
            (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
        } else {
            schur_factors(m)?
        };
        let blocks = block_structure(&t);
        Ok(Self {
            m: m.clone(),
            q,
            t,
            blocks,
        })
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    /// Eigenvalues in diagonal order; each 2x2 block yields `(+Im, −Im)`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.blocks
            .iter()
            .flat_map(|&(s, size)| block_eigenvalues(&self.t, s, size))
            .collect()
    }

    /// Right eigenpair for the `index`-th eigenvalue of [`Self::eigenvalues`].
    ///
    /// Real eigenvalues get a real eigenvector whose largest-magnitude entry is
    /// positive; complex ones are phased so that entry is real and positive.
    pub fn eigenpair(&self, index: usize) -> Result<EigenPair> {
        let (block, which) = self.locate(index)?;
        let (start, size) = self.blocks[block];
        let raw = block_eigenvalues(&self.t, start, size)[which];
        // Conjugate pairs share one back-substitution.
        let lambda = if which == 1 { raw.conj() } else { raw };
        let y = schur_vector(&self.t, &self.blocks, block, lambda);
        let mut x = real_times_complex(&self.q, &y);
        if which == 1 {
            x = x.map(|z| z.conj());
        }
        let mut value = raw;
        let real = is_real_eigenvalue(value);
        if real {
            value.im = 0.0;
        }
        let x = normalize_phase(x);
        let vector = if real {
            let max_im = x.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if max_im > 1e-6 {
                return Err(Error::ComplexEigenvector(value));
            }
            x.map(|z| Complex64::new(z.re, 0.0)).normalize()
        } else {
            x
        };
        let pair = EigenPair {
            value,
            vector,
            side: Side::Right,
        };
        let scale = self.m.norm().max(f64::MIN_POSITIVE);
        let residual = pair.residual(&self.m);
        let tol = eigen_residual_tol(self.m.nrows()) * scale;
        if residual > tol {
            return Err(Error::EigenResidual { residual, tol });
        }
        Ok(pair)
    }

    fn locate(&self, index: usize) -> Result<(usize, usize)> {
        let mut count = 0;
        for (b, &(_, size)) in self.blocks.iter().enumerate() {
            if index < count + size {
                return Ok((b, index - count));
            }
            count += size;
        }
        Err(Error::InvalidArgument(format!(
            "eigenvalue index {index} out of range for order {count}"
        )))
    }
}

/// Schur factors `(Q, T)` with `M = Q T Qᴴ`. The Francis iteration can stall
/// on spectra symmetric about the origin, so a failed run restarts from
/// `R M R` with a fixed Householder reflector `R`.
fn schur_factors<T>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if let Some(s) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Ok(s.unpack());
    }
    for attempt in 1..=SCHUR_RESTARTS {
        let r = reflector(m.nrows(), attempt).map(T::from_real);
        if let Some(s) = nalgebra::Schur::try_new(&r * m * &r, f64::EPSILON, SCHUR_MAX_ITER) {
            let (q, t) = s.unpack();
            return Ok((&r * q, t));
        }
    }
    Err(Error::NoConvergence)
}

/// `I − 2wwᵀ` for a unit `w` from a low-discrepancy sequence.
fn reflector(n: usize, attempt: usize) -> Matrix {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let w = Vector::from_fn(n, |i, _| ((i * attempt + 1) as f64 * GOLDEN).fract() + 0.25);
    let w = w.normalize();
    Matrix::identity(n, n) - &w * w.transpose() * 2.0
}

/// Eigenvalues only, in real Schur diagonal order.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    Ok(RealSchur::new(m)?
        .eigenvalues()
        .into_iter()
        .map(|mut l| {
            if is_real_eigenvalue(l) {
                l.im = 0.0;
            }
            l
        })
        .collect())
}

/// All right eigenpairs of `m`; conjugate pairs are adjacent.
pub fn eig_all(m: &Matrix) -> Result<Vec<EigenPair>> {
    let schur = RealSchur::new(m)?;
    (0..m.nrows()).map(|i| schur.eigenpair(i)).collect()
}

/// All left eigenpairs of `m`.
pub fn eig_all_left(m: &Matrix) -> Result<Vec<EigenPair>> {
    let mut pairs = eig_all(&m.transpose())?;
    for p in &mut pairs {
        p.side = Side::Left;
    }
    Ok(pairs)
}

fn block_structure(t: &Matrix) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

fn block_eigenvalues(t: &Matrix, start: usize, size: usize) -> Vec<Complex64> {
    if size == 1 {
        return vec![Complex64::new(t[(start, start)], 0.0)];
    }
    let (a, b) = (t[(start, start)], t[(start, start + 1)]);
    let (c, d) = (t[(start + 1, start)], t[(start + 1, start + 1)]);
    let half_trace = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let discr = half_diff * half_diff + b * c;
    if discr >= 0.0 {
        // Only reachable for a block that is numerically real; keep the pair adjacent.
        let s = discr.sqrt();
        vec![
            Complex64::new(half_trace + s, 0.0),
            Complex64::new(half_trace - s, 0.0),
        ]
    } else {
        let s = (-discr).sqrt();
        vec![
            Complex64::new(half_trace, s),
            Complex64::new(half_trace, -s),
        ]
    }
}

/// Back-substitution for `(T − λI) y = 0` on a quasi-triangular `T`, with `y`
/// supported on rows up to the end of `block`.
fn schur_vector(t: &Matrix, blocks: &[(usize, usize)], block: usize, lambda: Complex64) -> CVector {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE * 1e10);
    let (s, size) = blocks[block];
    let mut y = CVector::zeros(n);
    if size == 1 {
        y[s] = Complex64::new(1.0, 0.0);
    } else {
        let a = Complex64::new(t[(s, s)], 0.0) - lambda;
        let b = Complex64::new(t[(s, s + 1)], 0.0);
        let c = Complex64::new(t[(s + 1, s)], 0.0);
        let d = Complex64::new(t[(s + 1, s + 1)], 0.0) - lambda;
        // Two candidate null vectors of the 2x2 block; keep the better scaled one.
        let (u0, u1) = (b, -a);
        let (w0, w1) = (-d, c);
        if u0.norm_sqr() + u1.norm_sqr() >= w0.norm_sqr() + w1.norm_sqr() {
            y[s] = u0;
            y[s + 1] = u1;
        } else {
            y[s] = w0;
            y[s + 1] = w1;
        }
    }
    let end = s + size;
    for bi in (0..block).rev() {
        let (r0, rsize) = blocks[bi];
        let rhs = |row: usize, y: &CVector| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (r0 + rsize)..end {
                acc += y[j] * t[(row, j)];
            }
            -acc
        };
        if rsize == 1 {
            let mut pivot = Complex64::new(t[(r0, r0)], 0.0) - lambda;
            if pivot.norm() < smin {
                pivot = Complex64::new(smin, 0.0);
            }
            y[r0] = rhs(r0, &y) / pivot;
        } else {
            let m00 = Complex64::new(t[(r0, r0)], 0.0) - lambda;
            let m01 = Complex64::new(t[(r0, r0 + 1)], 0.0);
            let m10 = Complex64::new(t[(r0 + 1, r0)], 0.0);
            let m11 = Complex64::new(t[(r0 + 1, r0 + 1)], 0.0) - lambda;
            let (f0, f1) = (rhs(r0, &y), rhs(r0 + 1, &y));
            let mut det = m00 * m11 - m01 * m10;
            if det.norm() < smin * smin {
                det = Complex64::new(smin * smin, 0.0);
            }
            y[r0] = (m11 * f0 - m01 * f1) / det;
            y[r0 + 1] = (m00 * f1 - m10 * f0) / det;
        }
        let norm = y.norm();
        if norm > 1e150 {
            y /= Complex64::new(norm, 0.0);
        }
    }
    y
}

fn real_times_complex(q: &Matrix, y: &CVector) -> CVector {
    let re = q * y.map(|z| z.re);
    let im = q * y.map(|z| z.im);
    CVector::from_iterator(
        re.len(),
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)),
    )
}

/// Unit norm, with the largest-magnitude entry made real and positive.
fn normalize_phase(x: CVector) -> CVector {
    let norm = x.norm();
    if norm == 0.0 {
        return x;
    }
    let pivot = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    x.map(|z| z * phase / norm)
}

/// Real Schur form with every eigenvalue of the open left half plane in the
/// leading `stable_dim` columns.
#[derive(Clone, Debug)]
pub struct OrderedSchur {
    pub q: Matrix,
    pub t: Matrix,
    pub stable_dim: usize,
}

impl OrderedSchur {
    pub fn stable_basis(&self) -> Matrix {
        self.q.columns(0, self.stable_dim).into_owned()
    }

    pub fn leading_eigenvalues(&self) -> Vec<Complex64> {
        let blocks = block_structure(&self.t);
        blocks
            .iter()
            .filter(|(s, _)| *s < self.stable_dim)
            .flat_map(|&(s, size)| block_eigenvalues(&self.t, s, size))
            .collect()
    }
}

/// Reorders the real Schur form of `m` so the stable eigenvalues come first.
///
/// Fails when some eigenvalue has `|Re λ| <= AXIS_TOL ‖M‖`.
pub fn ordered_stable_schur(m: &Matrix) -> Result<OrderedSchur> {
    let schur = RealSchur::new(m)?;
    let scale = m.norm();
    let mut t = schur.t;
    let mut q = schur.q;
    let mut blocks: Vec<(usize, bool)> = Vec::with_capacity(schur.blocks.len());
    for &(s, size) in &schur.blocks {
        let lambda = block_eigenvalues(&t, s, size)[0];
        if lambda.re.abs() <= AXIS_TOL * scale {
            return Err(Error::ImaginaryAxis(lambda));
        }
        if size == 2 && block_eigenvalues(&t, s, size)[1].re.abs() <= AXIS_TOL * scale {
            return Err(Error::ImaginaryAxis(lambda));
        }
        blocks.push((size, lambda.re < 0.0));
    }

    let mut target = 0;
    for b in 0..blocks.len() {
        if !blocks[b].1 {
            continue;
        }
        let mut cur = b;
        while cur > target {
            let pos: usize = blocks[..cur - 1].iter().map(|(sz, _)| sz).sum();
            swap_adjacent_blocks(&mut t, &mut q, pos, blocks[cur - 1].0, blocks[cur].0)?;
            blocks.swap(cur - 1, cur);
            cur -= 1;
        }
        target += 1;
    }
    let stable_dim = blocks.iter().filter(|(_, st)| *st).map(|(sz, _)| sz).sum();
    Ok(OrderedSchur { q, t, stable_dim })
}

/// Swaps the adjacent diagonal blocks of sizes `p` (upper) and `r` (lower)
/// starting at row `j`, updating `t` and the accumulated `q`.
fn swap_adjacent_blocks(t: &mut Matrix, q: &mut Matrix, j: usize, p: usize, r: usize) -> Result<()> {
    let n = t.nrows();
    let m = p + r;
    let t11 = t.view((j, j), (p, p)).into_owned();
    let t12 = t.view((j, j + p), (p, r)).into_owned();
    let t22 = t.view((j + p, j + p), (r, r)).into_owned();

    // Sylvester equation T11 X − X T22 = T12, column-major vec(X).
    let dim = p * r;
    let mut kron = Matrix::zeros(dim, dim);
    let mut rhs = Vector::zeros(dim);
    for b in 0..r {
        for a in 0..p {
            let row = a + b * p;
            for c in 0..p {
                kron[(row, c + b * p)] += t11[(a, c)];
            }
            for d in 0..r {
                kron[(row, a + d * p)] -= t22[(d, b)];
            }
            rhs[row] = t12[(a, b)];
        }
    }
    let x = kron
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SwapRejected(f64::INFINITY))?;

    // Columns of [X; −I] span the invariant subspace belonging to T22.
    let mut aug = Matrix::zeros(m, r + m);
    for b in 0..r {
        for a in 0..p {
            aug[(a, b)] = x[a + b * p];
        }
        aug[(p + b, b)] = -1.0;
    }
    for i in 0..m {
        aug[(i, r + i)] = 1.0;
    }
    let qs = aug.qr().q();

    let rows = qs.transpose() * t.view((j, j), (m, n - j));
    t.view_mut((j, j), (m, n - j)).copy_from(&rows);
    let cols = t.view((0, j), (j + m, m)) * &qs;
    t.view_mut((0, j), (j + m, m)).copy_from(&cols);
    let qcols = q.view((0, j), (n, m)) * &qs;
    q.view_mut((0, j), (n, m)).copy_from(&qcols);

    let block_norm = t.view((j, j), (m, m)).norm();
    let coupling = t.view((j + r, j), (p, r)).norm();
    if coupling > 100.0 * f64::EPSILON * block_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::SwapRejected(coupling));
    }
    t.view_mut((j + r, j), (p, r)).fill(0.0);
    Ok(())
}

/// Orthonormal basis of a numeric null space.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub basis: Matrix,
    pub rank: usize,
    pub rank_tol: f64,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Null space of `m`: right singular vectors whose singular value is below
/// `rank_tol · σ_max`.
pub fn kernel_basis(m: &Matrix, rank_tol: f64) -> Result<KernelBasis> {
    ensure_finite(m, "matrix")?;
    let cols = m.ncols();
    // Pad wide matrices so the thin SVD carries a full set of right vectors.
    let work = if m.nrows() < cols {
        let mut padded = Matrix::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    if cols == 0 {
        return Ok(KernelBasis {
            basis: Matrix::zeros(0, 0),
            rank: 0,
            rank_tol,
        });
    }
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| sigma_max == 0.0 || svd.singular_values[i] <= rank_tol * sigma_max)
        .collect();
    let mut basis = Matrix::zeros(cols, null.len());
    for (k, &i) in null.iter().enumerate() {
        basis.set_column(k, &v_t.row(i).transpose());
    }
    Ok(KernelBasis {
        rank: cols - null.len(),
        basis,
        rank_tol,
    })
}

/// Signed and nonzero extreme eigenvalues of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymExtremes {
    pub min: f64,
    pub max: f64,
    pub min_nonzero: Option<f64>,
    pub max_nonzero: Option<f64>,
}

pub fn sym_eig_extremes(s: &Matrix, zero_tol: f64) -> Result<SymExtremes> {
    let values = sym_eigenvalues(s)?;
    if values.is_empty() {
        return Ok(SymExtremes {
            min: 0.0,
            max: 0.0,
            min_nonzero: None,
            max_nonzero: None,
        });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let largest = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let nonzero: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| largest > 0.0 && v.abs() > zero_tol * largest)
        .collect();
    Ok(SymExtremes {
        min,
        max,
        min_nonzero: nonzero.iter().copied().reduce(f64::min),
        max_nonzero: nonzero.iter().copied().reduce(f64::max),
    })
}

/// Eigenvalues of a symmetric matrix after checking its symmetry defect.
pub fn sym_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    ensure_square(s, "symmetric matrix")?;
    ensure_finite(s, "symmetric matrix")?;
    let defect = symmetry_defect(s);
    if defect > SYM_TOL * s.norm().max(1.0) {
        return Err(Error::NotSymmetric {
            what: "symmetric matrix",
            defect,
        });
    }
    if s.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(symmetrize(s).symmetric_eigenvalues().iter().copied().collect())
}

/// Smallest eigenvalue of a symmetric matrix (0 for the empty matrix).
pub fn min_sym_eigenvalue(s: &Matrix) -> Result<f64> {
    Ok(sym_eigenvalues(s)?.into_iter().reduce(f64::min).unwrap_or(0.0))
}

/// Eigenvalues of a complex matrix from its complex Schur form.
pub fn complex_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension("complex matrix must be square".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur_factors(m)?;
    let mut values = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_trace = (a + d) * 0.5;
            let root = (((a - d) * 0.5).powi(2) + b * c).sqrt();
            values.push(half_trace + root);
            values.push(half_trace - root);
            i += 2;
        } else {
            values.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(values)
}

/// Maximum distance over a greedy nearest-neighbour matching of two spectra,
/// or `None` if their sizes differ.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut remaining: Vec<Complex64> = b.to_vec();
    let mut order: Vec<Complex64> = a.to_vec();
    order.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut worst = 0.0_f64;
    for x in order {
        let (k, d) = remaining
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        worst = worst.max(d);
        remaining.swap_remove(k);
    }
    Some(worst)
}
