//! Dense complex linear algebra used throughout the crate.
//!
//! Besides thin wrappers over `nalgebra` (Hermitian eigensolver, SVD), this
//! module hosts two constructive results the rest of the crate depends on:
//!
//! * [`zero_diagonal_basis`]: every traceless operator has an orthonormal basis
//!   in which its diagonal vanishes. Built one vector at a time by locating a
//!   zero of `φ ↦ ⟨φ, Xφ⟩` on the torus of equal-modulus vectors in the
//!   eigenbasis of the Hermitian part, then deflating.
//! * [`s_invariant_eigenbasis`]: an eigenbasis of a 4×4 Pauli coefficient
//!   matrix whose vectors are fixed by the antiunitary
//!   `S(φ₀, φ₁, φ₂, φ₃) = (φ̄₀, −φ̄₁, −φ̄₂, −φ̄₃)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default numerical tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default sample budget of the torus search in [`zero_diagonal_basis`].
pub const TORUS_SAMPLE_BUDGET: usize = 10_000;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|u⟩⟨v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = ONE;
    v
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Pauli matrix `σ_i` for `i ∈ {0, 1, 2, 3}` with `σ₀ = 1`.
pub fn pauli(i: usize) -> CMatrix {
    let e = |a: Complex64, b: Complex64, c_: Complex64, d: Complex64| CMatrix::from_row_slice(2, 2, &[a, b, c_, d]);
    match i {
        0 => identity(2),
        1 => e(ZERO, ONE, ONE, ZERO),
        2 => e(ZERO, -I, I, ZERO),
        3 => e(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// `‖u†u − 1‖_F`; also covers isometries when `u` is tall.
pub fn isometry_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}

/// Eigen-decomposition of the Hermitian part of `h`.
///
/// Eigenvalues are ascending; ties keep the solver's original index order.
/// Eigenvectors are the columns of the returned matrix.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part of `h`.
pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigen(h).0.first().copied().unwrap_or(0.0)
}

/// Partial trace over the second tensor factor of an operator on `C^d1 ⊗ C^d2`.
pub fn partial_trace_second(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    assert_eq!(m.nrows(), d1 * d2);
    CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum())
}

/// Partial trace over the first tensor factor of an operator on `C^d1 ⊗ C^d2`.
pub fn partial_trace_first(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    assert_eq!(m.nrows(), d1 * d2);
    CMatrix::from_fn(d2, d2, |a, b| (0..d1).map(|k| m[(k * d2 + a, k * d2 + b)]).sum())
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `frame`, as the columns of an `n × (n − rank)` matrix.
///
/// Columns of `frame` must be orthonormal. The completion is greedy over the
/// standard basis, picking at each step the candidate with the largest
/// residual and orthogonalizing twice.
pub fn orthonormal_complement(frame: &CMatrix) -> CMatrix {
    let n = frame.nrows();
    let mut basis: Vec<CVector> = frame.column_iter().map(|c| c.into_owned()).collect();
    let target = n.saturating_sub(basis.len());
    let mut added: Vec<CVector> = Vec::with_capacity(target);
    while added.len() < target {
        let mut best: Option<(f64, CVector)> = None;
        for i in 0..n {
            let mut v = basis_vector(n, i);
            for _ in 0..2 {
                for b in &basis {
                    let p = b.dotc(&v);
                    v -= b * p;
                }
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| nv > *bn) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("n > 0 whenever a complement is requested");
        if nv < 1e-8 {
            break;
        }
        let v = v.unscale(nv);
        basis.push(v.clone());
        added.push(v);
    }
    let mut out = CMatrix::zeros(n, added.len());
    for (j, v) in added.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Orthonormal basis of the range of `m` (columns), cut at `tol` relative to
/// the largest singular value.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax)
        .collect();
    let mut out = CMatrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Haar-distributed random unitary via Gram-Schmidt of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, n, rng);
    let mut q = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v: CVector = g.column(j).into_owned();
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k).into_owned();
                let p = qk.dotc(&v);
                v -= qk * p;
            }
        }
        let nv = v.norm();
        q.set_column(j, &v.unscale(nv));
    }
    q
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random full-rank density matrix `GG†/tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(n, n, rng);
    let rho = &g * g.adjoint();
    let t = trace(&rho).re;
    rho.unscale(t)
}

/// Random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let g = random_ginibre(n, 1, rng);
    let v: CVector = g.column(0).into_owned();
    let nv = v.norm();
    v.unscale(nv)
}

/// An ordered orthonormal family of vectors spanning its ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    vectors: Vec<CVector>,
}

impl OrthoBasis {
    /// Checks equal lengths, completeness and orthonormality within `tol`.
    pub fn new(vectors: Vec<CVector>, tol: f64) -> Result<Self> {
        let n = vectors.first().map(|v| v.len()).unwrap_or(0);
        if n == 0 {
            return Err(Error::InvalidChannel("empty basis".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(dim_mismatch("basis vector", n, bad.len()));
        }
        if vectors.len() != n {
            return Err(dim_mismatch("basis size", n, vectors.len()));
        }
        let basis = Self { vectors };
        let defect = basis.orthonormality_defect();
        if !defect.is_finite() || defect > tol {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(basis)
    }

    /// Columns of a square matrix as a basis.
    pub fn from_columns(m: &CMatrix, tol: f64) -> Result<Self> {
        Self::new(m.column_iter().map(|c| c.into_owned()).collect(), tol)
    }

    pub(crate) fn from_columns_unchecked(m: &CMatrix) -> Self {
        Self {
            vectors: m.column_iter().map(|c| c.into_owned()).collect(),
        }
    }

    pub fn standard(n: usize) -> Self {
        Self {
            vectors: (0..n).map(|i| basis_vector(n, i)).collect(),
        }
    }

    /// Haar-random orthonormal basis.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_columns_unchecked(&random_unitary(n, rng))
    }

    /// Deterministic Haar-random basis for a seed.
    pub fn seeded(n: usize, seed: u64) -> Self {
        Self::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &CVector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// Basis vectors as the columns of a unitary matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.len());
        for (j, v) in self.vectors.iter().enumerate() {
            m.set_column(j, v);
        }
        m
    }

    /// Rank-one projector onto the `i`-th vector.
    pub fn projector(&self, i: usize) -> CMatrix {
        outer(&self.vectors[i], &self.vectors[i])
    }

    /// `‖G − 1‖_F` for the Gram matrix `G`.
    pub fn orthonormality_defect(&self) -> f64 {
        isometry_defect(&self.matrix())
    }
}

/// Polar factors `t = v·|t|`.
#[derive(Debug, Clone)]
pub struct PolarParts {
    /// Partial isometry from `range(|t|)` onto `range(t)`, zero on `range(|t|)^⊥`.
    pub isometry_part: CMatrix,
    /// `|t| = sqrt(t†t)`.
    pub positive_part: CMatrix,
}

/// Polar decomposition with the partial isometry extended by zero on the
/// kernel. Singular values `≤ tol·σ_max` count as zero.
pub fn polar_decompose(t: &CMatrix, tol: f64) -> Result<PolarParts> {
    if !is_finite(t) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = t.shape();
    if rows == 0 || cols == 0 {
        return Err(dim_mismatch(
            "polar_decompose",
            "nonempty matrix",
            format!("{rows}x{cols}"),
        ));
    }
    let svd = SVD::new(t.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").adjoint();
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut positive = CMatrix::zeros(cols, cols);
    let mut isometry = CMatrix::zeros(rows, cols);
    for k in 0..sigma.len() {
        if smax == 0.0 || sigma[k] <= tol * smax {
            continue;
        }
        let vk: CVector = v.column(k).into_owned();
        let uk: CVector = u.column(k).into_owned();
        positive += outer(&vk, &vk).scale(sigma[k]);
        isometry += outer(&uk, &vk);
    }
    Ok(PolarParts {
        isometry_part: isometry,
        positive_part: hermitian_part(&positive),
    })
}

/// Orthonormal basis `{e_α}` with `|⟨e_α, X e_α⟩| ≤ tol` for a traceless `X`.
///
/// Deterministic for a fixed `seed`. The search per vector samples the phase
/// torus until `Im⟨φ, Xφ⟩` changes sign and then bisects along the straight
/// segment in angle space.
pub fn zero_diagonal_basis(x: &CMatrix, tol: f64, seed: u64) -> Result<OrthoBasis> {
    zero_diagonal_basis_with_budget(x, tol, seed, TORUS_SAMPLE_BUDGET)
}

pub fn zero_diagonal_basis_with_budget(x: &CMatrix, tol: f64, seed: u64, budget: usize) -> Result<OrthoBasis> {
    if x.nrows() != x.ncols() {
        return Err(dim_mismatch(
            "zero_diagonal_basis",
            "square matrix",
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    if !is_finite(x) {
        return Err(Error::NonFinite);
    }
    let n = x.nrows();
    if n == 0 {
        return Err(dim_mismatch("zero_diagonal_basis", "nonempty matrix", "0x0"));
    }
    let tr = trace(x);
    if tr.norm() > tol * n as f64 {
        return Err(Error::NotTraceless(tr.norm()));
    }
    // Remove the admissible trace remainder so every level is exactly traceless.
    let x0 = x - identity(n) * (tr / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame = identity(n);
    let mut found: Vec<CVector> = Vec::with_capacity(n);

    while frame.ncols() > 0 {
        let k = frame.ncols();
        let mut y = frame.adjoint() * &x0 * &frame;
        let ty = trace(&y) / k as f64;
        for i in 0..k {
            y[(i, i)] -= ty;
        }
        let max_diag = (0..k).map(|i| y[(i, i)].norm()).fold(0.0, f64::max);
        if k == 1 || max_diag <= tol {
            found.extend(frame.column_iter().map(|c| c.into_owned()));
            break;
        }
        let phi = isotropic_torus_vector(&y, tol, budget, &mut rng)?;
        found.push(&frame * &phi);
        let rest = orthonormal_complement(&CMatrix::from_column_slice(k, 1, phi.as_slice()));
        frame = &frame * rest;
    }
    Ok(OrthoBasis { vectors: found })
}

/// Unit vector on the phase torus (in the eigenbasis of the Hermitian part of
/// the traceless `y`) with `|⟨φ, yφ⟩| ≤ tol`.
fn isotropic_torus_vector(y: &CMatrix, tol: f64, budget: usize, rng: &mut ChaCha8Rng) -> Result<CVector> {
    let k = y.nrows();
    let (_, frame) = hermitian_eigen(y);
    let amp = 1.0 / (k as f64).sqrt();
    let point = |theta: &[f64]| -> CVector {
        let coords = CVector::from_iterator(k, theta.iter().map(|&t| Complex64::from_polar(amp, t)));
        &frame * coords
    };
    let value = |phi: &CVector| -> f64 { phi.dotc(&(y * phi)).im };
    let accept = 0.25 * tol;

    let mut pos: Option<Vec<f64>> = None;
    let mut neg: Option<Vec<f64>> = None;
    for _ in 0..budget {
        let theta: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let phi = point(&theta);
        let g = value(&phi);
        if g.abs() <= accept {
            return Ok(phi);
        }
        if g > 0.0 && pos.is_none() {
            pos = Some(theta);
        } else if g < 0.0 && neg.is_none() {
            neg = Some(theta);
        }
        if pos.is_some() && neg.is_some() {
            break;
        }
    }
    let (Some(tp), Some(tn)) = (pos, neg) else {
        return Err(Error::SearchFailed(budget));
    };

    let along = |s: f64| -> Vec<f64> { tn.iter().zip(&tp).map(|(a, b)| a + s * (b - a)).collect() };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = point(&tn);
    let mut best_abs = f64::INFINITY;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let phi = point(&along(mid));
        let g = value(&phi);
        if g.abs() < best_abs {
            best_abs = g.abs();
            best = phi;
        }
        if g.abs() <= accept * 1e-3 || (hi - lo).abs() < f64::EPSILON {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_abs > tol {
        return Err(Error::SearchFailed(budget));
    }
    Ok(best)
}

/// `S(φ₀, φ₁, φ₂, φ₃) = (φ̄₀, −φ̄₁, −φ̄₂, −φ̄₃)`.
pub fn antiunitary_s(phi: &CVector) -> CVector {
    CVector::from_iterator(
        phi.len(),
        phi.iter()
            .enumerate()
            .map(|(i, z)| if i == 0 { z.conj() } else { -z.conj() }),
    )
}

/// `‖Sφ − φ‖`.
pub fn s_invariance_defect(phi: &CVector) -> f64 {
    (antiunitary_s(phi) - phi).norm()
}

/// Orthonormal eigenbasis of a Pauli coefficient matrix made of `S`-invariant
/// vectors (first component real, the rest purely imaginary).
///
/// Returns eigenvalues (ascending, clamped at zero) and the basis in the same order.
pub fn s_invariant_eigenbasis(rmat: &CMatrix, tol: f64) -> Result<(Vec<f64>, OrthoBasis)> {
    if rmat.shape() != (4, 4) {
        return Err(dim_mismatch(
            "s_invariant_eigenbasis",
            "4x4",
            format!("{}x{}", rmat.nrows(), rmat.ncols()),
        ));
    }
    if !is_finite(rmat) {
        return Err(Error::NonFinite);
    }
    let herm = (rmat - rmat.adjoint()).norm();
    if herm > tol {
        return Err(Error::ConstraintViolated(format!("R not Hermitian (defect {herm:e})")));
    }
    let tr = trace(rmat);
    if (tr - ONE).norm() > tol {
        return Err(Error::ConstraintViolated(format!("tr R = {tr} != 1")));
    }
    // S∘R = R∘S  ⇔  conj(R) = D R D with D = diag(1, −1, −1, −1)
    let sign = |i: usize| if i == 0 { 1.0 } else { -1.0 };
    let comm = CMatrix::from_fn(4, 4, |i, j| rmat[(i, j)].conj() - rmat[(i, j)] * (sign(i) * sign(j))).norm();
    if comm > tol {
        return Err(Error::ConstraintViolated(format!(
            "R does not commute with S (defect {comm:e})"
        )));
    }
    let (values, vectors) = hermitian_eigen(rmat);
    if values[0] < -tol {
        return Err(Error::ConstraintViolated(format!(
            "R not positive (min eigenvalue {:e})",
            values[0]
        )));
    }

    // Group nearly equal eigenvalues; each eigenspace is S-invariant.
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let gap = 1e-8 * scale;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..4 {
        match clusters.last_mut() {
            Some(cl) if values[i] - values[*cl.last().unwrap()] <= gap => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let mut out_vals = Vec::with_capacity(4);
    let mut out_vecs: Vec<CVector> = Vec::with_capacity(4);
    for cl in clusters {
        let mut candidates: Vec<CVector> = Vec::with_capacity(2 * cl.len());
        for &i in &cl {
            let phi: CVector = vectors.column(i).into_owned();
            let sphi = antiunitary_s(&phi);
            candidates.push(&phi + &sphi);
            candidates.push((&phi - &sphi) * I);
        }
        // Pivoted Gram-Schmidt. S-invariant vectors have real mutual inner
        // products, so real combinations of them stay S-invariant.
        let mut chosen: Vec<CVector> = Vec::with_capacity(cl.len());
        for _ in 0..cl.len() {
            let mut best: Option<(f64, CVector)> = None;
            for cand in &candidates {
                let mut v = cand.clone();
                for _ in 0..2 {
                    for b in out_vecs.iter().chain(chosen.iter()) {
                        let p = b.dotc(&v).re;
                        v -= b * r(p);
                    }
                }
                let nv = v.norm();
                if best.as_ref().is_none_or(|(bn, _)| nv > *bn) {
                    best = Some((nv, v));
                }
            }
            let (nv, v) = best.expect("candidates nonempty");
            if nv < 1e-6 {
                return Err(Error::ConstraintViolated("eigenspace has no S-invariant basis".into()));
            }
            chosen.push(v.unscale(nv));
        }
        for v in chosen {
            let lambda = v.dotc(&(rmat * &v)).re.max(0.0);
            out_vals.push(lambda);
            out_vecs.push(v);
        }
    }
    Ok((out_vals, OrthoBasis { vectors: out_vecs }))
}
