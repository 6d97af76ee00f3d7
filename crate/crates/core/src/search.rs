//! Random-restart descent over Kraus recombinations.
//!
//! Objectives have the form `f(u) = Σ_α ‖P(s_α†s_α)‖²_F` where `s = u·t` is the
//! recombined Kraus list and `P` is an orthogonal projection on Hermitian
//! matrices (traceless part, off-diagonal part in a basis, ...). Iterates are
//! moved by left multiplication with `exp(K)` for skew-Hermitian `K`, which
//! keeps `u` exactly unitary. Directions come from the analytic Lie-algebra
//! gradient combined Polak-Ribière style, with Armijo backtracking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{hermitian_eigen, identity, random_unitary, CMatrix, CVector, I};

/// Tuning of the unitary-group search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Residual `f(u)^{1/2}` at or below which a recombination counts as found.
    pub tol: f64,
    pub restarts: usize,
    /// Iteration cap per restart.
    pub steps: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restarts: 50,
            steps: 500,
            seed: 0,
        }
    }
}

/// Best recombination found by a search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Recombination unitary of the best restart.
    pub unitary: CMatrix,
    /// `f(u)^{1/2}` at `unitary`.
    pub residual: f64,
    pub found: bool,
    /// Restarts actually run.
    pub restarts_used: usize,
}

impl SearchOutcome {
    pub fn success(&self) -> Option<&CMatrix> {
        self.found.then_some(&self.unitary)
    }
}

/// Restarts executed together before checking for success; fixed so results
/// do not depend on the thread count.
const CHUNK: usize = 8;

/// Minimizes `Σ_α ‖P(s_α†s_α)‖²` over `s = u·kraus`, `u` unitary of side `kraus.len()`.
///
/// Restart 0 starts at the identity, the others at Haar-random unitaries
/// seeded from `(opts.seed, index)`.
pub(crate) fn minimize<P>(kraus: &[CMatrix], project: P, opts: &SearchOptions) -> SearchOutcome
where
    P: Fn(&CMatrix) -> CMatrix + Sync,
{
    let n = kraus.len();
    let mut best: Option<(f64, usize, CMatrix)> = None;
    let mut used = 0;
    let mut start = 0;
    while start < opts.restarts.max(1) {
        let end = (start + CHUNK).min(opts.restarts.max(1));
        let results: Vec<(f64, usize, CMatrix)> = (start..end)
            .into_par_iter()
            .map(|idx| {
                let u0 = if idx == 0 {
                    identity(n)
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(idx as u64);
                    random_unitary(n, &mut rng)
                };
                let (f, u) = descend(kraus, &project, u0, opts);
                (f.sqrt(), idx, u)
            })
            .collect();
        used = end;
        for cand in results {
            let better = match &best {
                None => true,
                Some((res, idx, _)) => cand.0 < *res || (cand.0 == *res && cand.1 < *idx),
            };
            if better {
                best = Some(cand);
            }
        }
        if best.as_ref().is_some_and(|b| b.0 <= opts.tol) {
            break;
        }
        start = end;
    }
    let (residual, _, unitary) = best.expect("at least one restart");
    SearchOutcome {
        unitary,
        residual,
        found: residual <= opts.tol,
        restarts_used: used,
    }
}

fn mix(u: &CMatrix, kraus: &[CMatrix]) -> Vec<CMatrix> {
    let (rows, cols) = kraus[0].shape();
    (0..u.nrows())
        .map(|a| {
            kraus
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(rows, cols), |acc, (b, t)| acc + t * u[(a, b)])
        })
        .collect()
}

fn objective<P: Fn(&CMatrix) -> CMatrix>(s: &[CMatrix], project: &P) -> f64 {
    s.iter().map(|t| project(&(t.adjoint() * t)).norm_squared()).sum()
}

/// Steepest-descent direction in the Lie algebra: the skew-Hermitian `K` with
/// `d/dε f(exp(εX)u) = −4⟨K, X⟩` for every skew-Hermitian `X`.
fn descent_direction<P: Fn(&CMatrix) -> CMatrix>(s: &[CMatrix], project: &P) -> CMatrix {
    let n = s.len();
    let d: Vec<CMatrix> = s.iter().map(|t| project(&(t.adjoint() * t))).collect();
    // M_{αγ} = tr(D_α s_α† s_γ)
    let m = CMatrix::from_fn(n, n, |a, g| {
        let left = &d[a] * s[a].adjoint();
        left.component_mul(&s[g].transpose()).sum()
    });
    (m.transpose() - m.map(|z| z.conj())).scale(0.5)
}

/// `exp(tK)` for skew-Hermitian `K`.
fn expm_skew(k: &CMatrix, t: f64) -> CMatrix {
    // K = −iH with H = iK Hermitian
    let h = k * I;
    let (vals, vecs) = hermitian_eigen(&h);
    let phases = CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| num_complex::Complex64::from_polar(1.0, -t * l)),
    );
    &vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint()
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn descend<P: Fn(&CMatrix) -> CMatrix>(
    kraus: &[CMatrix],
    project: &P,
    mut u: CMatrix,
    opts: &SearchOptions,
) -> (f64, CMatrix) {
    let target = (0.01 * opts.tol).powi(2);
    let mut s = mix(&u, kraus);
    let mut f = objective(&s, project);
    let mut grad = descent_direction(&s, project);
    let mut dir = grad.clone();
    let mut step = 0.1;
    let mut stalled = 0;
    for _ in 0..opts.steps {
        if f <= target {
            break;
        }
        let g2 = inner(&grad, &grad);
        if g2 < 1e-30 {
            break;
        }
        let mut slope = 4.0 * inner(&grad, &dir);
        if slope <= 0.0 {
            dir = grad.clone();
            slope = 4.0 * g2;
        }
        // Armijo backtracking along exp(t·dir)
        let mut t = step * 2.0;
        let mut accepted = None;
        for _ in 0..60 {
            let e = expm_skew(&dir, t);
            let s_new = mix(&e, &s);
            let f_new = objective(&s_new, project);
            if f_new <= f - 1e-4 * t * slope {
                accepted = Some((e, s_new, f_new));
                break;
            }
            t *= 0.5;
        }
        let Some((e, s_new, f_new)) = accepted else {
            break;
        };
        step = t;
        let progress = (f - f_new) / f.max(1e-300);
        stalled = if progress < 1e-10 { stalled + 1 } else { 0 };
        if stalled >= 20 {
            u = &e * &u;
            break;
        }
        u = &e * &u;
        s = s_new;
        f = f_new;
        let grad_new = descent_direction(&s, project);
        let beta = (inner(&grad_new, &(&grad_new - &grad)) / g2).max(0.0);
        dir = &grad_new + &dir * num_complex::Complex64::new(beta, 0.0);
        grad = grad_new;
    }
    // Re-evaluate on the accumulated unitary to report a consistent residual.
    let f_final = objective(&mix(&u, kraus), project);
    (f_final, u)
}

/// Minimizes a smooth function over unit vectors in `C^n` with random restarts.
///
/// `value_grad` returns the value and the Euclidean gradient `g` such that
/// `δf = Re⟨g, δξ⟩`. Returns the smallest value reached.
pub fn minimize_on_sphere<F>(n: usize, value_grad: F, restarts: usize, steps: usize, seed: u64) -> (f64, CVector)
where
    F: Fn(&CVector) -> (f64, CVector) + Sync,
{
    let results: Vec<(f64, usize, CVector)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let mut x = crate::linalg::random_unit_vector(n, &mut rng);
            let (mut f, mut g) = value_grad(&x);
            let mut step = 0.1;
            for _ in 0..steps {
                let radial = x.dotc(&g).re;
                let gt = &g - &x * num_complex::Complex64::new(radial, 0.0);
                let gn2 = gt.norm_squared();
                if gn2 < 1e-28 {
                    break;
                }
                let mut t = step * 2.0;
                let mut moved = false;
                for _ in 0..60 {
                    let cand = &x - &gt * num_complex::Complex64::new(t, 0.0);
                    let cand = cand.unscale(cand.norm());
                    let (fc, gc) = value_grad(&cand);
                    if fc <= f - 1e-4 * t * gn2 {
                        x = cand;
                        f = fc;
                        g = gc;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !moved {
                    break;
                }
                step = t;
            }
            (f, idx, x)
        })
        .collect();
    let (f, _, x) = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    (f, x)
}
