//! Channels in Kraus form and their environment picture.
//!
//! A [`KrausChannel`] is an ordered list of operators `t_α : H₁ → H₂`. The
//! ordering matters: the list doubles as the choice of measurement on the
//! environment, one outcome per Kraus operator. [`dilate`] builds a unitary
//! coupling `U : H₁⊗K₁ → H₂⊗K₂` with a pure initial environment state, and
//! [`measurement_from_decomposition`] finds the environment POVM that realizes
//! any other Kraus list of the same channel as its outcomes.
//!
//! Tensor products are ordered system ⊗ environment, with composite index
//! `i·dim(K) + k`.

use nalgebra::SVD;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    hermitian_eigen, identity, is_finite, isometry_defect, kron, min_eigenvalue, orthonormal_complement, outer,
    partial_trace_second, trace, CMatrix, CVector, ONE, ZERO,
};

/// Completely positive map `ρ ↦ Σ_α t_α ρ t_α†` given by its Kraus operators.
///
/// Construction only checks shapes; trace preservation is reported by
/// [`KrausChannel::validate`] so the same type can carry the non-normalized
/// pieces of an instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    label: Option<String>,
}

/// Outcome of [`KrausChannel::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `‖Σ t†t − 1‖_F`
    pub tp_defect: f64,
    /// Smallest eigenvalue of the Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub passes: bool,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("Kraus operators must be nonempty".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::InvalidChannel(format!(
                    "kraus[{i}] is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if !is_finite(k) {
                return Err(Error::InvalidChannel(format!("kraus[{i}] has non-finite entries")));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// The identity channel on `C^d`.
    pub fn identity(d: usize) -> Self {
        Self::new(vec![identity(d)])
            .expect("identity is well formed")
            .with_label("identity")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// Kraus list extended with zero operators to length `n` (never truncated).
    pub fn padded(&self, n: usize) -> Vec<CMatrix> {
        let mut out = self.kraus.clone();
        while out.len() < n {
            out.push(CMatrix::zeros(self.dim_out, self.dim_in));
        }
        out
    }

    /// `Σ_α t_α† t_α`
    pub fn effect_sum(&self) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, t| acc + t.adjoint() * t)
    }

    /// `Σ_α t_α t_α†`, the image of the identity.
    pub fn image_of_identity(&self) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, t| {
                acc + t * t.adjoint()
            })
    }

    pub fn tp_defect(&self) -> f64 {
        (self.effect_sum() - identity(self.dim_in)).norm()
    }

    pub fn validate(&self, tol: f64) -> Diagnostics {
        let tp_defect = self.tp_defect();
        let choi_min_eigenvalue = min_eigenvalue(&self.choi());
        Diagnostics {
            tp_defect,
            choi_min_eigenvalue,
            passes: tp_defect <= tol && choi_min_eigenvalue >= -tol,
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(dim_mismatch(
                "apply",
                format!("{0}x{0}", self.dim_in),
                format!("{}x{}", rho.nrows(), rho.ncols()),
            ));
        }
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, t| {
                acc + t * rho * t.adjoint()
            })
    }

    /// `(T⊗id)(|Ω⟩⟨Ω|)` with `Ω = Σ_i |i⟩⊗|i⟩ / √d`; output factor first.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut out = CMatrix::zeros(dout * din, dout * din);
        for t in &self.kraus {
            // vec(t) with index a·din + i = t[a, i]
            let v = CVector::from_fn(dout * din, |idx, _| t[(idx / din, idx % din)]);
            out += outer(&v, &v);
        }
        out.unscale(din as f64)
    }

    /// Kraus list `t_α = Σ_β u_{αβ} s_β` after zero-padding to the side of `u`.
    pub fn recombine(&self, u: &CMatrix, tol: f64) -> Result<KrausChannel> {
        let n = u.nrows();
        if u.ncols() != n || n < self.len() {
            return Err(dim_mismatch(
                "recombine",
                format!("square unitary of side >= {}", self.len()),
                format!("{}x{}", u.nrows(), u.ncols()),
            ));
        }
        let defect = isometry_defect(u);
        if !defect.is_finite() || defect > tol {
            return Err(Error::NotUnitary(defect));
        }
        let s = self.padded(n);
        let kraus = (0..n)
            .map(|a| {
                s.iter()
                    .enumerate()
                    .fold(CMatrix::zeros(self.dim_out, self.dim_in), |acc, (b, sb)| {
                        acc + sb * u[(a, b)]
                    })
            })
            .collect();
        let mut ch = KrausChannel::new(kraus)?;
        ch.label = self.label.clone();
        Ok(ch)
    }

    /// `(1/d²) Σ_α |tr t_α|²`
    pub fn fidelity(&self) -> Result<f64> {
        channel_fidelity(self)
    }
}

/// Channel fidelity `⟨Ω, (T⊗id)(|Ω⟩⟨Ω|) Ω⟩` from the Kraus traces.
pub fn channel_fidelity(ch: &KrausChannel) -> Result<f64> {
    if !ch.is_square() {
        return Err(dim_mismatch("channel_fidelity", ch.dim_in, ch.dim_out));
    }
    let d = ch.dim_in as f64;
    Ok(ch.kraus.iter().map(|t| trace(t).norm_sqr()).sum::<f64>() / (d * d))
}

/// Channel fidelity evaluated as the maximally entangled expectation of the Choi matrix.
pub fn channel_fidelity_from_choi(ch: &KrausChannel) -> Result<f64> {
    if !ch.is_square() {
        return Err(dim_mismatch("channel_fidelity_from_choi", ch.dim_in, ch.dim_out));
    }
    let d = ch.dim_in;
    let choi = ch.choi();
    let omega =
        CVector::from_fn(d * d, |idx, _| if idx / d == idx % d { ONE } else { ZERO }).unscale((d as f64).sqrt());
    Ok(omega.dotc(&(choi * &omega)).re)
}

/// Frobenius distance between Choi matrices; zero iff the channels coincide.
pub fn action_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out) {
        return Err(dim_mismatch(
            "action_distance",
            format!("{}->{}", a.dim_in, a.dim_out),
            format!("{}->{}", b.dim_in, b.dim_out),
        ));
    }
    Ok((a.choi() - b.choi()).norm())
}

/// Unitary relating two Kraus lists of one channel.
#[derive(Debug, Clone)]
pub struct Connection {
    /// `b_α = Σ_β u_{αβ} a_β` (both lists zero-padded to the side of `u`).
    pub unitary: CMatrix,
    /// `(Σ_α ‖b_α − Σ_β u_{αβ} a_β‖²_F)^{1/2}`
    pub residual: f64,
}

/// Finds `u` with `b_α = Σ_β u_{αβ} a_β`.
///
/// Solves the unitary Procrustes problem on vectorized Kraus operators: with
/// `A`, `B` holding `vec(a_β)`, `vec(b_α)` as columns, the minimizer of
/// `‖A uᵀ − B‖` over unitaries is the polar factor of `A†B`.
pub fn connecting_unitary(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<Connection> {
    let dist = action_distance(a, b)?;
    if dist > tol {
        return Err(Error::NotSameChannel(dist));
    }
    let n = a.len().max(b.len());
    let (din, dout) = (a.dim_in, a.dim_out);
    let stack =
        |ops: Vec<CMatrix>| -> CMatrix { CMatrix::from_fn(dout * din, n, |idx, col| ops[col][(idx / din, idx % din)]) };
    let am = stack(a.padded(n));
    let bm = stack(b.padded(n));
    let svd = SVD::new(am.adjoint() * &bm, true, true);
    let p = svd.u.expect("requested U");
    let q_t = svd.v_t.expect("requested V^T");
    let unitary = (p * q_t).transpose();
    let residual = (&am * unitary.transpose() - &bm).norm();
    if residual > tol {
        return Err(Error::NoUnitarySolution(residual));
    }
    Ok(Connection { unitary, residual })
}

/// Unitary coupling to an environment, `U : H₁⊗K₁ → H₂⊗K₂`, with a pure
/// initial environment vector.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub unitary: CMatrix,
    pub psi0: CVector,
    pub dim_in: usize,
    pub dim_env_in: usize,
    pub dim_out: usize,
    pub dim_env_out: usize,
}

impl Dilation {
    pub fn new(
        unitary: CMatrix,
        psi0: CVector,
        (dim_in, dim_env_in, dim_out, dim_env_out): (usize, usize, usize, usize),
        tol: f64,
    ) -> Result<Self> {
        let side_in = dim_in * dim_env_in;
        let side_out = dim_out * dim_env_out;
        if side_in != side_out || unitary.shape() != (side_out, side_in) {
            return Err(dim_mismatch(
                "dilation",
                format!("{side_out}x{side_in} square"),
                format!("{}x{}", unitary.nrows(), unitary.ncols()),
            ));
        }
        if psi0.len() != dim_env_in {
            return Err(dim_mismatch("dilation psi0", dim_env_in, psi0.len()));
        }
        let defect = isometry_defect(&unitary);
        if defect > tol {
            return Err(Error::NotUnitary(defect));
        }
        if (psi0.norm() - 1.0).abs() > tol {
            return Err(Error::ConstraintViolated(format!("|psi0| = {} != 1", psi0.norm())));
        }
        Ok(Self {
            unitary,
            psi0,
            dim_in,
            dim_env_in,
            dim_out,
            dim_env_out,
        })
    }

    pub fn env_state(&self) -> CMatrix {
        outer(&self.psi0, &self.psi0)
    }

    /// `(1⊗⟨e|) U (1⊗|k⟩)` as an operator `H₁ → H₂`.
    fn slice(&self, bra_env_out: &CVector, ket_env_in: &CVector) -> CMatrix {
        let (k1, k2) = (self.dim_env_in, self.dim_env_out);
        CMatrix::from_fn(self.dim_out, self.dim_in, |j, i| {
            let mut acc = ZERO;
            for b in 0..k2 {
                let eb = bra_env_out[b].conj();
                if eb == ZERO {
                    continue;
                }
                for k in 0..k1 {
                    acc += eb * self.unitary[(j * k2 + b, i * k1 + k)] * ket_env_in[k];
                }
            }
            acc
        })
    }

    /// Kraus operators `s_β` with `⟨ψ, s_β φ⟩ = ⟨ψ⊗χ_β, U φ⊗Ψ₀⟩` for the standard basis `{χ_β}` of `K₂`.
    pub fn native_kraus(&self) -> KrausChannel {
        let ops = (0..self.dim_env_out)
            .map(|b| self.slice(&crate::linalg::basis_vector(self.dim_env_out, b), &self.psi0))
            .collect();
        KrausChannel::new(ops).expect("slices share dimensions")
    }

    /// `tr_{K₂}[U(ρ⊗ρ₀)U†]`
    pub fn channel_action(&self, rho: &CMatrix, rho0: &CMatrix) -> Result<CMatrix> {
        self.selective_action(rho, rho0, &identity(self.dim_env_out))
    }

    /// `tr_{K₂}[U(ρ⊗ρ₀)U†(1⊗M)]`, evaluated literally on the composite space.
    pub fn selective_action(&self, rho: &CMatrix, rho0: &CMatrix, effect: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(dim_mismatch("dilation input state", self.dim_in, rho.nrows()));
        }
        if rho0.shape() != (self.dim_env_in, self.dim_env_in) {
            return Err(dim_mismatch("environment state", self.dim_env_in, rho0.nrows()));
        }
        if effect.shape() != (self.dim_env_out, self.dim_env_out) {
            return Err(dim_mismatch("environment effect", self.dim_env_out, effect.nrows()));
        }
        let joint = &self.unitary * kron(rho, rho0) * self.unitary.adjoint();
        let weighted = joint * kron(&identity(self.dim_out), effect);
        Ok(partial_trace_second(&weighted, self.dim_out, self.dim_env_out))
    }
}

/// Stinespring dilation with `U(φ⊗Ψ₀) = Σ_α (t_α φ)⊗χ_α`.
///
/// `dim K₂` is the Kraus count padded with zero operators until
/// `dim H₂ · dim K₂` is divisible by `dim H₁`; `dim K₁` is the quotient.
/// `Ψ₀` is the first standard basis vector of `K₁`.
pub fn dilate(ch: &KrausChannel) -> Result<Dilation> {
    let (din, dout) = (ch.dim_in, ch.dim_out);
    let mut k2 = ch.len();
    while !(dout * k2).is_multiple_of(din) {
        k2 += 1;
    }
    let k1 = dout * k2 / din;
    let side = dout * k2;
    let ops = ch.padded(k2);

    let mut frame = CMatrix::zeros(side, din);
    for i in 0..din {
        for j in 0..dout {
            for (a, t) in ops.iter().enumerate() {
                frame[(j * k2 + a, i)] = t[(j, i)];
            }
        }
    }
    let defect = isometry_defect(&frame);
    if defect > 1e-8 {
        return Err(Error::InvalidChannel(format!(
            "Kraus list is not trace preserving (defect {defect:e})"
        )));
    }
    let completion = orthonormal_complement(&frame);
    let mut unitary = CMatrix::zeros(side, side);
    let mut next = 0;
    for i in 0..din {
        for k in 0..k1 {
            let col = i * k1 + k;
            if k == 0 {
                unitary.set_column(col, &frame.column(i));
            } else {
                unitary.set_column(col, &completion.column(next));
                next += 1;
            }
        }
    }
    let psi0 = crate::linalg::basis_vector(k1, 0);
    Dilation::new(unitary, psi0, (din, k1, dout, k2), 1e-8)
}

/// Positive operators on the output environment summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::ConstraintViolated("empty POVM".into()))?;
        let n = first.nrows();
        for (i, m) in elements.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(dim_mismatch(
                    "povm element",
                    format!("{n}x{n}"),
                    format!("{}x{}", m.nrows(), m.ncols()),
                ));
            }
            let lo = min_eigenvalue(m);
            let herm = (m - m.adjoint()).norm();
            if lo < -tol || herm > tol {
                return Err(Error::ConstraintViolated(format!(
                    "povm element {i} is not positive (min eigenvalue {lo:e})"
                )));
            }
        }
        let povm = Self { elements };
        let defect = povm.completeness_defect();
        if defect > tol {
            return Err(Error::ConstraintViolated(format!(
                "povm elements do not sum to identity (defect {defect:e})"
            )));
        }
        Ok(povm)
    }

    /// Rank-one POVM `{|μ_α⟩⟨μ_α|}` from the vectors of an orthonormal basis.
    pub fn from_basis(basis: &crate::linalg::OrthoBasis) -> Self {
        Self {
            elements: (0..basis.len()).map(|i| basis.projector(i)).collect(),
        }
    }

    /// The trivial measurement `{1}`.
    pub fn trivial(n: usize) -> Self {
        Self {
            elements: vec![identity(n)],
        }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        (self.elements.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m) - identity(n)).norm()
    }
}

/// Environment POVM realizing the Kraus list `target` as measurement outcomes.
///
/// With `s_β` the dilation's native Kraus operators and `u` the connecting
/// unitary `t_α = Σ_β u_{αβ} s_β`, the elements are `|μ_α⟩⟨μ_α|` with
/// `μ_α = Σ_β ū_{αβ} χ_β`. When `target` is shorter than the padded length,
/// the surplus elements (which belong to zero Kraus operators) are folded
/// into the last outcome.
pub fn measurement_from_decomposition(dil: &Dilation, target: &KrausChannel, tol: f64) -> Result<Povm> {
    let native = dil.native_kraus();
    let conn = connecting_unitary(&native, target, tol)?;
    let k2 = dil.dim_env_out;
    let n = conn.unitary.nrows();
    let mu: Vec<CVector> = (0..n)
        .map(|a| CVector::from_fn(k2, |b, _| conn.unitary[(a, b)].conj()))
        .collect();
    let keep = target.len();
    let mut elements: Vec<CMatrix> = mu.iter().take(keep).map(|m| outer(m, m)).collect();
    for m in mu.iter().skip(keep) {
        let last = elements.last_mut().expect("target nonempty");
        *last += outer(m, m);
    }
    Povm::new(elements, tol.max(1e-9))
}

/// Decomposition `T = Σ_α T_α` of a channel into completely positive pieces.
#[derive(Debug, Clone)]
pub struct Instrument {
    pub outcomes: Vec<(String, KrausChannel)>,
}

impl Instrument {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcome(&self, alpha: usize) -> &KrausChannel {
        &self.outcomes[alpha].1
    }

    /// `Σ_α T_α` as a single Kraus list.
    pub fn total(&self) -> KrausChannel {
        let ops = self
            .outcomes
            .iter()
            .flat_map(|(_, ch)| ch.kraus.iter().cloned())
            .collect();
        KrausChannel::new(ops).expect("outcomes share dimensions")
    }

    pub fn completeness_defect(&self) -> f64 {
        self.total().tp_defect()
    }
}

/// `T_α(ρ) = tr_{K₂}[U(ρ⊗ρ₀)U†(1⊗M_α)]`, each outcome in exact Kraus form.
///
/// With `ρ₀ = Σ_k p_k |k⟩⟨k|` and `M_α = Σ_m μ_m |e_m⟩⟨e_m|`, the Kraus
/// operators of `T_α` are `√(p_k μ_m) (1⊗⟨e_m|) U (1⊗|k⟩)`.
pub fn instrument_from(dil: &Dilation, povm: &Povm, rho0: &CMatrix) -> Result<Instrument> {
    if rho0.shape() != (dil.dim_env_in, dil.dim_env_in) {
        return Err(dim_mismatch("environment state", dil.dim_env_in, rho0.nrows()));
    }
    if povm.dim() != dil.dim_env_out {
        return Err(dim_mismatch("povm dimension", dil.dim_env_out, povm.dim()));
    }
    const CUT: f64 = 1e-15;
    let (p, kets) = hermitian_eigen(rho0);
    let mut outcomes = Vec::with_capacity(povm.len());
    for (alpha, m) in povm.elements.iter().enumerate() {
        let (mu, effs) = hermitian_eigen(m);
        let mut ops = Vec::new();
        for (k, &pk) in p.iter().enumerate() {
            if pk <= CUT {
                continue;
            }
            let ket: CVector = kets.column(k).into_owned();
            for (mi, &wm) in mu.iter().enumerate() {
                if wm <= CUT {
                    continue;
                }
                let bra: CVector = effs.column(mi).into_owned();
                ops.push(dil.slice(&bra, &ket).scale((pk * wm).sqrt()));
            }
        }
        if ops.is_empty() {
            ops.push(CMatrix::zeros(dil.dim_out, dil.dim_in));
        }
        outcomes.push((alpha.to_string(), KrausChannel::new(ops)?));
    }
    Ok(Instrument { outcomes })
}
