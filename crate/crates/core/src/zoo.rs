//! Named example channels with known correctability properties.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;

use crate::channel::{Dilation, KrausChannel, Povm};
use crate::corrigibility::Witnesses;
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, c, identity, kron, outer, partial_trace_first, r, CMatrix, CVector, OrthoBasis, I, ONE, ZERO,
};
use crate::search::minimize_on_sphere;

/// Angular momentum matrices of one irreducible spin representation in the
/// basis `|s⟩, |s−1⟩, …, |−s⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub two_s: u32,
    /// `[J₁, J₂, J₃]`
    pub j: [CMatrix; 3],
}

impl SpinOperators {
    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    pub fn raising(&self) -> CMatrix {
        &self.j[0] + &self.j[1] * I
    }

    pub fn lowering(&self) -> CMatrix {
        &self.j[0] - &self.j[1] * I
    }

    /// `J₁² + J₂² + J₃²`
    pub fn casimir(&self) -> CMatrix {
        self.j
            .iter()
            .map(|m| m * m)
            .fold(CMatrix::zeros(self.dim(), self.dim()), |a, b| a + b)
    }
}

/// Spin label such as `1/2`, `1`, `3/2`.
pub fn spin_label(two_s: u32) -> String {
    if two_s.is_multiple_of(2) {
        (two_s / 2).to_string()
    } else {
        format!("{two_s}/2")
    }
}

/// Spin-`s` operators for `two_s = 2s ≥ 1`.
pub fn spin_operators(two_s: u32) -> Result<SpinOperators> {
    if two_s == 0 {
        return Err(Error::InvalidSpin(two_s));
    }
    let n = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let m = |k: usize| s - k as f64;
    let mut jp = CMatrix::zeros(n, n);
    for k in 1..n {
        // ⟨m+1|J₊|m⟩ with |m⟩ at index k and |m+1⟩ at k−1
        jp[(k - 1, k)] = r((s * (s + 1.0) - m(k) * (m(k) + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let j1 = (&jp + &jm).scale(0.5);
    let j2 = (&jp - &jm) * c(0.0, -0.5);
    let j3 = CMatrix::from_diagonal(&CVector::from_iterator(n, (0..n).map(|k| r(m(k)))));
    Ok(SpinOperators { two_s, j: [j1, j2, j3] })
}

/// Spin-1 matrices `⟨i|J_β|j⟩ = iε_{ijβ}` on the Cartesian basis.
pub fn spin1_cartesian() -> [CMatrix; 3] {
    let eps = |i: usize, j: usize, k: usize| -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    [0, 1, 2].map(|b| CMatrix::from_fn(3, 3, |i, j| c(0.0, eps(i, j, b))))
}

/// Unitary `W` with `W J_β W† = −K_β`, where `J` are the standard spin-1
/// matrices and `K` those of [`spin1_cartesian`].
///
/// The Cartesian matrices obey `[K₁, K₂] = −iK₃`; they are the negatives of the
/// rotated standard generators, so both yield the same Casimir channel.
pub fn spin1_cartesian_unitary() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    // Columns: Cartesian vectors in the |1⟩, |0⟩, |−1⟩ basis.
    let cmat = CMatrix::from_row_slice(3, 3, &[r(-h), c(0.0, h), ZERO, ZERO, ZERO, ONE, r(h), c(0.0, h), ZERO]);
    cmat.adjoint()
}

/// `ρ ↦ Σ_α J_α ρ J_α / (s(s+1))`
pub fn casimir_channel(two_s: u32) -> Result<KrausChannel> {
    let sp = spin_operators(two_s)?;
    let s = sp.s();
    let w = 1.0 / (s * (s + 1.0)).sqrt();
    Ok(KrausChannel::new(sp.j.iter().map(|m| m.scale(w)).collect())?
        .with_label(format!("casimir-{}", spin_label(two_s))))
}

/// Spin-1 Casimir channel with the Cartesian Kraus operators `K_β/√2`.
pub fn casimir1_cartesian_channel() -> KrausChannel {
    KrausChannel::new(spin1_cartesian().iter().map(|m| m.scale(FRAC_1_SQRT_2)).collect())
        .expect("3x3 operators")
        .with_label("casimir-1-cartesian")
}

/// Recombination taking `J_α/√(s(s+1))` to `J₊/√(2s(s+1))`, `J₋/√(2s(s+1))`, `J₃/√(s(s+1))`.
pub fn casimir_ladder_unitary() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(3, 3, &[r(h), c(0.0, h), ZERO, r(h), c(0.0, -h), ZERO, ZERO, ZERO, ONE])
}

/// Recombination of [`casimir1_cartesian_channel`] whose operators satisfy
/// `t_α†t_α = (1 − |φ_α⟩⟨φ_α|)/2`: `u_{αβ} = ⟨β|φ_α⟩`.
pub fn casimir1_classical_unitary(basis: &OrthoBasis) -> CMatrix {
    CMatrix::from_fn(3, 3, |a, b| basis.vector(a)[b])
}

/// The four-vector basis `(|3/2⟩ ± i|1/2⟩)/√2, |−1/2⟩, |−3/2⟩`.
pub fn casimir32_witness_basis() -> OrthoBasis {
    let h = FRAC_1_SQRT_2;
    let v = |a: [Complex64; 4]| CVector::from_row_slice(&a);
    OrthoBasis::new(
        vec![
            v([r(h), c(0.0, h), ZERO, ZERO]),
            v([r(h), c(0.0, -h), ZERO, ZERO]),
            v([ZERO, ZERO, ONE, ZERO]),
            v([ZERO, ZERO, ZERO, ONE]),
        ],
        1e-14,
    )
    .expect("orthonormal by construction")
}

/// Smallest value of `‖offdiag(Φ†t†tΦ)‖_F` over unit `ξ ∈ C³`, `t = Σ ξ_β J_β`
/// for spin 3/2 in the witness basis `Φ`.
pub fn casimir32_witness_floor(restarts: usize, steps: usize, seed: u64) -> f64 {
    let sp = spin_operators(3).expect("valid spin");
    let phi = casimir32_witness_basis().matrix();
    let js: Vec<CMatrix> = sp.j.iter().map(|m| m * &phi).collect();
    let (f, _) = minimize_on_sphere(
        3,
        |xi: &CVector| {
            let t = js
                .iter()
                .zip(xi.iter())
                .fold(CMatrix::zeros(4, 4), |acc, (m, z)| acc + m * *z);
            let mut d = t.adjoint() * &t;
            d.fill_diagonal(ZERO);
            let td = &t * &d;
            let g = CVector::from_iterator(3, js.iter().map(|m| (m.adjoint() * &td).trace().scale(4.0)));
            (d.norm_squared(), g)
        },
        restarts,
        steps,
        seed,
    );
    f.max(0.0).sqrt()
}

/// Projectors onto the standard basis: `ρ ↦ Σ_β B_β ρ B_β`.
pub fn von_neumann_channel(n: usize) -> KrausChannel {
    let b = OrthoBasis::standard(n);
    KrausChannel::new((0..n).map(|i| b.projector(i)).collect())
        .expect("nonempty")
        .with_label(format!("von-neumann-{n}"))
}

/// `u_{αβ} = e^{2πiαβ/N}/√N`
pub fn fourier_unitary(n: usize) -> CMatrix {
    let w = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |a, b| {
        Complex64::from_polar(w, TAU * ((a * b) % n) as f64 / n as f64)
    })
}

/// `ρ ↦ tr(ρ)·1/N` with Kraus `t_{j,k} = (1/N) Σ_x e^{2πixk/N}|x+j⟩⟨x|`,
/// listed with index `j·N + k`.
pub fn depolarizing_channel(n: usize) -> KrausChannel {
    let nf = n as f64;
    let mut kraus = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let mut t = CMatrix::zeros(n, n);
            for x in 0..n {
                t[((x + j) % n, x)] = Complex64::from_polar(1.0 / nf, TAU * ((x * k) % n) as f64 / nf);
            }
            kraus.push(t);
        }
    }
    KrausChannel::new(kraus)
        .expect("nonempty")
        .with_label(format!("depolarizing-{n}"))
}

/// `ρ ↦ |ψ⟩⟨ψ| tr ρ` with Kraus `|ψ⟩⟨φ_α|`.
pub fn collapsing_channel_in_basis(psi: &CVector, basis: &OrthoBasis) -> Result<KrausChannel> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidChannel(format!("collapse target has norm {n}")));
    }
    KrausChannel::new(basis.vectors().iter().map(|phi| outer(psi, phi)).collect())
}

/// Collapsing channel from `C^dim_in` onto `psi`, Kraus over the standard basis.
pub fn collapsing_channel(dim_in: usize, psi: &CVector) -> Result<KrausChannel> {
    Ok(collapsing_channel_in_basis(psi, &OrthoBasis::standard(dim_in))?.with_label(format!("collapsing-{dim_in}")))
}

/// Block-diagonal Kraus operators `t_α = ⊕_i t_α^{(i)}`; shorter lists are
/// padded with zeros.
pub fn direct_sum(blocks: &[KrausChannel]) -> Result<KrausChannel> {
    if blocks.is_empty() {
        return Err(Error::InvalidChannel("empty direct sum".into()));
    }
    let n = blocks.iter().map(KrausChannel::len).max().unwrap_or(0);
    let rows: usize = blocks.iter().map(KrausChannel::dim_out).sum();
    let cols: usize = blocks.iter().map(KrausChannel::dim_in).sum();
    let padded: Vec<Vec<CMatrix>> = blocks.iter().map(|b| b.padded(n)).collect();
    let kraus = (0..n)
        .map(|a| {
            let mut t = CMatrix::zeros(rows, cols);
            let (mut r0, mut c0) = (0, 0);
            for (b, ops) in blocks.iter().zip(&padded) {
                t.view_mut((r0, c0), (b.dim_out(), b.dim_in())).copy_from(&ops[a]);
                r0 += b.dim_out();
                c0 += b.dim_in();
            }
            t
        })
        .collect();
    KrausChannel::new(kraus)
}

/// `t_α = |ψ⟩⟨α|` on `C³` with `ψ = |0⟩`.
pub fn sum_collapse_block() -> KrausChannel {
    collapsing_channel(3, &basis_vector(3, 0))
        .expect("unit vector")
        .with_label("sum-collapse-block")
}

/// `t_α = Σ_β ū_{βα}·(2/√15)·J_β` for spin 3/2. With `ξ, ζ` the first two rows
/// of `u`, `Σ ξ_α t_α ∝ J₁` and `Σ ζ_α t_α ∝ J₂`.
pub fn sum_spin_block(u: &CMatrix) -> Result<KrausChannel> {
    let d = crate::linalg::isometry_defect(u);
    if u.shape() != (3, 3) || d > 1e-10 {
        return Err(Error::NotUnitary(d));
    }
    let sp = spin_operators(3)?;
    let w = 2.0 / 15f64.sqrt();
    let kraus = (0..3)
        .map(|a| (0..3).fold(CMatrix::zeros(4, 4), |acc, b| acc + &sp.j[b] * (u[(b, a)].conj() * w)))
        .collect();
    Ok(KrausChannel::new(kraus)?.with_label("sum-spin32-block"))
}

/// The collapse block and the spin-3/2 block built from the identity unitary.
pub fn sum_blocks() -> (KrausChannel, KrausChannel) {
    (
        sum_collapse_block(),
        sum_spin_block(&identity(3)).expect("identity is unitary"),
    )
}

/// `‖[|Σ ξ_α t_α|², |Σ ζ_α t_α|²]‖_F`
pub fn recombination_commutator(ch: &KrausChannel, xi: &CVector, zeta: &CVector) -> f64 {
    let mix = |w: &CVector| {
        ch.kraus()
            .iter()
            .zip(w.iter())
            .fold(CMatrix::zeros(ch.dim_out(), ch.dim_in()), |acc, (t, z)| acc + t * *z)
    };
    let (a, b) = (mix(xi), mix(zeta));
    let (pa, pb) = (a.adjoint() * &a, b.adjoint() * &b);
    (&pa * &pb - &pb * &pa).norm()
}

/// Bases fixing the interaction of the mixed-environment qubit example; each
/// basis lists `(v₀, v₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedEnvBases {
    pub chi: OrthoBasis,
    pub psi: OrthoBasis,
    pub xi: OrthoBasis,
    pub eta: OrthoBasis,
}

impl Default for MixedEnvBases {
    fn default() -> Self {
        let s = OrthoBasis::standard(2);
        Self {
            chi: s.clone(),
            psi: s.clone(),
            xi: s.clone(),
            eta: s,
        }
    }
}

/// Qubit system coupled to a qubit environment in the maximally mixed state.
#[derive(Debug, Clone)]
pub struct MixedEnvironment {
    pub bases: MixedEnvBases,
    /// Interaction on system ⊗ environment.
    pub unitary: CMatrix,
    pub rho0: CMatrix,
}

fn zeta(eta: &OrthoBasis) -> [CVector; 2] {
    let (e0, e1) = (eta.vector(0), eta.vector(1));
    [(e1 - e0).scale(FRAC_1_SQRT_2), (e1 + e0).scale(FRAC_1_SQRT_2)]
}

impl MixedEnvironment {
    pub fn new(bases: MixedEnvBases) -> Self {
        let k = |a: &CVector, b: &CVector| {
            kron(
                &CMatrix::from_column_slice(2, 1, a.as_slice()),
                &CMatrix::from_column_slice(2, 1, b.as_slice()),
            )
        };
        let [z0, z1] = zeta(&bases.eta);
        let (chi, psi, xi, eta) = (&bases.chi, &bases.psi, &bases.xi, &bases.eta);
        let pairs = [
            (k(chi.vector(1), xi.vector(1)), k(psi.vector(1), eta.vector(1))),
            (k(chi.vector(1), xi.vector(0)), k(psi.vector(0), &z1)),
            (k(chi.vector(0), xi.vector(1)), k(psi.vector(1), eta.vector(0))),
            (k(chi.vector(0), xi.vector(0)), k(psi.vector(0), &z0)),
        ];
        let unitary = pairs
            .iter()
            .fold(CMatrix::zeros(4, 4), |acc, (inp, out)| acc + out * inp.adjoint());
        Self {
            bases,
            unitary,
            rho0: identity(2).scale(0.5),
        }
    }

    /// Dilation with the pure environment vector `ξ₁`.
    pub fn dilation(&self) -> Dilation {
        Dilation::new(
            self.unitary.clone(),
            self.bases.xi.vector(1).clone(),
            (2, 2, 2, 2),
            1e-12,
        )
        .expect("unitary by construction")
    }

    /// Channel for the pure environment `|ξ₁⟩⟨ξ₁|`.
    pub fn pure_channel(&self) -> KrausChannel {
        self.dilation().native_kraus().with_label("mixed-env-pure")
    }

    /// `tr_K(U(ρ ⊗ ρ₀)U†)`
    pub fn channel_action(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.dilation().channel_action(rho, &self.rho0)
    }

    /// `tr_K(U(ρ ⊗ ρ₀)U†(1 ⊗ M))`
    pub fn selective_action(&self, rho: &CMatrix, effect: &CMatrix) -> Result<CMatrix> {
        self.dilation().selective_action(rho, &self.rho0, effect)
    }

    /// Normalized overlap `tr(T_α(B₁)T_α(B₀)) / (tr T_α(B₁)·tr T_α(B₀))` for
    /// each POVM element; `None` where an output vanishes.
    pub fn outcome_overlaps(&self, basis: &OrthoBasis, povm: &Povm) -> Result<Vec<Option<f64>>> {
        povm.elements()
            .iter()
            .map(|m| {
                let a = self.selective_action(&basis.projector(1), m)?;
                let b = self.selective_action(&basis.projector(0), m)?;
                let (ta, tb) = (a.trace().re, b.trace().re);
                Ok((ta > 1e-14 && tb > 1e-14).then(|| (&a * &b).trace().re / (ta * tb)))
            })
            .collect()
    }
}

/// One branch of the two-party decoding protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccBranch {
    /// Encoded value.
    pub x: usize,
    /// System outcome.
    pub alpha: usize,
    /// Probability of `alpha` given `x`.
    pub probability: f64,
    /// Normalized environment state after `alpha`.
    pub env_state: CMatrix,
    /// Probability that the environment measurement returns `x`.
    pub success: f64,
    /// Most likely decoded value.
    pub decoded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoccTranscript {
    /// Per system outcome, the environment basis measured for decoding.
    pub decode_bases: Vec<OrthoBasis>,
    pub branches: Vec<LoccBranch>,
    /// Average probability of decoding correctly over `x`.
    pub success_rate: f64,
}

/// Measure the system in `{ψ_α}`, then the environment in a basis chosen from
/// `α`, and decode the value `x` of an input `B_x ⊗ 1/2`.
pub fn locc_decode(ex: &MixedEnvironment, basis: &OrthoBasis) -> Result<LoccTranscript> {
    let mut env: Vec<Vec<CMatrix>> = vec![Vec::new(); 2];
    for x in 0..2 {
        let joint = &ex.unitary * kron(&basis.projector(x), &ex.rho0) * ex.unitary.adjoint();
        for (alpha, states) in env.iter_mut().enumerate() {
            let f = kron(&ex.bases.psi.projector(alpha), &identity(2));
            states.push(partial_trace_first(&(&joint * f), 2, 2));
        }
    }
    let mut decode_bases = Vec::with_capacity(2);
    for states in &env {
        // Dominant eigenvector of the x = 0 state, completed to a basis.
        let (_, vecs) = crate::linalg::hermitian_eigen(&states[0]);
        let v0 = vecs.column(1).into_owned();
        let v1 = vecs.column(0).into_owned();
        decode_bases.push(OrthoBasis::new(vec![v0, v1], 1e-10)?);
    }
    let mut branches = Vec::new();
    let mut total = 0.0;
    for x in 0..2 {
        for alpha in 0..2 {
            let state = &env[alpha][x];
            let p = state.trace().re;
            let probs: Vec<f64> = (0..2)
                .map(|y| (decode_bases[alpha].projector(y) * state).trace().re / p.max(1e-300))
                .collect();
            let decoded = if probs[1] > probs[0] { 1 } else { 0 };
            total += p * probs[x];
            branches.push(LoccBranch {
                x,
                alpha,
                probability: p,
                env_state: state.unscale(p.max(1e-300)),
                success: probs[x],
                decoded,
            });
        }
    }
    Ok(LoccTranscript {
        decode_bases,
        branches,
        success_rate: total / 2.0,
    })
}

/// A named channel with the facts the classifier should agree with.
#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub channel: KrausChannel,
    pub witnesses: Witnesses,
}

pub const ZOO_NAMES: &[&str] = &[
    "von-neumann-2",
    "von-neumann-3",
    "depolarizing-2",
    "depolarizing-3",
    "casimir-1/2",
    "casimir-1",
    "casimir-1-cartesian",
    "casimir-3/2",
    "casimir-2",
    "collapsing-2",
    "collapsing-3",
    "sum-collapse-block",
    "sum-spin32-block",
    "mixed-env-pure",
];

fn casimir_witnesses(two_s: u32) -> Witnesses {
    let mut w = Witnesses {
        s_basis: Some(OrthoBasis::standard(two_s as usize + 1)),
        ..Witnesses::default()
    };
    if two_s == 2 {
        w.not_q = Some("recombinations are antisymmetric in a Cartesian basis and thus singular in dimension 3".into());
    }
    if two_s == 3 {
        w.not_a_basis = Some(casimir32_witness_basis());
    }
    w
}

pub fn zoo_entry(name: &str) -> Result<ZooEntry> {
    let unknown = || Error::Parse(format!("unknown zoo channel '{name}'"));
    let key = ZOO_NAMES.iter().copied().find(|n| *n == name).ok_or_else(unknown)?;
    let (description, channel, witnesses) = match key {
        "von-neumann-2" => (
            "projective measurement on a qubit",
            von_neumann_channel(2),
            Witnesses::default(),
        ),
        "von-neumann-3" => (
            "projective measurement on a qutrit",
            von_neumann_channel(3),
            Witnesses::default(),
        ),
        "depolarizing-2" => (
            "completely depolarizing qubit channel",
            depolarizing_channel(2),
            Witnesses::default(),
        ),
        "depolarizing-3" => (
            "completely depolarizing qutrit channel",
            depolarizing_channel(3),
            Witnesses::default(),
        ),
        "casimir-1/2" => ("spin-1/2 Casimir channel", casimir_channel(1)?, casimir_witnesses(1)),
        "casimir-1" => ("spin-1 Casimir channel", casimir_channel(2)?, casimir_witnesses(2)),
        "casimir-1-cartesian" => (
            "spin-1 Casimir channel, Cartesian Kraus form",
            casimir1_cartesian_channel(),
            {
                let mut w = casimir_witnesses(2);
                w.s_basis = None;
                w
            },
        ),
        "casimir-3/2" => ("spin-3/2 Casimir channel", casimir_channel(3)?, casimir_witnesses(3)),
        "casimir-2" => ("spin-2 Casimir channel", casimir_channel(4)?, casimir_witnesses(4)),
        "collapsing-2" => (
            "qubit collapse onto |0>",
            collapsing_channel(2, &basis_vector(2, 0))?,
            Witnesses::default(),
        ),
        "collapsing-3" => (
            "qutrit collapse onto |0>",
            collapsing_channel(3, &basis_vector(3, 0))?,
            Witnesses::default(),
        ),
        "sum-collapse-block" => (
            "collapse block of the direct-sum construction",
            sum_collapse_block(),
            Witnesses::default(),
        ),
        "sum-spin32-block" => (
            "spin-3/2 block of the direct-sum construction",
            sum_blocks().1,
            casimir_witnesses(3),
        ),
        "mixed-env-pure" => (
            "qubit interaction with the environment in a pure state",
            MixedEnvironment::new(MixedEnvBases::default()).pure_channel(),
            Witnesses::default(),
        ),
        _ => return Err(unknown()),
    };
    Ok(ZooEntry {
        name: key,
        description,
        channel: channel.with_label(key),
        witnesses,
    })
}

/// Witnesses of the zoo channel named by the label of `ch`, provided `ch`
/// acts like that channel; none otherwise.
pub fn witnesses_for(ch: &KrausChannel) -> Witnesses {
    ch.label()
        .and_then(|l| zoo_entry(l).ok())
        .filter(|e| crate::channel::action_distance(&e.channel, ch).is_ok_and(|d| d <= 1e-10))
        .map(|e| e.witnesses)
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::action_distance;
    use crate::corrigibility::{classical_residual, is_doubly_stochastic, quantum_criterion};
    use crate::linalg::{pauli, random_density, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    #[test]
    fn spin_algebra() {
        for two_s in 1..=5 {
            let sp = spin_operators(two_s).unwrap();
            let [j1, j2, j3] = &sp.j;
            assert!((comm(j1, j2) - j3 * I).norm() < 1e-12);
            assert!((comm(j2, j3) - j1 * I).norm() < 1e-12);
            assert!((comm(j3, j1) - j2 * I).norm() < 1e-12);
            let s = sp.s();
            assert!((sp.casimir() - identity(sp.dim()).scale(s * (s + 1.0))).norm() < 1e-12);
        }
        assert_eq!(spin_operators(0), Err(Error::InvalidSpin(0)));
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let sp = spin_operators(1).unwrap();
        for i in 0..3 {
            assert!((&sp.j[i] - pauli(i + 1).scale(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn cartesian_spin1_relation() {
        let sp = spin_operators(2).unwrap();
        let k = spin1_cartesian();
        let w = spin1_cartesian_unitary();
        assert!(crate::linalg::isometry_defect(&w) < 1e-14);
        for (b, (j, kb)) in sp.j.iter().zip(&k).enumerate() {
            assert!((&w * j * w.adjoint() + kb).norm() < 1e-14, "component {b}");
            assert!((&kb.transpose() + kb).norm() < 1e-15);
        }
        let cas: CMatrix = k.iter().map(|m| m * m).sum();
        assert!((cas - identity(3).scale(2.0)).norm() < 1e-14);
        assert!(
            action_distance(&casimir1_cartesian_channel(), &{
                let ch = casimir_channel(2).unwrap();
                KrausChannel::new(ch.kraus().iter().map(|t| &w * t * w.adjoint()).collect()).unwrap()
            })
            .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn casimir_channels_are_doubly_stochastic() {
        for two_s in 1..=4 {
            let ch = casimir_channel(two_s).unwrap();
            assert!(ch.validate(1e-12).passes);
            assert!(is_doubly_stochastic(&ch, 1e-12).unwrap());
        }
    }

    #[test]
    fn casimir_half_action() {
        let ch = casimir_channel(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            let expect = identity(2).scale(2.0 / 3.0) - rho.scale(1.0 / 3.0);
            assert!((ch.apply(&rho).unwrap() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn ladder_form_is_diagonal_in_j3_basis() {
        for two_s in 1..=4 {
            let ch = casimir_channel(two_s).unwrap();
            let ladder = ch.recombine(&casimir_ladder_unitary(), 1e-14).unwrap();
            let sp = spin_operators(two_s).unwrap();
            let s = sp.s();
            let n = 2.0 * s * (s + 1.0);
            assert!((&ladder.kraus()[0] - sp.raising().unscale(n.sqrt())).norm() < 1e-14);
            assert!((&ladder.kraus()[1] - sp.lowering().unscale(n.sqrt())).norm() < 1e-14);
            assert!(classical_residual(&ladder, &OrthoBasis::standard(sp.dim())).unwrap() < 1e-12);
        }
    }

    #[test]
    fn casimir1_analytic_classical_form() {
        let ch = casimir1_cartesian_channel();
        for seed in 0..5 {
            let basis = OrthoBasis::seeded(3, seed);
            let t = ch.recombine(&casimir1_classical_unitary(&basis), 1e-12).unwrap();
            for (a, op) in t.kraus().iter().enumerate() {
                let expect = (identity(3) - basis.projector(a)).scale(0.5);
                assert!((op.adjoint() * op - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn casimir32_witness_floor_is_positive() {
        let floor = casimir32_witness_floor(16, 400, 1);
        assert!(floor > 1e-3, "floor {floor}");
    }

    #[test]
    fn von_neumann_fourier_form() {
        let ch = von_neumann_channel(3);
        assert!(classical_residual(&ch, &OrthoBasis::standard(3)).unwrap() < 1e-15);
        let f = ch.recombine(&fourier_unitary(3), 1e-12).unwrap();
        assert!(quantum_criterion(&f, 1e-12).holds);
        assert_eq!(von_neumann_channel(1).kraus()[0], identity(1));
    }

    #[test]
    fn depolarizing_properties() {
        for n in 2..=3 {
            let ch = depolarizing_channel(n);
            assert!(ch.validate(1e-12).passes);
            let q = quantum_criterion(&ch, 1e-12);
            assert!(q.holds);
            for w in q.weights {
                assert!((w - 1.0 / (n * n) as f64).abs() < 1e-14);
            }
            let rho = random_density(n, &mut ChaCha8Rng::seed_from_u64(n as u64));
            assert!((ch.apply(&rho).unwrap() - identity(n).unscale(n as f64)).norm() < 1e-14);
        }
        assert!((depolarizing_channel(2).fidelity().unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn collapsing_properties() {
        let psi = CVector::from_vec(vec![r(0.6), c(0.0, 0.8)]);
        let basis = OrthoBasis::seeded(3, 4);
        let ch = collapsing_channel_in_basis(&psi, &basis).unwrap();
        assert!(ch.validate(1e-12).passes);
        for (a, t) in ch.kraus().iter().enumerate() {
            assert_eq!(crate::linalg::range_basis(t, 1e-10).ncols(), 1);
            assert!((t.adjoint() * t - basis.projector(a)).norm() < 1e-14);
        }
        let embed = collapsing_channel(1, &psi).unwrap();
        assert!(quantum_criterion(&embed, 1e-14).holds);
        assert!(collapsing_channel(2, &psi.scale(2.0)).is_err());
    }

    #[test]
    fn direct_sum_blocks() {
        let (b0, b1) = sum_blocks();
        let sum = direct_sum(&[b0.clone(), b1.clone()]).unwrap();
        assert_eq!((sum.dim_in(), sum.dim_out(), sum.len()), (7, 7, 3));
        assert!(sum.validate(1e-12).passes);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (r0, r1) = (
            random_density(3, &mut rng).scale(0.3),
            random_density(4, &mut rng).scale(0.7),
        );
        let mut rho = CMatrix::zeros(7, 7);
        rho.view_mut((0, 0), (3, 3)).copy_from(&r0);
        rho.view_mut((3, 3), (4, 4)).copy_from(&r1);
        let out = sum.apply(&rho).unwrap();
        assert!((out.view((0, 0), (3, 3)) - b0.apply(&r0).unwrap()).norm() < 1e-14);
        assert!((out.view((3, 3), (4, 4)) - b1.apply(&r1).unwrap()).norm() < 1e-14);
        assert!(out.view((0, 3), (3, 4)).norm() < 1e-14);
    }

    #[test]
    fn spin_block_commutator_obstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = random_unitary(3, &mut rng);
        let block = sum_spin_block(&u).unwrap();
        assert!(block.validate(1e-12).passes);
        let xi = u.row(0).transpose();
        let zeta = u.row(1).transpose();
        let w = 2.0 / 15f64.sqrt();
        let sp = spin_operators(3).unwrap();
        let j1 = sp.j[0].scale(w);
        let mixed = block
            .kraus()
            .iter()
            .zip(xi.iter())
            .fold(CMatrix::zeros(4, 4), |a, (t, z)| a + t * *z);
        assert!((mixed - j1).norm() < 1e-13);
        assert!(recombination_commutator(&block, &xi, &zeta) > 0.1);
        // The collapse block commutes for orthogonal pairs.
        assert!(recombination_commutator(&sum_collapse_block(), &xi, &zeta) < 1e-14);
    }

    #[test]
    fn mixed_env_mixed_environment_depolarizes() {
        let ex = MixedEnvironment::new(MixedEnvBases::default());
        assert!(crate::linalg::isometry_defect(&ex.unitary) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            assert!((ex.channel_action(&rho).unwrap() - identity(2).scale(0.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn mixed_env_outputs_never_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ex = MixedEnvironment::new(MixedEnvBases {
            chi: OrthoBasis::random(2, &mut rng),
            psi: OrthoBasis::random(2, &mut rng),
            xi: OrthoBasis::random(2, &mut rng),
            eta: OrthoBasis::random(2, &mut rng),
        });
        for _ in 0..16 {
            let basis = OrthoBasis::random(2, &mut rng);
            let povm = Povm::from_basis(&OrthoBasis::random(2, &mut rng));
            for o in ex.outcome_overlaps(&basis, &povm).unwrap().into_iter().flatten() {
                assert!(o > 1e-6, "overlap {o}");
            }
        }
    }

    #[test]
    fn mixed_env_pure_environment_keeps_classical_information() {
        let ex = MixedEnvironment::new(MixedEnvBases::default());
        let dil = ex.dilation();
        let pure = dil.env_state();
        let povm = Povm::from_basis(&ex.bases.eta);
        for m in povm.elements() {
            let a = dil
                .selective_action(&OrthoBasis::standard(2).projector(1), &pure, m)
                .unwrap();
            let b = dil
                .selective_action(&OrthoBasis::standard(2).projector(0), &pure, m)
                .unwrap();
            assert!((&a * &b).trace().norm() < 1e-14);
        }
    }

    #[test]
    fn locc_protocol_decodes_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ex = MixedEnvironment::new(MixedEnvBases::default());
        for k in 0..8 {
            let basis = if k == 0 {
                OrthoBasis::standard(2)
            } else {
                OrthoBasis::random(2, &mut rng)
            };
            let tr = locc_decode(&ex, &basis).unwrap();
            assert!((tr.success_rate - 1.0).abs() < 1e-12);
            for br in &tr.branches {
                assert_eq!(br.decoded, br.x);
                assert!((br.probability - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn locc_environment_states_match_rotated_bases() {
        let basis = OrthoBasis::seeded(2, 9);
        let ex = MixedEnvironment::new(MixedEnvBases::default());
        let tr = locc_decode(&ex, &basis).unwrap();
        let (chi, eta) = (&ex.bases.chi, &ex.bases.eta);
        let eta_t = |x: usize| {
            eta.vector(1) * chi.vector(1).dotc(basis.vector(x)) + eta.vector(0) * chi.vector(0).dotc(basis.vector(x))
        };
        let [z0, z1] = zeta(eta);
        let zeta_t = |x: usize| &z1 * chi.vector(1).dotc(basis.vector(x)) + &z0 * chi.vector(0).dotc(basis.vector(x));
        for br in &tr.branches {
            let v = if br.alpha == 1 { eta_t(br.x) } else { zeta_t(br.x) };
            assert!((&br.env_state - outer(&v, &v)).norm() < 1e-12);
        }
    }

    #[test]
    fn zoo_entries_are_valid() {
        for name in ZOO_NAMES {
            let e = zoo_entry(name).unwrap();
            assert_eq!(e.channel.label(), Some(*name));
            assert!(e.channel.validate(1e-12).passes, "{name}");
        }
        assert!(matches!(zoo_entry("nope"), Err(Error::Parse(_))));
        let c32 = casimir_channel(3).unwrap();
        assert!(witnesses_for(&c32).not_a_basis.is_some());
        let recombined = casimir_channel(3).unwrap().recombine(&identity(3), 1e-12).unwrap();
        assert!(witnesses_for(&recombined).not_a_basis.is_some());
        let wrong = KrausChannel::identity(4).with_label("casimir-3/2");
        assert_eq!(witnesses_for(&wrong), Witnesses::default());
        assert_eq!(witnesses_for(&KrausChannel::identity(2)), Witnesses::default());
    }
}
