//! Correctability criteria, witnessing decompositions and the Q/DS/A/S/N classifier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{connecting_unitary, KrausChannel};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    hermitian_eigen, identity, pauli, s_invariant_eigenbasis, trace, zero_diagonal_basis, CMatrix, CVector, OrthoBasis,
    DEFAULT_TOL, ZERO,
};
use crate::search::{minimize, SearchOptions, SearchOutcome};

/// Outcome of the isometry test `t_α†t_α = c_α·1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCriterion {
    pub holds: bool,
    /// `c_α = tr(t_α†t_α)/dim_in`
    pub weights: Vec<f64>,
    /// `‖t_α†t_α − c_α·1‖_F`
    pub residuals: Vec<f64>,
}

impl QuantumCriterion {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn quantum_criterion(ch: &KrausChannel, tol: f64) -> QuantumCriterion {
    let d = ch.dim_in();
    let mut weights = Vec::with_capacity(ch.len());
    let mut residuals = Vec::with_capacity(ch.len());
    for t in ch.kraus() {
        let g = t.adjoint() * t;
        let c = trace(&g).re / d as f64;
        weights.push(c);
        residuals.push((g - identity(d).scale(c)).norm());
    }
    let holds = residuals.iter().all(|&r| r <= tol);
    QuantumCriterion {
        holds,
        weights,
        residuals,
    }
}

fn check_basis(ch: &KrausChannel, basis: &OrthoBasis) -> Result<()> {
    if basis.dim() != ch.dim_in() {
        return Err(dim_mismatch("basis dimension", ch.dim_in(), basis.dim()));
    }
    Ok(())
}

/// `max_α max_{x≠y} |⟨φ_x, t_α†t_α φ_y⟩|`
pub fn classical_residual(ch: &KrausChannel, basis: &OrthoBasis) -> Result<f64> {
    check_basis(ch, basis)?;
    let phi = basis.matrix();
    let mut worst: f64 = 0.0;
    for t in ch.kraus() {
        let g = phi.adjoint() * t.adjoint() * t * &phi;
        for x in 0..g.nrows() {
            for y in 0..g.ncols() {
                if x != y {
                    worst = worst.max(g[(x, y)].norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Whether every `t_α†t_α` is diagonal in `basis` within `tol`.
pub fn classical_criterion(ch: &KrausChannel, basis: &OrthoBasis, tol: f64) -> Result<bool> {
    Ok(classical_residual(ch, basis)? <= tol)
}

/// `‖Σ_α t_α t_α† − 1‖_F`
pub fn unitality_defect(ch: &KrausChannel) -> Result<f64> {
    if !ch.is_square() {
        return Err(dim_mismatch("doubly stochastic test", ch.dim_in(), ch.dim_out()));
    }
    Ok((ch.image_of_identity() - identity(ch.dim_out())).norm())
}

pub fn is_doubly_stochastic(ch: &KrausChannel, tol: f64) -> Result<bool> {
    Ok(unitality_defect(ch)? <= tol)
}

fn traceless_part(g: &CMatrix) -> CMatrix {
    let n = g.nrows();
    g - identity(n) * (trace(g) / n as f64)
}

/// Searches for a recombination of the given Kraus list whose operators are
/// all proportional to isometries.
pub fn find_q_decomposition(ch: &KrausChannel, opts: &SearchOptions) -> SearchOutcome {
    minimize(ch.kraus(), traceless_part, opts)
}

fn off_diagonal_projector(basis: &OrthoBasis) -> impl Fn(&CMatrix) -> CMatrix + Sync {
    let phi = basis.matrix();
    move |g: &CMatrix| {
        let mut inner = phi.adjoint() * g * &phi;
        inner.fill_diagonal(ZERO);
        &phi * inner * phi.adjoint()
    }
}

/// Searches for a recombination whose `t_α†t_α` are all diagonal in `basis`.
///
/// Qubit inputs are solved directly by [`qubit_classical_decomposition`].
pub fn find_classical_decomposition(
    ch: &KrausChannel,
    basis: &OrthoBasis,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    check_basis(ch, basis)?;
    if ch.dim_in() == 2 {
        let unitary = qubit_classical_decomposition_seeded(ch, basis, opts.seed)?;
        let project = off_diagonal_projector(basis);
        let residual = ch
            .recombine(&unitary, 1e-8)?
            .kraus()
            .iter()
            .map(|t| project(&(t.adjoint() * t)).norm_squared())
            .sum::<f64>()
            .sqrt();
        return Ok(SearchOutcome {
            unitary,
            residual,
            found: residual <= opts.tol,
            restarts_used: 0,
        });
    }
    Ok(minimize(ch.kraus(), off_diagonal_projector(basis), opts))
}

/// Recombination unitary making a qubit channel classical in `basis`.
pub fn qubit_classical_decomposition(ch: &KrausChannel, basis: &OrthoBasis) -> Result<CMatrix> {
    qubit_classical_decomposition_seeded(ch, basis, 0)
}

fn qubit_classical_decomposition_seeded(ch: &KrausChannel, basis: &OrthoBasis, seed: u64) -> Result<CMatrix> {
    if ch.dim_in() != 2 {
        return Err(dim_mismatch("qubit classical decomposition", 2, ch.dim_in()));
    }
    check_basis(ch, basis)?;
    let (phi0, phi1) = (basis.vector(0), basis.vector(1));
    let s = ch.kraus();
    let n = s.len();
    let x = CMatrix::from_fn(n, n, |a, b| phi0.dotc(&(s[a].adjoint() * &s[b] * phi1)));
    let e = zero_diagonal_basis(&x, DEFAULT_TOL, seed)?;
    // ⟨φ₀, t_α†t_α φ₁⟩ = w†Xw for w = row α of u, so rows are the basis vectors.
    Ok(e.matrix().transpose())
}

/// Expansion `T(ρ) = Σ_{ij} R_{ij} σ_i ρ σ_j` of a doubly stochastic qubit channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficientMatrix {
    pub matrix: CMatrix,
    pub tp_residual: f64,
    pub ds_residual: f64,
    /// `‖conj(R) − D R D‖_F` with `D = diag(1, −1, −1, −1)`.
    pub symmetry_residual: f64,
}

pub fn pauli_coefficient_matrix(ch: &KrausChannel, tol: f64) -> Result<PauliCoefficientMatrix> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Err(dim_mismatch(
            "Pauli coefficient matrix",
            "2x2 channel",
            format!("{}x{}", ch.dim_out(), ch.dim_in()),
        ));
    }
    let tp_residual = ch.tp_defect();
    let ds_residual = unitality_defect(ch)?;
    if tp_residual > tol {
        return Err(Error::ConstraintViolated(format!(
            "not trace preserving (defect {tp_residual:e})"
        )));
    }
    if ds_residual > tol {
        return Err(Error::ConstraintViolated(format!(
            "not unital (defect {ds_residual:e})"
        )));
    }
    let sigma: Vec<CMatrix> = (0..4).map(pauli).collect();
    let mut matrix = CMatrix::zeros(4, 4);
    for t in ch.kraus() {
        let a = CVector::from_iterator(4, sigma.iter().map(|p| trace(&(p * t)) * 0.5));
        matrix += &a * a.adjoint();
    }
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        4,
        [1.0, -1.0, -1.0, -1.0].map(crate::linalg::r),
    ));
    let symmetry_residual = (matrix.map(|z| z.conj()) - &d * &matrix * &d).norm();
    Ok(PauliCoefficientMatrix {
        matrix,
        tp_residual,
        ds_residual,
        symmetry_residual,
    })
}

/// Kraus list of a doubly stochastic qubit channel made of scaled unitaries.
pub fn qubit_ds_to_q(ch: &KrausChannel, tol: f64) -> Result<KrausChannel> {
    let r = pauli_coefficient_matrix(ch, tol)?;
    let (vals, basis) = s_invariant_eigenbasis(&r.matrix, tol)?;
    let sigma: Vec<CMatrix> = (0..4).map(pauli).collect();
    let kraus: Vec<CMatrix> = vals
        .iter()
        .zip(basis.vectors())
        .rev()
        .filter(|(&v, _)| v > 1e-12)
        .map(|(&v, phi)| {
            let u = sigma
                .iter()
                .zip(phi.iter())
                .fold(CMatrix::zeros(2, 2), |acc, (p, z)| acc + p * *z);
            u.scale(v.sqrt())
        })
        .collect();
    let out = KrausChannel::new(kraus)?;
    Ok(match ch.label() {
        Some(l) => out.with_label(l),
        None => out,
    })
}

/// Analytic facts about a channel that the numerical classifier cannot certify.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Witnesses {
    /// Reason no recombination consists of scaled isometries.
    pub not_q: Option<String>,
    /// Basis in which no recombination is diagonal.
    pub not_a_basis: Option<OrthoBasis>,
    /// Basis known to admit a diagonal recombination.
    pub s_basis: Option<OrthoBasis>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub restarts: usize,
    pub steps: usize,
    pub basis_samples: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        let s = SearchOptions::default();
        Self {
            tol: s.tol,
            restarts: s.restarts,
            steps: s.steps,
            basis_samples: 64,
            seed: s.seed,
        }
    }
}

impl ClassifyOptions {
    fn search(&self, seed: u64) -> SearchOptions {
        SearchOptions {
            tol: self.tol,
            restarts: self.restarts,
            steps: self.steps,
            seed,
        }
    }

    fn derived_seed(&self, stream: u64) -> u64 {
        self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QMethod {
    QubitDoublyStochastic,
    NotUnital,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub holds: bool,
    /// Whether the verdict is a proof rather than a failed search.
    pub certified: bool,
    pub residual: f64,
    pub method: QMethod,
    #[serde(with = "crate::io::opt_matrix")]
    pub unitary: Option<CMatrix>,
    pub restarts_used: usize,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsReport {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AStatus {
    Proved,
    SampledYes,
    No,
    Unknown,
}

impl AStatus {
    pub fn is_yes(self) -> bool {
        matches!(self, AStatus::Proved | AStatus::SampledYes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AReport {
    pub status: AStatus,
    pub evidence: String,
    pub bases_tested: usize,
    pub bases_passed: usize,
    /// Largest best-residual over the tested bases.
    pub worst_residual: f64,
    /// Basis certifying failure, when the status is `no`.
    #[serde(with = "crate::io::opt_basis")]
    pub failing_basis: Option<OrthoBasis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SReport {
    pub holds: bool,
    pub residual: f64,
    pub evidence: String,
    #[serde(with = "crate::io::opt_basis")]
    pub basis: Option<OrthoBasis>,
    #[serde(with = "crate::io::opt_matrix")]
    pub unitary: Option<CMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: Option<String>,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus_count: usize,
    pub q: QReport,
    /// Absent when input and output dimensions differ.
    pub ds: Option<DsReport>,
    pub a: AReport,
    pub s: SReport,
    /// No property above holds.
    pub n_only: bool,
}

impl ClassificationReport {
    /// One-line summary such as `Q ✗ ⇒ A ✓ ⇒ S ✓  DS ✓`.
    pub fn hierarchy_line(&self) -> String {
        let mark = |b: bool| if b { "✓" } else { "✗" };
        let ds = match &self.ds {
            Some(d) => mark(d.holds).to_string(),
            None => "n/a".into(),
        };
        let a = match self.a.status {
            AStatus::Proved => "✓",
            AStatus::SampledYes => "✓ (sampled)",
            AStatus::No => "✗",
            AStatus::Unknown => "?",
        };
        format!(
            "Q {} ⇒ A {} ⇒ S {}  DS {}{}",
            mark(self.q.holds),
            a,
            mark(self.s.holds),
            ds,
            if self.n_only { "  (N only)" } else { "" }
        )
    }
}

pub fn classify(ch: &KrausChannel, opts: &ClassifyOptions) -> ClassificationReport {
    classify_with_witnesses(ch, opts, &Witnesses::default())
}

fn classical_outcome(ch: &KrausChannel, basis: &OrthoBasis, opts: &ClassifyOptions, stream: u64) -> SearchOutcome {
    find_classical_decomposition(ch, basis, &opts.search(opts.derived_seed(stream)))
        .expect("basis dimension checked by caller")
}

pub fn classify_with_witnesses(
    ch: &KrausChannel,
    opts: &ClassifyOptions,
    witnesses: &Witnesses,
) -> ClassificationReport {
    let qubit = ch.dim_in() == 2;
    let ds = ch.is_square().then(|| {
        let residual = unitality_defect(ch).expect("square channel");
        DsReport {
            holds: residual <= opts.tol,
            residual,
        }
    });

    let q = classify_q(ch, opts, witnesses, ds.as_ref());

    let mut a = if q.holds {
        AReport {
            status: AStatus::Proved,
            evidence: "implied by Q".into(),
            bases_tested: 0,
            bases_passed: 0,
            worst_residual: 0.0,
            failing_basis: None,
        }
    } else if qubit {
        AReport {
            status: AStatus::Proved,
            evidence: "qubit input: constructive for every basis".into(),
            bases_tested: 0,
            bases_passed: 0,
            worst_residual: 0.0,
            failing_basis: None,
        }
    } else {
        classify_a(ch, opts, witnesses)
    };

    let s = if q.holds {
        SReport {
            holds: true,
            residual: q.residual,
            evidence: "implied by Q".into(),
            basis: Some(OrthoBasis::standard(ch.dim_in())),
            unitary: q.unitary.clone(),
        }
    } else {
        classify_s(ch, opts, witnesses)
    };

    // Hierarchy: Q ⇒ A ⇒ S.
    if a.status.is_yes() && !s.holds {
        a.status = AStatus::Unknown;
        a.evidence = format!("{}; inconsistent with S search", a.evidence);
    }

    let n_only = !q.holds && !ds.as_ref().is_some_and(|d| d.holds) && !a.status.is_yes() && !s.holds;
    ClassificationReport {
        label: ch.label().map(str::to_string),
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        kraus_count: ch.len(),
        q,
        ds,
        a,
        s,
        n_only,
    }
}

fn classify_q(ch: &KrausChannel, opts: &ClassifyOptions, witnesses: &Witnesses, ds: Option<&DsReport>) -> QReport {
    if let Some(ds) = ds {
        if !ds.holds {
            return QReport {
                holds: false,
                certified: true,
                residual: ds.residual,
                method: QMethod::NotUnital,
                unitary: None,
                restarts_used: 0,
                evidence: "square channel that is not unital".into(),
            };
        }
        if ch.dim_in() == 2 {
            let via = qubit_ds_to_q(ch, opts.tol.max(1e-9)).and_then(|q| {
                let n = ch.len().max(q.len());
                let padded = KrausChannel::new(q.padded(n))?;
                let conn = connecting_unitary(ch, &padded, 1e-8)?;
                let residual = quantum_criterion(&padded, opts.tol).max_residual();
                Ok((conn.unitary, residual))
            });
            if let Ok((unitary, residual)) = via {
                return QReport {
                    holds: true,
                    certified: true,
                    residual,
                    method: QMethod::QubitDoublyStochastic,
                    unitary: Some(unitary),
                    restarts_used: 0,
                    evidence: "doubly stochastic qubit channel".into(),
                };
            }
        }
    }
    let out = find_q_decomposition(ch, &opts.search(opts.derived_seed(1)));
    let evidence = match (&witnesses.not_q, out.found) {
        (_, true) => "recombination found".to_string(),
        (Some(reason), false) => reason.clone(),
        (None, false) => format!("no recombination found in {} restarts", out.restarts_used),
    };
    QReport {
        holds: out.found,
        certified: out.found || witnesses.not_q.is_some(),
        residual: out.residual,
        method: QMethod::Search,
        unitary: out.found.then(|| out.unitary.clone()),
        restarts_used: out.restarts_used,
        evidence,
    }
}

fn classify_a(ch: &KrausChannel, opts: &ClassifyOptions, witnesses: &Witnesses) -> AReport {
    if let Some(basis) = &witnesses.not_a_basis {
        let out = classical_outcome(ch, basis, opts, 2);
        if !out.found {
            return AReport {
                status: AStatus::No,
                evidence: "analytic witness basis admits no diagonal recombination".into(),
                bases_tested: 1,
                bases_passed: 0,
                worst_residual: out.residual,
                failing_basis: Some(basis.clone()),
            };
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.derived_seed(3));
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    for i in 0..opts.basis_samples {
        let basis = OrthoBasis::random(ch.dim_in(), &mut rng);
        let out = classical_outcome(ch, &basis, opts, 1000 + i as u64);
        tested += 1;
        worst = worst.max(out.residual);
        if !out.found {
            return AReport {
                status: AStatus::Unknown,
                evidence: format!("sampled basis {i} not solved by search"),
                bases_tested: tested,
                bases_passed: tested - 1,
                worst_residual: worst,
                failing_basis: None,
            };
        }
    }
    AReport {
        status: if tested > 0 {
            AStatus::SampledYes
        } else {
            AStatus::Unknown
        },
        evidence: format!("{tested} sampled bases solved"),
        bases_tested: tested,
        bases_passed: tested,
        worst_residual: worst,
        failing_basis: None,
    }
}

fn classify_s(ch: &KrausChannel, opts: &ClassifyOptions, witnesses: &Witnesses) -> SReport {
    let d = ch.dim_in();
    let mut candidates: Vec<(String, OrthoBasis)> = Vec::new();
    if let Some(b) = &witnesses.s_basis {
        candidates.push(("witness basis".into(), b.clone()));
    }
    candidates.push(("standard basis".into(), OrthoBasis::standard(d)));
    for (i, t) in ch.kraus().iter().enumerate() {
        let (_, vecs) = hermitian_eigen(&(t.adjoint() * t));
        candidates.push((
            format!("eigenbasis of t{i}*t{i}"),
            OrthoBasis::from_columns_unchecked(&vecs),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.derived_seed(4));
    for i in 0..opts.basis_samples {
        candidates.push((format!("sampled basis {i}"), OrthoBasis::random(d, &mut rng)));
    }
    let mut best = f64::INFINITY;
    for (k, (name, basis)) in candidates.into_iter().enumerate() {
        let out = classical_outcome(ch, &basis, opts, 5000 + k as u64);
        best = best.min(out.residual);
        if out.found {
            return SReport {
                holds: true,
                residual: out.residual,
                evidence: name,
                basis: Some(basis),
                unitary: Some(out.unitary),
            };
        }
    }
    SReport {
        holds: false,
        residual: best,
        evidence: "no candidate basis solved".into(),
        basis: None,
        unitary: None,
    }
}
