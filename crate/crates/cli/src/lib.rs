//! Command drivers and the report format of the `lostfound` binary.

use std::fmt;
use std::path::Path;

use lostfound::channel::{action_distance, connecting_unitary, dilate, KrausChannel};
use lostfound::corrigibility::{
    classical_residual, classify_with_witnesses, find_classical_decomposition, find_q_decomposition,
    is_doubly_stochastic, quantum_criterion, qubit_ds_to_q, ClassificationReport, ClassifyOptions,
};
use lostfound::io::{self, opt_basis, opt_matrix};
use lostfound::linalg::{CMatrix, OrthoBasis};
use lostfound::recovery::{
    classical_recovery, corrected_channel, fidelity_bound, optimal_recovery, quantum_recovery, RecoveryKind,
    RecoveryPlan,
};
use lostfound::search::SearchOptions;
use lostfound::zoo;
use lostfound::Error;
use serde::{Deserialize, Serialize};

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or malformed input, unknown zoo name, unusable arguments.
    Input(String),
    /// Input is not a completely positive trace-preserving map.
    InvalidChannel(String),
    /// The requested correction does not exist for this channel.
    NotCorrectable(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::InvalidChannel(_) => 3,
            CliError::NotCorrectable(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::InvalidChannel(m) => write!(f, "invalid channel: {m}"),
            CliError::NotCorrectable(m) => write!(f, "not correctable: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::DimMismatch { .. } | Error::NotOrthonormal(_) | Error::NonFinite => {
                CliError::Input(e.to_string())
            }
            Error::InvalidChannel(_) => CliError::InvalidChannel(e.to_string()),
            Error::NotQDecomposition(_) | Error::NotClassicalDecomposition(_) | Error::NoUnitarySolution(_) => {
                CliError::NotCorrectable(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// Reads `zoo:<name>` or a channel file.
pub fn load_channel(input: &str) -> Result<KrausChannel, CliError> {
    if let Some(name) = input.strip_prefix("zoo:") {
        return Ok(zoo::zoo_entry(name)?.channel);
    }
    let text = std::fs::read_to_string(Path::new(input)).map_err(|e| CliError::Input(format!("{input}: {e}")))?;
    io::channel_from_json(&text).map_err(|e| CliError::Input(format!("{input}: {e}")))
}

/// Reads `standard` or a basis file for a space of dimension `dim`.
pub fn load_basis(spec: &str, dim: usize) -> Result<OrthoBasis, CliError> {
    if spec == "standard" {
        return Ok(OrthoBasis::standard(dim));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    let basis = io::basis_from_json(&text, 1e-8).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    if basis.dim() != dim {
        return Err(CliError::Input(format!(
            "{spec}: basis dimension {} but channel input dimension {dim}",
            basis.dim()
        )));
    }
    Ok(basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    pub tol: f64,
    pub basis_samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let o = ClassifyOptions::default();
        Self {
            seed: o.seed,
            restarts: o.restarts,
            steps: o.steps,
            tol: o.tol,
            basis_samples: o.basis_samples,
        }
    }
}

impl Settings {
    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            tol: self.tol,
            restarts: self.restarts,
            steps: self.steps,
            basis_samples: self.basis_samples,
            seed: self.seed,
        }
    }

    fn search_options(&self) -> SearchOptions {
        SearchOptions {
            tol: self.tol,
            restarts: self.restarts,
            steps: self.steps,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub label: Option<String>,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus_count: usize,
    pub tp_defect: f64,
    pub choi_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Fidelity of the channel itself.
    pub raw: f64,
    /// Ceiling for the Kraus list used for correction.
    pub bound: f64,
    /// Fidelity of the corrected channel.
    pub corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub mode: RecoveryKind,
    /// Recombination applied to the input Kraus list before recovery.
    #[serde(with = "opt_matrix")]
    pub recombination: Option<CMatrix>,
    #[serde(with = "opt_basis")]
    pub basis: Option<OrthoBasis>,
    pub plan_tp_defect: f64,
    pub corrected_kraus_count: usize,
    /// Quantum: distance of the corrected channel from the identity.
    /// Classical: largest `‖T_corr(B_x) − B_x‖_F`.
    #[serde(default)]
    pub restoration_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub dim_in: usize,
    pub dim_env_in: usize,
    pub dim_out: usize,
    pub dim_env_out: usize,
    pub unitary: io::JsonMatrix,
    pub psi0: io::JsonVector,
    pub unitarity_defect: f64,
    /// Distance between the channel and the one reconstructed from the dilation.
    pub reconstruction_defect: f64,
}

/// Structured result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub channel: ChannelSummary,
    pub settings: Settings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<DilationReport>,
}

impl Report {
    fn new(command: &str, ch: &KrausChannel, settings: &Settings) -> Self {
        let diag = ch.validate(settings.tol);
        Self {
            command: command.into(),
            channel: ChannelSummary {
                label: ch.label().map(str::to_string),
                dim_in: ch.dim_in(),
                dim_out: ch.dim_out(),
                kraus_count: ch.len(),
                tp_defect: diag.tp_defect,
                choi_min_eigenvalue: diag.choi_min_eigenvalue,
            },
            settings: *settings,
            classification: None,
            fidelity: None,
            recovery: None,
            dilation: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    /// Human-readable lines for the terminal.
    pub fn summary(&self) -> String {
        let c = &self.channel;
        let mut lines = vec![format!(
            "{}: {} -> {}, {} Kraus operators",
            c.label.as_deref().unwrap_or("channel"),
            c.dim_in,
            c.dim_out,
            c.kraus_count
        )];
        if let Some(cl) = &self.classification {
            lines.push(cl.hierarchy_line());
            lines.push(format!("  Q: {} (residual {:.3e})", cl.q.evidence, cl.q.residual));
            lines.push(format!("  A: {}", cl.a.evidence));
            lines.push(format!("  S: {}", cl.s.evidence));
        }
        if let Some(r) = &self.recovery {
            let mode = match r.mode {
                RecoveryKind::Quantum => "quantum",
                RecoveryKind::Classical => "classical",
                RecoveryKind::Optimal => "optimal",
            };
            let mut line = format!("recovery ({mode}): plan TP defect {:.3e}", r.plan_tp_defect);
            if let Some(d) = r.restoration_defect {
                line.push_str(&format!(", restoration defect {d:.3e}"));
            }
            lines.push(line);
        }
        if let Some(f) = &self.fidelity {
            lines.push(format!(
                "fidelity: raw {:.12}  bound {:.12}  corrected {:.12}",
                f.raw, f.bound, f.corrected
            ));
        }
        if let Some(d) = &self.dilation {
            lines.push(format!(
                "dilation: ({} x {}) -> ({} x {}), unitarity defect {:.3e}",
                d.dim_in, d.dim_env_in, d.dim_out, d.dim_env_out, d.unitarity_defect
            ));
        }
        lines.join("\n")
    }
}

fn require_valid(ch: &KrausChannel, tol: f64) -> Result<(), CliError> {
    let diag = ch.validate(tol);
    if !diag.passes {
        return Err(CliError::InvalidChannel(format!(
            "trace-preservation defect {:.3e}, smallest Choi eigenvalue {:.3e}",
            diag.tp_defect, diag.choi_min_eigenvalue
        )));
    }
    Ok(())
}

pub fn classify_command(ch: &KrausChannel, settings: &Settings) -> Result<Report, CliError> {
    require_valid(ch, settings.tol)?;
    let witnesses = zoo::witnesses_for(ch);
    let mut report = Report::new("classify", ch, settings);
    report.classification = Some(classify_with_witnesses(ch, &settings.classify_options(), &witnesses));
    Ok(report)
}

/// Chooses a recombination of `ch` whose operators are scaled isometries.
fn q_form(ch: &KrausChannel, settings: &Settings) -> Result<(KrausChannel, Option<CMatrix>), CliError> {
    if quantum_criterion(ch, settings.tol).holds {
        return Ok((ch.clone(), None));
    }
    if ch.dim_in() == 2 && ch.dim_out() == 2 && is_doubly_stochastic(ch, settings.tol)? {
        let q = qubit_ds_to_q(ch, settings.tol.max(1e-9))?;
        let n = ch.len().max(q.len());
        let q = KrausChannel::new(q.padded(n))?;
        let conn = connecting_unitary(ch, &q, 1e-8)?;
        let t = ch.recombine(&conn.unitary, 1e-8)?;
        return Ok((t, Some(conn.unitary)));
    }
    let out = find_q_decomposition(ch, &settings.search_options());
    if !out.found {
        return Err(CliError::NotCorrectable(format!(
            "no Kraus recombination of scaled isometries found (best residual {:.3e} after {} restarts)",
            out.residual, out.restarts_used
        )));
    }
    Ok((ch.recombine(&out.unitary, 1e-8)?, Some(out.unitary)))
}

fn classical_form(
    ch: &KrausChannel,
    basis: &OrthoBasis,
    settings: &Settings,
) -> Result<(KrausChannel, Option<CMatrix>), CliError> {
    if classical_residual(ch, basis)? <= settings.tol {
        return Ok((ch.clone(), None));
    }
    let out = find_classical_decomposition(ch, basis, &settings.search_options())?;
    if !out.found {
        return Err(CliError::NotCorrectable(format!(
            "no Kraus recombination diagonal in the basis found (best residual {:.3e} after {} restarts)",
            out.residual, out.restarts_used
        )));
    }
    Ok((ch.recombine(&out.unitary, 1e-8)?, Some(out.unitary)))
}

fn fidelities(
    ch: &KrausChannel,
    kraus: &KrausChannel,
    corrected: &KrausChannel,
) -> Result<Option<FidelityReport>, CliError> {
    if !ch.is_square() {
        return Ok(None);
    }
    Ok(Some(FidelityReport {
        raw: ch.fidelity()?,
        bound: fidelity_bound(kraus)?,
        corrected: corrected.fidelity()?,
    }))
}

pub fn recover_command(
    ch: &KrausChannel,
    mode: RecoveryKind,
    basis: Option<&str>,
    settings: &Settings,
) -> Result<Report, CliError> {
    require_valid(ch, settings.tol)?;
    let mut report = Report::new("recover", ch, settings);
    let (kraus, recombination, plan, used_basis): (KrausChannel, Option<CMatrix>, RecoveryPlan, Option<OrthoBasis>) =
        match mode {
            RecoveryKind::Quantum => {
                let (t, u) = q_form(ch, settings)?;
                let plan = quantum_recovery(&t, settings.tol)?;
                (t, u, plan, None)
            }
            RecoveryKind::Classical => {
                let b = load_basis(basis.unwrap_or("standard"), ch.dim_in())?;
                let (t, u) = classical_form(ch, &b, settings)?;
                let plan = classical_recovery(&t, &b, settings.tol)?;
                (t, u, plan, Some(b))
            }
            RecoveryKind::Optimal => {
                if !ch.is_square() {
                    return Err(CliError::Input(format!(
                        "optimal recovery needs equal input and output dimensions, got {} -> {}",
                        ch.dim_in(),
                        ch.dim_out()
                    )));
                }
                let plan = optimal_recovery(ch)?;
                (ch.clone(), None, plan, None)
            }
        };
    let corrected = corrected_channel(&kraus, &plan)?;
    let restoration_defect = match mode {
        RecoveryKind::Quantum => Some(action_distance(&corrected, &KrausChannel::identity(ch.dim_in()))?),
        RecoveryKind::Classical => {
            let b = used_basis.as_ref().expect("classical mode keeps its basis");
            let mut worst: f64 = 0.0;
            for x in 0..b.len() {
                let p = b.projector(x);
                worst = worst.max((corrected.apply(&p)? - p).norm());
            }
            Some(worst)
        }
        RecoveryKind::Optimal => None,
    };
    report.fidelity = fidelities(ch, &kraus, &corrected)?;
    report.recovery = Some(RecoveryReport {
        mode,
        recombination,
        basis: used_basis,
        plan_tp_defect: plan.tp_defect(),
        corrected_kraus_count: corrected.len(),
        restoration_defect,
    });
    Ok(report)
}

pub fn fidelity_command(ch: &KrausChannel, settings: &Settings) -> Result<Report, CliError> {
    require_valid(ch, settings.tol)?;
    if !ch.is_square() {
        return Err(CliError::Input(format!(
            "fidelity needs equal input and output dimensions, got {} -> {}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let corrected = corrected_channel(ch, &optimal_recovery(ch)?)?;
    let mut report = Report::new("fidelity", ch, settings);
    report.fidelity = fidelities(ch, ch, &corrected)?;
    Ok(report)
}

pub fn dilate_command(ch: &KrausChannel, settings: &Settings) -> Result<Report, CliError> {
    require_valid(ch, settings.tol)?;
    let dil = dilate(ch)?;
    let reconstruction_defect = action_distance(&dil.native_kraus(), ch)?;
    let mut report = Report::new("dilate", ch, settings);
    report.dilation = Some(DilationReport {
        dim_in: dil.dim_in,
        dim_env_in: dil.dim_env_in,
        dim_out: dil.dim_out,
        dim_env_out: dil.dim_env_out,
        unitarity_defect: lostfound::linalg::isometry_defect(&dil.unitary),
        unitary: io::matrix_to_json(&dil.unitary),
        psi0: io::vector_to_json(&dil.psi0),
        reconstruction_defect,
    });
    Ok(report)
}

/// `name<TAB>description` per zoo channel.
pub fn zoo_listing() -> String {
    let mut out = String::new();
    for name in zoo::ZOO_NAMES {
        let e = zoo::zoo_entry(name).expect("registered name");
        out.push_str(&format!("{name}\t{}\n", e.description));
    }
    out
}

pub fn zoo_export(name: &str) -> Result<String, CliError> {
    let e = zoo::zoo_entry(name)?;
    let mut s = io::channel_to_json(&e.channel);
    s.push('\n');
    Ok(s)
}
