//! Restoring channels applied after a measured environment outcome, the
//! resulting corrected channel, and the fidelity ceiling for a Kraus list.

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::corrigibility::{classical_residual, quantum_criterion};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    basis_vector, orthonormal_complement, outer, polar_decompose, range_basis, CMatrix, CVector, OrthoBasis,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryKind {
    Quantum,
    Classical,
    Optimal,
}

/// One restoring channel `R_α : B(H₂) → B(H₁)` per Kraus operator, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryPlan {
    pub kind: RecoveryKind,
    pub recoveries: Vec<KrausChannel>,
}

impl RecoveryPlan {
    /// Largest trace-preservation defect over the plan.
    pub fn tp_defect(&self) -> f64 {
        self.recoveries.iter().map(KrausChannel::tp_defect).fold(0.0, f64::max)
    }
}

/// Kraus operators `|ξ_i⟩⟨f_j|/√d₁` re-preparing the maximally mixed state
/// from the span of the frame columns `f_j`.
fn reprepare_mixed(frame: &CMatrix, d1: usize) -> Vec<CMatrix> {
    let w = 1.0 / (d1 as f64).sqrt();
    let mut out = Vec::with_capacity(d1 * frame.ncols());
    for f in frame.column_iter() {
        let f: CVector = f.into_owned();
        for i in 0..d1 {
            out.push(outer(&basis_vector(d1, i), &f).scale(w));
        }
    }
    out
}

/// `R(ρ') = v†ρ'v + (1/d₁)·tr(ρ'(1 − vv†))` for the polar isometry `v` of `t`.
fn polar_recovery(t: &CMatrix) -> Result<KrausChannel> {
    let (d2, d1) = t.shape();
    let v = polar_decompose(t, 1e-12)?.isometry_part;
    let range = range_basis(&v, 0.5);
    let complement = if range.ncols() == 0 {
        crate::linalg::identity(d2)
    } else {
        orthonormal_complement(&range)
    };
    let mut kraus = Vec::new();
    if range.ncols() > 0 {
        kraus.push(v.adjoint());
    }
    kraus.extend(reprepare_mixed(&complement, d1));
    KrausChannel::new(kraus)
}

/// Restoring channels for a Kraus list of scaled isometries.
pub fn quantum_recovery(ch: &KrausChannel, tol: f64) -> Result<RecoveryPlan> {
    let crit = quantum_criterion(ch, tol);
    if !crit.holds {
        return Err(Error::NotQDecomposition(crit.max_residual()));
    }
    Ok(RecoveryPlan {
        kind: RecoveryKind::Quantum,
        recoveries: ch.kraus().iter().map(polar_recovery).collect::<Result<_>>()?,
    })
}

/// Measure-and-reprepare channels for a Kraus list diagonal in `basis`.
pub fn classical_recovery(ch: &KrausChannel, basis: &OrthoBasis, tol: f64) -> Result<RecoveryPlan> {
    let residual = classical_residual(ch, basis)?;
    if residual > tol {
        return Err(Error::NotClassicalDecomposition(residual));
    }
    let (d1, d2) = (ch.dim_in(), ch.dim_out());
    let mut recoveries = Vec::with_capacity(ch.len());
    for t in ch.kraus() {
        let mut kept: Vec<usize> = Vec::new();
        let mut images: Vec<CVector> = Vec::new();
        for (x, phi) in basis.vectors().iter().enumerate() {
            let img = t * phi;
            let n = img.norm();
            if n > tol {
                kept.push(x);
                images.push(img.unscale(n));
            }
        }
        let mut kraus = Vec::new();
        let complement = if images.is_empty() {
            crate::linalg::identity(d2)
        } else {
            let mut psi = CMatrix::zeros(d2, images.len());
            for (j, v) in images.iter().enumerate() {
                psi.set_column(j, v);
            }
            // Löwdin step: nearest orthonormal family to the normalized images.
            let psi = polar_decompose(&psi, 1e-12)?.isometry_part;
            for (j, &x) in kept.iter().enumerate() {
                kraus.push(outer(basis.vector(x), &psi.column(j).into_owned()));
            }
            orthonormal_complement(&psi)
        };
        if complement.ncols() > 0 {
            if d1 == d2 {
                kraus.push(&complement * complement.adjoint());
            } else {
                kraus.extend(reprepare_mixed(&complement, d1));
            }
        }
        recoveries.push(KrausChannel::new(kraus)?);
    }
    Ok(RecoveryPlan {
        kind: RecoveryKind::Classical,
        recoveries,
    })
}

/// Restoring channels from the polar decomposition of every Kraus operator;
/// the corrected channel is `ρ ↦ Σ_α |t_α|ρ|t_α|`.
pub fn optimal_recovery(ch: &KrausChannel) -> Result<RecoveryPlan> {
    if !ch.is_square() {
        return Err(dim_mismatch("optimal recovery", ch.dim_in(), ch.dim_out()));
    }
    Ok(RecoveryPlan {
        kind: RecoveryKind::Optimal,
        recoveries: ch.kraus().iter().map(polar_recovery).collect::<Result<_>>()?,
    })
}

/// `Σ_α R_α ∘ T_α` as a Kraus list, dropping products with norm below `1e-14`.
pub fn corrected_channel(ch: &KrausChannel, plan: &RecoveryPlan) -> Result<KrausChannel> {
    if plan.recoveries.len() != ch.len() {
        return Err(dim_mismatch("recovery plan length", ch.len(), plan.recoveries.len()));
    }
    let mut kraus = Vec::new();
    for (t, rec) in ch.kraus().iter().zip(&plan.recoveries) {
        if rec.dim_in() != ch.dim_out() || rec.dim_out() != ch.dim_in() {
            return Err(dim_mismatch(
                "recovery channel",
                format!("{}->{}", ch.dim_out(), ch.dim_in()),
                format!("{}->{}", rec.dim_in(), rec.dim_out()),
            ));
        }
        for r in rec.kraus() {
            let p = r * t;
            if p.norm() >= 1e-14 {
                kraus.push(p);
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(ch.dim_in(), ch.dim_in()));
    }
    let out = KrausChannel::new(kraus)?;
    Ok(match ch.label() {
        Some(l) => out.with_label(format!("{l} corrected")),
        None => out,
    })
}

/// `(1/d²) Σ_α (tr|t_α|)²`
pub fn fidelity_bound(ch: &KrausChannel) -> Result<f64> {
    if !ch.is_square() {
        return Err(dim_mismatch("fidelity bound", ch.dim_in(), ch.dim_out()));
    }
    let d = ch.dim_in() as f64;
    let total: f64 = ch.kraus().iter().map(|t| t.singular_values().sum().powi(2)).sum();
    Ok(total / (d * d))
}
