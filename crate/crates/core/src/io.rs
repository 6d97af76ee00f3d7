//! JSON forms of channels, matrices and bases.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, OrthoBasis};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;
pub type JsonVector = Vec<[f64; 2]>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parses rows of `[re, im]` pairs; `field` names the value in error messages.
pub fn matrix_from_json(rows: &JsonMatrix, field: &str) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "{field}: row {i} has {} entries, expected {ncols}",
            row.len()
        )));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1]));
    if !crate::linalg::is_finite(&m) {
        return Err(Error::Parse(format!("{field}: non-finite entry")));
    }
    Ok(m)
}

pub fn vector_to_json(v: &CVector) -> JsonVector {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &JsonVector) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])))
}

/// On-disk channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
            label: ch.label().map(str::to_string),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        if self.kraus.is_empty() {
            return Err(Error::Parse("kraus: empty list".into()));
        }
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (i, rows) in self.kraus.iter().enumerate() {
            let field = format!("kraus[{i}]");
            let m = matrix_from_json(rows, &field)?;
            if m.nrows() != self.dim_out {
                return Err(Error::Parse(format!(
                    "{field}: {} rows, dim_out is {}",
                    m.nrows(),
                    self.dim_out
                )));
            }
            if m.ncols() != self.dim_in {
                return Err(Error::Parse(format!(
                    "{field}: {} columns, dim_in is {}",
                    m.ncols(),
                    self.dim_in
                )));
            }
            ops.push(m);
        }
        let ch = KrausChannel::new(ops)?;
        Ok(match &self.label {
            Some(l) => ch.with_label(l.clone()),
            None => ch,
        })
    }
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_channel()
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(ch)).expect("plain data serializes")
}

/// Basis file: a list of vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub vectors: Vec<JsonVector>,
}

pub fn basis_from_json(text: &str, tol: f64) -> Result<OrthoBasis> {
    let file: BasisFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    OrthoBasis::new(file.vectors.iter().map(vector_from_json).collect(), tol)
}

pub fn basis_to_json(b: &OrthoBasis) -> String {
    serde_json::to_string_pretty(&BasisFile {
        vectors: b.vectors().iter().map(vector_to_json).collect(),
    })
    .expect("plain data serializes")
}

/// `serde(with)` adapter for `Option<CMatrix>`.
pub mod opt_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_json).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMatrix>, D::Error> {
        let raw: Option<JsonMatrix> = Option::deserialize(d)?;
        raw.map(|rows| matrix_from_json(&rows, "matrix").map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// `serde(with)` adapter for `Option<OrthoBasis>` (vectors, unchecked).
pub mod opt_basis {
    use super::*;

    pub fn serialize<S: Serializer>(b: &Option<OrthoBasis>, s: S) -> std::result::Result<S::Ok, S::Error> {
        b.as_ref()
            .map(|b| b.vectors().iter().map(vector_to_json).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<OrthoBasis>, D::Error> {
        let raw: Option<Vec<JsonVector>> = Option::deserialize(d)?;
        raw.map(|vs| OrthoBasis::new(vs.iter().map(vector_from_json).collect(), 1e-8).map_err(serde::de::Error::custom))
            .transpose()
    }
}
