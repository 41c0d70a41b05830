//! JSON system files.
//!
//! ```json
//! { "dim": 1, "A": [[1.0]], "R": [[1.0]], "S": [[1.0]],
//!   "metadata": { "name": "golden", "seed": 7 } }
//! ```
//!
//! Matrices are row-major nested arrays. Floats are written with serde_json's
//! shortest round-trip rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{from_rows, to_rows, Matrix, PsdMatrix};
use crate::system::{AssumptionCertificate, SystemTriple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<AssumptionCertificate>,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::File(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("system file serializes");
        out.push('\n');
        out
    }

    pub fn from_system(sys: &SystemTriple, metadata: Option<Metadata>) -> Self {
        Self {
            dim: sys.dim(),
            a: to_rows(sys.a()),
            r: to_rows(sys.r()),
            s: to_rows(sys.s()),
            metadata,
        }
    }

    /// Validates shapes and PSD-ness, naming the offending field on error.
    pub fn to_system(&self) -> Result<SystemTriple> {
        if self.dim == 0 {
            return Err(Error::File("dim: must be at least 1".into()));
        }
        let a = self.field_matrix("A", &self.a)?;
        let r = self.field_psd("R", &self.r)?;
        let s = self.field_psd("S", &self.s)?;
        SystemTriple::new(a, r, s)
    }

    fn field_matrix(&self, name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
        if rows.len() != self.dim {
            return Err(Error::File(format!(
                "{name}: expected {} rows, got {}",
                self.dim,
                rows.len()
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
            return Err(Error::File(format!(
                "{name}: row {i} has {} entries, expected {}",
                row.len(),
                self.dim
            )));
        }
        from_rows(rows).map_err(|e| Error::File(format!("{name}: {e}")))
    }

    fn field_psd(&self, name: &str, rows: &[Vec<f64>]) -> Result<PsdMatrix> {
        let m = self.field_matrix(name, rows)?;
        PsdMatrix::new(m).map_err(|e| Error::File(format!("{name}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_file_parses() {
        let f = SystemFile::from_json(r#"{"dim":1,"A":[[1]],"R":[[1]],"S":[[1]]}"#).unwrap();
        assert_eq!(f.to_system().unwrap(), SystemTriple::golden());
    }

    #[test]
    fn errors_name_the_field() {
        let f = SystemFile::from_json(r#"{"dim":2,"A":[[1,0],[0,1]],"R":[[1,0]],"S":[[1,0],[0,1]]}"#)
            .unwrap();
        let msg = f.to_system().unwrap_err().to_string();
        assert!(msg.contains("R:"), "{msg}");

        let f = SystemFile::from_json(r#"{"dim":1,"A":[[1]],"R":[[1]],"S":[[-1]]}"#).unwrap();
        let msg = f.to_system().unwrap_err().to_string();
        assert!(msg.contains("S:") && msg.contains("semi-definite"), "{msg}");

        let msg = SystemFile::from_json(r#"{"dim":1,"A":[[1]],"R":[[1]]}"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("`S`"), "{msg}");

        assert!(SystemFile::from_json("{not json").is_err());
    }

    #[test]
    fn writes_shortest_roundtrip_floats() {
        let sys = SystemTriple::scalar(0.1, 1.0 / 3.0, 2.0).unwrap();
        let text = SystemFile::from_system(&sys, None).to_json_pretty();
        assert!(text.contains("0.1") && text.contains("0.3333333333333333"));
        let back = SystemFile::from_json(&text).unwrap().to_system().unwrap();
        assert_eq!(back, sys);
    }
}
