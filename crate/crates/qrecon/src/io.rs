//! Shared on-disk formats: complex matrices as JSON, CSV grids.

use crate::hilbert::{Basis, CMat, C64};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Row-major list of `[re, im]` pairs with a dimension header.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_cmat(m: &CMat, basis: Option<Basis>) -> MatrixFile {
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixFile { dim: d, basis, label: None, data }
    }

    pub fn to_cmat(&self) -> Result<CMat, String> {
        let d = self.dim;
        if self.data.len() != d * d {
            return Err(format!("matrix file declares dim {d} but holds {} entries", self.data.len()));
        }
        Ok(CMat::from_fn(d, d, |i, j| {
            let [re, im] = self.data[i * d + j];
            C64::new(re, im)
        }))
    }
}

pub fn write_matrix(path: &Path, m: &CMat, basis: Option<Basis>) -> std::io::Result<()> {
    let f = MatrixFile::from_cmat(m, basis);
    std::fs::write(path, serde_json::to_string_pretty(&f)? + "\n")
}

pub fn read_matrix(path: &Path) -> std::io::Result<MatrixFile> {
    let s = std::fs::read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Write rows of numbers as CSV with optional leading `#` comment lines.
pub fn write_csv(path: &Path, comments: &[String], header: &str, rows: impl Iterator<Item = Vec<f64>>) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{header}")?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub(crate) mod cmat_serde {
    use super::MatrixFile;
    use crate::hilbert::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        MatrixFile::from_cmat(m, None).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        f.to_cmat().map_err(serde::de::Error::custom)
    }
}

/// Parse `1.2`, `0.5i`, `1.25-0.3i` or `(1.2, -0.3)` into a complex number.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        let (a, b) = inner.split_once(',').ok_or_else(|| format!("bad complex `{s}`"))?;
        let re = a.parse::<f64>().map_err(|e| e.to_string())?;
        let im = b.parse::<f64>().map_err(|e| e.to_string())?;
        return Ok(C64::new(re, im));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(C64::from).map_err(|e| format!("bad complex `{s}`: {e}"));
    };
    let bytes = body.as_bytes();
    // last sign that is not a leading sign or an exponent sign
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_s, im_s) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im_s {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|e| format!("bad complex `{s}`: {e}"))?,
    };
    let re = re_s.parse::<f64>().map_err(|e| format!("bad complex `{s}`: {e}"))?;
    Ok(C64::new(re, im))
}
