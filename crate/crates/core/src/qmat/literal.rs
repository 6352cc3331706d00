//! JSON matrix literals: `{"dim": n, "re": [[..]], "im": [[..]]}`.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixLiteral {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dim;
        let check = |rows: &Vec<Vec<f64>>, part: &str| -> Result<()> {
            if rows.len() != n {
                return Err(Error::Parse(format!("`{part}` has {} rows, expected {n}", rows.len())));
            }
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(Error::Parse(format!(
                    "`{part}` row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
                data.push(C64::new(self.re[i][j], im));
            }
        }
        ComplexMatrix::from_vec(n, data)
    }
}

impl From<&ComplexMatrix> for MatrixLiteral {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        Self {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: Some((0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect()),
        }
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixLiteral::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = MatrixLiteral::deserialize(d)?;
        lit.to_matrix().map_err(|e| match e {
            Error::Parse(msg) => serde::de::Error::custom(msg),
            other => serde::de::Error::custom(other),
        })
    }
}

/// Parses a matrix literal. Syntax and type errors carry a line and column;
/// shape errors name the offending row.
pub fn parse_matrix(json: &str) -> Result<ComplexMatrix> {
    Ok(serde_json::from_str(json)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = ComplexMatrix::from_fn(2, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let json = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_rejected() {
        let json = r#"{"dim": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}"#;
        assert!(parse_matrix(json).is_err());
        let json = r#"{"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0]]}"#;
        assert!(parse_matrix(json).is_err());
    }

    #[test]
    fn imaginary_part_optional() {
        let m = parse_matrix(r#"{"dim": 1, "re": [[1.0]]}"#).unwrap();
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
    }
}
