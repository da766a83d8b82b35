//! The problem instance: degree `d`, `k` factors per monomial, `R` equations in `s` terms,
//! an `R × s` integer coefficient matrix and the mean-value threshold `n0`.
//!
//! Instance documents are JSON objects:
//!
//! ```json
//! { "d": 2, "k": 1, "R": 1, "s": 5, "lambda": [[1, 1, 1, -1, -1]], "n0": 4 }
//! ```
//!
//! `lambda` is row-major (`R` arrays of `s` integers). `n0` is optional; when absent it
//! defaults to [`default_n0`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw document shape, validated into [`ProblemInstance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    d: u32,
    k: u32,
    #[serde(rename = "R")]
    r: usize,
    s: usize,
    lambda: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n0: Option<u32>,
}

/// A validated system of `R` multihomogeneous diagonal equations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct ProblemInstance {
    d: u32,
    k: u32,
    r: usize,
    s: usize,
    lambda: Vec<Vec<i64>>,
    n0: u32,
}

/// Smallest even exponent known to give the full mean-value saving for `d`-th powers:
/// `min(2^d, d(d+1))` (Hua's bound and the Vinogradov mean-value bound). Equals `2d` for
/// `d <= 2`.
pub fn default_n0(d: u32) -> u32 {
    let hua = if d < 31 { 1u64 << d } else { u64::MAX };
    let vmv = u64::from(d) * u64::from(d + 1);
    hua.min(vmv) as u32
}

impl TryFrom<InstanceDoc> for ProblemInstance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let n0 = doc.n0.unwrap_or_else(|| default_n0(doc.d));
        ProblemInstance::new(doc.d, doc.k, doc.lambda, n0).and_then(|inst| {
            if inst.r != doc.r {
                return Err(Error::Instance(format!(
                    "R = {} but lambda has {} rows",
                    doc.r, inst.r
                )));
            }
            if inst.s != doc.s {
                return Err(Error::Instance(format!(
                    "s = {} but lambda rows have {} entries",
                    doc.s, inst.s
                )));
            }
            Ok(inst)
        })
    }
}

impl From<ProblemInstance> for InstanceDoc {
    fn from(p: ProblemInstance) -> Self {
        InstanceDoc {
            d: p.d,
            k: p.k,
            r: p.r,
            s: p.s,
            lambda: p.lambda,
            n0: Some(p.n0),
        }
    }
}

impl ProblemInstance {
    /// Builds an instance; `R` and `s` are read off the matrix shape.
    pub fn new(d: u32, k: u32, lambda: Vec<Vec<i64>>, n0: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Instance("d must be positive".into()));
        }
        if k == 0 {
            return Err(Error::Instance("k must be positive".into()));
        }
        let r = lambda.len();
        if r == 0 {
            return Err(Error::Instance("lambda must have at least one row".into()));
        }
        let s = lambda[0].len();
        if s == 0 {
            return Err(Error::Instance("lambda rows must be nonempty".into()));
        }
        if let Some((i, row)) = lambda.iter().enumerate().find(|(_, row)| row.len() != s) {
            return Err(Error::Instance(format!(
                "ragged lambda: row {i} has {} entries, expected {s}",
                row.len()
            )));
        }
        if !n0.is_multiple_of(2) || n0 == 0 {
            return Err(Error::Instance(format!(
                "n0 = {n0} must be even and positive"
            )));
        }
        if n0 < 2 * d {
            return Err(Error::Instance(format!(
                "n0 = {n0} is below the lower bound 2d = {}",
                2 * d
            )));
        }
        Ok(ProblemInstance {
            d,
            k,
            r,
            s,
            lambda,
            n0,
        })
    }

    /// Builds an instance with the default `n0` for `d`.
    pub fn with_default_n0(d: u32, k: u32, lambda: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(d, k, lambda, default_n0(d))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialises")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of equations `R`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn lambda(&self) -> &[Vec<i64>] {
        &self.lambda
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.lambda[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.lambda.iter().map(|row| row[j]).collect()
    }

    /// Exponent `s - Rd` of the height and of the box asymptotics.
    pub fn height_exponent(&self) -> i64 {
        self.s as i64 - (self.r as i64) * i64::from(self.d)
    }

    /// Same shape and parameters with a different coefficient matrix.
    pub fn with_lambda(&self, lambda: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(self.d, self.k, lambda, self.n0)
    }

    /// Same system with `k` replaced (used for the derived systems of the hyperbola method).
    pub fn with_k(&self, k: u32) -> Result<Self> {
        Self::new(self.d, k, self.lambda.clone(), self.n0)
    }

    /// `ηΛ`: column `j` multiplied by `eta[j] ∈ {±1}`.
    pub fn sign_twist(&self, eta: &[i8]) -> Self {
        assert_eq!(eta.len(), self.s);
        let lambda = self
            .lambda
            .iter()
            .map(|row| {
                row.iter()
                    .zip(eta)
                    .map(|(&l, &e)| l * i64::from(e))
                    .collect()
            })
            .collect();
        ProblemInstance {
            lambda,
            ..self.clone()
        }
    }

    /// Columns permuted so that column `perm[t]` becomes column `t`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.s);
        let lambda = self
            .lambda
            .iter()
            .map(|row| perm.iter().map(|&j| row[j]).collect())
            .collect();
        ProblemInstance {
            lambda,
            ..self.clone()
        }
    }

    /// Maximum absolute coefficient `m1`.
    pub fn max_abs_entry(&self) -> i64 {
        self.lambda
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_instance_document() {
        let inst = ProblemInstance::from_json(
            r#"{"d":2,"k":1,"R":1,"s":5,"lambda":[[1,1,1,-1,-1]],"n0":4}"#,
        )
        .unwrap();
        assert_eq!(inst.s(), 5);
        assert_eq!(inst.n0(), 4);
        assert_eq!(inst.height_exponent(), 3);
        let back = ProblemInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn default_n0_when_absent() {
        let inst =
            ProblemInstance::from_json(r#"{"d":3,"k":1,"R":1,"s":2,"lambda":[[1,-1]]}"#).unwrap();
        assert_eq!(inst.n0(), 8);
        assert_eq!(default_n0(1), 2);
        assert_eq!(default_n0(2), 4);
        assert_eq!(default_n0(5), 30);
    }

    #[test]
    fn rejects_ragged_rows() {
        let err =
            ProblemInstance::from_json(r#"{"d":1,"k":1,"R":2,"s":3,"lambda":[[1,1,1],[1,2]]}"#)
                .unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn rejects_bad_n0_and_shape() {
        assert!(ProblemInstance::new(2, 1, vec![vec![1, -1]], 3).is_err());
        assert!(ProblemInstance::new(2, 1, vec![vec![1, -1]], 2).is_err());
        assert!(
            ProblemInstance::from_json(r#"{"d":1,"k":1,"R":2,"s":2,"lambda":[[1,-1]]}"#).is_err()
        );
        assert!(
            ProblemInstance::from_json(r#"{"d":1,"k":1,"R":1,"s":3,"lambda":[[1,-1]]}"#).is_err()
        );
    }

    #[test]
    fn sign_twist_and_permutation() {
        let inst = ProblemInstance::new(1, 1, vec![vec![1, 2, 3]], 2).unwrap();
        assert_eq!(inst.sign_twist(&[1, -1, 1]).lambda(), &[vec![1, -2, 3]]);
        assert_eq!(inst.permute_columns(&[2, 0, 1]).lambda(), &[vec![3, 1, 2]]);
    }
}
