//! JSON group files and the bundled regression corpus.
//!
//! ```json
//! {"name": "heisenberg", "dim": 3, "weights": ["1","1","2"],
//!  "basis": ["X","Y","Z"], "brackets": [{"i":1,"j":2,"k":3,"c":"1"}]}
//! ```
//! Indices are 1-based, rationals are strings `"p/q"`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{FormatError, GradedLieAlgebra, Rational};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    pub dim: usize,
    pub weights: Vec<String>,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}

pub fn parse_rational(s: &str) -> Result<Rational, FormatError> {
    Rational::from_str(s.trim()).map_err(|_| FormatError::Rational(s.to_string()))
}

impl GroupFile {
    pub fn to_algebra(&self) -> Result<GradedLieAlgebra, FormatError> {
        if self.dim == 0 {
            return Err(FormatError::Schema("dim must be positive".into()));
        }
        if self.weights.len() != self.dim || self.basis.len() != self.dim {
            return Err(FormatError::Schema(format!(
                "dim = {} but {} weights and {} basis labels given",
                self.dim,
                self.weights.len(),
                self.basis.len()
            )));
        }
        let weights = self
            .weights
            .iter()
            .map(|w| parse_rational(w))
            .collect::<Result<Vec<_>, _>>()?;
        let mut alg = GradedLieAlgebra::new(self.name.clone(), weights, self.basis.clone())?;
        for b in &self.brackets {
            for (what, idx) in [("i", b.i), ("j", b.j), ("k", b.k)] {
                if idx == 0 || idx > self.dim {
                    return Err(FormatError::Schema(format!(
                        "bracket index {what} = {idx} outside 1..={}",
                        self.dim
                    )));
                }
            }
            alg.set_bracket(b.i - 1, b.j - 1, b.k - 1, parse_rational(&b.c)?)?;
        }
        Ok(alg)
    }

    /// Normalized weights and canonical `i < j` brackets.
    pub fn from_algebra(alg: &GradedLieAlgebra) -> Self {
        GroupFile {
            name: alg.name().to_string(),
            dim: alg.dim(),
            weights: alg.weights().iter().map(|w| w.to_string()).collect(),
            basis: alg.labels().to_vec(),
            brackets: alg
                .structure_constants()
                .map(|(i, j, k, c)| BracketEntry { i: i + 1, j: j + 1, k: k + 1, c: c.to_string() })
                .collect(),
        }
    }
}

pub fn parse_group(json: &str) -> Result<GradedLieAlgebra, FormatError> {
    let file: GroupFile = serde_json::from_str(json)?;
    file.to_algebra()
}

pub fn to_json(alg: &GradedLieAlgebra) -> String {
    serde_json::to_string_pretty(&GroupFile::from_algebra(alg)).expect("serializable")
}

const BUNDLED: &[(&str, &str)] = &[
    ("abelian1", include_str!("../groups/abelian1.json")),
    ("abelian2", include_str!("../groups/abelian2.json")),
    ("abelian3", include_str!("../groups/abelian3.json")),
    ("abelian4", include_str!("../groups/abelian4.json")),
    ("anisotropic2", include_str!("../groups/anisotropic2.json")),
    ("anisotropic3", include_str!("../groups/anisotropic3.json")),
    ("anisotropic4", include_str!("../groups/anisotropic4.json")),
    ("heisenberg", include_str!("../groups/heisenberg.json")),
    ("filiform4", include_str!("../groups/filiform4.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_json(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
}

pub fn bundled(name: &str) -> Option<GradedLieAlgebra> {
    bundled_json(name).map(|j| parse_group(j).expect("bundled group files are valid"))
}

pub fn bundled_all() -> Vec<GradedLieAlgebra> {
    BUNDLED
        .iter()
        .map(|(_, j)| parse_group(j).expect("bundled group files are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_is_valid() {
        for g in bundled_all() {
            assert!(g.validate().is_empty(), "{}", g.name());
            assert!(g.nilpotency_step().is_ok());
        }
    }

    #[test]
    fn roundtrip() {
        let h = bundled("heisenberg").unwrap();
        let back = parse_group(&to_json(&h)).unwrap();
        assert_eq!(GroupFile::from_algebra(&back), GroupFile::from_algebra(&h));
    }

    #[test]
    fn schema_errors() {
        let bad_dim = r#"{"name":"x","dim":2,"weights":["1"],"basis":["a","b"],"brackets":[]}"#;
        assert!(matches!(parse_group(bad_dim), Err(FormatError::Schema(_))));
        let bad_idx = r#"{"name":"x","dim":2,"weights":["1","1"],"basis":["a","b"],
            "brackets":[{"i":1,"j":3,"k":2,"c":"1"}]}"#;
        assert!(matches!(parse_group(bad_idx), Err(FormatError::Schema(_))));
        let bad_rat = r#"{"name":"x","dim":1,"weights":["one"],"basis":["a"]}"#;
        assert!(matches!(parse_group(bad_rat), Err(FormatError::Rational(_))));
        assert!(parse_group("{").is_err());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("3/2").unwrap(), Rational::new(3.into(), 2.into()));
        assert_eq!(parse_rational(" -1 ").unwrap(), Rational::from_integer((-1).into()));
    }
}
