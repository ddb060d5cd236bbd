//! JSON symbol specification files.
//!
//! ```json
//! { "n": 2,
//!   "terms": [ { "k": -1, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]] } ],
//!   "special": { "kind": "blaschke_conj", "a_re": 0.5, "a_im": 0.0 } }
//! ```
//!
//! `special.matrix` (default identity) multiplies the scalar rule.

use super::{builders, MatrixSymbol, Support};
use crate::error::{Error, Result};
use crate::scalar::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub n: usize,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<SpecialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_hint: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: i64,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GeometricSide {
    Analytic,
    Coanalytic,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecialSpec {
    BlaschkeConj {
        a_re: f64,
        #[serde(default)]
        a_im: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixSpec>,
    },
    SingularInnerConj {
        #[serde(default)]
        theta: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixSpec>,
    },
    HalfIndicator {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixSpec>,
    },
    Geometric {
        q_re: f64,
        #[serde(default)]
        q_im: f64,
        side: GeometricSide,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixSpec>,
    },
}

fn one() -> f64 {
    1.0
}

fn to_matrix<T: Real>(n: usize, re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>, what: &str) -> Result<CMat<T>> {
    let bad = |r: usize| r != n;
    if bad(re.len()) || re.iter().any(|row| bad(row.len())) {
        return Err(Error::Parse(format!("{what}: real part is not {n}x{n}")));
    }
    if let Some(im) = im {
        if bad(im.len()) || im.iter().any(|row| bad(row.len())) {
            return Err(Error::Parse(format!("{what}: imaginary part is not {n}x{n}")));
        }
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        let b = im.map_or(0.0, |m| m[i][j]);
        cx(re[i][j], b)
    }))
}

impl SymbolSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn build<T: Real>(&self) -> Result<MatrixSymbol<T>> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Parse("n must be positive".into()));
        }
        let mut coeffs = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let m = to_matrix(n, &t.re, t.im.as_ref(), &format!("term k={}", t.k))?;
            coeffs.push((t.k, m));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (k, _) in &coeffs {
            if !seen.insert(*k) {
                return Err(Error::Parse(format!("degree {k} listed twice")));
            }
        }
        let mut s = MatrixSymbol::laurent(n, coeffs)?;
        if let Some(sp) = &self.special {
            let (scalar, mat) = match sp {
                SpecialSpec::BlaschkeConj { a_re, a_im, matrix } => {
                    (builders::blaschke_conj(cx(*a_re, *a_im))?, matrix)
                }
                SpecialSpec::SingularInnerConj { theta, mass, matrix } => {
                    (builders::singular_inner_conj(lit(*theta), lit(*mass))?, matrix)
                }
                SpecialSpec::HalfIndicator { matrix } => (builders::half_indicator(), matrix),
                SpecialSpec::Geometric {
                    q_re,
                    q_im,
                    side,
                    matrix,
                } => (
                    builders::geometric(cx(*q_re, *q_im), *side == GeometricSide::Analytic)?,
                    matrix,
                ),
            };
            let m = match mat {
                Some(m) => to_matrix(n, &m.re, m.im.as_ref(), "special.matrix")?,
                None => identity(n),
            };
            let tail = builders::lift(&scalar, &m)?;
            // the explicit map and the rule must not both define a degree
            for t in tail.tails() {
                if let Support::Range { lo, hi } = t.support() {
                    for k in s.explicit().keys() {
                        if lo.is_none_or(|l| *k >= l) && hi.is_none_or(|h| *k <= h) {
                            return Err(Error::Parse(format!(
                                "degree {k} is defined both explicitly and by the {} rule",
                                t.rule().kind()
                            )));
                        }
                    }
                }
            }
            for (k, _) in tail.explicit() {
                if s.explicit().contains_key(k) {
                    return Err(Error::Parse(format!(
                        "degree {k} is defined both explicitly and by the special rule"
                    )));
                }
            }
            let hint = tail.norm_hint();
            s = s.add(&tail)?;
            if self.terms.is_empty() {
                if let Some(h) = hint {
                    s = s.with_norm_hint(h);
                }
            }
        }
        if let Some(h) = self.norm_hint {
            s = s.with_norm_hint(lit(h));
        }
        Ok(s)
    }

    /// Spec for an explicit (tail-free) symbol.
    pub fn from_symbol<T: Real>(s: &MatrixSymbol<T>) -> Result<Self> {
        if s.has_tail() {
            return Err(Error::Parse(
                "only symbols with finitely many coefficients can be written as specs".into(),
            ));
        }
        let n = s.n();
        let terms = s
            .explicit()
            .iter()
            .map(|(k, m)| TermSpec {
                k: *k,
                re: (0..n).map(|i| (0..n).map(|j| to_f64(m[(i, j)].re)).collect()).collect(),
                im: Some((0..n).map(|i| (0..n).map(|j| to_f64(m[(i, j)].im)).collect()).collect()),
            })
            .collect();
        Ok(SymbolSpec {
            n,
            terms,
            special: None,
            norm_hint: s.norm_hint().map(to_f64),
        })
    }
}
