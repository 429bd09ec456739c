//! Input documents: a TOML table with the dimension, optional torus weights, an optional basis
//! cap and the entries of pi keyed by `"i,j"`.

use std::collections::BTreeMap;
use std::fmt;

use chiralis::parse::parse_poly;
use chiralis::poisson::PoissonStructure;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    dim: usize,
    weights: Option<Vec<i64>>,
    basis_cap: Option<usize>,
    #[serde(default)]
    pi: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct Input {
    pub poisson: PoissonStructure,
    pub basis_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Syntax {
                line,
                column,
                message,
            } => write!(f, "syntax error at line {line}, column {column}: {message}"),
            InputError::Invalid(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl std::error::Error for InputError {}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Byte offset of the value string for key `key` (just past its opening quote).
fn value_offset(text: &str, key: &str) -> Option<usize> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim_start();
        if t.starts_with(&format!("\"{key}\"")) || t.starts_with(&format!("'{key}'")) {
            let eq = line.find('=')?;
            let q = line[eq..].find(['"', '\''])?;
            return Some(offset + eq + q + 1);
        }
        offset += line.len();
    }
    None
}

fn parse_key(key: &str, dim: usize) -> Result<(usize, usize), InputError> {
    let bad = || InputError::Invalid(format!("pi key {key:?} is not of the form \"i,j\""));
    let (i, j) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i < 1 || j < 1 || i > dim || j > dim {
        return Err(InputError::Invalid(format!(
            "pi key {key:?} out of range for dim {dim}"
        )));
    }
    Ok((i, j))
}

pub fn parse_input(text: &str) -> Result<Input, InputError> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        InputError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if doc.dim == 0 {
        return Err(InputError::Invalid("dim must be positive".into()));
    }
    let mut entries = Vec::new();
    for (key, value) in &doc.pi {
        let ij = parse_key(key, doc.dim)?;
        let p = parse_poly(value, doc.dim).map_err(|e| match e {
            chiralis::Error::Syntax {
                line,
                column,
                message,
            } => match value_offset(text, key) {
                Some(off) if line == 1 => {
                    let (l, c) = position(text, off);
                    InputError::Syntax {
                        line: l,
                        column: c + column - 1,
                        message,
                    }
                }
                _ => InputError::Syntax {
                    line,
                    column,
                    message: format!("in pi entry {key:?}: {message}"),
                },
            },
            other => InputError::Invalid(format!("pi entry {key:?}: {other}")),
        })?;
        entries.push((ij, p));
    }
    let poisson = PoissonStructure::new(doc.dim, &entries, doc.weights)
        .map_err(|e| InputError::Invalid(e.to_string()))?;
    Ok(Input {
        poisson,
        basis_cap: doc.basis_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let ex = parse_input("dim = 2\nweights = [0, 1]\n[pi]\n\"1,2\" = \"x2\"\n").unwrap();
        assert_eq!(ex.poisson, PoissonStructure::extended_example());
        let sym = parse_input("dim = 2\n[pi]\n\"1,2\" = \"1\"\n").unwrap();
        assert_eq!(sym.poisson, PoissonStructure::standard_symplectic());
        let bad = parse_input("dim = 2\n[pi]\n\"1,2\" = \"x1\"\n\"2,1\" = \"x1\"\n");
        assert!(matches!(bad, Err(InputError::Invalid(_))), "{bad:?}");
    }

    #[test]
    fn positioned_errors() {
        let e = parse_input("dim = 2\n[pi]\n\"1,2\" = \"x2 + * x1\"\n").unwrap_err();
        let InputError::Syntax { line, column, .. } = e else {
            panic!("{e:?}")
        };
        assert_eq!(line, 3);
        assert!(column > 9, "{column}");
        let e = parse_input("dim = 2\n[pi\n").unwrap_err();
        assert!(matches!(e, InputError::Syntax { line: 2, .. }), "{e:?}");
        let e = parse_input("dim = 2\ncolour = 1\n").unwrap_err();
        assert!(matches!(e, InputError::Syntax { .. }), "{e:?}");
    }

    #[test]
    fn jacobi_failure_prints_residual() {
        let e = parse_input("dim = 3\n[pi]\n\"1,2\" = \"1\"\n\"2,3\" = \"x2\"\n").unwrap_err();
        assert!(e.to_string().contains("invalid"), "{e}");
    }
}
