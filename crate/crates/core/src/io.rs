//! Text and JSON formats for support matrices, root families and code
//! instances.
//!
//! A support matrix is either plain text (one row per line, `0`/`1`
//! characters, blank lines and `#` comments ignored) or JSON
//! `{"m": 2, "n": 3, "rows": ["110", "011"]}`. A root family is JSON
//! `{"n": 3, "sets": [[3], [1]]}` with 1-based variable indices.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::codegen::CodeInstance;
use crate::error::{Error, Result};
use crate::reduction::ReductionTrace;
use crate::structures::{RootFamily, SupportMatrix};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatrixJson {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FamilyJson {
    pub n: usize,
    pub sets: Vec<Vec<u32>>,
}

fn parse_row(line: &str) -> Result<Vec<bool>> {
    line.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("unexpected character {other:?} in matrix row"))),
        })
        .collect()
}

fn matrix_from_rows(rows: &[Vec<bool>]) -> Result<SupportMatrix> {
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix rows have different lengths".into()));
    }
    let matrix = SupportMatrix::from_rows(rows)?;
    matrix.validate()?;
    Ok(matrix)
}

/// Parses a support matrix, detecting JSON by a leading `{`.
pub fn parse_matrix(text: &str) -> Result<SupportMatrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let parsed: MatrixJson = serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        let rows: Vec<Vec<bool>> = parsed.rows.iter().map(|r| parse_row(r)).collect::<Result<_>>()?;
        if rows.len() != parsed.m || rows.iter().any(|r| r.len() != parsed.n) {
            return Err(Error::Parse(format!("rows do not match declared shape {}x{}", parsed.m, parsed.n)));
        }
        return matrix_from_rows(&rows);
    }
    let rows: Vec<Vec<bool>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_row)
        .collect::<Result<_>>()?;
    matrix_from_rows(&rows)
}

pub fn matrix_to_json(matrix: &SupportMatrix) -> MatrixJson {
    MatrixJson {
        m: matrix.m(),
        n: matrix.n(),
        rows: matrix
            .to_bool_rows()
            .iter()
            .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect(),
    }
}

pub fn parse_family(text: &str) -> Result<RootFamily> {
    let parsed: FamilyJson = serde_json::from_str(text.trim()).map_err(|e| Error::Parse(e.to_string()))?;
    RootFamily::new(parsed.n, &parsed.sets)
}

pub fn family_to_json(family: &RootFamily) -> FamilyJson {
    FamilyJson {
        n: family.n(),
        sets: family.sets(),
    }
}

/// JSON document for a built code. Rows and columns are 0-based arrays;
/// field elements use [`FieldSpec::to_json`](crate::fields::FieldSpec::to_json).
pub fn code_to_json(code: &CodeInstance) -> Value {
    let f = &code.field;
    let elems = |v: &[crate::fields::FieldElem]| v.iter().map(|&x| f.to_json(x)).collect::<Vec<_>>();
    json!({
        "field": {
            "q": f.order(),
            "p": f.characteristic(),
            "k": f.degree(),
            "modulus": f.modulus(),
        },
        "matrix": matrix_to_json(&code.support),
        "family": family_to_json(&code.base_family),
        "padded": code.padded(),
        "padded_family": family_to_json(&code.family),
        "points": elems(&code.points),
        "aux_values": elems(&code.aux_values),
        "T": code.t.to_json(),
        "G": code.g.to_json(),
        "det_T": f.to_json(code.det_t),
        "verification": code.verification,
    })
}

pub(crate) fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

pub fn trace_json(trace: &ReductionTrace) -> Value {
    let rounds: Vec<Value> = trace
        .rounds
        .iter()
        .map(|r| {
            json!({
                "round": r.index,
                "subset": r.subset.elements(),
                "members": one_based(&r.subset.members()),
                "r": r.subset.r(),
                "s": r.subset.s(),
                "beta": r.beta,
                "n_beta": r.n_beta,
                "degrees": r.degrees_after,
            })
        })
        .collect();
    json!({
        "rounds": rounds,
        "reduction_set": trace.reduction_set(),
        "multiplicities": trace.multiplicities(),
        "final_family": family_to_json(&trace.final_family),
        "final_degrees": trace.final_degrees(),
        "survivor": trace.survivor + 1,
        "permutation": one_based(&trace.permutation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_agree() {
        let a = parse_matrix("# comment\n110\n\n011\n").unwrap();
        let b = parse_matrix(r#"{"m":2,"n":3,"rows":["110","011"]}"#).unwrap();
        assert_eq!(a, b);
        let round = serde_json::to_string(&matrix_to_json(&a)).unwrap();
        assert_eq!(parse_matrix(&round).unwrap(), a);
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(parse_matrix("12\n01"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("110\n01"), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix(""), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("110\n000"), Err(Error::InvalidMatrix(_))));
        assert!(matches!(
            parse_matrix(r#"{"m":3,"n":3,"rows":["110","011"]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn family_round_trip() {
        let f = parse_family(r#"{"n":3,"sets":[[3],[1]]}"#).unwrap();
        assert_eq!(f.sets(), vec![vec![3], vec![1]]);
        let text = serde_json::to_string(&family_to_json(&f)).unwrap();
        assert_eq!(parse_family(&text).unwrap(), f);
        assert!(parse_family("[1]").is_err());
    }
}
