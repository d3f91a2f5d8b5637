//! Reading and writing matrices, functions, witnesses and results.
//!
//! JSON output has sorted keys and floats rounded to 15 significant digits,
//! so identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::coe::{CoeWitness, EntropyRow, SubstitutionCode};
use crate::error::{Error, Result};
use crate::kms::KmsSolution;
use crate::locfun::{LocallyConstantFunction, ValueKind, Values};
use crate::ruelle::RpfData;
use crate::sft::{BlockIndex, TransitionMatrix, Word};

/// `x` rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(round15(x)).map_or(Value::Null, Value::Number)
}

/// Plain decimal in the usual range, scientific notation outside it.
pub fn format_float(x: f64) -> String {
    let x = round15(x);
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn rows_from_json(value: &Value) -> Result<Vec<Vec<i64>>> {
    let rows = match value {
        Value::Object(obj) => {
            let rows = obj.get("rows").ok_or_else(|| format_err("matrix object lacks \"rows\""))?;
            let rows = rows_from_json(rows)?;
            if let Some(n) = obj.get("n") {
                let n = n.as_u64().ok_or_else(|| format_err("\"n\" must be a nonnegative integer"))?;
                if n as usize != rows.len() {
                    return Err(format_err(format!("\"n\" is {n} but {} rows given", rows.len())));
                }
            }
            return Ok(rows);
        }
        Value::Array(rows) => rows,
        _ => return Err(format_err("matrix must be an object or an array of rows")),
    };
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| format_err("matrix row must be an array"))?
                .iter()
                .map(|v| v.as_i64().ok_or_else(|| format_err("matrix entries must be integers")))
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(value: &Value) -> Result<TransitionMatrix> {
    Ok(TransitionMatrix::validate(&rows_from_json(value)?)?)
}

/// Either the text form (`N`, then `N` rows of 0/1 digits separated by
/// spaces) or the JSON form `{"n": N, "rows": [[…], …]}`.
pub fn parse_matrix(text: &str) -> Result<TransitionMatrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: Value = serde_json::from_str(trimmed).map_err(|e| format_err(e.to_string()))?;
        return matrix_from_json(&value);
    }
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| format_err("empty matrix file"))?;
    let n: usize = header
        .parse()
        .map_err(|_| format_err(format!("first line {header:?} is not a size")))?;
    let rows = lines
        .map(|line| {
            line.split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| format_err(format!("bad entry {t:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != n {
        return Err(format_err(format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(TransitionMatrix::validate(&rows)?)
}

pub fn matrix_to_json(matrix: &TransitionMatrix) -> Value {
    json!({ "n": matrix.size(), "rows": matrix.rows() })
}

pub fn matrix_to_text(matrix: &TransitionMatrix) -> String {
    let mut s = format!("{}\n", matrix.size());
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(i64::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// `{"depth": m, "kind": "int"|"real", "values": {"word": v, …}}`. Every
/// admissible word of length `m` must appear exactly once.
pub fn function_from_json(matrix: Arc<TransitionMatrix>, value: &Value) -> Result<LocallyConstantFunction> {
    let obj = value.as_object().ok_or_else(|| format_err("function must be a JSON object"))?;
    let depth = obj
        .get("depth")
        .and_then(Value::as_u64)
        .ok_or_else(|| format_err("function needs an integer \"depth\""))? as usize;
    let kind = match obj.get("kind").and_then(Value::as_str) {
        Some("int") => ValueKind::Int,
        Some("real") => ValueKind::Real,
        other => return Err(format_err(format!("\"kind\" must be \"int\" or \"real\", got {other:?}"))),
    };
    let entries = obj
        .get("values")
        .and_then(Value::as_object)
        .ok_or_else(|| format_err("function needs a \"values\" object"))?;
    let index = BlockIndex::new(&matrix, depth);
    let mut slots: Vec<Option<&Value>> = vec![None; index.size()];
    for (key, v) in entries {
        let word = Word::parse(key)?;
        if word.len() != depth {
            return Err(format_err(format!("word {key:?} does not have length {depth}")));
        }
        if word.symbols().iter().any(|&s| s >= matrix.size()) || !matrix.is_admissible(word.symbols()) {
            return Err(Error::NotAdmissible(key.clone()));
        }
        let slot = &mut slots[index.rank(&matrix, word.symbols())];
        if slot.is_some() {
            return Err(format_err(format!("word {key:?} given twice")));
        }
        *slot = Some(v);
    }
    let mut missing = Vec::new();
    matrix.visit_words(depth, |i, w| {
        if slots[i].is_none() {
            missing.push(Word::from(w).to_key(matrix.size()));
        }
    });
    if !missing.is_empty() {
        return Err(format_err(format!("missing values for words {}", missing.join(" "))));
    }
    let values = match kind {
        ValueKind::Int => Values::Int(
            slots
                .iter()
                .map(|v| v.and_then(Value::as_i64).ok_or_else(|| format_err("int function has a non-integer value")))
                .collect::<Result<_>>()?,
        ),
        ValueKind::Real => Values::Real(
            slots
                .iter()
                .map(|v| v.and_then(Value::as_f64).ok_or_else(|| format_err("real function has a non-numeric value")))
                .collect::<Result<_>>()?,
        ),
    };
    LocallyConstantFunction::from_values(matrix, depth, values)
}

pub fn parse_function(matrix: Arc<TransitionMatrix>, text: &str) -> Result<LocallyConstantFunction> {
    let value: Value = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    function_from_json(matrix, &value)
}

pub fn function_to_json(f: &LocallyConstantFunction) -> Value {
    let alphabet = f.matrix().size();
    let mut values = Map::new();
    match f.values() {
        Values::Int(v) => {
            f.matrix().visit_words(f.depth(), |i, w| {
                values.insert(Word::from(w).to_key(alphabet), json!(v[i]));
            });
        }
        Values::Real(v) => {
            f.matrix().visit_words(f.depth(), |i, w| {
                values.insert(Word::from(w).to_key(alphabet), number(v[i]));
            });
        }
    }
    let kind = if f.is_int() { "int" } else { "real" };
    json!({ "depth": f.depth(), "kind": kind, "values": values })
}

fn masses_to_json(entries: &[(Word, f64)], alphabet: usize) -> Value {
    let map: Map<String, Value> = entries
        .iter()
        .map(|(w, m)| (w.to_key(alphabet), number(*m)))
        .collect();
    Value::Object(map)
}

/// `{"eigenvalue", "eigenfunction", "measure_depth_table"}`, the table holding
/// the masses of all words of length `1..=table_depth`.
pub fn rpf_to_json(rpf: &RpfData, table_depth: usize) -> Value {
    let alphabet = rpf.measure.matrix().size();
    json!({
        "eigenvalue": number(rpf.eigenvalue),
        "eigenfunction": function_to_json(&rpf.eigenfunction),
        "measure_depth_table": masses_to_json(&rpf.measure.mass_entries(table_depth), alphabet),
    })
}

/// `{"beta", "log_beta", "f", "masses"}` with masses of all words of length
/// `1..=mass_depth`.
pub fn kms_to_json(solution: &KmsSolution, mass_depth: usize) -> Value {
    let alphabet = solution.measure.matrix().size();
    json!({
        "beta": number(solution.beta),
        "log_beta": number(solution.log_beta()),
        "f": function_to_json(&solution.gauge),
        "masses": masses_to_json(&solution.measure.mass_entries(mass_depth), alphabet),
    })
}

/// `{"source", "target", "tau", "k1", "l1", "k2", "l2"}`; matrices in either
/// JSON matrix form.
pub fn witness_from_json(value: &Value) -> Result<CoeWitness> {
    let obj = value.as_object().ok_or_else(|| format_err("witness must be a JSON object"))?;
    let field = |name: &str| obj.get(name).ok_or_else(|| format_err(format!("witness lacks {name:?}")));
    let source = Arc::new(matrix_from_json(field("source")?)?);
    let target = Arc::new(matrix_from_json(field("target")?)?);
    let tau_obj = field("tau")?.as_object().ok_or_else(|| format_err("\"tau\" must be an object"))?;
    let mut tau: Vec<Option<Word>> = vec![None; source.size()];
    for (key, image) in tau_obj {
        let symbol = Word::parse(key)?;
        let &[s] = symbol.symbols() else {
            return Err(format_err(format!("tau key {key:?} is not a single symbol")));
        };
        let slot = tau
            .get_mut(s)
            .ok_or_else(|| format_err(format!("tau key {key:?} is not a source symbol")))?;
        let image = image.as_str().ok_or_else(|| format_err("tau images must be strings"))?;
        *slot = Some(Word::parse(image)?);
    }
    let tau = tau
        .into_iter()
        .enumerate()
        .map(|(s, w)| w.ok_or_else(|| format_err(format!("tau lacks symbol {}", s + 1))))
        .collect::<Result<Vec<_>>>()?;
    let code = SubstitutionCode::new(source.clone(), target.clone(), tau)?;
    CoeWitness::new(
        code,
        function_from_json(source.clone(), field("k1")?)?,
        function_from_json(source, field("l1")?)?,
        function_from_json(target.clone(), field("k2")?)?,
        function_from_json(target, field("l2")?)?,
    )
}

pub fn parse_witness(text: &str) -> Result<CoeWitness> {
    let value: Value = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    witness_from_json(&value)
}

pub fn witness_to_json(witness: &CoeWitness) -> Value {
    let code = witness.code();
    let alphabet = code.target().size();
    let tau: BTreeMap<String, String> = code
        .images()
        .iter()
        .enumerate()
        .map(|(s, w)| (Word(vec![s]).to_key(code.source().size()), w.to_key(alphabet)))
        .collect();
    json!({
        "source": matrix_to_json(code.source()),
        "target": matrix_to_json(code.target()),
        "tau": tau,
        "k1": function_to_json(witness.k1()),
        "l1": function_to_json(witness.l1()),
        "k2": function_to_json(witness.k2()),
        "l2": function_to_json(witness.l2()),
    })
}

/// CSV with header `n,E_n,entropy_estimate,r_pow_n_times_E_n`.
pub fn entropy_csv(rows: &[EntropyRow]) -> String {
    let mut s = String::from("n,E_n,entropy_estimate,r_pow_n_times_E_n\n");
    for row in rows {
        writeln!(
            s,
            "{},{},{},{}",
            row.n,
            format_float(row.e_n),
            format_float(row.entropy_estimate),
            format_float(row.scaled)
        )
        .expect("writing to a string");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coe::golden_example;

    #[test]
    fn rounding() {
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(round15(2.0), 2.0);
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_float(2f64.powi(-30)), "9.31322574615479e-10");
    }

    #[test]
    fn matrix_text_and_json() {
        let b = parse_matrix("2\n1 1\n1 0\n").unwrap();
        assert_eq!(b, TransitionMatrix::golden_mean());
        assert_eq!(parse_matrix(r#"{"n": 2, "rows": [[1,1],[1,0]]}"#).unwrap(), b);
        assert_eq!(parse_matrix(&matrix_to_text(&b)).unwrap(), b);
        assert!(matches!(parse_matrix("2\n1 0\n0 1\n"), Err(Error::Matrix(_))));
        assert!(matches!(parse_matrix("3\n1 1\n1 0\n"), Err(Error::Format(_))));
        assert!(matches!(parse_matrix(r#"{"n": 3, "rows": [[1,1],[1,0]]}"#), Err(Error::Format(_))));
    }

    #[test]
    fn function_literals() {
        let b = Arc::new(TransitionMatrix::golden_mean());
        let f = parse_function(b.clone(), r#"{"depth": 2, "kind": "int", "values": {"11": 1, "12": 2, "21": 3}}"#).unwrap();
        assert_eq!(f.values(), &Values::Int(vec![1, 2, 3]));
        assert_eq!(function_from_json(b.clone(), &function_to_json(&f)).unwrap(), f);
        let missing = r#"{"depth": 2, "kind": "int", "values": {"11": 1, "12": 2}}"#;
        assert!(matches!(parse_function(b.clone(), missing), Err(Error::Format(_))));
        let extra = r#"{"depth": 1, "kind": "real", "values": {"1": 1, "2": 2, "3": 0}}"#;
        assert!(parse_function(b.clone(), extra).is_err());
        let forbidden = r#"{"depth": 2, "kind": "int", "values": {"11": 1, "12": 2, "21": 3, "22": 4}}"#;
        assert!(matches!(parse_function(b.clone(), forbidden), Err(Error::NotAdmissible(_))));
        let fractional = r#"{"depth": 1, "kind": "int", "values": {"1": 1.5, "2": 2}}"#;
        assert!(parse_function(b, fractional).is_err());
    }

    #[test]
    fn witness_round_trip() {
        let g = golden_example();
        let v = witness_to_json(&g);
        assert_eq!(v["tau"]["2"], "21");
        let back = witness_from_json(&v).unwrap();
        assert_eq!(back, g);
        assert_eq!(to_json_string(&witness_to_json(&back)), to_json_string(&v));
    }

    #[test]
    fn csv_header() {
        let rows = [EntropyRow {
            n: 1,
            e_n: 0.5,
            entropy_estimate: 2f64.ln(),
            scaled: 1.0,
        }];
        assert_eq!(entropy_csv(&rows), "n,E_n,entropy_estimate,r_pow_n_times_E_n\n1,0.5,0.693147180559945,1\n");
    }
}
