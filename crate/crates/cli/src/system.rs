use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sparsectl::control::SystemPair;
use sparsectl::Mat;

use crate::CliError;

/// Ground truth recorded by the planted generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedWitness {
    pub lambda: f64,
    pub z: Vec<f64>,
}

/// On-disk system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedWitness>,
}

#[derive(Debug, Clone)]
pub struct ParsedSystem {
    pub file: SystemFile,
    pub sys: SystemPair,
}

pub fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Reads a rectangular numeric array stored under `key`.
fn matrix_field(obj: &Map<String, Value>, key: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let value = obj
        .get(key)
        .ok_or_else(|| input(format!("missing required key \"{key}\"")))?;
    let rows = value
        .as_array()
        .ok_or_else(|| input(format!("{key} must be an array of rows")))?;
    if rows.is_empty() {
        return Err(input(format!("{key} has no rows")));
    }
    let mut out = Vec::with_capacity(rows.len());
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| input(format!("{key} row {} is not an array", i + 1)))?;
        let expected = *width.get_or_insert(entries.len());
        if entries.len() != expected {
            return Err(input(format!(
                "{key} row {} has {} entries but row 1 has {expected} (ragged rows)",
                i + 1,
                entries.len()
            )));
        }
        let mut parsed = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            let v = e.as_f64().filter(|v| v.is_finite()).ok_or_else(|| {
                input(format!(
                    "{key} row {}, column {} is not a finite number: {e}",
                    i + 1,
                    j + 1
                ))
            })?;
            parsed.push(v);
        }
        out.push(parsed);
    }
    Ok(out)
}

fn to_mat(rows: &[Vec<f64>]) -> Mat {
    let cols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Parses the JSON system format `{"A": [[..]], "B": [[..]], "s"?: int, "name"?: str}`.
pub fn parse_system_text(text: &str) -> Result<ParsedSystem, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| input(format!("malformed JSON: {e}")))?;
    let mut obj = value
        .as_object()
        .ok_or_else(|| input("system file must be a JSON object"))?;
    // the output of `gen` is accepted directly
    if !obj.contains_key("A") {
        if let Some(inner) = obj.get("generated").and_then(Value::as_object) {
            obj = inner;
        }
    }
    let a = matrix_field(obj, "A")?;
    let b = matrix_field(obj, "B")?;
    if a.len() != a[0].len() {
        return Err(input(format!(
            "A must be square but is {}x{}",
            a.len(),
            a[0].len()
        )));
    }
    if b.len() != a.len() {
        return Err(input(format!(
            "B has {} rows but A has {}",
            b.len(),
            a.len()
        )));
    }
    if b[0].is_empty() {
        return Err(input("B must have at least one column"));
    }
    let s = match obj.get("s") {
        None | Some(Value::Null) => None,
        Some(v) => match v.as_u64() {
            Some(s) if s >= 1 => Some(s as usize),
            _ => return Err(input(format!("s must be a positive integer, got {v}"))),
        },
    };
    let name = match obj.get("name") {
        None | Some(Value::Null) => None,
        Some(Value::String(n)) => Some(n.clone()),
        Some(v) => return Err(input(format!("name must be a string, got {v}"))),
    };
    let planted = match obj.get("planted") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|e| input(format!("invalid planted witness: {e}")))?,
        ),
    };
    let sys = SystemPair::new(to_mat(&a), to_mat(&b))?;
    Ok(ParsedSystem {
        file: SystemFile {
            a,
            b,
            s,
            name,
            planted,
        },
        sys,
    })
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_system_file(path: &Path) -> Result<ParsedSystem, CliError> {
    parse_system_text(&read_input(path)?)
}

/// Reads a change-of-input-basis file `{"Phi": [[..]]}`.
pub fn parse_input_basis(text: &str) -> Result<Mat, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| input(format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| input("input-basis file must be a JSON object"))?;
    Ok(to_mat(&matrix_field(obj, "Phi")?))
}

/// Accepts a bare certificate or any report containing one.
pub fn parse_certificate(text: &str) -> Result<sparsectl::control::Certificate, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| input(format!("malformed JSON: {e}")))?;
    if let Ok(cert) = serde_json::from_value(value.clone()) {
        return Ok(cert);
    }
    fn find(v: &Value) -> Option<&Value> {
        match v {
            Value::Object(o) => {
                if let Some(c) = o.get("certificate").filter(|c| !c.is_null()) {
                    return Some(c);
                }
                o.values().find_map(find)
            }
            _ => None,
        }
    }
    let inner = find(&value).ok_or_else(|| input("no certificate found in file"))?;
    serde_json::from_value(inner.clone()).map_err(|e| input(format!("invalid certificate: {e}")))
}
