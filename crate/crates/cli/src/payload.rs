//! Job payload parsing: one JSON object, read from stdin or --input, with
//! every error carrying the JSON path of the offending field. Numbers may
//! be given as JSON numbers or as decimal strings.

use hyperball::ball::{RealMobius, RealPoint};
use hyperball::bergman::{ComplexAutomorphism, ComplexPoint};
use hyperball::measure::RegionSpec;
use hyperball::model::HyperbolicPoint;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

/// Error plus process exit code: 2 validation, 3 solver failure,
/// 4 sampling degeneracy.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<hyperball::Error> for CliError {
    fn from(e: hyperball::Error) -> Self {
        let code = match &e {
            hyperball::Error::NoConvergence { .. } => 3,
            hyperball::Error::DegenerateRegion { .. } => 4,
            _ => 2,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

pub fn parse_payload(text: &str) -> Result<Value, CliError> {
    if text.trim().is_empty() {
        return Ok(Value::Object(Default::default()));
    }
    serde_json::from_str(text).map_err(|e| {
        CliError::validation(format!(
            "malformed input at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn field<'a>(payload: &'a Value, name: &str) -> Option<&'a Value> {
    payload.get(name).filter(|v| !v.is_null())
}

/// A number, or a decimal string (locale-proof input).
pub fn num(v: &Value, path: &str) -> Result<f64, CliError> {
    let parsed = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::validation(format!(
            "{path}: expected a finite number or decimal string, found {v}"
        ))),
    }
}

pub fn integer(v: &Value, path: &str) -> Result<u64, CliError> {
    match v {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse::<u64>().ok(),
        _ => None,
    }
    .ok_or_else(|| CliError::validation(format!("{path}: expected a non-negative integer")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::validation(format!("{path}: expected an array")))
}

pub fn parse_real_point(v: &Value, dim: Option<usize>, path: &str) -> Result<RealPoint, CliError> {
    let items = array(v, path)?;
    if let Some(d) = dim {
        if items.len() != d {
            return Err(CliError::validation(format!(
                "{path}: expected {d} coordinates, found {}",
                items.len()
            )));
        }
    }
    let coords = items
        .iter()
        .enumerate()
        .map(|(i, x)| num(x, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    RealPoint::new(coords).map_err(|e| CliError::validation(format!("{path}: {e}")))
}

/// A complex scalar: [re, im], or a bare number (purely real).
fn complex_scalar(v: &Value, path: &str) -> Result<Complex64, CliError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
            num(&pair[0], &format!("{path}[0]"))?,
            num(&pair[1], &format!("{path}[1]"))?,
        )),
        Value::Number(_) | Value::String(_) => Ok(Complex64::new(num(v, path)?, 0.0)),
        _ => Err(CliError::validation(format!(
            "{path}: expected [re, im] or a real number"
        ))),
    }
}

/// A point of ℂᵐ: an array of m [re, im] pairs, or a flat array of 2m
/// numbers.
pub fn parse_complex_point(
    v: &Value,
    dim: Option<usize>,
    path: &str,
) -> Result<ComplexPoint, CliError> {
    let items = array(v, path)?;
    let pairs = !items.is_empty() && items.iter().all(|x| x.is_array());
    let coords: Vec<Complex64> = if pairs {
        items
            .iter()
            .enumerate()
            .map(|(i, x)| complex_scalar(x, &format!("{path}[{i}]")))
            .collect::<Result<_, _>>()?
    } else {
        if items.len() % 2 != 0 {
            return Err(CliError::validation(format!(
                "{path}: a flat complex point needs an even number of coordinates"
            )));
        }
        let flat = items
            .iter()
            .enumerate()
            .map(|(i, x)| num(x, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        flat.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
    };
    if let Some(d) = dim {
        if coords.len() != d {
            return Err(CliError::validation(format!(
                "{path}: expected {d} complex coordinates, found {}",
                coords.len()
            )));
        }
    }
    ComplexPoint::new(coords).map_err(|e| CliError::validation(format!("{path}: {e}")))
}

fn parse_real_matrix(v: &Value, n: usize, path: &str) -> Result<DMatrix<f64>, CliError> {
    let rows = array(v, path)?;
    if rows.len() != n {
        return Err(CliError::validation(format!(
            "{path}: expected {n} rows, found {}",
            rows.len()
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, &format!("{path}[{i}]"))?;
        if row.len() != n {
            return Err(CliError::validation(format!(
                "{path}[{i}]: expected {n} entries, found {}",
                row.len()
            )));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = num(x, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn parse_complex_matrix(v: &Value, m: usize, path: &str) -> Result<DMatrix<Complex64>, CliError> {
    let rows = array(v, path)?;
    if rows.len() != m {
        return Err(CliError::validation(format!(
            "{path}: expected {m} rows, found {}",
            rows.len()
        )));
    }
    let mut out = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, &format!("{path}[{i}]"))?;
        if row.len() != m {
            return Err(CliError::validation(format!(
                "{path}[{i}]: expected {m} entries, found {}",
                row.len()
            )));
        }
        for (j, x) in row.iter().enumerate() {
            out[(i, j)] = complex_scalar(x, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(out)
}

/// {"center": point, "matrix": optional square matrix}; the matrix
/// defaults to the identity, i.e. the pure involution.
pub fn parse_real_map(v: &Value, dim: usize, path: &str) -> Result<RealMobius, CliError> {
    let center = field(v, "center")
        .ok_or_else(|| CliError::validation(format!("{path}.center: field required")))
        .and_then(|c| parse_real_point(c, Some(dim), &format!("{path}.center")))?;
    match field(v, "matrix") {
        None => Ok(RealMobius::translation(center)),
        Some(mv) => {
            let matrix = parse_real_matrix(mv, dim, &format!("{path}.matrix"))?;
            RealMobius::new(center, matrix).map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
    }
}

pub fn parse_complex_map(
    v: &Value,
    dim: usize,
    path: &str,
) -> Result<ComplexAutomorphism, CliError> {
    let center = field(v, "center")
        .ok_or_else(|| CliError::validation(format!("{path}.center: field required")))
        .and_then(|c| parse_complex_point(c, Some(dim), &format!("{path}.center")))?;
    match field(v, "matrix") {
        None => Ok(ComplexAutomorphism::translation(center)),
        Some(mv) => {
            let matrix = parse_complex_matrix(mv, dim, &format!("{path}.matrix"))?;
            ComplexAutomorphism::new(center, matrix)
                .map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
    }
}

/// Region object: {"variant": "ellipsoid"|"ball"|"mobius_image"|
/// "intersection", ...parameters}. Shape matrices are given in ambient
/// real coordinates for both models.
pub fn parse_region<P, FPoint, FMap>(
    v: &Value,
    dim: usize,
    path: &str,
    parse_point: &FPoint,
    parse_map: &FMap,
) -> Result<RegionSpec<P>, CliError>
where
    P: HyperbolicPoint,
    FPoint: Fn(&Value, Option<usize>, &str) -> Result<P, CliError>,
    FMap: Fn(&Value, usize, &str) -> Result<P::Map, CliError>,
{
    let variant = field(v, "variant")
        .and_then(|x| x.as_str())
        .ok_or_else(|| CliError::validation(format!("{path}.variant: field required")))?;
    match variant {
        "ellipsoid" => {
            let center = field(v, "center")
                .ok_or_else(|| CliError::validation(format!("{path}.center: field required")))
                .and_then(|c| parse_point(c, Some(dim), &format!("{path}.center")))?;
            let ambient = center.ambient_dim();
            let shape = field(v, "shape")
                .ok_or_else(|| CliError::validation(format!("{path}.shape: field required")))
                .and_then(|s| parse_real_matrix(s, ambient, &format!("{path}.shape")))?;
            RegionSpec::ellipsoid(center, shape)
                .map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
        "ball" => {
            let center = field(v, "center")
                .ok_or_else(|| CliError::validation(format!("{path}.center: field required")))
                .and_then(|c| parse_point(c, Some(dim), &format!("{path}.center")))?;
            let radius = field(v, "radius")
                .ok_or_else(|| CliError::validation(format!("{path}.radius: field required")))
                .and_then(|r| num(r, &format!("{path}.radius")))?;
            RegionSpec::ball(center, radius)
                .map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
        "mobius_image" => {
            let inner = field(v, "inner")
                .ok_or_else(|| CliError::validation(format!("{path}.inner: field required")))
                .and_then(|i| {
                    parse_region(i, dim, &format!("{path}.inner"), parse_point, parse_map)
                })?;
            let map = field(v, "map")
                .ok_or_else(|| CliError::validation(format!("{path}.map: field required")))
                .and_then(|m| parse_map(m, dim, &format!("{path}.map")))?;
            inner
                .pushforward(map)
                .map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
        "intersection" => {
            let members = field(v, "members")
                .and_then(|m| m.as_array())
                .ok_or_else(|| {
                    CliError::validation(format!("{path}.members: expected an array"))
                })?;
            let parsed = members
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    parse_region(m, dim, &format!("{path}.members[{i}]"), parse_point, parse_map)
                })
                .collect::<Result<Vec<_>, _>>()?;
            RegionSpec::intersection(parsed)
                .map_err(|e| CliError::validation(format!("{path}: {e}")))
        }
        other => Err(CliError::validation(format!(
            "{path}.variant: unknown region variant {other:?}"
        ))),
    }
}
