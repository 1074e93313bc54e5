//! Plain-text tensor files.
//!
//! ```text
//! # comment
//! shape 2 2 2
//! rank 1 1
//! dense
//! 1 2 3 4
//! 5 6 7 8
//! ```
//!
//! `rank` is optional; without `dense` the file describes a shape only.
//! Values follow the column-major linearization of [`Shape`].

use std::fmt::Write as _;

use super::{DenseTensor, RankVector, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub shape: Shape,
    pub rank: Option<RankVector>,
    pub tensor: Option<DenseTensor>,
}

pub(crate) fn parse_usizes(line: usize, fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a non-negative integer, got `{f}`"),
            })
        })
        .collect()
}

pub(crate) fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("expected a real number, got `{field}`"),
    })
}

pub(crate) fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            message: other.to_string(),
        },
    }
}

/// Strips `#` comments and splits into whitespace-separated fields.
pub(crate) fn fields(raw: &str) -> Vec<&str> {
    raw.split('#').next().unwrap_or("").split_whitespace().collect()
}

pub fn parse_tensor_file(text: &str) -> Result<TensorFile> {
    let mut shape: Option<Shape> = None;
    let mut rank = None;
    let mut values: Option<Vec<f64>> = None;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let f = fields(raw);
        if f.is_empty() {
            continue;
        }
        if let Some(vals) = values.as_mut() {
            for field in &f {
                vals.push(parse_f64(line, field)?);
            }
            continue;
        }
        match f[0] {
            "shape" => {
                let dims = parse_usizes(line, &f[1..])?;
                shape = Some(Shape::new(dims).map_err(|e| at_line(line, e))?);
            }
            "rank" => {
                let r = parse_usizes(line, &f[1..])?;
                rank = Some(RankVector::new(r).map_err(|e| at_line(line, e))?);
            }
            "dense" => {
                let mut vals = Vec::new();
                for field in &f[1..] {
                    vals.push(parse_f64(line, field)?);
                }
                values = Some(vals);
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let shape = shape.ok_or(Error::Parse {
        line: last_line.max(1),
        message: "missing `shape` line".into(),
    })?;
    if let Some(r) = &rank {
        r.validate_for(&shape).map_err(|e| at_line(1, e))?;
    }
    let tensor = match values {
        Some(v) => Some(DenseTensor::new(shape.clone(), v).map_err(|e| at_line(last_line, e))?),
        None => None,
    };
    Ok(TensorFile {
        shape,
        rank,
        tensor,
    })
}

/// Writes `shape`, optional `rank`, and the values one mode-1 fiber per line.
pub fn write_tensor_file(tensor: &DenseTensor, rank: Option<&RankVector>) -> String {
    let mut out = String::new();
    let dims: Vec<String> = tensor.shape().dims().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "shape {}", dims.join(" "));
    if let Some(r) = rank {
        let rs: Vec<String> = r.ranks().iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "rank {}", rs.join(" "));
    }
    out.push_str("dense\n");
    let n1 = tensor.shape().dims()[0];
    for fiber in tensor.values().chunks(n1) {
        let vs: Vec<String> = fiber.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", vs.join(" "));
    }
    out
}
