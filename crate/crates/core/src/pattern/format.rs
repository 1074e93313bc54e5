//! Pattern files.
//!
//! ```text
//! shape 3 3 3
//! rank 1 2
//! 1 1 1          # observed index (1-based)
//! pivot 2 3 1    # explicit pivot, also marks the entry observed
//! value 1 2 1 0.75
//! ```
//!
//! A `value` line records an observed entry together with its value.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::SamplingPattern;
use crate::error::{Error, Result};
use crate::tensor::format::{at_line, fields, parse_f64, parse_usizes};
use crate::tensor::{RankVector, Shape};

#[derive(Debug, Clone, PartialEq)]
pub struct PatternFile {
    pub pattern: SamplingPattern,
    pub rank: Option<RankVector>,
    /// 0-based explicit pivots, if any `pivot` line is present.
    pub pivots: Option<Vec<Vec<usize>>>,
    /// 0-based index to observed value.
    pub values: BTreeMap<Vec<usize>, f64>,
}

impl PatternFile {
    /// Observed values in the pattern's lexicographic order, or `None` if
    /// some observed entry has no value.
    pub fn observed_values(&self) -> Option<Vec<f64>> {
        self.pattern
            .iter()
            .map(|x| self.values.get(x).copied())
            .collect()
    }
}

pub fn parse_pattern_file(text: &str) -> Result<PatternFile> {
    let mut shape: Option<Shape> = None;
    let mut rank = None;
    let mut indices: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut pivots: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut values = BTreeMap::new();
    let mut value_lines = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let f = fields(raw);
        if f.is_empty() {
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
            "pivot" => pivots.push((line, parse_usizes(line, &f[1..])?)),
            "value" => {
                if f.len() < 3 {
                    return Err(Error::Parse {
                        line,
                        message: "`value` needs an index and a number".into(),
                    });
                }
                let x = parse_usizes(line, &f[1..f.len() - 1])?;
                let v = parse_f64(line, f[f.len() - 1])?;
                value_lines.push((line, x, v));
            }
            _ => indices.push((line, parse_usizes(line, &f)?)),
        }
    }

    let shape = shape.ok_or(Error::Parse {
        line: 1,
        message: "missing `shape` line".into(),
    })?;
    let to_zero = |line: usize, x: &[usize]| -> Result<Vec<usize>> {
        if x.len() != shape.order() || x.contains(&0) || !x.iter().zip(shape.dims()).all(|(v, n)| v <= n) {
            return Err(Error::Parse {
                line,
                message: format!("index {x:?} is not a 1-based index into shape {shape}"),
            });
        }
        Ok(x.iter().map(|v| v - 1).collect())
    };

    let mut observed = std::collections::BTreeSet::new();
    for (line, x) in &indices {
        if !observed.insert(to_zero(*line, x)?) {
            return Err(Error::Parse {
                line: *line,
                message: format!("index {x:?} listed twice"),
            });
        }
    }
    let mut pivot_list = Vec::new();
    for (line, x) in &pivots {
        let z = to_zero(*line, x)?;
        observed.insert(z.clone());
        pivot_list.push(z);
    }
    for (line, x, v) in &value_lines {
        let z = to_zero(*line, x)?;
        observed.insert(z.clone());
        values.insert(z, *v);
    }
    if let Some(r) = &rank {
        r.validate_for(&shape).map_err(|e| at_line(1, e))?;
    }
    let pattern = SamplingPattern::new(shape, observed)?;
    Ok(PatternFile {
        pattern,
        rank,
        pivots: if pivot_list.is_empty() {
            None
        } else {
            Some(pivot_list)
        },
        values,
    })
}

/// Writes index lines, or `value` lines where a value is known.
pub fn write_pattern_file(
    pattern: &SamplingPattern,
    rank: Option<&RankVector>,
    values: &BTreeMap<Vec<usize>, f64>,
) -> String {
    let join = |x: &[usize], off: usize| -> String {
        let parts: Vec<String> = x.iter().map(|v| (v + off).to_string()).collect();
        parts.join(" ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "shape {}", join(pattern.shape().dims(), 0));
    if let Some(r) = rank {
        let _ = writeln!(out, "rank {}", join(r.ranks(), 0));
    }
    for x in pattern.iter() {
        match values.get(x) {
            Some(v) => {
                let _ = writeln!(out, "value {} {v:e}", join(x, 1));
            }
            None => {
                let _ = writeln!(out, "{}", join(x, 1));
            }
        }
    }
    out
}
