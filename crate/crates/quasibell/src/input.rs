//! Parsing of command-line vectors and instance files.

use std::fs;
use std::path::Path;

use quasibell_core::quasi_bell::QuasiBellInstance;
use quasibell_core::Direction;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Inputs whose norm differs from 1 by more than this are reported.
pub const NORM_WARNING: f64 = 1e-6;

/// Parses `x,y,z`.
pub fn parse_vector(s: &str) -> CliResult<Direction> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Invalid(format!(
            "expected three comma-separated numbers, got `{s}`"
        )));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .map_err(|_| CliError::Invalid(format!("`{p}` is not a number in `{s}`")))?;
        if !slot.is_finite() {
            return Err(CliError::Invalid(format!("non-finite component in `{s}`")));
        }
    }
    Ok(Direction::from(v))
}

/// Rescales `d` to unit length, warning on stderr when that changes it
/// noticeably. Vectors already unit to rounding are returned as given.
/// Fails for the zero vector.
pub fn normalize_axis(name: &str, d: Direction) -> CliResult<Direction> {
    let n = d.norm();
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(d);
    }
    if (n - 1.0).abs() > NORM_WARNING {
        eprintln!("warning: {name} had norm {n}; normalized");
    }
    d.normalized()
        .filter(|_| n > 0.0)
        .ok_or_else(|| CliError::Invalid(format!("{name} is the zero vector")))
}

/// A measurement axis given on the command line.
pub fn parse_axis(name: &str, s: &str) -> CliResult<Direction> {
    normalize_axis(name, parse_vector(s)?)
}

/// A Bloch vector, which may be shorter than 1 but not longer.
pub fn parse_bloch(s: &str) -> CliResult<Direction> {
    let u = parse_vector(s)?;
    let n = u.norm();
    if n > 1.0 + NORM_WARNING {
        return Err(CliError::Invalid(format!(
            "Bloch vector `{s}` has norm {n} > 1"
        )));
    }
    if n > 1.0 {
        eprintln!("warning: Bloch vector had norm {n}; normalized");
        return Ok(u * (1.0 / n));
    }
    Ok(u)
}

/// `{N, a_dirs, b_dirs}` on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "N")]
    pub order: usize,
    pub a_dirs: Vec<[f64; 3]>,
    pub b_dirs: Vec<[f64; 3]>,
}

impl InstanceFile {
    pub fn from_instance(inst: &QuasiBellInstance) -> Self {
        Self {
            order: inst.order,
            a_dirs: inst.a_dirs.iter().map(|d| d.to_array()).collect(),
            b_dirs: inst.b_dirs.iter().map(|d| d.to_array()).collect(),
        }
    }

    /// Validated instance, with every axis normalized.
    pub fn to_instance(&self) -> CliResult<QuasiBellInstance> {
        let axes = |party: &str, dirs: &[[f64; 3]]| -> CliResult<Vec<Direction>> {
            dirs.iter()
                .enumerate()
                .map(|(k, d)| normalize_axis(&format!("{party}_{k}"), Direction::from(*d)))
                .collect()
        };
        Ok(QuasiBellInstance::new(
            self.order,
            axes("a", &self.a_dirs)?,
            axes("b", &self.b_dirs)?,
        )?)
    }
}

pub fn read_instance(path: &Path) -> CliResult<QuasiBellInstance> {
    let text = fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    file.to_instance()
}

/// `start:stop:step`.
pub fn parse_range(s: &str) -> CliResult<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Invalid(format!("expected start:stop:step, got `{s}`")))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(CliError::Invalid(format!(
            "expected start:stop:step, got `{s}`"
        ))),
    }
}
