//! Machine-readable records written by the command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use quasibell_core::joint::{Interval, OutcomeTable};
use quasibell_core::pauli::Outcome;
use quasibell_core::CorrelatorSpec;
use serde::Serialize;

use crate::error::CliResult;

/// Version, seed, settings and the formulas behind a result. Embedded in
/// every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub formula_refs: Vec<&'static str>,
}

impl Provenance {
    pub fn new<C: Serialize>(seed: Option<u64>, config: &C, formula_refs: &[&'static str]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            formula_refs: formula_refs.to_vec(),
        }
    }
}

/// `{provenance, ...record}` with the record's fields inlined.
#[derive(Debug, Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub record: &'a T,
}

pub fn outcome_key(outcomes: &[Outcome]) -> String {
    outcomes
        .iter()
        .map(|o| if *o == Outcome::Plus { '+' } else { '-' })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRecord {
    pub arity: usize,
    pub directions: Vec<[f64; 3]>,
    pub bloch_u: [f64; 3],
    pub correlators: Option<CorrelatorSpec>,
    /// Keyed by outcome string such as `"+-"`; sorted keys follow table order.
    pub entries: BTreeMap<String, f64>,
    pub min_entry: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity_interval: Option<Interval>,
}

impl TableRecord {
    pub fn new(t: &OutcomeTable, positivity_interval: Option<Interval>) -> Self {
        Self {
            arity: t.arity,
            directions: t.directions.iter().map(|d| d.to_array()).collect(),
            bloch_u: t.bloch_u.to_array(),
            correlators: t.correlators.clone(),
            entries: t.iter().map(|(o, p)| (outcome_key(&o), p)).collect(),
            min_entry: t.min_entry(),
            positivity_interval,
        }
    }
}

/// Writes `text` to `out`, or stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

pub fn to_json<T: Serialize>(provenance: &Provenance, record: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&Artifact { provenance, record })?;
    s.push('\n');
    Ok(s)
}

/// Plain fixed-width text table.
pub fn pretty_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(header.to_vec());
    s += &line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(|x| x.as_str())
            .collect(),
    );
    for r in rows {
        s += &line(r.iter().map(String::as_str).collect());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use quasibell_core::joint::noncommuting_pair_table;
    use quasibell_core::Direction;

    #[test]
    fn table_record_keys_in_table_order() {
        let t = noncommuting_pair_table(
            Direction::ZERO,
            Direction::X,
            Direction::Y,
            &CorrelatorSpec::pair(0.0),
        )
        .unwrap();
        let r = TableRecord::new(&t, None);
        let keys: Vec<&String> = r.entries.keys().collect();
        assert_eq!(keys, ["++", "+-", "-+", "--"]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("positivity_interval"));
    }

    #[test]
    fn artifact_inlines_record() {
        #[derive(Serialize)]
        struct R {
            value: f64,
        }
        let p = Provenance::new(Some(3), &serde_json::json!({"k": 1}), &["x"]);
        let s = to_json(&p, &R { value: 1.5 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["value"], 1.5);
        assert_eq!(v["provenance"]["seed"], 3);
        assert_eq!(v["provenance"]["formula_refs"][0], "x");
    }

    #[test]
    fn pretty_table_aligns() {
        let s = pretty_table(
            &["a", "bb"],
            &[vec!["1".into(), "2".into()], vec!["10".into(), "3".into()]],
        );
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], " a  bb");
        assert_eq!(lines[3], "10   3");
    }
}
