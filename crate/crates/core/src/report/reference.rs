//! Printed reference values, bundled as a read-only transcription.

use crate::error::{Error, Result};
use std::sync::OnceLock;

const DATA: &str = include_str!("../../data/reference_tables.csv");

/// One printed value.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceEntry {
    pub table: String,
    pub family: String,
    pub bands: usize,
    pub eps: Option<f64>,
    pub m: usize,
    pub mprime: usize,
    pub lag: Option<i64>,
    /// Decay power for asymptotic entries (`value / τ^power`).
    pub power: Option<u32>,
    pub value: f64,
}

fn parse_eps(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    let bad = || Error::Parse(format!("bad eps '{s}'"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.parse().map_err(|_| bad())?;
            let b: f64 = b.parse().map_err(|_| bad())?;
            Ok(Some(a / b))
        }
        None => s.parse().map(Some).map_err(|_| bad()),
    }
}

fn opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| Error::Parse(format!("bad field '{s}'")))
    }
}

fn req<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad field '{s}'")))
}

fn parse(data: &str) -> Result<Vec<ReferenceEntry>> {
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let r = rec?;
        out.push(ReferenceEntry {
            table: r[0].to_string(),
            family: r[1].to_string(),
            bands: req(&r[2])?,
            eps: parse_eps(&r[3])?,
            m: req(&r[4])?,
            mprime: req(&r[5])?,
            lag: opt(&r[6])?,
            power: opt(&r[7])?,
            value: req(&r[8])?,
        });
    }
    Ok(out)
}

/// All transcribed values, in file order.
pub fn reference_entries() -> &'static [ReferenceEntry] {
    static ENTRIES: OnceLock<Vec<ReferenceEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| parse(DATA).expect("bundled table data is well formed"))
}

/// Entries of one table.
pub fn table_entries(table: &str) -> Vec<&'static ReferenceEntry> {
    reference_entries().iter().filter(|e| e.table == table).collect()
}

/// Printed value for a cell, if any.
pub fn printed_value(table: &str, family: &str, bands: usize, m: usize, mprime: usize, lag: Option<i64>) -> Option<f64> {
    reference_entries()
        .iter()
        .find(|e| e.table == table && e.family == family && e.bands == bands && e.m == m && e.mprime == mprime && e.lag == lag)
        .map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_counts() {
        let count = |t: &str| table_entries(t).len();
        assert_eq!(count("dyadic_theory"), 35);
        assert_eq!(count("meyer_first"), 42);
        assert_eq!(count("meyer_last"), 18);
        assert_eq!(count("hadamard"), 18);
        assert_eq!(count("asymptotic_haar"), 12);
        assert_eq!(count("interband"), 91);
    }

    #[test]
    fn lookups() {
        assert_eq!(printed_value("dyadic_theory", "haar", 2, 1, 1, Some(1)), Some(0.10816));
        assert_eq!(printed_value("hadamard", "haar", 8, 5, 5, Some(1)), Some(-2.8899e-2));
        let e = table_entries("meyer_first");
        assert!((e[0].eps.unwrap() - 0.25).abs() < 1e-15);
        let a = table_entries("asymptotic_haar");
        assert_eq!(a[2].power, Some(5));
        assert_eq!(a[2].value, -3.0 / 128.0);
    }
}
