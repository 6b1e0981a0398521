//! CSV tables of equilibria, one row per equilibrium object.

use std::io::{Read, Write};

use endomarket_core::EquilibriumSet;

use crate::CliError;

pub const HEADER: [&str; 6] = [
    "price", "alpha_lo", "alpha_hi", "regime", "k_star", "source",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub price: f64,
    /// `None` on empty rows.
    pub alpha: Option<(f64, f64)>,
    pub regime: String,
    /// `-1` for intervals and empty rows.
    pub k_star: i64,
    pub source: String,
}

/// Rows for one equilibrium set, sorted by `alpha_lo`; a single `empty` row
/// when the set has no members.
pub fn records(set: &EquilibriumSet) -> Vec<CsvRecord> {
    let source = set.source.as_str().to_string();
    let mut rows: Vec<CsvRecord> = set
        .points
        .iter()
        .map(|p| CsvRecord {
            price: set.price,
            alpha: Some((p.alpha, p.alpha)),
            regime: p.regime.as_str().into(),
            k_star: p.threshold as i64,
            source: source.clone(),
        })
        .chain(set.intervals.iter().map(|iv| CsvRecord {
            price: set.price,
            alpha: Some((iv.lo, iv.hi)),
            regime: "mixed".into(),
            k_star: -1,
            source: source.clone(),
        }))
        .collect();
    rows.sort_by(|a, b| {
        let (x, y) = (a.alpha.unwrap(), b.alpha.unwrap());
        x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1))
    });
    if rows.is_empty() {
        rows.push(CsvRecord {
            price: set.price,
            alpha: None,
            regime: "empty".into(),
            k_star: -1,
            source,
        });
    }
    rows
}

/// Fixed-point notation with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99… → 10.0…).
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs() >= 10f64.powi(exponent + 1) {
        let d = decimals - 1;
        format!("{x:.d$}")
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[CsvRecord]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        let (lo, hi) = match r.alpha {
            Some((lo, hi)) => (format_number(lo), format_number(hi)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            format_number(r.price),
            lo,
            hi,
            r.regime.clone(),
            r.k_star.to_string(),
            r.source.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>, CliError> {
    let bad = |msg: String| CliError::Config(format!("malformed equilibrium table: {msg}"));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::Io(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(bad(format!("row has {} fields", rec.len())));
        }
        let alpha = if rec[1].is_empty() {
            None
        } else {
            Some((num(&rec[1])?, num(&rec[2])?))
        };
        out.push(CsvRecord {
            price: num(&rec[0])?,
            alpha,
            regime: rec[3].to_string(),
            k_star: rec[4].parse().map_err(|e| bad(format!("k_star: {e}")))?,
            source: rec[5].to_string(),
        });
    }
    Ok(out)
}
