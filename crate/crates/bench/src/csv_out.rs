use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use matexpo_core::Strategy;

use crate::error::{BenchError, Result};
use crate::run::BenchmarkRecord;

pub const CSV_HEADER: [&str; 9] = [
    "size",
    "power",
    "strategy",
    "backend",
    "seconds",
    "multiply_count",
    "transfer_count",
    "max_rel_err",
    "nonfinite",
];

/// Marker in the `max_rel_err` column for points above the oracle cap.
pub const SKIPPED: &str = "skipped";

/// Writes the header and one row per record, sorted by size, power,
/// strategy and backend. Floats use shortest round-trip formatting.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], w: W) -> Result<()> {
    let mut sorted: Vec<&BenchmarkRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in sorted {
        out.write_record([
            r.size.to_string(),
            r.power.to_string(),
            r.strategy.to_string(),
            r.backend.clone(),
            r.seconds.to_string(),
            r.multiply_count.to_string(),
            r.transfer_count.to_string(),
            r.max_rel_err
                .map_or_else(|| SKIPPED.to_string(), |e| e.to_string()),
            r.nonfinite.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchmarkRecord], path: &Path) -> Result<()> {
    write_csv(records, File::create(path)?)
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchmarkRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Table(format!(
            "unexpected csv header {header:?}"
        )));
    }
    let bad = |field: &str, v: &str| BenchError::Table(format!("bad {field} `{v}`"));
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let f = |i: usize| row.get(i).unwrap_or_default();
        let num = |i: usize| f(i).parse::<u64>().map_err(|_| bad(CSV_HEADER[i], f(i)));
        records.push(BenchmarkRecord {
            size: num(0)? as usize,
            power: num(1)?,
            strategy: f(2)
                .parse::<Strategy>()
                .map_err(|_| bad("strategy", f(2)))?,
            backend: f(3).to_string(),
            seconds: f(4).parse().map_err(|_| bad("seconds", f(4)))?,
            multiply_count: num(5)?,
            transfer_count: num(6)?,
            max_rel_err: match f(7) {
                SKIPPED => None,
                v => Some(v.parse().map_err(|_| bad("max_rel_err", v))?),
            },
            nonfinite: f(8).parse().map_err(|_| bad("nonfinite", f(8)))?,
        });
    }
    Ok(records)
}
