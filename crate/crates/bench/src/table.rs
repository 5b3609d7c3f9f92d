//! Speedup tables laid out like the published per-size tables.
//!
//! Row roles for one matrix size:
//!
//! | row | records |
//! |-----|---------|
//! | `Naïve GPU (In Sec)` | repeated strategy on the accelerated backend |
//! | `Sequential CPU (In Sec)` | repeated strategy on the `naive` backend |
//! | `Naïve Speed UP` | sequential / naive GPU |
//! | `Our Approach (In Sec)` | squared strategy on the accelerated backend |
//! | `Our Approach vs Naïve GPU` | naive GPU / our approach |
//!
//! The accelerated backend is the one backend other than `naive`, or
//! `naive` itself when it is the only one. The sequential rows appear only
//! when a separate accelerated backend exists and `naive` repeated records
//! are present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use matexpo_core::Strategy;

use crate::error::{BenchError, Result};
use crate::run::BenchmarkRecord;

pub const ROW_NAIVE_GPU: &str = "Naïve GPU (In Sec)";
pub const ROW_SEQUENTIAL: &str = "Sequential CPU (In Sec)";
pub const ROW_NAIVE_SPEEDUP: &str = "Naïve Speed UP";
pub const ROW_OURS: &str = "Our Approach (In Sec)";
pub const ROW_OURS_VS_NAIVE: &str = "Our Approach vs Naïve GPU";

/// `slow / fast` rounded to two decimals.
pub fn speedup(slow: f64, fast: f64) -> f64 {
    (slow / fast * 100.0).round() / 100.0
}

/// Paper-style cells: two decimals from 10 ms upwards, scientific below.
pub fn format_seconds(s: f64) -> String {
    if s >= 0.01 {
        format!("{s:.2}")
    } else {
        format!("{s:.2e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupTable {
    pub size: usize,
    pub powers: Vec<u64>,
    /// Label and one value per power.
    pub rows: Vec<(String, Vec<f64>)>,
}

impl SpeedupTable {
    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.rows
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }

    pub fn render(&self) -> String {
        let is_ratio = |l: &str| l == ROW_NAIVE_SPEEDUP || l == ROW_OURS_VS_NAIVE;
        let cells: Vec<(String, Vec<String>)> = self
            .rows
            .iter()
            .map(|(label, vals)| {
                let cells = vals
                    .iter()
                    .map(|&v| {
                        if is_ratio(label) {
                            format!("{v:.2}")
                        } else {
                            format_seconds(v)
                        }
                    })
                    .collect();
                (label.clone(), cells)
            })
            .collect();
        let label_w = cells
            .iter()
            .map(|(l, _)| l.chars().count())
            .max()
            .unwrap_or(0);
        let mut col_w: Vec<usize> = self.powers.iter().map(|p| p.to_string().len()).collect();
        for (_, row) in &cells {
            for (w, c) in col_w.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }

        let mut out = String::new();
        let n = self.size;
        writeln!(out, "Exponentiation of Matrix of Size {n} by {n}").unwrap();
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
        write!(out, "{}", pad("", label_w)).unwrap();
        for (p, w) in self.powers.iter().zip(&col_w) {
            write!(out, "  {:>w$}", p, w = w).unwrap();
        }
        out.push('\n');
        for (label, row) in &cells {
            write!(out, "{}", pad(label, label_w)).unwrap();
            for (c, w) in row.iter().zip(&col_w) {
                write!(out, "  {:>w$}", c, w = w).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the table for the single size covered by `records`.
pub fn build_table(records: &[BenchmarkRecord]) -> Result<SpeedupTable> {
    let sizes: BTreeSet<usize> = records.iter().map(|r| r.size).collect();
    let size = match sizes.len() {
        0 => return Err(BenchError::Table("no records".into())),
        1 => *sizes.iter().next().unwrap(),
        _ => {
            return Err(BenchError::Table(format!(
                "records span several sizes {sizes:?}; build one table per size"
            )))
        }
    };
    let others: BTreeSet<&str> = records
        .iter()
        .map(|r| r.backend.as_str())
        .filter(|b| *b != "naive")
        .collect();
    let accel = match others.len() {
        0 => "naive",
        1 => *others.iter().next().unwrap(),
        _ => {
            return Err(BenchError::Table(format!(
                "more than one accelerated backend: {others:?}"
            )))
        }
    };
    let powers: Vec<u64> = records
        .iter()
        .map(|r| r.power)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let cells: BTreeMap<(&str, Strategy, u64), f64> = records
        .iter()
        .map(|r| ((r.backend.as_str(), r.strategy, r.power), r.seconds))
        .collect();
    let mut missing = Vec::new();
    let mut series = |backend: &str, strategy: Strategy| -> Vec<f64> {
        powers
            .iter()
            .map(|&p| match cells.get(&(backend, strategy, p)) {
                Some(&s) => s,
                None => {
                    missing.push(format!("{backend}/{strategy}/N={p}"));
                    f64::NAN
                }
            })
            .collect()
    };

    let naive_gpu = series(accel, Strategy::Repeated);
    let ours = series(accel, Strategy::Squared);
    let with_sequential = accel != "naive"
        && records
            .iter()
            .any(|r| r.backend == "naive" && r.strategy == Strategy::Repeated);
    let sequential = with_sequential.then(|| series("naive", Strategy::Repeated));
    if !missing.is_empty() {
        return Err(BenchError::Table(format!(
            "ragged grid for size {size}, missing cells: {}",
            missing.join(", ")
        )));
    }

    let ratio = |slow: &[f64], fast: &[f64]| -> Vec<f64> {
        slow.iter()
            .zip(fast)
            .map(|(&s, &f)| speedup(s, f))
            .collect()
    };
    let mut rows = vec![(ROW_NAIVE_GPU.to_string(), naive_gpu.clone())];
    if let Some(seq) = sequential {
        rows.push((ROW_NAIVE_SPEEDUP.to_string(), ratio(&seq, &naive_gpu)));
        rows.insert(1, (ROW_SEQUENTIAL.to_string(), seq));
    }
    rows.push((ROW_OURS.to_string(), ours.clone()));
    rows.push((ROW_OURS_VS_NAIVE.to_string(), ratio(&naive_gpu, &ours)));
    Ok(SpeedupTable { size, powers, rows })
}

pub fn emit_table(records: &[BenchmarkRecord]) -> Result<String> {
    build_table(records).map(|t| t.render())
}
