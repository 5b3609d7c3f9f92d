//! Grouped bar charts as standalone SVG.
//!
//! One group per power (ascending), one bar per `(strategy, backend)`
//! series. Every bar is a `<rect class="bar">` carrying `data-power`,
//! `data-series` and `data-value`, so the document can be checked without
//! rendering it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::run::BenchmarkRecord;

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub log_scale: bool,
    pub title: Option<String>,
}

enum Axis {
    Linear { max: f64 },
    Log { lo: f64, hi: f64 },
}

impl Axis {
    fn fraction(&self, v: f64) -> f64 {
        match *self {
            Axis::Linear { max } => {
                if max > 0.0 {
                    v / max
                } else {
                    0.0
                }
            }
            Axis::Log { lo, hi } => (v.log10() - lo) / (hi - lo),
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match *self {
            Axis::Linear { max } => (0..=4)
                .map(|i| {
                    let v = max * i as f64 / 4.0;
                    (v, format!("{v:.3e}"))
                })
                .collect(),
            Axis::Log { lo, hi } => (lo as i32..=hi as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect(),
        }
    }
}

pub fn render_svg(records: &[BenchmarkRecord], opts: &PlotOptions) -> Result<String> {
    let sizes: BTreeSet<usize> = records.iter().map(|r| r.size).collect();
    if sizes.len() > 1 {
        return Err(BenchError::Plot(format!(
            "records span several sizes {sizes:?}; plot one size per file"
        )));
    }
    if let Some(r) = records
        .iter()
        .find(|r| !r.seconds.is_finite() || r.seconds < 0.0)
    {
        return Err(BenchError::Plot(format!(
            "invalid value {} for N={}",
            r.seconds, r.power
        )));
    }
    let axis = if opts.log_scale {
        if let Some(r) = records.iter().find(|r| r.seconds <= 0.0) {
            return Err(BenchError::Plot(format!(
                "log axis cannot show the zero value of {}/{} at N={}",
                r.strategy, r.backend, r.power
            )));
        }
        let lo = records
            .iter()
            .map(|r| r.seconds)
            .fold(f64::INFINITY, f64::min);
        let hi = records.iter().map(|r| r.seconds).fold(0.0, f64::max);
        let (lo, mut hi) = (lo.log10().floor(), hi.log10().ceil());
        if hi <= lo {
            hi = lo + 1.0;
        }
        Axis::Log { lo, hi }
    } else {
        Axis::Linear {
            max: records.iter().map(|r| r.seconds).fold(0.0, f64::max),
        }
    };

    let powers: Vec<u64> = records
        .iter()
        .map(|r| r.power)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let series: Vec<String> = records
        .iter()
        .map(series_name)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let base_y = MARGIN_TOP + plot_h;
    let group_w = plot_w / powers.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    let title = opts
        .title
        .clone()
        .unwrap_or_else(|| match sizes.iter().next() {
            Some(n) => format!("Matrix exponentiation, size {n} by {n}"),
            None => "Matrix exponentiation".to_string(),
        });
    writeln!(
        w,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&title)
    )
    .unwrap();

    for (v, label) in axis.ticks() {
        let y = base_y - axis.fraction(v) * plot_h;
        writeln!(
            w,
            r##"<line class="tick" x1="{MARGIN_LEFT}" x2="{}" y1="{y:.3}" y2="{y:.3}" stroke="#ddd"/><text x="{}" y="{:.3}" text-anchor="end">{label}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<line x1="{MARGIN_LEFT}" x2="{MARGIN_LEFT}" y1="{MARGIN_TOP}" y2="{base_y}" stroke="black"/><line x1="{MARGIN_LEFT}" x2="{}" y1="{base_y}" y2="{base_y}" stroke="black"/>"#,
        MARGIN_LEFT + plot_w
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        if opts.log_scale {
            "seconds (log)"
        } else {
            "seconds"
        }
    )
    .unwrap();

    for (gi, power) in powers.iter().enumerate() {
        let gx = MARGIN_LEFT + gi as f64 * group_w + group_w * 0.1;
        writeln!(
            w,
            r#"<text x="{:.3}" y="{}" text-anchor="middle">N={power}</text>"#,
            gx + group_w * 0.4,
            base_y + 18.0
        )
        .unwrap();
        for (si, name) in series.iter().enumerate() {
            let Some(r) = records
                .iter()
                .find(|r| r.power == *power && series_name(r) == *name)
            else {
                continue;
            };
            let h = axis.fraction(r.seconds) * plot_h;
            writeln!(
                w,
                r#"<rect class="bar" data-power="{power}" data-series="{}" data-value="{}" x="{:.3}" y="{:.6}" width="{:.3}" height="{:.6}" fill="{}"/>"#,
                escape(name),
                r.seconds,
                gx + si as f64 * bar_w,
                base_y - h,
                bar_w,
                h,
                PALETTE[si % PALETTE.len()]
            )
            .unwrap();
        }
    }

    for (si, name) in series.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + si as f64 * 20.0;
        let x = WIDTH - MARGIN_RIGHT + 15.0;
        writeln!(
            w,
            r#"<rect class="legend" x="{x}" y="{y}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            PALETTE[si % PALETTE.len()],
            x + 18.0,
            y + 10.0,
            escape(name)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(records: &[BenchmarkRecord], path: &Path, opts: &PlotOptions) -> Result<()> {
    let svg = render_svg(records, opts)?;
    fs::write(path, svg)?;
    Ok(())
}

fn series_name(r: &BenchmarkRecord) -> String {
    format!("{} / {}", r.strategy, r.backend)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
