//! Deterministic SVG line plots from CSV columns.
//!
//! Fixed 800x600 canvas, fixed margins, five ticks per axis with labels in
//! scientific notation, and path coordinates printed with three decimals,
//! so identical inputs give byte-identical files.

use crate::table::Table;
use anyhow::{bail, Result};
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Plot request: `<xcol>:<ycol1>[,<ycol2>...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSpec {
    pub x_column: String,
    pub y_columns: Vec<String>,
}

impl PlotSpec {
    pub fn parse(text: &str) -> Result<PlotSpec> {
        let Some((x, ys)) = text.split_once(':') else {
            bail!("plot spec must look like 'xcol:ycol1,ycol2', got '{text}'");
        };
        let y_columns: Vec<String> = ys
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if y_columns.is_empty() {
            bail!("plot spec needs at least one y column");
        }
        Ok(PlotSpec {
            x_column: x.trim().to_string(),
            y_columns,
        })
    }
}

fn axis_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        // flat data: pad symmetrically
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

/// Renders the CSV columns to SVG text.
pub fn emit_plot(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    let table = Table::parse(csv_text)?;
    let xs = table.column(&spec.x_column)?;
    if xs.is_empty() {
        bail!("no data rows to plot");
    }
    let ys: Vec<Vec<f64>> = spec
        .y_columns
        .iter()
        .map(|name| table.column(name))
        .collect::<Result<_>>()?;

    let (x_lo, x_hi) = axis_range(&xs);
    let all_y: Vec<f64> = ys.iter().flatten().copied().collect();
    let (y_lo, y_hi) = axis_range(&all_y);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |v: f64| MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| MARGIN_TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )?;
    writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>")?;

    // axes
    writeln!(
        svg,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    )?;
    writeln!(
        svg,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    )?;

    // five ticks per axis
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let px = sx(xv);
        writeln!(
            svg,
            "<line x1=\"{px:.3}\" y1=\"{:.3}\" x2=\"{px:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        )?;
        writeln!(
            svg,
            "<text x=\"{px:.3}\" y=\"{:.3}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{xv:.4e}</text>",
            MARGIN_TOP + plot_h + 20.0
        )?;
        let yv = y_lo + f * (y_hi - y_lo);
        let py = sy(yv);
        writeln!(
            svg,
            "<line x1=\"{:.3}\" y1=\"{py:.3}\" x2=\"{:.3}\" y2=\"{py:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        )?;
        writeln!(
            svg,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{yv:.4e}</text>",
            MARGIN_LEFT - 8.0,
            py + 4.0
        )?;
    }

    // axis labels
    writeln!(
        svg,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        spec.x_column
    )?;

    // polylines and legend
    for (k, (name, series)) in spec.y_columns.iter().zip(&ys).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        for (i, (&x, &y)) in xs.iter().zip(series.iter()).enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(path, "{cmd}{:.3} {:.3}", sx(x), sy(y))?;
        }
        writeln!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        )?;
        let ly = MARGIN_TOP + 16.0 * k as f64 + 12.0;
        writeln!(
            svg,
            "<line x1=\"{:.3}\" y1=\"{ly:.3}\" x2=\"{:.3}\" y2=\"{ly:.3}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            MARGIN_LEFT + plot_w - 120.0,
            MARGIN_LEFT + plot_w - 95.0
        )?;
        writeln!(
            svg,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"monospace\" font-size=\"11\">{name}</text>",
            MARGIN_LEFT + plot_w - 90.0,
            ly + 4.0
        )?;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
