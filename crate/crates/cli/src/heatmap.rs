//! Static SVG heatmaps over the channel/radio grid.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use mrmc_core::sweep::ConfigResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Capacity,
    EnergyEfficiency,
}

impl Metric {
    pub fn title(self) -> &'static str {
        match self {
            Metric::Capacity => "network capacity",
            Metric::EnergyEfficiency => "energy efficiency",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Metric::Capacity => "heatmap_capacity.svg",
            Metric::EnergyEfficiency => "heatmap_ee.svg",
        }
    }

    fn value(self, row: &ConfigResult) -> Option<f64> {
        match self {
            Metric::Capacity => row.report.as_ref().map(|_| row.capacity),
            Metric::EnergyEfficiency => row.report.as_ref().map(|r| r.efficiency),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HeatmapError {
    #[error("empty grid")]
    Empty,
    #[error("ragged grid, missing cells (channels, radios): {}", fmt_cells(.0))]
    Ragged(Vec<(usize, usize)>),
    #[error("duplicate cells (channels, radios): {}", fmt_cells(.0))]
    Duplicate(Vec<(usize, usize)>),
}

fn fmt_cells(cells: &[(usize, usize)]) -> String {
    cells.iter().map(|(c, r)| format!("({c}, {r})")).collect::<Vec<_>>().join(", ")
}

const CELL_W: f64 = 64.0;
const CELL_H: f64 = 40.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 54.0;
const RIGHT: f64 = 20.0;

const LOW: (f64, f64, f64) = (247.0, 251.0, 255.0);
const HIGH: (f64, f64, f64) = (8.0, 48.0, 107.0);

fn color(t: f64) -> String {
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(LOW.0, HIGH.0), mix(LOW.1, HIGH.1), mix(LOW.2, HIGH.2))
}

fn label(v: f64) -> String {
    match v.abs() {
        a if a >= 100.0 => format!("{v:.0}"),
        a if a >= 10.0 => format!("{v:.1}"),
        _ => format!("{v:.3}"),
    }
}

/// One rect per `(channels, radios)` cell, channels along x and radios along
/// y (1 at the bottom). Colors are linear between the grid's min and max.
pub fn render_heatmap(grid: &[ConfigResult], metric: Metric) -> Result<String, HeatmapError> {
    if grid.is_empty() {
        return Err(HeatmapError::Empty);
    }
    let channels: BTreeSet<usize> = grid.iter().map(|r| r.config.channels).collect();
    let radios: BTreeSet<usize> = grid.iter().map(|r| r.config.radios).collect();
    let mut cells: BTreeMap<(usize, usize), &ConfigResult> = BTreeMap::new();
    let mut duplicates = Vec::new();
    for row in grid {
        let key = (row.config.channels, row.config.radios);
        if cells.insert(key, row).is_some() {
            duplicates.push(key);
        }
    }
    if !duplicates.is_empty() {
        return Err(HeatmapError::Duplicate(duplicates));
    }
    let missing: Vec<(usize, usize)> = channels
        .iter()
        .flat_map(|&c| radios.iter().map(move |&r| (c, r)))
        .filter(|k| !cells.contains_key(k))
        .collect();
    if !missing.is_empty() {
        return Err(HeatmapError::Ragged(missing));
    }

    let values: Vec<f64> = cells.values().filter_map(|r| metric.value(r)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let cols: Vec<usize> = channels.into_iter().collect();
    let rows: Vec<usize> = radios.into_iter().collect();
    let width = LEFT + CELL_W * cols.len() as f64 + RIGHT;
    let height = TOP + CELL_H * rows.len() as f64 + BOTTOM;
    let plot_bottom = TOP + CELL_H * rows.len() as f64;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        metric.title()
    )
    .unwrap();

    for (key, row) in &cells {
        let col = cols.binary_search(&key.0).unwrap();
        let rank = rows.binary_search(&key.1).unwrap();
        let x = LEFT + CELL_W * col as f64;
        let y = plot_bottom - CELL_H * (rank + 1) as f64;
        let (fill, text, ink) = match metric.value(row) {
            Some(v) => {
                let t = norm(v);
                (color(t), label(v), if t > 0.5 { "white" } else { "black" })
            }
            None => ("#cccccc".to_string(), "err".to_string(), "black"),
        };
        writeln!(
            svg,
            r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="white" data-channels="{}" data-radios="{}"/>"#,
            key.0, key.1
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{text}</text>"#,
            x + CELL_W / 2.0,
            y + CELL_H / 2.0
        )
        .unwrap();
    }

    for (i, c) in cols.iter().enumerate() {
        let x = LEFT + CELL_W * (i as f64 + 0.5);
        writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">{c}</text>"#, plot_bottom + 16.0).unwrap();
    }
    for (i, r) in rows.iter().enumerate() {
        let y = plot_bottom - CELL_H * (i as f64 + 0.5);
        writeln!(svg, r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{r}</text>"#, LEFT - 8.0).unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">channels</text>"#,
        LEFT + CELL_W * cols.len() as f64 / 2.0,
        plot_bottom + 40.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">radios</text>"#,
        TOP + CELL_H * rows.len() as f64 / 2.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}
