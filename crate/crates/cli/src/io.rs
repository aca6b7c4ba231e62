//! CSV and JSON emission. CSV files start with a versioned comment line and
//! a header; floats are written in shortest round-trip form, so identical
//! configurations produce byte-identical outputs.

use anyhow::{anyhow, Context, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use germ_core::flux::Interval;
use germ_core::germ::GermSample;
use germ_core::scheme::GridSolution;

use crate::config::FORMAT_VERSION;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut root = value.clone();
    if let Some(obj) = root.as_object_mut() {
        obj.insert("format".into(), FORMAT_VERSION.into());
    }
    write_text(path, &format!("{:#}\n", root))
}

fn csv_header(columns: &str) -> String {
    format!("# {FORMAT_VERSION}\n{columns}\n")
}

/// Field snapshots as `t,x,u` rows.
pub fn field_csv(sol: &GridSolution) -> String {
    let mut out = csv_header("t,x,u");
    for (k, t) in sol.times.iter().enumerate() {
        for (i, x) in sol.x_centers.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", t, x, sol.field[k][i]);
        }
    }
    out
}

/// Interface trace series as `t,ul,ur,flux` rows (the flux column holds the
/// interface flux used in the step ending at `t`; the initial row repeats
/// the first flux).
pub fn traces_csv(sol: &GridSolution) -> String {
    let mut out = csv_header("t,ul,ur,flux");
    for (k, t) in sol.step_times.iter().enumerate() {
        let flux = if k == 0 {
            sol.interface_flux_series.first().copied().unwrap_or(0.0)
        } else {
            sol.interface_flux_series[k - 1]
        };
        let _ = writeln!(out, "{},{},{},{}", t, sol.trace_left[k], sol.trace_right[k], flux);
    }
    out
}

/// Germ sample as `ul,ur,s` rows.
pub fn sample_csv(sample: &GermSample) -> String {
    let mut out = csv_header("ul,ur,s");
    for p in sample.pairs() {
        let s = 0.5
            * (sample.fluxes.left.eval(p.ul).unwrap_or(f64::NAN)
                + sample.fluxes.right.eval(p.ur).unwrap_or(f64::NAN));
        let _ = writeln!(out, "{},{},{}", p.ul, p.ur, s);
    }
    out
}

/// Profile trace as `xi,w` rows.
pub fn profile_csv(xi: &[f64], w: &[f64]) -> String {
    let mut out = csv_header("xi,w");
    for (x, v) in xi.iter().zip(w) {
        let _ = writeln!(out, "{},{}", x, v);
    }
    out
}

fn parse_rows(text: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.chars().next().map_or(false, char::is_alphabetic) {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: {line:?}", lineno + 1))?;
        if vals.len() != columns {
            return Err(anyhow!(
                "line {}: expected {columns} columns, got {}",
                lineno + 1,
                vals.len()
            ));
        }
        rows.push(vals);
    }
    Ok(rows)
}

/// Reconstruct a grid solution from the field and trace CSV files of a run
/// directory. Boundary-flux records are not part of the CSV contract, so the
/// truncation budget of the contraction checks is taken as zero.
pub fn read_run(dir: &Path) -> Result<GridSolution> {
    let field_text = fs::read_to_string(dir.join("field.csv"))
        .with_context(|| format!("reading {}/field.csv", dir.display()))?;
    let trace_text = fs::read_to_string(dir.join("traces.csv"))
        .with_context(|| format!("reading {}/traces.csv", dir.display()))?;
    let rows = parse_rows(&field_text, 3)?;
    if rows.is_empty() {
        return Err(anyhow!("empty field file"));
    }
    let t0 = rows[0][0];
    let x_centers: Vec<f64> = rows
        .iter()
        .take_while(|r| r[0] == t0)
        .map(|r| r[1])
        .collect();
    let n = x_centers.len();
    if n < 2 || rows.len() % n != 0 {
        return Err(anyhow!("field file is not a rectangular snapshot grid"));
    }
    let dx = x_centers[1] - x_centers[0];
    let n_left = x_centers.iter().filter(|&&x| x < 0.0).count();
    let mut times = Vec::new();
    let mut field = Vec::new();
    for chunk in rows.chunks(n) {
        times.push(chunk[0][0]);
        field.push(chunk.iter().map(|r| r[2]).collect::<Vec<f64>>());
    }
    let trows = parse_rows(&trace_text, 4)?;
    let step_times: Vec<f64> = trows.iter().map(|r| r[0]).collect();
    let trace_left: Vec<f64> = trows.iter().map(|r| r[1]).collect();
    let trace_right: Vec<f64> = trows.iter().map(|r| r[2]).collect();
    let interface_flux_series: Vec<f64> = trows.iter().skip(1).map(|r| r[3]).collect();
    let dt = if step_times.len() > 1 {
        step_times[1] - step_times[0]
    } else {
        0.0
    };
    let lo = field.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = field
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let steps = interface_flux_series.len();
    Ok(GridSolution {
        dx,
        dt,
        n_left,
        x_centers,
        times,
        field,
        step_times,
        trace_left,
        trace_right,
        interface_flux_series,
        boundary_flux_series: vec![(0.0, 0.0); steps],
        envelope: (Interval { lo, hi }, Interval { lo, hi }),
        conservation_defect: 0.0,
        clamp_count: 0,
    })
}
