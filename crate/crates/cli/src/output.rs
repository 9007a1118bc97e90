//! Number formatting and CSV files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use mlhjb::hjb::{ControlProblem, Grid, Policy, ResidualField, ValueField};

use crate::exit::UsageError;

/// CSV number: 12 significant digits in scientific notation.
pub fn csv_number(v: f64) -> String {
    format!("{v:.11e}")
}

/// Single-line result: 12 decimals in the usual range, scientific outside.
pub fn line_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v:.12}")
    } else {
        format!("{v:.11e}")
    }
}

fn state_columns(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|d| format!("x{d}")).collect()
    }
}

fn control_columns(dim: usize) -> Vec<String> {
    if dim == 1 {
        vec!["u".into()]
    } else {
        (1..=dim).map(|d| format!("u{d}")).collect()
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

fn row(t: f64, grid: &Grid, node: usize, tail: impl IntoIterator<Item = f64>) -> Vec<String> {
    let x = grid.node(node);
    std::iter::once(t)
        .chain(x[..grid.dim()].iter().copied())
        .chain(tail)
        .map(csv_number)
        .collect()
}

/// `t, x..., V` for the selected time slices.
pub fn write_value(path: &Path, field: &ValueField, slices: &[usize]) -> Result<()> {
    let grid = field.grid();
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(grid.dim()));
    header.push("V".into());
    w.write_record(&header)?;
    for &n in slices {
        let t = field.time(n);
        for (k, v) in field.slice(n).iter().enumerate() {
            w.write_record(row(t, grid, k, [*v]))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t, x..., u...` for the selected policy slices.
pub fn write_policy(path: &Path, policy: &Policy, prob: &ControlProblem, slices: &[usize]) -> Result<()> {
    let grid = policy.grid();
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(grid.dim()));
    header.extend(control_columns(prob.dim_u()));
    w.write_record(&header)?;
    for &n in slices {
        let t = policy.times()[n];
        for (k, &idx) in policy.slice(n).iter().enumerate() {
            w.write_record(row(t, grid, k, prob.control_grid()[idx as usize].iter().copied()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t, x..., residual`; `slices` index the residual field's own times.
pub fn write_residual(path: &Path, res: &ResidualField, slices: &[usize]) -> Result<()> {
    let grid = res.grid();
    let mut w = writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(grid.dim()));
    header.push("residual".into());
    w.write_record(&header)?;
    for &k in slices {
        let t = res.times()[k];
        for (node, v) in res.slice(k).iter().enumerate() {
            w.write_record(row(t, grid, node, [*v]))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> anyhow::Error {
    UsageError(format!("malformed policy file {}: {msg}", path.display())).into()
}

/// Read a policy written by [`write_policy`] back onto `prob`'s grid.
///
/// Every control must be one of `prob`'s control levels and every state
/// must be a node of a uniform grid on `prob`'s state box.
pub fn read_policy(path: &Path, prob: &ControlProblem) -> Result<Policy> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(path, e))?;
    let dx = prob.dim_x();
    let du = prob.dim_u();
    let width = 1 + dx + du;
    let header = reader.headers().map_err(|e| bad(path, e))?.clone();
    if header.len() != width {
        return Err(bad(path, format!("expected {width} columns, header has {}", header.len())));
    }

    let mut times: Vec<f64> = Vec::new();
    let mut states: Vec<Vec<f64>> = Vec::new();
    let mut indices: Vec<u32> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(path, e))?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(path, format!("row {}: {e}", line + 2)))?;
        if values.len() != width {
            return Err(bad(path, format!("row {} has {} fields", line + 2, values.len())));
        }
        let t = values[0];
        if times.last() != Some(&t) {
            times.push(t);
        }
        states.push(values[1..1 + dx].to_vec());
        let u = &values[1 + dx..];
        let idx = prob
            .control_grid()
            .iter()
            .position(|c| c.iter().zip(u).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs())))
            .ok_or_else(|| bad(path, format!("row {}: control {u:?} is not a level of the problem", line + 2)))?;
        indices.push(idx as u32);
    }
    if times.is_empty() {
        return Err(bad(path, "no rows"));
    }
    let per_slice = states.len() / times.len();
    if per_slice * times.len() != states.len() {
        return Err(bad(path, "time slices have different sizes"));
    }
    let n = (per_slice as f64).powf(1.0 / dx as f64).round() as usize;
    if n.pow(dx as u32) != per_slice {
        return Err(bad(path, format!("{per_slice} rows per slice is not a full {dx}-d grid")));
    }
    let grid = prob.grid(n).map_err(|e| bad(path, e))?;
    for (i, x) in states.iter().enumerate() {
        let node = grid.node(i % per_slice);
        let scale = grid.spacing(0);
        if x.iter().zip(&node).any(|(a, b)| (a - b).abs() > 1e-6 * scale) {
            return Err(bad(path, format!("row {}: state {x:?} is not grid node {:?}", i + 2, &node[..dx])));
        }
    }
    Policy::from_slices(grid, times, indices).map_err(|e| bad(path, e))
}

/// Slice indices `0, stride, 2·stride, ...` below `count`, always including
/// the last one when `include_last`.
pub fn strided(count: usize, stride: usize, include_last: bool) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let mut out: Vec<usize> = (0..count).step_by(stride.max(1)).collect();
    if include_last && out.last() != Some(&(count - 1)) {
        out.push(count - 1);
    }
    out
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        bail!(UsageError(format!("output path {} is not a directory", dir.display())));
    }
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}
