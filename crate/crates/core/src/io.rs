//! Artifact formats: CSV for densities, measures, reports, and perturbation
//! nodes; triplet text for matrices; JSON for diagnostics.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces the original values bit-exactly and identical runs
//! produce byte-identical files.

use std::io::{BufRead, Write};

use crate::dynamics::PerturbationS;
use crate::error::{EngineError, Result};
use crate::measures::{Grid, GridDensity, SignedMeasure};
use crate::validate::FDReport;

/// `x_left,x_right,density` rows, one per cell.
pub fn write_density_csv<W: Write>(out: &mut W, f: &GridDensity) -> Result<()> {
    writeln!(out, "x_left,x_right,density")?;
    let grid = f.grid();
    for (k, v) in f.values().iter().enumerate() {
        writeln!(out, "{},{},{}", grid.boundary(k), grid.boundary(k + 1), v)?;
    }
    Ok(())
}

/// Density rows followed by an `atom_pos,atom_weight` section when the
/// measure carries atoms.
pub fn write_measure_csv<W: Write>(out: &mut W, m: &SignedMeasure) -> Result<()> {
    write_density_csv(out, m.grid_part())?;
    if !m.atoms().is_empty() {
        writeln!(out, "atom_pos,atom_weight")?;
        for a in m.atoms() {
            writeln!(out, "{},{}", a.position, a.weight)?;
        }
    }
    Ok(())
}

fn parse_f64(field: &str, context: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| EngineError::Parse(format!("{context}: bad float {field:?}")))
}

/// Read back a density/measure CSV. The grid is inferred from the row count
/// and the boundary columns are checked against it.
pub fn read_measure_csv<R: BufRead>(input: R) -> Result<SignedMeasure> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| EngineError::Parse("empty density CSV".into()))?;
    if header.trim() != "x_left,x_right,density" {
        return Err(EngineError::Parse(format!(
            "expected density header, got {header:?}"
        )));
    }
    let mut values = Vec::new();
    let mut atoms = Vec::new();
    let mut in_atoms = false;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "atom_pos,atom_weight" {
            in_atoms = true;
            continue;
        }
        let mut parts = line.split(',');
        if in_atoms {
            let pos = parse_f64(parts.next().unwrap_or(""), "atom_pos")?;
            let weight = parse_f64(parts.next().unwrap_or(""), "atom_weight")?;
            atoms.push((pos, weight));
        } else {
            let left = parse_f64(parts.next().unwrap_or(""), "x_left")?;
            let right = parse_f64(parts.next().unwrap_or(""), "x_right")?;
            let value = parse_f64(parts.next().unwrap_or(""), "density")?;
            values.push((left, right, value));
        }
    }
    let n = values.len();
    if n < 2 {
        return Err(EngineError::Parse("density CSV needs at least 2 cells".into()));
    }
    let grid = Grid::new(n);
    for (k, (left, right, _)) in values.iter().enumerate() {
        if *left != grid.boundary(k) || *right != grid.boundary(k + 1) {
            return Err(EngineError::Parse(format!(
                "cell {k}: boundaries ({left}, {right}) do not match a uniform {n}-cell grid"
            )));
        }
    }
    let density = GridDensity::new(grid, values.into_iter().map(|(_, _, v)| v).collect());
    Ok(SignedMeasure::new(density, atoms))
}

/// `delta,error` rows.
pub fn write_fd_report_csv<W: Write>(out: &mut W, report: &FDReport) -> Result<()> {
    writeln!(out, "delta,error")?;
    for (d, e) in &report.entries {
        writeln!(out, "{d},{e}")?;
    }
    Ok(())
}

/// `t,s` node rows; loadable back as a [`PerturbationS`].
pub fn write_nodes_csv<W: Write>(out: &mut W, s: &PerturbationS) -> Result<()> {
    writeln!(out, "t,s")?;
    for (t, v) in s.nodes() {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

pub fn read_nodes_csv<R: BufRead>(input: R) -> Result<PerturbationS> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| EngineError::Parse("empty node CSV".into()))?;
    if header.trim() != "t,s" {
        return Err(EngineError::Parse(format!(
            "expected node header t,s, got {header:?}"
        )));
    }
    let mut nodes = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let t = parse_f64(parts.next().unwrap_or(""), "t")?;
        let s = parse_f64(parts.next().unwrap_or(""), "s")?;
        nodes.push((t, s));
    }
    PerturbationS::new(nodes)
}
