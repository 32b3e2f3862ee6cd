//! Discretized transfer operators.
//!
//! Three assembly routines produce column-stochastic sparse matrices acting
//! on per-cell mass vectors:
//!
//! - [`ulam_matrix`]: the deterministic pushforward `L_T`, discretized by
//!   midpoint sub-sampling of each cell (Ulam's method);
//! - [`convolution_matrix`]: the noise operator `N_ξ f = ρ_ξ ∗̂ f`, assembled
//!   *exactly* from the kernel CDF and its integral: the kernel is a step
//!   function, so the cell-averaged image of a cell indicator has a closed
//!   form and no quadrature is needed;
//! - [`annealed_operator`]: the composition `N_ξ ∘ L_T`.
//!
//! `∗̂` is convolution on the real line followed by folding into `[0,1]`,
//! either by the reflection `π(x) = min_i |x - 2i|` or periodically. With
//! map images in `[0,1]` and kernel support in `[-1,1]`, everything lives in
//! `[-1,2]`, where the reflection has exactly three linear pieces.
//!
//! Assembly is data-parallel over columns; assembled matrices are immutable
//! and may be shared across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MapModel, NoiseKernel};
use crate::error::{EngineError, Result};
use crate::measures::{neumaier_sum, Grid, GridDensity, SignedMeasure};

/// How mass leaving `[0,1]` is brought back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Reflecting,
    Periodic,
}

/// Reflection of the real line into `[0,1]`: `π(x) = min_{i∈ℤ} |x - 2i|`.
pub fn reflect(x: f64) -> f64 {
    1.0 - (1.0 - x.rem_euclid(2.0)).abs()
}

/// Wrap of the real line onto the circle `[0,1)`.
pub fn wrap(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

/// Fold a point according to the boundary mode.
pub fn fold_point(mode: BoundaryMode, x: f64) -> f64 {
    match mode {
        BoundaryMode::Reflecting => reflect(x),
        BoundaryMode::Periodic => wrap(x),
    }
}

/// Which assembly produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Deterministic,
    Convolution,
    Annealed,
    Composite,
}

/// Sparse column-stochastic operator on per-cell mass vectors. Column `i`
/// lists `(row, weight)` pairs sorted by row; for Markov matrices every
/// column sums to 1 and entries are nonnegative.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    grid: Grid,
    mode: BoundaryMode,
    provenance: Provenance,
    cols: Vec<Vec<(u32, f64)>>,
}

impl TransferMatrix {
    pub fn from_columns(
        grid: Grid,
        mode: BoundaryMode,
        provenance: Provenance,
        cols: Vec<Vec<(u32, f64)>>,
    ) -> TransferMatrix {
        assert_eq!(cols.len(), grid.n());
        TransferMatrix {
            grid,
            mode,
            provenance,
            cols,
        }
    }

    pub fn identity(grid: Grid) -> TransferMatrix {
        let cols = (0..grid.n()).map(|i| vec![(i as u32, 1.0)]).collect();
        TransferMatrix {
            grid,
            mode: BoundaryMode::Reflecting,
            provenance: Provenance::Composite,
            cols,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn columns(&self) -> &[Vec<(u32, f64)>] {
        &self.cols
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| neumaier_sum(c.iter().map(|(_, w)| *w)))
            .collect()
    }

    /// Markov check: every column sums to 1 within `tol` with entries
    /// nonnegative (tiny negative rounding noise within `tol` is allowed).
    pub fn is_markov(&self, tol: f64) -> bool {
        self.column_sums()
            .iter()
            .all(|s| (s - 1.0).abs() <= tol)
            && self
                .cols
                .iter()
                .all(|c| c.iter().all(|(_, w)| *w >= -tol))
    }

    /// `out += M · input` on mass vectors; zero entries of `input` are
    /// skipped, so cost is proportional to the active support.
    pub fn apply_masses_into(&self, input: &[f64], out: &mut [f64]) {
        assert_eq!(input.len(), self.grid.n());
        assert_eq!(out.len(), self.grid.n());
        for (i, &x) in input.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for &(row, w) in &self.cols[i] {
                out[row as usize] += w * x;
            }
        }
    }

    pub fn apply_masses(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n()];
        self.apply_masses_into(input, &mut out);
        out
    }

    /// Sparse product `self · right` (apply `right` first).
    pub fn matmul(&self, right: &TransferMatrix, provenance: Provenance) -> TransferMatrix {
        assert_eq!(self.grid, right.grid);
        let n = self.grid.n();
        let cols: Vec<Vec<(u32, f64)>> = right
            .cols
            .par_iter()
            .map(|rcol| {
                let mut acc = vec![0.0f64; n];
                for &(mid, w) in rcol {
                    for &(row, ww) in &self.cols[mid as usize] {
                        acc[row as usize] += w * ww;
                    }
                }
                compress(&acc)
            })
            .collect();
        TransferMatrix {
            grid: self.grid,
            mode: self.mode,
            provenance,
            cols,
        }
    }

    /// Columnwise convex combination `wa·a + wb·b` (used for mixtures).
    pub fn mix(a: &TransferMatrix, b: &TransferMatrix, wa: f64, wb: f64) -> TransferMatrix {
        assert_eq!(a.grid, b.grid);
        let n = a.grid.n();
        let cols: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![0.0f64; n];
                for &(row, w) in &a.cols[i] {
                    acc[row as usize] += wa * w;
                }
                for &(row, w) in &b.cols[i] {
                    acc[row as usize] += wb * w;
                }
                compress(&acc)
            })
            .collect();
        TransferMatrix {
            grid: a.grid,
            mode: a.mode,
            provenance: Provenance::Composite,
            cols,
        }
    }

    /// Triplet text export, one `row,col,weight` line per entry, ascending
    /// column then row.
    pub fn export_triplets<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (col, entries) in self.cols.iter().enumerate() {
            for (row, w) in entries {
                writeln!(out, "{row},{col},{w}")?;
            }
        }
        Ok(())
    }
}

fn compress(dense: &[f64]) -> Vec<(u32, f64)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i as u32, *v))
        .collect()
}

/// Ulam discretization of the pushforward `L_T`: column `i` is the image of
/// the normalized indicator of cell `i`, approximated by pushing `k_quad`
/// midpoint samples through `T`. Columns sum to 1 exactly by construction.
///
/// Errors with [`EngineError::MapRange`] if an image leaves `[0,1]` by more
/// than 1e-12.
pub fn ulam_matrix(map: &MapModel, grid: Grid, k_quad: usize) -> Result<TransferMatrix> {
    assert!(k_quad >= 1, "need at least one quadrature sample");
    let n = grid.n();
    let cols: Vec<Result<Vec<(u32, f64)>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = grid.boundary(i);
            let h = grid.h();
            let mut rows = Vec::with_capacity(k_quad);
            for j in 0..k_quad {
                let x = lo + (j as f64 + 0.5) * h / k_quad as f64;
                let y = map.eval(x);
                if !(-1e-12..=1.0 + 1e-12).contains(&y) {
                    return Err(EngineError::MapRange { x, image: y });
                }
                rows.push(grid.cell_of(y) as u32);
            }
            rows.sort_unstable();
            // Run-length encode the hit counts; weight = count / k_quad.
            let mut col: Vec<(u32, f64)> = Vec::new();
            let mut run_row = rows[0];
            let mut run_len = 0usize;
            for r in rows {
                if r == run_row {
                    run_len += 1;
                } else {
                    col.push((run_row, run_len as f64 / k_quad as f64));
                    run_row = r;
                    run_len = 1;
                }
            }
            col.push((run_row, run_len as f64 / k_quad as f64));
            Ok(col)
        })
        .collect();
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(TransferMatrix {
        grid,
        mode: BoundaryMode::Reflecting,
        provenance: Provenance::Deterministic,
        cols,
    })
}

/// Index range of cells intersecting `[lo, hi] ∩ [0,1]`, or `None` if empty.
fn cell_range(lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    if lo >= hi {
        return None;
    }
    let first = (lo * n as f64).floor() as usize;
    let last = ((hi * n as f64).ceil() as usize).saturating_sub(1);
    Some((first.min(n - 1), last.min(n - 1)))
}

/// The preimage branches of the fold restricted to `[-1,2]`. Each entry maps
/// a cell boundary `x` to the preimage-side coordinate, together with the
/// sign telling whether preimage order is reversed.
fn fold_branches(mode: BoundaryMode) -> Vec<(f64, f64)> {
    // Preimage coordinate = offset + sign * z.
    match mode {
        // z, -z, 2-z.
        BoundaryMode::Reflecting => vec![(0.0, 1.0), (0.0, -1.0), (2.0, -1.0)],
        // z-1, z, z+1.
        BoundaryMode::Periodic => vec![(-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)],
    }
}

/// Exact cell-averaged convolution operator `N f = ρ ∗̂ f`.
///
/// Column `i` is the folded image of the normalized indicator of cell `i`:
/// the convolution of the step kernel with the indicator has the closed-form
/// antiderivative `Ḡ(y) = (G(y - x_i) - G(y - x_{i+1}))/h` built from the
/// kernel CDF integral `G`, and one evaluation of `Ḡ` per cell boundary per
/// fold branch gives every entry as a telescoping difference, so column sums
/// equal the kernel mass to rounding. Signed kernels (with atoms) are
/// allowed; the Markov column-sum invariant then becomes "columns sum to the
/// kernel mass".
pub fn convolution_matrix(kernel: &NoiseKernel, grid: Grid, mode: BoundaryMode) -> TransferMatrix {
    let n = grid.n();
    let h = grid.h();
    let (supp_lo, supp_hi) = kernel.support();
    let branches = fold_branches(mode);
    let is_probability = kernel.is_probability(1e-9);
    let cols: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = grid.boundary(i);
            let xi1 = grid.boundary(i + 1);
            let gbar = |y: f64| (kernel.cdf_integral(y - xi) - kernel.cdf_integral(y - xi1)) / h;
            let mut acc = vec![0.0f64; n];
            for &(offset, sign) in &branches {
                // Preimage support [xi+supp_lo, xi1+supp_hi] maps to z-range
                // (offset + sign*z covers it).
                let (z_lo, z_hi) = if sign > 0.0 {
                    (xi + supp_lo - offset, xi1 + supp_hi - offset)
                } else {
                    (offset - (xi1 + supp_hi), offset - (xi + supp_lo))
                };
                let Some((j_first, j_last)) = cell_range(z_lo, z_hi, n) else {
                    continue;
                };
                // Telescoping: one Ḡ evaluation per boundary.
                let mut prev = gbar(offset + sign * grid.boundary(j_first));
                for j in j_first..=j_last {
                    let next = gbar(offset + sign * grid.boundary(j + 1));
                    acc[j] += sign * (next - prev);
                    prev = next;
                }
            }
            if is_probability {
                for v in acc.iter_mut() {
                    // Integrals of a nonnegative density; clear rounding dust.
                    if *v < 0.0 {
                        debug_assert!(*v > -1e-13);
                        *v = 0.0;
                    }
                }
            }
            compress(&acc)
        })
        .collect();
    TransferMatrix {
        grid,
        mode,
        provenance: Provenance::Convolution,
        cols,
    }
}

/// Exact cell masses of the folded kernel translate `π_∗ ρ(· - p)`: the image
/// of a unit Dirac mass at `p` under the noise step. Used for applying the
/// convolution to atomic measures without smearing them over a source cell.
pub fn folded_translate_masses(
    kernel: &NoiseKernel,
    p: f64,
    grid: Grid,
    mode: BoundaryMode,
) -> Vec<(u32, f64)> {
    let n = grid.n();
    let (supp_lo, supp_hi) = kernel.support();
    let branches = fold_branches(mode);
    let mut acc = vec![0.0f64; n];
    for &(offset, sign) in &branches {
        let (z_lo, z_hi) = if sign > 0.0 {
            (p + supp_lo - offset, p + supp_hi - offset)
        } else {
            (offset - (p + supp_hi), offset - (p + supp_lo))
        };
        let Some((j_first, j_last)) = cell_range(z_lo, z_hi, n) else {
            continue;
        };
        let mut prev = kernel.cdf(offset + sign * grid.boundary(j_first) - p);
        for j in j_first..=j_last {
            let next = kernel.cdf(offset + sign * grid.boundary(j + 1) - p);
            acc[j] += sign * (next - prev);
            prev = next;
        }
    }
    compress(&acc)
}

/// The annealed operator `L = N_ξ ∘ L_T` as a sparse product.
pub fn annealed_operator(
    map: &MapModel,
    kernel: &NoiseKernel,
    grid: Grid,
    mode: BoundaryMode,
    k_quad: usize,
) -> Result<TransferMatrix> {
    let ulam = ulam_matrix(map, grid, k_quad)?;
    let conv = convolution_matrix(kernel, grid, mode);
    Ok(conv.matmul(&ulam, Provenance::Annealed))
}

/// Apply a transfer matrix to a signed measure, producing a grid density.
///
/// Grid mass moves through the sparse columns. An atom at `x` contributes its
/// weight times the column of the cell containing `x`, linearly interpolated
/// between the two nearest cell centers (first-order consistent placement of
/// Dirac masses). Markov matrices preserve total mass to rounding.
pub fn apply(matrix: &TransferMatrix, m: &SignedMeasure) -> GridDensity {
    let grid = matrix.grid();
    assert_eq!(grid, m.grid(), "measure and matrix grids must agree");
    let n = grid.n();
    let mut out = vec![0.0f64; n];
    matrix.apply_masses_into(&m.grid_part().masses(), &mut out);
    for atom in m.atoms() {
        let t = atom.position * n as f64 - 0.5;
        if t <= 0.0 {
            for &(row, w) in &matrix.columns()[0] {
                out[row as usize] += atom.weight * w;
            }
        } else if t >= (n - 1) as f64 {
            for &(row, w) in &matrix.columns()[n - 1] {
                out[row as usize] += atom.weight * w;
            }
        } else {
            let i0 = t.floor() as usize;
            let frac = t - i0 as f64;
            for &(row, w) in &matrix.columns()[i0] {
                out[row as usize] += atom.weight * w * (1.0 - frac);
            }
            for &(row, w) in &matrix.columns()[i0 + 1] {
                out[row as usize] += atom.weight * w * frac;
            }
        }
    }
    GridDensity::from_masses(grid, &out)
}

/// Apply to a plain density (no atoms).
pub fn apply_density(matrix: &TransferMatrix, f: &GridDensity) -> GridDensity {
    let masses = f.masses();
    GridDensity::from_masses(matrix.grid(), &matrix.apply_masses(&masses))
}

/// Column-wise L¹ distance between the Ulam matrices at `k_quad` and
/// `2·k_quad` sub-samples: an observable proxy for the quadrature error,
/// reported in diagnostics.
pub fn quadrature_refinement_gap(map: &MapModel, grid: Grid, k_quad: usize) -> Result<f64> {
    let coarse = ulam_matrix(map, grid, k_quad)?;
    let fine = ulam_matrix(map, grid, 2 * k_quad)?;
    let n = grid.n();
    let gap = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut dense = vec![0.0f64; n];
            for &(row, w) in &coarse.columns()[i] {
                dense[row as usize] += w;
            }
            for &(row, w) in &fine.columns()[i] {
                dense[row as usize] -= w;
            }
            dense.iter().map(|v| v.abs()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    Ok(gap)
}
