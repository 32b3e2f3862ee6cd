//! Discrete measures on the unit interval and their norms.
//!
//! Densities are piecewise constant over a uniform grid of `n` cells; signed
//! measures carry an additional finite list of weighted Dirac atoms. Three
//! norms are provided:
//!
//! - `L¹`: `h·Σ|vᵢ|` for densities, plus `Σ|wₖ|` over atom weights;
//! - variation: the total jump of the step function, either over interior
//!   breakpoints only ([`GridDensity::bv_variation`]) or including the
//!   boundary jumps of the extension of the function by zero to the real
//!   line ([`GridDensity::extended_variation`]);
//! - Wasserstein–Kantorovich: for zero-average measures this is the integral
//!   of the absolute cumulative function, computed here in closed form.
//!
//! All types are immutable values; every operation is pure.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Gate below which a measure counts as zero-average for norm preconditions.
pub const ZERO_MASS_GATE: f64 = 1e-10;

/// Tolerance for probability-density checks (mass and positivity).
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Neumaier compensated summation; used wherever mass cancellation matters.
pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Uniform partition of `[0,1]` into `n >= 2` cells of width `h = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Grid {
        assert!(n >= 2, "grid needs at least 2 cells, got {n}");
        Grid { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Cell boundary `x_k = k/n`, for `k = 0..=n`.
    pub fn boundary(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n);
        k as f64 / self.n as f64
    }

    /// Center of cell `k`.
    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.n as f64
    }

    /// Index of the cell containing `x`; cells are `[x_k, x_{k+1})`, with the
    /// last cell closed at 1.
    pub fn cell_of(&self, x: f64) -> usize {
        let idx = (x * self.n as f64).floor() as isize;
        idx.clamp(0, self.n as isize - 1) as usize
    }
}

/// Piecewise-constant density on a [`Grid`]; values are in mass per unit
/// length, so the total mass is `h·Σ values`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> GridDensity {
        assert_eq!(values.len(), grid.n(), "value count must match grid");
        GridDensity { grid, values }
    }

    pub fn zero(grid: Grid) -> GridDensity {
        GridDensity::new(grid, vec![0.0; grid.n()])
    }

    /// The uniform probability density (constant 1).
    pub fn uniform(grid: Grid) -> GridDensity {
        GridDensity::new(grid, vec![1.0; grid.n()])
    }

    /// Rebuild from per-cell masses `μ_k = h·v_k`.
    pub fn from_masses(grid: Grid, masses: &[f64]) -> GridDensity {
        assert_eq!(masses.len(), grid.n());
        let n = grid.n() as f64;
        GridDensity::new(grid, masses.iter().map(|m| m * n).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.grid.cell_of(x)]
    }

    /// Per-cell masses `h·v_k`.
    pub fn masses(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.values.iter().map(|v| v * h).collect()
    }

    pub fn mass(&self) -> f64 {
        self.grid.h() * neumaier_sum(self.values.iter().copied())
    }

    pub fn l1_norm(&self) -> f64 {
        self.grid.h() * neumaier_sum(self.values.iter().map(|v| v.abs()))
    }

    /// Variation over interior breakpoints: `Σ_{k=1}^{n-1} |v_{k+1} - v_k|`.
    ///
    /// For a piecewise-constant function on the open interval this is the
    /// exact supremum over partitions of the jump sum.
    pub fn bv_variation(&self) -> f64 {
        neumaier_sum(self.values.windows(2).map(|w| (w[1] - w[0]).abs()))
    }

    /// Variation of the extension of the step function by zero to the real
    /// line: adds the boundary jumps `|v_1| + |v_n|`.
    pub fn extended_variation(&self) -> f64 {
        self.bv_variation() + self.values[0].abs() + self.values[self.grid.n() - 1].abs()
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        self.values.iter().all(|v| *v >= -tol) && (self.mass() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, factor: f64) -> GridDensity {
        GridDensity::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &GridDensity) -> GridDensity {
        assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        GridDensity::new(self.grid, values)
    }

    pub fn sub(&self, other: &GridDensity) -> GridDensity {
        assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        GridDensity::new(self.grid, values)
    }

    /// `‖self - other‖₁`.
    pub fn l1_distance(&self, other: &GridDensity) -> f64 {
        assert_eq!(self.grid, other.grid);
        let h = self.grid.h();
        h * neumaier_sum(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs()),
        )
    }

    /// Evaluate one of the three norms on this density. The Wasserstein norm
    /// requires zero average.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::L1 => Ok(self.l1_norm()),
            NormKind::Bv => Ok(self.l1_norm() + self.bv_variation()),
            NormKind::Wasserstein => wasserstein_norm(&SignedMeasure::from_density(self.clone())),
        }
    }
}

/// A weighted Dirac atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

/// Grid density plus finitely many atoms; canonical form merges atoms at
/// identical positions and orders them by position.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    grid_part: GridDensity,
    atoms: Vec<Atom>,
}

impl SignedMeasure {
    pub fn new(grid_part: GridDensity, atoms: Vec<(f64, f64)>) -> SignedMeasure {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(position, weight)| {
                assert!(
                    (0.0..=1.0).contains(&position) && position.is_finite(),
                    "atom position {position} outside [0,1]"
                );
                Atom { position, weight }
            })
            .collect();
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        // Merge ties so equality and CDF computation are deterministic.
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.position == atom.position => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        SignedMeasure {
            grid_part,
            atoms: merged,
        }
    }

    pub fn from_density(grid_part: GridDensity) -> SignedMeasure {
        SignedMeasure {
            grid_part,
            atoms: Vec::new(),
        }
    }

    pub fn from_atoms(grid: Grid, atoms: Vec<(f64, f64)>) -> SignedMeasure {
        SignedMeasure::new(GridDensity::zero(grid), atoms)
    }

    pub fn grid_part(&self) -> &GridDensity {
        &self.grid_part
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn grid(&self) -> Grid {
        self.grid_part.grid()
    }
}

/// Norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    Bv,
    Wasserstein,
}

/// Total mass `μ([0,1])`: grid mass plus atom weights.
pub fn total_mass(m: &SignedMeasure) -> f64 {
    let grid_mass = m.grid_part.mass();
    let atom_mass = neumaier_sum(m.atoms.iter().map(|a| a.weight));
    grid_mass + atom_mass
}

/// Cumulative function `F(x_k) = μ([0, x_k])` at the `n+1` cell boundaries.
///
/// Atoms located exactly at a boundary are included in the value at that
/// boundary (closed interval on the right).
pub fn cdf(m: &SignedMeasure) -> Vec<f64> {
    let grid = m.grid();
    let n = grid.n();
    let h = grid.h();
    let mut out = Vec::with_capacity(n + 1);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let add = |sum: &mut f64, comp: &mut f64, x: f64| {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    };
    let mut atom_iter = m.atoms.iter().peekable();
    // Atoms at position 0 belong to F(x_0).
    while let Some(a) = atom_iter.peek() {
        if a.position <= 0.0 {
            add(&mut sum, &mut comp, a.weight);
            atom_iter.next();
        } else {
            break;
        }
    }
    out.push(sum + comp);
    for k in 0..n {
        add(&mut sum, &mut comp, h * m.grid_part.values()[k]);
        let boundary = grid.boundary(k + 1);
        while let Some(a) = atom_iter.peek() {
            if a.position <= boundary {
                add(&mut sum, &mut comp, a.weight);
                atom_iter.next();
            } else {
                break;
            }
        }
        out.push(sum + comp);
    }
    out
}

/// `∫ |F_a + slope·t| dt` over `t in [0, len]`, in closed form.
fn integrate_abs_affine(f_a: f64, slope: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let f_b = f_a + slope * len;
    if f_a == 0.0 && f_b == 0.0 {
        return 0.0;
    }
    if f_a.signum() * f_b.signum() >= 0.0 {
        // No interior sign change.
        (f_a.abs() + f_b.abs()) * 0.5 * len
    } else {
        // One interior root; two triangles.
        (f_a * f_a + f_b * f_b) / (2.0 * slope.abs())
    }
}

/// Wasserstein–Kantorovich norm of a zero-average measure: `∫₀¹ |F(x)| dx`
/// with `F` the cumulative function. For zero-average measures on `[0,1]`
/// this equals the sup over 1-Lipschitz test functions bounded by 1, because
/// any 1-Lipschitz candidate can be re-centered into `‖g‖_∞ ≤ 1/2` without
/// changing the pairing.
///
/// Errors with [`EngineError::NonZeroMass`] when `|μ([0,1])| > 1e-10`.
pub fn wasserstein_norm(m: &SignedMeasure) -> Result<f64> {
    let mass = total_mass(m);
    if mass.abs() > ZERO_MASS_GATE {
        return Err(EngineError::NonZeroMass {
            mass,
            gate: ZERO_MASS_GATE,
        });
    }
    let grid = m.grid();
    let n = grid.n();
    let mut total = 0.0f64;
    let mut f_cur = 0.0f64;
    let mut atom_iter = m.atoms.iter().peekable();
    while let Some(a) = atom_iter.peek() {
        if a.position <= 0.0 {
            f_cur += a.weight;
            atom_iter.next();
        } else {
            break;
        }
    }
    for k in 0..n {
        let lo = grid.boundary(k);
        let hi = grid.boundary(k + 1);
        let slope = m.grid_part.values()[k];
        let mut pos = lo;
        // Split the cell at interior atoms.
        while let Some(a) = atom_iter.peek() {
            if a.position < hi {
                total += integrate_abs_affine(f_cur, slope, a.position - pos);
                f_cur += slope * (a.position - pos) + a.weight;
                pos = a.position;
                atom_iter.next();
            } else {
                break;
            }
        }
        total += integrate_abs_affine(f_cur, slope, hi - pos);
        f_cur += slope * (hi - pos);
    }
    Ok(total)
}

/// Subtract `(total mass)·(uniform density)` so the result has zero average.
pub fn project_zero_average(m: &SignedMeasure) -> SignedMeasure {
    let mass = total_mass(m);
    let grid = m.grid();
    let values = m.grid_part.values().iter().map(|v| v - mass).collect();
    SignedMeasure {
        grid_part: GridDensity::new(grid, values),
        atoms: m.atoms.clone(),
    }
}

/// Zero-average projection for plain densities.
pub fn project_zero_average_density(f: &GridDensity) -> GridDensity {
    let mass = f.mass();
    GridDensity::new(f.grid(), f.values().iter().map(|v| v - mass).collect())
}
