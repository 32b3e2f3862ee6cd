//! Stationary densities, mixing-contraction estimates, the resolvent on the
//! zero-average subspace, derivative operators for the three perturbation
//! kinds, and the assembled linear-response prediction.
//!
//! The response of the stationary density to a perturbation of magnitude `δ`
//! is `ν = R(1, L₀) L̇f₀`, where `L̇f₀` is the derivative of the operator
//! family applied to the unperturbed stationary density and `R(1, L₀)` is the
//! resolvent at 1 restricted to zero-average measures, computed as a
//! truncated Neumann series (geometric convergence is exactly what the
//! mixing estimate quantifies). The derivative takes one of three forms:
//!
//! - map perturbation `D_δ = 1 + δS`:  `ρ ∗̂ (-(L_T f₀ · S)')`, with the
//!   distributional derivative realized as boundary atoms and convolved by
//!   the exact folded-translate rule;
//! - noise radius:  `ρ̇ ∗̂ L_T f₀` with the signed kernel `ρ̇`;
//! - mixture `(1-δ)L₀ + δL_{T₂}`:  `L_{T₂} f₀ - f₀`.

use rayon::prelude::*;

use crate::dynamics::{MapModel, NoiseKernel, PerturbationS, PerturbationSpec};
use crate::error::{EngineError, Result};
use crate::measures::{
    neumaier_sum, GridDensity, NormKind, SignedMeasure, ZERO_MASS_GATE,
};
use crate::operator::{apply_density, folded_translate_masses, ulam_matrix, TransferMatrix};
use crate::system::System;

/// Default solver tolerance for power iteration and the Neumann series.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Outcome of the stationary-density solve.
#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub density: GridDensity,
    /// `‖Lf - f‖₁` at the accepted iterate.
    pub residual: f64,
    pub iterations: usize,
}

/// Power iteration from the uniform density until `‖Lf - f‖₁ < tol`.
pub fn stationary_density(
    l: &TransferMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryResult> {
    stationary_density_from(l, &GridDensity::uniform(l.grid()), tol, max_iter)
}

/// Power iteration from a caller-supplied start (used to warm-start the
/// perturbed solves in finite-difference validation).
pub fn stationary_density_from(
    l: &TransferMatrix,
    start: &GridDensity,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryResult> {
    let mut masses = start.masses();
    let mut next = vec![0.0f64; masses.len()];
    let mut residual = f64::MAX;
    for iteration in 1..=max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        l.apply_masses_into(&masses, &mut next);
        residual = masses
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        std::mem::swap(&mut masses, &mut next);
        if residual < tol {
            return Ok(StationaryResult {
                density: GridDensity::from_masses(l.grid(), &masses),
                residual,
                iterations: iteration,
            });
        }
    }
    Err(EngineError::NotConverged {
        what: "stationary power iteration",
        residual,
        iterations: max_iter,
    })
}

/// Estimates of `‖Lⁿ|_V‖₁`, the contraction factor of the zero-average space.
#[derive(Debug, Clone)]
pub struct MixingReport {
    pub n_steps: usize,
    /// `max_i ‖Lⁿ u_i - Lⁿ(uniform)‖₁`: a valid upper bound on the pairwise
    /// sup by the triangle inequality.
    pub upper: f64,
    /// `max_{i<j} ‖Lⁿ(u_i - u_j)‖₁ / 2`: the exact norm over the extreme
    /// points of the zero-average unit ball. Computed only on small grids.
    pub exact: Option<f64>,
}

/// Grid size up to which the exact pairwise mode is computed.
pub const MIXING_EXACT_LIMIT: usize = 1024;

/// Two-pass streaming estimate of `‖Lⁿ|_V‖₁`. The basis images are computed
/// column-parallel; each worker carries O(n) memory.
pub fn mixing_contraction(l: &TransferMatrix, n_steps: usize, want_exact: bool) -> MixingReport {
    let n = l.grid().n();
    let iterate = |start_col: usize| -> Vec<f64> {
        let mut cur = vec![0.0f64; n];
        cur[start_col] = 1.0;
        let mut next = vec![0.0f64; n];
        for _ in 0..n_steps {
            next.iter_mut().for_each(|v| *v = 0.0);
            l.apply_masses_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    };

    // Reference image of the uniform density.
    let mut cbar = vec![1.0 / n as f64; n];
    {
        let mut next = vec![0.0f64; n];
        for _ in 0..n_steps {
            next.iter_mut().for_each(|v| *v = 0.0);
            l.apply_masses_into(&cbar, &mut next);
            std::mem::swap(&mut cbar, &mut next);
        }
    }

    let exact_mode = want_exact && n <= MIXING_EXACT_LIMIT;
    if exact_mode {
        let images: Vec<Vec<f64>> = (0..n).into_par_iter().map(iterate).collect();
        let upper = images
            .iter()
            .map(|img| {
                img.iter()
                    .zip(&cbar)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let exact = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = 0.0f64;
                for j in (i + 1)..n {
                    let d: f64 = images[i]
                        .iter()
                        .zip(&images[j])
                        .map(|(a, b)| (a - b).abs())
                        .sum();
                    best = best.max(d);
                }
                best
            })
            .reduce(|| 0.0, f64::max)
            / 2.0;
        MixingReport {
            n_steps,
            upper,
            exact: Some(exact),
        }
    } else {
        let upper = (0..n)
            .into_par_iter()
            .map(|i| {
                let img = iterate(i);
                img.iter()
                    .zip(&cbar)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .reduce(|| 0.0, f64::max);
        MixingReport {
            n_steps,
            upper,
            exact: None,
        }
    }
}

/// Deposit a signed measure onto cell masses; atoms use the same two-cell
/// interpolation rule as [`crate::operator::apply`].
fn deposit_masses(m: &SignedMeasure) -> Vec<f64> {
    let grid = m.grid();
    let n = grid.n();
    let mut masses = m.grid_part().masses();
    for atom in m.atoms() {
        let t = atom.position * n as f64 - 0.5;
        if t <= 0.0 {
            masses[0] += atom.weight;
        } else if t >= (n - 1) as f64 {
            masses[n - 1] += atom.weight;
        } else {
            let i0 = t.floor() as usize;
            let frac = t - i0 as f64;
            masses[i0] += atom.weight * (1.0 - frac);
            masses[i0 + 1] += atom.weight * frac;
        }
    }
    masses
}

#[derive(Debug, Clone)]
pub struct ResolventResult {
    pub value: GridDensity,
    pub terms: usize,
    pub last_increment: f64,
}

/// `R(1, L) g = g + Σ_{k≥1} Lᵏ g`, truncated when `‖Lᵏg‖₁ < tol`.
///
/// Defined only on zero-average inputs (gate 1e-10); geometric convergence
/// is guaranteed exactly when the system mixes, so a budget overrun surfaces
/// as [`EngineError::NotConverged`].
pub fn resolvent_apply(
    l: &TransferMatrix,
    g: &SignedMeasure,
    tol: f64,
    max_terms: usize,
) -> Result<ResolventResult> {
    let mass = crate::measures::total_mass(g);
    if mass.abs() > ZERO_MASS_GATE {
        return Err(EngineError::NonZeroMass {
            mass,
            gate: ZERO_MASS_GATE,
        });
    }
    let n = l.grid().n();
    // k = 0 term: the measure itself, deposited onto the grid.
    let mut acc = deposit_masses(g);
    // k = 1 term with exact atom handling.
    let mut term = crate::operator::apply(l, g).masses();
    let mut next = vec![0.0f64; n];
    let mut increment = f64::MAX;
    for k in 1..=max_terms {
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += t;
        }
        increment = term.iter().map(|t| t.abs()).sum::<f64>();
        if increment < tol {
            return Ok(ResolventResult {
                value: GridDensity::from_masses(l.grid(), &acc),
                terms: k,
                last_increment: increment,
            });
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        l.apply_masses_into(&term, &mut next);
        std::mem::swap(&mut term, &mut next);
    }
    Err(EngineError::NotConverged {
        what: "resolvent Neumann series",
        residual: increment,
        iterations: max_terms,
    })
}

/// Distributional derivative of a piecewise-constant density extended by
/// zero outside `[0,1]`: atoms `(x_k, v_{k+1} - v_k)` at interior boundaries
/// plus `(0, v_1)` and `(1, -v_n)`. Total mass telescopes to zero.
pub fn distributional_derivative(h: &GridDensity) -> SignedMeasure {
    let grid = h.grid();
    let n = grid.n();
    let v = h.values();
    let mut atoms = Vec::with_capacity(n + 1);
    if v[0] != 0.0 {
        atoms.push((0.0, v[0]));
    }
    for k in 1..n {
        let jump = v[k] - v[k - 1];
        if jump != 0.0 {
            atoms.push((grid.boundary(k), jump));
        }
    }
    if v[n - 1] != 0.0 {
        atoms.push((1.0, -v[n - 1]));
    }
    SignedMeasure::from_atoms(grid, atoms)
}

/// Derivative operator for a map perturbation: `ρ ∗̂ (-(L_T f₀ · S)')`.
///
/// `L_T f₀` is the Ulam image; the product with `S` is sampled at cell
/// centers; the distributional derivative contributes one atom per cell
/// boundary, each convolved by the exact folded-translate rule.
pub fn derivative_map(sys: &System, f0: &GridDensity, s: &PerturbationS) -> GridDensity {
    let grid = sys.grid();
    let pushed = apply_density(sys.ulam(), f0);
    let product = GridDensity::new(
        grid,
        pushed
            .values()
            .iter()
            .enumerate()
            .map(|(k, g)| g * s.eval(grid.center(k)))
            .collect(),
    );
    let derivative = distributional_derivative(&product);
    let mut masses = vec![0.0f64; grid.n()];
    for atom in derivative.atoms() {
        let col = folded_translate_masses(sys.kernel(), atom.position, grid, sys.mode());
        for (row, w) in col {
            masses[row as usize] -= atom.weight * w;
        }
    }
    GridDensity::from_masses(grid, &masses)
}

/// Derivative operator for a noise perturbation: `ρ̇ ∗̂ L_T f₀` with the
/// signed kernel `ρ̇` (step part exact via its CDF integral, atoms via
/// folded translates inside the same assembly).
pub fn derivative_noise(
    sys: &System,
    f0: &GridDensity,
    rho_dot: &NoiseKernel,
) -> Result<GridDensity> {
    let mass = rho_dot.mass();
    if mass.abs() > ZERO_MASS_GATE {
        return Err(EngineError::NonZeroMassKernel { mass });
    }
    let pushed = apply_density(sys.ulam(), f0);
    let conv_dot = crate::operator::convolution_matrix(rho_dot, sys.grid(), sys.mode());
    Ok(apply_density(&conv_dot, &pushed))
}

/// Derivative operator for the mixture `(1-δ)L₀ + δL_{T₂}`, at the
/// stationary density of `L₀`: `L_{T₂} f₀ - f₀`.
pub fn derivative_mixture(
    sys: &System,
    f0: &GridDensity,
    second_map: &MapModel,
) -> Result<GridDensity> {
    let ulam2 = ulam_matrix(second_map, sys.grid(), sys.quadrature())?;
    Ok(apply_density(&ulam2, f0).sub(f0))
}

/// The assembled linear-response prediction.
#[derive(Debug, Clone)]
pub struct ResponseResult {
    /// `ν = R(1, L₀) L̇f₀`; zero average.
    pub direction: GridDensity,
    /// The derivative `L̇f₀` fed to the resolvent.
    pub derivative: SignedMeasure,
    pub resolvent_terms: usize,
    /// `‖(1 - L)ν - L̇f₀‖₁`.
    pub resolvent_residual: f64,
    /// Norm in which downstream validation measures convergence.
    pub norm: NormKind,
}

/// The norm in which the derivative operator converges, by perturbation
/// kind: L¹ for map and mixture perturbations, Wasserstein for noise.
pub fn default_norm(spec: &PerturbationSpec) -> NormKind {
    match spec {
        PerturbationSpec::Map(_) => NormKind::L1,
        PerturbationSpec::NoiseRadius { .. } => NormKind::Wasserstein,
        PerturbationSpec::Mixture { .. } => NormKind::L1,
    }
}

/// Dispatch to the matching derivative operator and apply the resolvent.
pub fn linear_response(
    sys: &System,
    f0: &GridDensity,
    spec: &PerturbationSpec,
    norm: NormKind,
    tol: f64,
    max_terms: usize,
) -> Result<ResponseResult> {
    let ldot = match spec {
        PerturbationSpec::Map(s) => derivative_map(sys, f0, s),
        PerturbationSpec::NoiseRadius { base_radius } => {
            let rho_dot = NoiseKernel::uniform_derivative(*base_radius)?;
            derivative_noise(sys, f0, &rho_dot)?
        }
        PerturbationSpec::Mixture { second_map } => derivative_mixture(sys, f0, second_map)?,
    };
    let derivative = SignedMeasure::from_density(ldot.clone());
    let res = resolvent_apply(sys.annealed(), &derivative, tol, max_terms)?;
    let direction = res.value;
    let image = apply_density(sys.annealed(), &direction);
    let residual = neumaier_sum(
        direction
            .values()
            .iter()
            .zip(image.values())
            .zip(ldot.values())
            .map(|((nu, l_nu), d)| ((nu - l_nu) - d).abs()),
    ) * sys.grid().h();
    Ok(ResponseResult {
        direction,
        derivative,
        resolvent_terms: res.terms,
        resolvent_residual: residual,
        norm,
    })
}

/// Refinement diagnostic for the operational reading of the condition that
/// `L_T` maps BV into BV on the support of `S`: the variation of
/// `L_T(f₀)·S` restricted to the support must be stable between grids `n`
/// and `2n` (ratio at most 1.5), otherwise the response formula is used
/// outside its comfort zone and a warning is emitted.
#[derive(Debug, Clone)]
pub struct BvStabilityReport {
    pub coarse_variation: f64,
    pub fine_variation: f64,
    pub ratio: f64,
    pub stable: bool,
}

/// Ratio bound between the `n` and `2n` variations.
pub const BV_STABILITY_RATIO: f64 = 1.5;

pub fn bv_refinement_diagnostic(
    sys: &System,
    f0: &GridDensity,
    s: &PerturbationS,
    tol: f64,
    max_iter: usize,
) -> Result<BvStabilityReport> {
    let support = s.support();
    let restricted_variation = |sys: &System, f0: &GridDensity| -> f64 {
        let grid = sys.grid();
        let pushed = apply_density(sys.ulam(), f0);
        let masked = GridDensity::new(
            grid,
            pushed
                .values()
                .iter()
                .enumerate()
                .map(|(k, g)| {
                    let c = grid.center(k);
                    if support.iter().any(|(lo, hi)| c >= *lo && c <= *hi) {
                        g * s.eval(c)
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
        masked.bv_variation()
    };
    let coarse = restricted_variation(sys, f0);
    let fine_grid = crate::measures::Grid::new(2 * sys.grid().n());
    let fine_sys = System::build(
        sys.map().clone(),
        sys.kernel().clone(),
        fine_grid,
        sys.mode(),
        sys.quadrature(),
    )?;
    let fine_f0 = stationary_density(fine_sys.annealed(), tol, max_iter)?.density;
    let fine = restricted_variation(&fine_sys, &fine_f0);
    let ratio = if coarse > 0.0 { fine / coarse } else { 1.0 };
    Ok(BvStabilityReport {
        coarse_variation: coarse,
        fine_variation: fine,
        ratio,
        stable: ratio <= BV_STABILITY_RATIO,
    })
}
