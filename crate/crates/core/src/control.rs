//! The linear-request control problem: given a target response direction μ,
//! recover the map perturbation `S` whose linear response is μ.
//!
//! The response equation `R(1,L₀) N_ξ(-(L_T f₀ · S)') = μ` inverts in two
//! stages. Applying `1 - L₀` gives `N_ξ(-(L_T f₀ · S)') = μ - L₀μ`, which is
//! a deconvolution problem for the noise operator; its zero-average
//! minimal-norm solution `f` is picked by Tikhonov-regularized least squares
//! (the convolution is not necessarily injective, so regularization makes
//! the preimage choice deterministic). Integrating and dividing by the
//! denominator then yields the node values
//!
//! `S(t) = (∫₀ᵗ f dm) / (-L_T(f₀)(t))`,
//!
//! with the free additive constant pinned to 0 by the admissibility
//! constraint `S(0) = 0`, and `S(1) = 0` following from the zero average of
//! `f` (enforced by mass projection of the deconvolution output).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::dynamics::{PerturbationS, PerturbationSpec};
use crate::error::{EngineError, Result};
use crate::measures::{GridDensity, NormKind, ZERO_MASS_GATE};
use crate::operator::{apply_density, TransferMatrix};
use crate::response::linear_response;
use crate::system::System;

/// Default Tikhonov weight, relative to the largest normal-equation diagonal.
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// Relative residual above which a target is flagged as outside the
/// numerical range of the convolution operator.
pub const OUT_OF_RANGE_THRESHOLD: f64 = 1e-3;

/// Default floor for the control denominator `|L_T f₀|` on the active set.
pub const DEFAULT_DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DeconvolutionResult {
    /// Zero-average least-squares preimage.
    pub preimage: GridDensity,
    /// `‖N f - y‖₁`.
    pub residual: f64,
    /// Residual relative to `‖y‖₁`.
    pub relative_residual: f64,
    /// Warning flag: the target appears to be outside the range of `N`.
    pub out_of_range: bool,
}

/// Solve `N f = y` in the ridge-regularized least-squares sense and project
/// the solution to zero average.
///
/// `y` must have zero average (gate 1e-10); the result reports the attained
/// residual, and flags `out_of_range` when the relative residual exceeds
/// 1e-3, which signals that `y` has components outside the numerical range
/// of the convolution.
pub fn deconvolve(
    n_matrix: &TransferMatrix,
    y: &GridDensity,
    ridge_rel: f64,
) -> Result<DeconvolutionResult> {
    let mass = y.mass();
    if mass.abs() > ZERO_MASS_GATE {
        return Err(EngineError::NonZeroMass {
            mass,
            gate: ZERO_MASS_GATE,
        });
    }
    let grid = n_matrix.grid();
    let n = grid.n();
    assert_eq!(grid, y.grid());

    let y_norm = y.l1_norm();
    if y_norm == 0.0 {
        return Ok(DeconvolutionResult {
            preimage: GridDensity::zero(grid),
            residual: 0.0,
            relative_residual: 0.0,
            out_of_range: false,
        });
    }

    // Dense normal equations on mass coordinates.
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for (col, entries) in n_matrix.columns().iter().enumerate() {
        for &(row, w) in entries {
            dense[(row as usize, col)] = w;
        }
    }
    let mut normal = dense.tr_mul(&dense);
    let max_diag = (0..n).map(|i| normal[(i, i)]).fold(0.0f64, f64::max);
    let ridge = ridge_rel * max_diag;
    for i in 0..n {
        normal[(i, i)] += ridge;
    }
    let rhs = dense.tr_mul(&DVector::from_vec(y.masses()));
    let solution = match Cholesky::new(normal) {
        Some(chol) => chol.solve(&rhs),
        None => {
            return Err(EngineError::Parse(
                "normal equations not positive definite; increase the ridge weight".into(),
            ))
        }
    };
    let f = crate::measures::project_zero_average_density(&GridDensity::from_masses(
        grid,
        solution.as_slice(),
    ));
    let image = apply_density(n_matrix, &f);
    let residual = image.l1_distance(y);
    let relative_residual = residual / y_norm;
    Ok(DeconvolutionResult {
        preimage: f,
        residual,
        relative_residual,
        out_of_range: relative_residual > OUT_OF_RANGE_THRESHOLD,
    })
}

/// Everything the linear-request solver reports.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    /// The recovered perturbation profile; `S(0) = S(1) = 0` exactly.
    pub s: PerturbationS,
    /// Deconvolved density `f ≈ -(L_T f₀ · S)'` in the weak sense.
    pub deconvolved: GridDensity,
    pub deconvolution_residual: f64,
    pub deconvolution_relative_residual: f64,
    pub out_of_range: bool,
    /// Exact Lipschitz constant of the returned node set.
    pub lipschitz: f64,
    /// Set when `Lip(S) > 1`: by linearity, target μ/Lip is achievable with
    /// the rescaled S/Lip.
    pub scale_advisory: bool,
    /// Smallest |L_T f₀| over the active support of S.
    pub denominator_margin: f64,
    /// `|S(1)|` before the endpoint is pinned to zero.
    pub endpoint_defect: f64,
    /// Relative L¹ error of the forward response of the recovered S against
    /// the requested target.
    pub round_trip_error: f64,
}

/// Solve the linear-request problem for a zero-average target μ.
pub fn solve_linear_request(
    sys: &System,
    f0: &GridDensity,
    target: &GridDensity,
    ridge_rel: f64,
    denominator_floor: f64,
    tol: f64,
    max_terms: usize,
) -> Result<ControlSolution> {
    let mass = target.mass();
    if mass.abs() > ZERO_MASS_GATE {
        return Err(EngineError::NonZeroMass {
            mass,
            gate: ZERO_MASS_GATE,
        });
    }
    let grid = sys.grid();
    let n = grid.n();
    assert_eq!(grid, target.grid());

    // y = (1 - L₀) μ, then f ∈ N⁻¹(y).
    let y = target.sub(&apply_density(sys.annealed(), target));
    let dec = deconvolve(sys.convolution(), &y, ridge_rel)?;
    let f = &dec.preimage;

    // Numerator: prefix integral of f at cell boundaries.
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    {
        let h = grid.h();
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for v in f.values() {
            let x = h * v;
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            prefix.push(sum + comp);
        }
    }
    let endpoint_defect = prefix[n].abs();

    // Denominator: L_T f₀ interpolated at interior cell boundaries.
    let pushed = apply_density(sys.ulam(), f0);
    let max_prefix = prefix.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let active_gate = 1e-12 * max_prefix.max(1.0);

    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push((0.0, 0.0));
    let mut denominator_margin = f64::MAX;
    for k in 1..n {
        let denom = -(pushed.values()[k - 1] + pushed.values()[k]) / 2.0;
        let active = prefix[k].abs() > active_gate;
        if active {
            if denom.abs() < denominator_floor {
                return Err(EngineError::DenominatorVanishes {
                    position: grid.boundary(k),
                    value: denom.abs(),
                    floor: denominator_floor,
                });
            }
            denominator_margin = denominator_margin.min(denom.abs());
            nodes.push((grid.boundary(k), prefix[k] / denom));
        } else {
            nodes.push((grid.boundary(k), 0.0));
        }
    }
    nodes.push((1.0, 0.0));
    if denominator_margin == f64::MAX {
        denominator_margin = 0.0;
    }
    let s = PerturbationS::new(nodes)?;
    let lipschitz = s.lipschitz();

    // Forward verification through the response pipeline.
    let target_norm = target.l1_norm();
    let round_trip_error = if target_norm == 0.0 {
        0.0
    } else {
        let forward = linear_response(
            sys,
            f0,
            &PerturbationSpec::Map(s.clone()),
            NormKind::L1,
            tol,
            max_terms,
        )?;
        forward.direction.l1_distance(target) / target_norm
    };

    Ok(ControlSolution {
        s,
        deconvolved: f.clone(),
        deconvolution_residual: dec.residual,
        deconvolution_relative_residual: dec.relative_residual,
        out_of_range: dec.out_of_range,
        lipschitz,
        scale_advisory: lipschitz > 1.0,
        denominator_margin,
        endpoint_defect,
        round_trip_error,
    })
}
