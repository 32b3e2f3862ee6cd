//! C ABI for the noisy-response engine.
//!
//! Every function returns an [`NrStatus`] code; `NR_STATUS_OK` is zero.
//! Objects cross the boundary as opaque handles ([`NrSystem`], [`NrDensity`])
//! created and released by `nr_*_new` / `nr_*_free` pairs. On any failure a
//! thread-local message retrievable via [`nr_last_error_message`] describes
//! the cause. All entry points catch panics and turn them into
//! `NR_STATUS_PANIC`.
//!
//! Systems are described by the same JSON documents the CLI config uses for
//! its `system` block, e.g.
//!
//! ```json
//! {"map": {"name": "doubling"},
//!  "kernel": {"name": "uniform", "radius": 0.1},
//!  "grid_n": 1024, "boundary": "reflecting", "quadrature_k": 64}
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use noisy_response::config::{PerturbationConfig, SystemConfig};
use noisy_response::control::solve_linear_request;
use noisy_response::measures::{wasserstein_norm, GridDensity, SignedMeasure};
use noisy_response::response::{
    default_norm, linear_response, mixing_contraction, stationary_density,
};
use noisy_response::system::System;
use noisy_response::validate::simulate_trajectories;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed JSON, bad UTF-8, or a violated precondition.
    InvalidArgument = 2,
    /// An iterative solver ran out of budget.
    NotConverged = 3,
    /// An operation defined on zero-average measures received mass.
    NonzeroMass = 4,
    /// An output buffer was too small.
    BufferTooSmall = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn status_of(err: &noisy_response::EngineError) -> NrStatus {
    use noisy_response::EngineError::*;
    match err {
        NonZeroMass { .. } | NonZeroMassKernel { .. } => NrStatus::NonzeroMass,
        NotConverged { .. } => NrStatus::NotConverged,
        _ => NrStatus::InvalidArgument,
    }
}

/// Pointer to the message describing the most recent failure on this thread.
/// Valid until the next failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn nr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard<F: FnOnce() -> NrStatus>(body: F) -> NrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&message);
            NrStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, NrStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(NrStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        NrStatus::InvalidArgument
    })
}

unsafe fn deref<'a, T>(ptr: *const T) -> Result<&'a T, NrStatus> {
    if ptr.is_null() {
        set_error("null handle argument");
        return Err(NrStatus::NullArgument);
    }
    Ok(&*ptr)
}

fn write_out<T>(out: *mut *mut T, value: T) -> NrStatus {
    if out.is_null() {
        set_error("null output pointer");
        return NrStatus::NullArgument;
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    NrStatus::Ok
}

/// An assembled random dynamical system (map, kernel, grid, operators).
pub struct NrSystem {
    config: SystemConfig,
    system: System,
}

/// A piecewise-constant density on the system's grid.
pub struct NrDensity {
    density: GridDensity,
}

/// Build a system from a JSON description (see the crate docs for the
/// schema). The handle must be released with [`nr_system_free`].
///
/// # Safety
/// `system_json` must be a valid NUL-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nr_system_new_from_json(
    system_json: *const c_char,
    out: *mut *mut NrSystem,
) -> NrStatus {
    guard(|| {
        let text = match read_str(system_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let config: SystemConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&format!("system JSON: {e}"));
                return NrStatus::InvalidArgument;
            }
        };
        if config.grid_n < 2 || config.quadrature_k < 1 {
            set_error("system JSON: grid_n must be >= 2 and quadrature_k >= 1");
            return NrStatus::InvalidArgument;
        }
        let map = match config.map.build() {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return NrStatus::InvalidArgument;
            }
        };
        let kernel = match config.kernel.build() {
            Ok(k) => k,
            Err(e) => {
                set_error(&e.to_string());
                return NrStatus::InvalidArgument;
            }
        };
        let system = match System::build(
            map,
            kernel,
            noisy_response::measures::Grid::new(config.grid_n as usize),
            config.boundary,
            config.quadrature_k as usize,
        ) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        write_out(out, NrSystem { config, system })
    })
}

/// # Safety
/// `sys` must be a handle from [`nr_system_new_from_json`] or null.
#[no_mangle]
pub unsafe extern "C" fn nr_system_free(sys: *mut NrSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of grid cells, or 0 for a null handle.
///
/// # Safety
/// `sys` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_system_grid_n(sys: *const NrSystem) -> usize {
    match deref(sys) {
        Ok(s) => s.system.grid().n(),
        Err(_) => 0,
    }
}

/// Solve the stationary density by power iteration.
///
/// # Safety
/// `sys` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nr_stationary_density(
    sys: *const NrSystem,
    tol: f64,
    max_iter: usize,
    out: *mut *mut NrDensity,
) -> NrStatus {
    guard(|| {
        let sys = match deref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match stationary_density(sys.system.annealed(), tol, max_iter) {
            Ok(res) => write_out(
                out,
                NrDensity {
                    density: res.density,
                },
            ),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Upper-bound estimate of the zero-average contraction `‖Lⁿ|_V‖₁`.
///
/// # Safety
/// `sys` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nr_mixing_upper_bound(
    sys: *const NrSystem,
    n_steps: usize,
    out: *mut f64,
) -> NrStatus {
    guard(|| {
        let sys = match deref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return NrStatus::NullArgument;
        }
        let report = mixing_contraction(sys.system.annealed(), n_steps, false);
        *out = report.upper;
        NrStatus::Ok
    })
}

/// Linear-response direction for a perturbation described by the CLI's
/// perturbation JSON (e.g. `{"kind": "noise"}` or
/// `{"kind": "map", "bump": {...}}`). The stationary density is solved
/// internally at the given tolerance.
///
/// # Safety
/// `sys` and `perturbation_json` must be valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nr_linear_response(
    sys: *const NrSystem,
    perturbation_json: *const c_char,
    tol: f64,
    max_iter: usize,
    out: *mut *mut NrDensity,
) -> NrStatus {
    guard(|| {
        let sys = match deref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let text = match read_str(perturbation_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let config: PerturbationConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&format!("perturbation JSON: {e}"));
                return NrStatus::InvalidArgument;
            }
        };
        let spec = match config.build(&sys.config) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return NrStatus::InvalidArgument;
            }
        };
        let run = || -> noisy_response::error::Result<GridDensity> {
            let f0 = stationary_density(sys.system.annealed(), tol, max_iter)?.density;
            let norm = default_norm(&spec);
            Ok(linear_response(&sys.system, &f0, &spec, norm, tol, max_iter)?.direction)
        };
        match run() {
            Ok(direction) => write_out(out, NrDensity { density: direction }),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Seeded Monte Carlo histogram of the trajectory `x ← fold(T(x) + ω)`;
/// the L¹ distance to the operator stationary density lands in `distance`
/// when it is non-null.
///
/// # Safety
/// `sys` must be a valid handle; `out` a valid pointer; `distance` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn nr_simulate_histogram(
    sys: *const NrSystem,
    seed: u64,
    samples: u64,
    burn_in: u64,
    tol: f64,
    max_iter: usize,
    distance: *mut f64,
    out: *mut *mut NrDensity,
) -> NrStatus {
    guard(|| {
        let sys = match deref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if samples <= burn_in {
            set_error("need samples > burn_in");
            return NrStatus::InvalidArgument;
        }
        let f0 = match stationary_density(sys.system.annealed(), tol, max_iter) {
            Ok(res) => res.density,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let report = simulate_trajectories(
            sys.system.map(),
            sys.system.kernel(),
            sys.system.mode(),
            seed,
            samples,
            burn_in,
            &f0,
        );
        if !distance.is_null() {
            *distance = report.l1_distance;
        }
        write_out(
            out,
            NrDensity {
                density: report.histogram,
            },
        )
    })
}

/// Solve the linear-request problem for a zero-average target. On success
/// the recovered perturbation values at the `grid_n + 1` cell boundaries are
/// written to `s_values` (which must have capacity `grid_n + 1`), and the
/// Lipschitz constant and forward round-trip error are reported.
///
/// # Safety
/// All pointers must be valid; `s_values` must have the stated capacity.
#[no_mangle]
pub unsafe extern "C" fn nr_solve_linear_request(
    sys: *const NrSystem,
    target: *const NrDensity,
    ridge: f64,
    denominator_floor: f64,
    tol: f64,
    max_iter: usize,
    s_values: *mut f64,
    s_capacity: usize,
    lipschitz: *mut f64,
    round_trip_error: *mut f64,
) -> NrStatus {
    guard(|| {
        let sys = match deref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let target = match deref(target) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let n = sys.system.grid().n();
        if s_values.is_null() {
            set_error("null s_values buffer");
            return NrStatus::NullArgument;
        }
        if s_capacity < n + 1 {
            set_error(&format!("s_values needs capacity {} (grid_n + 1)", n + 1));
            return NrStatus::BufferTooSmall;
        }
        if target.density.grid() != sys.system.grid() {
            set_error("target grid does not match the system grid");
            return NrStatus::InvalidArgument;
        }
        let run = || -> noisy_response::error::Result<_> {
            let f0 = stationary_density(sys.system.annealed(), tol, max_iter)?.density;
            solve_linear_request(
                &sys.system,
                &f0,
                &target.density,
                ridge,
                denominator_floor,
                tol,
                max_iter,
            )
        };
        match run() {
            Ok(solution) => {
                for (k, (_, s)) in solution.s.nodes().iter().enumerate() {
                    *s_values.add(k) = *s;
                }
                if !lipschitz.is_null() {
                    *lipschitz = solution.lipschitz;
                }
                if !round_trip_error.is_null() {
                    *round_trip_error = solution.round_trip_error;
                }
                NrStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Wrap a caller-provided value array (density units, `grid_n` entries) as a
/// density handle on a `cells`-cell grid.
///
/// # Safety
/// `values` must point to `cells` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nr_density_new(
    values: *const f64,
    cells: usize,
    out: *mut *mut NrDensity,
) -> NrStatus {
    guard(|| {
        if values.is_null() {
            set_error("null values pointer");
            return NrStatus::NullArgument;
        }
        if cells < 2 {
            set_error("a density needs at least 2 cells");
            return NrStatus::InvalidArgument;
        }
        let slice = std::slice::from_raw_parts(values, cells);
        write_out(
            out,
            NrDensity {
                density: GridDensity::new(
                    noisy_response::measures::Grid::new(cells),
                    slice.to_vec(),
                ),
            },
        )
    })
}

/// # Safety
/// `density` must be a density handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_density_free(density: *mut NrDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `density` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_density_len(density: *const NrDensity) -> usize {
    match deref(density) {
        Ok(d) => d.density.grid().n(),
        Err(_) => 0,
    }
}

/// Copy the cell values (density units) into `out`.
///
/// # Safety
/// `out` must have the given capacity.
#[no_mangle]
pub unsafe extern "C" fn nr_density_values(
    density: *const NrDensity,
    out: *mut f64,
    capacity: usize,
) -> NrStatus {
    guard(|| {
        let d = match deref(density) {
            Ok(d) => d,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output buffer");
            return NrStatus::NullArgument;
        }
        let n = d.density.grid().n();
        if capacity < n {
            set_error(&format!("buffer needs capacity {n}"));
            return NrStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(d.density.values().as_ptr(), out, n);
        NrStatus::Ok
    })
}

/// Total mass `h·Σ values`; NaN for a null handle.
///
/// # Safety
/// `density` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_density_mass(density: *const NrDensity) -> f64 {
    match deref(density) {
        Ok(d) => d.density.mass(),
        Err(_) => f64::NAN,
    }
}

/// # Safety
/// `density` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_density_l1_norm(density: *const NrDensity) -> f64 {
    match deref(density) {
        Ok(d) => d.density.l1_norm(),
        Err(_) => f64::NAN,
    }
}

/// Interior-jump variation of the step density.
///
/// # Safety
/// `density` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn nr_density_bv_variation(density: *const NrDensity) -> f64 {
    match deref(density) {
        Ok(d) => d.density.bv_variation(),
        Err(_) => f64::NAN,
    }
}

/// Wasserstein–Kantorovich norm; fails with `NR_STATUS_NONZERO_MASS` unless
/// the density has zero average (gate 1e-10).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nr_density_wasserstein_norm(
    density: *const NrDensity,
    out: *mut f64,
) -> NrStatus {
    guard(|| {
        let d = match deref(density) {
            Ok(d) => d,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return NrStatus::NullArgument;
        }
        match wasserstein_norm(&SignedMeasure::from_density(d.density.clone())) {
            Ok(w) => {
                *out = w;
                NrStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// `‖a - b‖₁`; the grids must match.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nr_density_l1_distance(
    a: *const NrDensity,
    b: *const NrDensity,
    out: *mut f64,
) -> NrStatus {
    guard(|| {
        let a = match deref(a) {
            Ok(x) => x,
            Err(status) => return status,
        };
        let b = match deref(b) {
            Ok(x) => x,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return NrStatus::NullArgument;
        }
        if a.density.grid() != b.density.grid() {
            set_error("grids do not match");
            return NrStatus::InvalidArgument;
        }
        *out = a.density.l1_distance(&b.density);
        NrStatus::Ok
    })
}
