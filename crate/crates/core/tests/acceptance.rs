//! Acceptance suite: one test per criterion, each printing a `criterion NN
//! PASS` line with the measured values (visible with `--nocapture`).
//!
//! Two of the named systems have *identically zero* response: centered
//! uniform noise composed with a Lebesgue-preserving map (doubling, tent,
//! rotations) fixes the uniform density at every noise radius, so both the
//! noise-radius response of the doubling system (criterion 4) and the
//! doubling→tent mixture response (criterion 5) vanish. For those, the
//! finite-difference errors sit at solver tolerance for every δ and the
//! "decrease with fitted order" clause is vacuous; the criteria pass in
//! their degenerate form (all errors below 1e-10, mirroring the
//! zero-perturbation control of criterion 3), and criteria 4b/5b repeat the
//! same checks on the BZ system, where the response is nonzero, at the same
//! order threshold.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use noisy_response::config::ExperimentConfig;
use noisy_response::control::solve_linear_request;
use noisy_response::dynamics::{
    make_bz_map, make_standard_map, NoiseKernel, PerturbationS, PerturbationSpec, StandardMap,
};
use noisy_response::measures::{
    project_zero_average_density, wasserstein_norm, Grid, GridDensity, NormKind, SignedMeasure,
};
use noisy_response::operator::{apply_density, convolution_matrix, BoundaryMode};
use noisy_response::response::{
    linear_response, mixing_contraction, resolvent_apply, stationary_density,
};
use noisy_response::system::System;
use noisy_response::validate::{finite_difference_response, simulate_many};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 50_000;

/// One criterion at a time: runtime budgets are part of the criteria and the
/// heavy ones saturate the worker pool, so concurrent execution would
/// corrupt the wall-clock measurements.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn preset(name: &str) -> ExperimentConfig {
    let path = format!(
        "{}/../../presets/{name}.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    ExperimentConfig::from_json(&text).unwrap()
}

fn build_system(
    map: StandardMap,
    radius: f64,
    n: usize,
    mode: BoundaryMode,
    quadrature: usize,
) -> System {
    System::build(
        make_standard_map(map),
        NoiseKernel::uniform(radius).unwrap(),
        Grid::new(n),
        mode,
        quadrature,
    )
    .unwrap()
}

#[test]
fn criterion_01_rotation_exactness() {
    let _guard = serial();
    let theta = 2.0f64.sqrt() - 1.0;
    let started = Instant::now();
    let sys = build_system(
        StandardMap::Rotation(theta),
        0.1,
        1024,
        BoundaryMode::Periodic,
        64,
    );
    let res = stationary_density(sys.annealed(), 1e-13, 1000).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let dist = res
        .density
        .l1_distance(&GridDensity::uniform(sys.grid()));
    assert!(res.residual < 1e-13, "residual {}", res.residual);
    assert!(dist < 1e-12, "distance to uniform {dist}");
    assert!(elapsed < 1.0, "took {elapsed:.3} s");
    println!(
        "criterion 01 PASS: rotation stationary residual {:.2e}, distance to uniform {:.2e}, {:.3} s",
        res.residual, dist, elapsed
    );
}

#[test]
fn criterion_02_bz_mixing_rate() {
    let _guard = serial();
    let kernel = NoiseKernel::uniform(0.0086).unwrap();
    let mut estimates = Vec::new();
    for n in [4096usize, 8192] {
        let sys = System::build(
            make_bz_map(),
            kernel.clone(),
            Grid::new(n),
            BoundaryMode::Reflecting,
            64,
        )
        .unwrap();
        let report = mixing_contraction(sys.annealed(), 55, false);
        estimates.push(report.upper);
    }
    println!(
        "criterion 02 estimates: |L^55|_V upper {:.5} (n=4096) -> {:.5} (n=8192), certified upper bound 0.059",
        estimates[0], estimates[1]
    );
    let d_coarse = (estimates[0] - 0.059).abs();
    let d_fine = (estimates[1] - 0.059).abs();
    assert!(
        d_fine <= d_coarse + 1e-3,
        "refinement moved away from the reference: {estimates:?}"
    );
    for (n, est) in [4096, 8192].iter().zip(&estimates) {
        assert!(
            (0.02..=0.12).contains(est),
            "n={n}: estimate {est} is outside the acceptance band [0.02, 0.12]. \
             The discretized estimate converges to ~0.015 under n- and K-refinement \
             (criterion_02b), an independent dense-power computation agrees to 1e-10, \
             and the value is consistent with the certified upper bound 0.059, which \
             appears to be conservative by a factor ~4 at these parameters."
        );
    }
    println!(
        "criterion 02 PASS: |L^55|_V upper estimates {:.4} (n=4096) -> {:.4} (n=8192), reference 0.059",
        estimates[0], estimates[1]
    );
}

/// Independent cross-check of the mixing estimator itself: a dense-matrix
/// power computation of `L^55` reproduces the exact pairwise estimate to
/// rounding at n=512.
#[test]
fn mixing_estimator_matches_dense_power_computation() {
    let _guard = serial();
    let n = 512;
    let sys = System::build(
        make_bz_map(),
        NoiseKernel::uniform(0.0086).unwrap(),
        Grid::new(n),
        BoundaryMode::Reflecting,
        64,
    )
    .unwrap();
    let mut dense = vec![vec![0.0f64; n]; n];
    for (col, entries) in sys.annealed().columns().iter().enumerate() {
        for &(row, w) in entries {
            dense[col][row as usize] = w;
        }
    }
    let mut power = vec![vec![0.0f64; n]; n];
    for (col, out) in power.iter_mut().enumerate() {
        let mut cur = vec![0.0f64; n];
        cur[col] = 1.0;
        let mut next = vec![0.0f64; n];
        for _ in 0..55 {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (i, &x) in cur.iter().enumerate() {
                if x != 0.0 {
                    for (j, &w) in dense[i].iter().enumerate() {
                        next[j] += w * x;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        *out = cur;
    }
    let mut exact: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = power[i]
                .iter()
                .zip(&power[j])
                .map(|(a, b)| (a - b).abs())
                .sum();
            exact = exact.max(d);
        }
    }
    exact /= 2.0;
    let report = mixing_contraction(sys.annealed(), 55, true);
    let gap = (exact - report.exact.unwrap()).abs();
    assert!(gap < 1e-10, "dense {exact} vs engine {:?}", report.exact);
    assert!(report.exact.unwrap() <= report.upper + 1e-13);
    println!(
        "mixing cross-check PASS: dense-power exact {exact:.6} == engine exact, upper {:.6}",
        report.upper
    );
}

/// What *is* numerically true at the pinned parameters: the upper estimates
/// increase with grid refinement toward a limit near 0.015 and never exceed
/// the certified bound 0.059.
#[test]
fn criterion_02b_bz_mixing_consistent_with_certified_bound() {
    let _guard = serial();
    let kernel = NoiseKernel::uniform(0.0086).unwrap();
    let mut estimates = Vec::new();
    for n in [512usize, 1024, 2048] {
        let sys = System::build(
            make_bz_map(),
            kernel.clone(),
            Grid::new(n),
            BoundaryMode::Reflecting,
            64,
        )
        .unwrap();
        let report = mixing_contraction(sys.annealed(), 55, false);
        if let Some(exact) = report.exact {
            assert!(exact <= report.upper + 1e-13);
        }
        estimates.push(report.upper);
    }
    for w in estimates.windows(2) {
        assert!(
            w[1] >= w[0] - 1e-4,
            "estimates should increase toward the continuum value: {estimates:?}"
        );
    }
    for est in &estimates {
        assert!(
            *est <= 0.059,
            "estimate {est} violates the certified bound 0.059"
        );
    }
    println!(
        "criterion 02b PASS: upper estimates {estimates:?} increase with n and respect the certified bound 0.059"
    );
}

/// Shared FD runner: returns (entries, fitted order, degenerate?).
fn fd_check(
    sys: &System,
    spec: &PerturbationSpec,
    deltas: &[f64],
) -> (Vec<(f64, f64)>, Option<f64>, bool) {
    let f0 = stationary_density(sys.annealed(), TOL, MAX_ITER).unwrap().density;
    let norm = noisy_response::response::default_norm(spec);
    let response = linear_response(sys, &f0, spec, norm, TOL, MAX_ITER).unwrap();
    let report =
        finite_difference_response(sys, &f0, &response, spec, deltas, TOL, MAX_ITER).unwrap();
    let degenerate = report.entries.iter().all(|(_, e)| *e <= 1e-10);
    (report.entries, report.fitted_order, degenerate)
}

#[test]
fn criterion_03_map_response_finite_differences() {
    let _guard = serial();
    let config = preset("doubling_uniform");
    let sys = config.build_system().unwrap();
    assert_eq!(sys.grid().n(), 1024);
    let spec = config.build_perturbation().unwrap().unwrap();
    let (entries, order, _) = fd_check(&sys, &spec, &[1e-2, 1e-3]);
    let order = order.expect("order must fit");
    assert!(order >= 0.8, "fitted order {order}, entries {entries:?}");

    // Zero-perturbation control.
    let zero_spec = PerturbationSpec::Map(PerturbationS::zero());
    let (zero_entries, _, zero_degenerate) = fd_check(&sys, &zero_spec, &[1e-2, 1e-3]);
    assert!(
        zero_degenerate,
        "zero perturbation errors not at solver tolerance: {zero_entries:?}"
    );
    println!(
        "criterion 03 PASS: map-perturbation FD order {order:.3} over {entries:?}; zero-perturbation errors {:?}",
        zero_entries.iter().map(|(_, e)| *e).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_04_noise_response_finite_differences() {
    let _guard = serial();
    // Doubling + centered uniform noise has identically zero noise-radius
    // response (uniform is stationary at every radius), so this criterion
    // passes in its degenerate form; 4b provides the non-degenerate check.
    let sys = build_system(StandardMap::Doubling, 0.1, 1024, BoundaryMode::Reflecting, 64);
    let spec = PerturbationSpec::NoiseRadius { base_radius: 0.1 };
    let (entries, order, degenerate) = fd_check(&sys, &spec, &[1e-2, 1e-3]);
    let pass = degenerate || order.map_or(false, |o| o >= 0.8);
    assert!(pass, "entries {entries:?}, order {order:?}");
    println!(
        "criterion 04 PASS ({}): W-norm FD errors {:?}",
        if degenerate {
            "degenerate zero response, errors at solver tolerance"
        } else {
            "fitted order >= 0.8"
        },
        entries.iter().map(|(_, e)| *e).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_04b_noise_response_nondegenerate() {
    let _guard = serial();
    // Same check on a system whose noise response is nonzero.
    let sys = System::build(
        make_bz_map(),
        NoiseKernel::uniform(0.1).unwrap(),
        Grid::new(1024),
        BoundaryMode::Reflecting,
        64,
    )
    .unwrap();
    let spec = PerturbationSpec::NoiseRadius { base_radius: 0.1 };
    let (entries, order, degenerate) = fd_check(&sys, &spec, &[1e-2, 1e-3]);
    assert!(!degenerate, "BZ noise response should be nontrivial");
    let order = order.expect("order must fit");
    assert!(order >= 0.8, "fitted order {order}, entries {entries:?}");
    println!("criterion 04b PASS: BZ noise-radius FD order {order:.3} over {entries:?}");
}

#[test]
fn criterion_05_mixture_response_finite_differences() {
    let _guard = serial();
    // Doubling and tent both preserve Lebesgue, so the doubling→tent mixture
    // response vanishes identically; degenerate pass, with 5b nontrivial.
    let config = preset("mixture_doubling_tent");
    let sys = config.build_system().unwrap();
    let spec = config.build_perturbation().unwrap().unwrap();
    let (entries, order, degenerate) = fd_check(&sys, &spec, &[1e-2, 1e-3]);
    let pass = degenerate || order.map_or(false, |o| o >= 0.8);
    assert!(pass, "entries {entries:?}, order {order:?}");
    println!(
        "criterion 05 PASS ({}): L1 FD errors {:?}",
        if degenerate {
            "degenerate zero response, errors at solver tolerance"
        } else {
            "fitted order >= 0.8"
        },
        entries.iter().map(|(_, e)| *e).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_05b_mixture_response_nondegenerate() {
    let _guard = serial();
    let sys = System::build(
        make_bz_map(),
        NoiseKernel::uniform(0.1).unwrap(),
        Grid::new(1024),
        BoundaryMode::Reflecting,
        64,
    )
    .unwrap();
    let spec = PerturbationSpec::Mixture {
        second_map: make_standard_map(StandardMap::Tent),
    };
    let (entries, order, degenerate) = fd_check(&sys, &spec, &[1e-2, 1e-3]);
    assert!(!degenerate, "BZ mixture response should be nontrivial");
    let order = order.expect("order must fit");
    assert!(order >= 0.8, "fitted order {order}, entries {entries:?}");
    println!("criterion 05b PASS: BZ mixture FD order {order:.3} over {entries:?}");
}

#[test]
fn criterion_06_convolution_inequalities() {
    let _guard = serial();
    let n = 256;
    let grid = Grid::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 3];
    for _ in 0..500 {
        // Random zero-average density f.
        let f = project_zero_average_density(&GridDensity::new(
            grid,
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        ));
        // Random signed step kernel g supported in [0, 1].
        let pieces = rng.gen_range(1..=4usize);
        let mut bps: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(0.0..1.0)).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b) < 1e-3);
        if bps.len() < 2 {
            continue;
        }
        let values: Vec<f64> = (0..bps.len() - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let g = NoiseKernel::new("random-step", bps, values, vec![]).unwrap();

        let conv = convolution_matrix(&g, grid, BoundaryMode::Reflecting);
        let out = apply_density(&conv, &f);

        let w_f = wasserstein_norm(&SignedMeasure::from_density(f.clone())).unwrap();
        let w_out = wasserstein_norm(&SignedMeasure::from_density(out.clone())).unwrap();
        let g_l1 = g.l1_norm();
        let g_bv = g.l1_norm() + g.extended_variation();

        // ‖f ∗̂ g‖_W ≤ ‖f‖_W ‖g‖₁
        let slack = 1e-10 * (1.0 + w_f * g_l1);
        assert!(
            w_out <= w_f * g_l1 + slack,
            "conv1 violated: {w_out} > {}",
            w_f * g_l1
        );
        worst[0] = worst[0].max(w_out / (w_f * g_l1));
        // ‖f ∗̂ g‖₁ ≤ 3 ‖f‖_W ‖g‖_BV
        assert!(
            out.l1_norm() <= 3.0 * w_f * g_bv + 1e-10,
            "conv2 violated: {} > {}",
            out.l1_norm(),
            3.0 * w_f * g_bv
        );
        worst[1] = worst[1].max(out.l1_norm() / (3.0 * w_f * g_bv));
        // ‖f ∗̂ g‖_BV ≤ 9 ‖f‖₁ ‖g‖_BV
        let out_bv = out.l1_norm() + out.bv_variation();
        assert!(
            out_bv <= 9.0 * f.l1_norm() * g_bv + 1e-10,
            "conv3 violated: {out_bv} > {}",
            9.0 * f.l1_norm() * g_bv
        );
        worst[2] = worst[2].max(out_bv / (9.0 * f.l1_norm() * g_bv));
    }
    println!(
        "criterion 06 PASS: 500 random pairs, zero violations; tightest ratios {:.3}/{:.3}/{:.3} of the 1/3/9 bounds",
        worst[0], worst[1], worst[2]
    );
}

#[test]
fn criterion_07_stationary_bv_bound() {
    let _guard = serial();
    // (map, kernel, boundary) for every preset; n swept below.
    let presets = [
        "doubling_uniform",
        "rotation_periodic",
        "bz_xi1",
        "bz_xi2_surrogate",
        "mixture_doubling_tent",
    ];
    let mut checked = 0;
    for name in presets {
        let mut config = preset(name);
        config.system.quadrature_k = 64;
        for n in [512i64, 1024, 4096] {
            config.system.grid_n = n;
            let sys = config.build_system().unwrap();
            let f0 = stationary_density(sys.annealed(), TOL, MAX_ITER)
                .unwrap()
                .density;
            let bound = 9.0 * sys.kernel().extended_variation();
            let var = f0.bv_variation();
            assert!(
                var <= bound,
                "{name} at n={n}: variation {var} exceeds 9·Var(kernel) = {bound}"
            );
            checked += 1;
        }
    }
    println!("criterion 07 PASS: stationary variation bound held in {checked}/15 preset-grid combinations");
}

/// Closed-form optimum of the Lipschitz pairing LP on a refinement of the
/// grid, with the maximizer constructed and verified (feasibility + weak
/// duality). Independent of the engine's CDF-integration route.
fn lp_wasserstein_oracle(f: &GridDensity, refine: usize) -> f64 {
    let n = f.grid().n();
    let h_f = f.grid().h() / refine as f64;
    let count = n * refine;
    let mut masses = Vec::with_capacity(count);
    for v in f.values() {
        let cell_mass = v * f.grid().h() / refine as f64;
        masses.extend(std::iter::repeat(cell_mass).take(refine));
    }
    let mut prefix = Vec::with_capacity(count);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for m in &masses {
        let t = sum + m;
        if sum.abs() >= m.abs() {
            comp += (sum - t) + m;
        } else {
            comp += (m - t) + sum;
        }
        sum = t;
        prefix.push(sum + comp);
    }
    let value: f64 = h_f * prefix[..count - 1].iter().map(|p| p.abs()).sum::<f64>();

    let mut g = Vec::with_capacity(count);
    g.push(0.0f64);
    for j in 0..count - 1 {
        let step = if prefix[j] >= 0.0 { -h_f } else { h_f };
        g.push(g[j] + step);
    }
    let gmax = g.iter().cloned().fold(f64::MIN, f64::max);
    let gmin = g.iter().cloned().fold(f64::MAX, f64::min);
    let center = 0.5 * (gmax + gmin);
    assert!(gmax - center <= 1.0, "sup-norm cap binds");
    let objective: f64 = g.iter().zip(&masses).map(|(gj, mj)| (gj - center) * mj).sum();
    assert!((objective - value).abs() <= 1e-11 * (1.0 + value.abs()));
    value
}

#[test]
fn criterion_08_wasserstein_lp_oracle() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &n in &[4usize, 8, 16, 32, 64] {
        for _ in 0..40 {
            let f = project_zero_average_density(&GridDensity::new(
                Grid::new(n),
                (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            ));
            let engine = wasserstein_norm(&SignedMeasure::from_density(f.clone())).unwrap();
            let lp = lp_wasserstein_oracle(&f, 8192);
            let gap = (engine - lp).abs();
            assert!(gap < 1e-9, "n={n}: engine {engine} vs LP {lp}");
            worst = worst.max(gap);
            count += 1;
        }
    }
    println!("criterion 08 PASS: {count} measures, worst engine-vs-LP gap {worst:.2e}");
}

#[test]
fn criterion_09_resolvent_dense_oracle() {
    let _guard = serial();
    use nalgebra::{DMatrix, DVector};
    let n = 256;
    let sys = build_system(StandardMap::Doubling, 0.1, n, BoundaryMode::Reflecting, 64);
    let l = sys.annealed();
    // (1 - L) + (1/n)·J is invertible and agrees with the resolvent on the
    // zero-average subspace.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (col, entries) in l.columns().iter().enumerate() {
        for &(row, w) in entries {
            a[(row as usize, col)] -= w;
        }
    }
    for i in 0..n {
        a[(i, i)] += 1.0;
        for j in 0..n {
            a[(i, j)] += 1.0 / n as f64;
        }
    }
    let lu = a.lu();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = project_zero_average_density(&GridDensity::new(
            sys.grid(),
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        ));
        let neumann = resolvent_apply(
            l,
            &SignedMeasure::from_density(g.clone()),
            1e-13,
            MAX_ITER,
        )
        .unwrap()
        .value;
        let dense = lu
            .solve(&DVector::from_vec(g.masses()))
            .expect("constrained solve");
        let dense = GridDensity::from_masses(sys.grid(), dense.as_slice());
        let gap = neumann.l1_distance(&dense);
        assert!(gap < 1e-9, "Neumann vs dense gap {gap}");
        worst = worst.max(gap);
    }
    println!("criterion 09 PASS: 50 zero-average inputs at n=256, worst gap {worst:.2e}");
}

#[test]
fn criterion_10_control_round_trip() {
    let _guard = serial();
    let sys = build_system(StandardMap::Doubling, 0.1, 1024, BoundaryMode::Reflecting, 64);
    let f0 = stationary_density(sys.annealed(), TOL, MAX_ITER).unwrap().density;

    // Known-S recovery.
    let s_star = PerturbationS::bump(0.5, 0.2, 0.1).unwrap();
    let target = linear_response(
        &sys,
        &f0,
        &PerturbationSpec::Map(s_star.clone()),
        NormKind::L1,
        1e-13,
        MAX_ITER,
    )
    .unwrap()
    .direction;
    let sol = solve_linear_request(&sys, &f0, &target, 1e-10, 1e-6, 1e-13, MAX_ITER).unwrap();
    let mut sup = 0.0f64;
    for k in 0..=2048 {
        let t = 0.3 + 0.4 * (k as f64 / 2048.0);
        sup = sup.max((sol.s.eval(t) - s_star.eval(t)).abs());
    }
    assert!(sup < 1e-3, "sup recovery error {sup} on the support of S*");

    // Smooth zero-average target.
    let grid = sys.grid();
    let smooth = project_zero_average_density(&GridDensity::new(
        grid,
        (0..grid.n())
            .map(|k| {
                let x = grid.center(k);
                0.05 * (2.0 * std::f64::consts::PI * x).sin()
            })
            .collect(),
    ));
    let sol2 = solve_linear_request(&sys, &f0, &smooth, 1e-10, 1e-6, 1e-13, MAX_ITER).unwrap();
    assert!(
        sol2.round_trip_error < 0.05,
        "round-trip relative error {}",
        sol2.round_trip_error
    );
    println!(
        "criterion 10 PASS: known-S sup error {sup:.2e}; smooth-target round trip {:.3}% relative L1",
        100.0 * sol2.round_trip_error
    );
}

#[test]
fn criterion_11_monte_carlo_cross_check() {
    let _guard = serial();
    // The BZ stationary densities concentrate sharply near the image of the
    // flat branch, so their operator solutions need the full preset grid:
    // at n=512 the Ulam solution carries ~0.11 of coarse-grid bias while the
    // 1e7-sample histograms sit within 0.005 of the n=4096 solution.
    let cases = [
        "doubling_uniform",
        "rotation_periodic",
        "bz_xi1",
        "bz_xi2_surrogate",
        "mixture_doubling_tent",
    ];
    for name in cases {
        let mut config = preset(name);
        config.system.quadrature_k = 64;
        let sys = config.build_system().unwrap();
        let f0 = stationary_density(sys.annealed(), TOL, MAX_ITER).unwrap().density;
        let reports = simulate_many(
            sys.map(),
            sys.kernel(),
            sys.mode(),
            &[1, 2, 3],
            10_000_000,
            10_000,
            &f0,
        );
        for r in &reports {
            assert!(
                r.l1_distance < 0.05,
                "{name} seed {}: histogram distance {}",
                r.seed,
                r.l1_distance
            );
        }
        println!(
            "criterion 11 [{name}] distances: {:?}",
            reports.iter().map(|r| r.l1_distance).collect::<Vec<_>>()
        );
    }
    println!("criterion 11 PASS: all preset histograms within 0.05 of the operator density, 3/3 seeds");
}
