//! Batch experiment driver behind the CLI: run one command against one
//! config, emit CSV densities plus a `diagnostics.json`.
//!
//! Exit codes: 0 success, 2 validation failure (the finite-difference
//! monotone-decrease check), 3 config error, 4 numerical non-convergence
//! (the latter two are mapped from errors by the binary).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::config::ExperimentConfig;
use crate::control::solve_linear_request;
use crate::dynamics::PerturbationSpec;
use crate::error::{EngineError, Result};
use crate::io as artifacts;
use crate::measures::GridDensity;
use crate::operator::quadrature_refinement_gap;
use crate::response::{
    bv_refinement_diagnostic, default_norm, linear_response, mixing_contraction,
    stationary_density, MIXING_EXACT_LIMIT,
};
use crate::system::System;
use crate::validate::{finite_difference_response, simulate_many};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stationary,
    Mixing,
    Respond,
    Validate,
    Simulate,
    Control,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stationary => "stationary",
            Command::Mixing => "mixing",
            Command::Respond => "respond",
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Control => "control",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Replaces the config's seed list when given.
    pub seed: Option<u64>,
}

fn write_file<F: FnOnce(&mut BufWriter<File>) -> Result<()>>(
    dir: &Path,
    name: &str,
    body: F,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(dir.join(name))?);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

fn required_perturbation(config: &ExperimentConfig) -> Result<PerturbationSpec> {
    config.build_perturbation()?.ok_or_else(|| {
        EngineError::invalid_config("perturbation", "this command needs a perturbation block")
    })
}

fn solve_f0(sys: &System, config: &ExperimentConfig) -> Result<crate::response::StationaryResult> {
    stationary_density(
        sys.annealed(),
        config.solver.tol,
        config.solver.max_iter as usize,
    )
}

/// Run one command; returns the process exit code (0, or 2 when the
/// validate command's monotone check fails).
pub fn run(command: Command, config: &ExperimentConfig, opts: &RunOptions) -> Result<i32> {
    let started = Instant::now();
    fs::create_dir_all(&opts.out_dir)?;
    let sys = config.build_system()?;
    let out = opts.out_dir.as_path();
    let mut warnings: Vec<String> = Vec::new();
    let mut exit = 0i32;

    let mut diag = json!({
        "command": command.name(),
        "system": {
            "map": sys.map().label(),
            "kernel": sys.kernel().label(),
            "grid_n": sys.grid().n(),
            "boundary": format!("{:?}", sys.mode()),
            "quadrature_k": sys.quadrature(),
        },
    });

    match command {
        Command::Stationary => {
            let res = solve_f0(&sys, config)?;
            write_file(out, "f0.csv", |w| artifacts::write_density_csv(w, &res.density))?;
            let gap = quadrature_refinement_gap(sys.map(), sys.grid(), sys.quadrature())?;
            diag["stationary"] = json!({
                "residual": res.residual,
                "iterations": res.iterations,
                "mass": res.density.mass(),
                "bv_variation": res.density.bv_variation(),
                "bv_bound_9_var_kernel": 9.0 * sys.kernel().extended_variation(),
                "quadrature_refinement_gap": gap,
            });
        }
        Command::Mixing => {
            let want_exact = config
                .mixing
                .exact
                .unwrap_or(sys.grid().n() <= MIXING_EXACT_LIMIT);
            let report =
                mixing_contraction(sys.annealed(), config.mixing.n_steps as usize, want_exact);
            write_file(out, "mixing.csv", |w| {
                writeln!(w, "n_steps,upper,exact")?;
                match report.exact {
                    Some(e) => writeln!(w, "{},{},{}", report.n_steps, report.upper, e)?,
                    None => writeln!(w, "{},{},", report.n_steps, report.upper)?,
                }
                Ok(())
            })?;
            diag["mixing"] = json!({
                "n_steps": report.n_steps,
                "upper": report.upper,
                "exact": report.exact,
            });
        }
        Command::Respond => {
            let spec = required_perturbation(config)?;
            let norm = config.validate.norm.unwrap_or_else(|| default_norm(&spec));
            let f0 = solve_f0(&sys, config)?;
            let response = linear_response(
                &sys,
                &f0.density,
                &spec,
                norm,
                config.solver.resolvent_tol,
                config.solver.resolvent_max_terms as usize,
            )?;
            write_file(out, "f0.csv", |w| artifacts::write_density_csv(w, &f0.density))?;
            write_file(out, "response.csv", |w| {
                artifacts::write_density_csv(w, &response.direction)
            })?;
            if config.output.bv_diagnostic {
                if let PerturbationSpec::Map(s) = &spec {
                    let report = bv_refinement_diagnostic(
                        &sys,
                        &f0.density,
                        s,
                        config.solver.tol,
                        config.solver.max_iter as usize,
                    )?;
                    if !report.stable {
                        warnings.push(format!(
                            "variation of L_T(f0)·S grew by {:.3}x under grid refinement; \
                             the response formula may be unreliable here",
                            report.ratio
                        ));
                    }
                    diag["bv_stability"] = json!({
                        "coarse_variation": report.coarse_variation,
                        "fine_variation": report.fine_variation,
                        "ratio": report.ratio,
                        "stable": report.stable,
                    });
                }
            }
            let gap = quadrature_refinement_gap(sys.map(), sys.grid(), sys.quadrature())?;
            diag["stationary"] = json!({
                "residual": f0.residual,
                "iterations": f0.iterations,
                "quadrature_refinement_gap": gap,
            });
            diag["response"] = json!({
                "norm": response.norm,
                "direction_mass": response.direction.mass(),
                "direction_l1": response.direction.l1_norm(),
                "resolvent_terms": response.resolvent_terms,
                "resolvent_residual": response.resolvent_residual,
            });
        }
        Command::Validate => {
            let spec = required_perturbation(config)?;
            let norm = config.validate.norm.unwrap_or_else(|| default_norm(&spec));
            let f0 = solve_f0(&sys, config)?;
            let response = linear_response(
                &sys,
                &f0.density,
                &spec,
                norm,
                config.solver.resolvent_tol,
                config.solver.resolvent_max_terms as usize,
            )?;
            let report = finite_difference_response(
                &sys,
                &f0.density,
                &response,
                &spec,
                &config.validate.deltas,
                config.solver.tol,
                config.solver.max_iter as usize,
            )?;
            write_file(out, "f0.csv", |w| artifacts::write_density_csv(w, &f0.density))?;
            write_file(out, "response.csv", |w| {
                artifacts::write_density_csv(w, &response.direction)
            })?;
            write_file(out, "fd_report.csv", |w| {
                artifacts::write_fd_report_csv(w, &report)
            })?;
            let ok = report.monotone_ok();
            if !ok {
                warnings.push("finite-difference errors do not decrease toward the floor".into());
                exit = 2;
            }
            diag["validate"] = json!({
                "norm": report.norm,
                "entries": report.entries,
                "fitted_order": report.fitted_order,
                "floor_estimate": report.floor_estimate,
                "monotone_ok": ok,
            });
        }
        Command::Simulate => {
            let f0 = solve_f0(&sys, config)?;
            let seeds: Vec<u64> = match opts.seed {
                Some(s) => vec![s],
                None => config.simulate.seeds.clone(),
            };
            let reports = simulate_many(
                sys.map(),
                sys.kernel(),
                sys.mode(),
                &seeds,
                config.simulate.samples as u64,
                config.simulate.burn_in as u64,
                &f0.density,
            );
            write_file(out, "f0.csv", |w| artifacts::write_density_csv(w, &f0.density))?;
            for report in &reports {
                write_file(out, &format!("histogram_seed{}.csv", report.seed), |w| {
                    artifacts::write_density_csv(w, &report.histogram)
                })?;
            }
            diag["simulate"] = json!({
                "samples": config.simulate.samples,
                "burn_in": config.simulate.burn_in,
                "runs": reports
                    .iter()
                    .map(|r| json!({"seed": r.seed, "l1_distance": r.l1_distance}))
                    .collect::<Vec<_>>(),
            });
        }
        Command::Control => {
            let target_path = config.control.target_csv.as_ref().ok_or_else(|| {
                EngineError::invalid_config("control.target_csv", "control needs a target density")
            })?;
            let file = File::open(target_path).map_err(|e| {
                EngineError::invalid_config(
                    "control.target_csv",
                    format!("cannot open {target_path}: {e}"),
                )
            })?;
            let measure = artifacts::read_measure_csv(BufReader::new(file))?;
            if !measure.atoms().is_empty() {
                return Err(EngineError::invalid_config(
                    "control.target_csv",
                    "target must be a plain density (no atoms)",
                ));
            }
            if measure.grid() != sys.grid() {
                return Err(EngineError::invalid_config(
                    "control.target_csv",
                    format!(
                        "target grid has {} cells but system.grid_n is {}",
                        measure.grid().n(),
                        sys.grid().n()
                    ),
                ));
            }
            let target: GridDensity = measure.grid_part().clone();
            let f0 = solve_f0(&sys, config)?;
            let solution = solve_linear_request(
                &sys,
                &f0.density,
                &target,
                config.control.ridge,
                config.control.denominator_floor,
                config.solver.resolvent_tol,
                config.solver.resolvent_max_terms as usize,
            )?;
            if solution.scale_advisory {
                warnings.push(format!(
                    "recovered S has Lipschitz constant {:.4} > 1; by linearity, rescale \
                     both target and S by 1/{:.4} for an admissible perturbation",
                    solution.lipschitz, solution.lipschitz
                ));
            }
            if solution.out_of_range {
                warnings.push(format!(
                    "deconvolution relative residual {:.3e} exceeds {:.0e}: the target appears \
                     to be outside the range of the noise operator",
                    solution.deconvolution_relative_residual,
                    crate::control::OUT_OF_RANGE_THRESHOLD,
                ));
            }
            write_file(out, "f0.csv", |w| artifacts::write_density_csv(w, &f0.density))?;
            write_file(out, "s_nodes.csv", |w| artifacts::write_nodes_csv(w, &solution.s))?;
            write_file(out, "deconvolved.csv", |w| {
                artifacts::write_density_csv(w, &solution.deconvolved)
            })?;
            diag["control"] = json!({
                "lipschitz": solution.lipschitz,
                "scale_advisory": solution.scale_advisory,
                "deconvolution_residual": solution.deconvolution_residual,
                "deconvolution_relative_residual": solution.deconvolution_relative_residual,
                "out_of_range": solution.out_of_range,
                "denominator_margin": solution.denominator_margin,
                "endpoint_defect": solution.endpoint_defect,
                "round_trip_error": solution.round_trip_error,
            });
        }
    }

    if config.output.export_matrix {
        write_file(out, "annealed_matrix.txt", |w| {
            sys.annealed().export_triplets(w)?;
            Ok(())
        })?;
    }

    diag["warnings"] = json!(warnings);
    diag["wall_ms"] = json!(started.elapsed().as_millis() as u64);
    write_file(out, "diagnostics.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &diag)
            .map_err(|e| EngineError::Parse(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(exit)
}
