//! Subcommand implementations.

use aperture_bie::fields::{
    residual_suite, scalar_residual_suite, transmission, FieldEvaluator, PowerReport, ResidualReport, SamplePlan,
    ScalarResidualReport,
};
use aperture_bie::geometry::DofTable;
use aperture_bie::scalar_bie::{
    assemble_t_spatial, assemble_t_spectral, eval_us_scalar, incident_scalar, load_p0, solve_scalar_system,
    solve_static_unit_potential,
};
use aperture_bie::spectra::{build_spectral_grid, build_spectral_grid_with, resolution_warning};
use aperture_bie::validation::{run_validation_with, Fault, ValidationOptions, CRITERIA};
use aperture_bie::vector_bie::{assemble_b_spectral, assemble_l_spatial, physical_load, solve_vector_system};
use aperture_bie::{
    build_mesh_with, Complex64, Grid, Matrix, Mesh, Region, ScalarDensity, ScalarWave, SolveReport, VectorDensity,
    WaveContext,
};
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;

use crate::config::{AssemblyPath, Problem, RunConfig};
use crate::manifest::RunOutput;
use crate::{Cli, CliError, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    if let Command::Validate { criteria, inject_fault } = &cli.command {
        return validate(cli, criteria, inject_fault.as_deref());
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let cfg = RunConfig::load(path)?;
    let dir = output_dir(cli, cfg.output.dir.as_ref())?;
    let echo = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let name = command_name(&cli.command);
    let mut out = RunOutput::create(&dir, name, cli.seed, Some(echo))?;
    out.write("config.toml", &cfg.to_toml()?)?;
    match &cli.command {
        Command::Mesh => {
            let mesh = mesh_for(&cfg, cfg.mesh.h)?;
            write_mesh(&mut out, &mesh)?;
        }
        Command::Solve => {
            let mesh = mesh_for(&cfg, cfg.mesh.h)?;
            write_mesh(&mut out, &mesh)?;
            let solved = solve(&cfg, &mesh, &mut out)?;
            residuals(&cfg, &mesh, &solved, &mut out)?;
        }
        Command::Fields => {
            let mesh = mesh_for(&cfg, cfg.mesh.h)?;
            let solved = solve(&cfg, &mesh, &mut out)?;
            let points = cfg.fields.sample_points();
            if points.is_empty() {
                return Err(CliError::Config("fields: no sample points configured".into()));
            }
            let csv = match &solved {
                Solved::Scalar { density, wave: Some(w) } => scalar_csv(&mesh, density, w, &points)?,
                Solved::Scalar { wave: None, .. } => {
                    return Err(CliError::Config("wave.k: field maps need k > 0".into()));
                }
                Solved::Vector { density, wave } => {
                    let ev = FieldEvaluator::new(&mesh, density)?;
                    aperture_bie::fields::field_map_csv(&ev.total_many(wave, &points)?)
                }
            };
            out.lap("fields");
            out.write("fields.csv", &csv)?;
        }
        Command::Transmission => {
            if cfg.problem != Problem::Vector {
                return Err(CliError::Config("problem: transmission needs a vector problem".into()));
            }
            let mesh = mesh_for(&cfg, cfg.mesh.h)?;
            let Solved::Vector { density, wave } = solve(&cfg, &mesh, &mut out)? else {
                unreachable!("vector config yields a vector solution")
            };
            let power = transmission(&mesh, &density, &wave)?;
            out.lap("transmission");
            if power.flagged {
                log::warn!(
                    "aperture and far-field power disagree by {:.2}%",
                    100.0 * power.relative_disagreement
                );
            }
            out.report("power", &power);
            out.write_json("power.json", &power)?;
        }
        Command::Convergence { levels } => {
            let n = levels.unwrap_or(cfg.convergence.levels);
            convergence(&cfg, n, &mut out)?;
        }
        Command::Validate { .. } => unreachable!(),
    }
    out.finish()?;
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Mesh => "mesh",
        Command::Solve => "solve",
        Command::Fields => "fields",
        Command::Transmission => "transmission",
        Command::Convergence { .. } => "convergence",
        Command::Validate { .. } => "validate",
    }
}

fn output_dir(cli: &Cli, fallback: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    cli.out
        .clone()
        .or_else(|| fallback.cloned())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output.dir".into()))
}

fn validate(cli: &Cli, criteria: &[u8], fault: Option<&str>) -> Result<(), CliError> {
    if let Some(bad) = criteria.iter().find(|id| !CRITERIA.iter().any(|(c, _, _)| c == *id)) {
        return Err(CliError::Config(format!("--criteria: unknown criterion {bad}")));
    }
    let dir = output_dir(cli, None)?;
    let mut out = RunOutput::create(&dir, "validate", cli.seed, None)?;
    let options = ValidationOptions {
        seed: cli.seed,
        fault: match fault {
            Some(_) => Fault::IncomingBranch,
            None => Fault::None,
        },
        criteria: criteria.to_vec(),
    };
    let report = run_validation_with(&options, |o| println!("{}", o.line()));
    out.report("validation", &report);
    out.write_json("validation.json", &report)?;
    out.finish()?;
    let failed = report.outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} criteria failed",
            report.outcomes.len()
        )));
    }
    Ok(())
}

fn mesh_for(cfg: &RunConfig, h: f64) -> Result<Mesh, CliError> {
    Ok(build_mesh_with(&cfg.aperture, h, &cfg.mesh_options())?)
}

fn write_mesh(out: &mut RunOutput, mesh: &Mesh) -> Result<(), CliError> {
    out.report(
        "mesh",
        &json!({
            "vertices": mesh.vertices.len(),
            "cells": mesh.num_cells(),
            "edges": mesh.num_edges(),
            "h": mesh.h,
            "min_angle_deg": mesh.min_angle_deg(),
            "hash": mesh.content_hash(),
        }),
    );
    out.lap("mesh");
    out.write("mesh.json", &mesh.to_json()?)
}

enum Solved {
    /// `wave` is `None` for the static problem.
    Scalar {
        density: ScalarDensity,
        wave: Option<ScalarWave>,
    },
    Vector {
        density: VectorDensity,
        wave: WaveContext,
    },
}

fn grid(cfg: &RunConfig) -> Result<Grid, CliError> {
    let s = &cfg.spectral;
    let k = cfg.wave.k;
    Ok(match s.exclusion {
        Some(e) => build_spectral_grid_with(k, s.xi_max, s.n_radial, s.n_angular, e)?,
        None => build_spectral_grid(k, s.xi_max, s.n_radial, s.n_angular)?,
    })
}

#[derive(Serialize)]
struct Agreement {
    relative_frobenius: f64,
}

/// Assembles along the configured path. With `both`, the spatial matrix is
/// used for the solve and the relative difference is recorded.
fn assemble(
    cfg: &RunConfig,
    mesh: &Mesh,
    out: &mut RunOutput,
    spatial: impl FnOnce() -> aperture_bie::Result<Matrix>,
    spectral: impl FnOnce(&Grid) -> aperture_bie::Result<Matrix>,
) -> Result<Matrix, CliError> {
    let spectral_matrix = if cfg.assembly == AssemblyPath::Spatial {
        None
    } else {
        let g = grid(cfg)?;
        if let Some(w) = resolution_warning(mesh, &g) {
            log::warn!("{w}");
            out.report("spectral_warning", &w);
        }
        Some(spectral(&g)?)
    };
    let spatial_matrix = if cfg.assembly == AssemblyPath::Spectral {
        None
    } else {
        Some(spatial()?)
    };
    out.lap("assembly");
    Ok(match (spatial_matrix, spectral_matrix) {
        (Some(a), Some(b)) => {
            let agreement = Agreement {
                relative_frobenius: a.sub(&b).frobenius_norm() / a.frobenius_norm(),
            };
            out.report("agreement", &agreement);
            a
        }
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("at least one assembly path is selected"),
    })
}

fn record_solve(out: &mut RunOutput, report: &SolveReport) {
    out.lap("solve");
    if report.condition > 1e12 {
        log::warn!("system condition estimate {:.3e}", report.condition);
    }
    out.report("solve", report);
}

fn solve(cfg: &RunConfig, mesh: &Mesh, out: &mut RunOutput) -> Result<Solved, CliError> {
    let q = &cfg.quadrature;
    let w = &cfg.wave;
    match cfg.problem {
        Problem::Scalar if w.k == 0.0 => {
            let sol = solve_static_unit_potential(mesh, q)?;
            record_solve(out, &sol.report);
            out.report("static_integral", &sol.density.integral(mesh).re);
            out.write("density.json", &sol.density.to_json()?)?;
            Ok(Solved::Scalar {
                density: sol.density,
                wave: None,
            })
        }
        Problem::Scalar => {
            let wave = ScalarWave::new(w.k, w.m)?;
            let t = assemble(
                cfg,
                mesh,
                out,
                || assemble_t_spatial(mesh, w.k, q),
                |g| assemble_t_spectral(mesh, w.k, g),
            )?;
            let rhs = load_p0(mesh, q.mid_order, |x| incident_scalar(&wave, [x[0], x[1], 0.0]).0)?;
            let sol = solve_scalar_system(mesh, w.k, &t.scaled(Complex64::new(2.0, 0.0)), &rhs)?;
            record_solve(out, &sol.report);
            out.write("density.json", &sol.density.to_json()?)?;
            Ok(Solved::Scalar {
                density: sol.density,
                wave: Some(wave),
            })
        }
        Problem::Vector => {
            let p = w.p.expect("validated vector config has a polarization");
            let wave = WaveContext::new(w.k, w.m, p)?;
            let b = assemble(
                cfg,
                mesh,
                out,
                || assemble_l_spatial(mesh, w.k, q),
                |g| assemble_b_spectral(mesh, w.k, g),
            )?;
            let sol = solve_vector_system(mesh, w.k, &b, &physical_load(mesh, &wave)?)?;
            record_solve(out, &sol.report);
            out.write("density.json", &sol.density.to_json(mesh)?)?;
            Ok(Solved::Vector {
                density: sol.density,
                wave,
            })
        }
    }
}

enum Residuals {
    Scalar(ScalarResidualReport),
    Vector(ResidualReport),
}

fn residual_report(mesh: &Mesh, solved: &Solved) -> Result<Option<Residuals>, CliError> {
    let plan = SamplePlan::for_mesh(mesh);
    Ok(match solved {
        Solved::Scalar { wave: None, .. } => None,
        Solved::Scalar { density, wave: Some(w) } => {
            Some(Residuals::Scalar(scalar_residual_suite(mesh, density, w, &plan)?))
        }
        Solved::Vector { density, wave } => Some(Residuals::Vector(residual_suite(mesh, density, wave, &plan)?)),
    })
}

fn residuals(_cfg: &RunConfig, mesh: &Mesh, solved: &Solved, out: &mut RunOutput) -> Result<(), CliError> {
    match residual_report(mesh, solved)? {
        Some(Residuals::Scalar(r)) => out.report("residuals", &r),
        Some(Residuals::Vector(r)) => out.report("residuals", &r),
        None => {}
    }
    out.lap("residuals");
    Ok(())
}

fn total_scalar(mesh: &Mesh, density: &ScalarDensity, wave: &ScalarWave, r: [f64; 3]) -> Result<Complex64, CliError> {
    let us = eval_us_scalar(mesh, density, r)?;
    Ok(match Region::of(r[2]) {
        Some(Region::Lower) => us,
        _ => {
            let (ui, ur) = incident_scalar(wave, r);
            ui + ur + us
        }
    })
}

fn scalar_csv(
    mesh: &Mesh,
    density: &ScalarDensity,
    wave: &ScalarWave,
    points: &[[f64; 3]],
) -> Result<String, CliError> {
    use rayon::prelude::*;
    let values = points
        .par_iter()
        .map(|r| total_scalar(mesh, density, wave, *r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut s = String::from("x,y,z,Re u,Im u\n");
    for (r, u) in points.iter().zip(values) {
        s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r[0], r[1], r[2], u.re, u.im));
    }
    Ok(s)
}

/// `∫_Γ |W|²` by the centroid rule.
fn vector_l2(mesh: &Mesh, density: &VectorDensity) -> f64 {
    let dofs = DofTable::new(mesh);
    (0..mesh.num_cells())
        .map(|c| {
            let v = density.value(mesh, &dofs, c, mesh.cell_centroid(c));
            mesh.cell_area(c) * (v[0].norm_sqr() + v[1].norm_sqr())
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Serialize)]
struct Level {
    h: f64,
    unknowns: usize,
    /// Named scalar quantities with their values at this level.
    values: Vec<(String, f64)>,
    /// Complex quantities compared between levels by their difference.
    targets: Vec<(String, [f64; 2])>,
    residuals: Vec<(String, f64)>,
}

fn level(cfg: &RunConfig, h: f64, out: &mut RunOutput) -> Result<Level, CliError> {
    let mesh = mesh_for(cfg, h)?;
    let solved = solve(cfg, &mesh, out)?;
    let mut lv = Level {
        h,
        unknowns: 0,
        values: Vec::new(),
        targets: Vec::new(),
        residuals: Vec::new(),
    };
    match &solved {
        Solved::Scalar { density, .. } => {
            lv.unknowns = density.coefficients.len();
            let i = density.integral(&mesh);
            lv.targets.push(("integral".into(), [i.re, i.im]));
            lv.values.push(("density_l2".into(), density.l2_norm(&mesh)));
        }
        Solved::Vector { density, wave } => {
            lv.unknowns = density.coefficients.len();
            lv.values.push(("density_l2".into(), vector_l2(&mesh, density)));
            let power: PowerReport = transmission(&mesh, density, wave)?;
            lv.targets.push(("tau".into(), [power.tau, 0.0]));
        }
    }
    match residual_report(&mesh, &solved)? {
        Some(Residuals::Scalar(r)) => {
            lv.residuals.push(("aperture_continuity".into(), r.aperture_continuity));
            lv.residuals.push(("helmholtz".into(), r.helmholtz));
            lv.residuals.push(("screen_neumann".into(), r.screen_neumann));
        }
        Some(Residuals::Vector(r)) => {
            lv.residuals.push(("screen_tangential_e".into(), r.screen_tangential_e));
            lv.residuals.push(("screen_normal_h".into(), r.screen_normal_h));
            lv.residuals.push(("aperture_continuity".into(), r.aperture_continuity));
            lv.residuals.push(("maxwell_e".into(), r.maxwell_e));
            lv.residuals.push(("maxwell_h".into(), r.maxwell_h));
        }
        None => {}
    }
    Ok(lv)
}

/// Observed rate from three successive values at halved mesh sizes.
fn self_rate(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let d = |x: [f64; 2], y: [f64; 2]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    (d(a, b) / d(b, c)).log2()
}

#[derive(Debug, Serialize)]
struct ConvergenceTable {
    levels: Vec<Level>,
    /// Per quantity, rates between consecutive level triples (values,
    /// targets) or pairs (residuals).
    rates: Vec<(String, Vec<f64>)>,
    /// Residual columns that fail to decrease.
    non_monotone: Vec<String>,
}

fn convergence(cfg: &RunConfig, n: usize, out: &mut RunOutput) -> Result<(), CliError> {
    if n < 3 {
        return Err(CliError::Config(format!(
            "convergence.levels: need at least 3, got {n}"
        )));
    }
    let mut levels = Vec::with_capacity(n);
    for l in 0..n {
        let h = cfg.mesh.h / f64::powi(2.0, l as i32);
        log::info!("convergence level {l}: h = {h}");
        levels.push(level(cfg, h, out)?);
    }
    let mut rates = Vec::new();
    let triples = |f: &dyn Fn(&Level) -> [f64; 2]| -> Vec<f64> {
        levels
            .windows(3)
            .map(|w| self_rate(f(&w[0]), f(&w[1]), f(&w[2])))
            .collect()
    };
    for (j, (name, _)) in levels[0].targets.iter().enumerate() {
        rates.push((name.clone(), triples(&|l: &Level| l.targets[j].1)));
    }
    for (j, (name, _)) in levels[0].values.iter().enumerate() {
        rates.push((name.clone(), triples(&|l: &Level| [l.values[j].1, 0.0])));
    }
    let mut non_monotone = Vec::new();
    for (j, (name, _)) in levels[0].residuals.iter().enumerate() {
        let col: Vec<f64> = levels.iter().map(|l| l.residuals[j].1).collect();
        if col.windows(2).any(|w| !(w[1] < w[0]) && w[0] > 1e-12) {
            non_monotone.push(name.clone());
        }
        rates.push((name.clone(), col.windows(2).map(|w| (w[0] / w[1]).log2()).collect()));
    }
    let table = ConvergenceTable {
        levels,
        rates,
        non_monotone,
    };
    out.write("convergence.csv", &convergence_csv(&table))?;
    out.report("convergence", &table);
    out.write_json("convergence.json", &table)?;
    Ok(())
}

fn convergence_csv(t: &ConvergenceTable) -> String {
    let first = &t.levels[0];
    let mut header = vec!["h".to_string(), "unknowns".to_string()];
    for (name, _) in &first.targets {
        header.push(format!("Re {name}"));
        header.push(format!("Im {name}"));
    }
    header.extend(first.values.iter().map(|(n, _)| n.clone()));
    header.extend(first.residuals.iter().map(|(n, _)| n.clone()));
    let mut s = header.join(",") + "\n";
    for l in &t.levels {
        let mut row = vec![format!("{:e}", l.h), l.unknowns.to_string()];
        for (_, v) in &l.targets {
            row.push(format!("{:e}", v[0]));
            row.push(format!("{:e}", v[1]));
        }
        row.extend(l.values.iter().map(|(_, v)| format!("{v:e}")));
        row.extend(l.residuals.iter().map(|(_, v)| format!("{v:e}")));
        s += &(row.join(",") + "\n");
    }
    s
}
