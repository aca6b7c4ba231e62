//! Batch front end: simulate, riemann, germ, viscous, verify and sweep
//! subcommands over a JSON run configuration, emitting CSV series and JSON
//! reports into a run directory.

mod config;
mod io;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};

use config::RunConfig;
use germ_core::germ::{self, Definiteness};
use germ_core::riemann::{self, RiemannError};
use germ_core::scheme::{self, SchemeError};
use germ_core::verify::{self, BumpProfile, TestBump};
use germ_core::viscous::{self, ViscousError};

#[derive(Parser)]
#[command(name = "germ-solver", version, about = "Interface-germ solvers for conservation laws with a flux discontinuity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the mesh width.
    #[arg(long)]
    dx: Option<f64>,
    /// Override the final time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Override the germ level resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// March the finite-volume scheme and write field/trace series.
    Simulate(Common),
    /// Solve one interface Riemann problem and print the wave fans.
    Riemann {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        left: f64,
        #[arg(long, allow_negative_numbers = true)]
        right: f64,
        /// Also write a sampled similarity profile at this time.
        #[arg(long)]
        profile_at: Option<f64>,
    },
    /// Sample a germ; with --analyze also probe dissipativity, definiteness
    /// and completeness.
    Germ {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        analyze: bool,
    },
    /// Standing-wave profiles or the viscous march.
    Viscous {
        #[command(flatten)]
        common: Common,
        /// "profile" or "pde".
        #[arg(long, default_value = "pde")]
        mode: String,
        #[arg(long, allow_negative_numbers = true)]
        ul: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        ur: Option<f64>,
        #[arg(long, default_value_t = 60.0)]
        x_span: f64,
        #[arg(long, default_value_t = 1e-6)]
        profile_tol: f64,
        /// Flux-smoothing width; picks the smoothed-profile equation.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Residual checks over previously written runs.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run directory with field.csv and traces.csv.
        #[arg(long)]
        run: PathBuf,
        /// Second run for pairwise reports.
        #[arg(long)]
        run2: Option<PathBuf>,
        /// Report without failing the exit status.
        #[arg(long)]
        informational: bool,
    },
    /// Viscosity sweep: one run directory per eps plus a summary table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated viscosity list.
        #[arg(long)]
        eps: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            classify(&err)
        }
    };
    std::process::exit(code);
}

/// Exit codes: 0 ok, 2 validation, 3 incomplete germ, 4 ambiguous flux,
/// 5 verification failure.
fn classify(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(r) = cause.downcast_ref::<RiemannError>() {
            return match r {
                RiemannError::Incomplete { .. } => 3,
                RiemannError::AmbiguousFlux { .. } => 4,
                _ => 2,
            };
        }
        if let Some(s) = cause.downcast_ref::<SchemeError>() {
            return match s {
                SchemeError::Riemann(RiemannError::Incomplete { .. }) => 3,
                SchemeError::Riemann(RiemannError::AmbiguousFlux { .. }) => 4,
                _ => 2,
            };
        }
        if let Some(v) = cause.downcast_ref::<ViscousError>() {
            return match v {
                ViscousError::Scheme(SchemeError::Riemann(RiemannError::Incomplete { .. })) => 3,
                ViscousError::Scheme(SchemeError::Riemann(RiemannError::AmbiguousFlux {
                    ..
                })) => 4,
                _ => 2,
            };
        }
    }
    2
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(dx) = common.dx {
        if let Some(mesh) = cfg.mesh.as_mut() {
            mesh.dx = dx;
        }
    }
    if let Some(t) = common.t_end {
        if let Some(mesh) = cfg.mesh.as_mut() {
            mesh.t_end = t;
        }
    }
    if let Some(r) = common.resolution {
        cfg.resolution = r;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.validate()?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(common) => simulate(&common),
        Command::Riemann {
            common,
            left,
            right,
            profile_at,
        } => riemann_cmd(&common, left, right, profile_at),
        Command::Germ { common, analyze } => germ_cmd(&common, analyze),
        Command::Viscous {
            common,
            mode,
            ul,
            ur,
            x_span,
            profile_tol,
            delta,
            eps,
        } => viscous_cmd(&common, &mode, ul, ur, x_span, profile_tol, delta, eps),
        Command::Verify {
            common,
            run,
            run2,
            informational,
        } => verify_cmd(&common, &run, run2.as_deref(), informational),
        Command::Sweep { common, eps } => sweep_cmd(&common, &eps),
    }
}

fn write_run_outputs(
    out: &Path,
    sol: &germ_core::scheme::GridSolution,
    extra: serde_json::Value,
) -> Result<()> {
    io::write_text(&out.join("field.csv"), &io::field_csv(sol))?;
    io::write_text(&out.join("traces.csv"), &io::traces_csv(sol))?;
    let total_boundary: f64 = sol
        .boundary_flux_series
        .iter()
        .map(|(l, r)| l.abs() + r.abs())
        .sum::<f64>()
        * sol.dt;
    let mut report = json!({
        "dx": sol.dx,
        "dt": sol.dt,
        "steps": sol.step_times.len() - 1,
        // cell indexing: cells 0 .. n_left-1 sit left of the interface, the
        // interface face is between cells n_left-1 and n_left at x = 0
        "n_left": sol.n_left,
        "n_cells": sol.n_cells(),
        "envelope": {
            "left": [sol.envelope.0.lo, sol.envelope.0.hi],
            "right": [sol.envelope.1.lo, sol.envelope.1.hi],
        },
        "conservation_defect": sol.conservation_defect,
        "total_boundary_flux": total_boundary,
        "clamp_count": sol.clamp_count,
        "mass_initial": sol.mass(0),
        "mass_final": sol.mass(sol.times.len() - 1),
    });
    if let (Some(obj), Some(extra)) = (report.as_object_mut(), extra.as_object()) {
        for (k, v) in extra {
            obj.insert(k.clone(), v.clone());
        }
    }
    io::write_json(&out.join("report.json"), &report)
}

fn simulate(common: &Common) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let fluxes = cfg.build_fluxes()?;
    let (_, sample) = cfg.build_germ(&fluxes)?;
    let mesh = cfg
        .mesh
        .as_ref()
        .ok_or_else(|| anyhow!("simulate needs a mesh section"))?
        .build()?;
    let u0 = cfg
        .u0
        .as_ref()
        .ok_or_else(|| anyhow!("simulate needs a u0 section"))?
        .build()?;
    let sol = scheme::run(&mesh, &sample, &u0, 0)?;
    write_run_outputs(&out, &sol, json!({"germ_pairs": sample.len()}))?;
    println!("run written to {}", out.display());
    Ok(0)
}

fn fan_json(fan: &riemann::RiemannFan) -> serde_json::Value {
    json!({
        "left": fan.left,
        "right": fan.right,
        "waves": fan.waves.iter().map(|w| json!({
            "kind": format!("{:?}", w.kind),
            "speed_lo": w.speed_lo(),
            "speed_hi": w.speed_hi(),
            "value_left": w.value_left(),
            "value_right": w.value_right(),
        })).collect::<Vec<_>>(),
    })
}

fn riemann_cmd(common: &Common, left: f64, right: f64, profile_at: Option<f64>) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let fluxes = cfg.build_fluxes()?;
    let (_, sample) = cfg.build_germ(&fluxes)?;
    let sol = riemann::solve_interface(&sample, left, right)?;
    let report = json!({
        "datum": [left, right],
        "trace_pair": [sol.ul, sol.ur],
        "interface_flux": sol.interface_flux,
        "left_fan": fan_json(&sol.left_fan),
        "right_fan": fan_json(&sol.right_fan),
    });
    io::write_json(&out.join("fan.json"), &report)?;
    println!("{:#}", report);
    if let Some(t) = profile_at {
        let mut xi = Vec::new();
        let mut w = Vec::new();
        let span = 2.0 * (sol.left_fan.speed_lo().abs().max(sol.right_fan.speed_hi().abs()) + 1.0);
        let n = 801;
        for i in 0..n {
            let x = -span + 2.0 * span * i as f64 / (n - 1) as f64;
            xi.push(x);
            w.push(sol.eval_at(t, x));
        }
        io::write_text(&out.join("profile.csv"), &io::profile_csv(&xi, &w))?;
    }
    Ok(0)
}

fn germ_cmd(common: &Common, analyze: bool) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let fluxes = cfg.build_fluxes()?;
    let (spec, sample) = cfg.build_germ(&fluxes)?;
    io::write_text(&out.join("sample.csv"), &io::sample_csv(&sample))?;
    if !analyze {
        println!("{} pairs written to {}", sample.len(), out.display());
        return Ok(0);
    }
    let l1d = germ::is_l1d(&sample)?;
    let definiteness = germ::definiteness_probe(&spec, cfg.resolution)?;
    let coverage = germ::completeness_check(&sample, cfg.resolution)?;
    let verdict = match &definiteness {
        Definiteness::DefiniteAtResolution => "definite-at-resolution",
        Definiteness::NotDefinite { .. } => "not-definite",
        Definiteness::Inconclusive => "inconclusive",
    };
    let report = json!({
        "kind": spec.kind.name(),
        "resolution": cfg.resolution,
        "pairs": sample.len(),
        "l1d": l1d.ok,
        "l1d_witness": l1d.witness.map(|(p, q, m)| json!({
            "p": [p.ul, p.ur], "q": [q.ul, q.ur], "margin": m
        })),
        "definiteness": verdict,
        "coverage": coverage.fraction,
        "uncovered": coverage.uncovered,
    });
    io::write_json(&out.join("germ_report.json"), &report)?;
    println!("{:#}", report);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn viscous_cmd(
    common: &Common,
    mode: &str,
    ul: Option<f64>,
    ur: Option<f64>,
    x_span: f64,
    profile_tol: f64,
    delta: Option<f64>,
    eps_flag: Option<f64>,
) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let fluxes = cfg.build_fluxes()?;
    match mode {
        "profile" => {
            let pair = germ_core::germ::StatePair::new(
                ul.ok_or_else(|| anyhow!("profile mode needs --ul"))?,
                ur.ok_or_else(|| anyhow!("profile mode needs --ur"))?,
            );
            let profile = match delta {
                None => viscous::standing_wave(&fluxes, pair, x_span, profile_tol)?,
                Some(d) => {
                    let eps = eps_flag.or(cfg.eps).unwrap_or(1.0);
                    viscous::smoothed_profile(&fluxes, pair, eps, d, x_span, profile_tol)?
                }
            };
            io::write_text(&out.join("profile.csv"), &io::profile_csv(&profile.xi, &profile.w))?;
            let report = json!({
                "pair": [pair.ul, pair.ur],
                "verdict": format!("{:?}", profile.verdict),
                "limits": [profile.limits.0, profile.limits.1],
            });
            io::write_json(&out.join("profile_report.json"), &report)?;
            println!("{:#}", report);
            Ok(0)
        }
        "pde" => {
            let mesh = cfg
                .mesh
                .as_ref()
                .ok_or_else(|| anyhow!("pde mode needs a mesh section"))?
                .build()?;
            let u0 = cfg
                .u0
                .as_ref()
                .ok_or_else(|| anyhow!("pde mode needs a u0 section"))?
                .build()?;
            let eps = eps_flag
                .or(cfg.eps)
                .ok_or_else(|| anyhow!("pde mode needs eps"))?;
            let visc = cfg.build_viscosity(&fluxes)?;
            let sol = viscous::run_parabolic(&fluxes, visc.as_ref(), eps, &mesh, &u0)?;
            write_run_outputs(&out, &sol, json!({"eps": eps}))?;
            println!("viscous run written to {}", out.display());
            Ok(0)
        }
        other => Err(anyhow!("unknown viscous mode {other:?}")),
    }
}

fn verify_cmd(common: &Common, run: &Path, run2: Option<&Path>, informational: bool) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let fluxes = cfg.build_fluxes()?;
    let (_, sample) = cfg.build_germ(&fluxes)?;
    let u = io::read_run(run)?;
    let mut reports: Vec<verify::ResidualReport> = Vec::new();

    reports.push(verify::max_principle_report(&u, u.envelope, 1e-9));
    let trace = verify::trace_membership(&u, &sample, 10, 0.05)?;
    reports.push(verify::ResidualReport {
        name: "trace_membership".into(),
        value: -trace.median,
        tolerance: 0.05,
        pass: trace.pass,
        witnesses: vec![format!("median distance {}", trace.median)],
    });
    reports.push(verify::interface_dissipation_report(&u, &sample, 100)?);

    let t_end = *u.times.last().unwrap();
    let x_half = u.x_centers.last().unwrap().abs();
    let xi = TestBump::new(
        BumpProfile::hat(0.0, 0.5 * t_end, t_end),
        BumpProfile::hat(-0.9 * x_half, 0.0, 0.9 * x_half),
    );
    for p in sample.pairs().iter().take(5) {
        reports.push(verify::entropy_residual(&u, &sample, p.ul, p.ur, &xi)?);
    }
    if let Some(dir2) = run2 {
        let v = io::read_run(dir2)?;
        reports.push(verify::kato_residual(&u, &v, &fluxes, &xi)?);
        reports.push(verify::l1_contraction_report(&u, &v, informational)?);
        reports.push(verify::comparison_report(&u, &v)?);
    }

    let all = serde_json::to_value(&reports)?;
    io::write_json(&out.join("verify_report.json"), &json!({ "reports": all }))?;
    let failures = reports.iter().filter(|r| !r.pass).count();
    for r in &reports {
        println!(
            "{}: {} (value {:.3e}, tolerance {:.3e})",
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            r.value,
            r.tolerance
        );
    }
    if failures > 0 && !informational {
        return Ok(5);
    }
    Ok(0)
}

fn sweep_cmd(common: &Common, eps_list: &str) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let eps: Vec<f64> = eps_list
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad eps {s:?}")))
        .collect::<Result<_>>()?;
    let fluxes = cfg.build_fluxes()?;
    let mesh = cfg
        .mesh
        .as_ref()
        .ok_or_else(|| anyhow!("sweep needs a mesh section"))?
        .build()?;
    let u0 = cfg
        .u0
        .as_ref()
        .ok_or_else(|| anyhow!("sweep needs a u0 section"))?
        .build()?;
    let visc = cfg.build_viscosity(&fluxes)?;

    // runs are independent; outputs go to per-eps directories
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = eps
            .iter()
            .map(|&e| {
                let fluxes = &fluxes;
                let mesh = &mesh;
                let u0 = &u0;
                let visc = visc.as_ref();
                scope.spawn(move || viscous::run_parabolic(fluxes, visc, e, mesh, u0))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut summary = String::from(&format!("# {}\n", config::FORMAT_VERSION));
    summary.push_str("eps,dt,steps,mass_final,conservation_defect,clamp_count\n");
    for (&e, result) in eps.iter().zip(results) {
        let sol = result?;
        let dir = out.join(format!("eps_{}", e));
        write_run_outputs(&dir, &sol, json!({"eps": e}))?;
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e,
            sol.dt,
            sol.step_times.len() - 1,
            sol.mass(sol.times.len() - 1),
            sol.conservation_defect,
            sol.clamp_count
        ));
    }
    io::write_text(&out.join("summary.csv"), &summary)?;
    println!("sweep written to {}", out.display());
    Ok(0)
}
