//! Mode dispatch: evolve and persist snapshots, build value tables and
//! limit profiles, run the property suite, and emit reports plus a
//! manifest for every run.

use crate::analysis;
use crate::config::{check_mode, Mode, Numerics, Problem, RunConfig};
use crate::control::{self, DpOptions};
use crate::error::{Error, Result};
use crate::model::{PeriodicProblem, RadialProblem};
use crate::output;
use crate::periodic::{self, CurvatureParams};
use crate::radial;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub label: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

impl CheckResult {
    fn new(id: &str, label: &str, measured: f64, bound: f64) -> CheckResult {
        CheckResult {
            id: id.into(),
            label: label.into(),
            passed: measured <= bound,
            measured,
            bound,
        }
    }

    fn flag(id: &str, label: &str, passed: bool, measured: f64, bound: f64) -> CheckResult {
        CheckResult {
            id: id.into(),
            label: label.into(),
            passed,
            measured,
            bound,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub mode: String,
    pub artifacts: Vec<PathBuf>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

fn periodic_evolve_options(num: &Numerics, track: Vec<usize>) -> periodic::EvolveOptions {
    periodic::EvolveOptions {
        t_max: num.t_max,
        snapshot_every: num.snapshot_every,
        cfl_safety: num.cfl_safety,
        dt_override: num.dt_override,
        divergence_factor: num.divergence_factor,
        track_nodes: track,
    }
}

fn radial_evolve_options(num: &Numerics, track: Vec<usize>) -> radial::EvolveOptions {
    radial::EvolveOptions {
        t_max: num.t_max,
        snapshot_every: num.snapshot_every,
        cfl_safety: num.cfl_safety,
        dt_override: num.dt_override,
        divergence_factor: num.divergence_factor,
        track_nodes: track,
    }
}

/// Default DP step for a radial problem: half a cell per step at the
/// fastest cone speed.
pub fn default_dp_dt(problem: &RadialProblem) -> f64 {
    let max_speed = 1.0 + (problem.dim as f64 - 1.0) / problem.grid.r_min;
    0.5 * problem.grid.h / max_speed
}

/// Execute a run configuration. `mode` overrides the config's own mode.
pub fn run(config: &RunConfig, mode: Mode, quiet: bool) -> Result<RunSummary> {
    check_mode(mode, &config.problem)?;
    let started = Instant::now();
    let dir = config.output_dir.clone();
    let _lock = output::DirLock::acquire(&dir)?;
    let mut artifacts: Vec<PathBuf> = Vec::new();
    let mut checks: Vec<CheckResult> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    if let Problem::Radial(p) = &config.problem {
        warnings.extend(p.warnings.iter().cloned());
    }

    match (mode, &config.problem) {
        (Mode::Periodic, Problem::Periodic(p)) => {
            let params = CurvatureParams::new(config.numerics.eps_reg);
            let aubry = p.aubry_set(p.aubry_tol).indices();
            let out = periodic::evolve(p, &params, &periodic_evolve_options(&config.numerics, aubry))?;
            for (i, snap) in out.snapshots.iter().enumerate() {
                artifacts.push(output::write_periodic_snapshot(&dir, i, snap)?);
            }
        }
        (Mode::Radial, Problem::Radial(p)) => {
            let aubry = p.aubry_set(p.aubry_tol).indices();
            let out = radial::evolve_radial(p, &radial_evolve_options(&config.numerics, aubry))?;
            for (i, snap) in out.snapshots.iter().enumerate() {
                artifacts.push(output::write_radial_snapshot(&dir, i, snap, p)?);
            }
            artifacts.push(output::write_plot_script(
                &dir,
                "plot.gp",
                &["U_0000.csv"],
                "U",
            )?);
        }
        (Mode::Value, Problem::Radial(p)) => {
            let table = control::value_dp(
                p,
                &DpOptions {
                    t_max: config.numerics.t_max,
                    dt: config.numerics.dt_override.unwrap_or_else(|| default_dp_dt(p)),
                    velocity_samples: config.numerics.velocity_samples,
                    snapshot_every: Some(config.numerics.snapshot_every),
                },
            )?;
            artifacts.push(output::write_value_table(&dir, &table)?);
        }
        (Mode::Limit, Problem::Radial(p)) => {
            let dt = config.numerics.dt_override.unwrap_or_else(|| default_dp_dt(p));
            let table = control::value_dp(
                p,
                &DpOptions {
                    t_max: config.numerics.t_max,
                    dt,
                    velocity_samples: config.numerics.velocity_samples,
                    snapshot_every: None,
                },
            )?;
            let limit_tol = config
                .numerics
                .limit_tol
                .unwrap_or(10.0 * (p.grid.h + dt));
            let lp = control::limit_profile(p, &table, limit_tol)?;
            let (v_path, vg_path) = output::write_limit_profile(&dir, &lp)?;
            artifacts.push(v_path);
            artifacts.push(vg_path);
            artifacts.push(output::write_plot_script(&dir, "plot.gp", &["V.csv"], "V")?);
        }
        (Mode::Study, Problem::Periodic(p)) => {
            let params = CurvatureParams::new(config.numerics.eps_reg);
            let out = periodic::evolve(p, &params, &periodic_evolve_options(&config.numerics, vec![]))?;
            let report = analysis::convergence_study_periodic(
                &out.snapshots,
                config.numerics.window,
                config.numerics.conv_tol,
            )?;
            let path = dir.join("study.json");
            std::fs::write(&path, serde_json::to_string_pretty(&StudyReport::from(&report))?)?;
            artifacts.push(path);
            checks.push(CheckResult::flag(
                "ergodic_convergence",
                "windowed oscillation below tolerance by the final window",
                report.converged,
                *report.sup_osc.last().unwrap(),
                report.conv_tol,
            ));
        }
        (Mode::Study, Problem::Radial(p)) => {
            let aubry = p.aubry_set(p.aubry_tol).indices();
            let out = radial::evolve_radial(p, &radial_evolve_options(&config.numerics, aubry))?;
            let span = p.grid.r_max() - p.grid.r_min;
            let region = (p.grid.r_min + 0.1 * span, p.grid.r_max() - 0.1 * span);
            let report = analysis::convergence_study_radial(
                &out.snapshots,
                region,
                config.numerics.window,
                config.numerics.conv_tol,
            )?;
            let lip = analysis::lipschitz_radial(
                p,
                &out.snapshots,
                &out.stats,
                &config.numerics.alphas,
            )?;
            let path = dir.join("study.json");
            let combined = serde_json::json!({
                "convergence": StudyReport::from(&report),
                "lipschitz": LipschitzJson::from(&lip),
            });
            std::fs::write(&path, serde_json::to_string_pretty(&combined)?)?;
            artifacts.push(path);
            checks.push(CheckResult::flag(
                "ergodic_convergence",
                "windowed oscillation below tolerance by the final window",
                report.converged,
                *report.sup_osc.last().unwrap(),
                report.conv_tol,
            ));
        }
        (Mode::Verify, Problem::Periodic(p)) => {
            checks = verify_periodic(p, &config.numerics)?;
            let path = dir.join("verify.json");
            std::fs::write(&path, serde_json::to_string_pretty(&checks)?)?;
            artifacts.push(path);
        }
        (Mode::Verify, Problem::Radial(p)) => {
            checks = verify_radial(p, &config.numerics)?;
            let path = dir.join("verify.json");
            std::fs::write(&path, serde_json::to_string_pretty(&checks)?)?;
            artifacts.push(path);
        }
        _ => unreachable!("mode/problem mismatch is rejected by check_mode"),
    }

    let manifest = output::write_manifest(
        &dir,
        mode.as_str(),
        &config.source_bytes,
        started.elapsed().as_secs_f64(),
        &artifacts,
    )?;
    artifacts.push(manifest);

    if !quiet {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        for c in &checks {
            println!(
                "{:<28} {}  measured {:.3e}  bound {:.3e}",
                c.id,
                if c.passed { "pass" } else { "FAIL" },
                c.measured,
                c.bound
            );
        }
    }

    let failed = checks.iter().filter(|c| !c.passed).count();
    if mode == Mode::Verify && failed > 0 {
        return Err(Error::VerificationFailed {
            failed,
            total: checks.len(),
        });
    }

    Ok(RunSummary {
        mode: mode.as_str().into(),
        artifacts,
        checks,
        warnings,
    })
}

#[derive(Serialize)]
struct StudyReport {
    window_starts: Vec<f64>,
    sup_osc: Vec<f64>,
    converged: bool,
    conv_tol: f64,
}

impl From<&analysis::ConvergenceReport> for StudyReport {
    fn from(r: &analysis::ConvergenceReport) -> StudyReport {
        StudyReport {
            window_starts: r.window_starts.clone(),
            sup_osc: r.sup_osc.clone(),
            converged: r.converged,
            conv_tol: r.conv_tol,
        }
    }
}

#[derive(Serialize)]
struct LipschitzJson {
    time_lip: f64,
    time_bound: f64,
    space: Vec<(f64, f64, f64)>,
}

impl From<&analysis::LipschitzReport> for LipschitzJson {
    fn from(r: &analysis::LipschitzReport) -> LipschitzJson {
        LipschitzJson {
            time_lip: r.time_lip,
            time_bound: r.time_bound,
            space: r.space.iter().map(|e| (e.alpha, e.measured, e.bound)).collect(),
        }
    }
}

/// The property suite for a periodic problem.
fn verify_periodic(p: &PeriodicProblem, num: &Numerics) -> Result<Vec<CheckResult>> {
    let params = CurvatureParams::new(num.eps_reg);
    let aubry = p.aubry_set(p.aubry_tol);
    let out = periodic::evolve(p, &params, &periodic_evolve_options(num, aubry.indices()))?;
    let h = p.grid.h;
    let dt = out.stats.dt_nominal;
    let wind_free = p.wind_max_abs() == 0.0;
    let mut checks = Vec::new();

    if !aubry.is_empty() {
        checks.push(CheckResult::new(
            "aubry_monotonicity",
            "per-step increase rate on the zero set of the source",
            out.stats.max_tracked_increase_rate,
            10.0 * h,
        ));
    }
    checks.push(CheckResult::new(
        "cutoff_sign",
        "bracketed operator stays nonnegative at every node and step",
        out.stats.max_operator_excess,
        1e-12,
    ));
    if wind_free {
        checks.push(CheckResult::new(
            "source_rate_bound",
            "u(t+dt) - u(t) <= dt f at every node and step",
            out.stats.max_source_excess,
            1e-12,
        ));
    }

    // the large-time checks only gate problems flagged ergodic; transient
    // studies (barriers, comparison) run regardless
    match (p.ergodic)
        .then(|| analysis::convergence_study_periodic(&out.snapshots, num.window, num.conv_tol))
        .transpose()
    {
        Ok(None) => {}
        Ok(Some(report)) => {
            checks.push(CheckResult::flag(
                "ergodic_convergence",
                "windowed oscillation over the torus below tolerance",
                report.converged,
                *report.sup_osc.last().unwrap(),
                report.conv_tol,
            ));
            let limit = crate::model::Field::new(
                p.grid.clone(),
                out.snapshots.last().unwrap().time,
                report.limit_values.clone(),
            );
            let residual = periodic::ergodic_residual(&limit, p, &params);
            let off_a = residual
                .values
                .iter()
                .enumerate()
                .filter(|(i, _)| p.source[*i] > p.aubry_tol)
                .map(|(_, v)| v.abs())
                .fold(0.0f64, f64::max);
            checks.push(CheckResult::new(
                "stationary_residual",
                "stationary residual of the limit away from the zero set",
                off_a,
                10.0 * (h + params.eps_reg),
            ));

            let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
            let slices: Vec<&[f64]> = out.snapshots.iter().map(|s| s.values.as_slice()).collect();
            if !aubry.is_empty() {
                let region: Vec<usize> = (0..p.grid.node_count()).collect();
                let rep = analysis::uniqueness_set_check(
                    &times,
                    &slices,
                    &aubry.indices(),
                    &region,
                    num.window,
                    num.kappa_amp,
                    num.conv_tol,
                )?;
                checks.push(CheckResult::flag(
                    "uniqueness_gap",
                    "global oscillation controlled by the zero-set oscillation",
                    rep.passed,
                    rep.gap_global,
                    rep.bound,
                ));
            }
        }
        Err(Error::InsufficientHorizon { .. }) => {}
        Err(e) => return Err(e),
    }


    if wind_free {
        let mut worst_shift = f64::NEG_INFINITY;
        for shift in [[1, 0], [0, 1]] {
            worst_shift = worst_shift
                .max(analysis::barrier_sandwich_periodic(p, &shift, &out.snapshots)?);
        }
        checks.push(CheckResult::new(
            "space_lipschitz_sandwich",
            "one-cell shift sandwich against the measured Lipschitz constants",
            worst_shift,
            10.0 * h,
        ));
        let rep = analysis::time_barrier_check(p, &params, &out.snapshots)?;
        checks.push(CheckResult::new(
            "time_lipschitz_initial",
            "|u(t) - g|/t against the source bound plus initial curvature",
            rep.worst_rate_excess,
            10.0 * (h + dt),
        ));
        checks.push(CheckResult::new(
            "time_shift_consistency",
            "sup |u(t+s) - u(t)| against the first snapshot gap",
            rep.worst_shift_excess,
            10.0 * (h + dt),
        ));
    }

    // ordered initial data stay ordered (constant offset pair)
    let offset = 0.5;
    let mut u1 = p.initial.clone();
    let mut u2: Vec<f64> = u1.iter().map(|v| v + offset).collect();
    let mut b1 = vec![0.0; u1.len()];
    let mut b2 = vec![0.0; u2.len()];
    let step_dt = periodic::cfl_dt_with(p, &params, num.cfl_safety);
    let comparison_steps = ((num.t_max / step_dt) as u64).min(200_000);
    let mut worst_gap: f64 = 0.0;
    for _ in 0..comparison_steps {
        periodic::step_values(p, &params, &u1, step_dt, &mut b1)?;
        periodic::step_values(p, &params, &u2, step_dt, &mut b2)?;
        std::mem::swap(&mut u1, &mut b1);
        std::mem::swap(&mut u2, &mut b2);
        for (a, b) in u1.iter().zip(u2.iter()) {
            worst_gap = worst_gap.max(a - b);
        }
    }
    checks.push(CheckResult::new(
        "discrete_comparison",
        "ordered initial data stay ordered (constant offset pair)",
        worst_gap,
        0.0,
    ));

    Ok(checks)
}

/// The property suite for a radial problem.
fn verify_radial(p: &RadialProblem, num: &Numerics) -> Result<Vec<CheckResult>> {
    let aubry = p.aubry_set(p.aubry_tol);
    let out = radial::evolve_radial(p, &radial_evolve_options(num, aubry.indices()))?;
    let h = p.grid.h;
    let dt = out.stats.dt_nominal;
    let mut checks = Vec::new();

    if !aubry.is_empty() {
        checks.push(CheckResult::new(
            "aubry_monotonicity",
            "per-step increase rate on the zero set of the source",
            out.stats.max_tracked_increase_rate,
            10.0 * h,
        ));
    }
    checks.push(CheckResult::new(
        "cutoff_sign",
        "U(t+dt) - U(t) <= dt F at every node and step",
        out.stats.max_source_excess,
        1e-12,
    ));
    // near the inner truncation radius the coordinate factor (n-1)/r
    // inflates the discrete rate by O(h / r_min)
    let max_speed = 1.0 + (p.dim as f64 - 1.0) / p.grid.r_min;
    checks.push(CheckResult::new(
        "time_lipschitz",
        "max |dU|/dt against the source bound",
        out.stats.max_time_slope,
        p.source_max() + 10.0 * (h + dt) + h * max_speed,
    ));
    let lip = analysis::lipschitz_radial(p, &out.snapshots, &out.stats, &num.alphas)?;
    for e in &lip.space {
        checks.push(CheckResult::new(
            &format!("space_lipschitz_alpha_{}", e.alpha),
            "forward slopes right of alpha against the coercivity bound",
            e.measured,
            e.bound + 10.0 * h,
        ));
    }

    let span = p.grid.r_max() - p.grid.r_min;
    let region = (p.grid.r_min + 0.1 * span, p.grid.r_max() - 0.1 * span);
    match (p.ergodic)
        .then(|| analysis::convergence_study_radial(&out.snapshots, region, num.window, num.conv_tol))
        .transpose()
    {
        Ok(None) => {}
        Ok(Some(report)) => {
            checks.push(CheckResult::flag(
                "ergodic_convergence",
                "windowed oscillation on the compact region below tolerance",
                report.converged,
                *report.sup_osc.last().unwrap(),
                report.conv_tol,
            ));
            let limit = crate::model::RadialField::new(
                p.grid.clone(),
                out.snapshots.last().unwrap().time,
                report.limit_values.clone(),
            );
            let residual = radial::ergodic_residual_radial(&limit, p);
            let interface = p.dim as f64 - 1.0;
            let off = residual
                .values
                .iter()
                .enumerate()
                .filter(|(j, _)| {
                    let r = p.grid.r(*j);
                    r >= region.0
                        && r <= region.1
                        && p.source_at_nodes[*j] > p.aubry_tol
                        && (r - interface).abs() > 2.0 * h
                })
                .map(|(_, v)| v.abs())
                .fold(0.0f64, f64::max);
            checks.push(CheckResult::new(
                "stationary_residual",
                "stationary residual of the limit away from the zero set",
                off,
                10.0 * h,
            ));

            // cross-engine: PDE limit against the control-side profile
            if !aubry.is_empty() {
                let dp_dt = default_dp_dt(p);
                let table = control::value_dp(
                    p,
                    &DpOptions {
                        t_max: num.t_max.min(20.0),
                        dt: dp_dt,
                        velocity_samples: num.velocity_samples,
                        snapshot_every: None,
                    },
                )?;
                let limit_tol = num.limit_tol.unwrap_or(10.0 * (h + dp_dt));
                match control::limit_profile(p, &table, limit_tol) {
                    Ok(lp) => {
                        let mut worst: f64 = 0.0;
                        for j in 0..p.grid.len {
                            let r = p.grid.r(j);
                            if r >= region.0 && r <= region.1 && !control::is_infinite_cost(lp.v[j])
                            {
                                worst = worst.max((limit.values[j] - lp.v[j]).abs());
                            }
                        }
                        checks.push(CheckResult::new(
                            "limit_profile_crosscheck",
                            "PDE large-time limit against the travel-cost profile",
                            worst,
                            3.0 * (h + dt),
                        ));
                    }
                    Err(Error::NotStabilized { osc, tol }) => {
                        checks.push(CheckResult::new(
                            "limit_profile_crosscheck",
                            "value table failed to stabilize on the zero set",
                            osc,
                            tol,
                        ));
                    }
                    Err(e) => return Err(e),
                }
            }

            let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
            let slices: Vec<&[f64]> = out.snapshots.iter().map(|s| s.values.as_slice()).collect();
            if !aubry.is_empty() {
                let region_idx: Vec<usize> = (0..p.grid.len)
                    .filter(|&j| p.grid.r(j) >= region.0 && p.grid.r(j) <= region.1)
                    .collect();
                let rep = analysis::uniqueness_set_check(
                    &times,
                    &slices,
                    &aubry.indices(),
                    &region_idx,
                    num.window,
                    num.kappa_amp,
                    num.conv_tol,
                )?;
                checks.push(CheckResult::flag(
                    "uniqueness_gap",
                    "regional oscillation controlled by the zero-set oscillation",
                    rep.passed,
                    rep.gap_global,
                    rep.bound,
                ));
            }
        }
        Err(Error::InsufficientHorizon { .. }) => {}
        Err(e) => return Err(e),
    }

    // ordered initial data stay ordered (bump pair, exact by monotonicity)
    let bump: Vec<f64> = p
        .grid
        .nodes()
        .map(|r| 0.4 * (1.0f64).min((r - 0.5 * (p.grid.r_min + p.grid.r_max())).powi(2)))
        .collect();
    let mut u1 = p.initial_at_nodes.clone();
    let mut u2: Vec<f64> = u1.iter().zip(bump.iter()).map(|(v, b)| v + b).collect();
    let mut b1 = vec![0.0; u1.len()];
    let mut b2 = vec![0.0; u2.len()];
    let step_dt = radial::cfl_dt_with(p, num.cfl_safety);
    let comparison_steps = ((num.t_max / step_dt) as u64).min(200_000);
    let mut worst_gap: f64 = 0.0;
    for _ in 0..comparison_steps {
        radial::step_values(p, &u1, step_dt, &mut b1)?;
        radial::step_values(p, &u2, step_dt, &mut b2)?;
        std::mem::swap(&mut u1, &mut b1);
        std::mem::swap(&mut u2, &mut b2);
        for (a, b) in u1.iter().zip(u2.iter()) {
            worst_gap = worst_gap.max(a - b);
        }
    }
    checks.push(CheckResult::new(
        "discrete_comparison",
        "ordered initial data stay ordered (bump pair)",
        worst_gap,
        0.0,
    ));

    Ok(checks)
}
