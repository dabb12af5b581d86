//! Verification tooling over snapshot series: large-time convergence
//! detection via windowed oscillation, monotonicity on the zero set of the
//! source, barrier sandwiches and Lipschitz measurements for the wind-free
//! problem, and the uniqueness-set gap diagnostic.

use crate::error::{Error, Result};
use crate::model::{Field, PeriodicProblem, RadialField, RadialProblem};
use crate::periodic::{curvature_cutoff, CurvatureParams};
use crate::radial::EvolveStats as RadialEvolveStats;

/// Windowed oscillation study over a time series restricted to a node set.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Start time of each window.
    pub window_starts: Vec<f64>,
    /// Per-window oscillation: max over region nodes of (max_t - min_t).
    pub sup_osc: Vec<f64>,
    pub converged: bool,
    pub conv_tol: f64,
    /// Time-average of the snapshots in the final window, on the full grid.
    pub limit_values: Vec<f64>,
}

fn windowed_oscillation(
    times: &[f64],
    slices: &[&[f64]],
    region: &[usize],
    window: f64,
    conv_tol: f64,
) -> Result<ConvergenceReport> {
    if times.len() != slices.len() || times.is_empty() {
        return Err(Error::Domain("series and times must align".into()));
    }
    let horizon = times[times.len() - 1] - times[0];
    let windows = (horizon / window).floor() as usize;
    if windows < 3 {
        return Err(Error::InsufficientHorizon {
            have: windows,
            need: 3,
        });
    }
    let t0 = times[0];
    let mut window_starts = Vec::with_capacity(windows);
    let mut sup_osc = Vec::with_capacity(windows);
    for w in 0..windows {
        let lo = t0 + w as f64 * window;
        // last window is anchored to the end of the series
        let (lo, hi) = if w + 1 == windows {
            (t0 + horizon - window, t0 + horizon)
        } else {
            (lo, lo + window)
        };
        let in_window: Vec<usize> = (0..times.len())
            .filter(|&i| times[i] >= lo - 1e-12 && times[i] <= hi + 1e-12)
            .collect();
        let mut worst: f64 = 0.0;
        for &node in region {
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for &i in &in_window {
                let v = slices[i][node];
                mn = mn.min(v);
                mx = mx.max(v);
            }
            worst = worst.max(mx - mn);
        }
        window_starts.push(lo);
        sup_osc.push(worst);
    }
    // limit: time-average over the final window (all nodes)
    let lo = t0 + horizon - window;
    let final_idx: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= lo - 1e-12)
        .collect();
    let n_nodes = slices[0].len();
    let mut limit_values = vec![0.0; n_nodes];
    for &i in &final_idx {
        for (acc, v) in limit_values.iter_mut().zip(slices[i].iter()) {
            *acc += v;
        }
    }
    let count = final_idx.len() as f64;
    for v in &mut limit_values {
        *v /= count;
    }
    let converged = *sup_osc.last().unwrap() <= conv_tol;
    Ok(ConvergenceReport {
        window_starts,
        sup_osc,
        converged,
        conv_tol,
        limit_values,
    })
}

/// Convergence study on a periodic snapshot series over the whole torus.
pub fn convergence_study_periodic(
    series: &[Field],
    window: f64,
    conv_tol: f64,
) -> Result<ConvergenceReport> {
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    let slices: Vec<&[f64]> = series.iter().map(|s| s.values.as_slice()).collect();
    let region: Vec<usize> = (0..slices[0].len()).collect();
    windowed_oscillation(&times, &slices, &region, window, conv_tol)
}

/// Convergence study on a radial series restricted to a compact [a, b].
pub fn convergence_study_radial(
    series: &[RadialField],
    region: (f64, f64),
    window: f64,
    conv_tol: f64,
) -> Result<ConvergenceReport> {
    let grid = &series[0].grid;
    let idx: Vec<usize> = (0..grid.len)
        .filter(|&j| grid.r(j) >= region.0 && grid.r(j) <= region.1)
        .collect();
    if idx.is_empty() {
        return Err(Error::Domain(format!(
            "empty test region [{}, {}]",
            region.0, region.1
        )));
    }
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    let slices: Vec<&[f64]> = series.iter().map(|s| s.values.as_slice()).collect();
    windowed_oscillation(&times, &slices, &idx, window, conv_tol)
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    pub ok: bool,
    /// max over snapshot pairs and tracked nodes of (increase - slack*dt).
    pub worst_excess: f64,
    pub slack_rate: f64,
}

/// Snapshot-level non-increase check on the tracked nodes with a slack rate
/// (the per-step variant lives in the solvers' evolve statistics).
pub fn aubry_monotonicity_check(
    times: &[f64],
    slices: &[&[f64]],
    aubry_nodes: &[usize],
    slack_rate: f64,
) -> MonotonicityReport {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        for &node in aubry_nodes {
            let inc = slices[i][node] - slices[i - 1][node];
            worst = worst.max(inc - slack_rate * dt);
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    MonotonicityReport {
        ok: worst <= 0.0,
        worst_excess: worst,
        slack_rate,
    }
}

fn require_wind_free(problem: &PeriodicProblem) -> Result<()> {
    let max_wind = problem.wind_max_abs();
    if max_wind > 0.0 {
        return Err(Error::WindNotZero { max_wind });
    }
    Ok(())
}

/// Space sandwich for the wind-free problem: for a whole-cell shift y,
/// |u(x,t) - u(x-y,t)| <= (C0 t + C1) |y| with C0, C1 the measured discrete
/// Lipschitz constants of f and g. Returns the worst signed excess.
pub fn barrier_sandwich_periodic(
    problem: &PeriodicProblem,
    shift_cells: &[isize],
    series: &[Field],
) -> Result<f64> {
    require_wind_free(problem)?;
    if shift_cells.len() != problem.grid.dim {
        return Err(Error::Domain("shift must have one entry per axis".into()));
    }
    let grid = &problem.grid;
    let y_norm = grid.h
        * (shift_cells
            .iter()
            .map(|s| (*s * *s) as f64)
            .sum::<f64>())
        .sqrt();
    let c0 = problem.lip_source;
    let c1 = problem.lip_initial;
    // precompute the shifted index map
    let shifted: Vec<usize> = (0..grid.node_count())
        .map(|idx| {
            let mut s = idx;
            for (axis, &d) in shift_cells.iter().enumerate() {
                s = grid.shift(s, axis, -d);
            }
            s
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for snap in series {
        let bound = (c0 * snap.time + c1) * y_norm;
        for (idx, &target) in shifted.iter().enumerate() {
            let gap = (snap.values[idx] - snap.values[target]).abs();
            worst = worst.max(gap - bound);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
pub struct TimeBarrierReport {
    /// 1.01 * max over nodes of the cutoff operator applied to g.
    pub c_init: f64,
    /// ||f||_inf + c_init.
    pub rate_bound: f64,
    /// max over snapshots t>0 of ( max_x |u(x,t)-g(x)| / t - rate_bound ).
    pub worst_rate_excess: f64,
    /// worst excess of sup|u(t+s)-u(t)| over sup|u(s)-u(0)|, s = snapshot gap.
    pub worst_shift_excess: f64,
}

/// Returns 1.01 times the max of the discrete cutoff operator on g; the
/// constant entering the time barrier.
pub fn initial_operator_bound(problem: &PeriodicProblem, params: &CurvatureParams) -> f64 {
    let g = problem.initial_field();
    let worst = (0..problem.grid.node_count())
        .map(|idx| curvature_cutoff(&g, idx, params))
        .fold(0.0f64, f64::max);
    1.01 * worst
}

/// Time barriers for the wind-free problem: |u(.,t) - g| <= (||f|| + C) t
/// and the time-shift consistency bound.
pub fn time_barrier_check(
    problem: &PeriodicProblem,
    params: &CurvatureParams,
    series: &[Field],
) -> Result<TimeBarrierReport> {
    require_wind_free(problem)?;
    let c_init = initial_operator_bound(problem, params);
    let rate_bound = problem.source_max() + c_init;
    let g = &series[0].values;
    let mut worst_rate = f64::NEG_INFINITY;
    for snap in series.iter().skip(1) {
        let sup: f64 = snap
            .values
            .iter()
            .zip(g.iter())
            .map(|(u, gv)| (u - gv).abs())
            .fold(0.0, f64::max);
        worst_rate = worst_rate.max(sup / snap.time - rate_bound);
    }
    // shift consistency for s = one snapshot interval
    let sup_diff = |a: &Field, b: &Field| -> f64 {
        a.values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let mut worst_shift = f64::NEG_INFINITY;
    if series.len() >= 2 {
        let first_gap = sup_diff(&series[1], &series[0]);
        for w in series.windows(2).skip(1) {
            worst_shift = worst_shift.max(sup_diff(&w[1], &w[0]) - first_gap);
        }
        if worst_shift == f64::NEG_INFINITY {
            worst_shift = 0.0;
        }
    } else {
        worst_shift = 0.0;
    }
    Ok(TimeBarrierReport {
        c_init,
        rate_bound,
        worst_rate_excess: worst_rate,
        worst_shift_excess: worst_shift,
    })
}

#[derive(Debug, Clone)]
pub struct AlphaEntry {
    pub alpha: f64,
    /// max over snapshots and nodes in (alpha, r_max] of |forward slope|.
    pub measured: f64,
    /// ||F||_inf / (1 - (n-1)/alpha).
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// max over steps and nodes of |dU| / dt, from the evolve statistics.
    pub time_lip: f64,
    /// ||F||_inf.
    pub time_bound: f64,
    pub space: Vec<AlphaEntry>,
}

/// Measured Lipschitz constants of a radial run against the derived bounds.
/// Alphas must stay at least 1.25 (n-1): the space bound degenerates at the
/// interface.
pub fn lipschitz_radial(
    problem: &RadialProblem,
    series: &[RadialField],
    stats: &RadialEvolveStats,
    alphas: &[f64],
) -> Result<LipschitzReport> {
    let interface = problem.dim as f64 - 1.0;
    let f_max = problem.source_max();
    let grid = &problem.grid;
    let mut space = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if alpha < 1.25 * interface {
            return Err(Error::validation(
                "numerics.alphas",
                format!("alpha = {alpha} is below 1.25 (n-1) = {}", 1.25 * interface),
            ));
        }
        let mut measured: f64 = 0.0;
        for snap in series {
            for j in 0..grid.len - 1 {
                if grid.r(j) > alpha {
                    measured =
                        measured.max((snap.values[j + 1] - snap.values[j]).abs() / grid.h);
                }
            }
        }
        space.push(AlphaEntry {
            alpha,
            measured,
            bound: f_max / (1.0 - interface / alpha),
        });
    }
    Ok(LipschitzReport {
        time_lip: stats.max_time_slope,
        time_bound: f_max,
        space,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct UniquenessReport {
    /// Windowed oscillation over the final window, max over Aubry nodes.
    pub gap_aubry: f64,
    /// Same over the whole test region.
    pub gap_global: f64,
    /// kappa_amp * gap_aubry + conv_tol.
    pub bound: f64,
    /// Whether the whole region has settled (gap_global <= conv_tol).
    pub stabilized: bool,
    /// Exceeding the bound before the region settles is expected (the
    /// zero set settles first); it is flagged here, not failed.
    pub flagged_early: bool,
    pub passed: bool,
}

/// The zero set controls the global gap: once the region has settled, the
/// global windowed oscillation must sit within kappa_amp times the
/// zero-set oscillation plus conv_tol. Earlier in the run the zero-set
/// nodes settle first, so a large global gap is only flagged.
pub fn uniqueness_set_check(
    times: &[f64],
    slices: &[&[f64]],
    aubry_nodes: &[usize],
    region: &[usize],
    window: f64,
    kappa_amp: f64,
    conv_tol: f64,
) -> Result<UniquenessReport> {
    if aubry_nodes.is_empty() {
        return Err(Error::Domain("uniqueness check needs Aubry nodes".into()));
    }
    let horizon = times[times.len() - 1] - times[0];
    if horizon < window {
        return Err(Error::InsufficientHorizon { have: 0, need: 1 });
    }
    let lo = times[times.len() - 1] - window;
    let in_window: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= lo - 1e-12)
        .collect();
    let osc = |nodes: &[usize]| -> f64 {
        let mut worst: f64 = 0.0;
        for &node in nodes {
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for &i in &in_window {
                mn = mn.min(slices[i][node]);
                mx = mx.max(slices[i][node]);
            }
            worst = worst.max(mx - mn);
        }
        worst
    };
    let gap_aubry = osc(aubry_nodes);
    let gap_global = osc(region);
    let bound = kappa_amp * gap_aubry + conv_tol;
    let stabilized = gap_global <= conv_tol;
    let flagged_early = !stabilized && gap_global > bound;
    let passed = if stabilized { gap_global <= bound } else { true };
    Ok(UniquenessReport {
        gap_aubry,
        gap_global,
        bound,
        stabilized,
        flagged_early,
        passed,
    })
}
