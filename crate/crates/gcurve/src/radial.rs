//! Monotone upwind solver for the radial first-order problem
//!
//! ```text
//! U_t + ( -(n-1) U_r / r + |U_r| )_+ = F(r)   on (r_min, r_max),
//! ```
//!
//! with Hamiltonian H(r,p) = (-(n-1)p/r + |p|)_+ - F(r). In p the cutoff
//! Hamiltonian is the maximum of the three linear branches 0, b+(r) p and
//! b-(r) p with b+ = 1 - (n-1)/r and b- = -1 - (n-1)/r, so the Godunov flux
//! upwinds each branch by its wave speed and takes the maximum.

use crate::error::{Error, Result};
use crate::model::{BoundaryMode, RadialField, RadialProblem};

/// Default CFL safety factor for the first-order scheme.
pub const CFL_SAFETY_DEFAULT: f64 = 0.9;
pub const DIVERGENCE_FACTOR_DEFAULT: f64 = 1e6;

/// H(r, p) = (-(n-1) p / r + |p|)_+ - F(r).
pub fn hamiltonian(problem: &RadialProblem, r: f64, p: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("hamiltonian needs r > 0, got {r}")));
    }
    let k = problem.dim as f64 - 1.0;
    Ok((-k * p / r + p.abs()).max(0.0) - problem.source.eval(r))
}

/// The cutoff part of the Godunov flux (no source term):
/// max(0, b+ p_up, b- p_plus) with the b+ branch upwinded by its sign.
#[inline]
fn flux_positive_part(k_over_r: f64, p_minus: f64, p_plus: f64) -> f64 {
    let b_plus = 1.0 - k_over_r;
    let b_minus = -1.0 - k_over_r;
    let upwind = if b_plus > 0.0 { p_minus } else { p_plus };
    (b_plus * upwind).max(b_minus * p_plus).max(0.0)
}

/// Godunov numerical Hamiltonian from one-sided difference quotients.
/// Consistent: p_minus = p_plus = p reproduces `hamiltonian(r, p)`.
pub fn numerical_hamiltonian(
    problem: &RadialProblem,
    r: f64,
    p_minus: f64,
    p_plus: f64,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "numerical hamiltonian needs r > 0, got {r}"
        )));
    }
    let k = problem.dim as f64 - 1.0;
    Ok(flux_positive_part(k / r, p_minus, p_plus) - problem.source.eval(r))
}

/// Raw stability bound: dt <= h / max_r (1 + (n-1)/r); the maximum sits at
/// r_min. Only one linear branch of the flux is active at a node, so the
/// per-branch bound suffices.
pub fn stability_dt(problem: &RadialProblem) -> f64 {
    let k = problem.dim as f64 - 1.0;
    problem.grid.h / (1.0 + k / problem.grid.r_min)
}

pub fn cfl_dt(problem: &RadialProblem) -> f64 {
    cfl_dt_with(problem, CFL_SAFETY_DEFAULT)
}

pub fn cfl_dt_with(problem: &RadialProblem, safety: f64) -> f64 {
    safety * stability_dt(problem)
}

/// Per-step extrema, mirroring the periodic module (no advection here, so
/// the source excess and the operator excess coincide).
#[derive(Debug, Clone, Copy, Default)]
pub struct OperatorExtrema {
    pub max_neg_flux: f64,
    pub max_abs_rate: f64,
}

#[derive(Debug, Clone)]
pub struct RadialState {
    pub field: RadialField,
    pub step_count: u64,
    pub dt_last: f64,
}

impl RadialState {
    pub fn initial(problem: &RadialProblem) -> Self {
        RadialState {
            field: problem.initial_field(),
            step_count: 0,
            dt_last: 0.0,
        }
    }
}

/// One-sided difference quotients at node j, with the boundary closures:
/// one-sided at r_min (outgoing characteristics), ghost node at r_max. In
/// `ClampedSlope` mode the ghost slope is pinned to c_F (the far-field
/// growth rate), which keeps the inward-looking flux branch inactive and
/// the boundary update monotone; `ExtrapolateFree` reuses the one-sided
/// slope and is not comparison-safe when leftward waves hit the boundary.
#[inline]
fn one_sided(problem: &RadialProblem, u: &[f64], j: usize) -> (f64, f64) {
    let inv_h = 1.0 / problem.grid.h;
    let last = problem.grid.len - 1;
    let p_minus = if j == 0 {
        (u[1] - u[0]) * inv_h
    } else {
        (u[j] - u[j - 1]) * inv_h
    };
    let p_plus = if j == last {
        match problem.boundary {
            BoundaryMode::ClampedSlope => problem.c_f,
            BoundaryMode::ExtrapolateFree => p_minus,
        }
    } else {
        (u[j + 1] - u[j]) * inv_h
    };
    (p_minus, p_plus)
}

fn step_into(problem: &RadialProblem, u: &[f64], dt: f64, out: &mut [f64]) -> OperatorExtrema {
    let k = problem.dim as f64 - 1.0;
    let mut ext = OperatorExtrema {
        max_neg_flux: f64::NEG_INFINITY,
        max_abs_rate: f64::NEG_INFINITY,
    };
    for j in 0..problem.grid.len {
        let r = problem.grid.r(j);
        let (p_minus, p_plus) = one_sided(problem, u, j);
        let flux = flux_positive_part(k / r, p_minus, p_plus);
        let rate = flux - problem.source_at_nodes[j];
        out[j] = u[j] - dt * rate;
        ext.max_neg_flux = ext.max_neg_flux.max(-flux);
        ext.max_abs_rate = ext.max_abs_rate.max(rate.abs());
    }
    ext
}

/// One explicit step `values -> out`; exposed for lockstep comparisons.
pub fn step_values(
    problem: &RadialProblem,
    values: &[f64],
    dt: f64,
    out: &mut [f64],
) -> Result<OperatorExtrema> {
    let bound = stability_dt(problem);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    Ok(step_into(problem, values, dt, out))
}

pub fn step_radial(state: &RadialState, problem: &RadialProblem, dt: f64) -> Result<RadialState> {
    let mut out = vec![0.0; state.field.values.len()];
    step_values(problem, &state.field.values, dt, &mut out)?;
    Ok(RadialState {
        field: RadialField::new(state.field.grid.clone(), state.field.time + dt, out),
        step_count: state.step_count + 1,
        dt_last: dt,
    })
}

/// Pointwise stationary residual ( -(n-1)V_r/r + |V_r| )_+ - F through the
/// same flux as `step_radial`.
pub fn ergodic_residual_radial(candidate: &RadialField, problem: &RadialProblem) -> RadialField {
    let k = problem.dim as f64 - 1.0;
    let values: Vec<f64> = (0..problem.grid.len)
        .map(|j| {
            let r = problem.grid.r(j);
            let (p_minus, p_plus) = one_sided(problem, &candidate.values, j);
            flux_positive_part(k / r, p_minus, p_plus) - problem.source_at_nodes[j]
        })
        .collect();
    RadialField::new(candidate.grid.clone(), candidate.time, values)
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub snapshot_every: f64,
    pub cfl_safety: f64,
    pub dt_override: Option<f64>,
    pub divergence_factor: f64,
    pub track_nodes: Vec<usize>,
}

impl EvolveOptions {
    pub fn new(t_max: f64, snapshot_every: f64) -> Self {
        EvolveOptions {
            t_max,
            snapshot_every,
            cfl_safety: CFL_SAFETY_DEFAULT,
            dt_override: None,
            divergence_factor: DIVERGENCE_FACTOR_DEFAULT,
            track_nodes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveStats {
    pub steps: u64,
    pub dt_nominal: f64,
    pub max_tracked_increase_rate: f64,
    /// max over steps and nodes of U' - U - dt F  (== -dt * flux, <= 0).
    pub max_source_excess: f64,
    /// max over steps and nodes of |U' - U| / dt.
    pub max_time_slope: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub snapshots: Vec<RadialField>,
    pub stats: EvolveStats,
}

pub fn evolve_radial(problem: &RadialProblem, opts: &EvolveOptions) -> Result<EvolveOutput> {
    if !(opts.t_max > 0.0) {
        return Err(Error::validation("numerics.t_max", "must be positive"));
    }
    let bound = stability_dt(problem);
    let dt_nominal = match opts.dt_override {
        Some(dt) => {
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, bound });
            }
            dt
        }
        None => cfl_dt_with(problem, opts.cfl_safety),
    };

    let max_g = problem
        .initial_at_nodes
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = opts.divergence_factor * (1.0 + max_g + opts.t_max * problem.source_max());

    let mut u = problem.initial_at_nodes.clone();
    let mut buf = vec![0.0; u.len()];
    let mut t = 0.0;
    let mut stats = EvolveStats {
        dt_nominal,
        max_tracked_increase_rate: f64::NEG_INFINITY,
        max_source_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut snapshots = vec![RadialField::new(problem.grid.clone(), 0.0, u.clone())];

    let mut k: u64 = 1;
    while t < opts.t_max - 1e-12 {
        let t_target = (k as f64 * opts.snapshot_every).min(opts.t_max);
        while t < t_target - 1e-12 {
            let dt = dt_nominal.min(t_target - t);
            let ext = step_into(problem, &u, dt, &mut buf);
            stats.steps += 1;
            stats.max_source_excess = stats.max_source_excess.max(dt * ext.max_neg_flux);
            stats.max_time_slope = stats.max_time_slope.max(ext.max_abs_rate);
            for &node in &opts.track_nodes {
                stats.max_tracked_increase_rate = stats
                    .max_tracked_increase_rate
                    .max((buf[node] - u[node]) / dt);
            }
            std::mem::swap(&mut u, &mut buf);
            t += dt;
        }
        t = t_target;
        let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max_abs.is_finite() || max_abs > threshold {
            return Err(Error::Diverged {
                time: t,
                max_abs,
                threshold,
            });
        }
        snapshots.push(RadialField::new(problem.grid.clone(), t, u.clone()));
        k += 1;
    }
    if opts.track_nodes.is_empty() {
        stats.max_tracked_increase_rate = 0.0;
    }
    Ok(EvolveOutput { snapshots, stats })
}
