//! Explicit monotone finite-difference stepper for the cutoff curvature
//! equation on the flat torus:
//!
//! ```text
//! u_t + ( -a^ij(Du) (D^2 u)_ij + |Du| )_+  +  W . Du  =  f,
//! a^ij(Du) = delta_ij - u_i u_j / (|Du|^2 + eps^2).
//! ```
//!
//! The curvature part uses central differences, the |Du| inside the cutoff
//! uses the Godunov upwind norm, and the advection term is upwinded
//! componentwise by the sign of W. The cutoff is applied after assembling
//! the whole bracket at a node.

use crate::error::{Error, Result};
use crate::model::{Field, PeriodicProblem, TorusGrid};
use rayon::prelude::*;

/// Default CFL safety factor for the explicit scheme.
pub const CFL_SAFETY_DEFAULT: f64 = 0.5;
/// Default divergence guard factor.
pub const DIVERGENCE_FACTOR_DEFAULT: f64 = 1e6;
/// Node count above which steps run data-parallel (deterministic either way).
const PARALLEL_THRESHOLD: usize = 16384;
const CHUNK_ROWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureScheme {
    #[default]
    CentralRegularized,
}

/// Parameters of the regularized curvature operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParams {
    /// Gradient-norm regularization in the projection denominator.
    pub eps_reg: f64,
    /// Central gradient norm below which the curvature part is dropped
    /// entirely. Zero keeps the regularized curvature active everywhere,
    /// which lets smooth extrema reach a discrete steady state.
    pub zero_cut: f64,
    pub scheme: CurvatureScheme,
}

impl CurvatureParams {
    pub fn new(eps_reg: f64) -> Self {
        assert!(eps_reg > 0.0, "eps_reg must be positive");
        CurvatureParams {
            eps_reg,
            zero_cut: 0.0,
            scheme: CurvatureScheme::CentralRegularized,
        }
    }

    pub fn with_zero_cut(eps_reg: f64, zero_cut: f64) -> Self {
        CurvatureParams {
            zero_cut,
            ..CurvatureParams::new(eps_reg)
        }
    }

    /// Default regularization for a problem: eps_reg = h.
    pub fn for_problem(problem: &PeriodicProblem) -> Self {
        CurvatureParams::new(problem.grid.h)
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicState {
    pub field: Field,
    pub step_count: u64,
    pub dt_last: f64,
}

impl PeriodicState {
    pub fn initial(problem: &PeriodicProblem) -> Self {
        PeriodicState {
            field: problem.initial_field(),
            step_count: 0,
            dt_last: 0.0,
        }
    }
}

/// Componentwise central difference gradient at a node.
pub fn grad_central(field: &Field, node: usize) -> Vec<f64> {
    let grid = &field.grid;
    let inv_2h = 0.5 / grid.h;
    (0..grid.dim)
        .map(|axis| {
            let up = field.values[grid.shift(node, axis, 1)];
            let dn = field.values[grid.shift(node, axis, -1)];
            (up - dn) * inv_2h
        })
        .collect()
}

/// The cutoff bracket ( -a^ij(Du) (D^2 u)_ij + |Du|_godunov )_+ at a node.
pub fn curvature_cutoff(field: &Field, node: usize, params: &CurvatureParams) -> f64 {
    let grid = &field.grid;
    let u = &field.values;
    let h = grid.h;
    let inv_h = 1.0 / h;
    let inv_2h = 0.5 / h;
    let inv_h2 = 1.0 / (h * h);
    let inv_4h2 = 0.25 * inv_h2;
    let eps2 = params.eps_reg * params.eps_reg;
    let zc2 = params.zero_cut * params.zero_cut;
    let dim = grid.dim;
    let u0 = u[node];

    let mut up = [0.0f64; 3];
    let mut dn = [0.0f64; 3];
    let mut qc = [0.0f64; 3];
    let mut godunov2 = 0.0;
    for axis in 0..dim {
        up[axis] = u[grid.shift(node, axis, 1)];
        dn[axis] = u[grid.shift(node, axis, -1)];
        qc[axis] = (up[axis] - dn[axis]) * inv_2h;
        let dminus = (u0 - dn[axis]) * inv_h;
        let dplus = (up[axis] - u0) * inv_h;
        let g = dminus.max(-dplus).max(0.0);
        godunov2 += g * g;
    }
    let grad_norm = godunov2.sqrt();

    let g2: f64 = qc[..dim].iter().map(|q| q * q).sum();
    let curv = if g2 <= zc2 {
        0.0
    } else {
        let mut trace = 0.0;
        let mut quad = 0.0;
        for axis in 0..dim {
            let dii = (up[axis] - 2.0 * u0 + dn[axis]) * inv_h2;
            trace += dii;
            quad += qc[axis] * qc[axis] * dii;
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let pp = u[grid.shift(grid.shift(node, i, 1), j, 1)];
                let mm = u[grid.shift(grid.shift(node, i, -1), j, -1)];
                let pm = u[grid.shift(grid.shift(node, i, 1), j, -1)];
                let mp = u[grid.shift(grid.shift(node, i, -1), j, 1)];
                let dij = (pp + mm - pm - mp) * inv_4h2;
                quad += 2.0 * qc[i] * qc[j] * dij;
            }
        }
        trace - quad / (g2 + eps2)
    };

    (grad_norm - curv).max(0.0)
}

/// Raw stability bound on the time step (safety factor one).
///
/// The regularized coefficients a^ij are bounded by one independently of
/// eps_reg, so the parabolic part needs dt <= h^2 / (2n + n(n-1)/2); the
/// first-order parts (unit-speed eikonal per axis plus advection) need
/// dt <= h / (n (2 + max|W|)). Taking each with safety 1/2 keeps the total
/// row sum below one.
pub fn stability_dt(problem: &PeriodicProblem, _params: &CurvatureParams) -> f64 {
    let n = problem.grid.dim as f64;
    let h = problem.grid.h;
    let c2 = 2.0 * n + n * (n - 1.0) / 2.0;
    let c1 = n * (2.0 + problem.wind_max_abs());
    (h * h / c2).min(h / c1)
}

/// Recommended time step: the stability bound times the default safety 0.5.
pub fn cfl_dt(problem: &PeriodicProblem, params: &CurvatureParams) -> f64 {
    cfl_dt_with(problem, params, CFL_SAFETY_DEFAULT)
}

pub fn cfl_dt_with(problem: &PeriodicProblem, params: &CurvatureParams, safety: f64) -> f64 {
    safety * stability_dt(problem, params)
}

/// Per-step extrema of the discrete operator, for the property checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct OperatorExtrema {
    /// max over nodes of (-bracket); nonpositive when the cutoff is applied.
    pub max_neg_bracket: f64,
    /// max over nodes of (-bracket - W.Du); dt times this is u'-u-dt*f.
    pub max_neg_bracket_minus_adv: f64,
    /// max over nodes of |bracket + W.Du - f| = max |u'-u| / dt.
    pub max_abs_rate: f64,
}

impl OperatorExtrema {
    const SEED: OperatorExtrema = OperatorExtrema {
        max_neg_bracket: f64::NEG_INFINITY,
        max_neg_bracket_minus_adv: f64::NEG_INFINITY,
        max_abs_rate: f64::NEG_INFINITY,
    };

    fn join(self, other: OperatorExtrema) -> OperatorExtrema {
        OperatorExtrema {
            max_neg_bracket: self.max_neg_bracket.max(other.max_neg_bracket),
            max_neg_bracket_minus_adv: self
                .max_neg_bracket_minus_adv
                .max(other.max_neg_bracket_minus_adv),
            max_abs_rate: self.max_abs_rate.max(other.max_abs_rate),
        }
    }
}

struct Kernel<'a> {
    grid: &'a TorusGrid,
    source: &'a [f64],
    wind: &'a [Vec<f64>],
    eps2: f64,
    zc2: f64,
}

impl<'a> Kernel<'a> {
    fn new(problem: &'a PeriodicProblem, params: &CurvatureParams) -> Self {
        Kernel {
            grid: &problem.grid,
            source: &problem.source,
            wind: &problem.wind,
            eps2: params.eps_reg * params.eps_reg,
            zc2: params.zero_cut * params.zero_cut,
        }
    }

    /// Operator value B = bracket + W.Du - f at every node (generic dim).
    fn operator_node(&self, u: &[f64], node: usize) -> (f64, f64, f64) {
        let grid = self.grid;
        let h = grid.h;
        let inv_h = 1.0 / h;
        let inv_2h = 0.5 / h;
        let inv_h2 = 1.0 / (h * h);
        let inv_4h2 = 0.25 * inv_h2;
        let dim = grid.dim;
        let u0 = u[node];

        let mut up = [0.0f64; 3];
        let mut dn = [0.0f64; 3];
        let mut qc = [0.0f64; 3];
        let mut dm = [0.0f64; 3];
        let mut dp = [0.0f64; 3];
        let mut godunov2 = 0.0;
        for axis in 0..dim {
            up[axis] = u[grid.shift(node, axis, 1)];
            dn[axis] = u[grid.shift(node, axis, -1)];
            qc[axis] = (up[axis] - dn[axis]) * inv_2h;
            dm[axis] = (u0 - dn[axis]) * inv_h;
            dp[axis] = (up[axis] - u0) * inv_h;
            let g = dm[axis].max(-dp[axis]).max(0.0);
            godunov2 += g * g;
        }
        let g2: f64 = qc[..dim].iter().map(|q| q * q).sum();
        let curv = if g2 <= self.zc2 {
            0.0
        } else {
            let mut trace = 0.0;
            let mut quad = 0.0;
            for axis in 0..dim {
                let dii = (up[axis] - 2.0 * u0 + dn[axis]) * inv_h2;
                trace += dii;
                quad += qc[axis] * qc[axis] * dii;
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let pp = u[grid.shift(grid.shift(node, i, 1), j, 1)];
                    let mm = u[grid.shift(grid.shift(node, i, -1), j, -1)];
                    let pm = u[grid.shift(grid.shift(node, i, 1), j, -1)];
                    let mp = u[grid.shift(grid.shift(node, i, -1), j, 1)];
                    let dij = (pp + mm - pm - mp) * inv_4h2;
                    quad += 2.0 * qc[i] * qc[j] * dij;
                }
            }
            trace - quad / (g2 + self.eps2)
        };
        let bracket = (godunov2.sqrt() - curv).max(0.0);
        let mut adv = 0.0;
        for axis in 0..dim {
            let w = self.wind[axis][node];
            adv += w * if w > 0.0 { dm[axis] } else { dp[axis] };
        }
        (bracket, adv, bracket + adv - self.source[node])
    }

    /// One forward-Euler step for rows [row0, row0+rows) of a 2D grid,
    /// writing into `out` (the slice for exactly those rows).
    #[allow(clippy::too_many_arguments)]
    fn step_rows_2d(&self, u: &[f64], dt: f64, row0: usize, rows: usize, out: &mut [f64]) -> OperatorExtrema {
        let n = self.grid.n;
        let h = self.grid.h;
        let inv_h = 1.0 / h;
        let inv_2h = 0.5 / h;
        let inv_h2 = 1.0 / (h * h);
        let inv_4h2 = 0.25 * inv_h2;
        let eps2 = self.eps2;
        let zc2 = self.zc2;
        let w1 = &self.wind[0];
        let w2 = &self.wind[1];
        let f = self.source;
        let mut ext = OperatorExtrema::SEED;

        for ix in row0..row0 + rows {
            let row = ix * n;
            let rowp = if ix + 1 == n { 0 } else { (ix + 1) * n };
            let rowm = if ix == 0 { (n - 1) * n } else { (ix - 1) * n };
            let out_row = (ix - row0) * n;
            for iy in 0..n {
                let iyp = if iy + 1 == n { 0 } else { iy + 1 };
                let iym = if iy == 0 { n - 1 } else { iy - 1 };
                let idx = row + iy;
                let u0 = u[idx];
                let uxp = u[rowp + iy];
                let uxm = u[rowm + iy];
                let uyp = u[row + iyp];
                let uym = u[row + iym];

                let dxc = (uxp - uxm) * inv_2h;
                let dyc = (uyp - uym) * inv_2h;
                let g2 = dxc * dxc + dyc * dyc;
                let curv = if g2 <= zc2 {
                    0.0
                } else {
                    let dxx = (uxp - 2.0 * u0 + uxm) * inv_h2;
                    let dyy = (uyp - 2.0 * u0 + uym) * inv_h2;
                    let dxy =
                        (u[rowp + iyp] + u[rowm + iym] - u[rowp + iym] - u[rowm + iyp]) * inv_4h2;
                    (dxx + dyy)
                        - (dxc * dxc * dxx + 2.0 * dxc * dyc * dxy + dyc * dyc * dyy) / (g2 + eps2)
                };

                let dxm = (u0 - uxm) * inv_h;
                let dxp = (uxp - u0) * inv_h;
                let dym = (u0 - uym) * inv_h;
                let dyp = (uyp - u0) * inv_h;
                let gx = dxm.max(-dxp).max(0.0);
                let gy = dym.max(-dyp).max(0.0);
                let bracket = ((gx * gx + gy * gy).sqrt() - curv).max(0.0);

                let wv1 = w1[idx];
                let wv2 = w2[idx];
                let adv = wv1 * if wv1 > 0.0 { dxm } else { dxp }
                    + wv2 * if wv2 > 0.0 { dym } else { dyp };

                let rate = bracket + adv - f[idx];
                out[out_row + iy] = u0 - dt * rate;

                ext.max_neg_bracket = ext.max_neg_bracket.max(-bracket);
                ext.max_neg_bracket_minus_adv = ext.max_neg_bracket_minus_adv.max(-bracket - adv);
                ext.max_abs_rate = ext.max_abs_rate.max(rate.abs());
            }
        }
        ext
    }

    fn step_into(&self, u: &[f64], dt: f64, out: &mut [f64]) -> OperatorExtrema {
        if self.grid.dim == 2 {
            let n = self.grid.n;
            let chunk = CHUNK_ROWS * n;
            if u.len() >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
                out.par_chunks_mut(chunk)
                    .enumerate()
                    .map(|(c, slice)| {
                        let row0 = c * CHUNK_ROWS;
                        let rows = slice.len() / n;
                        self.step_rows_2d(u, dt, row0, rows, slice)
                    })
                    .reduce(|| OperatorExtrema::SEED, OperatorExtrema::join)
            } else {
                let mut ext = OperatorExtrema::SEED;
                for (c, slice) in out.chunks_mut(chunk).enumerate() {
                    let row0 = c * CHUNK_ROWS;
                    let rows = slice.len() / n;
                    ext = ext.join(self.step_rows_2d(u, dt, row0, rows, slice));
                }
                ext
            }
        } else {
            let mut ext = OperatorExtrema::SEED;
            for idx in 0..u.len() {
                let (bracket, adv, rate) = self.operator_node(u, idx);
                out[idx] = u[idx] - dt * rate;
                ext.max_neg_bracket = ext.max_neg_bracket.max(-bracket);
                ext.max_neg_bracket_minus_adv = ext.max_neg_bracket_minus_adv.max(-bracket - adv);
                ext.max_abs_rate = ext.max_abs_rate.max(rate.abs());
            }
            ext
        }
    }
}

/// One explicit step `values -> out` with the demanded dt; returns operator
/// extrema for the step. Exposed for lockstep comparison drivers.
pub fn step_values(
    problem: &PeriodicProblem,
    params: &CurvatureParams,
    values: &[f64],
    dt: f64,
    out: &mut [f64],
) -> Result<OperatorExtrema> {
    let bound = stability_dt(problem, params);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    Ok(Kernel::new(problem, params).step_into(values, dt, out))
}

/// One forward-Euler step of the full scheme.
pub fn step(
    state: &PeriodicState,
    problem: &PeriodicProblem,
    params: &CurvatureParams,
    dt: f64,
) -> Result<PeriodicState> {
    let mut out = vec![0.0; state.field.values.len()];
    step_values(problem, params, &state.field.values, dt, &mut out)?;
    Ok(PeriodicState {
        field: Field::new(state.field.grid.clone(), state.field.time + dt, out),
        step_count: state.step_count + 1,
        dt_last: dt,
    })
}

/// Pointwise residual of the stationary equation at a candidate field,
/// using exactly the discretization of `step`.
pub fn ergodic_residual(
    candidate: &Field,
    problem: &PeriodicProblem,
    params: &CurvatureParams,
) -> Field {
    let kernel = Kernel::new(problem, params);
    let values: Vec<f64> = (0..candidate.values.len())
        .map(|idx| kernel.operator_node(&candidate.values, idx).2)
        .collect();
    Field::new(candidate.grid.clone(), candidate.time, values)
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub snapshot_every: f64,
    pub cfl_safety: f64,
    pub dt_override: Option<f64>,
    pub divergence_factor: f64,
    /// Node indices whose per-step increase is tracked (Aubry nodes).
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

/// Aggregate per-step statistics of an evolution run.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveStats {
    pub steps: u64,
    pub dt_nominal: f64,
    /// max over steps and tracked nodes of (u' - u)/dt.
    pub max_tracked_increase_rate: f64,
    /// max over steps and nodes of u' - u - dt f  (absolute units).
    pub max_source_excess: f64,
    /// max over steps and nodes of u' - u - dt (f - W.Du)  (absolute units).
    pub max_operator_excess: f64,
    /// max over steps and nodes of |u' - u|/dt.
    pub max_time_slope: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub snapshots: Vec<Field>,
    pub stats: EvolveStats,
}

/// Run the explicit scheme from the problem's initial datum to t_max,
/// collecting snapshots on the uniform cadence (t = 0 included, steps
/// truncated to land exactly on snapshot times).
pub fn evolve(
    problem: &PeriodicProblem,
    params: &CurvatureParams,
    opts: &EvolveOptions,
) -> Result<EvolveOutput> {
    if !(opts.t_max > 0.0) {
        return Err(Error::validation("numerics.t_max", "must be positive"));
    }
    let bound = stability_dt(problem, params);
    let dt_nominal = match opts.dt_override {
        Some(dt) => {
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, bound });
            }
            dt
        }
        None => cfl_dt_with(problem, params, opts.cfl_safety),
    };

    let kernel = Kernel::new(problem, params);
    let max_g = problem.initial.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = opts.divergence_factor * (1.0 + max_g + opts.t_max * problem.source_max());

    let mut u = problem.initial.clone();
    let mut buf = vec![0.0; u.len()];
    let mut t = 0.0;
    let mut stats = EvolveStats {
        dt_nominal,
        max_tracked_increase_rate: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut snapshots = vec![Field::new(problem.grid.clone(), 0.0, u.clone())];

    let mut k: u64 = 1;
    while t < opts.t_max - 1e-12 {
        let t_target = (k as f64 * opts.snapshot_every).min(opts.t_max);
        while t < t_target - 1e-12 {
            let dt = dt_nominal.min(t_target - t);
            let ext = kernel.step_into(&u, dt, &mut buf);
            stats.steps += 1;
            stats.max_source_excess = stats
                .max_source_excess
                .max(dt * ext.max_neg_bracket_minus_adv);
            stats.max_operator_excess = stats.max_operator_excess.max(dt * ext.max_neg_bracket);
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
        snapshots.push(Field::new(problem.grid.clone(), t, u.clone()));
        k += 1;
    }
    if opts.track_nodes.is_empty() {
        stats.max_tracked_increase_rate = 0.0;
    }
    Ok(EvolveOutput { snapshots, stats })
}
