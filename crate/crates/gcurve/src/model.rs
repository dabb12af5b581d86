//! Problem definitions: grids, sampled coefficient fields, Aubry-set
//! extraction, and validation of the standing assumptions (non-negative
//! source, wind vanishing on the zero set, non-empty Aubry set in ergodic
//! mode).

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Default zero-set tolerance for closed-form sources.
pub const AUBRY_TOL_CLOSED_FORM: f64 = 1e-9;
/// Safety factor applied to measured discrete Lipschitz constants.
pub const LIP_SAFETY: f64 = 1.01;
/// Default tolerance for the tail check |F - c_F| on the last 10% of the domain.
pub const TAIL_TOL_DEFAULT: f64 = 0.1;

/// Uniform grid on the flat torus [0,1)^dim, spacing h = 1/n per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    pub dim: usize,
    pub n: usize,
    pub h: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Self {
        TorusGrid {
            dim,
            n,
            h: 1.0 / n as f64,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Flattened index of a multi-index (row-major, first axis slowest).
    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for &m in multi {
            idx = idx * self.n + m;
        }
        idx
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.dim];
        for a in (0..self.dim).rev() {
            multi[a] = idx % self.n;
            idx /= self.n;
        }
        multi
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .map(|&m| m as f64 * self.h)
            .collect()
    }

    /// Index shifted by `delta` cells along `axis`, wrapping periodically.
    pub fn shift(&self, idx: usize, axis: usize, delta: isize) -> usize {
        let mut multi = self.multi_index(idx);
        let n = self.n as isize;
        let m = (multi[axis] as isize + delta).rem_euclid(n) as usize;
        multi[axis] = m;
        self.index(&multi)
    }
}

/// One time slice of a discrete periodic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: TorusGrid,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: TorusGrid, time: f64, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Field { grid, time, values }
    }

    pub fn constant(grid: TorusGrid, time: f64, c: f64) -> Self {
        let n = grid.node_count();
        Field::new(grid, time, vec![c; n])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Uniform grid on [r_min, r_max], spacing h = (r_max - r_min)/(len - 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r_min: f64,
    pub h: f64,
    pub len: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, len: usize) -> Self {
        RadialGrid {
            r_min,
            h: (r_max - r_min) / (len - 1) as f64,
            len,
        }
    }

    pub fn r(&self, j: usize) -> f64 {
        self.r_min + j as f64 * self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len - 1)
    }

    /// Nearest node index to radius `r` (clamped to the grid).
    pub fn nearest(&self, r: f64) -> usize {
        let j = ((r - self.r_min) / self.h).round();
        (j.max(0.0) as usize).min(self.len - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.r(j))
    }
}

/// One time slice of a discrete radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub time: f64,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, time: f64, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len);
        RadialField { grid, time, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A scalar coefficient field given either in closed form or by samples.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    Expr(String),
    Samples(Vec<f64>),
}

impl FieldSpec {
    pub fn is_sampled(&self) -> bool {
        matches!(self, FieldSpec::Samples(_))
    }

    fn sample_torus(&self, grid: &TorusGrid, what: &str) -> Result<Vec<f64>> {
        match self {
            FieldSpec::Constant(c) => Ok(vec![*c; grid.node_count()]),
            FieldSpec::Expr(src) => {
                let vars: Vec<String> = (1..=grid.dim).map(|i| format!("x{i}")).collect();
                let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                let e = Expr::parse(src, &var_refs)?;
                Ok((0..grid.node_count())
                    .map(|idx| e.eval(&grid.coords(idx)))
                    .collect())
            }
            FieldSpec::Samples(v) => {
                if v.len() != grid.node_count() {
                    return Err(Error::validation(
                        what,
                        format!(
                            "sample array has {} entries, expected {}",
                            v.len(),
                            grid.node_count()
                        ),
                    ));
                }
                Ok(v.clone())
            }
        }
    }
}

/// A profile of r evaluated analytically or by linear interpolation of samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Expr(Expr),
    Sampled { grid: RadialGrid, values: Vec<f64> },
}

impl Profile {
    pub fn from_spec(spec: &FieldSpec, grid: &RadialGrid, what: &str) -> Result<Profile> {
        match spec {
            FieldSpec::Constant(c) => Ok(Profile::Constant(*c)),
            FieldSpec::Expr(src) => Ok(Profile::Expr(Expr::parse(src, &["r"])?)),
            FieldSpec::Samples(v) => {
                if v.len() != grid.len {
                    return Err(Error::validation(
                        what,
                        format!("sample array has {} entries, expected {}", v.len(), grid.len),
                    ));
                }
                Ok(Profile::Sampled {
                    grid: grid.clone(),
                    values: v.clone(),
                })
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Expr(e) => e.eval(&[r]),
            Profile::Sampled { grid, values } => {
                let x = (r - grid.r_min) / grid.h;
                if x <= 0.0 {
                    return values[0];
                }
                let j = x.floor() as usize;
                if j >= grid.len - 1 {
                    return values[grid.len - 1];
                }
                let w = x - j as f64;
                values[j] * (1.0 - w) + values[j + 1] * w
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicConfig {
    pub dim: usize,
    pub resolution: usize,
    pub source: FieldSpec,
    pub wind: Vec<FieldSpec>,
    pub initial: FieldSpec,
    pub ergodic: bool,
    pub aubry_tol: Option<f64>,
}

/// Validated periodic problem: sampled coefficients on the torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProblem {
    pub grid: TorusGrid,
    pub source: Vec<f64>,
    /// One component array per axis.
    pub wind: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub lip_source: f64,
    pub lip_initial: f64,
    pub aubry_tol: f64,
    pub ergodic: bool,
    /// Max |W_i| per axis over all nodes.
    pub wind_max: Vec<f64>,
}

impl PeriodicProblem {
    pub fn source_max(&self) -> f64 {
        self.source.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn wind_max_abs(&self) -> f64 {
        self.wind_max.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn initial_field(&self) -> Field {
        Field::new(self.grid.clone(), 0.0, self.initial.clone())
    }

    pub fn aubry_set(&self, tol: f64) -> AubrySet {
        let mut points = Vec::new();
        for idx in 0..self.grid.node_count() {
            if self.source[idx] <= tol {
                points.push(AubryPoint {
                    index: idx,
                    position: self.grid.coords(idx),
                    source_value: self.source[idx],
                });
            }
        }
        AubrySet {
            points,
            intervals: Vec::new(),
            marks: None,
        }
    }
}

fn max_neighbor_slope(grid: &TorusGrid, values: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for idx in 0..grid.node_count() {
        for axis in 0..grid.dim {
            let up = grid.shift(idx, axis, 1);
            m = m.max((values[up] - values[idx]).abs() / grid.h);
        }
    }
    m
}

/// Build and validate a periodic problem.
pub fn build_periodic(config: &PeriodicConfig) -> Result<PeriodicProblem> {
    if config.dim < 2 || config.dim > 3 {
        return Err(Error::validation(
            "problem.n",
            format!("dimension must be 2 or 3, got {}", config.dim),
        ));
    }
    if config.resolution < 8 {
        return Err(Error::validation(
            "numerics.N",
            format!("torus resolution must be at least 8, got {}", config.resolution),
        ));
    }
    if config.wind.len() != config.dim {
        return Err(Error::validation(
            "problem.wind",
            format!(
                "wind must have {} components, got {}",
                config.dim,
                config.wind.len()
            ),
        ));
    }
    let grid = TorusGrid::new(config.dim, config.resolution);
    let source = config.source.sample_torus(&grid, "problem.f")?;
    let initial = config.initial.sample_torus(&grid, "problem.g")?;
    let mut wind = Vec::with_capacity(config.dim);
    for (axis, spec) in config.wind.iter().enumerate() {
        wind.push(spec.sample_torus(&grid, &format!("problem.wind[{axis}]"))?);
    }

    for (idx, &f) in source.iter().enumerate() {
        if f < 0.0 {
            return Err(Error::NegativeSource {
                context: "f".into(),
                location: format!("{:?}", grid.coords(idx)),
                value: f,
            });
        }
    }

    let aubry_tol = config.aubry_tol.unwrap_or(if config.source.is_sampled() {
        grid.h * grid.h
    } else {
        AUBRY_TOL_CLOSED_FORM
    });

    if config.ergodic {
        let mut any = false;
        for idx in 0..grid.node_count() {
            if source[idx] <= aubry_tol {
                any = true;
                let norm2: f64 = wind.iter().map(|w| w[idx] * w[idx]).sum();
                if norm2.sqrt() > aubry_tol {
                    return Err(Error::AubryWindMismatch {
                        location: format!("{:?}", grid.coords(idx)),
                        wind_norm: norm2.sqrt(),
                    });
                }
            }
        }
        if !any {
            return Err(Error::EmptyAubry { tol: aubry_tol });
        }
    }

    let lip_source = LIP_SAFETY * max_neighbor_slope(&grid, &source);
    let lip_initial = LIP_SAFETY * max_neighbor_slope(&grid, &initial);
    let wind_max = wind
        .iter()
        .map(|w| w.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();

    Ok(PeriodicProblem {
        grid,
        source,
        wind,
        initial,
        lip_source,
        lip_initial,
        aubry_tol,
        ergodic: config.ergodic,
        wind_max,
    })
}

/// Right-boundary closure for the radial solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Ghost node extrapolated with slope min(one-sided slope, c_F).
    #[default]
    ClampedSlope,
    /// Ghost node extrapolated with the one-sided slope as is.
    ExtrapolateFree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialConfig {
    pub dim: usize,
    pub source: FieldSpec,
    pub initial: FieldSpec,
    pub c_f: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_n: usize,
    pub ergodic: bool,
    pub aubry_tol: Option<f64>,
    pub tail_tol: f64,
    pub boundary: BoundaryMode,
}

impl RadialConfig {
    /// Default inner truncation radius for dimension n.
    pub fn default_r_min(dim: usize) -> f64 {
        1e-3 * (dim as f64 - 1.0)
    }
}

/// Validated radial problem with its grid and evaluable coefficient profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub dim: usize,
    pub grid: RadialGrid,
    pub source: Profile,
    pub initial: Profile,
    pub source_at_nodes: Vec<f64>,
    pub initial_at_nodes: Vec<f64>,
    pub c_f: f64,
    pub ergodic: bool,
    pub aubry_tol: f64,
    pub boundary: BoundaryMode,
    pub warnings: Vec<String>,
}

impl RadialProblem {
    pub fn source_max(&self) -> f64 {
        self.source_at_nodes.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn initial_field(&self) -> RadialField {
        RadialField::new(self.grid.clone(), 0.0, self.initial_at_nodes.clone())
    }

    pub fn aubry_set(&self, tol: f64) -> AubrySet {
        let mut points = Vec::new();
        for j in 0..self.grid.len {
            if self.source_at_nodes[j] <= tol {
                points.push(AubryPoint {
                    index: j,
                    position: vec![self.grid.r(j)],
                    source_value: self.source_at_nodes[j],
                });
            }
        }
        let mut intervals = Vec::new();
        let mut run_start: Option<usize> = None;
        let mut prev: Option<usize> = None;
        for p in &points {
            match (run_start, prev) {
                (None, _) => run_start = Some(p.index),
                (Some(_), Some(q)) if p.index == q + 1 => {}
                (Some(s), Some(q)) => {
                    intervals.push((s, q));
                    run_start = Some(p.index);
                }
                _ => unreachable!(),
            }
            prev = Some(p.index);
        }
        if let (Some(s), Some(q)) = (run_start, prev) {
            intervals.push((s, q));
        }

        let interface = self.dim as f64 - 1.0;
        let eps = 1e-12 * (1.0 + interface);
        let left: Vec<f64> = points
            .iter()
            .map(|p| p.position[0])
            .filter(|r| *r <= interface + eps)
            .collect();
        let right: Vec<f64> = points
            .iter()
            .map(|p| p.position[0])
            .filter(|r| *r >= interface - eps)
            .collect();
        let marks = RadialMarks {
            s0: left.first().copied(),
            s1: left.last().copied(),
            r0: right.first().copied(),
            r1: right.last().copied(),
        };
        AubrySet {
            points,
            intervals,
            marks: Some(marks),
        }
    }
}

/// Build and validate a radial problem.
pub fn build_radial(config: &RadialConfig) -> Result<RadialProblem> {
    if config.dim < 2 {
        return Err(Error::validation(
            "problem.n",
            format!("dimension must be at least 2, got {}", config.dim),
        ));
    }
    if !(config.r_min > 0.0) {
        return Err(Error::validation(
            "numerics.r_min",
            format!("inner radius must be positive, got {}", config.r_min),
        ));
    }
    if config.r_max <= config.dim as f64 - 1.0 {
        return Err(Error::validation(
            "numerics.r_max",
            format!(
                "outer radius must exceed n-1 = {}, got {}",
                config.dim - 1,
                config.r_max
            ),
        ));
    }
    if config.grid_n < 8 {
        return Err(Error::validation(
            "numerics.grid_n",
            format!("need at least 8 radial nodes, got {}", config.grid_n),
        ));
    }
    if !(config.c_f > 0.0) {
        return Err(Error::validation(
            "problem.c_F",
            format!("tail value must be positive, got {}", config.c_f),
        ));
    }
    let grid = RadialGrid::new(config.r_min, config.r_max, config.grid_n);
    let source = Profile::from_spec(&config.source, &grid, "problem.F")?;
    let initial = Profile::from_spec(&config.initial, &grid, "problem.G")?;

    // Sign check on a refined sampling so closed forms cannot dip below zero
    // between nodes unnoticed.
    let refine = 4 * (grid.len - 1);
    for k in 0..=refine {
        let r = config.r_min + (config.r_max - config.r_min) * k as f64 / refine as f64;
        let f = source.eval(r);
        if f < 0.0 {
            return Err(Error::NegativeSource {
                context: "F".into(),
                location: format!("r = {r}"),
                value: f,
            });
        }
    }

    let source_at_nodes: Vec<f64> = grid.nodes().map(|r| source.eval(r)).collect();
    let initial_at_nodes: Vec<f64> = grid.nodes().map(|r| initial.eval(r)).collect();

    let mut warnings = Vec::new();
    let tail_start = config.r_max - 0.1 * (config.r_max - config.r_min);
    let worst_tail = grid
        .nodes()
        .filter(|r| *r >= tail_start)
        .map(|r| (source.eval(r) - config.c_f).abs())
        .fold(0.0f64, f64::max);
    if worst_tail > config.tail_tol {
        warnings.push(format!(
            "tail mismatch: max |F - c_F| = {worst_tail} on the last 10% of the domain \
             (tolerance {})",
            config.tail_tol
        ));
    }

    let aubry_tol = config.aubry_tol.unwrap_or(if config.source.is_sampled() {
        grid.h * grid.h
    } else {
        AUBRY_TOL_CLOSED_FORM
    });

    let problem = RadialProblem {
        dim: config.dim,
        grid,
        source,
        initial,
        source_at_nodes,
        initial_at_nodes,
        c_f: config.c_f,
        ergodic: config.ergodic,
        aubry_tol,
        boundary: config.boundary,
        warnings,
    };

    if config.ergodic && problem.aubry_set(aubry_tol).points.is_empty() {
        return Err(Error::EmptyAubry { tol: aubry_tol });
    }

    Ok(problem)
}

/// A grid point where the source vanishes within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AubryPoint {
    pub index: usize,
    pub position: Vec<f64>,
    pub source_value: f64,
}

/// The four radii bracketing the interface r = n-1 (radial problems only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMarks {
    pub s0: Option<f64>,
    pub s1: Option<f64>,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
}

/// Discrete zero set of the source, with contiguous runs and radial marks.
#[derive(Debug, Clone, PartialEq)]
pub struct AubrySet {
    pub points: Vec<AubryPoint>,
    /// Maximal runs of consecutive node indices (radial problems).
    pub intervals: Vec<(usize, usize)>,
    pub marks: Option<RadialMarks>,
}

impl AubrySet {
    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.index).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
