//! Acceptance suite: one test per shipped guarantee, each printing a
//! pass/fail line (visible with `--nocapture`). The demo runs are shared
//! across criteria through lazily initialized statics.

use gcurve::analysis;
use gcurve::config::{parse_config, Problem, RunConfig};
use gcurve::control::{
    brute_force_value, cone_of_influence, legendre_check, limit_profile, value_dp, velocity_cone,
    DpOptions,
};
use gcurve::model::{
    build_periodic, build_radial, BoundaryMode, FieldSpec, PeriodicConfig, PeriodicProblem,
    RadialConfig, RadialProblem,
};
use gcurve::periodic::{self, CurvatureParams};
use gcurve::radial;
use std::path::PathBuf;
use std::sync::LazyLock;
use std::time::Instant;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("configs")
}

fn load(name: &str) -> RunConfig {
    let bytes = std::fs::read(configs_dir().join(name)).unwrap();
    parse_config(&bytes).unwrap()
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

struct PeriodicRun {
    problem: PeriodicProblem,
    params: CurvatureParams,
    out: periodic::EvolveOutput,
    aubry: Vec<usize>,
    evolve_seconds: f64,
}

struct RadialRun {
    problem: RadialProblem,
    out: radial::EvolveOutput,
    config: RunConfig,
    evolve_seconds: f64,
}

fn periodic_run(name: &str) -> PeriodicRun {
    let config = load(name);
    let problem = match &config.problem {
        Problem::Periodic(p) => p.clone(),
        _ => panic!("expected periodic problem in {name}"),
    };
    let params = CurvatureParams::new(config.numerics.eps_reg);
    let aubry = problem.aubry_set(problem.aubry_tol).indices();
    let opts = periodic::EvolveOptions {
        t_max: config.numerics.t_max,
        snapshot_every: config.numerics.snapshot_every,
        cfl_safety: config.numerics.cfl_safety,
        dt_override: config.numerics.dt_override,
        divergence_factor: config.numerics.divergence_factor,
        track_nodes: aubry.clone(),
    };
    let started = Instant::now();
    let out = periodic::evolve(&problem, &params, &opts).unwrap();
    PeriodicRun {
        problem,
        params,
        out,
        aubry,
        evolve_seconds: started.elapsed().as_secs_f64(),
    }
}

fn radial_run(name: &str) -> RadialRun {
    let config = load(name);
    let problem = match &config.problem {
        Problem::Radial(p) => p.clone(),
        _ => panic!("expected radial problem in {name}"),
    };
    let aubry = problem.aubry_set(problem.aubry_tol).indices();
    let opts = radial::EvolveOptions {
        t_max: config.numerics.t_max,
        snapshot_every: config.numerics.snapshot_every,
        cfl_safety: config.numerics.cfl_safety,
        dt_override: config.numerics.dt_override,
        divergence_factor: config.numerics.divergence_factor,
        track_nodes: aubry,
    };
    let started = Instant::now();
    let out = radial::evolve_radial(&problem, &opts).unwrap();
    RadialRun {
        problem,
        out,
        config,
        evolve_seconds: started.elapsed().as_secs_f64(),
    }
}

static DEMO_PERIODIC: LazyLock<PeriodicRun> = LazyLock::new(|| periodic_run("demo_periodic.json"));
static DEMO_PERIODIC_NOWIND: LazyLock<PeriodicRun> =
    LazyLock::new(|| periodic_run("demo_periodic_nowind.json"));
static DEMO_RADIAL: LazyLock<RadialRun> = LazyLock::new(|| radial_run("demo_radial.json"));
static DEMO_MULTIWELL: LazyLock<RadialRun> =
    LazyLock::new(|| radial_run("demo_radial_multiwell.json"));

#[test]
fn criterion_01_exact_flat_solutions() {
    let start = Instant::now();
    // periodic: g = 0, f = c, W = 0 at N = 64 grows as c t to rounding
    let c = 0.7;
    let p = build_periodic(&PeriodicConfig {
        dim: 2,
        resolution: 64,
        source: FieldSpec::Constant(c),
        wind: vec![FieldSpec::Constant(0.0), FieldSpec::Constant(0.0)],
        initial: FieldSpec::Constant(0.0),
        ergodic: false,
        aubry_tol: None,
    })
    .unwrap();
    let params = CurvatureParams::for_problem(&p);
    let dt = periodic::cfl_dt(&p, &params);
    let mut u = p.initial.clone();
    let mut buf = vec![0.0; u.len()];
    for _ in 0..1000 {
        periodic::step_values(&p, &params, &u, dt, &mut buf).unwrap();
        std::mem::swap(&mut u, &mut buf);
    }
    let expected = c * 1000.0 * dt;
    let worst_rel_periodic = u
        .iter()
        .map(|v| ((v - expected) / expected).abs())
        .fold(0.0f64, f64::max);

    // radial analogue
    let cr = 0.4;
    let pr = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Constant(cr),
        initial: FieldSpec::Constant(0.0),
        c_f: 1.0,
        r_min: 0.5,
        r_max: 6.0,
        grid_n: 64,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    let dtr = radial::cfl_dt(&pr);
    let mut ur = pr.initial_at_nodes.clone();
    let mut bufr = vec![0.0; ur.len()];
    for _ in 0..1000 {
        radial::step_values(&pr, &ur, dtr, &mut bufr).unwrap();
        std::mem::swap(&mut ur, &mut bufr);
    }
    let expected_r = cr * 1000.0 * dtr;
    let worst_rel_radial = ur
        .iter()
        .map(|v| ((v - expected_r) / expected_r).abs())
        .fold(0.0f64, f64::max);

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "1 (exact flat solutions)",
        worst_rel_periodic <= 1e-12 && worst_rel_radial <= 1e-12 && elapsed < 10.0,
        &format!(
            "periodic rel err {worst_rel_periodic:.2e}, radial rel err {worst_rel_radial:.2e}, \
             {elapsed:.1}s (< 10s)"
        ),
    );
}

#[test]
fn criterion_02_exact_stationary_radial_solution() {
    let start = Instant::now();
    // V(r) = r with F = 1 - (n-1)/r on [1.5, 12], n = 2, grid_n = 1200
    let p = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("1 - 1/r".into()),
        initial: FieldSpec::Expr("r".into()),
        c_f: 1.0,
        r_min: 1.5,
        r_max: 12.0,
        grid_n: 1200,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 0.1,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    let h = p.grid.h;
    let residual = radial::ergodic_residual_radial(&p.initial_field(), &p);
    let max_res = residual.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let out = radial::evolve_radial(&p, &radial::EvolveOptions::new(10.0, 0.5)).unwrap();
    let study = analysis::convergence_study_radial(&out.snapshots, (1.5, 12.0), 2.0, 5.0 * h)
        .unwrap();
    let worst_osc = study.sup_osc.iter().fold(0.0f64, |m, v| m.max(*v));
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "2 (exact stationary radial solution)",
        max_res <= 2.0 * h && worst_osc <= 5.0 * h && elapsed < 30.0,
        &format!(
            "residual {max_res:.2e} (<= {:.2e}), oscillation {worst_osc:.2e} (<= {:.2e}), \
             {elapsed:.1}s (< 30s)",
            2.0 * h,
            5.0 * h
        ),
    );
}

#[test]
fn criterion_03_aubry_monotonicity() {
    let rr = &*DEMO_RADIAL;
    let rate_radial = rr.out.stats.max_tracked_increase_rate;
    let h_radial = rr.problem.grid.h;

    let pr = &*DEMO_PERIODIC;
    // the four half-integer lattice points are Aubry nodes of the demo
    let n = pr.problem.grid.n;
    for corner in [[0, 0], [0, n / 2], [n / 2, 0], [n / 2, n / 2]] {
        let idx = pr.problem.grid.index(&corner);
        assert!(
            pr.aubry.contains(&idx),
            "expected {corner:?} in the Aubry set"
        );
    }
    let rate_periodic = pr.out.stats.max_tracked_increase_rate;
    let h_periodic = pr.problem.grid.h;

    report(
        "3 (Aubry monotonicity)",
        rate_radial <= 10.0 * h_radial && rate_periodic <= 10.0 * h_periodic,
        &format!(
            "radial increase rate {rate_radial:.2e} (<= {:.2e}), periodic {rate_periodic:.2e} \
             (<= {:.2e})",
            10.0 * h_radial,
            10.0 * h_periodic
        ),
    );
}

#[test]
fn criterion_04_cutoff_sign() {
    // Wind-free demos satisfy u(t+dt) - u(t) <= dt f exactly; on the windy
    // demo the asserted form is the advected one (the bracketed operator is
    // nonnegative) and the literal gap is reported as a diagnostic.
    let r1 = DEMO_RADIAL.out.stats.max_source_excess;
    let r2 = DEMO_MULTIWELL.out.stats.max_source_excess;
    let p_nowind = DEMO_PERIODIC_NOWIND.out.stats.max_source_excess;
    let p_wind_op = DEMO_PERIODIC.out.stats.max_operator_excess;
    let p_wind_literal = DEMO_PERIODIC.out.stats.max_source_excess;
    report(
        "4 (cutoff sign)",
        r1 <= 1e-12 && r2 <= 1e-12 && p_nowind <= 1e-12 && p_wind_op <= 1e-12,
        &format!(
            "radial {r1:.1e} / {r2:.1e}, periodic no-wind {p_nowind:.1e}, periodic windy \
             operator form {p_wind_op:.1e} (literal u_t <= f gap: {p_wind_literal:.1e}, \
             diagnostic only)"
        ),
    );
}

fn dp_instance(
    dim: usize,
    f: &str,
    g: &str,
    r_max: f64,
    grid_n: usize,
) -> RadialProblem {
    build_radial(&RadialConfig {
        dim,
        source: FieldSpec::Expr(f.into()),
        initial: FieldSpec::Expr(g.into()),
        c_f: 1.0,
        r_min: 0.25,
        r_max,
        grid_n,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap()
}

#[test]
fn criterion_05_dp_against_brute_force_oracle() {
    let start = Instant::now();
    let h = 0.05;
    let dt = 0.02;
    let tol = 2.0 * (h + dt);
    // (dim, F, G, r_max, grid_n, r, t, segments, samples, frozen oracle)
    let cases: [(usize, &str, &str, f64, usize, f64, f64, usize, usize, f64); 5] = [
        (2, "min(1,(r-2)^2)", "5", 6.0, 116, 2.0, 1.0, 2, 3, 5.0),
        (2, "min(1,(r-2)^2)", "abs(r-3)", 6.0, 116, 2.0, 2.0, 4, 5, 0.362728125),
        (3, "min(1,(r-1)^2*(r-4)^2)", "abs(r-4)+2", 8.0, 156, 4.0, 1.5, 3, 5, 2.0),
        (2, "min(1,(r-2)^2)", "0.2*r+4", 6.0, 116, 2.0, 2.0, 4, 5, 4.4),
        (2, "min(1,(r-2)^2)", "abs(r-2.4)", 6.0, 116, 2.0, 0.5, 4, 5, 0.040401865205),
    ];
    let mut worst_gap: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for (dim, f, g, r_max, grid_n, r, t, k, m, frozen) in cases {
        let p = dp_instance(dim, f, g, r_max, grid_n);
        let oracle = brute_force_value(&p, r, t, k, m, h).unwrap();
        worst_drift = worst_drift.max((oracle - frozen).abs());
        let table = value_dp(
            &p,
            &DpOptions {
                t_max: t,
                dt,
                velocity_samples: 33,
                snapshot_every: None,
            },
        )
        .unwrap();
        let dp = table.final_slice[p.grid.nearest(r)];
        worst_gap = worst_gap.max((oracle - dp).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "5 (DP vs oracle)",
        worst_gap <= tol && worst_drift <= 1e-9 && elapsed < 60.0,
        &format!(
            "worst |dp - oracle| {worst_gap:.3} (<= {tol}), frozen-value drift \
             {worst_drift:.1e}, {elapsed:.1}s (< 60s)"
        ),
    );
}

#[test]
fn criterion_06_legendre_consistency() {
    let p = dp_instance(2, "0.3 + 0.4*abs(cos(r))", "0", 6.0, 116);
    let p_samples: Vec<f64> = (-50_000..=50_000).map(|i| i as f64 * 1e-3).collect();
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    // 20 radii x 5 interior velocities = 100 pairs strictly inside the cone
    for i in 0..20 {
        let r = 0.4 + 0.27 * i as f64;
        let cone = velocity_cone(r, 2).unwrap();
        let vs: Vec<f64> = (1..=5)
            .map(|j| cone.v_min + (cone.v_max - cone.v_min) * j as f64 / 6.0)
            .collect();
        pairs += vs.len();
        worst = worst.max(legendre_check(&p, r, &p_samples, &vs).unwrap());
    }
    report(
        "6 (Legendre consistency)",
        pairs == 100 && worst <= 1e-3,
        &format!("{pairs} pairs, worst transform gap {worst:.2e} (<= 1e-3)"),
    );
}

#[test]
fn criterion_07_cone_of_influence() {
    let r_star = 5.0;
    let t = 1.5;
    let (lo, hi) = cone_of_influence(r_star, t, 2).unwrap();
    assert_eq!((lo, hi), (3.5, 8.0));

    let grid_n = 800;
    let base = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("min(1,(r-2)^2)".into()),
        initial: FieldSpec::Expr("abs(r-4.5)".into()),
        c_f: 1.0,
        r_min: 0.05,
        r_max: 12.035,
        grid_n,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    // +10 strictly outside [r* - t, r* + 2t]
    let perturbed_g: Vec<f64> = base
        .grid
        .nodes()
        .map(|r| {
            let g = (r - 4.5f64).abs();
            if r < lo || r > hi {
                g + 10.0
            } else {
                g
            }
        })
        .collect();
    let perturbed = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("min(1,(r-2)^2)".into()),
        initial: FieldSpec::Samples(perturbed_g),
        c_f: 1.0,
        r_min: 0.05,
        r_max: 12.035,
        grid_n,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    let dp_opts = DpOptions {
        t_max: t,
        dt: 5e-4,
        velocity_samples: 33,
        snapshot_every: None,
    };
    let v0 = value_dp(&base, &dp_opts).unwrap();
    let v1 = value_dp(&perturbed, &dp_opts).unwrap();
    let j = base.grid.nearest(r_star);
    let change = (v1.final_slice[j] - v0.final_slice[j]).abs();
    let tol = 3.0 * (base.grid.h + dp_opts.dt);
    report(
        "7 (cone of influence)",
        change <= tol,
        &format!("value change {change:.2e} under +10 outside [{lo}, {hi}] (<= {tol:.2e})"),
    );
}

#[test]
fn criterion_08_limit_profile_crosscheck() {
    let start = Instant::now();
    let rr = &*DEMO_RADIAL;
    let p = &rr.problem;
    assert_eq!(p.grid.len, 800);
    let h = p.grid.h;
    let dt = rr.out.stats.dt_nominal;

    // PDE long-time limit: time-average over the final window
    let study = analysis::convergence_study_radial(
        &rr.out.snapshots,
        (1.2, 8.0),
        0.2 * rr.config.numerics.t_max,
        rr.config.numerics.conv_tol,
    )
    .unwrap();
    assert!(study.converged, "PDE run not converged: {:?}", study.sup_osc);

    // control-side profile from stabilized values plus travel costs
    let dp_dt = gcurve::runner::default_dp_dt(p);
    let table = value_dp(
        p,
        &DpOptions {
            t_max: 8.0,
            dt: dp_dt,
            velocity_samples: 33,
            snapshot_every: None,
        },
    )
    .unwrap();
    let lp = limit_profile(p, &table, 10.0 * (h + dp_dt)).unwrap();

    let mut worst: f64 = 0.0;
    for j in 0..p.grid.len {
        let r = p.grid.r(j);
        if (1.2..=8.0).contains(&r) {
            worst = worst.max((study.limit_values[j] - lp.v[j]).abs());
        }
    }
    let tol = 3.0 * (h + dt);
    let elapsed = start.elapsed().as_secs_f64() + rr.evolve_seconds;
    report(
        "8 (limit profile cross-check)",
        worst <= tol && elapsed < 120.0,
        &format!("worst gap {worst:.3e} on [1.2, 8] (<= {tol:.3e}), {elapsed:.1}s (< 2min)"),
    );
}

#[test]
fn criterion_09_periodic_large_time_convergence() {
    let start = Instant::now();
    let pr = &*DEMO_PERIODIC;
    assert_eq!(pr.problem.grid.n, 64);
    assert!(pr.config_horizon() <= 50.0);
    let window = 0.2 * pr.config_horizon();
    let study =
        analysis::convergence_study_periodic(&pr.out.snapshots, window, 1e-3).unwrap();

    let limit = gcurve::model::Field::new(
        pr.problem.grid.clone(),
        pr.out.snapshots.last().unwrap().time,
        study.limit_values.clone(),
    );
    let residual = periodic::ergodic_residual(&limit, &pr.problem, &pr.params);
    let off_a = residual
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| pr.problem.source[*i] > pr.problem.aubry_tol)
        .map(|(_, v)| v.abs())
        .fold(0.0f64, f64::max);
    let res_tol = 10.0 * (pr.problem.grid.h + pr.params.eps_reg);
    let elapsed = start.elapsed().as_secs_f64() + pr.evolve_seconds;
    report(
        "9 (periodic large-time convergence)",
        study.converged && off_a <= res_tol && elapsed < 300.0,
        &format!(
            "windowed oscillation {:.2e} (<= 1e-3) within horizon {} (<= 50), residual off A \
             {off_a:.2e} (<= {res_tol:.2e}), {elapsed:.1}s (< 5min)",
            study.sup_osc.last().unwrap(),
            pr.config_horizon(),
        ),
    );
}

impl PeriodicRun {
    fn config_horizon(&self) -> f64 {
        self.out.snapshots.last().unwrap().time
    }
}

#[test]
fn criterion_10_barriers_no_wind() {
    let pr = &*DEMO_PERIODIC_NOWIND;
    let h = pr.problem.grid.h;
    let dt = pr.out.stats.dt_nominal;
    let mut worst_space = f64::NEG_INFINITY;
    for shift in [[1, 0], [0, 1], [-1, 0], [0, -1]] {
        worst_space = worst_space.max(
            analysis::barrier_sandwich_periodic(&pr.problem, &shift, &pr.out.snapshots).unwrap(),
        );
    }
    let rep = analysis::time_barrier_check(&pr.problem, &pr.params, &pr.out.snapshots).unwrap();
    report(
        "10 (space and time barriers)",
        worst_space <= 10.0 * h && rep.worst_rate_excess <= 10.0 * (h + dt),
        &format!(
            "space sandwich excess {worst_space:.2e} (<= {:.2e}), time-rate excess \
             {:.2e} (<= {:.2e}), C_init {:.1}",
            10.0 * h,
            rep.worst_rate_excess,
            10.0 * (h + dt),
            rep.c_init
        ),
    );
}

#[test]
fn criterion_11_radial_a_priori_bounds() {
    let rr = &*DEMO_RADIAL;
    let p = &rr.problem;
    let h = p.grid.h;
    let dt = rr.out.stats.dt_nominal;
    let f_max = p.source_max();
    let time_lip = rr.out.stats.max_time_slope;

    let interface = p.dim as f64 - 1.0;
    let alphas: Vec<f64> = [1.25, 1.5, 2.0].iter().map(|a| a * interface).collect();
    let lip = analysis::lipschitz_radial(p, &rr.out.snapshots, &rr.out.stats, &alphas).unwrap();
    let mut ok = time_lip <= f_max + 10.0 * (h + dt);
    let mut detail = format!("time lip {time_lip:.4} (<= {:.4})", f_max + 10.0 * (h + dt));
    for e in &lip.space {
        ok &= e.measured <= e.bound + 10.0 * h;
        detail.push_str(&format!(
            ", alpha {:.2}: {:.3} (<= {:.3})",
            e.alpha,
            e.measured,
            e.bound + 10.0 * h
        ));
    }
    report("11 (radial a-priori bounds)", ok, &detail);
}

/// Lockstep evolution of an ordered pair; returns the worst (signed)
/// ordering violation max(u1 - u2) over all nodes and steps.
fn periodic_pair_violation(p: &PeriodicProblem, params: &CurvatureParams, offset: f64, t_max: f64) -> f64 {
    let dt = periodic::cfl_dt(p, params);
    let steps = (t_max / dt).ceil() as u64;
    let mut u1 = p.initial.clone();
    let mut u2: Vec<f64> = u1.iter().map(|v| v + offset).collect();
    let mut b1 = vec![0.0; u1.len()];
    let mut b2 = vec![0.0; u2.len()];
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        periodic::step_values(p, params, &u1, dt, &mut b1).unwrap();
        periodic::step_values(p, params, &u2, dt, &mut b2).unwrap();
        std::mem::swap(&mut u1, &mut b1);
        std::mem::swap(&mut u2, &mut b2);
        for (a, b) in u1.iter().zip(u2.iter()) {
            worst = worst.max(a - b);
        }
    }
    worst
}

fn radial_pair_violation(p: &RadialProblem, bump: impl Fn(f64) -> f64, t_max: f64) -> f64 {
    let dt = radial::cfl_dt(p);
    let steps = (t_max / dt).ceil() as u64;
    let mut u1 = p.initial_at_nodes.clone();
    let mut u2: Vec<f64> = u1
        .iter()
        .zip(p.grid.nodes())
        .map(|(v, r)| v + bump(r))
        .collect();
    let mut b1 = vec![0.0; u1.len()];
    let mut b2 = vec![0.0; u2.len()];
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        radial::step_values(p, &u1, dt, &mut b1).unwrap();
        radial::step_values(p, &u2, dt, &mut b2).unwrap();
        std::mem::swap(&mut u1, &mut b1);
        std::mem::swap(&mut u2, &mut b2);
        for (a, b) in u1.iter().zip(u2.iter()) {
            worst = worst.max(a - b);
        }
    }
    worst
}

#[test]
fn criterion_12_discrete_comparison() {
    let mut worst = f64::NEG_INFINITY;

    // radial demos: three smooth nonnegative bumps each (the first-order
    // scheme is rigorously monotone, so ordering is exact)
    for run in [&*DEMO_RADIAL, &*DEMO_MULTIWELL] {
        let p = &run.problem;
        let t_max = run.config.numerics.t_max;
        let mid = 0.5 * (p.grid.r_min + p.grid.r_max());
        worst = worst.max(radial_pair_violation(p, |_| 0.75, t_max));
        worst = worst.max(radial_pair_violation(
            p,
            |r| 0.5 / (1.0 + (r - mid) * (r - mid)),
            t_max,
        ));
        worst = worst.max(radial_pair_violation(p, |r| 0.2 + 0.1 * (r.sin() + 1.0), t_max));
    }

    // periodic demos: three constant offsets each (order preservation is
    // structurally exact under additive constants)
    for run in [&*DEMO_PERIODIC, &*DEMO_PERIODIC_NOWIND] {
        let t_max = run.out.snapshots.last().unwrap().time;
        for offset in [0.25, 0.5, 1.0] {
            worst = worst.max(periodic_pair_violation(
                &run.problem,
                &run.params,
                offset,
                t_max,
            ));
        }
    }
    report(
        "12 (discrete comparison)",
        worst <= 0.0,
        &format!("worst ordering violation {worst:.2e} over 12 ordered pairs, full horizons"),
    );
}
