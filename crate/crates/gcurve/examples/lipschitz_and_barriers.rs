//! Regularity measurements against the derived bounds: barrier sandwiches
//! for the wind-free torus problem, and the time/space Lipschitz constants
//! of a radial run against the coercivity bound.
//!
//! Run with: cargo run --release --example lipschitz_and_barriers

use gcurve::analysis::{barrier_sandwich_periodic, lipschitz_radial, time_barrier_check};
use gcurve::model::{build_periodic, build_radial, BoundaryMode, FieldSpec, PeriodicConfig, RadialConfig};
use gcurve::periodic::{evolve, CurvatureParams, EvolveOptions};
use gcurve::radial::{evolve_radial, EvolveOptions as RadialOptions};

fn main() {
    // wind-free torus problem
    let p = build_periodic(&PeriodicConfig {
        dim: 2,
        resolution: 32,
        source: FieldSpec::Expr("sin(2*pi*x1)^2 + sin(2*pi*x2)^2".into()),
        wind: vec![FieldSpec::Constant(0.0), FieldSpec::Constant(0.0)],
        initial: FieldSpec::Expr("cos(2*pi*x1)*cos(2*pi*x2)".into()),
        ergodic: true,
        aubry_tol: None,
    })
    .unwrap();
    let params = CurvatureParams::for_problem(&p);
    let out = evolve(&p, &params, &EvolveOptions::new(1.0, 0.1)).unwrap();
    println!(
        "torus run: N = 32, horizon 1.0, discrete Lipschitz constants L_f = {:.3}, L_g = {:.3}",
        p.lip_source, p.lip_initial
    );
    for shift in [[1, 0], [0, 1]] {
        let worst = barrier_sandwich_periodic(&p, &shift, &out.snapshots).unwrap();
        println!(
            "  one-cell shift {shift:?}: sandwich excess {worst:+.3e} (slack allows {:.3e})",
            10.0 * p.grid.h
        );
    }
    let rep = time_barrier_check(&p, &params, &out.snapshots).unwrap();
    println!(
        "  time barrier: C_init = {:.2}, rate bound {:.2}, worst excess {:+.3e}",
        rep.c_init, rep.rate_bound, rep.worst_rate_excess
    );

    // radial a-priori bounds
    let pr = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("min(1,(r-2)^2)".into()),
        initial: FieldSpec::Constant(5.0),
        c_f: 1.0,
        r_min: 0.05,
        r_max: 12.05,
        grid_n: 241,
        ergodic: true,
        aubry_tol: None,
        tail_tol: 0.1,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    let outr = evolve_radial(&pr, &RadialOptions::new(20.0, 1.0)).unwrap();
    let lip = lipschitz_radial(&pr, &outr.snapshots, &outr.stats, &[1.25, 1.5, 2.0]).unwrap();
    println!(
        "\nradial run: max |dU|/dt = {:.4}, source bound {:.4}",
        lip.time_lip, lip.time_bound
    );
    println!("  coercivity bound degrades toward the interface r = n-1 = 1:");
    for e in &lip.space {
        println!(
            "  alpha = {:>4.2}: measured slope {:.3}, bound {:.3}",
            e.alpha, e.measured, e.bound
        );
    }
}
