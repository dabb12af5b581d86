//! The full large-time pipeline in the radial setting, at coarse desk
//! scale: stabilized values on the zero set of the source plus minimal
//! travel costs assemble the limit profile, which the PDE solver then
//! reproduces independently.
//!
//! Run with: cargo run --release --example limit_profile

use gcurve::analysis::convergence_study_radial;
use gcurve::control::{is_infinite_cost, limit_profile, travel_cost, value_dp, DpOptions};
use gcurve::model::{build_radial, BoundaryMode, FieldSpec, RadialConfig};
use gcurve::radial::{evolve_radial, EvolveOptions};

fn main() {
    let problem = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("min(1,(r-2)^2)".into()),
        initial: FieldSpec::Constant(5.0),
        c_f: 1.0,
        r_min: 0.05,
        r_max: 12.05,
        grid_n: 241, // h = 0.05
        ergodic: true,
        aubry_tol: None,
        tail_tol: 0.1,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();
    let h = problem.grid.h;

    // control engine: dynamic programming until the Aubry values stabilize,
    // then travel-cost assembly
    let dp_dt = 0.5 * h / (1.0 + 1.0 / problem.grid.r_min);
    let table = value_dp(
        &problem,
        &DpOptions {
            t_max: 6.0,
            dt: dp_dt,
            velocity_samples: 33,
            snapshot_every: None,
        },
    )
    .unwrap();
    let lp = limit_profile(&problem, &table, 10.0 * (h + dp_dt)).unwrap();
    for (s, vg) in &lp.aubry_values {
        println!("stabilized value at the zero s = {s}: v_G = {vg}");
    }

    // PDE engine: long-time limit of the evolution
    let out = evolve_radial(&problem, &EvolveOptions::new(30.0, 0.5)).unwrap();
    let study = convergence_study_radial(&out.snapshots, (1.2, 8.0), 6.0, 1e-3).unwrap();
    println!("PDE run converged: {}", study.converged);

    println!("\n{:>6} {:>10} {:>10} {:>9}", "r", "PDE limit", "profile", "gap");
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0] {
        let j = problem.grid.nearest(r);
        if is_infinite_cost(lp.v[j]) {
            continue;
        }
        let gap = (study.limit_values[j] - lp.v[j]).abs();
        worst = worst.max(gap);
        println!(
            "{r:>6.2} {:>10.4} {:>10.4} {gap:>9.4}",
            study.limit_values[j], lp.v[j]
        );
    }
    println!("\nworst gap {worst:.4}; travel cost 2 -> 3 alone: {:.4}",
        travel_cost(&problem, 2.0, 3.0).unwrap());
}
