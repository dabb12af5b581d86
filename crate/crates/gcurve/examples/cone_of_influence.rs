//! Initial data outside the interval [r* - t, r* + 2t] cannot influence
//! the value at (r*, t): admissible trajectories move leftward no faster
//! than 1 + (n-1)/r < 2 and rightward no faster than 1 - (n-1)/r < 1.
//!
//! Run with: cargo run --release --example cone_of_influence

use gcurve::control::{cone_of_influence, value_dp, DpOptions};
use gcurve::model::{build_radial, BoundaryMode, FieldSpec, RadialConfig};

fn problem(initial: FieldSpec) -> gcurve::model::RadialProblem {
    build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("min(1,(r-2)^2)".into()),
        initial,
        c_f: 1.0,
        r_min: 0.25,
        r_max: 12.0,
        grid_n: 471, // h = 0.025
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap()
}

fn main() {
    let r_star = 5.0;
    let t = 1.5;
    let (lo, hi) = cone_of_influence(r_star, t, 2).unwrap();
    println!("cone of influence of (r* = {r_star}, t = {t}): [{lo}, {hi}]");

    let base = problem(FieldSpec::Expr("abs(r-4.5)".into()));
    let opts = DpOptions {
        t_max: t,
        dt: 0.005,
        velocity_samples: 33,
        snapshot_every: None,
    };
    let v_base = value_dp(&base, &opts).unwrap();
    let j = base.grid.nearest(r_star);

    // perturbing outside the cone leaves the value alone; perturbing the
    // region the optimal starts actually live in moves it visibly
    for (label, keep_lo, keep_hi) in [
        ("outside the cone", lo, hi),
        ("inside the cone (over the optimal starts)", 5.0, 7.0),
    ] {
        let bumped: Vec<f64> = base
            .grid
            .nodes()
            .map(|r| {
                let g = (r - 4.5f64).abs();
                if r < keep_lo || r > keep_hi {
                    g + 10.0
                } else {
                    g
                }
            })
            .collect();
        let perturbed = problem(FieldSpec::Samples(bumped));
        let v_pert = value_dp(&perturbed, &opts).unwrap();
        let change = (v_pert.final_slice[j] - v_base.final_slice[j]).abs();
        println!("perturbing +10 {label}: value change {change:.3e}");
    }
    println!("only perturbations reaching into the cone move the value");
}
