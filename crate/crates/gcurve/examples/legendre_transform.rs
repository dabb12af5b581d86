//! The running cost is the Legendre transform of the Hamiltonian: constant
//! F(r) on the velocity cone, infinite outside. This example evaluates the
//! transform numerically on a p-lattice and shows the dichotomy.
//!
//! Run with: cargo run --release --example legendre_transform

use gcurve::control::{lagrangian, legendre_check, velocity_cone};
use gcurve::model::{build_radial, BoundaryMode, FieldSpec, RadialConfig};
use gcurve::radial::hamiltonian;

fn main() {
    let problem = build_radial(&RadialConfig {
        dim: 2,
        source: FieldSpec::Expr("0.3 + 0.4*abs(cos(r))".into()),
        initial: FieldSpec::Constant(0.0),
        c_f: 1.0,
        r_min: 0.25,
        r_max: 6.0,
        grid_n: 116,
        ergodic: false,
        aubry_tol: None,
        tail_tol: 1e9,
        boundary: BoundaryMode::ClampedSlope,
    })
    .unwrap();

    let p_samples: Vec<f64> = (-50_000..=50_000).map(|i| i as f64 * 1e-3).collect();
    println!("{:>5} {:>18} {:>10} {:>12}", "r", "cone", "F(r)", "worst gap");
    for r in [0.5, 1.0, 1.5, 2.5, 4.0] {
        let cone = velocity_cone(r, problem.dim).unwrap();
        let vs: Vec<f64> = (1..8)
            .map(|i| cone.v_min + (cone.v_max - cone.v_min) * i as f64 / 8.0)
            .collect();
        let gap = legendre_check(&problem, r, &p_samples, &vs).unwrap();
        println!(
            "{r:>5.2} [{:>7.3}, {:>6.3}] {:>10.4} {gap:>12.2e}",
            cone.v_min,
            cone.v_max,
            problem.source.eval(r)
        );
    }

    // outside the cone the sup over p grows without bound
    let r = 2.5;
    let cone = velocity_cone(r, 2).unwrap();
    let v_out = cone.v_max + 0.05;
    println!(
        "\nv = {v_out:.3} just outside the cone at r = {r}: L = {:.3e} (sentinel)",
        lagrangian(&problem, r, v_out, 1e-9).unwrap()
    );
    for range in [10.0, 100.0, 1000.0] {
        let sup = (0..=4000)
            .map(|i| -range + 2.0 * range * i as f64 / 4000.0)
            .map(|q| q * v_out - hamiltonian(&problem, r, q).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        println!("  sampled sup over |p| <= {range:>6}: {sup:.2}");
    }
}
