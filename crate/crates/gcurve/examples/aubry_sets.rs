//! Build the shipped demo problems and print their Aubry sets: the grid
//! points where the source vanishes, the maximal runs, and the four radii
//! bracketing the interface r = n-1 in the radial case.
//!
//! Run with: cargo run --release --example aubry_sets

use gcurve::config::{parse_config, Problem};
use std::path::Path;

fn main() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in [
        "demo_radial.json",
        "demo_radial_multiwell.json",
        "demo_periodic.json",
        "demo_periodic_nowind.json",
    ] {
        let cfg = parse_config(&std::fs::read(configs.join(name)).unwrap()).unwrap();
        println!("== {name}");
        match &cfg.problem {
            Problem::Radial(p) => {
                let a = p.aubry_set(p.aubry_tol);
                println!(
                    "   {} radial Aubry node(s) at tolerance {:.1e}",
                    a.points.len(),
                    p.aubry_tol
                );
                for run in &a.intervals {
                    println!(
                        "   run: r in [{:.4}, {:.4}]",
                        p.grid.r(run.0),
                        p.grid.r(run.1)
                    );
                }
                let m = a.marks.unwrap();
                println!(
                    "   marks around r = n-1 = {}: S0 {:?}  S1 {:?}  R0 {:?}  R1 {:?}",
                    p.dim - 1,
                    m.s0,
                    m.s1,
                    m.r0,
                    m.r1
                );
            }
            Problem::Periodic(p) => {
                let a = p.aubry_set(p.aubry_tol);
                println!(
                    "   {} periodic Aubry node(s) of {} at tolerance {:.1e}",
                    a.points.len(),
                    p.grid.node_count(),
                    p.aubry_tol
                );
                for q in a.points.iter().take(4) {
                    println!("   node at {:?} with f = {:.2e}", q.position, q.source_value);
                }
                if a.points.len() > 4 {
                    println!("   ...");
                }
            }
        }
    }
}
