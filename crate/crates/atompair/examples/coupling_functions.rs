//! The two halves of the pair coupling at a fixed separation.
//!
//! `mu` is the dissipative part (relative correction to the decay rate),
//! `nu` the coherent part (vacuum-induced level shift). Both depend only
//! on the dimensionless distance x = k0 r and on the dipole orientation
//! through varsigma = sin^2(theta). Run with:
//!
//!     cargo run --example coupling_functions

use atompair::coupling::{gamma_rate, mu, mu_nodes, nu, DipoleGeometry};

fn main() -> atompair::Result<()> {
    // Contact limit: a coinciding pair decays like a single emitter of
    // double strength, so mu -> 1 regardless of orientation.
    for varsigma in [0.0, 0.5, 1.0] {
        let g = DipoleGeometry::new(1e-6, varsigma)?;
        println!("mu(x -> 0, varsigma = {varsigma:.1}) = {:+.12}", mu(&g));
    }
    println!();

    // Profile along the distance axis, dipole perpendicular to the pair.
    println!("{:>6}  {:>12}  {:>12}", "x", "mu", "nu");
    for i in 1..=12 {
        let x = 0.5 * i as f64;
        let g = DipoleGeometry::new(x, 1.0)?;
        println!("{:6.2}  {:+12.6}  {:+12.6}", x, mu(&g), nu(&g)?);
    }
    println!();

    // mu oscillates and crosses zero; a packet centered on such a node
    // keeps only the coherent coupling. These are the node positions.
    let nodes = mu_nodes(1.0, 0.5, 15.0);
    println!("zeros of mu on (0.5, 15), varsigma = 1:");
    for (i, x) in nodes.iter().enumerate() {
        let g = DipoleGeometry::new(*x, 1.0)?;
        println!(
            "  node {}: x = {:.12}   mu there = {:+.2e}",
            i + 1,
            x,
            mu(&g)
        );
    }
    println!();

    // The combined complex rate used by the dynamics: gamma = mu + 2 i nu.
    let g = DipoleGeometry::new(2.0, 1.0)?;
    let rate = gamma_rate(&g)?;
    println!(
        "gamma(x = 2, varsigma = 1) = {:+.6} {:+.6} i",
        rate.as_complex().re,
        rate.as_complex().im
    );

    // nu diverges like 1/x^3 toward contact, so it carries a short-range
    // cutoff; asking below it is an error rather than a huge number.
    let close = DipoleGeometry::new(1e-4, 1.0)?;
    match nu(&close) {
        Err(e) => println!("nu below the cutoff: {e}"),
        Ok(v) => println!("unexpected nu = {v}"),
    }
    Ok(())
}
