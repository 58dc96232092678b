//! Exact packet-averaged coherence versus its cumulant closed form.
//!
//! The concurrence of the pair equals 2|z| where z is the coherence
//! between the two single-excitation product states. The exact evaluator
//! averages the per-distance solution over the packet; the second-order
//! cumulant form needs only the four moments and is the basis of every
//! closed-form disentanglement formula. Its error grows like tau^3, so
//! it is quantitative at early times only. Run with:
//!
//!     cargo run --release --example coherence_decay

use atompair::dynamics::{
    trajectory, z_cumulant, z_exact, ElectronicPreparation, EvolutionMode, CUMULANT_VALIDITY_TAU,
};
use atompair::ensemble::{moments, GeometryConfig};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

fn main() -> atompair::Result<()> {
    let g = GeometryConfig::new(PI, 0.15 * PI, FRAC_PI_2)?;
    let m = moments(&g, 1e-9)?;
    // Uneven superposition of the two collective channels with a phase.
    let prep = ElectronicPreparation::from_collective(
        Complex64::from_polar(0.8, 0.6),
        Complex64::new(0.6, 0.0),
    )?;

    println!("trusted cumulant window: tau <= {CUMULANT_VALIDITY_TAU}");
    println!(
        "{:>6}  {:>22}  {:>22}  {:>9}",
        "tau", "z exact", "z cumulant", "rel err"
    );
    for &tau in &[0.01, 0.025, 0.05, 0.1, 0.2, 0.4, 0.8] {
        let ze = z_exact(&prep, &g, tau, 1e-9)?;
        let zc = z_cumulant(&prep, &m, tau);
        let rel = (zc - ze).norm() / ze.norm();
        let mark = if tau <= CUMULANT_VALIDITY_TAU {
            " "
        } else {
            "*"
        };
        println!(
            "{tau:6.3}  {:+11.6} {:+9.6}i  {:+11.6} {:+9.6}i  {rel:9.2e}{mark}",
            ze.re, ze.im, zc.re, zc.im
        );
    }
    println!("(* beyond the trusted window)");
    println!();

    // The same content as full reduced states on a grid: populations,
    // coherence and concurrence per time, one quadrature setup shared
    // across the grid.
    let taus: Vec<f64> = (0..=6).map(|i| 0.05 * i as f64).collect();
    let snaps = trajectory(&prep, &g, &taus, 1e-9, EvolutionMode::Exact)?;
    println!(
        "{:>6}  {:>9}  {:>9}  {:>9}  {:>11}",
        "tau", "p_plus", "p_minus", "p_ground", "concurrence"
    );
    for s in &snaps {
        println!(
            "{:6.3}  {:9.6}  {:9.6}  {:9.6}  {:11.6}",
            s.tau, s.p_plus, s.p_minus, s.p_ground, s.concurrence
        );
    }
    Ok(())
}
