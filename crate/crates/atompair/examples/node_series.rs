//! An equidistant series of disentanglement times at a node of mu.
//!
//! Centering the packet on a zero of the dissipative coupling removes
//! the asymmetry between the collective channels. A balanced preparation
//! then loses its entanglement periodically: the coherent coupling
//! rotates the relative phase through zero every pi / (2 nu_bar).
//! Run with:
//!
//!     cargo run --release --example node_series

use atompair::coupling::mu_nodes;
use atompair::disentanglement::{td_numeric, td_series, FtdKind, TD_MOMENT_TOL};
use atompair::dynamics::{ElectronicPreparation, EvolutionMode};
use atompair::ensemble::{moments, GeometryConfig};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn main() -> atompair::Result<()> {
    let node = mu_nodes(1.0, 0.5, 5.0)[0];
    let g = GeometryConfig::new(node, 0.5, FRAC_PI_2)?;
    let m = moments(&g, TD_MOMENT_TOL)?;
    println!("packet centered on the first node of mu: x0 = {node:.9}");
    println!(
        "mu_bar = {:+.3e} (gone), nu_bar = {:+.9} (left over)",
        m.mu_bar, m.nu_bar
    );

    // Balanced amplitudes with a collective phase of pi/4.
    let prep = ElectronicPreparation::balanced_with_phase(FRAC_PI_4);
    let series = td_series(&prep, &m, 30.0)?;
    assert_eq!(series.kind, FtdKind::Series);

    let gap = PI / (2.0 * m.nu_bar.abs());
    println!("expected gap pi / (2 |nu_bar|) = {gap:.9}");
    println!();
    println!("{:>4}  {:>14}  {:>14}", "n", "closed form", "gap to prev");
    let mut prev = 0.0;
    for (i, t) in series.times.iter().enumerate() {
        if i == 0 {
            println!("{:4}  {:14.9}  {:>14}", i + 1, t, "");
        } else {
            println!("{:4}  {:14.9}  {:14.9}", i + 1, t, t - prev);
        }
        prev = *t;
    }
    println!();

    // The blind numeric search over the averaged coherence finds the
    // same ladder.
    let numeric = td_numeric(&prep, &g, (0.01, 30.0), 1e-9, EvolutionMode::Cumulant)?;
    assert_eq!(numeric.kind, FtdKind::Series);
    let worst = series
        .times
        .iter()
        .zip(&numeric.times)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!(
        "numeric search: {} times, worst deviation from the closed form {:.2e}",
        numeric.times.len(),
        worst
    );
    println!(
        "times beyond the trusted moment window (tau > {}): {} of {}",
        numeric.validity_limit,
        numeric.flagged_times().len(),
        numeric.times.len()
    );
    Ok(())
}
