//! Qualitative map of the disentanglement regimes.
//!
//! The same machinery, pointed at five qualitatively different corners
//! of parameter space. `classify_regime` names each regime and spells
//! out the reason. Run with:
//!
//!     cargo run --release --example regimes

use atompair::coupling::mu_nodes;
use atompair::disentanglement::{classify_regime, TD_MOMENT_TOL};
use atompair::dynamics::ElectronicPreparation;
use atompair::ensemble::{moments_best_effort, GeometryConfig};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn main() -> atompair::Result<()> {
    let node = mu_nodes(1.0, 0.5, 5.0)[0];
    let balanced = ElectronicPreparation::balanced_with_phase(FRAC_PI_4);
    let uneven =
        ElectronicPreparation::from_collective(Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0))?;

    let cases: [(&str, GeometryConfig, &ElectronicPreparation); 5] = [
        (
            "far field: atoms effectively independent",
            GeometryConfig::new(100.0 * PI, 2.0 * PI, FRAC_PI_2)?,
            &uneven,
        ),
        (
            "washed out: packet wider than a coupling oscillation",
            GeometryConfig::new(8.0 * PI, 3.0 * PI, FRAC_PI_2)?,
            &uneven,
        ),
        (
            "node packet, balanced preparation: periodic series",
            GeometryConfig::new(node, 0.5, FRAC_PI_2)?,
            &balanced,
        ),
        (
            "near field, uneven amplitudes, phase uncompensated",
            GeometryConfig::new(2.0, 0.3, FRAC_PI_2)?,
            &uneven,
        ),
        (
            "near field, balanced amplitudes: no real-part crossing",
            GeometryConfig::new(2.0, 0.3, FRAC_PI_2)?,
            &balanced,
        ),
    ];

    for (title, g, prep) in &cases {
        let m = moments_best_effort(g, TD_MOMENT_TOL)?;
        let c = classify_regime(prep, g, &m);
        println!("{title}");
        println!("  x0 = {:.3}, dx0 = {:.3}", g.x0(), g.dx0());
        println!("  label: {}", c.label);
        println!("  why:   {}", c.rationale);
        println!();
    }
    Ok(())
}
