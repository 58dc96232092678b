//! When does "two atoms at a distance" make sense at all?
//!
//! The model treats the atoms as distinguishable by position. For a real
//! species that requires the separation packet to stay narrower than the
//! separation itself for at least one lifetime, while quantum dispersion
//! inflates any packet prepared too narrow. Both pressures meet at the
//! dispersion length l, which sets the smallest usable spread l^2/r0 and
//! the minimum workable distance. Run with:
//!
//!     cargo run --example distinguishability_check

use atompair::distinguishability::{
    check, dispersed_spread, min_spread, PhysicalSpecies, DEFAULT_STRICTNESS,
};

fn main() {
    for species in [PhysicalSpecies::rb87_d2(), PhysicalSpecies::cs133_d2()] {
        let l = species.dispersion_length();
        println!(
            "species: lambda0 = {:.1} nm, lifetime = {:.1} ns, dispersion length l = {:.2} nm",
            species.lambda0() * 1e9,
            1.0 / species.gamma0() * 1e9,
            l * 1e9
        );

        // The spread after one lifetime is minimized by preparing at
        // dr0 = l, where it is sqrt(2) l; narrower preparations disperse
        // to something worse.
        println!("  spread after one lifetime, by initial spread:");
        for f in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let dr0 = f * l;
            println!(
                "    dr0 = {:7.2} nm -> {:7.2} nm",
                dr0 * 1e9,
                dispersed_spread(&species, dr0) * 1e9
            );
        }

        // Verdicts at a comfortable distance, a too-short distance, and
        // a too-narrow preparation.
        let r0 = 20.0 * species.lambda0();
        println!(
            "  smallest usable spread at r0 = 20 lambda0: {:.3} nm",
            min_spread(&species, r0) * 1e9
        );
        let cases = [
            ("comfortable", r0, 10.0 * l),
            ("distance too short", 2.0 * l, l),
            (
                "preparation too narrow",
                r0,
                0.05 * min_spread(&species, r0),
            ),
        ];
        for (title, r, dr) in cases {
            let rep = check(&species, r, dr, DEFAULT_STRICTNESS);
            println!(
                "  {title}: ok = {} (margins: lower {:.1}, upper {:.1}, dispersed {:.1}, distance {:.1})",
                rep.ok, rep.margin_lower, rep.margin_upper, rep.margin_dispersed, rep.margin_distance
            );
        }
        println!();
    }
}
