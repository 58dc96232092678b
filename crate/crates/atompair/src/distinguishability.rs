//! Dimensional checks that position can serve as the label telling the
//! two atoms apart.
//!
//! The pair state is defined over atoms distinguished by their
//! positions, so over an excited-state lifetime the relative-position
//! packet must stay narrow compared to the mean distance while quantum
//! dispersion widens it. Requiring `spread << distance` at the lifetime
//! scale bounds the initial rms spread from both sides; the scale of
//! those bounds is the dispersion length l = sqrt(hbar tau0 / m). This
//! module evaluates the bounds for concrete species in SI units.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Reduced Planck constant, J s (CODATA 2018 exact-based value).
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Numeric meaning of "much smaller than" in the spread bounds.
pub const DEFAULT_STRICTNESS: f64 = 10.0;

/// An atomic species reduced to what the distance blur bounds need:
/// mass and the wavelength and line width of the driven transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSpecies {
    mass: f64,
    lambda0: f64,
    gamma0: f64,
}

impl PhysicalSpecies {
    /// Validated constructor; all inputs in SI units, strictly positive.
    pub fn new(mass: f64, lambda0: f64, gamma0: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("lambda0", lambda0), ("gamma0", gamma0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidState(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(PhysicalSpecies {
            mass,
            lambda0,
            gamma0,
        })
    }

    /// Rb-87 on the D2 line (780 nm), textbook values.
    pub fn rb87_d2() -> Self {
        PhysicalSpecies {
            mass: 1.44316e-25,
            lambda0: 780.241e-9,
            gamma0: 3.8117e7,
        }
    }

    /// Cs-133 on the D2 line (852 nm), textbook values.
    pub fn cs133_d2() -> Self {
        PhysicalSpecies {
            mass: 2.207e-25,
            lambda0: 852.35e-9,
            gamma0: 3.289e7,
        }
    }

    /// Atomic mass, kg.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Transition wavelength, m.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Natural line width, 1/s.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Excited-state lifetime scale tau0 = 2 pi / gamma0, s.
    pub fn tau0(&self) -> f64 {
        2.0 * PI / self.gamma0
    }

    /// Transition wavenumber k0 = 2 pi / lambda0, 1/m.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// Recoil energy (hbar k0)^2 / 2m, J.
    pub fn recoil_energy(&self) -> f64 {
        let hk = HBAR * self.k0();
        hk * hk / (2.0 * self.mass)
    }

    /// Dispersion length l = sqrt(hbar tau0 / m): the spread a packet
    /// acquires from quantum dispersion alone over one lifetime, m.
    pub fn dispersion_length(&self) -> f64 {
        (HBAR * self.tau0() / self.mass).sqrt()
    }
}

/// Natural line width from the transition dipole moment `d` (C m) and
/// angular frequency `omega0` (rad/s):
/// gamma0 = d^2 omega0^3 / (6 pi eps0 hbar c^3).
pub fn gamma0_from_dipole(d: f64, omega0: f64) -> f64 {
    let c3 = SPEED_OF_LIGHT.powi(3);
    d * d * omega0.powi(3) / (6.0 * PI * VACUUM_PERMITTIVITY * HBAR * c3)
}

/// The initial spread after one lifetime of quantum dispersion:
/// dr0 * sqrt(1 + (l/dr0)^4). Minimized at dr0 = l, value sqrt(2) l.
pub fn dispersed_spread(s: &PhysicalSpecies, dr0: f64) -> f64 {
    assert!(dr0 > 0.0, "dr0 must be positive");
    let q = s.dispersion_length() / dr0;
    dr0 * (1.0 + q.powi(4)).sqrt()
}

/// Smallest usable initial spread at mean distance r0: dr_min = l^2/r0.
/// Below it, dispersion inflates the packet past the distance itself.
pub fn min_spread(s: &PhysicalSpecies, r0: f64) -> f64 {
    assert!(r0 > 0.0, "r0 must be positive");
    let l = s.dispersion_length();
    l * l / r0
}

/// The condition `dispersed spread << distance` as a signed quantity:
/// dr0^4 - dr0^2 r0^2 + l^4, negative where the condition can hold.
pub fn quartic_condition(s: &PhysicalSpecies, r0: f64, dr0: f64) -> f64 {
    assert!(r0 > 0.0 && dr0 > 0.0, "inputs must be positive");
    let l = s.dispersion_length();
    dr0.powi(4) - dr0 * dr0 * r0 * r0 + l.powi(4)
}

/// Outcome of the distinguishability check. Each margin is the actual
/// ratio of an inequality that must exceed `strictness` for `ok`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishabilityReport {
    /// Spread after one lifetime of dispersion, m.
    pub dr_t: f64,
    /// Lower bound on the initial spread, m.
    pub dr_min: f64,
    /// dr0 / dr_min: initial spread above its lower bound.
    pub margin_lower: f64,
    /// r0 / dr0: initial spread below the mean distance.
    pub margin_upper: f64,
    /// r0 / dr_t: dispersed spread below the mean distance.
    pub margin_dispersed: f64,
    /// r0 / l: mean distance above the dispersion length.
    pub margin_distance: f64,
    /// The factor every margin is compared against.
    pub strictness: f64,
    /// All margins at or above `strictness`.
    pub ok: bool,
}

/// Check whether a (species, mean distance, initial spread) triple keeps
/// the atoms distinguishable by position for a lifetime: the initial
/// spread must sit a `strictness` factor inside
/// dr_min <= dr0 <= r0, the dispersed spread must stay under r0, and r0
/// itself must exceed the dispersion length.
pub fn check(s: &PhysicalSpecies, r0: f64, dr0: f64, strictness: f64) -> DistinguishabilityReport {
    assert!(r0 > 0.0 && dr0 > 0.0, "inputs must be positive");
    assert!(strictness >= 1.0, "strictness must be >= 1");
    let l = s.dispersion_length();
    let dr_t = dispersed_spread(s, dr0);
    let dr_min = min_spread(s, r0);
    let margin_lower = dr0 / dr_min;
    let margin_upper = r0 / dr0;
    let margin_dispersed = r0 / dr_t;
    let margin_distance = r0 / l;
    let ok = margin_lower >= strictness
        && margin_upper >= strictness
        && margin_dispersed >= strictness
        && margin_distance >= strictness;
    DistinguishabilityReport {
        dr_t,
        dr_min,
        margin_lower,
        margin_upper,
        margin_dispersed,
        margin_distance,
        strictness,
        ok,
    }
}
