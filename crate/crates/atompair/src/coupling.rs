//! Distance- and orientation-dependent collective coupling of the atom pair.
//!
//! The vacuum-mediated complex rate splits into a dissipative part `mu`
//! (distance-dependent collective emission) and a coherent part `nu`
//! (dipole-dipole interaction), both functions of the dimensionless
//! distance x = k0*r and the orientation factor varsigma = sin^2(theta).

use crate::error::{Error, Result};

/// Default short-range cutoff below which `nu` is treated as divergent.
pub const DEFAULT_X_MIN: f64 = 1e-3;

/// Branch point below which the oscillatory combination in `mu` switches to
/// a convergent series. Direct evaluation of cos x/x^2 - sin x/x^3 loses
/// about 2*log10(1/x) digits to cancellation, so the branch sits high
/// enough that both branches hold 1e-12 accuracy at the seam.
pub const MU_SERIES_BRANCH: f64 = 0.5;

/// Distance/orientation pair entering the coupling functions.
///
/// `x` is the interatomic distance in units of 1/k0; `varsigma` is
/// sin^2 of the angle between the interatomic axis and the dipole moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleGeometry {
    x: f64,
    varsigma: f64,
}

impl DipoleGeometry {
    pub fn new(x: f64, varsigma: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidState(format!(
                "dimensionless distance must be finite and >= 0, got {x}"
            )));
        }
        if !varsigma.is_finite() || !(0.0..=1.0).contains(&varsigma) {
            return Err(Error::InvalidState(format!(
                "orientation factor must lie in [0, 1], got {varsigma}"
            )));
        }
        Ok(DipoleGeometry { x, varsigma })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn varsigma(&self) -> f64 {
        self.varsigma
    }
}

/// Complex collective rate in units of gamma0: gamma(r) = gamma0 (mu + i nu).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRate {
    pub mu: f64,
    pub nu: f64,
}

impl ComplexRate {
    pub fn as_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.mu, self.nu)
    }
}

/// cos x/x^2 - sin x/x^3, evaluated stably.
///
/// Series: sum_{k>=1} (-1)^k x^{2k-2} * 2k/(2k+1)! = -1/3 + x^2/30 - x^4/840 + ...
/// summed to convergence below the branch point; closed form above.
fn mu_bracket(x: f64) -> f64 {
    if x < MU_SERIES_BRANCH {
        let x2 = x * x;
        // term_k = (-1)^k x^{2k-2} 2k/(2k+1)!; start at k = 1.
        let mut term = -1.0 / 3.0;
        let mut sum = term;
        let mut k = 1.0_f64;
        loop {
            // ratio term_{k+1}/term_k = -x^2 (k+1)/(k (2k+2)(2k+3))
            term *= -x2 * (k + 1.0) / (k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
            if term.abs() < 1e-18 || k > 40.0 {
                break;
            }
        }
        sum
    } else {
        x.cos() / (x * x) - x.sin() / (x * x * x)
    }
}

/// sin x / x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Dissipative coupling for raw scalar arguments; total on x >= 0.
pub(crate) fn mu_raw(x: f64, varsigma: f64) -> f64 {
    1.5 * ((3.0 * varsigma - 2.0) * mu_bracket(x) + varsigma * sinc(x))
}

/// Coherent (dipole-dipole) coupling for raw scalar arguments.
/// Diverges as x -> 0; the caller enforces the cutoff.
pub(crate) fn nu_raw(x: f64, varsigma: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    0.75 * ((3.0 * varsigma - 2.0) * (x.sin() / x2 + x.cos() / x3) - varsigma * x.cos() / x)
}

/// Dissipative coupling mu(x, varsigma); mu -> 1 as x -> 0 for every orientation.
pub fn mu(g: &DipoleGeometry) -> f64 {
    mu_raw(g.x, g.varsigma)
}

/// Coherent coupling nu(x, varsigma) with the default short-range cutoff.
pub fn nu(g: &DipoleGeometry) -> Result<f64> {
    nu_with_cutoff(g, DEFAULT_X_MIN)
}

/// Coherent coupling with an explicit cutoff x_min.
pub fn nu_with_cutoff(g: &DipoleGeometry, x_min: f64) -> Result<f64> {
    if g.x < x_min {
        return Err(Error::DistanceBelowCutoff { x: g.x, x_min });
    }
    Ok(nu_raw(g.x, g.varsigma))
}

/// Complex rate gamma(r)/gamma0 = mu + i nu at the given geometry.
pub fn gamma_rate(g: &DipoleGeometry) -> Result<ComplexRate> {
    Ok(ComplexRate {
        mu: mu(g),
        nu: nu(g)?,
    })
}

/// All roots of mu(x) in [x_lo, x_hi] for fixed varsigma, sorted ascending.
///
/// Roots are bracketed by sign change on a fixed scan grid (the nodes of mu
/// are separated by more than 2, so a 0.02 step cannot skip a pair) and
/// refined by bisection until |mu| < 1e-12.
pub fn mu_nodes(varsigma: f64, x_lo: f64, x_hi: f64) -> Vec<f64> {
    assert!(
        0.0 < x_lo && x_lo < x_hi,
        "node search requires 0 < x_lo < x_hi"
    );
    let f = |x: f64| mu_raw(x, varsigma);
    let step = 0.02_f64;
    let n = ((x_hi - x_lo) / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut a = x_lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = (x_lo + (x_hi - x_lo) * i as f64 / n as f64).min(x_hi);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect_root(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    roots.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
    roots
}

/// Bisection on a bracketing interval; returns the midpoint once the
/// interval is at rounding width and the residual is below 1e-12.
fn bisect_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if (b - a).abs() < 1e-15 * a.abs().max(1.0) && fm.abs() < 1e-12 {
            break;
        }
    }
    0.5 * (a + b)
}
