//! Reduced electronic dynamics of the pair under collective decay.
//!
//! The single-excitation state is carried by the collective amplitudes
//! Phi_plus (superradiant, decaying at 1+mu) and Phi_minus (subradiant,
//! decaying at 1-mu), while nu rotates their relative phase. Averaging
//! over the distance packet is done either exactly on the quadrature grid
//! (every node evolves with its own mu, nu) or in a second-order cumulant
//! closed form driven by the packet moments.
//!
//! Sign convention: the coherence cross term carries exp(+2 i nu tau), and
//! the populations use amplitudes with the matching phase so that each
//! grid node stays an exact pure state (|z|^2 = p_plus p_minus pointwise,
//! hence the averaged state is positive by construction). Rederiving the
//! populations from the amplitude solution with the opposite phase
//! convention would break that pointwise purity for complex Phi_+ Phi_-*;
//! the tests document the two conventions' relation explicitly.

use crate::ensemble::{
    base_order, build_grid, moments, CouplingMoments, GeometryConfig, PackedGrid,
    CUTOFF_MASS_LIMIT, MAX_AXIS_ORDER,
};
use crate::error::{Error, Result};
use crate::quadrature::Kahan;
use num_complex::Complex64;
use rayon::prelude::*;

/// Dimensionless time beyond which the cumulant closed forms are
/// advisory only (they assume gamma0 t well below 1).
pub const CUMULANT_VALIDITY_TAU: f64 = 0.3;

/// How the packet average of the dynamics is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// Quadrature over the full packet; reference accuracy.
    Exact,
    /// Second-order cumulant closed forms in the packet moments.
    Cumulant,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Initial single-excitation state: psi_plus and psi_minus are the
/// amplitudes for atom plus / atom minus being the excited one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronicPreparation {
    psi_plus: Complex64,
    psi_minus: Complex64,
}

impl ElectronicPreparation {
    pub fn new(psi_plus: Complex64, psi_minus: Complex64) -> Result<Self> {
        let norm = psi_plus.norm_sqr() + psi_minus.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "preparation must be normalized: |psi_plus|^2 + |psi_minus|^2 = {norm}"
            )));
        }
        Ok(ElectronicPreparation {
            psi_plus,
            psi_minus,
        })
    }

    /// Build from the collective (super/subradiant) amplitudes instead.
    pub fn from_collective(phi_plus: Complex64, phi_minus: Complex64) -> Result<Self> {
        ElectronicPreparation::new(
            (phi_plus + phi_minus) * SQRT_HALF,
            (phi_plus - phi_minus) * SQRT_HALF,
        )
    }

    /// Preparation with |Phi_plus| = |Phi_minus| = 1/sqrt(2) and relative
    /// collective phase `phi`; the family whose real coherence vanishes
    /// identically, needed wherever the mean dissipative coupling is zero.
    pub fn balanced_with_phase(phi: f64) -> Self {
        ElectronicPreparation {
            psi_plus: Complex64::new((phi / 2.0).cos(), 0.0),
            psi_minus: Complex64::new(0.0, (phi / 2.0).sin()),
        }
    }

    /// Symmetric Bell state (both atoms share the excitation in phase):
    /// pure superradiant component, concurrence 1 at tau = 0.
    pub fn bell_symmetric() -> Self {
        ElectronicPreparation {
            psi_plus: Complex64::new(SQRT_HALF, 0.0),
            psi_minus: Complex64::new(SQRT_HALF, 0.0),
        }
    }

    /// The same physical pair with the two atoms relabeled.
    pub fn swapped(&self) -> Self {
        ElectronicPreparation {
            psi_plus: self.psi_minus,
            psi_minus: self.psi_plus,
        }
    }

    pub fn psi_plus(&self) -> Complex64 {
        self.psi_plus
    }

    pub fn psi_minus(&self) -> Complex64 {
        self.psi_minus
    }

    /// Superradiant amplitude (Phi_plus).
    pub fn phi_plus(&self) -> Complex64 {
        (self.psi_plus + self.psi_minus) * SQRT_HALF
    }

    /// Subradiant amplitude (Phi_minus).
    pub fn phi_minus(&self) -> Complex64 {
        (self.psi_plus - self.psi_minus) * SQRT_HALF
    }

    /// Relative collective phase arg(Phi_plus Phi_minus*); 0 when either
    /// amplitude vanishes.
    pub fn relative_phase(&self) -> f64 {
        (self.phi_plus() * self.phi_minus().conj()).arg()
    }
}

/// Reduced state at one time: populations, coherence, concurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrixSnapshot {
    pub tau: f64,
    /// Probability that atom plus holds the excitation.
    pub p_plus: f64,
    /// Probability that atom minus holds the excitation.
    pub p_minus: f64,
    /// 1 - (p_plus + p_minus), exact by construction.
    pub p_ground: f64,
    /// Coherence between the two single-excitation product states.
    pub z: Complex64,
    /// 2 max(0, |z|).
    pub concurrence: f64,
    pub mode: EvolutionMode,
}

impl DensityMatrixSnapshot {
    /// Full 4x4 density matrix in the product basis {ee, eg, ge, gg}.
    /// The double-excitation population is identically zero here (single
    /// shared excitation), which is what reduces the concurrence to 2|z|.
    pub fn density_matrix(&self) -> [[Complex64; 4]; 4] {
        let zero = Complex64::new(0.0, 0.0);
        let mut rho = [[zero; 4]; 4];
        rho[1][1] = Complex64::new(self.p_plus, 0.0);
        rho[2][2] = Complex64::new(self.p_minus, 0.0);
        rho[3][3] = Complex64::new(self.p_ground, 0.0);
        rho[2][1] = self.z;
        rho[1][2] = self.z.conj();
        rho
    }
}

fn validate_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidState(format!(
            "time must be finite and >= 0, got {tau}"
        )));
    }
    Ok(())
}

/// Raw averaged pieces of a snapshot before assembly.
struct RawState {
    z: Complex64,
    p_plus: f64,
    p_minus: f64,
}

/// Evaluate the averaged coherence and populations on a fixed grid. Each
/// node is a pure state: superradiant amplitude decaying at 1+mu, subradiant
/// at 1-mu, cross phase exp(+2 i nu tau).
fn eval_on_grid(grid: &PackedGrid, prep: &ElectronicPreparation, tau: f64) -> RawState {
    let k = prep.phi_plus() * prep.phi_minus().conj();
    let np = prep.phi_plus().norm_sqr();
    let nm = prep.phi_minus().norm_sqr();
    let e2t = (-2.0 * tau).exp();
    let mut zr = Kahan::default();
    let mut zi = Kahan::default();
    let mut pp = Kahan::default();
    let mut pm = Kahan::default();
    for i in 0..grid.w.len() {
        let w = grid.w[i];
        let mu = grid.mu[i];
        let nu = grid.nu[i];
        // Exponents are <= 0 since |mu| <= 1, so no overflow is possible.
        let a = np * (-2.0 * tau * (1.0 + mu)).exp();
        let b = nm * (-2.0 * tau * (1.0 - mu)).exp();
        let (s, c) = (2.0 * nu * tau).sin_cos();
        let cr = e2t * (k.re * c - k.im * s);
        let ci = e2t * (k.re * s + k.im * c);
        zr.add(w * 0.5 * (a - b));
        zi.add(w * ci);
        pp.add(w * (0.5 * (a + b) + cr));
        pm.add(w * (0.5 * (a + b) - cr));
    }
    RawState {
        z: Complex64::new(zr.value(), zi.value()),
        p_plus: pp.value(),
        p_minus: pm.value(),
    }
}

/// A converged quadrature grid reusable across many times for one
/// preparation and geometry.
pub(crate) struct PacketEvaluator {
    grid: PackedGrid,
    prep: ElectronicPreparation,
}

impl PacketEvaluator {
    /// Build a grid whose averaged coherence and populations at the probe
    /// time move by less than `tol` under order doubling. The probe should
    /// be the largest time of interest: phase oscillation across the
    /// packet grows with tau, so later times are the demanding ones.
    pub(crate) fn converge(
        g: &GeometryConfig,
        prep: &ElectronicPreparation,
        tau_probe: f64,
        tol: f64,
    ) -> Result<Self> {
        assert!(tol > 0.0, "tolerance must be positive");
        validate_tau(tau_probe)?;
        let mut n = base_order(g.dx0());
        let mut lo = build_grid(
            g.center(),
            g.dipole(),
            g.dx0(),
            n,
            crate::coupling::DEFAULT_X_MIN,
        );
        loop {
            let hi = build_grid(
                g.center(),
                g.dipole(),
                g.dx0(),
                2 * n,
                crate::coupling::DEFAULT_X_MIN,
            );
            if hi.cutoff_mass > CUTOFF_MASS_LIMIT {
                return Err(Error::ExcessiveCutoffMass {
                    mass: hi.cutoff_mass,
                    limit: CUTOFF_MASS_LIMIT,
                });
            }
            let r_lo = eval_on_grid(&lo, prep, tau_probe);
            let r_hi = eval_on_grid(&hi, prep, tau_probe);
            let err = (r_hi.z - r_lo.z)
                .norm()
                .max((r_hi.p_plus - r_lo.p_plus).abs())
                .max((r_hi.p_minus - r_lo.p_minus).abs());
            if err < tol {
                return Ok(PacketEvaluator {
                    grid: hi,
                    prep: *prep,
                });
            }
            n *= 2;
            if 2 * n > MAX_AXIS_ORDER {
                return Err(Error::QuadratureNotConverged {
                    order: hi.order,
                    err,
                    tol,
                });
            }
            lo = hi;
        }
    }

    /// Evaluator on a fixed-order grid, skipping the convergence gate.
    /// Best-effort path for scans on packets whose tails never settle to
    /// the gate tolerance.
    pub(crate) fn at_order(g: &GeometryConfig, prep: &ElectronicPreparation, order: usize) -> Self {
        PacketEvaluator {
            grid: build_grid(
                g.center(),
                g.dipole(),
                g.dx0(),
                order,
                crate::coupling::DEFAULT_X_MIN,
            ),
            prep: *prep,
        }
    }

    pub(crate) fn z(&self, tau: f64) -> Complex64 {
        eval_on_grid(&self.grid, &self.prep, tau).z
    }

    pub(crate) fn snapshot(&self, tau: f64) -> Result<DensityMatrixSnapshot> {
        let raw = eval_on_grid(&self.grid, &self.prep, tau);
        assemble(tau, raw, EvolutionMode::Exact)
    }
}

fn assemble(tau: f64, raw: RawState, mode: EvolutionMode) -> Result<DensityMatrixSnapshot> {
    // The populations are nonnegative up to rounding; clamp the rounding.
    let p_plus = raw.p_plus.max(0.0);
    let p_minus = raw.p_minus.max(0.0);
    let excess = raw.z.norm_sqr() - p_plus * p_minus;
    if excess > 1e-9 {
        return Err(Error::PositivityViolation { excess });
    }
    // Single rounding: the ground population absorbs the residual so the
    // trace is exactly 1 by construction.
    let p_ground = 1.0 - (p_plus + p_minus);
    Ok(DensityMatrixSnapshot {
        tau,
        p_plus,
        p_minus,
        p_ground,
        z: raw.z,
        concurrence: 2.0 * raw.z.norm().max(0.0),
        mode,
    })
}

/// Packet-averaged coherence, evaluated exactly on an adaptively
/// converged quadrature grid.
pub fn z_exact(
    prep: &ElectronicPreparation,
    g: &GeometryConfig,
    tau: f64,
    tol: f64,
) -> Result<Complex64> {
    validate_tau(tau)?;
    Ok(PacketEvaluator::converge(g, prep, tau, tol)?.z(tau))
}

fn exp_clamped(e: f64) -> f64 {
    e.min(700.0).exp()
}

/// Second-order cumulant closed form of the coherence. Total in its
/// inputs; trust it only while tau stays below `CUMULANT_VALIDITY_TAU`
/// (and the spread-squared corrections stay small).
pub fn z_cumulant(prep: &ElectronicPreparation, m: &CouplingMoments, tau: f64) -> Complex64 {
    let np = prep.phi_plus().norm_sqr();
    let nm = prep.phi_minus().norm_sqr();
    let s = (np * nm).sqrt();
    let phi = prep.relative_phase();
    let e_mu = exp_clamped(-2.0 * (tau - (m.d_mu * tau).powi(2)));
    let e_nu = exp_clamped(-2.0 * (tau + (m.d_nu * tau).powi(2)));
    let a = np * exp_clamped(-2.0 * m.mu_bar * tau);
    let b = nm * exp_clamped(2.0 * m.mu_bar * tau);
    let zr = 0.5 * (a - b) * e_mu;
    let zi = s * (2.0 * m.nu_bar * tau + phi).sin() * e_nu;
    Complex64::new(zr, zi)
}

/// Cumulant-mode snapshot from explicit moments; the populations use the
/// same second-order recipe as the coherence, which keeps
/// |z|^2 <= p_plus p_minus for every input.
pub fn snapshot_from_moments(
    prep: &ElectronicPreparation,
    m: &CouplingMoments,
    tau: f64,
) -> Result<DensityMatrixSnapshot> {
    validate_tau(tau)?;
    let np = prep.phi_plus().norm_sqr();
    let nm = prep.phi_minus().norm_sqr();
    let s = (np * nm).sqrt();
    let phi = prep.relative_phase();
    let e_mu = exp_clamped(-2.0 * (tau - (m.d_mu * tau).powi(2)));
    let e_nu = exp_clamped(-2.0 * (tau + (m.d_nu * tau).powi(2)));
    let a = np * exp_clamped(-2.0 * m.mu_bar * tau);
    let b = nm * exp_clamped(2.0 * m.mu_bar * tau);
    let cross = s * (2.0 * m.nu_bar * tau + phi).cos() * e_nu;
    let raw = RawState {
        z: z_cumulant(prep, m, tau),
        p_plus: 0.5 * (a + b) * e_mu + cross,
        p_minus: 0.5 * (a + b) * e_mu - cross,
    };
    assemble(tau, raw, EvolutionMode::Cumulant)
}

/// Reduced state at one time, by the selected evaluation mode.
pub fn snapshot(
    prep: &ElectronicPreparation,
    g: &GeometryConfig,
    tau: f64,
    tol: f64,
    mode: EvolutionMode,
) -> Result<DensityMatrixSnapshot> {
    validate_tau(tau)?;
    match mode {
        EvolutionMode::Exact => PacketEvaluator::converge(g, prep, tau, tol)?.snapshot(tau),
        EvolutionMode::Cumulant => {
            let m = moments(g, tol)?;
            snapshot_from_moments(prep, &m, tau)
        }
    }
}

/// Snapshots over a sorted time grid, sharing one converged quadrature
/// setup (exact) or one moment set (cumulant) across the whole grid.
pub fn trajectory(
    prep: &ElectronicPreparation,
    g: &GeometryConfig,
    tau_grid: &[f64],
    tol: f64,
    mode: EvolutionMode,
) -> Result<Vec<DensityMatrixSnapshot>> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidState("time grid must be nonempty".into()));
    }
    // partial_cmp so that a NaN entry fails as unsorted instead of
    // slipping past a plain comparison.
    for pair in tau_grid.windows(2) {
        let ordered = matches!(
            pair[0].partial_cmp(&pair[1]),
            Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
        );
        if !ordered {
            return Err(Error::InvalidState(
                "time grid must be sorted ascending".into(),
            ));
        }
    }
    for &t in tau_grid {
        validate_tau(t)?;
    }
    match mode {
        EvolutionMode::Exact => {
            let probe = *tau_grid.last().unwrap();
            let ev = PacketEvaluator::converge(g, prep, probe, tol)?;
            tau_grid.par_iter().map(|&t| ev.snapshot(t)).collect()
        }
        EvolutionMode::Cumulant => {
            let m = moments(g, tol)?;
            tau_grid
                .par_iter()
                .map(|&t| snapshot_from_moments(prep, &m, t))
                .collect()
        }
    }
}

const Y4: [[f64; 4]; 4] = [
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
];

type Mat4 = [[Complex64; 4]; 4];

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = [[zero; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == zero {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_adjoint(a: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Cyclic complex Jacobi eigensolver for a 4x4 Hermitian matrix.
/// Returns (eigenvalues, unitary of column eigenvectors) with
/// A = U diag(lambda) U^dagger.
fn jacobi_hermitian(mut a: Mat4) -> ([f64; 4], Mat4) {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut u = [[zero; 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = one;
    }
    let scale: f64 = (0..4)
        .map(|i| (0..4).map(|j| a[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off = off.max(a[p][q].norm());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let d = (a[q][q].re - a[p][p].re) / (2.0 * mag);
                let t = if d == 0.0 {
                    1.0
                } else {
                    d.signum() / (d.abs() + (d * d + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let su = s * phase;
                // Columns: right-multiply by the rotation.
                for i in 0..4 {
                    let ap = a[i][p];
                    let aq = a[i][q];
                    a[i][p] = c * ap - su.conj() * aq;
                    a[i][q] = su * ap + c * aq;
                    let up = u[i][p];
                    let uq = u[i][q];
                    u[i][p] = c * up - su.conj() * uq;
                    u[i][q] = su * up + c * uq;
                }
                // Rows: left-multiply by the adjoint rotation.
                for j in 0..4 {
                    let ap = a[p][j];
                    let aq = a[q][j];
                    a[p][j] = c * ap - su * aq;
                    a[q][j] = su.conj() * ap + c * aq;
                }
            }
        }
    }
    ([a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re], u)
}

/// Singular values of a 4x4 complex matrix by Hestenes one-sided
/// Jacobi: right rotations orthogonalize column pairs, and the final
/// column norms are the singular values. Unlike the Gram-matrix route
/// this keeps absolute errors at machine scale, so exactly-zero
/// singular values do not resurface as sqrt(epsilon) noise.
fn singular_values(mut a: Mat4) -> [f64; 4] {
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..4 {
            for q in (p + 1)..4 {
                let mut hpq = Complex64::new(0.0, 0.0);
                let mut hpp = 0.0_f64;
                let mut hqq = 0.0_f64;
                for row in &a {
                    hpq += row[p].conj() * row[q];
                    hpp += row[p].norm_sqr();
                    hqq += row[q].norm_sqr();
                }
                let mag = hpq.norm();
                if mag <= 1e-15 * (hpp * hqq).sqrt().max(1e-300) {
                    continue;
                }
                rotated = true;
                let phase = hpq / mag;
                let d = (hqq - hpp) / (2.0 * mag);
                let t = if d == 0.0 {
                    1.0
                } else {
                    d.signum() / (d.abs() + (d * d + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let su = t * c * phase;
                for row in a.iter_mut() {
                    let ap = row[p];
                    let aq = row[q];
                    row[p] = c * ap - su.conj() * aq;
                    row[q] = su * ap + c * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = [0.0_f64; 4];
    for (j, sj) in s.iter_mut().enumerate() {
        *sj = a.iter().map(|row| row[j].norm_sqr()).sum::<f64>().sqrt();
    }
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Concurrence of an arbitrary two-qubit density matrix: the singular
/// values s_i (descending) of sqrt(rho) (sigma_y x sigma_y) conj(sqrt(rho))
/// give C = max(0, s1 - s2 - s3 - s4). Validates physicality first.
pub fn wootters_concurrence(rho: &Mat4) -> Result<f64> {
    let mut trace = 0.0;
    for i in 0..4 {
        trace += rho[i][i].re;
        if rho[i][i].im.abs() > 1e-9 {
            return Err(Error::InvalidState(
                "density matrix has a complex diagonal".into(),
            ));
        }
        for j in 0..4 {
            if (rho[i][j] - rho[j][i].conj()).norm() > 1e-9 {
                return Err(Error::InvalidState(
                    "density matrix is not Hermitian".into(),
                ));
            }
        }
    }
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "density matrix trace is {trace}, expected 1"
        )));
    }
    let (evals, vecs) = jacobi_hermitian(*rho);
    if evals.iter().any(|&l| l < -1e-9) {
        return Err(Error::InvalidState(
            "density matrix is not positive semidefinite".into(),
        ));
    }
    // sqrt(rho) = U sqrt(D) U^dagger.
    let zero = Complex64::new(0.0, 0.0);
    let mut sd = [[zero; 4]; 4];
    for (i, row) in sd.iter_mut().enumerate() {
        row[i] = Complex64::new(evals[i].max(0.0).sqrt(), 0.0);
    }
    let h = mat_mul(&mat_mul(&vecs, &sd), &mat_adjoint(&vecs));
    // A = sqrt(rho) Y conj(sqrt(rho)).
    let mut y = [[zero; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            y[i][j] = Complex64::new(Y4[i][j], 0.0);
        }
    }
    let mut hc = h;
    for row in hc.iter_mut() {
        for e in row.iter_mut() {
            *e = e.conj();
        }
    }
    let a = mat_mul(&mat_mul(&h, &y), &hc);
    let s = singular_values(a);
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}
