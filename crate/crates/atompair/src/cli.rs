//! Command-line front end: JSON run configuration in, CSV/JSON results
//! out.
//!
//! Subcommands: `trajectory` (time-resolved density-matrix rows),
//! `find-td` (closed-form and numeric disentanglement-time searches side
//! by side), `sweep` (one axis, one row per point),
//! `check-distinguishability` (species spread margins), and `nodes`
//! (zeros of the dissipative coupling). Exit codes: 0 success, 2
//! configuration or validation problem, 3 numerical failure.
//!
//! All floating-point output uses 17 significant digits so repeated runs
//! with the same configuration and seed are byte-identical.

use crate::coupling::mu_nodes;
use crate::disentanglement::{
    classify_regime, phase_condition, td_numeric, td_series, td_single, FtdKind, FtdResult,
    RegimeClassification, DEGENERACY_TOL, MAGNITUDE_EQ_TOL, TD_MOMENT_TOL,
};
use crate::distinguishability::{check, PhysicalSpecies, DEFAULT_STRICTNESS};
use crate::dynamics::{
    trajectory, DensityMatrixSnapshot, ElectronicPreparation, EvolutionMode, CUMULANT_VALIDITY_TAU,
};
use crate::ensemble::{moments, moments_best_effort, CouplingMoments, GeometryConfig};
use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// Version stamped into configs and every emitted JSON summary; the
/// schema shipped in `schemas/run_config.schema.json` carries the same
/// value.
pub const SCHEMA_VERSION: &str = "1";

// ---------------------------------------------------------------------
// Run configuration (strict: unknown fields are rejected).

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct CartesianAmp {
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarAmp {
    mag: f64,
    phase: f64,
}

/// One complex amplitude, written either as {re, im} or {mag, phase}.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum AmplitudeSpec {
    Cartesian(CartesianAmp),
    Polar(PolarAmp),
}

impl AmplitudeSpec {
    fn to_complex(self) -> Complex64 {
        match self {
            AmplitudeSpec::Cartesian(c) => Complex64::new(c.re, c.im),
            AmplitudeSpec::Polar(p) => Complex64::from_polar(p.mag, p.phase),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySpec {
    x0: f64,
    dx0: f64,
    theta0: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreparationSpec {
    psi_plus: AmplitudeSpec,
    psi_minus: AmplitudeSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeGridSpec {
    tau_max: f64,
    n_points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ToleranceSpec {
    /// Quadrature / moment convergence tolerance.
    quadrature: f64,
    /// Relative acceptance threshold for numeric zeros of |z|.
    td: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            quadrature: 1e-6,
            td: 1e-9,
        }
    }
}

/// Length unit of x0/dx0 (and of x0/dx0 sweep values): already
/// dimensionless (units of 1/k0), or in transition wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum UnitsSpec {
    #[default]
    Dimensionless,
    Lambda0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Exact,
    Cumulant,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SweepAxis {
    X0,
    Dx0,
    Theta0,
    Phi,
}

impl SweepAxis {
    fn label(self) -> &'static str {
        match self {
            SweepAxis::X0 => "x0",
            SweepAxis::Dx0 => "dx0",
            SweepAxis::Theta0 => "theta0",
            SweepAxis::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    axis: SweepAxis,
    start: f64,
    stop: f64,
    steps: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct TdWindowSpec {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesPreset {
    preset: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesExplicit {
    mass: f64,
    lambda0: f64,
    gamma0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SpeciesSpec {
    Preset(SpeciesPreset),
    Explicit(SpeciesExplicit),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceSpec {
    /// Mean interatomic distance, meters.
    r0: f64,
    /// Initial rms spread, meters.
    dr0: f64,
    #[serde(default = "default_strictness")]
    strictness: f64,
}

fn default_strictness() -> f64 {
    DEFAULT_STRICTNESS
}

/// One JSON document drives every subcommand; each command validates
/// the presence of the sections it needs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    schema_version: String,
    #[serde(default)]
    units: UnitsSpec,
    geometry: Option<GeometrySpec>,
    preparation: Option<PreparationSpec>,
    time_grid: Option<TimeGridSpec>,
    #[serde(default)]
    tolerances: ToleranceSpec,
    #[serde(default)]
    mode: RunMode,
    /// Reserved for seeded Monte-Carlo verification paths; echoed into
    /// summaries so that outputs are a pure function of (config, seed).
    #[serde(default)]
    seed: u64,
    /// Default output path; the --out flag overrides it.
    out: Option<String>,
    sweep: Option<SweepSpec>,
    td_window: Option<TdWindowSpec>,
    species: Option<SpeciesSpec>,
    distances: Option<DistanceSpec>,
}

impl RunConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("parse {}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Factor converting configured x0/dx0 values to dimensionless form.
    fn length_factor(&self) -> f64 {
        match self.units {
            UnitsSpec::Dimensionless => 1.0,
            UnitsSpec::Lambda0 => TAU,
        }
    }

    fn geometry(&self) -> Result<GeometryConfig> {
        let g = self
            .geometry
            .ok_or_else(|| Error::Config("missing \"geometry\" section".into()))?;
        let f = self.length_factor();
        GeometryConfig::new(g.x0 * f, g.dx0 * f, g.theta0)
            .map_err(|e| Error::Config(format!("geometry: {e}")))
    }

    fn preparation(&self) -> Result<ElectronicPreparation> {
        let p = self
            .preparation
            .ok_or_else(|| Error::Config("missing \"preparation\" section".into()))?;
        ElectronicPreparation::new(p.psi_plus.to_complex(), p.psi_minus.to_complex())
            .map_err(|e| Error::Config(format!("preparation: {e}")))
    }

    fn tau_grid(&self) -> Result<Vec<f64>> {
        let t = self
            .time_grid
            .ok_or_else(|| Error::Config("missing \"time_grid\" section".into()))?;
        if !(t.tau_max.is_finite() && t.tau_max > 0.0) {
            return Err(Error::Config(format!(
                "time_grid.tau_max must be finite and > 0, got {}",
                t.tau_max
            )));
        }
        if t.n_points < 2 {
            return Err(Error::Config(format!(
                "time_grid.n_points must be >= 2, got {}",
                t.n_points
            )));
        }
        let n = t.n_points;
        Ok((0..n)
            .map(|i| t.tau_max * i as f64 / (n - 1) as f64)
            .collect())
    }

    fn species(&self) -> Result<PhysicalSpecies> {
        let s = self
            .species
            .as_ref()
            .ok_or_else(|| Error::Config("missing \"species\" section".into()))?;
        match s {
            SpeciesSpec::Preset(p) => match p.preset.as_str() {
                "rb87_d2" => Ok(PhysicalSpecies::rb87_d2()),
                "cs133_d2" => Ok(PhysicalSpecies::cs133_d2()),
                other => Err(Error::Config(format!(
                    "unknown species preset {other:?} (known: rb87_d2, cs133_d2)"
                ))),
            },
            SpeciesSpec::Explicit(e) => PhysicalSpecies::new(e.mass, e.lambda0, e.gamma0)
                .map_err(|err| Error::Config(format!("species: {err}"))),
        }
    }

    fn distances(&self) -> Result<DistanceSpec> {
        let d = self
            .distances
            .ok_or_else(|| Error::Config("missing \"distances\" section".into()))?;
        for (name, v) in [("r0", d.r0), ("dr0", d.dr0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "distances.{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(d.strictness.is_finite() && d.strictness >= 1.0) {
            return Err(Error::Config(format!(
                "distances.strictness must be >= 1, got {}",
                d.strictness
            )));
        }
        Ok(d)
    }

    fn td_window(&self) -> Result<(f64, f64)> {
        if let Some(w) = self.td_window {
            if !(w.lo.is_finite() && w.hi.is_finite() && 0.0 < w.lo && w.lo < w.hi) {
                return Err(Error::Config(format!(
                    "td_window must satisfy 0 < lo < hi, got ({}, {})",
                    w.lo, w.hi
                )));
            }
            return Ok((w.lo, w.hi));
        }
        let hi = self.time_grid.map(|t| t.tau_max).unwrap_or(3.0);
        if !(hi.is_finite() && hi > 1e-3) {
            return Err(Error::Config(format!(
                "default search window needs tau_max > 1e-3, got {hi}"
            )));
        }
        Ok((1e-3, hi))
    }
}

// ---------------------------------------------------------------------
// Argument parsing.

#[derive(Parser)]
#[command(
    name = "atompair",
    version,
    about = "Collective decay and finite-time disentanglement of a vacuum-coupled \
             atom pair whose separation is a Gaussian wave packet"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when neither this nor the config sets one)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured evolution mode
    #[arg(long, value_enum)]
    mode: Option<RunMode>,
    /// Override the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override both configured tolerances (quadrature and zero
    /// acceptance)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct NodesArgs {
    /// Orientation factor sin^2(theta) in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    varsigma: f64,
    /// Lower end of the searched distance range
    #[arg(long, default_value_t = 0.5)]
    x_lo: f64,
    /// Upper end of the searched distance range
    #[arg(long, default_value_t = 25.0)]
    x_hi: f64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-resolved density-matrix trajectory as CSV plus a JSON summary
    Trajectory(RunArgs),
    /// Closed-form and numeric disentanglement-time search, side by side
    FindTd(RunArgs),
    /// Sweep one axis; one CSV row per sweep point
    Sweep(RunArgs),
    /// Distinguishability margins for a physical species
    CheckDistinguishability(RunArgs),
    /// Zeros of the dissipative coupling mu over a distance range
    Nodes(NodesArgs),
}

/// Entry point wired to the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) => 2,
                _ => 3,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Trajectory(a) => cmd_trajectory(&a),
        Command::FindTd(a) => cmd_find_td(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::CheckDistinguishability(a) => cmd_check_distinguishability(&a),
        Command::Nodes(a) => cmd_nodes(&a),
    }
}

// ---------------------------------------------------------------------
// Shared plumbing.

struct Loaded {
    cfg: RunConfig,
    out: Option<PathBuf>,
    quad_tol: f64,
    td_tol: f64,
    seed: u64,
    mode: RunMode,
}

fn load(args: &RunArgs) -> Result<Loaded> {
    let cfg = RunConfig::load(&args.config)?;
    for (name, v) in [
        ("quadrature", cfg.tolerances.quadrature),
        ("td", cfg.tolerances.td),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!(
                "tolerances.{name} must be finite and > 0, got {v}"
            )));
        }
    }
    if let Some(t) = args.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("--tol must be > 0, got {t}")));
        }
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    Ok(Loaded {
        quad_tol: args.tol.unwrap_or(cfg.tolerances.quadrature),
        td_tol: args.tol.unwrap_or(cfg.tolerances.td),
        seed: args.seed.unwrap_or(cfg.seed),
        mode: args.mode.unwrap_or(cfg.mode),
        out,
        cfg,
    })
}

fn evolution_modes(mode: RunMode) -> Vec<EvolutionMode> {
    match mode {
        RunMode::Exact => vec![EvolutionMode::Exact],
        RunMode::Cumulant => vec![EvolutionMode::Cumulant],
        RunMode::Both => vec![EvolutionMode::Exact, EvolutionMode::Cumulant],
    }
}

fn mode_label(m: EvolutionMode) -> &'static str {
    match m {
        EvolutionMode::Exact => "exact",
        EvolutionMode::Cumulant => "cumulant",
    }
}

fn kind_label(k: FtdKind) -> &'static str {
    match k {
        FtdKind::None => "none",
        FtdKind::Single => "single",
        FtdKind::Series => "series",
        FtdKind::Separable => "separable",
    }
}

fn write_text(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Io(format!("write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Summaries accompany a primary artifact: stdout when the artifact went
/// to a file, stderr when the artifact itself occupies stdout.
fn write_summary(primary_went_to_file: bool, summary: &serde_json::Value) {
    let text = format!("{:#}", summary);
    if primary_went_to_file {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn moments_json(m: &CouplingMoments) -> serde_json::Value {
    json!({
        "mu_bar": m.mu_bar,
        "d_mu": m.d_mu,
        "nu_bar": m.nu_bar,
        "d_nu": m.d_nu,
        "err_mu_bar": m.err_mu_bar,
        "err_d_mu": m.err_d_mu,
        "err_nu_bar": m.err_nu_bar,
        "err_d_nu": m.err_d_nu,
        "weight_below_cutoff": m.weight_below_cutoff,
        "order": m.order,
    })
}

fn regime_json(r: &RegimeClassification) -> serde_json::Value {
    json!({ "label": r.label.to_string(), "rationale": r.rationale })
}

fn ftd_json(r: &FtdResult) -> serde_json::Value {
    json!({
        "kind": kind_label(r.kind),
        "times": r.times,
        "phase_required": r.phase_required,
        "validity_limit": r.validity_limit,
        "flagged_times": r.flagged_times(),
    })
}

fn advisories(cfg_mode: RunMode, g: &GeometryConfig, tau_max: f64) -> Vec<String> {
    let mut notes = Vec::new();
    if g.spread_advisory() {
        notes.push(format!(
            "packet spread dx0 = {:.3} is not small against the mean distance x0 = {:.3}; \
             the scalar-distance average is a rough model there",
            g.dx0(),
            g.x0()
        ));
    }
    if cfg_mode != RunMode::Exact && tau_max > CUMULANT_VALIDITY_TAU {
        notes.push(format!(
            "cumulant rows beyond tau = {CUMULANT_VALIDITY_TAU} are outside the trusted \
             short-time window (tau_max = {tau_max})"
        ));
    }
    notes
}

// ---------------------------------------------------------------------
// trajectory

fn format_row(s: &DensityMatrixSnapshot) -> String {
    format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
        s.tau,
        s.z.re,
        s.z.im,
        s.z.norm(),
        s.concurrence,
        s.p_plus,
        s.p_minus,
        s.p_ground,
        mode_label(s.mode)
    )
}

const TRAJECTORY_HEADER: &str = "tau,z_r,z_i,abs_z,concurrence,p_plus,p_minus,p_ground,mode\n";

fn cmd_trajectory(args: &RunArgs) -> Result<()> {
    let l = load(args)?;
    let g = l.cfg.geometry()?;
    let prep = l.cfg.preparation()?;
    let grid = l.cfg.tau_grid()?;
    let tau_max = *grid.last().unwrap();
    for note in advisories(l.mode, &g, tau_max) {
        eprintln!("advisory: {note}");
    }
    let mut csv = String::from(TRAJECTORY_HEADER);
    let mut rows = 0usize;
    for mode in evolution_modes(l.mode) {
        let snaps = trajectory(&prep, &g, &grid, l.quad_tol, mode)?;
        rows += snaps.len();
        for s in &snaps {
            csv.push_str(&format_row(s));
        }
    }
    let m = moments(&g, l.quad_tol)?;
    let regime = classify_regime(&prep, &g, &m);
    write_text(&l.out, &csv)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "trajectory",
        "seed": l.seed,
        "rows": rows,
        "moments": moments_json(&m),
        "regime": regime_json(&regime),
        "advisories": advisories(l.mode, &g, tau_max),
    });
    write_summary(l.out.is_some(), &summary);
    Ok(())
}

// ---------------------------------------------------------------------
// find-td

/// Closed-form search: the single-crossing formula when the mean
/// dissipative coupling is nondegenerate, the equidistant series when it
/// vanishes with balanced amplitudes.
fn closed_form_search(
    prep: &ElectronicPreparation,
    m: &CouplingMoments,
    hi: f64,
) -> serde_json::Value {
    if m.mu_bar.abs() >= DEGENERACY_TOL {
        let single = match td_single(prep, m) {
            Ok(s) => s,
            Err(e) => {
                return json!({ "applicable": false, "note": e.to_string() });
            }
        };
        let phases = phase_condition(prep, m).unwrap_or_default();
        return json!({
            "applicable": true,
            "branch": "single",
            "kind": if single.is_some() { "single" } else { "none" },
            "times": single.map(|t| vec![t]).unwrap_or_default(),
            "compensating_phases": phases,
        });
    }
    let np = prep.phi_plus().norm();
    let nm = prep.phi_minus().norm();
    if (np - nm).abs() <= MAGNITUDE_EQ_TOL {
        return match td_series(prep, m, hi) {
            Ok(r) => json!({
                "applicable": true,
                "branch": "series",
                "kind": kind_label(r.kind),
                "times": r.times,
            }),
            Err(e) => json!({ "applicable": false, "note": e.to_string() }),
        };
    }
    json!({
        "applicable": false,
        "note": "degenerate mean dissipative coupling with unbalanced amplitudes: \
                 no closed form applies",
    })
}

fn agreement_json(closed: &serde_json::Value, numeric: &FtdResult) -> serde_json::Value {
    let closed_times: Vec<f64> = closed
        .get("times")
        .and_then(|v| v.as_array())
        .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        .unwrap_or_default();
    let comparable = !closed_times.is_empty() && closed_times.len() == numeric.times.len();
    let max_delta = if comparable {
        closed_times
            .iter()
            .zip(&numeric.times)
            .map(|(c, n)| (c - n).abs())
            .fold(0.0f64, f64::max)
    } else {
        f64::NAN
    };
    json!({
        "comparable": comparable,
        "max_delta": if max_delta.is_nan() { None } else { Some(max_delta) },
    })
}

fn cmd_find_td(args: &RunArgs) -> Result<()> {
    let l = load(args)?;
    let g = l.cfg.geometry()?;
    let prep = l.cfg.preparation()?;
    let window = l.cfg.td_window()?;
    // Closed forms use the same moment tolerance as the numeric search
    // so the two sides disagree only for numerical-method reasons.
    let m = moments(&g, TD_MOMENT_TOL)?;
    let regime = classify_regime(&prep, &g, &m);
    let closed = closed_form_search(&prep, &m, window.1);
    let mut numeric = serde_json::Map::new();
    let mut agreement = serde_json::Map::new();
    for mode in evolution_modes(l.mode) {
        let r = td_numeric(&prep, &g, window, l.td_tol, mode)?;
        agreement.insert(mode_label(mode).into(), agreement_json(&closed, &r));
        numeric.insert(mode_label(mode).into(), ftd_json(&r));
    }
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "find-td",
        "seed": l.seed,
        "window": { "lo": window.0, "hi": window.1 },
        "moments": moments_json(&m),
        "regime": regime_json(&regime),
        "closed_form": closed,
        "numeric": numeric,
        "agreement": agreement,
    });
    write_text(&l.out, &format!("{record:#}\n"))
}

// ---------------------------------------------------------------------
// sweep

const SWEEP_HEADER: &str = "axis,value,mu_bar,d_mu,nu_bar,d_nu,regime,td_times\n";

/// Closed-form disentanglement times for one sweep point (numeric search
/// is the find-td command's job; sweeps favor many cheap points).
fn sweep_times(prep: &ElectronicPreparation, m: &CouplingMoments, hi: f64) -> Vec<f64> {
    if m.mu_bar.abs() >= DEGENERACY_TOL {
        return td_single(prep, m)
            .ok()
            .flatten()
            .map(|t| vec![t])
            .unwrap_or_default();
    }
    let np = prep.phi_plus().norm();
    let nm = prep.phi_minus().norm();
    if (np - nm).abs() <= MAGNITUDE_EQ_TOL {
        if let Ok(r) = td_series(prep, m, hi) {
            return r.times;
        }
    }
    Vec::new()
}

fn cmd_sweep(args: &RunArgs) -> Result<()> {
    use rayon::prelude::*;
    let l = load(args)?;
    let sweep = l
        .cfg
        .sweep
        .ok_or_else(|| Error::Config("missing \"sweep\" section".into()))?;
    if sweep.steps == 0 {
        return Err(Error::Config("sweep.steps must be >= 1, got 0".into()));
    }
    if !(sweep.start.is_finite() && sweep.stop.is_finite()) {
        return Err(Error::Config(format!(
            "sweep range must be finite, got [{}, {}]",
            sweep.start, sweep.stop
        )));
    }
    let g0 = l.cfg.geometry()?;
    let prep0 = l.cfg.preparation()?;
    let hi = l.cfg.td_window()?.1;
    let factor = match sweep.axis {
        SweepAxis::X0 | SweepAxis::Dx0 => l.cfg.length_factor(),
        SweepAxis::Theta0 | SweepAxis::Phi => 1.0,
    };
    let values: Vec<f64> = if sweep.steps == 1 {
        vec![sweep.start]
    } else {
        (0..sweep.steps)
            .map(|i| sweep.start + (sweep.stop - sweep.start) * i as f64 / (sweep.steps - 1) as f64)
            .collect()
    };
    // Points run in parallel; rows are assembled in sweep order.
    let rows: Vec<String> = values
        .par_iter()
        .map(|&v| -> Result<String> {
            let scaled = v * factor;
            let (g, prep) = match sweep.axis {
                SweepAxis::X0 => (
                    GeometryConfig::new(scaled, g0.dx0(), g0.theta0())
                        .map_err(|e| Error::Config(format!("sweep x0 = {v}: {e}")))?,
                    prep0,
                ),
                SweepAxis::Dx0 => (
                    GeometryConfig::new(g0.x0(), scaled, g0.theta0())
                        .map_err(|e| Error::Config(format!("sweep dx0 = {v}: {e}")))?,
                    prep0,
                ),
                SweepAxis::Theta0 => (
                    GeometryConfig::new(g0.x0(), g0.dx0(), scaled)
                        .map_err(|e| Error::Config(format!("sweep theta0 = {v}: {e}")))?,
                    prep0,
                ),
                SweepAxis::Phi => {
                    // Keep the collective magnitudes, set the relative
                    // collective phase to the sweep value.
                    let p = ElectronicPreparation::from_collective(
                        Complex64::from_polar(prep0.phi_plus().norm(), scaled),
                        Complex64::new(prep0.phi_minus().norm(), 0.0),
                    )
                    .map_err(|e| Error::Config(format!("sweep phi = {v}: {e}")))?;
                    (g0, p)
                }
            };
            // Survey tool: points whose refinement gate cannot meet the
            // tolerance fall back to the cap-order grid instead of
            // aborting the whole sweep.
            let m = moments_best_effort(&g, l.quad_tol)?;
            let regime = classify_regime(&prep, &g, &m);
            let times = sweep_times(&prep, &m, hi);
            let joined = times
                .iter()
                .map(|t| format!("{t:.16e}"))
                .collect::<Vec<_>>()
                .join(";");
            Ok(format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                sweep.axis.label(),
                v,
                m.mu_bar,
                m.d_mu,
                m.nu_bar,
                m.d_nu,
                regime.label,
                joined
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    for row in rows {
        csv.push_str(&row);
    }
    write_text(&l.out, &csv)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "seed": l.seed,
        "axis": sweep.axis.label(),
        "points": values.len(),
    });
    write_summary(l.out.is_some(), &summary);
    Ok(())
}

// ---------------------------------------------------------------------
// check-distinguishability

fn cmd_check_distinguishability(args: &RunArgs) -> Result<()> {
    let l = load(args)?;
    let species = l.cfg.species()?;
    let d = l.cfg.distances()?;
    let rep = check(&species, d.r0, d.dr0, d.strictness);
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "check-distinguishability",
        "species": {
            "mass": species.mass(),
            "lambda0": species.lambda0(),
            "gamma0": species.gamma0(),
            "tau0": species.tau0(),
            "k0": species.k0(),
            "recoil_energy": species.recoil_energy(),
            "dispersion_length": species.dispersion_length(),
        },
        "inputs": { "r0": d.r0, "dr0": d.dr0, "strictness": d.strictness },
        "report": {
            "dr_t": rep.dr_t,
            "dr_min": rep.dr_min,
            "margin_lower": rep.margin_lower,
            "margin_upper": rep.margin_upper,
            "margin_dispersed": rep.margin_dispersed,
            "margin_distance": rep.margin_distance,
            "strictness": rep.strictness,
            "ok": rep.ok,
        },
    });
    write_text(&l.out, &format!("{record:#}\n"))
}

// ---------------------------------------------------------------------
// nodes

fn cmd_nodes(args: &NodesArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.varsigma) {
        return Err(Error::Config(format!(
            "--varsigma must lie in [0, 1], got {}",
            args.varsigma
        )));
    }
    if !(args.x_lo.is_finite() && args.x_hi.is_finite() && 0.0 < args.x_lo && args.x_lo < args.x_hi)
    {
        return Err(Error::Config(format!(
            "node range must satisfy 0 < x_lo < x_hi, got ({}, {})",
            args.x_lo, args.x_hi
        )));
    }
    let nodes = mu_nodes(args.varsigma, args.x_lo, args.x_hi);
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "nodes",
        "varsigma": args.varsigma,
        "x_lo": args.x_lo,
        "x_hi": args.x_hi,
        "nodes": nodes,
    });
    write_text(&args.out, &format!("{record:#}\n"))
}
