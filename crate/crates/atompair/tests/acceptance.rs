//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible under --nocapture) before asserting.

use atompair::coupling::{mu, mu_nodes, DipoleGeometry};
use atompair::disentanglement::{phase_condition, td_numeric, td_series, FtdKind, TD_MOMENT_TOL};
use atompair::distinguishability::{check, dispersed_spread, quartic_condition, PhysicalSpecies};
use atompair::dynamics::{
    snapshot, snapshot_from_moments, trajectory, wootters_concurrence, z_cumulant, z_exact,
    ElectronicPreparation, EvolutionMode,
};
use atompair::ensemble::{
    moments, moments_best_effort, moments_mc, CouplingMoments, GeometryConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

fn report(n: usize, desc: &str, pass: bool) {
    println!(
        "criterion {n}: {} - {desc}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {desc}");
}

/// Random normalized single-excitation preparation.
fn random_prep(rng: &mut ChaCha8Rng) -> ElectronicPreparation {
    loop {
        let v: [f64; 4] = [
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        ];
        let n = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if n < 1e-6 {
            continue;
        }
        let p = ElectronicPreparation::new(
            Complex64::new(v[0] / n, v[1] / n),
            Complex64::new(v[2] / n, v[3] / n),
        )
        .expect("normalized by construction");
        return p;
    }
}

fn prep_with_ratio(ratio: f64, phi: f64) -> ElectronicPreparation {
    let c = 1.0 / (1.0 + ratio * ratio).sqrt();
    ElectronicPreparation::from_collective(
        Complex64::from_polar(ratio * c, phi),
        Complex64::new(c, 0.0),
    )
    .expect("unit norm by construction")
}

#[test]
fn criterion_01_small_argument_limit() {
    let mut worst = 0.0f64;
    for &vs in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let g = DipoleGeometry::new(1e-6, vs).unwrap();
        worst = worst.max((mu(&g) - 1.0).abs());
    }
    report(
        1,
        "collective decay profile tends to 1 at vanishing separation (error < 1e-10)",
        worst < 1e-10,
    );
}

#[test]
fn criterion_02_far_field_no_disentanglement() {
    let g = GeometryConfig::new(100.0 * PI, TAU, FRAC_PI_2).unwrap();
    let m = moments(&g, 1e-6).unwrap();
    let mut pass = m.mu_bar.abs() < 1e-3 && m.nu_bar.abs() < 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let preps: Vec<ElectronicPreparation> = (0..20).map(|_| random_prep(&mut rng)).collect();
    for p in &preps {
        let r = td_numeric(p, &g, (1e-3, 0.3), 1e-9, EvolutionMode::Cumulant).unwrap();
        pass &= r.kind == FtdKind::None && r.times.is_empty();
    }
    // A slice of the same preps through the full packet average.
    for p in preps.iter().take(2) {
        let r = td_numeric(p, &g, (1e-3, 0.3), 1e-9, EvolutionMode::Exact).unwrap();
        pass &= r.kind == FtdKind::None && r.times.is_empty();
    }
    report(
        2,
        "far separation (x0 = 100 pi, dx0 = 2 pi): tiny averaged couplings and no \
         coherence zero in (0, 0.3] for 20 random preparations",
        pass,
    );
}

#[test]
fn criterion_03_quadrature_matches_monte_carlo() {
    let mut pass = true;
    let mut idx = 0u64;
    let node = mu_nodes(1.0, 0.5, 5.0)[0];
    // nu^2 integrates like 1/x^4 toward the origin, so for packets with
    // x0/dx0 below about 8 the spread of nu is dominated by the region
    // just above the short-range cutoff: its value is an artifact of the
    // cutoff radius, sampling never visits the region, and the grid
    // reports nonconvergence. The spread comparison therefore runs on
    // packets whose origin weight is negligible (exp(-50) and below);
    // the bounded mu moments and the mean of nu (log-integrable tail)
    // are compared on the broad packets as well.
    for &x0 in &[FRAC_PI_2, PI, 1.5 * PI, TAU, node] {
        for &frac in &[0.05, 0.1, 0.2] {
            for &th in &[FRAC_PI_2, 1.0] {
                let g = GeometryConfig::new(x0, frac * x0, th).unwrap();
                let q = moments_best_effort(&g, 1e-6).unwrap();
                let mc = moments_mc(&g, 1_000_000, 42 + idx);
                idx += 1;
                let mut pairs = vec![
                    (q.mu_bar, mc.mu_bar, mc.err_mu_bar),
                    (q.d_mu, mc.d_mu, mc.err_d_mu),
                    (q.nu_bar, mc.nu_bar, mc.err_nu_bar),
                ];
                if frac <= 0.1 {
                    pairs.push((q.d_nu, mc.d_nu, mc.err_d_nu));
                }
                for (quad, sampled, se) in pairs {
                    pass &= (quad - sampled).abs() <= 3.0 * se;
                }
            }
        }
    }
    report(
        3,
        "packet-averaged moments from quadrature agree with seeded Monte-Carlo \
         (1e6 samples) within 3 standard errors on 30 configurations (spread of \
         nu compared where the short-range cutoff region carries no weight)",
        pass,
    );
}

#[test]
fn criterion_04_cumulant_validity_and_order() {
    let preps = [
        ElectronicPreparation::balanced_with_phase(0.0),
        ElectronicPreparation::balanced_with_phase(FRAC_PI_4),
        ElectronicPreparation::balanced_with_phase(FRAC_PI_2),
        prep_with_ratio(2.0, 1.0),
        prep_with_ratio(0.5, 1.0),
    ];
    let mut pass = true;
    for &x0 in &[FRAC_PI_2, PI, 1.5 * PI, TAU, 3.0 * PI] {
        let g = GeometryConfig::new(x0, 0.15 * x0, FRAC_PI_2).unwrap();
        let m = moments(&g, 1e-9).unwrap();
        for p in &preps {
            for &tau in &[0.025, 0.05, 0.1] {
                let ze = z_exact(p, &g, tau, 1e-9).unwrap();
                let zc = z_cumulant(p, &m, tau);
                let rel = (zc - ze).norm() / ze.norm().max(1e-6);
                pass &= rel < 1e-2;
            }
        }
    }
    // Empirical error order on a representative configuration: the
    // omitted terms start at the third cumulant, so halving tau should
    // cut the defect by at least ~8x (log-log slope >= 2.7).
    let g = GeometryConfig::new(PI, 0.15 * PI, FRAC_PI_2).unwrap();
    let m = moments(&g, 1e-9).unwrap();
    let p = prep_with_ratio(2.0, 1.0);
    let taus = [0.025, 0.05, 0.1, 0.2];
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .map(|&t| {
            let err = (z_cumulant(&p, &m, t) - z_exact(&p, &g, t, 1e-9).unwrap()).norm();
            (t.ln(), err.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    pass &= slope >= 2.7;
    report(
        4,
        "short-time closed form within 1e-2 of the packet average for tau <= 0.1 \
         on a 5x5 (x0, preparation) grid; defect shrinks at least cubically in tau",
        pass,
    );
}

#[test]
fn criterion_05_closed_form_matches_numeric_single_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut accepted = 0usize;
    let mut draws = 0usize;
    let mut pass = true;
    while accepted < 50 && draws < 500 {
        draws += 1;
        let x0 = 1.5 + 3.0 * rng.gen::<f64>();
        let dx0 = 0.1 + 0.25 * rng.gen::<f64>();
        let th = 0.3 + (FRAC_PI_2 - 0.3) * rng.gen::<f64>();
        let g = GeometryConfig::new(x0, dx0, th).unwrap();
        let m = moments(&g, TD_MOMENT_TOL).unwrap();
        if m.mu_bar.abs() <= 0.05 {
            continue;
        }
        accepted += 1;
        // Choose the crossing time first, then the amplitude ratio that
        // produces it; the compensating phase comes from the library.
        let td_want = 0.2 + 1.8 * rng.gen::<f64>();
        let ratio = (2.0 * m.mu_bar * td_want).exp();
        let trial = prep_with_ratio(ratio, 0.0);
        let phases = phase_condition(&trial, &m).unwrap();
        let p = prep_with_ratio(ratio, phases[0]);
        let r = td_numeric(&p, &g, (0.01, 3.0), 1e-9, EvolutionMode::Cumulant).unwrap();
        pass &= r.kind == FtdKind::Single && r.times.len() == 1;
        if let Some(&t) = r.times.first() {
            pass &= (t - td_want).abs() < 1e-8;
        }
        // Entanglement revives on both sides of the crossing.
        for &t in &[td_want - 1e-3, td_want + 1e-3] {
            pass &= snapshot_from_moments(&p, &m, t).unwrap().concurrence > 0.0;
        }
    }
    pass &= accepted == 50;
    report(
        5,
        "on 50 random configurations with a phase-matched preparation the numeric \
         search finds exactly the predicted single vanishing time (within 1e-8), \
         with revival on both sides",
        pass,
    );
}

#[test]
fn criterion_06_node_series_is_equidistant() {
    let node = mu_nodes(1.0, 0.5, 5.0)[0];
    let g = GeometryConfig::new(node, 0.5, FRAC_PI_2).unwrap();
    let p = ElectronicPreparation::balanced_with_phase(FRAC_PI_4);
    let m = moments(&g, TD_MOMENT_TOL).unwrap();
    let r = td_numeric(&p, &g, (0.01, 30.0), 1e-9, EvolutionMode::Cumulant).unwrap();
    let mut pass = r.kind == FtdKind::Series && r.times.len() >= 3;
    let gap_want = PI / (2.0 * m.nu_bar.abs());
    for w in r.times.windows(2) {
        pass &= ((w[1] - w[0]) - gap_want).abs() / gap_want < 1e-6;
    }
    let series = td_series(&p, &m, 30.0).unwrap();
    pass &= series.times.len() == r.times.len();
    for (a, b) in series.times.iter().zip(&r.times) {
        pass &= (a - b).abs() < 1e-8;
    }
    report(
        6,
        "packet centered on the first node of the dissipative coupling: numeric \
         zeros are equidistant with gap pi/(2 nu_bar) and match the series formula",
        pass,
    );
}

#[test]
fn criterion_07_perfect_separability_when_both_means_vanish() {
    let p = ElectronicPreparation::balanced_with_phase(0.0);
    // The model statement: exactly vanishing mean couplings keep the
    // coherence at zero for every time.
    let ideal = CouplingMoments {
        mu_bar: 0.0,
        d_mu: 0.05,
        nu_bar: 0.0,
        d_nu: 0.05,
        err_mu_bar: 0.0,
        err_d_mu: 0.0,
        err_nu_bar: 0.0,
        err_d_nu: 0.0,
        weight_below_cutoff: 0.0,
        order: 0,
    };
    let mut pass = true;
    for k in 0..=300 {
        let tau = 30.0 * k as f64 / 300.0;
        pass &= z_cumulant(&p, &ideal, tau).norm() < 1e-12;
    }
    // A deep far-field packet realizes the same thing physically.
    let g = GeometryConfig::new(200.0 * PI, 2.5 * PI, FRAC_PI_2).unwrap();
    let m = moments(&g, 1e-6).unwrap();
    for k in 0..=300 {
        let tau = 30.0 * k as f64 / 300.0;
        pass &= z_cumulant(&p, &m, tau).norm() < 1e-12;
    }
    let taus: Vec<f64> = (0..=30).map(|k| k as f64).collect();
    for s in trajectory(&p, &g, &taus, 1e-6, EvolutionMode::Exact).unwrap() {
        pass &= s.z.norm() < 1e-12;
    }
    report(
        7,
        "vanishing mean couplings with the symmetric balanced preparation keep the \
         coherence below 1e-12 at every sampled time (ideal moments and deep far field)",
        pass,
    );
}

#[test]
fn criterion_08_density_matrix_physicality() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut pass = true;
    for gi in 0..50 {
        let x0 = 1.0 + 14.0 * rng.gen::<f64>();
        // The first half keeps the spread narrow enough for the full
        // packet average to converge; it hosts the exact-mode subset.
        let frac_hi = if gi < 25 { 0.15 } else { 0.25 };
        let dx0 = (0.05 + frac_hi * rng.gen::<f64>()) * x0;
        let th = 0.3 + (FRAC_PI_2 - 0.3) * rng.gen::<f64>();
        let g = GeometryConfig::new(x0, dx0, th).unwrap();
        let m = moments_best_effort(&g, 1e-6).unwrap();
        for si in 0..20 {
            let p = random_prep(&mut rng);
            let tau = 5.0 * rng.gen::<f64>();
            let s = if gi < 25 && si < 4 {
                snapshot(&p, &g, tau, 1e-6, EvolutionMode::Exact).unwrap()
            } else {
                snapshot_from_moments(&p, &m, tau).unwrap()
            };
            let trace = s.p_plus + s.p_minus + s.p_ground;
            pass &= trace == 1.0;
            pass &= (0.0..=1.0).contains(&s.p_plus) && (0.0..=1.0).contains(&s.p_minus);
            pass &= s.z.norm_sqr() <= s.p_plus * s.p_minus + 1e-9;
            let c = wootters_concurrence(&s.density_matrix()).unwrap();
            pass &= (c - 2.0 * s.z.norm().max(0.0)).abs() < 1e-10;
            let _ = gi;
        }
    }
    report(
        8,
        "1000 random states: unit trace bit-exactly, populations in [0,1], coherence \
         bounded by the population product, and the 4x4 concurrence equals 2|z|",
        pass,
    );
}

#[test]
fn criterion_09_distinguishability_algebra() {
    let s = PhysicalSpecies::rb87_d2();
    let l = s.dispersion_length();
    let mut pass = true;
    // Minimum of the dispersed spread: value sqrt(2) l at dr0 = l. The
    // argmin itself is certified by stationarity plus a global scan
    // (the function is too flat near l to localize the argmin to 1e-12).
    pass &= (dispersed_spread(&s, l) - 2f64.sqrt() * l).abs() / l < 1e-12;
    pass &= dispersed_spread(&s, l * (1.0 + 1e-6)) >= dispersed_spread(&s, l);
    pass &= dispersed_spread(&s, l * (1.0 - 1e-6)) >= dispersed_spread(&s, l);
    let f_min = dispersed_spread(&s, l);
    for k in 0..=4000 {
        let dr0 = l * 10f64.powf(-2.0 + 4.0 * k as f64 / 4000.0);
        pass &= dispersed_spread(&s, dr0) >= f_min * (1.0 - 1e-12);
    }
    // Quartic roots against the quadratic-formula oracle, with the small
    // root taken from the product of roots to dodge the cancellation in
    // the textbook form.
    let r0 = 50.0 * l;
    let disc = (r0.powi(4) - 4.0 * l.powi(4)).sqrt();
    let u_hi = (r0 * r0 + disc) / 2.0;
    let roots_oracle = [(l.powi(4) / u_hi).sqrt(), u_hi.sqrt()];
    let bisect = |mut a: f64, mut b: f64| -> f64 {
        let fa = quartic_condition(&s, r0, a);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (quartic_condition(&s, r0, mid) > 0.0) == (fa > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let lo_root = bisect(1e-3 * l, r0 / 2f64.sqrt());
    let hi_root = bisect(r0 / 2f64.sqrt(), r0);
    pass &= (lo_root - roots_oracle[0]).abs() / roots_oracle[0] < 1e-12;
    pass &= (hi_root - roots_oracle[1]).abs() / roots_oracle[1] < 1e-12;
    // Verdict consistency across a grid: an overall pass requires the
    // quartic to be negative (spread fits strictly under the distance).
    let mut saw_ok = false;
    let mut saw_fail = false;
    for i in 0..20 {
        for j in 0..20 {
            let r0 = l * 10f64.powf(0.5 + 3.5 * i as f64 / 19.0);
            let dr0 = l * 10f64.powf(-1.5 + 3.5 * j as f64 / 19.0);
            let rep = check(&s, r0, dr0, 10.0);
            let q = quartic_condition(&s, r0, dr0);
            if rep.ok {
                saw_ok = true;
                pass &= q < 0.0;
            }
            if q >= 0.0 {
                saw_fail = true;
                pass &= !rep.ok;
            }
        }
    }
    pass &= saw_ok && saw_fail;
    report(
        9,
        "dispersed-spread minimum is (l, sqrt(2) l) to 1e-12, quartic roots match \
         the quadratic formula to 1e-12, and verdicts agree with the quartic sign \
         on a 20x20 grid",
        pass,
    );
}

#[test]
fn criterion_10_determinism_and_formats() {
    let bin = env!("CARGO_BIN_EXE_atompair");
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "schema_version": "1",
        "geometry": { "x0": TAU, "dx0": 0.25, "theta0": 1.0 },
        "preparation": {
            "psi_plus": { "re": 0.8, "im": 0.0 },
            "psi_minus": { "re": 0.0, "im": 0.6 }
        },
        "time_grid": { "tau_max": 2.0, "n_points": 81 },
        "mode": "both",
        "seed": 7,
        "td_window": { "lo": 0.01, "hi": 2.0 }
    });
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let run = |sub: &str| {
        std::process::Command::new(bin)
            .args([sub, "--config", path.to_str().unwrap()])
            .output()
            .expect("binary should run")
    };
    let t1 = run("trajectory");
    let t2 = run("trajectory");
    let f1 = run("find-td");
    let f2 = run("find-td");
    let mut pass = t1.status.success() && f1.status.success();
    pass &= t1.stdout == t2.stdout && f1.stdout == f2.stdout;
    // CSV format: header, newline-terminated, every numeric cell in
    // full-precision scientific notation.
    let text = String::from_utf8(t1.stdout).unwrap();
    pass &= text.starts_with("tau,z_r,z_i,abs_z,concurrence,p_plus,p_minus,p_ground,mode\n");
    pass &= text.ends_with('\n');
    for line in text.lines().skip(1) {
        for cell in line.split(',').take(8) {
            let unsigned = cell.strip_prefix('-').unwrap_or(cell);
            let ok = match unsigned.split_once('e') {
                Some((mantissa, exp)) => match mantissa.split_once('.') {
                    Some((lead, frac)) => lead.len() == 1 && frac.len() == 16 && !exp.is_empty(),
                    None => false,
                },
                None => false,
            };
            pass &= ok;
        }
    }
    // JSON output parses and carries the schema version.
    let rec: serde_json::Value = serde_json::from_slice(&f1.stdout).unwrap();
    pass &= rec["schema_version"] == "1";
    report(
        10,
        "repeated runs with one config and seed are byte-identical; CSV cells are \
         17-significant-digit scientific notation and JSON is schema-stamped",
        pass,
    );
}
