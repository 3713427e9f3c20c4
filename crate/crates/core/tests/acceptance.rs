//! Acceptance suite: one line per criterion, `PASS` or `FAIL` with the
//! measured value. Runs without the libtest harness so every line shows up in
//! plain `cargo test` output; exits nonzero if any criterion fails.
//!
//! The checks are computed here from the public API, independently of the
//! `validate` subcommand, which is exercised by criterion 12 and the CLI tests.

use std::process::Command;

use num_complex::Complex64;
use qdcavity::closed_form::{intensities_case1, intensities_case2, Form};
use qdcavity::dark_bright::{
    chi_closed_case1, dark_fraction, db_steady_case1, db_steady_case2, to_dark_bright, DarkBrightState,
};
use qdcavity::model::{params_from_cooperativities, validate};
use qdcavity::steady_state::{build_drift, integrate_sampled, solve_steady, ModeState};
use qdcavity::sweep::{figure_preset, find_peak, run_figure, Format, SweepTable, FIGURE_IDS};
use qdcavity::{Cooperativities, CouplingCase, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn report(id: u8, name: &str, passed: bool, detail: String) -> bool {
    println!("{} criterion {id:02} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn log_uniform(r: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(r.random_range(lo.log10()..hi.log10()))
}

fn point(c: Cooperativities, base: SystemParams) -> SystemParams {
    params_from_cooperativities(&c, &base).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn oracle(p: &SystemParams, case: CouplingCase) -> ModeState {
    solve_steady(&build_drift(p, case).unwrap()).unwrap()
}

fn oracle_db(p: &SystemParams, case: CouplingCase) -> DarkBrightState {
    let st = oracle(p, case);
    to_dark_bright(st.a1, st.a2, p.g1, p.g2).unwrap()
}

fn series(id: &str) -> Vec<(f64, SweepTable)> {
    run_figure(&figure_preset(id).unwrap()).unwrap().series
}

fn criterion_01_oracle_equivalence_intensities() -> bool {
    let mut r = rng(101);
    let draws = 1000;
    let mut worst: f64 = 0.0;
    for case in [CouplingCase::MechOnCavity1, CouplingCase::MechOnCavity2] {
        for _ in 0..draws {
            let d1 = log_uniform(&mut r, 1e-2, 1e2);
            let d2 = log_uniform(&mut r, 1e-2, 1e2);
            let c = log_uniform(&mut r, 1e-2, 1e2);
            let det = r.random_range(-3.0..3.0);
            let (coops, base) = match case {
                CouplingCase::MechOnCavity1 => {
                    (Cooperativities { d1, d2, c1: c, c2: 0.0 }, SystemParams { delta2: det, ..Default::default() })
                }
                _ => (Cooperativities { d1, d2, c1: 0.0, c2: c }, SystemParams { delta1: det, ..Default::default() }),
            };
            let p = point(coops, base);
            let closed = match case {
                CouplingCase::MechOnCavity1 => intensities_case1(&p, Form::Corrected).unwrap(),
                _ => intensities_case2(&p, Form::Corrected).unwrap(),
            };
            assert!(closed.regime.is_exact());
            let st = oracle(&p, case);
            worst = worst.max(rel(closed.value.i1, st.a1.norm_sqr())).max(rel(closed.value.i2, st.a2.norm_sqr()));
        }
    }
    report(
        1,
        "oracle equivalence (intensities)",
        worst <= 1e-9,
        format!("{draws} draws per case, max relative error {worst:.3e} (tol 1e-9)"),
    )
}

fn criterion_02_integrator_convergence() -> bool {
    let mut r = rng(102);
    let draws = 50;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let c = Cooperativities {
            d1: log_uniform(&mut r, 1e-2, 1e2),
            d2: log_uniform(&mut r, 1e-2, 1e2),
            c1: log_uniform(&mut r, 1e-2, 1e2),
            c2: log_uniform(&mut r, 1e-2, 1e2),
        };
        let base = SystemParams {
            delta1: r.random_range(-1.0..1.0),
            delta2: r.random_range(-1.0..1.0),
            delta_d: r.random_range(-1.0..1.0),
            ..Default::default()
        };
        let p = point(c, base);
        let sys = build_drift(&p, CouplingCase::General).unwrap();
        let exact = solve_steady(&sys).unwrap();
        let traj = integrate_sampled(&sys, ModeState::zero(), 50.0 / p.gamma_m, sys.max_step(), usize::MAX).unwrap();
        let end = traj.last().unwrap().1.to_array();
        let ex = exact.to_array();
        let err = (0..4).map(|i| (end[i] - ex[i]).norm()).fold(0.0, f64::max);
        worst = worst.max(err / exact.inf_norm());
    }
    report(
        2,
        "integrator convergence",
        worst <= 1e-6,
        format!("{draws} draws at t_end = 50/gamma_m, max relative error {worst:.3e} (tol 1e-6)"),
    )
}

fn criterion_03_stability_invariant() -> bool {
    let mut r = rng(103);
    let draws = 1000;
    let (mut defect, mut margin) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..draws {
        let kappa1 = log_uniform(&mut r, 0.1, 10.0);
        let kappa2 = log_uniform(&mut r, 0.1, 10.0);
        let p = SystemParams {
            kappa1,
            kappa2,
            kappa1_ext: kappa1 * r.random::<f64>(),
            kappa2_ext: kappa2 * r.random::<f64>(),
            gamma_qd: log_uniform(&mut r, 1e-2, 10.0),
            gamma_m: log_uniform(&mut r, 1e-4, 1.0),
            omega_m: r.random_range(0.0..1.0),
            delta1: r.random_range(-5.0..5.0),
            delta2: r.random_range(-5.0..5.0),
            delta_d: r.random_range(-5.0..5.0),
            g1: r.random_range(0.0..5.0),
            g2: r.random_range(0.0..5.0),
            om1: r.random_range(0.0..5.0),
            om2: r.random_range(0.0..5.0),
            a_in: Complex64::new(1.0, 0.0),
        };
        assert!(validate(&p).is_empty());
        let sys = build_drift(&p, CouplingCase::General).unwrap();
        defect = defect.max(sys.hermitian_defect());
        let min = sys.dampings.iter().copied().fold(f64::INFINITY, f64::min);
        margin = margin.max(sys.spectral_abscissa() + min / 2.0);
    }
    report(
        3,
        "stability invariant",
        defect <= 1e-15 && margin <= 1e-12,
        format!("{draws} draws, max |m + m^H + diag| = {defect:.3e} (tol 1e-15), max abscissa + min/2 = {margin:.3e} (tol 1e-12)"),
    )
}

fn criterion_04_emission_peak() -> bool {
    let s = series("fig2a");
    let (_, table) = s.iter().find(|(c2, _)| *c2 == 1.0).unwrap();
    let peak = find_peak(table, "p2").unwrap();
    let passed = matches!(peak, Some((x, _)) if (x - 3.0).abs() <= 0.5);
    report(4, "fig2a p2 interior maximum at D2 = 3.0 +- 0.5", passed, format!("peak {peak:?}"))
}

fn criterion_05_emission_decreases_with_c2() -> bool {
    let s = series("fig2b");
    let lo = &s.iter().find(|(c, _)| *c == 1.0).unwrap().1;
    let hi = &s.iter().find(|(c, _)| *c == 10.0).unwrap().1;
    let xs = lo.xs();
    let mut violations = Vec::new();
    let mut equal_at_zero = true;
    for col in ["p1", "p2"] {
        let (a, b) = (lo.column(col).unwrap(), hi.column(col).unwrap());
        for k in 0..xs.len() {
            if xs[k] == 0.0 {
                // mode 2 is decoupled from the dot, so C2 has no effect here
                equal_at_zero &= a[k] == b[k];
            } else if !(b[k] < a[k]) {
                violations.push(format!("{col} at D2 = {}", xs[k]));
            }
        }
    }
    report(
        5,
        "fig2b raising C2 from 1 to 10 lowers p1 and p2",
        violations.is_empty() && equal_at_zero,
        format!("{} grid points checked per column, violations {violations:?}, equal at D2 = 0: {equal_at_zero}", xs.len()),
    )
}

fn criterion_06_efficiency_peak() -> bool {
    let mut parts = Vec::new();
    let mut passed = true;
    for (c2, table) in series("fig4a") {
        let peak = find_peak(&table, "eta").unwrap();
        passed &= matches!(peak, Some((x, _)) if (x - 4.3).abs() <= 0.5);
        let in_range = table
            .xs()
            .iter()
            .zip(table.column("eta").unwrap())
            .filter(|(x, _)| **x > 0.0)
            .all(|(_, e)| e > 0.0 && e < 1.0);
        passed &= in_range;
        parts.push(format!("C2 = {c2}: argmax {peak:?}, eta in (0,1) for D2 > 0: {in_range}"));
    }
    report(6, "fig4a eta argmax at D2 = 4.3 +- 0.5", passed, parts.join("; "))
}

fn criterion_07_chi_invariant_under_c1() -> bool {
    let grid = [0.5, 3.5, 6.5];
    let (mut spread, mut err) = (0.0f64, 0.0f64);
    for d1 in grid {
        for d2 in grid {
            let chis: Vec<f64> = [0.0, 1.0, 10.0, 100.0]
                .iter()
                .map(|&c1| {
                    let p = point(Cooperativities { d1, d2, c1, c2: 0.0 }, SystemParams::default());
                    dark_fraction(&oracle_db(&p, CouplingCase::MechOnCavity1)).unwrap()
                })
                .collect();
            let max = chis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = chis.iter().copied().fold(f64::INFINITY, f64::min);
            spread = spread.max(max - min);
            let closed = chi_closed_case1(d1, d2).unwrap();
            err = chis.iter().map(|c| (c - closed).abs()).fold(err, f64::max);
        }
    }
    report(
        7,
        "case 1 chi independent of C1",
        spread < 1e-10 && err <= 1e-9,
        format!("max spread {spread:.3e} (tol 1e-10), max |chi - closed form| {err:.3e} (tol 1e-9)"),
    )
}

fn criterion_08_no_mechanics_reduction() -> bool {
    let mut r = rng(108);
    let mut worst: f64 = 0.0;
    let draws = 200;
    for _ in 0..draws {
        let c = Cooperativities {
            d1: log_uniform(&mut r, 1e-2, 1e2),
            d2: log_uniform(&mut r, 1e-2, 1e2),
            c1: 0.0,
            c2: 0.0,
        };
        let p = point(c, SystemParams::default());
        let (s1, _) = db_steady_case1(&p).unwrap();
        let (s2, _) = db_steady_case2(&p).unwrap();
        let o = oracle_db(&p, CouplingCase::MechOnCavity1);
        let scale = o.a_b.norm().max(o.a_d.norm());
        for (x, y) in [(s1, s2), (s1, o), (s2, o)] {
            worst = worst.max((x.a_b - y.a_b).norm() / scale).max((x.a_d - y.a_d).norm() / scale);
        }
    }
    report(
        8,
        "C = 0 reduction of both dark/bright solutions",
        worst <= 1e-12,
        format!("{draws} draws, max pairwise deviation {worst:.3e} relative to the largest amplitude (tol 1e-12)"),
    )
}

fn criterion_09_dark_bright_unitarity() -> bool {
    let mut r = rng(109);
    let draws = 1000;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let a1 = Complex64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let a2 = Complex64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let (g1, g2) = (log_uniform(&mut r, 1e-3, 10.0), log_uniform(&mut r, 1e-3, 10.0));
        let db = to_dark_bright(a1, a2, g1, g2).unwrap();
        let total = a1.norm_sqr() + a2.norm_sqr();
        worst = worst.max(rel(db.a_b.norm_sqr() + db.a_d.norm_sqr(), total));
    }
    report(9, "dark/bright unitarity", worst <= 1e-12, format!("{draws} states, max relative error {worst:.3e} (tol 1e-12)"))
}

fn criterion_10_dark_mode_limit() -> bool {
    let mut parts = Vec::new();
    let mut passed = true;
    for id in ["fig5a", "fig5b", "fig5c", "fig5d"] {
        for (c, table) in series(id) {
            let xs = table.xs();
            let chi = table.column("chi_numeric").unwrap();
            let end = *chi.last().unwrap();
            let monotone = (1..xs.len()).filter(|&k| xs[k - 1] >= 5.0).all(|k| chi[k] >= chi[k - 1]);
            passed &= end >= 0.95 && monotone;
            parts.push(format!("{id} C = {c}: chi(10) = {end:.5}, non-decreasing on [5,10]: {monotone}"));
        }
    }
    report(10, "dark-mode limit", passed, parts.join("; "))
}

fn criterion_11_ratio_law() -> bool {
    let mut r = rng(111);
    let draws = 100;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let d1 = log_uniform(&mut r, 1e-2, 1e2);
        let d2 = log_uniform(&mut r, 1e-2, 1e2);
        let c1 = log_uniform(&mut r, 1e-2, 1e2);
        let omega_m = log_uniform(&mut r, 1e-4, 1.0);
        let p = point(Cooperativities { d1, d2, c1, c2: 0.0 }, SystemParams { omega_m, ..Default::default() });
        let db = oracle_db(&p, CouplingCase::MechOnCavity1);
        let expected = (d2 / d1).sqrt() * (1.0 + d1 + d2);
        worst = worst.max((db.a_d / db.a_b - expected).norm() / expected);
    }
    report(11, "case-1 ratio law", worst <= 1e-9, format!("{draws} draws, max relative error {worst:.3e} (tol 1e-9)"))
}

fn criterion_12_determinism() -> bool {
    let mut mismatched = Vec::new();
    for id in FIGURE_IDS {
        let preset = figure_preset(id).unwrap();
        let (a, b) = (run_figure(&preset).unwrap(), run_figure(&preset).unwrap());
        for fmt in [Format::Csv, Format::Json] {
            if a.to_bytes(fmt) != b.to_bytes(fmt) {
                mismatched.push(format!("{id} {fmt:?}"));
            }
        }
    }

    // Same property through the binary: two runs, two files, identical bytes.
    let dir = tempfile::tempdir().unwrap();
    for id in ["fig2a", "fig5c"] {
        let files: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let path = dir.path().join(format!("{id}-{k}.csv"));
                let status = Command::new(env!("CARGO_BIN_EXE_qdcavity"))
                    .args(["figure", id, "--output"])
                    .arg(&path)
                    .status()
                    .unwrap();
                assert!(status.success());
                std::fs::read(&path).unwrap()
            })
            .collect();
        if files[0] != files[1] || files[0].is_empty() {
            mismatched.push(format!("{id} via binary"));
        }
    }
    report(
        12,
        "determinism",
        mismatched.is_empty(),
        format!("{} figures x 2 formats in-process plus 2 binary reruns, mismatches {mismatched:?}", FIGURE_IDS.len()),
    )
}

fn main() {
    let criteria: [fn() -> bool; 12] = [
        criterion_01_oracle_equivalence_intensities,
        criterion_02_integrator_convergence,
        criterion_03_stability_invariant,
        criterion_04_emission_peak,
        criterion_05_emission_decreases_with_c2,
        criterion_06_efficiency_peak,
        criterion_07_chi_invariant_under_c1,
        criterion_08_no_mechanics_reduction,
        criterion_09_dark_bright_unitarity,
        criterion_10_dark_mode_limit,
        criterion_11_ratio_law,
        criterion_12_determinism,
    ];
    let mut failed = 0;
    for (k, f) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(true) => {}
            Ok(false) => failed += 1,
            Err(_) => {
                println!("FAIL criterion {:02}: panicked", k + 1);
                failed += 1;
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
