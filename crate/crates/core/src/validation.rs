//! Built-in self-check run by `qdcavity validate`.
//!
//! Each check reports a measured value against a tolerance. Random draws use
//! fixed ChaCha seeds so a report is reproducible bit for bit.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form::{self, Form};
use crate::dark_bright::{self, DarkBrightState};
use crate::error::Result;
use crate::model::{params_from_cooperativities, validate, Cooperativities, CouplingCase, SystemParams};
use crate::steady_state::{build_drift, integrate_sampled, solve_steady, ModeState};
use crate::sweep::{figure_preset, find_peak, run_figure, Format, FIGURE_IDS};

/// Which side of the tolerance a passing measurement lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `measured <= tolerance`
    Upper,
    /// `measured >= tolerance`
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(id: u8, name: &'static str, measured: f64, tolerance: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::Upper => measured <= tolerance,
            Bound::Lower => measured >= tolerance,
        };
        Self { id, name, measured, tolerance, bound, passed, detail: String::new() }
    }

    fn detail(mut self, d: String) -> Self {
        self.detail = d;
        self
    }

    /// Fails the check when a secondary condition does not hold.
    fn also(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::Upper => "<=",
            Bound::Lower => ">=",
        };
        write!(
            f,
            "[{}] {:02} {}: measured {:.3e} (need {op} {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Multiplies every upper-bound tolerance. Lower bounds are untouched.
    pub tolerance_scale: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { tolerance_scale: 1.0 }
    }
}

impl ValidationOptions {
    fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn coops(rng: &mut ChaCha8Rng, case: CouplingCase) -> Cooperativities {
    let mut c = Cooperativities {
        d1: log_uniform(rng, 1e-2, 1e2),
        d2: log_uniform(rng, 1e-2, 1e2),
        c1: log_uniform(rng, 1e-2, 1e2),
        c2: log_uniform(rng, 1e-2, 1e2),
    };
    match case {
        CouplingCase::MechOnCavity1 => c.c2 = 0.0,
        CouplingCase::MechOnCavity2 => c.c1 = 0.0,
        CouplingCase::General => {}
    }
    c
}

/// Arbitrary valid parameters, rates included.
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let kappa1 = log_uniform(rng, 0.1, 10.0);
    let kappa2 = log_uniform(rng, 0.1, 10.0);
    let p = SystemParams {
        kappa1,
        kappa2,
        kappa1_ext: kappa1 * rng.random::<f64>(),
        kappa2_ext: kappa2 * rng.random::<f64>(),
        gamma_qd: log_uniform(rng, 1e-2, 10.0),
        gamma_m: log_uniform(rng, 1e-4, 1.0),
        omega_m: rng.random_range(0.0..1.0),
        delta1: rng.random_range(-3.0..3.0),
        delta2: rng.random_range(-3.0..3.0),
        delta_d: rng.random_range(-3.0..3.0),
        g1: rng.random_range(0.0..3.0),
        g2: rng.random_range(0.0..3.0),
        om1: rng.random_range(0.0..3.0),
        om2: rng.random_range(0.0..3.0),
        a_in: Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
    };
    debug_assert!(validate(&p).is_empty());
    p
}

/// Closed-form intensities against the linear solve, both single-mirror cases.
pub fn oracle_intensities(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let draws = 1000;
    for case in [CouplingCase::MechOnCavity1, CouplingCase::MechOnCavity2] {
        for _ in 0..draws {
            let c = coops(&mut rng, case);
            let detuning = rng.random_range(-3.0..3.0);
            let base = match case {
                CouplingCase::MechOnCavity1 => SystemParams { delta2: detuning, ..Default::default() },
                _ => SystemParams { delta1: detuning, ..Default::default() },
            };
            let p = params_from_cooperativities(&c, &base)?;
            let closed = match case {
                CouplingCase::MechOnCavity1 => closed_form::intensities_case1(&p, Form::Corrected)?,
                _ => closed_form::intensities_case2(&p, Form::Corrected)?,
            };
            debug_assert!(closed.regime.is_exact());
            let st = solve_steady(&build_drift(&p, case)?)?;
            worst = worst.max(rel(closed.value.i1, st.a1.norm_sqr()));
            worst = worst.max(rel(closed.value.i2, st.a2.norm_sqr()));
        }
    }
    Ok(Check::new(1, "closed-form intensities match the linear solve", worst, opts.tol(1e-9), Bound::Upper)
        .detail(format!("{draws} draws per case, max relative error")))
}

/// RK4 endpoint at `t = 50/γ_m` against the direct solve.
pub fn integrator_convergence(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let draws = 50;
    for _ in 0..draws {
        let base = SystemParams {
            delta1: rng.random_range(-1.0..1.0),
            delta2: rng.random_range(-1.0..1.0),
            delta_d: rng.random_range(-1.0..1.0),
            ..Default::default()
        };
        let p = params_from_cooperativities(&coops(&mut rng, CouplingCase::General), &base)?;
        let sys = build_drift(&p, CouplingCase::General)?;
        let exact = solve_steady(&sys)?;
        let traj = integrate_sampled(&sys, ModeState::zero(), 50.0 / p.gamma_m, sys.max_step(), usize::MAX)?;
        let (_, end) = traj.last().expect("trajectory has an endpoint");
        let diff = ModeState::from_array(std::array::from_fn(|i| end.to_array()[i] - exact.to_array()[i]));
        worst = worst.max(diff.inf_norm() / exact.inf_norm());
    }
    Ok(Check::new(2, "RK4 endpoint converges to the steady state", worst, opts.tol(1e-6), Bound::Upper)
        .detail(format!("{draws} draws, t_end = 50/gamma_m, max relative error")))
}

/// Dissipative structure of the drift matrix and its Hurwitz margin.
pub fn stability(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut defect = 0.0f64;
    let mut margin = f64::NEG_INFINITY;
    let draws = 1000;
    for _ in 0..draws {
        let p = random_params(&mut rng);
        let sys = build_drift(&p, CouplingCase::General)?;
        defect = defect.max(sys.hermitian_defect());
        let min_damping = sys.dampings.iter().copied().fold(f64::INFINITY, f64::min);
        margin = margin.max(sys.spectral_abscissa() + min_damping / 2.0);
    }
    let margin_tol = opts.tol(1e-12);
    Ok(Check::new(3, "drift matrix is dissipative and Hurwitz", defect, opts.tol(1e-15), Bound::Upper)
        .also(margin <= margin_tol)
        .detail(format!("{draws} draws; max abscissa + min damping/2 = {margin:.3e} (need <= {margin_tol:.3e})")))
}

/// Interior maximum of mode-2 emission near `D₂ = 3` at `C₂ = 1`.
pub fn emission_peak(opts: &ValidationOptions) -> Result<Check> {
    let fig = run_figure(&figure_preset("fig2a")?)?;
    let table = fig.get(1.0).expect("fig2a has a C2 = 1 series");
    let peak = find_peak(table, "p2")?;
    let (measured, detail) = match peak {
        Some((x, y)) => ((x - 3.0).abs(), format!("p2 peaks at D2 = {x} (p2 = {y:.6})")),
        None => (f64::INFINITY, "p2 maximum on the boundary".to_string()),
    };
    Ok(Check::new(4, "fig2a: p2 peaks near D2 = 3 for C2 = 1", measured, opts.tol(0.5), Bound::Upper).detail(detail))
}

/// Raising `C₂` from 1 to 10 lowers both emissions.
///
/// At `D₂ = 0` mode 2 is cut off from the dot, both emissions are independent
/// of `C₂` and the two series coincide; that point is required to agree
/// instead of to drop.
pub fn emission_trend(opts: &ValidationOptions) -> Result<Check> {
    let fig = run_figure(&figure_preset("fig2b")?)?;
    let (lo, hi) = (fig.get(1.0).expect("C2 = 1"), fig.get(10.0).expect("C2 = 10"));
    let xs = lo.xs();
    let mut worst = f64::NEG_INFINITY;
    let mut at_zero = 0.0f64;
    for col in ["p1", "p2"] {
        let (a, b) = (lo.column(col)?, hi.column(col)?);
        for k in 0..xs.len() {
            if xs[k] == 0.0 {
                at_zero = at_zero.max((b[k] - a[k]).abs());
            } else {
                worst = worst.max((b[k] - a[k]) / a[k]);
            }
        }
    }
    let zero_tol = opts.tol(1e-12);
    // Strict decrease: the largest relative change must be negative.
    Ok(Check::new(5, "fig2b: C2 = 10 lowers p1 and p2 at every D2 > 0", worst, 0.0, Bound::Upper)
        .also(worst < 0.0 && at_zero <= zero_tol)
        .detail(format!("max relative change (p(C2=10) - p(C2=1))/p(C2=1); |difference| at D2 = 0 is {at_zero:.3e}")))
}

/// Efficiency maximum near `D₂ = 4.3`, on both `C₂` series.
pub fn efficiency_peak(opts: &ValidationOptions) -> Result<Check> {
    let fig = run_figure(&figure_preset("fig4a")?)?;
    let mut worst = 0.0f64;
    let mut bounded = true;
    let mut parts = Vec::new();
    for (c2, table) in &fig.series {
        match find_peak(table, "eta")? {
            Some((x, _)) => {
                worst = worst.max((x - 4.3).abs());
                parts.push(format!("C2 = {c2}: argmax D2 = {x}"));
            }
            None => {
                worst = f64::INFINITY;
                parts.push(format!("C2 = {c2}: maximum on the boundary"));
            }
        }
        let xs = table.xs();
        for (x, eta) in xs.iter().zip(table.column("eta")?) {
            // η vanishes identically at D₂ = 0, where mode 2 is decoupled.
            if *x > 0.0 && !(eta > 0.0 && eta < 1.0) {
                bounded = false;
            }
        }
    }
    parts.push(format!("eta in (0,1) for D2 > 0: {bounded}"));
    Ok(Check::new(6, "fig4a: eta peaks at D2 = 4.3", worst, opts.tol(0.5), Bound::Upper)
        .also(bounded)
        .detail(parts.join(", ")))
}

fn case1_point(d1: f64, d2: f64, c1: f64, omega_m: f64) -> Result<SystemParams> {
    let base = SystemParams { omega_m, ..Default::default() };
    params_from_cooperativities(&Cooperativities { d1, d2, c1, c2: 0.0 }, &base)
}

fn oracle_db(p: &SystemParams, case: CouplingCase) -> Result<DarkBrightState> {
    let st = solve_steady(&build_drift(p, case)?)?;
    dark_bright::to_dark_bright(st.a1, st.a2, p.g1, p.g2)
}

/// With the mirror on cavity 1 the dark fraction ignores `C₁`.
pub fn chi_invariance(opts: &ValidationOptions) -> Result<Check> {
    let grid = [0.5, 3.5, 6.5];
    let mut spread = 0.0f64;
    let mut closed_err = 0.0f64;
    for d1 in grid {
        for d2 in grid {
            let mut chis = Vec::new();
            for c1 in [0.0, 1.0, 10.0, 100.0] {
                let p = case1_point(d1, d2, c1, SystemParams::default().omega_m)?;
                chis.push(dark_bright::dark_fraction(&oracle_db(&p, CouplingCase::MechOnCavity1)?)?);
            }
            let (lo, hi) = chis.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(c), h.max(c)));
            spread = spread.max(hi - lo);
            let closed = dark_bright::chi_closed_case1(d1, d2)?;
            closed_err = chis.iter().map(|c| (c - closed).abs()).fold(closed_err, f64::max);
        }
    }
    let closed_tol = opts.tol(1e-9);
    Ok(Check::new(7, "case 1: chi independent of C1 and equal to the closed form", spread, opts.tol(1e-10), Bound::Upper)
        .also(closed_err <= closed_tol)
        .detail(format!("max spread over C1; max |chi - closed| = {closed_err:.3e} (need <= {closed_tol:.3e})")))
}

/// Without optomechanics both dark/bright solutions coincide with the solve.
pub fn no_mechanics_reduction(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let draws = 200;
    for _ in 0..draws {
        let c = Cooperativities { c1: 0.0, c2: 0.0, ..coops(&mut rng, CouplingCase::General) };
        let p = params_from_cooperativities(&c, &SystemParams::default())?;
        let (s1, _) = dark_bright::db_steady_case1(&p)?;
        let (s2, _) = dark_bright::db_steady_case2(&p)?;
        let oracle = oracle_db(&p, CouplingCase::General)?;
        let scale = oracle.a_b.norm().max(oracle.a_d.norm());
        for s in [s1, s2] {
            worst = worst.max((s.a_b - oracle.a_b).norm() / scale);
            worst = worst.max((s.a_d - oracle.a_d).norm() / scale);
        }
        worst = worst.max((s1.a_b - s2.a_b).norm() / scale).max((s1.a_d - s2.a_d).norm() / scale);
    }
    Ok(Check::new(8, "C = 0: both dark/bright solutions agree with the solve", worst, opts.tol(1e-12), Bound::Upper)
        .detail(format!("{draws} draws, error relative to the largest amplitude")))
}

/// The dark/bright rotation preserves total intensity.
pub fn unitarity(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let draws = 1000;
    for _ in 0..draws {
        let mut z = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (a1, a2) = (z(), z());
        let g1 = rng.random_range(1e-3..5.0);
        let g2 = rng.random_range(1e-3..5.0);
        let db = dark_bright::to_dark_bright(a1, a2, g1, g2)?;
        let before = a1.norm_sqr() + a2.norm_sqr();
        worst = worst.max(rel(db.a_b.norm_sqr() + db.a_d.norm_sqr(), before));
    }
    Ok(Check::new(9, "dark/bright rotation preserves intensity", worst, opts.tol(1e-12), Bound::Upper)
        .detail(format!("{draws} random states, max relative error")))
}

/// Strong mode-2 coupling drives the field into the dark mode.
pub fn dark_mode_limit(_opts: &ValidationOptions) -> Result<Check> {
    let mut min_end = f64::INFINITY;
    let mut max_drop = f64::NEG_INFINITY;
    for id in ["fig5a", "fig5b", "fig5c", "fig5d"] {
        let fig = run_figure(&figure_preset(id)?)?;
        for (_, table) in &fig.series {
            let xs = table.xs();
            let chi = table.column("chi_numeric")?;
            min_end = min_end.min(*chi.last().expect("non-empty sweep"));
            for k in 1..xs.len() {
                if xs[k - 1] >= 5.0 {
                    max_drop = max_drop.max(chi[k - 1] - chi[k]);
                }
            }
        }
    }
    Ok(Check::new(10, "fig5: chi >= 0.95 at D2 = 10, non-decreasing on [5, 10]", min_end, 0.95, Bound::Lower)
        .also(max_drop <= 0.0)
        .detail(format!("min chi at D2 = 10 over all panels; largest step decrease on [5, 10] = {max_drop:.3e}")))
}

/// Mirror on cavity 1: `a_D/a_B = √(D₂/D₁)(1 + D₁ + D₂)`.
pub fn ratio_law(opts: &ValidationOptions) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let draws = 100;
    for _ in 0..draws {
        let d1 = log_uniform(&mut rng, 1e-2, 1e2);
        let d2 = log_uniform(&mut rng, 1e-2, 1e2);
        let c1 = log_uniform(&mut rng, 1e-2, 1e2);
        let omega_m = rng.random_range(0.0..0.1);
        let db = oracle_db(&case1_point(d1, d2, c1, omega_m)?, CouplingCase::MechOnCavity1)?;
        let expected = (d2 / d1).sqrt() * (1.0 + d1 + d2);
        worst = worst.max(crel(db.a_d / db.a_b, Complex64::new(expected, 0.0)));
    }
    Ok(Check::new(11, "case 1: dark/bright ratio law", worst, opts.tol(1e-9), Bound::Upper)
        .detail(format!("{draws} draws, max relative error")))
}

/// Every figure renders to identical bytes twice, in both formats.
pub fn determinism(opts: &ValidationOptions) -> Result<Check> {
    let mut mismatches = 0usize;
    for id in FIGURE_IDS {
        let preset = figure_preset(id)?;
        let (a, b) = (run_figure(&preset)?, run_figure(&preset)?);
        for fmt in [Format::Csv, Format::Json] {
            if a.to_bytes(fmt) != b.to_bytes(fmt) {
                mismatches += 1;
            }
        }
    }
    Ok(Check::new(12, "figure output is byte-identical across runs", mismatches as f64, opts.tol(0.0), Bound::Upper)
        .detail(format!("{} figures x 2 formats", FIGURE_IDS.len())))
}

pub type CheckFn = fn(&ValidationOptions) -> Result<Check>;

pub const CHECKS: [CheckFn; 12] = [
    oracle_intensities,
    integrator_convergence,
    stability,
    emission_peak,
    emission_trend,
    efficiency_peak,
    chi_invariance,
    no_mechanics_reduction,
    unitarity,
    dark_mode_limit,
    ratio_law,
    determinism,
];

pub fn run_all(opts: &ValidationOptions) -> Result<Vec<Check>> {
    CHECKS.iter().map(|f| f(opts)).collect()
}
