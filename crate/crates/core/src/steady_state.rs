//! Mean-field drift system and its numerical steady state.
//!
//! Taking expectation values of the Heisenberg-Langevin equations (noise means
//! vanish for a cold reservoir) leaves a linear inhomogeneous system
//! `dx/dt = m·x + v` for `x = (a₁, a₂, b, σ)`. The steady state is obtained
//! by a direct solve of `m·x = −v`; RK4 integration is kept as an
//! independent route to the same fixed point.

use std::io::Write;

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::closed_form::{self, Form};
use crate::dark_bright;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{cooperativities_from_params, CouplingCase, SystemParams};
use crate::output::fmt_num;

/// Row and column order of every matrix, vector and file.
pub const MODE_LABELS: [&str; 4] = ["a1", "a2", "b", "sigma"];

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear drift `dx/dt = m·x + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSystem {
    pub m: Matrix<4>,
    pub v: Vector<4>,
    /// Energy dampings `(κ₁, κ₂, γ_m, γ_qd)`; `m + m† = −diag(dampings)`.
    pub dampings: [f64; 4],
}

impl DriftSystem {
    pub fn rhs(&self, x: &Vector<4>) -> Vector<4> {
        let mut out = linalg::mat_vec(&self.m, x);
        for (o, v) in out.iter_mut().zip(&self.v) {
            *o += v;
        }
        out
    }

    /// Largest entrywise deviation of `m + m†` from `−diag(dampings)`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                let target = if r == c { -self.dampings[r] } else { 0.0 };
                let z = self.m[r][c] + self.m[c][r].conj() - target;
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Largest real part of the eigenvalues of `m`.
    pub fn spectral_abscissa(&self) -> f64 {
        let nm = Matrix4::from_fn(|r, c| self.m[r][c]);
        Schur::new(nm)
            .eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest admissible RK4 step, `0.1 / max(|m_ij|, dampings)`.
    pub fn max_step(&self) -> f64 {
        let entries = self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let rates = self.dampings.iter().copied().fold(0.0, f64::max);
        0.1 / entries.max(rates)
    }
}

/// Builds the drift system for `p` in coupling case `case`.
///
/// Rows are `ȧ₁ = −(iΔ₁+κ₁/2)a₁ − ig₁σ + iΩ₁b − i√κ₁ᵉˣᵗ A_in`,
/// `ȧ₂ = −(iΔ₂+κ₂/2)a₂ − ig₂σ + iΩ₂b`, `ḃ = −(iω_m+γ_m/2)b + iΩ₁a₁ + iΩ₂a₂`
/// and `σ̇ = −(iΔ_d+γ_qd/2)σ − ig₁a₁ − ig₂a₂`.
pub fn build_drift(p: &SystemParams, case: CouplingCase) -> Result<DriftSystem> {
    p.check_with_case(case)?;
    let zero = Complex64::new(0.0, 0.0);
    let diag = |detuning: f64, rate: f64| -Complex64::new(rate / 2.0, detuning);
    let (om1, om2) = match case {
        CouplingCase::MechOnCavity1 => (p.om1, 0.0),
        CouplingCase::MechOnCavity2 => (0.0, p.om2),
        CouplingCase::General => (p.om1, p.om2),
    };

    let m = [
        [diag(p.delta1, p.kappa1), zero, I * om1, -I * p.g1],
        [zero, diag(p.delta2, p.kappa2), I * om2, -I * p.g2],
        [I * om1, I * om2, diag(p.omega_m, p.gamma_m), zero],
        [-I * p.g1, -I * p.g2, zero, diag(p.delta_d, p.gamma_qd)],
    ];
    let v = [-I * p.kappa1_ext.sqrt() * p.a_in, zero, zero, zero];
    Ok(DriftSystem { m, v, dampings: [p.kappa1, p.kappa2, p.gamma_m, p.gamma_qd] })
}

/// Mean amplitudes `⟨a₁⟩, ⟨a₂⟩, ⟨b⟩, ⟨σ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ModeState {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b: Complex64,
    pub sigma: Complex64,
}

impl ModeState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(self) -> Vector<4> {
        [self.a1, self.a2, self.b, self.sigma]
    }

    pub fn from_array(x: Vector<4>) -> Self {
        Self { a1: x[0], a2: x[1], b: x[2], sigma: x[3] }
    }

    pub fn inf_norm(&self) -> f64 {
        linalg::inf_norm(&self.to_array())
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|z| z.is_finite())
    }
}

/// Solves `m·x + v = 0`.
pub fn solve_steady(sys: &DriftSystem) -> Result<ModeState> {
    let neg_v = sys.v.map(|z| -z);
    let x = linalg::solve(&sys.m, &neg_v)?;
    let state = ModeState::from_array(x);
    if !state.is_finite() {
        return Err(Error::Singular { column: 3, pivot: f64::NAN });
    }
    Ok(state)
}

/// Sampled solution of the drift equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeState>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, ModeState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// Columns `t,re_a1,im_a1,re_a2,im_a2,re_b,im_b,re_sigma,im_sigma`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for m in MODE_LABELS {
            header.push(format!("re_{m}"));
            header.push(format!("im_{m}"));
        }
        w.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut rec = Vec::with_capacity(9);
            rec.push(fmt_num(*t));
            for z in s.to_array() {
                rec.push(fmt_num(z.re));
                rec.push(fmt_num(z.im));
            }
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Classical RK4 on `dx/dt = m·x + v`, recording every step.
pub fn integrate(sys: &DriftSystem, x0: ModeState, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_sampled(sys, x0, t_end, dt, 1)
}

/// As [`integrate`], keeping only every `every`-th step (plus both endpoints).
///
/// The step count is `⌈t_end/dt⌉` and the step is shrunk to land exactly on
/// `t_end`.
pub fn integrate_sampled(
    sys: &DriftSystem,
    x0: ModeState,
    t_end: f64,
    dt: f64,
    every: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidTime(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    if every == 0 {
        return Err(Error::InvalidTime("sampling stride must be at least 1".into()));
    }
    let max_dt = sys.max_step();
    if dt > max_dt {
        return Err(Error::StepSize { dt, max_dt });
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;

    let mut x = x0.to_array();
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let axpy = |x: &Vector<4>, k: &Vector<4>, s: f64| {
        let mut out = *x;
        for (o, k) in out.iter_mut().zip(k) {
            *o += k * s;
        }
        out
    };
    for n in 1..=steps {
        let k1 = sys.rhs(&x);
        let k2 = sys.rhs(&axpy(&x, &k1, h / 2.0));
        let k3 = sys.rhs(&axpy(&x, &k2, h / 2.0));
        let k4 = sys.rhs(&axpy(&x, &k3, h));
        for i in 0..4 {
            x[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        if n % every == 0 || n == steps {
            times.push(n as f64 * h);
            states.push(ModeState::from_array(x));
        }
    }
    Ok(Trajectory { times, states })
}

/// Normalized emission `p_i = κ_iᵉˣᵗ|a_i|²/|A_in|²` (output-flux ratio).
pub fn emission_powers(st: &ModeState, p: &SystemParams) -> Result<(f64, f64)> {
    let flux = p.input_flux();
    if flux == 0.0 {
        return Err(Error::ZeroDrive);
    }
    Ok((p.kappa1_ext * st.a1.norm_sqr() / flux, p.kappa2_ext * st.a2.norm_sqr() / flux))
}

/// Conversion efficiency `η = κ₂ᵉˣᵗ|a₂|²/|A_in|²` from the linear solve.
pub fn efficiency_numeric(p: &SystemParams, case: CouplingCase) -> Result<f64> {
    let st = solve_steady(&build_drift(p, case)?)?;
    Ok(emission_powers(&st, p)?.1)
}

/// Closed-form counterparts evaluated at the same point, where they apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClosedValues {
    pub i1: Option<f64>,
    pub i2: Option<f64>,
    pub eta: Option<f64>,
    pub chi: Option<f64>,
}

/// Everything computed at a single parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyReport {
    pub case: CouplingCase,
    pub state: ModeState,
    pub i1: f64,
    pub i2: f64,
    pub p1: f64,
    pub p2: f64,
    pub eta: f64,
    /// `None` when the dark/bright basis is undefined (`g₁ = g₂ = 0`).
    pub chi: Option<f64>,
    pub closed: ClosedValues,
    pub notes: Vec<String>,
}

pub fn steady_report(p: &SystemParams, case: CouplingCase) -> Result<SteadyReport> {
    let state = solve_steady(&build_drift(p, case)?)?;
    let (p1, p2) = emission_powers(&state, p)?;
    let mut notes = vec!["p_i = kappa_i_ext*|a_i|^2/|A_in|^2 (output-flux ratio)".to_string()];

    let chi = match dark_bright::to_dark_bright(state.a1, state.a2, p.g1, p.g2)
        .and_then(|db| dark_bright::dark_fraction(&db))
    {
        Ok(chi) => Some(chi),
        Err(e) => {
            notes.push(format!("chi omitted: {e}"));
            None
        }
    };

    let mut closed = ClosedValues::default();
    let intensity = match case {
        CouplingCase::MechOnCavity1 => Some(closed_form::intensities_case1(p, Form::Corrected)?),
        CouplingCase::MechOnCavity2 => Some(closed_form::intensities_case2(p, Form::Corrected)?),
        CouplingCase::General => None,
    };
    match intensity {
        Some(ci) if ci.regime.is_exact() => {
            closed.i1 = Some(ci.value.i1);
            closed.i2 = Some(ci.value.i2);
            closed.eta = Some(p.kappa2_ext * ci.value.i2 / p.input_flux());
        }
        Some(ci) => notes.push(format!("closed-form intensities omitted: {}", ci.regime)),
        None => notes.push("no closed forms for the general coupling case".into()),
    }
    let c = cooperativities_from_params(p)?;
    let chi_closed = match case {
        CouplingCase::MechOnCavity1 => dark_bright::check_db_regime(p, case)
            .and_then(|_| dark_bright::chi_closed_case1(c.d1, c.d2)),
        CouplingCase::MechOnCavity2 => dark_bright::check_db_regime(p, case)
            .and_then(|_| dark_bright::chi_closed_case2(c.d1, c.d2, c.c2, p.omega_m, p.gamma_m)),
        CouplingCase::General => Err(Error::Regime("general coupling case".into())),
    };
    match chi_closed {
        Ok(v) => closed.chi = Some(v),
        Err(e) if case != CouplingCase::General => notes.push(format!("closed-form chi omitted: {e}")),
        Err(_) => {}
    }

    Ok(SteadyReport {
        case,
        state,
        i1: state.a1.norm_sqr(),
        i2: state.a2.norm_sqr(),
        p1,
        p2,
        eta: p2,
        chi,
        closed,
        notes,
    })
}
