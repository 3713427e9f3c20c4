//! Dark and bright cavity modes.
//!
//! With `g̃ = √(g₁² + g₂²)` the orthonormal combinations
//! `a_B = (g₁a₁ + g₂a₂)/g̃` and `a_D = (g₂a₁ − g₁a₂)/g̃` separate the cavity
//! light into a part driven by the dot (bright) and a part the dot cannot see
//! (dark). The mirror still couples to both, with the signed coefficients
//! returned by [`mech_couplings`]; no transformed Hamiltonian is stored since
//! the rotation applied to the drift system reproduces it.
//!
//! The closed-form amplitudes hold for equal cavity linewidths and all
//! detunings zero; [`check_db_regime`] enforces that.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{cooperativities_from_params, Cooperativities, CouplingCase, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkBrightState {
    pub a_b: Complex64,
    pub a_d: Complex64,
    /// Effective dot coupling of the bright mode.
    pub g_tilde: f64,
}

/// Common complex prefactor of the closed-form amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DbPrefactor {
    pub f: Complex64,
}

/// Signed coefficients of `(a†b + a b†)` in the Hamiltonian rewritten in the
/// dark/bright basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechCouplings {
    pub bright: f64,
    pub dark: f64,
}

fn g_tilde(g1: f64, g2: f64) -> Result<f64> {
    let g = g1.hypot(g2);
    if g > 0.0 {
        Ok(g)
    } else {
        Err(Error::DegenerateBasis)
    }
}

pub fn to_dark_bright(a1: Complex64, a2: Complex64, g1: f64, g2: f64) -> Result<DarkBrightState> {
    let g = g_tilde(g1, g2)?;
    Ok(DarkBrightState { a_b: (g1 * a1 + g2 * a2) / g, a_d: (g2 * a1 - g1 * a2) / g, g_tilde: g })
}

/// Inverse of [`to_dark_bright`]; the rotation is its own inverse.
pub fn from_dark_bright(db: &DarkBrightState, g1: f64, g2: f64) -> Result<(Complex64, Complex64)> {
    let g = g_tilde(g1, g2)?;
    Ok(((g1 * db.a_b + g2 * db.a_d) / g, (g2 * db.a_b - g1 * db.a_d) / g))
}

pub fn mech_couplings(p: &SystemParams, case: CouplingCase) -> Result<MechCouplings> {
    let g = g_tilde(p.g1, p.g2)?;
    match case {
        CouplingCase::MechOnCavity1 => Ok(MechCouplings { bright: -p.om1 * p.g1 / g, dark: -p.om1 * p.g2 / g }),
        CouplingCase::MechOnCavity2 => Ok(MechCouplings { bright: -p.om2 * p.g2 / g, dark: p.om2 * p.g1 / g }),
        CouplingCase::General => Ok(MechCouplings {
            bright: -(p.om1 * p.g1 + p.om2 * p.g2) / g,
            dark: (p.om2 * p.g1 - p.om1 * p.g2) / g,
        }),
    }
}

/// Checks equal linewidths, zero detunings, the exclusive coupling case and a
/// defined basis.
pub fn check_db_regime(p: &SystemParams, case: CouplingCase) -> Result<()> {
    let mut bad = Vec::new();
    if p.kappa1 != p.kappa2 {
        bad.push(format!("kappa1 = {} != kappa2 = {}", p.kappa1, p.kappa2));
    }
    for (name, v) in [("delta1", p.delta1), ("delta2", p.delta2), ("delta_d", p.delta_d)] {
        if v != 0.0 {
            bad.push(format!("{name} = {v} (must be 0)"));
        }
    }
    match case {
        CouplingCase::MechOnCavity1 if p.om2 != 0.0 => bad.push(format!("om2 = {} (must be 0)", p.om2)),
        CouplingCase::MechOnCavity2 if p.om1 != 0.0 => bad.push(format!("om1 = {} (must be 0)", p.om1)),
        CouplingCase::General => bad.push("general coupling case has no closed form".into()),
        _ => {}
    }
    if !bad.is_empty() {
        return Err(Error::Regime(bad.join(", ")));
    }
    g_tilde(p.g1, p.g2).map(|_| ())
}

struct DbSetup {
    c: Cooperativities,
    /// `1 + D₁ + D₂`
    s: f64,
    /// `D₁ + D₂`
    dsum: f64,
    /// `−(2i/κ)√κ₁ᵉˣᵗ A_in`
    drive: Complex64,
}

fn setup(p: &SystemParams, case: CouplingCase) -> Result<DbSetup> {
    check_db_regime(p, case)?;
    let c = cooperativities_from_params(p)?;
    Ok(DbSetup {
        c,
        s: 1.0 + c.d1 + c.d2,
        dsum: c.d1 + c.d2,
        drive: -2.0 * I / p.kappa1 * p.kappa1_ext.sqrt() * p.a_in,
    })
}

fn prefactor_case1(p: &SystemParams, k: &DbSetup) -> DbPrefactor {
    let den = Complex64::new(p.gamma_m / 2.0 * (k.s + k.c.c1 * (1.0 + k.c.d2)), p.omega_m * k.s);
    DbPrefactor { f: k.drive / den }
}

fn prefactor_case2(p: &SystemParams, k: &DbSetup) -> DbPrefactor {
    let den = Complex64::new(p.gamma_m / 2.0 * (k.s + k.c.c2 * (1.0 + k.c.d1)), p.omega_m * k.s);
    DbPrefactor { f: k.drive / den }
}

/// Bright/dark amplitudes with the mirror on cavity 1.
pub fn db_steady_case1(p: &SystemParams) -> Result<(DarkBrightState, DbPrefactor)> {
    let k = setup(p, CouplingCase::MechOnCavity1)?;
    let pre = prefactor_case1(p, &k);
    let mech = Complex64::new(p.gamma_m / 2.0, p.omega_m);
    let state = DarkBrightState {
        a_b: pre.f * (k.c.d1 / k.dsum).sqrt() * mech,
        a_d: pre.f * (k.c.d2 / k.dsum).sqrt() * mech * k.s,
        g_tilde: p.g1.hypot(p.g2),
    };
    Ok((state, pre))
}

/// Bright/dark amplitudes with the mirror on cavity 2.
pub fn db_steady_case2(p: &SystemParams) -> Result<(DarkBrightState, DbPrefactor)> {
    let k = setup(p, CouplingCase::MechOnCavity2)?;
    let pre = prefactor_case2(p, &k);
    let c2 = k.c.c2;
    let bright = Complex64::new(p.gamma_m / 2.0 * (1.0 + c2), p.omega_m);
    let dark = Complex64::new(p.gamma_m / 2.0 * (k.s + c2), p.omega_m * k.s);
    let state = DarkBrightState {
        a_b: pre.f * (k.c.d1 / k.dsum).sqrt() * bright,
        a_d: pre.f * (k.c.d2 / k.dsum).sqrt() * dark,
        g_tilde: p.g1.hypot(p.g2),
    };
    Ok((state, pre))
}

/// Cavity amplitudes expressed through the dark/bright decomposition, mirror on cavity 1.
pub fn modes_from_db_case1(p: &SystemParams) -> Result<(Complex64, Complex64)> {
    let k = setup(p, CouplingCase::MechOnCavity1)?;
    let f = prefactor_case1(p, &k).f;
    let mech = Complex64::new(p.gamma_m / 2.0, p.omega_m);
    let a1 = f * mech * k.s / k.dsum * (k.c.d2 + k.c.d1 / k.s);
    Ok((a1, cavity2_amplitude(f, &k, mech)))
}

/// Cavity amplitudes expressed through the dark/bright decomposition, mirror on cavity 2.
pub fn modes_from_db_case2(p: &SystemParams) -> Result<(Complex64, Complex64)> {
    let k = setup(p, CouplingCase::MechOnCavity2)?;
    let f = prefactor_case2(p, &k).f;
    let (d1, d2, c2) = (k.c.d1, k.c.d2, k.c.c2);
    let bracket = d2 + d1 / k.s;
    let inner = Complex64::new(p.gamma_m / 2.0 * (bracket + c2 * k.dsum / k.s), p.omega_m * bracket);
    let a1 = f * k.s / k.dsum * inner;
    let mech = Complex64::new(p.gamma_m / 2.0, p.omega_m);
    Ok((a1, cavity2_amplitude(f, &k, mech)))
}

// Same form in both cases; only the prefactor differs.
fn cavity2_amplitude(f: Complex64, k: &DbSetup, mech: Complex64) -> Complex64 {
    f * (k.c.d1 * k.c.d2).sqrt() * k.s / k.dsum * (1.0 / k.s - 1.0) * mech
}

/// `χ = |a_D|² / (|a_D|² + |a_B|²)`.
pub fn dark_fraction(db: &DarkBrightState) -> Result<f64> {
    let dark = db.a_d.norm_sqr();
    let total = dark + db.a_b.norm_sqr();
    if total > 0.0 {
        Ok(dark / total)
    } else {
        Err(Error::ZeroIntensity)
    }
}

fn check_nonneg(values: &[(&'static str, f64)]) -> Result<()> {
    for &(name, v) in values {
        if !(v >= 0.0) {
            return Err(Error::NegativeCooperativity { name, value: v });
        }
    }
    Ok(())
}

/// Dark-mode fraction with the mirror on cavity 1; independent of `C₁`.
pub fn chi_closed_case1(d1: f64, d2: f64) -> Result<f64> {
    check_nonneg(&[("d1", d1), ("d2", d2)])?;
    if d1 + d2 == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let s = 1.0 + d1 + d2;
    Ok(1.0 - d1 / (d1 + d2 * s * s))
}

/// Dark-mode fraction with the mirror on cavity 2; depends on `C₂`, `ω_m` and `γ_m`.
pub fn chi_closed_case2(d1: f64, d2: f64, c2: f64, omega_m: f64, gamma_m: f64) -> Result<f64> {
    check_nonneg(&[("d1", d1), ("d2", d2), ("c2", c2)])?;
    let s = 1.0 + d1 + d2;
    let g4 = gamma_m * gamma_m / 4.0;
    let w2 = omega_m * omega_m;
    let num = d2 * (g4 * (s + c2).powi(2) + w2 * s * s);
    let den = g4 * (d2 * (s + c2).powi(2) + d1 * (1.0 + c2).powi(2)) + w2 * (d2 * s * s + d1);
    if !(den > 0.0) {
        return Err(Error::Regime(format!("chi denominator vanishes ({den})")));
    }
    Ok(num / den)
}
