//! Physical parameter space of the driven two-cavity system.
//!
//! Every rate, detuning and coupling is expressed in units of a reference
//! cavity linewidth `κ_ref`, and all frequencies live in the frame rotating
//! at the drive frequency. The defaults are the base rates shared by every
//! figure preset: `κ₁ = κ₂ = 1`, `γ_qd = 0.3`, `γ_m = 0.001`, `ω_m = 0.01`,
//! output coupling ratios `η₁ = η₂ = 0.9` and a unit real drive.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};

/// Rates, detunings, couplings and drive of the hybrid system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Total decay rate of cavity 1.
    pub kappa1: f64,
    /// Total decay rate of cavity 2.
    pub kappa2: f64,
    /// External (output) coupling rate of cavity 1.
    pub kappa1_ext: f64,
    /// External (output) coupling rate of cavity 2.
    pub kappa2_ext: f64,
    /// Total quantum-dot decay rate (spontaneous emission plus dephasing).
    pub gamma_qd: f64,
    /// Mechanical damping rate.
    pub gamma_m: f64,
    /// Mechanical frequency.
    pub omega_m: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Quantum-dot detuning from the drive.
    pub delta_d: f64,
    /// Dot coupling to cavity 1.
    pub g1: f64,
    /// Dot coupling to cavity 2.
    pub g2: f64,
    /// Optomechanical coupling of cavity 1.
    pub om1: f64,
    /// Optomechanical coupling of cavity 2.
    pub om2: f64,
    /// Complex drive amplitude (square root of the input photon flux).
    pub a_in: Complex64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            kappa1: 1.0,
            kappa2: 1.0,
            kappa1_ext: 0.9,
            kappa2_ext: 0.9,
            gamma_qd: 0.3,
            gamma_m: 0.001,
            omega_m: 0.01,
            delta1: 0.0,
            delta2: 0.0,
            delta_d: 0.0,
            g1: 0.0,
            g2: 0.0,
            om1: 0.0,
            om2: 0.0,
            a_in: Complex64::new(1.0, 0.0),
        }
    }
}

impl SystemParams {
    /// Output coupling ratio `κ₁ᵉˣᵗ/κ₁`.
    pub fn eta1(&self) -> f64 {
        self.kappa1_ext / self.kappa1
    }

    /// Output coupling ratio `κ₂ᵉˣᵗ/κ₂`.
    pub fn eta2(&self) -> f64 {
        self.kappa2_ext / self.kappa2
    }

    /// Input photon flux `|A_in|²`.
    pub fn input_flux(&self) -> f64 {
        self.a_in.norm_sqr()
    }

    /// Returns `Ok(())` when every invariant holds.
    pub fn check(&self) -> Result<()> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(Violations(v)))
        }
    }

    /// Checks the parameter invariants together with the coupling case.
    pub fn check_with_case(&self, case: CouplingCase) -> Result<()> {
        let mut v = validate(self);
        v.extend(case.violations(self));
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(Violations(v)))
        }
    }
}

/// One violated parameter invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: &'static str,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} = {})", self.rule, self.field, self.value)
    }
}

/// Returns every invariant of `p` that does not hold. Empty means valid.
pub fn validate(p: &SystemParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field, rule, value| out.push(Violation { field, rule, value });

    let fields: [(&'static str, f64); 16] = [
        ("kappa1", p.kappa1),
        ("kappa2", p.kappa2),
        ("kappa1_ext", p.kappa1_ext),
        ("kappa2_ext", p.kappa2_ext),
        ("gamma_qd", p.gamma_qd),
        ("gamma_m", p.gamma_m),
        ("omega_m", p.omega_m),
        ("delta1", p.delta1),
        ("delta2", p.delta2),
        ("delta_d", p.delta_d),
        ("g1", p.g1),
        ("g2", p.g2),
        ("om1", p.om1),
        ("om2", p.om2),
        ("a_in.re", p.a_in.re),
        ("a_in.im", p.a_in.im),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            push(name, "finite value", value);
        }
    }

    for (name, value, rule) in [
        ("kappa1", p.kappa1, "kappa1 > 0"),
        ("kappa2", p.kappa2, "kappa2 > 0"),
        ("gamma_qd", p.gamma_qd, "gamma_qd > 0"),
        ("gamma_m", p.gamma_m, "gamma_m > 0"),
    ] {
        if !(value > 0.0) {
            push(name, rule, value);
        }
    }
    if !(p.omega_m >= 0.0) {
        push("omega_m", "omega_m >= 0", p.omega_m);
    }
    for (name, value, rule) in [
        ("kappa1_ext", p.kappa1_ext, "kappa1_ext >= 0"),
        ("kappa2_ext", p.kappa2_ext, "kappa2_ext >= 0"),
        ("g1", p.g1, "g1 >= 0"),
        ("g2", p.g2, "g2 >= 0"),
        ("om1", p.om1, "om1 >= 0"),
        ("om2", p.om2, "om2 >= 0"),
    ] {
        if !(value >= 0.0) {
            push(name, rule, value);
        }
    }
    if p.kappa1_ext > p.kappa1 {
        push("kappa1_ext", "kappa1_ext <= kappa1", p.kappa1_ext);
    }
    if p.kappa2_ext > p.kappa2 {
        push("kappa2_ext", "kappa2_ext <= kappa2", p.kappa2_ext);
    }
    out
}

/// Which cavity the movable mirror couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingCase {
    /// Mirror couples to the driven cavity 1 only (`Ω₂ = 0`).
    MechOnCavity1,
    /// Mirror couples to the undriven cavity 2 only (`Ω₁ = 0`).
    MechOnCavity2,
    /// Both optomechanical couplings present. Numerical solver only.
    General,
}

impl CouplingCase {
    pub const ALL: [CouplingCase; 3] = [Self::MechOnCavity1, Self::MechOnCavity2, Self::General];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::MechOnCavity1 => "mech_on_cavity1",
            Self::MechOnCavity2 => "mech_on_cavity2",
            Self::General => "general",
        }
    }

    /// Picks the narrowest case consistent with the couplings in `p`.
    pub fn infer(p: &SystemParams) -> Self {
        match (p.om1 != 0.0, p.om2 != 0.0) {
            (true, true) => Self::General,
            (false, true) => Self::MechOnCavity2,
            _ => Self::MechOnCavity1,
        }
    }

    pub fn violations(self, p: &SystemParams) -> Vec<Violation> {
        match self {
            Self::MechOnCavity1 if p.om2 != 0.0 => vec![Violation {
                field: "om2",
                rule: "om2 = 0 in case mech_on_cavity1",
                value: p.om2,
            }],
            Self::MechOnCavity2 if p.om1 != 0.0 => vec![Violation {
                field: "om1",
                rule: "om1 = 0 in case mech_on_cavity2",
                value: p.om1,
            }],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for CouplingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingCase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mech_on_cavity1" | "1" => Ok(Self::MechOnCavity1),
            "mech_on_cavity2" | "2" => Ok(Self::MechOnCavity2),
            "general" => Ok(Self::General),
            other => Err(format!(
                "unknown coupling case `{other}` (expected mech_on_cavity1, mech_on_cavity2 or general)"
            )),
        }
    }
}

/// Dimensionless coupling strengths: cavity cooperativities `D_j = 4g_j²/(κ_j γ_qd)`
/// and optomechanical cooperativities `C_j = 4Ω_j²/(κ_j γ_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cooperativities {
    pub d1: f64,
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn cooperativities_from_params(p: &SystemParams) -> Result<Cooperativities> {
    p.check()?;
    Ok(Cooperativities {
        d1: 4.0 * p.g1 * p.g1 / (p.kappa1 * p.gamma_qd),
        d2: 4.0 * p.g2 * p.g2 / (p.kappa2 * p.gamma_qd),
        c1: 4.0 * p.om1 * p.om1 / (p.kappa1 * p.gamma_m),
        c2: 4.0 * p.om2 * p.om2 / (p.kappa2 * p.gamma_m),
    })
}

/// Replaces the four couplings of `base` with the ones implied by `c`,
/// keeping all rates, detunings and the drive.
pub fn params_from_cooperativities(c: &Cooperativities, base: &SystemParams) -> Result<SystemParams> {
    for (name, value) in [("d1", c.d1), ("d2", c.d2), ("c1", c.c1), ("c2", c.c2)] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeCooperativity { name, value });
        }
    }
    base.check()?;
    Ok(SystemParams {
        g1: (c.d1 * base.kappa1 * base.gamma_qd / 4.0).sqrt(),
        g2: (c.d2 * base.kappa2 * base.gamma_qd / 4.0).sqrt(),
        om1: (c.c1 * base.kappa1 * base.gamma_m / 4.0).sqrt(),
        om2: (c.c2 * base.kappa2 * base.gamma_m / 4.0).sqrt(),
        ..*base
    })
}
