//! Closed-form steady intensities and conversion efficiencies.
//!
//! Both exclusive coupling cases have exact closed forms when every detuning
//! except the one appearing in the formula vanishes: `Δ₁ = Δ_d = 0` for
//! [`CouplingCase::MechOnCavity1`] and `Δ₂ = Δ_d = 0` for
//! [`CouplingCase::MechOnCavity2`]. Outside that regime the functions still
//! evaluate, but the result carries a [`Regime`] flag listing what was violated.
//!
//! [`Form::AsPrinted`] is the commonly quoted variant of the mirror-on-cavity-1
//! expressions, which differs in two places: `(2 + D₂)` in place of `(1 + D₂)`
//! in `β₁R`, and `β₁R·γ₁I` in place of `β₁R·α₁I` in the efficiency
//! denominator. Both are transcription slips and the variant disagrees with
//! the linear solve. [`Form::Corrected`] is the default and agrees with it.
//!
//! [`CouplingCase::MechOnCavity1`]: crate::model::CouplingCase::MechOnCavity1
//! [`CouplingCase::MechOnCavity2`]: crate::model::CouplingCase::MechOnCavity2

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{cooperativities_from_params, Cooperativities, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// Algebraically consistent with the drift equations.
    #[default]
    Corrected,
    /// The quoted variant, slips included. Kept for comparison.
    AsPrinted,
}

/// Conditions under which a closed form is exact; empty means exact.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Regime {
    pub violations: Vec<String>,
}

impl Regime {
    pub fn is_exact(&self) -> bool {
        self.violations.is_empty()
    }

    fn require_zero(&mut self, name: &str, value: f64) {
        if value != 0.0 {
            self.violations.push(format!("{name} = {value} (must be 0)"));
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            f.write_str("exact")
        } else {
            f.write_str(&self.violations.join(", "))
        }
    }
}

/// A closed-form value together with its regime flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Closed<T> {
    pub value: T,
    pub regime: Regime,
}

/// Intracavity intensities `|a₁|²`, `|a₂|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intensities {
    pub i1: f64,
    pub i2: f64,
}

pub fn regime_case1(p: &SystemParams) -> Regime {
    let mut r = Regime::default();
    r.require_zero("om2", p.om2);
    r.require_zero("delta1", p.delta1);
    r.require_zero("delta_d", p.delta_d);
    r
}

pub fn regime_case2(p: &SystemParams) -> Regime {
    let mut r = Regime::default();
    r.require_zero("om1", p.om1);
    r.require_zero("delta2", p.delta2);
    r.require_zero("delta_d", p.delta_d);
    r
}

/// Auxiliary terms for the mirror-on-cavity-1 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxCase1 {
    pub alpha_r: f64,
    pub alpha_i: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub gamma_r: f64,
    pub gamma_i: f64,
}

impl AuxCase1 {
    pub fn new(p: &SystemParams, c: &Cooperativities, form: Form) -> Self {
        let beta_offset = match form {
            Form::Corrected => 1.0,
            Form::AsPrinted => 2.0,
        };
        let shared = c.d1 * p.kappa1 * p.gamma_qd / 4.0;
        Self {
            alpha_r: p.kappa1 * p.gamma_m / 4.0 * (1.0 + c.c1),
            alpha_i: p.kappa1 * p.omega_m / 2.0,
            beta_r: p.kappa2 * p.gamma_qd / 4.0 * (beta_offset + c.d2),
            beta_i: p.delta2 * p.gamma_qd / 2.0,
            gamma_r: shared * (p.kappa2 * p.gamma_m / 4.0 - p.delta2 * p.omega_m),
            gamma_i: shared * (p.delta2 * p.gamma_m / 2.0 + p.omega_m * p.kappa2 / 2.0),
        }
    }

    /// `|α·β + γ|²` split into its real and imaginary parts.
    fn denominator(&self) -> (f64, f64) {
        (
            self.alpha_r * self.beta_r - self.alpha_i * self.beta_i + self.gamma_r,
            self.alpha_r * self.beta_i + self.beta_r * self.alpha_i + self.gamma_i,
        )
    }
}

/// Auxiliary terms for the mirror-on-cavity-2 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxCase2 {
    pub alpha_r: f64,
    pub alpha_i: f64,
    pub beta_r: f64,
    pub beta_i: f64,
    pub delta_r: f64,
    pub delta_i: f64,
    pub gamma_r: f64,
    pub gamma_i: f64,
}

impl AuxCase2 {
    pub fn new(p: &SystemParams, c: &Cooperativities) -> Self {
        let shared = c.d2 * p.kappa2 * p.gamma_qd / 4.0;
        Self {
            alpha_r: p.kappa2 * p.gamma_qd * p.gamma_m / 8.0 * (1.0 + c.c2 + c.d2),
            alpha_i: p.omega_m * p.kappa2 * p.gamma_qd / 4.0 * (1.0 + c.d2),
            beta_r: shared * (p.kappa1 * p.gamma_m / 4.0 - p.delta1 * p.omega_m),
            beta_i: shared * (p.delta1 * p.gamma_m / 2.0 + p.omega_m * p.kappa1 / 2.0),
            delta_r: p.gamma_m * p.kappa2 / 4.0 * (1.0 + c.c2),
            delta_i: p.omega_m * p.kappa2 / 2.0,
            gamma_r: p.kappa1 * p.gamma_qd / 4.0 * (1.0 + c.d1),
            gamma_i: p.delta1 * p.gamma_qd / 2.0,
        }
    }

    fn denominator(&self) -> (f64, f64) {
        (
            self.gamma_r * self.delta_r - self.gamma_i * self.delta_i + self.beta_r,
            self.gamma_i * self.delta_r + self.gamma_r * self.delta_i + self.beta_i,
        )
    }
}

fn mech_lorentzian(p: &SystemParams) -> f64 {
    p.omega_m * p.omega_m + p.gamma_m * p.gamma_m / 4.0
}

pub fn intensities_case1(p: &SystemParams, form: Form) -> Result<Closed<Intensities>> {
    let c = cooperativities_from_params(p)?;
    let aux = AuxCase1::new(p, &c, form);
    let (x, y) = aux.denominator();
    let den = x * x + y * y;
    let drive = p.kappa1_ext * p.input_flux() * mech_lorentzian(p);
    Ok(Closed {
        value: Intensities {
            i1: drive * (aux.beta_r * aux.beta_r + aux.beta_i * aux.beta_i) / den,
            i2: drive * p.g1 * p.g1 * p.g2 * p.g2 / den,
        },
        regime: regime_case1(p),
    })
}

/// The quoted expressions for this case have no slips, so `form` does not
/// change the result.
pub fn intensities_case2(p: &SystemParams, _form: Form) -> Result<Closed<Intensities>> {
    let c = cooperativities_from_params(p)?;
    let aux = AuxCase2::new(p, &c);
    let (x, y) = aux.denominator();
    let den = x * x + y * y;
    let drive = p.kappa1_ext * p.input_flux();
    Ok(Closed {
        value: Intensities {
            i1: drive * (aux.alpha_r * aux.alpha_r + aux.alpha_i * aux.alpha_i) / den,
            i2: drive * p.g1 * p.g1 * p.g2 * p.g2 * mech_lorentzian(p) / den,
        },
        regime: regime_case2(p),
    })
}

/// `η₁η₂κ₁²κ₂²γ_qd²D₁D₂(ω_m² + γ_m²/4)`, the efficiency numerator in cooperativity form.
fn efficiency_numerator(p: &SystemParams, c: &Cooperativities) -> f64 {
    p.eta1() * p.eta2() * (p.kappa1 * p.kappa2 * p.gamma_qd).powi(2) * c.d1 * c.d2 * mech_lorentzian(p)
}

fn from_intensity(p: &SystemParams, closed: Closed<Intensities>) -> Result<Closed<f64>> {
    let flux = p.input_flux();
    if flux == 0.0 {
        return Err(Error::ZeroDrive);
    }
    Ok(Closed { value: p.kappa2_ext * closed.value.i2 / flux, regime: closed.regime })
}

/// Conversion efficiency with the mirror on cavity 1.
///
/// `Form::Corrected` evaluates `κ₂ᵉˣᵗ·i₂/|A_in|²` from [`intensities_case1`];
/// `Form::AsPrinted` evaluates the quoted cooperativity form as is.
pub fn efficiency_case1(p: &SystemParams, form: Form) -> Result<Closed<f64>> {
    match form {
        Form::Corrected => from_intensity(p, intensities_case1(p, form)?),
        Form::AsPrinted => {
            let c = cooperativities_from_params(p)?;
            let aux = AuxCase1::new(p, &c, Form::AsPrinted);
            let x = aux.alpha_r * aux.beta_r - aux.alpha_i * aux.beta_i + aux.gamma_r;
            let y = aux.alpha_r * aux.beta_i + aux.beta_r * aux.gamma_i + aux.gamma_i;
            Ok(Closed {
                value: efficiency_numerator(p, &c) / (16.0 * (x * x + y * y)),
                regime: regime_case1(p),
            })
        }
    }
}

/// Conversion efficiency with the mirror on cavity 2.
///
/// `Form::AsPrinted` takes the cooperativity-form route, which is a second,
/// algebraically independent evaluation of the same quantity.
pub fn efficiency_case2(p: &SystemParams, form: Form) -> Result<Closed<f64>> {
    match form {
        Form::Corrected => from_intensity(p, intensities_case2(p, form)?),
        Form::AsPrinted => {
            let c = cooperativities_from_params(p)?;
            let (x, y) = AuxCase2::new(p, &c).denominator();
            Ok(Closed {
                value: efficiency_numerator(p, &c) / (16.0 * (x * x + y * y)),
                regime: regime_case2(p),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{params_from_cooperativities, CouplingCase};
    use crate::steady_state::{build_drift, efficiency_numeric, solve_steady};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn point(d1: f64, d2: f64, c1: f64, c2: f64, base: SystemParams) -> SystemParams {
        params_from_cooperativities(&Cooperativities { d1, d2, c1, c2 }, &base).unwrap()
    }

    fn oracle(p: &SystemParams, case: CouplingCase) -> (f64, f64) {
        let st = solve_steady(&build_drift(p, case).unwrap()).unwrap();
        (st.a1.norm_sqr(), st.a2.norm_sqr())
    }

    fn assert_rel(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn case1_without_dot_reduces_to_shifted_lorentzian() {
        let p = point(0.0, 0.0, 3.0, 0.0, SystemParams { delta2: 0.7, ..Default::default() });
        let got = intensities_case1(&p, Form::Corrected).unwrap();
        assert!(got.regime.is_exact());
        assert_eq!(got.value.i2, 0.0);
        let shift = p.om1 * p.om1 / Complex64::new(p.gamma_m / 2.0, p.omega_m);
        let expected = p.kappa1_ext / (p.kappa1 / 2.0 + shift).norm_sqr();
        assert_rel(got.value.i1, expected, 1e-12);
    }

    #[test]
    fn zero_drive_gives_zero_intensities() {
        let p = SystemParams { a_in: Complex64::new(0.0, 0.0), ..point(1.0, 2.0, 1.0, 0.0, Default::default()) };
        let got = intensities_case1(&p, Form::Corrected).unwrap().value;
        assert_eq!((got.i1, got.i2), (0.0, 0.0));
        let got = intensities_case2(&p, Form::Corrected).unwrap().value;
        assert_eq!((got.i1, got.i2), (0.0, 0.0));
        assert!(matches!(efficiency_case1(&p, Form::Corrected), Err(Error::ZeroDrive)));
    }

    #[test]
    fn case1_matches_oracle() {
        let p = point(4.3, 2.0, 1.0, 0.0, SystemParams { delta2: 2.5, ..Default::default() });
        let got = intensities_case1(&p, Form::Corrected).unwrap();
        assert!(got.regime.is_exact());
        let (i1, i2) = oracle(&p, CouplingCase::MechOnCavity1);
        assert_rel(got.value.i1, i1, 1e-9);
        assert_rel(got.value.i2, i2, 1e-9);
    }

    #[test]
    fn case1_as_printed_disagrees_with_oracle() {
        let p = point(4.3, 2.0, 1.0, 0.0, SystemParams { delta2: 2.5, ..Default::default() });
        let printed = intensities_case1(&p, Form::AsPrinted).unwrap().value;
        let (i1, _) = oracle(&p, CouplingCase::MechOnCavity1);
        assert!((printed.i1 - i1).abs() > 1e-3 * i1);
        let eta = efficiency_numeric(&p, CouplingCase::MechOnCavity1).unwrap();
        let eta_printed = efficiency_case1(&p, Form::AsPrinted).unwrap().value;
        assert!((eta_printed - eta).abs() > 1e-3 * eta);
    }

    #[test]
    fn regime_violation_is_flagged() {
        let p = point(4.3, 2.0, 1.0, 0.0, SystemParams { delta1: 0.2, delta_d: 0.1, ..Default::default() });
        let got = intensities_case1(&p, Form::Corrected).unwrap();
        assert_eq!(got.regime.violations.len(), 2);
        let q = point(4.3, 2.0, 0.0, 1.0, SystemParams { delta2: 0.3, ..Default::default() });
        assert!(!intensities_case2(&q, Form::Corrected).unwrap().regime.is_exact());
    }

    #[test]
    fn cases_coincide_without_optomechanics() {
        let p = point(2.7, 1.3, 0.0, 0.0, SystemParams::default());
        let a = intensities_case1(&p, Form::Corrected).unwrap().value;
        let b = intensities_case2(&p, Form::Corrected).unwrap().value;
        assert_rel(a.i1, b.i1, 1e-12);
        assert_rel(a.i2, b.i2, 1e-12);
    }

    #[test]
    fn case2_matches_oracle_at_fig2a_point() {
        let p = point(4.3, 3.0, 0.0, 1.0, SystemParams { delta1: 0.6, ..Default::default() });
        let got = intensities_case2(&p, Form::Corrected).unwrap();
        assert!(got.regime.is_exact());
        let (i1, i2) = oracle(&p, CouplingCase::MechOnCavity2);
        assert_rel(got.value.i1, i1, 1e-9);
        assert_rel(got.value.i2, i2, 1e-9);
    }

    #[test]
    fn case2_emission_peak_near_three() {
        let base = SystemParams { delta1: 0.6, ..Default::default() };
        let xs: Vec<f64> = (0..=200).map(|k| 10.0 * k as f64 / 200.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&d2| intensities_case2(&point(4.3, d2, 0.0, 1.0, base), Form::Corrected).unwrap().value.i2)
            .collect();
        let k = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
        assert!(k > 0 && k < ys.len() - 1);
        assert!((xs[k] - 3.0).abs() <= 0.5, "peak at {}", xs[k]);
    }

    #[test]
    fn efficiency_vanishes_without_cooperativity_or_output_coupling() {
        let p = point(0.0, 2.0, 1.0, 0.0, SystemParams { delta2: 2.5, ..Default::default() });
        assert_eq!(efficiency_case1(&p, Form::Corrected).unwrap().value, 0.0);
        assert_eq!(efficiency_case1(&p, Form::AsPrinted).unwrap().value, 0.0);
        let q = point(3.0, 2.0, 1.0, 0.0, SystemParams { kappa1_ext: 0.0, kappa2_ext: 0.0, ..Default::default() });
        assert_eq!(efficiency_case1(&q, Form::Corrected).unwrap().value, 0.0);
        assert_eq!(efficiency_case1(&q, Form::AsPrinted).unwrap().value, 0.0);
        let r = point(3.0, 0.0, 0.0, 1.0, SystemParams::default());
        assert_eq!(efficiency_case2(&r, Form::Corrected).unwrap().value, 0.0);
    }

    // Oracle value frozen from numpy: D1=D2=4.3, C1=1, Δ2=2.5, η1=η2=0.9.
    #[test]
    fn fig4c_golden_efficiency() {
        let p = point(4.3, 4.3, 1.0, 0.0, SystemParams { delta2: 2.5, ..Default::default() });
        let eta = efficiency_case1(&p, Form::Corrected).unwrap().value;
        assert_rel(eta, 0.07619553345965904, 1e-9);
        assert_rel(eta, efficiency_numeric(&p, CouplingCase::MechOnCavity1).unwrap(), 1e-9);
    }

    #[test]
    fn case2_printed_efficiency_matches_intensity_route() {
        for (d1, d2, c2, delta1) in [(4.3, 4.3, 1.0, 0.6), (0.3, 8.0, 10.0, -0.6), (6.3, 1.2, 50.0, 1.7)] {
            let p = point(d1, d2, 0.0, c2, SystemParams { delta1, kappa2_ext: 0.7, ..Default::default() });
            let a = efficiency_case2(&p, Form::Corrected).unwrap().value;
            let b = efficiency_case2(&p, Form::AsPrinted).unwrap().value;
            assert_rel(a, b, 1e-12);
            assert_rel(a, efficiency_numeric(&p, CouplingCase::MechOnCavity2).unwrap(), 1e-9);
        }
    }

    #[test]
    fn fig4a_efficiency_is_unimodal() {
        let base = SystemParams { delta1: 0.6, ..Default::default() };
        let etas: Vec<f64> = (0..=200)
            .map(|k| {
                let d2 = 10.0 * k as f64 / 200.0;
                efficiency_case2(&point(4.3, d2, 0.0, 1.0, base), Form::Corrected).unwrap().value
            })
            .collect();
        let k = (0..etas.len()).max_by(|&a, &b| etas[a].total_cmp(&etas[b])).unwrap();
        assert!(etas[..=k].windows(2).all(|w| w[1] > w[0]));
        assert!(etas[k..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn red_detuned_cooperativity_lowers_efficiency() {
        let base = SystemParams { delta1: -0.6, ..Default::default() };
        for k in 1..=200 {
            let d2 = 10.0 * k as f64 / 200.0;
            let low = efficiency_case2(&point(4.3, d2, 0.0, 1.0, base), Form::Corrected).unwrap().value;
            let high = efficiency_case2(&point(4.3, d2, 0.0, 10.0, base), Form::Corrected).unwrap().value;
            assert!(high < low, "d2 = {d2}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn efficiency_is_kappa2_ext_times_intensity(
            ld1 in -2.0f64..2.0, ld2 in -2.0f64..2.0, lc in -2.0f64..2.0, det in -3.0f64..3.0,
            e2 in 0.1f64..1.0,
        ) {
            let base1 = SystemParams { delta2: det, kappa2_ext: e2, ..Default::default() };
            let p = point(10f64.powf(ld1), 10f64.powf(ld2), 10f64.powf(lc), 0.0, base1);
            let i2 = intensities_case1(&p, Form::Corrected).unwrap().value.i2;
            prop_assert_eq!(efficiency_case1(&p, Form::Corrected).unwrap().value, p.kappa2_ext * i2 / p.input_flux());
            let eta = efficiency_numeric(&p, CouplingCase::MechOnCavity1).unwrap();
            prop_assert!((p.kappa2_ext * i2 - eta).abs() <= 1e-9 * eta);

            let base2 = SystemParams { delta1: det, kappa2_ext: e2, ..Default::default() };
            let q = point(10f64.powf(ld1), 10f64.powf(ld2), 0.0, 10f64.powf(lc), base2);
            let i2 = intensities_case2(&q, Form::Corrected).unwrap().value.i2;
            prop_assert_eq!(efficiency_case2(&q, Form::Corrected).unwrap().value, q.kappa2_ext * i2 / q.input_flux());
            let eta = efficiency_numeric(&q, CouplingCase::MechOnCavity2).unwrap();
            prop_assert!((q.kappa2_ext * i2 - eta).abs() <= 1e-9 * eta);
        }
    }
}
