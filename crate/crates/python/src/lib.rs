//! Python bindings for `qdcavity`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::qdcavity::closed_form::{self, Form};
use ::qdcavity::steady_state::{self, ModeState};
use ::qdcavity::{dark_bright, model, sweep, validation, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Singular { .. } | Error::DegenerateBasis | Error::ZeroIntensity | Error::Regime(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn parse_form(s: &str) -> PyResult<Form> {
    match s {
        "corrected" => Ok(Form::Corrected),
        "as_printed" => Ok(Form::AsPrinted),
        other => Err(PyValueError::new_err(format!("unknown form `{other}` (expected corrected or as_printed)"))),
    }
}

fn case_for(p: &model::SystemParams, case: Option<&str>) -> PyResult<model::CouplingCase> {
    case.map(parse).unwrap_or_else(|| Ok(model::CouplingCase::infer(p)))
}

/// Rates, detunings, couplings and drive; defaults are the shared base rates.
#[pyclass(name = "SystemParams", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    kappa1: f64,
    kappa2: f64,
    kappa1_ext: f64,
    kappa2_ext: f64,
    gamma_qd: f64,
    gamma_m: f64,
    omega_m: f64,
    delta1: f64,
    delta2: f64,
    delta_d: f64,
    g1: f64,
    g2: f64,
    om1: f64,
    om2: f64,
    a_in: Complex64,
}

impl From<model::SystemParams> for PySystemParams {
    fn from(p: model::SystemParams) -> Self {
        Self {
            kappa1: p.kappa1,
            kappa2: p.kappa2,
            kappa1_ext: p.kappa1_ext,
            kappa2_ext: p.kappa2_ext,
            gamma_qd: p.gamma_qd,
            gamma_m: p.gamma_m,
            omega_m: p.omega_m,
            delta1: p.delta1,
            delta2: p.delta2,
            delta_d: p.delta_d,
            g1: p.g1,
            g2: p.g2,
            om1: p.om1,
            om2: p.om2,
            a_in: p.a_in,
        }
    }
}

impl From<&PySystemParams> for model::SystemParams {
    fn from(p: &PySystemParams) -> Self {
        Self {
            kappa1: p.kappa1,
            kappa2: p.kappa2,
            kappa1_ext: p.kappa1_ext,
            kappa2_ext: p.kappa2_ext,
            gamma_qd: p.gamma_qd,
            gamma_m: p.gamma_m,
            omega_m: p.omega_m,
            delta1: p.delta1,
            delta2: p.delta2,
            delta_d: p.delta_d,
            g1: p.g1,
            g2: p.g2,
            om1: p.om1,
            om2: p.om2,
            a_in: p.a_in,
        }
    }
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = Self::from(model::SystemParams::default());
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                match key.as_str() {
                    "kappa1" => p.kappa1 = v.extract()?,
                    "kappa2" => p.kappa2 = v.extract()?,
                    "kappa1_ext" => p.kappa1_ext = v.extract()?,
                    "kappa2_ext" => p.kappa2_ext = v.extract()?,
                    "gamma_qd" => p.gamma_qd = v.extract()?,
                    "gamma_m" => p.gamma_m = v.extract()?,
                    "omega_m" => p.omega_m = v.extract()?,
                    "delta1" => p.delta1 = v.extract()?,
                    "delta2" => p.delta2 = v.extract()?,
                    "delta_d" => p.delta_d = v.extract()?,
                    "g1" => p.g1 = v.extract()?,
                    "g2" => p.g2 = v.extract()?,
                    "om1" => p.om1 = v.extract()?,
                    "om2" => p.om2 = v.extract()?,
                    "a_in" => p.a_in = v.extract()?,
                    other => return Err(PyValueError::new_err(format!("unknown parameter `{other}`"))),
                }
            }
        }
        Ok(p)
    }

    fn eta1(&self) -> f64 {
        model::SystemParams::from(self).eta1()
    }

    fn eta2(&self) -> f64 {
        model::SystemParams::from(self).eta2()
    }

    /// List of violated invariants; empty when valid.
    fn validate(&self) -> Vec<String> {
        model::validate(&self.into()).iter().map(|v| v.to_string()).collect()
    }

    fn copy(&self) -> Self {
        self.clone()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", model::SystemParams::from(self))
    }
}

#[pyclass(name = "Cooperativities", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyCooperativities {
    d1: f64,
    d2: f64,
    c1: f64,
    c2: f64,
}

#[pymethods]
impl PyCooperativities {
    #[new]
    #[pyo3(signature = (d1=0.0, d2=0.0, c1=0.0, c2=0.0))]
    fn new(d1: f64, d2: f64, c1: f64, c2: f64) -> Self {
        Self { d1, d2, c1, c2 }
    }

    fn __repr__(&self) -> String {
        format!("Cooperativities(d1={}, d2={}, c1={}, c2={})", self.d1, self.d2, self.c1, self.c2)
    }
}

impl From<&PyCooperativities> for model::Cooperativities {
    fn from(c: &PyCooperativities) -> Self {
        Self { d1: c.d1, d2: c.d2, c1: c.c1, c2: c.c2 }
    }
}

#[pyfunction]
fn cooperativities(p: PyRef<'_, PySystemParams>) -> PyResult<PyCooperativities> {
    let c = model::cooperativities_from_params(&(&*p).into()).map_err(err)?;
    Ok(PyCooperativities { d1: c.d1, d2: c.d2, c1: c.c1, c2: c.c2 })
}

/// Couplings implied by `c` on top of `base` (default base rates when omitted).
#[pyfunction]
#[pyo3(signature = (c, base=None))]
fn params_from_cooperativities(
    c: PyRef<'_, PyCooperativities>,
    base: Option<PyRef<'_, PySystemParams>>,
) -> PyResult<PySystemParams> {
    let base = base.map(|b| model::SystemParams::from(&*b)).unwrap_or_default();
    model::params_from_cooperativities(&(&*c).into(), &base).map(Into::into).map_err(err)
}

type Amplitudes = (Complex64, Complex64, Complex64, Complex64);

fn amplitudes(s: &ModeState) -> Amplitudes {
    (s.a1, s.a2, s.b, s.sigma)
}

/// Steady amplitudes `(a1, a2, b, sigma)`.
#[pyfunction]
#[pyo3(signature = (p, case=None))]
fn solve_steady(p: PyRef<'_, PySystemParams>, case: Option<&str>) -> PyResult<Amplitudes> {
    let p: model::SystemParams = (&*p).into();
    let sys = steady_state::build_drift(&p, case_for(&p, case)?).map_err(err)?;
    steady_state::solve_steady(&sys).map(|s| amplitudes(&s)).map_err(err)
}

/// Single-point report as a dict.
#[pyfunction]
#[pyo3(signature = (p, case=None))]
fn steady_report<'py>(py: Python<'py>, p: PyRef<'_, PySystemParams>, case: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let p: model::SystemParams = (&*p).into();
    let r = steady_state::steady_report(&p, case_for(&p, case)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("case", r.case.as_str())?;
    d.set_item("state", amplitudes(&r.state))?;
    d.set_item("i1", r.i1)?;
    d.set_item("i2", r.i2)?;
    d.set_item("p1", r.p1)?;
    d.set_item("p2", r.p2)?;
    d.set_item("eta", r.eta)?;
    d.set_item("chi", r.chi)?;
    d.set_item("i1_closed", r.closed.i1)?;
    d.set_item("i2_closed", r.closed.i2)?;
    d.set_item("eta_closed", r.closed.eta)?;
    d.set_item("chi_closed", r.closed.chi)?;
    d.set_item("notes", r.notes)?;
    Ok(d)
}

/// `eta = kappa2_ext |a2|^2 / |A_in|^2` from the linear solve.
#[pyfunction]
#[pyo3(signature = (p, case=None))]
fn efficiency_numeric(p: PyRef<'_, PySystemParams>, case: Option<&str>) -> PyResult<f64> {
    let p: model::SystemParams = (&*p).into();
    steady_state::efficiency_numeric(&p, case_for(&p, case)?).map_err(err)
}

/// Closed-form `(i1, i2, regime)`; `regime` is `"exact"` inside the validity region.
#[pyfunction]
#[pyo3(signature = (p, case, form="corrected"))]
fn intensities(p: PyRef<'_, PySystemParams>, case: &str, form: &str) -> PyResult<(f64, f64, String)> {
    let p: model::SystemParams = (&*p).into();
    let form = parse_form(form)?;
    let c = match parse(case)? {
        model::CouplingCase::MechOnCavity1 => closed_form::intensities_case1(&p, form),
        model::CouplingCase::MechOnCavity2 => closed_form::intensities_case2(&p, form),
        model::CouplingCase::General => return Err(PyValueError::new_err("no closed form in the general case")),
    }
    .map_err(err)?;
    Ok((c.value.i1, c.value.i2, c.regime.to_string()))
}

/// Closed-form conversion efficiency `(eta, regime)`.
#[pyfunction]
#[pyo3(signature = (p, case, form="corrected"))]
fn efficiency(p: PyRef<'_, PySystemParams>, case: &str, form: &str) -> PyResult<(f64, String)> {
    let p: model::SystemParams = (&*p).into();
    let form = parse_form(form)?;
    let c = match parse(case)? {
        model::CouplingCase::MechOnCavity1 => closed_form::efficiency_case1(&p, form),
        model::CouplingCase::MechOnCavity2 => closed_form::efficiency_case2(&p, form),
        model::CouplingCase::General => return Err(PyValueError::new_err("no closed form in the general case")),
    }
    .map_err(err)?;
    Ok((c.value, c.regime.to_string()))
}

/// `(a_B, a_D)` for cavity amplitudes `a1, a2` and dot couplings `g1, g2`.
#[pyfunction]
fn to_dark_bright(a1: Complex64, a2: Complex64, g1: f64, g2: f64) -> PyResult<(Complex64, Complex64)> {
    let db = dark_bright::to_dark_bright(a1, a2, g1, g2).map_err(err)?;
    Ok((db.a_b, db.a_d))
}

#[pyfunction]
fn from_dark_bright(a_b: Complex64, a_d: Complex64, g1: f64, g2: f64) -> PyResult<(Complex64, Complex64)> {
    let db = dark_bright::DarkBrightState { a_b, a_d, g_tilde: g1.hypot(g2) };
    dark_bright::from_dark_bright(&db, g1, g2).map_err(err)
}

/// Closed-form bright and dark amplitudes `(a_B, a_D)` at zero detuning.
#[pyfunction]
fn db_steady(p: PyRef<'_, PySystemParams>, case: &str) -> PyResult<(Complex64, Complex64)> {
    let p: model::SystemParams = (&*p).into();
    let (s, _) = match parse(case)? {
        model::CouplingCase::MechOnCavity1 => dark_bright::db_steady_case1(&p),
        model::CouplingCase::MechOnCavity2 => dark_bright::db_steady_case2(&p),
        model::CouplingCase::General => return Err(PyValueError::new_err("no closed form in the general case")),
    }
    .map_err(err)?;
    Ok((s.a_b, s.a_d))
}

/// Dark-mode fraction of the linear-solve state.
#[pyfunction]
#[pyo3(signature = (p, case=None))]
fn dark_fraction(p: PyRef<'_, PySystemParams>, case: Option<&str>) -> PyResult<f64> {
    let p: model::SystemParams = (&*p).into();
    let sys = steady_state::build_drift(&p, case_for(&p, case)?).map_err(err)?;
    let st = steady_state::solve_steady(&sys).map_err(err)?;
    dark_bright::to_dark_bright(st.a1, st.a2, p.g1, p.g2)
        .and_then(|db| dark_bright::dark_fraction(&db))
        .map_err(err)
}

#[pyfunction]
fn chi_closed_case1(d1: f64, d2: f64) -> PyResult<f64> {
    dark_bright::chi_closed_case1(d1, d2).map_err(err)
}

#[pyfunction]
fn chi_closed_case2(d1: f64, d2: f64, c2: f64, omega_m: f64, gamma_m: f64) -> PyResult<f64> {
    dark_bright::chi_closed_case2(d1, d2, c2, omega_m, gamma_m).map_err(err)
}

/// RK4 trajectory `(times, states)`; `x0` is `"zero"` or `"steady"`.
#[pyfunction]
#[pyo3(signature = (p, t_end, dt=None, case=None, x0="zero", every=1))]
fn integrate(
    p: PyRef<'_, PySystemParams>,
    t_end: f64,
    dt: Option<f64>,
    case: Option<&str>,
    x0: &str,
    every: usize,
) -> PyResult<(Vec<f64>, Vec<Amplitudes>)> {
    let p: model::SystemParams = (&*p).into();
    let sys = steady_state::build_drift(&p, case_for(&p, case)?).map_err(err)?;
    let start = match x0 {
        "zero" => ModeState::zero(),
        "steady" => steady_state::solve_steady(&sys).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("x0 must be `zero` or `steady`, got `{other}`"))),
    };
    let dt = dt.unwrap_or_else(|| sys.max_step());
    let traj = steady_state::integrate_sampled(&sys, start, t_end, dt, every).map_err(err)?;
    Ok((traj.times, traj.states.iter().map(amplitudes).collect()))
}

fn preset(id: &str, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<sweep::FigurePreset> {
    let mut kv = Vec::new();
    if let Some(d) = overrides {
        for (k, v) in d.iter() {
            kv.push((k.extract::<String>()?, v.str()?.to_string()));
        }
    }
    sweep::figure_preset(id).and_then(|p| p.with_overrides(&kv)).map_err(err)
}

/// Figure data as `{"series_param": ..., "series": {value: {column: [..]}}, "notes": [..]}`.
#[pyfunction]
#[pyo3(signature = (id, overrides=None))]
fn figure<'py>(py: Python<'py>, id: &str, overrides: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let table = sweep::run_figure(&preset(id, overrides)?).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("figure", &table.id)?;
    out.set_item("series_param", table.series_param.as_str())?;
    let series = PyDict::new(py);
    let mut notes = Vec::new();
    for (v, t) in &table.series {
        let cols = PyDict::new(py);
        for name in &t.columns {
            cols.set_item(name, t.column(name).map_err(err)?)?;
        }
        series.set_item(v, cols)?;
        notes.clone_from(&t.metadata.notes);
    }
    out.set_item("series", series)?;
    out.set_item("notes", notes)?;
    Ok(out)
}

/// Figure data rendered exactly as the `figure` subcommand writes it.
#[pyfunction]
#[pyo3(signature = (id, overrides=None, format="csv"))]
fn figure_text(id: &str, overrides: Option<&Bound<'_, PyDict>>, format: &str) -> PyResult<String> {
    let table = sweep::run_figure(&preset(id, overrides)?).map_err(err)?;
    let bytes = table.to_bytes(parse(format)?);
    String::from_utf8(bytes).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `(id, name, measured, tolerance, passed, detail)`
type CheckRow = (u8, String, f64, f64, bool, String);

/// Runs the self-checks.
#[pyfunction]
#[pyo3(signature = (tolerance_scale=1.0))]
fn run_validation(tolerance_scale: f64) -> PyResult<Vec<CheckRow>> {
    let opts = validation::ValidationOptions { tolerance_scale };
    let checks = validation::run_all(&opts).map_err(err)?;
    Ok(checks
        .into_iter()
        .map(|c| (c.id, c.name.to_string(), c.measured, c.tolerance, c.passed, c.detail))
        .collect())
}

#[pymodule]
fn qdcavity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyCooperativities>()?;
    m.add("FIGURE_IDS", sweep::FIGURE_IDS.to_vec())?;
    m.add_function(wrap_pyfunction!(cooperativities, m)?)?;
    m.add_function(wrap_pyfunction!(params_from_cooperativities, m)?)?;
    m.add_function(wrap_pyfunction!(solve_steady, m)?)?;
    m.add_function(wrap_pyfunction!(steady_report, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(intensities, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(to_dark_bright, m)?)?;
    m.add_function(wrap_pyfunction!(from_dark_bright, m)?)?;
    m.add_function(wrap_pyfunction!(db_steady, m)?)?;
    m.add_function(wrap_pyfunction!(dark_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(chi_closed_case1, m)?)?;
    m.add_function(wrap_pyfunction!(chi_closed_case2, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    m.add_function(wrap_pyfunction!(figure_text, m)?)?;
    m.add_function(wrap_pyfunction!(run_validation, m)?)?;
    Ok(())
}
