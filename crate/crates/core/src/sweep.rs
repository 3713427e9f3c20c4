//! One-parameter sweeps and the figure presets built on them.
//!
//! Every grid point is evaluated through the linear solve. Closed-form
//! columns are emitted only when every point of the sweep lies inside the
//! closed form's regime; otherwise the column is dropped and a note is added
//! to the table metadata.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::closed_form::{self, Form};
use crate::dark_bright;
use crate::error::{Error, Result};
use crate::model::{cooperativities_from_params, params_from_cooperativities, Cooperativities, CouplingCase, SystemParams};
use crate::output::fmt_num;
use crate::steady_state::{build_drift, emission_powers, solve_steady};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    D1,
    D2,
    C1,
    C2,
    Delta1,
    Delta2,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::D1 => "d1",
            Self::D2 => "d2",
            Self::C1 => "c1",
            Self::C2 => "c2",
            Self::Delta1 => "delta1",
            Self::Delta2 => "delta2",
        }
    }

    pub fn is_cooperativity(self) -> bool {
        matches!(self, Self::D1 | Self::D2 | Self::C1 | Self::C2)
    }

    /// Sets this parameter to `x`, holding the other cooperativities fixed.
    pub fn apply(self, base: &SystemParams, x: f64) -> Result<SystemParams> {
        match self {
            Self::Delta1 => Ok(SystemParams { delta1: x, ..*base }),
            Self::Delta2 => Ok(SystemParams { delta2: x, ..*base }),
            _ => {
                let mut c = cooperativities_from_params(base)?;
                *self.coop_mut(&mut c) = x;
                params_from_cooperativities(&c, base)
            }
        }
    }

    fn coop_mut(self, c: &mut Cooperativities) -> &mut f64 {
        match self {
            Self::D1 => &mut c.d1,
            Self::D2 => &mut c.d2,
            Self::C1 => &mut c.c1,
            Self::C2 => &mut c.c2,
            Self::Delta1 | Self::Delta2 => unreachable!("detunings are not cooperativities"),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [Self::D1, Self::D2, Self::C1, Self::C2, Self::Delta1, Self::Delta2]
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown sweep parameter `{s}` (expected d1, d2, c1, c2, delta1 or delta2)"))
    }
}

/// A tabulated quantity. The `*_closed` columns come from closed forms, the
/// rest from the linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    P1,
    P2,
    Eta,
    ChiNumeric,
    ChiClosed,
    I1,
    I2,
    I1Closed,
    I2Closed,
    EtaClosed,
}

impl Output {
    pub const ALL: [Output; 10] = [
        Self::P1,
        Self::P2,
        Self::Eta,
        Self::ChiNumeric,
        Self::ChiClosed,
        Self::I1,
        Self::I2,
        Self::I1Closed,
        Self::I2Closed,
        Self::EtaClosed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::P1 => "p1",
            Self::P2 => "p2",
            Self::Eta => "eta",
            Self::ChiNumeric => "chi_numeric",
            Self::ChiClosed => "chi_closed",
            Self::I1 => "i1",
            Self::I2 => "i2",
            Self::I1Closed => "i1_closed",
            Self::I2Closed => "i2_closed",
            Self::EtaClosed => "eta_closed",
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(self, Self::ChiClosed | Self::I1Closed | Self::I2Closed | Self::EtaClosed)
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown output `{s}`"))
    }
}

/// Parses a comma-separated output list such as `p1,p2,eta`.
pub fn parse_outputs(s: &str) -> std::result::Result<Vec<Output>, String> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub base: SystemParams,
    pub case: CouplingCase,
    pub outputs: Vec<Output>,
}

impl SweepSpec {
    pub const DEFAULT_STEPS: usize = 201;

    /// `D₂ ∈ [0, 10]` on the default grid.
    pub fn d2_default(base: SystemParams, case: CouplingCase, outputs: Vec<Output>) -> Self {
        Self { param: SweepParam::D2, from: 0.0, to: 10.0, steps: Self::DEFAULT_STEPS, base, case, outputs }
    }

    /// Grid points `from + (to − from)·k/(steps − 1)`, hitting both ends exactly.
    pub fn grid(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.from + (self.to - self.from) * (k as f64) / n).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSweep(m));
        if !self.from.is_finite() || !self.to.is_finite() || !(self.from < self.to) {
            return bad(format!("need finite from < to, got [{}, {}]", self.from, self.to));
        }
        if self.steps < 2 {
            return bad(format!("steps must be at least 2, got {}", self.steps));
        }
        if self.outputs.is_empty() {
            return bad("no outputs requested".into());
        }
        if self.param.is_cooperativity() && self.from < 0.0 {
            return bad(format!("{} must stay non-negative, range starts at {}", self.param, self.from));
        }
        match (self.case, self.param) {
            (CouplingCase::MechOnCavity1, SweepParam::C2) | (CouplingCase::MechOnCavity2, SweepParam::C1) => {
                return bad(format!("{} cannot be swept in case {}", self.param, self.case));
            }
            _ => {}
        }
        self.base.check_with_case(self.case)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub preset: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub metadata: SweepMetadata,
    /// Column names; the first is the swept parameter.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| fmt_num(v)))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spec": self.spec,
            "metadata": self.metadata,
            "rows": self.rows_json(),
        })
    }

    fn rows_json(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(|&v| json!(v))).collect();
                Value::Object(obj)
            })
            .collect()
    }
}

pub fn write_json<W: Write>(value: &Value, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}

/// Why a closed-form output cannot be produced at `p`, if it cannot.
fn closed_unavailable(out: Output, p: &SystemParams, case: CouplingCase) -> Option<String> {
    if case == CouplingCase::General {
        return Some("no closed form in the general coupling case".into());
    }
    match out {
        Output::ChiClosed => dark_bright::check_db_regime(p, case).err().map(|e| e.to_string()),
        _ => {
            let regime = match case {
                CouplingCase::MechOnCavity1 => closed_form::regime_case1(p),
                _ => closed_form::regime_case2(p),
            };
            (!regime.is_exact()).then(|| regime.to_string())
        }
    }
}

fn evaluate(outputs: &[Output], p: &SystemParams, case: CouplingCase, notes: &mut Vec<String>) -> Result<Vec<f64>> {
    let st = solve_steady(&build_drift(p, case)?)?;
    let (p1, p2) = emission_powers(&st, p)?;
    let c = cooperativities_from_params(p)?;
    let closed = || match case {
        CouplingCase::MechOnCavity1 => closed_form::intensities_case1(p, Form::Corrected),
        _ => closed_form::intensities_case2(p, Form::Corrected),
    };
    outputs
        .iter()
        .map(|&o| {
            Ok(match o {
                Output::P1 => p1,
                Output::P2 | Output::Eta => p2,
                Output::I1 => st.a1.norm_sqr(),
                Output::I2 => st.a2.norm_sqr(),
                Output::ChiNumeric => {
                    match dark_bright::to_dark_bright(st.a1, st.a2, p.g1, p.g2)
                        .and_then(|db| dark_bright::dark_fraction(&db))
                    {
                        Ok(v) => v,
                        Err(e) => {
                            let note = format!("chi_numeric is NaN where {e}");
                            if !notes.contains(&note) {
                                notes.push(note);
                            }
                            f64::NAN
                        }
                    }
                }
                Output::ChiClosed => match case {
                    CouplingCase::MechOnCavity1 => dark_bright::chi_closed_case1(c.d1, c.d2)?,
                    _ => dark_bright::chi_closed_case2(c.d1, c.d2, c.c2, p.omega_m, p.gamma_m)?,
                },
                Output::I1Closed => closed()?.value.i1,
                Output::I2Closed => closed()?.value.i2,
                Output::EtaClosed => p.kappa2_ext * closed()?.value.i2 / p.input_flux(),
            })
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let xs = spec.grid();
    let points = xs.iter().map(|&x| spec.param.apply(&spec.base, x)).collect::<Result<Vec<_>>>()?;

    let mut notes = Vec::new();
    let mut outputs = Vec::new();
    for &o in &spec.outputs {
        if outputs.contains(&o) {
            continue;
        }
        let reason = if o.is_closed() {
            points.iter().find_map(|p| closed_unavailable(o, p, spec.case))
        } else {
            None
        };
        match reason {
            Some(r) => notes.push(format!("{o} omitted: {r}")),
            None => outputs.push(o),
        }
    }

    let mut rows = Vec::with_capacity(xs.len());
    for (x, p) in xs.iter().zip(&points) {
        let mut row = vec![*x];
        row.extend(evaluate(&outputs, p, spec.case, &mut notes)?);
        rows.push(row);
    }
    let mut columns = vec![spec.param.as_str().to_string()];
    columns.extend(outputs.iter().map(|o| o.as_str().to_string()));
    Ok(SweepTable { spec: spec.clone(), metadata: SweepMetadata { preset: None, notes }, columns, rows })
}

/// Grid argmax of `column`, or `None` when the maximum sits on the boundary.
pub fn find_peak(table: &SweepTable, column: &str) -> Result<Option<(f64, f64)>> {
    let ys = table.column(column)?;
    let xs = table.xs();
    let best = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| !y.is_nan())
        .fold(None::<(usize, f64)>, |acc, (k, &y)| match acc {
            Some((_, top)) if top >= y => acc,
            _ => Some((k, y)),
        });
    Ok(match best {
        Some((k, y)) if k > 0 && k + 1 < ys.len() => Some((xs[k], y)),
        _ => None,
    })
}

pub const FIGURE_IDS: [&str; 14] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b",
    "fig5c", "fig5d",
];

/// A figure panel: one `D₂` sweep per value of the series cooperativity.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: String,
    pub series_param: SweepParam,
    pub series_values: Vec<f64>,
    /// Fixed cooperativity `D₁` and the swept detuning live in `base`.
    pub spec: SweepSpec,
    pub notes: Vec<String>,
}

const EMISSION_NOTE: &str =
    "p1, p2 are output-flux ratios kappa_i_ext*|a_i|^2/|A_in|^2; absolute values are not comparable to other normalizations";

pub fn figure_preset(id: &str) -> Result<FigurePreset> {
    use CouplingCase::{MechOnCavity1 as Cav1, MechOnCavity2 as Cav2};
    use Output::*;

    // (case, d1, delta1, delta2, outputs)
    let (case, d1, delta1, delta2, outputs): (_, _, _, _, &[Output]) = match id {
        "fig2a" => (Cav2, 4.3, 0.6, 0.0, &[P1, P2]),
        "fig2b" => (Cav2, 4.3, -0.6, 0.0, &[P1, P2]),
        "fig2c" => (Cav2, 6.3, 0.6, 0.0, &[P1, P2]),
        "fig2d" => (Cav2, 6.3, -0.6, 0.0, &[P1, P2]),
        "fig3a" => (Cav1, 4.3, 0.0, 2.5, &[P1, P2]),
        "fig3b" => (Cav1, 4.3, 0.0, -2.5, &[P1, P2]),
        "fig4a" => (Cav2, 4.3, 0.6, 0.0, &[Eta]),
        "fig4b" => (Cav2, 4.3, -0.6, 0.0, &[Eta]),
        "fig4c" => (Cav1, 4.3, 0.0, 2.5, &[Eta]),
        "fig4d" => (Cav1, 4.3, 0.0, -2.5, &[Eta]),
        "fig5a" => (Cav2, 3.5, 0.0, 0.0, &[ChiNumeric, ChiClosed, P1, P2]),
        "fig5b" => (Cav1, 3.5, 0.0, 0.0, &[ChiNumeric, ChiClosed, P1, P2]),
        "fig5c" => (Cav2, 6.5, 0.0, 0.0, &[ChiNumeric, ChiClosed, P1, P2]),
        "fig5d" => (Cav1, 6.5, 0.0, 0.0, &[ChiNumeric, ChiClosed, P1, P2]),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let series_param = if case == Cav1 { SweepParam::C1 } else { SweepParam::C2 };
    let rates = SystemParams { delta1, delta2, ..SystemParams::default() };
    let base = params_from_cooperativities(&Cooperativities { d1, ..Default::default() }, &rates)?;

    let mut notes = Vec::new();
    if outputs.contains(&P1) {
        notes.push(EMISSION_NOTE.to_string());
    }
    if !id.starts_with("fig4") {
        notes.push("assumed: eta1 = eta2 = 0.9".to_string());
    }
    match (id.as_bytes()[3], case) {
        (b'5', _) => notes.push("assumed: delta1 = delta2 = delta_d = 0, gamma_qd = 0.3".to_string()),
        (_, Cav2) => notes.push("assumed: delta2 = delta_d = 0".to_string()),
        (_, _) => {
            notes.push("assumed: delta1 = delta_d = 0".to_string());
            if id.starts_with("fig3") {
                notes.push("the +-2.5 detuning is applied to cavity 2 (delta2)".to_string());
            }
        }
    }

    Ok(FigurePreset {
        id: id.to_string(),
        series_param,
        series_values: vec![1.0, 10.0],
        spec: SweepSpec::d2_default(base, case, outputs.to_vec()),
        notes,
    })
}

impl FigurePreset {
    /// The sweep for one series value.
    pub fn series_spec(&self, value: f64) -> Result<SweepSpec> {
        let base = self.series_param.apply(&self.spec.base, value)?;
        Ok(SweepSpec { base, ..self.spec.clone() })
    }

    /// Applies `key=value` overrides. Cooperativities stay fixed when rates
    /// change; overriding the series parameter leaves a single series.
    pub fn with_overrides(mut self, overrides: &[(String, String)]) -> Result<Self> {
        let bad = |m: String| Error::InvalidSweep(m);
        let mut coops = cooperativities_from_params(&self.spec.base)?;
        let mut rates = self.spec.base;
        let mut etas = (None, None);
        let mut outputs_override = None;

        for (key, raw) in overrides {
            if key == "outputs" {
                outputs_override = Some(parse_outputs(raw).map_err(bad)?);
                self.notes.push(format!("override {key}={raw}"));
                continue;
            }
            let value: f64 = raw.trim().parse().map_err(|_| bad(format!("override `{key}`: `{raw}` is not a number")))?;
            match key.as_str() {
                "from" => self.spec.from = value,
                "to" => self.spec.to = value,
                "steps" => {
                    if value < 2.0 || value.fract() != 0.0 {
                        return Err(bad(format!("override `steps`: need an integer >= 2, got {raw}")));
                    }
                    self.spec.steps = value as usize;
                }
                k if k == self.series_param.as_str() => self.series_values = vec![value],
                "d2" => return Err(bad("override `d2`: d2 is the swept parameter; use from/to".into())),
                "d1" => coops.d1 = value,
                "c1" => coops.c1 = value,
                "c2" => coops.c2 = value,
                "kappa1" => rates.kappa1 = value,
                "kappa2" => rates.kappa2 = value,
                "kappa1_ext" => rates.kappa1_ext = value,
                "kappa2_ext" => rates.kappa2_ext = value,
                "eta1" => etas.0 = Some(value),
                "eta2" => etas.1 = Some(value),
                "gamma_qd" => rates.gamma_qd = value,
                "gamma_m" => rates.gamma_m = value,
                "omega_m" => rates.omega_m = value,
                "delta1" => rates.delta1 = value,
                "delta2" => rates.delta2 = value,
                "delta_d" => rates.delta_d = value,
                "a_in" => rates.a_in = num_complex::Complex64::new(value, 0.0),
                other => return Err(bad(format!("unknown override key `{other}`"))),
            }
            self.notes.push(format!("override {key}={raw}"));
        }
        if let Some(e1) = etas.0 {
            rates.kappa1_ext = e1 * rates.kappa1;
        }
        if let Some(e2) = etas.1 {
            rates.kappa2_ext = e2 * rates.kappa2;
        }
        if let Some(outs) = outputs_override {
            self.spec.outputs = outs;
        }
        self.spec.base = params_from_cooperativities(&coops, &rates)?;
        self.spec.validate()?;
        Ok(self)
    }
}

/// All series of one figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub id: String,
    pub series_param: SweepParam,
    pub series: Vec<(f64, SweepTable)>,
}

pub fn run_figure(preset: &FigurePreset) -> Result<FigureTable> {
    let mut series = Vec::with_capacity(preset.series_values.len());
    for &v in &preset.series_values {
        let mut table = run_sweep(&preset.series_spec(v)?)?;
        table.metadata.preset = Some(preset.id.clone());
        let mut notes = preset.notes.clone();
        notes.append(&mut table.metadata.notes);
        table.metadata.notes = notes;
        series.push((v, table));
    }
    Ok(FigureTable { id: preset.id.clone(), series_param: preset.series_param, series })
}

impl FigureTable {
    pub fn get(&self, value: f64) -> Option<&SweepTable> {
        self.series.iter().find(|(v, _)| *v == value).map(|(_, t)| t)
    }

    /// Long format: the series parameter first, then the sweep columns.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let Some((_, first)) = self.series.first() else {
            return w.flush();
        };
        let mut header = vec![self.series_param.as_str().to_string()];
        header.extend(first.columns.iter().cloned());
        w.write_record(&header)?;
        for (v, table) in &self.series {
            for row in &table.rows {
                let mut rec = vec![fmt_num(*v)];
                rec.extend(row.iter().map(|&x| fmt_num(x)));
                w.write_record(&rec)?;
            }
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        let series: Vec<Value> = self
            .series
            .iter()
            .map(|(v, t)| {
                let mut obj = Map::new();
                obj.insert("value".into(), json!(v));
                obj.insert("spec".into(), json!(t.spec));
                obj.insert("metadata".into(), json!(t.metadata));
                obj.insert("rows".into(), Value::Array(t.rows_json()));
                Value::Object(obj)
            })
            .collect();
        json!({ "figure": self.id, "series_param": self.series_param, "series": series })
    }

    pub fn to_bytes(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf),
            Format::Json => write_json(&self.to_json(), &mut buf),
        }
        .expect("writing to a Vec cannot fail");
        buf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_spec(steps: usize) -> SweepSpec {
        SweepSpec {
            param: SweepParam::D2,
            from: 0.0,
            to: 10.0,
            steps,
            base: SystemParams::default(),
            case: CouplingCase::MechOnCavity1,
            outputs: vec![Output::P2, Output::Eta],
        }
    }

    fn table_from(xs: &[f64], ys: &[f64]) -> SweepTable {
        SweepTable {
            spec: trivial_spec(xs.len()),
            metadata: SweepMetadata::default(),
            columns: vec!["x".into(), "y".into()],
            rows: xs.iter().zip(ys).map(|(&x, &y)| vec![x, y]).collect(),
        }
    }

    #[test]
    fn trivial_base_gives_zero_transfer() {
        let t = run_sweep(&trivial_spec(2)).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.columns, ["d2", "p2", "eta"]);
        // D1 = 0: the dot never reaches cavity 2.
        for row in &t.rows {
            assert_eq!(row[1], 0.0);
            assert_eq!(row[2], 0.0);
        }
    }

    #[test]
    fn grid_is_exact_and_increasing() {
        let s = trivial_spec(201);
        let g = s.grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[200], 10.0);
        assert_eq!(g[60], 3.0);
        assert_eq!(g[86], 4.3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn invalid_specs() {
        let mut s = trivial_spec(1);
        assert!(matches!(run_sweep(&s), Err(Error::InvalidSweep(_))));
        s.steps = 5;
        s.from = 3.0;
        s.to = 1.0;
        assert!(run_sweep(&s).is_err());
        s.from = -1.0;
        s.to = 1.0;
        assert!(run_sweep(&s).is_err());
        let s = SweepSpec { param: SweepParam::C2, ..trivial_spec(5) };
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn peak_detection() {
        let xs: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let parabola: Vec<f64> = xs.iter().map(|x| 1.0 - x * x).collect();
        let (x, y) = find_peak(&table_from(&xs, &parabola), "y").unwrap().unwrap();
        assert!(x.abs() < 1e-12);
        assert!((y - 1.0).abs() < 1e-12);
        let rising: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        assert_eq!(find_peak(&table_from(&xs, &rising), "y").unwrap(), None);
        assert!(matches!(find_peak(&table_from(&xs, &rising), "z"), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn closed_columns_dropped_outside_regime() {
        let base = SystemParams { delta1: 0.6, ..Default::default() };
        let base = params_from_cooperativities(&Cooperativities { d1: 4.3, c2: 1.0, ..Default::default() }, &base)
            .unwrap();
        let spec = SweepSpec {
            outputs: vec![Output::P2, Output::I2Closed, Output::ChiClosed],
            ..SweepSpec::d2_default(base, CouplingCase::MechOnCavity2, vec![])
        };
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.columns, ["d2", "p2", "i2_closed"]);
        assert!(t.metadata.notes.iter().any(|n| n.starts_with("chi_closed omitted")));
    }

    #[test]
    fn detuning_sweep_keeps_couplings() {
        let base = params_from_cooperativities(&Cooperativities { d1: 2.0, d2: 1.0, ..Default::default() }, &SystemParams::default()).unwrap();
        let spec = SweepSpec { param: SweepParam::Delta1, from: -1.0, to: 1.0, steps: 5, case: CouplingCase::MechOnCavity1, base, outputs: vec![Output::I1] };
        let p = spec.param.apply(&spec.base, 0.5).unwrap();
        assert_eq!((p.g1, p.g2, p.delta1), (base.g1, base.g2, 0.5));
        let t = run_sweep(&spec).unwrap();
        let i1 = t.column("i1").unwrap();
        // symmetric in Δ1 since every other detuning is zero
        assert!((i1[0] - i1[4]).abs() <= 1e-12 * i1[0]);
    }

    #[test]
    fn preset_parameters() {
        let p = figure_preset("fig4a").unwrap();
        assert_eq!(p.spec.case, CouplingCase::MechOnCavity2);
        assert_eq!((p.spec.base.eta1(), p.spec.base.eta2()), (0.9, 0.9));
        assert_eq!(p.spec.base.delta1, 0.6);
        assert!((cooperativities_from_params(&p.spec.base).unwrap().d1 - 4.3).abs() < 1e-12);

        assert_eq!(figure_preset("fig2b").unwrap().spec.base.delta1, -0.6);

        let p = figure_preset("fig5c").unwrap();
        assert_eq!(p.series_param, SweepParam::C2);
        assert_eq!(p.series_values, [1.0, 10.0]);
        assert!((cooperativities_from_params(&p.spec.base).unwrap().d1 - 6.5).abs() < 1e-12);

        let p = figure_preset("fig3a").unwrap();
        assert_eq!((p.spec.case, p.spec.base.delta1, p.spec.base.delta2), (CouplingCase::MechOnCavity1, 0.0, 2.5));
        for id in FIGURE_IDS {
            let p = figure_preset(id).unwrap();
            assert_eq!((p.spec.base.gamma_qd, p.spec.base.gamma_m, p.spec.base.omega_m), (0.3, 0.001, 0.01));
            assert_eq!(p.spec.base.kappa1, p.spec.base.kappa2);
        }
        assert!(matches!(figure_preset("fig6a"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn overrides() {
        let p = figure_preset("fig2a")
            .unwrap()
            .with_overrides(&[("d1".into(), "6.3".into()), ("c2".into(), "10".into()), ("steps".into(), "11".into())])
            .unwrap();
        assert_eq!(p.series_values, [10.0]);
        assert_eq!(p.spec.steps, 11);
        assert!((cooperativities_from_params(&p.spec.base).unwrap().d1 - 6.3).abs() < 1e-12);
        assert!(p.notes.iter().any(|n| n == "override d1=6.3"));
        let t = run_figure(&p).unwrap();
        assert_eq!(t.series.len(), 1);
        assert_eq!(t.series[0].1.rows.len(), 11);

        let bad = figure_preset("fig2a").unwrap().with_overrides(&[("nope".into(), "1".into())]);
        assert!(matches!(bad, Err(Error::InvalidSweep(_))));
        let bad = figure_preset("fig2a").unwrap().with_overrides(&[("d1".into(), "x".into())]);
        assert!(bad.is_err());
    }

    #[test]
    fn figure_csv_layout() {
        let t = run_figure(&figure_preset("fig2a").unwrap()).unwrap();
        let text = String::from_utf8(t.to_bytes(Format::Csv)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "c2,d2,p1,p2");
        assert_eq!(lines.count(), 2 * 201);
    }

    #[test]
    fn json_layout() {
        let t = run_sweep(&trivial_spec(3)).unwrap();
        let v = t.to_json();
        assert_eq!(v["spec"]["param"], "d2");
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        let keys: Vec<_> = v["rows"][0].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["d2", "p2", "eta"]);
    }
}
