//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or configuration
//! error, 3 failed validation check.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::error::Error;
use crate::model::{cooperativities_from_params, params_from_cooperativities, CouplingCase, SystemParams};
use crate::output::fmt_num;
use crate::steady_state::{build_drift, integrate_sampled, solve_steady, steady_report, ModeState, MODE_LABELS};
use crate::sweep::{figure_preset, parse_outputs, run_figure, run_sweep, write_json, Format, Output, SweepParam, SweepSpec};
use crate::validation::{self, ValidationOptions};

pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qdcavity", version, about = "Steady states, sweeps and figure data for a quantum-dot two-cavity optomechanical system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one parameter point
    Steady(SteadyArgs),
    /// Sweep one parameter over a uniform grid
    Sweep(SweepArgs),
    /// Regenerate the data behind a figure panel (fig2a..fig5d)
    Figure(FigureArgs),
    /// Integrate the mean-field equations in time with RK4
    Timeseries(TimeseriesArgs),
    /// Run the built-in self-checks
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Zero,
    Steady,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat TOML parameter file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling case (mech_on_cavity1, mech_on_cavity2, general); inferred when absent
    #[arg(long)]
    pub case: Option<CouplingCase>,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// d1, d2, c1, c2, delta1 or delta2
    #[arg(long)]
    pub param: Option<SweepParam>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated list, e.g. p1,p2,eta,chi_numeric
    #[arg(long)]
    pub outputs: Option<String>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Panel id, fig2a..fig2d, fig3a, fig3b, fig4a..fig4d or fig5a..fig5d
    pub id: String,
    /// Replace a preset value, e.g. `d1=6.3`, `c2=10` or `steps=401` (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct TimeseriesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// End time; defaults to 50/gamma_m
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Step size; defaults to the largest admissible step
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub x0: Option<InitialState>,
    /// Keep every n-th step; defaults to about 1000 rows
    #[arg(long)]
    pub every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Comma-separated check ids to run (default: all)
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub tolerance_scale: f64,
}

/// Flat parameter file. Couplings may be given directly or as cooperativities,
/// output couplings directly or as ratios `eta_i = kappa_i_ext/kappa_i`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub kappa1_ext: Option<f64>,
    pub kappa2_ext: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub gamma_qd: Option<f64>,
    pub gamma_m: Option<f64>,
    pub omega_m: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub delta_d: Option<f64>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub om1: Option<f64>,
    pub om2: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub a_in_re: Option<f64>,
    pub a_in_im: Option<f64>,
    pub case: Option<String>,
    pub format: Option<FormatArg>,
    pub output: Option<PathBuf>,
    // sweep
    pub param: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub outputs: Option<Vec<String>>,
    // timeseries
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Option<InitialState>,
    pub every: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    /// Some checks failed; the report has already been printed.
    Validation(usize),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Numerical(_) => EXIT_NUMERICAL,
            Self::Usage(_) => EXIT_USAGE,
            Self::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Singular { .. } | Error::DegenerateBasis | Error::ZeroIntensity | Error::Regime(_) => {
                Self::Numerical(e.to_string())
            }
            _ => Self::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e.message())))
}

impl FileConfig {
    /// Builds parameters on top of the default base rates.
    pub fn params(&self) -> CliResult<SystemParams> {
        let mut p = SystemParams::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.kappa1, self.kappa1);
        set(&mut p.kappa2, self.kappa2);
        set(&mut p.gamma_qd, self.gamma_qd);
        set(&mut p.gamma_m, self.gamma_m);
        set(&mut p.omega_m, self.omega_m);
        set(&mut p.delta1, self.delta1);
        set(&mut p.delta2, self.delta2);
        set(&mut p.delta_d, self.delta_d);
        if self.a_in_re.is_some() || self.a_in_im.is_some() {
            p.a_in = Complex64::new(self.a_in_re.unwrap_or(0.0), self.a_in_im.unwrap_or(0.0));
        }

        let pick = |raw: Option<f64>, raw_name: &str, ratio: Option<f64>, ratio_name: &str| match (raw, ratio) {
            (Some(_), Some(_)) => Err(usage(format!("give either `{raw_name}` or `{ratio_name}`, not both"))),
            (r, q) => Ok((r, q)),
        };
        match pick(self.kappa1_ext, "kappa1_ext", self.eta1, "eta1")? {
            (Some(k), _) => p.kappa1_ext = k,
            (_, Some(e)) => p.kappa1_ext = e * p.kappa1,
            _ => p.kappa1_ext = SystemParams::default().eta1() * p.kappa1,
        }
        match pick(self.kappa2_ext, "kappa2_ext", self.eta2, "eta2")? {
            (Some(k), _) => p.kappa2_ext = k,
            (_, Some(e)) => p.kappa2_ext = e * p.kappa2,
            _ => p.kappa2_ext = SystemParams::default().eta2() * p.kappa2,
        }

        let pairs = [
            (self.g1, "g1", self.d1, "d1"),
            (self.g2, "g2", self.d2, "d2"),
            (self.om1, "om1", self.c1, "c1"),
            (self.om2, "om2", self.c2, "c2"),
        ];
        for (raw, raw_name, coop, coop_name) in pairs {
            pick(raw, raw_name, coop, coop_name)?;
        }
        set(&mut p.g1, self.g1);
        set(&mut p.g2, self.g2);
        set(&mut p.om1, self.om1);
        set(&mut p.om2, self.om2);
        if self.d1.is_some() || self.d2.is_some() || self.c1.is_some() || self.c2.is_some() {
            p.check()?;
            let mut c = cooperativities_from_params(&p)?;
            set(&mut c.d1, self.d1);
            set(&mut c.d2, self.d2);
            set(&mut c.c1, self.c1);
            set(&mut c.c2, self.c2);
            let raw = (p.g1, p.g2, p.om1, p.om2);
            p = params_from_cooperativities(&c, &p)?;
            // Directly given couplings are kept bit-exact.
            if self.g1.is_some() {
                p.g1 = raw.0;
            }
            if self.g2.is_some() {
                p.g2 = raw.1;
            }
            if self.om1.is_some() {
                p.om1 = raw.2;
            }
            if self.om2.is_some() {
                p.om2 = raw.3;
            }
        }
        p.check()?;
        Ok(p)
    }

    fn case(&self, cli: Option<CouplingCase>, p: &SystemParams) -> CliResult<CouplingCase> {
        let case = match (cli, &self.case) {
            (Some(c), _) => c,
            (None, Some(s)) => s.parse().map_err(usage)?,
            (None, None) => CouplingCase::infer(p),
        };
        p.check_with_case(case)?;
        Ok(case)
    }
}

fn resolve_format(cli: Option<FormatArg>, file: Option<FormatArg>) -> Format {
    cli.or(file).map(Format::from).unwrap_or_default()
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, bytes).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to a Vec cannot fail");
    buf
}

fn cmd_steady(args: &SteadyArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let p = cfg.params()?;
    let case = cfg.case(args.common.case, &p)?;
    let report = steady_report(&p, case)?;
    let format = resolve_format(args.common.format, cfg.format);
    let bytes = match format {
        Format::Json => to_bytes(|b| write_json(&json!({ "params": p, "report": report }), b)),
        Format::Csv => to_bytes(|b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["quantity", "value"])?;
            w.write_record(["case", case.as_str()])?;
            for (label, z) in MODE_LABELS.iter().zip(report.state.to_array()) {
                w.write_record([format!("re_{label}"), fmt_num(z.re)])?;
                w.write_record([format!("im_{label}"), fmt_num(z.im)])?;
            }
            let nan = f64::NAN;
            let closed = &report.closed;
            for (name, v) in [
                ("i1", report.i1),
                ("i2", report.i2),
                ("p1", report.p1),
                ("p2", report.p2),
                ("eta", report.eta),
                ("chi", report.chi.unwrap_or(nan)),
                ("i1_closed", closed.i1.unwrap_or(nan)),
                ("i2_closed", closed.i2.unwrap_or(nan)),
                ("eta_closed", closed.eta.unwrap_or(nan)),
                ("chi_closed", closed.chi.unwrap_or(nan)),
            ] {
                w.write_record([name.to_string(), fmt_num(v)])?;
            }
            for note in &report.notes {
                w.write_record(["note", note])?;
            }
            w.flush()
        }),
    };
    emit(args.common.output.as_deref().or(cfg.output.as_deref()), &bytes)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let p = cfg.params()?;
    let case = cfg.case(args.common.case, &p)?;
    let param = match (args.param, &cfg.param) {
        (Some(x), _) => x,
        (None, Some(s)) => s.parse().map_err(usage)?,
        (None, None) => SweepParam::D2,
    };
    let outputs: Vec<Output> = match (&args.outputs, &cfg.outputs) {
        (Some(s), _) => parse_outputs(s).map_err(usage)?,
        (None, Some(list)) => list.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(usage)?,
        (None, None) => vec![Output::P1, Output::P2, Output::Eta],
    };
    let spec = SweepSpec {
        param,
        from: args.from.or(cfg.from).unwrap_or(0.0),
        to: args.to.or(cfg.to).unwrap_or(10.0),
        steps: args.steps.or(cfg.steps).unwrap_or(SweepSpec::DEFAULT_STEPS),
        base: p,
        case,
        outputs,
    };
    let table = run_sweep(&spec)?;
    let bytes = match resolve_format(args.common.format, cfg.format) {
        Format::Csv => to_bytes(|b| table.write_csv(b)),
        Format::Json => to_bytes(|b| write_json(&table.to_json(), b)),
    };
    emit(args.common.output.as_deref().or(cfg.output.as_deref()), &bytes)
}

fn cmd_figure(args: &FigureArgs) -> CliResult<()> {
    let overrides = args
        .overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| usage(format!("override `{kv}` is not of the form key=value")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let preset = figure_preset(&args.id)?.with_overrides(&overrides)?;
    let table = run_figure(&preset)?;
    emit(args.output.as_deref(), &table.to_bytes(resolve_format(args.format, None)))
}

fn cmd_timeseries(args: &TimeseriesArgs) -> CliResult<()> {
    let cfg = load_config(args.common.config.as_deref())?;
    let p = cfg.params()?;
    let case = cfg.case(args.common.case, &p)?;
    let sys = build_drift(&p, case)?;
    let t_end = args.t_end.or(cfg.t_end).unwrap_or(50.0 / p.gamma_m);
    let dt = args.dt.or(cfg.dt).unwrap_or_else(|| sys.max_step());
    let x0 = match args.x0.or(cfg.x0).unwrap_or(InitialState::Zero) {
        InitialState::Zero => ModeState::zero(),
        InitialState::Steady => solve_steady(&sys)?,
    };
    let every = match args.every.or(cfg.every) {
        Some(n) => n,
        None if dt > 0.0 && t_end.is_finite() => ((t_end / dt / 1000.0).ceil() as usize).max(1),
        None => 1,
    };
    let traj = integrate_sampled(&sys, x0, t_end, dt, every)?;
    let bytes = match resolve_format(args.common.format, cfg.format) {
        Format::Csv => to_bytes(|b| traj.write_csv(b)),
        Format::Json => {
            let rows: Vec<_> = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, s)| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("t".into(), json!(t));
                    for (label, z) in MODE_LABELS.iter().zip(s.to_array()) {
                        obj.insert(format!("re_{label}"), json!(z.re));
                        obj.insert(format!("im_{label}"), json!(z.im));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            to_bytes(|b| write_json(&json!({ "params": p, "case": case, "dt": dt, "rows": rows }), b))
        }
    };
    emit(args.common.output.as_deref().or(cfg.output.as_deref()), &bytes)
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let opts = ValidationOptions { tolerance_scale: args.tolerance_scale };
    let mut failed = 0;
    let mut total = 0;
    for (k, check) in validation::CHECKS.iter().enumerate() {
        let id = (k + 1) as u8;
        if !args.only.is_empty() && !args.only.contains(&id) {
            continue;
        }
        let c = check(&opts)?;
        println!("{c}");
        total += 1;
        if !c.passed {
            failed += 1;
        }
    }
    if total == 0 {
        return Err(usage("no check matches --only"));
    }
    println!("{}/{} checks passed", total - failed, total);
    if failed > 0 {
        Err(CliError::Validation(failed))
    } else {
        Ok(())
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Steady(a) => cmd_steady(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Timeseries(a) => cmd_timeseries(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

/// Parses the process arguments, runs and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
                CliError::Validation(n) => eprintln!("{n} check(s) failed"),
            }
            e.code()
        }
    }
}
