//! `weakcollapse` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
//! 3 orthogonal postselection, 4 degenerate scenario.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use weakcollapse::hydrogen::{
    hydrogen_closed_form, hydrogen_predictions, hydrogen_traces, HydrogenScenario, HydrogenTraces,
};
use weakcollapse::montecarlo::{convergence_report, simulate, AveragedResult, SimulationSpec};
use weakcollapse::pointer::{
    postselected_pointer_momentum, residual_scaling_exponent, shift_curve, weak_limit_slope, GaussianPointer,
};
use weakcollapse::protocol::{
    averaged_weak_value, discriminate, trial_weak_value_strong_first, trial_weak_value_weak_first, ProtocolTraces,
    Verdict,
};
use weakcollapse::{spectral_decompose, Averaging, Error, Model, ProtocolConfig, WeakValue, C64};

#[derive(Parser)]
#[command(name = "weakcollapse", version, about = "Weak-value tests of instantaneous vs continuous collapse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Both averaged weak-value predictions with per-trial values and traces.
    Analytic(CommonArgs),
    /// Seeded Monte Carlo estimate of one model's averaged weak value.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated trial counts for a convergence report.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
    },
    /// Decide which collapse picture a measured averaged weak value supports.
    Discriminate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_negative_numbers = true)]
        measured: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        measured_im: f64,
        #[arg(long)]
        sigma_meas: f64,
    },
    /// Hydrogen preset: traces, predictions and the objective curve against Δt_c/Δt_m.
    Hydrogen {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of Δt_c/Δt_m points on [0, max-ratio].
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        max_ratio: f64,
    },
    /// Gaussian-pointer shift against coupling strength, with the weak-limit fit.
    Pointer {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1e-4)]
        g_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        g_max: f64,
        /// Logarithmically spaced couplings between g-min and g-max.
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Vn,
    Objective,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Vn => Model::VonNeumann,
            ModelArg::Objective => Model::Objective,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Hydrogen,
}

#[derive(Clone, Copy, Default, PartialEq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false, args = ["config", "scenario"])]
struct SourceArgs {
    /// Protocol configuration JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
}

#[derive(Args)]
struct CommonArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
    a_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a_im: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, allow_negative_numbers = true)]
    b_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b_im: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Collapse duration; overrides the config file.
    #[arg(long)]
    dtc: Option<f64>,
    /// Device timing jitter; overrides the config file.
    #[arg(long)]
    dtm: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the resolved configuration to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

enum Failure {
    Io(String),
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Input(_) => 2,
            Failure::Lib(Error::OrthogonalPostselection { .. } | Error::VanishingPostselection { .. }) => 3,
            Failure::Lib(Error::DegenerateScenario { .. }) => 4,
            Failure::Lib(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) | Failure::Input(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

impl CommonArgs {
    fn hydrogen(&self) -> Outcome<HydrogenScenario> {
        Ok(HydrogenScenario::new(C64::new(self.a_re, self.a_im), C64::new(self.b_re, self.b_im), self.hbar)?)
    }

    fn config(&self) -> Outcome<ProtocolConfig> {
        let cfg = match (&self.source.config, self.source.scenario) {
            (Some(path), _) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                let cfg = ProtocolConfig::from_json(&text).map_err(|e| match e {
                    Error::OrthogonalPostselection { .. } => Failure::Lib(e),
                    e => Failure::Input(format!("invalid config {}: {e}", path.display())),
                })?;
                let (dtm, dtc) = (self.dtm.unwrap_or(cfg.delta_t_m()), self.dtc.unwrap_or(cfg.delta_t_c()));
                cfg.with_timing(dtm, dtc)?
            }
            (None, Some(Scenario::Hydrogen)) => {
                self.hydrogen()?.config(self.dtm.unwrap_or(1.0), self.dtc.unwrap_or(1.0))?
            }
            (None, None) => unreachable!("clap enforces a configuration source"),
        };
        if let Some(path) = &self.save_config {
            write_file(path, &json(&cfg))?;
        }
        Ok(cfg)
    }

    fn emit(&self, text: String) -> Outcome<()> {
        match &self.out {
            Some(path) => write_file(path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Outcome<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

fn complex_row(name: &str, z: C64) -> Vec<String> {
    vec![name.to_string(), num(z.re), num(z.im)]
}

#[derive(Serialize)]
struct AnalyticReport {
    config: ProtocolConfig,
    delta_t_a: f64,
    vn: WeakValue,
    objective: WeakValue,
    weak_first: WeakValue,
    strong_first: WeakValue,
    traces: ProtocolTraces,
}

fn cmd_analytic(args: &CommonArgs) -> Outcome<()> {
    let cfg = args.config()?;
    let report = AnalyticReport {
        delta_t_a: cfg.apparent_resolution().delta_t_a,
        vn: averaged_weak_value(&cfg, Model::VonNeumann, Averaging::Uniform)?,
        objective: averaged_weak_value(&cfg, Model::Objective, Averaging::Uniform)?,
        weak_first: trial_weak_value_weak_first(&cfg)?,
        strong_first: trial_weak_value_strong_first(&cfg)?,
        traces: cfg.traces()?,
        config: cfg,
    };
    let text = match args.format {
        Format::Json => json(&report),
        Format::Csv => {
            let t = &report.traces;
            csv_table(
                &["quantity", "re", "im"],
                [
                    complex_row("vn", report.vn.0),
                    complex_row("objective", report.objective.0),
                    complex_row("delta_t_a", C64::new(report.delta_t_a, 0.0)),
                    complex_row("weak_first", report.weak_first.0),
                    complex_row("strong_first", report.strong_first.0),
                    complex_row("tr_pi_o_rho_in", t.pi_o_rho_in),
                    complex_row("tr_pi_rho_in", t.pi_rho_in),
                    complex_row("tr_rho_fin_o_pi", t.rho_fin_o_pi),
                    complex_row("tr_rho_fin_pi", t.rho_fin_pi),
                    complex_row("tr_o_rho_in", t.o_rho_in),
                    complex_row("tr_o_pi", t.o_pi),
                ],
            )?
        }
    };
    args.emit(text)
}

#[derive(Serialize)]
struct SimulationRecord {
    #[serde(flatten)]
    result: AveragedResult,
    z_score: Option<f64>,
}

#[derive(Serialize)]
struct SimulationReport {
    target: WeakValue,
    results: Vec<SimulationRecord>,
}

fn cmd_simulate(args: &CommonArgs, model: Model, trials: u64, seed: u64, checkpoints: &[u64]) -> Outcome<()> {
    let cfg = args.config()?;
    if trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    let target = averaged_weak_value(&cfg, model, Averaging::Uniform)?;
    let spec = SimulationSpec { cfg, model, trials, seed };
    let results = if checkpoints.is_empty() {
        vec![simulate(&spec)?]
    } else {
        if checkpoints.iter().any(|&n| n > trials) {
            return Err(Failure::Input("checkpoints may not exceed --trials".into()));
        }
        convergence_report(&spec, checkpoints)?
    };
    let text = match args.format {
        Format::Json => json(&SimulationReport {
            target,
            results: results
                .iter()
                .map(|&result| SimulationRecord { result, z_score: result.z_score(target) })
                .collect(),
        }),
        Format::Csv => csv_table(
            &AveragedResult::CSV_HEADER.split(',').collect::<Vec<_>>(),
            results.iter().map(|r| r.csv_row().split(',').map(str::to_string).collect()),
        )?,
    };
    args.emit(text)
}

fn cmd_discriminate(args: &CommonArgs, measured: WeakValue, sigma_meas: f64) -> Outcome<()> {
    let cfg = args.config()?;
    let v: Verdict = discriminate(measured, sigma_meas, &cfg)?;
    let text = match args.format {
        Format::Json => json(&v),
        Format::Csv => csv_table(
            &["model", "delta_t_c_estimate", "saturated", "vn_re", "vn_im", "saturated_re", "saturated_im"],
            [vec![
                serde_json::to_value(v.model).expect("verdict serializes").as_str().unwrap_or_default().to_string(),
                v.delta_t_c_estimate.map(num).unwrap_or_default(),
                v.saturated.to_string(),
                num(v.vn_prediction.re()),
                num(v.vn_prediction.im()),
                num(v.saturated_prediction.re()),
                num(v.saturated_prediction.im()),
            ]],
        )?,
    };
    args.emit(text)
}

#[derive(Serialize)]
struct CurvePoint {
    ratio: f64,
    delta_t_c: f64,
    vn: f64,
    objective: f64,
}

#[derive(Serialize)]
struct HydrogenReport {
    a: WeakValue,
    b: WeakValue,
    hbar: f64,
    delta_t_m: f64,
    delta_t_c: f64,
    discriminating: bool,
    traces: HydrogenTraces,
    vn: WeakValue,
    objective: WeakValue,
    curve: Vec<CurvePoint>,
}

fn cmd_hydrogen(args: &CommonArgs, points: usize, max_ratio: f64) -> Outcome<()> {
    if args.source.config.is_some() {
        return Err(Failure::Input("hydrogen takes --scenario hydrogen, not --config".into()));
    }
    if points < 2 || max_ratio <= 0.0 || !max_ratio.is_finite() {
        return Err(Failure::Input("need --points >= 2 and --max-ratio > 0".into()));
    }
    let cfg = args.config()?;
    let s = args.hydrogen()?;
    let (dtm, dtc) = (cfg.delta_t_m(), cfg.delta_t_c());
    let predictions = hydrogen_predictions(&s, dtc, dtm)?;
    let curve = (0..points)
        .map(|k| {
            let ratio = max_ratio * k as f64 / (points - 1) as f64;
            let p = hydrogen_closed_form(&s, ratio * dtm, dtm);
            CurvePoint { ratio, delta_t_c: ratio * dtm, vn: p.vn.re(), objective: p.objective.re() }
        })
        .collect::<Vec<_>>();
    let report = HydrogenReport {
        a: WeakValue(s.a),
        b: WeakValue(s.b),
        hbar: s.hbar,
        delta_t_m: dtm,
        delta_t_c: dtc,
        discriminating: s.is_discriminating(),
        traces: hydrogen_traces(&s)?,
        vn: predictions.vn,
        objective: predictions.objective,
        curve,
    };
    let text = match args.format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &["ratio", "delta_t_c", "vn", "objective"],
            report.curve.iter().map(|p| vec![num(p.ratio), num(p.delta_t_c), num(p.vn), num(p.objective)]),
        )?,
    };
    args.emit(text)
}

#[derive(Serialize)]
struct PointerPoint {
    g: f64,
    shift: f64,
    momentum: f64,
}

#[derive(Serialize)]
struct PointerReport {
    sigma: f64,
    weak_value: WeakValue,
    slope: f64,
    constant: f64,
    residual_exponent: Option<f64>,
    curve: Vec<PointerPoint>,
}

fn cmd_pointer(args: &CommonArgs, sigma: f64, g_min: f64, g_max: f64, points: usize) -> Outcome<()> {
    if points < 2 || g_min <= 0.0 || g_max <= g_min || !g_max.is_finite() {
        return Err(Failure::Input("need --points >= 2 and 0 < --g-min < --g-max".into()));
    }
    let cfg = args.config()?;
    let psi1 = cfg.rho_in().pure_state_vector(1e-10)?;
    let psi2 = cfg.rho_fin().pure_state_vector(1e-10)?;
    let obs = spectral_decompose(cfg.weak_observable(), 1e-9)?;
    let grid: Vec<f64> = (0..points).map(|k| g_min * (g_max / g_min).powf(k as f64 / (points - 1) as f64)).collect();
    let fit = weak_limit_slope(&psi1, &psi2, &obs, sigma, &grid)?;
    let curve = shift_curve(&psi1, &psi2, &obs, sigma, &grid)?
        .into_iter()
        .map(|(g, shift)| {
            let momentum = postselected_pointer_momentum(&psi1, &psi2, &obs, &GaussianPointer::new(sigma, g)?)?;
            Ok(PointerPoint { g, shift, momentum })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = PointerReport {
        sigma,
        weak_value: WeakValue(fit.weak_value),
        slope: fit.slope,
        constant: fit.constant,
        residual_exponent: residual_scaling_exponent(&psi1, &psi2, &obs, sigma, &grid).ok(),
        curve,
    };
    let text = match args.format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &["g", "shift", "momentum"],
            report.curve.iter().map(|p| vec![num(p.g), num(p.shift), num(p.momentum)]),
        )?,
    };
    args.emit(text)
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Analytic(common) => cmd_analytic(&common),
        Command::Simulate { common, model, trials, seed, checkpoints } => {
            cmd_simulate(&common, model.into(), trials, seed, &checkpoints)
        }
        Command::Discriminate { common, measured, measured_im, sigma_meas } => {
            cmd_discriminate(&common, WeakValue(C64::new(measured, measured_im)), sigma_meas)
        }
        Command::Hydrogen { common, points, max_ratio } => cmd_hydrogen(&common, points, max_ratio),
        Command::Pointer { common, sigma, g_min, g_max, points } => cmd_pointer(&common, sigma, g_min, g_max, points),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
