//! The `evolve` command line.
//!
//! Exit codes: 0 success, 1 domain failure (conditions, gate, scenario or
//! sweep checks), 2 usage or parse errors. `EVOLVE_LOG` sets log verbosity
//! (`error` … `trace`, default `warn`).

mod paper;
mod run;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;

use crate::ctmc::{exp2, parse_rational, time_grid, Exp2Config, Exp2Params};
use crate::devices::{
    handlers_by_name, run_scenario, DeviceKind, HandlerConfig, ScenarioConfig, ScenarioScript, SimulatedDevice,
};
use crate::evolution::{gate_for_runtime, EvolutionPair, ValidatedPair, ValidationReport};
use crate::fixtures;
use crate::mapek::{render_trace, Converter, HandlerRegistry, Knowledge, StepRecord};
use crate::statechart::StateMachine;

pub use paper::{parse_paper, render_paper, render_paper_record, PaperParseError};
pub use run::{run, DeviceEndpoint, RunSetup, SharedOut};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogStyle {
    /// One tab-separated line per step.
    Tabular,
    /// Monitor/Analyze/Plan/Execute blocks.
    Paper,
}

#[derive(Debug, Parser)]
#[command(name = "evolve", version, about = "Evolve an unmodifiable event-driven device through an event converter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that an evolved model preserves the original one.
    Validate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        evolved: PathBuf,
    },
    /// Run a controller script against a simulated device on a virtual clock.
    Scenario(ScenarioArgs),
    /// Run the converter live behind TCP endpoints.
    Run(RunArgs),
    /// Conversion-time sweep over the CTMC models.
    Exp2(Exp2Args),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Original model (JSON). Defaults to the bundled model for the device kind.
    #[arg(long, requires = "evolved")]
    pub original: Option<PathBuf>,
    /// Evolved model (JSON).
    #[arg(long, requires = "original")]
    pub evolved: Option<PathBuf>,
    /// Handler set: `lightbulb`, `robot` or `passive`. Defaults to the device kind.
    #[arg(long)]
    pub handlers: Option<String>,
    /// Time the robot's move handler takes to reach the spot.
    #[arg(long, default_value_t = 500)]
    pub move_ms: u64,
    #[arg(long, value_enum, default_value_t = LogStyle::Tabular)]
    pub log_style: LogStyle,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Simulated device: `lightbulb` or `robot`.
    #[arg(long)]
    pub device: String,
    /// Controller script: `at <ms> <event>` and `advance <ms>` lines.
    #[arg(long)]
    pub script: PathBuf,
    #[command(flatten)]
    pub models: ModelArgs,
    /// How long the robot spot-cleans before emitting endSpot.
    #[arg(long, default_value_t = 1000)]
    pub spot_ms: u64,
    /// Also write the device's own log here.
    #[arg(long)]
    pub device_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// `lightbulb` or `robot` for a simulated device, or `host:port` of an external one.
    #[arg(long)]
    pub device: String,
    /// Controller endpoint.
    #[arg(long, default_value = "127.0.0.1:7400")]
    pub listen: String,
    /// Control endpoint.
    #[arg(long, default_value = "127.0.0.1:7401")]
    pub control: String,
    #[command(flatten)]
    pub models: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub spot_ms: u64,
    /// Wait for `start` before consuming events.
    #[arg(long)]
    pub paused: bool,
}

#[derive(Debug, Args)]
pub struct Exp2Args {
    /// Mean conversion times in seconds, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = ["0.25".to_string(), "0.5".to_string(), "0.75".to_string(), "1.0".to_string()])]
    pub conv: Vec<String>,
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    /// Simulation runs per model; 0 skips simulation.
    #[arg(long, default_value_t = 100_000)]
    pub runs: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Rate of the embedded `[emb_lost]` command.
    #[arg(long, default_value = "1")]
    pub emb_lost_rate: String,
    /// Leave out the baseline model.
    #[arg(long)]
    pub no_baseline: bool,
    /// CSV output; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

fn load_model(path: &Path) -> Result<StateMachine, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    StateMachine::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_pair(models: &ModelArgs, kind: Option<DeviceKind>) -> Result<EvolutionPair, Failure> {
    match (&models.original, &models.evolved, kind) {
        (Some(o), Some(e), _) => Ok(EvolutionPair::new(load_model(o)?, load_model(e)?)),
        (_, _, Some(DeviceKind::LightBulb)) => Ok(fixtures::light_bulb_pair()),
        (_, _, Some(DeviceKind::Robot)) => Ok(fixtures::robot_pair()),
        _ => Err(Failure::usage("--original and --evolved are required with an external device")),
    }
}

fn gate(pair: &EvolutionPair) -> Result<ValidatedPair, Failure> {
    gate_for_runtime(pair).map_err(|e| Failure::domain(format!("model pair rejected: {e}")))
}

fn handlers(models: &ModelArgs, kind: Option<DeviceKind>, pair: &ValidatedPair) -> Result<HandlerRegistry, Failure> {
    let name = match (&models.handlers, kind) {
        (Some(n), _) => n.clone(),
        (None, Some(DeviceKind::LightBulb)) => "lightbulb".into(),
        (None, Some(DeviceKind::Robot)) => "robot".into(),
        (None, None) => "passive".into(),
    };
    let config = HandlerConfig {
        move_duration_ms: models.move_ms,
    };
    handlers_by_name(&name, pair, &config)
        .map(|(reg, _)| reg)
        .map_err(|e| Failure::usage(e.to_string()))
}

fn simulated_device(kind: DeviceKind, spot_ms: u64) -> Result<SimulatedDevice, Failure> {
    match kind {
        DeviceKind::LightBulb => Ok(SimulatedDevice::light_bulb()),
        DeviceKind::Robot => SimulatedDevice::cleaning_robot(spot_ms).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn render(records: &[StepRecord], style: LogStyle) -> String {
    match style {
        LogStyle::Tabular => render_trace(records),
        LogStyle::Paper => render_paper(records),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::domain(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::domain(format!("stdout: {e}")))
        }
    }
}

pub fn cmd_validate(original: &Path, evolved: &Path) -> Result<i32, Failure> {
    let pair = EvolutionPair::new(load_model(original)?, load_model(evolved)?);
    let report = ValidationReport::build(&pair);
    println!("{}", report.to_json());
    Ok(if report.gate_passed { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_scenario(args: &ScenarioArgs) -> Result<i32, Failure> {
    let kind: DeviceKind = args.device.parse().map_err(|e: crate::devices::UnknownDeviceKind| Failure::usage(e.to_string()))?;
    let script_text = fs::read_to_string(&args.script)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.script.display())))?;
    let script = ScenarioScript::parse(&script_text).map_err(|e| Failure::usage(e.to_string()))?;
    let pair = gate(&load_pair(&args.models, Some(kind))?)?;
    let reg = handlers(&args.models, Some(kind), &pair)?;
    let device = simulated_device(kind, args.spot_ms)?;
    let trace = run_scenario(&pair, device, &script, reg, &ScenarioConfig::default())
        .map_err(|e| Failure::domain(e.to_string()))?;
    write_output(args.models.trace.as_deref(), &render(&trace.records, args.models.log_style))?;
    if let Some(p) = &args.device_log {
        fs::write(p, trace.render_device_log()).map_err(|e| Failure::domain(format!("{}: {e}", p.display())))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_run(args: &RunArgs) -> Result<i32, Failure> {
    let kind = args.device.parse::<DeviceKind>().ok();
    if kind.is_none() && !args.device.contains(':') {
        return Err(Failure::usage(format!(
            "--device {:?}: expected lightbulb, robot or host:port",
            args.device
        )));
    }
    let pair = gate(&load_pair(&args.models, kind)?)?;
    let reg = handlers(&args.models, kind, &pair)?;
    let knowledge = Knowledge::build(&pair, reg).map_err(|e| Failure::domain(e.to_string()))?;
    let device = match kind {
        Some(k) => DeviceEndpoint::Simulated(simulated_device(k, args.spot_ms)?),
        None => DeviceEndpoint::External(args.device.clone()),
    };
    let out: SharedOut = match &args.models.trace {
        Some(p) => Arc::new(Mutex::new(Box::new(
            fs::File::create(p).map_err(|e| Failure::domain(format!("{}: {e}", p.display())))?,
        ))),
        None => Arc::new(Mutex::new(Box::new(io::stdout()))),
    };
    let setup = RunSetup {
        converter: Converter::new(knowledge),
        device,
        listen: args.listen.clone(),
        control: args.control.clone(),
        style: args.models.log_style,
        paused: args.paused,
    };
    run(setup, out, &mut |line| {
        println!("{line}");
        let _ = io::stdout().flush();
    })
    .map_err(|e| Failure::domain(format!("run: {e}")))?;
    Ok(EXIT_OK)
}

pub fn exp2_config(args: &Exp2Args) -> Result<Exp2Config, Failure> {
    let conv_means = args
        .conv
        .iter()
        .map(|c| parse_rational(c).map_err(Failure::usage))
        .collect::<Result<Vec<Rational64>, _>>()?;
    if conv_means.iter().any(|c| *c <= Rational64::from_integer(0)) {
        return Err(Failure::usage("conversion times must be positive"));
    }
    let emb_lost_rate = parse_rational(&args.emb_lost_rate).map_err(Failure::usage)?;
    if emb_lost_rate <= Rational64::from_integer(0) {
        return Err(Failure::usage("--emb-lost-rate must be positive"));
    }
    if !(args.t_max >= 0.0 && args.t_max.is_finite()) || args.step.is_nan() || args.step <= 0.0 {
        return Err(Failure::usage("need --t-max >= 0 and --step > 0"));
    }
    Ok(Exp2Config {
        conv_means,
        times: time_grid(args.t_max, args.step),
        runs: args.runs,
        seed: args.seed,
        base: Exp2Params {
            emb_lost_rate,
            ..Exp2Params::default()
        },
        include_baseline: !args.no_baseline,
        ..Exp2Config::default()
    })
}

pub fn cmd_exp2(args: &Exp2Args) -> Result<i32, Failure> {
    let cfg = exp2_config(args)?;
    let table = exp2(&cfg).map_err(|e| Failure::usage(e.to_string()))?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf).map_err(|e| Failure::domain(e.to_string()))?;
    write_output(args.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    let verdicts = table.verdicts();
    let summary = verdicts.summary_line();
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(if verdicts.all_passed() { EXIT_OK } else { EXIT_FAILURE })
}

pub fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Validate { original, evolved } => cmd_validate(original, evolved),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Run(a) => cmd_run(a),
        Command::Exp2(a) => cmd_exp2(a),
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("EVOLVE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp_millis().try_init();
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("evolve: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_for_usage_errors() {
        assert_eq!(main_with_args(["evolve"]), EXIT_USAGE);
        assert_eq!(main_with_args(["evolve", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["evolve", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["evolve", "exp2", "--conv", "abc"]), EXIT_USAGE);
        assert_eq!(main_with_args(["evolve", "exp2", "--emb-lost-rate", "0"]), EXIT_USAGE);
    }

    #[test]
    fn exp2_single_cell() {
        let cli = Cli::try_parse_from(["evolve", "exp2", "--conv", "0.25", "--t-max", "0", "--runs", "0", "--no-baseline"]).unwrap();
        let Command::Exp2(args) = &cli.command else { panic!() };
        let cfg = exp2_config(args).unwrap();
        let t = exp2(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].reach_prob, t.rows[0].expected_lost), (0.0, 0.0));
    }

    #[test]
    fn run_device_must_be_kind_or_address() {
        let cli = Cli::try_parse_from(["evolve", "run", "--device", "toaster"]).unwrap();
        let Command::Run(args) = &cli.command else { panic!() };
        assert_eq!(cmd_run(args).unwrap_err().code, EXIT_USAGE);
        let cli = Cli::try_parse_from(["evolve", "run", "--device", "127.0.0.1:9"]).unwrap();
        let Command::Run(args) = &cli.command else { panic!() };
        assert_eq!(cmd_run(args).unwrap_err().code, EXIT_USAGE);
    }
}
