use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dqpass::dqstamp::{assemble_ydq, ParasiticConfig};
use dqpass::netcase::{ieee9_text, parse_case, NetworkCase, VariantFlags};
use dqpass::passcheck::{classify_model, AnalysisBand, ClassifyOptions, ModelKind, Overall, SweepGrid, Tolerances};
use dqpass::passivate::RegulationSet;
use dqpass::polarmodels::{build_j_of_s, build_jdf, build_jdp, DEFAULT_TAU};
use dqpass::powerflow::{solve_powerflow_with, PowerFlowOptions};
use dqpass::statespace::StateSpace;
use dqpass::study::Study;
use dqpass::Error;

mod report;
mod tables;

/// Exit statuses other than the passivity verdicts.
mod code {
    pub const MISMATCH: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const CASE: u8 = 3;
    pub const POWER_FLOW: u8 = 4;
    pub const MODEL: u8 = 5;
    pub const NUMERICAL: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Parser)]
#[command(name = "dqpass", version, about = "Passivity of D-Q network models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the power flow and print the operating point.
    Pf(PfArgs),
    /// Classify one network model as passive or not.
    Passivity(PassivityArgs),
    /// Reproduce the published eigenvalue tables and verdict grid.
    Tables(TablesArgs),
    /// Write the state-space realization (or static Jacobian) of a model.
    DumpModel(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct Common {
    /// Comma-separated simplifications: lossless, no-b, decoupled.
    #[arg(long, default_value = "")]
    variant: String,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PfArgs {
    case: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Largest accepted power mismatch, pu.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 50)]
    max_iterations: usize,
}

#[derive(Args)]
struct ModelArgs {
    /// I, II, III or IV.
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value = "wideband")]
    analysis: AnalysisBand,
    /// Derivative filter time constant, s.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Series resistance added to shunt capacitors, pu.
    #[arg(long, default_value_t = ParasiticConfig::default().r_series_cap)]
    r_cap: f64,
}

#[derive(Args)]
struct PassivityArgs {
    case: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    common: Common,
    /// Q-V contributions `bus:k,...`; defaults to the case file's regulation section.
    #[arg(long)]
    reg: Option<String>,
    /// Frequency grid `min:max:points_per_decade`, rad/s.
    #[arg(long)]
    sweep: Option<String>,
    /// Absolute tolerance on minimum eigenvalues.
    #[arg(long, default_value_t = Tolerances::default().psd)]
    tolerance: f64,
    /// Also write the sweep as `omega,lambda_min` CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Part {
    All,
    Eigen,
    Grid,
}

#[derive(Args)]
struct TablesArgs {
    /// Case file; defaults to the bundled nine-bus system.
    case: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-eigenvalue absolute tolerance.
    #[arg(long, default_value_t = dqpass::reference::TABLE_TOLERANCE)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = Part::All)]
    part: Part,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long)]
    sweep: Option<String>,
    /// Also write the eigenvalue lists as `index,...` CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    case: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    reg: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::Validation { .. } | Error::Topology { .. } => code::CASE,
            Error::NonConvergence { .. } | Error::SingularJacobian { .. } | Error::Consistency { .. } => {
                code::POWER_FLOW
            }
            Error::Config(_) | Error::Parameter(_) => code::USAGE,
            Error::Propriety(_) | Error::Dimension(_) | Error::DegenerateOperatingPoint { .. } => code::MODEL,
            _ => code::NUMERICAL,
        };
        let mut message = e.to_string();
        if let Error::NonConvergence { trace, .. } = &e {
            let steps: Vec<String> = trace.iter().map(|m| format!("{m:.3e}")).collect();
            message += &format!("\nmismatch trace: {}", steps.join(" "));
        }
        Failure { code, message }
    }
}

type Outcome = Result<u8, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: code::USAGE, message: message.into() }
}

fn parse_variant(text: &str) -> Result<VariantFlags, Failure> {
    let mut flags = VariantFlags::default();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.to_ascii_lowercase().as_str() {
            "lossless" => flags.lossless = true,
            "no-b" | "nob" | "no_b" => flags.no_shunt_b = true,
            "decoupled" => flags.decoupled = true,
            "base" => {}
            other => return Err(usage(format!("unknown variant `{other}` (lossless, no-b, decoupled)"))),
        }
    }
    Ok(flags)
}

fn load_case(path: &Path) -> Result<NetworkCase, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: code::IO, message: format!("{}: {e}", path.display()) })?;
    parse_case(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: code::IO, message: format!("{}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn regulation(case: &NetworkCase, inline: Option<&str>) -> Result<RegulationSet, Failure> {
    Ok(match inline {
        Some(text) => RegulationSet::parse_inline(text)?,
        None => RegulationSet::from_case(case),
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn cmd_pf(args: &PfArgs) -> Outcome {
    let flags = parse_variant(&args.common.variant)?;
    let case = dqpass::netcase::derive_variant(&load_case(&args.case)?, flags);
    let opts = PowerFlowOptions { tolerance: args.tolerance, max_iterations: args.max_iterations };
    let op = solve_powerflow_with(&case, &opts)?;
    let text = match args.common.format {
        Format::Human => report::operating_point(&op),
        Format::Json => to_json(&op),
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(0)
}

fn classify_options(
    m: &ModelArgs,
    sweep: Option<&str>,
    tolerance: f64,
    sequential: bool,
) -> Result<ClassifyOptions, Failure> {
    let mut opts = ClassifyOptions {
        tau: m.tau,
        parasitics: ParasiticConfig { r_series_cap: m.r_cap, ..Default::default() },
        ..Default::default()
    };
    if let Some(s) = sweep {
        opts.grid = SweepGrid::parse(s)?;
    }
    opts.tolerances.psd = tolerance;
    if sequential {
        opts.execution = dqpass::par::Execution::Sequential;
    }
    Ok(opts)
}

fn cmd_passivity(args: &PassivityArgs) -> Outcome {
    let flags = parse_variant(&args.common.variant)?;
    let case = load_case(&args.case)?;
    let reg = regulation(&case, args.reg.as_deref())?;
    let opts = classify_options(&args.model, args.sweep.as_deref(), args.tolerance, args.sequential)?;
    let verdict = classify_model(&case, flags, args.model.model, args.model.analysis, &reg, &opts)?;
    let text = match args.common.format {
        Format::Human => report::verdict(&verdict),
        Format::Json => to_json(&verdict),
    };
    emit(args.common.out.as_deref(), &text)?;
    if let Some(path) = &args.csv {
        let sweep = verdict.regulated.as_ref().unwrap_or(&verdict.unregulated);
        emit(Some(path), &sweep.cond2_sweep.to_csv())?;
    }
    Ok(match verdict.overall {
        Overall::Passive => 0,
        Overall::NonPassive => 10,
        Overall::PassiveAfterRegulation => 11,
    })
}

fn cmd_tables(args: &TablesArgs) -> Outcome {
    let case = match &args.case {
        Some(path) => load_case(path)?,
        None => parse_case(ieee9_text())?,
    };
    let mut opts = ClassifyOptions { tau: args.tau, ..Default::default() };
    if let Some(s) = &args.sweep {
        opts.grid = SweepGrid::parse(s)?;
    }
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(usage("tolerance must be non-negative"));
    }
    let rep = tables::reproduce(&case, args.tolerance, args.part != Part::Grid, args.part != Part::Eigen, &opts)?;
    let text = match args.format {
        Format::Human => tables::human(&rep),
        Format::Json => to_json(&rep),
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(path) = &args.csv {
        emit(Some(path), &tables::csv(&rep))?;
    }
    if rep.all_match() {
        Ok(0)
    } else {
        eprint!("{}", tables::mismatches(&rep));
        Ok(code::MISMATCH)
    }
}

fn state_space(study: &Study, m: &ModelArgs) -> Result<StateSpace, Failure> {
    let ydq = assemble_ydq(&study.network, &ParasiticConfig { r_series_cap: m.r_cap, ..Default::default() })?;
    if m.model == ModelKind::I {
        return Ok(ydq);
    }
    let j = build_j_of_s(&ydq, &study.op)?;
    Ok(match m.model {
        ModelKind::III => build_jdp(&j, m.tau)?,
        ModelKind::IV => build_jdf(&j, m.tau)?,
        _ => j,
    })
}

fn cmd_dump(args: &DumpArgs) -> Outcome {
    let flags = parse_variant(&args.common.variant)?;
    let case = load_case(&args.case)?;
    let m = &args.model;
    if m.analysis == AnalysisBand::WideBand && flags.decoupled {
        return Err(usage("the decoupled variant exists only for low-frequency analysis"));
    }
    let study = Study::new(&case, flags)?;
    let text = match m.analysis {
        AnalysisBand::WideBand => {
            let ss = state_space(&study, m)?;
            match args.common.format {
                Format::Human => ss.dump(),
                Format::Json => to_json(&report::state_space_json(&ss)),
            }
        }
        AnalysisBand::LowFrequency => {
            let reg = regulation(&case, args.reg.as_deref())?;
            let j = study.jacobian(&reg)?;
            match args.common.format {
                Format::Human => report::jacobian(&j),
                Format::Json => to_json(&report::jacobian_json(&j)),
            }
        }
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pf(a) => cmd_pf(a),
        Command::Passivity(a) => cmd_passivity(a),
        Command::Tables(a) => cmd_tables(a),
        Command::DumpModel(a) => cmd_dump(a),
    };
    match result {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
