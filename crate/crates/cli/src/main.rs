//! `hsc-plan`: run, sweep and audit hydrogen supply-chain planning cases.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use hsc_core::model::TruckMode;

use commands::Code;

#[derive(Parser)]
#[command(name = "hsc-plan", version, about = "Least-cost hydrogen supply-chain capacity planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Build, solve and audit each scenario point and write its result tables.
    Run(RunArgs),
    /// Solve every combination of the given axes and write sweep.csv.
    Sweep(RunArgs),
    /// Audit a solution CSV against a case and print the report as JSON.
    Audit(AuditArgs),
    /// List the bundled example cases.
    Cases,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Carbon price in $/tonne CO2. Repeat to sweep.
    #[arg(long = "carbon-price", value_name = "USD_PER_T")]
    pub carbon_price: Vec<f64>,
    /// Electrolyzer capital cost in $/kW. Repeat to sweep.
    #[arg(long = "elec-capex", value_name = "USD_PER_KW")]
    pub elec_capex: Vec<f64>,
    /// Multiplier on pipeline capital cost. Repeat to sweep.
    #[arg(long = "pipe-cost-factor", value_name = "FACTOR")]
    pub pipe_cost_factor: Vec<f64>,
    /// relaxed, integer or existing. Repeat to compare modes.
    #[arg(long = "truck-mode", value_name = "MODE")]
    pub truck_mode: Vec<TruckMode>,
    /// Trip legs per load for dedicated route fleets in existing mode.
    #[arg(long = "existing-trip-factor", value_name = "LEGS")]
    pub existing_trip_factor: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    /// Reference simplex and branch and bound.
    Builtin,
    /// Write the instance as MPS with a name map and stop.
    ExportOnly,
}

#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Case directory or bundled case name.
    pub case: String,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Solver::Builtin)]
    pub solver: Solver,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Wall-clock limit for branch and bound, seconds.
    #[arg(long = "time-limit", value_name = "SECONDS")]
    pub time_limit: Option<f64>,
}

#[derive(Args, Clone, Debug)]
pub struct AuditArgs {
    /// Case directory or bundled case name.
    pub case: String,
    /// Solution file with header `variable,value`.
    pub solution: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Code::Input } else { Code::Ok };
            let _ = e.print();
            return code.into();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Run(args) => commands::run(&args, false),
        Command::Sweep(args) => commands::run(&args, true),
        Command::Audit(args) => commands::audit(&args),
        Command::Cases => commands::cases(),
    };
    match result {
        Ok(code) => code.into(),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code.into()
        }
    }
}
