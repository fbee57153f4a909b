//! The `gridledger` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible (or otherwise
//! unsolvable) dispatch, 3 failed ledger audit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::accounting::{self, FootprintLedger, RateMode, AUDIT_TOL};
use crate::error::{Error, Result};
use crate::mer::{self, SweepOptions};
use crate::network::{self, Contract, Network};
use crate::opf;
use crate::report::{self, Comparison, ComparisonRow};
use crate::scenario::{self, ScenarioDelta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

/// Environment variable overriding the relative audit tolerance.
pub const TOL_ENV: &str = "GRIDLEDGER_TOL";

#[derive(Debug, Parser)]
#[command(name = "gridledger", version, about = "Grid carbon accounting: DC OPF, marginal emissions rates and footprint ledgers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and list every violated invariant.
    Validate(Common),
    /// Solve the cost-minimising dispatch.
    Solve(Common),
    /// Marginal and average emissions rates for every element.
    Rates(RatesArgs),
    /// Footprint ledger under one accounting regime, with balance audit.
    Footprint(FootprintArgs),
    /// Before/after report for a scenario file.
    Scenario(ScenarioArgs),
    /// Per-load footprints under every regime side by side.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Location,
    Market,
    Mer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateModeArg {
    Residual,
    Average,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Network JSON file.
    pub network: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Perturbation size in MW.
    #[arg(long, default_value_t = mer::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct FootprintArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "mer")]
    pub regime: RegimeArg,
    #[arg(long, value_enum, default_value = "residual")]
    pub rate_mode: RateModeArg,
    /// Contracts JSON (array, or object with a "contracts" array); replaces
    /// the network's own contracts.
    #[arg(long)]
    pub contracts: Option<PathBuf>,
    #[arg(long, default_value_t = mer::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub common: Common,
    /// Scenario JSON file with a "deltas" array.
    pub scenario: PathBuf,
    #[arg(long, default_value_t = mer::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub contracts: Option<PathBuf>,
    /// Bus for the 1-ton budget row.
    #[arg(long)]
    pub bus: Option<String>,
    #[arg(long, default_value_t = mer::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Lp(_) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn audit_tolerance() -> Result<f64> {
    match std::env::var(TOL_ENV) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::InvalidArgument(format!("{TOL_ENV} must be a positive number (got '{v}')"))),
        },
        Err(_) => Ok(AUDIT_TOL),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ContractsFile {
    List(Vec<Contract>),
    Wrapped { contracts: Vec<Contract> },
}

fn read_contracts(path: &Path) -> Result<Vec<Contract>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(match serde_json::from_str(&text)? {
        ContractsFile::List(c) => c,
        ContractsFile::Wrapped { contracts } => contracts,
    })
}

/// Loads the network, swapping in contracts from a separate file when
/// given, and validates the result.
fn load(path: &Path, contracts: Option<&Path>) -> Result<Network> {
    let mut n = Network::from_path(path)?;
    if let Some(c) = contracts {
        n.contracts = read_contracts(c)?;
    }
    n.ensure_valid()?;
    Ok(n)
}

fn sweep(epsilon: f64) -> Result<SweepOptions> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("--epsilon must be positive (got {epsilon})")));
    }
    Ok(SweepOptions { epsilon, ..SweepOptions::default() })
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

struct Output {
    text: String,
    /// Diagnostics that go to stderr in machine formats.
    notes: Vec<String>,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, notes: Vec::new(), code: EXIT_OK }
    }
}

fn validate(args: &Common) -> Result<Output> {
    let n = Network::from_path(&args.network)?;
    let report = network::validate(&n);
    let text = match args.format {
        Format::Json => json(&report.violations),
        Format::Csv => {
            let mut s = String::from("element,message\n");
            for v in &report.violations {
                s.push_str(&format!("{},\"{}\"\n", v.element, v.message.replace('"', "\"\"")));
            }
            s
        }
        Format::Table if report.is_empty() => format!(
            "ok: {} buses, {} generators, {} loads, {} lines, {} storage, {} contracts\n",
            n.buses.len(),
            n.generators.len(),
            n.loads.len(),
            n.lines.len(),
            n.storage.len(),
            n.contracts.len()
        ),
        Format::Table => format!("{report}\n"),
    };
    Ok(Output {
        text,
        notes: Vec::new(),
        code: if report.is_empty() { EXIT_OK } else { EXIT_INPUT },
    })
}

fn solve(args: &Common) -> Result<Output> {
    let n = load(&args.network, None)?;
    let sol = opf::solve_dcopf(&n)?;
    Ok(Output::ok(match args.format {
        Format::Table => report::dispatch_table(&n, &sol),
        Format::Csv => report::dispatch_csv(&n, &sol)?,
        Format::Json => json(&sol),
    }))
}

fn rates(args: &RatesArgs) -> Result<Output> {
    let n = load(&args.common.network, None)?;
    let sets = mer::rate_profile(&n, &sweep(args.epsilon)?)?;
    Ok(Output::ok(match args.common.format {
        Format::Table => report::rates_table(&sets),
        Format::Csv => report::rates_csv(&sets)?,
        Format::Json => json(&sets),
    }))
}

fn ledger_for(n: &Network, regime: RegimeArg, mode: RateModeArg, epsilon: f64) -> Result<FootprintLedger> {
    let sol = opf::solve_dcopf(n)?;
    match regime {
        RegimeArg::Location => accounting::ghgp_location_ledger(n, &sol),
        RegimeArg::Market => {
            let mode = match mode {
                RateModeArg::Residual => RateMode::Residual,
                RateModeArg::Average => RateMode::Average,
            };
            accounting::ghgp_market_ledger(n, &sol, &n.contracts, mode)
        }
        RegimeArg::Mer => {
            let sets = mer::rate_profile_with_base(n, &sol, &sweep(epsilon)?)?;
            accounting::mer_ledger(n, &sol, &sets)
        }
    }
}

fn footprint(args: &FootprintArgs) -> Result<Output> {
    let tol = audit_tolerance()?;
    let n = load(&args.common.network, args.contracts.as_deref())?;
    let ledger = ledger_for(&n, args.regime, args.rate_mode, args.epsilon)?;
    let audit = accounting::audit_balance(&ledger, tol);
    let text = match args.common.format {
        Format::Table => report::ledger_table(&ledger, &audit),
        Format::Csv => report::ledger_csv(&ledger)?,
        Format::Json => {
            let mut s = report::ledger_json(&ledger);
            s.push('\n');
            s
        }
    };
    Ok(Output {
        text,
        notes: vec![audit.to_string()],
        code: if audit.pass { EXIT_OK } else { EXIT_AUDIT },
    })
}

fn run_scenario(args: &ScenarioArgs) -> Result<Output> {
    let n = load(&args.common.network, None)?;
    let delta = ScenarioDelta::from_path(&args.scenario)?;
    let modified = scenario::apply(&n, &delta)?;
    let r = scenario::evaluate_with(&n, &delta, &sweep(args.epsilon)?)?;
    Ok(Output::ok(match args.common.format {
        Format::Table => report::scenario_table(&n, &modified, &r),
        Format::Csv => report::scenario_csv(&r)?,
        Format::Json => json(&r),
    }))
}

fn compare(args: &CompareArgs) -> Result<Output> {
    let n = load(&args.common.network, args.contracts.as_deref())?;
    let sol = opf::solve_dcopf(&n)?;
    let location = accounting::ghgp_location_ledger(&n, &sol)?;
    let market = accounting::ghgp_market_ledger(&n, &sol, &n.contracts, RateMode::Residual).ok();
    let sets = mer::rate_profile_with_base(&n, &sol, &sweep(args.epsilon)?)?;
    let matching = accounting::mer_ledger(&n, &sol, &sets)?;
    let kind = accounting::ElementKind::Load;
    let rows = n
        .loads
        .iter()
        .map(|l| ComparisonRow {
            load: l.id.clone(),
            location: location.footprint(kind, &l.id).unwrap_or(0.0),
            market: market.as_ref().and_then(|m| m.footprint(kind, &l.id)),
            carbon_matching: matching.footprint(kind, &l.id).unwrap_or(0.0),
        })
        .collect();
    let budget = match &args.bus {
        Some(b) => Some(scenario::ton_budget(&n, b, 1.0)?),
        None => None,
    };
    let c = Comparison { rows, budget };
    Ok(Output::ok(match args.common.format {
        Format::Table => report::comparison_table(&c),
        Format::Csv => report::comparison_csv(&c)?,
        Format::Json => json(&c),
    }))
}

fn dispatch(cli: &Cli) -> Result<(Output, Format, Option<PathBuf>)> {
    let (out, common) = match &cli.command {
        Command::Validate(a) => (validate(a)?, a),
        Command::Solve(a) => (solve(a)?, a),
        Command::Rates(a) => (rates(a)?, &a.common),
        Command::Footprint(a) => (footprint(a)?, &a.common),
        Command::Scenario(a) => (run_scenario(a)?, &a.common),
        Command::Compare(a) => (compare(a)?, &a.common),
    };
    Ok((out, common.format, common.out.clone()))
}

/// Runs one invocation, writing results to `stdout` (or `--out`) and
/// diagnostics to `stderr`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok((out, format, path)) => {
            if let Some(path) = path {
                if let Err(e) = std::fs::write(&path, &out.text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            } else {
                let _ = stdout.write_all(out.text.as_bytes());
            }
            if format != Format::Table {
                for note in &out.notes {
                    let _ = writeln!(stderr, "{note}");
                }
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
