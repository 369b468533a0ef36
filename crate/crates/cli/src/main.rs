use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use heavenly::error::Error;
use heavenly::flows::{FlowKind, Trajectory};
use heavenly::lie_poisson::BracketKernel;
use heavenly::report::VerificationReport;
use heavenly::suites::{self, EvolveRun, DEFAULTS};
use heavenly::Case;

#[derive(Parser, Debug)]
#[command(
    name = "heavenly",
    version,
    about = "Numerical checks for the Mikhalev-Pavlov and Plebanski heavenly equations"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = CaseArg::Mp)]
    case: CaseArg,
    /// Grid points per axis (defaults depend on case and subcommand)
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Loop-algebra power for bracket tables
    #[arg(long, global = true, default_value_t = -1, allow_negative_numbers = true)]
    p: i32,
    #[arg(long, global = true, default_value_t = DEFAULTS.seed)]
    seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV output (bracket table or trajectory)
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Print the defaults table and exit
    #[arg(long)]
    show_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CaseArg {
    Mp,
    Plebanski,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Mp => Case::MikhalevPavlov,
            CaseArg::Plebanski => Case::Plebanski,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Suite {
    LoopAlgebra,
    Poisson,
    Inverse,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FlowArg {
    MpY,
    MpT,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Algebraic and Poisson-structure checks
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Discretized Lie-Poisson kernel against its closed form
    BracketTable,
    /// Lax compatibility against the heavenly equation
    LaxCheck {
        /// Manufactured field; five random jets when omitted
        #[arg(long)]
        field: Option<String>,
        #[arg(long, default_value_t = DEFAULTS.lax_y, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = DEFAULTS.lax_t, allow_negative_numbers = true)]
        t: f64,
    },
    /// Integrate a hierarchy flow for v = u_x
    Evolve {
        #[arg(long, value_enum, default_value_t = FlowArg::MpY)]
        flow: FlowArg,
        #[arg(long, default_value = DEFAULTS.evolve_init)]
        init: String,
        #[arg(long, default_value_t = DEFAULTS.evolve_dt)]
        dt: f64,
        #[arg(long = "T", default_value_t = DEFAULTS.evolve_t)]
        t_end: f64,
        /// Apply the 2/3 rule to the quadratic products
        #[arg(long)]
        dealias: bool,
        /// Measure the RK4 order by step halving
        #[arg(long)]
        order_check: bool,
    },
    /// Variational derivatives and homotopy reconstruction
    Reconstruct,
    /// Casimir defects of the seed elements
    Casimir {
        #[arg(long)]
        field: Option<String>,
        #[arg(long, default_value_t = DEFAULTS.lax_y, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = DEFAULTS.lax_t, allow_negative_numbers = true)]
        t: f64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::WrongDimension(_)
            | Error::UnsupportedPower(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn mp_only(case: Case, what: &str) -> Result<(), Failure> {
    match case {
        Case::MikhalevPavlov => Ok(()),
        Case::Plebanski => Err(Failure::Usage(format!("{what} is only available for --case mp"))),
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if cli.show_defaults {
        let text = serde_json::to_string_pretty(&DEFAULTS).map_err(|e| Failure::Runtime(e.to_string()))?;
        let _ = writeln!(std::io::stdout(), "{text}");
        if cli.command.is_none() {
            return Ok(true);
        }
    }
    let Some(command) = &cli.command else {
        return Err(Failure::Usage("a subcommand is required (see --help)".into()));
    };
    let case = Case::from(cli.case);
    let n = cli.grid.unwrap_or(DEFAULTS.grid(case));
    let reports = match command {
        Command::Verify { suite: Suite::LoopAlgebra } => suites::loop_algebra_suite(case, n, cli.seed)?,
        Command::Verify { suite: Suite::Poisson } => {
            mp_only(case, "verify poisson")?;
            suites::poisson_suite(n, cli.seed)?
        }
        Command::Verify { suite: Suite::Inverse } => {
            mp_only(case, "verify inverse")?;
            suites::inverse_suite(n)?
        }
        Command::BracketTable => {
            let (reports, table) = suites::bracket_suite(case, n, cli.p)?;
            if let (Some(path), Some(table)) = (&cli.csv, &table) {
                write_kernel_csv(path, table)?;
            }
            reports
        }
        Command::LaxCheck { field, y, t } => {
            let expr = field.as_deref().map(suites::field).transpose()?;
            let jets = suites::jets(case, n, expr.as_ref(), cli.seed, DEFAULTS.jets, *y, *t)?;
            suites::lax_suite(case, &jets)?
        }
        Command::Casimir { field, y, t } => {
            let expr = field.as_deref().map(suites::field).transpose()?;
            let jets = suites::jets(case, n, expr.as_ref(), cli.seed, DEFAULTS.jets, *y, *t)?;
            suites::casimir_suite(case, &jets)?
        }
        Command::Reconstruct => {
            mp_only(case, "reconstruct")?;
            suites::reconstruct_suite(cli.grid.unwrap_or(DEFAULTS.evolve_grid), cli.seed)?
        }
        Command::Evolve { flow, init, dt, t_end, dealias, order_check } => {
            mp_only(case, "evolve")?;
            if !(*dt > 0.0 && *t_end > 0.0) {
                return Err(Failure::Usage("--dt and --T must be positive".into()));
            }
            let run = EvolveRun {
                flow: match flow {
                    FlowArg::MpY => FlowKind::MpY,
                    FlowArg::MpT => FlowKind::MpT,
                },
                init: suites::field(init)?,
                n: cli.grid.unwrap_or(DEFAULTS.evolve_grid),
                dt: *dt,
                t_end: *t_end,
                dealias: *dealias,
                order_check: *order_check,
            };
            let (reports, traj) = suites::evolve_suite(&run)?;
            if let Some(path) = &cli.csv {
                write_trajectory_csv(path, &traj)?;
            }
            reports
        }
    };
    write_reports(cli.out.as_deref(), &reports)?;
    Ok(reports.iter().all(|r| r.pass))
}

fn write_reports(out: Option<&Path>, reports: &[VerificationReport]) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(reports).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "H0", "momentum", "mass", "min_v", "max_v"])?;
    for k in 0..traj.times.len() {
        let (lo, hi) = traj.min_max(k);
        let row = [traj.times[k], traj.h0[k], traj.momentum[k], traj.mass[k], lo, hi];
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn write_kernel_csv(path: &Path, table: &BracketKernel) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = table.pairs.first().map_or(1, |(a, _)| a.len());
    let mut header: Vec<String> = Vec::new();
    for side in ["t1", "t2"] {
        for k in 0..dim {
            header.push(format!("{side}_{k}"));
        }
    }
    header.push("numeric".into());
    header.push("closed_form".into());
    w.write_record(&header)?;
    for (i, (t1, t2)) in table.pairs.iter().enumerate() {
        let mut row: Vec<String> = t1.iter().chain(t2).map(|v| format!("{v:e}")).collect();
        row.push(format!("{:e}", table.numeric[i]));
        row.push(table.closed_form.as_ref().map_or(String::new(), |c| format!("{:e}", c[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
