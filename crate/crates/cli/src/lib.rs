//! Command line front end: problem input, command dispatch and reports.

pub mod commands;
pub mod input;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, verify_report};
pub use input::Problem;
pub use report::{Params, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("verification failure: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<contact_core::Error> for CliError {
    fn from(e: contact_core::Error) -> Self {
        use contact_core::Error as E;
        match e {
            E::VerificationFailed(_) | E::ContradictoryEvidence(_) => CliError::Verification(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "contact", version, about = "Orders of contact and property PS for real hypersurface germs")]
pub struct Cli {
    /// Print only the machine-readable section.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// Problem file with `n = ...` and `r = ...` (or `g = ...`) lines.
    pub file: Option<PathBuf>,
    /// Inline defining function instead of a file.
    #[arg(long, conflicts_with = "file")]
    pub expr: Option<String>,
    /// Number of variables for --expr (default: largest zK index).
    #[arg(long, requires = "expr")]
    pub nvars: Option<usize>,
    /// Treat --expr as the graph function g of `2Re(z_{n+1}) + g`.
    #[arg(long, requires = "expr")]
    pub graph: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BudgetArgs {
    #[arg(long)]
    pub max_mult: Option<u32>,
    #[arg(long)]
    pub max_deg: Option<u32>,
    #[arg(long)]
    pub coeff_height: Option<u32>,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Order of vanishing of the entry polynomial.
    Order {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Pullback of the defining function along a curve.
    Pullback {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        curve: String,
    },
    /// Order of contact along a curve.
    Contact {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        curve: String,
    },
    /// Property PS for the graph function: Gram certificate, then search.
    PsCheck {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Degree through which a non-rigid germ is normalized.
        #[arg(long)]
        order: Option<u32>,
    },
    /// PS for the Taylor truncations of the germ.
    GermPs {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        kmin: Option<u32>,
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Exact Gram decomposition of the graph function.
    Gram {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Regular type through a pullback order bound.
    RegType {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "max")]
        max_level: Option<u32>,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Bounded search for curves of large contact ratio.
    SingSearch {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Regular curve of contact 4 from a singular curve of contact 4m.
    Desingularize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Checks the partition expansion against direct differentiation.
    FdbVerify {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Type report combining all evidence.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Include the stabilization of PS over Taylor truncations.
        #[arg(long)]
        all: bool,
        #[arg(long = "max")]
        max_level: Option<u32>,
        #[arg(long)]
        kmin: Option<u32>,
        #[arg(long)]
        kmax: Option<u32>,
        /// Accept a bounded search without violations as PS.
        #[arg(long)]
        assume_ps: bool,
    },
    /// Replays a report and checks that every claim is reproduced.
    VerifyReport { report: PathBuf },
}

fn with_budget(p: Params, b: &BudgetArgs) -> Params {
    Params {
        max_mult: b.max_mult,
        max_deg: b.max_deg,
        coeff_height: b.coeff_height,
        trials: b.trials,
        seed: b.seed,
        ..p
    }
}

fn load(input: &InputArgs) -> Result<Problem, CliError> {
    match (&input.file, &input.expr) {
        (Some(path), _) => Problem::load(path),
        (None, Some(e)) => Problem::from_expr(e, input.nvars, input.graph),
        (None, None) => Err(CliError::Input("give a problem FILE or --expr".into())),
    }
}

/// Runs one parsed command line.
pub fn run(command: &Command) -> Result<Report, CliError> {
    let d = Params::default();
    let (name, params, input) = match command {
        Command::Order { input } => ("order", d, Some(input)),
        Command::Pullback { input, curve } => ("pullback", Params { curve: Some(curve.clone()), ..d }, Some(input)),
        Command::Contact { input, curve } => ("contact", Params { curve: Some(curve.clone()), ..d }, Some(input)),
        Command::PsCheck { input, budget, order } => {
            ("ps-check", with_budget(Params { order: *order, ..d }, budget), Some(input))
        }
        Command::GermPs { input, budget, kmin, kmax } => {
            ("germ-ps", with_budget(Params { kmin: *kmin, kmax: *kmax, ..d }, budget), Some(input))
        }
        Command::Gram { input, order } => ("gram", Params { order: *order, ..d }, Some(input)),
        Command::RegType { input, max_level, order } => {
            ("reg-type", Params { max_level: *max_level, order: *order, ..d }, Some(input))
        }
        Command::SingSearch { input, budget, order } => {
            ("sing-search", with_budget(Params { order: *order, ..d }, budget), Some(input))
        }
        Command::Desingularize { input, curve, order } => {
            ("desingularize", Params { curve: Some(curve.clone()), order: *order, ..d }, Some(input))
        }
        Command::FdbVerify { k, trials, seed } => {
            ("fdb-verify", Params { k: *k, trials: *trials, seed: *seed, ..d }, None)
        }
        Command::Report { input, budget, all, max_level, kmin, kmax, assume_ps } => (
            "report",
            with_budget(
                Params { all: *all, max_level: *max_level, kmin: *kmin, kmax: *kmax, assume_ps: *assume_ps, ..d },
                budget,
            ),
            Some(input),
        ),
        Command::VerifyReport { report } => {
            let text = std::fs::read_to_string(report)
                .map_err(|e| CliError::Input(format!("{}: {}", report.display(), e)))?;
            let original = Report::parse(&text).map_err(CliError::Input)?;
            return verify_report(&original);
        }
    };
    let problem = input.map(load).transpose()?;
    execute(name, &params, problem.as_ref())
}

/// Exit status of a finished run: 0, or 1 when a verified violation was
/// reported.
pub fn exit_code(report: &Report) -> i32 {
    if report.status == "violation" {
        1
    } else {
        0
    }
}
