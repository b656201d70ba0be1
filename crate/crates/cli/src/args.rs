use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "li",
    version,
    about = "Lattice measures, probability, divergence and maximum entropy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Significant digits for numbers (decimal places for assoc enclosures).
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(4..=50), global = true)]
    pub digits: u32,

    /// Worker threads for the assoc search; LI_JOBS overrides this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// Exactly one JSON source.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// JSON input file, or `-` for standard input.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Inline JSON input.
    #[arg(long)]
    pub json: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pr(predicate | context) under a measure.
    Prob(Input),
    /// Posterior from a prior and a likelihood table.
    Bayes(Input),
    /// Minimum-divergence measure under linear constraints.
    Maxent(Input),
    /// H(w | u) between positive measures.
    Divergence(Input),
    /// Kullback-Leibler information of p relative to q.
    Information(Input),
    /// Shannon entropy of p.
    Entropy(Input),
    /// Associativity construction: δ narrowing over a surd basis.
    Assoc {
        #[command(subcommand)]
        command: AssocCommand,
    },
    /// Functional-equation residual checks.
    Funceq {
        #[command(subcommand)]
        command: FunceqCommand,
    },
    /// Order and associativity axioms of a binary operation.
    AxiomCheck(AxiomArgs),
    /// Lattice summary and element operations.
    Lattice(Input),
}

#[derive(Debug, Args)]
pub struct Basis {
    /// Old atom values, e.g. `1,sqrt2,sqrt3`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub basis: Vec<String>,

    /// Value of the new atom, e.g. `sqrt5` or `5/3`.
    #[arg(long)]
    pub delta: String,
}

#[derive(Debug, Subcommand)]
pub enum AssocCommand {
    /// Bounds on δ from every copy count up to max-u.
    Narrow {
        #[command(flatten)]
        basis: Basis,
        #[arg(long, default_value_t = 200)]
        max_u: u64,
    },
    /// Per-u brackets of u·δ.
    Table {
        #[command(flatten)]
        basis: Basis,
        /// Copy counts, e.g. `1,2,3,10`.
        #[arg(long = "u", value_delimiter = ',', required = true)]
        u: Vec<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FunceqCommand {
    /// Ψ(x) = C·e^{Ax} against the product equation on a grid over [-3, 3]³.
    Product {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 10)]
        grid: usize,
    },
    /// H(m) = A + B·m + C·(m log m − m) against the variational equation.
    Variational {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: f64,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: f64,
        #[arg(long = "Cc", allow_hyphen_values = true)]
        c: f64,
        /// Split B = B₁ + B₂; defaults to B/2.
        #[arg(long, allow_hyphen_values = true)]
        b1: Option<f64>,
        #[arg(long, default_value_t = 10)]
        grid: usize,
    },
    /// Golden-ratio closed form of the 3-term recurrence.
    ThreeTerm {
        #[arg(long, allow_hyphen_values = true)]
        psi0: f64,
        #[arg(long = "psi-b", allow_hyphen_values = true)]
        psi_b: f64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpName {
    Addition,
    FloorLeft,
    FloorRight,
    SumOfSquares,
    Max,
    /// Table supplied via --input/--json as {"samples": [...], "table": [[...]]}.
    Sampled,
}

#[derive(Debug, Args)]
pub struct AxiomArgs {
    #[arg(long, value_enum)]
    pub op: OpName,

    /// Sample points, e.g. `0.1,0.9,1.0`. Defaults to the table's samples for `sampled`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub samples: Vec<f64>,

    #[arg(long, conflicts_with = "json")]
    pub input: Option<PathBuf>,

    #[arg(long)]
    pub json: Option<String>,
}
