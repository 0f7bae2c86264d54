mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "modkit", version, about = "Approximately modular set functions")]
struct Cli {
    /// Worker threads for sampled scans (default: all cores).
    #[arg(long, global = true, env = "MODKIT_THREADS")]
    threads: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Weak,
    Strong,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Hadamard,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LevelArg {
    Sampled,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ConstructKind {
    Pawlik,
    Symm,
    Four,
    Km70,
    Km20,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VerifyTarget {
    Km70,
    Km20,
    Pawlik,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate a function on one or more sets.
    Eval {
        #[arg(long = "fn")]
        function: String,
        /// `0x…`, `0b…` or a 1-based list such as `1,3,5`; repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
    },
    /// Weak and strong modularity violations, with Δ when it is cheap.
    Eps {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        /// Sample this many pairs instead of scanning all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closest linear function in the max norm.
    Fit {
        #[arg(long = "fn")]
        function: String,
        /// Fit against this many random constraint sets instead of all sets.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the fitted linear function here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a linear approximation from queries.
    Learn {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, value_enum, default_value = "hadamard")]
        method: MethodArg,
        /// Distance to the nearest linear function; estimated when omitted and n <= 24.
        #[arg(long)]
        delta: Option<f64>,
        /// Write the hypothesis here; the error profile goes next to it as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples_per_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a named witness.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the claimed properties of a witness.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        #[arg(long, value_enum, default_value = "sampled")]
        level: LevelArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Half-size for pawlik.
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Expander graphs and set recombination.
    Expander {
        #[command(subcommand)]
        action: ExpanderCommand,
    },
    /// Evaluate the upper-bound formulas.
    Bounds {
        #[arg(long, conflicts_with = "params")]
        preset: Option<String>,
        /// A bound profile JSON file.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Search small universes for a large Δ / ε_strong.
    Search {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        warm: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum ExpanderCommand {
    /// Sample a biregular bipartite graph on 2k + 2θk vertices.
    Sample {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively check |N(S)| >= |S| for small left subsets.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Push a collection of sets through a graph.
    Recombine {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "fn")]
        function: String,
        /// A collection JSON file; generated from --per-item otherwise.
        #[arg(long)]
        sources: Option<PathBuf>,
        #[arg(long)]
        per_item: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponential rate of the expansion-failure union bound.
    Rate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let mut doc = match commands::run(cli.command) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    doc.timing = start.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&doc).expect("report serializes");
    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    if doc.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
