use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ddroc::cli::{
    emit_table, evaluate_policy, exit_code, run_experiment, write_table, ExperimentConfig, ResultBundle, RunResult,
    StatsSpec, TableFormat,
};
use ddroc::graphgen::{graph_hash, load_graph, save_graph, watts_strogatz, WSParams};
use ddroc::{Error, ProbabilityVector, Result};

#[derive(Parser)]
#[command(name = "ddroc", version, about = "Distributionally robust patrol-chain design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Markdown => TableFormat::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Watts-Strogatz graph file.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        ring_neighbors: usize,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        self_loops: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiment described by a config file and write its result bundle.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a stored chain on a graph.
    Eval {
        /// A per-run result file from a bundle.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',')]
        worst_k: Vec<usize>,
    },
    /// Print the table of a result bundle.
    Table {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn solve(config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = out
        .or_else(|| cfg.output_dir.as_ref().map(|d| config.parent().unwrap_or(Path::new(".")).join(d)))
        .unwrap_or_else(|| PathBuf::from("results"));
    let bundle = run_experiment(&cfg)?;
    bundle.save(&dir)?;
    write_table(&bundle, TableFormat::Csv, &dir.join("table.csv"))?;
    write_table(&bundle, TableFormat::Markdown, &dir.join("table.md"))?;
    print!("{}", emit_table(&bundle, TableFormat::Markdown)?);
    for run in bundle.runs.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", run.method.label(), run.error.as_deref().unwrap_or_default());
    }
    log::info!("results written to {}", dir.display());
    Ok(!bundle.any_failed())
}

fn eval(chain: &Path, graph: &Path, worst_k: Vec<usize>) -> Result<()> {
    let graph = load_graph(graph)?;
    let run = RunResult::load(chain)?;
    if let Some(e) = &run.error {
        return Err(Error::InvalidArgument(format!("result file records a failed run: {e}")));
    }
    let chain = run.chain(&graph)?;
    let spec = StatsSpec {
        worst_k,
        q0: ProbabilityVector::uniform(graph.node_count())?,
    };
    for row in evaluate_policy(&chain, &graph, &spec)? {
        match row.value {
            Some(v) => println!("{},{v:?}", row.label),
            None => println!("{},inf", row.label),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenGraph {
            n,
            ring_neighbors,
            beta,
            self_loops,
            seed,
            out,
        } => {
            let g = watts_strogatz(&WSParams {
                n,
                ring_neighbors,
                beta,
                with_self_loops: self_loops,
                seed,
            })?;
            save_graph(&g, &out)?;
            println!("{}", graph_hash(&g));
            Ok(true)
        }
        Command::Solve { config, out } => solve(&config, out),
        Command::Eval { chain, graph, worst_k } => eval(&chain, &graph, worst_k).map(|_| true),
        Command::Table { bundle, format, out } => {
            let bundle = ResultBundle::load(&bundle)?;
            match out {
                Some(path) => write_table(&bundle, format.into(), &path)?,
                None => print!("{}", emit_table(&bundle, format.into())?),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
