use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hplan_cli::{bench, exit, Engine, RunConfig};

#[derive(Parser)]
#[command(name = "hplan", version, about = "HTN planner for HDDL problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one domain/problem pair and print the plan.
    Plan(PlanArgs),
    /// Solve every instance of a corpus directory and tabulate the results.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Tfd,
    Pfd,
}

impl From<SearchArg> for Engine {
    fn from(s: SearchArg) -> Engine {
        match s {
            SearchArg::Tfd => Engine::Tfd,
            SearchArg::Pfd => Engine::Pfd,
        }
    }
}

#[derive(Args)]
struct SearchFlags {
    #[arg(long, value_enum, default_value = "tfd")]
    search: SearchArg,
    /// Wall-clock limit for the search, in seconds.
    #[arg(long, default_value_t = 300.0, allow_negative_numbers = true)]
    timeout: f64,
    /// Stop after this many node expansions.
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    no_duplicate_detection: bool,
    /// PFD: branch only on the first free task.
    #[arg(long)]
    pfd_first_free: bool,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
    /// Print the integer-encoded lifted model.
    #[arg(long)]
    dump_lifted: bool,
    /// Print fact, action and method tables of the grounding.
    #[arg(long)]
    dump_ground: bool,
    /// Print grounding and search counters.
    #[arg(long)]
    stats: bool,
    /// Print one line per node expansion.
    #[arg(long)]
    trace: bool,
    /// Write the plan here instead of stdout.
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory with one subdirectory per instance.
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn config(domain: PathBuf, problem: PathBuf, s: &SearchFlags) -> Result<RunConfig, String> {
    if !(s.timeout.is_finite() && s.timeout > 0.0) {
        return Err(format!("--timeout must be a positive number of seconds, got {}", s.timeout));
    }
    Ok(RunConfig {
        search: s.search.into(),
        timeout: Duration::from_secs_f64(s.timeout),
        max_nodes: s.max_nodes,
        no_duplicate_detection: s.no_duplicate_detection,
        pfd_first_free: s.pfd_first_free,
        ..RunConfig::new(domain, problem)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors, which here means an exhausted search
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Plan(a) => match config(a.domain, a.problem, &a.search) {
            Ok(c) => {
                let c = RunConfig {
                    dump_lifted: a.dump_lifted,
                    dump_ground: a.dump_ground,
                    stats: a.stats,
                    trace: a.trace,
                    plan_out: a.plan_out,
                    ..c
                };
                hplan_cli::run(&c, &mut io::stdout().lock(), &mut io::stderr().lock())
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit::INPUT
            }
        },
        Command::Bench(a) => run_bench(a),
    };
    ExitCode::from(code as u8)
}

fn run_bench(a: BenchArgs) -> i32 {
    let template = match config(PathBuf::new(), PathBuf::new(), &a.search) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::INPUT;
        }
    };
    let report = match bench(&a.corpus, &template, a.jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", a.corpus.display());
            return exit::INPUT;
        }
    };
    print!("{}", report.text());
    let _ = io::stdout().flush();
    if let Some(path) = a.csv {
        let written = std::fs::File::create(&path).and_then(|f| report.write_csv(io::BufWriter::new(f)));
        if let Err(e) = written {
            eprintln!("error: {}: {e}", path.display());
            return exit::INPUT;
        }
    }
    exit::SOLVED
}
