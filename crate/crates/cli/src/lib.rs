//! Pipeline driver behind the `hplan` binary.
//!
//! [`run`] wires parse, ground, search and plan output for one instance and
//! maps the outcome to an exit code. [`bench`] runs the same pipeline over a
//! directory of instances.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use hplan_core::ground::{dump_ground, ground_model, GroundProblem, Grounding, GroundingOptions};
use hplan_core::hddl::load;
use hplan_core::lifted::{dump_lifted, encode_integers};
use hplan_core::plan::{validate_plan, write_plan, Validation};
use hplan_core::search::{
    pfd::{pfd_solve, pfd_solve_traced},
    tfd::{tfd_solve, tfd_solve_traced},
    Resource, SearchError, SearchLimits, SearchOptions, SearchOutcome, SearchReport,
};

pub mod exit {
    /// Plan found and validated.
    pub const SOLVED: i32 = 0;
    /// Search or grounding proved there is no plan.
    pub const UNSOLVABLE: i32 = 1;
    /// Timeout or node limit reached.
    pub const EXHAUSTED: i32 = 2;
    /// Unreadable or malformed input, or an engine that cannot handle it.
    pub const INPUT: i32 = 3;
    /// The engine returned a plan the validator rejects. Always a bug.
    pub const INVALID_PLAN: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Tfd,
    Pfd,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Tfd => "tfd",
            Engine::Pfd => "pfd",
        })
    }
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: PathBuf,
    pub problem: PathBuf,
    pub search: Engine,
    pub timeout: Duration,
    /// `None` means unbounded.
    pub max_nodes: Option<u64>,
    pub dump_lifted: bool,
    pub dump_ground: bool,
    pub stats: bool,
    pub trace: bool,
    pub no_duplicate_detection: bool,
    pub pfd_first_free: bool,
    /// Plan goes to stdout when unset.
    pub plan_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(domain: impl Into<PathBuf>, problem: impl Into<PathBuf>) -> Self {
        RunConfig {
            domain: domain.into(),
            problem: problem.into(),
            search: Engine::Tfd,
            timeout: DEFAULT_TIMEOUT,
            max_nodes: None,
            dump_lifted: false,
            dump_ground: false,
            stats: false,
            trace: false,
            no_duplicate_detection: false,
            pfd_first_free: false,
            plan_out: None,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            limits: SearchLimits { timeout: Some(self.timeout), max_nodes: self.max_nodes },
            duplicate_detection: !self.no_duplicate_detection,
            first_free_only: self.pfd_first_free,
        }
    }
}

/// What became of one pipeline run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Valid,
    Unsolvable,
    Exhausted(Resource),
    InputError(String),
    InvalidPlan(String),
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Valid => exit::SOLVED,
            Status::Unsolvable => exit::UNSOLVABLE,
            Status::Exhausted(_) => exit::EXHAUSTED,
            Status::InputError(_) => exit::INPUT,
            Status::InvalidPlan(_) => exit::INVALID_PLAN,
        }
    }

    fn label(&self) -> String {
        match self {
            Status::Valid => "Valid".into(),
            Status::Unsolvable => "Unsolvable".into(),
            Status::Exhausted(r) => format!("ResourceExhausted({r})"),
            Status::InputError(_) => "InputError".into(),
            Status::InvalidPlan(_) => "InvalidPlan".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timings {
    pub parse: Duration,
    pub ground: Duration,
    pub search: Duration,
    pub total: Duration,
}

/// Everything [`run`] reports, minus the text it prints.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    /// Plan file contents when a valid plan was found.
    pub plan: Option<String>,
    pub plan_length: Option<usize>,
    pub expanded: u64,
    pub timings: Timings,
}

/// Consecutive checkpoints, so the stage durations add up to the total.
struct Clock {
    start: Instant,
    last: Instant,
}

impl Clock {
    fn start() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now }
    }

    fn lap(&mut self) -> Duration {
        let now = Instant::now();
        let d = now - self.last;
        self.last = now;
        d
    }

    fn total(&self) -> Duration {
        self.last - self.start
    }
}

fn search(problem: &GroundProblem, config: &RunConfig, err: &mut dyn Write) -> Result<SearchReport, SearchError> {
    let options = config.search_options();
    match (config.search, config.trace) {
        (Engine::Tfd, false) => tfd_solve(problem, &options),
        (Engine::Tfd, true) => tfd_solve_traced(problem, &options, err),
        (Engine::Pfd, false) => Ok(pfd_solve(problem, &options)),
        (Engine::Pfd, true) => Ok(pfd_solve_traced(problem, &options, err)),
    }
}

/// Runs the pipeline without writing the plan anywhere. Diagnostics, dumps,
/// statistics and traces go to `err`.
pub fn execute(config: &RunConfig, err: &mut dyn Write) -> Outcome {
    let mut clock = Clock::start();
    let mut timings = Timings::default();
    let finish = |status, clock: &mut Clock, mut timings: Timings| {
        timings.total = clock.total();
        Outcome { status, plan: None, plan_length: None, expanded: 0, timings }
    };

    let (domain, problem) = match load(&config.domain, &config.problem) {
        Ok(x) => x,
        Err(e) => {
            timings.parse = clock.lap();
            return finish(Status::InputError(e.to_string()), &mut clock, timings);
        }
    };
    let model = encode_integers(&domain, &problem);
    timings.parse = clock.lap();
    if config.dump_lifted {
        let _ = writeln!(err, "{}", dump_lifted(&model));
    }

    let Grounding { problem: ground, stats, failure } = ground_model(model, &GroundingOptions::default());
    timings.ground = clock.lap();
    if config.dump_ground {
        let _ = writeln!(err, "{}", dump_ground(&ground));
    }
    if config.stats {
        let _ = writeln!(err, "{stats}");
    }
    if let Some(f) = failure {
        log::info!("grounding proved the problem unsolvable: {f}");
        let _ = writeln!(err, "unsolvable: {f}");
        return finish(Status::Unsolvable, &mut clock, timings);
    }

    let report = match search(&ground, config, err) {
        Ok(r) => r,
        Err(e @ SearchError::PartiallyOrdered(_)) => {
            timings.search = clock.lap();
            let message = format!("{e}; use --search pfd");
            return finish(Status::InputError(message), &mut clock, timings);
        }
    };
    timings.search = clock.lap();
    timings.total = clock.total();
    if config.stats {
        let s = &report.stats;
        let _ = writeln!(err, "expanded:                    {}", s.expanded);
        let _ = writeln!(err, "generated:                   {}", s.generated);
        let _ = writeln!(err, "duplicates:                  {}", s.duplicates);
        if config.search == Engine::Pfd {
            let _ = writeln!(err, "cyclic decompositions:       {}", s.cyclic);
        }
    }

    let mut outcome =
        Outcome { status: Status::Unsolvable, plan: None, plan_length: None, expanded: report.stats.expanded, timings };
    match report.outcome {
        SearchOutcome::Unsolvable => {}
        SearchOutcome::ResourceExhausted(r) => outcome.status = Status::Exhausted(r),
        SearchOutcome::Solved(plan) => match validate_plan(&ground, &plan) {
            Validation::Valid => {
                outcome.status = Status::Valid;
                outcome.plan_length = Some(plan.actions.len());
                outcome.plan = Some(write_plan(&plan, &ground));
            }
            v @ Validation::Invalid(_) => outcome.status = Status::InvalidPlan(v.to_string()),
        },
    }
    outcome
}

fn secs(d: Duration) -> String {
    format!("{:.6}s", d.as_secs_f64())
}

/// Runs one instance end to end and returns the process exit code. The plan
/// goes to `out` unless `config.plan_out` is set.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = execute(config, err);
    let mut status = outcome.status.clone();
    match &status {
        Status::Valid => {
            let text = outcome.plan.as_deref().unwrap_or_default();
            let written = match &config.plan_out {
                Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                status = Status::InputError(format!("cannot write plan: {e}"));
            }
        }
        Status::Unsolvable => {
            let _ = writeln!(err, "no plan exists");
        }
        Status::Exhausted(r) => {
            let _ = writeln!(err, "search stopped: {r} limit reached after {} expansions", outcome.expanded);
        }
        Status::InputError(_) | Status::InvalidPlan(_) => {}
    }
    match &status {
        Status::InputError(m) => {
            let _ = writeln!(err, "error: {m}");
        }
        Status::InvalidPlan(m) => {
            let _ = writeln!(err, "internal error: emitted plan is {m}");
        }
        _ => {}
    }
    let t = outcome.timings;
    let _ = writeln!(err, "time parse {}", secs(t.parse));
    let _ = writeln!(err, "time ground {}", secs(t.ground));
    let _ = writeln!(err, "time search {}", secs(t.search));
    let _ = writeln!(err, "time total {}", secs(t.total));
    status.exit_code()
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub name: String,
    pub status: Status,
    pub plan_length: Option<usize>,
    pub expanded: u64,
    pub time: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

const HEADER: [&str; 5] = ["instance", "status", "plan_length", "expanded", "time_ms"];

impl BenchRow {
    fn fields(&self) -> [String; 5] {
        [
            self.name.clone(),
            self.status.label(),
            self.plan_length.map(|n| n.to_string()).unwrap_or_default(),
            self.expanded.to_string(),
            format!("{:.3}", self.time.as_secs_f64() * 1e3),
        ]
    }
}

impl BenchReport {
    pub fn write_csv(&self, w: impl Write) -> io::Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(HEADER)?;
        for row in &self.rows {
            csv.write_record(row.fields())?;
        }
        csv.flush()
    }

    /// Column-aligned table; numbers are right-aligned.
    pub fn text(&self) -> String {
        let rows: Vec<[String; 5]> = self.rows.iter().map(BenchRow::fields).collect();
        let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, f) in width.iter_mut().zip(r) {
                *w = (*w).max(f.len());
            }
        }
        let line = |fields: &[String]| {
            let cells: Vec<String> = fields
                .iter()
                .enumerate()
                .map(|(k, f)| if k < 2 { format!("{f:<w$}", w = width[k]) } else { format!("{f:>w$}", w = width[k]) })
                .collect();
            cells.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = line(&HEADER.map(String::from));
        for r in &rows {
            s.push_str(&line(r));
        }
        s
    }
}

/// Subdirectories of `dir` holding `domain.hddl` and `problem.hddl`, sorted.
pub fn corpus_instances(dir: &Path) -> io::Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.join("domain.hddl").is_file() && path.join("problem.hddl").is_file() {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Runs every instance under `corpus_dir` with `template`'s search settings.
/// Failures are recorded per row. `jobs` > 1 runs instances on that many
/// threads; rows stay in name order either way.
pub fn bench(corpus_dir: &Path, template: &RunConfig, jobs: usize) -> io::Result<BenchReport> {
    let instances = corpus_instances(corpus_dir)?;
    let run_one = |(name, dir): &(String, PathBuf)| {
        let config = RunConfig {
            domain: dir.join("domain.hddl"),
            problem: dir.join("problem.hddl"),
            trace: false,
            dump_lifted: false,
            dump_ground: false,
            stats: false,
            plan_out: None,
            ..template.clone()
        };
        let o = execute(&config, &mut io::sink());
        log::info!("{name}: {:?}", o.status);
        BenchRow {
            name: name.clone(),
            status: o.status,
            plan_length: o.plan_length,
            expanded: o.expanded,
            time: o.timings.total,
        }
    };
    let rows = if jobs <= 1 {
        instances.iter().map(run_one).collect()
    } else {
        let chunk = instances.len().div_ceil(jobs).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> =
                instances.chunks(chunk).map(|c| s.spawn(move || c.iter().map(run_one).collect::<Vec<_>>())).collect();
            handles.into_iter().flat_map(|h| h.join().expect("bench worker panicked")).collect()
        })
    };
    Ok(BenchReport { rows })
}
