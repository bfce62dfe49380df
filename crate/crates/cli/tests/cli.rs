use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

use hplan_cli::{bench, execute, run, Engine, RunConfig, Status};
use hplan_testkit::fixtures_dir;

fn corpus(name: &str) -> (PathBuf, PathBuf) {
    let dir = fixtures_dir().join("corpus").join(name);
    (dir.join("domain.hddl"), dir.join("problem.hddl"))
}

fn config(name: &str) -> RunConfig {
    let (d, p) = corpus(name);
    RunConfig::new(d, p)
}

fn hplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hplan")).args(args).output().expect("spawn hplan")
}

fn plan_cmd(name: &str, extra: &[&str]) -> Output {
    let (d, p) = corpus(name);
    let mut args = vec!["plan", "--domain", d.to_str().unwrap(), "--problem", p.to_str().unwrap()];
    args.extend_from_slice(extra);
    hplan(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_captured(c: &RunConfig) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(c, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const DOOR_PLAN: &str = "==>\n0 (open-door d1)\nroot 1\n1 make-open d1 -> m-open 0\n<==\n";

#[test]
fn door_writes_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("door.plan");
    let o = plan_cmd("door", &["--plan-out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap(), DOOR_PLAN);
}

#[test]
fn door_plan_on_stdout_with_either_engine() {
    for engine in ["tfd", "pfd"] {
        let o = plan_cmd("door", &["--search", engine]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(String::from_utf8_lossy(&o.stdout), DOOR_PLAN);
    }
}

#[test]
fn missing_domain_is_input_error() {
    let (_, p) = corpus("door");
    let o = hplan(&["plan", "--domain", "/nonexistent/domain.hddl", "--problem", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/domain.hddl"), "{}", stderr(&o));
}

#[test]
fn parse_error_reports_file_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let (d, _) = corpus("door");
    let problem = dir.path().join("problem.hddl");
    std::fs::write(
        &problem,
        "(define (problem p)\n  (:domain door)\n  (:objects d1 - door)\n  (:init (closed d1) 7))\n",
    )
    .unwrap();
    let mut c = RunConfig::new(d, &problem);
    c.search = Engine::Tfd;
    let (code, out, err) = run_captured(&c);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    let expected = format!("{}:4:", problem.display());
    assert!(err.contains(&expected), "{err}");
}

#[test]
fn totally_ordered_engine_rejects_partial_order() {
    let o = plan_cmd("transport-po", &["--search", "tfd"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("partially ordered") && err.contains("--search pfd"), "{err}");
    assert_eq!(plan_cmd("transport-po", &["--search", "pfd"]).status.code(), Some(0));
}

#[test]
fn unsolvable_exits_one() {
    for engine in ["tfd", "pfd"] {
        let o = plan_cmd("unsolvable", &["--search", engine]);
        assert_eq!(o.status.code(), Some(1), "{engine}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn grounding_failure_exits_one() {
    let dir = fixtures_dir().join("extra/door-no-init");
    let c = RunConfig::new(dir.join("domain.hddl"), dir.join("problem.hddl"));
    let (code, _, err) = run_captured(&c);
    assert_eq!(code, 1);
    assert!(err.contains("unsolvable: initial task (make-open d1)"), "{err}");
}

#[test]
fn recursion_stops_at_node_limit() {
    for engine in ["tfd", "pfd"] {
        let o = plan_cmd("recursive", &["--search", engine, "--max-nodes", "300"]);
        assert_eq!(o.status.code(), Some(2), "{engine}");
        assert!(stderr(&o).contains("max-nodes limit reached after 300 expansions"), "{}", stderr(&o));
    }
}

#[test]
fn recursion_stops_at_timeout() {
    let mut c = config("recursive");
    c.timeout = Duration::from_millis(200);
    let o = execute(&c, &mut std::io::sink());
    assert_eq!(o.status, Status::Exhausted(hplan_core::search::Resource::Timeout));
    assert_eq!(o.status.exit_code(), 2);
}

#[test]
fn bad_timeout_is_rejected() {
    let o = plan_cmd("door", &["--timeout", "-1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--timeout must be a positive number"), "{}", stderr(&o));
    assert_eq!(plan_cmd("door", &["--search", "bfs"]).status.code(), Some(3));
    assert_eq!(hplan(&["--help"]).status.code(), Some(0));
}

fn timing(err: &str, stage: &str) -> f64 {
    let prefix = format!("time {stage} ");
    let line = err.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no {stage} in {err}"));
    line[prefix.len()..].trim_end_matches('s').parse().unwrap()
}

#[test]
fn stage_timings_sum_to_total() {
    for (name, extra) in [("door", vec![]), ("transport", vec![]), ("recursive", vec!["--max-nodes", "2000"])] {
        let o = plan_cmd(name, &extra);
        let err = stderr(&o);
        let sum: f64 = ["parse", "ground", "search"].iter().map(|s| timing(&err, s)).sum();
        let total = timing(&err, "total");
        // each printed value is rounded to the microsecond
        assert!((sum - total).abs() <= total * 0.05 + 2e-6, "{name}: {sum} vs {total}");
    }
}

#[test]
fn trace_has_one_line_per_expansion() {
    for engine in ["tfd", "pfd"] {
        let o = plan_cmd("transport", &["--search", engine, "--trace", "--stats"]);
        let err = stderr(&o);
        let lines = err.lines().filter(|l| l.starts_with("expand ")).count();
        let expanded: usize = err.lines().find_map(|l| l.strip_prefix("expanded:")).unwrap().trim().parse().unwrap();
        assert_eq!(lines, expanded, "{engine}");
    }
    let o = plan_cmd("transport-po", &["--search", "pfd", "--trace"]);
    assert!(stderr(&o).lines().any(|l| l.starts_with("expand 1 free [")), "{}", stderr(&o));
}

#[test]
fn stats_report_grounding_counts() {
    let err = stderr(&plan_cmd("transport", &["--stats"]));
    for label in ["action candidates:", "actions after reachability:", "methods after pruning:", "duplicates:"] {
        assert!(err.contains(label), "{label} missing from {err}");
    }
}

#[test]
fn ground_dump_of_door() {
    let err = stderr(&plan_cmd("door", &["--dump-ground"]));
    let expected = "\
facts (2):
  0 (closed d1) *
  1 (open d1)
tasks (2):
  t0 (open-door d1) primitive
  t1 (make-open d1) compound
actions (1):
  a0 (open-door d1) pre+ [0] pre- [] add [1] del [0]
methods (2):
  m0 m-open d1 task t1 pre+ [0] pre- [] subtasks [t0] order total
  m1 m-noop d1 task t1 pre+ [1] pre- [] subtasks [] order total
initial network [t1] order []
";
    assert!(err.starts_with(expected), "{err}");
}

#[test]
fn dumps_are_stable() {
    let strip = |o: Output| -> String { stderr(&o).lines().filter(|l| !l.starts_with("time ")).collect() };
    for name in ["transport", "transport-po"] {
        let a = strip(plan_cmd(name, &["--search", "pfd", "--dump-lifted", "--dump-ground"]));
        let b = strip(plan_cmd(name, &["--search", "pfd", "--dump-lifted", "--dump-ground"]));
        assert_eq!(a, b);
        assert!(a.contains("predicates") && a.contains("initial network"));
    }
}

#[test]
fn repeated_runs_are_identical() {
    for name in ["door", "transport", "transport-po"] {
        let mut c = config(name);
        c.search = Engine::Pfd;
        let a = execute(&c, &mut std::io::sink());
        let b = execute(&c, &mut std::io::sink());
        assert_eq!(a.plan, b.plan);
        assert!(a.plan.is_some());
        assert_eq!(a.expanded, b.expanded);
    }
}

#[test]
fn duplicate_detection_flag_reaches_search() {
    let with = execute(&config("transport"), &mut std::io::sink());
    let mut c = config("transport");
    c.no_duplicate_detection = true;
    let without = execute(&c, &mut std::io::sink());
    assert_eq!(with.status, Status::Valid);
    assert_eq!(without.status, Status::Valid);
    assert!(without.expanded >= with.expanded);
}

#[test]
fn first_free_flag_changes_branching() {
    let trace = |first_free: bool| {
        let mut c = config("transport-po");
        c.search = Engine::Pfd;
        c.trace = true;
        c.pfd_first_free = first_free;
        let mut err = Vec::new();
        let o = execute(&c, &mut err);
        assert_eq!(o.status, Status::Valid);
        String::from_utf8(err).unwrap().lines().next().unwrap().to_string()
    };
    assert_eq!(trace(false), "expand 1 free [(deliver p1 l3) (deliver p2 l1)] branches 6");
    assert_eq!(trace(true), "expand 1 free [(deliver p1 l3)] branches 3");
}

fn template(engine: Engine) -> RunConfig {
    RunConfig { search: engine, max_nodes: Some(500), ..RunConfig::new("", "") }
}

#[test]
fn bench_corpus_rows() {
    let report = bench(&fixtures_dir().join("corpus"), &template(Engine::Pfd), 1).unwrap();
    let rows: Vec<(&str, String)> = report.rows.iter().map(|r| (r.name.as_str(), format!("{:?}", r.status))).collect();
    assert_eq!(
        rows,
        [
            ("door", "Valid".to_string()),
            ("recursive", "Exhausted(MaxNodes)".to_string()),
            ("transport", "Valid".to_string()),
            ("transport-po", "Valid".to_string()),
            ("unsolvable", "Unsolvable".to_string()),
        ]
    );
    assert_eq!(report.rows[0].plan_length, Some(1));
    assert_eq!(report.rows[1].expanded, 500);
}

#[test]
fn bench_keeps_going_past_bad_instances() {
    let dir = tempfile::tempdir().unwrap();
    let copy = |name: &str| {
        let (d, p) = corpus(name);
        let to = dir.path().join(name);
        std::fs::create_dir(&to).unwrap();
        std::fs::copy(d, to.join("domain.hddl")).unwrap();
        std::fs::copy(p, to.join("problem.hddl")).unwrap();
    };
    copy("door");
    copy("unsolvable");
    let broken = dir.path().join("broken");
    std::fs::create_dir(&broken).unwrap();
    std::fs::write(broken.join("domain.hddl"), "(define (domain x)").unwrap();
    std::fs::write(broken.join("problem.hddl"), "").unwrap();
    // not an instance: no problem file
    std::fs::create_dir(dir.path().join("notes")).unwrap();

    let report = bench(dir.path(), &template(Engine::Tfd), 2).unwrap();
    let names: Vec<&str> = report.rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["broken", "door", "unsolvable"]);
    assert!(matches!(report.rows[0].status, Status::InputError(_)));
    assert_eq!(report.rows[1].status, Status::Valid);
    assert_eq!(report.rows[2].status, Status::Unsolvable);
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let o = hplan(&["bench", "--corpus", dir.path().to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "instance  status  plan_length  expanded  time_ms\n");
    assert_eq!(std::fs::read_to_string(csv).unwrap(), "instance,status,plan_length,expanded,time_ms\n");
}

#[test]
fn bench_csv_matches_text_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("bench.csv");
    let corpus_dir = fixtures_dir().join("corpus");
    let o = hplan(&[
        "bench",
        "--corpus",
        corpus_dir.to_str().unwrap(),
        "--search",
        "tfd",
        "--max-nodes",
        "500",
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(text.lines().count(), records.len() + 1);
    for (line, rec) in text.lines().skip(1).zip(&records) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        let fields: Vec<&str> = rec.iter().filter(|f| !f.is_empty()).collect();
        assert_eq!(cells, fields);
    }
    let status: Vec<&str> = records.iter().map(|r| r.get(1).unwrap()).collect();
    assert_eq!(status, ["Valid", "ResourceExhausted(max-nodes)", "Valid", "InputError", "Unsolvable"]);
}

#[test]
fn corpus_instances_ignore_loose_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("domain.hddl"), "").unwrap();
    assert!(hplan_cli::corpus_instances(Path::new(dir.path())).unwrap().is_empty());
}
