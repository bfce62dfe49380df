//! Test oracles for the planner.
//!
//! Nothing here shares code with the grounder or the search engines: the
//! naive grounder works from the syntax trees with string atoms, and the
//! enumerator explores progression over explicit edge sets.

pub mod closure;
pub mod generate;
pub mod naive;
pub mod oracle;

use std::path::PathBuf;

pub use generate::{random_problem, GenConfig};
pub use naive::{from_ground, naive_ground, OracleProblem};
pub use oracle::{enumerate_plans, is_solvable};

/// Repository `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// A bundled domain/problem pair.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub domain: PathBuf,
    pub problem: PathBuf,
}

impl Fixture {
    pub fn read(&self) -> (String, String) {
        let read = |p: &PathBuf| std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        (read(&self.domain), read(&self.problem))
    }
}

fn fixtures_in(dir: &str) -> Vec<Fixture> {
    let root = fixtures_dir().join(dir);
    let mut names: Vec<String> = std::fs::read_dir(&root)
        .unwrap_or_else(|e| panic!("{}: {e}", root.display()))
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("domain.hddl").exists())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| Fixture {
            domain: root.join(&name).join("domain.hddl"),
            problem: root.join(&name).join("problem.hddl"),
            name,
        })
        .collect()
}

/// The benchmark corpus, sorted by name.
pub fn corpus() -> Vec<Fixture> {
    fixtures_in("corpus")
}

/// Corpus plus edge-case fixtures.
pub fn all_fixtures() -> Vec<Fixture> {
    let mut all = corpus();
    all.extend(fixtures_in("extra"));
    all
}

pub fn fixture(name: &str) -> Fixture {
    all_fixtures().into_iter().find(|f| f.name == name).unwrap_or_else(|| panic!("no fixture {name}"))
}

/// A parsed and grounded instance, with its naive grounding alongside.
pub struct Instance {
    pub name: String,
    pub domain: hplan_core::hddl::LiftedDomainAst,
    pub problem: hplan_core::hddl::LiftedProblemAst,
    pub grounding: hplan_core::ground::Grounding,
}

impl Instance {
    pub fn from_text(name: &str, domain: &str, problem: &str) -> Instance {
        Instance::with_options(name, domain, problem, &hplan_core::ground::GroundingOptions::default())
    }

    pub fn with_options(
        name: &str,
        domain: &str,
        problem: &str,
        options: &hplan_core::ground::GroundingOptions,
    ) -> Instance {
        let d = hplan_core::hddl::domain_from_str(domain).unwrap_or_else(|e| panic!("{name}: {e}"));
        let p = hplan_core::hddl::problem_from_str(problem, &d).unwrap_or_else(|e| panic!("{name}: {e}"));
        let grounding = hplan_core::ground::ground(&d, &p, options);
        Instance { name: name.to_string(), domain: d, problem: p, grounding }
    }

    pub fn naive(&self) -> OracleProblem {
        naive_ground(&self.domain, &self.problem)
    }
}

/// Bundled fixtures followed by `per_kind` totally ordered and `per_kind`
/// partially ordered random problems, all from a fixed seed.
pub fn criterion_instances(per_kind: usize, seed: u64) -> Vec<(Instance, usize)> {
    use rand::SeedableRng;
    let mut out: Vec<(Instance, usize)> = corpus()
        .iter()
        .map(|f| {
            let (d, p) = f.read();
            (Instance::from_text(&f.name, &d, &p), 6)
        })
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for (kind, config) in [("to", GenConfig::default()), ("po", GenConfig::partially_ordered())] {
        for k in 0..per_kind {
            let (d, p) = random_problem(&mut rng, &config);
            out.push((Instance::from_text(&format!("random-{kind}-{k}"), &d, &p), config.max_depth()));
        }
    }
    out
}
