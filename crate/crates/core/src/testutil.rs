//! Bundled fixtures for unit tests.

use crate::ground::{ground, GroundProblem, GroundingOptions, TaskId};
use crate::hddl::{domain_from_str, problem_from_str};

macro_rules! fixture {
    ($dir:literal) => {
        (
            include_str!(concat!("../../../fixtures/", $dir, "/domain.hddl")),
            include_str!(concat!("../../../fixtures/", $dir, "/problem.hddl")),
        )
    };
}

pub const DOOR: (&str, &str) = fixture!("corpus/door");
pub const TRANSPORT: (&str, &str) = fixture!("corpus/transport");
pub const TRANSPORT_PO: (&str, &str) = fixture!("corpus/transport-po");
pub const RECURSIVE: (&str, &str) = fixture!("corpus/recursive");
pub const UNSOLVABLE: (&str, &str) = fixture!("corpus/unsolvable");
pub const CYCLIC: (&str, &str) = fixture!("extra/cyclic");

pub fn ground_src(domain: &str, problem: &str) -> GroundProblem {
    let d = domain_from_str(domain).unwrap();
    let p = problem_from_str(problem, &d).unwrap();
    ground(&d, &p, &GroundingOptions::default()).problem
}

pub fn grounded(fixture: (&str, &str)) -> GroundProblem {
    ground_src(fixture.0, fixture.1)
}

/// Task id by its printed form, e.g. `(open-door d1)`.
pub fn task(problem: &GroundProblem, text: &str) -> TaskId {
    (0..problem.tasks.len()).find(|&t| problem.task_string(t) == text).unwrap_or_else(|| panic!("no task {text}"))
}
