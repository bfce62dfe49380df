//! Random propositional HTN problems written as HDDL text.
//!
//! Compound tasks `c0..` form a layered hierarchy: a method for `ci` only
//! uses actions and compound tasks `cj` with `j > i`, so every decomposition
//! is finite and at most `compound + 1` levels deep.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_facts: usize,
    pub max_actions: usize,
    pub max_compound: usize,
    pub max_methods: usize,
    pub max_subtasks: usize,
    /// Methods and the initial network use `:subtasks` with random
    /// before-pairs instead of `:ordered-subtasks`.
    pub partial_order: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_facts: 6,
            max_actions: 4,
            max_compound: 3,
            max_methods: 4,
            max_subtasks: 3,
            partial_order: false,
        }
    }
}

impl GenConfig {
    pub fn partially_ordered() -> Self {
        GenConfig { partial_order: true, ..Default::default() }
    }

    /// Upper bound on decomposition depth, initial tasks counting as 1.
    pub fn max_depth(&self) -> usize {
        self.max_compound + 1
    }
}

struct Literals {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

fn literals<R: Rng>(rng: &mut R, facts: usize, p_pos: f64, p_neg: f64) -> Literals {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for f in 0..facts {
        if rng.gen_bool(p_pos) {
            pos.push(f);
        } else if rng.gen_bool(p_neg) {
            neg.push(f);
        }
    }
    Literals { pos, neg }
}

fn condition(l: &Literals) -> String {
    let mut parts: Vec<String> = l.pos.iter().map(|f| format!("(f{f})")).collect();
    parts.extend(l.neg.iter().map(|f| format!("(not (f{f}))")));
    format!("(and {})", parts.join(" "))
}

/// Subtask list with ordering, as the body following `:task`/`:htn` keys.
fn network<R: Rng>(rng: &mut R, tasks: &[String], partial: bool) -> String {
    if tasks.is_empty() {
        return ":ordered-subtasks ()".to_string();
    }
    let labeled: Vec<String> = tasks.iter().enumerate().map(|(k, t)| format!("(s{k} ({t}))")).collect();
    if !partial {
        return format!(":ordered-subtasks (and {})", labeled.join(" "));
    }
    let mut pairs = Vec::new();
    for i in 0..tasks.len() {
        for j in i + 1..tasks.len() {
            if rng.gen_bool(0.35) {
                pairs.push(format!("(< s{i} s{j})"));
            }
        }
    }
    let mut s = format!(":subtasks (and {})", labeled.join(" "));
    if !pairs.is_empty() {
        write!(s, "\n    :ordering (and {})", pairs.join(" ")).unwrap();
    }
    s
}

/// A random (domain, problem) pair. Both texts parse under the planner's
/// HDDL subset.
pub fn random_problem<R: Rng>(rng: &mut R, config: &GenConfig) -> (String, String) {
    let facts = rng.gen_range(1..=config.max_facts);
    let n_actions = rng.gen_range(1..=config.max_actions);
    let n_compound = rng.gen_range(1..=config.max_compound);
    let n_methods = rng.gen_range(1..=config.max_methods);

    let mut d = String::new();
    writeln!(d, "(define (domain gen)").unwrap();
    writeln!(d, "  (:requirements :negative-preconditions :hierarchy :method-preconditions)").unwrap();
    let preds: Vec<String> = (0..facts).map(|f| format!("(f{f})")).collect();
    writeln!(d, "  (:predicates {})", preds.join(" ")).unwrap();
    for c in 0..n_compound {
        writeln!(d, "  (:task c{c} :parameters ())").unwrap();
    }

    // Every compound task gets a method first where possible, so that the
    // hierarchy is usually connected.
    let mut owners: Vec<usize> = (0..n_compound).collect();
    owners.shuffle(rng);
    owners.truncate(n_methods);
    while owners.len() < n_methods {
        owners.push(rng.gen_range(0..n_compound));
    }
    owners.sort();
    for (k, &c) in owners.iter().enumerate() {
        let pool: Vec<String> =
            (0..n_actions).map(|a| format!("a{a}")).chain((c + 1..n_compound).map(|j| format!("c{j}"))).collect();
        let len = rng.gen_range(0..=config.max_subtasks);
        let subtasks: Vec<String> = (0..len).map(|_| pool.choose(rng).unwrap().clone()).collect();
        let pre = literals(rng, facts, 0.15, 0.1);
        writeln!(d, "  (:method m{k}").unwrap();
        writeln!(d, "    :parameters ()").unwrap();
        writeln!(d, "    :task (c{c})").unwrap();
        if !pre.pos.is_empty() || !pre.neg.is_empty() {
            writeln!(d, "    :precondition {}", condition(&pre)).unwrap();
        }
        writeln!(d, "    {})", network(rng, &subtasks, config.partial_order)).unwrap();
    }

    for a in 0..n_actions {
        let pre = literals(rng, facts, 0.25, 0.15);
        let mut add = Vec::new();
        let mut del = Vec::new();
        for f in 0..facts {
            if rng.gen_bool(0.3) {
                add.push(format!("(f{f})"));
            } else if rng.gen_bool(0.25) {
                del.push(format!("(not (f{f}))"));
            }
        }
        add.extend(del);
        writeln!(d, "  (:action a{a}").unwrap();
        writeln!(d, "    :parameters ()").unwrap();
        writeln!(d, "    :precondition {}", condition(&pre)).unwrap();
        writeln!(d, "    :effect (and {}))", add.join(" ")).unwrap();
    }
    writeln!(d, ")").unwrap();

    let n_initial = rng.gen_range(1..=3);
    let initial: Vec<String> = (0..n_initial)
        .map(|_| {
            if rng.gen_bool(0.8) {
                format!("c{}", rng.gen_range(0..n_compound))
            } else {
                format!("a{}", rng.gen_range(0..n_actions))
            }
        })
        .collect();
    let init: Vec<String> = (0..facts).filter(|_| rng.gen_bool(0.4)).map(|f| format!("(f{f})")).collect();
    let mut p = String::new();
    writeln!(p, "(define (problem gen-1)").unwrap();
    writeln!(p, "  (:domain gen)").unwrap();
    writeln!(p, "  (:htn :parameters ()").unwrap();
    writeln!(p, "    {})", network(rng, &initial, config.partial_order)).unwrap();
    writeln!(p, "  (:init {}))", init.join(" ")).unwrap();
    (d, p)
}
