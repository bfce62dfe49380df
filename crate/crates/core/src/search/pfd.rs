//! Partially ordered forward decomposition.
//!
//! A node's network keeps its before-relation transitively closed. Any task
//! without a predecessor may be progressed: primitive ones by executing an
//! action, compound ones by decomposition, which inherits the decomposed
//! task's constraints and is discarded if the result has a cycle.

use std::collections::HashSet;
use std::io::Write;

use crate::ground::{applicable, apply, GroundProblem, State, TaskId};
use crate::plan::PlanStep;

use super::network::{BoolMatrix, InstanceId, NetworkTask, TaskNetwork};
use super::{
    plan_from_trail, Budget, Frontier, Priority, SearchOptions, SearchOutcome, SearchReport, SearchStats, Trail,
};

pub use super::network::{warshall_closure, Cyclic};

#[derive(Debug, Clone)]
pub struct PartialOrderNode {
    pub state: State,
    pub network: TaskNetwork,
    pub trail: Trail,
    pub non_decomposed: usize,
    pub action_count: usize,
    pub next_instance: InstanceId,
}

impl PartialOrderNode {
    pub fn root(problem: &GroundProblem) -> Self {
        let network = problem.initial_network.clone();
        PartialOrderNode {
            state: problem.s0.clone(),
            non_decomposed: network.tasks.iter().filter(|t| !problem.is_primitive(t.task)).count(),
            next_instance: network.len() as InstanceId,
            network,
            trail: Trail::default(),
            action_count: 0,
        }
    }

    pub fn priority(&self) -> Priority {
        Priority { non_decomposed: self.non_decomposed, actions: self.action_count }
    }

    fn key(&self) -> (State, Vec<TaskId>, Vec<(u32, u32)>) {
        let (tasks, m) = self.network.canonical_key();
        (self.state.clone(), tasks, m)
    }
}

/// Positions of tasks with no predecessor, ascending.
pub fn free_tasks(network: &TaskNetwork) -> Vec<usize> {
    network.free_tasks()
}

/// Replaces compound task `i` by the subtasks of `method`. The network is
/// already closed, so only the method's own order needs closing; the result
/// equals a full [`warshall_closure`] of the spliced relation.
pub fn decompose_in_network(
    network: &TaskNetwork,
    i: usize,
    children: &[NetworkTask],
    method_ordering: &BoolMatrix,
) -> Result<TaskNetwork, Cyclic> {
    network.decompose_incremental(i, children, method_ordering)
}

/// Successors from executing free primitive task `i`.
pub fn expand_free_primitive(problem: &GroundProblem, node: &PartialOrderNode, i: usize) -> Vec<PartialOrderNode> {
    let task = node.network.tasks[i];
    debug_assert!(problem.is_primitive(task.task));
    let rest = node.network.remove(i);
    problem.relevant_actions[task.task]
        .iter()
        .map(|&a| &problem.actions[a])
        .filter(|a| applicable(*a, &node.state))
        .map(|a| PartialOrderNode {
            state: apply(&node.state, a),
            network: rest.clone(),
            trail: node.trail.push(PlanStep::Execute { instance: task.instance, action: a.id }),
            non_decomposed: node.non_decomposed,
            action_count: node.action_count + 1,
            next_instance: node.next_instance,
        })
        .collect()
}

/// Successors from decomposing free compound task `i`, and how many
/// decompositions were dropped as cyclic.
pub fn expand_free_compound(
    problem: &GroundProblem,
    node: &PartialOrderNode,
    i: usize,
) -> (Vec<PartialOrderNode>, usize) {
    let task = node.network.tasks[i];
    debug_assert!(!problem.is_primitive(task.task));
    let mut out = Vec::new();
    let mut cyclic = 0;
    for m in problem.relevant_methods[task.task].iter().map(|&m| &problem.methods[m]) {
        if !applicable(m, &node.state) {
            continue;
        }
        let children: Vec<NetworkTask> = m
            .subtasks
            .iter()
            .enumerate()
            .map(|(k, &t)| NetworkTask { task: t, instance: node.next_instance + k as InstanceId })
            .collect();
        let Ok(network) = decompose_in_network(&node.network, i, &children, &m.ordering) else {
            cyclic += 1;
            continue;
        };
        let added = children.iter().filter(|t| !problem.is_primitive(t.task)).count();
        out.push(PartialOrderNode {
            state: node.state.clone(),
            network,
            trail: node.trail.push(PlanStep::Decompose {
                instance: task.instance,
                task: task.task,
                method: m.id,
                children: children.iter().map(|c| c.instance).collect(),
            }),
            non_decomposed: node.non_decomposed - 1 + added,
            action_count: node.action_count,
            next_instance: node.next_instance + children.len() as InstanceId,
        });
    }
    (out, cyclic)
}

/// Solves a problem whose initial network and methods may be partially ordered.
pub fn pfd_solve(problem: &GroundProblem, options: &SearchOptions) -> SearchReport {
    search(problem, options, None)
}

/// [`pfd_solve`], writing one line per expansion to `trace`.
pub fn pfd_solve_traced(problem: &GroundProblem, options: &SearchOptions, trace: &mut dyn Write) -> SearchReport {
    search(problem, options, Some(trace))
}

fn search(problem: &GroundProblem, options: &SearchOptions, mut trace: Option<&mut dyn Write>) -> SearchReport {
    let budget = Budget::new(options.limits);
    let mut stats = SearchStats::default();
    if !problem.initial_network.before.is_irreflexive() {
        stats.time = budget.elapsed();
        return SearchReport { outcome: SearchOutcome::Unsolvable, stats };
    }
    let root_ids: Vec<InstanceId> = problem.initial_network.tasks.iter().map(|t| t.instance).collect();
    let mut frontier = Frontier::default();
    let mut seen = HashSet::new();
    let root = PartialOrderNode::root(problem);
    if options.duplicate_detection {
        seen.insert(root.key());
    }
    frontier.push(root.priority(), root);
    stats.generated = 1;

    let outcome = loop {
        if let Some(r) = budget.exceeded(stats.expanded) {
            break SearchOutcome::ResourceExhausted(r);
        }
        let Some(node) = frontier.pop() else {
            break SearchOutcome::Unsolvable;
        };
        if node.network.is_empty() {
            break SearchOutcome::Solved(plan_from_trail(root_ids, &node.trail));
        }
        stats.expanded += 1;
        let mut free = free_tasks(&node.network);
        if options.first_free_only {
            free.truncate(1);
        }
        let mut successors = Vec::new();
        for &i in &free {
            let task = node.network.tasks[i].task;
            if problem.is_primitive(task) {
                successors.extend(expand_free_primitive(problem, &node, i));
            } else {
                let (s, c) = expand_free_compound(problem, &node, i);
                successors.extend(s);
                stats.cyclic += c as u64;
            }
        }
        if let Some(w) = trace.as_deref_mut() {
            let names: Vec<String> = free.iter().map(|&i| problem.task_string(node.network.tasks[i].task)).collect();
            let _ = writeln!(w, "expand {} free [{}] branches {}", stats.expanded, names.join(" "), successors.len());
        }
        for s in successors {
            if options.duplicate_detection && !seen.insert(s.key()) {
                stats.duplicates += 1;
                continue;
            }
            stats.generated += 1;
            frontier.push(s.priority(), s);
        }
    };
    stats.time = budget.elapsed();
    SearchReport { outcome, stats }
}
