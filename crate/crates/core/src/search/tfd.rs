//! Totally ordered forward decomposition.
//!
//! Each node carries the remaining task sequence. The head task is either
//! executed by a relevant applicable action or replaced by the subtasks of a
//! relevant applicable method; no successors means the node is a dead end.

use std::collections::HashSet;
use std::io::Write;

use crate::ground::{applicable, apply, GroundProblem, State, TaskId};
use crate::plan::PlanStep;

use super::network::{InstanceId, NetworkTask};
use super::{
    plan_from_trail, Budget, Frontier, Priority, SearchError, SearchOptions, SearchOutcome, SearchReport, SearchStats,
    Trail,
};

#[derive(Debug, Clone)]
pub struct TotalOrderNode {
    pub state: State,
    /// Remaining tasks, head first.
    pub tasks: Vec<NetworkTask>,
    pub trail: Trail,
    pub non_decomposed: usize,
    pub action_count: usize,
    pub next_instance: InstanceId,
}

impl TotalOrderNode {
    pub fn root(problem: &GroundProblem) -> Self {
        let tasks = problem.initial_network.tasks.clone();
        TotalOrderNode {
            state: problem.s0.clone(),
            non_decomposed: tasks.iter().filter(|t| !problem.is_primitive(t.task)).count(),
            next_instance: tasks.len() as InstanceId,
            tasks,
            trail: Trail::default(),
            action_count: 0,
        }
    }

    pub fn priority(&self) -> Priority {
        Priority { non_decomposed: self.non_decomposed, actions: self.action_count }
    }

    pub fn plan_prefix(&self) -> Vec<crate::ground::ActionId> {
        self.trail
            .steps()
            .into_iter()
            .filter_map(|s| if let PlanStep::Execute { action, .. } = s { Some(action) } else { None })
            .collect()
    }

    fn key(&self) -> (State, Vec<TaskId>) {
        (self.state.clone(), self.tasks.iter().map(|t| t.task).collect())
    }
}

/// Successors for a primitive head task: one per relevant action applicable
/// in the node's state.
pub fn expand_primitive(problem: &GroundProblem, node: &TotalOrderNode) -> Vec<TotalOrderNode> {
    let head = node.tasks[0];
    debug_assert!(problem.is_primitive(head.task));
    problem.relevant_actions[head.task]
        .iter()
        .map(|&a| &problem.actions[a])
        .filter(|a| applicable(*a, &node.state))
        .map(|a| TotalOrderNode {
            state: apply(&node.state, a),
            tasks: node.tasks[1..].to_vec(),
            trail: node.trail.push(PlanStep::Execute { instance: head.instance, action: a.id }),
            non_decomposed: node.non_decomposed,
            action_count: node.action_count + 1,
            next_instance: node.next_instance,
        })
        .collect()
}

/// Successors for a compound head task: one per relevant method applicable in
/// the node's state, its subtasks prepended to the rest of the sequence.
pub fn expand_compound(problem: &GroundProblem, node: &TotalOrderNode) -> Vec<TotalOrderNode> {
    let head = node.tasks[0];
    debug_assert!(!problem.is_primitive(head.task));
    problem.relevant_methods[head.task]
        .iter()
        .map(|&m| &problem.methods[m])
        .filter(|m| applicable(*m, &node.state))
        .map(|m| {
            let children: Vec<NetworkTask> = m
                .subtasks
                .iter()
                .enumerate()
                .map(|(k, &task)| NetworkTask { task, instance: node.next_instance + k as InstanceId })
                .collect();
            let added = children.iter().filter(|t| !problem.is_primitive(t.task)).count();
            let mut tasks = children.clone();
            tasks.extend_from_slice(&node.tasks[1..]);
            TotalOrderNode {
                state: node.state.clone(),
                tasks,
                trail: node.trail.push(PlanStep::Decompose {
                    instance: head.instance,
                    task: head.task,
                    method: m.id,
                    children: children.iter().map(|c| c.instance).collect(),
                }),
                non_decomposed: node.non_decomposed - 1 + added,
                action_count: node.action_count,
                next_instance: node.next_instance + children.len() as InstanceId,
            }
        })
        .collect()
}

/// Solves a totally ordered problem.
pub fn tfd_solve(problem: &GroundProblem, options: &SearchOptions) -> Result<SearchReport, SearchError> {
    search(problem, options, None)
}

/// [`tfd_solve`], writing one line per expansion to `trace`.
pub fn tfd_solve_traced(
    problem: &GroundProblem,
    options: &SearchOptions,
    trace: &mut dyn Write,
) -> Result<SearchReport, SearchError> {
    search(problem, options, Some(trace))
}

fn search(
    problem: &GroundProblem,
    options: &SearchOptions,
    mut trace: Option<&mut dyn Write>,
) -> Result<SearchReport, SearchError> {
    if let Some(why) = problem.partial_order_witness() {
        return Err(SearchError::PartiallyOrdered(why));
    }
    let budget = Budget::new(options.limits);
    let mut stats = SearchStats::default();
    let root_ids: Vec<InstanceId> = problem.initial_network.tasks.iter().map(|t| t.instance).collect();
    let mut frontier = Frontier::default();
    let mut seen: HashSet<(State, Vec<TaskId>)> = HashSet::new();
    let root = TotalOrderNode::root(problem);
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
        let Some(head) = node.tasks.first() else {
            break SearchOutcome::Solved(plan_from_trail(root_ids, &node.trail));
        };
        stats.expanded += 1;
        let successors = if problem.is_primitive(head.task) {
            expand_primitive(problem, &node)
        } else {
            expand_compound(problem, &node)
        };
        if let Some(w) = trace.as_deref_mut() {
            let _ = writeln!(
                w,
                "expand {} task {} branches {}",
                stats.expanded,
                problem.task_string(head.task),
                successors.len()
            );
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
    Ok(SearchReport { outcome, stats })
}
