//! Hierarchical plans: the search result, its IPC 2020 text form, and a
//! validator that replays a plan against the ground problem using plain
//! set operations.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ground::{ActionId, FactId, GroundMethodId, GroundProblem, TaskId};
use crate::search::network::InstanceId;

/// One progression step, in the order the search took it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanStep {
    Execute { instance: InstanceId, action: ActionId },
    Decompose { instance: InstanceId, task: TaskId, method: GroundMethodId, children: Vec<InstanceId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Plan {
    /// Executed actions in order.
    pub actions: Vec<ActionId>,
    /// Instance ids of the initial network's tasks.
    pub root: Vec<InstanceId>,
    /// Executions and decompositions interleaved as they happened.
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn decompositions(&self) -> impl Iterator<Item = (InstanceId, TaskId, GroundMethodId)> + '_ {
        self.steps.iter().filter_map(|s| match s {
            PlanStep::Decompose { instance, task, method, .. } => Some((*instance, *task, *method)),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionLine {
    pub id: usize,
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodLine {
    pub id: usize,
    pub task: String,
    pub args: Vec<String>,
    pub method: String,
    pub children: Vec<usize>,
}

/// The textual IPC 2020 hierarchical plan.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlanDocument {
    pub actions: Vec<ActionLine>,
    pub root: Vec<usize>,
    pub methods: Vec<MethodLine>,
}

impl PlanDocument {
    /// Actions are numbered 0.. in execution order, decomposed tasks after
    /// them in decomposition order.
    pub fn from_plan(plan: &Plan, problem: &GroundProblem) -> PlanDocument {
        let sym = &problem.symbols;
        let mut ids: HashMap<InstanceId, usize> = HashMap::new();
        let mut next = 0;
        for s in &plan.steps {
            if let PlanStep::Execute { instance, .. } = s {
                ids.insert(*instance, next);
                next += 1;
            }
        }
        for s in &plan.steps {
            if let PlanStep::Decompose { instance, .. } = s {
                ids.insert(*instance, next);
                next += 1;
            }
        }
        let names = |args: &[usize]| args.iter().map(|&o| sym.objects.name(o).to_string()).collect();
        let mut doc = PlanDocument::default();
        for s in &plan.steps {
            match s {
                PlanStep::Execute { instance, action } => {
                    let t = &problem.tasks[problem.actions[*action].task];
                    doc.actions.push(ActionLine {
                        id: ids[instance],
                        name: sym.task_name(t.task).to_string(),
                        args: names(&t.args),
                    });
                }
                PlanStep::Decompose { instance, task, method, children } => {
                    let t = &problem.tasks[*task];
                    doc.methods.push(MethodLine {
                        id: ids[instance],
                        task: sym.task_name(t.task).to_string(),
                        args: names(&t.args),
                        method: problem.method_name(*method).to_string(),
                        children: children.iter().map(|c| ids[c]).collect(),
                    });
                }
            }
        }
        doc.root = plan.root.iter().filter_map(|r| ids.get(r).copied()).collect();
        doc
    }
}

fn join(args: &[String]) -> String {
    args.iter().map(|a| format!(" {a}")).collect()
}

impl fmt::Display for PlanDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "==>")?;
        for a in &self.actions {
            writeln!(f, "{} ({}{})", a.id, a.name, join(&a.args))?;
        }
        let root: String = self.root.iter().map(|r| format!(" {r}")).collect();
        writeln!(f, "root{root}")?;
        for m in &self.methods {
            let children: String = m.children.iter().map(|c| format!(" {c}")).collect();
            writeln!(f, "{} {}{} -> {}{}", m.id, m.task, join(&m.args), m.method, children)?;
        }
        writeln!(f, "<==")
    }
}

/// Renders a plan in the IPC 2020 hierarchical format.
pub fn write_plan(plan: &Plan, problem: &GroundProblem) -> String {
    PlanDocument::from_plan(plan, problem).to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("plan line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

/// Reads the IPC 2020 hierarchical plan format. Action lines may or may not
/// parenthesize the action.
pub fn parse_plan(text: &str) -> Result<PlanDocument, PlanParseError> {
    let mut doc = PlanDocument::default();
    let mut started = false;
    let mut seen_root = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: &str| PlanParseError { line, message: message.to_string() };
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content == "==>" {
            started = true;
            continue;
        }
        if content == "<==" {
            break;
        }
        if !started {
            return Err(err("expected `==>` before plan content"));
        }
        let cleaned = content.replace(['(', ')'], " ");
        let mut words = cleaned.split_whitespace();
        let first = words.next().expect("non-empty line");
        if first == "root" {
            if seen_root {
                return Err(err("duplicate root line"));
            }
            seen_root = true;
            doc.root =
                words.map(|w| w.parse().map_err(|_| err("root ids must be integers"))).collect::<Result<_, _>>()?;
            continue;
        }
        let id: usize = first.parse().map_err(|_| err("line must start with an integer id"))?;
        let rest: Vec<&str> = words.collect();
        let Some(name) = rest.first() else {
            return Err(err("missing task name"));
        };
        if let Some(arrow) = rest.iter().position(|w| *w == "->") {
            let method = rest.get(arrow + 1).ok_or_else(|| err("missing method name after `->`"))?;
            let children = rest[arrow + 2..]
                .iter()
                .map(|w| w.parse().map_err(|_| err("child ids must be integers")))
                .collect::<Result<_, _>>()?;
            doc.methods.push(MethodLine {
                id,
                task: name.to_string(),
                args: rest[1..arrow].iter().map(|s| s.to_string()).collect(),
                method: method.to_string(),
                children,
            });
        } else {
            if seen_root {
                return Err(err("action line after the root line"));
            }
            doc.actions.push(ActionLine {
                id,
                name: name.to_string(),
                args: rest[1..].iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    let declared: HashSet<usize> = doc.actions.iter().map(|a| a.id).chain(doc.methods.iter().map(|m| m.id)).collect();
    for c in doc.methods.iter().flat_map(|m| &m.children).chain(&doc.root) {
        if !declared.contains(c) {
            return Err(PlanParseError { line: 0, message: format!("id {c} is referenced but never declared") });
        }
    }
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Executability,
    Decomposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub check: Check,
    /// 0-based index into `Plan::actions` (executability) or `Plan::steps`
    /// (decomposition); equal to the length when the problem is at the end.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Valid,
    Invalid(Violation),
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validation::Valid)
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validation::Valid => f.write_str("valid"),
            Validation::Invalid(v) => {
                let what = match v.check {
                    Check::Executability => "executability",
                    Check::Decomposition => "decomposition",
                };
                write!(f, "invalid ({what} at step {}): {}", v.position + 1, v.message)
            }
        }
    }
}

fn fact_set(bits: &crate::BitSet) -> BTreeSet<FactId> {
    bits.ones().collect()
}

fn holds(state: &BTreeSet<FactId>, pos: &BTreeSet<FactId>, neg: &BTreeSet<FactId>) -> bool {
    pos.is_subset(state) && neg.is_disjoint(state)
}

fn transition(state: &mut BTreeSet<FactId>, problem: &GroundProblem, action: ActionId) {
    let a = &problem.actions[action];
    for f in a.eff_del.ones() {
        state.remove(&f);
    }
    state.extend(a.eff_add.ones());
}

/// Checks that the action sequence is executable from `s0` and that
/// replaying the decomposition steps from the initial network yields exactly
/// that sequence, respecting every ordering constraint.
pub fn validate_plan(problem: &GroundProblem, plan: &Plan) -> Validation {
    let fail = |check, position, message: String| Validation::Invalid(Violation { check, position, message });

    let mut state: BTreeSet<FactId> = problem.s0.facts().collect();
    for (k, &a) in plan.actions.iter().enumerate() {
        let Some(action) = problem.actions.get(a) else {
            return fail(Check::Executability, k, format!("unknown action id {a}"));
        };
        if !holds(&state, &fact_set(&action.pre_pos), &fact_set(&action.pre_neg)) {
            return fail(Check::Executability, k, format!("{} is not applicable", problem.task_string(action.task)));
        }
        transition(&mut state, problem, a);
    }

    // Replay. Live tasks and explicit before-edges between live instances.
    let mut live: BTreeMap<InstanceId, TaskId> = BTreeMap::new();
    let mut edges: BTreeSet<(InstanceId, InstanceId)> = BTreeSet::new();
    let mut used: HashSet<InstanceId> = HashSet::new();
    let init = &problem.initial_network;
    let root: Vec<InstanceId> = init.tasks.iter().map(|t| t.instance).collect();
    if plan.root != root {
        return fail(Check::Decomposition, 0, "root does not match the initial task network".into());
    }
    for t in &init.tasks {
        live.insert(t.instance, t.task);
        used.insert(t.instance);
    }
    for (i, j) in init.before.pairs() {
        edges.insert((init.tasks[i].instance, init.tasks[j].instance));
    }

    let mut state: BTreeSet<FactId> = problem.s0.facts().collect();
    let mut executed = 0;
    let is_free = |edges: &BTreeSet<(InstanceId, InstanceId)>, x: InstanceId| !edges.iter().any(|&(_, b)| b == x);

    for (k, step) in plan.steps.iter().enumerate() {
        match step {
            PlanStep::Execute { instance, action } => {
                let Some(&task) = live.get(instance) else {
                    return fail(Check::Decomposition, k, format!("instance {instance} is not in the network"));
                };
                if problem.actions.get(*action).map(|a| a.task) != Some(task) {
                    return fail(
                        Check::Decomposition,
                        k,
                        format!("action {action} does not accomplish {}", problem.task_string(task)),
                    );
                }
                if !is_free(&edges, *instance) {
                    return fail(
                        Check::Decomposition,
                        k,
                        format!("{} executed before its predecessors", problem.task_string(task)),
                    );
                }
                if plan.actions.get(executed) != Some(action) {
                    return fail(Check::Decomposition, k, "step does not match the action sequence".into());
                }
                let a = &problem.actions[*action];
                if !holds(&state, &fact_set(&a.pre_pos), &fact_set(&a.pre_neg)) {
                    return fail(Check::Decomposition, k, format!("{} is not applicable", problem.task_string(task)));
                }
                transition(&mut state, problem, *action);
                executed += 1;
                live.remove(instance);
                edges.retain(|&(a, b)| a != *instance && b != *instance);
            }
            PlanStep::Decompose { instance, task, method, children } => {
                let Some(&live_task) = live.get(instance) else {
                    return fail(Check::Decomposition, k, format!("instance {instance} is not in the network"));
                };
                if live_task != *task || problem.is_primitive(live_task) {
                    return fail(Check::Decomposition, k, format!("instance {instance} is not compound task {task}"));
                }
                let Some(m) = problem.methods.get(*method) else {
                    return fail(Check::Decomposition, k, format!("unknown method id {method}"));
                };
                if m.task != live_task {
                    return fail(
                        Check::Decomposition,
                        k,
                        format!(
                            "method {} is not relevant for {}",
                            problem.method_name(*method),
                            problem.task_string(live_task)
                        ),
                    );
                }
                if !is_free(&edges, *instance) {
                    return fail(
                        Check::Decomposition,
                        k,
                        format!("{} decomposed before its predecessors", problem.task_string(live_task)),
                    );
                }
                if !holds(&state, &fact_set(&m.pre_pos), &fact_set(&m.pre_neg)) {
                    return fail(
                        Check::Decomposition,
                        k,
                        format!("precondition of {} does not hold", problem.method_name(*method)),
                    );
                }
                if children.len() != m.subtasks.len() {
                    return fail(Check::Decomposition, k, "wrong number of children".into());
                }
                for c in children {
                    if !used.insert(*c) {
                        return fail(Check::Decomposition, k, format!("instance id {c} reused"));
                    }
                }
                let preds: Vec<InstanceId> = edges.iter().filter(|e| e.1 == *instance).map(|e| e.0).collect();
                let succs: Vec<InstanceId> = edges.iter().filter(|e| e.0 == *instance).map(|e| e.1).collect();
                edges.retain(|&(a, b)| a != *instance && b != *instance);
                live.remove(instance);
                for (c, &t) in children.iter().zip(&m.subtasks) {
                    live.insert(*c, t);
                    for &p in &preds {
                        edges.insert((p, *c));
                    }
                    for &s in &succs {
                        edges.insert((*c, s));
                    }
                }
                for (a, b) in m.ordering.pairs() {
                    edges.insert((children[a], children[b]));
                }
                if children.is_empty() {
                    for &p in &preds {
                        for &s in &succs {
                            edges.insert((p, s));
                        }
                    }
                }
            }
        }
    }
    if let Some((inst, &task)) = live.iter().next() {
        return fail(
            Check::Decomposition,
            plan.steps.len(),
            format!("task {} (instance {inst}) is never accomplished", problem.task_string(task)),
        );
    }
    if executed != plan.actions.len() {
        return fail(Check::Decomposition, plan.steps.len(), "action not derivable from the task network".into());
    }
    Validation::Valid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::pfd::pfd_solve;
    use crate::search::tfd::tfd_solve;
    use crate::search::{SearchOptions, SearchOutcome};
    use crate::testutil::*;

    fn solved(p: &GroundProblem) -> Plan {
        match tfd_solve(p, &SearchOptions::default()).unwrap().outcome {
            SearchOutcome::Solved(plan) => plan,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn door_plan_text() {
        let p = grounded(DOOR);
        assert_eq!(write_plan(&solved(&p), &p), "==>\n0 (open-door d1)\nroot 1\n1 make-open d1 -> m-open 0\n<==\n");
    }

    #[test]
    fn empty_method_plan_has_only_decompositions() {
        let p = ground_src(DOOR.0, &DOOR.1.replace("(:init (closed d1))", "(:init (open d1))"));
        let plan = solved(&p);
        assert!(plan.actions.is_empty());
        assert_eq!(write_plan(&plan, &p), "==>\nroot 0\n0 make-open d1 -> m-noop\n<==\n");
        assert!(validate_plan(&p, &plan).is_valid());
    }

    #[test]
    fn actions_numbered_in_execution_order() {
        let p = grounded(TRANSPORT);
        let doc = PlanDocument::from_plan(&solved(&p), &p);
        let ids: Vec<usize> = doc.actions.iter().map(|a| a.id).collect();
        assert_eq!(ids, (0..8).collect::<Vec<_>>());
        assert_eq!(doc.root, vec![8, 13]);
    }

    #[test]
    fn round_trip() {
        for f in [DOOR, TRANSPORT] {
            let p = grounded(f);
            let doc = PlanDocument::from_plan(&solved(&p), &p);
            assert_eq!(parse_plan(&doc.to_string()).unwrap(), doc);
        }
        let p = grounded(TRANSPORT_PO);
        let SearchOutcome::Solved(plan) = pfd_solve(&p, &SearchOptions::default()).outcome else { panic!() };
        let doc = PlanDocument::from_plan(&plan, &p);
        assert_eq!(parse_plan(&doc.to_string()).unwrap(), doc);
    }

    #[test]
    fn parser_accepts_bare_action_lines() {
        let doc = parse_plan("==>\n0 open-door d1\nroot 1\n1 make-open d1 -> m-open 0\n<==\n").unwrap();
        assert_eq!(doc.actions[0].name, "open-door");
        assert_eq!(doc.methods[0].children, vec![0]);
    }

    #[test]
    fn parser_rejects_garbage() {
        assert_eq!(parse_plan("0 (a)\n").unwrap_err().line, 1);
        assert!(parse_plan("==>\nroot 3\n<==\n").is_err());
        assert_eq!(parse_plan("==>\nx (a)\n").unwrap_err().line, 2);
        assert!(parse_plan("==>\nroot 0\n0 t -> \n").is_err());
    }

    #[test]
    fn door_plan_is_valid() {
        let p = grounded(DOOR);
        assert_eq!(validate_plan(&p, &solved(&p)), Validation::Valid);
    }

    #[test]
    fn repeated_action_fails_executability_at_second_step() {
        let p = grounded(DOOR);
        let mut plan = solved(&p);
        plan.actions.push(plan.actions[0]);
        match validate_plan(&p, &plan) {
            Validation::Invalid(v) => {
                assert_eq!(v.check, Check::Executability);
                assert_eq!(v.position, 1);
                assert!(Validation::Invalid(v).to_string().contains("executability at step 2"));
            }
            Validation::Valid => panic!(),
        }
    }

    #[test]
    fn underivable_action_fails_decomposition() {
        let p = grounded(TRANSPORT);
        let mut plan = solved(&p);
        // executable, but never produced by the network
        plan.actions.truncate(1);
        plan.actions.push(p.actions.iter().find(|a| p.task_string(a.task) == "(drive truck l1 l2)").unwrap().id);
        let v = validate_plan(&p, &plan);
        assert!(matches!(v, Validation::Invalid(Violation { check: Check::Decomposition, .. })), "{v}");
    }

    fn invalid_decomposition(p: &GroundProblem, plan: &Plan) -> bool {
        matches!(validate_plan(p, plan), Validation::Invalid(Violation { check: Check::Decomposition, .. }))
    }

    #[test]
    fn order_violations_are_caught() {
        let p = grounded(TRANSPORT);
        let plan = solved(&p);
        // Swap the two top-level deliveries' first decompositions.
        let mut swapped = plan.clone();
        let firsts: Vec<usize> = swapped
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, PlanStep::Decompose { instance, .. } if plan.root.contains(instance)))
            .map(|(k, _)| k)
            .collect();
        swapped.steps.swap(firsts[0], firsts[1]);
        assert!(invalid_decomposition(&p, &swapped));
        // Dropping a step leaves a task unaccomplished.
        let mut short = plan.clone();
        short.steps.pop();
        short.actions.pop();
        assert!(invalid_decomposition(&p, &short));
        // Wrong root.
        let mut rooted = plan;
        rooted.root.reverse();
        assert!(invalid_decomposition(&p, &rooted));
    }

    #[test]
    fn method_precondition_checked_at_decomposition_time() {
        let p = grounded(DOOR);
        let mut plan = solved(&p);
        let noop = (0..p.methods.len()).find(|&m| p.method_name(m) == "m-noop").unwrap();
        if let PlanStep::Decompose { method, children, .. } = &mut plan.steps[0] {
            *method = noop;
            children.clear();
        }
        plan.steps.truncate(1);
        plan.actions.clear();
        assert!(invalid_decomposition(&p, &plan));
    }
}
