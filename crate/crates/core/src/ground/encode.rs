use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::bitset::BitSet;
use crate::lifted::{GroundAtom, GroundTask, IndexedModel};
use crate::search::network::{warshall_closure, BoolMatrix, InstanceId, NetworkTask, TaskNetwork};

use super::{Fact, GroundAction, GroundMethod, GroundProblem, MethodGrounding, Reachability, State, TaskId};

/// Orders `items` by a before-relation when that relation is a strict total
/// order. Returns the permutation, or `None` when it is partial or cyclic.
fn linearize(n: usize, pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
    let closed = warshall_closure(&BoolMatrix::from_pairs(n, pairs.iter().copied()));
    if !closed.is_irreflexive() || !closed.is_total() {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| closed.in_degree(k));
    Some(order)
}

/// Subtask order and ordering matrix, normalized so that any total order is
/// stored as a chain over list positions.
fn normalize<T: Clone>(items: &[T], pairs: &[(usize, usize)], declared_total: bool) -> (Vec<T>, BoolMatrix, bool) {
    let n = items.len();
    if declared_total {
        return (items.to_vec(), BoolMatrix::chain(n), true);
    }
    match linearize(n, pairs) {
        Some(order) => (order.iter().map(|&k| items[k].clone()).collect(), BoolMatrix::chain(n), true),
        None => (items.to_vec(), BoolMatrix::from_pairs(n, pairs.iter().copied()), false),
    }
}

/// Converts instantiated operators into fixed-width bitsets over the fact
/// universe and builds the relevance tables.
pub fn encode_bitsets(model: &IndexedModel, reach: &Reachability, grounding: MethodGrounding) -> GroundProblem {
    let mut universe: BTreeSet<GroundAtom> = reach.reachable.clone();
    for &a in &grounding.actions {
        universe.extend(reach.actions[a].pre_neg.iter().cloned());
    }
    for m in &grounding.methods {
        universe.extend(m.pre_neg.iter().cloned());
    }
    let facts: Vec<Fact> = universe.into_iter().enumerate().map(|(id, atom)| Fact { id, atom }).collect();
    let fact_id: HashMap<&GroundAtom, usize> = facts.iter().map(|f| (&f.atom, f.id)).collect();
    let width = facts.len();
    let bits = |atoms: &[GroundAtom]| BitSet::from_indices(width, atoms.iter().filter_map(|a| fact_id.get(a).copied()));

    let mut tasks: Vec<GroundTask> = grounding.tasks.clone();
    tasks.sort();
    let task_id: HashMap<&GroundTask, TaskId> = tasks.iter().enumerate().map(|(i, t)| (t, i)).collect();

    let mut action_src: Vec<usize> = grounding.actions.clone();
    action_src.sort_by_key(|&a| task_id[&reach.actions[a].task]);
    let actions: Vec<GroundAction> = action_src
        .iter()
        .enumerate()
        .map(|(id, &a)| {
            let c = &reach.actions[a];
            GroundAction {
                id,
                task: task_id[&c.task],
                pre_pos: bits(&c.pre_pos),
                pre_neg: bits(&c.pre_neg),
                eff_add: bits(&c.add),
                eff_del: bits(&c.del),
            }
        })
        .collect();

    let mut method_src: Vec<&super::MethodCandidate> = grounding.methods.iter().collect();
    method_src.sort_by(|a, b| (task_id[&a.task], a.lifted, &a.binding).cmp(&(task_id[&b.task], b.lifted, &b.binding)));
    let methods: Vec<GroundMethod> = method_src
        .iter()
        .enumerate()
        .map(|(id, m)| {
            let subs: Vec<TaskId> = m.subtasks.iter().map(|s| task_id[s]).collect();
            let (subtasks, ordering, totally_ordered) = normalize(&subs, &m.ordering, m.totally_ordered);
            GroundMethod {
                id,
                method: m.lifted,
                binding: m.binding.clone(),
                task: task_id[&m.task],
                pre_pos: bits(&m.pre_pos),
                pre_neg: bits(&m.pre_neg),
                subtasks,
                ordering,
                totally_ordered,
            }
        })
        .collect();

    let mut relevant_actions = vec![Vec::new(); tasks.len()];
    for a in &actions {
        relevant_actions[a.task].push(a.id);
    }
    let mut relevant_methods = vec![Vec::new(); tasks.len()];
    for m in &methods {
        relevant_methods[m.task].push(m.id);
    }

    let net = &model.initial_network;
    let roots: Vec<TaskId> = net.tasks.iter().map(|t| task_id[t]).collect();
    let (roots, before, initial_totally_ordered) = normalize(&roots, &net.ordering, net.totally_ordered);
    let initial_network = TaskNetwork::new(
        roots.iter().enumerate().map(|(i, &task)| NetworkTask { task, instance: i as InstanceId }).collect(),
        warshall_closure(&before),
    );

    GroundProblem {
        symbols: model.symbols.clone(),
        s0: State::new(bits(&model.init)),
        facts,
        tasks,
        actions,
        methods,
        relevant_actions,
        relevant_methods,
        initial_network,
        initial_totally_ordered,
    }
}

/// Fact, task, action and method tables with bit indices, in id order.
pub fn dump_ground(problem: &GroundProblem) -> String {
    let mut s = String::new();
    let list = |b: &BitSet| b.ones().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    writeln!(s, "facts ({}):", problem.facts.len()).unwrap();
    for f in &problem.facts {
        let init = if problem.s0.contains(f.id) { " *" } else { "" };
        writeln!(s, "  {} {}{}", f.id, problem.fact_string(f.id), init).unwrap();
    }
    writeln!(s, "tasks ({}):", problem.tasks.len()).unwrap();
    for t in 0..problem.tasks.len() {
        let kind = if problem.is_primitive(t) { "primitive" } else { "compound" };
        writeln!(s, "  t{} {} {}", t, problem.task_string(t), kind).unwrap();
    }
    writeln!(s, "actions ({}):", problem.actions.len()).unwrap();
    for a in &problem.actions {
        writeln!(
            s,
            "  a{} {} pre+ [{}] pre- [{}] add [{}] del [{}]",
            a.id,
            problem.task_string(a.task),
            list(&a.pre_pos),
            list(&a.pre_neg),
            list(&a.eff_add),
            list(&a.eff_del)
        )
        .unwrap();
    }
    writeln!(s, "methods ({}):", problem.methods.len()).unwrap();
    for m in &problem.methods {
        let subs: Vec<String> = m.subtasks.iter().map(|t| format!("t{t}")).collect();
        let order = if m.totally_ordered { "total".to_string() } else { format!("{:?}", m.ordering) };
        writeln!(
            s,
            "  m{} {}{} task t{} pre+ [{}] pre- [{}] subtasks [{}] order {}",
            m.id,
            problem.symbols.methods.name(m.method),
            problem.symbols.object_list(&m.binding),
            m.task,
            list(&m.pre_pos),
            list(&m.pre_neg),
            subs.join(","),
            order
        )
        .unwrap();
    }
    let roots: Vec<String> = problem.initial_network.tasks.iter().map(|t| format!("t{}", t.task)).collect();
    writeln!(s, "initial network [{}] order {:?}", roots.join(","), problem.initial_network.before).unwrap();
    s
}
