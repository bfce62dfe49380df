use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use log::warn;

use crate::lifted::{
    resolve, Equality, GroundAtom, GroundTask, IndexedModel, Inertia, InertiaClass, Literal, MethodId, ObjectId,
    TaskRef, Term,
};

use super::GroundingFailure;

/// Ground action before bitset encoding. Static literals are already checked
/// and left out of `pre_pos`/`pre_neg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCandidate {
    pub lifted: usize,
    pub binding: Vec<ObjectId>,
    pub task: GroundTask,
    pub pre_pos: Vec<GroundAtom>,
    pub pre_neg: Vec<GroundAtom>,
    pub add: Vec<GroundAtom>,
    pub del: Vec<GroundAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodCandidate {
    pub lifted: MethodId,
    pub binding: Vec<ObjectId>,
    pub task: GroundTask,
    pub pre_pos: Vec<GroundAtom>,
    pub pre_neg: Vec<GroundAtom>,
    pub subtasks: Vec<GroundTask>,
    pub ordering: Vec<(usize, usize)>,
    pub totally_ordered: bool,
}

enum Check<'a> {
    Equality(&'a Equality),
    Static(&'a Literal),
}

fn max_param(terms: &[Term]) -> Option<usize> {
    terms.iter().filter_map(|t| if let Term::Param(p) = t { Some(*p) } else { None }).max()
}

/// Backtracking enumeration of parameter bindings. Each check runs as soon
/// as its last parameter is bound, so failing prefixes are cut early.
struct Binder<'a> {
    domains: &'a [Vec<ObjectId>],
    preset: Vec<Option<ObjectId>>,
    /// Checks with no parameters.
    upfront: Vec<Check<'a>>,
    /// Checks indexed by the highest parameter they mention.
    at_level: Vec<Vec<Check<'a>>>,
    init: &'a HashSet<GroundAtom>,
}

impl<'a> Binder<'a> {
    fn new(
        domains: &'a [Vec<ObjectId>],
        equalities: &'a [Equality],
        precondition: &'a [Literal],
        inertia: &Inertia,
        init: &'a HashSet<GroundAtom>,
    ) -> Self {
        let n = domains.len();
        let mut upfront = Vec::new();
        let mut at_level: Vec<Vec<Check>> = (0..n).map(|_| Vec::new()).collect();
        for e in equalities {
            match max_param(&[e.left, e.right]) {
                Some(p) => at_level[p].push(Check::Equality(e)),
                None => upfront.push(Check::Equality(e)),
            }
        }
        for l in precondition.iter().filter(|l| inertia.is_static(l.atom.predicate)) {
            match max_param(&l.atom.args) {
                Some(p) => at_level[p].push(Check::Static(l)),
                None => upfront.push(Check::Static(l)),
            }
        }
        Binder { domains, preset: vec![None; n], upfront, at_level, init }
    }

    fn holds(&self, check: &Check, binding: &[ObjectId]) -> bool {
        match check {
            Check::Equality(e) => (resolve(e.left, binding) == resolve(e.right, binding)) == e.equal,
            Check::Static(l) => self.init.contains(&l.atom.ground(binding)) == l.positive,
        }
    }

    fn run(&self, out: &mut impl FnMut(&[ObjectId])) {
        if self.upfront.iter().all(|c| self.holds(c, &[])) {
            let mut binding = vec![0; self.domains.len()];
            self.extend(0, &mut binding, out);
        }
    }

    fn extend(&self, level: usize, binding: &mut Vec<ObjectId>, out: &mut impl FnMut(&[ObjectId])) {
        if level == self.domains.len() {
            out(binding);
            return;
        }
        let fixed;
        let choices: &[ObjectId] = match self.preset[level] {
            Some(v) => {
                if self.domains[level].binary_search(&v).is_err() {
                    return;
                }
                fixed = [v];
                &fixed
            }
            None => &self.domains[level],
        };
        for &o in choices {
            binding[level] = o;
            if self.at_level[level].iter().all(|c| self.holds(c, binding)) {
                self.extend(level + 1, binding, out);
            }
        }
    }
}

fn ground_condition(
    precondition: &[Literal],
    inertia: &Inertia,
    binding: &[ObjectId],
) -> (Vec<GroundAtom>, Vec<GroundAtom>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for l in precondition.iter().filter(|l| !inertia.is_static(l.atom.predicate)) {
        let a = l.atom.ground(binding);
        if l.positive {
            pos.push(a)
        } else {
            neg.push(a)
        }
    }
    pos.sort();
    pos.dedup();
    neg.sort();
    neg.dedup();
    (pos, neg)
}

fn intersects(a: &[GroundAtom], b: &[GroundAtom]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// Instantiates every action over its (restricted) parameter domains.
///
/// Returns the candidates and the number of bindings dropped because they
/// add and delete the same atom.
pub fn instantiate_actions(model: &IndexedModel, inertia: &Inertia) -> (Vec<ActionCandidate>, usize) {
    let init: HashSet<GroundAtom> = model.init.iter().cloned().collect();
    let mut out = Vec::new();
    let mut contradictory = 0;
    for (idx, action) in model.actions.iter().enumerate() {
        if action.uninstantiable {
            continue;
        }
        let binder = Binder::new(&action.domains, &action.equalities, &action.precondition, inertia, &init);
        binder.run(&mut |binding| {
            let (pre_pos, pre_neg) = ground_condition(&action.precondition, inertia, binding);
            if intersects(&pre_pos, &pre_neg) {
                return;
            }
            let mut add: Vec<GroundAtom> = action.add.iter().map(|a| a.ground(binding)).collect();
            let mut del: Vec<GroundAtom> = action.del.iter().map(|a| a.ground(binding)).collect();
            add.sort();
            add.dedup();
            del.sort();
            del.dedup();
            let task = GroundTask { task: TaskRef::Primitive(action.name), args: binding.to_vec() };
            if intersects(&add, &del) {
                warn!("dropping {}: it adds and deletes the same atom", model.symbols.task_string(&task));
                contradictory += 1;
                return;
            }
            out.push(ActionCandidate { lifted: idx, binding: binding.to_vec(), task, pre_pos, pre_neg, add, del });
        });
    }
    (out, contradictory)
}

#[derive(Debug, Clone)]
pub struct Reachability {
    /// Atoms reachable under delete relaxation, init included.
    pub reachable: BTreeSet<GroundAtom>,
    pub actions: Vec<ActionCandidate>,
}

impl Reachability {
    /// No filtering: every candidate survives and every mentioned atom counts
    /// as reachable.
    pub fn everything(actions: Vec<ActionCandidate>, init: &[GroundAtom]) -> Self {
        let mut reachable: BTreeSet<GroundAtom> = init.iter().cloned().collect();
        for a in &actions {
            reachable.extend(a.pre_pos.iter().cloned());
            reachable.extend(a.add.iter().cloned());
        }
        Reachability { reachable, actions }
    }

    /// Atoms the fact universe must contain: reachable atoms plus negative
    /// precondition atoms of surviving actions.
    pub fn universe(&self) -> BTreeSet<GroundAtom> {
        let mut u = self.reachable.clone();
        for a in &self.actions {
            u.extend(a.pre_neg.iter().cloned());
        }
        u
    }
}

/// A negative precondition on an atom that holds initially and is never
/// deleted can never be satisfied.
fn negation_blocked(atom: &GroundAtom, inertia: &Inertia, init: &HashSet<GroundAtom>) -> bool {
    inertia.class(atom.predicate) == InertiaClass::NegativeInertia && init.contains(atom)
}

/// Delete-relaxation fixpoint over the candidates.
pub fn reachability_filter(candidates: Vec<ActionCandidate>, init: &[GroundAtom], inertia: &Inertia) -> Reachability {
    let init_set: HashSet<GroundAtom> = init.iter().cloned().collect();
    let mut reachable: BTreeSet<GroundAtom> = init.iter().cloned().collect();
    let mut alive = vec![false; candidates.len()];
    let blocked: Vec<bool> =
        candidates.iter().map(|c| c.pre_neg.iter().any(|a| negation_blocked(a, inertia, &init_set))).collect();
    loop {
        let mut changed = false;
        for (i, c) in candidates.iter().enumerate() {
            if alive[i] || blocked[i] || !c.pre_pos.iter().all(|a| reachable.contains(a)) {
                continue;
            }
            alive[i] = true;
            changed = true;
            reachable.extend(c.add.iter().cloned());
        }
        if !changed {
            break;
        }
    }
    let actions = candidates.into_iter().zip(alive).filter_map(|(c, a)| a.then_some(c)).collect();
    Reachability { reachable, actions }
}

#[derive(Debug, Clone)]
pub struct MethodGrounding {
    /// Every task signature still in use, plus any pruned initial task.
    pub tasks: Vec<GroundTask>,
    pub methods: Vec<MethodCandidate>,
    /// Indices into `Reachability::actions` still in use.
    pub actions: Vec<usize>,
    /// Method bindings produced before pruning.
    pub instantiated: usize,
    pub failure: Option<GroundingFailure>,
}

/// Top-down method instantiation from the initial network, followed by the
/// dead-task pruning fixpoint.
pub fn instantiate_methods(model: &IndexedModel, inertia: &Inertia, reach: &Reachability) -> MethodGrounding {
    let init: HashSet<GroundAtom> = model.init.iter().cloned().collect();
    let action_of: HashMap<&GroundTask, usize> = reach.actions.iter().enumerate().map(|(i, a)| (&a.task, i)).collect();
    let mut by_task: Vec<Vec<usize>> = vec![Vec::new(); model.symbols.compound_tasks.len()];
    for (i, m) in model.methods.iter().enumerate() {
        if !m.uninstantiable {
            by_task[m.task].push(i);
        }
    }

    let mut visited: HashSet<GroundTask> = HashSet::new();
    let mut queue: VecDeque<GroundTask> = VecDeque::new();
    for t in &model.initial_network.tasks {
        if visited.insert(t.clone()) {
            queue.push_back(t.clone());
        }
    }
    let mut candidates: Vec<MethodCandidate> = Vec::new();
    let mut instantiated = 0;
    let mut order: Vec<GroundTask> = Vec::new();

    while let Some(task) = queue.pop_front() {
        order.push(task.clone());
        let TaskRef::Compound(c) = task.task else { continue };
        for &mi in &by_task[c] {
            let m = &model.methods[mi];
            let mut binder = Binder::new(&m.domains, &m.equalities, &m.precondition, inertia, &init);
            let mut consistent = true;
            for (term, &arg) in m.task_args.iter().zip(&task.args) {
                match *term {
                    Term::Object(o) if o != arg => consistent = false,
                    Term::Param(p) => match binder.preset[p] {
                        Some(v) if v != arg => consistent = false,
                        _ => binder.preset[p] = Some(arg),
                    },
                    _ => {}
                }
            }
            if !consistent {
                continue;
            }
            binder.run(&mut |binding| {
                instantiated += 1;
                let (pre_pos, pre_neg) = ground_condition(&m.precondition, inertia, binding);
                if intersects(&pre_pos, &pre_neg)
                    || pre_pos.iter().any(|a| !reach.reachable.contains(a))
                    || pre_neg.iter().any(|a| negation_blocked(a, inertia, &init))
                {
                    return;
                }
                let subtasks: Vec<GroundTask> = m
                    .subtasks
                    .iter()
                    .map(|s| GroundTask { task: s.task, args: s.args.iter().map(|&t| resolve(t, binding)).collect() })
                    .collect();
                for s in &subtasks {
                    if visited.insert(s.clone()) {
                        queue.push_back(s.clone());
                    }
                }
                candidates.push(MethodCandidate {
                    lifted: m.name,
                    binding: binding.to_vec(),
                    task: task.clone(),
                    pre_pos,
                    pre_neg,
                    subtasks,
                    ordering: m.ordering.clone(),
                    totally_ordered: m.totally_ordered,
                });
            });
        }
    }

    // Greatest fixpoint: a task lives while it has a live action or method,
    // a method lives while all its subtasks live.
    let index: HashMap<&GroundTask, usize> = order.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut task_alive: Vec<bool> = order
        .iter()
        .map(|t| match t.task {
            TaskRef::Primitive(_) => action_of.contains_key(t),
            TaskRef::Compound(_) => true,
        })
        .collect();
    let mut method_alive = vec![true; candidates.len()];
    let mut methods_of: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (i, m) in candidates.iter().enumerate() {
        methods_of[index[&m.task]].push(i);
    }
    loop {
        let mut changed = false;
        for (i, m) in candidates.iter().enumerate() {
            if method_alive[i] && m.subtasks.iter().any(|s| !task_alive[index[s]]) {
                method_alive[i] = false;
                changed = true;
            }
        }
        for (t, task) in order.iter().enumerate() {
            if task_alive[t] && !task.task.is_primitive() && !methods_of[t].iter().any(|&m| method_alive[m]) {
                task_alive[t] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let failure = model
        .initial_network
        .tasks
        .iter()
        .find(|t| !task_alive[index[t]])
        .map(|t| GroundingFailure::InitialTaskPruned(model.symbols.task_string(t)));

    // Keep only what is reachable from the initial network through live methods.
    let mut used_task = vec![false; order.len()];
    let mut used_method = vec![false; candidates.len()];
    let mut stack: Vec<usize> = model.initial_network.tasks.iter().map(|t| index[t]).collect();
    while let Some(t) = stack.pop() {
        if std::mem::replace(&mut used_task[t], true) {
            continue;
        }
        for &m in &methods_of[t] {
            if method_alive[m] && !used_method[m] {
                used_method[m] = true;
                stack.extend(candidates[m].subtasks.iter().map(|s| index[s]));
            }
        }
    }

    let mut actions: Vec<usize> = order
        .iter()
        .zip(&used_task)
        .filter(|(t, &u)| u && t.task.is_primitive())
        .filter_map(|(t, _)| action_of.get(t).copied())
        .collect();
    actions.sort_unstable();
    let tasks = order.iter().zip(&used_task).filter(|(_, &u)| u).map(|(t, _)| t.clone()).collect();
    let methods = candidates.into_iter().zip(used_method).filter_map(|(m, u)| u.then_some(m)).collect();
    MethodGrounding { tasks, methods, actions, instantiated, failure }
}
