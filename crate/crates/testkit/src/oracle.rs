//! Exhaustive progression over an [`OracleProblem`].
//!
//! A network is a list of `(task, depth)` entries with explicit before-edges.
//! Any task without a live predecessor can be progressed. Decomposing a task
//! of depth d yields children of depth d + 1, and only tasks with depth below
//! the bound may be decomposed, so plans are those whose decomposition tree
//! is at most `max_depth` levels deep.

use std::collections::{BTreeSet, HashMap};

use crate::naive::{OracleAction, OracleProblem};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Network {
    tasks: Vec<(String, usize)>,
    edges: BTreeSet<(usize, usize)>,
}

impl Network {
    fn free(&self) -> Vec<usize> {
        (0..self.tasks.len()).filter(|&j| !self.edges.iter().any(|&(_, b)| b == j)).collect()
    }

    /// Drops position `i`, renumbering the edges. With `bypass`, every
    /// predecessor of `i` is kept before every successor.
    fn without(&self, i: usize, bypass: bool) -> Network {
        let shift = |k: usize| if k > i { k - 1 } else { k };
        let mut edges: BTreeSet<(usize, usize)> =
            self.edges.iter().filter(|&&(a, b)| a != i && b != i).map(|&(a, b)| (shift(a), shift(b))).collect();
        if bypass {
            for &(p, _) in self.edges.iter().filter(|e| e.1 == i) {
                for &(_, s) in self.edges.iter().filter(|e| e.0 == i) {
                    edges.insert((shift(p), shift(s)));
                }
            }
        }
        let mut tasks = self.tasks.clone();
        tasks.remove(i);
        Network { tasks, edges }
    }

    /// Replaces `i` by `children` (appended at the end) ordered by `order`.
    fn decompose(&self, i: usize, children: &[String], order: &[(usize, usize)]) -> Network {
        let depth = self.tasks[i].1 + 1;
        let mut n = self.without(i, children.is_empty());
        let base = n.tasks.len();
        let shift = |k: usize| if k > i { k - 1 } else { k };
        for c in children {
            n.tasks.push((c.clone(), depth));
        }
        for &(p, _) in self.edges.iter().filter(|e| e.1 == i) {
            for c in 0..children.len() {
                n.edges.insert((shift(p), base + c));
            }
        }
        for &(_, s) in self.edges.iter().filter(|e| e.0 == i) {
            for c in 0..children.len() {
                n.edges.insert((base + c, shift(s)));
            }
        }
        for &(a, b) in order {
            n.edges.insert((base + a, base + b));
        }
        n
    }

    fn has_cycle(&self) -> bool {
        // 0 unvisited, 1 on stack, 2 done
        fn visit(v: usize, edges: &BTreeSet<(usize, usize)>, mark: &mut [u8]) -> bool {
            mark[v] = 1;
            for &(_, w) in edges.range((v, 0)..(v + 1, 0)) {
                if mark[w] == 1 || (mark[w] == 0 && visit(w, edges, mark)) {
                    return true;
                }
            }
            mark[v] = 2;
            false
        }
        let mut mark = vec![0u8; self.tasks.len()];
        (0..self.tasks.len()).any(|v| mark[v] == 0 && visit(v, &self.edges, &mut mark))
    }
}

type State = BTreeSet<String>;
/// (state, tasks, edges) already shown to have no completion.
type FailMemo = BTreeSet<(State, Vec<(String, usize)>, Vec<(usize, usize)>)>;

fn holds(state: &State, pos: &BTreeSet<String>, neg: &BTreeSet<String>) -> bool {
    pos.is_subset(state) && neg.is_disjoint(state)
}

fn progress(state: &State, a: &OracleAction) -> State {
    let mut s: State = state.difference(&a.del).cloned().collect();
    s.extend(a.add.iter().cloned());
    s
}

struct Enumerator<'a> {
    problem: &'a OracleProblem,
    max_depth: usize,
    memo: HashMap<(State, Network), BTreeSet<Vec<String>>>,
}

impl Enumerator<'_> {
    /// Every action sequence completing `network` from `state`.
    fn plans(&mut self, state: &State, network: &Network) -> BTreeSet<Vec<String>> {
        if network.tasks.is_empty() {
            return BTreeSet::from([Vec::new()]);
        }
        let key = (state.clone(), network.clone());
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let mut out = BTreeSet::new();
        for i in network.free() {
            let (task, depth) = &network.tasks[i];
            if let Some(actions) = self.problem.actions.get(task) {
                for a in actions.iter().filter(|a| holds(state, &a.pre_pos, &a.pre_neg)) {
                    let rest = self.plans(&progress(state, a), &network.without(i, true));
                    out.extend(rest.into_iter().map(|mut p| {
                        p.insert(0, task.clone());
                        p
                    }));
                }
            }
            if *depth >= self.max_depth {
                continue;
            }
            if let Some(methods) = self.problem.methods.get(task) {
                for m in methods.iter().filter(|m| holds(state, &m.pre_pos, &m.pre_neg)) {
                    let next = network.decompose(i, &m.subtasks, &m.ordering);
                    if next.has_cycle() {
                        continue;
                    }
                    out.extend(self.plans(state, &next));
                }
            }
        }
        self.memo.insert(key, out.clone());
        out
    }
}

fn root(problem: &OracleProblem) -> Network {
    Network {
        tasks: problem.initial_tasks.iter().map(|t| (t.clone(), 1)).collect(),
        edges: problem.initial_ordering.iter().copied().collect(),
    }
}

/// All action sequences (as task strings) of solutions whose decomposition
/// tree has depth at most `max_depth`. The initial tasks are at depth 1.
pub fn enumerate_plans(problem: &OracleProblem, max_depth: usize) -> BTreeSet<Vec<String>> {
    let net = root(problem);
    if net.has_cycle() {
        return BTreeSet::new();
    }
    let mut e = Enumerator { problem, max_depth, memo: HashMap::new() };
    e.plans(&problem.init, &net)
}

/// Whether any solution of depth at most `max_depth` exists.
pub fn is_solvable(problem: &OracleProblem, max_depth: usize) -> bool {
    let net = root(problem);
    if net.has_cycle() {
        return false;
    }
    let mut failed = BTreeSet::new();
    exists(problem, max_depth, &problem.init, &net, &mut failed)
}

fn exists(problem: &OracleProblem, max_depth: usize, state: &State, network: &Network, failed: &mut FailMemo) -> bool {
    if network.tasks.is_empty() {
        return true;
    }
    let key = (state.clone(), network.tasks.clone(), network.edges.iter().copied().collect());
    if failed.contains(&key) {
        return false;
    }
    for i in network.free() {
        let (task, depth) = &network.tasks[i];
        if let Some(actions) = problem.actions.get(task) {
            for a in actions.iter().filter(|a| holds(state, &a.pre_pos, &a.pre_neg)) {
                if exists(problem, max_depth, &progress(state, a), &network.without(i, true), failed) {
                    return true;
                }
            }
        }
        if *depth >= max_depth {
            continue;
        }
        if let Some(methods) = problem.methods.get(task) {
            for m in methods.iter().filter(|m| holds(state, &m.pre_pos, &m.pre_neg)) {
                let next = network.decompose(i, &m.subtasks, &m.ordering);
                if !next.has_cycle() && exists(problem, max_depth, state, &next, failed) {
                    return true;
                }
            }
        }
    }
    failed.insert(key);
    false
}
