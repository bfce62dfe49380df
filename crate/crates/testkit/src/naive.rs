//! Full-product grounding over strings, straight from the syntax trees.

use std::collections::{BTreeMap, BTreeSet};

use hplan_core::ground::GroundProblem;
use hplan_core::hddl::{
    ConditionLiteral, LiftedDomainAst, LiftedProblemAst, TaskAtomAst, TaskNetworkAst, Term, TypedName,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleAction {
    pub pre_pos: BTreeSet<String>,
    pub pre_neg: BTreeSet<String>,
    pub add: BTreeSet<String>,
    pub del: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleMethod {
    pub name: String,
    pub pre_pos: BTreeSet<String>,
    pub pre_neg: BTreeSet<String>,
    pub subtasks: Vec<String>,
    /// Before-pairs over subtask positions, not necessarily closed.
    pub ordering: Vec<(usize, usize)>,
}

/// A ground HTN problem with atoms and tasks written as `(name args..)`.
#[derive(Debug, Clone, Default)]
pub struct OracleProblem {
    pub init: BTreeSet<String>,
    /// Primitive task to the actions accomplishing it.
    pub actions: BTreeMap<String, Vec<OracleAction>>,
    /// Compound task to its methods.
    pub methods: BTreeMap<String, Vec<OracleMethod>>,
    pub initial_tasks: Vec<String>,
    pub initial_ordering: Vec<(usize, usize)>,
}

impl OracleProblem {
    pub fn action_count(&self) -> usize {
        self.actions.values().map(Vec::len).sum()
    }

    pub fn method_count(&self) -> usize {
        self.methods.values().map(Vec::len).sum()
    }
}

fn sexpr(name: &str, args: &[String]) -> String {
    let mut s = format!("({name}");
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

fn network_order(net: &TaskNetworkAst) -> Vec<(usize, usize)> {
    if net.totally_ordered {
        (1..net.subtasks.len()).map(|k| (k - 1, k)).collect()
    } else {
        net.ordering_indices()
    }
}

struct Grounder<'a> {
    domain: &'a LiftedDomainAst,
    objects: Vec<TypedName>,
}

impl Grounder<'_> {
    fn members(&self, ty: &str) -> Vec<String> {
        self.objects
            .iter()
            .filter(|o| self.domain.ancestors(&o.ty).iter().any(|t| t == ty))
            .map(|o| o.name.clone())
            .collect()
    }

    /// Every assignment of objects to `params`, respecting only types.
    fn bindings(&self, params: &[TypedName]) -> Vec<BTreeMap<String, String>> {
        let mut out = vec![BTreeMap::new()];
        for p in params {
            let members = self.members(&p.ty);
            out = out
                .into_iter()
                .flat_map(|b| {
                    members.iter().map(move |m| {
                        let mut b = b.clone();
                        b.insert(p.name.clone(), m.clone());
                        b
                    })
                })
                .collect();
        }
        out
    }
}

fn term(t: &Term, b: &BTreeMap<String, String>) -> String {
    match t {
        Term::Variable(v) => b[v].clone(),
        Term::Constant(c) => c.clone(),
    }
}

fn terms(ts: &[Term], b: &BTreeMap<String, String>) -> Vec<String> {
    ts.iter().map(|t| term(t, b)).collect()
}

fn task(t: &TaskAtomAst, b: &BTreeMap<String, String>) -> String {
    sexpr(&t.name, &terms(&t.args, b))
}

/// Precondition as (positive, negative) atoms, or `None` when an equality
/// constraint fails.
fn condition(lits: &[ConditionLiteral], b: &BTreeMap<String, String>) -> Option<(BTreeSet<String>, BTreeSet<String>)> {
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for l in lits {
        match l {
            ConditionLiteral::Atom { positive, atom } => {
                let a = sexpr(&atom.predicate, &terms(&atom.args, b));
                if *positive {
                    pos.insert(a);
                } else {
                    neg.insert(a);
                }
            }
            ConditionLiteral::Equality { equal, left, right } => {
                if (term(left, b) == term(right, b)) != *equal {
                    return None;
                }
            }
        }
    }
    Some((pos, neg))
}

/// Grounds every operator over the full typed product. Nothing is pruned
/// except bindings that violate an equality constraint.
pub fn naive_ground(domain: &LiftedDomainAst, problem: &LiftedProblemAst) -> OracleProblem {
    let mut objects = domain.constants.clone();
    objects.extend(problem.objects.iter().cloned());
    let g = Grounder { domain, objects };
    let mut out = OracleProblem::default();

    for a in &domain.actions {
        for b in g.bindings(&a.parameters) {
            let Some((pre_pos, pre_neg)) = condition(&a.precondition, &b) else {
                continue;
            };
            let mut add = BTreeSet::new();
            let mut del = BTreeSet::new();
            for e in &a.effect {
                let atom = sexpr(&e.atom.predicate, &terms(&e.atom.args, &b));
                if e.add {
                    add.insert(atom);
                } else {
                    del.insert(atom);
                }
            }
            let args: Vec<String> = a.parameters.iter().map(|p| b[&p.name].clone()).collect();
            out.actions.entry(sexpr(&a.name, &args)).or_default().push(OracleAction { pre_pos, pre_neg, add, del });
        }
    }

    for m in &domain.methods {
        for b in g.bindings(&m.parameters) {
            let Some((pre_pos, pre_neg)) = condition(&m.precondition, &b) else {
                continue;
            };
            out.methods.entry(task(&m.task, &b)).or_default().push(OracleMethod {
                name: m.name.clone(),
                pre_pos,
                pre_neg,
                subtasks: m.network.subtasks.iter().map(|s| task(&s.task, &b)).collect(),
                ordering: network_order(&m.network),
            });
        }
    }

    out.init = problem.init.iter().map(|a| sexpr(&a.predicate, &a.args)).collect();
    let none = BTreeMap::new();
    out.initial_tasks = problem.initial_network.subtasks.iter().map(|s| task(&s.task, &none)).collect();
    out.initial_ordering = network_order(&problem.initial_network);
    out
}

/// The same representation read off a compact ground problem.
pub fn from_ground(p: &GroundProblem) -> OracleProblem {
    let facts = |b: &hplan_core::BitSet| -> BTreeSet<String> { b.ones().map(|f| p.fact_string(f)).collect() };
    let mut out = OracleProblem { init: p.s0.facts().map(|f| p.fact_string(f)).collect(), ..Default::default() };
    for a in &p.actions {
        out.actions.entry(p.task_string(a.task)).or_default().push(OracleAction {
            pre_pos: facts(&a.pre_pos),
            pre_neg: facts(&a.pre_neg),
            add: facts(&a.eff_add),
            del: facts(&a.eff_del),
        });
    }
    for m in &p.methods {
        out.methods.entry(p.task_string(m.task)).or_default().push(OracleMethod {
            name: p.method_name(m.id).to_string(),
            pre_pos: facts(&m.pre_pos),
            pre_neg: facts(&m.pre_neg),
            subtasks: m.subtasks.iter().map(|&t| p.task_string(t)).collect(),
            ordering: m.ordering.pairs().collect(),
        });
    }
    out.initial_tasks = p.initial_network.tasks.iter().map(|t| p.task_string(t.task)).collect();
    out.initial_ordering = p.initial_network.before.pairs().collect();
    out
}
