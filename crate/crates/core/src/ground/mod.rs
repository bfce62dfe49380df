//! Compact grounding.
//!
//! Actions are instantiated over inertia-restricted parameter domains,
//! filtered by delete-relaxed reachability, methods are instantiated top-down
//! from the initial task network with dead-task pruning, and everything is
//! finally encoded as bitsets over the reachable fact universe.

mod encode;
mod instantiate;

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::bitset::BitSet;
use crate::hddl::{LiftedDomainAst, LiftedProblemAst};
use crate::lifted::{self, GroundAtom, GroundTask, IndexedModel, Inertia, MethodId, ObjectId, SymbolTable};
use crate::search::network::{BoolMatrix, TaskNetwork};

pub use encode::{dump_ground, encode_bitsets};
pub use instantiate::{
    instantiate_actions, instantiate_methods, reachability_filter, ActionCandidate, MethodCandidate, MethodGrounding,
    Reachability,
};

pub type FactId = usize;
pub type ActionId = usize;
pub type GroundMethodId = usize;
/// Dense id of an interned ground task signature.
pub type TaskId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub id: FactId,
    pub atom: GroundAtom,
}

/// A set of true facts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(BitSet);

impl State {
    pub fn new(bits: BitSet) -> Self {
        State(bits)
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn contains(&self, fact: FactId) -> bool {
        self.0.contains(fact)
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.0.ones()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    /// The primitive task this action accomplishes.
    pub task: TaskId,
    pub pre_pos: BitSet,
    pub pre_neg: BitSet,
    pub eff_add: BitSet,
    pub eff_del: BitSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundMethod {
    pub id: GroundMethodId,
    /// Lifted method this was instantiated from.
    pub method: MethodId,
    pub binding: Vec<ObjectId>,
    pub task: TaskId,
    pub pre_pos: BitSet,
    pub pre_neg: BitSet,
    pub subtasks: Vec<TaskId>,
    /// Raw before-pairs over subtask positions; a full chain when totally ordered.
    pub ordering: BoolMatrix,
    pub totally_ordered: bool,
}

/// Anything with a conjunctive precondition over facts.
pub trait Precondition {
    fn pre_pos(&self) -> &BitSet;
    fn pre_neg(&self) -> &BitSet;
}

impl Precondition for GroundAction {
    fn pre_pos(&self) -> &BitSet {
        &self.pre_pos
    }
    fn pre_neg(&self) -> &BitSet {
        &self.pre_neg
    }
}

impl Precondition for GroundMethod {
    fn pre_pos(&self) -> &BitSet {
        &self.pre_pos
    }
    fn pre_neg(&self) -> &BitSet {
        &self.pre_neg
    }
}

/// `pre_pos ⊆ s` and `pre_neg ∩ s = ∅`.
pub fn applicable(op: &impl Precondition, state: &State) -> bool {
    op.pre_pos().is_subset(&state.0) && op.pre_neg().is_disjoint(&state.0)
}

/// The transition `(s \ del) ∪ add`.
pub fn apply(state: &State, action: &GroundAction) -> State {
    debug_assert!(applicable(action, state), "action {} applied where inapplicable", action.id);
    let mut next = state.0.clone();
    next.difference_with(&action.eff_del);
    next.union_with(&action.eff_add);
    State(next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProblem {
    pub symbols: Arc<SymbolTable>,
    pub facts: Vec<Fact>,
    /// Interned task signatures, indexed by [`TaskId`].
    pub tasks: Vec<GroundTask>,
    pub s0: State,
    pub actions: Vec<GroundAction>,
    pub methods: Vec<GroundMethod>,
    /// Indexed by [`TaskId`]; empty for compound tasks.
    pub relevant_actions: Vec<Vec<ActionId>>,
    /// Indexed by [`TaskId`]; empty for primitive tasks.
    pub relevant_methods: Vec<Vec<GroundMethodId>>,
    pub initial_network: TaskNetwork,
    pub initial_totally_ordered: bool,
}

impl GroundProblem {
    pub fn is_primitive(&self, task: TaskId) -> bool {
        self.tasks[task].task.is_primitive()
    }

    pub fn task_string(&self, task: TaskId) -> String {
        self.symbols.task_string(&self.tasks[task])
    }

    pub fn fact_string(&self, fact: FactId) -> String {
        self.symbols.atom_string(&self.facts[fact].atom)
    }

    pub fn method_name(&self, method: GroundMethodId) -> &str {
        self.symbols.methods.name(self.methods[method].method)
    }

    /// True when the initial network and every method impose total orders.
    pub fn is_totally_ordered(&self) -> bool {
        self.initial_totally_ordered && self.methods.iter().all(|m| m.totally_ordered)
    }

    /// Diagnostic for the first partially ordered element, if any.
    pub fn partial_order_witness(&self) -> Option<String> {
        if !self.initial_totally_ordered {
            return Some("the initial task network is partially ordered".to_string());
        }
        self.methods.iter().find(|m| !m.totally_ordered).map(|m| {
            format!(
                "method {}{} for task {} is partially ordered",
                self.symbols.methods.name(m.method),
                self.symbols.object_list(&m.binding),
                self.task_string(m.task)
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundingOptions {
    /// Narrow parameter domains with static preconditions.
    pub infer_domains: bool,
    /// Fold ground static literals before instantiation.
    pub simplify: bool,
    /// Drop actions that are unreachable under delete relaxation.
    pub reachability: bool,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions { infer_domains: true, simplify: true, reachability: true }
    }
}

/// Counts before and after each stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundingStats {
    pub lifted_actions: usize,
    pub lifted_methods: usize,
    pub action_candidates: usize,
    pub contradictory_actions: usize,
    pub actions_after_reachability: usize,
    pub reachable_atoms: usize,
    pub methods_instantiated: usize,
    pub methods_after_pruning: usize,
    pub actions: usize,
    pub methods: usize,
    pub tasks: usize,
    pub facts: usize,
    pub time: Duration,
}

impl std::fmt::Display for GroundingStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "lifted actions:              {}", self.lifted_actions)?;
        writeln!(f, "lifted methods:              {}", self.lifted_methods)?;
        writeln!(f, "action candidates:           {}", self.action_candidates)?;
        writeln!(f, "  dropped (contradictory):   {}", self.contradictory_actions)?;
        writeln!(f, "actions after reachability:  {}", self.actions_after_reachability)?;
        writeln!(f, "relaxed-reachable atoms:     {}", self.reachable_atoms)?;
        writeln!(f, "methods instantiated:        {}", self.methods_instantiated)?;
        writeln!(f, "methods after pruning:       {}", self.methods_after_pruning)?;
        writeln!(f, "ground actions:              {}", self.actions)?;
        writeln!(f, "ground methods:              {}", self.methods)?;
        writeln!(f, "ground tasks:                {}", self.tasks)?;
        write!(f, "facts:                       {}", self.facts)
    }
}

/// Grounding proved the problem unsolvable without search.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingFailure {
    #[error("initial task {0} has no relevant ground action or method")]
    InitialTaskPruned(String),
    #[error("the initial task network's ordering is cyclic")]
    CyclicInitialNetwork,
}

#[derive(Debug, Clone)]
pub struct Grounding {
    pub problem: GroundProblem,
    pub stats: GroundingStats,
    /// Set when the problem is already known to be unsolvable. The problem
    /// is still well formed; search on it reports unsolvable.
    pub failure: Option<GroundingFailure>,
}

/// Runs the whole pipeline on an encoded model.
pub fn ground_model(model: IndexedModel, options: &GroundingOptions) -> Grounding {
    let start = Instant::now();
    let inertia: Inertia = lifted::classify_inertia(&model);
    let mut model = model;
    if options.infer_domains {
        model = lifted::infer_parameter_domains(model, &inertia);
    }
    if options.simplify {
        model = lifted::simplify(model, &inertia);
    }
    let mut stats = GroundingStats {
        lifted_actions: model.actions.len(),
        lifted_methods: model.methods.len(),
        ..Default::default()
    };

    let (candidates, contradictory) = instantiate_actions(&model, &inertia);
    stats.action_candidates = candidates.len() + contradictory;
    stats.contradictory_actions = contradictory;

    let reach = if options.reachability {
        reachability_filter(candidates, &model.init, &inertia)
    } else {
        Reachability::everything(candidates, &model.init)
    };
    stats.actions_after_reachability = reach.actions.len();
    stats.reachable_atoms = reach.reachable.len();

    let methods = instantiate_methods(&model, &inertia, &reach);
    stats.methods_instantiated = methods.instantiated;
    stats.methods_after_pruning = methods.methods.len();
    let failure = methods.failure.clone();

    let problem = encode_bitsets(&model, &reach, methods);
    let failure = failure.or_else(|| {
        (!problem.initial_network.before.is_irreflexive()).then_some(GroundingFailure::CyclicInitialNetwork)
    });
    stats.actions = problem.actions.len();
    stats.methods = problem.methods.len();
    stats.tasks = problem.tasks.len();
    stats.facts = problem.facts.len();
    stats.time = start.elapsed();
    Grounding { problem, stats, failure }
}

/// Encodes and grounds a parsed domain/problem pair.
pub fn ground(domain: &LiftedDomainAst, problem: &LiftedProblemAst, options: &GroundingOptions) -> Grounding {
    ground_model(lifted::encode_integers(domain, problem), options)
}

#[cfg(test)]
mod tests;
