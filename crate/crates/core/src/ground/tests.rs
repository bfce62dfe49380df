use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hddl::{domain_from_str, problem_from_str};
use crate::lifted::{classify_inertia, encode_integers, infer_parameter_domains, simplify};

const DOOR_D: &str = include_str!("../../../../fixtures/corpus/door/domain.hddl");
const DOOR_P: &str = include_str!("../../../../fixtures/corpus/door/problem.hddl");
const FIXTURES: [(&str, &str); 5] = [
    (DOOR_D, DOOR_P),
    (
        include_str!("../../../../fixtures/corpus/transport/domain.hddl"),
        include_str!("../../../../fixtures/corpus/transport/problem.hddl"),
    ),
    (
        include_str!("../../../../fixtures/corpus/transport-po/domain.hddl"),
        include_str!("../../../../fixtures/corpus/transport-po/problem.hddl"),
    ),
    (
        include_str!("../../../../fixtures/corpus/recursive/domain.hddl"),
        include_str!("../../../../fixtures/corpus/recursive/problem.hddl"),
    ),
    (
        include_str!("../../../../fixtures/corpus/unsolvable/domain.hddl"),
        include_str!("../../../../fixtures/corpus/unsolvable/problem.hddl"),
    ),
];

fn model(domain: &str, problem: &str) -> IndexedModel {
    let d = domain_from_str(domain).unwrap();
    let p = problem_from_str(problem, &d).unwrap();
    encode_integers(&d, &p)
}

fn grounding(domain: &str, problem: &str) -> Grounding {
    ground_model(model(domain, problem), &GroundingOptions::default())
}

fn prepared(domain: &str, problem: &str) -> (IndexedModel, Inertia) {
    let m = model(domain, problem);
    let inertia = classify_inertia(&m);
    let m = simplify(infer_parameter_domains(m, &inertia), &inertia);
    (m, inertia)
}

fn fact(g: &GroundProblem, text: &str) -> FactId {
    (0..g.facts.len()).find(|&f| g.fact_string(f) == text).unwrap_or_else(|| panic!("no fact {text}"))
}

fn bits(g: &GroundProblem, facts: &[&str]) -> BitSet {
    BitSet::from_indices(g.facts.len(), facts.iter().map(|f| fact(g, f)))
}

fn state(g: &GroundProblem, facts: &[&str]) -> State {
    State::new(bits(g, facts))
}

#[test]
fn door_grounds_to_two_facts_one_action_two_methods() {
    let g = grounding(DOOR_D, DOOR_P);
    assert!(g.failure.is_none());
    let p = &g.problem;
    assert_eq!(p.facts.len(), 2);
    assert_eq!(p.actions.len(), 1);
    assert_eq!(p.methods.len(), 2);
    let mut names: Vec<&str> = (0..2).map(|m| p.method_name(m)).collect();
    names.sort();
    assert_eq!(names, ["m-noop", "m-open"]);
}

#[test]
fn door_fact_ids_follow_predicate_order() {
    let p = grounding(DOOR_D, DOOR_P).problem;
    assert_eq!(p.fact_string(0), "(closed d1)");
    assert_eq!(p.fact_string(1), "(open d1)");
}

#[test]
fn door_open_door_bits() {
    let p = grounding(DOOR_D, DOOR_P).problem;
    let a = &p.actions[0];
    assert_eq!(a.pre_pos, bits(&p, &["(closed d1)"]));
    assert_eq!(a.eff_del, bits(&p, &["(closed d1)"]));
    assert_eq!(a.eff_add, bits(&p, &["(open d1)"]));
    assert!(a.pre_neg.is_empty());
    for b in [&a.pre_pos, &a.pre_neg, &a.eff_add, &a.eff_del] {
        assert_eq!(b.len(), 2);
    }
    assert_eq!(p.s0, state(&p, &["(closed d1)"]));
}

#[test]
fn door_applicability() {
    let p = grounding(DOOR_D, DOOR_P).problem;
    assert!(applicable(&p.actions[0], &p.s0));
    let noop = p.methods.iter().find(|m| p.method_name(m.id) == "m-noop").unwrap();
    let open = p.methods.iter().find(|m| p.method_name(m.id) == "m-open").unwrap();
    assert!(!applicable(noop, &p.s0));
    assert!(applicable(open, &p.s0));
    let both = state(&p, &["(closed d1)", "(open d1)"]);
    assert!(applicable(noop, &both) && applicable(open, &both));
}

#[test]
fn door_progression() {
    let p = grounding(DOOR_D, DOOR_P).problem;
    let next = apply(&p.s0, &p.actions[0]);
    assert_eq!(next, state(&p, &["(open d1)"]));
    // input untouched
    assert_eq!(p.s0, state(&p, &["(closed d1)"]));
}

#[test]
fn empty_precondition_and_effects() {
    let g = grounding(FIXTURES[3].0, FIXTURES[3].1).problem;
    let tick = &g.actions[0];
    assert!(tick.pre_pos.is_empty() && tick.pre_neg.is_empty());
    for s in [State::new(BitSet::new(g.facts.len())), g.s0.clone()] {
        assert!(applicable(tick, &s));
    }
    let nothing = GroundAction {
        id: 0,
        task: 0,
        pre_pos: BitSet::new(1),
        pre_neg: BitSet::new(1),
        eff_add: BitSet::new(1),
        eff_del: BitSet::new(1),
    };
    let s = State::new(BitSet::from_indices(1, [0]));
    assert_eq!(apply(&s, &nothing), s);
}

#[test]
fn relevance_buckets_partition_actions() {
    for (d, p) in FIXTURES {
        let g = grounding(d, p).problem;
        let mut seen: Vec<ActionId> = g.relevant_actions.iter().flatten().copied().collect();
        seen.sort();
        assert_eq!(seen, (0..g.actions.len()).collect::<Vec<_>>());
        for (t, bucket) in g.relevant_actions.iter().enumerate() {
            assert!(bucket.iter().all(|&a| g.actions[a].task == t));
        }
    }
}

#[test]
fn every_task_is_accomplishable() {
    for (d, p) in FIXTURES {
        let g = grounding(d, p).problem;
        let used =
            g.methods.iter().flat_map(|m| m.subtasks.iter()).chain(g.initial_network.tasks.iter().map(|t| &t.task));
        for &t in used {
            assert!(!g.relevant_actions[t].is_empty() || !g.relevant_methods[t].is_empty(), "{}", g.task_string(t));
        }
    }
}

#[test]
fn ground_operator_invariants() {
    for (d, p) in FIXTURES {
        let g = grounding(d, p).problem;
        for a in &g.actions {
            assert!(a.pre_pos.is_disjoint(&a.pre_neg));
            assert!(a.eff_add.is_disjoint(&a.eff_del));
        }
        for m in &g.methods {
            assert!(m.pre_pos.is_disjoint(&m.pre_neg));
            assert!(m.ordering.is_irreflexive());
            if m.totally_ordered {
                assert_eq!(m.ordering, BoolMatrix::chain(m.subtasks.len()));
            }
        }
    }
}

#[test]
fn fact_ids_are_sorted_atoms() {
    for (d, p) in FIXTURES {
        let g = grounding(d, p).problem;
        assert!(g.facts.windows(2).all(|w| w[0].atom < w[1].atom));
        assert!(g.facts.iter().enumerate().all(|(i, f)| f.id == i));
    }
}

const PAIR_D: &str = "(define (domain pair)
  (:requirements :typing :negative-preconditions :equality :hierarchy)
  (:types thing other)
  (:predicates (p ?a - thing) (q ?a - thing) (gone ?a - thing))
  (:task go :parameters ())
  (:method m-go :parameters (?a ?b - thing ?o - other) :task (go)
    :ordered-subtasks (and (distinct ?a ?b) (lonely ?o) (blocked ?a)))
  (:method m-go-2 :parameters (?a ?b - thing) :task (go) :ordered-subtasks (distinct ?a ?b))
  (:method m-go-3 :parameters (?a - thing) :task (go) :ordered-subtasks (blocked ?a))
  (:action distinct :parameters (?a ?b - thing)
    :precondition (and (p ?a) (not (= ?a ?b)))
    :effect (q ?a))
  (:action lonely :parameters (?o - other) :precondition () :effect ())
  (:action blocked :parameters (?a - thing) :precondition (gone ?a) :effect (p ?a))
  (:action forget :parameters (?a - thing) :precondition (p ?a) :effect (not (gone ?a))))";
const PAIR_P: &str = "(define (problem pair-1) (:domain pair)
  (:objects x - thing)
  (:htn :parameters () :ordered-subtasks (go))
  (:init (p x)))";

#[test]
fn inequality_on_singleton_domain_yields_nothing() {
    let (m, inertia) = prepared(PAIR_D, PAIR_P);
    let (cands, _) = instantiate_actions(&m, &inertia);
    let names: Vec<&str> = cands.iter().map(|c| m.symbols.primitive_tasks.name(c.lifted)).collect();
    assert!(!names.contains(&"distinct"));
}

#[test]
fn empty_parameter_domain_yields_nothing() {
    let (m, inertia) = prepared(PAIR_D, PAIR_P);
    let (cands, _) = instantiate_actions(&m, &inertia);
    assert!(cands.iter().all(|c| m.symbols.primitive_tasks.name(c.lifted) != "lonely"));
}

#[test]
fn unreachable_precondition_is_discarded() {
    let (m, inertia) = prepared(PAIR_D, PAIR_P);
    let (cands, _) = instantiate_actions(&m, &inertia);
    assert!(cands.iter().any(|c| m.symbols.primitive_tasks.name(c.lifted) == "blocked"));
    let reach = reachability_filter(cands, &m.init, &inertia);
    assert!(reach.actions.iter().all(|c| m.symbols.primitive_tasks.name(c.lifted) != "blocked"));
}

#[test]
fn dead_subtasks_prune_everything_up_to_the_root() {
    let g = grounding(PAIR_D, PAIR_P);
    assert!(matches!(g.failure, Some(GroundingFailure::InitialTaskPruned(ref t)) if t == "(go)"));
    assert!(g.problem.methods.is_empty());
}

#[test]
fn zero_actions_leave_init_as_universe() {
    let (m, inertia) = prepared(DOOR_D, DOOR_P);
    let reach = reachability_filter(Vec::new(), &m.init, &inertia);
    assert_eq!(reach.reachable, m.init.iter().cloned().collect::<BTreeSet<_>>());
}

#[test]
fn door_reachability_fixpoint() {
    let (m, inertia) = prepared(DOOR_D, DOOR_P);
    let (cands, contradictory) = instantiate_actions(&m, &inertia);
    assert_eq!((cands.len(), contradictory), (1, 0));
    let reach = reachability_filter(cands, &m.init, &inertia);
    let atoms: Vec<String> = reach.reachable.iter().map(|a| m.symbols.atom_string(a)).collect();
    assert_eq!(atoms, ["(closed d1)", "(open d1)"]);
    assert_eq!(reach.actions.len(), 1);
}

#[test]
fn reachability_is_idempotent() {
    for (d, p) in FIXTURES {
        let (m, inertia) = prepared(d, p);
        let (cands, _) = instantiate_actions(&m, &inertia);
        let once = reachability_filter(cands, &m.init, &inertia);
        let twice = reachability_filter(once.actions.clone(), &m.init, &inertia);
        assert_eq!(once.reachable, twice.reachable);
        assert_eq!(once.actions.len(), twice.actions.len());
    }
}

#[test]
fn method_pruning_is_idempotent() {
    for (d, p) in FIXTURES {
        let (m, inertia) = prepared(d, p);
        let (cands, _) = instantiate_actions(&m, &inertia);
        let reach = reachability_filter(cands, &m.init, &inertia);
        let once = instantiate_methods(&m, &inertia, &reach);
        // Regrounding with only the surviving actions must keep every method.
        let kept = Reachability {
            reachable: reach.reachable.clone(),
            actions: once.actions.iter().map(|&a| reach.actions[a].clone()).collect(),
        };
        let twice = instantiate_methods(&m, &inertia, &kept);
        assert_eq!(once.methods.len(), twice.methods.len());
        assert_eq!(once.tasks, twice.tasks);
    }
}

#[test]
fn recursive_methods_ground_once_per_signature() {
    let g = grounding(FIXTURES[3].0, FIXTURES[3].1);
    assert!(g.failure.is_none());
    assert_eq!(g.problem.methods.len(), 1);
    assert_eq!(g.problem.tasks.len(), 2);
}

#[test]
fn missing_init_fact_prunes_initial_task() {
    let p = DOOR_P.replace("(:init (closed d1))", "(:init)");
    let g = grounding(DOOR_D, &p);
    assert_eq!(g.failure, Some(GroundingFailure::InitialTaskPruned("(make-open d1)".into())));
}

#[test]
fn pruning_never_grows() {
    for (d, p) in FIXTURES {
        let s = grounding(d, p).stats;
        assert!(s.actions_after_reachability <= s.action_candidates);
        assert!(s.methods_after_pruning <= s.methods_instantiated);
    }
}

#[test]
fn transport_grounding_prunes() {
    let s = grounding(FIXTURES[1].0, FIXTURES[1].1).stats;
    assert!(s.methods_after_pruning < s.methods_instantiated, "{s}");
}

#[test]
fn bit_semantics_match_set_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (d, p) in FIXTURES {
        let g = grounding(d, p).problem;
        let n = g.facts.len();
        for _ in 0..1000 {
            let set: BTreeSet<FactId> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let s = State::new(BitSet::from_indices(n, set.iter().copied()));
            let a = &g.actions[rng.gen_range(0..g.actions.len())];
            let pos: BTreeSet<FactId> = a.pre_pos.ones().collect();
            let neg: BTreeSet<FactId> = a.pre_neg.ones().collect();
            let expect = pos.is_subset(&set) && neg.is_disjoint(&set);
            assert_eq!(applicable(a, &s), expect);
            if expect {
                let mut next = set.clone();
                for f in a.eff_del.ones() {
                    next.remove(&f);
                }
                next.extend(a.eff_add.ones());
                assert_eq!(apply(&s, a).facts().collect::<BTreeSet<_>>(), next);
            }
        }
    }
}

#[test]
fn disjoint_actions_commute() {
    let g = grounding(FIXTURES[1].0, FIXTURES[1].1).problem;
    let s = State::new(BitSet::from_indices(g.facts.len(), 0..g.facts.len()));
    for a in &g.actions {
        for b in &g.actions {
            let touches = |x: &GroundAction| {
                let mut t = x.eff_add.clone();
                t.union_with(&x.eff_del);
                t
            };
            if touches(a).is_disjoint(&touches(b)) {
                let ab = apply_unchecked(&apply_unchecked(&s, a), b);
                let ba = apply_unchecked(&apply_unchecked(&s, b), a);
                assert_eq!(ab, ba);
            }
        }
    }
}

fn apply_unchecked(s: &State, a: &GroundAction) -> State {
    let mut b = s.bits().clone();
    b.difference_with(&a.eff_del);
    b.union_with(&a.eff_add);
    State::new(b)
}

#[test]
fn dump_is_deterministic() {
    for (d, p) in FIXTURES {
        assert_eq!(dump_ground(&grounding(d, p).problem), dump_ground(&grounding(d, p).problem));
    }
    let dump = dump_ground(&grounding(DOOR_D, DOOR_P).problem);
    assert!(dump.contains("0 (closed d1) *"));
    assert!(dump.contains("a0 (open-door d1) pre+ [0] pre- [] add [1] del [0]"));
}
