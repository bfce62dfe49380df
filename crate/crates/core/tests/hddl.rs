use hplan_core::hddl::{domain_from_str, problem_from_str, tokenize, ParseError, TokenKind};
use hplan_testkit::{all_fixtures, fixture, random_problem, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn door() -> (String, String) {
    fixture("door").read()
}

/// Replaces `from` with `to` once. `to` contains `^` where the error must
/// be reported; returns the edited text and that (line, column).
fn plant(text: &str, from: &str, to: &str) -> (String, (usize, usize)) {
    assert_eq!(text.matches(from).count(), 1, "ambiguous plant site {from:?}");
    let edited = text.replacen(from, to, 1);
    let at = edited.find('^').expect("marker");
    let line = edited[..at].matches('\n').count() + 1;
    let column = at - edited[..at].rfind('\n').map_or(0, |k| k + 1) + 1;
    (edited.replacen('^', "", 1), (line, column))
}

#[test]
fn tokens() {
    let kinds = |s: &str| tokenize(s).unwrap().iter().map(|t| (t.kind, t.text.clone())).collect::<Vec<_>>();
    assert_eq!(
        kinds("(and)"),
        [(TokenKind::LParen, "(".into()), (TokenKind::Ident, "and".into()), (TokenKind::RParen, ")".into())]
    );
    assert_eq!(kinds("?v1"), [(TokenKind::Variable, "?v1".into())]);
    let t = tokenize("; comment\n(").unwrap();
    assert_eq!((t.len(), t[0].kind, t[0].line, t[0].column), (1, TokenKind::LParen, 2, 1));
}

#[test]
fn door_ast_shape() {
    let (d, p) = door();
    let dom = domain_from_str(&d).unwrap();
    assert_eq!(dom.predicates.len(), 2);
    assert_eq!(dom.actions.len(), 1);
    assert_eq!(dom.compound_tasks.len(), 1);
    assert_eq!(dom.methods.len(), 2);
    assert!(dom.methods[1].network.subtasks.is_empty());
    let prob = problem_from_str(&p, &dom).unwrap();
    assert_eq!(prob.init.len(), 1);
    assert_eq!(prob.initial_network.subtasks.len(), 1);
    assert!(prob.initial_network.totally_ordered);
}

#[test]
fn action_only_domain() {
    let dom = domain_from_str(
        "(define (domain a) (:requirements :strips) (:predicates (p))
           (:action act :parameters () :precondition (p) :effect (not (p))))",
    )
    .unwrap();
    assert!(dom.methods.is_empty());
    assert!(dom.compound_tasks.is_empty());
    assert_eq!(dom.actions[0].effect.len(), 1);
}

#[test]
fn empty_initial_network() {
    let (d, _) = door();
    let dom = domain_from_str(&d).unwrap();
    let prob = problem_from_str(
        "(define (problem e) (:domain door) (:objects d1 - door) (:htn :parameters () :subtasks ()) (:init))",
        &dom,
    )
    .unwrap();
    assert!(prob.initial_network.subtasks.is_empty());
}

#[test]
fn partial_order_method_form() {
    let (d, _) = fixture("transport-po").read();
    let dom = domain_from_str(&d).unwrap();
    let m = dom.methods.iter().find(|m| m.name == "m-deliver").unwrap();
    assert!(!m.network.totally_ordered);
    assert_eq!(m.network.ordering_indices(), vec![(0, 1), (1, 2), (2, 3)]);
}

enum Kind {
    Syntax,
    Semantic,
    Illegal,
    Requirement,
    Mismatch,
}

fn kind_matches(e: &ParseError, k: &Kind) -> bool {
    matches!(
        (e, k),
        (ParseError::Syntax { .. }, Kind::Syntax)
            | (ParseError::Semantic { .. }, Kind::Semantic)
            | (ParseError::IllegalCharacter { .. }, Kind::Illegal)
            | (ParseError::UnsupportedRequirement { .. }, Kind::Requirement)
            | (ParseError::DomainMismatch { .. }, Kind::Mismatch)
    )
}

#[test]
fn planted_domain_defects() {
    let (d, _) = door();
    let cases = [
        (
            ":task (make-open ?d)\n    :precondition (closed ?d)",
            ":task (^make-shut ?d)\n    :precondition (closed ?d)",
            Kind::Semantic,
        ),
        (":precondition (open ?d)", ":precondition (^open ?d ?d)", Kind::Semantic),
        (":precondition (open ?d)", ":precondition (^shut ?d)", Kind::Semantic),
        (":precondition (open ?d)", ":precondition (open ^?x)", Kind::Semantic),
        (
            "(:action open-door\n    :parameters (?d - door)",
            "(:action open-door\n    :parameters (?d - ^portal)",
            Kind::Semantic,
        ),
        (":method-preconditions)", ":method-preconditions ^:durative-actions)", Kind::Requirement),
        ("(:types door - object)", "(:types door - object ^@)", Kind::Illegal),
        ("(:action open-door\n    :parameters (?d - door)", "(:action open-door\n    :parameters ^?d", Kind::Syntax),
        (":ordered-subtasks (open-door ?d))", ":ordered-subtasks (^open-door))", Kind::Semantic),
        (
            "(:task make-open :parameters (?d - door))",
            "(:task make-open :parameters (?d - door))\n  (:task ^make-open :parameters ())",
            Kind::Semantic,
        ),
    ];
    for (from, to, kind) in cases {
        let (src, at) = plant(&d, from, to);
        let err = domain_from_str(&src).expect_err(to);
        assert!(kind_matches(&err, &kind), "{to}: {err}");
        assert_eq!(err.position(), at, "{to}: {err}");
    }
}

#[test]
fn planted_problem_defects() {
    let (d, p) = door();
    let dom = domain_from_str(&d).unwrap();
    let cases = [
        ("(:init (closed d1))", "(:init (^closed d1 d1))", Kind::Semantic),
        ("(:init (closed d1))", "(:init (closed ^d9))", Kind::Semantic),
        ("(:domain door)", "(:domain ^lamp)", Kind::Mismatch),
        ("(t1 (make-open d1))", "(t1 (^make-shut d1))", Kind::Semantic),
        ("(:objects d1 - door)", "(:objects d1 - ^portal)", Kind::Semantic),
        ("(:init (closed d1))", "(:init ^d1 (closed d1))", Kind::Syntax),
    ];
    for (from, to, kind) in cases {
        let (src, at) = plant(&p, from, to);
        let err = problem_from_str(&src, &dom).expect_err(to);
        assert!(kind_matches(&err, &kind), "{to}: {err}");
        assert_eq!(err.position(), at, "{to}: {err}");
    }
}

#[test]
fn unclosed_list_points_at_its_open_paren() {
    let (d, _) = door();
    let src = d.trim_end().strip_suffix(')').unwrap();
    let err = domain_from_str(src).unwrap_err();
    assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
    assert_eq!(err.position(), (2, 1));
}

#[test]
fn unsupported_constructs() {
    let (d, _) = door();
    for (from, to) in [
        (":precondition (open ?d)", ":precondition (forall (?x - door) (open ?x))"),
        (":precondition (open ?d)", ":precondition (or (open ?d) (closed ?d))"),
        (
            "(:action open-door\n    :parameters (?d - door)",
            "(:action open-door\n    :parameters (?d - (either door door))",
        ),
    ] {
        let src = d.replacen(from, to, 1);
        assert!(matches!(domain_from_str(&src), Err(ParseError::Semantic { .. })), "{to}");
    }
}

#[test]
fn case_is_folded() {
    let (d, p) = door();
    let dom = domain_from_str(&d.to_uppercase().replace("; SINGLE", "; single")).unwrap();
    let prob = problem_from_str(&p.to_uppercase(), &dom).unwrap();
    let plain = domain_from_str(&d).unwrap();
    assert_eq!(dom, plain);
    assert_eq!(prob, problem_from_str(&p, &plain).unwrap());
}

#[test]
fn unparse_round_trips_fixtures() {
    for f in all_fixtures() {
        let (d, p) = f.read();
        let dom = domain_from_str(&d).unwrap();
        let prob = problem_from_str(&p, &dom).unwrap();
        let dom2 = domain_from_str(&dom.to_string()).unwrap_or_else(|e| panic!("{}: {e}\n{dom}", f.name));
        assert_eq!(dom2, dom, "{}", f.name);
        assert_eq!(problem_from_str(&prob.to_string(), &dom2).unwrap(), prob, "{}", f.name);
    }
}

#[test]
fn unparse_round_trips_generated() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for config in [GenConfig::default(), GenConfig::partially_ordered()] {
        for _ in 0..100 {
            let (d, p) = random_problem(&mut rng, &config);
            let dom = domain_from_str(&d).unwrap();
            let prob = problem_from_str(&p, &dom).unwrap();
            assert_eq!(domain_from_str(&dom.to_string()).unwrap(), dom);
            assert_eq!(problem_from_str(&prob.to_string(), &dom).unwrap(), prob);
        }
    }
}
