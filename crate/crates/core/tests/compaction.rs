//! The compact grounding keeps exactly the solutions of the naive one.

use hplan_core::ground::{dump_ground, GroundingOptions};
use hplan_core::lifted::{classify_inertia, encode_integers, infer_parameter_domains};
use hplan_testkit::{all_fixtures, enumerate_plans, from_ground, random_problem, GenConfig, Instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DEPTH: usize = 6;

fn fixtures() -> Vec<Instance> {
    all_fixtures()
        .iter()
        .map(|f| {
            let (d, p) = f.read();
            Instance::from_text(&f.name, &d, &p)
        })
        .collect()
}

fn random(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            random_problem(&mut rng, &if k % 2 == 0 { GenConfig::default() } else { GenConfig::partially_ordered() })
        })
        .collect()
}

#[test]
fn fixture_plan_sets_match_naive_grounding() {
    for inst in fixtures() {
        let compact = enumerate_plans(&from_ground(&inst.grounding.problem), DEPTH);
        let naive = enumerate_plans(&inst.naive(), DEPTH);
        assert_eq!(compact, naive, "{}", inst.name);
    }
}

#[test]
fn random_plan_sets_match_naive_grounding() {
    for (k, (d, p)) in random(60, 3).iter().enumerate() {
        let inst = Instance::from_text(&format!("random-{k}"), d, p);
        let compact = enumerate_plans(&from_ground(&inst.grounding.problem), DEPTH);
        assert_eq!(compact, enumerate_plans(&inst.naive(), DEPTH), "{d}\n{p}");
    }
}

#[test]
fn transport_is_actually_compacted() {
    let inst = fixtures().into_iter().find(|i| i.name == "transport").unwrap();
    let naive = inst.naive();
    let g = &inst.grounding.problem;
    assert!(naive.action_count() > g.actions.len(), "{} vs {}", naive.action_count(), g.actions.len());
    assert!(naive.method_count() > g.methods.len(), "{} vs {}", naive.method_count(), g.methods.len());
}

#[test]
fn each_stage_preserves_solutions() {
    let variants = [
        GroundingOptions { infer_domains: false, simplify: false, reachability: false },
        GroundingOptions { infer_domains: true, simplify: false, reachability: false },
        GroundingOptions { infer_domains: false, simplify: true, reachability: false },
        GroundingOptions { infer_domains: false, simplify: false, reachability: true },
    ];
    let mut cases: Vec<(String, String, String)> = all_fixtures()
        .iter()
        .map(|f| {
            let (d, p) = f.read();
            (f.name.clone(), d, p)
        })
        .collect();
    cases.extend(random(20, 8).into_iter().enumerate().map(|(k, (d, p))| (format!("random-{k}"), d, p)));
    for (name, d, p) in cases {
        let full = enumerate_plans(&from_ground(&Instance::from_text(&name, &d, &p).grounding.problem), DEPTH);
        for opts in variants {
            let inst = Instance::with_options(&name, &d, &p, &opts);
            assert_eq!(enumerate_plans(&from_ground(&inst.grounding.problem), DEPTH), full, "{name} {opts:?}");
        }
    }
}

#[test]
fn inferred_domains_only_shrink() {
    for inst in fixtures() {
        let model = encode_integers(&inst.domain, &inst.problem);
        let inertia = classify_inertia(&model);
        let narrowed = infer_parameter_domains(model.clone(), &inertia);
        for (before, after) in model.actions.iter().zip(&narrowed.actions) {
            for (b, a) in before.domains.iter().zip(&after.domains) {
                assert!(a.iter().all(|o| b.contains(o)), "{}", inst.name);
            }
        }
        for (before, after) in model.methods.iter().zip(&narrowed.methods) {
            for (b, a) in before.domains.iter().zip(&after.domains) {
                assert!(a.iter().all(|o| b.contains(o)), "{}", inst.name);
            }
        }
    }
}

#[test]
fn grounding_is_deterministic() {
    for f in all_fixtures() {
        let (d, p) = f.read();
        let a = dump_ground(&Instance::from_text(&f.name, &d, &p).grounding.problem);
        let b = dump_ground(&Instance::from_text(&f.name, &d, &p).grounding.problem);
        assert_eq!(a, b, "{}", f.name);
    }
}

#[test]
fn door_without_init_fails_grounding() {
    let inst = fixtures().into_iter().find(|i| i.name == "door-no-init").unwrap();
    assert!(inst.grounding.failure.is_some());
    assert!(enumerate_plans(&inst.naive(), DEPTH).is_empty());
}
