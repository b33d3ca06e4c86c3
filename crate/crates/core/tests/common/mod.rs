#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use aspen::consistency::next_level;
use aspen::ground::{active, ground_with_terms, herbrand_terms, instances_within, GroundLimits};
use aspen::solve::{enumerate_answer_sets, is_answer_set};
use aspen::{parse_program, Atom, GroundRule, Interpretation, Program, Term};
use rand::rngs::StdRng;
use rand::Rng;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn load(name: &str) -> Program {
    let text = std::fs::read_to_string(corpus_path(name)).unwrap();
    parse_program(&text).unwrap()
}

pub fn atoms(list: &[&str]) -> Interpretation {
    list.iter().map(|a| aspen::parse_atom(a).unwrap()).collect()
}

/// A finite `i` is an answer set of `p` iff no instance is active and `i` is an
/// answer set of the instances whose positive body lies in `i`.
pub fn genuine(p: &Program, i: &Interpretation) -> bool {
    active(p, i).is_empty() && is_answer_set(&instances_within(p, i), i)
}

/// Genuine answer sets among those of the grounding over terms up to `depth`.
pub fn answer_sets_at_depth(p: &Program, depth: usize) -> BTreeSet<Interpretation> {
    let limits = GroundLimits::default();
    let terms = herbrand_terms(p, depth, &limits).unwrap();
    let g = ground_with_terms(p, &terms, &limits).unwrap();
    enumerate_answer_sets(&g, None)
        .unwrap()
        .into_iter()
        .filter(|i| genuine(p, i))
        .collect()
}

/// Genuine answer sets of the level programs `A_1 … A_k`, stopping at a fixpoint.
pub fn answer_sets_by_levels(p: &Program, max_levels: usize) -> BTreeSet<Interpretation> {
    let mut out = BTreeSet::new();
    let mut level = Interpretation::new();
    for _ in 0..max_levels {
        let next = next_level(p, &level, None);
        if next == level {
            break;
        }
        level = next;
        for i in enumerate_answer_sets(&instances_within(p, &level), None).unwrap() {
            if genuine(p, &i) {
                out.insert(i);
            }
        }
    }
    out
}

/// Reference semantics by exhaustive search: every subset of the atoms is
/// tested for being a model whose atoms can be ordered so that each is derived
/// from strictly earlier ones by a rule whose negative body `i` falsifies.
pub fn brute_force_answer_sets(g: &[GroundRule]) -> BTreeSet<Interpretation> {
    let universe: Vec<Atom> = g
        .iter()
        .flat_map(|r| r.head.iter().chain(&r.pos).chain(&r.neg))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(universe.len() <= 16, "brute force is for small programs");
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << universe.len()) {
        let i: BTreeSet<&Atom> = universe
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, a)| a)
            .collect();
        let model = g.iter().all(|r| {
            r.pos.iter().any(|a| !i.contains(a))
                || r.neg.iter().any(|a| i.contains(a))
                || r.head.as_ref().is_some_and(|h| i.contains(h))
        });
        if !model {
            continue;
        }
        // Build the ordering greedily: place any atom with a rule whose positive
        // body is already placed.
        let mut placed: BTreeSet<&Atom> = BTreeSet::new();
        loop {
            let before = placed.len();
            for r in g {
                if let Some(h) = &r.head {
                    if i.contains(h)
                        && !placed.contains(h)
                        && r.pos.iter().all(|a| placed.contains(a))
                        && r.neg.iter().all(|a| !i.contains(a))
                    {
                        placed.insert(h);
                    }
                }
            }
            if placed.len() == before {
                break;
            }
        }
        if placed == i {
            out.insert(i.into_iter().cloned().collect());
        }
    }
    out
}

pub fn prop_atom(k: usize) -> Atom {
    Atom::new("p", vec![Term::Int(k as i64)])
}

/// Random ground program over atoms `p(0) … p(n-1)`.
pub fn random_ground_program(rng: &mut StdRng, n: usize, rules: usize) -> Vec<GroundRule> {
    let pick = |rng: &mut StdRng, max: usize| -> Vec<Atom> {
        let len = rng.gen_range(0..=max);
        let set: BTreeSet<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
        set.into_iter().map(prop_atom).collect()
    };
    (0..rules)
        .map(|_| {
            let head = (rng.gen_range(0..10) < 9).then(|| prop_atom(rng.gen_range(0..n)));
            GroundRule {
                head,
                pos: pick(rng, 2),
                neg: pick(rng, 2),
            }
        })
        .collect()
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, std::time::Duration) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed())
}
