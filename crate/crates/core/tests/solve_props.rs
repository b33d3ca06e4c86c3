mod common;

use std::collections::BTreeSet;

use aspen::solve::{answer_set_witness, enumerate_answer_sets, is_answer_set, is_model, is_proven_by};
use aspen::{GroundRule, Interpretation};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{brute_force_answer_sets, random_ground_program};

/// Least fixpoint of the reduct of `g` relative to `i`.
fn reduct_lfp(g: &[GroundRule], i: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    loop {
        let before = out.len();
        for r in g {
            if let Some(h) = &r.head {
                if r.pos.iter().all(|a| out.contains(a)) && !r.neg.iter().any(|a| i.contains(a)) {
                    out.insert(h.clone());
                }
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

fn program(seed: u64, n: usize, rules: usize) -> Vec<GroundRule> {
    random_ground_program(&mut StdRng::seed_from_u64(seed), n, rules)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>(), n in 1usize..=12, extra in 0usize..12) {
        let g = program(seed, n, n + extra);
        let got: BTreeSet<Interpretation> = enumerate_answer_sets(&g, None).unwrap().into_iter().collect();
        prop_assert_eq!(got, brute_force_answer_sets(&g));
    }

    #[test]
    fn answer_sets_are_models_with_witnesses(seed in any::<u64>(), n in 1usize..=12, extra in 0usize..12) {
        let g = program(seed, n, n + extra);
        for i in enumerate_answer_sets(&g, None).unwrap() {
            prop_assert!(is_model(&g, &i));
            prop_assert!(is_answer_set(&g, &i));
            let phi = answer_set_witness(&g, &i).unwrap();
            prop_assert!(is_proven_by(&g, &i, &phi));
        }
    }

    #[test]
    fn answer_sets_are_minimal_reduct_models(seed in any::<u64>(), n in 1usize..=10, extra in 0usize..10) {
        let g = program(seed, n, n + extra);
        for i in enumerate_answer_sets(&g, None).unwrap() {
            prop_assert_eq!(reduct_lfp(&g, &i), i.clone());
            let atoms: Vec<_> = i.iter().cloned().collect();
            for mask in 0u32..(1 << atoms.len()) - 1 {
                let j: Interpretation = atoms
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, a)| a.clone())
                    .collect();
                let closed = g.iter().all(|r| match &r.head {
                    Some(h) => {
                        !r.pos.iter().all(|a| j.contains(a))
                            || r.neg.iter().any(|a| i.contains(a))
                            || j.contains(h)
                    }
                    None => true,
                });
                prop_assert!(!closed, "{} has the closed strict subset {}", i, j);
            }
        }
    }

    #[test]
    fn limit_truncates_in_order(seed in any::<u64>(), n in 1usize..=10, extra in 0usize..10, limit in 1usize..4) {
        let g = program(seed, n, n + extra);
        let all = enumerate_answer_sets(&g, None).unwrap();
        let some = enumerate_answer_sets(&g, Some(limit)).unwrap();
        prop_assert_eq!(&all[..limit.min(all.len())], &some[..]);
    }
}

#[test]
fn orderings_with_cycles_are_rejected() {
    let g = common::atoms(&["p(0)", "p(1)"]);
    let atoms: Vec<_> = g.iter().cloned().collect();
    let rules = vec![
        GroundRule {
            head: Some(atoms[0].clone()),
            pos: vec![atoms[1].clone()],
            neg: vec![],
        },
        GroundRule {
            head: Some(atoms[1].clone()),
            pos: vec![atoms[0].clone()],
            neg: vec![],
        },
    ];
    assert!(is_model(&rules, &g));
    assert!(!is_answer_set(&rules, &g));
    assert_eq!(enumerate_answer_sets(&rules, None).unwrap(), vec![Interpretation::new()]);
}
