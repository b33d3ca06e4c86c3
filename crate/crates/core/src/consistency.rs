//! The incremental consistency semi-decision procedure.
//!
//! Levels `A_i` collect heads of instances whose positive body lies in
//! `A_{i-1}`; each level's instances are solved and an answer set with an
//! empty active set proves consistency.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::Error;
use crate::forbidden::{ForbiddenBudget, ForbiddenOracle};
use crate::ground::{active, instances_within, GroundRule, Interpretation};
use crate::solve::{for_each_answer_set, SolveBudget};
use crate::syntax::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_iterations: usize,
    pub max_atoms: usize,
    pub max_ground_rules: usize,
    pub solve: SolveBudget,
    pub forbidden: ForbiddenBudget,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_iterations: 100,
            max_atoms: 100_000,
            max_ground_rules: 1_000_000,
            solve: SolveBudget::default(),
            forbidden: ForbiddenBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    Consistent {
        witness: Interpretation,
        iteration: usize,
    },
    Inconsistent {
        iteration: usize,
    },
    BudgetExhausted {
        last_level: Interpretation,
        iterations: usize,
        reason: String,
    },
}

impl Outcome {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Outcome::Consistent { .. })
    }

    pub fn is_inconsistent(&self) -> bool {
        matches!(self, Outcome::Inconsistent { .. })
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::BudgetExhausted { .. })
    }

    pub fn iterations(&self) -> usize {
        match self {
            Outcome::Consistent { iteration, .. } | Outcome::Inconsistent { iteration } => *iteration,
            Outcome::BudgetExhausted { iterations, .. } => *iterations,
        }
    }
}

/// `A_i` from `A_{i-1}`: add every head of an instance with positive body in
/// `prev` that the oracle does not certify as forbidden.
pub fn next_level<'o>(
    p: &Program,
    prev: &Interpretation,
    oracle: Option<&mut (dyn ForbiddenOracle + 'o)>,
) -> Interpretation {
    extend_level(prev, &instances_within(p, prev), oracle)
}

fn extend_level<'o>(
    prev: &Interpretation,
    instances: &[GroundRule],
    oracle: Option<&mut (dyn ForbiddenOracle + 'o)>,
) -> Interpretation {
    let mut next = prev.clone();
    let mut oracle = oracle;
    for g in instances {
        let Some(h) = &g.head else { continue };
        if next.contains(h) {
            continue;
        }
        if let Some(o) = oracle.as_deref_mut() {
            if o.is_forbidden(h) {
                continue;
            }
        }
        next.insert(h.clone());
    }
    next
}

/// Runs the procedure; with an oracle only non-forbidden heads enter the levels.
pub fn is_consistent<'o>(
    p: &Program,
    b: &Budget,
    oracle: Option<&mut (dyn ForbiddenOracle + 'o)>,
) -> Outcome {
    let mut oracle = oracle;
    let mut prev = Interpretation::new();
    let mut prev_rules = instances_within(p, &prev);
    let exhausted = |level: &Interpretation, i: usize, reason: String| Outcome::BudgetExhausted {
        last_level: level.clone(),
        iterations: i,
        reason,
    };
    for i in 1..=b.max_iterations {
        let level = extend_level(&prev, &prev_rules, oracle.as_deref_mut());
        if level == prev {
            return Outcome::Inconsistent { iteration: i };
        }
        if level.len() > b.max_atoms {
            return exhausted(&level, i, format!("level has more than {} atoms", b.max_atoms));
        }
        let rules = instances_within(p, &level);
        if rules.len() > b.max_ground_rules {
            return exhausted(
                &level,
                i,
                format!("level has more than {} ground rules", b.max_ground_rules),
            );
        }
        let mut witness = None;
        let solved = for_each_answer_set(&rules, b.solve, &mut |candidate| {
            if active(p, &candidate).is_empty() {
                witness = Some(candidate);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if let Err(Error::ResourceExceeded(reason)) = solved {
            return exhausted(&level, i, reason);
        }
        if let Some(witness) = witness {
            return Outcome::Consistent {
                witness,
                iteration: i,
            };
        }
        prev = level;
        prev_rules = rules;
    }
    exhausted(
        &prev,
        b.max_iterations,
        format!("{} iterations", b.max_iterations),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forbidden::ForbiddenChecker;
    use crate::syntax::{parse_atom, parse_program};

    const EX1: &str = "r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).\nr(a, b).";
    const EX6: &str = "r(a,b).\nstop(Y) :- r(X,Y).\n:- r(b,f(b)).\nr(Y,f(Y)) :- r(X,Y), not stop(X).";

    #[test]
    fn stop_chain_consistent() {
        let p = parse_program(EX1).unwrap();
        match is_consistent(&p, &Budget::default(), None) {
            Outcome::Consistent { witness, iteration } => {
                let expected: Interpretation = ["r(a,b)", "stop(b)", "r(b,f(b))", "stop(f(b))"]
                    .iter()
                    .map(|a| parse_atom(a).unwrap())
                    .collect();
                assert_eq!(witness, expected);
                assert_eq!(iteration, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nothing_derivable_rejects_at_first_level() {
        let p = parse_program(":- not p.").unwrap();
        assert_eq!(
            is_consistent(&p, &Budget::default(), None),
            Outcome::Inconsistent { iteration: 1 }
        );
    }

    #[test]
    fn no_answer_set_plain_and_pruned() {
        let p = parse_program(EX6).unwrap();
        let b = Budget {
            max_iterations: 50,
            ..Budget::default()
        };
        assert!(is_consistent(&p, &b, None).is_exhausted());
        let mut oracle = ForbiddenChecker::new(&p, b.forbidden);
        assert!(is_consistent(&p, &b, Some(&mut oracle)).is_inconsistent());
    }

    #[test]
    fn levels_grow() {
        let p = parse_program(EX1).unwrap();
        let a1 = next_level(&p, &Interpretation::new(), None);
        let a2 = next_level(&p, &a1, None);
        assert!(a1.is_subset(&a2));
        assert_eq!(a2.len(), 3);
    }
}
