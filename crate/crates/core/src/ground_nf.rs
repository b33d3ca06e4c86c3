//! Level-wise grounding that replaces rules with forbidden heads by constraints.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::consistency::Budget;
use crate::error::Result;
use crate::forbidden::ForbiddenOracle;
use crate::ground::{ground_with_terms, herbrand_terms, instances_within, GroundLimits, GroundRule, Interpretation};
use crate::solve::enumerate_with_budget;
use crate::syntax::Program;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundingResult {
    pub rules: BTreeSet<GroundRule>,
    pub complete: bool,
    pub levels: usize,
    /// Constraints `:- B_r` emitted in place of rules with a forbidden head.
    pub replaced: usize,
    pub atoms: Interpretation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl GroundingResult {
    pub fn rules_vec(&self) -> Vec<GroundRule> {
        self.rules.iter().cloned().collect()
    }
}

pub fn ground_not_forbidden<'o>(
    p: &Program,
    oracle: &mut (dyn ForbiddenOracle + 'o),
    b: &Budget,
) -> GroundingResult {
    let mut rules = BTreeSet::new();
    let mut seen: BTreeSet<GroundRule> = BTreeSet::new();
    let mut replaced = 0;
    let mut prev = Interpretation::new();
    let mut level = 0;
    let incomplete = |rules, level, replaced, atoms, reason: String| GroundingResult {
        rules,
        complete: false,
        levels: level,
        replaced,
        atoms,
        reason: Some(reason),
    };
    loop {
        level += 1;
        if level > b.max_iterations {
            return incomplete(rules, level - 1, replaced, prev, format!("{} levels", b.max_iterations));
        }
        let mut next = prev.clone();
        for r in instances_within(p, &prev) {
            if !seen.insert(r.clone()) {
                continue;
            }
            match &r.head {
                Some(h) if !oracle.is_forbidden(h) => {
                    next.insert(h.clone());
                    rules.insert(r);
                }
                Some(_) => {
                    let c = GroundRule {
                        head: None,
                        pos: r.pos,
                        neg: r.neg,
                    };
                    if rules.insert(c) {
                        replaced += 1;
                    }
                }
                None => {
                    rules.insert(r);
                }
            }
            if rules.len() > b.max_ground_rules {
                return incomplete(
                    rules,
                    level,
                    replaced,
                    next,
                    format!("more than {} ground rules", b.max_ground_rules),
                );
            }
        }
        if next == prev {
            return GroundingResult {
                rules,
                complete: true,
                levels: level,
                replaced,
                atoms: next,
                reason: None,
            };
        }
        if next.len() > b.max_atoms {
            return incomplete(rules, level, replaced, next, format!("more than {} atoms", b.max_atoms));
        }
        prev = next;
    }
}

/// Compares the answer sets of `g` with those of the naive grounding over
/// terms of nesting depth at most `depth`.
pub fn validate_grounding(p: &Program, g: &GroundingResult, depth: usize) -> Result<bool> {
    let limits = GroundLimits::default();
    let terms = herbrand_terms(p, depth, &limits)?;
    let reference = ground_with_terms(p, &terms, &limits)?;
    let budget = Budget::default().solve;
    let left: BTreeSet<Interpretation> = enumerate_with_budget(&g.rules_vec(), None, budget)?
        .into_iter()
        .collect();
    let right: BTreeSet<Interpretation> = enumerate_with_budget(&reference, None, budget)?
        .into_iter()
        .collect();
    Ok(g.complete && left == right)
}
