//! Argument-position analysis of the positive part of a program.
//!
//! For every `(predicate, index)` we over-approximate which values can show up
//! there in any derivable atom: either only constants from a finite pool, or
//! possibly functional terms.

use std::collections::{BTreeMap, BTreeSet};

use super::program::Program;
use super::term::{Symbol, Term};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PositionInfo {
    /// Some derivable atom may carry a functional term (or a sum) here.
    pub functional: bool,
    /// Constants that may occur here.
    pub consts: BTreeSet<Term>,
}

impl PositionInfo {
    fn top() -> PositionInfo {
        PositionInfo {
            functional: true,
            consts: BTreeSet::new(),
        }
    }

    fn join(&mut self, other: &PositionInfo) -> bool {
        let before = (self.functional, self.consts.len());
        self.functional |= other.functional;
        self.consts.extend(other.consts.iter().cloned());
        before != (self.functional, self.consts.len())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PositionProfile {
    info: BTreeMap<(Symbol, usize), PositionInfo>,
}

impl PositionProfile {
    pub fn get(&self, predicate: &Symbol, index: usize) -> Option<&PositionInfo> {
        self.info.get(&(predicate.clone(), index))
    }

    /// The constant pool of a position that never holds functional terms.
    ///
    /// Positions of predicates that are never derived count as constant-only
    /// with an empty pool.
    pub fn constant_pool(&self, predicate: &Symbol, index: usize) -> Option<BTreeSet<Term>> {
        match self.get(predicate, index) {
            Some(info) if info.functional => None,
            Some(info) => Some(info.consts.clone()),
            None => Some(BTreeSet::new()),
        }
    }

    pub fn is_constant_only(&self, predicate: &Symbol, index: usize) -> bool {
        self.constant_pool(predicate, index).is_some()
    }
}

/// Fixpoint of the position abstraction over the rules with a head.
///
/// A variable takes the meet of the positions where it appears directly as a
/// positive-body argument; a variable only nested in terms is unconstrained.
pub fn analyze_positions(program: &Program) -> PositionProfile {
    let mut info: BTreeMap<(Symbol, usize), PositionInfo> = BTreeMap::new();
    loop {
        let mut changed = false;
        for rule in program.rules() {
            let Some(head) = &rule.head else { continue };
            for (i, arg) in head.args.iter().enumerate() {
                let value = match arg {
                    Term::Const(_) | Term::Int(_) | Term::Fresh(_) => PositionInfo {
                        functional: false,
                        consts: BTreeSet::from([arg.clone()]),
                    },
                    Term::Func(..) | Term::Add(..) => PositionInfo::top(),
                    Term::Var(v) => {
                        let mut meet: Option<PositionInfo> = None;
                        for atom in &rule.pos {
                            for (j, t) in atom.args.iter().enumerate() {
                                if !matches!(t, Term::Var(w) if w == v) {
                                    continue;
                                }
                                let here = info
                                    .get(&(atom.predicate.clone(), j))
                                    .cloned()
                                    .unwrap_or_default();
                                meet = Some(match meet {
                                    None => here,
                                    Some(m) => PositionInfo {
                                        functional: m.functional && here.functional,
                                        consts: m.consts.intersection(&here.consts).cloned().collect(),
                                    },
                                });
                            }
                        }
                        meet.unwrap_or_else(PositionInfo::top)
                    }
                };
                changed |= info
                    .entry((head.predicate.clone(), i))
                    .or_default()
                    .join(&value);
            }
        }
        if !changed {
            break;
        }
    }
    PositionProfile { info }
}
