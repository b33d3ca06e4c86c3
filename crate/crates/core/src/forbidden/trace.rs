use std::collections::BTreeMap;
use std::fmt;

use crate::ground::{Interpretation, Substitution};
use crate::syntax::{Atom, Term};

/// Rewriting of fresh constants to fresh-free ground terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreshMap(pub BTreeMap<u32, Term>);

impl FreshMap {
    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Fresh(id) => self.0.get(id).cloned().unwrap_or_else(|| t.clone()),
            Term::Func(f, args) => Term::Func(
                f.clone(),
                args.iter().map(|a| self.apply_term(a)).collect::<Vec<_>>().into(),
            ),
            Term::Add(l, r) => Term::add(self.apply_term(l), self.apply_term(r)),
            _ => t.clone(),
        }
    }

    /// `g(a)`; `None` if a sum no longer evaluates.
    pub fn apply_atom(&self, a: &Atom) -> Option<Atom> {
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
        .evaluate()
    }

    pub fn apply(&self, i: &Interpretation) -> Interpretation {
        if self.is_identity() {
            return i.clone();
        }
        i.iter().filter_map(|a| self.apply_atom(a)).collect()
    }
}

impl fmt::Display for FreshMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("identity");
        }
        f.write_str("[")?;
        for (i, (id, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "$c{id}/{t}")?;
        }
        f.write_str("]")
    }
}

/// One step of a forbidden-atom check, tagged with the algorithm line it
/// belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Closure {
        depth: usize,
        pos: Interpretation,
        neg: Interpretation,
    },
    Contradiction {
        depth: usize,
        atoms: Interpretation,
    },
    Pick {
        depth: usize,
        atom: Atom,
    },
    Choice {
        depth: usize,
        rule: usize,
        sigma: Substitution,
        g: FreshMap,
    },
    NoChoice {
        depth: usize,
        atom: Atom,
    },
    Escape {
        depth: usize,
        rule: usize,
        reason: String,
    },
    Rewrite {
        depth: usize,
        g: FreshMap,
    },
    Extension {
        depth: usize,
        sigma: Substitution,
    },
    Update {
        depth: usize,
        pos: Interpretation,
        neg: Interpretation,
    },
    Recurse {
        depth: usize,
        result: bool,
    },
    Verdict {
        depth: usize,
        atom: Atom,
        forbidden: bool,
    },
    Return {
        depth: usize,
        result: bool,
    },
    Exhausted {
        depth: usize,
        reason: String,
    },
}

impl TraceEvent {
    pub fn depth(&self) -> usize {
        match self {
            TraceEvent::Closure { depth, .. }
            | TraceEvent::Contradiction { depth, .. }
            | TraceEvent::Pick { depth, .. }
            | TraceEvent::Choice { depth, .. }
            | TraceEvent::NoChoice { depth, .. }
            | TraceEvent::Escape { depth, .. }
            | TraceEvent::Rewrite { depth, .. }
            | TraceEvent::Extension { depth, .. }
            | TraceEvent::Update { depth, .. }
            | TraceEvent::Recurse { depth, .. }
            | TraceEvent::Verdict { depth, .. }
            | TraceEvent::Return { depth, .. }
            | TraceEvent::Exhausted { depth, .. } => *depth,
        }
    }

    pub fn line(&self) -> usize {
        match self {
            TraceEvent::Closure { .. } => 1,
            TraceEvent::Contradiction { .. } => 3,
            TraceEvent::Pick { .. } => 5,
            TraceEvent::Choice { .. } | TraceEvent::NoChoice { .. } => 7,
            TraceEvent::Escape { .. } => 8,
            TraceEvent::Rewrite { .. } => 12,
            TraceEvent::Extension { .. } => 13,
            TraceEvent::Update { .. } => 14,
            TraceEvent::Recurse { .. } => 15,
            TraceEvent::Verdict { .. } => 18,
            TraceEvent::Return { .. } | TraceEvent::Exhausted { .. } => 20,
        }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DEPTH {} | LINE {} | ", self.depth(), self.line())?;
        match self {
            TraceEvent::Closure { pos, neg, .. } => write!(f, "closure L+ = {pos}; L- = {neg}"),
            TraceEvent::Contradiction { atoms, .. } => {
                write!(f, "L+ and L- share {atoms}; return true")
            }
            TraceEvent::Pick { atom, .. } => write!(f, "pick unsupported {atom}"),
            TraceEvent::Choice { rule, sigma, g, .. } => {
                write!(f, "choice rule {rule}, sigma = {sigma}, g = {g}")
            }
            TraceEvent::NoChoice { atom, .. } => write!(f, "no rule can derive {atom}"),
            TraceEvent::Escape { rule, reason, .. } => {
                write!(f, "rule {rule}: {reason}; aFrbdn = false")
            }
            TraceEvent::Rewrite { g, .. } => write!(f, "K = g(L) with g = {g}"),
            TraceEvent::Extension { sigma, .. } => write!(f, "extension sigma' = {sigma}"),
            TraceEvent::Update { pos, neg, .. } => write!(f, "J+ adds {pos}; J- adds {neg}"),
            TraceEvent::Recurse { result, .. } => write!(f, "recursive call returned {result}"),
            TraceEvent::Verdict {
                atom, forbidden, ..
            } => write!(f, "aFrbdn({atom}) = {forbidden}"),
            TraceEvent::Return { result, .. } => write!(f, "return {result}"),
            TraceEvent::Exhausted { reason, .. } => write!(f, "budget exhausted ({reason}); return false"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_atom;

    #[test]
    fn fresh_map_rewrites() {
        let g = FreshMap(BTreeMap::from([(0, Term::constant("b"))]));
        let a = Atom::new("r", vec![Term::Fresh(0), Term::func("f", vec![Term::Fresh(1)])]);
        assert_eq!(g.apply_atom(&a).unwrap().to_string(), "r(b,f($c1))");
        assert_eq!(g.to_string(), "[$c0/b]");
        assert_eq!(FreshMap::default().to_string(), "identity");
    }

    #[test]
    fn event_format() {
        let e = TraceEvent::Pick {
            depth: 2,
            atom: parse_atom("r(a,b)").unwrap(),
        };
        assert_eq!(e.to_string(), "DEPTH 2 | LINE 5 | pick unsupported r(a,b)");
    }
}
