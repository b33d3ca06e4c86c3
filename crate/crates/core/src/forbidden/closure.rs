//! Forward and backward rule applications and their signed fixpoint.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ground::{match_atom, match_atoms, Interpretation, Substitution};
use crate::syntax::{Atom, Builtin, Program, Rule, Symbol, Term};

/// Atoms that must be true (`pos`) and atoms that must be false (`neg`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignedPair {
    pub pos: Interpretation,
    pub neg: Interpretation,
}

impl SignedPair {
    pub fn new(pos: Interpretation, neg: Interpretation) -> Self {
        SignedPair { pos, neg }
    }

    pub fn positive(atoms: impl IntoIterator<Item = Atom>) -> Self {
        SignedPair {
            pos: atoms.into_iter().collect(),
            neg: Interpretation::new(),
        }
    }

    pub fn conflict(&self) -> Interpretation {
        self.pos.intersection(&self.neg)
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn is_subset(&self, other: &SignedPair) -> bool {
        self.pos.is_subset(&other.pos) && self.neg.is_subset(&other.neg)
    }

    pub fn all(&self) -> Interpretation {
        self.pos.union(&self.neg)
    }
}

/// The term-atoms `TA^P(L)`.
///
/// An atom belongs to the universe when its predicate occurs in the program
/// with that arity and every argument is a symbolic or fresh constant, a ground
/// term of the program, or a subterm of an argument of an atom in `L`.
/// Integers count as constants only within the range spanned by the integers
/// of the program and of `L`, which keeps closures over programs with sums
/// finite.
#[derive(Clone, Debug)]
pub struct TermUniverse {
    predicates: BTreeMap<Symbol, usize>,
    program_terms: BTreeSet<Term>,
    l_terms: BTreeSet<Term>,
    int_range: Option<(i64, i64)>,
}

impl TermUniverse {
    pub fn new(p: &Program, l: &Interpretation) -> Self {
        let program_terms = p.ground_terms();
        let l_terms = l.terms();
        let ints = program_terms.iter().chain(&l_terms).filter_map(|t| match t {
            Term::Int(k) => Some(*k),
            _ => None,
        });
        let int_range = ints.fold(None, |acc: Option<(i64, i64)>, k| match acc {
            None => Some((k, k)),
            Some((lo, hi)) => Some((lo.min(k), hi.max(k))),
        });
        TermUniverse {
            predicates: p.predicates().clone(),
            program_terms,
            l_terms,
            int_range,
        }
    }

    pub fn contains_term(&self, t: &Term) -> bool {
        let in_range = |k: &i64| self.int_range.is_some_and(|(lo, hi)| lo <= *k && *k <= hi);
        matches!(t, Term::Const(_) | Term::Fresh(_))
            || matches!(t, Term::Int(k) if in_range(k))
            || self.program_terms.contains(t)
            || self.l_terms.contains(t)
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.predicates.get(&a.predicate) == Some(&a.args.len())
            && a.args.iter().all(|t| self.contains_term(t))
    }

    /// Finite pool used to complete variables left open by backward application:
    /// ground terms of the program and terms of `L` (including their fresh constants).
    pub fn pool(&self) -> BTreeSet<Term> {
        self.program_terms.union(&self.l_terms).cloned().collect()
    }
}

pub(crate) fn ground_atom(sigma: &Substitution, a: &Atom) -> Option<Atom> {
    let a = sigma.apply_atom(a).evaluate()?;
    a.is_ground().then_some(a)
}

pub(crate) fn builtin_value(sigma: &Substitution, b: &Builtin) -> Option<bool> {
    Builtin {
        op: b.op,
        left: sigma.apply_term(&b.left),
        right: sigma.apply_term(&b.right),
    }
    .evaluate()
}

fn builtins_true(rule: &Rule, sigma: &Substitution) -> bool {
    rule.builtins.iter().all(|b| builtin_value(sigma, b) == Some(true))
}

fn all_in(sigma: &Substitution, atoms: &[Atom], set: &Interpretation) -> bool {
    atoms
        .iter()
        .all(|a| ground_atom(sigma, a).is_some_and(|g| set.contains(&g)))
}

/// `r⁺(L⁺, L⁻)`.
pub fn r_plus(rule: &Rule, lp: &Interpretation, ln: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    for sigma in match_atoms(&rule.pos, lp, &Substitution::new()) {
        if !builtins_true(rule, &sigma) {
            continue;
        }
        if let Some(h) = &rule.head {
            if all_in(&sigma, &rule.neg, ln) {
                if let Some(h) = ground_atom(&sigma, h) {
                    out.insert(h);
                }
            }
        }
        if rule.neg.len() == 1 {
            let head_false = match &rule.head {
                None => true,
                Some(h) => ground_atom(&sigma, h).is_some_and(|h| ln.contains(&h)),
            };
            if head_false {
                if let Some(b) = ground_atom(&sigma, &rule.neg[0]) {
                    out.insert(b);
                }
            }
        }
    }
    out
}

/// Error raised when a backward application would enumerate too many completions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TooLarge;

/// `r⁻(L⁺, L⁻)`, with variables left open by the match ranging over the
/// universe pool.
pub fn r_minus(
    rule: &Rule,
    ln: &Interpretation,
    universe: &TermUniverse,
) -> Result<Interpretation, TooLarge> {
    let mut out = Interpretation::new();
    if rule.pos.len() != 1 {
        return Ok(out);
    }
    let mut patterns = rule.neg.clone();
    patterns.extend(rule.head.iter().cloned());
    let pool: Vec<Term> = universe.pool().into_iter().collect();
    let vars = rule.vars();
    for sigma in match_atoms(&patterns, ln, &Substitution::new()) {
        let open: Vec<Symbol> = vars.iter().filter(|v| !sigma.contains(v)).cloned().collect();
        if (pool.len() as f64).powi(open.len() as i32) > 1e6 {
            return Err(TooLarge);
        }
        for_each_completion(&sigma, &open, &pool, &mut |s| {
            if builtins_true(rule, s) && all_in(s, &patterns, ln) {
                if let Some(b) = ground_atom(s, &rule.pos[0]) {
                    out.insert(b);
                }
            }
        });
    }
    Ok(out)
}

pub(crate) fn for_each_completion(
    sigma: &Substitution,
    open: &[Symbol],
    pool: &[Term],
    visit: &mut dyn FnMut(&Substitution),
) {
    match open.split_first() {
        None => visit(sigma),
        Some((v, rest)) => {
            for t in pool {
                let mut s = sigma.clone();
                s.insert(v.clone(), t.clone());
                for_each_completion(&s, rest, pool, visit);
            }
        }
    }
}

/// One stage `P_{i+1}` from `P_i = cur`, keeping only atoms of `universe`.
pub fn closure_step(p: &Program, cur: &SignedPair, universe: &TermUniverse) -> Result<SignedPair, TooLarge> {
    let mut next = cur.clone();
    for rule in p.rules() {
        for a in r_plus(rule, &cur.pos, &cur.neg) {
            if universe.contains(&a) {
                next.pos.insert(a);
            }
        }
        for a in r_minus(rule, &cur.neg, universe)? {
            if universe.contains(&a) {
                next.neg.insert(a);
            }
        }
    }
    Ok(next)
}

/// The stages `P_0, P_1, …` over a fixed universe, up to the fixpoint or
/// `max_stages` entries.
pub fn closure_stages(
    p: &Program,
    s: &SignedPair,
    universe: &TermUniverse,
    max_stages: usize,
) -> Result<Vec<SignedPair>, TooLarge> {
    let mut stages = vec![s.clone()];
    while stages.len() < max_stages {
        let cur = stages.last().expect("stages start non-empty");
        let next = closure_step(p, cur, universe)?;
        if &next == cur {
            break;
        }
        stages.push(next);
    }
    Ok(stages)
}

/// `P∞^±(L⁺, L⁻)`: simultaneous fixpoint of `r⁺` and `r⁻` over all rules,
/// each step intersected with `TA^P(L⁺ ∪ L⁻)` of the input pair.
///
/// `None` when the closure grows past `max_atoms`.
pub fn signed_closure_bounded(p: &Program, s: &SignedPair, max_atoms: usize) -> Option<SignedPair> {
    let universe = TermUniverse::new(p, &s.all());
    let mut cur = s.clone();
    loop {
        let next = closure_step(p, &cur, &universe).ok()?;
        if next.len() > max_atoms {
            return None;
        }
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
}

pub fn signed_closure(p: &Program, s: &SignedPair) -> SignedPair {
    signed_closure_bounded(p, s, usize::MAX).expect("unbounded closure cannot exceed its cap")
}

/// A rule and substitution with `Hσ = {a}`, `B⁺σ ⊆ L⁺`, `B⁻σ ⊆ L⁻`.
///
/// Builtins only rule out an instance when they are definitely false.
pub fn has_support(a: &Atom, p: &Program, s: &SignedPair) -> bool {
    p.rules().iter().any(|rule| {
        let Some(head) = &rule.head else { return false };
        let mut sigma = Substitution::new();
        let mut deferred = Vec::new();
        if !match_atom(head, a, &mut sigma, &mut deferred) {
            return false;
        }
        match_atoms(&rule.pos, &s.pos, &sigma).into_iter().any(|sigma| {
            ground_atom(&sigma, head).as_ref() == Some(a)
                && all_in(&sigma, &rule.neg, &s.neg)
                && rule.builtins.iter().all(|b| builtin_value(&sigma, b) != Some(false))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_program};

    pub(crate) const EX6: &str =
        "r(a,b).\nstop(Y) :- r(X,Y).\n:- r(b,f(b)).\nr(Y,f(Y)) :- r(X,Y), not stop(X).\n";

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| parse_atom(a).unwrap()).collect()
    }

    fn shown(i: &Interpretation) -> Vec<String> {
        i.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn r_plus_forward() {
        let p = parse_program("r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).").unwrap();
        let out = r_plus(&p.rules()[1], &interp(&["r(a,b)"]), &Interpretation::new());
        assert_eq!(shown(&out), ["stop(b)"]);
        let out = r_plus(&p.rules()[0], &Interpretation::new(), &interp(&["r(b,f(b))"]));
        assert!(out.is_empty());
    }

    #[test]
    fn r_plus_negative_body_clause() {
        let p = parse_program("r(Y, f(Y)) :- r(X, Y), not stop(X).").unwrap();
        let out = r_plus(&p.rules()[0], &interp(&["r(a,b)"]), &interp(&["r(b,f(b))"]));
        assert_eq!(shown(&out), ["stop(a)"]);
    }

    #[test]
    fn r_minus_guards() {
        let p = parse_program("p(X) :- q(X), s(X). stop(Y) :- r(X,Y).").unwrap();
        let u = TermUniverse::new(&p, &interp(&["stop(a)"]));
        assert!(r_minus(&p.rules()[0], &interp(&["p(a)"]), &u).unwrap().is_empty());
        assert!(r_minus(&p.rules()[1], &interp(&["q(a)"]), &u).unwrap().is_empty());
    }

    #[test]
    fn r_minus_completes_over_universe() {
        let p = parse_program("stop(Y) :- r(X,Y). q(c).").unwrap();
        let l = interp(&["stop(b)", "q(f(b))"]);
        let u = TermUniverse::new(&p, &l);
        let out = r_minus(&p.rules()[0], &l, &u).unwrap();
        assert_eq!(shown(&out), ["r(b,b)", "r(c,b)", "r(f(b),b)"]);
    }

    #[test]
    fn no_answer_set_closure() {
        let p = parse_program(EX6).unwrap();
        let s = SignedPair::positive([parse_atom("r(f(b),f(f(b)))").unwrap()]);
        let c = signed_closure(&p, &s);
        assert_eq!(
            shown(&c.pos),
            ["r(a,b)", "r(f(b),f(f(b)))", "stop(a)", "stop(b)", "stop(f(f(b)))"]
        );
        assert_eq!(shown(&c.neg), ["r(b,f(b))"]);
    }

    #[test]
    fn empty_pair_closure() {
        let p = parse_program("r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).\nr(a, b).")
            .unwrap();
        let c = signed_closure(&p, &SignedPair::default());
        assert_eq!(shown(&c.pos), ["r(a,b)", "stop(b)"]);
        assert!(c.neg.is_empty());
    }

    #[test]
    fn support() {
        let p = parse_program("r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).\nr(a, b).")
            .unwrap();
        let a = parse_atom("r(a,b)").unwrap();
        assert!(has_support(&a, &p, &SignedPair::default()));
        let s = SignedPair::positive([a]);
        assert!(has_support(&parse_atom("stop(b)").unwrap(), &p, &s));
        assert!(!has_support(&parse_atom("r(b,f(b))").unwrap(), &p, &s));
    }

    #[test]
    fn universe_membership() {
        let p = parse_program("p(a). q(X) :- p(X), r(f(c)).").unwrap();
        let u = TermUniverse::new(&p, &interp(&["p(g(h(d)))"]));
        assert!(u.contains(&parse_atom("q(zzz)").unwrap()));
        assert!(u.contains(&parse_atom("r(f(c))").unwrap()));
        assert!(u.contains(&parse_atom("q(h(d))").unwrap()));
        assert!(!u.contains(&parse_atom("q(f(a))").unwrap()));
        assert!(!u.contains(&parse_atom("other(a)").unwrap()));
        assert!(!u.contains(&parse_atom("q(7)").unwrap()));
        let p = parse_program("n(0). n(9) :- n(3).").unwrap();
        let u = TermUniverse::new(&p, &interp(&["n(12)"]));
        assert!(u.contains(&parse_atom("n(11)").unwrap()));
        assert!(!u.contains(&parse_atom("n(13)").unwrap()));
    }
}
