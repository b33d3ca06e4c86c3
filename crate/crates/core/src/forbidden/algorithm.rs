//! The recursive forbidden-atom check.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::closure::{
    builtin_value, ground_atom, has_support, signed_closure_bounded, SignedPair, TermUniverse,
};
use super::trace::{FreshMap, TraceEvent};
use crate::ground::{Interpretation, Substitution};
use crate::syntax::{analyze_positions, Atom, PositionProfile, Program, Rule, Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ForbiddenBudget {
    pub max_depth: usize,
    pub max_calls: usize,
    /// Largest signed closure (positive plus negative atoms) computed at any call.
    pub max_closure_atoms: usize,
}

impl Default for ForbiddenBudget {
    fn default() -> Self {
        ForbiddenBudget {
            max_depth: 32,
            max_calls: 10_000,
            max_closure_atoms: 50_000,
        }
    }
}

/// Variables occurring in positive body atoms, sums included.
fn positive_vars(rule: &Rule) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for a in &rule.pos {
        a.collect_vars(&mut out);
    }
    out
}

/// The `r`-extensions of `sigma`.
///
/// A body-only variable that appears directly in some positive position
/// restricted to constants ranges over the intersection of those pools; any
/// other body-only variable gets a new fresh constant drawn from `next_fresh`.
pub fn r_extensions(
    rule: &Rule,
    sigma: &Substitution,
    profile: &PositionProfile,
    next_fresh: &mut u32,
) -> Vec<Substitution> {
    let head = rule.head_vars();
    let mut choices: Vec<(Symbol, Vec<Term>)> = Vec::new();
    for v in positive_vars(rule) {
        if head.contains(&v) || sigma.contains(&v) {
            continue;
        }
        let mut pool: Option<BTreeSet<Term>> = None;
        for a in &rule.pos {
            for (j, t) in a.args.iter().enumerate() {
                if !matches!(t, Term::Var(w) if *w == v) {
                    continue;
                }
                if let Some(consts) = profile.constant_pool(&a.predicate, j) {
                    pool = Some(match pool {
                        None => consts,
                        Some(p) => p.intersection(&consts).cloned().collect(),
                    });
                }
            }
        }
        let values = match pool {
            Some(p) => p.into_iter().collect(),
            None => {
                let c = Term::Fresh(*next_fresh);
                *next_fresh += 1;
                vec![c]
            }
        };
        choices.push((v, values));
    }
    let mut out = vec![sigma.clone()];
    for (v, values) in &choices {
        out = out
            .into_iter()
            .flat_map(|s| {
                values.iter().map(move |t| {
                    let mut s = s.clone();
                    s.insert(v.clone(), t.clone());
                    s
                })
            })
            .collect();
    }
    out
}

enum Unified {
    Fail,
    Escape(String),
    Match { sigma: Substitution, g: FreshMap },
}

fn fresh_var(id: u32) -> Symbol {
    Symbol::new(&format!("$c{id}"))
}

/// Turns fresh constants into unification variables.
fn open_fresh(t: &Term) -> Term {
    match t {
        Term::Fresh(id) => Term::Var(fresh_var(*id)),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(open_fresh).collect::<Vec<_>>().into()),
        _ => t.clone(),
    }
}

#[derive(Default)]
struct Unifier {
    bind: HashMap<Symbol, Term>,
    escape: Option<String>,
}

impl Unifier {
    fn walk(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(v) = &t {
            match self.bind.get(v) {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Func(f, args) => {
                Term::Func(f, args.iter().map(|a| self.resolve(a)).collect::<Vec<_>>().into())
            }
            Term::Add(l, r) => Term::add(self.resolve(&l), self.resolve(&r)),
            other => other,
        }
    }

    fn occurs(&self, v: &Symbol, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == *v,
            Term::Func(_, args) => args.iter().any(|a| self.occurs(v, a)),
            Term::Add(l, r) => self.occurs(v, &l) || self.occurs(v, &r),
            _ => false,
        }
    }

    fn unify(&mut self, s: &Term, t: &Term) -> bool {
        let (s, t) = (self.walk(s), self.walk(t));
        match (&s, &t) {
            (Term::Var(a), Term::Var(b)) if a == b => true,
            (Term::Add(..), _) => self.unify_sum(&s, &t),
            (_, Term::Add(..)) => self.unify_sum(&t, &s),
            (Term::Var(v), _) => {
                if self.occurs(v, &t) {
                    return false;
                }
                self.bind.insert(v.clone(), t.clone());
                true
            }
            (_, Term::Var(_)) => self.unify(&t, &s),
            (Term::Func(f, xs), Term::Func(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, y))
            }
            _ => s == t,
        }
    }

    fn unify_sum(&mut self, sum: &Term, other: &Term) -> bool {
        let sum = self.resolve(sum);
        if sum.is_ground() {
            return match sum.evaluate() {
                Some(v) => self.unify(&v, other),
                None => false,
            };
        }
        let Term::Add(l, r) = &sum else { unreachable!() };
        match self.walk(other) {
            Term::Int(k) => {
                let known = |t: &Term| match t.evaluate() {
                    Some(Term::Int(c)) if t.is_ground() => Some(c),
                    _ => None,
                };
                if let Some(c) = known(r) {
                    k.checked_sub(c).is_some_and(|d| self.unify(l, &Term::Int(d)))
                } else if let Some(c) = known(l) {
                    k.checked_sub(c).is_some_and(|d| self.unify(r, &Term::Int(d)))
                } else {
                    self.escape = Some(format!("sum {sum} has infinitely many solutions"));
                    true
                }
            }
            Term::Var(_) => {
                self.escape = Some(format!("sum {sum} meets an unconstrained fresh constant"));
                true
            }
            _ => false,
        }
    }
}

/// Line 7: all `(σ, g)` with `Hσ = {g(a)}` for one rule, as a most general unifier.
fn unify_head(rule: &Rule, a: &Atom) -> Unified {
    let Some(head) = &rule.head else {
        return Unified::Fail;
    };
    if head.predicate != a.predicate || head.args.len() != a.args.len() {
        return Unified::Fail;
    }
    let mut u = Unifier::default();
    for (h, t) in head.args.iter().zip(&a.args) {
        if !u.unify(h, &open_fresh(t)) {
            return Unified::Fail;
        }
    }
    if let Some(reason) = u.escape {
        return Unified::Escape(reason);
    }
    let mut fresh = BTreeSet::new();
    for t in &a.args {
        t.collect_fresh(&mut fresh);
    }
    let mut g = FreshMap::default();
    for id in fresh {
        let image = u.resolve(&Term::Var(fresh_var(id)));
        if !image.is_ground() {
            return Unified::Escape(format!("$c{id} may stand for arbitrary terms"));
        }
        g.0.insert(id, image);
    }
    let mut sigma = Substitution::new();
    for v in rule.head_vars() {
        let value = u.resolve(&Term::Var(v.clone()));
        if !value.is_ground() {
            return Unified::Escape(format!("{v} may stand for arbitrary terms"));
        }
        sigma.insert(v, value);
    }
    Unified::Match { sigma, g }
}

struct Exhausted(String);

/// One analysis session: owns the fresh-constant counter and the trace.
pub struct Session<'p> {
    program: &'p Program,
    profile: PositionProfile,
    budget: ForbiddenBudget,
    next_fresh: u32,
    calls: usize,
    trace: Option<Vec<TraceEvent>>,
}

/// Result of one top-level call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenRun {
    pub verdict: bool,
    pub exhausted: bool,
    pub calls: usize,
    pub trace: Vec<TraceEvent>,
}

impl<'p> Session<'p> {
    pub fn new(program: &'p Program, budget: ForbiddenBudget) -> Self {
        Self::with_profile(program, analyze_positions(program), budget)
    }

    pub fn with_profile(program: &'p Program, profile: PositionProfile, budget: ForbiddenBudget) -> Self {
        Session {
            program,
            profile,
            budget,
            next_fresh: 0,
            calls: 0,
            trace: None,
        }
    }

    pub fn traced(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    fn log(&mut self, e: TraceEvent) {
        if let Some(t) = &mut self.trace {
            t.push(e);
        }
    }

    /// `IsForbidden(P, L⁺, L⁻)`; budget exhaustion yields `false`.
    pub fn run(&mut self, s: &SignedPair) -> ForbiddenRun {
        self.calls = 0;
        let mut fresh = BTreeSet::new();
        for a in s.pos.iter().chain(s.neg.iter()) {
            for t in &a.args {
                t.collect_fresh(&mut fresh);
            }
        }
        self.next_fresh = fresh.last().map_or(0, |m| m + 1);
        let focus = s.pos.clone();
        let (verdict, exhausted) = match self.call(s.clone(), &focus, 0) {
            Ok(v) => (v, false),
            Err(Exhausted(reason)) => {
                self.log(TraceEvent::Exhausted { depth: 0, reason });
                (false, true)
            }
        };
        ForbiddenRun {
            verdict,
            exhausted,
            calls: self.calls,
            trace: self.trace.take().unwrap_or_default(),
        }
    }

    fn call(&mut self, l: SignedPair, focus: &Interpretation, depth: usize) -> Result<bool, Exhausted> {
        self.calls += 1;
        if self.calls > self.budget.max_calls {
            return Err(Exhausted(format!("more than {} calls", self.budget.max_calls)));
        }
        if depth > self.budget.max_depth {
            return Err(Exhausted(format!("recursion deeper than {}", self.budget.max_depth)));
        }

        let l = signed_closure_bounded(self.program, &l, self.budget.max_closure_atoms)
            .ok_or_else(|| Exhausted(format!("closure above {} atoms", self.budget.max_closure_atoms)))?;
        self.log(TraceEvent::Closure {
            depth,
            pos: l.pos.clone(),
            neg: l.neg.clone(),
        });
        let conflict = l.conflict();
        if !conflict.is_empty() {
            self.log(TraceEvent::Contradiction {
                depth,
                atoms: conflict,
            });
            return Ok(true);
        }

        let mut unsupported: Vec<&Atom> = l
            .pos
            .iter()
            .filter(|a| !has_support(a, self.program, &l))
            .collect();
        unsupported.sort_by_key(|a| (!focus.contains(a), Reverse(a.depth()), *a));
        let l_terms = l.all().terms();

        for a in unsupported {
            self.log(TraceEvent::Pick {
                depth,
                atom: a.clone(),
            });
            let mut a_frbdn = true;
            let mut any_choice = false;
            'rules: for (idx, rule) in self.program.rules().iter().enumerate() {
                let (sigma, g) = match unify_head(rule, a) {
                    Unified::Fail => continue,
                    Unified::Escape(reason) => {
                        self.log(TraceEvent::Escape {
                            depth,
                            rule: idx,
                            reason,
                        });
                        a_frbdn = false;
                        break;
                    }
                    Unified::Match { sigma, g } => (sigma, g),
                };
                any_choice = true;
                self.log(TraceEvent::Choice {
                    depth,
                    rule: idx,
                    sigma: sigma.clone(),
                    g: g.clone(),
                });
                let outside = match g.apply_atom(a) {
                    Some(ga) => ga.args.iter().any(|t| !l_terms.contains(t)),
                    None => true,
                };
                if outside {
                    self.log(TraceEvent::Escape {
                        depth,
                        rule: idx,
                        reason: "g(a) features terms not in L".into(),
                    });
                    a_frbdn = false;
                    break;
                }
                let k = SignedPair::new(g.apply(&l.pos), g.apply(&l.neg));
                if !g.is_identity() {
                    self.log(TraceEvent::Rewrite { depth, g: g.clone() });
                }
                let universe = TermUniverse::new(self.program, &k.all());
                for ext in r_extensions(rule, &sigma, &self.profile, &mut self.next_fresh) {
                    if rule.builtins.iter().any(|b| builtin_value(&ext, b) == Some(false)) {
                        continue;
                    }
                    self.log(TraceEvent::Extension {
                        depth,
                        sigma: ext.clone(),
                    });
                    let add = |atoms: &[Atom], base: &Interpretation| -> Interpretation {
                        atoms
                            .iter()
                            .filter_map(|b| ground_atom(&ext, b))
                            .filter(|b| universe.contains(b) && !base.contains(b))
                            .collect()
                    };
                    let add_pos = add(&rule.pos, &k.pos);
                    let add_neg = add(&rule.neg, &k.neg);
                    self.log(TraceEvent::Update {
                        depth,
                        pos: add_pos.clone(),
                        neg: add_neg.clone(),
                    });
                    let j = SignedPair::new(k.pos.union(&add_pos), k.neg.union(&add_neg));
                    let result = self.call(j, &add_pos, depth + 1)?;
                    self.log(TraceEvent::Recurse { depth, result });
                    a_frbdn &= result;
                    if !a_frbdn {
                        break 'rules;
                    }
                }
            }
            if !any_choice && a_frbdn {
                self.log(TraceEvent::NoChoice {
                    depth,
                    atom: a.clone(),
                });
            }
            self.log(TraceEvent::Verdict {
                depth,
                atom: a.clone(),
                forbidden: a_frbdn,
            });
            if a_frbdn {
                self.log(TraceEvent::Return { depth, result: true });
                return Ok(true);
            }
        }
        self.log(TraceEvent::Return { depth, result: false });
        Ok(false)
    }
}

/// True only if some atom of `s.pos` is forbidden in `p` or `s` is contradictory.
pub fn is_forbidden(p: &Program, s: &SignedPair, budget: ForbiddenBudget) -> bool {
    Session::new(p, budget).run(s).verdict
}

pub fn is_forbidden_traced(p: &Program, s: &SignedPair, budget: ForbiddenBudget) -> ForbiddenRun {
    Session::new(p, budget).traced().run(s)
}

/// Source of forbidden-atom verdicts; `true` must imply the atom is forbidden.
pub trait ForbiddenOracle {
    fn is_forbidden(&mut self, a: &Atom) -> bool;
}

/// Oracle that never certifies anything.
pub struct NoOracle;

impl ForbiddenOracle for NoOracle {
    fn is_forbidden(&mut self, _: &Atom) -> bool {
        false
    }
}

impl<F: FnMut(&Atom) -> bool> ForbiddenOracle for F {
    fn is_forbidden(&mut self, a: &Atom) -> bool {
        self(a)
    }
}

/// The algorithm as an oracle, memoizing verdicts per ground atom.
pub struct ForbiddenChecker<'p> {
    program: &'p Program,
    profile: PositionProfile,
    budget: ForbiddenBudget,
    cache: BTreeMap<Atom, bool>,
    pub checks: usize,
}

impl<'p> ForbiddenChecker<'p> {
    pub fn new(program: &'p Program, budget: ForbiddenBudget) -> Self {
        ForbiddenChecker {
            program,
            profile: analyze_positions(program),
            budget,
            cache: BTreeMap::new(),
            checks: 0,
        }
    }

    pub fn forbidden_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.cache.iter().filter(|(_, &v)| v).map(|(a, _)| a)
    }
}

impl ForbiddenOracle for ForbiddenChecker<'_> {
    fn is_forbidden(&mut self, a: &Atom) -> bool {
        if let Some(&v) = self.cache.get(a) {
            return v;
        }
        self.checks += 1;
        let mut session = Session::with_profile(self.program, self.profile.clone(), self.budget);
        let v = session.run(&SignedPair::positive([a.clone()])).verdict;
        self.cache.insert(a.clone(), v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_program};

    const EX1: &str = "r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).\nr(a, b).";
    const EX6: &str = "r(a,b).\nstop(Y) :- r(X,Y).\n:- r(b,f(b)).\nr(Y,f(Y)) :- r(X,Y), not stop(X).";
    const EX5: &str = "fct(a,0). eq(X,X) :- fct(X,N). :- redundant.\n\
        lt(N,s(N)) :- fct(X,s(N)).\n\
        lt(N,N1) :- lt(N,M), lt(M,N1).\n\
        fct(b,s(N)) :- fct(a,N). fct(a,s(N)) :- fct(b,N).\n\
        diff(N,M) :- fct(X,N), fct(Y,M), not eq(X,Y), lt(N,M).\n\
        redundant :- fct(X,N), fct(Y,M), lt(N,M), not diff(N,M).";

    fn check(text: &str, atom: &str) -> bool {
        let p = parse_program(text).unwrap();
        is_forbidden(
            &p,
            &SignedPair::positive([parse_atom(atom).unwrap()]),
            ForbiddenBudget::default(),
        )
    }

    #[test]
    fn extensions_with_fresh_constant() {
        let p = parse_program(EX1).unwrap();
        let prof = analyze_positions(&p);
        let sigma = Substitution::new().with("Y", parse_atom("x(f(b))").unwrap().args[0].clone());
        let mut next = 0;
        let ext = r_extensions(&p.rules()[0], &sigma, &prof, &mut next);
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].to_string(), "[X/$c0,Y/f(b)]");
        assert_eq!(next, 1);
    }

    #[test]
    fn extensions_over_constant_pool() {
        let p = parse_program(EX5).unwrap();
        let prof = analyze_positions(&p);
        let diff = &p.rules()[7];
        let sigma = Substitution::new()
            .with("N", Term::Int(0))
            .with("M", parse_atom("x(s(s(0)))").unwrap().args[0].clone());
        let mut next = 0;
        let ext: Vec<String> = r_extensions(diff, &sigma, &prof, &mut next)
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            ext,
            [
                "[M/s(s(0)),N/0,X/a,Y/a]",
                "[M/s(s(0)),N/0,X/a,Y/b]",
                "[M/s(s(0)),N/0,X/b,Y/a]",
                "[M/s(s(0)),N/0,X/b,Y/b]"
            ]
        );
        assert_eq!(next, 0);
        let fact_like = &p.rules()[5];
        let sigma = Substitution::new().with("N", Term::Int(0));
        assert_eq!(r_extensions(fact_like, &sigma, &prof, &mut next), vec![sigma]);
    }

    #[test]
    fn verdicts() {
        assert!(check(EX6, "r(f(b),f(f(b)))"));
        assert!(check(EX5, "fct(a,s(s(0)))"));
        assert!(!check(EX1, "r(a,b)"));
        assert!(!check(EX1, "r(b,f(b))"));
        assert!(check(EX1, "r(f(b),f(f(b)))"));
    }

    #[test]
    fn contradictory_input_is_true() {
        let p = parse_program("p(a).").unwrap();
        let a = parse_atom("p(a)").unwrap();
        let s = SignedPair::new([a.clone()].into_iter().collect(), [a].into_iter().collect());
        assert!(is_forbidden(&p, &s, ForbiddenBudget::default()));
    }

    #[test]
    fn budget_exhaustion_is_false() {
        let p = parse_program(EX6).unwrap();
        let s = SignedPair::positive([parse_atom("r(f(b),f(f(b)))").unwrap()]);
        let tight = ForbiddenBudget {
            max_calls: 1,
            ..ForbiddenBudget::default()
        };
        let run = Session::new(&p, tight).run(&s);
        assert!(!run.verdict);
        assert!(run.exhausted);
    }

    #[test]
    fn unconstrained_fresh_escapes() {
        // q($c0) could be derived from any p-fact image; the check must give up.
        let p = parse_program("p(a). q(X) :- p(X), not r(X). r(X) :- q(X).").unwrap();
        assert!(!check("p(a). q(X) :- p(X), not r(X). r(X) :- q(X).", "p(a)"));
        let s = SignedPair::positive([Atom::new("q", vec![Term::Fresh(0)])]);
        let run = is_forbidden_traced(&p, &s, ForbiddenBudget::default());
        assert!(run.trace.iter().any(|e| matches!(e, TraceEvent::Escape { .. })));
    }

    #[test]
    fn sums_in_heads_unify() {
        let text = "p(0). q(N+1) :- p(N).";
        assert!(check(text, "q(5)"));
        assert!(!check(text, "q(1)"));
        assert!(check("n(0). n(N+1) :- n(N), N < 2. :- n(2).", "n(0)"));
    }

    #[test]
    fn oracle_caches() {
        let p = parse_program(EX6).unwrap();
        let mut c = ForbiddenChecker::new(&p, ForbiddenBudget::default());
        let a = parse_atom("r(f(b),f(f(b)))").unwrap();
        assert!(c.is_forbidden(&a));
        assert!(c.is_forbidden(&a));
        assert_eq!(c.checks, 1);
        assert_eq!(c.forbidden_atoms().count(), 1);
    }
}
