//! Substitutions, interpretations, and rule instantiation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::syntax::{write_list, Atom, Program, Rule, Symbol, Term};

/// Partial map from variables to ground terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Symbol, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn get(&self, var: &Symbol) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: Symbol, value: Term) {
        self.0.insert(var, value);
    }

    pub fn with(mut self, var: &str, value: Term) -> Self {
        self.insert(Symbol::new(var), value);
        self
    }

    pub fn contains(&self, var: &Symbol) -> bool {
        self.0.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops bindings for variables outside `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Symbol>) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Func(f, args) => Term::Func(
                f.clone(),
                args.iter().map(|a| self.apply_term(a)).collect::<Vec<_>>().into(),
            ),
            Term::Add(l, r) => Term::add(self.apply_term(l), self.apply_term(r)),
            _ => t.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_rule(&self, r: &Rule) -> Rule {
        Rule {
            head: r.head.as_ref().map(|h| self.apply_atom(h)),
            pos: r.pos.iter().map(|a| self.apply_atom(a)).collect(),
            neg: r.neg.iter().map(|a| self.apply_atom(a)).collect(),
            builtins: r
                .builtins
                .iter()
                .map(|b| crate::syntax::Builtin {
                    op: b.op,
                    left: self.apply_term(&b.left),
                    right: self.apply_term(&b.right),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        write_list(f, self.0.iter().map(|(k, v)| format!("{k}/{v}")))?;
        f.write_str("]")
    }
}

/// A variable-free rule; builtins have been evaluated away.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: Option<Atom>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
}

impl GroundRule {
    pub fn fact(head: Atom) -> Self {
        GroundRule {
            head: Some(head),
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head.iter().chain(&self.pos).chain(&self.neg)
    }

    /// Satisfaction: `(H ∪ B⁻) ∩ I ≠ ∅` or `B⁺ \ I ≠ ∅`.
    pub fn is_satisfied_by(&self, i: &Interpretation) -> bool {
        self.head.iter().chain(&self.neg).any(|a| i.contains(a))
            || self.pos.iter().any(|a| !i.contains(a))
    }

    pub fn to_rule(&self) -> Rule {
        Rule {
            head: self.head.clone(),
            pos: self.pos.clone(),
            neg: self.neg.clone(),
            builtins: Vec::new(),
        }
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_rule(), f)
    }
}

impl Serialize for GroundRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite set of ground atoms, ordered for deterministic output.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation(BTreeSet<Atom>);

impl Interpretation {
    pub fn new() -> Self {
        Interpretation(BTreeSet::new())
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    pub fn insert(&mut self, a: Atom) -> bool {
        self.0.insert(a)
    }

    pub fn remove(&mut self, a: &Atom) -> bool {
        self.0.remove(a)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn as_set(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersects(&self, other: &Interpretation) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().any(|a| large.contains(a))
    }

    pub fn intersection(&self, other: &Interpretation) -> Interpretation {
        Interpretation(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn union(&self, other: &Interpretation) -> Interpretation {
        Interpretation(self.0.union(&other.0).cloned().collect())
    }

    /// All atoms of one predicate.
    pub fn with_predicate<'a>(&'a self, predicate: &'a Symbol) -> impl Iterator<Item = &'a Atom> {
        self.0
            .range((Bound::Included(Atom::lower_bound(predicate)), Bound::Unbounded))
            .take_while(move |a| &a.predicate == predicate)
    }

    /// Atoms of one predicate whose first argument is `first`.
    pub fn with_first_arg<'a>(&'a self, predicate: &'a Symbol, first: &'a Term) -> impl Iterator<Item = &'a Atom> {
        let start = Atom {
            predicate: predicate.clone(),
            args: vec![first.clone()],
        };
        self.0
            .range((Bound::Included(start), Bound::Unbounded))
            .take_while(move |a| &a.predicate == predicate && a.args.first() == Some(first))
    }

    /// Every subterm of every argument of every atom.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            a.collect_subterms(&mut out);
        }
        out
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

impl Extend<Atom> for Interpretation {
    fn extend<I: IntoIterator<Item = Atom>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl IntoIterator for Interpretation {
    type Item = Atom;
    type IntoIter = std::collections::btree_set::IntoIter<Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Interpretation {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Interpretation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|a| a.to_string()))
    }
}

/// Cardinality caps for grounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GroundLimits {
    pub max_rules: usize,
    pub max_terms: usize,
}

impl Default for GroundLimits {
    fn default() -> Self {
        GroundLimits {
            max_rules: 1_000_000,
            max_terms: 100_000,
        }
    }
}

/// Ground terms over the program's constants and function symbols with
/// nesting depth at most `depth`.
pub fn herbrand_terms(p: &Program, depth: usize, limits: &GroundLimits) -> Result<BTreeSet<Term>> {
    let mut terms: BTreeSet<Term> = p.constants().clone();
    for _ in 0..depth {
        let mut next = terms.clone();
        for (f, &arity) in p.functions() {
            let pool: Vec<&Term> = terms.iter().collect();
            let mut idx = vec![0usize; arity];
            if arity > 0 && pool.is_empty() {
                continue;
            }
            loop {
                let args: Vec<Term> = idx.iter().map(|&i| pool[i].clone()).collect();
                next.insert(Term::Func(f.clone(), args.into()));
                if next.len() > limits.max_terms {
                    return Err(Error::ResourceExceeded(format!(
                        "more than {} terms at depth {depth}",
                        limits.max_terms
                    )));
                }
                if !advance(&mut idx, pool.len()) {
                    break;
                }
            }
        }
        if next.len() == terms.len() {
            break;
        }
        terms = next;
    }
    Ok(terms)
}

/// Odometer step over `idx` with digits in `0..base`; false after the last combination.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Applies `sigma` to the whole rule, evaluates sums and builtins, and
/// returns the ground instance if it exists.
pub fn instantiate(rule: &Rule, sigma: &Substitution) -> Option<GroundRule> {
    let ground = |a: &Atom| -> Option<Atom> {
        let a = sigma.apply_atom(a).evaluate()?;
        a.is_ground().then_some(a)
    };
    for b in &rule.builtins {
        let b = crate::syntax::Builtin {
            op: b.op,
            left: sigma.apply_term(&b.left),
            right: sigma.apply_term(&b.right),
        };
        if b.evaluate() != Some(true) {
            return None;
        }
    }
    Some(GroundRule {
        head: match &rule.head {
            Some(h) => Some(ground(h)?),
            None => None,
        },
        pos: rule.pos.iter().map(ground).collect::<Option<_>>()?,
        neg: rule.neg.iter().map(ground).collect::<Option<_>>()?,
    })
}

/// Matches `pattern` against the ground `value`, extending `sigma`.
///
/// Sums whose operands are not yet bound are pushed to `deferred`.
pub(crate) fn match_term(
    pattern: &Term,
    value: &Term,
    sigma: &mut Substitution,
    deferred: &mut Vec<(Term, Term)>,
) -> bool {
    match pattern {
        Term::Var(v) => match sigma.get(v) {
            Some(bound) => bound == value,
            None => {
                sigma.insert(v.clone(), value.clone());
                true
            }
        },
        Term::Const(_) | Term::Int(_) | Term::Fresh(_) => pattern == value,
        Term::Func(f, args) => match value {
            Term::Func(g, vals) if f == g && args.len() == vals.len() => args
                .iter()
                .zip(vals.iter())
                .all(|(p, v)| match_term(p, v, sigma, deferred)),
            _ => false,
        },
        Term::Add(l, r) => {
            let applied = sigma.apply_term(pattern);
            if applied.is_ground() {
                return applied.evaluate().as_ref() == Some(value);
            }
            let Term::Int(k) = value else { return false };
            let as_int = |t: &Term| match sigma.apply_term(t).evaluate() {
                Some(Term::Int(c)) => Some(c),
                _ => None,
            };
            if let Some(c) = as_int(r) {
                match k.checked_sub(c) {
                    Some(d) => match_term(l, &Term::Int(d), sigma, deferred),
                    None => false,
                }
            } else if let Some(c) = as_int(l) {
                match k.checked_sub(c) {
                    Some(d) => match_term(r, &Term::Int(d), sigma, deferred),
                    None => false,
                }
            } else {
                deferred.push((pattern.clone(), value.clone()));
                true
            }
        }
    }
}

/// Matches a non-ground atom against a ground one.
pub(crate) fn match_atom(
    pattern: &Atom,
    value: &Atom,
    sigma: &mut Substitution,
    deferred: &mut Vec<(Term, Term)>,
) -> bool {
    pattern.predicate == value.predicate
        && pattern.args.len() == value.args.len()
        && pattern
            .args
            .iter()
            .zip(&value.args)
            .all(|(p, v)| match_term(p, v, sigma, deferred))
}

/// Deferred sums that are now ground must evaluate to their matched value;
/// the still-open ones are kept.
fn settle(sigma: &Substitution, deferred: &[(Term, Term)]) -> Option<Vec<(Term, Term)>> {
    let mut open = Vec::new();
    for (p, v) in deferred {
        let applied = sigma.apply_term(p);
        if applied.is_ground() {
            if applied.evaluate().as_ref() != Some(v) {
                return None;
            }
        } else {
            open.push((p.clone(), v.clone()));
        }
    }
    Some(open)
}

/// All extensions `σ ⊇ start` with `patterns·σ ⊆ interp` (up to sums whose
/// operands stay unbound, which are left for the caller to check).
pub fn match_atoms(
    patterns: &[Atom],
    interp: &Interpretation,
    start: &Substitution,
) -> Vec<Substitution> {
    let mut out = Vec::new();
    let mut done = vec![false; patterns.len()];
    join(patterns, interp, start.clone(), Vec::new(), &mut done, &mut out);
    out.sort();
    out.dedup();
    out
}

fn join(
    patterns: &[Atom],
    interp: &Interpretation,
    sigma: Substitution,
    deferred: Vec<(Term, Term)>,
    done: &mut [bool],
    out: &mut Vec<Substitution>,
) {
    // Next pattern: the one with the most already-bound variables.
    let next = (0..patterns.len()).filter(|&i| !done[i]).max_by_key(|&i| {
        let mut vars = BTreeSet::new();
        patterns[i].collect_vars(&mut vars);
        let bound = vars.iter().filter(|v| sigma.contains(v)).count();
        (bound * 2 + usize::from(bound == vars.len()), usize::MAX - i)
    });
    let Some(i) = next else {
        if settle(&sigma, &deferred).is_some() {
            out.push(sigma);
        }
        return;
    };
    done[i] = true;
    let pattern = sigma.apply_atom(&patterns[i]);
    if pattern.is_ground() {
        if let Some(a) = pattern.evaluate() {
            if interp.contains(&a) {
                join(patterns, interp, sigma, deferred, done, out);
            }
        }
    } else {
        let first = pattern.args.first().filter(|t| t.is_ground()).and_then(Term::evaluate);
        let candidates: Box<dyn Iterator<Item = &Atom>> = match &first {
            Some(t) => Box::new(interp.with_first_arg(&pattern.predicate, t)),
            None => Box::new(interp.with_predicate(&pattern.predicate)),
        };
        for cand in candidates {
            let mut s = sigma.clone();
            let mut d = deferred.clone();
            if match_atom(&pattern, cand, &mut s, &mut d) {
                if let Some(d) = settle(&s, &d) {
                    join(patterns, interp, s, d, done, out);
                }
            }
        }
    }
    done[i] = false;
}

/// Ground substitutions `σ` over the rule's variables with `B⁺σ ⊆ i`, filtered
/// by the builtins.
pub fn match_positive_body(rule: &Rule, i: &Interpretation) -> Vec<Substitution> {
    match_atoms(&rule.pos, i, &Substitution::new())
        .into_iter()
        .filter(|s| instantiate(rule, s).is_some())
        .collect()
}

/// Every ground instance of a rule of `p` whose positive body lies in `i`.
pub fn instances_within(p: &Program, i: &Interpretation) -> Vec<GroundRule> {
    let mut out: BTreeSet<GroundRule> = BTreeSet::new();
    for rule in p.rules() {
        for s in match_atoms(&rule.pos, i, &Substitution::new()) {
            if let Some(g) = instantiate(rule, &s) {
                out.insert(g);
            }
        }
    }
    out.into_iter().collect()
}

/// `Ground(P, T)`: all instances of all rules with variables ranging over `terms`.
pub fn ground_with_terms(
    p: &Program,
    terms: &BTreeSet<Term>,
    limits: &GroundLimits,
) -> Result<Vec<GroundRule>> {
    let pool: Vec<&Term> = terms.iter().collect();
    let mut out: BTreeSet<GroundRule> = BTreeSet::new();
    for rule in p.rules() {
        let vars: Vec<Symbol> = rule.vars().into_iter().collect();
        if !vars.is_empty() && pool.is_empty() {
            continue;
        }
        let combos = (pool.len() as f64).powi(vars.len() as i32);
        if combos > 10.0 * limits.max_rules as f64 {
            return Err(Error::ResourceExceeded(format!(
                "rule `{rule}` has {combos:.0} instances over {} terms",
                pool.len()
            )));
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut s = Substitution::new();
            for (v, &k) in vars.iter().zip(&idx) {
                s.insert(v.clone(), pool[k].clone());
            }
            if let Some(g) = instantiate(rule, &s) {
                out.insert(g);
                if out.len() > limits.max_rules {
                    return Err(Error::ResourceExceeded(format!(
                        "more than {} ground rules",
                        limits.max_rules
                    )));
                }
            }
            if !advance(&mut idx, pool.len()) {
                break;
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// `Active_I(P)`: ground instances violated by `i`.
pub fn active(p: &Program, i: &Interpretation) -> Vec<GroundRule> {
    instances_within(p, i)
        .into_iter()
        .filter(|g| !g.head.iter().chain(&g.neg).any(|a| i.contains(a)))
        .collect()
}
