use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::{Atom, Symbol, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

/// A comparison literal. Builtins filter instances during grounding and are
/// never stored in interpretations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Builtin {
    pub op: CmpOp,
    pub left: Term,
    pub right: Term,
}

impl Builtin {
    /// Truth value on ground operands.
    ///
    /// `None` when an operand is not ground, a sum does not evaluate, or a
    /// fresh constant makes the answer depend on what it stands for.
    pub fn evaluate(&self) -> Option<bool> {
        let l = self.left.evaluate()?;
        let r = self.right.evaluate()?;
        if !l.is_ground() || !r.is_ground() {
            return None;
        }
        if l.contains_fresh() || r.contains_fresh() {
            return match self.op {
                CmpOp::Eq if l == r => Some(true),
                CmpOp::Ne if l == r => Some(false),
                _ => None,
            };
        }
        Some(match self.op {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        })
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        self.left.collect_vars(out);
        self.right.collect_vars(out);
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

/// A normal rule `head :- pos, not neg, builtins.`; no head means constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Option<Atom>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
    pub builtins: Vec<Builtin>,
}

impl Rule {
    pub fn fact(head: Atom) -> Rule {
        Rule {
            head: Some(head),
            pos: Vec::new(),
            neg: Vec::new(),
            builtins: Vec::new(),
        }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        if let Some(h) = &self.head {
            h.collect_vars(&mut out);
        }
        for a in self.pos.iter().chain(&self.neg) {
            a.collect_vars(&mut out);
        }
        for b in &self.builtins {
            b.collect_vars(&mut out);
        }
        out
    }

    /// Variables occurring as (sub)terms of positive body atoms outside of sums.
    pub fn bound_vars(&self) -> BTreeSet<Symbol> {
        fn walk(t: &Term, out: &mut BTreeSet<Symbol>) {
            match t {
                Term::Var(v) => {
                    out.insert(v.clone());
                }
                Term::Func(_, args) => args.iter().for_each(|a| walk(a, out)),
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        for a in &self.pos {
            a.args.iter().for_each(|t| walk(t, &mut out));
        }
        out
    }

    /// First variable without a positive body occurrence, if any.
    pub fn unsafe_var(&self) -> Option<Symbol> {
        let bound = self.bound_vars();
        self.vars().into_iter().find(|v| !bound.contains(v))
    }

    pub fn head_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        if let Some(h) = &self.head {
            h.collect_vars(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
        }
        let body: Vec<String> = self
            .pos
            .iter()
            .map(|a| a.to_string())
            .chain(self.neg.iter().map(|a| format!("not {a}")))
            .chain(self.builtins.iter().map(|b| b.to_string()))
            .collect();
        if !body.is_empty() || self.head.is_none() {
            if self.head.is_some() {
                f.write_str(" ")?;
            }
            f.write_str(":- ")?;
            write_list_sep(f, &body, ", ")?;
        }
        f.write_str(".")
    }
}

fn write_list_sep(f: &mut fmt::Formatter<'_>, items: &[String], sep: &str) -> fmt::Result {
    for (i, s) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        f.write_str(s)?;
    }
    Ok(())
}

/// A safe normal program together with its symbol table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    predicates: BTreeMap<Symbol, usize>,
    functions: BTreeMap<Symbol, usize>,
    constants: BTreeSet<Term>,
}

impl Program {
    /// Builds a program, checking arity consistency and safety.
    pub fn new(rules: Vec<Rule>) -> Result<Program> {
        let mut predicates = BTreeMap::new();
        let mut functions = BTreeMap::new();
        let mut constants = BTreeSet::new();

        fn record(
            table: &mut BTreeMap<Symbol, usize>,
            name: &Symbol,
            arity: usize,
        ) -> Result<()> {
            match table.get(name) {
                Some(&expected) if expected != arity => Err(Error::ArityMismatch {
                    symbol: name.to_string(),
                    expected,
                    found: arity,
                }),
                Some(_) => Ok(()),
                None => {
                    table.insert(name.clone(), arity);
                    Ok(())
                }
            }
        }

        fn scan_term(
            t: &Term,
            functions: &mut BTreeMap<Symbol, usize>,
            constants: &mut BTreeSet<Term>,
        ) -> Result<()> {
            match t {
                Term::Const(_) | Term::Int(_) => {
                    constants.insert(t.clone());
                }
                Term::Func(name, args) => {
                    record(functions, name, args.len())?;
                    for a in args.iter() {
                        scan_term(a, functions, constants)?;
                    }
                }
                Term::Add(l, r) => {
                    scan_term(l, functions, constants)?;
                    scan_term(r, functions, constants)?;
                }
                Term::Var(_) | Term::Fresh(_) => {}
            }
            Ok(())
        }

        for (idx, rule) in rules.iter().enumerate() {
            let atoms = rule.head.iter().chain(&rule.pos).chain(&rule.neg);
            for atom in atoms {
                record(&mut predicates, &atom.predicate, atom.args.len())?;
                for t in &atom.args {
                    scan_term(t, &mut functions, &mut constants)?;
                }
            }
            for b in &rule.builtins {
                scan_term(&b.left, &mut functions, &mut constants)?;
                scan_term(&b.right, &mut functions, &mut constants)?;
            }
            if let Some(v) = rule.unsafe_var() {
                return Err(Error::UnsafeRule {
                    rule: idx,
                    variable: v.to_string(),
                });
            }
        }

        Ok(Program {
            rules,
            predicates,
            functions,
            constants,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn predicates(&self) -> &BTreeMap<Symbol, usize> {
        &self.predicates
    }

    pub fn functions(&self) -> &BTreeMap<Symbol, usize> {
        &self.functions
    }

    /// Symbolic and integer constants occurring in the rules.
    pub fn constants(&self) -> &BTreeSet<Term> {
        &self.constants
    }

    /// Every ground term occurring (as a subterm) somewhere in the program.
    pub fn ground_terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        let mut push = |t: &Term| {
            let mut subs = BTreeSet::new();
            t.collect_subterms(&mut subs);
            out.extend(subs.into_iter().filter(|s| s.is_ground() && !matches!(s, Term::Add(..))));
        };
        for rule in &self.rules {
            for atom in rule.head.iter().chain(&rule.pos).chain(&rule.neg) {
                atom.args.iter().for_each(&mut push);
            }
            for b in &rule.builtins {
                push(&b.left);
                push(&b.right);
            }
        }
        out
    }

    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        self.rules
            .iter()
            .filter(|r| r.pos.is_empty() && r.neg.is_empty() && r.builtins.is_empty())
            .filter_map(|r| r.head.as_ref())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str, args: &[&str]) -> Atom {
        Atom::new(
            p,
            args.iter()
                .map(|a| {
                    if a.starts_with(char::is_uppercase) {
                        Term::var(a)
                    } else {
                        Term::constant(a)
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn unsafe_negative_variable_rejected() {
        let rule = Rule {
            head: Some(atom("p", &["X"])),
            pos: vec![],
            neg: vec![atom("q", &["X"])],
            builtins: vec![],
        };
        assert_eq!(
            Program::new(vec![rule]),
            Err(Error::UnsafeRule {
                rule: 0,
                variable: "X".into()
            })
        );
    }

    #[test]
    fn arity_must_be_consistent() {
        let rules = vec![Rule::fact(atom("p", &["a"])), Rule::fact(atom("p", &["a", "b"]))];
        assert!(matches!(
            Program::new(rules),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn builtin_with_fresh_is_undetermined() {
        let b = Builtin {
            op: CmpOp::Ne,
            left: Term::Fresh(0),
            right: Term::constant("a"),
        };
        assert_eq!(b.evaluate(), None);
        let same = Builtin {
            op: CmpOp::Ne,
            left: Term::Fresh(0),
            right: Term::Fresh(0),
        };
        assert_eq!(same.evaluate(), Some(false));
        let lt = Builtin {
            op: CmpOp::Lt,
            left: Term::Int(2),
            right: Term::add(Term::Int(1), Term::Int(5)),
        };
        assert_eq!(lt.evaluate(), Some(true));
    }

    #[test]
    fn rule_display() {
        let r = Rule {
            head: None,
            pos: vec![atom("p", &["X"])],
            neg: vec![atom("q", &["X"])],
            builtins: vec![],
        };
        assert_eq!(r.to_string(), ":- p(X), not q(X).");
        assert_eq!(Rule::fact(atom("p", &["a"])).to_string(), "p(a).");
    }
}
