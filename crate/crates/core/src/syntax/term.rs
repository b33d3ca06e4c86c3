use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned-ish name of a predicate, function symbol, constant, or variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A term of the rule language.
///
/// Ground terms are totally ordered: constants < integers < fresh constants <
/// functional terms. Variables and unevaluated sums sort after all ground
/// terms; they never appear in interpretations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Symbol),
    Int(i64),
    /// Analysis-only constant, printed as `$c<id>` and never produced by the parser.
    Fresh(u32),
    Func(Symbol, Arc<[Term]>),
    Var(Symbol),
    /// `left + right`, evaluated at grounding time when both sides are integers.
    Add(Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Symbol::new(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn func(name: &str, args: Vec<Term>) -> Term {
        Term::Func(Symbol::new(name), args.into())
    }

    pub fn add(left: Term, right: Term) -> Term {
        Term::Add(Arc::new(left), Arc::new(right))
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Const(_) => 0,
            Term::Int(_) => 1,
            Term::Fresh(_) => 2,
            Term::Func(..) => 3,
            Term::Var(_) => 4,
            Term::Add(..) => 5,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Add(l, r) => l.is_ground() && r.is_ground(),
            _ => true,
        }
    }

    /// Constants in the wide sense: symbolic, integer, or fresh.
    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Int(_) | Term::Fresh(_))
    }

    pub fn is_functional(&self) -> bool {
        matches!(self, Term::Func(..))
    }

    pub fn contains_fresh(&self) -> bool {
        match self {
            Term::Fresh(_) => true,
            Term::Func(_, args) => args.iter().any(Term::contains_fresh),
            Term::Add(l, r) => l.contains_fresh() || r.contains_fresh(),
            _ => false,
        }
    }

    pub fn contains_add(&self) -> bool {
        match self {
            Term::Add(..) => true,
            Term::Func(_, args) => args.iter().any(Term::contains_add),
            _ => false,
        }
    }

    /// Nesting depth of function symbols; constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Add(l, r) => l.depth().max(r.depth()),
            _ => 0,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Add(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Adds this term and all of its subterms.
    pub fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        if let Term::Func(_, args) = self {
            args.iter().for_each(|a| a.collect_subterms(out));
        }
        if let Term::Add(l, r) = self {
            l.collect_subterms(out);
            r.collect_subterms(out);
        }
        out.insert(self.clone());
    }

    pub fn collect_fresh(&self, out: &mut BTreeSet<u32>) {
        match self {
            Term::Fresh(id) => {
                out.insert(*id);
            }
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_fresh(out)),
            Term::Add(l, r) => {
                l.collect_fresh(out);
                r.collect_fresh(out);
            }
            _ => {}
        }
    }

    /// Evaluates every sum whose operands are integers.
    ///
    /// Returns `None` when a ground sum has a non-integer operand; such a
    /// term denotes nothing and instances containing it are discarded.
    pub fn evaluate(&self) -> Option<Term> {
        match self {
            Term::Func(..) if !self.contains_add() => Some(self.clone()),
            Term::Func(f, args) => {
                let args: Option<Vec<Term>> = args.iter().map(Term::evaluate).collect();
                Some(Term::Func(f.clone(), args?.into()))
            }
            Term::Add(l, r) => {
                let (l, r) = (l.evaluate()?, r.evaluate()?);
                match (&l, &r) {
                    (Term::Int(a), Term::Int(b)) => a.checked_add(*b).map(Term::Int),
                    _ if l.is_ground() && r.is_ground() => None,
                    _ => Some(Term::add(l, r)),
                }
            }
            t => Some(t.clone()),
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Const(a), Term::Const(b)) => a.cmp(b),
            (Term::Int(a), Term::Int(b)) => a.cmp(b),
            (Term::Fresh(a), Term::Fresh(b)) => a.cmp(b),
            (Term::Func(f, xs), Term::Func(g, ys)) if Arc::ptr_eq(xs, ys) => f.cmp(g),
            (Term::Func(f, xs), Term::Func(g, ys)) => f
                .cmp(g)
                .then(xs.len().cmp(&ys.len()))
                .then_with(|| xs.iter().cmp(ys.iter())),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Add(a, b), Term::Add(c, d)) => a.cmp(c).then_with(|| b.cmp(d)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => write!(f, "{s}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Fresh(id) => write!(f, "$c{id}"),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args.iter())?;
                f.write_str(")")
            }
            Term::Add(l, r) => write!(f, "{l}+{r}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn write_list<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: impl Iterator<Item = T>,
) -> fmt::Result {
    for (i, item) in items.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// `predicate(args...)`; zero-arity atoms print without parentheses.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom {
            predicate: Symbol::new(predicate),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn contains_fresh(&self) -> bool {
        self.args.iter().any(Term::contains_fresh)
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        self.args.iter().for_each(|t| t.collect_vars(out));
    }

    pub fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        self.args.iter().for_each(|t| t.collect_subterms(out));
    }

    pub fn evaluate(&self) -> Option<Atom> {
        let args: Option<Vec<Term>> = self.args.iter().map(Term::evaluate).collect();
        Some(Atom {
            predicate: self.predicate.clone(),
            args: args?,
        })
    }

    /// Smallest atom of the given predicate under the atom ordering.
    pub(crate) fn lower_bound(predicate: &Symbol) -> Atom {
        Atom {
            predicate: predicate.clone(),
            args: Vec::new(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_list(f, self.args.iter())?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
