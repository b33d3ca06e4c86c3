//! Answer sets of finite ground programs.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{GroundRule, Interpretation};
use crate::syntax::Atom;

/// Stage numbers witnessing that every atom of an interpretation is proven.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ordering(BTreeMap<Atom, usize>);

impl Ordering {
    pub fn get(&self, a: &Atom) -> Option<usize> {
        self.0.get(a).copied()
    }

    pub fn insert(&mut self, a: Atom, stage: usize) {
        self.0.insert(a, stage);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &usize)> {
        self.0.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SolveBudget {
    /// Search nodes (propagation rounds after a decision) before giving up.
    pub max_nodes: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_nodes: 1_000_000,
        }
    }
}

pub fn is_model(g: &[GroundRule], i: &Interpretation) -> bool {
    g.iter().all(|r| r.is_satisfied_by(i))
}

/// Least fixpoint of the rules with a head in `i` and negative body disjoint
/// from `i`, recording the stage at which each atom appears.
fn reduct_stages(g: &[GroundRule], i: &Interpretation) -> Ordering {
    let usable: Vec<&GroundRule> = g
        .iter()
        .filter(|r| matches!(&r.head, Some(h) if i.contains(h)))
        .filter(|r| !r.neg.iter().any(|a| i.contains(a)))
        .collect();
    let mut stages = Ordering::default();
    let mut stage = 0;
    loop {
        let fresh: Vec<Atom> = usable
            .iter()
            .filter(|r| r.pos.iter().all(|a| stages.0.contains_key(a)))
            .filter_map(|r| r.head.clone())
            .filter(|h| !stages.0.contains_key(h))
            .collect();
        if fresh.is_empty() {
            return stages;
        }
        for h in fresh {
            stages.0.entry(h).or_insert(stage);
        }
        stage += 1;
    }
}

/// The ordering witness if `i` is an answer set of `g`.
pub fn answer_set_witness(g: &[GroundRule], i: &Interpretation) -> Option<Ordering> {
    if !is_model(g, i) {
        return None;
    }
    let stages = reduct_stages(g, i);
    (stages.len() == i.len()).then_some(stages)
}

pub fn is_answer_set(g: &[GroundRule], i: &Interpretation) -> bool {
    answer_set_witness(g, i).is_some()
}

/// Direct check of the proven-atom conditions (i)-(iii) for every atom of
/// `i` under `phi`.
pub fn is_proven_by(g: &[GroundRule], i: &Interpretation, phi: &Ordering) -> bool {
    i.iter().all(|a| {
        let Some(pa) = phi.get(a) else { return false };
        g.iter().any(|r| {
            r.head.as_ref() == Some(a)
                && r.pos.iter().all(|b| i.contains(b))
                && !r.neg.iter().any(|b| i.contains(b))
                && r.head.iter().filter(|h| *h != a).all(|h| !i.contains(h))
                && r.pos.iter().all(|b| phi.get(b).is_some_and(|pb| pb < pa))
        })
    })
}

#[derive(Debug)]
struct IRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

const UNKNOWN: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

struct Solver<'a> {
    program: &'a [GroundRule],
    atoms: Vec<Atom>,
    rules: Vec<IRule>,
    heads_of: Vec<Vec<usize>>,
    pos_occ: Vec<Vec<usize>>,
    nodes: usize,
    budget: SolveBudget,
}

impl<'a> Solver<'a> {
    fn new(program: &'a [GroundRule], budget: SolveBudget) -> Self {
        let mut atoms: Vec<Atom> = program.iter().flat_map(|r| r.atoms().cloned()).collect();
        atoms.sort();
        atoms.dedup();
        let index: HashMap<&Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let ids = |v: &[Atom]| {
            let mut ids: Vec<usize> = v.iter().map(|a| index[a]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        };
        let rules: Vec<IRule> = program
            .iter()
            .map(|r| IRule {
                head: r.head.as_ref().map(|h| index[h]),
                pos: ids(&r.pos),
                neg: ids(&r.neg),
            })
            .collect();
        let mut heads_of = vec![Vec::new(); atoms.len()];
        let mut pos_occ = vec![Vec::new(); atoms.len()];
        for (k, r) in rules.iter().enumerate() {
            if let Some(h) = r.head {
                heads_of[h].push(k);
            }
            for &a in &r.pos {
                pos_occ[a].push(k);
            }
        }
        Solver {
            program,
            atoms,
            rules,
            heads_of,
            pos_occ,
            nodes: 0,
            budget,
        }
    }

    fn body_false(&self, r: &IRule, val: &[i8]) -> bool {
        r.pos.iter().any(|&a| val[a] == FALSE) || r.neg.iter().any(|&a| val[a] == TRUE)
    }

    fn set(val: &mut [i8], a: usize, v: i8, changed: &mut bool) -> bool {
        if val[a] == UNKNOWN {
            val[a] = v;
            *changed = true;
            true
        } else {
            val[a] == v
        }
    }

    /// Atoms derivable from rules that are not yet blocked.
    fn possibly_true(&self, val: &[i8]) -> Vec<bool> {
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos.len()).collect();
        let usable = |r: &IRule| {
            matches!(r.head, Some(h) if val[h] != FALSE) && !r.neg.iter().any(|&a| val[a] == TRUE)
        };
        let mut reached = vec![false; self.atoms.len()];
        let mut queue: Vec<usize> = Vec::new();
        for (k, r) in self.rules.iter().enumerate() {
            if missing[k] == 0 && usable(r) {
                let h = r.head.unwrap();
                if !reached[h] {
                    reached[h] = true;
                    queue.push(h);
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &k in &self.pos_occ[a] {
                missing[k] -= 1;
                let r = &self.rules[k];
                if missing[k] == 0 && usable(r) {
                    let h = r.head.unwrap();
                    if !reached[h] {
                        reached[h] = true;
                        queue.push(h);
                    }
                }
            }
        }
        reached
    }

    /// Returns false on conflict.
    fn propagate(&self, val: &mut [i8]) -> bool {
        loop {
            let mut changed = false;
            for r in &self.rules {
                if self.body_false(r, val) {
                    continue;
                }
                let mut unknown = r
                    .pos
                    .iter()
                    .map(|&a| (a, TRUE))
                    .chain(r.neg.iter().map(|&a| (a, FALSE)))
                    .filter(|&(a, _)| val[a] == UNKNOWN);
                let first = unknown.next();
                let second = unknown.next();
                match (first, second) {
                    (None, _) => match r.head {
                        None => return false,
                        Some(h) => {
                            if !Self::set(val, h, TRUE, &mut changed) {
                                return false;
                            }
                        }
                    },
                    (Some((a, makes_true)), None) => {
                        if r.head.map_or(true, |h| val[h] == FALSE)
                            && !Self::set(val, a, -makes_true, &mut changed)
                        {
                            return false;
                        }
                    }
                    _ => {}
                }
            }
            for a in 0..self.atoms.len() {
                if val[a] == FALSE {
                    continue;
                }
                let mut live = self.heads_of[a]
                    .iter()
                    .filter(|&&k| !self.body_false(&self.rules[k], val));
                let first = live.next();
                let second = live.next();
                match (first, second) {
                    (None, _) => {
                        if !Self::set(val, a, FALSE, &mut changed) {
                            return false;
                        }
                    }
                    (Some(&k), None) if val[a] == TRUE => {
                        let r = &self.rules[k];
                        for &b in &r.pos {
                            if !Self::set(val, b, TRUE, &mut changed) {
                                return false;
                            }
                        }
                        for &b in &r.neg {
                            if !Self::set(val, b, FALSE, &mut changed) {
                                return false;
                            }
                        }
                    }
                    _ => {}
                }
            }
            if !changed {
                let reach = self.possibly_true(val);
                for a in 0..self.atoms.len() {
                    if !reach[a] && !Self::set(val, a, FALSE, &mut changed) {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(
        &mut self,
        mut val: Vec<i8>,
        visit: &mut dyn FnMut(Interpretation) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Error::ResourceExceeded(format!(
                "answer-set search exceeded {} nodes",
                self.budget.max_nodes
            )));
        }
        if !self.propagate(&mut val) {
            return Ok(ControlFlow::Continue(()));
        }
        match val.iter().position(|&v| v == UNKNOWN) {
            None => {
                let i: Interpretation = (0..self.atoms.len())
                    .filter(|&a| val[a] == TRUE)
                    .map(|a| self.atoms[a].clone())
                    .collect();
                if is_answer_set(self.program, &i) {
                    return Ok(visit(i));
                }
                Ok(ControlFlow::Continue(()))
            }
            Some(a) => {
                for v in [TRUE, FALSE] {
                    let mut next = val.clone();
                    next[a] = v;
                    if self.search(next, visit)?.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
        }
    }
}

/// Calls `visit` on each answer set in a deterministic order until it breaks.
pub fn for_each_answer_set(
    g: &[GroundRule],
    budget: SolveBudget,
    visit: &mut dyn FnMut(Interpretation) -> ControlFlow<()>,
) -> Result<()> {
    let mut solver = Solver::new(g, budget);
    let val = vec![UNKNOWN; solver.atoms.len()];
    let _ = solver.search(val, visit)?;
    Ok(())
}

pub fn enumerate_answer_sets(g: &[GroundRule], limit: Option<usize>) -> Result<Vec<Interpretation>> {
    enumerate_with_budget(g, limit, SolveBudget::default())
}

pub fn enumerate_with_budget(
    g: &[GroundRule],
    limit: Option<usize>,
    budget: SolveBudget,
) -> Result<Vec<Interpretation>> {
    let mut out = Vec::new();
    if limit == Some(0) {
        return Ok(out);
    }
    for_each_answer_set(g, budget, &mut |i| {
        out.push(i);
        if limit.is_some_and(|l| out.len() >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_with_terms, herbrand_terms, GroundLimits};
    use crate::syntax::{parse_atom, parse_program};

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| parse_atom(a).unwrap()).collect()
    }

    fn ground(text: &str, depth: usize) -> Vec<GroundRule> {
        let p = parse_program(text).unwrap();
        let lim = GroundLimits::default();
        ground_with_terms(&p, &herbrand_terms(&p, depth, &lim).unwrap(), &lim).unwrap()
    }

    const EX1: &str = "r(Y, f(Y)) :- r(X, Y), not stop(X).\nstop(Y) :- r(X, Y).\nr(a, b).";

    #[test]
    fn stop_chain_unique_answer_set() {
        let g = ground(EX1, 2);
        let expected = interp(&["r(a,b)", "stop(b)", "r(b,f(b))", "stop(f(b))"]);
        assert!(is_model(&g, &expected));
        let phi = answer_set_witness(&g, &expected).unwrap();
        assert!(is_proven_by(&g, &expected, &phi));
        assert_eq!(enumerate_answer_sets(&g, None).unwrap(), vec![expected]);
    }

    #[test]
    fn trivial_models() {
        let fact = ground("p.", 0);
        assert!(!is_model(&fact, &Interpretation::new()));
        let rule = ground("p :- q.", 0);
        assert!(is_model(&rule, &Interpretation::new()));
    }

    #[test]
    fn self_support_is_unfounded() {
        let g = ground("p :- p.", 0);
        assert!(!is_answer_set(&g, &interp(&["p"])));
        assert_eq!(enumerate_answer_sets(&g, None).unwrap(), vec![Interpretation::new()]);
    }

    #[test]
    fn even_loop_has_two() {
        let g = ground("p :- not q. q :- not p.", 0);
        assert_eq!(
            enumerate_answer_sets(&g, None).unwrap(),
            vec![interp(&["p"]), interp(&["q"])]
        );
        assert_eq!(enumerate_answer_sets(&g, Some(1)).unwrap().len(), 1);
    }

    #[test]
    fn odd_loop_has_none() {
        let g = ground("p :- not p.", 0);
        assert!(enumerate_answer_sets(&g, None).unwrap().is_empty());
    }

    #[test]
    fn next_chain_depth_one() {
        let text = "next(Y,f(Y)) :- next(X,Y), not last(Y). \
                    last(Y) :- next(X,Y), not next(Y,f(Y)). \
                    done :- last(Y). :- not done. next(c,d).";
        let g = ground(text, 1);
        assert!(is_answer_set(&g, &interp(&["next(c,d)", "last(d)", "done"])));
    }

    #[test]
    fn node_budget() {
        let g = ground("p :- not q. q :- not p. r :- not s. s :- not r.", 0);
        let tight = SolveBudget { max_nodes: 2 };
        assert!(matches!(
            enumerate_with_budget(&g, None, tight),
            Err(Error::ResourceExceeded(_))
        ));
    }
}
