use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use crate::error::{Error, Result};
use crate::syntax::{parse_program, Program};

use super::names::encode_name;
use super::spec_lines;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TapeSymbol {
    Zero,
    One,
    Blank,
}

impl TapeSymbol {
    pub const ALL: [TapeSymbol; 3] = [TapeSymbol::Zero, TapeSymbol::One, TapeSymbol::Blank];

    fn parse(s: &str) -> Option<Self> {
        match s {
            "0" => Some(TapeSymbol::Zero),
            "1" => Some(TapeSymbol::One),
            "B" | "b" | "_" => Some(TapeSymbol::Blank),
            _ => None,
        }
    }

    fn predicate(self) -> &'static str {
        match self {
            TapeSymbol::Zero => "s_0",
            TapeSymbol::One => "s_1",
            TapeSymbol::Blank => "s_b",
        }
    }
}

impl fmt::Display for TapeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TapeSymbol::Zero => "0",
            TapeSymbol::One => "1",
            TapeSymbol::Blank => "B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Left,
    Right,
}

/// `⟨Q, δ, q_s, q_a, q_r⟩` over the tape alphabet `{0, 1, B}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringMachine {
    pub states: BTreeSet<String>,
    pub delta: BTreeMap<(String, TapeSymbol), (String, TapeSymbol, Move)>,
    pub start: String,
    pub accept: String,
    pub reject: String,
}

type Transition<'a> = (&'a str, char, &'a str, char, char);

impl TuringMachine {
    /// Builds a machine from `(q, a, r, b, L|R)` transitions; states are
    /// collected from the transitions and the three named states.
    pub fn new(start: &str, accept: &str, reject: &str, transitions: &[Transition<'_>]) -> Result<Self> {
        let mut m = TuringMachine {
            states: [start, accept, reject].iter().map(|s| s.to_string()).collect(),
            delta: BTreeMap::new(),
            start: start.into(),
            accept: accept.into(),
            reject: reject.into(),
        };
        for &(q, a, r, b, d) in transitions {
            let bad = || Error::SpecFormat {
                kind: "tm",
                line: 0,
                message: format!("bad transition ({q}, {a}) -> ({r}, {b}, {d})"),
            };
            let a = TapeSymbol::parse(&a.to_string()).ok_or_else(bad)?;
            let b = TapeSymbol::parse(&b.to_string()).ok_or_else(bad)?;
            let d = match d {
                'L' => Move::Left,
                'R' => Move::Right,
                _ => return Err(bad()),
            };
            m.states.insert(q.into());
            m.states.insert(r.into());
            m.delta.insert((q.into(), a), (r.into(), b, d));
        }
        m.check(0)?;
        Ok(m)
    }

    fn is_final(&self, q: &str) -> bool {
        q == self.accept || q == self.reject
    }

    fn check(&self, line: usize) -> Result<()> {
        let err = |message: String| Error::SpecFormat {
            kind: "tm",
            line,
            message,
        };
        if self.accept == self.reject {
            return Err(err("accept and reject states must differ".into()));
        }
        for q in [&self.start, &self.accept, &self.reject] {
            if !self.states.contains(q) {
                return Err(err(format!("state `{q}` is not declared")));
            }
        }
        for ((q, _), (r, _, _)) in &self.delta {
            if self.is_final(q) {
                return Err(err(format!("final state `{q}` has a transition")));
            }
            for s in [q, r] {
                if !self.states.contains(s) {
                    return Err(err(format!("state `{s}` is not declared")));
                }
            }
        }
        for q in self.states.iter().filter(|q| !self.is_final(q)) {
            for a in TapeSymbol::ALL {
                if !self.delta.contains_key(&(q.clone(), a)) {
                    return Err(err(format!("no transition for ({q}, {a})")));
                }
            }
        }
        Ok(())
    }

    /// Reads `states:`, `start:`, `accept:`, `reject:` and `delta:` lines.
    /// Transitions are written `q a -> r b D`, either after `delta:` on the
    /// same line or on the lines that follow it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut states = None;
        let mut named: BTreeMap<&str, String> = BTreeMap::new();
        let mut delta = BTreeMap::new();
        let mut last = 0;
        for (line, content) in spec_lines(text) {
            last = line;
            let err = |message: String| Error::SpecFormat {
                kind: "tm",
                line,
                message,
            };
            let transition = match content.split_once(':') {
                Some((key, value)) => match key.trim() {
                    "states" => {
                        states = Some(value.split_whitespace().map(str::to_string).collect());
                        continue;
                    }
                    k @ ("start" | "accept" | "reject") => {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        let [q] = parts[..] else {
                            return Err(err(format!("`{k}` must name exactly one state")));
                        };
                        named.insert(k, q.to_string());
                        continue;
                    }
                    "delta" if value.trim().is_empty() => continue,
                    "delta" => value,
                    other => return Err(err(format!("unknown key `{other}`"))),
                },
                None => content,
            };
            let parts: Vec<&str> = transition.split_whitespace().collect();
            let [q, a, "->", r, b, d] = parts[..] else {
                return Err(err(format!("expected `q a -> r b L|R`, found `{}`", transition.trim())));
            };
            let sym = |s: &str| TapeSymbol::parse(s).ok_or_else(|| err(format!("unknown tape symbol `{s}`")));
            let d = match d {
                "L" => Move::Left,
                "R" => Move::Right,
                _ => return Err(err(format!("unknown direction `{d}`"))),
            };
            let key = (q.to_string(), sym(a)?);
            if delta.insert(key, (r.to_string(), sym(b)?, d)).is_some() {
                return Err(err(format!("duplicate transition for ({q}, {a})")));
            }
        }
        let mut take = |k: &str| {
            named.remove(k).ok_or_else(|| Error::SpecFormat {
                kind: "tm",
                line: last,
                message: format!("missing `{k}:` line"),
            })
        };
        let m = TuringMachine {
            states: states.ok_or_else(|| Error::SpecFormat {
                kind: "tm",
                line: last,
                message: "missing `states:` line".into(),
            })?,
            start: take("start")?,
            accept: take("accept")?,
            reject: take("reject")?,
            delta,
        };
        m.check(last)?;
        Ok(m)
    }
}

pub fn parse_word(w: &str) -> Result<Vec<TapeSymbol>> {
    w.chars()
        .map(|c| match c {
            '0' => Ok(TapeSymbol::Zero),
            '1' => Ok(TapeSymbol::One),
            _ => Err(Error::SpecFormat {
                kind: "input word",
                line: 1,
                message: format!("`{c}` is not a binary digit"),
            }),
        })
        .collect()
}

pub fn state_predicate(q: &str) -> String {
    format!("h_{}", encode_name(q))
}

/// `P_M`. Without `fixed_input` the program guesses the input word; with it the
/// word is spelled by ground atoms over the cells `c, r(c), …` and only the
/// blank rule for the last cell is kept from the guessing part.
pub fn tm_to_program(m: &TuringMachine, fixed_input: Option<&[TapeSymbol]>) -> Program {
    let mut s = format!("{}(c).\ninput(c).\n", state_predicate(&m.start));
    match fixed_input {
        None => s.push_str(
            "right(X,r(X)) :- input(X), not last(X).\n\
             last(X) :- input(X), not right(X,r(X)).\n\
             input(r(X)) :- input(X), right(X,r(X)).\n\
             finiteInput :- input(X), last(X).\n\
             :- not finiteInput.\n\
             s_b(X) :- last(X).\n\
             s_0(X) :- input(X), not s_1(X), not s_b(X).\n\
             s_1(X) :- input(X), not s_0(X), not s_b(X).\n",
        ),
        Some(word) => {
            let cell = |i: usize| format!("{}c{}", "r(".repeat(i), ")".repeat(i));
            for (i, a) in word.iter().enumerate() {
                writeln!(s, "{}({}).", a.predicate(), cell(i)).unwrap();
                writeln!(s, "right({},{}).", cell(i), cell(i + 1)).unwrap();
            }
            writeln!(s, "s_b({}).", cell(word.len())).unwrap();
            writeln!(s, "last({}).", cell(word.len())).unwrap();
            s.push_str("s_b(X) :- last(X).\n");
        }
    }
    s.push_str(
        "step(Y,s(Y)) :- right(X,Y), step(X,s(X)).\n\
         step(Y,s(Y)) :- right(Y,X), step(X,s(X)).\n\
         right(s(X),s(Y)) :- step(X,s(X)), right(X,Y).\n\
         right(s(X),r(s(X))) :- step(X,s(X)), last(X).\n\
         last(r(s(X))) :- step(X,s(X)), last(X).\n",
    );
    writeln!(s, "halt :- {}(X).", state_predicate(&m.accept)).unwrap();
    writeln!(s, "halt :- {}(X).", state_predicate(&m.reject)).unwrap();
    s.push_str(":- not halt.\n");
    for q in m.states.iter().filter(|q| !m.is_final(q)) {
        writeln!(s, "step(X,s(X)) :- {}(X).", state_predicate(q)).unwrap();
    }
    for a in TapeSymbol::ALL {
        write!(s, "{}(s(X)) :- ", a.predicate()).unwrap();
        for q in &m.states {
            write!(s, "not {}(X), ", state_predicate(q)).unwrap();
        }
        writeln!(s, "{}(X), step(X,s(X)).", a.predicate()).unwrap();
    }
    for ((q, a), (r, b, d)) in &m.delta {
        let (hq, hr, sa) = (state_predicate(q), state_predicate(r), a.predicate());
        writeln!(s, "{}(s(X)) :- {hq}(X), {sa}(X).", b.predicate()).unwrap();
        match d {
            Move::Left => {
                writeln!(s, "{hr}(Y) :- right(Y,s(X)), {hq}(X), {sa}(X).").unwrap();
                writeln!(s, "notFirst(X) :- right(Y,X), {hq}(X), {sa}(X).").unwrap();
                writeln!(s, "{hr}(s(X)) :- not notFirst(X), {hq}(X), {sa}(X).").unwrap();
            }
            Move::Right => {
                writeln!(s, "{hr}(Y) :- right(s(X),Y), {hq}(X), {sa}(X).").unwrap();
            }
        }
    }
    parse_program(&s).expect("generated machine program is well-formed")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimOutcome {
    Halted {
        state: String,
        steps: usize,
        tape: Vec<TapeSymbol>,
    },
    Running,
}

/// Direct simulation on a one-way infinite tape; moving left on the first cell
/// stays put.
pub fn simulate(m: &TuringMachine, input: &[TapeSymbol], max_steps: usize) -> SimOutcome {
    let mut tape = input.to_vec();
    tape.push(TapeSymbol::Blank);
    let (mut q, mut head) = (m.start.clone(), 0usize);
    for steps in 0..=max_steps {
        if m.is_final(&q) {
            return SimOutcome::Halted { state: q, steps, tape };
        }
        if steps == max_steps {
            break;
        }
        let (r, b, d) = m.delta[&(q.clone(), tape[head])].clone();
        tape[head] = b;
        // The encoding appends one blank cell per step.
        tape.push(TapeSymbol::Blank);
        head = match d {
            Move::Left => head.saturating_sub(1),
            Move::Right => head + 1,
        };
        q = r;
    }
    SimOutcome::Running
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accept_all() -> TuringMachine {
        TuringMachine::new(
            "qs",
            "qa",
            "qr",
            &[("qs", '0', "qa", '0', 'R'), ("qs", '1', "qa", '1', 'R'), ("qs", 'B', "qa", 'B', 'R')],
        )
        .unwrap()
    }

    #[test]
    fn spec_round_trip() {
        let text = "states: qs qa qr\nstart: qs\naccept: qa\nreject: qr\ndelta:\n  qs 0 -> qa 0 R\n  qs 1 -> qa 1 R\ndelta: qs B -> qa B R\n";
        assert_eq!(TuringMachine::parse(text).unwrap(), accept_all());
    }

    #[test]
    fn spec_errors() {
        let partial = "states: qs qa qr\nstart: qs\naccept: qa\nreject: qr\nqs 0 -> qa 0 R\n";
        assert!(TuringMachine::parse(partial).is_err());
        let bad = "states: q\nqs 0 => qa 0 R\n";
        assert!(matches!(TuringMachine::parse(bad), Err(Error::SpecFormat { line: 2, .. })));
        assert!(TuringMachine::new("q", "a", "a", &[]).is_err());
    }

    #[test]
    fn guessing_program_shape() {
        let m = accept_all();
        let p = tm_to_program(&m, None);
        // 2 facts, 8 input rules, 8 emulation rules, 1 step rule,
        // 3 copy rules and 2 rules per right-moving transition.
        assert_eq!(p.rules().len(), 2 + 8 + 8 + 1 + 3 + 2 * 3);
    }

    #[test]
    fn fixed_input_facts() {
        let p = tm_to_program(&accept_all(), Some(&parse_word("01").unwrap()));
        let text = p.to_string();
        assert!(text.contains("s_0(c)."));
        assert!(text.contains("s_1(r(c))."));
        assert!(text.contains("right(r(c),r(r(c)))."));
        assert!(text.contains("last(r(r(c)))."));
        assert!(!text.contains("finiteInput"));
    }

    #[test]
    fn simulation_bumps_left() {
        let m = TuringMachine::new(
            "q",
            "a",
            "r",
            &[("q", '0', "p", '1', 'L'), ("q", '1', "r", '1', 'R'), ("q", 'B', "r", 'B', 'R'),
              ("p", '0', "r", '0', 'R'), ("p", '1', "a", '1', 'R'), ("p", 'B', "r", 'B', 'R')],
        )
        .unwrap();
        match simulate(&m, &parse_word("0").unwrap(), 10) {
            SimOutcome::Halted { state, steps, .. } => {
                assert_eq!(state, "a");
                assert_eq!(steps, 2);
            }
            SimOutcome::Running => panic!("should halt"),
        }
        assert!(parse_word("012").is_err());
    }

    fn halts_in_program(m: &TuringMachine, word: &str, iterations: usize) -> Option<crate::Interpretation> {
        use crate::consistency::{is_consistent, Budget, Outcome};
        let p = tm_to_program(m, Some(&parse_word(word).unwrap()));
        let b = Budget {
            max_iterations: iterations,
            ..Budget::default()
        };
        match is_consistent(&p, &b, None) {
            Outcome::Consistent { witness, .. } => Some(witness),
            _ => None,
        }
    }

    #[test]
    fn encoding_follows_the_machine() {
        let w = halts_in_program(&accept_all(), "0", 30).expect("halting machine is consistent");
        assert!(w.contains(&crate::parse_atom("halt").unwrap()));
        assert!(w.contains(&crate::parse_atom("h_qa(s(r(c)))").unwrap()));

        let looping = TuringMachine::new(
            "q",
            "a",
            "r",
            &[("q", '0', "q", '0', 'L'), ("q", '1', "q", '1', 'L'), ("q", 'B', "q", 'B', 'L')],
        )
        .unwrap();
        assert_eq!(simulate(&looping, &parse_word("0").unwrap(), 50), SimOutcome::Running);
        assert!(halts_in_program(&looping, "0", 15).is_none());
    }
}
