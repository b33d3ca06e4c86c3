use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::syntax::{parse_program, Program};

use super::names::encode_name;
use super::spec_lines;

/// `⟨T, HI, VI, t₀⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingSystem {
    pub tiles: BTreeSet<String>,
    pub hi: BTreeSet<(String, String)>,
    pub vi: BTreeSet<(String, String)>,
    pub t0: String,
}

impl TilingSystem {
    pub fn new(
        tiles: &[&str],
        hi: &[(&str, &str)],
        vi: &[(&str, &str)],
        t0: &str,
    ) -> Result<Self> {
        let pairs = |ps: &[(&str, &str)]| {
            ps.iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect::<BTreeSet<_>>()
        };
        let t = TilingSystem {
            tiles: tiles.iter().map(|s| s.to_string()).collect(),
            hi: pairs(hi),
            vi: pairs(vi),
            t0: t0.to_string(),
        };
        t.check(0)?;
        Ok(t)
    }

    fn check(&self, line: usize) -> Result<()> {
        let err = |message: String| Error::SpecFormat {
            kind: "tiling",
            line,
            message,
        };
        if !self.tiles.contains(&self.t0) {
            return Err(err(format!("t0 `{}` is not a tile", self.t0)));
        }
        for (a, b) in self.hi.iter().chain(&self.vi) {
            for t in [a, b] {
                if !self.tiles.contains(t) {
                    return Err(err(format!("unknown tile `{t}` in a pair")));
                }
            }
        }
        Ok(())
    }

    /// Reads `tiles:`, `hi:`, `vi:` and `t0:` lines; pairs are comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tiles = None;
        let mut hi = BTreeSet::new();
        let mut vi = BTreeSet::new();
        let mut t0 = None;
        let mut last = 0;
        for (line, content) in spec_lines(text) {
            last = line;
            let err = |message: String| Error::SpecFormat {
                kind: "tiling",
                line,
                message,
            };
            let (key, value) = content
                .split_once(':')
                .ok_or_else(|| err(format!("expected `key: value`, found `{content}`")))?;
            match key.trim() {
                "tiles" => tiles = Some(value.split_whitespace().map(str::to_string).collect()),
                "hi" | "vi" => {
                    let set = if key.trim() == "hi" { &mut hi } else { &mut vi };
                    for pair in value.split(',').filter(|p| !p.trim().is_empty()) {
                        let parts: Vec<&str> = pair.split_whitespace().collect();
                        let [a, b] = parts[..] else {
                            return Err(err(format!("pair `{}` must name two tiles", pair.trim())));
                        };
                        set.insert((a.to_string(), b.to_string()));
                    }
                }
                "t0" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    let [t] = parts[..] else {
                        return Err(err("t0 must name exactly one tile".into()));
                    };
                    t0 = Some(t.to_string());
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |what: &str| Error::SpecFormat {
            kind: "tiling",
            line: last,
            message: format!("missing `{what}:` line"),
        };
        let t = TilingSystem {
            tiles: tiles.ok_or_else(|| missing("tiles"))?,
            hi,
            vi,
            t0: t0.ok_or_else(|| missing("t0"))?,
        };
        t.check(last)?;
        Ok(t)
    }
}

/// Tile assignment on a `width × height` rectangle; `(column, row)` indexed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGrid {
    pub width: usize,
    pub height: usize,
    cells: Vec<String>,
}

impl FiniteGrid {
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> String) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                cells.push(f(col, row));
            }
        }
        FiniteGrid {
            width,
            height,
            cells,
        }
    }

    pub fn get(&self, col: usize, row: usize) -> &str {
        &self.cells[row * self.width + col]
    }
}

pub fn check_grid(t: &TilingSystem, g: &FiniteGrid) -> bool {
    let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
    for row in 0..g.height {
        for col in 0..g.width {
            let here = g.get(col, row);
            if col + 1 < g.width && t.hi.contains(&pair(here, g.get(col + 1, row))) {
                return false;
            }
            if row + 1 < g.height && t.vi.contains(&pair(here, g.get(col, row + 1))) {
                return false;
            }
        }
    }
    true
}

pub fn tile_predicate(tile: &str) -> String {
    format!("tile_{}", encode_name(tile))
}

pub fn below_predicate(tile: &str) -> String {
    format!("below_{}", encode_name(tile))
}

/// `P_T`: the fact `dom(c0)` plus one rule per schema instance.
pub fn tiling_to_program(t: &TilingSystem) -> Program {
    let mut s = String::from("dom(c0).\ndom(s(X)) :- dom(X).\n");
    for tile in &t.tiles {
        write!(s, "{}(X,Y) :- dom(X), dom(Y)", tile_predicate(tile)).unwrap();
        for other in t.tiles.iter().filter(|o| *o != tile) {
            write!(s, ", not {}(X,Y)", tile_predicate(other)).unwrap();
        }
        s.push_str(".\n");
    }
    for (a, b) in &t.hi {
        writeln!(s, ":- {}(X,Y), {}(s(X),Y).", tile_predicate(a), tile_predicate(b)).unwrap();
    }
    for (a, b) in &t.vi {
        writeln!(s, ":- {}(X,Y), {}(X,s(Y)).", tile_predicate(a), tile_predicate(b)).unwrap();
    }
    let below = below_predicate(&t.t0);
    writeln!(s, "{below}(Y) :- {}(c0,s(Y)).", tile_predicate(&t.t0)).unwrap();
    writeln!(s, "{below}(Y) :- {below}(s(Y)).").unwrap();
    writeln!(s, ":- dom(Y), not {below}(Y).").unwrap();
    parse_program(&s).expect("generated tiling program is well-formed")
}
