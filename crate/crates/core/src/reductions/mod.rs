//! Program generators for tiling systems and Turing machines, with direct
//! checkers to compare against.
//!
//! Both spec formats are line based: `key: value` pairs, blank lines ignored,
//! and `%` or `#` starting a comment.

mod names;
mod tiling;
mod tm;

pub use names::{decode_name, encode_name};
pub use tiling::{below_predicate, check_grid, tile_predicate, tiling_to_program, FiniteGrid, TilingSystem};
pub use tm::{
    parse_word, simulate, state_predicate, tm_to_program, Move, SimOutcome, TapeSymbol, TuringMachine,
};

/// Non-empty lines with comments stripped, numbered from 1.
fn spec_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let content = l.split(['%', '#']).next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    })
}
