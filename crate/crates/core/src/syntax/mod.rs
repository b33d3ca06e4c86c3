//! Terms, atoms, rules, programs, and the text parser.

mod parser;
mod positions;
mod program;
mod term;

pub use parser::{parse_atom, parse_program};
pub use positions::{analyze_positions, PositionInfo, PositionProfile};
pub use program::{Builtin, CmpOp, Program, Rule};
pub use term::{Atom, Symbol, Term};

pub(crate) use term::write_list;
