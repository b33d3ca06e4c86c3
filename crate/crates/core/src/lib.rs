//! Analysis toolkit for normal answer-set programs with function symbols.
//!
//! The crate covers the whole pipeline: parsing ([`syntax`]), Herbrand
//! machinery and instantiation ([`ground`]), answer-set semantics for finite
//! ground programs ([`solve`]), the incremental consistency semi-decision
//! procedure ([`consistency`]), the sound forbidden-atom check
//! ([`forbidden`]), grounding that skips forbidden heads ([`ground_nf`]), and
//! program generators for tiling systems and Turing machines
//! ([`reductions`]).

pub mod cli;
pub mod consistency;
pub mod error;
pub mod forbidden;
pub mod ground;
pub mod ground_nf;
pub mod reductions;
pub mod solve;
pub mod syntax;

pub use error::{Error, Result};
pub use ground::{GroundRule, Interpretation, Substitution};
pub use syntax::{parse_atom, parse_program, Atom, Program, Rule, Symbol, Term};
