//! Signed closures, support, `r`-extensions, and the sound forbidden-atom check.
//!
//! An atom is forbidden when it belongs to no answer set. The check here is
//! sufficient only: `true` is a proof, `false` means nothing was shown.

mod algorithm;
mod closure;
mod trace;

pub use algorithm::{
    is_forbidden, is_forbidden_traced, r_extensions, ForbiddenBudget, ForbiddenChecker,
    ForbiddenOracle, ForbiddenRun, NoOracle, Session,
};
pub use closure::{
    closure_stages, closure_step, has_support, r_minus, r_plus, signed_closure, signed_closure_bounded, SignedPair, TermUniverse,
    TooLarge,
};
pub use trace::{FreshMap, TraceEvent};
