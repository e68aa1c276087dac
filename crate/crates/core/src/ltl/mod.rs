//! LTL syntax, semantics and translation to Büchi automata.

mod ast;
mod atoms;
mod nba;
mod parser;
mod semantics;
mod translate;

pub use ast::{Ltl, LtlDisplay};
pub use atoms::{AtomSet, Label, LabelDisplay, MAX_ATOMS};
pub use nba::{Cube, Guard, Nba, NbaDoc, TransitionDoc};
pub use parser::parse_ltl;
pub use semantics::{evaluate_word, LassoWord};
pub use translate::{simplify, translate_to_nba};
