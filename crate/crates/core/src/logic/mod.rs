//! First-order expressions: terms, atoms, typed schemas, mode declarations
//! and lifted clauses.

mod clause;
mod parser;
mod schema;
mod term;

pub use clause::Clause;
pub use parser::{parse_atom, parse_marked, Marker};
pub use schema::{
    typed_constants, types_of, Declarations, FunctionSignature, ModeArg, ModeDeclaration,
    Placemarker, Schema,
};
pub use term::{Atom, Term};
