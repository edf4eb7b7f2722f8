//! The bundled toy language: a tiny integer/boolean imperative language with
//! functions, `while`, and `test` blocks.
//!
//! It exists so mutation runs have a fully deterministic target whose exact
//! token grammar the mutation engine understands. Programs are pure (no I/O,
//! no randomness); the only sources of nondeterminism a mutant can introduce
//! are divergence (an endless loop) and arithmetic faults, both of which the
//! harness observes as timeouts or failures.
//!
//! ```text
//! fn clamp(x, lo, hi) {
//!     if x < lo { return lo }
//!     if hi < x { return hi }
//!     return x
//! }
//!
//! test t_clamp {
//!     assert clamp(5, 0, 3) == 3
//! }
//! ```

mod interp;
mod lexer;
mod parser;

pub use interp::{Interpreter, LoadedProgram, TestResult, Value};
pub use lexer::{lex, LexError, TokKind, Token};
pub use parser::{parse_module, Expr, FnDef, Module, ParseError, Stmt, TestDef};

/// Parse an implementation unit and a test unit into one runnable program.
/// Functions share a single namespace; test blocks may appear in either
/// unit but conventionally live in the second.
pub fn load_program(units: &[(&str, &str)]) -> Result<LoadedProgram, ParseError> {
    let mut parsed = Vec::with_capacity(units.len());
    for (name, text) in units {
        parsed.push((name.to_string(), parse_module(text)?));
    }
    LoadedProgram::link(parsed)
}
