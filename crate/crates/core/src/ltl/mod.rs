//! LTL formulas, deterministic Rabin automata and the conversions between
//! them.

mod ast;
mod compile;
mod dra;
mod hoa;
mod parser;
mod semantics;

pub use ast::Ltl;
pub use compile::{compile_fragment_dra, Clause};
pub use dra::{Dra, DraError, RabinPair};
pub use hoa::{export_hoa, import_dra, parse_hoa, HoaError};
pub use parser::{parse_ltl, parse_ltl_with_ap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtlError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown atomic proposition `{name}` at byte {position}")]
    UnknownAtom { name: String, position: usize },
    #[error("formula outside the supported fragment: `{clause}` ({reason})")]
    Fragment { clause: String, reason: String },
    #[error("too many atomic propositions ({0}); at most 16 are supported")]
    TooManyPropositions(usize),
}
