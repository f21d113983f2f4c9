//! Straight-line programs and addition-multiplication chains over the
//! integers.
//!
//! * [`chain`]: program model, text format, exact and modular evaluation.
//! * [`construct`]: 2^k-ary, tower and Fermat-product constructions.
//! * [`search`]: exact τ and τ₊ with optimal witnesses, value enumeration and
//!   the persistent memo database.
//! * [`equiv`]: randomized and exact program equality.
//! * [`analysis`]: α-decompositions, extremal surveys and report builders.
//! * [`cli`]: the `chainsmith` command line.

pub mod analysis;
pub mod chain;
pub mod cli;
pub mod construct;
pub mod equiv;
pub mod json;
pub mod search;

pub use chain::{
    classify, evaluate, evaluate_mod, format_chain, parse_chain, ChainError, Classification,
    EvalTrace, Model, Op, Program, Step,
};
