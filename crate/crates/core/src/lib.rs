//! A small pure type system kernel: simply typed λ-calculus, System F,
//! System U⁻ and λ★ (Type:Type), with normal-order reduction, erasure,
//! a registry of encodings, and the paradoxes that separate them.

pub mod appendix_b;
pub mod cli;
pub mod encodings;
pub mod erase;
pub mod eval;
pub mod gen;
pub mod paradox;
pub mod props;
pub mod reduce;
pub mod surface;
pub mod term;
pub mod typing;

pub use reduce::{Normalizer, Outcome, Position, ReductionTrace, Rule, Rules};
pub use surface::{parse_term, print_term, Env, PrintOptions, SourceFile};
pub use term::{Sort, Term, TermKind};
pub use typing::{check, convertible, infer, Context, SystemSpec, TypeError};
