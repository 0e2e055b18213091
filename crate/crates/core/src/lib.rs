//! Gradually typed Anthill, its translation to untyped μPython with transient
//! checks, a tag type system for the target, and an open-world soundness harness.

pub mod context;
pub mod gen;
pub mod harness;
pub mod runtime;
pub mod syntax;
pub mod term;
pub mod translate;
pub mod ty;
pub mod upy;
pub mod verify;

pub use context::CodeContext;
pub use runtime::{run, step, Heap, HeapValue, Outcome};
pub use syntax::{parse_anthill, parse_context, parse_tag, parse_type, parse_upython, ParseError};
pub use term::Term;
pub use translate::{translate, translate_term, StaticTypeError, TypeEnv};
pub use ty::{AttrType, Openness, Type};
pub use upy::{Address, Arity, Expr, Label, Tag};
pub use verify::{infer, tag_subtype, HeapType, TagEnv};
