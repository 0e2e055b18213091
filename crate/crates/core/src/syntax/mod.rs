//! Concrete syntax for Anthill, μPython, tags, and code contexts.
//!
//! Anthill types: `dyn | int | (A, ...) -> A | obj X open|closed {l: A, ...}
//! | class X open|closed {l: A, ...}{l: A, ...}(A, ...)`.
//!
//! Anthill terms: `let x = t in t | fun(x: A, ...) -> A: t | t(t, ...) | t.l
//! | t.l = t | x | n | class X(t, ...) [q; {Δ1}; {Δ2}] { l =m meth(self, x: A) -> A: t;
//! l =f t; init = ctor(self, x: A): t }`.
//!
//! μPython: `let x = e in e | lambda(x, ...): e | check(e, S) | e(e, ...) | e.l
//! | e.l = e | class X(e, ...) {l = e, ...} init e | x | n | @n`. A `!` after an
//! application, member access, or the `class` keyword marks the translated label.
//!
//! Tags: `pyobj | int | fun[n] | obj{l, ...} | class{l, ...}[n|any]`.

mod lexer;
mod parse;
pub mod print;

use thiserror::Error;

use crate::context::CodeContext;
use crate::term::Term;
use crate::ty::Type;
use crate::upy::{Expr, Tag};

use parse::Parser;

/// Written where a context's hole goes.
pub const HOLE: &str = "HOLE";

pub const KEYWORDS: &[&str] = &[
    "let", "in", "fun", "class", "meth", "ctor", "init", "dyn", "int", "obj", "open", "closed",
    "lambda", "check", "pyobj", "any", HOLE,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept `@n` addresses and reserved `$` names, as produced during evaluation.
    pub allow_addresses: bool,
    /// Accept `HOLE`.
    pub allow_hole: bool,
}

fn whole<T>(src: &str, opts: ParseOptions, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let mut p = Parser::new(src, opts)?;
    let out = f(&mut p)?;
    p.finish()?;
    Ok(out)
}

pub fn parse_anthill(src: &str) -> Result<Term, ParseError> {
    whole(src, ParseOptions::default(), Parser::term)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    whole(src, ParseOptions::default(), Parser::ty)
}

pub fn parse_upython(src: &str) -> Result<Expr, ParseError> {
    parse_upython_with(src, ParseOptions::default())
}

pub fn parse_upython_with(src: &str, opts: ParseOptions) -> Result<Expr, ParseError> {
    whole(src, opts, Parser::expr)
}

pub fn parse_tag(src: &str) -> Result<Tag, ParseError> {
    whole(src, ParseOptions::default(), Parser::tag)
}

/// Parses a μPython context with exactly one `HOLE`, all labels native.
pub fn parse_context(src: &str) -> Result<CodeContext, ParseError> {
    let opts = ParseOptions {
        allow_hole: true,
        ..ParseOptions::default()
    };
    let e = parse_upython_with(src, opts)?;
    CodeContext::from_expr(&e).map_err(|message| ParseError {
        line: 1,
        col: 1,
        message,
    })
}
