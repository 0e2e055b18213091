use std::collections::BTreeSet;

use super::lexer::{lex, Tok, Token};
use super::{ParseError, ParseOptions, HOLE, KEYWORDS};
use crate::term::{ClassDecl, Constructor, Method, Term};
use crate::ty::{AttrType, Ident, Openness, Type};
use crate::upy::{Address, Arity, Expr, Label, NameSet, Tag};

pub(super) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    opts: ParseOptions,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(super) fn new(src: &str, opts: ParseOptions) -> PResult<Self> {
        Ok(Self {
            toks: lex(src)?,
            pos: 0,
            opts,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    /// A non-keyword identifier; `$` names only in runtime mode.
    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                self.error(format!("`{s}` is a keyword"))
            }
            Tok::Ident(s) if s.starts_with('$') && !self.opts.allow_addresses => {
                self.error(format!("reserved identifier `{s}`"))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn nat(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Int(n) => match usize::try_from(&n) {
                Ok(n) => {
                    self.bump();
                    Ok(n)
                }
                Err(_) => self.error("number too large"),
            },
            _ => self.unexpected("a number"),
        }
    }

    pub(super) fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn comma_list<T>(&mut self, close: &Tok, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    // ---- Anthill types ----

    pub(super) fn ty(&mut self) -> PResult<Type> {
        if self.eat_keyword("dyn") {
            return Ok(Type::Dyn);
        }
        if self.eat_keyword("int") {
            return Ok(Type::Int);
        }
        if self.eat(&Tok::LParen) {
            let params = self.comma_list(&Tok::RParen, Self::ty)?;
            self.expect(&Tok::Arrow)?;
            let ret = self.ty()?;
            return Ok(Type::function(params, ret));
        }
        if self.eat_keyword("obj") {
            let name = self.ident()?;
            let q = self.openness()?;
            let attrs = self.attr_type()?;
            return Ok(Type::object(name, q, attrs));
        }
        if self.eat_keyword("class") {
            let name = self.ident()?;
            let q = self.openness()?;
            let d1 = self.attr_type()?;
            let d2 = self.attr_type()?;
            self.expect(&Tok::LParen)?;
            let params = self.comma_list(&Tok::RParen, Self::ty)?;
            return Ok(Type::class(name, q, d1, d2, params));
        }
        self.unexpected("a type")
    }

    fn openness(&mut self) -> PResult<Openness> {
        if self.eat_keyword("open") {
            Ok(Openness::Open)
        } else if self.eat_keyword("closed") {
            Ok(Openness::Closed)
        } else {
            self.unexpected("`open` or `closed`")
        }
    }

    fn attr_type(&mut self) -> PResult<AttrType> {
        self.expect(&Tok::LBrace)?;
        let entries = self.comma_list(&Tok::RBrace, |p| {
            let name = p.ident()?;
            p.expect(&Tok::Colon)?;
            Ok((name, p.ty()?))
        })?;
        AttrType::from_entries(entries).or_else(|dup| self.error(format!("duplicate attribute `{dup}`")))
    }

    fn typed_param(&mut self) -> PResult<(Ident, Type)> {
        let x = self.ident()?;
        self.expect(&Tok::Colon)?;
        Ok((x, self.ty()?))
    }

    // ---- Anthill terms ----

    pub(super) fn term(&mut self) -> PResult<Term> {
        if self.eat_keyword("let") {
            let x = self.ident()?;
            self.expect(&Tok::Eq)?;
            let bound = self.term()?;
            self.expect_keyword("in")?;
            let body = self.term()?;
            return Ok(Term::let_(x, bound, body));
        }
        if self.eat_keyword("fun") {
            self.expect(&Tok::LParen)?;
            let params = self.comma_list(&Tok::RParen, Self::typed_param)?;
            self.expect(&Tok::Arrow)?;
            let ret = self.ty()?;
            self.expect(&Tok::Colon)?;
            let body = self.term()?;
            return Ok(Term::fun(params, ret, body));
        }
        let head = self.term_postfix()?;
        if *self.peek() == Tok::Eq {
            if let Term::Get(subject, name) = head {
                self.bump();
                let value = self.term()?;
                return Ok(Term::Set(subject, name, Box::new(value)));
            }
            return self.error("only a member access can be assigned");
        }
        Ok(head)
    }

    fn term_postfix(&mut self) -> PResult<Term> {
        let mut t = self.term_atom()?;
        loop {
            if self.eat(&Tok::LParen) {
                let args = self.comma_list(&Tok::RParen, Self::term)?;
                t = Term::app(t, args);
            } else if self.eat(&Tok::Dot) {
                let name = self.ident()?;
                t = Term::get(t, name);
            } else {
                return Ok(t);
            }
        }
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "class" => {
                self.bump();
                self.class_decl()
            }
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            _ => self.unexpected("a term"),
        }
    }

    fn class_decl(&mut self) -> PResult<Term> {
        let name = self.ident()?;
        self.expect(&Tok::LParen)?;
        let supers = self.comma_list(&Tok::RParen, Self::term)?;
        self.expect(&Tok::LBrack)?;
        let openness = self.openness()?;
        self.expect(&Tok::Semi)?;
        let class_attrs = self.attr_type()?;
        self.expect(&Tok::Semi)?;
        let instance_attrs = self.attr_type()?;
        self.expect(&Tok::RBrack)?;
        self.expect(&Tok::LBrace)?;
        let mut methods = Vec::new();
        let mut fields = Vec::new();
        loop {
            if self.eat_keyword("init") {
                break;
            }
            let label = self.ident()?;
            self.expect(&Tok::Eq)?;
            match self.peek().clone() {
                Tok::Ident(s) if s == "m" => {
                    self.bump();
                    self.expect_keyword("meth")?;
                    self.expect(&Tok::LParen)?;
                    let receiver = self.ident()?;
                    let params = self.rest_params()?;
                    self.expect(&Tok::Arrow)?;
                    let ret = self.ty()?;
                    self.expect(&Tok::Colon)?;
                    let body = self.term()?;
                    methods.push((
                        label,
                        Method {
                            receiver,
                            params,
                            ret,
                            body,
                        },
                    ));
                }
                Tok::Ident(s) if s == "f" => {
                    self.bump();
                    fields.push((label, self.term()?));
                }
                _ => return self.unexpected("`m` or `f` after the member name"),
            }
            self.expect(&Tok::Semi)?;
        }
        self.expect(&Tok::Eq)?;
        self.expect_keyword("ctor")?;
        self.expect(&Tok::LParen)?;
        let receiver = self.ident()?;
        let params = self.rest_params()?;
        self.expect(&Tok::Colon)?;
        let body = self.term()?;
        self.eat(&Tok::Semi);
        self.expect(&Tok::RBrace)?;
        Ok(Term::class(ClassDecl {
            name,
            openness,
            class_attrs,
            instance_attrs,
            supers,
            methods,
            fields,
            ctor: Constructor {
                receiver,
                params,
                body,
            },
        }))
    }

    /// Typed parameters after the receiver, through the closing paren.
    fn rest_params(&mut self) -> PResult<Vec<(Ident, Type)>> {
        let mut params = Vec::new();
        while self.eat(&Tok::Comma) {
            params.push(self.typed_param()?);
        }
        self.expect(&Tok::RParen)?;
        Ok(params)
    }

    // ---- μPython ----

    pub(super) fn tag(&mut self) -> PResult<Tag> {
        if self.eat_keyword("pyobj") {
            return Ok(Tag::Pyobj);
        }
        if self.eat_keyword("int") {
            return Ok(Tag::Int);
        }
        if self.eat_keyword("fun") {
            self.expect(&Tok::LBrack)?;
            let n = self.nat()?;
            self.expect(&Tok::RBrack)?;
            return Ok(Tag::Fun(n));
        }
        if self.eat_keyword("obj") {
            return Ok(Tag::Obj(self.name_set()?));
        }
        if self.eat_keyword("class") {
            let names = self.name_set()?;
            self.expect(&Tok::LBrack)?;
            let arity = if self.eat_keyword("any") {
                Arity::Any
            } else {
                Arity::Count(self.nat()?)
            };
            self.expect(&Tok::RBrack)?;
            return Ok(Tag::Class(names, arity));
        }
        self.unexpected("a tag")
    }

    fn name_set(&mut self) -> PResult<NameSet> {
        self.expect(&Tok::LBrace)?;
        let names = self.comma_list(&Tok::RBrace, Self::ident)?;
        Ok(names.into_iter().collect::<BTreeSet<_>>())
    }

    fn label(&mut self) -> Label {
        if self.eat(&Tok::Bang) {
            Label::Translated
        } else {
            Label::Native
        }
    }

    pub(super) fn expr(&mut self) -> PResult<Expr> {
        if self.eat_keyword("let") {
            let x = self.ident()?;
            self.expect(&Tok::Eq)?;
            let bound = self.expr()?;
            self.expect_keyword("in")?;
            let body = self.expr()?;
            return Ok(Expr::let_(x, bound, body));
        }
        if self.eat_keyword("lambda") {
            self.expect(&Tok::LParen)?;
            let params = self.comma_list(&Tok::RParen, Self::ident)?;
            let distinct: BTreeSet<_> = params.iter().collect();
            if distinct.len() != params.len() {
                return self.error("duplicate lambda parameter");
            }
            self.expect(&Tok::Colon)?;
            let body = self.expr()?;
            return Ok(Expr::Lambda(params, Box::new(body)));
        }
        if self.eat_keyword("class") {
            let label = self.label();
            let name = self.ident()?;
            self.expect(&Tok::LParen)?;
            let supers = self.comma_list(&Tok::RParen, Self::expr)?;
            self.expect(&Tok::LBrace)?;
            let members = self.comma_list(&Tok::RBrace, |p| {
                let l = p.ident()?;
                p.expect(&Tok::Eq)?;
                Ok((l, p.expr()?))
            })?;
            self.expect_keyword("init")?;
            let ctor = self.expr()?;
            return Ok(Expr::Class {
                name,
                supers,
                members,
                ctor: Box::new(ctor),
                label,
            });
        }
        let head = self.expr_postfix()?;
        if *self.peek() == Tok::Eq {
            if let Expr::Get(subject, name, p) = head {
                self.bump();
                let value = self.expr()?;
                return Ok(Expr::Set(subject, name, Box::new(value), p));
            }
            return self.error("only a member access can be assigned");
        }
        Ok(head)
    }

    fn expr_postfix(&mut self) -> PResult<Expr> {
        let mut e = self.expr_atom()?;
        loop {
            if self.eat(&Tok::LParen) {
                let args = self.comma_list(&Tok::RParen, Self::expr)?;
                let p = self.label();
                e = Expr::App(Box::new(e), args, p);
            } else if self.eat(&Tok::Dot) {
                let name = self.ident()?;
                let p = self.label();
                e = Expr::Get(Box::new(e), name, p);
            } else {
                return Ok(e);
            }
        }
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Addr(a) => {
                if !self.opts.allow_addresses {
                    return self.error("addresses are not allowed in source programs");
                }
                self.bump();
                Ok(Expr::Addr(Address(a)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "check" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let subject = self.expr()?;
                self.expect(&Tok::Comma)?;
                let tag = self.tag()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::check(subject, tag))
            }
            Tok::Ident(s) if s == HOLE => {
                if !self.opts.allow_hole {
                    return self.error("`HOLE` is only allowed in contexts");
                }
                self.bump();
                Ok(Expr::var(HOLE))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            _ => self.unexpected("an expression"),
        }
    }
}
