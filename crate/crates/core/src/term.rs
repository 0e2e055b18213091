//! Anthill surface terms.

use num_bigint::BigUint;

use crate::ty::{AttrType, Ident, Openness, Type};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub receiver: Ident,
    pub params: Vec<(Ident, Type)>,
    pub ret: Type,
    pub body: Term,
}

/// A constructor. Its receiver is untyped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constructor {
    pub receiver: Ident,
    pub params: Vec<(Ident, Type)>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Ident,
    pub openness: Openness,
    pub class_attrs: AttrType,
    pub instance_attrs: AttrType,
    pub supers: Vec<Term>,
    pub methods: Vec<(Ident, Method)>,
    pub fields: Vec<(Ident, Term)>,
    pub ctor: Constructor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Ident),
    Int(BigUint),
    App(Box<Term>, Vec<Term>),
    Get(Box<Term>, Ident),
    Set(Box<Term>, Ident, Box<Term>),
    Let(Ident, Box<Term>, Box<Term>),
    Fun(Vec<(Ident, Type)>, Type, Box<Term>),
    Class(Box<ClassDecl>),
}

impl Term {
    pub fn var(x: impl Into<Ident>) -> Term {
        Term::Var(x.into())
    }

    pub fn int(n: u64) -> Term {
        Term::Int(BigUint::from(n))
    }

    pub fn app(callee: Term, args: Vec<Term>) -> Term {
        Term::App(Box::new(callee), args)
    }

    pub fn get(subject: Term, name: impl Into<Ident>) -> Term {
        Term::Get(Box::new(subject), name.into())
    }

    pub fn set(subject: Term, name: impl Into<Ident>, value: Term) -> Term {
        Term::Set(Box::new(subject), name.into(), Box::new(value))
    }

    pub fn let_(x: impl Into<Ident>, bound: Term, body: Term) -> Term {
        Term::Let(x.into(), Box::new(bound), Box::new(body))
    }

    pub fn fun(params: Vec<(Ident, Type)>, ret: Type, body: Term) -> Term {
        Term::Fun(params, ret, Box::new(body))
    }

    pub fn class(decl: ClassDecl) -> Term {
        Term::Class(Box::new(decl))
    }

    /// Leaves have depth 1; method and constructor bodies count as direct
    /// children of their class.
    pub fn depth(&self) -> usize {
        1 + match self {
            Term::Var(_) | Term::Int(_) => 0,
            Term::App(callee, args) => args
                .iter()
                .map(Term::depth)
                .chain(std::iter::once(callee.depth()))
                .max()
                .unwrap_or(0),
            Term::Get(subject, _) => subject.depth(),
            Term::Set(subject, _, value) => subject.depth().max(value.depth()),
            Term::Let(_, bound, body) => bound.depth().max(body.depth()),
            Term::Fun(_, _, body) => body.depth(),
            Term::Class(decl) => decl
                .supers
                .iter()
                .chain(decl.fields.iter().map(|(_, t)| t))
                .chain(decl.methods.iter().map(|(_, m)| &m.body))
                .chain(std::iter::once(&decl.ctor.body))
                .map(Term::depth)
                .max()
                .unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            Term::Var(_) | Term::Int(_) => 0,
            Term::App(callee, args) => callee.size() + args.iter().map(Term::size).sum::<usize>(),
            Term::Get(subject, _) => subject.size(),
            Term::Set(subject, _, value) => subject.size() + value.size(),
            Term::Let(_, bound, body) => bound.size() + body.size(),
            Term::Fun(_, _, body) => body.size(),
            Term::Class(decl) => {
                decl.supers.iter().map(Term::size).sum::<usize>()
                    + decl.fields.iter().map(|(_, t)| t.size()).sum::<usize>()
                    + decl.methods.iter().map(|(_, m)| m.body.size()).sum::<usize>()
                    + decl.ctor.body.size()
            }
        }
    }
}
