//! μPython expressions, origin labels, and runtime type tags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use crate::ty::Ident;

/// Origin of an elimination or creation form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Emitted by the translator from typed code.
    Translated,
    /// Hand-written untyped code.
    Native,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Translated => "translated",
            Label::Native => "native",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub u64);

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// Arity spec of a class tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arity {
    Count(usize),
    Any,
}

pub type NameSet = BTreeSet<Ident>;

/// Shallow runtime classification of a value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Pyobj,
    Int,
    Fun(usize),
    Obj(NameSet),
    Class(NameSet, Arity),
}

impl Tag {
    pub fn obj<I, S>(names: I) -> Tag
    where
        I: IntoIterator<Item = S>,
        S: Into<Ident>,
    {
        Tag::Obj(names.into_iter().map(Into::into).collect())
    }

    pub fn class<I, S>(names: I, arity: Arity) -> Tag
    where
        I: IntoIterator<Item = S>,
        S: Into<Ident>,
    {
        Tag::Class(names.into_iter().map(Into::into).collect(), arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Ident),
    Int(BigUint),
    Addr(Address),
    Lambda(Vec<Ident>, Box<Expr>),
    App(Box<Expr>, Vec<Expr>, Label),
    Get(Box<Expr>, Ident, Label),
    Set(Box<Expr>, Ident, Box<Expr>, Label),
    Let(Ident, Box<Expr>, Box<Expr>),
    Class {
        name: Ident,
        supers: Vec<Expr>,
        members: Vec<(Ident, Expr)>,
        ctor: Box<Expr>,
        label: Label,
    },
    Check(Box<Expr>, Tag),
}

impl Expr {
    pub fn var(x: impl Into<Ident>) -> Expr {
        Expr::Var(x.into())
    }

    pub fn int(n: u64) -> Expr {
        Expr::Int(BigUint::from(n))
    }

    pub fn lambda<I, S>(params: I, body: Expr) -> Expr
    where
        I: IntoIterator<Item = S>,
        S: Into<Ident>,
    {
        Expr::Lambda(params.into_iter().map(Into::into).collect(), Box::new(body))
    }

    pub fn app(callee: Expr, args: Vec<Expr>, label: Label) -> Expr {
        Expr::App(Box::new(callee), args, label)
    }

    pub fn get(subject: Expr, name: impl Into<Ident>, label: Label) -> Expr {
        Expr::Get(Box::new(subject), name.into(), label)
    }

    pub fn set(subject: Expr, name: impl Into<Ident>, value: Expr, label: Label) -> Expr {
        Expr::Set(Box::new(subject), name.into(), Box::new(value), label)
    }

    pub fn let_(x: impl Into<Ident>, bound: Expr, body: Expr) -> Expr {
        Expr::Let(x.into(), Box::new(bound), Box::new(body))
    }

    pub fn check(subject: Expr, tag: Tag) -> Expr {
        Expr::Check(Box::new(subject), tag)
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Addr(_) | Expr::Lambda(..))
    }

    pub fn as_addr(&self) -> Option<Address> {
        match self {
            Expr::Addr(a) => Some(*a),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every origin label in the expression, in pre-order.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.visit(&mut |e| match e {
            Expr::App(_, _, p) | Expr::Get(_, _, p) | Expr::Set(_, _, _, p) => out.push(*p),
            Expr::Class { label, .. } => out.push(*label),
            _ => {}
        });
        out
    }

    /// Every address literal in the expression.
    pub fn addresses(&self) -> BTreeSet<Address> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Addr(a) = e {
                out.insert(*a);
            }
        });
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Int(_) | Expr::Addr(_) => {}
            Expr::Lambda(_, body) => body.visit(f),
            Expr::App(callee, args, _) => {
                callee.visit(f);
                args.iter().for_each(|a| a.visit(f));
            }
            Expr::Get(subject, _, _) => subject.visit(f),
            Expr::Set(subject, _, value, _) => {
                subject.visit(f);
                value.visit(f);
            }
            Expr::Let(_, bound, body) => {
                bound.visit(f);
                body.visit(f);
            }
            Expr::Class {
                supers,
                members,
                ctor,
                ..
            } => {
                supers.iter().for_each(|s| s.visit(f));
                ctor.visit(f);
                members.iter().for_each(|(_, m)| m.visit(f));
            }
            Expr::Check(subject, _) => subject.visit(f),
        }
    }

    /// Rewrites every label, bottom-up.
    pub fn relabel(&self, label: Label) -> Expr {
        let r = |e: &Expr| Box::new(e.relabel(label));
        match self {
            Expr::Var(_) | Expr::Int(_) | Expr::Addr(_) => self.clone(),
            Expr::Lambda(params, body) => Expr::Lambda(params.clone(), r(body)),
            Expr::App(callee, args, _) => {
                Expr::App(r(callee), args.iter().map(|a| a.relabel(label)).collect(), label)
            }
            Expr::Get(subject, name, _) => Expr::Get(r(subject), name.clone(), label),
            Expr::Set(subject, name, value, _) => {
                Expr::Set(r(subject), name.clone(), r(value), label)
            }
            Expr::Let(x, bound, body) => Expr::Let(x.clone(), r(bound), r(body)),
            Expr::Class {
                name,
                supers,
                members,
                ctor,
                ..
            } => Expr::Class {
                name: name.clone(),
                supers: supers.iter().map(|s| s.relabel(label)).collect(),
                members: members
                    .iter()
                    .map(|(l, m)| (l.clone(), m.relabel(label)))
                    .collect(),
                ctor: r(ctor),
                label,
            },
            Expr::Check(subject, tag) => Expr::Check(r(subject), tag.clone()),
        }
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    match e {
        Expr::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Expr::Int(_) | Expr::Addr(_) => {}
        Expr::Lambda(params, body) => {
            let depth = bound.len();
            bound.extend(params.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
        Expr::Let(x, bound_expr, body) => {
            collect_free(bound_expr, bound, out);
            bound.push(x.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for child in children(e) {
                collect_free(child, bound, out);
            }
        }
    }
}

/// Immediate subexpressions of a non-binding form.
fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Addr(_) => vec![],
        Expr::Lambda(_, body) => vec![body],
        Expr::App(callee, args, _) => std::iter::once(&**callee).chain(args).collect(),
        Expr::Get(subject, _, _) => vec![subject],
        Expr::Set(subject, _, value, _) => vec![subject, value],
        Expr::Let(_, bound, body) => vec![bound, body],
        Expr::Class {
            supers,
            members,
            ctor,
            ..
        } => supers
            .iter()
            .chain(std::iter::once(&**ctor))
            .chain(members.iter().map(|(_, m)| m))
            .collect(),
        Expr::Check(subject, _) => vec![subject],
    }
}

/// Simultaneous substitution of closed values for variables.
///
/// Stops at binders that shadow a substituted name. No capture avoidance:
/// the substituted values are expected to be closed.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Ident, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let sub = |x: &Expr| Box::new(substitute(x, bindings));
    match e {
        Expr::Var(x) => bindings.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Int(_) | Expr::Addr(_) => e.clone(),
        Expr::Lambda(params, body) => {
            if params.iter().any(|p| bindings.contains_key(p)) {
                let inner: BTreeMap<_, _> = bindings
                    .iter()
                    .filter(|(k, _)| !params.contains(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                Expr::Lambda(params.clone(), Box::new(substitute(body, &inner)))
            } else {
                Expr::Lambda(params.clone(), sub(body))
            }
        }
        Expr::App(callee, args, p) => Expr::App(
            sub(callee),
            args.iter().map(|a| substitute(a, bindings)).collect(),
            *p,
        ),
        Expr::Get(subject, name, p) => Expr::Get(sub(subject), name.clone(), *p),
        Expr::Set(subject, name, value, p) => Expr::Set(sub(subject), name.clone(), sub(value), *p),
        Expr::Let(x, bound, body) => {
            let body = if bindings.contains_key(x) {
                let mut inner = bindings.clone();
                inner.remove(x);
                Box::new(substitute(body, &inner))
            } else {
                sub(body)
            };
            Expr::Let(x.clone(), sub(bound), body)
        }
        Expr::Class {
            name,
            supers,
            members,
            ctor,
            label,
        } => Expr::Class {
            name: name.clone(),
            supers: supers.iter().map(|s| substitute(s, bindings)).collect(),
            members: members
                .iter()
                .map(|(l, m)| (l.clone(), substitute(m, bindings)))
                .collect(),
            ctor: sub(ctor),
            label: *label,
        },
        Expr::Check(subject, tag) => Expr::Check(sub(subject), tag.clone()),
    }
}

pub fn substitute_one(e: &Expr, x: &str, v: &Expr) -> Expr {
    substitute(e, &BTreeMap::from([(x.to_string(), v.clone())]))
}
