use std::fmt::{self, Display, Formatter, Write};

use crate::term::{Constructor, Method, Term};
use crate::ty::{AttrType, Openness, Type};
use crate::upy::{Arity, Expr, Label, NameSet, Tag};

fn comma_sep<T, F>(f: &mut Formatter<'_>, items: &[T], mut item: F) -> fmt::Result
where
    F: FnMut(&mut Formatter<'_>, &T) -> fmt::Result,
{
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        item(f, x)?;
    }
    Ok(())
}

impl Display for Openness {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Openness::Open => "open",
            Openness::Closed => "closed",
        })
    }
}

impl Display for AttrType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        let entries: Vec<_> = self.iter().collect();
        comma_sep(f, &entries, |f, (l, a)| write!(f, "{l}: {a}"))?;
        f.write_char('}')
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Type::Dyn => f.write_str("dyn"),
            Type::Int => f.write_str("int"),
            Type::Function(params, ret) => {
                f.write_char('(')?;
                comma_sep(f, params, |f, a| write!(f, "{a}"))?;
                write!(f, ") -> {ret}")
            }
            Type::Object {
                name,
                openness,
                attrs,
            } => write!(f, "obj {name} {openness} {attrs}"),
            Type::Class {
                name,
                openness,
                class_attrs,
                instance_attrs,
                ctor_params,
            } => {
                write!(f, "class {name} {openness} {class_attrs}{instance_attrs}(")?;
                comma_sep(f, ctor_params, |f, a| write!(f, "{a}"))?;
                f.write_char(')')
            }
        }
    }
}

fn write_names(f: &mut Formatter<'_>, names: &NameSet) -> fmt::Result {
    f.write_char('{')?;
    let names: Vec<_> = names.iter().collect();
    comma_sep(f, &names, |f, n| f.write_str(n))?;
    f.write_char('}')
}

impl Display for Arity {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Count(n) => write!(f, "{n}"),
            Arity::Any => f.write_str("any"),
        }
    }
}

impl Display for Tag {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Pyobj => f.write_str("pyobj"),
            Tag::Int => f.write_str("int"),
            Tag::Fun(n) => write!(f, "fun[{n}]"),
            Tag::Obj(names) => {
                f.write_str("obj")?;
                write_names(f, names)
            }
            Tag::Class(names, arity) => {
                f.write_str("class")?;
                write_names(f, names)?;
                write!(f, "[{arity}]")
            }
        }
    }
}

// Forms that extend as far right as possible need parentheses when they
// head a postfix chain or the left side of an assignment.

fn term_open_ended(t: &Term) -> bool {
    matches!(t, Term::Let(..) | Term::Fun(..) | Term::Set(..))
}

fn write_term_head(f: &mut Formatter<'_>, t: &Term) -> fmt::Result {
    if term_open_ended(t) {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

fn write_typed_params(f: &mut Formatter<'_>, params: &[(String, Type)]) -> fmt::Result {
    comma_sep(f, params, |f, (x, a)| write!(f, "{x}: {a}"))
}

pub fn write_method(f: &mut Formatter<'_>, m: &Method) -> fmt::Result {
    write!(f, "meth({}", m.receiver)?;
    for (x, a) in &m.params {
        write!(f, ", {x}: {a}")?;
    }
    write!(f, ") -> {}: {}", m.ret, m.body)
}

pub fn write_ctor(f: &mut Formatter<'_>, c: &Constructor) -> fmt::Result {
    write!(f, "ctor({}", c.receiver)?;
    for (x, a) in &c.params {
        write!(f, ", {x}: {a}")?;
    }
    write!(f, "): {}", c.body)
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Int(n) => write!(f, "{n}"),
            Term::App(callee, args) => {
                write_term_head(f, callee)?;
                f.write_char('(')?;
                comma_sep(f, args, |f, a| write!(f, "{a}"))?;
                f.write_char(')')
            }
            Term::Get(subject, name) => {
                write_term_head(f, subject)?;
                write!(f, ".{name}")
            }
            Term::Set(subject, name, value) => {
                write_term_head(f, subject)?;
                write!(f, ".{name} = {value}")
            }
            Term::Let(x, bound, body) => write!(f, "let {x} = {bound} in {body}"),
            Term::Fun(params, ret, body) => {
                f.write_str("fun(")?;
                write_typed_params(f, params)?;
                write!(f, ") -> {ret}: {body}")
            }
            Term::Class(d) => {
                write!(f, "class {}(", d.name)?;
                comma_sep(f, &d.supers, |f, s| write!(f, "{s}"))?;
                write!(
                    f,
                    ") [{}; {}; {}] {{ ",
                    d.openness, d.class_attrs, d.instance_attrs
                )?;
                for (l, m) in &d.methods {
                    write!(f, "{l} =m ")?;
                    write_method(f, m)?;
                    f.write_str("; ")?;
                }
                for (l, t) in &d.fields {
                    write!(f, "{l} =f {t}; ")?;
                }
                f.write_str("init = ")?;
                write_ctor(f, &d.ctor)?;
                f.write_str(" }")
            }
        }
    }
}

fn expr_open_ended(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Let(..) | Expr::Lambda(..) | Expr::Set(..) | Expr::Class { .. }
    )
}

fn write_expr_head(f: &mut Formatter<'_>, e: &Expr) -> fmt::Result {
    if expr_open_ended(e) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn bang(p: Label) -> &'static str {
    match p {
        Label::Translated => "!",
        Label::Native => "",
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Addr(a) => write!(f, "{a}"),
            Expr::Lambda(params, body) => {
                f.write_str("lambda(")?;
                comma_sep(f, params, |f, x| f.write_str(x))?;
                write!(f, "): {body}")
            }
            Expr::App(callee, args, p) => {
                write_expr_head(f, callee)?;
                f.write_char('(')?;
                comma_sep(f, args, |f, a| write!(f, "{a}"))?;
                write!(f, "){}", bang(*p))
            }
            Expr::Get(subject, name, p) => {
                write_expr_head(f, subject)?;
                write!(f, ".{name}{}", bang(*p))
            }
            Expr::Set(subject, name, value, p) => {
                write_expr_head(f, subject)?;
                write!(f, ".{name}{} = {value}", bang(*p))
            }
            Expr::Let(x, bound, body) => write!(f, "let {x} = {bound} in {body}"),
            Expr::Class {
                name,
                supers,
                members,
                ctor,
                label,
            } => {
                write!(f, "class{} {name}(", bang(*label))?;
                comma_sep(f, supers, |f, s| write!(f, "{s}"))?;
                f.write_str(") {")?;
                comma_sep(f, members, |f, (l, m)| write!(f, "{l} = {m}"))?;
                write!(f, "}} init {ctor}")
            }
            Expr::Check(subject, tag) => write!(f, "check({subject}, {tag})"),
        }
    }
}
