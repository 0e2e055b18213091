//! One-hole untyped contexts, composition, and context typing.

use std::fmt;

use crate::syntax::HOLE;
use crate::ty::Ident;
use crate::upy::{Expr, Label, Tag};
use crate::verify::{infer, tag_subtype, HeapType, IllTyped, TagEnv};

const NATIVE: Label = Label::Native;

/// An untyped expression skeleton with exactly one hole. Every labeled node is native.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeContext {
    Hole,
    AppCallee(Box<CodeContext>, Vec<Expr>),
    AppArg {
        callee: Expr,
        before: Vec<Expr>,
        hole: Box<CodeContext>,
        after: Vec<Expr>,
    },
    Get(Box<CodeContext>, Ident),
    SetSubject(Box<CodeContext>, Ident, Expr),
    SetValue(Expr, Ident, Box<CodeContext>),
    ClassSuper {
        name: Ident,
        before: Vec<Expr>,
        hole: Box<CodeContext>,
        after: Vec<Expr>,
        members: Vec<(Ident, Expr)>,
        ctor: Expr,
    },
    ClassCtor {
        name: Ident,
        supers: Vec<Expr>,
        members: Vec<(Ident, Expr)>,
        hole: Box<CodeContext>,
    },
    ClassMember {
        name: Ident,
        supers: Vec<Expr>,
        before: Vec<(Ident, Expr)>,
        label: Ident,
        hole: Box<CodeContext>,
        after: Vec<(Ident, Expr)>,
        ctor: Expr,
    },
    LetBound(Ident, Box<CodeContext>, Expr),
    LetBody(Ident, Expr, Box<CodeContext>),
    Check(Box<CodeContext>, Tag),
    Lambda(Vec<Ident>, Box<CodeContext>),
}

impl CodeContext {
    /// Replaces the hole with `e`. No capture avoidance: contexts may bind
    /// variables the plugged expression uses.
    pub fn plug(&self, e: &Expr) -> Expr {
        let b = |c: &CodeContext| Box::new(c.plug(e));
        match self {
            CodeContext::Hole => e.clone(),
            CodeContext::AppCallee(c, args) => Expr::App(b(c), args.clone(), NATIVE),
            CodeContext::AppArg {
                callee,
                before,
                hole,
                after,
            } => {
                let args = before
                    .iter()
                    .cloned()
                    .chain(std::iter::once(hole.plug(e)))
                    .chain(after.iter().cloned())
                    .collect();
                Expr::App(Box::new(callee.clone()), args, NATIVE)
            }
            CodeContext::Get(c, l) => Expr::Get(b(c), l.clone(), NATIVE),
            CodeContext::SetSubject(c, l, v) => {
                Expr::Set(b(c), l.clone(), Box::new(v.clone()), NATIVE)
            }
            CodeContext::SetValue(s, l, c) => {
                Expr::Set(Box::new(s.clone()), l.clone(), b(c), NATIVE)
            }
            CodeContext::ClassSuper {
                name,
                before,
                hole,
                after,
                members,
                ctor,
            } => Expr::Class {
                name: name.clone(),
                supers: before
                    .iter()
                    .cloned()
                    .chain(std::iter::once(hole.plug(e)))
                    .chain(after.iter().cloned())
                    .collect(),
                members: members.clone(),
                ctor: Box::new(ctor.clone()),
                label: NATIVE,
            },
            CodeContext::ClassCtor {
                name,
                supers,
                members,
                hole,
            } => Expr::Class {
                name: name.clone(),
                supers: supers.clone(),
                members: members.clone(),
                ctor: b(hole),
                label: NATIVE,
            },
            CodeContext::ClassMember {
                name,
                supers,
                before,
                label,
                hole,
                after,
                ctor,
            } => Expr::Class {
                name: name.clone(),
                supers: supers.clone(),
                members: before
                    .iter()
                    .cloned()
                    .chain(std::iter::once((label.clone(), hole.plug(e))))
                    .chain(after.iter().cloned())
                    .collect(),
                ctor: Box::new(ctor.clone()),
                label: NATIVE,
            },
            CodeContext::LetBound(x, c, body) => {
                Expr::Let(x.clone(), b(c), Box::new(body.clone()))
            }
            CodeContext::LetBody(x, bound, c) => {
                Expr::Let(x.clone(), Box::new(bound.clone()), b(c))
            }
            CodeContext::Check(c, s) => Expr::Check(b(c), s.clone()),
            CodeContext::Lambda(xs, c) => Expr::Lambda(xs.clone(), b(c)),
        }
    }

    /// Recovers a context from an expression containing `HOLE` exactly once.
    pub fn from_expr(e: &Expr) -> Result<CodeContext, String> {
        let holes = count_holes(e);
        if holes != 1 {
            return Err(format!("a context needs exactly one HOLE, found {holes}"));
        }
        if e.labels().contains(&Label::Translated) {
            return Err("context code must be native (no `!` labels)".into());
        }
        build(e)
    }

    /// Number of constructors between the root and the hole, plus one.
    pub fn depth(&self) -> usize {
        1 + match self {
            CodeContext::Hole => return 1,
            CodeContext::AppCallee(c, _)
            | CodeContext::Get(c, _)
            | CodeContext::SetSubject(c, _, _)
            | CodeContext::SetValue(_, _, c)
            | CodeContext::LetBound(_, c, _)
            | CodeContext::LetBody(_, _, c)
            | CodeContext::Check(c, _)
            | CodeContext::Lambda(_, c) => c.depth(),
            CodeContext::AppArg { hole, .. }
            | CodeContext::ClassSuper { hole, .. }
            | CodeContext::ClassCtor { hole, .. }
            | CodeContext::ClassMember { hole, .. } => hole.depth(),
        }
    }

    /// The tag environment at the hole, given the environment outside.
    pub fn hole_env(&self, outer: &TagEnv) -> Result<TagEnv, IllTyped> {
        let sigma = HeapType::new();
        match self {
            CodeContext::Hole => Ok(outer.clone()),
            CodeContext::LetBody(x, bound, c) => {
                let s = infer(outer, &sigma, bound)?;
                c.hole_env(&outer.extended([(x.clone(), s)]))
            }
            CodeContext::Lambda(xs, c) => {
                c.hole_env(&outer.extended(xs.iter().map(|x| (x.clone(), Tag::Pyobj))))
            }
            CodeContext::AppCallee(c, _)
            | CodeContext::Get(c, _)
            | CodeContext::SetSubject(c, _, _)
            | CodeContext::SetValue(_, _, c)
            | CodeContext::LetBound(_, c, _)
            | CodeContext::Check(c, _) => c.hole_env(outer),
            CodeContext::AppArg { hole, .. }
            | CodeContext::ClassSuper { hole, .. }
            | CodeContext::ClassCtor { hole, .. }
            | CodeContext::ClassMember { hole, .. } => hole.hole_env(outer),
        }
    }
}

fn count_holes(e: &Expr) -> usize {
    let mut n = 0;
    e.visit(&mut |x| {
        if matches!(x, Expr::Var(v) if v == HOLE) {
            n += 1;
        }
    });
    n
}

fn has_hole(e: &Expr) -> bool {
    count_holes(e) > 0
}

fn build(e: &Expr) -> Result<CodeContext, String> {
    let sub = |x: &Expr| build(x).map(Box::new);
    match e {
        Expr::Var(v) if v == HOLE => Ok(CodeContext::Hole),
        Expr::App(callee, args, _) => {
            if has_hole(callee) {
                return Ok(CodeContext::AppCallee(sub(callee)?, args.clone()));
            }
            let i = args.iter().position(has_hole).expect("hole somewhere");
            Ok(CodeContext::AppArg {
                callee: (**callee).clone(),
                before: args[..i].to_vec(),
                hole: sub(&args[i])?,
                after: args[i + 1..].to_vec(),
            })
        }
        Expr::Get(s, l, _) => Ok(CodeContext::Get(sub(s)?, l.clone())),
        Expr::Set(s, l, v, _) => {
            if has_hole(s) {
                Ok(CodeContext::SetSubject(sub(s)?, l.clone(), (**v).clone()))
            } else {
                Ok(CodeContext::SetValue((**s).clone(), l.clone(), sub(v)?))
            }
        }
        Expr::Class {
            name,
            supers,
            members,
            ctor,
            ..
        } => {
            if let Some(i) = supers.iter().position(has_hole) {
                return Ok(CodeContext::ClassSuper {
                    name: name.clone(),
                    before: supers[..i].to_vec(),
                    hole: sub(&supers[i])?,
                    after: supers[i + 1..].to_vec(),
                    members: members.clone(),
                    ctor: (**ctor).clone(),
                });
            }
            if has_hole(ctor) {
                return Ok(CodeContext::ClassCtor {
                    name: name.clone(),
                    supers: supers.clone(),
                    members: members.clone(),
                    hole: sub(ctor)?,
                });
            }
            let i = members.iter().position(|(_, m)| has_hole(m)).expect("hole somewhere");
            Ok(CodeContext::ClassMember {
                name: name.clone(),
                supers: supers.clone(),
                before: members[..i].to_vec(),
                label: members[i].0.clone(),
                hole: sub(&members[i].1)?,
                after: members[i + 1..].to_vec(),
                ctor: (**ctor).clone(),
            })
        }
        Expr::Let(x, bound, body) => {
            if has_hole(bound) {
                Ok(CodeContext::LetBound(x.clone(), sub(bound)?, (**body).clone()))
            } else {
                Ok(CodeContext::LetBody(x.clone(), (**bound).clone(), sub(body)?))
            }
        }
        Expr::Check(s, tag) => Ok(CodeContext::Check(sub(s)?, tag.clone())),
        Expr::Lambda(xs, body) => Ok(CodeContext::Lambda(xs.clone(), sub(body)?)),
        Expr::Var(_) | Expr::Int(_) | Expr::Addr(_) => unreachable!("no hole in a leaf"),
    }
}

impl fmt::Display for CodeContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plug(&Expr::var(HOLE)))
    }
}

fn all_pyobj<'a, I>(outer: &TagEnv, exprs: I) -> Result<(), IllTyped>
where
    I: IntoIterator<Item = &'a Expr>,
{
    let sigma = HeapType::new();
    for e in exprs {
        infer(outer, &sigma, e)?;
    }
    Ok(())
}

fn binding_mismatch(ctx: &CodeContext, detail: String) -> IllTyped {
    IllTyped {
        rule: "TLet",
        subterm: ctx.to_string(),
        detail,
    }
}

/// `𝒞 : Γ;S ⇒ Γ′;S′`. Given the hole's environment and tag, returns the
/// outer environment and the least result tag.
pub fn type_context(ctx: &CodeContext, hole_env: &TagEnv, hole_tag: &Tag) -> Result<(TagEnv, Tag), IllTyped> {
    let sigma = HeapType::new();
    match ctx {
        CodeContext::Hole => Ok((hole_env.clone(), hole_tag.clone())),
        CodeContext::AppCallee(c, args) => {
            let (outer, _) = type_context(c, hole_env, hole_tag)?;
            all_pyobj(&outer, args)?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::AppArg {
            callee,
            before,
            hole,
            after,
        } => {
            let (outer, _) = type_context(hole, hole_env, hole_tag)?;
            all_pyobj(&outer, std::iter::once(callee).chain(before).chain(after))?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::Get(c, _) => {
            let (outer, _) = type_context(c, hole_env, hole_tag)?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::SetSubject(c, _, v) => {
            let (outer, _) = type_context(c, hole_env, hole_tag)?;
            all_pyobj(&outer, [v])?;
            Ok((outer, Tag::Int))
        }
        CodeContext::SetValue(s, _, c) => {
            let (outer, _) = type_context(c, hole_env, hole_tag)?;
            all_pyobj(&outer, [s])?;
            Ok((outer, Tag::Int))
        }
        CodeContext::ClassSuper {
            before,
            hole,
            after,
            members,
            ctor,
            ..
        } => {
            let (outer, _) = type_context(hole, hole_env, hole_tag)?;
            all_pyobj(
                &outer,
                before
                    .iter()
                    .chain(after)
                    .chain(members.iter().map(|(_, m)| m))
                    .chain(std::iter::once(ctor)),
            )?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::ClassCtor {
            supers,
            members,
            hole,
            ..
        } => {
            let (outer, _) = type_context(hole, hole_env, hole_tag)?;
            all_pyobj(&outer, supers.iter().chain(members.iter().map(|(_, m)| m)))?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::ClassMember {
            supers,
            before,
            hole,
            after,
            ctor,
            ..
        } => {
            let (outer, _) = type_context(hole, hole_env, hole_tag)?;
            all_pyobj(
                &outer,
                supers
                    .iter()
                    .chain(before.iter().chain(after).map(|(_, m)| m))
                    .chain(std::iter::once(ctor)),
            )?;
            Ok((outer, Tag::Pyobj))
        }
        CodeContext::LetBound(x, c, body) => {
            let (outer, s2) = type_context(c, hole_env, hole_tag)?;
            let s3 = infer(&outer.extended([(x.clone(), s2)]), &sigma, body)?;
            Ok((outer, s3))
        }
        CodeContext::LetBody(x, bound, c) => {
            let (mut inner, s3) = type_context(c, hole_env, hole_tag)?;
            let Some((y, s2)) = inner.pop() else {
                return Err(binding_mismatch(ctx, format!("environment lacks `{x}`")));
            };
            if &y != x {
                return Err(binding_mismatch(ctx, format!("expected binding `{x}`, found `{y}`")));
            }
            let s = infer(&inner, &sigma, bound)?;
            if !tag_subtype(&s, &s2) {
                return Err(binding_mismatch(ctx, format!("`{x}` bound at {s}, expected {s2}")));
            }
            Ok((inner, s3))
        }
        CodeContext::Check(c, s) => {
            let (outer, _) = type_context(c, hole_env, hole_tag)?;
            Ok((outer, s.clone()))
        }
        CodeContext::Lambda(xs, c) => {
            let (mut inner, _) = type_context(c, hole_env, hole_tag)?;
            for x in xs.iter().rev() {
                match inner.pop() {
                    Some((y, Tag::Pyobj)) if &y == x => {}
                    _ => {
                        return Err(IllTyped {
                            rule: "TFun",
                            subterm: ctx.to_string(),
                            detail: format!("environment does not end with `{x}: pyobj`"),
                        })
                    }
                }
            }
            Ok((inner, Tag::Fun(xs.len())))
        }
    }
}
