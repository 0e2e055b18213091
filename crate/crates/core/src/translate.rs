//! Type-directed translation from Anthill to μPython with transient checks.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{ClassDecl, Constructor, Method, Term};
use crate::ty::{
    mems, queryable, subtype_consistent, tag_of, Ident, Openness, Type,
};
use crate::upy::{Arity, Expr, Label, Tag};

const TR: Label = Label::Translated;

/// Typing environment; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv(Vec<(Ident, Type)>);

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn push(&mut self, x: impl Into<Ident>, ty: Type) {
        self.0.push((x.into(), ty));
    }

    pub fn extended<I>(&self, bindings: I) -> TypeEnv
    where
        I: IntoIterator<Item = (Ident, Type)>,
    {
        let mut env = self.clone();
        env.0.extend(bindings);
        env
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Type)> {
        self.0.iter().map(|(x, t)| (x, t))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Ident, Type)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Ident, Type)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule}: {message}\n  in: {location}")]
pub struct StaticTypeError {
    pub rule: &'static str,
    pub location: String,
    pub message: String,
}

fn fail<T>(rule: &'static str, at: &impl fmt::Display, message: String) -> Result<T, StaticTypeError> {
    let mut location = at.to_string();
    if location.chars().count() > 120 {
        location = location.chars().take(117).collect::<String>() + "...";
    }
    Err(StaticTypeError {
        rule,
        location,
        message,
    })
}

pub type Translation = Result<(Expr, Type), StaticTypeError>;

/// Translates a closed term.
pub fn translate(t: &Term) -> Translation {
    translate_term(&TypeEnv::new(), t)
}

pub fn translate_term(env: &TypeEnv, t: &Term) -> Translation {
    match t {
        Term::Var(x) => match env.lookup(x) {
            Some(ty) => Ok((Expr::Var(x.clone()), ty.clone())),
            None => fail("IVar", t, format!("unbound variable `{x}`")),
        },
        Term::Int(n) => Ok((Expr::Int(n.clone()), Type::Int)),
        Term::Let(x, bound, body) => {
            let (e1, a1) = translate_term(env, bound)?;
            let (e2, a2) = translate_term(&env.extended([(x.clone(), a1)]), body)?;
            Ok((Expr::let_(x.clone(), e1, e2), a2))
        }
        Term::Get(subject, name) => {
            let (e, a1) = translate_term(env, subject)?;
            let Some(delta) = mems(&a1) else {
                return fail("IGet", t, format!("cannot read `{name}` from a value of type {a1}"));
            };
            if let Some(a2) = delta.get(name) {
                let tag = tag_of(a2);
                return Ok((Expr::check(Expr::get(e, name.clone(), TR), tag), a2.clone()));
            }
            if queryable(&a1) == Some(Openness::Open) {
                let subject = Expr::check(e, Tag::obj([name.clone()]));
                return Ok((Expr::get(subject, name.clone(), TR), Type::Dyn));
            }
            fail("IGet-Check", t, format!("closed type {a1} has no member `{name}`"))
        }
        Term::Set(subject, name, value) => {
            let (e1, a1) = translate_term(env, subject)?;
            let (e2, a2_actual) = translate_term(env, value)?;
            let Some(delta) = mems(&a1) else {
                return fail("ISet", t, format!("cannot write `{name}` on a value of type {a1}"));
            };
            if let Some(a2) = delta.get(name) {
                if !subtype_consistent(&a2_actual, a2) {
                    return fail(
                        "ISet",
                        t,
                        format!("expected a value compatible with {a2}, found {a2_actual}"),
                    );
                }
                let value = Expr::check(e2, tag_of(a2));
                return Ok((Expr::set(e1, name.clone(), value, TR), Type::Int));
            }
            if queryable(&a1) == Some(Openness::Open) {
                let subject = Expr::check(e1, Tag::Obj(BTreeSet::new()));
                return Ok((Expr::set(subject, name.clone(), e2, TR), Type::Int));
            }
            fail("ISet-Check", t, format!("closed type {a1} has no member `{name}`"))
        }
        Term::Fun(params, ret, body) => {
            distinct_params(params.iter().map(|(x, _)| x), "IFun", t)?;
            let (e, actual) = translate_term(&env.extended(params.iter().cloned()), body)?;
            if !subtype_consistent(&actual, ret) {
                return fail(
                    "IFun",
                    t,
                    format!("body has type {actual}, not compatible with declared {ret}"),
                );
            }
            let names = params.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>();
            let body = rebind_params(params, e);
            let ty = Type::function(params.iter().map(|(_, a)| a.clone()).collect(), ret.clone());
            Ok((Expr::Lambda(names, Box::new(body)), ty))
        }
        Term::App(callee, args) => {
            let (e1, a) = translate_term(env, callee)?;
            let translated = args
                .iter()
                .map(|arg| translate_term(env, arg))
                .collect::<Result<Vec<_>, _>>()?;
            let (es, actuals): (Vec<Expr>, Vec<Type>) = translated.into_iter().unzip();
            match &a {
                Type::Dyn => {
                    let callee = Expr::check(e1, Tag::Fun(es.len()));
                    Ok((Expr::app(callee, es, TR), Type::Dyn))
                }
                Type::Function(params, ret) => {
                    check_args("IApp-Fun", t, params, &actuals)?;
                    Ok((Expr::check(Expr::app(e1, es, TR), tag_of(ret)), (**ret).clone()))
                }
                Type::Class { ctor_params, .. } => {
                    check_args("IApp-Constr", t, ctor_params, &actuals)?;
                    let instance = a.instance_type().expect("class type");
                    Ok((Expr::check(Expr::app(e1, es, TR), tag_of(&instance)), instance))
                }
                _ => fail("IApp", t, format!("cannot call a value of type {a}")),
            }
        }
        Term::Class(decl) => translate_class(env, decl, t),
    }
}

fn distinct_params<'a, I>(names: I, rule: &'static str, at: &impl fmt::Display) -> Result<(), StaticTypeError>
where
    I: IntoIterator<Item = &'a Ident>,
{
    let mut seen = BTreeSet::new();
    for x in names {
        if !seen.insert(x) {
            return fail(rule, at, format!("duplicate parameter `{x}`"));
        }
    }
    Ok(())
}

fn check_args(rule: &'static str, at: &Term, params: &[Type], actuals: &[Type]) -> Result<(), StaticTypeError> {
    if params.len() != actuals.len() {
        return fail(
            rule,
            at,
            format!("expected {} arguments, found {}", params.len(), actuals.len()),
        );
    }
    for (i, (param, actual)) in params.iter().zip(actuals).enumerate() {
        if !subtype_consistent(actual, param) {
            return fail(
                rule,
                at,
                format!("argument {} has type {actual}, not compatible with {param}", i + 1),
            );
        }
    }
    Ok(())
}

/// `let x = check(x, ⌊A⌋) in …` for each parameter, outermost first.
fn rebind_params(params: &[(Ident, Type)], body: Expr) -> Expr {
    params.iter().rev().fold(body, |body, (x, a)| {
        Expr::let_(x.clone(), Expr::check(Expr::var(x.clone()), tag_of(a)), body)
    })
}

/// Returns the constructor lambda and its parameter types, receiver excluded.
pub fn translate_constructor(env: &TypeEnv, c: &Constructor) -> Result<(Expr, Vec<Type>), StaticTypeError> {
    let at = CtorDisplay(c);
    distinct_params(
        std::iter::once(&c.receiver).chain(c.params.iter().map(|(x, _)| x)),
        "IConstruct",
        &at,
    )?;
    let body_env = env
        .extended([(c.receiver.clone(), Type::Dyn)])
        .extended(c.params.iter().cloned());
    let (e, _) = translate_term(&body_env, &c.body)?;
    let names = std::iter::once(c.receiver.clone())
        .chain(c.params.iter().map(|(x, _)| x.clone()))
        .collect();
    let lambda = Expr::Lambda(names, Box::new(rebind_params(&c.params, e)));
    Ok((lambda, c.params.iter().map(|(_, a)| a.clone()).collect()))
}

/// Returns the method lambda and its type, receiver excluded.
pub fn translate_method(env: &TypeEnv, class_type: &Type, m: &Method) -> Translation {
    let at = MethodDisplay(m);
    let Some(instance) = class_type.instance_type() else {
        return fail("IMethod", &at, format!("{class_type} is not a class type"));
    };
    distinct_params(
        std::iter::once(&m.receiver).chain(m.params.iter().map(|(x, _)| x)),
        "IMethod",
        &at,
    )?;
    let body_env = env
        .extended([(m.receiver.clone(), instance.clone())])
        .extended(m.params.iter().cloned());
    let (e, actual) = translate_term(&body_env, &m.body)?;
    if !subtype_consistent(&actual, &m.ret) {
        return fail(
            "IMethod",
            &at,
            format!("body has type {actual}, not compatible with declared {}", m.ret),
        );
    }
    let body = Expr::let_(
        m.receiver.clone(),
        Expr::check(Expr::var(m.receiver.clone()), tag_of(&instance)),
        rebind_params(&m.params, e),
    );
    let names = std::iter::once(m.receiver.clone())
        .chain(m.params.iter().map(|(x, _)| x.clone()))
        .collect();
    let ty = Type::function(m.params.iter().map(|(_, a)| a.clone()).collect(), m.ret.clone());
    Ok((Expr::Lambda(names, Box::new(body)), ty))
}

/// The method's type as a class member: the receiver is prepended as `dyn`,
/// since the method checks it dynamically.
pub fn method_member_type(method_type: &Type) -> Type {
    match method_type {
        Type::Function(params, ret) => Type::Function(
            std::iter::once(Type::Dyn).chain(params.iter().cloned()).collect(),
            ret.clone(),
        ),
        other => other.clone(),
    }
}

fn translate_class(env: &TypeEnv, decl: &ClassDecl, t: &Term) -> Translation {
    let mut seen = BTreeSet::new();
    for label in decl
        .methods
        .iter()
        .map(|(l, _)| l)
        .chain(decl.fields.iter().map(|(l, _)| l))
    {
        if !seen.insert(label) {
            return fail("IClass", t, format!("duplicate member `{label}`"));
        }
    }

    let mut supers = Vec::with_capacity(decl.supers.len());
    let mut super_mems = Vec::with_capacity(decl.supers.len());
    for s in &decl.supers {
        let (e, a) = translate_term(env, s)?;
        let Some(delta) = mems(&a) else {
            return fail("IClass", t, format!("superclass has type {a}, which has no members"));
        };
        supers.push(Expr::check(e, Tag::Class(delta.name_set(), Arity::Any)));
        super_mems.push(delta);
    }

    let (ctor, ctor_params) = translate_constructor(env, &decl.ctor)?;
    let class_type = Type::class(
        decl.name.clone(),
        decl.openness,
        decl.class_attrs.clone(),
        decl.instance_attrs.clone(),
        ctor_params,
    );

    let mut members = Vec::with_capacity(decl.methods.len() + decl.fields.len());
    let mut local = Vec::with_capacity(members.capacity());
    for (label, m) in &decl.methods {
        let (e, ty) = translate_method(env, &class_type, m)?;
        members.push((label.clone(), e));
        local.push((label, method_member_type(&ty)));
    }
    for (label, field) in &decl.fields {
        let (e, ty) = translate_term(env, field)?;
        members.push((label.clone(), e));
        local.push((label, ty));
    }

    // local members shadow superclasses; among superclasses the leftmost wins
    for (name, declared) in decl.class_attrs.iter() {
        let provided = local
            .iter()
            .find(|(l, _)| *l == name)
            .map(|(_, ty)| ty)
            .or_else(|| super_mems.iter().find_map(|d| d.get(name)));
        match provided {
            None => {
                return fail("IClass", t, format!("class member `{name}` is not defined"));
            }
            Some(ty) if !subtype_consistent(ty, declared) => {
                return fail(
                    "IClass",
                    t,
                    format!("member `{name}` has type {ty}, not compatible with declared {declared}"),
                );
            }
            Some(_) => {}
        }
    }

    let e = Expr::Class {
        name: decl.name.clone(),
        supers,
        members,
        ctor: Box::new(ctor),
        label: TR,
    };
    Ok((e, class_type))
}

struct CtorDisplay<'a>(&'a Constructor);

impl fmt::Display for CtorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_ctor(f, self.0)
    }
}

struct MethodDisplay<'a>(&'a Method);

impl fmt::Display for MethodDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_method(f, self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ty::AttrType;

    fn attrs(entries: &[(&str, Type)]) -> AttrType {
        AttrType::from_entries(entries.iter().map(|(n, t)| (n.to_string(), t.clone()))).unwrap()
    }

    fn chk(e: Expr, tag: Tag) -> Expr {
        Expr::check(e, tag)
    }

    #[test]
    fn int_is_identity() {
        assert_eq!(translate(&Term::int(42)).unwrap(), (Expr::int(42), Type::Int));
    }

    #[test]
    fn function_parameter_is_rechecked() {
        let f = Term::fun(
            vec![("v".into(), Type::function(vec![Type::Int], Type::Int))],
            Type::Int,
            Term::app(Term::var("v"), vec![Term::int(42)]),
        );
        let (e, ty) = translate(&f).unwrap();
        let expected = Expr::lambda(
            ["v"],
            Expr::let_(
                "v",
                chk(Expr::var("v"), Tag::Fun(1)),
                chk(Expr::app(Expr::var("v"), vec![Expr::int(42)], TR), Tag::Int),
            ),
        );
        assert_eq!(e, expected);
        assert_eq!(ty, Type::function(vec![Type::function(vec![Type::Int], Type::Int)], Type::Int));
    }

    #[test]
    fn get_on_dyn_checks_subject() {
        let env: TypeEnv = [("x".to_string(), Type::Dyn)].into_iter().collect();
        let (e, ty) = translate_term(&env, &Term::get(Term::var("x"), "a")).unwrap();
        assert_eq!(e, Expr::get(chk(Expr::var("x"), Tag::obj(["a"])), "a", TR));
        assert_eq!(ty, Type::Dyn);
    }

    #[test]
    fn closed_object_rejects_unknown_member() {
        let closed = Type::object("X", Openness::Closed, attrs(&[("a", Type::Int)]));
        let env: TypeEnv = [("x".to_string(), closed)].into_iter().collect();
        let err = translate_term(&env, &Term::get(Term::var("x"), "b")).unwrap_err();
        assert_eq!(err.rule, "IGet-Check");
        let err = translate_term(&env, &Term::set(Term::var("x"), "b", Term::int(1))).unwrap_err();
        assert_eq!(err.rule, "ISet-Check");
    }

    #[test]
    fn set_checks_written_value() {
        let open = Type::object("X", Openness::Open, attrs(&[("a", Type::Int)]));
        let env: TypeEnv = [("x".to_string(), open), ("d".to_string(), Type::Dyn)]
            .into_iter()
            .collect();
        let (e, ty) = translate_term(&env, &Term::set(Term::var("x"), "a", Term::var("d"))).unwrap();
        assert_eq!(
            e,
            Expr::set(Expr::var("x"), "a", chk(Expr::var("d"), Tag::Int), TR)
        );
        assert_eq!(ty, Type::Int);
        let bad = Term::set(Term::var("x"), "a", Term::fun(vec![], Type::Int, Term::int(0)));
        assert_eq!(translate_term(&env, &bad).unwrap_err().rule, "ISet");
    }

    #[test]
    fn application_arity_and_compatibility() {
        let env: TypeEnv = [("f".to_string(), Type::function(vec![Type::Int], Type::Int))]
            .into_iter()
            .collect();
        let err = translate_term(&env, &Term::app(Term::var("f"), vec![])).unwrap_err();
        assert_eq!(err.rule, "IApp-Fun");
        let g = Term::fun(vec![], Type::Int, Term::int(0));
        let err = translate_term(&env, &Term::app(Term::var("f"), vec![g])).unwrap_err();
        assert_eq!(err.rule, "IApp-Fun");
        let err = translate(&Term::app(Term::int(4), vec![Term::int(2)])).unwrap_err();
        assert_eq!(err.rule, "IApp");
    }

    #[test]
    fn constructor_examples() {
        let c = Constructor {
            receiver: "self".into(),
            params: vec![("x".into(), Type::Int)],
            body: Term::set(Term::var("self"), "x", Term::var("x")),
        };
        let (e, params) = translate_constructor(&TypeEnv::new(), &c).unwrap();
        let expected = Expr::lambda(
            ["self", "x"],
            Expr::let_(
                "x",
                chk(Expr::var("x"), Tag::Int),
                Expr::set(chk(Expr::var("self"), Tag::obj(Vec::<String>::new())), "x", Expr::var("x"), TR),
            ),
        );
        assert_eq!(e, expected);
        assert_eq!(params, vec![Type::Int]);

        let trivial = Constructor {
            receiver: "self".into(),
            params: vec![],
            body: Term::int(0),
        };
        assert_eq!(
            translate_constructor(&TypeEnv::new(), &trivial).unwrap(),
            (Expr::lambda(["self"], Expr::int(0)), vec![])
        );
    }

    #[test]
    fn method_receiver_checked_against_instance() {
        let class_type = Type::class(
            "X",
            Openness::Open,
            attrs(&[("get", Type::function(vec![Type::Dyn], Type::Int))]),
            attrs(&[("x", Type::Int)]),
            vec![],
        );
        let m = Method {
            receiver: "self".into(),
            params: vec![],
            ret: Type::Int,
            body: Term::get(Term::var("self"), "x"),
        };
        let (e, ty) = translate_method(&TypeEnv::new(), &class_type, &m).unwrap();
        let expected = Expr::lambda(
            ["self"],
            Expr::let_(
                "self",
                chk(Expr::var("self"), Tag::obj(["get", "x"])),
                chk(Expr::get(Expr::var("self"), "x", TR), Tag::Int),
            ),
        );
        assert_eq!(e, expected);
        assert_eq!(ty, Type::function(vec![], Type::Int));
    }

    #[test]
    fn class_member_coverage() {
        let decl = |fields: Vec<(Ident, Term)>| ClassDecl {
            name: "C".into(),
            openness: Openness::Open,
            class_attrs: attrs(&[("k", Type::Int)]),
            instance_attrs: AttrType::new(),
            supers: vec![],
            methods: vec![],
            fields,
            ctor: Constructor {
                receiver: "self".into(),
                params: vec![],
                body: Term::int(0),
            },
        };
        assert!(translate(&Term::class(decl(vec![("k".into(), Term::int(1))]))).is_ok());
        let err = translate(&Term::class(decl(vec![]))).unwrap_err();
        assert_eq!(err.rule, "IClass");
        let wrong = Term::fun(vec![], Type::Int, Term::int(0));
        assert_eq!(
            translate(&Term::class(decl(vec![("k".into(), wrong)]))).unwrap_err().rule,
            "IClass"
        );
    }
}
