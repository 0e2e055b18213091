//! Small-step interpreter for labeled μPython.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ty::Ident;
use crate::upy::{substitute, Address, Arity, Expr, Label, NameSet, Tag};

/// Reserved binder for the discarded constructor result.
pub const WILDCARD: &str = "$_";

pub type Members = IndexMap<Ident, Expr>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeapValue {
    Class {
        supers: Vec<Address>,
        members: Members,
        ctor: Expr,
    },
    Object {
        class: Address,
        members: Members,
    },
}

impl HeapValue {
    pub fn members(&self) -> &Members {
        match self {
            HeapValue::Class { members, .. } | HeapValue::Object { members, .. } => members,
        }
    }

    fn members_mut(&mut self) -> &mut Members {
        match self {
            HeapValue::Class { members, .. } | HeapValue::Object { members, .. } => members,
        }
    }

    pub fn is_class(&self) -> bool {
        matches!(self, HeapValue::Class { .. })
    }
}

/// Address-indexed store. Addresses come from a monotone counter and are never reused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Heap {
    cells: BTreeMap<Address, HeapValue>,
    next: u64,
}

impl Heap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, value: HeapValue) -> Address {
        let a = Address(self.next);
        self.next += 1;
        self.cells.insert(a, value);
        a
    }

    pub fn get(&self, a: Address) -> Option<&HeapValue> {
        self.cells.get(&a)
    }

    pub fn contains(&self, a: Address) -> bool {
        self.cells.contains_key(&a)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Address, &HeapValue)> {
        self.cells.iter().map(|(a, h)| (*a, h))
    }

    pub fn addresses(&self) -> impl Iterator<Item = Address> + '_ {
        self.cells.keys().copied()
    }

    /// Strong update of one member. Returns false for unallocated addresses.
    pub fn write_member(&mut self, a: Address, name: &str, value: Expr) -> bool {
        match self.cells.get_mut(&a) {
            Some(h) => {
                h.members_mut().insert(name.to_string(), value);
                true
            }
            None => false,
        }
    }

    fn class_parts(&self, a: Address) -> Option<(&[Address], &Members, &Expr)> {
        match self.get(a)? {
            HeapValue::Class {
                supers,
                members,
                ctor,
            } => Some((supers, members, ctor)),
            HeapValue::Object { .. } => None,
        }
    }

    pub fn is_class(&self, a: Address) -> bool {
        self.class_parts(a).is_some()
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, h) in &self.cells {
            match h {
                HeapValue::Class {
                    supers,
                    members,
                    ctor,
                } => {
                    let supers: Vec<String> = supers.iter().map(|s| s.to_string()).collect();
                    write!(f, "{a} = class({})", supers.join(", "))?;
                    write_members(f, members)?;
                    writeln!(f, " init {ctor}")?;
                }
                HeapValue::Object { class, members } => {
                    write!(f, "{a} = obj({class})")?;
                    write_members(f, members)?;
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

fn write_members(f: &mut fmt::Formatter<'_>, members: &Members) -> fmt::Result {
    let parts: Vec<String> = members.iter().map(|(l, v)| format!("{l}={v}")).collect();
    write!(f, "{{{}}}", parts.join(", "))
}

// Heaps built by evaluation are acyclic: supers and constructors are
// evaluated before their class is allocated. Hand-built heaps may not be,
// so recursive walks stop after this many hops.
fn hop_limit(heap: &Heap) -> usize {
    heap.len() + 1
}

/// Attribute search: own members, then the class; for classes, superclasses
/// depth-first, left to right.
pub fn getattr<'h>(a: Address, name: &str, heap: &'h Heap) -> Option<&'h Expr> {
    getattr_bounded(a, name, heap, hop_limit(heap))
}

fn getattr_bounded<'h>(a: Address, name: &str, heap: &'h Heap, fuel: usize) -> Option<&'h Expr> {
    let fuel = fuel.checked_sub(1)?;
    match heap.get(a)? {
        HeapValue::Object { class, members } => members
            .get(name)
            .or_else(|| getattr_bounded(*class, name, heap, fuel)),
        HeapValue::Class {
            supers, members, ..
        } => members.get(name).or_else(|| {
            supers
                .iter()
                .find_map(|s| getattr_bounded(*s, name, heap, fuel))
        }),
    }
}

pub fn hasattrs(a: Address, names: &NameSet, heap: &Heap) -> bool {
    names.iter().all(|n| getattr(a, n, heap).is_some())
}

/// Every name `getattr` can find from `a`.
pub fn reachable_names(a: Address, heap: &Heap) -> NameSet {
    let mut out = NameSet::new();
    let mut pending = vec![(a, hop_limit(heap))];
    while let Some((a, fuel)) = pending.pop() {
        let Some(fuel) = fuel.checked_sub(1) else {
            continue;
        };
        match heap.get(a) {
            Some(HeapValue::Object { class, members }) => {
                out.extend(members.keys().cloned());
                pending.push((*class, fuel));
            }
            Some(HeapValue::Class {
                supers, members, ..
            }) => {
                out.extend(members.keys().cloned());
                pending.extend(supers.iter().map(|s| (*s, fuel)));
            }
            None => {}
        }
    }
    out
}

/// Arity compatibility of a callable value; classes answer for their constructor
/// with the receiver counted.
pub fn param_match(v: &Expr, heap: &Heap, arity: Arity) -> bool {
    param_match_bounded(v, heap, arity, hop_limit(heap))
}

fn param_match_bounded(v: &Expr, heap: &Heap, arity: Arity, fuel: usize) -> bool {
    match (v, arity) {
        (Expr::Lambda(..), Arity::Any) => true,
        (Expr::Lambda(params, _), Arity::Count(n)) => params.len() == n,
        (Expr::Addr(a), Arity::Any) => heap.is_class(*a),
        (Expr::Addr(a), Arity::Count(n)) => match (heap.class_parts(*a), fuel.checked_sub(1)) {
            (Some((_, _, ctor)), Some(fuel)) => {
                param_match_bounded(ctor, heap, Arity::Count(n + 1), fuel)
            }
            _ => false,
        },
        _ => false,
    }
}

/// The transient tag check. Values only.
pub fn check(v: &Expr, heap: &Heap, tag: &Tag) -> bool {
    match tag {
        Tag::Pyobj => true,
        Tag::Int => matches!(v, Expr::Int(_)),
        Tag::Obj(names) => match v {
            Expr::Addr(a) => hasattrs(*a, names, heap),
            _ => false,
        },
        Tag::Fun(n) => match v {
            Expr::Lambda(params, _) => params.len() == *n,
            Expr::Addr(a) => match heap.class_parts(*a) {
                Some((_, _, ctor)) => param_match(ctor, heap, Arity::Count(n + 1)),
                None => false,
            },
            _ => false,
        },
        // address form of param_match: a class of call arity n has a constructor of arity n+1
        Tag::Class(names, arity) => match v {
            Expr::Addr(a) => {
                heap.is_class(*a) && param_match(v, heap, *arity) && hasattrs(*a, names, heap)
            }
            _ => false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    Found(Expr),
    CastError,
    NotFound,
}

/// Attribute read with method currying for object receivers.
pub fn lookup(a: Address, h: &HeapValue, name: &str, heap: &Heap, label: Label) -> Lookup {
    match h {
        HeapValue::Object { members, .. } => {
            if let Some(v) = members.get(name) {
                return Lookup::Found(v.clone());
            }
            match getattr(a, name, heap) {
                None => Lookup::NotFound,
                Some(Expr::Lambda(params, _)) if params.is_empty() => Lookup::CastError,
                Some(method @ Expr::Lambda(params, _)) => {
                    let ys: Vec<Ident> = (0..params.len() - 1).map(|i| format!("$y{i}")).collect();
                    let args = std::iter::once(Expr::Addr(a))
                        .chain(ys.iter().map(|y| Expr::Var(y.clone())))
                        .collect();
                    Lookup::Found(Expr::Lambda(
                        ys,
                        Box::new(Expr::App(Box::new(method.clone()), args, label)),
                    ))
                }
                Some(v) => Lookup::Found(v.clone()),
            }
        }
        HeapValue::Class { .. } => match getattr(a, name, heap) {
            Some(v) => Lookup::Found(v.clone()),
            None => Lookup::NotFound,
        },
    }
}

/// Names of the reduction rules, for traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ECheck1,
    ECheck2,
    EApp1,
    EApp2,
    EApp3,
    ELet,
    EClass1,
    EClass2,
    EClass3,
    EGet1,
    EGet2,
    EGet3,
    ESet1,
    ESet2,
    ESet3,
    ESet4,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Next(Expr),
    CastError,
    PyError(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub rule: Rule,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("expression is already a value")]
    AlreadyValue,
    #[error("free variable `{0}`")]
    FreeVariable(Ident),
}

/// Performs one reduction. Errors from the redex discard the surrounding context.
///
/// Redex selection follows the evaluation contexts: callee before arguments,
/// arguments left to right; subject before value; class superclasses, then
/// constructor, then members in order.
pub fn step(e: &Expr, heap: &mut Heap) -> Result<Reduction, EvalError> {
    match e {
        Expr::Int(_) | Expr::Addr(_) | Expr::Lambda(..) => Err(EvalError::AlreadyValue),
        Expr::Var(x) => Err(EvalError::FreeVariable(x.clone())),
        Expr::Check(subject, tag) => {
            if !subject.is_value() {
                return inside(subject, heap, |s| Expr::Check(Box::new(s), tag.clone()));
            }
            Ok(if check(subject, heap, tag) {
                next(Rule::ECheck1, (**subject).clone())
            } else {
                Reduction {
                    rule: Rule::ECheck2,
                    step: Step::CastError,
                }
            })
        }
        Expr::Let(x, bound, body) => {
            if !bound.is_value() {
                return inside(bound, heap, |b| Expr::Let(x.clone(), Box::new(b), body.clone()));
            }
            Ok(next(Rule::ELet, crate::upy::substitute_one(body, x, bound)))
        }
        Expr::App(callee, args, p) => {
            if !callee.is_value() {
                return inside(callee, heap, |c| Expr::App(Box::new(c), args.clone(), *p));
            }
            if let Some(i) = args.iter().position(|a| !a.is_value()) {
                return inside(&args[i], heap, |arg| {
                    let mut args = args.clone();
                    args[i] = arg;
                    Expr::App(callee.clone(), args, *p)
                });
            }
            Ok(apply(callee, args, *p, heap))
        }
        Expr::Get(subject, name, p) => {
            if !subject.is_value() {
                return inside(subject, heap, |s| Expr::Get(Box::new(s), name.clone(), *p));
            }
            let Expr::Addr(a) = **subject else {
                return Ok(pyerror(Rule::EGet3, *p));
            };
            let Some(h) = heap.get(a) else {
                return Ok(pyerror(Rule::EGet2, *p));
            };
            Ok(match lookup(a, h, name, heap, *p) {
                Lookup::Found(v) => next(Rule::EGet1, v),
                Lookup::CastError => Reduction {
                    rule: Rule::EGet1,
                    step: Step::CastError,
                },
                Lookup::NotFound => pyerror(Rule::EGet2, *p),
            })
        }
        Expr::Set(subject, name, value, p) => {
            if !subject.is_value() {
                return inside(subject, heap, |s| {
                    Expr::Set(Box::new(s), name.clone(), value.clone(), *p)
                });
            }
            if !value.is_value() {
                return inside(value, heap, |v| {
                    Expr::Set(subject.clone(), name.clone(), Box::new(v), *p)
                });
            }
            let Expr::Addr(a) = **subject else {
                return Ok(pyerror(Rule::ESet4, *p));
            };
            let rule = match heap.get(a) {
                Some(HeapValue::Object { .. }) => Rule::ESet1,
                Some(HeapValue::Class { .. }) => Rule::ESet2,
                None => return Ok(pyerror(Rule::ESet3, *p)),
            };
            heap.write_member(a, name, (**value).clone());
            Ok(next(rule, Expr::int(0)))
        }
        Expr::Class {
            name,
            supers,
            members,
            ctor,
            label,
        } => {
            let rebuild = |supers: Vec<Expr>, members: Vec<(Ident, Expr)>, ctor: Expr| Expr::Class {
                name: name.clone(),
                supers,
                members,
                ctor: Box::new(ctor),
                label: *label,
            };
            if let Some(i) = supers.iter().position(|s| !s.is_value()) {
                return inside(&supers[i], heap, |s| {
                    let mut supers = supers.clone();
                    supers[i] = s;
                    rebuild(supers, members.clone(), (**ctor).clone())
                });
            }
            if !ctor.is_value() {
                return inside(ctor, heap, |c| rebuild(supers.clone(), members.clone(), c));
            }
            if let Some(i) = members.iter().position(|(_, m)| !m.is_value()) {
                return inside(&members[i].1, heap, |m| {
                    let mut members = members.clone();
                    members[i].1 = m;
                    rebuild(supers.clone(), members, (**ctor).clone())
                });
            }
            let Some(super_addrs) = supers.iter().map(Expr::as_addr).collect::<Option<Vec<_>>>()
            else {
                return Ok(pyerror(Rule::EClass3, *label));
            };
            if !super_addrs.iter().all(|a| heap.is_class(*a))
                || !param_match(ctor, heap, Arity::Any)
            {
                return Ok(pyerror(Rule::EClass2, *label));
            }
            let a = heap.alloc(HeapValue::Class {
                supers: super_addrs,
                members: members.iter().cloned().collect(),
                ctor: (**ctor).clone(),
            });
            Ok(next(Rule::EClass1, Expr::Addr(a)))
        }
    }
}

fn next(rule: Rule, e: Expr) -> Reduction {
    Reduction {
        rule,
        step: Step::Next(e),
    }
}

fn pyerror(rule: Rule, p: Label) -> Reduction {
    Reduction {
        rule,
        step: Step::PyError(p),
    }
}

fn inside<F>(sub: &Expr, heap: &mut Heap, plug: F) -> Result<Reduction, EvalError>
where
    F: FnOnce(Expr) -> Expr,
{
    let r = step(sub, heap)?;
    Ok(match r.step {
        Step::Next(e) => next(r.rule, plug(e)),
        other => Reduction {
            rule: r.rule,
            step: other,
        },
    })
}

fn apply(callee: &Expr, args: &[Expr], p: Label, heap: &mut Heap) -> Reduction {
    match callee {
        Expr::Lambda(params, body) if params.len() == args.len() => {
            let bindings: BTreeMap<Ident, Expr> =
                params.iter().cloned().zip(args.iter().cloned()).collect();
            next(Rule::EApp1, substitute(body, &bindings))
        }
        Expr::Addr(a) => match heap.class_parts(*a) {
            Some((_, _, ctor)) => {
                let ctor = ctor.clone();
                let obj = heap.alloc(HeapValue::Object {
                    class: *a,
                    members: Members::new(),
                });
                let init_args = std::iter::once(Expr::Addr(obj))
                    .chain(args.iter().cloned())
                    .collect();
                next(
                    Rule::EApp2,
                    Expr::let_(
                        WILDCARD,
                        Expr::App(Box::new(ctor), init_args, p),
                        Expr::Addr(obj),
                    ),
                )
            }
            None => pyerror(Rule::EApp3, p),
        },
        _ => pyerror(Rule::EApp3, p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Expr, Heap),
    CastError,
    PyError(Label),
    Timeout(u64),
}

impl Outcome {
    pub fn is_translated_pyerror(&self) -> bool {
        matches!(self, Outcome::PyError(Label::Translated))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(v, _) => write!(f, "{v}"),
            Outcome::CastError => f.write_str("casterror"),
            Outcome::PyError(p) => write!(f, "pyerror({})", p.name()),
            Outcome::Timeout(n) => write!(f, "timeout({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub outcome: Outcome,
    pub steps: u64,
}

/// One line of an evaluation trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub index: u64,
    pub rule: Rule,
    pub heap_size: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6} {:<8} heap={}", self.index, self.rule, self.heap_size)
    }
}

pub fn run(e: Expr, heap: Heap, budget: u64) -> Result<Evaluation, EvalError> {
    run_traced(e, heap, budget, |_| {})
}

/// Steps until a value, an error, or `budget` steps have been taken.
pub fn run_traced<F>(mut e: Expr, mut heap: Heap, budget: u64, mut trace: F) -> Result<Evaluation, EvalError>
where
    F: FnMut(TraceEvent),
{
    if let Some(x) = e.free_vars().into_iter().next() {
        return Err(EvalError::FreeVariable(x));
    }
    let mut steps = 0;
    loop {
        if e.is_value() {
            return Ok(Evaluation {
                outcome: Outcome::Value(e, heap),
                steps,
            });
        }
        if steps == budget {
            return Ok(Evaluation {
                outcome: Outcome::Timeout(budget),
                steps,
            });
        }
        let r = step(&e, &mut heap)?;
        steps += 1;
        trace(TraceEvent {
            index: steps,
            rule: r.rule,
            heap_size: heap.len(),
        });
        match r.step {
            Step::Next(e2) => e = e2,
            Step::CastError => {
                return Ok(Evaluation {
                    outcome: Outcome::CastError,
                    steps,
                })
            }
            Step::PyError(p) => {
                return Ok(Evaluation {
                    outcome: Outcome::PyError(p),
                    steps,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Native, Translated};

    fn lam(params: &[&str], body: Expr) -> Expr {
        Expr::lambda(params.iter().copied(), body)
    }

    fn class(heap: &mut Heap, supers: Vec<Address>, members: &[(&str, Expr)], ctor: Expr) -> Address {
        heap.alloc(HeapValue::Class {
            supers,
            members: members.iter().map(|(l, v)| (l.to_string(), v.clone())).collect(),
            ctor,
        })
    }

    fn object(heap: &mut Heap, class: Address, members: &[(&str, Expr)]) -> Address {
        heap.alloc(HeapValue::Object {
            class,
            members: members.iter().map(|(l, v)| (l.to_string(), v.clone())).collect(),
        })
    }

    fn names(ns: &[&str]) -> NameSet {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn check_examples() {
        let mut heap = Heap::new();
        assert!(check(&Expr::int(42), &heap, &Tag::Int));
        assert!(check(&Expr::int(42), &heap, &Tag::Pyobj));
        let two = lam(&["x", "y"], Expr::var("x"));
        assert!(check(&two, &heap, &Tag::Fun(2)));
        assert!(!check(&lam(&["x"], Expr::var("x")), &heap, &Tag::Fun(2)));
        let c = class(&mut heap, vec![], &[], lam(&["self", "a"], Expr::int(0)));
        assert!(check(&Expr::Addr(c), &heap, &Tag::Fun(1)));
        assert!(!check(&Expr::Addr(c), &heap, &Tag::Fun(2)));
        assert!(check(&Expr::Addr(c), &heap, &Tag::Class(names(&[]), Arity::Count(1))));
        assert!(check(&Expr::Addr(c), &heap, &Tag::Class(names(&[]), Arity::Any)));
        assert!(!check(&Expr::Addr(c), &heap, &Tag::Class(names(&[]), Arity::Count(2))));
    }

    #[test]
    fn getattr_diamond_prefers_leftmost() {
        let mut heap = Heap::new();
        let ctor = lam(&["s"], Expr::int(0));
        let a = class(&mut heap, vec![], &[("g", Expr::int(0))], ctor.clone());
        let b = class(&mut heap, vec![a], &[("g", Expr::int(1))], ctor.clone());
        let c = class(&mut heap, vec![a], &[("g", Expr::int(2))], ctor.clone());
        let d = class(&mut heap, vec![b, c], &[], ctor.clone());
        assert_eq!(getattr(d, "g", &heap), Some(&Expr::int(1)));
        let d2 = class(&mut heap, vec![c, b], &[], ctor);
        assert_eq!(getattr(d2, "g", &heap), Some(&Expr::int(2)));
        assert_eq!(getattr(d, "missing", &heap), None);
    }

    #[test]
    fn lookup_curries_methods() {
        let mut heap = Heap::new();
        let m = lam(&["self", "z"], Expr::var("z"));
        let c = class(
            &mut heap,
            vec![],
            &[("m", m.clone()), ("k", lam(&[], Expr::int(0)))],
            lam(&["s"], Expr::int(0)),
        );
        let o = object(&mut heap, c, &[("x", Expr::int(7))]);
        let h = heap.get(o).unwrap().clone();
        assert_eq!(lookup(o, &h, "x", &heap, Native), Lookup::Found(Expr::int(7)));
        assert_eq!(
            lookup(o, &h, "m", &heap, Translated),
            Lookup::Found(lam(
                &["$y0"],
                Expr::app(m, vec![Expr::Addr(o), Expr::var("$y0")], Translated)
            ))
        );
        assert_eq!(lookup(o, &h, "k", &heap, Native), Lookup::CastError);
        assert_eq!(lookup(o, &h, "nope", &heap, Native), Lookup::NotFound);
        let hc = heap.get(c).unwrap().clone();
        assert_eq!(
            lookup(c, &hc, "k", &heap, Native),
            Lookup::Found(lam(&[], Expr::int(0)))
        );
    }

    #[test]
    fn param_match_examples() {
        let mut heap = Heap::new();
        assert!(param_match(&lam(&["x", "y"], Expr::var("x")), &heap, Arity::Count(2)));
        assert!(param_match(&lam(&["x"], Expr::var("x")), &heap, Arity::Any));
        let c = class(&mut heap, vec![], &[], lam(&["s", "a", "b"], Expr::int(0)));
        assert!(param_match(&Expr::Addr(c), &heap, Arity::Count(2)));
        assert!(!param_match(&Expr::int(3), &heap, Arity::Any));
    }

    #[test]
    fn omega_times_out() {
        let w = lam(&["x"], Expr::app(Expr::var("x"), vec![Expr::var("x")], Native));
        let omega = Expr::app(w.clone(), vec![w], Native);
        let ev = run(omega, Heap::new(), 1000).unwrap();
        assert_eq!(ev.outcome, Outcome::Timeout(1000));
    }

    #[test]
    fn untyped_call_of_int_is_native_pyerror() {
        let f = lam(&["v"], Expr::app(Expr::var("v"), vec![Expr::int(42)], Native));
        let e = Expr::app(f, vec![Expr::int(21)], Native);
        let ev = run(e, Heap::new(), 10).unwrap();
        assert_eq!(ev.outcome, Outcome::PyError(Native));
        assert_eq!(ev.steps, 2);
    }

    #[test]
    fn set_updates_object() {
        let mut heap = Heap::new();
        let c = class(&mut heap, vec![], &[], lam(&["s"], Expr::int(0)));
        let o = object(&mut heap, c, &[]);
        let e = Expr::set(Expr::Addr(o), "l", Expr::int(5), Translated);
        let r = step(&e, &mut heap).unwrap();
        assert_eq!(r.step, Step::Next(Expr::int(0)));
        assert_eq!(heap.get(o).unwrap().members().get("l"), Some(&Expr::int(5)));
    }

    #[test]
    fn instantiation_runs_constructor() {
        let ctor = lam(
            &["self", "v"],
            Expr::set(Expr::var("self"), "x", Expr::var("v"), Native),
        );
        let cls = Expr::Class {
            name: "C".into(),
            supers: vec![],
            members: vec![],
            ctor: Box::new(ctor),
            label: Native,
        };
        let e = Expr::get(Expr::app(cls, vec![Expr::int(3)], Native), "x", Native);
        let ev = run(e, Heap::new(), 100).unwrap();
        match ev.outcome {
            Outcome::Value(v, heap) => {
                assert_eq!(v, Expr::int(3));
                assert_eq!(heap.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn run_rejects_open_terms() {
        assert_eq!(
            run(Expr::var("x"), Heap::new(), 1),
            Err(EvalError::FreeVariable("x".into()))
        );
    }
}
