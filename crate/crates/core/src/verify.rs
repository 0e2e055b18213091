//! Tag type system for labeled μPython: subtyping, principal-tag inference, heap typing.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::runtime::{hasattrs, param_match, reachable_names, Heap, HeapValue};
use crate::ty::{tag_of, Ident};
use crate::translate::TypeEnv;
use crate::upy::{Address, Arity, Expr, Label, NameSet, Tag};

/// Tag environment; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TagEnv(Vec<(Ident, Tag)>);

impl TagEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Tag> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, s)| s)
    }

    pub fn push(&mut self, x: impl Into<Ident>, tag: Tag) {
        self.0.push((x.into(), tag));
    }

    pub fn pop(&mut self) -> Option<(Ident, Tag)> {
        self.0.pop()
    }

    pub fn extended<I>(&self, bindings: I) -> TagEnv
    where
        I: IntoIterator<Item = (Ident, Tag)>,
    {
        let mut env = self.clone();
        env.0.extend(bindings);
        env
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Tag)> {
        self.0.iter().map(|(x, s)| (x, s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `⌊Γ⌋`: the pointwise tag image of a typing environment.
    pub fn from_types(env: &TypeEnv) -> TagEnv {
        env.iter().map(|(x, a)| (x.clone(), tag_of(a))).collect()
    }
}

impl FromIterator<(Ident, Tag)> for TagEnv {
    fn from_iter<I: IntoIterator<Item = (Ident, Tag)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

pub type HeapType = BTreeMap<Address, Tag>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule}: {detail}\n  in: {subterm}")]
pub struct IllTyped {
    pub rule: &'static str,
    pub subterm: String,
    pub detail: String,
}

fn ill<T>(rule: &'static str, e: &Expr, detail: String) -> Result<T, IllTyped> {
    let mut subterm = e.to_string();
    if subterm.chars().count() > 120 {
        subterm = subterm.chars().take(117).collect::<String>() + "...";
    }
    Err(IllTyped {
        rule,
        subterm,
        detail,
    })
}

/// Tag subtyping, decided directly on the closure of the axioms.
pub fn tag_subtype(s1: &Tag, s2: &Tag) -> bool {
    match (s1, s2) {
        (_, Tag::Pyobj) => true,
        (Tag::Int, Tag::Int) => true,
        (Tag::Fun(n), Tag::Fun(m)) => n == m,
        (Tag::Obj(d1), Tag::Obj(d2)) => d2.is_subset(d1),
        (Tag::Class(d1, c1), Tag::Class(d2, c2)) => {
            d2.is_subset(d1) && (c1 == c2 || *c2 == Arity::Any)
        }
        (Tag::Class(d1, _), Tag::Obj(d2)) => d2.is_subset(d1),
        (Tag::Class(_, Arity::Count(n)), Tag::Fun(m)) => n == m,
        _ => false,
    }
}

/// `Σ₁ ⊑ Σ₂`: every address of `s1` has a tag in `s2` at least as precise.
pub fn heap_type_weaker(s1: &HeapType, s2: &HeapType) -> bool {
    s1.iter()
        .all(|(a, t1)| s2.get(a).is_some_and(|t2| tag_subtype(t2, t1)))
}

/// Principal (least) tag of `e`, with subsumption folded into premise checks.
pub fn infer(env: &TagEnv, sigma: &HeapType, e: &Expr) -> Result<Tag, IllTyped> {
    match e {
        Expr::Var(x) => match env.lookup(x) {
            Some(s) => Ok(s.clone()),
            None => ill("TVar", e, format!("unbound variable `{x}`")),
        },
        Expr::Addr(a) => match sigma.get(a) {
            Some(s) => Ok(s.clone()),
            None => ill("TAddr", e, format!("address {a} has no heap type")),
        },
        Expr::Int(_) => Ok(Tag::Int),
        Expr::Lambda(params, body) => {
            let inner = env.extended(params.iter().map(|x| (x.clone(), Tag::Pyobj)));
            infer(&inner, sigma, body)?;
            Ok(Tag::Fun(params.len()))
        }
        Expr::Check(subject, tag) => {
            infer(env, sigma, subject)?;
            Ok(tag.clone())
        }
        Expr::Let(x, bound, body) => {
            let s1 = infer(env, sigma, bound)?;
            infer(&env.extended([(x.clone(), s1)]), sigma, body)
        }
        Expr::App(callee, args, p) => {
            let s = infer(env, sigma, callee)?;
            for arg in args {
                infer(env, sigma, arg)?;
            }
            if *p == Label::Translated && !tag_subtype(&s, &Tag::Fun(args.len())) {
                return ill(
                    "TApp",
                    e,
                    format!("callee has tag {s}, expected {}", Tag::Fun(args.len())),
                );
            }
            Ok(Tag::Pyobj)
        }
        Expr::Get(subject, name, p) => {
            let s = infer(env, sigma, subject)?;
            let want = Tag::obj([name.clone()]);
            if *p == Label::Translated && !tag_subtype(&s, &want) {
                return ill("TGet", e, format!("subject has tag {s}, expected {want}"));
            }
            Ok(Tag::Pyobj)
        }
        Expr::Set(subject, _, value, p) => {
            let s = infer(env, sigma, subject)?;
            infer(env, sigma, value)?;
            let want = Tag::Obj(NameSet::new());
            if *p == Label::Translated && !tag_subtype(&s, &want) {
                return ill("TSet", e, format!("subject has tag {s}, expected {want}"));
            }
            Ok(Tag::Int)
        }
        Expr::Class {
            supers,
            members,
            ctor,
            label,
            ..
        } => {
            let super_tags = supers
                .iter()
                .map(|s| infer(env, sigma, s))
                .collect::<Result<Vec<_>, _>>()?;
            for (_, m) in members {
                infer(env, sigma, m)?;
            }
            let ctor_tag = infer(env, sigma, ctor)?;
            let own: NameSet = members.iter().map(|(l, _)| l.clone()).collect();
            if *label == Label::Native {
                return Ok(Tag::Class(own, Arity::Any));
            }
            let mut names = own;
            for s in &super_tags {
                match s {
                    Tag::Class(d, _) => names.extend(d.iter().cloned()),
                    _ => return ill("TClass", e, format!("superclass has tag {s}, expected a class tag")),
                }
            }
            let n = match ctor_tag {
                Tag::Fun(m) | Tag::Class(_, Arity::Count(m)) if m >= 1 => m - 1,
                other => {
                    return ill(
                        "TClass",
                        e,
                        format!("constructor has tag {other}, expected a function taking a receiver"),
                    )
                }
            };
            Ok(Tag::Class(names, Arity::Count(n)))
        }
    }
}

/// Accepts `e` at `want` when its principal tag is a subtag.
pub fn check_at(env: &TagEnv, sigma: &HeapType, e: &Expr, want: &Tag) -> Result<Tag, IllTyped> {
    let s = infer(env, sigma, e)?;
    if tag_subtype(&s, want) {
        Ok(s)
    } else {
        ill("TSubsump", e, format!("has tag {s}, expected {want}"))
    }
}

/// Call arity of a class: `Count(n)` when its constructor takes the receiver plus n.
pub fn class_call_arity(a: Address, heap: &Heap) -> Arity {
    let Some(HeapValue::Class { ctor, .. }) = heap.get(a) else {
        return Arity::Any;
    };
    let arity = match ctor {
        Expr::Lambda(params, _) => params.len().checked_sub(1),
        Expr::Addr(b) if *b != a => match class_call_arity(*b, heap) {
            Arity::Count(m) => m.checked_sub(1),
            Arity::Any => None,
        },
        _ => None,
    };
    match arity {
        Some(n) if param_match(&Expr::Addr(a), heap, Arity::Count(n)) => Arity::Count(n),
        _ => Arity::Any,
    }
}

/// The most precise heap type: every reachable name, exact call arity where defined.
pub fn principal_heap_type(heap: &Heap) -> HeapType {
    heap.iter()
        .map(|(a, h)| {
            let names = reachable_names(a, heap);
            let tag = match h {
                HeapValue::Class { .. } => Tag::Class(names, class_call_arity(a, heap)),
                HeapValue::Object { .. } => Tag::Obj(names),
            };
            (a, tag)
        })
        .collect()
}

/// `Σ ⊢ μ`, with a reason on failure.
///
/// Beyond the member values, a class's constructor must also be well typed:
/// instantiating the class runs it.
pub fn explain_heap(sigma: &HeapType, heap: &Heap) -> Result<(), String> {
    if sigma.len() != heap.len() || !heap.addresses().all(|a| sigma.contains_key(&a)) {
        return Err("heap type and heap have different domains".into());
    }
    let empty = TagEnv::new();
    let class_tagged = |a: &Address| matches!(sigma.get(a), Some(Tag::Class(..)));
    for (a, h) in heap.iter() {
        let tag = &sigma[&a];
        let names = match (tag, h) {
            (Tag::Class(names, arity), HeapValue::Class { supers, ctor, .. }) => {
                if !param_match(&Expr::Addr(a), heap, *arity) {
                    return Err(format!("{a}: constructor does not match arity {arity:?}"));
                }
                if let Some(s) = supers.iter().find(|s| !class_tagged(s)) {
                    return Err(format!("{a}: superclass {s} is not class-tagged"));
                }
                infer(&empty, sigma, ctor).map_err(|err| format!("{a}: constructor: {err}"))?;
                names
            }
            (Tag::Obj(names), HeapValue::Object { class, .. }) => {
                if !class_tagged(class) {
                    return Err(format!("{a}: class {class} is not class-tagged"));
                }
                names
            }
            _ => return Err(format!("{a}: tag {tag} does not fit the heap value")),
        };
        if !hasattrs(a, names, heap) {
            return Err(format!("{a}: missing some of {tag}"));
        }
        for (l, v) in h.members() {
            infer(&empty, sigma, v).map_err(|err| format!("{a}.{l}: {err}"))?;
        }
    }
    Ok(())
}

pub fn heap_ok(sigma: &HeapType, heap: &Heap) -> bool {
    explain_heap(sigma, heap).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::Members;

    fn ns(names: &[&str]) -> NameSet {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn subtyping_examples() {
        assert!(tag_subtype(&Tag::Int, &Tag::Pyobj));
        assert!(tag_subtype(&Tag::Class(ns(&["m"]), Arity::Count(2)), &Tag::Fun(2)));
        assert!(tag_subtype(&Tag::Obj(ns(&["a", "b"])), &Tag::Obj(ns(&["a"]))));
        assert!(!tag_subtype(&Tag::Obj(ns(&["a"])), &Tag::Obj(ns(&["a", "b"]))));
        assert!(!tag_subtype(&Tag::Class(ns(&[]), Arity::Any), &Tag::Fun(0)));
        assert!(tag_subtype(&Tag::Class(ns(&["a"]), Arity::Count(1)), &Tag::Class(ns(&[]), Arity::Any)));
        assert!(!tag_subtype(&Tag::Pyobj, &Tag::Int));
    }

    #[test]
    fn inference_examples() {
        let env = TagEnv::new();
        let sigma = HeapType::new();
        let bad = Expr::app(Expr::int(4), vec![Expr::int(2)], Label::Translated);
        assert_eq!(infer(&env, &sigma, &bad).unwrap_err().rule, "TApp");
        let ok = Expr::app(Expr::int(4), vec![Expr::int(2)], Label::Native);
        assert_eq!(infer(&env, &sigma, &ok).unwrap(), Tag::Pyobj);
        let x_env: TagEnv = [("x".to_string(), Tag::Pyobj)].into_iter().collect();
        assert_eq!(
            infer(&x_env, &sigma, &Expr::check(Expr::var("x"), Tag::Fun(1))).unwrap(),
            Tag::Fun(1)
        );
        assert_eq!(
            infer(&env, &sigma, &Expr::lambda(["x"], Expr::var("x"))).unwrap(),
            Tag::Fun(1)
        );
        let set = Expr::set(Expr::check(Expr::int(0), Tag::obj(["a"])), "a", Expr::int(1), Label::Translated);
        assert_eq!(infer(&env, &sigma, &set).unwrap(), Tag::Int);
    }

    #[test]
    fn translated_class_tag() {
        let cls = Expr::Class {
            name: "C".into(),
            supers: vec![Expr::check(Expr::int(0), Tag::Class(ns(&["s"]), Arity::Any))],
            members: vec![("m".into(), Expr::int(1))],
            ctor: Box::new(Expr::lambda(["self", "a"], Expr::int(0))),
            label: Label::Translated,
        };
        assert_eq!(
            infer(&TagEnv::new(), &HeapType::new(), &cls).unwrap(),
            Tag::Class(ns(&["m", "s"]), Arity::Count(1))
        );
    }

    #[test]
    fn heap_typing_examples() {
        assert!(heap_ok(&HeapType::new(), &Heap::new()));
        let mut heap = Heap::new();
        let c = heap.alloc(HeapValue::Class {
            supers: vec![],
            members: Members::new(),
            ctor: Expr::lambda(["s"], Expr::int(0)),
        });
        let sigma = HeapType::from([(c, Tag::Class(ns(&[]), Arity::Any))]);
        assert!(heap_ok(&sigma, &heap));
        assert_eq!(principal_heap_type(&heap)[&c], Tag::Class(ns(&[]), Arity::Count(0)));
        let o = heap.alloc(HeapValue::Object {
            class: c,
            members: Members::new(),
        });
        let mut sigma = principal_heap_type(&heap);
        assert_eq!(sigma[&o], Tag::Obj(ns(&[])));
        assert!(heap_ok(&sigma, &heap));
        sigma.insert(o, Tag::Obj(ns(&["x"])));
        assert!(!heap_ok(&sigma, &heap));
    }
}
