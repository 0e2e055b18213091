//! Naive transcriptions of the runtime metafunctions: no fuel, no sharing,
//! no early exits beyond what the definitions state. Heaps must be acyclic.

use anthill::runtime::{HeapValue, Lookup};
use anthill::{Address, Arity, Expr, Heap, Label, Tag};

/// Addresses in search order: the cell itself, then for an object its class
/// chain, for a class each superclass subtree left to right.
fn search_order(a: Address, heap: &Heap) -> Vec<Address> {
    let mut order = vec![a];
    match heap.get(a) {
        Some(HeapValue::Object { class, .. }) => order.extend(search_order(*class, heap)),
        Some(HeapValue::Class { supers, .. }) => {
            for s in supers {
                order.extend(search_order(*s, heap));
            }
        }
        None => order.clear(),
    }
    order
}

pub fn getattr(a: Address, name: &str, heap: &Heap) -> Option<Expr> {
    search_order(a, heap)
        .into_iter()
        .filter_map(|b| heap.get(b))
        .find_map(|h| h.members().get(name).cloned())
}

pub fn hasattrs<'n>(a: Address, names: impl IntoIterator<Item = &'n String>, heap: &Heap) -> bool {
    names.into_iter().all(|l| getattr(a, l, heap).is_some())
}

pub fn param_match(v: &Expr, heap: &Heap, arity: Arity) -> bool {
    match v {
        Expr::Lambda(params, _) => match arity {
            Arity::Any => true,
            Arity::Count(n) => params.len() == n,
        },
        Expr::Addr(a) => match heap.get(*a) {
            Some(HeapValue::Class { ctor, .. }) => match arity {
                Arity::Any => true,
                Arity::Count(n) => param_match(ctor, heap, Arity::Count(n + 1)),
            },
            _ => false,
        },
        _ => false,
    }
}

pub fn check(v: &Expr, heap: &Heap, tag: &Tag) -> bool {
    let class_ctor = |v: &Expr| match v {
        Expr::Addr(a) => match heap.get(*a) {
            Some(HeapValue::Class { ctor, .. }) => Some(ctor.clone()),
            _ => None,
        },
        _ => None,
    };
    match tag {
        Tag::Pyobj => true,
        Tag::Int => matches!(v, Expr::Int(_)),
        Tag::Obj(names) => match v {
            // vacuous for an empty name set, even at a dangling address
            Expr::Addr(a) => hasattrs(*a, names, heap),
            _ => false,
        },
        Tag::Fun(n) => match v {
            Expr::Lambda(params, _) => params.len() == *n,
            _ => class_ctor(v).is_some_and(|c| param_match(&c, heap, Arity::Count(n + 1))),
        },
        Tag::Class(names, arity) => match v {
            Expr::Addr(a) => {
                class_ctor(v).is_some() && param_match(v, heap, *arity) && hasattrs(*a, names, heap)
            }
            _ => false,
        },
    }
}

pub fn lookup(a: Address, h: &HeapValue, name: &str, heap: &Heap, label: Label) -> Lookup {
    match h {
        HeapValue::Class { .. } => match getattr(a, name, heap) {
            Some(v) => Lookup::Found(v),
            None => Lookup::NotFound,
        },
        HeapValue::Object { members, .. } => {
            if let Some(v) = members.get(name) {
                return Lookup::Found(v.clone());
            }
            match getattr(a, name, heap) {
                None => Lookup::NotFound,
                Some(Expr::Lambda(xs, body)) => {
                    if xs.is_empty() {
                        return Lookup::CastError;
                    }
                    let ys: Vec<String> = (1..xs.len()).map(|i| format!("$y{}", i - 1)).collect();
                    let mut args = vec![Expr::Addr(a)];
                    args.extend(ys.iter().map(|y| Expr::var(y.as_str())));
                    let method = Expr::Lambda(xs, body);
                    Lookup::Found(Expr::Lambda(ys, Box::new(Expr::app(method, args, label))))
                }
                Some(v) => Lookup::Found(v),
            }
        }
    }
}
