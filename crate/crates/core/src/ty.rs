//! Gradual types of Anthill and the static relations the translator consumes.

use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::upy::{Arity, Tag};

pub type Ident = String;

/// Whether an object or class type admits implicit width downcasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Openness {
    Open,
    Closed,
}

/// Attribute type: attribute names mapped to types, in declaration order.
///
/// Equality ignores declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttrType(IndexMap<Ident, Type>);

impl AttrType {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an attribute type, rejecting duplicate names.
    pub fn from_entries<I>(entries: I) -> Result<Self, Ident>
    where
        I: IntoIterator<Item = (Ident, Type)>,
    {
        let mut map = IndexMap::new();
        for (name, ty) in entries {
            if map.contains_key(&name) {
                return Err(name);
            }
            map.insert(name, ty);
        }
        Ok(Self(map))
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    /// Inserts or replaces an entry; a new name goes to the end.
    pub fn insert(&mut self, name: Ident, ty: Type) {
        self.0.insert(name, ty);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Type)> {
        self.0.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Ident> {
        self.0.keys()
    }

    pub fn name_set(&self) -> BTreeSet<Ident> {
        self.0.keys().cloned().collect()
    }
}

impl FromIterator<(Ident, Type)> for AttrType {
    /// Later duplicates replace earlier ones.
    fn from_iter<I: IntoIterator<Item = (Ident, Type)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Dyn,
    Int,
    Function(Vec<Type>, Box<Type>),
    Object {
        name: Ident,
        openness: Openness,
        attrs: AttrType,
    },
    Class {
        name: Ident,
        openness: Openness,
        class_attrs: AttrType,
        instance_attrs: AttrType,
        ctor_params: Vec<Type>,
    },
}

impl Type {
    pub fn function(params: Vec<Type>, ret: Type) -> Self {
        Type::Function(params, Box::new(ret))
    }

    pub fn object(name: impl Into<Ident>, openness: Openness, attrs: AttrType) -> Self {
        Type::Object {
            name: name.into(),
            openness,
            attrs,
        }
    }

    pub fn class(
        name: impl Into<Ident>,
        openness: Openness,
        class_attrs: AttrType,
        instance_attrs: AttrType,
        ctor_params: Vec<Type>,
    ) -> Self {
        Type::Class {
            name: name.into(),
            openness,
            class_attrs,
            instance_attrs,
            ctor_params,
        }
    }

    /// The type of instances created by calling a class of this type.
    pub fn instance_type(&self) -> Option<Type> {
        match self {
            Type::Class {
                name,
                openness,
                class_attrs,
                instance_attrs,
                ..
            } => Some(Type::object(
                name.clone(),
                *openness,
                instantiate(class_attrs, instance_attrs),
            )),
            _ => None,
        }
    }
}

fn all_pairs<F>(left: &[Type], right: &[Type], rel: F) -> bool
where
    F: Fn(&Type, &Type) -> bool,
{
    left.len() == right.len() && left.iter().zip(right).all(|(a, b)| rel(a, b))
}

/// Consistency `A ∼ A`: equality up to `Dyn`. Symmetric and reflexive, not transitive.
pub fn consistent(a1: &Type, a2: &Type) -> bool {
    match (a1, a2) {
        (Type::Dyn, _) | (_, Type::Dyn) => true,
        (Type::Int, Type::Int) => true,
        (Type::Function(p1, r1), Type::Function(p2, r2)) => {
            all_pairs(p1, p2, consistent) && consistent(r1, r2)
        }
        (Type::Object { attrs: d1, .. }, Type::Object { attrs: d2, .. }) => {
            attrs_consistent(d1, d2)
        }
        (
            Type::Class {
                class_attrs: d1,
                instance_attrs: d2,
                ctor_params: p1,
                ..
            },
            Type::Class {
                class_attrs: d3,
                instance_attrs: d4,
                ctor_params: p2,
                ..
            },
        ) => attrs_consistent(d1, d3) && attrs_consistent(d2, d4) && all_pairs(p1, p2, consistent),
        _ => false,
    }
}

/// `Δ ∼ Δ`: members present on both sides are consistent.
pub fn attrs_consistent(d1: &AttrType, d2: &AttrType) -> bool {
    d1.iter()
        .all(|(name, ty)| d2.get(name).is_none_or(|other| consistent(ty, other)))
}

/// `Δ₁ ≲ Δ₂`: every member of `d2` is present in `d1` with a consistent type.
pub fn attrs_subtype_consistent(d1: &AttrType, d2: &AttrType) -> bool {
    d2.iter()
        .all(|(name, ty)| d1.get(name).is_some_and(|mine| consistent(mine, ty)))
}

/// Subtype-consistency `A ≲ A`: subtyping up to `Dyn`.
pub fn subtype_consistent(a1: &Type, a2: &Type) -> bool {
    match (a1, a2) {
        (Type::Dyn, _) | (_, Type::Dyn) => true,
        (Type::Int, Type::Int) => true,
        (Type::Function(p1, r1), Type::Function(p2, r2)) => {
            all_pairs(p2, p1, subtype_consistent) && subtype_consistent(r1, r2)
        }
        (Type::Object { attrs: d1, .. }, Type::Object { attrs: d2, .. }) => {
            attrs_subtype_consistent(d1, d2)
        }
        (
            Type::Class {
                class_attrs: d1,
                instance_attrs: d2,
                ctor_params: p1,
                ..
            },
            Type::Class {
                class_attrs: d3,
                instance_attrs: d4,
                ctor_params: p2,
                ..
            },
        ) => {
            attrs_subtype_consistent(d1, d3)
                && attrs_subtype_consistent(d2, d4)
                && all_pairs(p2, p1, subtype_consistent)
        }
        (Type::Class { class_attrs: d1, .. }, Type::Object { attrs: d3, .. }) => {
            attrs_subtype_consistent(d1, d3)
        }
        // class-to-function goes last: a class is callable as its constructor
        (Type::Class { ctor_params, .. }, Type::Function(params, ret)) => {
            all_pairs(params, ctor_params, subtype_consistent)
                && a1
                    .instance_type()
                    .is_some_and(|instance| subtype_consistent(&instance, ret))
        }
        _ => false,
    }
}

/// Members statically known to be present; `None` for `Int` and functions.
pub fn mems(a: &Type) -> Option<AttrType> {
    match a {
        Type::Dyn => Some(AttrType::new()),
        Type::Object { attrs, .. } => Some(attrs.clone()),
        Type::Class { class_attrs, .. } => Some(class_attrs.clone()),
        Type::Int | Type::Function(..) => None,
    }
}

pub fn queryable(a: &Type) -> Option<Openness> {
    match a {
        Type::Dyn => Some(Openness::Open),
        Type::Object { openness, .. } | Type::Class { openness, .. } => Some(*openness),
        Type::Int | Type::Function(..) => None,
    }
}

/// Instance attribute type of a class: class members with receivers dropped,
/// then instance fields not shadowed by a class member.
pub fn instantiate(class_attrs: &AttrType, instance_attrs: &AttrType) -> AttrType {
    let mut out: AttrType = class_attrs
        .iter()
        .map(|(name, ty)| (name.clone(), inst_fun(ty)))
        .collect();
    for (name, ty) in instance_attrs.iter() {
        if !class_attrs.contains(name) {
            out.insert(name.clone(), ty.clone());
        }
    }
    out
}

/// Drops the receiver parameter of a method type. Nullary function types and
/// non-functions are returned unchanged.
pub fn inst_fun(a: &Type) -> Type {
    match a {
        Type::Function(params, ret) if !params.is_empty() => {
            Type::Function(params[1..].to_vec(), ret.clone())
        }
        other => other.clone(),
    }
}

/// The runtime tag `⌊A⌋` checked for values of type `a`.
pub fn tag_of(a: &Type) -> Tag {
    match a {
        Type::Dyn => Tag::Pyobj,
        Type::Int => Tag::Int,
        Type::Function(params, _) => Tag::Fun(params.len()),
        Type::Object { attrs, .. } => Tag::Obj(attrs.name_set()),
        Type::Class {
            class_attrs,
            ctor_params,
            ..
        } => Tag::Class(class_attrs.name_set(), Arity::Count(ctor_params.len())),
    }
}
