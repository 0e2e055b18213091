//! Proof search for the declarative tag typing rules over a finite tag
//! universe, plus an enumerator of small closed terms.

use std::collections::BTreeSet;

use anthill::{Arity, Expr, Label, Tag};

/// Attribute names and variables of the enumeration alphabet.
pub const ATTRS: &[&str] = &["a", "b"];
pub const VARS: &[&str] = &["x", "y"];
/// Largest function arity in the universe.
pub const MAX_ARITY: usize = 3;

fn subsets() -> Vec<BTreeSet<String>> {
    (0..1u32 << ATTRS.len())
        .map(|bits| {
            ATTRS
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, a)| a.to_string())
                .collect()
        })
        .collect()
}

/// Every tag over the alphabet with arities up to `MAX_ARITY`.
pub fn universe() -> Vec<Tag> {
    let mut out = vec![Tag::Pyobj, Tag::Int];
    out.extend((0..=MAX_ARITY).map(Tag::Fun));
    for d in subsets() {
        out.push(Tag::Obj(d.clone()));
        out.push(Tag::Class(d.clone(), Arity::Any));
        for n in 0..=MAX_ARITY {
            out.push(Tag::Class(d.clone(), Arity::Count(n)));
        }
    }
    out
}

/// Subtyping as the reflexive-transitive closure of the one-step axioms,
/// computed over the universe.
pub struct Closure {
    tags: Vec<Tag>,
    below: Vec<Vec<bool>>,
}

fn axiom(s1: &Tag, s2: &Tag) -> bool {
    match (s1, s2) {
        (_, Tag::Pyobj) => true,
        (Tag::Int, Tag::Int) => true,
        (Tag::Obj(d1), Tag::Obj(d2)) => d2.is_subset(d1),
        (Tag::Class(d1, Arity::Count(_)), Tag::Class(d2, Arity::Any)) => d1 == d2,
        (Tag::Class(d1, c1), Tag::Class(d2, c2)) => c1 == c2 && d2.is_subset(d1),
        (Tag::Class(d1, _), Tag::Obj(d2)) => d1 == d2,
        (Tag::Class(_, Arity::Count(n)), Tag::Fun(m)) => n == m,
        _ => s1 == s2,
    }
}

impl Closure {
    pub fn new() -> Self {
        let tags = universe();
        let n = tags.len();
        let mut below: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i == j || axiom(&tags[i], &tags[j])).collect())
            .collect();
        for k in 0..n {
            for i in 0..n {
                if below[i][k] {
                    for j in 0..n {
                        if below[k][j] {
                            below[i][j] = true;
                        }
                    }
                }
            }
        }
        Closure { tags, below }
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    fn index(&self, t: &Tag) -> usize {
        self.tags
            .iter()
            .position(|u| u == t)
            .unwrap_or_else(|| panic!("tag {t} outside the universe"))
    }

    pub fn sub(&self, s1: &Tag, s2: &Tag) -> bool {
        self.below[self.index(s1)][self.index(s2)]
    }
}

impl Default for Closure {
    fn default() -> Self {
        Self::new()
    }
}

type Env = Vec<(String, Tag)>;

fn lookup<'a>(env: &'a Env, x: &str) -> Option<&'a Tag> {
    env.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
}

/// `Γ; ∅ ⊢ e : S`, by searching for a derivation. Subsumption is applied once
/// at the root of each rule, which suffices because subtyping is transitive.
pub fn derivable(c: &Closure, env: &Env, e: &Expr, s: &Tag) -> bool {
    let dyn_ok = |e: &Expr| derivable(c, env, e, &Tag::Pyobj);
    let concl = |t: Tag| c.sub(&t, s);
    match e {
        Expr::Var(x) => lookup(env, x).is_some_and(|t| c.sub(t, s)),
        Expr::Int(_) => concl(Tag::Int),
        Expr::Addr(_) => false,
        Expr::Lambda(xs, body) => {
            let mut inner = env.clone();
            inner.extend(xs.iter().map(|x| (x.clone(), Tag::Pyobj)));
            derivable(c, &inner, body, &Tag::Pyobj) && concl(Tag::Fun(xs.len()))
        }
        Expr::Check(inner, t) => dyn_ok(inner) && concl(t.clone()),
        Expr::Let(x, bound, body) => c.tags().iter().any(|s1| {
            derivable(c, env, bound, s1) && {
                let mut inner = env.clone();
                inner.push((x.clone(), s1.clone()));
                derivable(c, &inner, body, s)
            }
        }),
        Expr::App(callee, args, p) => {
            let callee_ok = match p {
                Label::Native => dyn_ok(callee),
                Label::Translated => derivable(c, env, callee, &Tag::Fun(args.len())),
            };
            callee_ok && args.iter().all(dyn_ok) && concl(Tag::Pyobj)
        }
        Expr::Get(subject, l, p) => {
            let ok = match p {
                Label::Native => dyn_ok(subject),
                Label::Translated => derivable(c, env, subject, &Tag::obj([l.clone()])),
            };
            ok && concl(Tag::Pyobj)
        }
        Expr::Set(subject, _, value, p) => {
            let ok = match p {
                Label::Native => dyn_ok(subject),
                Label::Translated => derivable(c, env, subject, &Tag::Obj(BTreeSet::new())),
            };
            ok && dyn_ok(value) && concl(Tag::Int)
        }
        Expr::Class {
            supers,
            members,
            ctor,
            label,
            ..
        } => {
            if !members.iter().all(|(_, m)| dyn_ok(m)) {
                return false;
            }
            let own: BTreeSet<String> = members.iter().map(|(l, _)| l.clone()).collect();
            match label {
                Label::Native => {
                    supers.iter().all(dyn_ok) && dyn_ok(ctor) && concl(Tag::Class(own, Arity::Any))
                }
                Label::Translated => {
                    // choose a name set for each superclass
                    let choices: Vec<Vec<BTreeSet<String>>> = supers
                        .iter()
                        .map(|sup| {
                            subsets()
                                .into_iter()
                                .filter(|d| derivable(c, env, sup, &Tag::Class(d.clone(), Arity::Any)))
                                .collect()
                        })
                        .collect();
                    let arities: Vec<usize> = (0..MAX_ARITY)
                        .filter(|n| derivable(c, env, ctor, &Tag::Fun(n + 1)))
                        .collect();
                    let mut unions = vec![own];
                    for options in &choices {
                        unions = unions
                            .iter()
                            .flat_map(|acc| {
                                options.iter().map(move |d| acc.union(d).cloned().collect())
                            })
                            .collect();
                    }
                    unions.iter().any(|names| {
                        arities
                            .iter()
                            .any(|n| concl(Tag::Class(names.clone(), Arity::Count(*n))))
                    })
                }
            }
        }
    }
}

const CHECK_TAGS: fn() -> Vec<Tag> = || {
    vec![
        Tag::Int,
        Tag::Fun(1),
        Tag::obj(["a"]),
        Tag::class(["a"], Arity::Count(0)),
        Tag::class(Vec::<String>::new(), Arity::Any),
    ]
};

fn labels() -> [Label; 2] {
    [Label::Native, Label::Translated]
}

fn param_lists() -> Vec<Vec<String>> {
    vec![
        vec![],
        vec!["x".into()],
        vec!["y".into()],
        vec!["x".into(), "y".into()],
    ]
}

/// All terms of depth at most `depth` whose free variables are in `scope`.
///
/// Shape bounds: applications take up to two arguments, lambdas up to two
/// parameters, classes at most one superclass and one member.
pub fn terms(scope: &[String], depth: usize) -> Vec<Expr> {
    let mut out: Vec<Expr> = scope.iter().map(|x| Expr::var(x.as_str())).collect();
    out.push(Expr::int(0));
    if depth <= 1 {
        return out;
    }
    let sub = terms(scope, depth - 1);
    for ps in param_lists() {
        let mut inner = scope.to_vec();
        for p in &ps {
            if !inner.contains(p) {
                inner.push(p.clone());
            }
        }
        for body in terms(&inner, depth - 1) {
            out.push(Expr::Lambda(ps.clone(), Box::new(body)));
        }
    }
    for p in labels() {
        for callee in &sub {
            out.push(Expr::app(callee.clone(), vec![], p));
            for a1 in &sub {
                out.push(Expr::app(callee.clone(), vec![a1.clone()], p));
                for a2 in &sub {
                    out.push(Expr::app(callee.clone(), vec![a1.clone(), a2.clone()], p));
                }
            }
        }
        for s in &sub {
            for l in ATTRS {
                out.push(Expr::get(s.clone(), *l, p));
                for v in &sub {
                    out.push(Expr::set(s.clone(), *l, v.clone(), p));
                }
            }
        }
        let super_options: Vec<Vec<Expr>> = std::iter::once(vec![])
            .chain(sub.iter().map(|s| vec![s.clone()]))
            .collect();
        let member_options: Vec<Vec<(String, Expr)>> = std::iter::once(vec![])
            .chain(sub.iter().map(|m| vec![("a".to_string(), m.clone())]))
            .collect();
        for supers in &super_options {
            for members in &member_options {
                for ctor in &sub {
                    out.push(Expr::Class {
                        name: "K".into(),
                        supers: supers.clone(),
                        members: members.clone(),
                        ctor: Box::new(ctor.clone()),
                        label: p,
                    });
                }
            }
        }
    }
    for x in VARS {
        let mut inner = scope.to_vec();
        if !inner.iter().any(|y| y == x) {
            inner.push(x.to_string());
        }
        let bodies = terms(&inner, depth - 1);
        for bound in &sub {
            for body in &bodies {
                out.push(Expr::let_(*x, bound.clone(), body.clone()));
            }
        }
    }
    for s in &sub {
        for t in CHECK_TAGS() {
            out.push(Expr::check(s.clone(), t));
        }
    }
    out
}
