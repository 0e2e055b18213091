//! Seeded generators: well-typed Anthill terms, adversarial untyped contexts,
//! and raw syntax for round-trip testing.
//!
//! Typed generation is derivation-directed. Every candidate is run through the
//! translator and kept only if its actual type is compatible with the target,
//! so a returned term always translates.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::CodeContext;
use crate::term::{ClassDecl, Constructor, Method, Term};
use crate::translate::{translate_term, TypeEnv};
use crate::ty::{mems, subtype_consistent, AttrType, Ident, Openness, Type};
use crate::upy::{Arity, Expr, Label, NameSet, Tag};

pub const LABELS: &[&str] = &["a", "b", "c", "m", "n"];
const TYPED_VARS: &[&str] = &["x", "y", "z", "f", "g"];
const CONTEXT_VARS: &[&str] = &["u", "v", "w", "h", "k"];
const ATTEMPTS: usize = 6;
/// Share of context fillers drawn from the unrestricted (often failing) generator.
const JUNK_RATE: f64 = 0.15;

pub struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        xs.choose(&mut self.rng).expect("non-empty choice")
    }

    fn fresh(&mut self, prefix: &str) -> Ident {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn small_int(&mut self) -> u64 {
        self.rng.random_range(0..100)
    }

    fn labels(&mut self, max: usize) -> Vec<Ident> {
        let k = self.rng.random_range(0..=max);
        let mut out: Vec<Ident> = LABELS
            .choose_multiple(&mut self.rng, k)
            .map(|s| s.to_string())
            .collect();
        out.sort();
        out
    }

    // ---------------------------------------------------------------- types

    pub fn rand_type(&mut self, depth: usize) -> Type {
        let max = if depth == 0 { 2 } else { 11 };
        match self.below(max) {
            0 => Type::Dyn,
            1 => Type::Int,
            2..=3 => Type::Dyn,
            4..=5 => Type::Int,
            6..=7 => {
                let n = self.below(3);
                let params = (0..n).map(|_| self.rand_type(depth - 1)).collect();
                Type::function(params, self.rand_type(depth - 1))
            }
            8..=9 => {
                let attrs = self.rand_attrs(depth - 1, 2);
                Type::object(self.fresh("P"), self.openness(), attrs)
            }
            _ => self.rand_class_type(depth - 1),
        }
    }

    fn openness(&mut self) -> Openness {
        if self.chance(0.6) {
            Openness::Open
        } else {
            Openness::Closed
        }
    }

    fn rand_attrs(&mut self, depth: usize, max: usize) -> AttrType {
        self.labels(max)
            .into_iter()
            .map(|l| (l, self.rand_type(depth)))
            .collect()
    }

    fn rand_class_type(&mut self, depth: usize) -> Type {
        let class_attrs: AttrType = self
            .labels(2)
            .into_iter()
            .map(|l| {
                let ty = if self.chance(0.5) {
                    // a method, receiver first
                    let n = self.below(2);
                    let params = std::iter::once(Type::Dyn)
                        .chain((0..n).map(|_| self.rand_type(depth.saturating_sub(1))))
                        .collect();
                    Type::function(params, self.rand_type(depth.saturating_sub(1)))
                } else {
                    self.rand_type(depth)
                };
                (l, ty)
            })
            .collect();
        let instance_attrs = self.rand_attrs(depth, 2);
        let n = self.below(2);
        let ctor_params = (0..n).map(|_| self.rand_type(depth)).collect();
        Type::class(self.fresh("C"), self.openness(), class_attrs, instance_attrs, ctor_params)
    }

    /// A random type whose tag is exactly `tag`. Classes of unknown arity
    /// are given object types.
    pub fn type_with_tag(&mut self, tag: &Tag) -> Type {
        let names = |names: &NameSet| names.iter().cloned().collect::<Vec<_>>();
        match tag {
            Tag::Pyobj => Type::Dyn,
            Tag::Int => Type::Int,
            Tag::Fun(n) => {
                let params = (0..*n).map(|_| self.rand_type(1)).collect();
                Type::function(params, self.rand_type(1))
            }
            Tag::Obj(ls) | Tag::Class(ls, Arity::Any) => {
                let attrs = names(ls).into_iter().map(|l| (l, self.rand_type(1))).collect();
                Type::object(self.fresh("P"), self.openness(), attrs)
            }
            Tag::Class(ls, Arity::Count(n)) => {
                let class_attrs = names(ls).into_iter().map(|l| (l, self.rand_type(1))).collect();
                let instance_attrs = self.rand_attrs(1, 2);
                let ctor_params = (0..*n).map(|_| self.rand_type(1)).collect();
                Type::class(self.fresh("C"), self.openness(), class_attrs, instance_attrs, ctor_params)
            }
        }
    }

    // ---------------------------------------------------------- typed terms

    /// A term of depth at most `depth` that translates under `env` at a type
    /// compatible with `target` (any type when `None`).
    pub fn typed_term(&mut self, env: &TypeEnv, target: Option<&Type>, depth: usize) -> Term {
        let depth = depth.max(1);
        let target = match target {
            Some(t) => t.clone(),
            None => self.rand_type(2),
        };
        self.term_at(env, &target, depth)
            .or_else(|| self.term_at(env, &Type::Dyn, depth))
            .unwrap_or_else(|| Term::int(self.small_int()))
    }

    fn typed(&mut self, env: &TypeEnv, target: &Type, depth: usize) -> Option<(Term, Type)> {
        let t = self.term_at(env, target, depth)?;
        let (_, ty) = translate_term(env, &t).ok()?;
        Some((t, ty))
    }

    fn term_at(&mut self, env: &TypeEnv, target: &Type, depth: usize) -> Option<Term> {
        if depth == 0 {
            return None;
        }
        for _ in 0..ATTEMPTS {
            if let Some(t) = self.production(env, target, depth) {
                if t.depth() <= depth && fits(env, &t, target) {
                    return Some(t);
                }
            }
        }
        self.fallback(env, target, depth)
    }

    fn fallback(&mut self, env: &TypeEnv, target: &Type, depth: usize) -> Option<Term> {
        if let Some(t) = self.var_at(env, target) {
            return Some(t);
        }
        if matches!(target, Type::Int | Type::Dyn) {
            return Some(Term::int(self.small_int()));
        }
        if depth >= 3 {
            return Some(dyn_cast());
        }
        if let Type::Function(params, ret) = target {
            if depth >= 2 {
                let t = self.fun_term(env, params, ret, depth)?;
                return fits(env, &t, target).then_some(t);
            }
        }
        None
    }

    fn var_at(&mut self, env: &TypeEnv, target: &Type) -> Option<Term> {
        let bindings: Vec<_> = env.iter().collect();
        let mut seen = Vec::new();
        let candidates: Vec<&Ident> = bindings
            .into_iter()
            .rev()
            .filter(|(x, _)| {
                let first = !seen.contains(x);
                seen.push(*x);
                first
            })
            .filter(|(_, a)| subtype_consistent(a, target))
            .map(|(x, _)| x)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        Some(Term::var(self.pick(&candidates).as_str()))
    }

    fn production(&mut self, env: &TypeEnv, target: &Type, depth: usize) -> Option<Term> {
        if depth == 1 {
            return if self.chance(0.5) {
                self.var_at(env, target)
            } else {
                Some(Term::int(self.small_int()))
            };
        }
        let d = depth - 1;
        let mut options = vec![(Prod::Let, 2), (Prod::AppFun, 3), (Prod::Get, 2)];
        if matches!(target, Type::Int | Type::Dyn) {
            options.push((Prod::Leaf, 1));
            options.push((Prod::Set, 2));
        }
        if matches!(target, Type::Function(..) | Type::Dyn) {
            options.push((Prod::Fun, 3));
        }
        if matches!(target, Type::Class { .. } | Type::Dyn) {
            options.push((Prod::Class, 3));
        }
        if depth >= 3 {
            options.push((Prod::AppDyn, 1));
            if matches!(target, Type::Object { .. } | Type::Dyn) {
                options.push((Prod::New, 4));
            }
        }
        let total: usize = options.iter().map(|(_, w)| w).sum();
        let mut roll = self.below(total);
        let prod = options
            .iter()
            .find(|(_, w)| {
                if roll < *w {
                    true
                } else {
                    roll -= w;
                    false
                }
            })
            .map(|(p, _)| *p)
            .expect("weighted choice");

        match prod {
            Prod::Leaf => self.production(env, target, 1),
            Prod::Let => {
                let x = self.pick(TYPED_VARS).to_string();
                let bound_ty = self.rand_type(2);
                let (bound, actual) = self.typed(env, &bound_ty, d)?;
                let body = self.term_at(&env.extended([(x.clone(), actual)]), target, d)?;
                Some(Term::let_(x, bound, body))
            }
            Prod::Fun => {
                let (params, ret) = match target {
                    Type::Function(params, ret) => (params.clone(), (**ret).clone()),
                    _ => {
                        let n = self.below(3);
                        ((0..n).map(|_| self.rand_type(1)).collect(), self.rand_type(1))
                    }
                };
                self.fun_term(env, &params, &ret, depth)
            }
            Prod::AppFun => {
                let n = self.below(3);
                let params = (0..n).map(|_| self.rand_type(1)).collect();
                let want = Type::function(params, target.clone());
                let (callee, actual) = self.typed(env, &want, d)?;
                let args = self.args_for(env, &actual, d)?;
                Some(Term::app(callee, args))
            }
            Prod::AppDyn => {
                let (callee, _) = self.typed(env, &Type::Dyn, d)?;
                let n = self.below(3);
                let args = (0..n)
                    .map(|_| {
                        let ty = self.rand_type(1);
                        self.term_at(env, &ty, d)
                    })
                    .collect::<Option<Vec<_>>>()?;
                Some(Term::app(callee, args))
            }
            Prod::Get => {
                let l = self.pick(LABELS).to_string();
                let subject_ty = if self.chance(0.2) {
                    Type::Dyn
                } else {
                    let mut attrs = self.rand_attrs(1, 1);
                    attrs.insert(l.clone(), target.clone());
                    Type::object(self.fresh("P"), self.openness(), attrs)
                };
                let (subject, _) = self.typed(env, &subject_ty, d)?;
                Some(Term::get(subject, l))
            }
            Prod::Set => {
                let l = self.pick(LABELS).to_string();
                let member_ty = self.rand_type(1);
                let mut attrs = self.rand_attrs(1, 1);
                attrs.insert(l.clone(), member_ty.clone());
                let subject_ty = Type::object(self.fresh("P"), self.openness(), attrs);
                let (subject, actual) = self.typed(env, &subject_ty, d)?;
                let value_ty = mems(&actual)
                    .and_then(|delta| delta.get(&l).cloned())
                    .unwrap_or(member_ty);
                let value = self.term_at(env, &value_ty, d)?;
                Some(Term::set(subject, l, value))
            }
            Prod::New => {
                let instance = match target {
                    Type::Object { attrs, .. } => attrs.clone(),
                    _ => self.rand_attrs(1, 2),
                };
                let class_ty = self.class_type_for_instance(&instance);
                let (callee, actual) = self.typed(env, &class_ty, d)?;
                let args = self.args_for(env, &actual, d)?;
                Some(Term::app(callee, args))
            }
            Prod::Class => {
                let class_ty = match target {
                    Type::Class { .. } => target.clone(),
                    _ => self.rand_class_type(1),
                };
                self.class_decl(env, &class_ty, depth)
            }
        }
    }

    fn fun_term(&mut self, env: &TypeEnv, params: &[Type], ret: &Type, depth: usize) -> Option<Term> {
        let names = ["p", "q", "r", "s"];
        let typed_params: Vec<(Ident, Type)> = params
            .iter()
            .enumerate()
            .map(|(i, a)| (names[i % names.len()].to_string(), a.clone()))
            .collect();
        if typed_params.len() > names.len() {
            return None;
        }
        let body = self.term_at(&env.extended(typed_params.iter().cloned()), ret, depth - 1)?;
        Some(Term::fun(typed_params, ret.clone(), body))
    }

    /// Arguments suited to calling a value of type `callee`.
    fn args_for(&mut self, env: &TypeEnv, callee: &Type, depth: usize) -> Option<Vec<Term>> {
        let params = match callee {
            Type::Function(params, _) => params.clone(),
            Type::Class { ctor_params, .. } => ctor_params.clone(),
            Type::Dyn => (0..self.below(3)).map(|_| self.rand_type(1)).collect(),
            _ => return None,
        };
        params.iter().map(|a| self.term_at(env, a, depth)).collect()
    }

    fn class_type_for_instance(&mut self, instance: &AttrType) -> Type {
        // members wanted on instances become instance fields; class members
        // use other labels so they do not shadow them
        let free: Vec<&str> = LABELS
            .iter()
            .copied()
            .filter(|l| !instance.contains(l))
            .collect();
        let mut class_attrs = AttrType::new();
        if !free.is_empty() && self.chance(0.5) {
            let l = self.pick(&free).to_string();
            let ret = self.rand_type(1);
            let ty = if self.chance(0.7) {
                Type::function(vec![Type::Dyn], ret)
            } else {
                ret
            };
            class_attrs.insert(l, ty);
        }
        let n = self.below(2);
        let ctor_params = (0..n).map(|_| self.rand_type(1)).collect();
        Type::class(self.fresh("C"), self.openness(), class_attrs, instance.clone(), ctor_params)
    }

    fn class_decl(&mut self, env: &TypeEnv, class_ty: &Type, depth: usize) -> Option<Term> {
        let Type::Class {
            name,
            openness,
            class_attrs,
            instance_attrs,
            ctor_params,
        } = class_ty
        else {
            return None;
        };
        let d = depth - 1;
        let instance = class_ty.instance_type()?;

        let mut supers = Vec::new();
        let mut super_mems = Vec::new();
        if d >= 2 && self.chance(0.35) {
            let want = if self.chance(0.2) {
                Type::Dyn
            } else {
                self.rand_class_type(1)
            };
            let (s, actual) = self.typed(env, &want, d)?;
            super_mems.push(mems(&actual)?);
            supers.push(s);
        }

        let mut methods = Vec::new();
        let mut fields = Vec::new();
        for (l, declared) in class_attrs.iter() {
            let inherited = super_mems
                .first()
                .and_then(|delta| delta.get(l))
                .is_some_and(|ty| subtype_consistent(ty, declared));
            if inherited && self.chance(0.6) {
                continue;
            }
            match declared {
                Type::Function(params, ret) if !params.is_empty() && self.chance(0.7) => {
                    let typed_params: Vec<(Ident, Type)> = params[1..]
                        .iter()
                        .enumerate()
                        .map(|(i, a)| (format!("a{i}"), a.clone()))
                        .collect();
                    let body_env = env
                        .extended([("self".to_string(), instance.clone())])
                        .extended(typed_params.iter().cloned());
                    let body = self.term_at(&body_env, ret, d)?;
                    let m = Method {
                        receiver: "self".into(),
                        params: typed_params,
                        ret: (**ret).clone(),
                        body,
                    };
                    methods.push((l.clone(), m));
                }
                _ => fields.push((l.clone(), self.term_at(env, declared, d)?)),
            }
        }
        if self.chance(0.15) {
            let extra = self.pick(LABELS).to_string();
            if !class_attrs.contains(&extra) {
                fields.push((extra, Term::int(self.small_int())));
            }
        }

        let ctor = self.constructor(env, instance_attrs, ctor_params, &methods, d);
        Some(Term::class(ClassDecl {
            name: name.clone(),
            openness: *openness,
            class_attrs: class_attrs.clone(),
            instance_attrs: instance_attrs.clone(),
            supers,
            methods,
            fields,
            ctor,
        }))
    }

    fn constructor(
        &mut self,
        env: &TypeEnv,
        instance_attrs: &AttrType,
        ctor_params: &[Type],
        methods: &[(Ident, Method)],
        depth: usize,
    ) -> Constructor {
        let params: Vec<(Ident, Type)> = ctor_params
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("i{i}"), a.clone()))
            .collect();
        let body_env = env
            .extended([("self".to_string(), Type::Dyn)])
            .extended(params.iter().cloned());
        let mut stmts = Vec::new();
        // occasionally call a method before the fields exist
        if !methods.is_empty() && self.chance(0.15) {
            let (l, m) = self.pick(methods).clone();
            let args = (0..m.params.len()).map(|_| Term::int(self.small_int())).collect();
            stmts.push(Term::app(Term::get(Term::var("self"), l), args));
        }
        for (l, a) in instance_attrs.iter() {
            if self.chance(0.1) {
                continue;
            }
            let budget = depth.saturating_sub(stmts.len() + 2).max(1);
            let value = self
                .term_at(&body_env, a, budget)
                .unwrap_or_else(|| Term::int(0));
            stmts.push(Term::set(Term::var("self"), l.clone(), value));
        }
        let mut body = sequence(&mut stmts.clone(), Term::int(0), &mut self.fresh);
        while body.depth() > depth && !stmts.is_empty() {
            stmts.pop();
            body = sequence(&mut stmts.clone(), Term::int(0), &mut self.fresh);
        }
        Constructor {
            receiver: "self".into(),
            params,
            body,
        }
    }

    // ------------------------------------------------------ untyped programs

    /// A random native tag.
    pub fn rand_tag(&mut self) -> Tag {
        match self.below(5) {
            0 => Tag::Pyobj,
            1 => Tag::Int,
            2 => Tag::Fun(self.below(3)),
            3 => Tag::Obj(self.labels(2).into_iter().collect()),
            _ => {
                let arity = if self.chance(0.5) {
                    Arity::Any
                } else {
                    Arity::Count(self.below(3))
                };
                Tag::Class(self.labels(2).into_iter().collect(), arity)
            }
        }
    }

    /// A native expression whose free variables are drawn from `scope`.
    /// Deliberately includes ill-behaved code.
    pub fn untyped(&mut self, scope: &[Ident], depth: usize) -> Expr {
        self.untyped_labeled(scope, depth, false)
    }

    /// Like [`Gen::untyped`], optionally with random labels (for syntax tests).
    pub fn untyped_labeled(&mut self, scope: &[Ident], depth: usize, mixed: bool) -> Expr {
        let label = |g: &mut Gen| {
            if mixed && g.chance(0.5) {
                Label::Translated
            } else {
                Label::Native
            }
        };
        if depth <= 1 {
            return if !scope.is_empty() && self.chance(0.6) {
                Expr::var(self.pick(scope).as_str())
            } else {
                Expr::int(self.small_int())
            };
        }
        let d = depth - 1;
        match self.below(20) {
            0..=2 => self.untyped_labeled(scope, 1, mixed),
            3..=4 => {
                let n = self.below(3);
                let mut params: Vec<Ident> = CONTEXT_VARS
                    .choose_multiple(&mut self.rng, n)
                    .map(|s| s.to_string())
                    .collect();
                params.sort();
                let inner = extend(scope, &params);
                Expr::Lambda(params, Box::new(self.untyped_labeled(&inner, d, mixed)))
            }
            5..=7 => {
                let callee = self.untyped_labeled(scope, d, mixed);
                let n = self.below(3);
                let args = (0..n).map(|_| self.untyped_labeled(scope, d, mixed)).collect();
                Expr::App(Box::new(callee), args, label(self))
            }
            8..=9 => {
                let subject = self.untyped_labeled(scope, d, mixed);
                Expr::Get(Box::new(subject), self.pick(LABELS).to_string(), label(self))
            }
            10..=11 => {
                let subject = self.untyped_labeled(scope, d, mixed);
                let value = self.untyped_labeled(scope, d, mixed);
                Expr::Set(
                    Box::new(subject),
                    self.pick(LABELS).to_string(),
                    Box::new(value),
                    label(self),
                )
            }
            12..=13 => {
                let x = self.pick(CONTEXT_VARS).to_string();
                let bound = self.untyped_labeled(scope, d, mixed);
                let body = self.untyped_labeled(&extend(scope, std::slice::from_ref(&x)), d, mixed);
                Expr::let_(x, bound, body)
            }
            14..=15 => self.untyped_class(scope, d, mixed),
            16 => Expr::check(self.untyped_labeled(scope, d, mixed), self.rand_tag()),
            17 => Expr::app(Expr::int(4), vec![Expr::int(2)], Label::Native),
            18 if !scope.is_empty() => {
                // poke at a variable: call it, read it, or overwrite a member
                let x = Expr::var(self.pick(scope).as_str());
                let arg = self.untyped_labeled(scope, d, mixed);
                match self.below(3) {
                    0 => Expr::app(x, vec![arg], Label::Native),
                    1 => Expr::get(x, self.pick(LABELS).to_string(), Label::Native),
                    _ => Expr::set(x, self.pick(LABELS).to_string(), arg, Label::Native),
                }
            }
            _ => Expr::int(self.small_int()),
        }
    }

    fn untyped_class(&mut self, scope: &[Ident], depth: usize, mixed: bool) -> Expr {
        let supers = (0..self.below(2))
            .map(|_| self.untyped_labeled(scope, depth, mixed))
            .collect();
        let members = self
            .labels(2)
            .into_iter()
            .map(|l| (l, self.untyped_labeled(scope, depth, mixed)))
            .collect();
        let ctor = if self.chance(0.8) {
            let mut params = vec!["this".to_string()];
            params.extend((0..self.below(2)).map(|i| format!("j{i}")));
            let inner = extend(scope, &params);
            let body = if self.chance(0.6) {
                let value = self.untyped_labeled(&inner, depth.saturating_sub(1).max(1), mixed);
                Expr::set(Expr::var("this"), self.pick(LABELS).to_string(), value, Label::Native)
            } else {
                self.untyped_labeled(&inner, depth.saturating_sub(1).max(1), mixed)
            };
            Expr::Lambda(params, Box::new(body))
        } else {
            self.untyped_labeled(scope, depth, mixed)
        };
        let label = if mixed && self.chance(0.5) {
            Label::Translated
        } else {
            Label::Native
        };
        Expr::Class {
            name: self.fresh("K"),
            supers,
            members,
            ctor: Box::new(ctor),
            label,
        }
    }

    /// A one-hole context of depth at most `depth`, built from native code.
    pub fn context(&mut self, depth: usize) -> CodeContext {
        self.context_in(&[], depth)
    }

    fn filler(&mut self, scope: &[Ident]) -> Expr {
        let depth = self.rng.random_range(1..=3);
        if self.chance(JUNK_RATE) {
            self.untyped(scope, depth)
        } else {
            self.benign(scope, depth)
        }
    }

    /// Native code that mostly runs without error: values, objects, classes,
    /// and calls of literal lambdas.
    pub fn benign(&mut self, scope: &[Ident], depth: usize) -> Expr {
        if depth <= 1 {
            return if !scope.is_empty() && self.chance(0.4) {
                Expr::var(self.pick(scope).as_str())
            } else {
                Expr::int(self.small_int())
            };
        }
        let d = depth - 1;
        match self.below(9) {
            0 => self.benign(scope, 1),
            1..=2 => {
                let n = self.below(3);
                let mut params: Vec<Ident> = CONTEXT_VARS
                    .choose_multiple(&mut self.rng, n)
                    .map(|s| s.to_string())
                    .collect();
                params.sort();
                let inner = extend(scope, &params);
                Expr::Lambda(params, Box::new(self.benign(&inner, d)))
            }
            3..=4 => {
                let class = self.benign_class(scope, d);
                let n = match &class {
                    Expr::Class { ctor, .. } => match &**ctor {
                        Expr::Lambda(ps, _) => ps.len().saturating_sub(1),
                        _ => 0,
                    },
                    _ => 0,
                };
                let args = (0..n).map(|_| self.benign(scope, d)).collect();
                Expr::app(class, args, Label::Native)
            }
            5 => self.benign_class(scope, d),
            6 => {
                let x = self.pick(CONTEXT_VARS).to_string();
                let bound = self.benign(scope, d);
                let body = self.benign(&extend(scope, std::slice::from_ref(&x)), d);
                Expr::let_(x, bound, body)
            }
            7 => {
                let x = self.pick(CONTEXT_VARS).to_string();
                let body = self.benign(&extend(scope, std::slice::from_ref(&x)), d);
                let arg = self.benign(scope, d);
                Expr::app(Expr::lambda([x], body), vec![arg], Label::Native)
            }
            _ => self.untyped(scope, depth),
        }
    }

    fn benign_class(&mut self, scope: &[Ident], depth: usize) -> Expr {
        let members = self
            .labels(2)
            .into_iter()
            .map(|l| (l, self.benign(scope, depth)))
            .collect();
        let mut params = vec!["this".to_string()];
        params.extend((0..self.below(2)).map(|i| format!("j{i}")));
        let inner = extend(scope, &params);
        let fields = self.labels(2);
        let body = fields.into_iter().rev().fold(Expr::int(0), |rest, l| {
            let value = self.benign(&inner, depth.saturating_sub(1).max(1));
            let set = Expr::set(Expr::var("this"), l, value, Label::Native);
            if rest == Expr::int(0) {
                set
            } else {
                Expr::let_(self.fresh("s"), set, rest)
            }
        });
        Expr::Class {
            name: self.fresh("K"),
            supers: vec![],
            members,
            ctor: Box::new(Expr::Lambda(params, Box::new(body))),
            label: Label::Native,
        }
    }

    fn fillers(&mut self, scope: &[Ident], max: usize) -> Vec<Expr> {
        (0..self.rng.random_range(0..=max))
            .map(|_| self.filler(scope))
            .collect()
    }

    fn context_in(&mut self, scope: &[Ident], depth: usize) -> CodeContext {
        if depth <= 1 {
            return CodeContext::Hole;
        }
        let d = depth - 1;
        match self.below(14) {
            0 => CodeContext::AppCallee(Box::new(self.context_in(scope, d)), self.fillers(scope, 2)),
            1 => CodeContext::AppArg {
                callee: self.filler(scope),
                before: self.fillers(scope, 1),
                hole: Box::new(self.context_in(scope, d)),
                after: self.fillers(scope, 1),
            },
            2 => CodeContext::Get(Box::new(self.context_in(scope, d)), self.pick(LABELS).to_string()),
            3 => CodeContext::SetSubject(
                Box::new(self.context_in(scope, d)),
                self.pick(LABELS).to_string(),
                self.filler(scope),
            ),
            4 => CodeContext::SetValue(
                self.filler(scope),
                self.pick(LABELS).to_string(),
                Box::new(self.context_in(scope, d)),
            ),
            5 => CodeContext::ClassSuper {
                name: self.fresh("K"),
                before: self.fillers(scope, 1),
                hole: Box::new(self.context_in(scope, d)),
                after: self.fillers(scope, 1),
                members: self
                    .labels(2)
                    .into_iter()
                    .map(|l| (l, self.filler(scope)))
                    .collect(),
                ctor: self.filler(scope),
            },
            6 => CodeContext::ClassCtor {
                name: self.fresh("K"),
                supers: self.fillers(scope, 1),
                members: self
                    .labels(2)
                    .into_iter()
                    .map(|l| (l, self.filler(scope)))
                    .collect(),
                hole: Box::new(self.context_in(scope, d)),
            },
            7 => {
                let mut labels = self.labels(3);
                if labels.is_empty() {
                    labels.push(self.pick(LABELS).to_string());
                }
                let at = self.below(labels.len());
                let members: Vec<(Ident, Expr)> =
                    labels.iter().map(|l| (l.clone(), self.filler(scope))).collect();
                CodeContext::ClassMember {
                    name: self.fresh("K"),
                    supers: self.fillers(scope, 1),
                    before: members[..at].to_vec(),
                    label: labels[at].clone(),
                    hole: Box::new(self.context_in(scope, d)),
                    after: members[at + 1..].to_vec(),
                    ctor: self.filler(scope),
                }
            }
            8..=9 => {
                // bind the embedded value and abuse it
                let x = self.pick(CONTEXT_VARS).to_string();
                let inner = extend(scope, std::slice::from_ref(&x));
                let body = self.abuse(&x, &inner);
                CodeContext::LetBound(x, Box::new(self.context_in(scope, d)), body)
            }
            10..=11 => {
                let x = self.pick(CONTEXT_VARS).to_string();
                let bound = self.filler(scope);
                let inner = extend(scope, std::slice::from_ref(&x));
                CodeContext::LetBody(x, bound, Box::new(self.context_in(&inner, d)))
            }
            12 => CodeContext::Check(Box::new(self.context_in(scope, d)), self.rand_tag()),
            _ => {
                let n = self.below(3);
                let mut params: Vec<Ident> = CONTEXT_VARS
                    .choose_multiple(&mut self.rng, n)
                    .map(|s| s.to_string())
                    .collect();
                params.sort();
                let inner = extend(scope, &params);
                CodeContext::Lambda(params, Box::new(self.context_in(&inner, d)))
            }
        }
    }

    /// Native code that misuses `x`: calls with arbitrary arguments,
    /// attribute reads and writes, instantiation, subclassing.
    fn abuse(&mut self, x: &str, scope: &[Ident]) -> Expr {
        let v = || Expr::var(x);
        let arg = |g: &mut Gen| {
            if g.chance(0.3) {
                Expr::lambda(["t"], Expr::var("t"))
            } else if g.chance(JUNK_RATE) {
                g.untyped(scope, 2)
            } else {
                g.benign(scope, 2)
            }
        };
        let label = self.pick(LABELS).to_string();
        let use_ = match self.below(7) {
            0 => {
                let args = (0..self.below(3)).map(|_| arg(self)).collect();
                Expr::app(v(), args, Label::Native)
            }
            1 => Expr::get(v(), label, Label::Native),
            2 => {
                let args = (0..self.below(2)).map(|_| arg(self)).collect();
                Expr::app(Expr::get(v(), label, Label::Native), args, Label::Native)
            }
            3 => Expr::set(v(), label, arg(self), Label::Native),
            4 => {
                let sub = Expr::Class {
                    name: self.fresh("K"),
                    supers: vec![v()],
                    members: vec![],
                    ctor: Box::new(Expr::lambda(["this"], Expr::int(0))),
                    label: Label::Native,
                };
                Expr::app(sub, vec![], Label::Native)
            }
            5 => v(),
            _ => self.benign(scope, 3),
        };
        if self.chance(0.4) {
            // a second use after the first, through a let
            let second = self.abuse_once(x, scope);
            Expr::let_(self.fresh("s"), use_, second)
        } else {
            use_
        }
    }

    fn abuse_once(&mut self, x: &str, scope: &[Ident]) -> Expr {
        let label = self.pick(LABELS).to_string();
        match self.below(3) {
            0 => Expr::app(
                Expr::get(Expr::var(x), label, Label::Native),
                vec![self.benign(scope, 2)],
                Label::Native,
            ),
            1 => Expr::get(Expr::var(x), label, Label::Native),
            _ => Expr::app(Expr::var(x), vec![self.benign(scope, 2)], Label::Native),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Prod {
    Leaf,
    Let,
    Fun,
    AppFun,
    AppDyn,
    Get,
    Set,
    New,
    Class,
}

fn fits(env: &TypeEnv, t: &Term, target: &Type) -> bool {
    translate_term(env, t).is_ok_and(|(_, actual)| subtype_consistent(&actual, target))
}

/// `(fun(x: dyn) -> dyn: x)(0)`: has type `dyn`, so fits any target.
pub fn dyn_cast() -> Term {
    Term::app(
        Term::fun(vec![("x".into(), Type::Dyn)], Type::Dyn, Term::var("x")),
        vec![Term::int(0)],
    )
}

fn sequence(stmts: &mut Vec<Term>, last: Term, fresh: &mut usize) -> Term {
    let mut body = last;
    while let Some(s) = stmts.pop() {
        *fresh += 1;
        body = Term::let_(format!("s{fresh}"), s, body);
    }
    body
}

fn extend(scope: &[Ident], more: &[Ident]) -> Vec<Ident> {
    let mut out = scope.to_vec();
    out.extend(more.iter().cloned());
    out
}

/// A well-typed Anthill term from a fixed seed.
pub fn gen_typed_term(seed: u64, env: &TypeEnv, target: Option<&Type>, depth: usize) -> Term {
    Gen::new(seed).typed_term(env, target, depth)
}

/// An untyped one-hole context from a fixed seed.
pub fn gen_untyped_context(seed: u64, depth: usize) -> CodeContext {
    Gen::new(seed).context(depth)
}
