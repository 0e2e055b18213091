//! One instance of each typing property check, shared by the property suites and the
//! acceptance target. Each returns a description of the failure, if any.

use anthill::gen::Gen;
use anthill::runtime::{step, Step};
use anthill::translate::translate_term;
use anthill::ty::tag_of;
use anthill::verify::{check_at, explain_heap, principal_heap_type};
use anthill::{context::type_context, infer, tag_subtype, Expr, Heap, HeapType, Label, Outcome, Tag, TagEnv, TypeEnv};

const NAMES: &[&str] = &["x", "y", "z"];

/// A random environment, a typed term under it, and its translation.
/// Returns whether the translation is accepted at the tag of its type.
pub fn translation_case(seed: u64, depth: usize) -> Result<(), String> {
    let mut gen = Gen::new(seed);
    let env: TypeEnv = NAMES
        .iter()
        .take(gen_count(&mut gen))
        .map(|x| (x.to_string(), gen.rand_type(2)))
        .collect();
    let term = gen.typed_term(&env, None, depth);
    let (e, ty) = translate_term(&env, &term).map_err(|err| format!("{term}: {err}"))?;
    translated_accepted(&TagEnv::from_types(&env), &e, &tag_of(&ty))
}

fn gen_count(gen: &mut Gen) -> usize {
    use rand::Rng;
    gen.rng().random_range(0..=NAMES.len())
}

pub fn translated_accepted(env: &TagEnv, e: &Expr, want: &Tag) -> Result<(), String> {
    check_at(env, &HeapType::new(), e, want)
        .map(|_| ())
        .map_err(|err| format!("{e}: {err}"))
}

/// A random context and a hole filler typed on its own; the composition
/// must type at the context's result tag. `None` when the pair does not
/// qualify (the context or filler does not type).
pub fn composition_case(seed: u64, depth: usize) -> Option<Result<(), String>> {
    let mut gen = Gen::new(seed);
    let ctx = gen.context(depth);
    let hole_env = ctx.hole_env(&TagEnv::new()).ok()?;
    let scope: Vec<String> = hole_env.iter().map(|(x, _)| x.clone()).collect();
    let e = if gen.rng().random_bool(0.5) {
        gen.benign(&scope, depth)
    } else {
        let env: TypeEnv = hole_env.iter().map(|(x, s)| (x.clone(), gen.type_with_tag(s))).collect();
        let term = gen.typed_term(&env, None, depth);
        translate_term(&env, &term).ok()?.0
    };
    let s = infer(&hole_env, &HeapType::new(), &e).ok()?;
    let (outer, result) = type_context(&ctx, &hole_env, &s).ok()?;
    let program = ctx.plug(&e);
    Some(
        check_at(&outer, &HeapType::new(), &program, &result)
            .map(|_| ())
            .map_err(|err| format!("context {ctx} with {e}: {err}")),
    )
}

use rand::Rng;

/// Steps `e` from the empty heap, re-verifying every intermediate state.
/// Returns the number of steps taken.
pub fn preservation(e: &Expr, budget: u64) -> Result<u64, String> {
    let mut heap = Heap::new();
    let tag = infer(&TagEnv::new(), &HeapType::new(), e).map_err(|err| format!("initial: {err}"))?;
    let mut e = e.clone();
    let mut steps = 0;
    while !e.is_value() && steps < budget {
        let r = step(&e, &mut heap).map_err(|err| format!("step {steps}: {err}"))?;
        steps += 1;
        match r.step {
            Step::Next(next) => e = next,
            Step::CastError | Step::PyError(Label::Native) => return Ok(steps),
            Step::PyError(Label::Translated) => return Err(format!("step {steps}: translated pyerror")),
        }
        let sigma = principal_heap_type(&heap);
        explain_heap(&sigma, &heap).map_err(|err| format!("step {steps} ({}): {err}", r.rule))?;
        let now = infer(&TagEnv::new(), &sigma, &e).map_err(|err| format!("step {steps} ({}): {err}", r.rule))?;
        if !tag_subtype(&now, &tag) {
            return Err(format!("step {steps} ({}): tag {now} is not below {tag}", r.rule));
        }
    }
    Ok(steps)
}

/// Accepted closed terms never fail with a translated error. `None` when the
/// generated term is rejected.
pub fn accepted_never_fails_translated(seed: u64, depth: usize, budget: u64) -> Option<Result<(), String>> {
    let mut gen = Gen::new(seed);
    let e = gen.untyped_labeled(&[], depth, true);
    infer(&TagEnv::new(), &HeapType::new(), &e).ok()?;
    let outcome = anthill::run(e.clone(), Heap::new(), budget).ok()?.outcome;
    Some(match outcome {
        Outcome::PyError(Label::Translated) => Err(format!("{e}")),
        _ => Ok(()),
    })
}
