mod common;

use anthill::{infer, tag_subtype, HeapType, TagEnv};
use common::properties;

#[test]
fn translations_are_accepted() {
    for p in common::corpus() {
        if let Some(ty) = &p.ty {
            let tag = infer(&TagEnv::new(), &HeapType::new(), &p.program).unwrap();
            assert!(tag_subtype(&tag, &anthill::ty::tag_of(ty)), "{}", p.name);
        }
    }
    for seed in 0..300 {
        properties::translation_case(seed, 6).unwrap();
    }
}

#[test]
fn compositions_type() {
    let mut checked = 0;
    for seed in 0..600 {
        if let Some(r) = properties::composition_case(seed, 4) {
            r.unwrap();
            checked += 1;
        }
    }
    assert!(checked >= 300, "only {checked} qualifying pairs");
}

#[test]
fn corpus_preserves_types_step_by_step() {
    let mut checked = 0;
    for p in common::corpus().into_iter().filter(|p| !p.ill_typed) {
        properties::preservation(&p.program, 2_000).unwrap_or_else(|err| panic!("{}: {err}", p.name));
        checked += 1;
    }
    assert!(checked >= 100);
}

#[test]
fn accepted_terms_never_fail_translated() {
    let mut accepted = 0;
    for seed in 0..3000 {
        if let Some(r) = properties::accepted_never_fails_translated(seed, 4, 2_000) {
            r.unwrap();
            accepted += 1;
        }
    }
    assert!(accepted >= 100, "only {accepted} accepted terms");
}
