//! The principal-tag verifier against proof search over the declarative
//! rules. The exhaustive depth-3 run is in the acceptance target.
mod common;

use anthill::{infer, tag_subtype, HeapType, TagEnv};
use common::declarative::{derivable, terms, Closure};

#[test]
fn verifier_matches_proof_search_at_depth_two() {
    let c = Closure::new();
    let all = terms(&[], 2);
    assert!(all.len() > 30);
    for e in &all {
        let principal = infer(&TagEnv::new(), &HeapType::new(), e).ok();
        for s in c.tags() {
            let algorithmic = principal.as_ref().is_some_and(|p| tag_subtype(p, s));
            assert_eq!(algorithmic, derivable(&c, &vec![], e, s), "{e} at {s}");
        }
    }
}
