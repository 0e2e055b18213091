//! Shared test support: the program corpus, independent oracles, and
//! random heap construction.
#![allow(dead_code)]

pub mod declarative;
pub mod properties;
pub mod oracle;

use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;

use anthill::runtime::{HeapValue, Members};
use anthill::ty::Type;
use anthill::{parse_anthill, parse_upython, translate, Address, Arity, Expr, Heap, Outcome, Tag};

pub struct CorpusProgram {
    pub path: PathBuf,
    pub name: String,
    /// Translated when the source is Anthill.
    pub program: Expr,
    pub ty: Option<Type>,
    pub expect: String,
    /// The verifier is expected to reject this program.
    pub ill_typed: bool,
}

fn corpus_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap_or_else(|err| panic!("{}: {err}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            corpus_files(&path, out);
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("ant" | "upy")) {
            out.push(path);
        }
    }
}

pub fn corpus() -> Vec<CorpusProgram> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files = Vec::new();
    corpus_files(&root, &mut files);
    files
        .into_iter()
        .map(|path| {
            let src = std::fs::read_to_string(&path).unwrap();
            let expect = src
                .lines()
                .find_map(|l| l.strip_prefix("# expect:"))
                .unwrap_or_else(|| panic!("{}: no expectation", path.display()))
                .trim()
                .to_string();
            let ill_typed = src.lines().any(|l| l.trim() == "# verify: reject");
            let (program, ty) = if path.extension().unwrap() == "ant" {
                let term = parse_anthill(&src).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
                let (e, ty) = translate(&term).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
                (e, Some(ty))
            } else {
                let e = parse_upython(&src).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
                (e, None)
            };
            let name = path.strip_prefix(&root).unwrap().display().to_string();
            CorpusProgram {
                path,
                name,
                program,
                ty,
                expect,
                ill_typed,
            }
        })
        .collect()
}

/// `value` matches any value and `timeout` any timeout; anything else is
/// compared with the printed outcome.
pub fn outcome_matches(expect: &str, outcome: &Outcome) -> bool {
    match (expect, outcome) {
        ("value", Outcome::Value(..)) => true,
        ("timeout", Outcome::Timeout(_)) => true,
        _ => outcome.to_string() == expect,
    }
}

pub const NAMES: &[&str] = &["a", "b", "c"];

pub fn rand_names<R: Rng>(rng: &mut R) -> Vec<String> {
    NAMES
        .iter()
        .filter(|_| rng.random_bool(0.4))
        .map(|s| s.to_string())
        .collect()
}

pub fn rand_lambda<R: Rng>(rng: &mut R) -> Expr {
    let n = rng.random_range(0..4);
    Expr::lambda((0..n).map(|i| format!("p{i}")), Expr::int(rng.random_range(0..5)))
}

fn rand_member_value<R: Rng>(rng: &mut R, earlier: u64) -> Expr {
    match rng.random_range(0..4) {
        0 => Expr::int(rng.random_range(0..5)),
        1 | 2 => rand_lambda(rng),
        _ if earlier > 0 => Expr::Addr(Address(rng.random_range(0..earlier))),
        _ => Expr::int(0),
    }
}

fn rand_members<R: Rng>(rng: &mut R, earlier: u64) -> Members {
    rand_names(rng)
        .into_iter()
        .map(|l| (l, rand_member_value(rng, earlier)))
        .collect()
}

/// A random acyclic heap: superclasses, classes of objects, and addresses
/// stored in members all point to earlier cells. Half the heaps start with
/// a diamond.
pub fn rand_heap<R: Rng>(rng: &mut R) -> Heap {
    let mut heap = Heap::new();
    let mut classes: Vec<Address> = Vec::new();
    if rng.random_bool(0.5) {
        let top = alloc_class(rng, &mut heap, vec![]);
        let left = alloc_class(rng, &mut heap, vec![top]);
        let right = alloc_class(rng, &mut heap, vec![top]);
        let bottom = alloc_class(rng, &mut heap, vec![left, right]);
        classes.extend([top, left, right, bottom]);
    }
    for _ in 0..rng.random_range(1..7) {
        if classes.is_empty() || rng.random_bool(0.5) {
            let k = rng.random_range(0..3).min(classes.len());
            let supers: Vec<Address> = classes.choose_multiple(rng, k).copied().collect();
            let a = alloc_class(rng, &mut heap, supers);
            classes.push(a);
        } else {
            let class = *classes.choose(rng).unwrap();
            let members = rand_members(rng, heap.len() as u64);
            heap.alloc(HeapValue::Object { class, members });
        }
    }
    heap
}

fn alloc_class<R: Rng>(rng: &mut R, heap: &mut Heap, supers: Vec<Address>) -> Address {
    let earlier = heap.len() as u64;
    let members = rand_members(rng, earlier);
    let ctor = if earlier > 0 && rng.random_bool(0.15) {
        Expr::Addr(Address(rng.random_range(0..earlier)))
    } else if rng.random_bool(0.1) {
        Expr::int(1)
    } else {
        rand_lambda(rng)
    };
    heap.alloc(HeapValue::Class {
        supers,
        members,
        ctor,
    })
}

/// A value that may refer to the heap, including one dangling address.
pub fn rand_value<R: Rng>(rng: &mut R, heap: &Heap) -> Expr {
    match rng.random_range(0..5) {
        0 => Expr::int(rng.random_range(0..5)),
        1 => rand_lambda(rng),
        _ => Expr::Addr(Address(rng.random_range(0..=heap.len() as u64))),
    }
}

pub fn rand_tag<R: Rng>(rng: &mut R) -> Tag {
    let names = rand_names(rng);
    match rng.random_range(0..5) {
        0 => Tag::Pyobj,
        1 => Tag::Int,
        2 => Tag::Fun(rng.random_range(0..4)),
        3 => Tag::obj(names),
        _ => {
            let arity = if rng.random_bool(0.3) {
                Arity::Any
            } else {
                Arity::Count(rng.random_range(0..3))
            };
            Tag::class(names, arity)
        }
    }
}
