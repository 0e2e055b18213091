//! Python bindings: parse, translate, verify, run, embed, and fuzz.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use anthill::harness::{check_embedding, fuzz as run_fuzz, Summary, TrialConfig};
use anthill::ty::tag_of;
use anthill::verify::principal_heap_type;
use anthill::{infer, parse_anthill, parse_context, parse_tag, parse_upython, translate, Expr, Heap, HeapType, Label, Outcome, TagEnv};

create_exception!(anthill_py, ParseError, PyValueError);
create_exception!(anthill_py, StaticTypeError, PyValueError);
create_exception!(anthill_py, VerifyError, PyValueError);

fn parse_err(err: anthill::ParseError) -> PyErr {
    ParseError::new_err(err.to_string())
}

fn translate_src(src: &str) -> PyResult<(Expr, anthill::Type)> {
    let term = parse_anthill(src).map_err(parse_err)?;
    translate(&term).map_err(|err| StaticTypeError::new_err(err.to_string()))
}

/// A μPython program.
#[pyclass(frozen, module = "anthill_py")]
struct Program {
    expr: Expr,
}

#[pymethods]
impl Program {
    /// Parses μPython source.
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        Ok(Program { expr: parse_upython(src).map_err(parse_err)? })
    }

    /// Parses Anthill source and translates it.
    #[staticmethod]
    fn from_anthill(src: &str) -> PyResult<Self> {
        Ok(Program { expr: translate_src(src)?.0 })
    }

    /// Principal tag; raises `VerifyError` when the program is rejected.
    fn verify(&self) -> PyResult<String> {
        infer(&TagEnv::new(), &HeapType::new(), &self.expr)
            .map(|tag| tag.to_string())
            .map_err(|err| VerifyError::new_err(err.to_string()))
    }

    #[pyo3(signature = (budget = 1_000_000))]
    fn run(&self, py: Python<'_>, budget: u64) -> PyResult<RunResult> {
        let e = self.expr.clone();
        py.detach(|| evaluate(e, budget))
    }

    fn __str__(&self) -> String {
        self.expr.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Program({:?})", self.expr.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

/// Result of running a program.
#[pyclass(frozen, get_all, module = "anthill_py")]
struct RunResult {
    /// "value", "casterror", "pyerror", or "timeout".
    kind: String,
    /// "native" or "translated" for a pyerror.
    origin: Option<String>,
    value: Option<String>,
    /// Principal tag of the final value under the final heap.
    value_tag: Option<String>,
    steps: u64,
    outcome: String,
}

#[pymethods]
impl RunResult {
    fn __str__(&self) -> String {
        self.outcome.clone()
    }

    fn __repr__(&self) -> String {
        format!("RunResult({}, steps={})", self.outcome, self.steps)
    }
}

fn evaluate(e: Expr, budget: u64) -> PyResult<RunResult> {
    let eval = anthill::run(e, Heap::new(), budget).map_err(|err| PyValueError::new_err(err.to_string()))?;
    let outcome = eval.outcome.to_string();
    let (kind, origin, value, value_tag) = match eval.outcome {
        Outcome::Value(v, heap) => {
            let tag = infer(&TagEnv::new(), &principal_heap_type(&heap), &v).ok().map(|t| t.to_string());
            ("value", None, Some(v.to_string()), tag)
        }
        Outcome::CastError => ("casterror", None, None, None),
        Outcome::PyError(p) => ("pyerror", Some(p.name().to_string()), None, None),
        Outcome::Timeout(_) => ("timeout", None, None, None),
    };
    Ok(RunResult {
        kind: kind.into(),
        origin,
        value,
        value_tag,
        steps: eval.steps,
        outcome,
    })
}

/// Type-checks Anthill source and returns its type.
#[pyfunction]
fn check(src: &str) -> PyResult<String> {
    Ok(translate_src(src)?.1.to_string())
}

/// Translates Anthill source; returns the μPython text and the Anthill type.
#[pyfunction(name = "translate")]
fn translate_py(src: &str) -> PyResult<(String, String)> {
    let (e, ty) = translate_src(src)?;
    Ok((e.to_string(), ty.to_string()))
}

/// Whether the first tag is a subtag of the second.
#[pyfunction]
fn tag_subtype(s1: &str, s2: &str) -> PyResult<bool> {
    let s1 = parse_tag(s1).map_err(parse_err)?;
    let s2 = parse_tag(s2).map_err(parse_err)?;
    Ok(anthill::tag_subtype(&s1, &s2))
}

/// Translates `typed`, plugs it into the `HOLE` of `context`, and runs it.
#[pyfunction]
#[pyo3(signature = (typed, context, budget = 1_000_000))]
fn embed(py: Python<'_>, typed: &str, context: &str, budget: u64) -> PyResult<RunResult> {
    let (e, ty) = translate_src(typed)?;
    let ctx = parse_context(context).map_err(parse_err)?;
    check_embedding(&ctx, &e, &tag_of(&ty)).map_err(VerifyError::new_err)?;
    let program = ctx.plug(&e);
    py.detach(|| evaluate(program, budget))
}

/// Counts from a batch of soundness trials.
#[pyclass(frozen, get_all, module = "anthill_py")]
struct FuzzSummary {
    trials: usize,
    passes: usize,
    values: usize,
    casterrors: usize,
    native_pyerrors: usize,
    timeouts: usize,
    violations: usize,
    inconsistent: usize,
    skipped: usize,
}

#[pymethods]
impl FuzzSummary {
    fn is_sound(&self) -> bool {
        self.violations == 0 && self.inconsistent == 0
    }

    fn __repr__(&self) -> String {
        format!(
            "FuzzSummary(trials={}, violations={}, timeouts={})",
            self.trials, self.violations, self.timeouts
        )
    }
}

impl From<Summary> for FuzzSummary {
    fn from(s: Summary) -> Self {
        FuzzSummary {
            trials: s.trials,
            passes: s.passes,
            values: s.values,
            casterrors: s.casterrors,
            native_pyerrors: s.native_pyerrors,
            timeouts: s.timeouts,
            violations: s.violations,
            inconsistent: s.inconsistent,
            skipped: s.skipped,
        }
    }
}

/// Runs soundness trials and returns the summary.
#[pyfunction]
#[pyo3(signature = (seed, trials, term_depth = 5, ctx_depth = 5, budget = 10_000))]
fn fuzz(py: Python<'_>, seed: u64, trials: usize, term_depth: usize, ctx_depth: usize, budget: u64) -> FuzzSummary {
    let config = TrialConfig {
        term_depth,
        ctx_depth,
        budget,
    };
    py.detach(|| run_fuzz(seed, trials, config).summary.into())
}

/// Label names, for matching `RunResult.origin`.
const ORIGINS: [Label; 2] = [Label::Native, Label::Translated];

#[pymodule]
fn anthill_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<FuzzSummary>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(translate_py, m)?)?;
    m.add_function(wrap_pyfunction!(tag_subtype, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    m.add("ORIGINS", ORIGINS.map(Label::name).to_vec())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("StaticTypeError", m.py().get_type::<StaticTypeError>())?;
    m.add("VerifyError", m.py().get_type::<VerifyError>())?;
    Ok(())
}
