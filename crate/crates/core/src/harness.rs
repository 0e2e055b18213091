//! Open-world soundness trials: translated code embedded in random native
//! contexts must never fail with a translated-origin error.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::context::{type_context, CodeContext};
use crate::gen::Gen;
use crate::runtime::{run, Heap, Outcome};
use crate::term::Term;
use crate::translate::{translate_term, TypeEnv};
use crate::ty::tag_of;
use crate::upy::{Expr, Label};
use crate::verify::{check_at, explain_heap, infer, principal_heap_type, tag_subtype, HeapType, TagEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Timeout,
    /// The program failed with a translated-origin error.
    SoundnessViolation,
    /// A static guarantee the trial relies on did not hold (a generator,
    /// translator, or verifier defect).
    Inconsistent,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Timeout => "timeout",
            Verdict::SoundnessViolation => "SOUNDNESS-VIOLATION",
            Verdict::Inconsistent => "INCONSISTENT",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub term_depth: usize,
    pub ctx_depth: usize,
    pub budget: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            term_depth: 5,
            ctx_depth: 5,
            budget: 10_000,
        }
    }
}

/// Coarse outcome class, without the final value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Value,
    CastError,
    NativePyError,
    TranslatedPyError,
    Timeout,
    NotRun,
}

impl OutcomeKind {
    pub fn of(outcome: &Outcome) -> Self {
        match outcome {
            Outcome::Value(..) => OutcomeKind::Value,
            Outcome::CastError => OutcomeKind::CastError,
            Outcome::PyError(Label::Native) => OutcomeKind::NativePyError,
            Outcome::PyError(Label::Translated) => OutcomeKind::TranslatedPyError,
            Outcome::Timeout(_) => OutcomeKind::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub seed: u64,
    pub config: TrialConfig,
    pub term: String,
    pub context: String,
    /// The composed program, when generation got that far.
    pub program: Option<Expr>,
    pub outcome: String,
    pub kind: OutcomeKind,
    pub steps: u64,
    pub verdict: Verdict,
    /// Why the trial was skipped or judged inconsistent.
    pub note: Option<String>,
}

impl fmt::Display for TrialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome: String = self.outcome.chars().take(60).collect();
        write!(
            f,
            "seed={} verdict={} outcome={} steps={} term_size={} context_size={}",
            self.seed,
            self.verdict,
            outcome,
            self.steps,
            self.term.len(),
            self.context.len()
        )?;
        if let Some(note) = &self.note {
            write!(f, " note={note}")?;
        }
        Ok(())
    }
}

/// The static half of a trial: a typed term, its translation, and a context
/// it has been checked to fit.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub term: Term,
    pub context: CodeContext,
    pub translated: Expr,
    pub program: Expr,
}

/// Types `e` in the hole of `ctx` and the composition, as a trial does.
/// Returns the composition's tag.
pub fn check_embedding(ctx: &CodeContext, e: &Expr, hole_tag: &crate::upy::Tag) -> Result<crate::upy::Tag, String> {
    let hole_env = ctx.hole_env(&TagEnv::new()).map_err(|err| format!("context: {err}"))?;
    check_at(&hole_env, &HeapType::new(), e, hole_tag).map_err(|err| format!("embedded term: {err}"))?;
    let (outer, result) = type_context(ctx, &hole_env, hole_tag).map_err(|err| format!("context typing: {err}"))?;
    if !outer.is_empty() {
        return Err("context typing left bindings in the outer environment".into());
    }
    let program = ctx.plug(e);
    check_at(&TagEnv::new(), &HeapType::new(), &program, &result)
        .map_err(|err| format!("composition: {err}"))?;
    Ok(result)
}

/// Accepts a final value: the heap is well typed at its principal heap type
/// and the value has a subtag of `expected`.
pub fn check_final_value(v: &Expr, heap: &Heap, expected: &crate::upy::Tag) -> Result<(), String> {
    let sigma = principal_heap_type(heap);
    explain_heap(&sigma, heap).map_err(|err| format!("final heap: {err}"))?;
    let tag = infer(&TagEnv::new(), &sigma, v).map_err(|err| format!("final value: {err}"))?;
    if tag_subtype(&tag, expected) {
        Ok(())
    } else {
        Err(format!("final value has tag {tag}, expected {expected}"))
    }
}

pub fn soundness_trial(seed: u64, config: TrialConfig) -> TrialReport {
    let mut gen = Gen::new(seed);
    let context = gen.context(config.ctx_depth);
    let mut report = TrialReport {
        seed,
        config,
        term: String::new(),
        context: context.to_string(),
        program: None,
        outcome: String::from("-"),
        kind: OutcomeKind::NotRun,
        steps: 0,
        verdict: Verdict::Skipped,
        note: None,
    };
    let fail = |mut report: TrialReport, verdict: Verdict, note: String| {
        report.verdict = verdict;
        report.note = Some(note);
        report
    };

    let hole_env = match context.hole_env(&TagEnv::new()) {
        Ok(env) => env,
        Err(err) => return fail(report, Verdict::Skipped, format!("context: {err}")),
    };
    let type_env: TypeEnv = hole_env
        .iter()
        .map(|(x, tag)| (x.clone(), gen.type_with_tag(tag)))
        .collect();
    let term = gen.typed_term(&type_env, None, config.term_depth);
    report.term = term.to_string();
    let (e, ty) = match translate_term(&type_env, &term) {
        Ok(out) => out,
        Err(err) => return fail(report, Verdict::Inconsistent, format!("translation: {err}")),
    };
    let expected = match check_embedding(&context, &e, &tag_of(&ty)) {
        Ok(tag) => tag,
        Err(note) => return fail(report, Verdict::Inconsistent, note),
    };
    let program = context.plug(&e);
    report.program = Some(program.clone());

    let eval = match run(program, Heap::new(), config.budget) {
        Ok(eval) => eval,
        Err(err) => return fail(report, Verdict::Inconsistent, format!("evaluation: {err:?}")),
    };
    report.outcome = eval.outcome.to_string();
    report.kind = OutcomeKind::of(&eval.outcome);
    report.steps = eval.steps;
    report.verdict = match &eval.outcome {
        Outcome::PyError(Label::Translated) => Verdict::SoundnessViolation,
        Outcome::Timeout(_) => Verdict::Timeout,
        Outcome::Value(v, heap) => match check_final_value(v, heap, &expected) {
            Ok(()) => Verdict::Pass,
            Err(note) => return fail(report, Verdict::Inconsistent, note),
        },
        Outcome::CastError | Outcome::PyError(Label::Native) => Verdict::Pass,
    };
    report
}

/// Greedily lowers term depth, then context depth, while the trial keeps
/// the same verdict.
pub fn shrink(seed: u64, config: TrialConfig) -> TrialReport {
    let mut best = soundness_trial(seed, config);
    let verdict = best.verdict;
    loop {
        let mut improved = false;
        for lower in [
            TrialConfig {
                term_depth: best.config.term_depth.saturating_sub(1),
                ..best.config
            },
            TrialConfig {
                ctx_depth: best.config.ctx_depth.saturating_sub(1),
                ..best.config
            },
        ] {
            if lower == best.config || lower.term_depth == 0 || lower.ctx_depth == 0 {
                continue;
            }
            let candidate = soundness_trial(seed, lower);
            if candidate.verdict == verdict {
                best = candidate;
                improved = true;
                break;
            }
        }
        if !improved {
            return best;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub trials: usize,
    pub passes: usize,
    pub values: usize,
    pub casterrors: usize,
    pub native_pyerrors: usize,
    pub timeouts: usize,
    pub violations: usize,
    pub inconsistent: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn of(reports: &[TrialReport]) -> Summary {
        let mut s = Summary {
            trials: reports.len(),
            ..Summary::default()
        };
        for r in reports {
            match r.verdict {
                Verdict::Pass => s.passes += 1,
                Verdict::Timeout => s.timeouts += 1,
                Verdict::SoundnessViolation => s.violations += 1,
                Verdict::Inconsistent => s.inconsistent += 1,
                Verdict::Skipped => s.skipped += 1,
            }
            match r.kind {
                OutcomeKind::Value => s.values += 1,
                OutcomeKind::CastError => s.casterrors += 1,
                OutcomeKind::NativePyError => s.native_pyerrors += 1,
                _ => {}
            }
        }
        s
    }

    /// No violations and no broken static guarantees.
    pub fn is_sound(&self) -> bool {
        self.violations == 0 && self.inconsistent == 0
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "passes: {}", self.passes)?;
        writeln!(f, "values: {}", self.values)?;
        writeln!(f, "casterrors: {}", self.casterrors)?;
        writeln!(f, "native pyerrors: {}", self.native_pyerrors)?;
        writeln!(f, "timeouts: {}", self.timeouts)?;
        writeln!(f, "violations: {}", self.violations)?;
        writeln!(f, "inconsistent: {}", self.inconsistent)?;
        write!(f, "skipped: {}", self.skipped)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport {
    pub seed: u64,
    pub reports: Vec<TrialReport>,
    pub summary: Summary,
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            writeln!(f, "{r}")?;
        }
        write!(f, "{}", self.summary)
    }
}

/// Per-trial seeds derived from one master seed.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.random()).collect()
}

/// Runs `trials` independent trials in parallel; the report is in seed order
/// and does not depend on scheduling.
pub fn fuzz(seed: u64, trials: usize, config: TrialConfig) -> FuzzReport {
    let reports: Vec<TrialReport> = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| soundness_trial(s, config))
        .collect();
    let summary = Summary::of(&reports);
    FuzzReport {
        seed,
        reports,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_anthill, parse_context};
    use crate::translate::translate;

    #[test]
    fn fixed_embedding_casts() {
        let typed = parse_anthill("fun(v: (int) -> int) -> int: v(42)").unwrap();
        let (e, ty) = translate(&typed).unwrap();
        let ctx = parse_context("let f = HOLE in f(21)").unwrap();
        check_embedding(&ctx, &e, &tag_of(&ty)).unwrap();
        let eval = run(ctx.plug(&e), Heap::new(), 1000).unwrap();
        assert_eq!(eval.outcome, Outcome::CastError);
    }

    #[test]
    fn trials_are_reproducible() {
        let config = TrialConfig {
            term_depth: 4,
            ctx_depth: 4,
            budget: 2000,
        };
        assert_eq!(fuzz(11, 40, config), fuzz(11, 40, config));
    }

    #[test]
    fn small_fuzz_run_is_sound() {
        let report = fuzz(1, 200, TrialConfig::default());
        for r in &report.reports {
            assert!(
                !matches!(r.verdict, Verdict::SoundnessViolation | Verdict::Inconsistent),
                "{r}\nterm: {}\ncontext: {}",
                r.term,
                r.context
            );
        }
    }
}
