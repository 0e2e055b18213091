use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use anthill::harness::{check_embedding, fuzz, shrink, TrialConfig, Verdict};
use anthill::runtime::{run_traced, Evaluation};
use anthill::syntax::{parse_upython_with, ParseOptions};
use anthill::ty::tag_of;
use anthill::{infer, parse_anthill, parse_context, translate, Expr, Heap, HeapType, Label, Outcome, TagEnv};

const EXIT_STATIC: u8 = 1;
const EXIT_CAST: u8 = 2;
const EXIT_NATIVE: u8 = 3;
const EXIT_TRANSLATED: u8 = 4;
const EXIT_TIMEOUT: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "anthill", about = "Gradually typed Anthill, translated to μPython with transient checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check an Anthill file and print its type.
    Check { file: PathBuf },
    /// Translate an Anthill file to μPython.
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a program from the empty heap. Anthill files are translated first.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Print one line per step: index, rule, heap size.
        #[arg(long)]
        trace: bool,
        /// Accept `@n` addresses in μPython source.
        #[arg(long)]
        allow_addresses: bool,
    },
    /// Tag-check a μPython file and print its principal tag.
    Verify {
        file: PathBuf,
        #[arg(long)]
        allow_addresses: bool,
    },
    /// Translate a typed library, plug it into a context's HOLE, and run.
    Embed {
        #[arg(long)]
        typed: PathBuf,
        #[arg(long)]
        context: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Run randomized soundness trials.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        term_depth: usize,
        #[arg(long, default_value_t = 5)]
        ctx_depth: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Where to write shrunk reproducers of failing trials.
        #[arg(long)]
        repro_dir: Option<PathBuf>,
        /// Print only the summary.
        #[arg(long)]
        quiet: bool,
    },
}

enum Language {
    Anthill,
    UPython,
}

fn language(path: &Path) -> Result<Language, String> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ant") => Ok(Language::Anthill),
        Some("upy") => Ok(Language::UPython),
        _ => Err(format!("{}: expected a .ant or .upy file", path.display())),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|err| format!("{}: {err}", path.display()))
}

/// A failure that ends the command with a message and exit code.
struct Failure(u8, String);

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure(EXIT_USAGE, message)
    }
}

fn parse_error(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, format!("{}:{err}", path.display()))
}

fn load_translated(path: &Path) -> Result<(Expr, anthill::Type), Failure> {
    let term = parse_anthill(&read(path)?).map_err(|err| parse_error(path, err))?;
    translate(&term).map_err(|err| Failure(EXIT_STATIC, format!("{}: {err}", path.display())))
}

fn load_program(path: &Path, allow_addresses: bool) -> Result<Expr, Failure> {
    match language(path)? {
        Language::Anthill => Ok(load_translated(path)?.0),
        Language::UPython => {
            let opts = ParseOptions {
                allow_addresses,
                ..ParseOptions::default()
            };
            parse_upython_with(&read(path)?, opts).map_err(|err| parse_error(path, err))
        }
    }
}

fn outcome_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Value(..) => 0,
        Outcome::CastError => EXIT_CAST,
        Outcome::PyError(Label::Native) => EXIT_NATIVE,
        Outcome::PyError(Label::Translated) => EXIT_TRANSLATED,
        Outcome::Timeout(_) => EXIT_TIMEOUT,
    }
}

fn evaluate(e: Expr, budget: u64, trace: bool) -> Result<u8, Failure> {
    let Evaluation { outcome, steps } = run_traced(e, Heap::new(), budget, |event| {
        if trace {
            eprintln!("{event}");
        }
    })
    .map_err(|err| Failure(EXIT_USAGE, format!("cannot evaluate: {err:?}")))?;
    println!("{outcome}");
    if trace {
        eprintln!("steps: {steps}");
        if let Outcome::Value(_, heap) = &outcome {
            eprint!("{heap}");
        }
    }
    Ok(outcome_code(&outcome))
}

fn execute(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check { file } => {
            let (_, ty) = load_translated(&file)?;
            println!("{ty}");
            Ok(0)
        }
        Command::Translate { file, output } => {
            let (e, _) = load_translated(&file)?;
            match output {
                Some(out) => fs::write(&out, format!("{e}\n"))
                    .map_err(|err| format!("{}: {err}", out.display()))?,
                None => println!("{e}"),
            }
            Ok(0)
        }
        Command::Run {
            file,
            budget,
            trace,
            allow_addresses,
        } => evaluate(load_program(&file, allow_addresses)?, budget, trace),
        Command::Verify {
            file,
            allow_addresses,
        } => {
            let e = load_program(&file, allow_addresses)?;
            match infer(&TagEnv::new(), &HeapType::new(), &e) {
                Ok(tag) => {
                    println!("accepted: {tag}");
                    Ok(0)
                }
                Err(err) => Err(Failure(EXIT_STATIC, format!("rejected: {err}"))),
            }
        }
        Command::Embed {
            typed,
            context,
            budget,
        } => {
            let (e, ty) = load_translated(&typed)?;
            let ctx = parse_context(&read(&context)?).map_err(|err| parse_error(&context, err))?;
            check_embedding(&ctx, &e, &tag_of(&ty))
                .map_err(|err| Failure(EXIT_STATIC, format!("embedding rejected: {err}")))?;
            evaluate(ctx.plug(&e), budget, false)
        }
        Command::Fuzz {
            seed,
            trials,
            term_depth,
            ctx_depth,
            budget,
            repro_dir,
            quiet,
        } => {
            let config = TrialConfig {
                term_depth,
                ctx_depth,
                budget,
            };
            let report = fuzz(seed, trials, config);
            if !quiet {
                for r in &report.reports {
                    println!("{r}");
                }
            }
            println!("{}", report.summary);
            let failing: Vec<_> = report
                .reports
                .iter()
                .filter(|r| matches!(r.verdict, Verdict::SoundnessViolation | Verdict::Inconsistent))
                .collect();
            for r in &failing {
                let small = shrink(r.seed, r.config);
                println!(
                    "shrunk: seed={} term_depth={} ctx_depth={} verdict={}",
                    small.seed, small.config.term_depth, small.config.ctx_depth, small.verdict
                );
                if let Some(dir) = &repro_dir {
                    write_repro(dir, &small).map_err(|err| format!("{}: {err}", dir.display()))?;
                }
            }
            Ok(if failing.is_empty() { 0 } else { EXIT_TRANSLATED })
        }
    }
}

fn write_repro(dir: &Path, r: &anthill::harness::TrialReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let stem = dir.join(format!("trial-{}", r.seed));
    let mut notes = format!(
        "# seed {} term_depth {} ctx_depth {} budget {}\n# verdict {} outcome {}\n# term: {}\n# context: {}\n",
        r.seed, r.config.term_depth, r.config.ctx_depth, r.config.budget, r.verdict, r.outcome, r.term, r.context
    );
    if let Some(note) = &r.note {
        notes.push_str(&format!("# note: {note}\n"));
    }
    if let Some(program) = &r.program {
        notes.push_str(&format!("{program}\n"));
    }
    fs::write(stem.with_extension("upy"), notes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}

