//! Command-line front end. Every command produces a [`RunReport`], printed
//! either line by line or as one JSON document.
//!
//! Exit codes: 0 success or consistent, 1 inconsistent or no answer set,
//! 2 budget exhausted, 3 usage, input or parse error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::consistency::{is_consistent, Budget, Outcome};
use crate::error::Error;
use crate::forbidden::{ForbiddenBudget, ForbiddenChecker, ForbiddenOracle, Session, SignedPair};
use crate::ground::{ground_with_terms, herbrand_terms, GroundLimits, GroundRule, Interpretation};
use crate::ground_nf::ground_not_forbidden;
use crate::reductions::{parse_word, tiling_to_program, tm_to_program, TilingSystem, TuringMachine};
use crate::solve::{enumerate_with_budget, SolveBudget};
use crate::syntax::{parse_atom, parse_program, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "aspen", version, about = "Grounding, solving and consistency checks for answer-set programs with function symbols")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the program in canonical form.
    Parse { file: PathBuf },
    /// Ground over terms up to a nesting depth, or level-wise skipping forbidden heads.
    Ground {
        file: PathBuf,
        #[arg(long, required_unless_present = "not_forbidden", conflicts_with = "not_forbidden")]
        depth: Option<usize>,
        #[arg(long)]
        not_forbidden: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Enumerate the answer sets of the depth-bounded grounding.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Search for a finite answer set level by level.
    Check {
        file: PathBuf,
        /// Keep atoms shown forbidden out of the levels.
        #[arg(long)]
        prune_forbidden: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Try to show that a ground atom belongs to no answer set.
    Forbidden {
        file: PathBuf,
        #[arg(long)]
        atom: String,
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Generate a program from a tiling system or a Turing machine.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    Tiling { spec: PathBuf },
    Tm {
        spec: PathBuf,
        /// Binary input word; without it the program guesses the input.
        #[arg(long)]
        input: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_atoms: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_rules: usize,
    /// Solver search nodes.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_nodes: usize,
    /// Recursion depth of the forbidden check.
    #[arg(long, default_value_t = 32)]
    pub max_recursion: usize,
    /// Calls of the forbidden check per atom.
    #[arg(long, default_value_t = 10_000)]
    pub max_calls: usize,
}

impl BudgetArgs {
    pub fn budget(&self) -> Budget {
        Budget {
            max_iterations: self.max_iter,
            max_atoms: self.max_atoms,
            max_ground_rules: self.max_rules,
            solve: SolveBudget {
                max_nodes: self.max_nodes,
            },
            forbidden: ForbiddenBudget {
                max_depth: self.max_recursion,
                max_calls: self.max_calls,
                ..ForbiddenBudget::default()
            },
        }
    }

    fn limits(&self) -> GroundLimits {
        GroundLimits {
            max_rules: self.max_rules,
            max_terms: self.max_atoms,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Usage {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<usize>,
    pub wall_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub outcome: Value,
    pub witness: Option<Interpretation>,
    pub iterations: Option<usize>,
    pub budget: Value,
    pub usage: Usage,
    pub exit_code: i32,
    #[serde(skip)]
    text: String,
}

impl RunReport {
    fn new(outcome: Value, text: String, exit_code: i32) -> Self {
        RunReport {
            command: Vec::new(),
            outcome,
            witness: None,
            iterations: None,
            budget: Value::Null,
            usage: Usage {
                atoms: None,
                rules: None,
                wall_ms: 0,
            },
            exit_code,
            text,
        }
    }

    /// The line-oriented rendering.
    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Parses `args` (program name first), runs the command and prints its report.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let started = Instant::now();
    let mut report = match execute(&cli.command) {
        Ok(report) => report,
        Err(Failure::Input(message)) => {
            let _ = writeln!(err, "error: {message}");
            return EXIT_USAGE;
        }
        Err(Failure::Budget(message)) => RunReport::new(
            json!({ "kind": "BudgetExhausted", "reason": message }),
            format!("BUDGET EXHAUSTED: {message}\n"),
            EXIT_BUDGET,
        ),
    };
    report.command = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    report.usage.wall_ms = started.elapsed().as_millis();
    let written = match cli.format {
        Format::Text => out.write_all(report.text.as_bytes()),
        Format::Json => serde_json::to_writer_pretty(&mut *out, &report)
            .map_err(std::io::Error::from)
            .and_then(|_| writeln!(out)),
    };
    if written.is_err() {
        return EXIT_USAGE;
    }
    report.exit_code
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceExceeded(m) => Failure::Budget(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn rules_text(rules: &[GroundRule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

fn execute(command: &Command) -> Result<RunReport, Failure> {
    match command {
        Command::Parse { file } => {
            let p = load(file)?;
            let text = p.to_string();
            let mut report = RunReport::new(json!({ "kind": "Parsed", "program": text }), text, EXIT_OK);
            report.usage.rules = Some(p.rules().len());
            Ok(report)
        }
        Command::Ground {
            file,
            depth: Some(depth),
            budget,
            ..
        } => {
            let p = load(file)?;
            let limits = budget.limits();
            let terms = herbrand_terms(&p, *depth, &limits)?;
            let rules = ground_with_terms(&p, &terms, &limits)?;
            let text = format!(
                "{}% {} ground rules over {} terms\n",
                rules_text(&rules),
                rules.len(),
                terms.len()
            );
            let mut report = RunReport::new(
                json!({ "kind": "Grounded", "depth": depth, "rules": rules }),
                text,
                EXIT_OK,
            );
            report.budget = json!({ "depth": depth, "limits": limits });
            report.usage.rules = Some(rules.len());
            Ok(report)
        }
        Command::Ground { file, budget, .. } => {
            let p = load(file)?;
            let b = budget.budget();
            let mut oracle = ForbiddenChecker::new(&p, b.forbidden);
            let g = ground_not_forbidden(&p, &mut oracle, &b);
            let rules = g.rules_vec();
            let mut text = rules_text(&rules);
            text.push_str(&format!(
                "% complete: {}, levels: {}, rules: {}, replaced by constraints: {}\n",
                g.complete,
                g.levels,
                rules.len(),
                g.replaced
            ));
            if let Some(reason) = &g.reason {
                text.push_str(&format!("% stopped: {reason}\n"));
            }
            let code = if g.complete { EXIT_OK } else { EXIT_BUDGET };
            let mut report = RunReport::new(
                json!({
                    "kind": if g.complete { "Grounded" } else { "BudgetExhausted" },
                    "complete": g.complete,
                    "levels": g.levels,
                    "replaced": g.replaced,
                    "rules": rules,
                    "reason": g.reason,
                }),
                text,
                code,
            );
            report.iterations = Some(g.levels);
            report.budget = serde_json::to_value(b).unwrap_or(Value::Null);
            report.usage.rules = Some(rules.len());
            report.usage.atoms = Some(g.atoms.len());
            Ok(report)
        }
        Command::Solve {
            file,
            depth,
            limit,
            budget,
        } => {
            let p = load(file)?;
            let limits = budget.limits();
            let terms = herbrand_terms(&p, *depth, &limits)?;
            let rules = ground_with_terms(&p, &terms, &limits)?;
            let b = budget.budget();
            let sets = enumerate_with_budget(&rules, *limit, b.solve)?;
            let mut text = String::new();
            for (k, s) in sets.iter().enumerate() {
                text.push_str(&format!("Answer {}: {s}\n", k + 1));
            }
            text.push_str(&format!("% {} answer set(s) at depth {depth}\n", sets.len()));
            let code = if sets.is_empty() { EXIT_NEGATIVE } else { EXIT_OK };
            let mut report = RunReport::new(
                json!({ "kind": if sets.is_empty() { "NoAnswerSet" } else { "AnswerSets" }, "answer_sets": sets }),
                text,
                code,
            );
            report.witness = sets.first().cloned();
            report.budget = json!({ "depth": depth, "limit": limit, "limits": limits, "solve": b.solve });
            report.usage.rules = Some(rules.len());
            Ok(report)
        }
        Command::Check {
            file,
            prune_forbidden,
            budget,
        } => {
            let p = load(file)?;
            let b = budget.budget();
            let mut checker = ForbiddenChecker::new(&p, b.forbidden);
            let oracle: Option<&mut dyn ForbiddenOracle> = if *prune_forbidden { Some(&mut checker) } else { None };
            let outcome = is_consistent(&p, &b, oracle);
            let (text, code, witness, atoms) = match &outcome {
                Outcome::Consistent { witness, iteration } => (
                    format!("CONSISTENT at iteration {iteration}\nwitness: {witness}\n"),
                    EXIT_OK,
                    Some(witness.clone()),
                    witness.len(),
                ),
                Outcome::Inconsistent { iteration } => {
                    (format!("INCONSISTENT at iteration {iteration}\n"), EXIT_NEGATIVE, None, 0)
                }
                Outcome::BudgetExhausted {
                    last_level,
                    iterations,
                    reason,
                } => (
                    format!("BUDGET EXHAUSTED after {iterations} iterations: {reason}\n"),
                    EXIT_BUDGET,
                    None,
                    last_level.len(),
                ),
            };
            let mut report = RunReport::new(serde_json::to_value(&outcome).unwrap_or(Value::Null), text, code);
            report.witness = witness;
            report.iterations = Some(outcome.iterations());
            report.budget = json!({ "prune_forbidden": prune_forbidden, "limits": b });
            report.usage.atoms = Some(atoms);
            Ok(report)
        }
        Command::Forbidden {
            file,
            atom,
            trace,
            budget,
        } => {
            let p = load(file)?;
            let a = parse_atom(atom).map_err(|e| Failure::Input(format!("--atom: {e}")))?;
            let b = budget.budget().forbidden;
            let mut session = Session::new(&p, b);
            if *trace {
                session = session.traced();
            }
            let run = session.run(&SignedPair::positive([a.clone()]));
            let mut text: String = run.trace.iter().map(|e| format!("{e}\n")).collect();
            let lines: Vec<String> = run.trace.iter().map(|e| e.to_string()).collect();
            text.push_str(&match (run.verdict, run.exhausted) {
                (true, _) => format!("FORBIDDEN {a}\n"),
                (false, true) => format!("UNKNOWN {a} (budget exhausted)\n"),
                (false, false) => format!("UNKNOWN {a}\n"),
            });
            text.push_str(&format!("% calls: {}\n", run.calls));
            let code = if run.exhausted && !run.verdict { EXIT_BUDGET } else { EXIT_OK };
            let mut report = RunReport::new(
                json!({
                    "kind": "Verdict",
                    "atom": a.to_string(),
                    "forbidden": run.verdict,
                    "exhausted": run.exhausted,
                    "calls": run.calls,
                    "trace": lines,
                }),
                text,
                code,
            );
            report.iterations = Some(run.calls);
            report.budget = serde_json::to_value(b).unwrap_or(Value::Null);
            Ok(report)
        }
        Command::Gen(GenCommand::Tiling { spec }) => {
            let t = TilingSystem::parse(&read(spec)?)?;
            Ok(generated(tiling_to_program(&t)))
        }
        Command::Gen(GenCommand::Tm { spec, input }) => {
            let m = TuringMachine::parse(&read(spec)?)?;
            let word = input.as_deref().map(parse_word).transpose()?;
            Ok(generated(tm_to_program(&m, word.as_deref())))
        }
    }
}

fn generated(p: Program) -> RunReport {
    let text = p.to_string();
    let mut report = RunReport::new(json!({ "kind": "Generated", "program": text }), text, EXIT_OK);
    report.usage.rules = Some(p.rules().len());
    report
}
