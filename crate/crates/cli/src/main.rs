//! Batch front end: typing reports, normal forms, model checking,
//! equivalence checks, size reports and fuzzing runs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hflkit_core::fuzz::{FuzzConfig, Outcome, Suite};
use hflkit_core::semantics::{enumerate_ltss, satisfying_states, DEFAULT_BUDGET, MAX_ENUMERATION_BITS};
use hflkit_core::syntax::{parse_with, ParseOptions};
use hflkit_core::typing::TypedKind;
use hflkit_core::{
    measure, nnf, nnf_unshared, typecheck_closed, Evaluator, Formula, Label, Lts, PipelineError,
    SemanticsError, SizeReport,
};

#[derive(Parser, Debug)]
#[command(name = "hflkit", version, about = "Higher-order modal fixed point logic toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Line-oriented key=value records instead of prose.
    #[arg(long, global = true)]
    machine: bool,
    /// Largest semantic domain the model checker may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Typecheck a closed formula and report its type.
    Check { formula: PathBuf },
    /// Print the negation normal form of a closed ground formula.
    Nnf {
        formula: PathBuf,
        /// Print the monotonized formula without let-sharing.
        #[arg(long)]
        no_share: bool,
    },
    /// Decide whether a state satisfies a closed ground formula.
    Mc {
        formula: PathBuf,
        #[arg(long)]
        lts: PathBuf,
        /// State name or index.
        #[arg(long, default_value = "0")]
        state: String,
    },
    /// Compare two closed ground formulas on one or on all small systems.
    Eq {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, conflicts_with = "enumerate", required_unless_present = "enumerate")]
        lts: Option<PathBuf>,
        /// Compare on every system with up to this many states.
        #[arg(long)]
        enumerate: Option<usize>,
    },
    /// Report tree, annotated and dag sizes.
    Size { formula: PathBuf },
    /// Generate random well-typed formulas and check every invariant.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        max_order: usize,
        #[arg(long, default_value_t = 40)]
        max_size: usize,
        /// Skip the semantic comparison with the normal form.
        #[arg(long)]
        no_equivalence: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Parse or typing failure of an input.
    #[error("{0}")]
    Invalid(String),
    /// A negative verdict, already reported on standard output.
    #[error("{0}")]
    Verdict(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Verdict(_) => 1,
            CliError::Resource(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

impl From<SemanticsError> for CliError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::BudgetExceeded { .. } => CliError::Resource(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// One output record: `key=value` fields, values quoted when they contain
/// spaces, quotes or `=`.
#[derive(Default)]
struct Record(String);

impl Record {
    fn field(mut self, key: &str, value: impl ToString) -> Self {
        let value = value.to_string();
        if !self.0.is_empty() {
            self.0.push(' ');
        }
        let plain = !value.is_empty() && !value.contains(|c: char| c.is_whitespace() || c == '"' || c == '=');
        if plain {
            write!(self.0, "{key}={value}").expect("writing to a String");
        } else {
            write!(self.0, "{key}={value:?}").expect("writing to a String");
        }
        self
    }

    fn sizes(self, r: &SizeReport) -> Self {
        self.field("tree_size", r.tree_size)
            .field("annotated_size", r.annotated_size)
            .field("dag_size", r.dag_size.map_or_else(|| "n/a".to_string(), |d| d.to_string()))
            .field("var_count", r.var_count)
    }
}

struct Output {
    machine: bool,
    text: String,
}

impl Output {
    fn human(&mut self, line: impl AsRef<str>) {
        if !self.machine {
            self.text.push_str(line.as_ref());
            self.text.push('\n');
        }
    }

    fn record(&mut self, r: Record) {
        if self.machine {
            self.text.push_str(&r.0);
            self.text.push('\n');
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

// Generated let-variables are accepted so that normal forms read back.
fn read_formula(path: &Path) -> Result<Formula, CliError> {
    parse_with(&read(path)?, &ParseOptions::internal())
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn read_lts(path: &Path) -> Result<Lts, CliError> {
    Lts::parse(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn states(lts: &Lts, set: u64) -> String {
    let names: Vec<&str> = (0..lts.num_states()).filter(|s| set >> s & 1 == 1).map(|s| lts.state_name(s)).collect();
    format!("{{{}}}", names.join(", "))
}

fn cmd_check(out: &mut Output, path: &Path) -> Result<(), CliError> {
    let phi = read_formula(path)?;
    let t = match typecheck_closed(&phi) {
        Ok(t) => t,
        Err(e) => {
            out.human(format!("type error: {e}"));
            out.record(Record::default().field("status", "error").field("message", &e));
            return Err(CliError::Verdict(e.to_string()));
        }
    };
    out.human(format!("type: {}", t.ty));
    out.record(Record::default().field("status", "ok").field("type", &t.ty));
    for (path, sub) in t.occurrences() {
        let (kind, x, ty, v) = match &sub.kind {
            TypedKind::Lambda(x, ty, v, _) => ("lambda", x, ty, Some(v)),
            TypedKind::Mu(x, ty, _) => ("mu", x, ty, None),
            TypedKind::Nu(x, ty, _) => ("nu", x, ty, None),
            _ => continue,
        };
        let variance = v.map_or(String::new(), |v| format!("^{v}"));
        out.human(format!("  [{}] |- {kind} {x}:{}{variance} : {}", sub.env, ty.annotation(), sub.ty));
        let mut r = Record::default()
            .field("binder", x)
            .field("kind", kind)
            .field("path", format!("{path:?}").replace(' ', ""))
            .field("annotation", ty);
        if let Some(v) = v {
            r = r.field("variance", v);
        }
        out.record(r.field("type", &sub.ty));
    }
    Ok(())
}

fn cmd_nnf(out: &mut Output, path: &Path, no_share: bool) -> Result<(), CliError> {
    let phi = read_formula(path)?;
    let result = if no_share { nnf_unshared(&phi)? } else { nnf(&phi)? };
    let (before, after) = (measure(&phi), measure(&result));
    out.human(result.to_string());
    out.human(format!("input: {before}"));
    out.human(format!("output: {after}"));
    out.record(Record::default().field("formula", &result));
    out.record(Record::default().field("size", "input").sizes(&before));
    out.record(Record::default().field("size", "output").sizes(&after));
    Ok(())
}

fn cmd_mc(out: &mut Output, path: &Path, lts: &Path, state: &str, budget: usize) -> Result<(), CliError> {
    let phi = read_formula(path)?;
    let lts = read_lts(lts)?;
    let s = lts.resolve_state(state).map_err(|e| CliError::Usage(e.to_string()))?;
    // typing and budget failures alike leave the verdict undecided
    let set = satisfying_states(&Evaluator::with_budget(&lts, budget), &phi)
        .map_err(|e| CliError::Resource(e.to_string()))?;
    let holds = set >> s & 1 == 1;
    out.human(holds.to_string());
    out.record(Record::default().field("state", lts.state_name(s)).field("holds", holds));
    Ok(())
}

fn cmd_eq(
    out: &mut Output,
    paths: [&Path; 2],
    lts: Option<&Path>,
    enumerate: Option<usize>,
    budget: usize,
) -> Result<(), CliError> {
    let phi = read_formula(paths[0])?;
    let psi = read_formula(paths[1])?;
    let systems: Vec<Lts> = match (lts, enumerate) {
        (Some(p), _) => vec![read_lts(p)?],
        (None, Some(n)) => {
            let mut labels: BTreeSet<Label> = phi.labels();
            labels.extend(psi.labels());
            if labels.is_empty() {
                labels.insert(Label::new("a"));
            }
            let labels: Vec<Label> = labels.into_iter().collect();
            let bits = labels.len() * n * n;
            if n == 0 || bits > MAX_ENUMERATION_BITS {
                return Err(CliError::Usage(format!(
                    "cannot enumerate systems of {n} states: the relation needs {bits} bits, at most {MAX_ENUMERATION_BITS}"
                )));
            }
            enumerate_ltss(n, &labels).collect()
        }
        (None, None) => return Err(CliError::Usage("either --lts or --enumerate is required".into())),
    };
    let mut disagreements = 0;
    for (i, lts) in systems.iter().enumerate() {
        let ev = Evaluator::with_budget(lts, budget);
        let (a, b) = (satisfying_states(&ev, &phi)?, satisfying_states(&ev, &psi)?);
        let agree = a == b;
        if !agree {
            disagreements += 1;
            out.human(format!("system {i}: disagree at {}", states(lts, a ^ b)));
            out.human(lts.to_string());
        }
        out.record(Record::default().field("system", i).field("agree", agree).field("differ", states(lts, a ^ b)));
    }
    out.human(format!("{} systems, {disagreements} disagreements", systems.len()));
    out.record(Record::default().field("systems", systems.len()).field("disagreements", disagreements));
    if disagreements == 0 {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("formulas differ on {disagreements} systems")))
    }
}

fn cmd_size(out: &mut Output, path: &Path) -> Result<(), CliError> {
    let report = measure(&read_formula(path)?);
    out.human(report.to_string());
    out.record(Record::default().sizes(&report));
    Ok(())
}

fn cmd_fuzz(out: &mut Output, config: FuzzConfig) -> Result<(), CliError> {
    let reports = Suite::new(config).run();
    let (mut failed, mut resource) = (0, 0);
    for r in &reports {
        let base = Record::default().field("case", r.index);
        match &r.outcome {
            Outcome::Ok(s) => {
                out.human(format!(
                    "case {}: ok (order {}, size {} -> {}, {} systems)",
                    r.index, s.order, s.size, s.nnf_size, s.systems
                ));
                out.record(
                    base.field("status", "ok")
                        .field("order", s.order)
                        .field("size", s.size)
                        .field("vars", s.vars)
                        .field("unshared_size", s.unshared_size)
                        .field("nnf_size", s.nnf_size)
                        .field("systems", s.systems),
                );
            }
            Outcome::Failed { invariant, detail, shrunk } => {
                failed += 1;
                out.human(format!("case {}: FAILED {invariant}: {detail}", r.index));
                out.human(format!("  formula: {}", r.formula));
                out.human(format!("  shrunk:  {shrunk}"));
                out.record(
                    base.field("status", "failed")
                        .field("invariant", invariant)
                        .field("formula", &r.formula)
                        .field("shrunk", shrunk)
                        .field("detail", detail),
                );
            }
            Outcome::Resource(msg) => {
                resource += 1;
                out.human(format!("case {}: undecided: {msg}", r.index));
                out.record(base.field("status", "resource").field("formula", &r.formula).field("detail", msg));
            }
        }
    }
    let ok = reports.len() - failed - resource;
    out.human(format!("{} cases: {ok} ok, {failed} failed, {resource} undecided", reports.len()));
    out.record(
        Record::default()
            .field("cases", reports.len())
            .field("ok", ok)
            .field("failed", failed)
            .field("resource", resource),
    );
    if failed > 0 {
        Err(CliError::Verdict(format!("{failed} cases failed")))
    } else if resource > 0 {
        Err(CliError::Resource(format!("{resource} cases exceeded the budget")))
    } else {
        Ok(())
    }
}

fn run(cli: Cli, out: &mut Output) -> Result<(), CliError> {
    let budget = cli.budget;
    match cli.command {
        Command::Check { formula } => cmd_check(out, &formula),
        Command::Nnf { formula, no_share } => cmd_nnf(out, &formula, no_share),
        Command::Mc { formula, lts, state } => cmd_mc(out, &formula, &lts, &state, budget),
        Command::Eq { first, second, lts, enumerate } => {
            cmd_eq(out, [&first, &second], lts.as_deref(), enumerate, budget)
        }
        Command::Size { formula } => cmd_size(out, &formula),
        Command::Fuzz { seed, count, max_order, max_size, no_equivalence } => cmd_fuzz(
            out,
            FuzzConfig { seed, count, max_order, max_size, budget, equivalence: !no_equivalence },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let mut out = Output { machine: cli.machine, text: String::new() };
    let result = run(cli, &mut out);
    print!("{}", out.text);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Verdict(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
