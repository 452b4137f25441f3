//! `latagg`: command-line front end for the lattice aggregation workbench.
//!
//! Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 failed self-check.

mod source;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latagg_core::clone::{closure, verify_generation, CloneError, DEFAULT_CLOSURE_BUDGET};
use latagg_core::functable::for_each_in_class;
use latagg_core::generators::{count_generators_chain, count_generators_m, reduced_generator_set};
use latagg_core::lattice::MAX_SIZE;
use latagg_core::{
    decompose_id, decompose_id_reduced, EnumBudget, FnClass, FnTable, GenError, GeneratorSpec, Lattice, TableError,
    TermError,
};

use source::LatticeSource;

#[derive(Parser)]
#[command(name = "latagg", version, about = "Idempotent aggregation functions on finite lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice file utilities.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Count (and optionally print) all functions of a class.
    Enum(EnumArgs),
    /// Write an idempotent aggregation function as a generator term.
    Decompose(DecomposeArgs),
    /// Check that meet, join and the reduced generators produce Id^n(L).
    Verify(VerifyArgs),
    /// Composition closure of a base set at a fixed arity.
    Closure(ClosureArgs),
    /// Sizes of the reduced generating sets for chains and M lattices.
    Count(CountArgs),
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Validate a lattice file and print its relabeling.
    Check { path: PathBuf },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumLimits {
    /// Largest table size (|L|^n) to enumerate.
    #[arg(long, default_value_t = EnumBudget::default().max_cells, value_parser = positive)]
    max_cells: usize,
    /// Largest number of functions to enumerate.
    #[arg(long, default_value_t = EnumBudget::default().max_count, value_parser = positive)]
    max_count: usize,
}

impl EnumLimits {
    fn budget(&self) -> EnumBudget {
        EnumBudget {
            max_cells: self.max_cells,
            max_count: self.max_count,
        }
    }
}

#[derive(Args)]
struct EnumArgs {
    /// chain:<n>, m:<k>, n5, boolean:<k> or file:<path>
    #[arg(long)]
    lattice: LatticeSource,
    #[arg(long, value_parser = positive)]
    arity: usize,
    /// monotone, aggregation or idempotent
    #[arg(long)]
    class: FnClass,
    /// Print every table after the count.
    #[arg(long)]
    emit: bool,
    #[command(flatten)]
    limits: EnumLimits,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    lattice: LatticeSource,
    /// Function file.
    #[arg(long = "fn")]
    function: PathBuf,
    /// Use only generators whose third parameter is top.
    #[arg(long)]
    reduced: bool,
    /// Drop meet/join operands that cannot affect the result.
    #[arg(long)]
    simplify: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    lattice: LatticeSource,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    arity: usize,
    /// Closure budget in attempted compositions.
    #[arg(long, default_value_t = DEFAULT_CLOSURE_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[command(flatten)]
    limits: EnumLimits,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long)]
    lattice: LatticeSource,
    #[arg(long, value_parser = positive)]
    arity: usize,
    /// Base function: meet, join, median, reduced (all reduced generators),
    /// a generator such as `iota[0,1,2;1]`, or file:<path>. Repeatable.
    #[arg(long = "base")]
    base: Vec<String>,
    /// Attempted compositions before giving up.
    #[arg(long, default_value_t = DEFAULT_CLOSURE_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Print every reached table after the summary.
    #[arg(long)]
    emit: bool,
    #[command(flatten)]
    output: Output,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Chain,
    M,
    Both,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, value_enum, default_value_t = Family::Both)]
    family: Family,
    /// A single n or an inclusive range `a..b`.
    #[arg(long)]
    n: NRange,
}

#[derive(Clone, Copy)]
struct NRange(u64, u64);

impl std::str::FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("invalid n `{t}`"));
        match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range {s}"));
                }
                Ok(NRange(a, b))
            }
            None => num(s).map(|n| NRange(n, n)),
        }
    }
}

enum Failure {
    Invalid(String),
    Budget(String),
    SelfCheck(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Budget(_) => 3,
            Failure::SelfCheck(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Budget(m) | Failure::SelfCheck(m) => m,
        }
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        match e {
            TableError::BudgetExceeded(_) => Failure::Budget(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Table(t) => t.into(),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<TermError> for Failure {
    fn from(e: TermError) -> Self {
        match e {
            TermError::Table(t) => t.into(),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<CloneError> for Failure {
    fn from(e: CloneError) -> Self {
        match e {
            CloneError::Table(t) => t.into(),
            CloneError::Generator(g) => g.into(),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<latagg_core::LatticeError> for Failure {
    fn from(e: latagg_core::LatticeError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(output: &Output, text: &str) -> CmdResult {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_lattice_check(path: &Path) -> CmdResult {
    let l = Lattice::parse(&read_file(path)?)?;
    let mut out = format!(
        "lattice {}\nsize={}\nbottom={}\ntop={}\n",
        l.name(),
        l.size(),
        l.label(l.bottom()),
        l.label(l.top())
    );
    out.push_str("relabel");
    for x in l.elements() {
        out.push_str(&format!(" {}={x}", l.label(x)));
    }
    out.push('\n');
    emit(&Output { out: None }, &out)
}

fn cmd_enum(args: &EnumArgs) -> CmdResult {
    let l = args.lattice.load()?;
    let mut body = String::new();
    let mut i = 0usize;
    let count = for_each_in_class(&l, args.arity, args.class, args.limits.budget(), |f| {
        if args.emit {
            i += 1;
            body.push_str(&f.to_text(&format!("f{i}")));
        }
    })?;
    emit(&args.output, &format!("count={count}\n{body}"))
}

fn cmd_decompose(args: &DecomposeArgs) -> CmdResult {
    let l = args.lattice.load()?;
    let (_, f) = FnTable::parse(&read_file(&args.function)?, &l)?;
    let mut term = if args.reduced {
        decompose_id_reduced(&f)?
    } else {
        decompose_id(&f)?
    };
    if args.simplify {
        term = term.prune_dominated(&l)?;
    }
    let back = term.to_table(&l)?;
    if back != f {
        return Err(Failure::SelfCheck(format!(
            "self-check failed: term does not tabulate to the input\n{}",
            back.to_text("tabulated")
        )));
    }
    emit(&args.output, &term.to_file_text(&l))
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let l = args.lattice.load()?;
    let report = verify_generation(&l, args.arity, args.limits.budget(), args.budget)?;
    emit(&args.output, &report.to_text())?;
    if report.closure.budget_hit {
        return Err(Failure::Budget(format!("closure budget of {} exhausted", args.budget)));
    }
    if !(report.a_pass && report.b_pass) {
        return Err(Failure::SelfCheck("verification failed".into()));
    }
    Ok(())
}

fn base_functions<'l>(l: &'l Lattice, items: &[String]) -> Result<Vec<FnTable<'l>>, Failure> {
    let mut base = Vec::new();
    for item in items {
        match item.as_str() {
            "meet" => base.push(FnTable::meet(l)),
            "join" => base.push(FnTable::join(l)),
            "median" => base.push(FnTable::median(l)),
            "reduced" => {
                for spec in reduced_generator_set(l) {
                    base.push(spec.to_table(l)?);
                }
            }
            other => match other.strip_prefix("file:") {
                Some(path) => base.push(FnTable::parse(&read_file(Path::new(path))?, l)?.1),
                None => base.push(GeneratorSpec::parse(other, l)?.to_table(l)?),
            },
        }
    }
    Ok(base)
}

fn cmd_closure(args: &ClosureArgs) -> CmdResult {
    let l = args.lattice.load()?;
    let base = base_functions(&l, &args.base)?;
    let report = closure(&l, &base, args.arity, args.budget)?;
    let mut out = format!("{}\n", report.summary());
    if args.emit {
        for (i, f) in report.tables().iter().enumerate() {
            out.push_str(&f.to_text(&format!("c{}", i + 1)));
        }
    }
    emit(&args.output, &out)?;
    if report.budget_hit {
        return Err(Failure::Budget(format!(
            "budget of {} attempted compositions exhausted; the reached set is partial",
            args.budget
        )));
    }
    Ok(())
}

/// Listing the reduced set costs about |L|³ specs, so the cross-check stops
/// at this size.
const LISTED_LIMIT: u64 = 64;

fn cmd_count(args: &CountArgs) -> CmdResult {
    let NRange(lo, hi) = args.n;
    let (chain, m) = match args.family {
        Family::Chain => (true, false),
        Family::M => (false, true),
        Family::Both => (true, true),
    };
    let mut header = vec!["n"];
    if chain {
        header.extend(["g_chain", "listed_chain"]);
    }
    if m {
        header.extend(["g_m", "listed_m"]);
    }
    let mut out = format!("{}\n", header.join(" "));
    let mut mismatch = None;
    for n in lo..=hi {
        let mut row = vec![n.to_string()];
        let mut column = |formula: Result<u64, GenError>, build: &dyn Fn() -> Option<Lattice>| {
            match formula {
                Err(_) => row.extend(["-".to_string(), "-".to_string()]),
                Ok(g) => {
                    row.push(g.to_string());
                    match build() {
                        Some(l) => {
                            let listed = 2 + reduced_generator_set(&l).len() as u64;
                            if listed != g && mismatch.is_none() {
                                mismatch = Some(format!("{}: closed form {g}, listed {listed}", l.name()));
                            }
                            row.push(listed.to_string());
                        }
                        None => row.push("-".to_string()),
                    }
                }
            }
        };
        let fits = n <= LISTED_LIMIT && (n as usize) <= MAX_SIZE;
        if chain {
            column(count_generators_chain(n), &|| fits.then(|| Lattice::chain(n as usize).ok()).flatten());
        }
        if m {
            column(count_generators_m(n), &|| {
                fits.then(|| Lattice::m_lattice(n as usize - 2).ok()).flatten()
            });
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    emit(&Output { out: None }, &out)?;
    match mismatch {
        Some(m) => Err(Failure::SelfCheck(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Lattice(LatticeCommand::Check { path }) => cmd_lattice_check(path),
        Command::Enum(args) => cmd_enum(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Closure(args) => cmd_closure(args),
        Command::Count(args) => cmd_count(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
