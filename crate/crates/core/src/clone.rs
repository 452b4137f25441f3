//! Bounded composition closure at a fixed arity, used as an independent
//! check that a set of generators produces a given class of functions.
//!
//! Starting from the `n` projections, the closure repeatedly applies every
//! base function to tuples of already reached `n`-ary functions. The search is
//! semi-naive: each reached function is the "given" argument of a step, and a
//! step for base function `f` tries exactly the argument tuples whose newest
//! component is the given one, so every tuple is tried once. Steps are
//! scheduled cheapest first (a step for a `k`-ary function on the `p`-th given
//! costs `(p+1)^k - p^k` compositions), which keeps cheap binary operations
//! well ahead of ternary ones while still trying every tuple eventually.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::functable::{compose_into, enumerate_class, same_lattice, EnumBudget, FnClass, FnKey, FnTable, TableError};
use crate::generators::{decompose_id_reduced, reduced_generator_set, GenError};
use crate::lattice::Lattice;

/// Default limit on attempted compositions.
pub const DEFAULT_CLOSURE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CloneError {
    #[error("LatticeMismatch: base functions live on different lattices")]
    LatticeMismatch,
    #[error("budget must be at least 1")]
    InvalidBudget,
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Generator(#[from] GenError),
}

#[derive(Debug, Clone, Copy)]
pub struct ClosureOptions<'a> {
    /// Maximum number of attempted compositions.
    pub budget: u64,
    /// Stop as soon as every function in this set (value vectors) is reached.
    pub ceiling: Option<&'a HashSet<Vec<u8>>>,
}

impl Default for ClosureOptions<'_> {
    fn default() -> Self {
        ClosureOptions {
            budget: DEFAULT_CLOSURE_BUDGET,
            ceiling: None,
        }
    }
}

/// Outcome of a closure run.
#[derive(Debug, Clone)]
pub struct ClosureReport<'l> {
    lattice: &'l Lattice,
    arity: usize,
    reached: IndexSet<Vec<u8>>,
    /// Largest derivation depth among reached functions (projections have depth 0).
    pub rounds: usize,
    /// Functions added beyond the projections.
    pub insertions: usize,
    /// Compositions attempted.
    pub attempts: u64,
    /// The attempt budget ran out before a fixpoint.
    pub budget_hit: bool,
    /// Stopped early because every ceiling function was reached.
    pub ceiling_hit: bool,
    pub elapsed: Duration,
}

impl<'l> ClosureReport<'l> {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn reached_count(&self) -> usize {
        self.reached.len()
    }

    /// A fixpoint was reached: the set is closed under every base function.
    pub fn is_fixpoint(&self) -> bool {
        !self.budget_hit && !self.ceiling_hit
    }

    pub fn contains(&self, f: &FnTable<'_>) -> bool {
        f.arity() == self.arity && self.reached.contains(f.values())
    }

    /// Reached functions in insertion order.
    pub fn tables(&self) -> Vec<FnTable<'l>> {
        self.reached
            .iter()
            .map(|v| FnTable::from_bytes(self.lattice, self.arity, v.clone()).expect("valid by construction"))
            .collect()
    }

    pub fn keys(&self) -> HashSet<FnKey> {
        self.tables().iter().map(FnTable::key).collect()
    }

    pub fn value_set(&self) -> HashSet<Vec<u8>> {
        self.reached.iter().cloned().collect()
    }

    /// `reached=<k> rounds=<r> budget_hit=<bool>`
    pub fn summary(&self) -> String {
        format!(
            "reached={} rounds={} budget_hit={}",
            self.reached.len(),
            self.rounds,
            self.budget_hit
        )
    }
}

/// Composition closure of `base` at arity `n` with a plain attempt budget.
pub fn closure<'l>(
    lattice: &'l Lattice,
    base: &[FnTable<'l>],
    n: usize,
    budget: u64,
) -> Result<ClosureReport<'l>, CloneError> {
    closure_with(lattice, base, n, ClosureOptions { budget, ceiling: None })
}

struct BaseOp<'a, 'l> {
    f: &'a FnTable<'l>,
    commutative: bool,
    idempotent: bool,
    // number of givens already processed
    pointer: usize,
}

fn step_cost(arity: usize, p: usize) -> u128 {
    let k = arity as u32;
    (p as u128 + 1).pow(k) - (p as u128).pow(k)
}

pub fn closure_with<'l>(
    lattice: &'l Lattice,
    base: &[FnTable<'l>],
    n: usize,
    options: ClosureOptions<'_>,
) -> Result<ClosureReport<'l>, CloneError> {
    let start = Instant::now();
    if options.budget == 0 {
        return Err(CloneError::InvalidBudget);
    }
    if base.iter().any(|f| !same_lattice(f.lattice(), lattice)) {
        return Err(CloneError::LatticeMismatch);
    }
    let cells = lattice
        .tuple_count(n)
        .ok_or_else(|| TableError::BudgetExceeded("table size overflows".into()))?;

    let mut reached: IndexSet<Vec<u8>> = IndexSet::new();
    let mut depth: Vec<usize> = Vec::new();
    for i in 1..=n {
        if reached.insert(FnTable::projection(lattice, n, i)?.into_values()) {
            depth.push(0);
        }
    }
    let target = options.ceiling.map(|c| c.len()).unwrap_or(usize::MAX);
    let mut hits = options
        .ceiling
        .map(|c| reached.iter().filter(|v| c.contains(*v)).count())
        .unwrap_or(0);

    let mut ops: Vec<BaseOp<'_, 'l>> = base
        .iter()
        .map(|f| BaseOp {
            f,
            commutative: f.arity() == 2 && {
                let m = lattice.size();
                (0..m).all(|x| (0..m).all(|y| f.at(x * m + y) == f.at(y * m + x)))
            },
            idempotent: f.is_idempotent(),
            pointer: 0,
        })
        .collect();

    let mut attempts = 0u64;
    let mut budget_hit = false;
    let mut ceiling_hit = hits >= target;
    let mut scratch = vec![0u8; cells];
    let mut tuple: Vec<usize> = Vec::new();

    'outer: while !ceiling_hit {
        let next = ops
            .iter()
            .enumerate()
            .filter(|(_, op)| op.pointer < reached.len())
            .min_by_key(|(i, op)| (step_cost(op.f.arity(), op.pointer), *i))
            .map(|(i, _)| i);
        let Some(which) = next else { break };
        let op = &ops[which];
        let k = op.f.arity();
        let given = op.pointer;

        // Tuples over 0..=given whose first occurrence of `given` is at `pos`:
        // earlier slots < given, later slots <= given.
        for pos in 0..k {
            tuple.clear();
            tuple.resize(k, 0);
            tuple[pos] = given;
            let limit = |slot: usize| if slot < pos { given } else { given + 1 };
            if pos > 0 && given == 0 {
                continue;
            }
            let free: Vec<usize> = (0..k).filter(|&s| s != pos).collect();
            loop {
                let skip = (op.commutative && tuple[0] > tuple[1])
                    || (op.idempotent && tuple.iter().all(|&t| t == given));
                if !skip {
                    if attempts == options.budget {
                        budget_hit = true;
                        break 'outer;
                    }
                    attempts += 1;
                    let args: Vec<&[u8]> = tuple.iter().map(|&t| reached[t].as_slice()).collect();
                    compose_into(op.f, &args, &mut scratch);
                    if !reached.contains(scratch.as_slice()) {
                        let d = 1 + tuple.iter().map(|&t| depth[t]).max().unwrap_or(0);
                        if options.ceiling.is_some_and(|c| c.contains(&scratch)) {
                            hits += 1;
                        }
                        reached.insert(scratch.clone());
                        depth.push(d);
                        if hits >= target {
                            ceiling_hit = true;
                            break 'outer;
                        }
                    }
                }
                // advance the free slots as an odometer
                let mut carried = true;
                for &s in free.iter().rev() {
                    tuple[s] += 1;
                    if tuple[s] < limit(s) {
                        carried = false;
                        break;
                    }
                    tuple[s] = 0;
                }
                if carried {
                    break;
                }
            }
        }
        ops[which].pointer += 1;
    }

    let insertions = reached.len() - depth.iter().filter(|&&d| d == 0).count();
    Ok(ClosureReport {
        lattice,
        arity: n,
        rounds: depth.iter().copied().max().unwrap_or(0),
        insertions,
        attempts,
        budget_hit,
        ceiling_hit,
        elapsed: start.elapsed(),
        reached,
    })
}

/// Outcome of [`verify_generation`].
#[derive(Debug, Clone)]
pub struct VerifyReport<'l> {
    pub lattice: &'l Lattice,
    pub arity: usize,
    /// `|Id^n(L)|` from exhaustive enumeration.
    pub id_count: usize,
    /// Base size: meet, join and the reduced ι generators.
    pub generator_count: usize,
    pub closure: ClosureReport<'l>,
    /// Closure of the generators equals `Id^n(L)`.
    pub a_pass: bool,
    /// A function that the closure missed, or reached outside `Id^n(L)`.
    pub a_counterexample: Option<(FnTable<'l>, &'static str)>,
    /// Every `f` in `Id^n(L)` is recovered by its reduced decomposition.
    pub b_pass: bool,
    pub b_checked: usize,
    pub b_counterexample: Option<FnTable<'l>>,
}

impl VerifyReport<'_> {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "lattice={} arity={} id_count={} generators={}",
            self.lattice.name(),
            self.arity,
            self.id_count,
            self.generator_count
        );
        let _ = writeln!(
            out,
            "closure {} attempts={} stopped_when_complete={}",
            self.closure.summary(),
            self.closure.attempts,
            self.closure.ceiling_hit
        );
        let _ = writeln!(out, "decompositions checked={}", self.b_checked);
        let verdict = |ok: bool| if ok { "pass" } else { "fail" };
        let _ = writeln!(out, "A={} B={}", verdict(self.a_pass), verdict(self.b_pass));
        if let Some((f, why)) = &self.a_counterexample {
            let _ = writeln!(out, "# A counterexample ({why})");
            out.push_str(&f.to_text("counterexample_a"));
        }
        if let Some(f) = &self.b_counterexample {
            out.push_str("# B counterexample\n");
            out.push_str(&f.to_text("counterexample_b"));
        }
        out
    }
}

/// Checks two ways that meet, join and the reduced ι generators generate
/// `Id^n(L)`:
///
/// * (A) their composition closure at arity `n` is exactly the enumerated
///   `Id^n(L)`. The closure stops once all of `Id^n(L)` is reached; since
///   every generator is itself an idempotent aggregation function and that
///   class is closed under composition, nothing outside can appear later.
/// * (B) every `f` in `Id^n(L)` tabulates back from [`decompose_id_reduced`].
pub fn verify_generation<'l>(
    lattice: &'l Lattice,
    n: usize,
    enum_budget: EnumBudget,
    closure_budget: u64,
) -> Result<VerifyReport<'l>, CloneError> {
    let ids = enumerate_class(lattice, n, FnClass::Idempotent, enum_budget)?;
    let id_set: HashSet<Vec<u8>> = ids.iter().map(|f| f.values().to_vec()).collect();

    let mut base = vec![FnTable::meet(lattice), FnTable::join(lattice)];
    for spec in reduced_generator_set(lattice) {
        base.push(spec.to_table(lattice)?);
    }
    let base_ok = base.iter().all(|g| g.is_idempotent() && g.is_aggregation());

    let closure = closure_with(
        lattice,
        &base,
        n,
        ClosureOptions {
            budget: closure_budget,
            ceiling: Some(&id_set),
        },
    )?;
    let reached = closure.value_set();
    let a_counterexample = ids
        .iter()
        .find(|f| !reached.contains(f.values()))
        .map(|f| (f.clone(), "not reached"))
        .or_else(|| {
            closure
                .tables()
                .into_iter()
                .find(|f| !id_set.contains(f.values()))
                .map(|f| (f, "reached but not idempotent"))
        });
    let a_pass = base_ok && !closure.budget_hit && a_counterexample.is_none();

    let b_failures: Vec<Option<usize>> = ids
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let ok = decompose_id_reduced(f)
                .ok()
                .and_then(|t| t.to_table(lattice).ok())
                .is_some_and(|t| &t == f);
            (!ok).then_some(i)
        })
        .collect();
    let b_counterexample = b_failures.into_iter().flatten().next().map(|i| ids[i].clone());

    Ok(VerifyReport {
        lattice,
        arity: n,
        id_count: ids.len(),
        generator_count: base.len(),
        closure,
        a_pass,
        a_counterexample,
        b_pass: b_counterexample.is_none(),
        b_checked: ids.len(),
        b_counterexample,
    })
}
