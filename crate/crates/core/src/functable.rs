//! Total `n`-ary functions on a finite lattice, stored as value tables.
//!
//! Position `k` of the value vector holds `f(x)` for the tuple `x` with index
//! `k` (see [`Lattice::tuple_index`]).

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::ptr;

use thiserror::Error;

use crate::lattice::{Elem, Lattice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("ArityMismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("LatticeMismatch: functions live on different lattices")]
    LatticeMismatch,
    #[error("IndexOutOfRange: projection {index} of arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("table has {found} values, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("value {0} is not an element of the lattice")]
    InvalidValue(usize),
    #[error("BudgetExceeded: {0}")]
    BudgetExceeded(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Canonical identity of a function: arity followed by its value vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FnKey(Vec<u8>);

impl FnKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// A total function `L^n -> L`.
#[derive(Clone)]
pub struct FnTable<'l> {
    lattice: &'l Lattice,
    arity: usize,
    values: Vec<u8>,
}

impl PartialEq for FnTable<'_> {
    fn eq(&self, other: &Self) -> bool {
        same_lattice(self.lattice, other.lattice)
            && self.arity == other.arity
            && self.values == other.values
    }
}

impl Eq for FnTable<'_> {}

impl fmt::Debug for FnTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.values().iter().map(|&v| self.lattice.label(v as Elem)).collect();
        f.debug_struct("FnTable")
            .field("lattice", &self.lattice.name())
            .field("arity", &self.arity)
            .field("values", &labels)
            .finish()
    }
}

pub(crate) fn same_lattice(a: &Lattice, b: &Lattice) -> bool {
    ptr::eq(a, b) || a == b
}

fn cells(lattice: &Lattice, arity: usize) -> Result<usize, TableError> {
    if arity == 0 {
        return Err(TableError::ZeroArity);
    }
    lattice.tuple_count(arity).ok_or_else(|| {
        TableError::BudgetExceeded(format!("{}^{arity} table cells overflow", lattice.size()))
    })
}

impl<'l> FnTable<'l> {
    pub fn from_values(lattice: &'l Lattice, arity: usize, values: Vec<Elem>) -> Result<Self, TableError> {
        let expected = cells(lattice, arity)?;
        if values.len() != expected {
            return Err(TableError::WrongLength {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= lattice.size()) {
            return Err(TableError::InvalidValue(bad));
        }
        Ok(FnTable {
            lattice,
            arity,
            values: values.into_iter().map(|v| v as u8).collect(),
        })
    }

    /// Builds a table from raw bytes; every byte must be an element index.
    pub fn from_bytes(lattice: &'l Lattice, arity: usize, values: Vec<u8>) -> Result<Self, TableError> {
        let expected = cells(lattice, arity)?;
        if values.len() != expected {
            return Err(TableError::WrongLength {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&v| v as usize >= lattice.size()) {
            return Err(TableError::InvalidValue(bad as usize));
        }
        Ok(FnTable { lattice, arity, values })
    }

    /// Tabulates `f` over every tuple of `L^arity`.
    pub fn from_fn(
        lattice: &'l Lattice,
        arity: usize,
        mut f: impl FnMut(&[Elem]) -> Elem,
    ) -> Result<Self, TableError> {
        let count = cells(lattice, arity)?;
        let mut values = Vec::with_capacity(count);
        let mut x = vec![0; arity];
        for idx in 0..count {
            lattice.decode_tuple(idx, &mut x);
            let v = f(&x);
            if v >= lattice.size() {
                return Err(TableError::InvalidValue(v));
            }
            values.push(v as u8);
        }
        Ok(FnTable { lattice, arity, values })
    }

    /// The `i`-th `n`-ary projection, `i` counted from 1.
    pub fn projection(lattice: &'l Lattice, n: usize, i: usize) -> Result<Self, TableError> {
        if i == 0 || i > n {
            return Err(TableError::IndexOutOfRange { index: i, arity: n });
        }
        Self::from_fn(lattice, n, |x| x[i - 1])
    }

    pub fn constant(lattice: &'l Lattice, n: usize, c: Elem) -> Result<Self, TableError> {
        Self::from_fn(lattice, n, |_| c)
    }

    /// `n`-ary meet of all arguments.
    pub fn meet_all(lattice: &'l Lattice, n: usize) -> Result<Self, TableError> {
        Self::from_fn(lattice, n, |x| lattice.meet_all(x).expect("arity >= 1"))
    }

    /// `n`-ary join of all arguments.
    pub fn join_all(lattice: &'l Lattice, n: usize) -> Result<Self, TableError> {
        Self::from_fn(lattice, n, |x| lattice.join_all(x).expect("arity >= 1"))
    }

    /// Binary meet.
    pub fn meet(lattice: &'l Lattice) -> Self {
        Self::meet_all(lattice, 2).expect("binary table fits")
    }

    /// Binary join.
    pub fn join(lattice: &'l Lattice) -> Self {
        Self::join_all(lattice, 2).expect("binary table fits")
    }

    /// Ternary lattice median `(x∧y) ∨ (y∧z) ∨ (x∧z)`.
    pub fn median(lattice: &'l Lattice) -> Self {
        let l = lattice;
        Self::from_fn(l, 3, |x| {
            l.join(l.join(l.meet(x[0], x[1]), l.meet(x[1], x[2])), l.meet(x[0], x[2]))
        })
        .expect("ternary table fits")
    }

    pub fn lattice(&self) -> &'l Lattice {
        self.lattice
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Raw value vector in tuple-index order.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u8> {
        self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Elem {
        self.values[idx] as Elem
    }

    pub fn eval(&self, x: &[Elem]) -> Elem {
        debug_assert_eq!(x.len(), self.arity);
        self.at(self.lattice.tuple_index(x))
    }

    pub fn key(&self) -> FnKey {
        let mut bytes = (self.arity as u32).to_le_bytes().to_vec();
        bytes.extend_from_slice(&self.values);
        FnKey(bytes)
    }

    fn diagonal_index(&self, x: Elem) -> usize {
        let m = self.lattice.size();
        (0..self.arity).fold(0, |acc, _| acc * m + x)
    }

    /// First pair of tuple indices `(x, y)` with `x ≤ y` but `f(x) ≰ f(y)`.
    ///
    /// Only covering pairs (one coordinate raised to an upper cover) are
    /// examined; the full order on `L^n` is their transitive closure.
    pub fn monotonicity_violation(&self) -> Option<(usize, usize)> {
        let l = self.lattice;
        let m = l.size();
        let mut x = vec![0; self.arity];
        for idx in 0..self.values.len() {
            l.decode_tuple(idx, &mut x);
            let fx = self.at(idx);
            let mut weight = 1;
            for pos in (0..self.arity).rev() {
                let xi = x[pos];
                for &up in l.upper_covers(xi) {
                    let succ = idx + (up - xi) * weight;
                    if !l.leq(fx, self.at(succ)) {
                        return Some((idx, succ));
                    }
                }
                weight *= m;
            }
        }
        None
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violation().is_none()
    }

    pub fn is_boundary(&self) -> bool {
        let l = self.lattice;
        self.at(self.diagonal_index(l.bottom())) == l.bottom()
            && self.at(self.diagonal_index(l.top())) == l.top()
    }

    pub fn is_aggregation(&self) -> bool {
        self.is_boundary() && self.is_monotone()
    }

    /// First `x` with `f(x,…,x) ≠ x`.
    pub fn idempotency_violation(&self) -> Option<Elem> {
        self.lattice
            .elements()
            .find(|&x| self.at(self.diagonal_index(x)) != x)
    }

    pub fn is_idempotent(&self) -> bool {
        self.idempotency_violation().is_none()
    }

    /// First tuple index where `⋀x ≤ f(x) ≤ ⋁x` fails.
    pub fn intermediate_violation(&self) -> Option<usize> {
        let l = self.lattice;
        let m = l.size();
        // walk L^n in index order with an odometer instead of decoding each index
        let mut x = vec![0; self.arity];
        for (idx, &fx) in self.values.iter().enumerate() {
            let fx = fx as Elem;
            let (lo, hi) = x[1..]
                .iter()
                .fold((x[0], x[0]), |(lo, hi), &xi| (l.meet(lo, xi), l.join(hi, xi)));
            if !(l.leq(lo, fx) && l.leq(fx, hi)) {
                return Some(idx);
            }
            for d in x.iter_mut().rev() {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        None
    }

    pub fn is_intermediate(&self) -> bool {
        self.intermediate_violation().is_none()
    }

    fn check_compatible(&self, other: &FnTable<'_>) -> Result<(), TableError> {
        if !same_lattice(self.lattice, other.lattice) {
            return Err(TableError::LatticeMismatch);
        }
        if self.arity != other.arity {
            return Err(TableError::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn pointwise_join(&self, other: &FnTable<'_>) -> Result<FnTable<'l>, TableError> {
        self.check_compatible(other)?;
        let l = self.lattice;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| l.join(a as Elem, b as Elem) as u8)
            .collect();
        Ok(FnTable { lattice: l, arity: self.arity, values })
    }

    pub fn pointwise_meet(&self, other: &FnTable<'_>) -> Result<FnTable<'l>, TableError> {
        self.check_compatible(other)?;
        let l = self.lattice;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| l.meet(a as Elem, b as Elem) as u8)
            .collect();
        Ok(FnTable { lattice: l, arity: self.arity, values })
    }

    /// `f ≤ g` in the component-wise order of functions.
    pub fn leq_pointwise(&self, other: &FnTable<'_>) -> Result<bool, TableError> {
        self.check_compatible(other)?;
        let l = self.lattice;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .all(|(&a, &b)| l.leq(a as Elem, b as Elem)))
    }

    /// Renders the table in the function file format.
    pub fn to_text(&self, name: &str) -> String {
        let l = self.lattice;
        let mut out = format!("function {name} arity {} lattice {}\n", self.arity, l.name());
        let mut x = vec![0; self.arity];
        for idx in 0..self.values.len() {
            l.decode_tuple(idx, &mut x);
            for &xi in &x {
                out.push_str(l.label(xi));
                out.push(' ');
            }
            let _ = writeln!(out, "-> {}", l.label(self.at(idx)));
        }
        out.push_str("end\n");
        out
    }

    /// Parses a function file against `lattice`. Returns the function name and table.
    pub fn parse(text: &str, lattice: &'l Lattice) -> Result<(String, FnTable<'l>), TableError> {
        let perr = |line: usize, msg: String| TableError::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        let (name, arity) = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["function", name, "arity", n, "lattice", lname] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| perr(hline, format!("bad arity `{n}`")))?;
                if *lname != lattice.name() {
                    return Err(perr(
                        hline,
                        format!("table is for lattice `{lname}`, not `{}`", lattice.name()),
                    ));
                }
                (name.to_string(), n)
            }
            _ => {
                return Err(perr(
                    hline,
                    "expected `function <name> arity <n> lattice <lattice-name>`".into(),
                ))
            }
        };
        let count = cells(lattice, arity).map_err(|e| perr(hline, e.to_string()))?;
        let mut values: Vec<Option<u8>> = vec![None; count];
        let mut ended = false;
        for (no, line) in lines.by_ref() {
            if line == "end" {
                ended = true;
                break;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| perr(no, "expected `<label> ... -> <label>`".into()))?;
            let lookup = |s: &str| {
                lattice
                    .element(s)
                    .ok_or_else(|| perr(no, format!("unknown element `{s}`")))
            };
            let t: Vec<Elem> = lhs.split_whitespace().map(lookup).collect::<Result<_, _>>()?;
            if t.len() != arity {
                return Err(perr(no, format!("expected {arity} arguments, found {}", t.len())));
            }
            let out = match rhs.split_whitespace().collect::<Vec<_>>().as_slice() {
                [v] => lookup(v)?,
                _ => return Err(perr(no, "expected exactly one result label".into())),
            };
            let slot = &mut values[lattice.tuple_index(&t)];
            if slot.is_some() {
                return Err(perr(no, format!("duplicate tuple {}", lattice.format_tuple(&t))));
            }
            *slot = Some(out as u8);
        }
        if !ended {
            return Err(perr(text.lines().count().max(1), "missing `end`".into()));
        }
        if let Some((no, _)) = lines.next() {
            return Err(perr(no, "content after `end`".into()));
        }
        if let Some(idx) = values.iter().position(Option::is_none) {
            let t = lattice.tuple_at(idx, arity);
            return Err(perr(hline, format!("missing tuple {}", lattice.format_tuple(&t))));
        }
        let values = values.into_iter().map(|v| v.expect("checked")).collect();
        Ok((name, FnTable { lattice, arity, values }))
    }
}

/// `f(g_1, …, g_k)`: the `n`-ary function `x ↦ f(g_1(x), …, g_k(x))`.
pub fn compose<'l>(f: &FnTable<'l>, gs: &[FnTable<'_>]) -> Result<FnTable<'l>, TableError> {
    if gs.len() != f.arity {
        return Err(TableError::ArityMismatch {
            expected: f.arity,
            found: gs.len(),
        });
    }
    let Some(first) = gs.first() else {
        return Err(TableError::ZeroArity);
    };
    for g in gs {
        if !same_lattice(f.lattice, g.lattice) {
            return Err(TableError::LatticeMismatch);
        }
        if g.arity != first.arity {
            return Err(TableError::ArityMismatch {
                expected: first.arity,
                found: g.arity,
            });
        }
    }
    let refs: Vec<&[u8]> = gs.iter().map(|g| g.values()).collect();
    let mut values = vec![0u8; first.values.len()];
    compose_into(f, &refs, &mut values);
    Ok(FnTable {
        lattice: f.lattice,
        arity: first.arity,
        values,
    })
}

/// Unchecked composition kernel: `out[c] = f(args[0][c], …, args[k-1][c])`.
#[inline]
pub(crate) fn compose_into(f: &FnTable<'_>, args: &[&[u8]], out: &mut [u8]) {
    let m = f.lattice.size();
    for (c, slot) in out.iter_mut().enumerate() {
        let idx = args.iter().fold(0, |acc, g| acc * m + g[c] as usize);
        *slot = f.values[idx];
    }
}

/// Function classes that can be enumerated exhaustively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FnClass {
    Monotone,
    Aggregation,
    Idempotent,
}

impl std::str::FromStr for FnClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monotone" => Ok(FnClass::Monotone),
            "aggregation" => Ok(FnClass::Aggregation),
            "idempotent" => Ok(FnClass::Idempotent),
            other => Err(format!("unknown class `{other}` (monotone|aggregation|idempotent)")),
        }
    }
}

impl fmt::Display for FnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FnClass::Monotone => "monotone",
            FnClass::Aggregation => "aggregation",
            FnClass::Idempotent => "idempotent",
        })
    }
}

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBudget {
    /// Largest admissible table size `m^n`.
    pub max_cells: usize,
    /// Largest admissible number of emitted functions.
    pub max_count: usize,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget {
            max_cells: 64,
            max_count: 10_000_000,
        }
    }
}

/// Calls `visit` on every function of `class` with the given arity, in
/// lexicographic order of value vectors. Returns the number visited.
///
/// Tuples are assigned depth-first in index order. Because index order
/// extends the product order, every tuple below the current one is already
/// assigned, so the monotone lower bound is the join of the values at the
/// immediate predecessors.
pub fn for_each_in_class<'l>(
    lattice: &'l Lattice,
    n: usize,
    class: FnClass,
    budget: EnumBudget,
    mut visit: impl FnMut(&FnTable<'l>),
) -> Result<usize, TableError> {
    let count = cells(lattice, n)?;
    if count > budget.max_cells {
        return Err(TableError::BudgetExceeded(format!(
            "{}^{n} = {count} table cells exceeds the limit of {}",
            lattice.size(),
            budget.max_cells
        )));
    }
    let l = lattice;
    let m = l.size();

    // immediate predecessors of each tuple and the class-specific value interval
    let mut preds: Vec<Vec<usize>> = Vec::with_capacity(count);
    let mut lo = vec![l.bottom(); count];
    let mut hi = vec![l.top(); count];
    let mut x = vec![0; n];
    for idx in 0..count {
        l.decode_tuple(idx, &mut x);
        let mut p = Vec::new();
        let mut weight = 1;
        for pos in (0..n).rev() {
            for &down in l.lower_covers(x[pos]) {
                p.push(idx - (x[pos] - down) * weight);
            }
            weight *= m;
        }
        preds.push(p);
        match class {
            FnClass::Monotone => {}
            FnClass::Aggregation => {
                if x.iter().all(|&xi| xi == l.bottom()) {
                    hi[idx] = l.bottom();
                }
                if x.iter().all(|&xi| xi == l.top()) {
                    lo[idx] = l.top();
                }
            }
            FnClass::Idempotent => {
                lo[idx] = l.meet_all(&x).expect("n >= 1");
                hi[idx] = l.join_all(&x).expect("n >= 1");
            }
        }
    }
    // elements above each element, ascending
    let ups: Vec<Vec<u8>> = l
        .elements()
        .map(|a| l.elements().filter(|&b| l.leq(a, b)).map(|b| b as u8).collect())
        .collect();

    let mut table = FnTable {
        lattice: l,
        arity: n,
        values: vec![0; count],
    };
    let mut emitted = 0usize;
    let mut overflow = false;

    struct Search<'a, 'l, F> {
        l: &'l Lattice,
        preds: &'a [Vec<usize>],
        lo: &'a [Elem],
        hi: &'a [Elem],
        ups: &'a [Vec<u8>],
        max_count: usize,
        emitted: &'a mut usize,
        overflow: &'a mut bool,
        visit: F,
    }

    impl<'l, F: FnMut(&FnTable<'l>)> Search<'_, 'l, F> {
        fn go(&mut self, table: &mut FnTable<'l>, idx: usize) {
            if *self.overflow {
                return;
            }
            if idx == table.values.len() {
                if *self.emitted == self.max_count {
                    *self.overflow = true;
                    return;
                }
                *self.emitted += 1;
                (self.visit)(table);
                return;
            }
            let l = self.l;
            let floor = self.preds[idx]
                .iter()
                .fold(self.lo[idx], |acc, &p| l.join(acc, table.values[p] as Elem));
            let cap = self.hi[idx];
            for &v in &self.ups[floor] {
                if l.leq(v as Elem, cap) {
                    table.values[idx] = v;
                    self.go(table, idx + 1);
                }
            }
        }
    }

    Search {
        l,
        preds: &preds,
        lo: &lo,
        hi: &hi,
        ups: &ups,
        max_count: budget.max_count,
        emitted: &mut emitted,
        overflow: &mut overflow,
        visit: &mut visit,
    }
    .go(&mut table, 0);

    if overflow {
        return Err(TableError::BudgetExceeded(format!(
            "more than {} {class} functions of arity {n} on {}",
            budget.max_count,
            l.name()
        )));
    }
    Ok(emitted)
}

/// All functions of `class` with the given arity, in lexicographic order.
pub fn enumerate_class<'l>(
    lattice: &'l Lattice,
    n: usize,
    class: FnClass,
    budget: EnumBudget,
) -> Result<Vec<FnTable<'l>>, TableError> {
    let mut out = Vec::new();
    for_each_in_class(lattice, n, class, budget, |f| out.push(f.clone()))?;
    Ok(out)
}

/// Set of canonical keys, for membership tests between function families.
pub fn key_set<'a, 'l: 'a>(fs: impl IntoIterator<Item = &'a FnTable<'l>>) -> HashSet<FnKey> {
    fs.into_iter().map(FnTable::key).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: usize) -> Lattice {
        Lattice::chain(n).unwrap()
    }

    /// Every function `L^n -> L`, by counting in base `m` over `m^n` digits.
    fn all_functions(l: &Lattice, n: usize) -> Vec<FnTable<'_>> {
        let cells = l.tuple_count(n).unwrap();
        let total = l.size().pow(cells as u32);
        (0..total)
            .map(|mut code| {
                let mut v = vec![0; cells];
                for slot in v.iter_mut().rev() {
                    *slot = code % l.size();
                    code /= l.size();
                }
                FnTable::from_values(l, n, v).unwrap()
            })
            .collect()
    }

    /// Monotonicity by comparing every pair of tuples, independent of covers.
    fn monotone_by_pairs(f: &FnTable<'_>) -> bool {
        let l = f.lattice();
        let ts: Vec<_> = l.tuples(f.arity()).collect();
        ts.iter().all(|x| {
            ts.iter().all(|y| !l.leq_tuple(x, y).unwrap() || l.leq(f.eval(x), f.eval(y)))
        })
    }

    fn brute_force_class<'l>(l: &'l Lattice, n: usize, class: FnClass) -> Vec<FnTable<'l>> {
        all_functions(l, n)
            .into_iter()
            .filter(|f| {
                let mono = monotone_by_pairs(f);
                let bot = l.tuple_index(&vec![l.bottom(); n]);
                let top = l.tuple_index(&vec![l.top(); n]);
                let boundary = f.at(bot) == l.bottom() && f.at(top) == l.top();
                let diag = l.elements().all(|x| f.eval(&vec![x; n]) == x);
                match class {
                    FnClass::Monotone => mono,
                    FnClass::Aggregation => mono && boundary,
                    FnClass::Idempotent => mono && boundary && diag,
                }
            })
            .collect()
    }

    #[test]
    fn projection_tables() {
        let c2 = c(2);
        assert_eq!(FnTable::projection(&c2, 2, 1).unwrap().values(), &[0, 0, 1, 1]);
        let c3 = c(3);
        assert_eq!(FnTable::projection(&c3, 3, 2).unwrap().eval(&[0, 2, 1]), 2);
        let id = FnTable::projection(&c3, 1, 1).unwrap();
        assert_eq!(id.values(), &[0, 1, 2]);
        assert!(matches!(
            FnTable::projection(&c3, 2, 3),
            Err(TableError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            FnTable::projection(&c3, 2, 0),
            Err(TableError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let c2 = c(2);
        let p1 = FnTable::projection(&c2, 2, 1).unwrap();
        let p2 = FnTable::projection(&c2, 2, 2).unwrap();
        let meet = FnTable::meet(&c2);
        let join = FnTable::join(&c2);
        assert_eq!(compose(&meet, &[p1.clone(), p2.clone()]).unwrap(), meet);
        assert_eq!(compose(&p1, &[join.clone(), meet.clone()]).unwrap(), join);
        // (x∧y)∨x on the 2-chain, evaluated by hand: 0,0,1,1
        let r = compose(&join, &[meet.clone(), p1.clone()]).unwrap();
        assert_eq!(r.eval(&[0, 1]), 0);
        assert_eq!(r.values(), &[0, 0, 1, 1]);
    }

    #[test]
    fn compose_errors() {
        let c2 = c(2);
        let c3 = c(3);
        let meet = FnTable::meet(&c2);
        let p = FnTable::projection(&c2, 2, 1).unwrap();
        assert!(matches!(compose(&meet, std::slice::from_ref(&p)), Err(TableError::ArityMismatch { .. })));
        let q = FnTable::projection(&c2, 3, 1).unwrap();
        assert!(matches!(compose(&meet, &[p.clone(), q]), Err(TableError::ArityMismatch { .. })));
        let other = FnTable::projection(&c3, 2, 1).unwrap();
        assert_eq!(compose(&meet, &[p, other]), Err(TableError::LatticeMismatch));
    }

    #[test]
    fn predicate_examples() {
        for l in [c(2), c(3), Lattice::n5()] {
            let join = FnTable::join(&l);
            assert!(join.is_monotone() && join.is_boundary() && join.is_aggregation());
            let bottom = FnTable::constant(&l, 2, l.bottom()).unwrap();
            assert!(bottom.is_monotone() && !bottom.is_boundary());
            let top = FnTable::constant(&l, 2, l.top()).unwrap();
            assert!(!top.is_idempotent());
            for n in 1..=3 {
                for i in 1..=n {
                    let p = FnTable::projection(&l, n, i).unwrap();
                    assert!(p.is_idempotent() && p.is_intermediate() && p.is_aggregation());
                }
            }
        }
        let c2 = c(2);
        let f = FnTable::from_values(&c2, 2, vec![1, 1, 1, 1]).unwrap();
        assert!(!f.is_boundary());
        let c3 = c(3);
        let med = FnTable::median(&c3);
        assert!(med.is_idempotent());
        assert_eq!(med.idempotency_violation(), None);
        let anti = FnTable::from_values(&c2, 1, vec![1, 0]).unwrap();
        assert_eq!(anti.monotonicity_violation(), Some((0, 1)));
    }

    #[test]
    fn pointwise_examples() {
        let l = Lattice::m_lattice(2).unwrap();
        let p1 = FnTable::projection(&l, 2, 1).unwrap();
        let p2 = FnTable::projection(&l, 2, 2).unwrap();
        assert_eq!(p1.pointwise_meet(&p2).unwrap(), FnTable::meet(&l));
        assert_eq!(p1.pointwise_join(&p2).unwrap(), FnTable::join(&l));
        assert!(FnTable::meet(&l).leq_pointwise(&FnTable::join(&l)).unwrap());
        assert!(!FnTable::join(&l).leq_pointwise(&FnTable::meet(&l)).unwrap());
        assert_eq!(p1.pointwise_join(&p1).unwrap(), p1);
        let p3 = FnTable::projection(&l, 3, 1).unwrap();
        assert!(matches!(p1.pointwise_join(&p3), Err(TableError::ArityMismatch { .. })));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (m, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let l = c(m);
            for class in [FnClass::Monotone, FnClass::Aggregation, FnClass::Idempotent] {
                let fast = enumerate_class(&l, n, class, EnumBudget::default()).unwrap();
                let slow = brute_force_class(&l, n, class);
                // brute force also counts in lexicographic order
                assert_eq!(fast, slow, "chain({m}) n={n} {class}");
            }
        }
        let d = Lattice::m_lattice(2).unwrap();
        for class in [FnClass::Monotone, FnClass::Aggregation, FnClass::Idempotent] {
            let fast = enumerate_class(&d, 1, class, EnumBudget::default()).unwrap();
            assert_eq!(fast, brute_force_class(&d, 1, class));
        }
    }

    #[test]
    fn enumeration_counts() {
        // frozen from the brute-force oracle above and an independent script
        let counts = |l: &Lattice, n| {
            [FnClass::Monotone, FnClass::Aggregation, FnClass::Idempotent]
                .map(|k| for_each_in_class(l, n, k, EnumBudget::default(), |_| {}).unwrap())
        };
        assert_eq!(counts(&c(2), 2), [6, 4, 4]);
        assert_eq!(counts(&c(2), 3), [20, 18, 18]);
        assert_eq!(counts(&c(3), 2), [175, 136, 64]);
        let c2 = c(2);
        let id2 = enumerate_class(&c2, 2, FnClass::Idempotent, EnumBudget::default()).unwrap();
        let expected = key_set(&[
            FnTable::meet(&c2),
            FnTable::join(&c2),
            FnTable::projection(&c2, 2, 1).unwrap(),
            FnTable::projection(&c2, 2, 2).unwrap(),
        ]);
        assert_eq!(key_set(&id2), expected);
        assert_eq!(
            for_each_in_class(&Lattice::m_lattice(2).unwrap(), 2, FnClass::Idempotent, EnumBudget::default(), |_| {})
                .unwrap(),
            1296
        );
        let id = |l: &Lattice, n| for_each_in_class(l, n, FnClass::Idempotent, EnumBudget::default(), |_| {}).unwrap();
        assert_eq!(id(&c(4), 2), 4096);
        assert_eq!(id(&Lattice::m_lattice(3).unwrap(), 2), 816_958);
        assert_eq!(id(&Lattice::n5(), 2), 280_592);
        assert_eq!(id(&c(3), 3), 116_211);
    }

    #[test]
    fn unary_idempotent_is_identity() {
        for l in [c(2), c(4), Lattice::m_lattice(3).unwrap(), Lattice::n5()] {
            let fs = enumerate_class(&l, 1, FnClass::Idempotent, EnumBudget::default()).unwrap();
            assert_eq!(fs, vec![FnTable::projection(&l, 1, 1).unwrap()]);
        }
    }

    #[test]
    fn enumeration_budget() {
        let l = c(3);
        let err = enumerate_class(&l, 4, FnClass::Idempotent, EnumBudget::default()).unwrap_err();
        assert!(matches!(err, TableError::BudgetExceeded(_)));
        let tight = EnumBudget { max_cells: 64, max_count: 10 };
        assert!(matches!(
            enumerate_class(&l, 2, FnClass::Idempotent, tight),
            Err(TableError::BudgetExceeded(_))
        ));
        let exact = EnumBudget { max_cells: 64, max_count: 64 };
        assert_eq!(enumerate_class(&l, 2, FnClass::Idempotent, exact).unwrap().len(), 64);
    }

    #[test]
    fn class_inclusions() {
        for l in [c(3), Lattice::m_lattice(2).unwrap()] {
            let b = EnumBudget::default();
            let mono = key_set(&enumerate_class(&l, 2, FnClass::Monotone, b).unwrap());
            let agg = key_set(&enumerate_class(&l, 2, FnClass::Aggregation, b).unwrap());
            let id = key_set(&enumerate_class(&l, 2, FnClass::Idempotent, b).unwrap());
            assert!(id.is_subset(&agg) && agg.is_subset(&mono));
        }
    }

    #[test]
    fn idempotent_iff_intermediate_small() {
        let cases = [(c(2), 3), (c(3), 2), (Lattice::m_lattice(2).unwrap(), 2), (Lattice::n5(), 1)];
        for (l, n) in &cases {
            for_each_in_class(l, *n, FnClass::Aggregation, EnumBudget::default(), |f| {
                assert_eq!(f.is_idempotent(), f.is_intermediate());
            })
            .unwrap();
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let l = Lattice::n5();
        let med = FnTable::median(&l);
        let text = med.to_text("median");
        let (name, back) = FnTable::parse(&text, &l).unwrap();
        assert_eq!(name, "median");
        assert_eq!(back, med);

        let c2 = c(2);
        let missing = "function f arity 2 lattice chain2\n0 0 -> 0\n0 1 -> 0\n1 0 -> 0\nend\n";
        let err = FnTable::parse(missing, &c2).unwrap_err();
        assert!(err.to_string().contains("missing tuple (1,1)"), "{err}");
        let dup = "function f arity 1 lattice chain2\n0 -> 0\n0 -> 1\n1 -> 1\nend\n";
        let err = FnTable::parse(dup, &c2).unwrap_err();
        assert!(err.to_string().contains("duplicate tuple (0)"), "{err}");
    }

    fn small_idempotent_term() -> impl Strategy<Value = Vec<(u8, usize, usize, usize)>> {
        prop::collection::vec((0u8..4, 0usize..16, 0usize..16, 0usize..16), 1..12)
    }

    proptest! {
        // Random compositions of idempotent functions stay idempotent.
        #[test]
        fn composition_preserves_idempotency(steps in small_idempotent_term(), lat in 0usize..3) {
            let l = match lat { 0 => c(3), 1 => Lattice::m_lattice(2).unwrap(), _ => Lattice::n5() };
            let med = FnTable::median(&l);
            let ops = [FnTable::meet(&l), FnTable::join(&l)];
            let mut pool: Vec<FnTable<'_>> = (1..=3).map(|i| FnTable::projection(&l, 3, i).unwrap()).collect();
            for (op, i, j, k) in steps {
                let pick = |t: usize| pool[t % pool.len()].clone();
                let g = match op {
                    0 | 1 => compose(&ops[op as usize], &[pick(i), pick(j)]).unwrap(),
                    2 => compose(&med, &[pick(i), pick(j), pick(k)]).unwrap(),
                    _ => compose(&pool[i % pool.len()], &[pick(j), pick(k), pick(i)]).unwrap(),
                };
                prop_assert!(g.is_idempotent() && g.is_aggregation());
                pool.push(g);
            }
        }

        #[test]
        fn projections_are_neutral(vals in prop::collection::vec(0usize..3, 9)) {
            let l = c(3);
            let f = FnTable::from_values(&l, 2, vals).unwrap();
            let ps = [FnTable::projection(&l, 2, 1).unwrap(), FnTable::projection(&l, 2, 2).unwrap()];
            prop_assert_eq!(compose(&f, &ps).unwrap(), f);
        }
    }
}
