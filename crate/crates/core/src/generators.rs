//! Generator families for aggregation clones and the constructive
//! decompositions built from them.
//!
//! * `chi[a;b]`: `b ∧ ⋁x` when `x ≤ a`, otherwise `⋁x`. It is the largest
//!   idempotent aggregation function taking the value `b` at `a`.
//! * `iota[a,b,c;d]`: the ternary `chi[(a,b,c);d]`, with `a ≤ b ≤ c`, `a ≤ d ≤ c`.
//! * `mu[a]`, `oplus[a]`: unary and binary generators of the full aggregation clone.
//!
//! Every idempotent aggregation function `f` is the meet, over all tuples
//! `a`, of `⋁_i iota[⋀a, a_i, ⋁a; f(a)](⋀x, x_i, ⋁x)`; see [`decompose_id`].
//! Each such ι splits into two with top as third parameter on increasing
//! triples, which gives [`decompose_id_reduced`].

use std::fmt;

use thiserror::Error;

use crate::functable::{same_lattice, FnTable, TableError};
use crate::lattice::{label_is_valid, Elem, Lattice, LatticeError};
use crate::terms::{Expr, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("PreconditionViolated: {0}")]
    PreconditionViolated(String),
    #[error("NotIdempotent: {0}")]
    NotIdempotent(String),
    #[error("NotAggregation: {0}")]
    NotAggregation(String),
    #[error("EmptyAgreementSet: no pool member agrees with f at {0}")]
    EmptyAgreementSet(String),
    #[error("UnsupportedArity: {0}")]
    UnsupportedArity(String),
    #[error("InvalidSize: {0}")]
    InvalidSize(String),
    #[error("ArityMismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Parameters of one generator instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorSpec {
    Chi { a: Vec<Elem>, b: Elem },
    Iota { a: Elem, b: Elem, c: Elem, d: Elem },
    Mu { a: Elem },
    Oplus { a: Elem },
}

impl GeneratorSpec {
    pub fn arity(&self) -> usize {
        match self {
            GeneratorSpec::Chi { a, .. } => a.len(),
            GeneratorSpec::Iota { .. } => 3,
            GeneratorSpec::Mu { .. } => 1,
            GeneratorSpec::Oplus { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Chi { .. } => "chi",
            GeneratorSpec::Iota { .. } => "iota",
            GeneratorSpec::Mu { .. } => "mu",
            GeneratorSpec::Oplus { .. } => "oplus",
        }
    }

    /// Checks that the parameters name elements of `l` and satisfy the
    /// family's order constraints. `chi` is not required to be idempotent
    /// here; [`make_chi`] enforces that.
    pub fn validate(&self, l: &Lattice) -> Result<(), GenError> {
        let in_range = |xs: &[Elem]| {
            l.check_tuple(xs)
                .map_err(|e| GenError::InvalidSpec(format!("{}: {e}", self.kind())))
        };
        match self {
            GeneratorSpec::Chi { a, b } => {
                if a.is_empty() {
                    return Err(GenError::InvalidSpec("chi needs a nonempty tuple".into()));
                }
                in_range(a)?;
                in_range(&[*b])
            }
            &GeneratorSpec::Iota { a, b, c, d } => {
                in_range(&[a, b, c, d])?;
                if l.leq(a, b) && l.leq(b, c) && l.leq(a, d) && l.leq(d, c) {
                    Ok(())
                } else {
                    Err(GenError::PreconditionViolated(format!(
                        "{} needs a ≤ b ≤ c and a ≤ d ≤ c",
                        self.display(l)
                    )))
                }
            }
            GeneratorSpec::Mu { a } | GeneratorSpec::Oplus { a } => in_range(&[*a]),
        }
    }

    /// Evaluates the generator on `args`. Parameters are assumed valid.
    pub fn apply(&self, l: &Lattice, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity());
        match self {
            GeneratorSpec::Chi { a, b } => chi_value(l, a, *b, args),
            &GeneratorSpec::Iota { a, b, c, d } => chi_value(l, &[a, b, c], d, args),
            &GeneratorSpec::Mu { a } => {
                let x = args[0];
                if l.leq(x, a) && x != l.top() {
                    l.bottom()
                } else {
                    l.top()
                }
            }
            &GeneratorSpec::Oplus { a } => match (args[0], args[1]) {
                (x, y) if x == l.top() && y == l.top() => l.top(),
                (x, y) if x == l.bottom() && y == l.bottom() => l.bottom(),
                _ => a,
            },
        }
    }

    pub fn to_table<'l>(&self, l: &'l Lattice) -> Result<FnTable<'l>, GenError> {
        self.validate(l)?;
        Ok(FnTable::from_fn(l, self.arity(), |x| self.apply(l, x))?)
    }

    /// Text form with element labels, e.g. `iota[0,1,2;1]`.
    pub fn display<'a>(&'a self, l: &'a Lattice) -> SpecDisplay<'a> {
        SpecDisplay { spec: self, lattice: l }
    }

    /// Parses the text form produced by [`GeneratorSpec::display`].
    pub fn parse(s: &str, l: &Lattice) -> Result<GeneratorSpec, GenError> {
        let bad = |msg: &str| GenError::InvalidSpec(format!("`{s}`: {msg}"));
        let (kind, rest) = s.split_once('[').ok_or_else(|| bad("expected `kind[...]`"))?;
        let inner = rest.strip_suffix(']').ok_or_else(|| bad("missing `]`"))?;
        let elem = |t: &str| {
            let t = t.trim();
            if !label_is_valid(t) {
                return Err(bad("malformed label"));
            }
            l.element(t).ok_or_else(|| bad(&format!("unknown element `{t}`")))
        };
        let list = |t: &str| t.split(',').map(elem).collect::<Result<Vec<_>, _>>();
        match kind {
            "chi" | "iota" => {
                let (params, last) = inner.split_once(';').ok_or_else(|| bad("missing `;`"))?;
                let params = list(params)?;
                let last = elem(last)?;
                if kind == "chi" {
                    return Ok(GeneratorSpec::Chi { a: params, b: last });
                }
                match params.as_slice() {
                    &[a, b, c] => Ok(GeneratorSpec::Iota { a, b, c, d: last }),
                    _ => Err(bad("iota takes three parameters before `;`")),
                }
            }
            "mu" => Ok(GeneratorSpec::Mu { a: elem(inner)? }),
            "oplus" => Ok(GeneratorSpec::Oplus { a: elem(inner)? }),
            _ => Err(bad("unknown generator kind")),
        }
    }
}

pub struct SpecDisplay<'a> {
    spec: &'a GeneratorSpec,
    lattice: &'a Lattice,
}

impl fmt::Display for SpecDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.lattice;
        let lab = |x: Elem| l.labels().get(x).map(String::as_str).unwrap_or("?");
        match self.spec {
            GeneratorSpec::Chi { a, b } => {
                let parts: Vec<&str> = a.iter().map(|&x| lab(x)).collect();
                write!(f, "chi[{};{}]", parts.join(","), lab(*b))
            }
            &GeneratorSpec::Iota { a, b, c, d } => {
                write!(f, "iota[{},{},{};{}]", lab(a), lab(b), lab(c), lab(d))
            }
            &GeneratorSpec::Mu { a } => write!(f, "mu[{}]", lab(a)),
            &GeneratorSpec::Oplus { a } => write!(f, "oplus[{}]", lab(a)),
        }
    }
}

#[inline]
fn chi_value(l: &Lattice, a: &[Elem], b: Elem, x: &[Elem]) -> Elem {
    let sup = l.join_all(x).expect("generator arity >= 1");
    if x.iter().zip(a).all(|(&xi, &ai)| l.leq(xi, ai)) {
        l.meet(b, sup)
    } else {
        sup
    }
}

fn check_tuple_for(f: &FnTable<'_>, a: &[Elem]) -> Result<(), GenError> {
    if a.len() != f.arity() {
        return Err(GenError::ArityMismatch {
            expected: f.arity(),
            found: a.len(),
        });
    }
    f.lattice().check_tuple(a)?;
    Ok(())
}

/// Fails with a witness unless `f` is an idempotent aggregation function.
pub fn require_idempotent(f: &FnTable<'_>) -> Result<(), GenError> {
    let l = f.lattice();
    if let Some(x) = f.idempotency_violation() {
        let diag = vec![x; f.arity()];
        return Err(GenError::NotIdempotent(format!(
            "f{} = {} ≠ {}",
            l.format_tuple(&diag),
            l.label(f.eval(&diag)),
            l.label(x)
        )));
    }
    if let Some((lo, hi)) = f.monotonicity_violation() {
        let (x, y) = (l.tuple_at(lo, f.arity()), l.tuple_at(hi, f.arity()));
        return Err(GenError::NotIdempotent(format!(
            "not monotone: f{} = {} ≰ f{} = {}",
            l.format_tuple(&x),
            l.label(f.at(lo)),
            l.format_tuple(&y),
            l.label(f.at(hi))
        )));
    }
    Ok(())
}

/// Fails with a witness unless `f` is an aggregation function.
pub fn require_aggregation(f: &FnTable<'_>) -> Result<(), GenError> {
    let l = f.lattice();
    if !f.is_boundary() {
        return Err(GenError::NotAggregation(format!(
            "boundary condition fails: f(0,…,0) = {}, f(1,…,1) = {}",
            l.label(f.eval(&vec![l.bottom(); f.arity()])),
            l.label(f.eval(&vec![l.top(); f.arity()]))
        )));
    }
    if let Some((lo, hi)) = f.monotonicity_violation() {
        let (x, y) = (l.tuple_at(lo, f.arity()), l.tuple_at(hi, f.arity()));
        return Err(GenError::NotAggregation(format!(
            "not monotone: f{} ≰ f{}",
            l.format_tuple(&x),
            l.format_tuple(&y)
        )));
    }
    Ok(())
}

/// `chi[a;b]`. Rejects `⋀a ≰ b`, where the function would not be idempotent.
pub fn make_chi<'l>(l: &'l Lattice, a: &[Elem], b: Elem) -> Result<FnTable<'l>, GenError> {
    let spec = GeneratorSpec::Chi { a: a.to_vec(), b };
    spec.validate(l)?;
    let floor = l.meet_all(a)?;
    if !l.leq(floor, b) {
        return Err(GenError::PreconditionViolated(format!(
            "⋀a = {} ≰ b = {}",
            l.label(floor),
            l.label(b)
        )));
    }
    spec.to_table(l)
}

/// `chi[a;b]` without the idempotency precondition. Only for building
/// counterexamples.
pub fn make_chi_unchecked<'l>(l: &'l Lattice, a: &[Elem], b: Elem) -> Result<FnTable<'l>, GenError> {
    GeneratorSpec::Chi { a: a.to_vec(), b }.to_table(l)
}

/// `iota[a,b,c;d]`, requiring `a ≤ b ≤ c` and `a ≤ d ≤ c`.
pub fn make_iota(l: &Lattice, a: Elem, b: Elem, c: Elem, d: Elem) -> Result<FnTable<'_>, GenError> {
    GeneratorSpec::Iota { a, b, c, d }.to_table(l)
}

pub fn make_mu(l: &Lattice, a: Elem) -> Result<FnTable<'_>, GenError> {
    GeneratorSpec::Mu { a }.to_table(l)
}

pub fn make_oplus(l: &Lattice, a: Elem) -> Result<FnTable<'_>, GenError> {
    GeneratorSpec::Oplus { a }.to_table(l)
}

/// Join of all pool members that agree with `f` at `a`.
pub fn h_majorant<'l>(pool: &[FnTable<'l>], f: &FnTable<'l>, a: &[Elem]) -> Result<FnTable<'l>, GenError> {
    check_tuple_for(f, a)?;
    let target = f.eval(a);
    let mut acc: Option<FnTable<'l>> = None;
    for g in pool {
        if !same_lattice(g.lattice(), f.lattice()) {
            return Err(TableError::LatticeMismatch.into());
        }
        if g.arity() != f.arity() {
            return Err(GenError::ArityMismatch {
                expected: f.arity(),
                found: g.arity(),
            });
        }
        if g.eval(a) == target {
            acc = Some(match acc {
                None => g.clone(),
                Some(h) => h.pointwise_join(g)?,
            });
        }
    }
    acc.ok_or_else(|| GenError::EmptyAgreementSet(f.lattice().format_tuple(a)))
}

/// Precomputed [`h_majorant`] for a fixed pool: the join of all members
/// taking value `v` at tuple `a`, for every `(a, v)`.
pub struct MajorantIndex<'l> {
    lattice: &'l Lattice,
    arity: usize,
    joins: Vec<Option<Vec<u8>>>,
}

impl<'l> MajorantIndex<'l> {
    pub fn build(lattice: &'l Lattice, arity: usize, pool: &[FnTable<'l>]) -> Result<Self, GenError> {
        let cells = lattice
            .tuple_count(arity)
            .ok_or_else(|| GenError::InvalidSize("table too large".into()))?;
        let m = lattice.size();
        let mut joins: Vec<Option<Vec<u8>>> = vec![None; cells * m];
        for g in pool {
            if !same_lattice(g.lattice(), lattice) {
                return Err(TableError::LatticeMismatch.into());
            }
            if g.arity() != arity {
                return Err(GenError::ArityMismatch {
                    expected: arity,
                    found: g.arity(),
                });
            }
            for (a, &v) in g.values().iter().enumerate() {
                match &mut joins[a * m + v as usize] {
                    slot @ None => *slot = Some(g.values().to_vec()),
                    Some(acc) => {
                        for (s, &gv) in acc.iter_mut().zip(g.values()) {
                            *s = lattice.join(*s as Elem, gv as Elem) as u8;
                        }
                    }
                }
            }
        }
        Ok(MajorantIndex { lattice, arity, joins })
    }

    /// Same result as `h_majorant(pool, f, a)`.
    pub fn majorant(&self, f: &FnTable<'l>, a: &[Elem]) -> Result<FnTable<'l>, GenError> {
        check_tuple_for(f, a)?;
        if f.arity() != self.arity {
            return Err(GenError::ArityMismatch {
                expected: self.arity,
                found: f.arity(),
            });
        }
        let idx = self.lattice.tuple_index(a);
        let slot = &self.joins[idx * self.lattice.size() + f.at(idx)];
        match slot {
            Some(values) => Ok(FnTable::from_bytes(self.lattice, self.arity, values.clone())?),
            None => Err(GenError::EmptyAgreementSet(self.lattice.format_tuple(a))),
        }
    }
}

/// Largest idempotent aggregation function agreeing with `f` at `a`,
/// namely `chi[a; f(a)]`.
pub fn h_id<'l>(f: &FnTable<'l>, a: &[Elem]) -> Result<FnTable<'l>, GenError> {
    require_idempotent(f)?;
    check_tuple_for(f, a)?;
    make_chi(f.lattice(), a, f.eval(a))
}

/// Largest aggregation function agreeing with `f` at `a`: bottom at the
/// bottom tuple, `f(a)` on `0 < x ≤ a`, top elsewhere.
pub fn h_agg<'l>(f: &FnTable<'l>, a: &[Elem]) -> Result<FnTable<'l>, GenError> {
    require_aggregation(f)?;
    check_tuple_for(f, a)?;
    let l = f.lattice();
    let v = f.eval(a);
    Ok(FnTable::from_fn(l, f.arity(), |x| {
        if x.iter().all(|&xi| xi == l.bottom()) {
            l.bottom()
        } else if x.iter().zip(a).all(|(&xi, &ai)| l.leq(xi, ai)) {
            v
        } else {
            l.top()
        }
    })?)
}

/// [`h_agg`] as a term over `mu` and `oplus`:
/// `⋁_{i: a_i ≠ 1} mu[a_i](x_i) ∨ (((x_1 ⊕ x_2) ⊕ x_3) …)` with `⊕ = oplus[f(a)]`.
/// The join over indices is dropped when every `a_i` is top.
pub fn h_agg_term(f: &FnTable<'_>, a: &[Elem]) -> Result<Term, GenError> {
    require_aggregation(f)?;
    check_tuple_for(f, a)?;
    let n = f.arity();
    if n < 2 {
        return Err(GenError::UnsupportedArity(
            "the mu/oplus composite needs arity at least 2; use h_agg".into(),
        ));
    }
    let l = f.lattice();
    let v = f.eval(a);
    let mus: Vec<Expr> = (0..n)
        .filter(|&i| a[i] != l.top())
        .map(|i| Expr::Apply(GeneratorSpec::Mu { a: a[i] }, vec![Expr::Var(i + 1)]))
        .collect();
    let oplus = (2..=n).fold(Expr::Var(1), |acc, i| {
        Expr::Apply(GeneratorSpec::Oplus { a: v }, vec![acc, Expr::Var(i)])
    });
    let root = if mus.is_empty() {
        oplus
    } else {
        Expr::join(Expr::join_chain(mus), oplus)
    };
    Ok(Term::new(n, root).expect("well-formed by construction"))
}

fn meet_vars(n: usize) -> Expr {
    Expr::meet_chain((1..=n).map(Expr::Var).collect())
}

fn join_vars(n: usize) -> Expr {
    Expr::join_chain((1..=n).map(Expr::Var).collect())
}

/// `⋁_i iota[⋀a, a_i, ⋁a; f(a)](⋀x, x_i, ⋁x)`, which tabulates to `h_id(f, a)`.
pub fn iota_majorant_term(f: &FnTable<'_>, a: &[Elem]) -> Result<Term, GenError> {
    require_idempotent(f)?;
    check_tuple_for(f, a)?;
    Ok(Term::new(f.arity(), iota_majorant_expr(f, a, false)).expect("well-formed by construction"))
}

fn iota_majorant_expr(f: &FnTable<'_>, a: &[Elem], reduced: bool) -> Expr {
    let l = f.lattice();
    let n = f.arity();
    let lo = l.meet_all(a).expect("n >= 1");
    let hi = l.join_all(a).expect("n >= 1");
    let v = f.eval(a);
    let operands = (0..n)
        .map(|i| {
            if reduced {
                let first = Expr::Apply(
                    GeneratorSpec::Iota { a: lo, b: a[i], c: l.top(), d: v },
                    vec![meet_vars(n), Expr::Var(i + 1), join_vars(n)],
                );
                let second = Expr::Apply(
                    GeneratorSpec::Iota { a: lo, b: hi, c: l.top(), d: v },
                    vec![meet_vars(n), join_vars(n), join_vars(n)],
                );
                Expr::join(first, second)
            } else {
                Expr::Apply(
                    GeneratorSpec::Iota { a: lo, b: a[i], c: hi, d: v },
                    vec![meet_vars(n), Expr::Var(i + 1), join_vars(n)],
                )
            }
        })
        .collect();
    Expr::join_chain(operands)
}

fn decompose(f: &FnTable<'_>, reduced: bool) -> Result<Term, GenError> {
    require_idempotent(f)?;
    let l = f.lattice();
    let n = f.arity();
    let operands = l
        .tuples(n)
        .map(|a| iota_majorant_expr(f, &a, reduced))
        .collect();
    Ok(Term::new(n, Expr::meet_chain(operands)).expect("well-formed by construction"))
}

/// Writes an idempotent aggregation function as a term over meet, join and
/// ι generators: the meet over all `a` (tuple-index order) of
/// [`iota_majorant_term`]. No simplification is applied.
pub fn decompose_id(f: &FnTable<'_>) -> Result<Term, GenError> {
    decompose(f, false)
}

/// Like [`decompose_id`], but every ι has top as its third parameter: each
/// `iota[⋀a,a_i,⋁a;v](⋀x,x_i,⋁x)` becomes
/// `iota[⋀a,a_i,1;v](⋀x,x_i,⋁x) ∨ iota[⋀a,⋁a,1;v](⋀x,⋁x,⋁x)`.
pub fn decompose_id_reduced(f: &FnTable<'_>) -> Result<Term, GenError> {
    decompose(f, true)
}

/// Splits `iota[a,b,c;d]` into `iota[a,b,1;d]` and `iota[a,c,1;d]`. On
/// triples `x1 ≤ x2 ≤ x3` the original equals
/// `iota[a,b,1;d](x1,x2,x3) ∨ iota[a,c,1;d](x1,x3,x3)`; nothing is claimed
/// for other triples.
pub fn reduce_iota_pair(
    l: &Lattice,
    a: Elem,
    b: Elem,
    c: Elem,
    d: Elem,
) -> Result<(GeneratorSpec, GeneratorSpec), GenError> {
    GeneratorSpec::Iota { a, b, c, d }.validate(l)?;
    let top = l.top();
    Ok((
        GeneratorSpec::Iota { a, b, c: top, d },
        GeneratorSpec::Iota { a, b: c, c: top, d },
    ))
}

/// All `iota[a,b,1;d]` with `a ≤ b` and `a ≤ d`, in lexicographic `(a,b,d)` order.
pub fn reduced_generator_set(l: &Lattice) -> Vec<GeneratorSpec> {
    let mut out = Vec::new();
    for a in l.elements() {
        for b in l.elements().filter(|&b| l.leq(a, b)) {
            for d in l.elements().filter(|&d| l.leq(a, d)) {
                out.push(GeneratorSpec::Iota { a, b, c: l.top(), d });
            }
        }
    }
    out
}

/// All `iota[a,b,c;d]` with `a ≤ b ≤ c` and `a ≤ d ≤ c`, in lexicographic order.
pub fn full_iota_set(l: &Lattice) -> Vec<GeneratorSpec> {
    let mut out = Vec::new();
    for a in l.elements() {
        for b in l.elements().filter(|&b| l.leq(a, b)) {
            for c in l.elements().filter(|&c| l.leq(b, c)) {
                for d in l.elements().filter(|&d| l.leq(a, d) && l.leq(d, c)) {
                    out.push(GeneratorSpec::Iota { a, b, c, d });
                }
            }
        }
    }
    out
}

/// Number of ι generators in the reduced set for the `n`-element chain:
/// `1² + 2² + … + n²`.
pub fn iota_count_chain(n: u64) -> Result<u64, GenError> {
    if n < 2 {
        return Err(GenError::InvalidSize(format!("chain needs n ≥ 2, got {n}")));
    }
    Ok(n * (n + 1) * (2 * n + 1) / 6)
}

/// Size of the reduced generating set of the `n`-element chain, counting
/// meet and join: `n(n+1)(2n+1)/6 + 2`.
pub fn count_generators_chain(n: u64) -> Result<u64, GenError> {
    Ok(iota_count_chain(n)? + 2)
}

/// Number of ι generators in the reduced set for `M_{n-2}`: `n² + 4(n-2) + 1`.
pub fn iota_count_m(n: u64) -> Result<u64, GenError> {
    if n < 4 {
        return Err(GenError::InvalidSize(format!("M_(n-2) needs n ≥ 4, got {n}")));
    }
    Ok(n * n + 4 * (n - 2) + 1)
}

/// Size of the reduced generating set of `M_{n-2}`, counting meet and join:
/// `n² + 4n - 5`.
pub fn count_generators_m(n: u64) -> Result<u64, GenError> {
    Ok(iota_count_m(n)? + 2)
}
