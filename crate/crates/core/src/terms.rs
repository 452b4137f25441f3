//! Terms over variables, binary meet/join and generator applications.
//!
//! Text form is an s-expression:
//!
//! ```text
//! term := (meet term term) | (join term term) | (<spec> term ...) | x<k>
//! ```
//!
//! where `<spec>` is a generator in its bracket form (`iota[0,1,2;1]`).
//! Meets and joins of more than two operands are left-nested.

use std::fmt::Write as _;

use thiserror::Error;

use crate::functable::{compose, FnTable, TableError};
use crate::generators::{GenError, GeneratorSpec};
use crate::lattice::{Elem, Lattice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("ArityMismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("variable x{var} outside 1..={arity}")]
    VarOutOfRange { var: usize, arity: usize },
    #[error("{spec} applied to {found} arguments, expects {expected}")]
    ApplyArity {
        spec: String,
        expected: usize,
        found: usize,
    },
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("SyntaxError at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Variable `x_i`, 1-based.
    Var(usize),
    Meet(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    Apply(GeneratorSpec, Vec<Expr>),
}

impl Expr {
    pub fn meet(a: Expr, b: Expr) -> Expr {
        Expr::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Expr, b: Expr) -> Expr {
        Expr::Join(Box::new(a), Box::new(b))
    }

    /// Left-nested meet of a nonempty operand list.
    pub fn meet_chain(operands: Vec<Expr>) -> Expr {
        let mut it = operands.into_iter();
        let first = it.next().expect("meet of no operands");
        it.fold(first, Expr::meet)
    }

    /// Left-nested join of a nonempty operand list.
    pub fn join_chain(operands: Vec<Expr>) -> Expr {
        let mut it = operands.into_iter();
        let first = it.next().expect("join of no operands");
        it.fold(first, Expr::join)
    }

    fn eval(&self, l: &Lattice, x: &[Elem], scratch: &mut Vec<Elem>) -> Elem {
        match self {
            Expr::Var(i) => x[i - 1],
            Expr::Meet(a, b) => {
                let va = a.eval(l, x, scratch);
                l.meet(va, b.eval(l, x, scratch))
            }
            Expr::Join(a, b) => {
                let va = a.eval(l, x, scratch);
                l.join(va, b.eval(l, x, scratch))
            }
            Expr::Apply(spec, args) => {
                let base = scratch.len();
                for arg in args {
                    let v = arg.eval(l, x, scratch);
                    scratch.push(v);
                }
                let v = spec.apply(l, &scratch[base..]);
                scratch.truncate(base);
                v
            }
        }
    }

    fn check(&self, arity: usize) -> Result<(), TermError> {
        match self {
            &Expr::Var(var) if var == 0 || var > arity => Err(TermError::VarOutOfRange { var, arity }),
            Expr::Var(_) => Ok(()),
            Expr::Meet(a, b) | Expr::Join(a, b) => {
                a.check(arity)?;
                b.check(arity)
            }
            Expr::Apply(spec, args) => {
                if args.len() != spec.arity() {
                    return Err(TermError::ApplyArity {
                        spec: format!("{spec:?}"),
                        expected: spec.arity(),
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.check(arity))
            }
        }
    }

    fn write_sexpr(&self, l: &Lattice, out: &mut String) {
        match self {
            Expr::Var(i) => {
                let _ = write!(out, "x{i}");
            }
            Expr::Meet(a, b) | Expr::Join(a, b) => {
                out.push_str(if matches!(self, Expr::Meet(..)) { "(meet " } else { "(join " });
                a.write_sexpr(l, out);
                out.push(' ');
                b.write_sexpr(l, out);
                out.push(')');
            }
            Expr::Apply(spec, args) => {
                let _ = write!(out, "({}", spec.display(l));
                for a in args {
                    out.push(' ');
                    a.write_sexpr(l, out);
                }
                out.push(')');
            }
        }
    }

    fn size(&self) -> usize {
        match self {
            Expr::Var(_) => 1,
            Expr::Meet(a, b) | Expr::Join(a, b) => 1 + a.size() + b.size(),
            Expr::Apply(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Expr::Var(_) => 1,
            Expr::Meet(a, b) | Expr::Join(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Apply(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }

    fn collect_specs<'a>(&'a self, out: &mut Vec<&'a GeneratorSpec>) {
        match self {
            Expr::Var(_) => {}
            Expr::Meet(a, b) | Expr::Join(a, b) => {
                a.collect_specs(out);
                b.collect_specs(out);
            }
            Expr::Apply(spec, args) => {
                out.push(spec);
                for a in args {
                    a.collect_specs(out);
                }
            }
        }
    }
}

/// An expression together with its ambient arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    arity: usize,
    root: Expr,
}

impl Term {
    pub fn new(arity: usize, root: Expr) -> Result<Term, TermError> {
        if arity == 0 {
            return Err(TableError::ZeroArity.into());
        }
        root.check(arity)?;
        Ok(Term { arity, root })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Generator applications in pre-order.
    pub fn specs(&self) -> impl Iterator<Item = &GeneratorSpec> {
        let mut out = Vec::new();
        self.root.collect_specs(&mut out);
        out.into_iter()
    }

    /// Checks every generator's parameters against `l`.
    pub fn check_specs(&self, l: &Lattice) -> Result<(), TermError> {
        self.specs().try_for_each(|s| {
            s.validate(l)
                .map_err(|e| TermError::InvalidSpec(format!("{}: {e}", s.display(l))))
        })
    }

    pub fn eval(&self, l: &Lattice, x: &[Elem]) -> Result<Elem, TermError> {
        if x.len() != self.arity {
            return Err(TermError::ArityMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        l.check_tuple(x)
            .map_err(|e| TermError::InvalidSpec(e.to_string()))?;
        self.check_specs(l)?;
        Ok(self.root.eval(l, x, &mut Vec::new()))
    }

    /// Tabulates the term over all of `L^n`.
    pub fn to_table<'l>(&self, l: &'l Lattice) -> Result<FnTable<'l>, TermError> {
        self.check_specs(l)?;
        let mut scratch = Vec::new();
        Ok(FnTable::from_fn(l, self.arity, |x| self.root.eval(l, x, &mut scratch))?)
    }

    /// Tabulates the term by composing tables bottom-up with
    /// [`compose`](crate::functable::compose) instead of evaluating it per tuple.
    pub fn to_table_by_composition<'l>(&self, l: &'l Lattice) -> Result<FnTable<'l>, TermError> {
        self.check_specs(l)?;
        let meet = FnTable::meet(l);
        let join = FnTable::join(l);
        fn go<'l>(
            e: &Expr,
            l: &'l Lattice,
            n: usize,
            meet: &FnTable<'l>,
            join: &FnTable<'l>,
        ) -> Result<FnTable<'l>, TermError> {
            Ok(match e {
                Expr::Var(i) => FnTable::projection(l, n, *i)?,
                Expr::Meet(a, b) => compose(meet, &[go(a, l, n, meet, join)?, go(b, l, n, meet, join)?])?,
                Expr::Join(a, b) => compose(join, &[go(a, l, n, meet, join)?, go(b, l, n, meet, join)?])?,
                Expr::Apply(spec, args) => {
                    let f = spec
                        .to_table(l)
                        .map_err(|e| TermError::InvalidSpec(e.to_string()))?;
                    let gs = args
                        .iter()
                        .map(|a| go(a, l, n, meet, join))
                        .collect::<Result<Vec<_>, _>>()?;
                    compose(&f, &gs)?
                }
            })
        }
        go(&self.root, l, self.arity, &meet, &join)
    }

    /// Node count.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn to_sexpr(&self, l: &Lattice) -> String {
        let mut out = String::new();
        self.root.write_sexpr(l, &mut out);
        out
    }

    pub fn parse(s: &str, arity: usize, l: &Lattice) -> Result<Term, TermError> {
        let mut p = Parser { src: s, pos: 0, lattice: l };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input"));
        }
        Term::new(arity, root)
    }

    /// Term file: a `term arity <n> lattice <name>` header, then the s-expression.
    pub fn to_file_text(&self, l: &Lattice) -> String {
        format!("term arity {} lattice {}\n{}\n", self.arity, l.name(), self.to_sexpr(l))
    }

    pub fn parse_file(text: &str, l: &Lattice) -> Result<Term, TermError> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let herr = |msg: String| TermError::Header { line: 1, msg };
        let arity = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["term", "arity", n, "lattice", name] => {
                if *name != l.name() {
                    return Err(herr(format!("term is for lattice `{name}`, not `{}`", l.name())));
                }
                n.parse::<usize>().map_err(|_| herr(format!("bad arity `{n}`")))?
            }
            _ => return Err(herr("expected `term arity <n> lattice <name>`".into())),
        };
        Term::parse(body, arity, l)
    }

    /// Drops operands of meet and join chains that cannot change the result:
    /// in a meet, an operand whose table is above another operand's; in a
    /// join, one below another's. Equal operands keep their first occurrence.
    /// The tabulated function is unchanged.
    pub fn prune_dominated(&self, l: &Lattice) -> Result<Term, TermError> {
        self.check_specs(l)?;
        let root = prune(&self.root, self.arity, l)?;
        Term::new(self.arity, root)
    }
}

fn flatten<'a>(e: &'a Expr, meet: bool, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Meet(a, b) if meet => {
            flatten(a, meet, out);
            flatten(b, meet, out);
        }
        Expr::Join(a, b) if !meet => {
            flatten(a, meet, out);
            flatten(b, meet, out);
        }
        other => out.push(other),
    }
}

fn prune(e: &Expr, n: usize, l: &Lattice) -> Result<Expr, TermError> {
    let meet = match e {
        Expr::Var(_) => return Ok(e.clone()),
        Expr::Apply(spec, args) => {
            let args = args.iter().map(|a| prune(a, n, l)).collect::<Result<_, _>>()?;
            return Ok(Expr::Apply(spec.clone(), args));
        }
        Expr::Meet(..) => true,
        Expr::Join(..) => false,
    };
    let mut operands = Vec::new();
    flatten(e, meet, &mut operands);
    let mut kept: Vec<(Expr, FnTable<'_>)> = Vec::new();
    for op in operands {
        let op = prune(op, n, l)?;
        let table = Term { arity: n, root: op.clone() }.to_table(l)?;
        // `redundant(x, y)`: x adds nothing to the chain once y is present
        let redundant = |x: &FnTable<'_>, y: &FnTable<'_>| {
            if meet {
                y.leq_pointwise(x).expect("same shape")
            } else {
                x.leq_pointwise(y).expect("same shape")
            }
        };
        if kept.iter().any(|(_, t)| redundant(&table, t)) {
            continue;
        }
        kept.retain(|(_, t)| !redundant(t, &table));
        kept.push((op, table));
    }
    let exprs: Vec<Expr> = kept.into_iter().map(|(e, _)| e).collect();
    Ok(if meet { Expr::meet_chain(exprs) } else { Expr::join_chain(exprs) })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    lattice: &'a Lattice,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> TermError {
        TermError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn atom(&mut self) -> &str {
        let rest = &self.src[self.pos..];
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn expr(&mut self) -> Result<Expr, TermError> {
        self.skip_ws();
        match self.src[self.pos..].chars().next() {
            None => Err(self.error("unexpected end of input")),
            Some(')') => Err(self.error("unexpected `)`")),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let head_pos = self.pos;
                let head = self.atom().to_string();
                if head.is_empty() {
                    return Err(self.error("expected operator"));
                }
                let mut args = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src[self.pos..].chars().next() {
                        None => return Err(self.error("unclosed `(`")),
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => args.push(self.expr()?),
                    }
                }
                match head.as_str() {
                    "meet" | "join" => {
                        let [a, b]: [Expr; 2] = args.try_into().map_err(|_| TermError::Syntax {
                            pos: head_pos,
                            msg: format!("`{head}` takes exactly two operands"),
                        })?;
                        Ok(if head == "meet" { Expr::meet(a, b) } else { Expr::join(a, b) })
                    }
                    _ => {
                        let spec = GeneratorSpec::parse(&head, self.lattice).map_err(|e| {
                            TermError::Syntax {
                                pos: head_pos,
                                msg: match e {
                                    GenError::InvalidSpec(m) => m,
                                    other => other.to_string(),
                                },
                            }
                        })?;
                        Ok(Expr::Apply(spec, args))
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                let tok = self.atom();
                match tok.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(TermError::Syntax {
                        pos: start,
                        msg: format!("expected variable, found `{tok}`"),
                    }),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functable::{enumerate_class, EnumBudget, FnClass};
    use crate::generators::{decompose_id, decompose_id_reduced, reduced_generator_set};
    use proptest::prelude::*;

    fn c3() -> Lattice {
        Lattice::chain(3).unwrap()
    }

    fn iota012() -> GeneratorSpec {
        GeneratorSpec::Iota { a: 0, b: 1, c: 2, d: 1 }
    }

    #[test]
    fn eval_examples() {
        let l = c3();
        let t = Term::new(2, Expr::join(Expr::Var(1), Expr::Var(2))).unwrap();
        assert_eq!(t.eval(&l, &[1, 2]).unwrap(), 2);
        let t = Term::new(3, Expr::Apply(iota012(), vec![Expr::Var(1), Expr::Var(2), Expr::Var(3)])).unwrap();
        assert_eq!(t.eval(&l, &[0, 1, 2]).unwrap(), 1);
        assert!(matches!(t.eval(&l, &[0, 1]), Err(TermError::ArityMismatch { .. })));
        let med = FnTable::median(&l);
        let d = decompose_id(&med).unwrap();
        for x in l.tuples(3) {
            assert_eq!(d.eval(&l, &x).unwrap(), med.eval(&x));
        }
    }

    #[test]
    fn invalid_spec_is_reported() {
        let l = c3();
        let bad = GeneratorSpec::Iota { a: 0, b: 2, c: 1, d: 1 };
        let t = Term::new(3, Expr::Apply(bad, vec![Expr::Var(1), Expr::Var(2), Expr::Var(3)])).unwrap();
        assert!(matches!(t.eval(&l, &[0, 0, 0]), Err(TermError::InvalidSpec(_))));
        assert!(matches!(t.to_table(&l), Err(TermError::InvalidSpec(_))));
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            Term::new(2, Expr::Var(3)),
            Err(TermError::VarOutOfRange { var: 3, arity: 2 })
        ));
        assert!(matches!(
            Term::new(2, Expr::Apply(iota012(), vec![Expr::Var(1)])),
            Err(TermError::ApplyArity { .. })
        ));
    }

    #[test]
    fn to_table_examples() {
        let l = c3();
        let v = Term::new(2, Expr::Var(1)).unwrap();
        assert_eq!(v.to_table(&l).unwrap(), FnTable::projection(&l, 2, 1).unwrap());
        let m = Term::new(2, Expr::meet(Expr::Var(1), Expr::Var(2))).unwrap();
        assert_eq!(m.to_table(&l).unwrap(), FnTable::meet(&l));
        for f in enumerate_class(&l, 2, FnClass::Idempotent, EnumBudget::default()).unwrap() {
            assert_eq!(decompose_id_reduced(&f).unwrap().to_table(&l).unwrap(), f);
        }
    }

    #[test]
    fn print_examples() {
        let l = c3();
        let m = Term::new(2, Expr::meet(Expr::Var(1), Expr::Var(2))).unwrap();
        assert_eq!(m.to_sexpr(&l), "(meet x1 x2)");
        let t = Term::new(3, Expr::Apply(iota012(), vec![Expr::Var(1), Expr::Var(2), Expr::Var(3)])).unwrap();
        assert_eq!(t.to_sexpr(&l), "(iota[0,1,2;1] x1 x2 x3)");
        assert_eq!(Term::parse("  ( iota[0,1,2;1]\n x1 x2   x3 ) ", 3, &l).unwrap(), t);
    }

    #[test]
    fn parse_errors() {
        let l = c3();
        assert!(matches!(Term::parse("(meet x1", 2, &l), Err(TermError::Syntax { .. })));
        assert!(matches!(Term::parse("(meet x1 x2 x1)", 2, &l), Err(TermError::Syntax { .. })));
        assert!(matches!(Term::parse("(meet x1 y)", 2, &l), Err(TermError::Syntax { pos: 9, .. })));
        assert!(matches!(Term::parse("x1 x2", 2, &l), Err(TermError::Syntax { .. })));
        assert!(matches!(Term::parse("(nope[0] x1)", 2, &l), Err(TermError::Syntax { pos: 1, .. })));
        assert!(matches!(Term::parse("x3", 2, &l), Err(TermError::VarOutOfRange { .. })));
    }

    #[test]
    fn size_and_depth() {
        let v = Term::new(1, Expr::Var(1)).unwrap();
        assert_eq!((v.size(), v.depth()), (1, 1));
        let m = Term::new(2, Expr::meet(Expr::Var(1), Expr::Var(2))).unwrap();
        assert_eq!((m.size(), m.depth()), (3, 2));
        // binary f on chain(3): 9 outer operands, each a join of two ι nodes
        // over (x1∧x2, x_i, x1∨x2): 2*(1+3+1+3) + 1 = 17 nodes, plus 8 meets
        let l = c3();
        let t = decompose_id(&FnTable::meet(&l)).unwrap();
        assert_eq!(t.size(), 9 * 17 + 8);
        assert!(t.size() > 9);
        assert_eq!(t.depth(), 8 + 1 + 1 + 2);
    }

    #[test]
    fn file_round_trip() {
        let l = Lattice::n5();
        let t = decompose_id(&FnTable::join(&l)).unwrap();
        let text = t.to_file_text(&l);
        assert!(text.starts_with("term arity 2 lattice n5\n"));
        assert_eq!(Term::parse_file(&text, &l).unwrap(), t);
        assert!(matches!(
            Term::parse_file("term arity 2 lattice chain9\nx1\n", &l),
            Err(TermError::Header { .. })
        ));
    }

    #[test]
    fn pruning_preserves_table_and_shrinks() {
        for l in [c3(), Lattice::m_lattice(2).unwrap()] {
            for f in enumerate_class(&l, 2, FnClass::Idempotent, EnumBudget::default()).unwrap() {
                let t = decompose_id(&f).unwrap();
                let p = t.prune_dominated(&l).unwrap();
                assert_eq!(p.to_table(&l).unwrap(), f);
                assert!(p.size() <= t.size());
            }
        }
        let l = c3();
        let t = decompose_id(&FnTable::join(&l)).unwrap();
        assert!(t.prune_dominated(&l).unwrap().size() < t.size());
    }

    fn arb_expr(n: usize, specs: Vec<GeneratorSpec>) -> impl Strategy<Value = Expr> {
        let leaf = (1..=n).prop_map(Expr::Var);
        leaf.prop_recursive(4, 32, 3, move |inner| {
            let specs = specs.clone();
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::meet(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::join(a, b)),
                (0..specs.len(), prop::collection::vec(inner, 3))
                    .prop_map(move |(k, args)| Expr::Apply(specs[k].clone(), args)),
            ]
        })
    }

    proptest! {
        #[test]
        fn random_terms(e in arb_expr(2, reduced_generator_set(&Lattice::chain(3).unwrap()))) {
            let l = c3();
            let t = Term::new(2, e).unwrap();
            let text = t.to_sexpr(&l);
            prop_assert_eq!(&Term::parse(&text, 2, &l).unwrap(), &t);
            let table = t.to_table(&l).unwrap();
            prop_assert_eq!(&t.to_table_by_composition(&l).unwrap(), &table);
            prop_assert!(table.is_idempotent() && table.is_aggregation());
        }
    }
}
