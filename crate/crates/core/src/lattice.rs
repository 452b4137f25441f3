//! Finite bounded lattices backed by precomputed order, meet and join tables.
//!
//! Elements are plain indices `0..size`. At construction the elements are
//! renumbered so that index order is a linear extension of the lattice order:
//! `x < y` in the lattice implies `x < y` as integers. Tuples in `L^n` are
//! numbered big-endian, `index(x) = sum x_i * m^(n-i)`, so increasing tuple
//! indices also extend the product order.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Index of a lattice element.
pub type Elem = usize;

/// Largest supported lattice. Function tables store one byte per cell.
pub const MAX_SIZE: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("NotAPartialOrder: cycle through {0} and {1}")]
    NotAPartialOrder(String, String),
    #[error("NotALattice: {op}({x},{y}) undefined")]
    NotALattice {
        op: &'static str,
        x: String,
        y: String,
    },
    #[error("NotBounded: {0}")]
    NotBounded(String),
    #[error("InvalidSize: {0}")]
    InvalidSize(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid label `{0}`: labels are nonempty and contain no whitespace or any of ()[],;")]
    InvalidLabel(String),
    #[error("EmptyTuple: meet/join of an empty tuple")]
    EmptyTuple,
    #[error("ArityMismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn label_is_valid(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || "()[],;".contains(c))
}

/// A finite bounded lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    name: String,
    labels: Vec<String>,
    index_of: HashMap<String, Elem>,
    leq: Vec<bool>,
    meet: Vec<u8>,
    join: Vec<u8>,
    upper_covers: Vec<Vec<Elem>>,
    lower_covers: Vec<Vec<Elem>>,
    bottom: Elem,
    top: Elem,
    // original input position of each element, indexed by the new index
    input_position: Vec<usize>,
}

impl Lattice {
    /// Builds a lattice from its element labels and a set of cover pairs
    /// `(lower, upper)`. Covers only need to generate the order; duplicates and
    /// transitively implied pairs are accepted.
    pub fn from_covers<S: AsRef<str>>(
        name: &str,
        labels: &[S],
        covers: &[(S, S)],
    ) -> Result<Lattice, LatticeError> {
        let m = labels.len();
        if m == 0 {
            return Err(LatticeError::NotBounded("lattice has no elements".into()));
        }
        if m > MAX_SIZE {
            return Err(LatticeError::InvalidSize(format!(
                "{m} elements, at most {MAX_SIZE} supported"
            )));
        }
        let mut position = HashMap::with_capacity(m);
        for (i, l) in labels.iter().enumerate() {
            let l = l.as_ref();
            if !label_is_valid(l) {
                return Err(LatticeError::InvalidLabel(l.to_string()));
            }
            if position.insert(l.to_string(), i).is_some() {
                return Err(LatticeError::DuplicateLabel(l.to_string()));
            }
        }
        let lookup = |l: &str| {
            position
                .get(l)
                .copied()
                .ok_or_else(|| LatticeError::UnknownLabel(l.to_string()))
        };

        // reflexive-transitive closure (Warshall)
        let mut reach = vec![false; m * m];
        for i in 0..m {
            reach[i * m + i] = true;
        }
        for (lo, hi) in covers {
            let (lo, hi) = (lookup(lo.as_ref())?, lookup(hi.as_ref())?);
            reach[lo * m + hi] = true;
        }
        for k in 0..m {
            for i in 0..m {
                if reach[i * m + k] {
                    for j in 0..m {
                        if reach[k * m + j] {
                            reach[i * m + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                if reach[i * m + j] && reach[j * m + i] {
                    return Err(LatticeError::NotAPartialOrder(
                        labels[i].as_ref().to_string(),
                        labels[j].as_ref().to_string(),
                    ));
                }
            }
        }

        // A strictly smaller element has a strictly smaller down-set, so sorting by
        // down-set size (ties by input position) yields a linear extension.
        let mut order: Vec<usize> = (0..m).collect();
        let down = |i: usize| (0..m).filter(|&j| reach[j * m + i]).count();
        order.sort_by_key(|&i| (down(i), i));

        let mut leq = vec![false; m * m];
        for (ni, &oi) in order.iter().enumerate() {
            for (nj, &oj) in order.iter().enumerate() {
                leq[ni * m + nj] = reach[oi * m + oj];
            }
        }
        let new_labels: Vec<String> = order
            .iter()
            .map(|&i| labels[i].as_ref().to_string())
            .collect();

        let le = |x: usize, y: usize| leq[x * m + y];
        let mut meet = vec![0u8; m * m];
        let mut join = vec![0u8; m * m];
        for x in 0..m {
            for y in x..m {
                let uppers: Vec<usize> = (0..m).filter(|&z| le(x, z) && le(y, z)).collect();
                let lub = uppers
                    .iter()
                    .copied()
                    .find(|&z| uppers.iter().all(|&w| le(z, w)))
                    .ok_or_else(|| LatticeError::NotALattice {
                        op: "join",
                        x: new_labels[x].clone(),
                        y: new_labels[y].clone(),
                    })?;
                let lowers: Vec<usize> = (0..m).filter(|&z| le(z, x) && le(z, y)).collect();
                let glb = lowers
                    .iter()
                    .copied()
                    .find(|&z| lowers.iter().all(|&w| le(w, z)))
                    .ok_or_else(|| LatticeError::NotALattice {
                        op: "meet",
                        x: new_labels[x].clone(),
                        y: new_labels[y].clone(),
                    })?;
                join[x * m + y] = lub as u8;
                join[y * m + x] = lub as u8;
                meet[x * m + y] = glb as u8;
                meet[y * m + x] = glb as u8;
            }
        }

        let bottom = (0..m)
            .find(|&b| (0..m).all(|z| le(b, z)))
            .ok_or_else(|| LatticeError::NotBounded("no least element".into()))?;
        let top = (0..m)
            .find(|&t| (0..m).all(|z| le(z, t)))
            .ok_or_else(|| LatticeError::NotBounded("no greatest element".into()))?;

        let mut upper_covers = vec![Vec::new(); m];
        let mut lower_covers = vec![Vec::new(); m];
        #[allow(clippy::needless_range_loop)]
        for x in 0..m {
            for y in 0..m {
                if x != y && le(x, y) && !(0..m).any(|z| z != x && z != y && le(x, z) && le(z, y))
                {
                    upper_covers[x].push(y);
                    lower_covers[y].push(x);
                }
            }
        }

        let index_of = new_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();

        Ok(Lattice {
            name: name.to_string(),
            labels: new_labels,
            index_of,
            leq,
            meet,
            join,
            upper_covers,
            lower_covers,
            bottom,
            top,
            input_position: order,
        })
    }

    /// The `n`-element chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Result<Lattice, LatticeError> {
        if n < 2 {
            return Err(LatticeError::InvalidSize(format!(
                "chain needs at least 2 elements, got {n}"
            )));
        }
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let covers: Vec<(String, String)> = (1..n)
            .map(|i| (labels[i - 1].clone(), labels[i].clone()))
            .collect();
        Lattice::from_covers(&format!("chain{n}"), &labels, &covers)
    }

    /// `M_k`: bottom `0`, top `1` and `k` pairwise incomparable atoms `c1..ck`.
    pub fn m_lattice(k: usize) -> Result<Lattice, LatticeError> {
        if k < 1 {
            return Err(LatticeError::InvalidSize(format!(
                "M_k needs at least one atom, got {k}"
            )));
        }
        let mut labels = vec!["0".to_string()];
        labels.extend((1..=k).map(|i| format!("c{i}")));
        labels.push("1".to_string());
        let mut covers = Vec::new();
        for c in &labels[1..=k] {
            covers.push(("0".to_string(), c.clone()));
            covers.push((c.clone(), "1".to_string()));
        }
        Lattice::from_covers(&format!("m{k}"), &labels, &covers)
    }

    /// The pentagon `N_5`: `0 < a < c < 1` and `0 < b < 1`.
    pub fn n5() -> Lattice {
        Lattice::from_covers(
            "n5",
            &["0", "a", "b", "c", "1"],
            &[("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")],
        )
        .expect("pentagon is a lattice")
    }

    /// The Boolean lattice of subsets of a `k`-element set, labelled by bit strings.
    pub fn boolean(k: usize) -> Result<Lattice, LatticeError> {
        if !(1..=7).contains(&k) {
            return Err(LatticeError::InvalidSize(format!(
                "boolean lattice rank must be in 1..=7, got {k}"
            )));
        }
        let label = |s: usize| format!("{s:0k$b}");
        let labels: Vec<String> = (0..1usize << k).map(label).collect();
        let mut covers = Vec::new();
        for s in 0..1usize << k {
            for bit in 0..k {
                if s & (1 << bit) == 0 {
                    covers.push((label(s), label(s | (1 << bit))));
                }
            }
        }
        Lattice::from_covers(&format!("boolean{k}"), &labels, &covers)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: Elem) -> &str {
        &self.labels[x]
    }

    pub fn element(&self, label: &str) -> Option<Elem> {
        self.index_of.get(label).copied()
    }

    /// Position of element `x` in the label list the lattice was built from.
    pub fn input_position(&self, x: Elem) -> usize {
        self.input_position[x]
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    #[inline]
    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.leq[x * self.size() + y]
    }

    #[inline]
    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.meet[x * self.size() + y] as Elem
    }

    #[inline]
    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.join[x * self.size() + y] as Elem
    }

    pub fn upper_covers(&self, x: Elem) -> &[Elem] {
        &self.upper_covers[x]
    }

    pub fn lower_covers(&self, x: Elem) -> &[Elem] {
        &self.lower_covers[x]
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size()
    }

    pub fn meet_all(&self, t: &[Elem]) -> Result<Elem, LatticeError> {
        let (&first, rest) = t.split_first().ok_or(LatticeError::EmptyTuple)?;
        Ok(rest.iter().fold(first, |acc, &x| self.meet(acc, x)))
    }

    pub fn join_all(&self, t: &[Elem]) -> Result<Elem, LatticeError> {
        let (&first, rest) = t.split_first().ok_or(LatticeError::EmptyTuple)?;
        Ok(rest.iter().fold(first, |acc, &x| self.join(acc, x)))
    }

    /// Component-wise order on `L^n`.
    pub fn leq_tuple(&self, x: &[Elem], y: &[Elem]) -> Result<bool, LatticeError> {
        if x.len() != y.len() {
            return Err(LatticeError::ArityMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(x.iter().zip(y).all(|(&a, &b)| self.leq(a, b)))
    }

    /// Checks that every component names an element of this lattice.
    pub fn check_tuple(&self, t: &[Elem]) -> Result<(), LatticeError> {
        match t.iter().find(|&&x| x >= self.size()) {
            Some(&x) => Err(LatticeError::ElementOutOfRange(x)),
            None => Ok(()),
        }
    }

    /// `m^n`, or `None` on overflow.
    pub fn tuple_count(&self, n: usize) -> Option<usize> {
        self.size().checked_pow(u32::try_from(n).ok()?)
    }

    pub fn tuple_index(&self, t: &[Elem]) -> usize {
        let m = self.size();
        t.iter().fold(0, |acc, &x| acc * m + x)
    }

    /// Writes the tuple with index `idx` into `out` (its length is the arity).
    pub fn decode_tuple(&self, mut idx: usize, out: &mut [Elem]) {
        let m = self.size();
        for slot in out.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
    }

    pub fn tuple_at(&self, idx: usize, n: usize) -> Vec<Elem> {
        let mut t = vec![0; n];
        self.decode_tuple(idx, &mut t);
        t
    }

    /// All tuples of `L^n` in index order.
    pub fn tuples(&self, n: usize) -> Tuples {
        Tuples {
            m: self.size(),
            next: if n == 0 { None } else { Some(vec![0; n]) },
        }
    }

    pub fn format_tuple(&self, t: &[Elem]) -> String {
        let parts: Vec<&str> = t.iter().map(|&x| self.label(x)).collect();
        format!("({})", parts.join(","))
    }

    /// Parses the line-oriented lattice file format.
    pub fn parse(text: &str) -> Result<Lattice, LatticeError> {
        let perr = |line: usize, msg: String| LatticeError::Parse { line, msg };
        let mut name: Option<String> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut covers = Vec::new();
        let mut ended = false;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if ended {
                return Err(perr(line_no, "content after `end`".into()));
            }
            let mut words = line.split_whitespace();
            let directive = words.next().unwrap_or_default();
            let args: Vec<&str> = words.collect();
            match directive {
                "lattice" => {
                    if name.is_some() {
                        return Err(perr(line_no, "duplicate `lattice` directive".into()));
                    }
                    match args.as_slice() {
                        [n] => name = Some(n.to_string()),
                        _ => return Err(perr(line_no, "expected `lattice <name>`".into())),
                    }
                }
                "elements" => {
                    if name.is_none() {
                        return Err(perr(line_no, "`elements` before `lattice`".into()));
                    }
                    if labels.is_some() {
                        return Err(perr(line_no, "duplicate `elements` directive".into()));
                    }
                    if args.is_empty() {
                        return Err(perr(line_no, "`elements` needs at least one label".into()));
                    }
                    labels = Some(args.iter().map(|s| s.to_string()).collect());
                }
                "cover" => {
                    if labels.is_none() {
                        return Err(perr(line_no, "`cover` before `elements`".into()));
                    }
                    match args.as_slice() {
                        [lo, hi] => covers.push((lo.to_string(), hi.to_string())),
                        _ => return Err(perr(line_no, "expected `cover <lower> <upper>`".into())),
                    }
                }
                "end" => {
                    if !args.is_empty() {
                        return Err(perr(line_no, "`end` takes no arguments".into()));
                    }
                    ended = true;
                }
                other => return Err(perr(line_no, format!("unknown directive `{other}`"))),
            }
        }
        if !ended {
            return Err(perr(text.lines().count().max(1), "missing `end`".into()));
        }
        let name = name.ok_or_else(|| perr(1, "missing `lattice` directive".into()))?;
        let labels = labels.ok_or_else(|| perr(1, "missing `elements` directive".into()))?;
        Lattice::from_covers(&name, &labels, &covers)
    }

    /// Renders the lattice in the file format, listing cover pairs only.
    pub fn to_text(&self) -> String {
        let mut out = format!("lattice {}\nelements {}\n", self.name, self.labels.join(" "));
        for x in self.elements() {
            for &y in self.upper_covers(x) {
                let _ = writeln!(out, "cover {} {}", self.label(x), self.label(y));
            }
        }
        out.push_str("end\n");
        out
    }
}

/// Iterator over `L^n` in increasing index order.
#[derive(Debug, Clone)]
pub struct Tuples {
    m: usize,
    next: Option<Vec<Elem>>,
}

impl Iterator for Tuples {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for slot in succ.iter_mut().rev() {
            *slot += 1;
            if *slot < self.m {
                self.next = Some(succ);
                return Some(current);
            }
            *slot = 0;
        }
        Some(current)
    }
}
