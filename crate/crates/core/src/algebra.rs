//! Finite algebras, terms, and the derived algebras built from them.
//!
//! Elements are the dense integers `0..n`. Operation tables are stored
//! row-major with the last argument varying fastest, so the entry for
//! `f(a_0, .., a_{k-1})` sits at `sum a_i * n^(k-1-i)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::closure::Subpower;
use crate::error::{Error, Result};
use crate::relations::Congruence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    symbol: String,
    arity: usize,
    table: Vec<usize>,
}

impl Operation {
    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    ops: Vec<Operation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AlgebraDoc {
    #[serde(default)]
    name: String,
    size: i64,
    #[serde(default)]
    ops: Vec<OpDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OpDoc {
    symbol: String,
    arity: i64,
    table: Vec<i64>,
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

impl FiniteAlgebra {
    /// Builds an algebra from `(symbol, arity, table)` triples, validating every table.
    pub fn new(
        name: impl Into<String>,
        size: usize,
        ops: Vec<(String, usize, Vec<usize>)>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Format("size must be at least 1".into()));
        }
        let mut built = Vec::with_capacity(ops.len());
        for (symbol, arity, table) in ops {
            let expected = checked_pow(size, arity).ok_or_else(|| {
                Error::Format(format!("operation `{symbol}`: {size}^{arity} overflows"))
            })?;
            if table.len() != expected {
                return Err(Error::TableLength {
                    symbol,
                    len: table.len(),
                    size,
                    arity,
                });
            }
            if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(Error::EntryOutOfRange {
                    symbol,
                    index,
                    value: value as i64,
                    size,
                });
            }
            built.push(Operation {
                symbol,
                arity,
                table,
            });
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            ops: built,
        })
    }

    /// Parses the JSON algebra document `{"name", "size", "ops": [{"symbol", "arity", "table"}]}`.
    pub fn from_json(document: &str) -> Result<Self> {
        let doc: AlgebraDoc =
            serde_json::from_str(document).map_err(|e| Error::Format(e.to_string()))?;
        if doc.size < 1 {
            return Err(Error::Format(format!("size {} is not positive", doc.size)));
        }
        let size = doc.size as usize;
        let mut ops = Vec::with_capacity(doc.ops.len());
        for op in doc.ops {
            if op.arity < 0 {
                return Err(Error::Format(format!(
                    "operation `{}`: negative arity {}",
                    op.symbol, op.arity
                )));
            }
            if let Some((index, &value)) = op
                .table
                .iter()
                .enumerate()
                .find(|(_, &v)| v < 0 || v >= size as i64)
            {
                // Length problems take precedence over entry problems.
                let arity = op.arity as usize;
                if checked_pow(size, arity) == Some(op.table.len()) {
                    return Err(Error::EntryOutOfRange {
                        symbol: op.symbol,
                        index,
                        value,
                        size,
                    });
                }
            }
            let table = op
                .table
                .iter()
                .map(|&v| if v < 0 { usize::MAX } else { v as usize })
                .collect();
            ops.push((op.symbol, op.arity as usize, table));
        }
        FiniteAlgebra::new(doc.name, size, ops)
    }

    pub fn to_json(&self) -> String {
        let doc = AlgebraDoc {
            name: self.name.clone(),
            size: self.size as i64,
            ops: self
                .ops
                .iter()
                .map(|op| OpDoc {
                    symbol: op.symbol.clone(),
                    arity: op.arity as i64,
                    table: op.table.iter().map(|&v| v as i64).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("algebra documents always serialize")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_index(&self, symbol: &str) -> Option<usize> {
        self.ops.iter().position(|op| op.symbol == symbol)
    }

    pub fn max_arity(&self) -> usize {
        self.ops.iter().map(|op| op.arity).max().unwrap_or(0)
    }

    /// Applies operation `op` to `args` without range checks beyond indexing.
    #[inline]
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let op = &self.ops[op];
        debug_assert_eq!(op.arity, args.len());
        let mut idx = 0;
        for &a in args {
            idx = idx * self.size + a;
        }
        op.table[idx]
    }

    /// Whether `f(a, .., a) = a` for every element.
    pub fn is_idempotent_op(&self, op: usize) -> bool {
        let arity = self.ops[op].arity;
        if arity == 0 {
            return self.size == 1;
        }
        (0..self.size).all(|a| self.apply(op, &vec![a; arity]) == a)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The direct power `A^k`; tuple `(x_0, .., x_{k-1})` is the integer `sum x_i n^i`.
    pub fn power(&self, k: usize, bounds: &Bounds) -> Result<FiniteAlgebra> {
        if k == 0 {
            return Err(Error::Invalid("power exponent must be positive".into()));
        }
        let n = self.size;
        let size = checked_pow(n, k)
            .filter(|&s| s <= bounds.max_power_table)
            .ok_or_else(|| {
                Error::exhausted(format!("universe of A^{k}"), bounds.max_power_table)
            })?;
        let mut ops = Vec::with_capacity(self.ops.len());
        for (oi, op) in self.ops.iter().enumerate() {
            let len = checked_pow(size, op.arity)
                .filter(|&l| l <= bounds.max_power_table)
                .ok_or_else(|| {
                    Error::exhausted(
                        format!("table of `{}` in A^{k}", op.symbol),
                        bounds.max_power_table,
                    )
                })?;
            let mut table = Vec::with_capacity(len);
            let mut args = vec![0usize; op.arity];
            let mut coord_args = vec![0usize; op.arity];
            for idx in 0..len {
                let mut rest = idx;
                for slot in args.iter_mut().rev() {
                    *slot = rest % size;
                    rest /= size;
                }
                let mut out = 0;
                let mut scale = 1;
                for _ in 0..k {
                    for (ca, &a) in coord_args.iter_mut().zip(&args) {
                        *ca = (a / scale) % n;
                    }
                    out += self.apply(oi, &coord_args) * scale;
                    scale *= n;
                }
                table.push(out);
            }
            ops.push((op.symbol.clone(), op.arity, table));
        }
        FiniteAlgebra::new(format!("{}^{k}", self.name), size, ops)
    }

    /// The quotient `A/δ` together with the map sending each element to its block index.
    ///
    /// Blocks are numbered in increasing order of their least element.
    pub fn quotient(&self, delta: &Congruence) -> Result<(FiniteAlgebra, Vec<usize>)> {
        if delta.size() != self.size {
            return Err(Error::SizeMismatch {
                left: self.size,
                right: delta.size(),
            });
        }
        if let Some(reason) = delta.compatibility_failure(self) {
            return Err(Error::NotCongruence(reason));
        }
        let block_map = delta.block_index();
        let reps = delta.representatives();
        let m = reps.len();
        let mut ops = Vec::with_capacity(self.ops.len());
        for (oi, op) in self.ops.iter().enumerate() {
            let len = checked_pow(m, op.arity).expect("quotient is no larger than A");
            let mut table = Vec::with_capacity(len);
            let mut args = vec![0usize; op.arity];
            for idx in 0..len {
                let mut rest = idx;
                for slot in args.iter_mut().rev() {
                    *slot = reps[rest % m];
                    rest /= m;
                }
                table.push(block_map[self.apply(oi, &args)]);
            }
            ops.push((op.symbol.clone(), op.arity, table));
        }
        let alg = FiniteAlgebra::new(format!("{}/δ", self.name), m, ops)?;
        Ok((alg, block_map))
    }

    /// The subalgebra on the subuniverse `universe`, re-indexed along its sorted order.
    ///
    /// Returns the algebra and the sorted list of original elements.
    pub fn subalgebra(&self, universe: &[usize]) -> Result<(FiniteAlgebra, Vec<usize>)> {
        let mut elems: Vec<usize> = universe.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if elems.is_empty() {
            return Err(Error::Invalid("subalgebra universe is empty".into()));
        }
        if let Some(&e) = elems.iter().find(|&&e| e >= self.size) {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: self.size,
            });
        }
        let mut local = vec![usize::MAX; self.size];
        for (i, &e) in elems.iter().enumerate() {
            local[e] = i;
        }
        let m = elems.len();
        let mut ops = Vec::with_capacity(self.ops.len());
        for (oi, op) in self.ops.iter().enumerate() {
            let len = checked_pow(m, op.arity).expect("subalgebra is no larger than A");
            let mut table = Vec::with_capacity(len);
            let mut args = vec![0usize; op.arity];
            for idx in 0..len {
                let mut rest = idx;
                for slot in args.iter_mut().rev() {
                    *slot = elems[rest % m];
                    rest /= m;
                }
                let out = local[self.apply(oi, &args)];
                if out == usize::MAX {
                    return Err(Error::Invalid(format!(
                        "{:?} is not closed under `{}`",
                        elems, op.symbol
                    )));
                }
                table.push(out);
            }
            ops.push((op.symbol.clone(), op.arity, table));
        }
        let alg = FiniteAlgebra::new(format!("{}|B", self.name), m, ops)?;
        Ok((alg, elems))
    }

    /// The subuniverse generated by `gens` (sorted).
    pub fn subuniverse(&self, gens: &[usize], bounds: &Bounds) -> Result<Vec<usize>> {
        self.check_elements(gens)?;
        let closure = Subpower::generate(
            self,
            1,
            gens.iter().map(|&g| vec![g]),
            bounds,
            false,
            |_| false,
        )?;
        let mut out: Vec<usize> = closure.iter().map(|v| v[0] as usize).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// The least superset of `set` closed under every idempotent term operation.
    ///
    /// Computed as a slice of a subpower: generate the subuniverse of `A^(1+n)` from
    /// `(x, 0, 1, .., n-1)` for each `x` in `set` and keep coordinate 0 of every vector
    /// whose tail is `(0, 1, .., n-1)`.
    pub fn idempotent_closure(&self, set: &[usize], bounds: &Bounds) -> Result<Vec<usize>> {
        if set.is_empty() {
            return Err(Error::Invalid("idempotent closure of the empty set".into()));
        }
        self.check_elements(set)?;
        let n = self.size;
        let mut seen = vec![false; n];
        let mut found = 0;
        let extended = set.iter().map(|&x| {
            let mut v = vec![x];
            v.extend(0..n);
            v
        });
        // Stop early once every element is reached.
        Subpower::generate(self, 1 + n, extended, bounds, false, |v| {
            if v[1..].iter().enumerate().all(|(i, &x)| x as usize == i) && !seen[v[0] as usize] {
                seen[v[0] as usize] = true;
                found += 1;
            }
            found == n
        })?;
        let out: Vec<usize> = (0..n).filter(|&x| seen[x]).collect();
        Ok(out)
    }

    /// Closes a set of vectors in `A^width` under all idempotent term operations.
    ///
    /// Same tail trick as [`idempotent_closure`](Self::idempotent_closure), on `A^(width+n)`.
    /// The result is sorted lexicographically.
    pub fn idempotent_subpower(
        &self,
        width: usize,
        gens: &[Vec<usize>],
        bounds: &Bounds,
    ) -> Result<Vec<Vec<usize>>> {
        let n = self.size;
        let tail: Vec<usize> = (0..n).collect();
        let extended = gens.iter().map(|g| {
            debug_assert_eq!(g.len(), width);
            let mut v = g.clone();
            v.extend_from_slice(&tail);
            v
        });
        let closure = Subpower::generate(self, width + n, extended, bounds, false, |_| false)?;
        let mut out: Vec<Vec<usize>> = closure
            .iter()
            .filter(|v| v[width..].iter().enumerate().all(|(i, &x)| x as usize == i))
            .map(|v| v[..width].iter().map(|&x| x as usize).collect())
            .collect();
        out.sort();
        Ok(out)
    }

    /// Whether the relation `rel ⊆ A^width` is closed under every idempotent term operation.
    ///
    /// Runs the closure of [`idempotent_subpower`](Self::idempotent_subpower) but stops
    /// at the first vector with identity tail outside `rel`.
    pub fn is_idempotent_closed(
        &self,
        width: usize,
        rel: &[Vec<usize>],
        bounds: &Bounds,
    ) -> Result<bool> {
        let n = self.size;
        let members: std::collections::HashSet<Vec<u8>> = rel
            .iter()
            .map(|v| v.iter().map(|&x| x as u8).collect())
            .collect();
        let tail: Vec<usize> = (0..n).collect();
        let extended = rel.iter().map(|g| {
            let mut v = g.clone();
            v.extend_from_slice(&tail);
            v
        });
        let closure = Subpower::generate(self, width + n, extended, bounds, false, |v| {
            v[width..].iter().enumerate().all(|(i, &x)| x as usize == i)
                && !members.contains(&v[..width])
        })?;
        Ok(closure.stopped_at().is_none())
    }

    pub(crate) fn check_elements(&self, elems: &[usize]) -> Result<()> {
        match elems.iter().find(|&&e| e >= self.size) {
            Some(&element) => Err(Error::ElementOutOfRange {
                element,
                size: self.size,
            }),
            None => Ok(()),
        }
    }
}

/// Encodes a tuple of elements as a base-`n` integer, coordinate 0 least significant.
pub fn encode_tuple(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().rev().fold(0, |acc, &x| acc * n + x)
}

/// Inverse of [`encode_tuple`].
pub fn decode_tuple(n: usize, k: usize, mut code: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(code % n);
        code /= n;
    }
    out
}

/// A term over an algebra's operation symbols. Operations are referenced by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Op(usize, Vec<Term>),
}

impl Term {
    /// One more than the largest variable index, or 0 for ground terms.
    pub fn var_count(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Op(_, args) => args.iter().map(Term::var_count).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Op(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Checks that every node's child count matches the operation's arity.
    pub fn check(&self, alg: &FiniteAlgebra) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Op(op, args) => {
                let Some(o) = alg.ops.get(*op) else {
                    return Err(Error::Arity(format!("no operation with index {op}")));
                };
                if o.arity != args.len() {
                    return Err(Error::Arity(format!(
                        "`{}` takes {} arguments, got {}",
                        o.symbol,
                        o.arity,
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.check(alg))
            }
        }
    }

    /// Replaces every variable `x_i` by `subst[i]`.
    pub fn substitute(&self, subst: &[Term]) -> Term {
        match self {
            Term::Var(i) => subst[*i].clone(),
            Term::Op(op, args) => Term::Op(*op, args.iter().map(|a| a.substitute(subst)).collect()),
        }
    }

    /// Prefix notation with the algebra's symbols, e.g. `+(x0, +(x1, x2))`.
    pub fn display<'a>(&'a self, alg: &'a FiniteAlgebra) -> TermDisplay<'a> {
        TermDisplay { term: self, alg }
    }

    /// Parses prefix notation; operation symbols are resolved against `alg`.
    pub fn parse(alg: &FiniteAlgebra, text: &str) -> Result<Term> {
        let mut parser = TermParser {
            alg,
            src: text.as_bytes(),
            pos: 0,
        };
        let t = parser.term()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(Error::Format(format!(
                "trailing input at byte {} of term `{text}`",
                parser.pos
            )));
        }
        t.check(alg)?;
        Ok(t)
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    alg: &'a FiniteAlgebra,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Op(op, args) => {
                let symbol = self
                    .alg
                    .ops
                    .get(*op)
                    .map(|o| o.symbol.as_str())
                    .unwrap_or("?");
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a.display(self.alg))?;
                }
                write!(f, ")")
            }
        }
    }
}

struct TermParser<'a> {
    alg: &'a FiniteAlgebra,
    src: &'a [u8],
    pos: usize,
}

impl TermParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && !matches!(self.src[self.pos], b'(' | b')' | b',')
            && !self.src[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Format(format!(
                "expected `{}` at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn term(&mut self) -> Result<Term> {
        let at = self.pos;
        let tok = self.token().to_string();
        if tok.is_empty() {
            return Err(Error::Format(format!("expected a term at byte {at}")));
        }
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'(') {
            let op = self
                .alg
                .op_index(&tok)
                .ok_or_else(|| Error::Format(format!("unknown operation symbol `{tok}`")))?;
            self.pos += 1;
            let mut args = Vec::new();
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b')') {
                self.pos += 1;
                return Ok(Term::Op(op, args));
            }
            loop {
                args.push(self.term()?);
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    _ => break,
                }
            }
            self.expect(b')')?;
            Ok(Term::Op(op, args))
        } else if let Some(idx) = tok.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            Ok(Term::Var(idx))
        } else if let Some(op) = self.alg.op_index(&tok) {
            // bare nullary symbol
            Ok(Term::Op(op, Vec::new()))
        } else {
            Err(Error::Format(format!("unrecognized token `{tok}`")))
        }
    }
}

/// Evaluates the term operation of `t` at `env`.
pub fn eval_term(alg: &FiniteAlgebra, t: &Term, env: &[usize]) -> Result<usize> {
    t.check(alg)?;
    if t.var_count() > env.len() {
        return Err(Error::Arity(format!(
            "term uses {} variables but {} values were supplied",
            t.var_count(),
            env.len()
        )));
    }
    alg.check_elements(env)?;
    Ok(eval_unchecked(alg, t, env))
}

pub(crate) fn eval_unchecked(alg: &FiniteAlgebra, t: &Term, env: &[usize]) -> usize {
    match t {
        Term::Var(i) => env[*i],
        Term::Op(op, args) => {
            let vals: Vec<usize> = args.iter().map(|a| eval_unchecked(alg, a, env)).collect();
            alg.apply(*op, &vals)
        }
    }
}
