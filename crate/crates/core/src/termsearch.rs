//! Existence of terms satisfying row constraints, decided by subpower closure.
//!
//! A constraint system over a `k`-ary term lists input rows. Each distinct
//! input row becomes one coordinate of a power of `A`; variable `x_i` becomes
//! the vector of `i`-th entries. The term operations of `A` restricted to those
//! rows are exactly the closure of the variable vectors, so a satisfying term
//! exists iff the closure contains a vector meeting every constraint.

use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::{eval_term, FiniteAlgebra, Term};
use crate::bounds::{Bounds, ClosureLimit};
use crate::centrality::Centralizer;
use crate::closure::Subpower;
use crate::conlat::congruence_lattice;
use crate::error::{Error, Result};
use crate::relations::{enumerate_tolerances, Congruence};

/// Rows a sought `arity`-ary term must satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermConstraintSystem {
    pub arity: usize,
    /// `t(input) = output`.
    pub fixed_rows: Vec<(Vec<usize>, usize)>,
    /// `t(left) = t(right)`.
    pub equal_rows: Vec<(Vec<usize>, Vec<usize>)>,
    /// Set when the system is intentionally empty.
    pub unconstrained: bool,
}

impl TermConstraintSystem {
    pub fn new(arity: usize) -> Self {
        TermConstraintSystem {
            arity,
            fixed_rows: Vec::new(),
            equal_rows: Vec::new(),
            unconstrained: false,
        }
    }

    pub fn unconstrained(arity: usize) -> Self {
        TermConstraintSystem {
            unconstrained: true,
            ..Self::new(arity)
        }
    }

    pub fn fix(&mut self, input: Vec<usize>, output: usize) -> &mut Self {
        if !self
            .fixed_rows
            .iter()
            .any(|(i, o)| *i == input && *o == output)
        {
            self.fixed_rows.push((input, output));
        }
        self
    }

    pub fn equate(&mut self, left: Vec<usize>, right: Vec<usize>) -> &mut Self {
        self.equal_rows.push((left, right));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.fixed_rows.is_empty() && self.equal_rows.is_empty()
    }

    /// Checks row lengths and entry ranges against a universe of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.is_empty() && !self.unconstrained {
            return Err(Error::Invalid(
                "constraint system has no rows and is not marked unconstrained".into(),
            ));
        }
        let rows = self
            .fixed_rows
            .iter()
            .map(|(i, _)| i)
            .chain(self.equal_rows.iter().flat_map(|(l, r)| [l, r]));
        for row in rows {
            if row.len() != self.arity {
                return Err(Error::Arity(format!(
                    "row {row:?} has {} entries, the term has arity {}",
                    row.len(),
                    self.arity
                )));
            }
            if let Some(&e) = row.iter().find(|&&e| e >= n) {
                return Err(Error::ElementOutOfRange {
                    element: e,
                    size: n,
                });
            }
        }
        if let Some((_, o)) = self.fixed_rows.iter().find(|(_, o)| *o >= n) {
            return Err(Error::ElementOutOfRange {
                element: *o,
                size: n,
            });
        }
        Ok(())
    }

    /// `m(a,b,b) = a = m(b,b,a)` for all `a, b`.
    pub fn maltsev(n: usize) -> Self {
        let mut cs = Self::new(3);
        for a in 0..n {
            for b in 0..n {
                cs.fix(vec![a, b, b], a);
                cs.fix(vec![b, b, a], a);
            }
        }
        cs
    }

    /// `w(a,a,b) = b = w(b,a,a)` for each listed pair (both orientations are added).
    pub fn weak_difference(pairs: &[(usize, usize)]) -> Self {
        let mut cs = Self::new(3);
        for &(a, b) in pairs {
            for (x, y) in [(a, b), (b, a)] {
                cs.fix(vec![x, x, y], y);
                cs.fix(vec![y, x, x], y);
            }
        }
        cs
    }

    /// Idempotent 4-ary `s` with `s(a,r,e,a) = s(r,a,r,e)`.
    pub fn siggers(n: usize) -> Self {
        let mut cs = Self::new(4);
        for x in 0..n {
            cs.fix(vec![x; 4], x);
        }
        for a in 0..n {
            for r in 0..n {
                for e in 0..n {
                    cs.equate(vec![a, r, e, a], vec![r, a, r, e]);
                }
            }
        }
        cs
    }

    /// Idempotent commutative binary term.
    pub fn commutative_idempotent(n: usize) -> Self {
        let mut cs = Self::new(2);
        for x in 0..n {
            cs.fix(vec![x, x], x);
        }
        for a in 0..n {
            for b in a + 1..n {
                cs.equate(vec![a, b], vec![b, a]);
            }
        }
        cs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Found,
    None,
    ResourceExhausted,
}

/// A two-element quotient of an idempotent-closed subset on which every
/// idempotent term operation acts as a projection. Its existence rules out
/// every Taylor term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoElementSet {
    pub subuniverse: Vec<usize>,
    pub blocks: [Vec<usize>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermWitness {
    pub outcome: Outcome,
    #[serde(skip)]
    pub term: Option<Term>,
    /// The term in prefix notation.
    #[serde(rename = "term")]
    pub term_text: Option<String>,
    /// Vectors generated by the last closure that ran.
    pub closure_size: usize,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<TwoElementSet>,
}

impl TermWitness {
    fn found(alg: &FiniteAlgebra, term: Term, closure_size: usize, method: &str) -> Self {
        TermWitness {
            outcome: Outcome::Found,
            term_text: Some(term.display(alg).to_string()),
            term: Some(term),
            closure_size,
            method: method.into(),
            certificate: None,
        }
    }

    fn without_term(outcome: Outcome, closure_size: usize, method: &str) -> Self {
        TermWitness {
            outcome,
            term: None,
            term_text: None,
            closure_size,
            method: method.into(),
            certificate: None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.outcome == Outcome::Found
    }
}

/// Evaluates `t` on every row of `cs`.
pub fn verify_term(alg: &FiniteAlgebra, t: &Term, cs: &TermConstraintSystem) -> Result<bool> {
    if t.var_count() > cs.arity {
        return Err(Error::Arity(format!(
            "term uses {} variables, the constraint system has arity {}",
            t.var_count(),
            cs.arity
        )));
    }
    for (input, output) in &cs.fixed_rows {
        if eval_term(alg, t, input)? != *output {
            return Ok(false);
        }
    }
    for (l, r) in &cs.equal_rows {
        if eval_term(alg, t, l)? != eval_term(alg, t, r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Breadth-first search for a term satisfying `cs`, generating at most `budget`
/// vectors with the default limit on operation applications.
pub fn solve_term_existence(
    alg: &FiniteAlgebra,
    cs: &TermConstraintSystem,
    budget: usize,
) -> Result<TermWitness> {
    solve_with_method(alg, cs, budget.into(), "closure")
}

fn solve_with_method(
    alg: &FiniteAlgebra,
    cs: &TermConstraintSystem,
    limit: ClosureLimit,
    method: &str,
) -> Result<TermWitness> {
    let budget = limit.vectors;
    if budget == 0 {
        return Err(Error::Invalid("term search budget must be positive".into()));
    }
    cs.validate(alg.size())?;

    let mut rows: Vec<&[usize]> = Vec::new();
    let mut coord: HashMap<&[usize], usize> = HashMap::new();
    let all_rows = cs.fixed_rows.iter().map(|(i, _)| i.as_slice()).chain(
        cs.equal_rows
            .iter()
            .flat_map(|(l, r)| [l.as_slice(), r.as_slice()]),
    );
    for row in all_rows {
        if !coord.contains_key(row) {
            coord.insert(row, rows.len());
            rows.push(row);
        }
    }

    let mut required: Vec<Option<u8>> = vec![None; rows.len()];
    for (input, output) in &cs.fixed_rows {
        let c = coord[input.as_slice()];
        match required[c] {
            Some(o) if o as usize != *output => {
                return Ok(TermWitness::without_term(Outcome::None, 0, method));
            }
            _ => required[c] = Some(*output as u8),
        }
    }
    let fixed: Vec<(usize, u8)> = required
        .iter()
        .enumerate()
        .filter_map(|(c, o)| o.map(|o| (c, o)))
        .collect();
    let equal: Vec<(usize, usize)> = cs
        .equal_rows
        .iter()
        .map(|(l, r)| (coord[l.as_slice()], coord[r.as_slice()]))
        .filter(|(a, b)| a != b)
        .collect();

    let generators = (0..cs.arity).map(|i| rows.iter().map(|r| r[i]).collect::<Vec<usize>>());
    let matches = |v: &[u8]| {
        fixed.iter().all(|&(c, o)| v[c] == o) && equal.iter().all(|&(a, b)| v[a] == v[b])
    };
    let sp = match Subpower::generate(alg, rows.len(), generators, limit, true, matches) {
        Ok(sp) => sp,
        Err(e) if e.is_exhausted() => {
            return Ok(TermWitness::without_term(
                Outcome::ResourceExhausted,
                budget,
                method,
            ))
        }
        Err(e) => return Err(e),
    };
    match sp.stopped_at() {
        Some(i) => {
            let term = sp.term(i).expect("origins are tracked");
            if !verify_term(alg, &term, cs)? {
                return Err(Error::Invalid(format!(
                    "closure produced a term that fails its constraints: {}",
                    term.display(alg)
                )));
            }
            Ok(TermWitness::found(alg, term, sp.len(), method))
        }
        None => Ok(TermWitness::without_term(Outcome::None, sp.len(), method)),
    }
}

/// Congruences `α` of `A` with `[α,α] = 0`, in lattice order.
pub fn abelian_congruences(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<Vec<Congruence>> {
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    let mut out = Vec::new();
    for c in l.congruences() {
        if cz.is_abelian(&c.as_tolerance())? {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// Rows `w(a,a,b) = b = w(b,a,a)` for every pair in an abelian congruence of `A`.
pub fn weak_difference_constraints(
    alg: &FiniteAlgebra,
    bounds: &Bounds,
) -> Result<TermConstraintSystem> {
    let mut pairs = Vec::new();
    for c in abelian_congruences(alg, bounds)? {
        pairs.extend(c.to_relation().pairs());
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(TermConstraintSystem::weak_difference(&pairs))
}

/// Same rows as [`weak_difference_constraints`], over every abelian tolerance.
pub fn tolerance_wdt_constraints(
    alg: &FiniteAlgebra,
    bounds: &Bounds,
) -> Result<TermConstraintSystem> {
    let cz = Centralizer::new(alg, bounds);
    let mut pairs = Vec::new();
    for t in enumerate_tolerances(alg, bounds)? {
        if cz.is_abelian(&t)? {
            pairs.extend(t.relation().pairs());
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    Ok(TermConstraintSystem::weak_difference(&pairs))
}

pub fn find_weak_difference_term(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<TermWitness> {
    let cs = weak_difference_constraints(alg, bounds)?;
    solve_with_method(alg, &cs, bounds.into(), "closure")
}

pub fn find_tolerance_wdt(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<TermWitness> {
    let cs = tolerance_wdt_constraints(alg, bounds)?;
    solve_with_method(alg, &cs, bounds.into(), "closure")
}

pub fn find_maltsev_term(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<TermWitness> {
    solve_with_method(
        alg,
        &TermConstraintSystem::maltsev(alg.size()),
        bounds.into(),
        "closure",
    )
}

/// Decides whether `A` has a Taylor term, answering with a Siggers term when it does.
///
/// 1. Look for a [`TwoElementSet`]; one exists exactly when there is no Taylor term.
/// 2. Build an idempotent commutative binary term `c` with [`commutative_by_composition`];
///    then `c(x0, x1)` is a Siggers term.
/// 3. Otherwise run the Siggers closure itself.
pub fn has_taylor_term(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<TermWitness> {
    let siggers = TermConstraintSystem::siggers(alg.size());
    if let Some(cert) = two_element_set(alg, bounds)? {
        let mut w = TermWitness::without_term(Outcome::None, 0, "two-element-set");
        w.certificate = Some(cert);
        return Ok(w);
    }
    if let Some((c, size)) = commutative_by_composition(alg, bounds)? {
        let term = c.substitute(&[Term::Var(0), Term::Var(1)]);
        if verify_term(alg, &term, &siggers)? {
            return Ok(TermWitness::found(alg, term, size, "commutative-binary"));
        }
    }
    solve_with_method(alg, &siggers, bounds.into(), "siggers-closure")
}

/// Builds an idempotent commutative binary term one pair at a time.
///
/// Start from `c(x,y) = x`. While some `c(a,b) = u` differs from `c(b,a) = v`,
/// find a binary idempotent `d` with `d(u,v) = d(v,u)` (a closure in
/// `A^(n+2)`) and replace `c` by `d(c(x,y), c(y,x))`. Pairs already fixed stay
/// fixed because `d` is idempotent. If some `d` does not exist, neither does a
/// commutative idempotent term. Returns the term and the largest closure used.
pub fn commutative_by_composition(
    alg: &FiniteAlgebra,
    bounds: &Bounds,
) -> Result<Option<(Term, usize)>> {
    let n = alg.size();
    let mut c = Term::Var(0);
    let mut largest = 0;
    loop {
        let table: Vec<usize> = (0..n * n)
            .map(|i| crate::algebra::eval_unchecked(alg, &c, &[i / n, i % n]))
            .collect();
        let bad = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .find(|&(a, b)| table[a * n + b] != table[b * n + a]);
        let Some((a, b)) = bad else {
            return Ok(Some((c, largest)));
        };
        let (u, v) = (table[a * n + b], table[b * n + a]);
        let mut local = TermConstraintSystem::new(2);
        for x in 0..n {
            local.fix(vec![x, x], x);
        }
        local.equate(vec![u, v], vec![v, u]);
        let w = solve_with_method(alg, &local, bounds.into(), "local")?;
        largest = largest.max(w.closure_size);
        let Some(d) = w.term else {
            return Ok(None);
        };
        let swapped = c.substitute(&[Term::Var(1), Term::Var(0)]);
        c = d.substitute(&[c, swapped]);
    }
}

/// Searches for a two-element set among the quotients of idempotent closures
/// of pairs. A partition `{X, Y}` of such a closure `B` qualifies when both
/// `X² ∪ Y²` and the pullback of the one-in-three relation,
/// `X×X×Y ∪ X×Y×X ∪ Y×X×X`, are closed under the idempotent term operations.
pub fn two_element_set(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<Option<TwoElementSet>> {
    let n = alg.size();
    let mut tried: Vec<Vec<usize>> = Vec::new();
    for c in 0..n {
        for d in c + 1..n {
            let b = match alg.idempotent_closure(&[c, d], bounds) {
                Ok(b) => b,
                Err(e) if e.is_exhausted() => continue,
                Err(e) => return Err(e),
            };
            if tried.contains(&b) {
                continue;
            }
            if let Some(cert) = split_into_set(alg, &b, bounds)? {
                return Ok(Some(cert));
            }
            tried.push(b);
        }
    }
    Ok(None)
}

fn split_into_set(
    alg: &FiniteAlgebra,
    b: &[usize],
    bounds: &Bounds,
) -> Result<Option<TwoElementSet>> {
    let m = b.len();
    if !(2..=20).contains(&m) {
        return Ok(None);
    }
    // Masks with bit 0 clear put b[0] in X; Y must be nonempty.
    for mask in 1u32..(1 << (m - 1)) {
        let mask = mask << 1;
        let side = |i: usize| mask >> i & 1;
        let mut theta = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if side(i) == side(j) {
                    theta.push(vec![b[i], b[j]]);
                }
            }
        }
        if !closed(alg, 2, &theta, bounds)? {
            continue;
        }
        let mut one_in_three = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if side(i) + side(j) + side(k) == 1 {
                        one_in_three.push(vec![b[i], b[j], b[k]]);
                    }
                }
            }
        }
        if closed(alg, 3, &one_in_three, bounds)? {
            let (x, y): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| side(i) == 0);
            return Ok(Some(TwoElementSet {
                subuniverse: b.to_vec(),
                blocks: [
                    x.into_iter().map(|i| b[i]).collect(),
                    y.into_iter().map(|i| b[i]).collect(),
                ],
            }));
        }
    }
    Ok(None)
}

fn closed(alg: &FiniteAlgebra, width: usize, rel: &[Vec<usize>], bounds: &Bounds) -> Result<bool> {
    match alg.is_idempotent_closed(width, rel, bounds) {
        Err(e) if e.is_exhausted() => Ok(false),
        other => other,
    }
}
