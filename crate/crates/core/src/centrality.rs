//! The centralizer relation `C(S,T;δ)` and the term-condition commutator.
//!
//! `C(S,T;δ)` holds when every matrix `[[p,q],[r,s]]` of `M(S,T)` with
//! `p δ q` also has `r δ s`. `M(S,T)` is the subuniverse of `A⁴` generated by
//! the row generators `(a,a,b,b)`, `(a,b) ∈ S`, and the column generators
//! `(u,v,u,v)`, `(u,v) ∈ T`; a 4-tuple `(p,q,r,s)` is the matrix read row by row.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::closure::Subpower;
use crate::error::{Error, Result};
use crate::relations::{generate_congruence, BinaryRelation, Congruence, Tolerance};

/// The closed set `M(S,T) ⊆ A⁴`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSet {
    n: usize,
    /// Members in lexicographic order of `(p,q,r,s)`.
    members: Vec<[u8; 4]>,
    bits: Vec<u64>,
}

impl MatrixSet {
    fn code(&self, m: [usize; 4]) -> usize {
        crate::algebra::encode_tuple(self.n, &m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, m: [usize; 4]) -> bool {
        if m.iter().any(|&x| x >= self.n) {
            return false;
        }
        let c = self.code(m);
        self.bits[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        self.members
            .iter()
            .map(|m| [m[0] as usize, m[1] as usize, m[2] as usize, m[3] as usize])
    }

    /// A canonical `(p,q,r,s)` with `p δ q` but not `r δ s`: the least failing
    /// bottom row `(r,s)`, and for that row the greatest top row `(p,q)`.
    pub fn violation(&self, delta: &Congruence) -> Option<[usize; 4]> {
        self.iter()
            .filter(|&[p, q, r, s]| delta.contains(p, q) && !delta.contains(r, s))
            .min_by_key(|&[p, q, r, s]| (r, s, std::cmp::Reverse((p, q))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralityCertificate {
    pub holds: bool,
    /// A matrix `(p,q,r,s)` with `(p,q) ∈ δ` and `(r,s) ∉ δ` when `holds` is false.
    pub witness: Option<[usize; 4]>,
}

impl CentralityCertificate {
    fn from_witness(witness: Option<[usize; 4]>) -> Self {
        CentralityCertificate {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn check_same_size(alg: &FiniteAlgebra, sizes: &[usize]) -> Result<()> {
    match sizes.iter().find(|&&s| s != alg.size()) {
        Some(&s) => Err(Error::SizeMismatch {
            left: alg.size(),
            right: s,
        }),
        None => Ok(()),
    }
}

fn matrix_generators(s: &BinaryRelation, t: &BinaryRelation) -> Vec<Vec<usize>> {
    let rows = s.pairs().into_iter().map(|(a, b)| vec![a, a, b, b]);
    let cols = t.pairs().into_iter().map(|(u, v)| vec![u, v, u, v]);
    rows.chain(cols).collect()
}

/// Computes `M(S,T)` by subpower closure.
pub fn matrix_algebra(
    alg: &FiniteAlgebra,
    s: &Tolerance,
    t: &Tolerance,
    bounds: &Bounds,
) -> Result<MatrixSet> {
    check_same_size(alg, &[s.size(), t.size()])?;
    matrix_set_of(alg, s.relation(), t.relation(), bounds)
}

fn matrix_set_of(
    alg: &FiniteAlgebra,
    s: &BinaryRelation,
    t: &BinaryRelation,
    bounds: &Bounds,
) -> Result<MatrixSet> {
    let n = alg.size();
    let cells = n.checked_pow(4).filter(|&c| c <= bounds.max_power_table);
    let Some(cells) = cells else {
        return Err(Error::exhausted("universe of A^4", bounds.max_power_table));
    };
    let sp = Subpower::generate(alg, 4, matrix_generators(s, t), bounds, false, |_| false)?;
    let mut members: Vec<[u8; 4]> = sp.iter().map(|v| [v[0], v[1], v[2], v[3]]).collect();
    members.sort_unstable();
    let mut set = MatrixSet {
        n,
        members,
        bits: vec![0; cells.div_ceil(64)],
    };
    for i in 0..set.members.len() {
        let m = set.members[i];
        let c = set.code([m[0] as usize, m[1] as usize, m[2] as usize, m[3] as usize]);
        set.bits[c / 64] |= 1 << (c % 64);
    }
    Ok(set)
}

/// Memoizes `M(S,T)` per pair of relations; queries with different `δ` reuse it.
pub struct Centralizer<'a> {
    alg: &'a FiniteAlgebra,
    bounds: Bounds,
    cache: RefCell<HashMap<(BinaryRelation, BinaryRelation), Rc<MatrixSet>>>,
}

impl<'a> Centralizer<'a> {
    pub fn new(alg: &'a FiniteAlgebra, bounds: &Bounds) -> Self {
        Centralizer {
            alg,
            bounds: *bounds,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &'a FiniteAlgebra {
        self.alg
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn matrix_set(&self, s: &BinaryRelation, t: &BinaryRelation) -> Result<Rc<MatrixSet>> {
        check_same_size(self.alg, &[s.size(), t.size()])?;
        let key = (s.clone(), t.clone());
        if let Some(m) = self.cache.borrow().get(&key) {
            return Ok(Rc::clone(m));
        }
        let m = Rc::new(matrix_set_of(self.alg, s, t, &self.bounds)?);
        self.cache.borrow_mut().insert(key, Rc::clone(&m));
        Ok(m)
    }

    /// Decides `C(S,T;δ)` for arbitrary relations `S`, `T` (tolerances in every public use).
    pub fn centralizes_rel(
        &self,
        s: &BinaryRelation,
        t: &BinaryRelation,
        delta: &Congruence,
    ) -> Result<CentralityCertificate> {
        check_same_size(self.alg, &[delta.size()])?;
        let m = self.matrix_set(s, t)?;
        Ok(CentralityCertificate::from_witness(m.violation(delta)))
    }

    pub fn centralizes(
        &self,
        s: &Tolerance,
        t: &Tolerance,
        delta: &Congruence,
    ) -> Result<CentralityCertificate> {
        self.centralizes_rel(s.relation(), t.relation(), delta)
    }

    pub fn holds(&self, s: &Tolerance, t: &Tolerance, delta: &Congruence) -> Result<bool> {
        Ok(self.centralizes(s, t, delta)?.holds)
    }

    /// `C(α,β;δ)` for congruences.
    pub fn holds_con(&self, a: &Congruence, b: &Congruence, delta: &Congruence) -> Result<bool> {
        Ok(self
            .centralizes_rel(&a.to_relation(), &b.to_relation(), delta)?
            .holds)
    }

    pub fn is_abelian(&self, r: &Tolerance) -> Result<bool> {
        self.holds(r, r, &Congruence::equality(self.alg.size()))
    }

    /// `[α,β]`: the least congruence `δ` with `C(α,β;δ)`.
    ///
    /// Starting from `δ = 0`, repeatedly adds every `(r,s)` from a matrix of
    /// `M(α,β)` whose top row lies in `δ` and regenerates the congruence, until stable.
    pub fn commutator(&self, alpha: &Congruence, beta: &Congruence) -> Result<Congruence> {
        check_same_size(self.alg, &[alpha.size(), beta.size()])?;
        let m = self.matrix_set(&alpha.to_relation(), &beta.to_relation())?;
        let mut delta = Congruence::equality(self.alg.size());
        loop {
            let mut pairs: Vec<(usize, usize)> = m
                .iter()
                .filter(|&[p, q, r, s]| delta.contains(p, q) && !delta.contains(r, s))
                .map(|[_, _, r, s]| (r, s))
                .collect();
            if pairs.is_empty() {
                return Ok(delta);
            }
            pairs.extend(
                delta
                    .roots()
                    .iter()
                    .enumerate()
                    .filter(|(a, r)| a != *r)
                    .map(|(a, &r)| (a, r)),
            );
            delta = generate_congruence(self.alg, &pairs)?;
        }
    }
}

pub fn centralizes(
    alg: &FiniteAlgebra,
    s: &Tolerance,
    t: &Tolerance,
    delta: &Congruence,
    bounds: &Bounds,
) -> Result<CentralityCertificate> {
    Centralizer::new(alg, bounds).centralizes(s, t, delta)
}

pub fn commutator(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    bounds: &Bounds,
) -> Result<Congruence> {
    Centralizer::new(alg, bounds).commutator(alpha, beta)
}

pub fn is_abelian(alg: &FiniteAlgebra, r: &Tolerance, bounds: &Bounds) -> Result<bool> {
    Centralizer::new(alg, bounds).is_abelian(r)
}

/// Second, independent decision procedure for `C(S,T;δ)`.
///
/// Because `S` is reflexive, a failure of the term condition can always be
/// moved into a polynomial in which only one argument varies along `S` (change
/// the `S`-coordinates one at a time; the first change that breaks `δ` is such
/// a polynomial, with the other coordinates frozen as constants). So it is
/// enough to scan, for each `(a,b) ∈ S`, the matrices generated by the single
/// row `(a,a,b,b)` together with all columns of `T`. Each of these sets is
/// computed by naive round-based saturation over a `BTreeSet`, sharing no code
/// with the subpower engine.
pub fn centralizes_by_polynomial_scan(
    alg: &FiniteAlgebra,
    s: &Tolerance,
    t: &Tolerance,
    delta: &Congruence,
    bounds: &Bounds,
) -> Result<CentralityCertificate> {
    check_same_size(alg, &[s.size(), t.size(), delta.size()])?;
    let columns: Vec<[usize; 4]> = t
        .relation()
        .pairs()
        .into_iter()
        .map(|(u, v)| [u, v, u, v])
        .collect();
    let key = |&[p, q, r, s]: &[usize; 4]| (r, s, std::cmp::Reverse((p, q)));
    let mut best: Option<[usize; 4]> = None;
    for (a, b) in s.relation().pairs() {
        if a == b {
            // (a,a,a,a) is already a column; nothing beyond M(0,T) arises.
            continue;
        }
        let mut set: BTreeSet<[usize; 4]> = columns.iter().copied().collect();
        set.insert([a, a, b, b]);
        saturate(alg, &mut set, bounds.max_closure)?;
        let found = set
            .iter()
            .filter(|m| delta.contains(m[0], m[1]) && !delta.contains(m[2], m[3]))
            .min_by_key(|m| key(m));
        if let Some(&w) = found {
            best = Some(best.map_or(w, |b| if key(&w) < key(&b) { w } else { b }));
        }
    }
    Ok(CentralityCertificate::from_witness(best))
}

/// Round-based saturation: each round applies every operation to every
/// argument tuple that uses at least one vector found in the previous round.
fn saturate(alg: &FiniteAlgebra, set: &mut BTreeSet<[usize; 4]>, limit: usize) -> Result<()> {
    let mut fresh: BTreeSet<[usize; 4]> = set.clone();
    while !fresh.is_empty() {
        let all: Vec<[usize; 4]> = set.iter().copied().collect();
        let mut found = BTreeSet::new();
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            if k == 0 {
                continue;
            }
            let count = all.len().checked_pow(k as u32).unwrap_or(usize::MAX);
            let mut picks = vec![0usize; k];
            let mut args = vec![0usize; k];
            for _ in 0..count {
                if picks.iter().any(|&p| fresh.contains(&all[p])) {
                    let mut out = [0usize; 4];
                    for (j, slot) in out.iter_mut().enumerate() {
                        for (arg, &p) in args.iter_mut().zip(&picks) {
                            *arg = all[p][j];
                        }
                        *slot = alg.apply(oi, &args);
                    }
                    if !set.contains(&out) {
                        found.insert(out);
                    }
                }
                for p in picks.iter_mut().rev() {
                    *p += 1;
                    if *p < all.len() {
                        break;
                    }
                    *p = 0;
                }
            }
        }
        set.extend(found.iter().copied());
        if set.len() > limit {
            return Err(Error::exhausted("polynomial scan matrix set", limit));
        }
        fresh = found;
    }
    Ok(())
}
