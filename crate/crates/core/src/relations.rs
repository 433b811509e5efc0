//! Binary relations, tolerances and congruences on a finite universe.
//!
//! General relations are row-major bit matrices. Congruences are partitions
//! stored as canonical root arrays (each element points at the least element
//! of its block). Pair tests go through the bit matrix, lattice operations
//! through the partition; explicit converters connect the two.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::closure::Subpower;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryRelation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for BinaryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryRelation")
            .field("n", &self.n)
            .field("pairs", &self.pairs())
            .finish()
    }
}

impl BinaryRelation {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BinaryRelation {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn equality(n: usize) -> Self {
        let mut r = Self::empty(n);
        for a in 0..n {
            r.insert(a, a);
        }
        r
    }

    pub fn full(n: usize) -> Self {
        let mut r = Self::empty(n);
        for a in 0..n {
            for b in 0..n {
                r.insert(a, b);
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut r = Self::empty(n);
        for &(a, b) in pairs {
            for e in [a, b] {
                if e >= n {
                    return Err(Error::ElementOutOfRange {
                        element: e,
                        size: n,
                    });
                }
            }
            r.insert(a, b);
        }
        Ok(r)
    }

    /// The reflexive symmetric closure of `pairs`, with no compatibility closure.
    pub fn reflexive_symmetric(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut r = Self::from_pairs(n, pairs)?;
        for a in 0..n {
            r.insert(a, a);
        }
        Ok(r.union(&r.inverse()))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] &= !(1 << (b % 64));
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn inverse(&self) -> Self {
        let mut r = Self::empty(self.n);
        for (a, b) in self.pairs() {
            r.insert(b, a);
        }
        r
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// `self ∘ other`: pairs `(a, c)` with `a self b` and `b other c`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut r = Self::empty(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    let (dst, src) = (a * self.words, other.row(b));
                    for (w, &s) in src.iter().enumerate() {
                        r.bits[dst + w] |= s;
                    }
                }
            }
        }
        Ok(r)
    }

    /// Panics on size mismatch; use between relations on the same universe.
    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "relations on different universes");
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a & b)
            .collect();
        BinaryRelation { bits, ..*self }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "relations on different universes");
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a | b)
            .collect();
        BinaryRelation { bits, ..*self }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.contains(a, a))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().into_iter().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        self.compose(self)
            .map(|c| c.is_subset(self))
            .unwrap_or(false)
    }

    /// Describes the first tuple of related arguments whose images are unrelated.
    ///
    /// Cost is `O(|R|^k)` per operation of arity `k`.
    pub fn compatibility_failure(&self, alg: &FiniteAlgebra) -> Option<String> {
        if alg.size() != self.n {
            return Some(format!(
                "relation on {} elements, algebra on {}",
                self.n,
                alg.size()
            ));
        }
        let pairs = self.pairs();
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            if k == 0 {
                let c = alg.apply(oi, &[]);
                if !self.contains(c, c) {
                    return Some(format!(
                        "constant `{}` = {c} is not self-related",
                        op.symbol()
                    ));
                }
                continue;
            }
            let mut idx = vec![0usize; k];
            let mut left = vec![0usize; k];
            let mut right = vec![0usize; k];
            'tuples: loop {
                for (i, &p) in idx.iter().enumerate() {
                    left[i] = pairs[p].0;
                    right[i] = pairs[p].1;
                }
                let (u, v) = (alg.apply(oi, &left), alg.apply(oi, &right));
                if !self.contains(u, v) {
                    return Some(format!(
                        "`{}`{:?} = {u} and `{}`{:?} = {v} are unrelated",
                        op.symbol(),
                        left,
                        op.symbol(),
                        right
                    ));
                }
                for slot in idx.iter_mut().rev() {
                    *slot += 1;
                    if *slot < pairs.len() {
                        continue 'tuples;
                    }
                    *slot = 0;
                }
                break;
            }
        }
        None
    }

    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        self.compatibility_failure(alg).is_none()
    }
}

/// A reflexive, symmetric, compatible relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tolerance(BinaryRelation);

impl Tolerance {
    pub fn new(alg: &FiniteAlgebra, rel: BinaryRelation) -> Result<Self> {
        if rel.size() != alg.size() {
            return Err(Error::SizeMismatch {
                left: rel.size(),
                right: alg.size(),
            });
        }
        if !rel.is_reflexive() {
            return Err(Error::NotTolerance("not reflexive".into()));
        }
        if !rel.is_symmetric() {
            return Err(Error::NotTolerance("not symmetric".into()));
        }
        if let Some(reason) = rel.compatibility_failure(alg) {
            return Err(Error::NotTolerance(reason));
        }
        Ok(Tolerance(rel))
    }

    /// Wraps a relation already known to be a tolerance.
    pub(crate) fn trusted(rel: BinaryRelation) -> Self {
        debug_assert!(rel.is_reflexive() && rel.is_symmetric());
        Tolerance(rel)
    }

    pub fn equality(n: usize) -> Self {
        Tolerance(BinaryRelation::equality(n))
    }

    pub fn full(n: usize) -> Self {
        Tolerance(BinaryRelation::full(n))
    }

    pub fn relation(&self) -> &BinaryRelation {
        &self.0
    }

    pub fn into_relation(self) -> BinaryRelation {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.0.contains(a, b)
    }

    pub fn is_transitive(&self) -> bool {
        self.0.is_transitive()
    }

    /// The partition this tolerance induces when it is transitive.
    pub fn as_congruence(&self) -> Option<Congruence> {
        if self.is_transitive() {
            Congruence::from_relation(&self.0).ok()
        } else {
            None
        }
    }

    /// Pairs `(a, b)` with `a < b`, the off-diagonal content.
    pub fn proper_pairs(&self) -> Vec<(usize, usize)> {
        self.0.pairs().into_iter().filter(|&(a, b)| a < b).collect()
    }
}

/// A compatible equivalence relation as a canonical root array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    roots: Vec<usize>,
}

impl Congruence {
    pub fn equality(n: usize) -> Self {
        Congruence {
            roots: (0..n).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Congruence { roots: vec![0; n] }
    }

    /// Canonicalizes an arbitrary labelling: elements with equal labels share a block.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first: std::collections::HashMap<usize, usize> = Default::default();
        let roots = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(*l).or_insert(i))
            .collect();
        Congruence { roots }
    }

    /// From a block list that must partition `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut label = vec![usize::MAX; n];
        for (bi, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Invalid(format!("block {bi} is empty")));
            }
            for &e in block {
                if e >= n {
                    return Err(Error::ElementOutOfRange {
                        element: e,
                        size: n,
                    });
                }
                if label[e] != usize::MAX {
                    return Err(Error::Invalid(format!("element {e} appears in two blocks")));
                }
                label[e] = bi;
            }
        }
        if let Some(missing) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Invalid(format!("element {missing} is in no block")));
        }
        Ok(Self::from_labels(&label))
    }

    pub fn from_relation(rel: &BinaryRelation) -> Result<Self> {
        if !rel.is_reflexive() || !rel.is_symmetric() || !rel.is_transitive() {
            return Err(Error::NotCongruence(
                "relation is not an equivalence".into(),
            ));
        }
        let n = rel.size();
        let roots = (0..n)
            .map(|a| (0..=a).find(|&b| rel.contains(a, b)).unwrap_or(a))
            .collect();
        Ok(Congruence { roots })
    }

    pub fn size(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.roots[a] == self.roots[b]
    }

    pub fn to_relation(&self) -> BinaryRelation {
        let n = self.size();
        let mut r = BinaryRelation::empty(n);
        for a in 0..n {
            for b in 0..n {
                if self.contains(a, b) {
                    r.insert(a, b);
                }
            }
        }
        r
    }

    /// Least elements of the blocks, ascending.
    pub fn representatives(&self) -> Vec<usize> {
        (0..self.size()).filter(|&a| self.roots[a] == a).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.representatives().len()
    }

    /// Block index of every element, blocks numbered by least element.
    pub fn block_index(&self) -> Vec<usize> {
        let mut index = vec![0; self.size()];
        let mut next = 0;
        for a in 0..self.size() {
            if self.roots[a] == a {
                index[a] = next;
                next += 1;
            } else {
                index[a] = index[self.roots[a]];
            }
        }
        index
    }

    /// Blocks sorted by least element, each block ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let idx = self.block_index();
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (a, &b) in idx.iter().enumerate() {
            blocks[b].push(a);
        }
        blocks
    }

    pub fn is_equality(&self) -> bool {
        self.roots.iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn is_full(&self) -> bool {
        self.roots.iter().all(|&r| r == 0)
    }

    pub fn leq(&self, other: &Self) -> bool {
        (0..self.size()).all(|a| other.contains(a, self.roots[a]))
    }

    pub fn meet(&self, other: &Self) -> Self {
        let labels: Vec<usize> = (0..self.size())
            .map(|a| self.roots[a] * self.size() + other.roots[a])
            .collect();
        Self::from_labels(&labels)
    }

    pub fn join(&self, other: &Self) -> Self {
        let mut uf = UnionFind::new(self.size());
        for a in 0..self.size() {
            uf.union(a, self.roots[a]);
            uf.union(a, other.roots[a]);
        }
        uf.into_congruence()
    }

    /// The least translation-closed violation, if the partition is not compatible.
    ///
    /// For equivalence relations, closure under basic translations (all but one
    /// argument frozen) is equivalent to compatibility.
    pub fn compatibility_failure(&self, alg: &FiniteAlgebra) -> Option<String> {
        let n = self.size();
        if alg.size() != n {
            return Some(format!(
                "partition of {n} elements, algebra on {}",
                alg.size()
            ));
        }
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            if k == 0 {
                continue;
            }
            let mut args = vec![0usize; k];
            for pos in 0..k {
                let others = n.pow(k as u32 - 1);
                for code in 0..others {
                    let mut rest = code;
                    for (i, slot) in args.iter_mut().enumerate() {
                        if i != pos {
                            *slot = rest % n;
                            rest /= n;
                        }
                    }
                    for a in 0..n {
                        let r = self.roots[a];
                        if r == a {
                            continue;
                        }
                        args[pos] = a;
                        let u = alg.apply(oi, &args);
                        args[pos] = r;
                        let v = alg.apply(oi, &args);
                        if !self.contains(u, v) {
                            return Some(format!(
                                "`{}` separates {a} and {r} at argument {pos}",
                                op.symbol()
                            ));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        self.compatibility_failure(alg).is_none()
    }

    pub fn as_tolerance(&self) -> Tolerance {
        Tolerance::trusted(self.to_relation())
    }

    /// Block notation, e.g. `0,2|1,3`.
    pub fn label(&self) -> String {
        self.blocks()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Union-find with path halving; `into_congruence` canonicalizes to least roots.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Returns `true` if two blocks were merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Keep the smaller index as root so roots stay canonical.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub(crate) fn into_congruence(mut self) -> Congruence {
        let n = self.parent.len();
        let roots = (0..n).map(|a| self.find(a)).collect();
        Congruence { roots }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Tolerance,
    Congruence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Tolerance(Tolerance),
    Congruence(Congruence),
}

impl Generated {
    pub fn relation(&self) -> BinaryRelation {
        match self {
            Generated::Tolerance(t) => t.relation().clone(),
            Generated::Congruence(c) => c.to_relation(),
        }
    }
}

/// The least tolerance or congruence of `alg` containing `pairs`.
pub fn generate_relation(
    alg: &FiniteAlgebra,
    pairs: &[(usize, usize)],
    kind: RelationKind,
    bounds: &Bounds,
) -> Result<Generated> {
    Ok(match kind {
        RelationKind::Tolerance => Generated::Tolerance(generate_tolerance(alg, pairs, bounds)?),
        RelationKind::Congruence => Generated::Congruence(generate_congruence(alg, pairs)?),
    })
}

/// The least tolerance containing `pairs`: the subuniverse of `A²` generated by the
/// diagonal, the pairs and their reverses.
pub fn generate_tolerance(
    alg: &FiniteAlgebra,
    pairs: &[(usize, usize)],
    bounds: &Bounds,
) -> Result<Tolerance> {
    let n = alg.size();
    let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    alg.check_elements(&flat)?;
    let gens = (0..n)
        .map(|a| vec![a, a])
        .chain(pairs.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]));
    let sp = Subpower::generate(alg, 2, gens, bounds, false, |_| false)?;
    let mut rel = BinaryRelation::empty(n);
    for v in sp.iter() {
        rel.insert(v[0] as usize, v[1] as usize);
    }
    Ok(Tolerance::trusted(rel))
}

/// The least congruence containing `pairs` (principal congruence when there is one pair).
///
/// Worklist over merged pairs: every merge is pushed through all basic translations
/// until no new merge happens.
pub fn generate_congruence(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Result<Congruence> {
    let n = alg.size();
    let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    alg.check_elements(&flat)?;
    let mut uf = UnionFind::new(n);
    let mut work: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in pairs {
        if uf.union(a, b) {
            work.push((a, b));
        }
    }
    let mut args = Vec::new();
    while let Some((a, b)) = work.pop() {
        for (oi, op) in alg.ops().iter().enumerate() {
            let k = op.arity();
            if k == 0 {
                continue;
            }
            args.clear();
            args.resize(k, 0);
            let others = n.pow(k as u32 - 1);
            for pos in 0..k {
                for code in 0..others {
                    let mut rest = code;
                    for (i, slot) in args.iter_mut().enumerate() {
                        if i != pos {
                            *slot = rest % n;
                            rest /= n;
                        }
                    }
                    args[pos] = a;
                    let u = alg.apply(oi, &args);
                    args[pos] = b;
                    let v = alg.apply(oi, &args);
                    if uf.union(u, v) {
                        work.push((u, v));
                    }
                }
            }
        }
    }
    Ok(uf.into_congruence())
}

/// The relational composition `δ ∘ T ∘ δ`, a tolerance whenever `δ` is a congruence.
pub fn sandwich(delta: &Congruence, t: &Tolerance) -> Result<Tolerance> {
    let d = delta.to_relation();
    let r = d.compose(t.relation())?.compose(&d)?;
    if !r.is_reflexive() || !r.is_symmetric() {
        return Err(Error::NotTolerance(
            "δ∘T∘δ is not reflexive and symmetric".into(),
        ));
    }
    Ok(Tolerance::trusted(r))
}

/// The transitive closure of a tolerance, which is the congruence it generates.
pub fn transitive_closure(t: &Tolerance) -> Congruence {
    let mut uf = UnionFind::new(t.size());
    for (a, b) in t.relation().pairs() {
        uf.union(a, b);
    }
    uf.into_congruence()
}

/// `R ∩ B²` re-indexed along the sorted order of `B`, with the index map.
pub fn restrict(rel: &BinaryRelation, set: &[usize]) -> Result<(BinaryRelation, Vec<usize>)> {
    let mut elems = set.to_vec();
    elems.sort_unstable();
    elems.dedup();
    if elems.is_empty() {
        return Err(Error::Invalid("cannot restrict to the empty set".into()));
    }
    if let Some(&e) = elems.iter().find(|&&e| e >= rel.size()) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: rel.size(),
        });
    }
    let mut out = BinaryRelation::empty(elems.len());
    for (i, &a) in elems.iter().enumerate() {
        for (j, &b) in elems.iter().enumerate() {
            if rel.contains(a, b) {
                out.insert(i, j);
            }
        }
    }
    Ok((out, elems))
}

/// Extends `seed` greedily, in ascending element order, to a set `B` maximal with `B² ⊆ T`.
pub fn maximal_block(t: &Tolerance, seed: &[usize]) -> Result<Vec<usize>> {
    let n = t.size();
    if let Some(&e) = seed.iter().find(|&&e| e >= n) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: n,
        });
    }
    for &a in seed {
        for &b in seed {
            if !t.contains(a, b) {
                return Err(Error::Invalid(format!(
                    "seed elements {a} and {b} are not related by the tolerance"
                )));
            }
        }
    }
    let mut block: Vec<usize> = seed.to_vec();
    block.sort_unstable();
    block.dedup();
    for c in 0..n {
        if !block.contains(&c) && block.iter().all(|&b| t.contains(b, c)) {
            block.push(c);
        }
    }
    block.sort_unstable();
    debug_assert!((0..n)
        .filter(|c| !block.contains(c))
        .all(|c| block.iter().any(|&b| !t.contains(b, c))));
    Ok(block)
}

/// All tolerances of `alg`, by filtering every reflexive symmetric relation.
///
/// Candidates are ordered by the bitmask of their off-diagonal pairs `(a, b)`,
/// `a < b` in lexicographic order, so the output order is fixed.
pub fn enumerate_tolerances(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<Vec<Tolerance>> {
    let n = alg.size();
    if n > bounds.max_tolerance_size {
        return Err(Error::exhausted(
            "universe size for tolerance enumeration",
            bounds.max_tolerance_size,
        ));
    }
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << slots.len()) {
        let mut rel = BinaryRelation::equality(n);
        for (i, &(a, b)) in slots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rel.insert(a, b);
                rel.insert(b, a);
            }
        }
        if rel.is_compatible(alg) {
            out.push(Tolerance(rel));
        }
    }
    Ok(out)
}
