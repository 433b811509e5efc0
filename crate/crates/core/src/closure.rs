//! Subuniverse generation in finite powers `A^k`.
//!
//! Vectors are discovered in a fixed order: generators first, then constants,
//! then the results of applying every operation to every argument tuple that
//! involves the element currently being processed. Processing follows
//! discovery order, so the closure is breadth-first and fully deterministic.
//! Every vector can remember how it was produced, which turns each member
//! into a term over the generators.

use std::hash::BuildHasher;

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;

use crate::algebra::{FiniteAlgebra, Term};
use crate::bounds::ClosureLimit;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Origin {
    Generator(usize),
    Apply { op: usize, args: Vec<u32> },
    Untracked,
}

struct OpTable {
    arity: usize,
    table: Vec<u8>,
}

/// A closed (or early-stopped) subset of `A^width`.
pub struct Subpower {
    width: usize,
    data: Vec<u8>,
    origins: Vec<Origin>,
    index: HashTable<u32>,
    hasher: FxBuildHasher,
    stopped_at: Option<usize>,
}

impl Subpower {
    /// Generates the subuniverse of `A^width` spanned by `generators`.
    ///
    /// `stop` is consulted for every newly discovered vector; returning `true`
    /// ends the closure early and [`stopped_at`](Self::stopped_at) reports the
    /// vector. When more than `limit` vectors would be needed the result is
    /// [`Error::ResourceExhausted`], as is running out of operation applications.
    pub fn generate<I, F>(
        alg: &FiniteAlgebra,
        width: usize,
        generators: I,
        limit: impl Into<ClosureLimit>,
        track_origins: bool,
        mut stop: F,
    ) -> Result<Subpower>
    where
        I: IntoIterator<Item = Vec<usize>>,
        F: FnMut(&[u8]) -> bool,
    {
        let ClosureLimit {
            vectors: limit,
            steps: max_steps,
        } = limit.into();
        let mut steps = 0u64;
        let n = alg.size();
        if n > 256 {
            return Err(Error::Invalid(format!(
                "subpower closures need a universe of at most 256 elements, got {n}"
            )));
        }
        let ops: Vec<OpTable> = alg
            .ops()
            .iter()
            .map(|op| OpTable {
                arity: op.arity(),
                table: op.table().iter().map(|&v| v as u8).collect(),
            })
            .collect();

        let mut sp = Subpower {
            width,
            data: Vec::new(),
            origins: Vec::new(),
            index: HashTable::new(),
            hasher: FxBuildHasher,
            stopped_at: None,
        };

        let mut scratch = vec![0u8; width];
        for (g, gen) in generators.into_iter().enumerate() {
            if gen.len() != width {
                return Err(Error::Arity(format!(
                    "generator {g} has {} coordinates, expected {width}",
                    gen.len()
                )));
            }
            if let Some(&bad) = gen.iter().find(|&&x| x >= n) {
                return Err(Error::ElementOutOfRange {
                    element: bad,
                    size: n,
                });
            }
            for (s, &x) in scratch.iter_mut().zip(&gen) {
                *s = x as u8;
            }
            if sp.insert(&scratch, limit)? {
                if track_origins {
                    *sp.origins.last_mut().unwrap() = Origin::Generator(g);
                }
                if stop(&scratch) {
                    sp.stopped_at = Some(sp.len() - 1);
                    return Ok(sp);
                }
            }
        }

        for (oi, op) in ops.iter().enumerate() {
            if op.arity == 0 {
                scratch.iter_mut().for_each(|s| *s = op.table[0]);
                if sp.insert(&scratch, limit)? {
                    if track_origins {
                        *sp.origins.last_mut().unwrap() = Origin::Apply {
                            op: oi,
                            args: Vec::new(),
                        };
                    }
                    if stop(&scratch) {
                        sp.stopped_at = Some(sp.len() - 1);
                        return Ok(sp);
                    }
                }
            }
        }

        let mut current = 0usize;
        let mut args: Vec<u32> = Vec::new();
        while current < sp.len() {
            for (oi, op) in ops.iter().enumerate() {
                if op.arity == 0 {
                    continue;
                }
                let k = op.arity;
                // Every argument tuple over 0..=current whose first occurrence of
                // `current` is at position `first`.
                for first in 0..k {
                    if first > 0 && current == 0 {
                        break;
                    }
                    args.clear();
                    args.resize(k, 0);
                    args[first] = current as u32;
                    loop {
                        steps += 1;
                        if steps > max_steps {
                            return Err(Error::exhausted(
                                "closure operation applications",
                                max_steps as usize,
                            ));
                        }
                        sp.apply_into(op, n, &args, &mut scratch);
                        if sp.insert(&scratch, limit)? {
                            if track_origins {
                                *sp.origins.last_mut().unwrap() = Origin::Apply {
                                    op: oi,
                                    args: args.clone(),
                                };
                            }
                            if stop(&scratch) {
                                sp.stopped_at = Some(sp.len() - 1);
                                return Ok(sp);
                            }
                        }
                        if !advance(&mut args, first, current as u32) {
                            break;
                        }
                    }
                }
            }
            current += 1;
        }
        Ok(sp)
    }

    #[inline]
    fn apply_into(&self, op: &OpTable, n: usize, args: &[u32], out: &mut [u8]) {
        let w = self.width;
        match args.len() {
            1 => {
                let a = &self.data[args[0] as usize * w..][..w];
                for (o, &x) in out.iter_mut().zip(a) {
                    *o = op.table[x as usize];
                }
            }
            2 => {
                let a = &self.data[args[0] as usize * w..][..w];
                let b = &self.data[args[1] as usize * w..][..w];
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = op.table[x as usize * n + y as usize];
                }
            }
            _ => {
                for (j, o) in out.iter_mut().enumerate() {
                    let mut idx = 0usize;
                    for &arg in args {
                        idx = idx * n + self.data[arg as usize * w + j] as usize;
                    }
                    *o = op.table[idx];
                }
            }
        }
    }

    fn hash_of(hasher: &FxBuildHasher, v: &[u8]) -> u64 {
        hasher.hash_one(v)
    }

    /// Returns `true` when `v` was new.
    fn insert(&mut self, v: &[u8], limit: usize) -> Result<bool> {
        let w = self.width;
        let h = Self::hash_of(&self.hasher, v);
        let data = &self.data;
        if self
            .index
            .find(h, |&i| &data[i as usize * w..(i as usize + 1) * w] == v)
            .is_some()
        {
            return Ok(false);
        }
        if self.origins.len() >= limit {
            return Err(Error::exhausted(
                format!("subpower closure in A^{w}"),
                limit,
            ));
        }
        let idx = self.origins.len() as u32;
        self.data.extend_from_slice(v);
        self.origins.push(Origin::Untracked);
        let data = &self.data;
        let hasher = &self.hasher;
        self.index.insert_unique(h, idx, |&i| {
            Self::hash_of(hasher, &data[i as usize * w..(i as usize + 1) * w])
        });
        Ok(true)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[u8] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.len()).map(move |i| self.vector(i))
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let w = self.width;
        let h = Self::hash_of(&self.hasher, v);
        let data = &self.data;
        self.index
            .find(h, |&i| &data[i as usize * w..(i as usize + 1) * w] == v)
            .is_some()
    }

    /// Index of the vector that satisfied the stop predicate, if any.
    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    /// Rebuilds the term producing vector `i`; generator `g` becomes variable `x_g`.
    ///
    /// Returns `None` when origins were not tracked.
    pub fn term(&self, i: usize) -> Option<Term> {
        match &self.origins[i] {
            Origin::Untracked => None,
            Origin::Generator(g) => Some(Term::Var(*g)),
            Origin::Apply { op, args } => {
                let children = args
                    .iter()
                    .map(|&a| self.term(a as usize))
                    .collect::<Option<Vec<_>>>()?;
                Some(Term::Op(*op, children))
            }
        }
    }
}

/// Odometer over tuples where positions before `first` range over `0..cur`,
/// position `first` is pinned to `cur`, and later positions range over `0..=cur`.
#[inline]
fn advance(args: &mut [u32], first: usize, cur: u32) -> bool {
    for pos in (0..args.len()).rev() {
        if pos == first {
            continue;
        }
        let max = if pos < first { cur } else { cur + 1 };
        if args[pos] + 1 < max {
            args[pos] += 1;
            return true;
        }
        args[pos] = 0;
    }
    false
}
