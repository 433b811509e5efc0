//! Algebra corpora: seeded random algebras and exhaustive enumerations of small unary algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::FiniteAlgebra;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CorpusConfig {
    pub count: usize,
    pub seed: u64,
    pub min_size: usize,
    pub max_size: usize,
    pub max_ops: usize,
    pub max_arity: usize,
}

impl CorpusConfig {
    pub fn new(count: usize, seed: u64, max_size: usize) -> Self {
        CorpusConfig {
            count,
            seed,
            min_size: 2,
            max_size,
            max_ops: 3,
            max_arity: 2,
        }
    }
}

/// Uniformly random algebras: size in `min_size..=max_size`, 1 to `max_ops`
/// operations, each of arity `0..=max_arity`, every table entry uniform.
pub fn random_corpus(cfg: &CorpusConfig) -> Vec<FiniteAlgebra> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|i| random_algebra(&mut rng, cfg, format!("rand-{}-{i}", cfg.seed)))
        .collect()
}

pub fn random_algebra(rng: &mut impl Rng, cfg: &CorpusConfig, name: String) -> FiniteAlgebra {
    let n = rng.gen_range(cfg.min_size..=cfg.max_size.max(cfg.min_size));
    let k = rng.gen_range(1..=cfg.max_ops.max(1));
    let ops = (0..k)
        .map(|j| {
            let arity = rng.gen_range(0..=cfg.max_arity);
            let len = n.pow(arity as u32);
            let table = (0..len).map(|_| rng.gen_range(0..n)).collect();
            (format!("f{j}"), arity, table)
        })
        .collect();
    FiniteAlgebra::new(name, n, ops).expect("generated tables are well formed")
}

/// Every algebra with universe `1..=max_size` and at most `max_ops` unary
/// operations, each operation list counted once up to reordering.
///
/// Order: by size, then number of operations, then tables lexicographically.
pub fn unary_algebras(max_size: usize, max_ops: usize) -> impl Iterator<Item = FiniteAlgebra> {
    (1..=max_size).flat_map(move |n| {
        (0..=max_ops).flat_map(move |k| {
            let per_table = n.pow(n as u32);
            MultisetIter::new(per_table, k).map(move |codes| {
                let ops = codes
                    .iter()
                    .enumerate()
                    .map(|(j, &code)| (format!("f{j}"), 1, decode_map(n, code)))
                    .collect();
                let label = codes
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(".");
                FiniteAlgebra::new(format!("unary-{n}-[{label}]"), n, ops)
                    .expect("enumerated tables are well formed")
            })
        })
    })
}

/// Number of algebras [`unary_algebras`] yields.
pub fn unary_algebra_count(max_size: usize, max_ops: usize) -> usize {
    let mut total = 0;
    for n in 1..=max_size {
        let m = n.pow(n as u32);
        for k in 0..=max_ops {
            total += binomial(m + k - 1, k);
        }
    }
    total
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Table of the map whose base-`n` digits (most significant first) are `code`.
fn decode_map(n: usize, mut code: usize) -> Vec<usize> {
    let mut table = vec![0; n];
    for slot in table.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    table
}

/// Nondecreasing `k`-tuples over `0..m`.
struct MultisetIter {
    m: usize,
    cur: Option<Vec<usize>>,
}

impl MultisetIter {
    fn new(m: usize, k: usize) -> Self {
        MultisetIter {
            m,
            cur: if k > 0 && m == 0 {
                None
            } else {
                Some(vec![0; k])
            },
        }
    }
}

impl Iterator for MultisetIter {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if cur[i] + 1 < self.m {
                let v = cur[i] + 1;
                for x in &mut cur[i..] {
                    *x = v;
                }
                break;
            }
        }
        Some(out)
    }
}
