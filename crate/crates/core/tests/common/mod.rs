//! Brute-force oracles shared by the integration tests. None of them call the
//! library's closure, lattice or centralizer code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use uacomm::FiniteAlgebra;

/// Every set partition of `0..n` as a canonical label vector (restricted growth strings).
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max {
            cur.push(l);
            rec(i + 1, n, cur, max.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn apply(alg: &FiniteAlgebra, op: usize, args: &[usize]) -> usize {
    let n = alg.size();
    let idx = args.iter().fold(0, |acc, &a| acc * n + a);
    alg.ops()[op].table()[idx]
}

/// `rel` (as a pair predicate) is preserved by every operation.
pub fn preserves(alg: &FiniteAlgebra, rel: &dyn Fn(usize, usize) -> bool) -> bool {
    let n = alg.size();
    for op in 0..alg.ops().len() {
        let k = alg.ops()[op].arity();
        let all = tuples(n, k);
        for a in &all {
            for b in &all {
                if a.iter().zip(b).all(|(&x, &y)| rel(x, y))
                    && !rel(apply(alg, op, a), apply(alg, op, b))
                {
                    return false;
                }
            }
        }
    }
    true
}

/// Congruences as label vectors, by filtering all partitions.
pub fn brute_congruences(alg: &FiniteAlgebra) -> Vec<Vec<usize>> {
    partitions(alg.size())
        .into_iter()
        .filter(|p| preserves(alg, &|x, y| p[x] == p[y]))
        .collect()
}

/// Tolerances as sets of pairs, by filtering all reflexive symmetric relations.
pub fn brute_tolerances(alg: &FiniteAlgebra) -> Vec<BTreeSet<(usize, usize)>> {
    let n = alg.size();
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << slots.len() {
        let mut rel: BTreeSet<(usize, usize)> = (0..n).map(|a| (a, a)).collect();
        for (i, &(a, b)) in slots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rel.insert((a, b));
                rel.insert((b, a));
            }
        }
        if preserves(alg, &|x, y| rel.contains(&(x, y))) {
            out.push(rel);
        }
    }
    out
}

/// Subuniverse of `A^width` generated by `gens`, by a plain fixpoint.
pub fn naive_closure(
    alg: &FiniteAlgebra,
    width: usize,
    gens: &[Vec<usize>],
) -> BTreeSet<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut push = |v: Vec<usize>, all: &mut Vec<Vec<usize>>| {
        if seen.insert(v.clone()) {
            all.push(v);
        }
    };
    for g in gens {
        assert_eq!(g.len(), width);
        push(g.clone(), &mut all);
    }
    for op in 0..alg.ops().len() {
        if alg.ops()[op].arity() == 0 {
            push(vec![apply(alg, op, &[]); width], &mut all);
        }
    }
    let mut done = 0;
    while done < all.len() {
        let end = all.len();
        for op in 0..alg.ops().len() {
            let k = alg.ops()[op].arity();
            // Argument tuples whose first index from done..end sits at position p.
            for p in 0..k {
                let ranges: Vec<(usize, usize)> = (0..k)
                    .map(|i| match i.cmp(&p) {
                        std::cmp::Ordering::Less => (0, done),
                        std::cmp::Ordering::Equal => (done, end),
                        std::cmp::Ordering::Greater => (0, end),
                    })
                    .collect();
                if ranges.iter().any(|&(lo, hi)| lo >= hi) {
                    continue;
                }
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                let mut args = vec![0; k];
                'tuples: loop {
                    let v: Vec<usize> = (0..width)
                        .map(|j| {
                            for (a, &i) in args.iter_mut().zip(&idx) {
                                *a = all[i][j];
                            }
                            apply(alg, op, &args)
                        })
                        .collect();
                    push(v, &mut all);
                    for pos in (0..k).rev() {
                        idx[pos] += 1;
                        if idx[pos] < ranges[pos].1 {
                            continue 'tuples;
                        }
                        idx[pos] = ranges[pos].0;
                    }
                    break;
                }
            }
        }
        done = end;
    }
    all.into_iter().collect()
}

/// `C(S,T;δ)` by building the matrix set with [`naive_closure`].
pub fn brute_centralizes(
    alg: &FiniteAlgebra,
    s: &BTreeSet<(usize, usize)>,
    t: &BTreeSet<(usize, usize)>,
    delta: &[usize],
) -> bool {
    let mut gens: Vec<Vec<usize>> = s.iter().map(|&(a, b)| vec![a, a, b, b]).collect();
    gens.extend(t.iter().map(|&(u, v)| vec![u, v, u, v]));
    naive_closure(alg, 4, &gens)
        .iter()
        .all(|m| delta[m[0]] != delta[m[1]] || delta[m[2]] == delta[m[3]])
}

pub fn pairs_of(labels: &[usize]) -> BTreeSet<(usize, usize)> {
    let n = labels.len();
    (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| labels[a] == labels[b])
        .collect()
}

pub fn leq(a: &[usize], b: &[usize]) -> bool {
    let n = a.len();
    (0..n).all(|x| (0..n).all(|y| a[x] != a[y] || b[x] == b[y]))
}

/// Least member of `cands` (by refinement), if one exists.
pub fn least(cands: &[&Vec<usize>]) -> Option<Vec<usize>> {
    cands
        .iter()
        .find(|c| cands.iter().all(|d| leq(c, d)))
        .map(|c| (*c).clone())
}

/// Canonical labels of an equivalence given by a pair predicate.
pub fn canonical(n: usize, related: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for a in 0..n {
        if labels[a] == usize::MAX {
            for (b, slot) in labels.iter_mut().enumerate().skip(a) {
                if *slot == usize::MAX && related(a, b) {
                    *slot = next;
                }
            }
            next += 1;
        }
    }
    labels
}

pub fn relabel(labels: &[usize]) -> Vec<usize> {
    canonical(labels.len(), |a, b| labels[a] == labels[b])
}

pub fn transitive_closure(n: usize, rel: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in rel {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    canonical(n, |a, b| a == b || reach[a][b])
}

/// All `k`-ary term operations of `A`, as value tables indexed by `encode(args)`.
pub fn term_operations(alg: &FiniteAlgebra, k: usize) -> BTreeSet<Vec<usize>> {
    let n = alg.size();
    let rows = tuples(n, k);
    let projections: Vec<Vec<usize>> = (0..k)
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect();
    naive_closure(alg, rows.len(), &projections)
}

/// Closure of `rel` under the idempotent term operations, by the identity-tail trick
/// on a naive closure in `A^(width+n)`.
pub fn idempotent_image(alg: &FiniteAlgebra, rel: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let n = alg.size();
    let width = rel[0].len();
    let gens: Vec<Vec<usize>> = rel
        .iter()
        .map(|r| r.iter().copied().chain(0..n).collect())
        .collect();
    naive_closure(alg, width + n, &gens)
        .into_iter()
        .filter(|v| v[width..].iter().enumerate().all(|(i, &x)| x == i))
        .map(|v| v[..width].to_vec())
        .collect()
}

pub type Labels = Vec<usize>;

pub fn brute_meet(a: &[usize], b: &[usize]) -> Labels {
    canonical(a.len(), |x, y| a[x] == a[y] && b[x] == b[y])
}

pub fn brute_join(a: &[usize], b: &[usize]) -> Labels {
    let mut rel = pairs_of(a);
    rel.extend(pairs_of(b));
    transitive_closure(a.len(), &rel)
}

/// Every N5 in Con(A) from all 5-tuples of the partition-filter lattice.
pub fn brute_pentagons(cons: &[Labels]) -> BTreeSet<[Labels; 5]> {
    let m = cons.len();
    let mut out = BTreeSet::new();
    for b in 0..m {
        for t in 0..m {
            for d in 0..m {
                if d == t
                    || !leq(&cons[d], &cons[t])
                    || leq(&cons[b], &cons[t])
                    || leq(&cons[t], &cons[b])
                {
                    continue;
                }
                let bottom = brute_meet(&cons[b], &cons[t]);
                let top = brute_join(&cons[b], &cons[t]);
                if brute_meet(&cons[b], &cons[d]) == bottom && brute_join(&cons[b], &cons[d]) == top
                {
                    let five = [
                        bottom.clone(),
                        cons[b].clone(),
                        cons[d].clone(),
                        cons[t].clone(),
                        top.clone(),
                    ];
                    let distinct: BTreeSet<&Labels> = five.iter().collect();
                    if distinct.len() == 5 {
                        out.insert(five);
                    }
                }
            }
        }
    }
    out
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, std::time::Duration) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Writes straight to stderr so the line shows even when test output is captured.
pub fn report_line(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}
