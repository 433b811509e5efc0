//! Small named algebras used by tests, examples and the CLI.

use crate::algebra::FiniteAlgebra;

fn table2(n: usize, f: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    (0..n * n).map(|i| f(i / n, i % n)).collect()
}

/// `Z_n` in the signature `(+, -, 0)`.
pub fn cyclic_group(n: usize) -> FiniteAlgebra {
    FiniteAlgebra::new(
        format!("Z{n}"),
        n,
        vec![
            ("+".into(), 2, table2(n, |a, b| (a + b) % n)),
            ("-".into(), 1, (0..n).map(|a| (n - a) % n).collect()),
            ("0".into(), 0, vec![0]),
        ],
    )
    .expect("valid group tables")
}

pub fn z2() -> FiniteAlgebra {
    cyclic_group(2)
}

pub fn z4() -> FiniteAlgebra {
    cyclic_group(4)
}

/// Permutations of `{0,1,2}` listed lexicographically, so the identity is 0 and
/// the alternating subgroup is `{0, 3, 4}`.
pub fn s3_elements() -> Vec<[usize; 3]> {
    vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

/// The symmetric group on three letters in the signature `(*, inv, e)`.
pub fn s3() -> FiniteAlgebra {
    let perms = s3_elements();
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let mul = table2(6, |a, b| {
        let (p, q) = (perms[a], perms[b]);
        index([p[q[0]], p[q[1]], p[q[2]]])
    });
    let inv = (0..6)
        .map(|a| {
            let p = perms[a];
            let mut r = [0; 3];
            for i in 0..3 {
                r[p[i]] = i;
            }
            index(r)
        })
        .collect();
    FiniteAlgebra::new(
        "S3",
        6,
        vec![
            ("*".into(), 2, mul),
            ("inv".into(), 1, inv),
            ("e".into(), 0, vec![0]),
        ],
    )
    .expect("valid group tables")
}

/// The chain `0 < 1 < .. < n-1` as a meet-semilattice.
pub fn meet_semilattice(n: usize) -> FiniteAlgebra {
    FiniteAlgebra::new(
        format!("SL{n}"),
        n,
        vec![("meet".into(), 2, table2(n, |a, b| a.min(b)))],
    )
    .expect("valid semilattice table")
}

/// The two-element lattice `({0,1}; ∧, ∨)`.
pub fn lattice2() -> FiniteAlgebra {
    FiniteAlgebra::new(
        "L2",
        2,
        vec![
            ("meet".into(), 2, table2(2, |a, b| a.min(b))),
            ("join".into(), 2, table2(2, |a, b| a.max(b))),
        ],
    )
    .expect("valid lattice tables")
}

/// An `n`-element set with no operations.
pub fn pure_set(n: usize) -> FiniteAlgebra {
    FiniteAlgebra::new(format!("set{n}"), n, Vec::new()).expect("valid set")
}

/// Looks up a fixture by name (`z2`, `z4`, `zN`, `s3`, `sl2`, `l2`, `setN`, ...).
pub fn by_name(name: &str) -> Option<FiniteAlgebra> {
    let lower = name.to_ascii_lowercase();
    let num = |prefix: &str| {
        lower
            .strip_prefix(prefix)
            .and_then(|d| d.parse::<usize>().ok())
    };
    match lower.as_str() {
        "s3" => Some(s3()),
        "l2" | "lattice2" => Some(lattice2()),
        _ => {
            if let Some(n) = num("z").filter(|&n| (1..=64).contains(&n)) {
                Some(cyclic_group(n))
            } else if let Some(n) = num("sl").filter(|&n| (1..=64).contains(&n)) {
                Some(meet_semilattice(n))
            } else {
                num("set").filter(|&n| (1..=64).contains(&n)).map(pure_set)
            }
        }
    }
}
