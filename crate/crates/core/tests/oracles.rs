//! Library results against the brute-force oracles in `common`.

mod common;

use std::collections::BTreeSet;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uacomm::centrality::{centralizes_by_polynomial_scan, Centralizer};
use uacomm::conlat::{all_pentagons, congruence_lattice};
use uacomm::corpus::{random_corpus, unary_algebras, CorpusConfig};
use uacomm::relations::enumerate_tolerances;
use uacomm::termsearch::{solve_term_existence, verify_term, Outcome, TermConstraintSystem};
use uacomm::{eval_term, fixtures, Bounds, Congruence, FiniteAlgebra};

fn small_algebras() -> Vec<FiniteAlgebra> {
    let mut out = random_corpus(&CorpusConfig {
        count: 150,
        seed: 99,
        min_size: 1,
        max_size: 4,
        max_ops: 3,
        max_arity: 2,
    });
    out.extend(unary_algebras(3, 1));
    out.extend([
        fixtures::z4(),
        fixtures::s3(),
        fixtures::lattice2(),
        fixtures::meet_semilattice(3),
        fixtures::pure_set(4),
    ]);
    out
}

fn labels(c: &Congruence) -> Vec<usize> {
    relabel(&c.block_index())
}

#[test]
fn congruence_lattice_equals_partition_filter() {
    for alg in small_algebras() {
        let l = congruence_lattice(&alg, &Bounds::default()).unwrap();
        let got: BTreeSet<Vec<usize>> = l.congruences().iter().map(labels).collect();
        let want: BTreeSet<Vec<usize>> = brute_congruences(&alg).into_iter().collect();
        assert_eq!(got, want, "{}", alg.to_json());
        assert_eq!(got.len(), l.len());
        for i in 0..l.len() {
            for j in 0..l.len() {
                let (a, b) = (labels(l.get(i)), labels(l.get(j)));
                assert_eq!(labels(l.get(l.meet(i, j))), brute_meet(&a, &b));
                assert_eq!(labels(l.get(l.join(i, j))), brute_join(&a, &b));
                assert_eq!(l.leq(i, j), leq(&a, &b));
            }
        }
    }
}

#[test]
fn tolerance_enumeration_equals_filter() {
    for alg in small_algebras() {
        let got: BTreeSet<BTreeSet<(usize, usize)>> =
            enumerate_tolerances(&alg, &Bounds::default())
                .unwrap()
                .iter()
                .map(|t| t.relation().pairs().into_iter().collect())
                .collect();
        let want: BTreeSet<_> = brute_tolerances(&alg).into_iter().collect();
        assert_eq!(got, want, "{}", alg.to_json());
    }
}

#[test]
fn centralizer_equals_naive_matrix_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bounds = Bounds::default();
    for alg in small_algebras().into_iter().filter(|a| a.size() <= 4) {
        let tols = enumerate_tolerances(&alg, &bounds).unwrap();
        let cons = congruence_lattice(&alg, &bounds).unwrap();
        let cz = Centralizer::new(&alg, &bounds);
        for _ in 0..6 {
            let s = &tols[rng.gen_range(0..tols.len())];
            let t = &tols[rng.gen_range(0..tols.len())];
            let d = cons.get(rng.gen_range(0..cons.len()));
            let sp: BTreeSet<_> = s.relation().pairs().into_iter().collect();
            let tp: BTreeSet<_> = t.relation().pairs().into_iter().collect();
            let want = brute_centralizes(&alg, &sp, &tp, &labels(d));
            let cert = cz.centralizes(s, t, d).unwrap();
            assert_eq!(cert.holds, want, "{}", alg.to_json());
            let scan = centralizes_by_polynomial_scan(&alg, s, t, d, &bounds).unwrap();
            assert_eq!(scan.holds, want, "{}", alg.to_json());

            let mut gens: Vec<Vec<usize>> = sp.iter().map(|&(a, b)| vec![a, a, b, b]).collect();
            gens.extend(tp.iter().map(|&(u, v)| vec![u, v, u, v]));
            let naive = naive_closure(&alg, 4, &gens);
            let set = cz.matrix_set(s.relation(), t.relation()).unwrap();
            let lib: BTreeSet<Vec<usize>> = set.iter().map(|m| m.to_vec()).collect();
            assert_eq!(lib, naive);
            let dl = labels(d);
            for m in cert.witness.iter().chain(&scan.witness) {
                assert!(
                    naive.contains(m.as_slice()) && dl[m[0]] == dl[m[1]] && dl[m[2]] != dl[m[3]]
                );
            }
        }
    }
}

#[test]
fn pentagons_equal_five_element_enumeration() {
    let mut with_pentagons = 0;
    for alg in unary_algebras(4, 1).chain(small_algebras()) {
        let l = congruence_lattice(&alg, &Bounds::default()).unwrap();
        let got: BTreeSet<[Labels; 5]> = all_pentagons(&l)
            .iter()
            .map(|p| {
                assert!(p.is_valid(&l));
                [p.bottom, p.beta, p.delta, p.theta, p.alpha].map(|i| labels(l.get(i)))
            })
            .collect();
        let want = brute_pentagons(&brute_congruences(&alg));
        assert_eq!(got, want, "{}", alg.to_json());
        with_pentagons += usize::from(!got.is_empty());
    }
    assert!(with_pentagons > 0);
}

fn random_two_element_algebra(rng: &mut ChaCha8Rng, i: usize) -> FiniteAlgebra {
    let ops = (0..rng.gen_range(1..=2))
        .map(|j| {
            let arity = rng.gen_range(1..=3);
            let table = (0..1 << arity).map(|_| rng.gen_range(0..2)).collect();
            (format!("g{j}"), arity, table)
        })
        .collect();
    FiniteAlgebra::new(format!("two-{i}"), 2, ops).unwrap()
}

/// Whether a `k`-ary operation table (first argument most significant) satisfies `cs`.
fn satisfies(table: &[usize], cs: &TermConstraintSystem) -> bool {
    let at = |row: &[usize]| table[row.iter().fold(0, |acc, &x| acc * 2 + x)];
    cs.fixed_rows.iter().all(|(i, o)| at(i) == *o)
        && cs.equal_rows.iter().all(|(l, r)| at(l) == at(r))
}

#[test]
fn term_existence_equals_clone_enumeration_on_two_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut found = 0;
    let mut none = 0;
    for i in 0..300 {
        let alg = random_two_element_algebra(&mut rng, i);
        let k = rng.gen_range(1..=3);
        let mut cs = TermConstraintSystem::new(k);
        let row =
            |rng: &mut ChaCha8Rng| (0..k).map(|_| rng.gen_range(0..2)).collect::<Vec<usize>>();
        for _ in 0..rng.gen_range(0..=3) {
            let r = row(&mut rng);
            cs.fix(r, rng.gen_range(0..2));
        }
        for _ in 0..rng.gen_range(0..=2) {
            let (l, r) = (row(&mut rng), row(&mut rng));
            cs.equate(l, r);
        }
        if cs.is_empty() {
            cs = TermConstraintSystem::unconstrained(k);
        }
        let clone = term_operations(&alg, k);
        let exists = clone.iter().any(|t| satisfies(t, &cs));
        let w = solve_term_existence(&alg, &cs, 1 << 16).unwrap();
        match w.outcome {
            Outcome::Found => {
                assert!(exists, "{}", alg.to_json());
                let t = w.term.unwrap();
                assert!(verify_term(&alg, &t, &cs).unwrap());
                let table: Vec<usize> = (0..1usize << k)
                    .map(|c| {
                        let args: Vec<usize> = (0..k).map(|j| c >> (k - 1 - j) & 1).collect();
                        eval_term(&alg, &t, &args).unwrap()
                    })
                    .collect();
                assert!(clone.contains(&table));
                found += 1;
            }
            Outcome::None => {
                assert!(!exists, "{} {cs:?}", alg.to_json());
                none += 1;
            }
            Outcome::ResourceExhausted => panic!("budget too small for a 2-element algebra"),
        }
    }
    assert!(found > 20 && none > 20, "found {found}, none {none}");
}

#[test]
fn commutators_on_fixtures_equal_brute_force() {
    let bounds = Bounds::default();
    for alg in [
        fixtures::z4(),
        fixtures::s3(),
        fixtures::lattice2(),
        fixtures::meet_semilattice(3),
        fixtures::cyclic_group(6),
    ] {
        let cons = brute_congruences(&alg);
        let cz = Centralizer::new(&alg, &bounds);
        for a in &cons {
            for b in &cons {
                let (ap, bp) = (pairs_of(a), pairs_of(b));
                let ok: Vec<&Vec<usize>> = cons
                    .iter()
                    .filter(|d| brute_centralizes(&alg, &ap, &bp, d))
                    .collect();
                let got = cz
                    .commutator(&Congruence::from_labels(a), &Congruence::from_labels(b))
                    .unwrap();
                assert_eq!(Some(labels(&got)), least(&ok), "{} {a:?} {b:?}", alg.name());
            }
        }
    }
}
