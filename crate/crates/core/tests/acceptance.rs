//! Acceptance suite. Each test prints one `criterion N ... PASS|FAIL` line.
//!
//! Run with `cargo test -p uacomm --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Duration;

use common::*;
use rand::SeedableRng;
use uacomm::centrality::Centralizer;
use uacomm::conlat::{
    all_pentagons, check_with_lattice, congruence_lattice, find_pentagons, PentagonMode, Property,
};
use uacomm::corpus::{random_corpus, CorpusConfig};
use uacomm::hunt::{hunt, HuntConfig, HuntFinding, HuntTarget};
use uacomm::report::{run_suite, Stopwatch, SuiteConfig};
use uacomm::termsearch::{
    find_maltsev_term, find_weak_difference_term, has_taylor_term, two_element_set, verify_term,
    Outcome, TermConstraintSystem,
};
use uacomm::{eval_term, fixtures, BinaryRelation, Bounds, Congruence, FiniteAlgebra, Tolerance};

const CORPUS_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 200;
const CORPUS_MAX_UNIVERSE: usize = 4;
const INSTANCES_PER_ALGEBRA: usize = 10;
const SUITE_TIME_LIMIT: Duration = Duration::from_secs(5 * 60);
const LEASTNESS_MAX_LATTICE: usize = 64;
const TOLERANCE_MAX_UNIVERSE: usize = 5;
const HUNT_MAX_UNIVERSE: usize = 3;
const HUNT_MAX_OPS: usize = 2;
const HUNT_TIME_LIMIT: Duration = Duration::from_secs(10 * 60);

fn corpus() -> Vec<FiniteAlgebra> {
    random_corpus(&CorpusConfig::new(
        CORPUS_SIZE,
        CORPUS_SEED,
        CORPUS_MAX_UNIVERSE,
    ))
}

fn verdict(n: usize, what: &str, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    report_line(&format!("criterion {n} [{what}]: {status}"));
    for f in failures.iter().take(20) {
        report_line(&format!("    {f}"));
    }
    assert!(
        failures.is_empty(),
        "criterion {n} failed with {} problems",
        failures.len()
    );
}

fn labels(c: &Congruence) -> Vec<usize> {
    relabel(&c.block_index())
}

fn wdt_subcorpus() -> Vec<FiniteAlgebra> {
    corpus()
        .into_iter()
        .filter(|a| {
            find_weak_difference_term(a, &Bounds::default())
                .unwrap()
                .is_found()
        })
        .collect()
}

#[test]
fn criterion_1_clause_suite() {
    let cfg = SuiteConfig {
        corpus: CorpusConfig::new(CORPUS_SIZE, CORPUS_SEED, CORPUS_MAX_UNIVERSE),
        instances: INSTANCES_PER_ALGEBRA,
        consistency: false,
    };
    let (out, elapsed) =
        timed(|| run_suite(&cfg, &Bounds::default(), &mut Stopwatch::new(false)).unwrap());
    let mut failures: Vec<String> = out
        .clauses
        .failures
        .iter()
        .map(|f| {
            format!(
                "clause {}: {} on {} with {:?}",
                f.clause, f.detail, f.algebra, f.instance
            )
        })
        .collect();
    if out.clauses.algebras < CORPUS_SIZE {
        failures.push(format!(
            "only {} algebras ran; skipped {:?}",
            out.clauses.algebras, out.exhausted
        ));
    }
    if out.clauses.instances < CORPUS_SIZE * INSTANCES_PER_ALGEBRA {
        failures.push(format!("only {} instances", out.clauses.instances));
    }
    if elapsed > SUITE_TIME_LIMIT {
        failures.push(format!("took {elapsed:?}, limit {SUITE_TIME_LIMIT:?}"));
    }
    let applicable: Vec<usize> = out.clauses.clauses.iter().map(|c| c.applicable).collect();
    report_line(&format!(
        "    {} algebras, {} instances, hypotheses held per clause {applicable:?}, {elapsed:.1?}",
        out.clauses.algebras, out.clauses.instances
    ));
    verdict(1, "clause suite over the random corpus", &failures);
}

#[test]
fn criterion_2_commutator_is_least_centralizing_congruence() {
    let mut failures = Vec::new();
    let mut pairs = 0usize;
    for alg in corpus() {
        let cons = brute_congruences(&alg);
        if cons.len() > LEASTNESS_MAX_LATTICE {
            continue;
        }
        let cz = Centralizer::new(&alg, &Bounds::default());
        let as_con: Vec<Congruence> = cons.iter().map(|l| Congruence::from_labels(l)).collect();
        for alpha in &as_con {
            for beta in &as_con {
                pairs += 1;
                let centralizing: Vec<&Vec<usize>> = cons
                    .iter()
                    .zip(&as_con)
                    .filter(|(_, d)| cz.holds_con(alpha, beta, d).unwrap())
                    .map(|(l, _)| l)
                    .collect();
                let expected = least(&centralizing);
                let got = labels(&cz.commutator(alpha, beta).unwrap());
                if expected.as_ref() != Some(&got) {
                    failures.push(format!(
                        "{}: [{}, {}] = {got:?}, least centralizing {expected:?}",
                        alg.name(),
                        alpha.label(),
                        beta.label()
                    ));
                }
            }
        }
    }
    report_line(&format!("    {pairs} pairs compared"));
    verdict(
        2,
        "commutator equals the least centralizing congruence",
        &failures,
    );
}

fn brute_commutator(alg: &FiniteAlgebra, alpha: &[usize], beta: &[usize]) -> Option<Vec<usize>> {
    let cons = brute_congruences(alg);
    let (a, b) = (pairs_of(alpha), pairs_of(beta));
    let ok: Vec<&Vec<usize>> = cons
        .iter()
        .filter(|d| brute_centralizes(alg, &a, &b, d))
        .collect();
    least(&ok)
}

#[test]
fn criterion_3_named_fixtures() {
    let b = Bounds::default();
    let mut failures = Vec::new();
    let mut expect = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let z4 = fixtures::z4();
    let l = congruence_lattice(&z4, &b).unwrap();
    let blocks: Vec<Vec<Vec<usize>>> = l.congruences().iter().map(|c| c.blocks()).collect();
    expect(
        blocks
            == vec![
                vec![vec![0], vec![1], vec![2], vec![3]],
                vec![vec![0, 2], vec![1, 3]],
                vec![vec![0, 1, 2, 3]],
            ],
        "Con(Z4) is the chain 0 < {02|13} < 1",
    );
    expect(
        l.is_chain() && brute_congruences(&z4).len() == 3,
        "Con(Z4) has three elements by the partition filter",
    );

    let s3 = fixtures::s3();
    let parity: Vec<usize> = fixtures::s3_elements()
        .iter()
        .map(|p| {
            let inversions = (0..3)
                .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            inversions % 2
        })
        .collect();
    let a3_cosets = relabel(&parity);
    let l = congruence_lattice(&s3, &b).unwrap();
    let got: Vec<Vec<usize>> = l.congruences().iter().map(labels).collect();
    expect(
        got == vec![vec![0, 1, 2, 3, 4, 5], a3_cosets.clone(), vec![0; 6]],
        "Con(S3) is the chain 0 < A3-cosets < 1",
    );
    let mut brute = brute_congruences(&s3);
    brute.sort();
    let mut lib = got.clone();
    lib.sort();
    expect(brute == lib, "Con(S3) agrees with the partition filter");

    let full6 = Congruence::full(6);
    let comm = uacomm::centrality::commutator(&s3, &full6, &full6, &b).unwrap();
    expect(
        labels(&comm) == a3_cosets,
        "[1,1] in S3 is the A3-coset congruence",
    );
    expect(
        brute_commutator(&s3, &[0; 6], &[0; 6]) == Some(a3_cosets.clone()),
        "brute-force [1,1] in S3 is the A3-coset congruence",
    );

    let z2 = fixtures::z2();
    let full2 = Congruence::full(2);
    let comm = uacomm::centrality::commutator(&z2, &full2, &full2, &b).unwrap();
    expect(comm.is_equality(), "[1,1] = 0 in Z2");
    expect(
        brute_commutator(&z2, &[0, 0], &[0, 0]) == Some(vec![0, 1]),
        "brute-force [1,1] = 0 in Z2",
    );

    let l2 = fixtures::lattice2();
    let full = Tolerance::full(2);
    let cert =
        uacomm::centrality::centralizes(&l2, &full, &full, &Congruence::equality(2), &b).unwrap();
    expect(
        !cert.holds && cert.witness == Some([1, 1, 0, 1]),
        "C(1,1;0) fails in the 2-element lattice with witness (1,1,0,1)",
    );
    let all = pairs_of(&[0, 0]);
    expect(
        !brute_centralizes(&l2, &all, &all, &[0, 1]),
        "brute-force C(1,1;0) fails in the 2-element lattice",
    );

    verdict(3, "named fixtures", &failures);
}

#[test]
fn criterion_4_abelian_tolerances_under_weak_difference_terms() {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let algs = wdt_subcorpus();
    for alg in &algs {
        assert!(alg.size() <= TOLERANCE_MAX_UNIVERSE);
        let n = alg.size();
        let cz = Centralizer::new(alg, &Bounds::default());
        let zero: Vec<usize> = (0..n).collect();
        for t in brute_tolerances(alg) {
            let pairs: Vec<(usize, usize)> = t.iter().copied().collect();
            let tol = Tolerance::new(alg, BinaryRelation::from_pairs(n, &pairs).unwrap()).unwrap();
            let abelian = cz.is_abelian(&tol).unwrap();
            if abelian != brute_centralizes(alg, &t, &t, &zero) {
                failures.push(format!(
                    "{}: abelianness of {pairs:?} disagrees with the brute-force matrix set",
                    alg.name()
                ));
            }
            if !abelian {
                continue;
            }
            checked += 1;
            let cg = transitive_closure(n, &t);
            if pairs_of(&cg) != t {
                failures.push(format!(
                    "{}: abelian tolerance {pairs:?} is not transitive",
                    alg.name()
                ));
            }
            let cg_pairs = pairs_of(&cg);
            if !brute_centralizes(alg, &cg_pairs, &cg_pairs, &zero) {
                failures.push(format!(
                    "{}: Cg of abelian tolerance {pairs:?} is not abelian",
                    alg.name()
                ));
            }
        }
    }
    report_line(&format!(
        "    {} algebras with a weak difference term, {checked} abelian tolerances",
        algs.len()
    ));
    verdict(4, "abelian tolerances are abelian congruences", &failures);
}

#[test]
fn criterion_5_no_forbidden_pentagons_and_perspective_intervals_agree() {
    let b = Bounds::default();
    let mut failures = Vec::new();
    let mut pentagons = 0usize;
    let algs = wdt_subcorpus();
    for alg in &algs {
        let l = congruence_lattice(alg, &b).unwrap();
        let cz = Centralizer::new(alg, &b);
        let cons: Vec<Labels> = brute_congruences(alg);
        let found: BTreeSet<[Labels; 5]> = all_pentagons(&l)
            .iter()
            .map(|p| [p.bottom, p.beta, p.delta, p.theta, p.alpha].map(|i| labels(l.get(i))))
            .collect();
        if found != brute_pentagons(&cons) {
            failures.push(format!(
                "{}: pentagon set differs from the brute-force enumeration",
                alg.name()
            ));
        }
        pentagons += found.len();
        for mode in [PentagonMode::ZeroBottom, PentagonMode::MeetBottom] {
            for r in find_pentagons(&l, mode, &cz).unwrap() {
                let p = r.pentagon;
                let lab = |i: usize| labels(l.get(i));
                let independent = match mode {
                    PentagonMode::MeetBottom => {
                        let beta = pairs_of(&lab(p.beta));
                        brute_centralizes(
                            alg,
                            &beta,
                            &beta,
                            &brute_meet(&lab(p.beta), &lab(p.delta)),
                        )
                    }
                    PentagonMode::ZeroBottom => {
                        let alpha = pairs_of(&lab(p.alpha));
                        let zero: Labels = (0..alg.size()).collect();
                        brute_centralizes(alg, &alpha, &alpha, &zero)
                            && brute_centralizes(
                                alg,
                                &pairs_of(&lab(p.theta)),
                                &alpha,
                                &lab(p.delta),
                            )
                    }
                };
                if independent != r.forbidden {
                    failures.push(format!(
                        "{}: side conditions of {p:?} disagree with brute force",
                        alg.name()
                    ));
                }
                if r.forbidden {
                    failures.push(format!("{}: forbidden {mode:?} pentagon {p:?}", alg.name()));
                }
            }
        }
        let v = check_with_lattice(&l, Property::B, &cz).unwrap();
        if !v.holds {
            failures.push(format!(
                "{}: perspective intervals disagree: {:?}",
                alg.name(),
                v.witness
            ));
        }
    }
    report_line(&format!(
        "    {} algebras with a weak difference term, {pentagons} pentagons",
        algs.len()
    ));
    verdict(
        5,
        "no forbidden pentagon, perspective intervals agree",
        &failures,
    );
}

/// Re-checks a two-element-set certificate with the naive closure.
fn certificate_holds(alg: &FiniteAlgebra, sub: &[usize], x: &[usize], y: &[usize]) -> bool {
    let unary: Vec<Vec<usize>> = sub.iter().map(|&e| vec![e]).collect();
    let closed = idempotent_image(alg, &unary)
        .iter()
        .all(|v| sub.contains(&v[0]));
    let partitions = !x.is_empty()
        && !y.is_empty()
        && sub.iter().all(|e| x.contains(e) != y.contains(e))
        && x.iter().chain(y).all(|e| sub.contains(e));
    let side = |e: usize| usize::from(y.contains(&e));
    let mut theta = Vec::new();
    let mut one_in_three = Vec::new();
    for &a in sub {
        for &c in sub {
            if side(a) == side(c) {
                theta.push(vec![a, c]);
            }
            for &e in sub {
                if side(a) + side(c) + side(e) == 1 {
                    one_in_three.push(vec![a, c, e]);
                }
            }
        }
    }
    let theta_ok = idempotent_image(alg, &theta)
        .iter()
        .all(|v| side(v[0]) == side(v[1]));
    let r_ok = idempotent_image(alg, &one_in_three)
        .iter()
        .all(|v| side(v[0]) + side(v[1]) + side(v[2]) == 1);
    partitions && closed && theta_ok && r_ok
}

#[test]
fn criterion_6_term_search_cross_checks() {
    let b = Bounds::default();
    let mut failures = Vec::new();
    let siggers = |a: &FiniteAlgebra| TermConstraintSystem::siggers(a.size());

    for alg in [fixtures::z2(), fixtures::meet_semilattice(2)] {
        let w = has_taylor_term(&alg, &b).unwrap();
        let ok =
            w.is_found() && verify_term(&alg, w.term.as_ref().unwrap(), &siggers(&alg)).unwrap();
        if !ok {
            failures.push(format!("no Taylor term reported for {}", alg.name()));
        }
    }
    let set2 = fixtures::pure_set(2);
    if has_taylor_term(&set2, &b).unwrap().outcome != Outcome::None {
        failures.push("Taylor term reported for the pure 2-set".into());
    }
    for k in 2..=3 {
        let ops = term_operations(&set2, k);
        if ops.len() != k {
            failures.push(format!(
                "the pure 2-set has {} {k}-ary term operations",
                ops.len()
            ));
        }
    }

    let z2 = fixtures::z2();
    match find_maltsev_term(&z2, &b).unwrap().term {
        Some(t) => {
            for x in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        if eval_term(&z2, &t, &[x, y, z]).unwrap() != (x + y + z) % 2 {
                            failures.push(format!(
                                "Maltsev term {} on Z2 is not x+y+z",
                                t.display(&z2)
                            ));
                        }
                    }
                }
            }
        }
        None => failures.push("no Maltsev term found on Z2".into()),
    }
    let sl2 = fixtures::meet_semilattice(2);
    if find_maltsev_term(&sl2, &b).unwrap().outcome != Outcome::None {
        failures.push("Maltsev search on the 2-element semilattice did not return none".into());
    }

    let mut with_wdt = 0;
    for alg in corpus() {
        if !find_weak_difference_term(&alg, &b).unwrap().is_found() {
            continue;
        }
        with_wdt += 1;
        let t = has_taylor_term(&alg, &b).unwrap();
        match t.outcome {
            Outcome::Found => {
                if !verify_term(&alg, t.term.as_ref().unwrap(), &siggers(&alg)).unwrap() {
                    failures.push(format!(
                        "{}: reported Siggers term fails verification",
                        alg.name()
                    ));
                }
            }
            Outcome::None => {
                let cert = two_element_set(&alg, &b)
                    .unwrap()
                    .expect("none comes with a certificate");
                let confirmed =
                    certificate_holds(&alg, &cert.subuniverse, &cert.blocks[0], &cert.blocks[1]);
                failures.push(format!(
                    "{}: weak difference term found but no Taylor term; two-element set {:?} {:?} {} by the naive closure; {}",
                    alg.name(),
                    cert.subuniverse,
                    cert.blocks,
                    if confirmed { "confirmed" } else { "NOT confirmed" },
                    alg.to_json()
                ));
            }
            Outcome::ResourceExhausted => {
                failures.push(format!("{}: Taylor search exhausted", alg.name()))
            }
        }
    }
    report_line(&format!(
        "    {with_wdt} corpus algebras with a weak difference term"
    ));
    verdict(6, "term-search cross-checks", &failures);
}

#[test]
fn criterion_7_one_sided_centrality_hunt_with_double_verification() {
    let b = Bounds::default();
    let cfg = HuntConfig {
        target: HuntTarget::OneSided,
        max_size: HUNT_MAX_UNIVERSE,
        max_ops: HUNT_MAX_OPS,
        first_only: false,
    };
    let (report, elapsed) = timed(|| hunt(&cfg, &b).unwrap());
    let mut failures = Vec::new();
    if elapsed > HUNT_TIME_LIMIT {
        failures.push(format!("took {elapsed:?}, limit {HUNT_TIME_LIMIT:?}"));
    }
    let expected = uacomm::corpus::unary_algebra_count(HUNT_MAX_UNIVERSE, HUNT_MAX_OPS);
    if report.algebras_scanned != expected {
        failures.push(format!(
            "scanned {} algebras, expected {expected}",
            report.algebras_scanned
        ));
    }
    for w in &report.witnesses {
        let alg = FiniteAlgebra::from_json(&w.algebra).unwrap();
        let HuntFinding::OneSided { delta, r, check } = &w.finding else {
            failures.push("unexpected finding kind".into());
            continue;
        };
        let closure = |p: &[(usize, usize)]| -> BTreeSet<(usize, usize)> {
            let mut s: BTreeSet<_> = (0..alg.size()).map(|a| (a, a)).collect();
            for &(x, y) in p {
                s.insert((x, y));
                s.insert((y, x));
            }
            s
        };
        let (d, rr) = (closure(delta), closure(r));
        let zero: Vec<usize> = (0..alg.size()).collect();
        let meet_zero = d.intersection(&rr).all(|(x, y)| x == y);
        let third_path =
            brute_centralizes(&alg, &d, &rr, &zero) && !brute_centralizes(&alg, &rr, &d, &zero);
        if !(check.confirmed() && meet_zero && third_path) {
            failures.push(format!(
                "witness not confirmed on {}: {delta:?} {r:?} {check:?}",
                w.algebra
            ));
        }
    }
    report_line(&format!(
        "    {} algebras, {} candidate pairs, {} witnesses, {elapsed:.1?}",
        report.algebras_scanned,
        report.candidates_checked,
        report.witnesses.len()
    ));
    verdict(
        7,
        "one-sided centrality hunt completes and every witness is double-checked",
        &failures,
    );
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_uacomm"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_8_structured_output_is_deterministic() {
    let mut failures = Vec::new();
    let runs: [&[&str]; 4] = [
        &[
            "--format",
            "json",
            "suite",
            "--random",
            "30",
            "--seed",
            "11",
            "--max-size",
            "4",
        ],
        &[
            "--format",
            "json",
            "hunt",
            "--target",
            "fig9",
            "--max-size",
            "4",
            "--max-ops",
            "1",
            "--first-only",
        ],
        &["--format", "json", "con", "s3"],
        &["--format", "dot", "pentagons", "--mode", "fig9", "s3"],
    ];
    for args in runs {
        let (a, b) = (run_cli(args), run_cli(args));
        if a != b || a.is_empty() {
            failures.push(format!("{args:?} differs between runs"));
        }
    }
    let cfg = SuiteConfig {
        corpus: CorpusConfig::new(20, 5, 4),
        instances: 5,
        consistency: true,
    };
    let lib = || {
        let out = run_suite(&cfg, &Bounds::default(), &mut Stopwatch::new(false)).unwrap();
        serde_json::to_string(&out).unwrap()
    };
    if lib() != lib() {
        failures.push("library suite output differs between runs".into());
    }
    let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let z4 = fixtures::z4();
    let i1 = uacomm::suite::sample_instances(&z4, 8, &mut r1, &Bounds::default()).unwrap();
    let i2 = uacomm::suite::sample_instances(&z4, 8, &mut r2, &Bounds::default()).unwrap();
    if i1 != i2 {
        failures.push("instance sampling differs for equal seeds".into());
    }
    verdict(8, "byte-identical structured output", &failures);
}
