//! Randomized contract suite for the centralizer relation.
//!
//! Each [`Instance`] fixes every relation the ten clauses mention, so a
//! failing instance can be replayed exactly. Clause numbers:
//!
//! 1. monotonicity in `S` and `T`
//! 2. `C(S,T;δ) ⟺ C(Cg(S),T;δ)`
//! 3. `C(S,T;δ) ⟺ C(S,δ∘T∘δ;δ)`
//! 4. `T∩δ = T∩δ'` makes `δ` and `δ'` interchangeable
//! 5. joins in the first argument
//! 6. meets in the third argument
//! 7. `T ∩ (S∘(T∩δ)∘S) ⊆ δ ⟹ C(S,T;δ)`
//! 8. `β ∧ (α ∨ (β∧δ)) ≤ δ ⟹ C(α,β;δ)`
//! 9. restriction to a subalgebra
//! 10. passage to a quotient by `δ' ≤ δ`

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::centrality::Centralizer;
use crate::conlat::{
    check_with_lattice, congruence_lattice, find_pentagons, pentagon_witness, CongruenceLattice,
    PentagonMode, Property,
};
use crate::error::{Error, Result};
use crate::relations::{
    enumerate_tolerances, restrict, sandwich, transitive_closure, BinaryRelation, Congruence,
    Tolerance,
};
use crate::termsearch::{find_weak_difference_term, has_taylor_term, Outcome};

pub const CLAUSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub s: Tolerance,
    pub t: Tolerance,
    pub delta: Congruence,
    /// `S' ⊆ S` and `T' ⊆ T` for clause 1.
    pub s_sub: Tolerance,
    pub t_sub: Tolerance,
    /// Second congruence for clauses 4 and 6.
    pub delta_alt: Congruence,
    /// `δ' ≤ δ` for clause 10.
    pub delta_low: Congruence,
    /// Clause 5 joins these; clause 8 uses the first as `α`.
    pub alphas: [Congruence; 2],
    pub beta: Congruence,
    /// Subuniverse for clause 9.
    pub subuniverse: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceRecord {
    pub s: Vec<(usize, usize)>,
    pub t: Vec<(usize, usize)>,
    pub delta: Vec<Vec<usize>>,
    pub s_sub: Vec<(usize, usize)>,
    pub t_sub: Vec<(usize, usize)>,
    pub delta_alt: Vec<Vec<usize>>,
    pub delta_low: Vec<Vec<usize>>,
    pub alphas: [Vec<Vec<usize>>; 2],
    pub beta: Vec<Vec<usize>>,
    pub subuniverse: Vec<usize>,
}

impl Instance {
    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            s: self.s.proper_pairs(),
            t: self.t.proper_pairs(),
            delta: self.delta.blocks(),
            s_sub: self.s_sub.proper_pairs(),
            t_sub: self.t_sub.proper_pairs(),
            delta_alt: self.delta_alt.blocks(),
            delta_low: self.delta_low.blocks(),
            alphas: [self.alphas[0].blocks(), self.alphas[1].blocks()],
            beta: self.beta.blocks(),
            subuniverse: self.subuniverse.clone(),
        }
    }
}

/// Draws `count` instances from the tolerances, congruences, and 1- or
/// 2-generated subuniverses of `A`.
pub fn sample_instances(
    alg: &FiniteAlgebra,
    count: usize,
    rng: &mut impl Rng,
    bounds: &Bounds,
) -> Result<Vec<Instance>> {
    let n = alg.size();
    let tols = enumerate_tolerances(alg, bounds)?;
    let cons = congruence_lattice(alg, bounds)?.congruences().to_vec();
    let pick_tol = |rng: &mut dyn rand::RngCore| tols.choose(rng).unwrap().clone();
    let pick_con = |rng: &mut dyn rand::RngCore| cons.choose(rng).unwrap().clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let s = pick_tol(rng);
        let t = pick_tol(rng);
        let delta = pick_con(rng);
        let below = |r: &Tolerance| -> Vec<&Tolerance> {
            tols.iter()
                .filter(|x| x.relation().is_subset(r.relation()))
                .collect()
        };
        let s_sub = (*below(&s).choose(rng).unwrap()).clone();
        let t_sub = (*below(&t).choose(rng).unwrap()).clone();
        // Half the time pick δ' agreeing with δ on T, so clause 4's hypothesis is exercised.
        let trace = t.relation().intersect(&delta.to_relation());
        let agreeing: Vec<&Congruence> = cons
            .iter()
            .filter(|d| t.relation().intersect(&d.to_relation()) == trace)
            .collect();
        let delta_alt = if rng.gen_bool(0.5) {
            (*agreeing.choose(rng).unwrap()).clone()
        } else {
            pick_con(rng)
        };
        let lower: Vec<&Congruence> = cons.iter().filter(|d| d.leq(&delta)).collect();
        let delta_low = (*lower.choose(rng).unwrap()).clone();
        let alphas = [pick_con(rng), pick_con(rng)];
        let beta = pick_con(rng);
        let gens: Vec<usize> = (0..rng.gen_range(1..=2))
            .map(|_| rng.gen_range(0..n))
            .collect();
        let subuniverse = alg.subuniverse(&gens, bounds)?;
        out.push(Instance {
            s,
            t,
            delta,
            s_sub,
            t_sub,
            delta_alt,
            delta_low,
            alphas,
            beta,
            subuniverse,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClauseStats {
    pub clause: usize,
    pub checked: usize,
    /// Instances whose hypothesis held, so the conclusion was tested.
    pub applicable: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseFailure {
    pub algebra: String,
    pub clause: usize,
    pub instance: InstanceRecord,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub algebras: usize,
    pub instances: usize,
    pub clauses: Vec<ClauseStats>,
    pub failures: Vec<ClauseFailure>,
}

impl SuiteReport {
    pub fn new() -> Self {
        SuiteReport {
            algebras: 0,
            instances: 0,
            clauses: (1..=CLAUSES)
                .map(|clause| ClauseStats {
                    clause,
                    ..Default::default()
                })
                .collect(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.algebras += other.algebras;
        self.instances += other.instances;
        for (a, b) in self.clauses.iter_mut().zip(other.clauses) {
            a.checked += b.checked;
            a.applicable += b.applicable;
            a.failed += b.failed;
        }
        self.failures.extend(other.failures);
    }
}

impl Default for SuiteReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of one clause on one instance.
struct Verdict {
    applicable: bool,
    holds: bool,
    detail: String,
}

fn implication(hyp: bool, concl: bool, what: &str) -> Verdict {
    Verdict {
        applicable: hyp,
        holds: !hyp || concl,
        detail: what.into(),
    }
}

fn equivalence(lhs: bool, rhs: bool, what: &str) -> Verdict {
    Verdict {
        applicable: true,
        holds: lhs == rhs,
        detail: format!("{what}: left side {lhs}, right side {rhs}"),
    }
}

/// Runs all ten clauses on every instance.
pub fn tc_property_suite(
    alg: &FiniteAlgebra,
    instances: &[Instance],
    bounds: &Bounds,
) -> Result<SuiteReport> {
    let cz = Centralizer::new(alg, bounds);
    let mut report = SuiteReport::new();
    report.algebras = 1;
    report.instances = instances.len();
    for inst in instances {
        let verdicts = evaluate(alg, &cz, inst, bounds)?;
        for (i, v) in verdicts.into_iter().enumerate() {
            let stats = &mut report.clauses[i];
            stats.checked += 1;
            stats.applicable += v.applicable as usize;
            if !v.holds {
                stats.failed += 1;
                report.failures.push(ClauseFailure {
                    algebra: alg.to_json(),
                    clause: i + 1,
                    instance: inst.record(),
                    detail: v.detail,
                });
            }
        }
    }
    Ok(report)
}

fn evaluate(
    alg: &FiniteAlgebra,
    cz: &Centralizer<'_>,
    inst: &Instance,
    bounds: &Bounds,
) -> Result<Vec<Verdict>> {
    let Instance {
        s,
        t,
        delta,
        s_sub,
        t_sub,
        delta_alt,
        delta_low,
        alphas,
        beta,
        ..
    } = inst;
    let base = cz.holds(s, t, delta)?;
    let mut out = Vec::with_capacity(CLAUSES);

    out.push(implication(
        base,
        cz.holds(s_sub, t_sub, delta)?,
        "C(S,T;d) holds but C(S',T';d) fails",
    ));

    let cg = transitive_closure(s).as_tolerance();
    out.push(equivalence(
        base,
        cz.holds(&cg, t, delta)?,
        "C(S,T;d) vs C(Cg(S),T;d)",
    ));

    let wide = sandwich(delta, t)?;
    out.push(equivalence(
        base,
        cz.holds(s, &wide, delta)?,
        "C(S,T;d) vs C(S,d.T.d;d)",
    ));

    let d_rel = delta.to_relation();
    let same_trace =
        t.relation().intersect(&d_rel) == t.relation().intersect(&delta_alt.to_relation());
    let alt = cz.holds(s, t, delta_alt)?;
    out.push(Verdict {
        applicable: same_trace,
        holds: !same_trace || base == alt,
        detail: format!("T meets d and d' equally, yet C(S,T;d)={base} and C(S,T;d')={alt}"),
    });

    let a0 = alphas[0].as_tolerance();
    let a1 = alphas[1].as_tolerance();
    let joined = alphas[0].join(&alphas[1]).as_tolerance();
    let hyp5 = cz.holds(&a0, t, delta)? && cz.holds(&a1, t, delta)?;
    out.push(implication(
        hyp5,
        hyp5 && cz.holds(&joined, t, delta)?,
        "C(a1,T;d) and C(a2,T;d) hold but C(a1+a2,T;d) fails",
    ));

    let hyp6 = base && alt;
    let met = delta.meet(delta_alt);
    out.push(implication(
        hyp6,
        hyp6 && cz.holds(s, t, &met)?,
        "C(S,T;d) and C(S,T;d') hold but C(S,T;d^d') fails",
    ));

    let inner = s
        .relation()
        .compose(&t.relation().intersect(&d_rel))?
        .compose(s.relation())?;
    let hyp7 = t.relation().intersect(&inner).is_subset(&d_rel);
    out.push(implication(
        hyp7,
        base,
        "T meets S(T^d)S inside d but C(S,T;d) fails",
    ));

    let (alpha, b8) = (&alphas[0], beta);
    let hyp8 = b8.meet(&alpha.join(&b8.meet(delta))).leq(delta);
    out.push(implication(
        hyp8,
        hyp8 && cz.holds_con(alpha, b8, delta)?,
        "b^(a+(b^d)) <= d but C(a,b;d) fails",
    ));

    out.push(restriction_clause(alg, inst, base, bounds)?);
    out.push(quotient_clause(alg, inst, base, delta_low, bounds)?);
    Ok(out)
}

fn restriction_clause(
    alg: &FiniteAlgebra,
    inst: &Instance,
    base: bool,
    bounds: &Bounds,
) -> Result<Verdict> {
    if !base {
        return Ok(implication(false, true, ""));
    }
    let (sub, elems) = alg.subalgebra(&inst.subuniverse)?;
    let (s, _) = restrict(inst.s.relation(), &elems)?;
    let (t, _) = restrict(inst.t.relation(), &elems)?;
    let (d, _) = restrict(&inst.delta.to_relation(), &elems)?;
    let d = Congruence::from_relation(&d)?;
    let cz = Centralizer::new(&sub, bounds);
    let concl = cz.holds(&Tolerance::trusted(s), &Tolerance::trusted(t), &d)?;
    Ok(implication(
        true,
        concl,
        "C(S,T;d) holds in A but fails on the subalgebra",
    ))
}

fn quotient_clause(
    alg: &FiniteAlgebra,
    inst: &Instance,
    base: bool,
    low: &Congruence,
    bounds: &Bounds,
) -> Result<Verdict> {
    let (q, map) = alg.quotient(low)?;
    let m = q.size();
    let image = |r: &BinaryRelation| {
        let mut out = BinaryRelation::empty(m);
        for (a, b) in r.pairs() {
            out.insert(map[a], map[b]);
        }
        out
    };
    let s = Tolerance::trusted(image(inst.s.relation()));
    let t = Tolerance::trusted(image(inst.t.relation()));
    let d = Congruence::from_relation(&image(&inst.delta.to_relation()))?;
    let concl = Centralizer::new(&q, bounds).holds(&s, &t, &d)?;
    Ok(equivalence(
        base,
        concl,
        "C(S,T;d) in A vs C(S/d',T/d';d/d') in A/d'",
    ))
}

/// Cross-checks between modules, run once per algebra by the `suite` command.
pub const CONSISTENCY_CHECKS: [&str; 7] = [
    "commutator-is-least-centralizing",
    "wdt-implies-property-a",
    "wdt-implies-property-b",
    "wdt-implies-property-c",
    "wdt-implies-no-forbidden-zero-bottom-pentagon",
    "wdt-implies-abelian-tolerances-transitive",
    "wdt-implies-taylor",
];

/// Lattices larger than this skip the commutator check.
pub const LEASTNESS_LATTICE_LIMIT: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckStats {
    pub check: String,
    pub applicable: usize,
    pub failed: usize,
    /// Runs cut short by a resource bound.
    pub exhausted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    pub algebra: String,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub algebras: usize,
    pub wdt_found: usize,
    pub checks: Vec<CheckStats>,
    pub failures: Vec<CheckFailure>,
}

impl ConsistencyReport {
    pub fn new() -> Self {
        ConsistencyReport {
            algebras: 0,
            wdt_found: 0,
            checks: CONSISTENCY_CHECKS
                .iter()
                .map(|c| CheckStats {
                    check: c.to_string(),
                    ..Default::default()
                })
                .collect(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: ConsistencyReport) {
        self.algebras += other.algebras;
        self.wdt_found += other.wdt_found;
        for (a, b) in self.checks.iter_mut().zip(other.checks) {
            a.applicable += b.applicable;
            a.failed += b.failed;
            a.exhausted += b.exhausted;
        }
        self.failures.extend(other.failures);
    }

    fn record(
        &mut self,
        alg: &FiniteAlgebra,
        idx: usize,
        outcome: Result<Option<String>>,
    ) -> Result<()> {
        let stats = &mut self.checks[idx];
        match outcome {
            Ok(None) => stats.applicable += 1,
            Ok(Some(detail)) => {
                stats.applicable += 1;
                stats.failed += 1;
                self.failures.push(CheckFailure {
                    algebra: alg.to_json(),
                    check: CONSISTENCY_CHECKS[idx].to_string(),
                    detail,
                });
            }
            Err(e) if e.is_exhausted() => stats.exhausted += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

impl Default for ConsistencyReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs every entry of [`CONSISTENCY_CHECKS`] that applies to `alg`.
pub fn consistency_checks(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<ConsistencyReport> {
    let mut report = ConsistencyReport::new();
    report.algebras = 1;
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    if l.len() <= LEASTNESS_LATTICE_LIMIT {
        report.record(alg, 0, least_centralizing(&l, &cz))?;
    }
    let wdt = find_weak_difference_term(alg, bounds)?;
    if !wdt.is_found() {
        return Ok(report);
    }
    report.wdt_found = 1;
    for (idx, which) in [(1, Property::A), (2, Property::B), (3, Property::C)] {
        let outcome = check_with_lattice(&l, which, &cz)
            .map(|v| (!v.holds).then(|| format!("property {which:?} fails: {:?}", v.witness)));
        report.record(alg, idx, outcome)?;
    }
    let zero_bottom = find_pentagons(&l, PentagonMode::ZeroBottom, &cz).map(|ps| {
        ps.iter()
            .find(|p| p.forbidden)
            .map(|p| format!("forbidden pentagon {:?}", pentagon_witness(&l, &p.pentagon)))
    });
    report.record(alg, 4, zero_bottom)?;
    report.record(alg, 5, intransitive_abelian_tolerance(&cz))?;
    let taylor = has_taylor_term(alg, bounds).and_then(|t| match t.outcome {
        Outcome::Found => Ok(None),
        Outcome::None => Ok(Some(format!(
            "weak difference term {} found, no Taylor term ({})",
            wdt.term_text.clone().unwrap_or_default(),
            t.method
        ))),
        Outcome::ResourceExhausted => {
            Err(Error::exhausted("Taylor term search", bounds.max_closure))
        }
    });
    report.record(alg, 6, taylor)?;
    Ok(report)
}

fn least_centralizing(l: &CongruenceLattice, cz: &Centralizer<'_>) -> Result<Option<String>> {
    for a in 0..l.len() {
        for b in 0..l.len() {
            let (alpha, beta) = (l.get(a), l.get(b));
            let comm = cz.commutator(alpha, beta)?;
            let mut least: Option<usize> = None;
            let mut all = Vec::new();
            for d in 0..l.len() {
                if cz.holds_con(alpha, beta, l.get(d))? {
                    all.push(d);
                }
            }
            for &d in &all {
                if all.iter().all(|&e| l.leq(d, e)) {
                    least = Some(d);
                }
            }
            if least.map(|d| l.get(d)) != Some(&comm) {
                return Ok(Some(format!(
                    "[{}, {}] = {} but the least centralizing congruence is {:?}",
                    alpha.label(),
                    beta.label(),
                    comm.label(),
                    least.map(|d| l.get(d).label())
                )));
            }
        }
    }
    Ok(None)
}

fn intransitive_abelian_tolerance(cz: &Centralizer<'_>) -> Result<Option<String>> {
    for t in enumerate_tolerances(cz.algebra(), cz.bounds())? {
        if !t.is_transitive() && cz.is_abelian(&t)? {
            return Ok(Some(format!(
                "abelian tolerance {:?} is not transitive",
                t.proper_pairs()
            )));
        }
    }
    Ok(None)
}
