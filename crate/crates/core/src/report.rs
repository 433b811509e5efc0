//! Structured reports behind every command-line subcommand.
//!
//! A [`Report`] carries `{command, inputs, verdict, witnesses, timings}`.
//! Timings are the only nondeterministic field and stay empty unless
//! requested, so two runs with the same inputs serialize identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::centrality::Centralizer;
use crate::conlat::{
    check_property, congruence_lattice, find_pentagons, to_dot, PentagonMode, Property,
};
use crate::corpus::{random_corpus, CorpusConfig};
use crate::error::{Error, Result};
use crate::hunt::{hunt, HuntConfig, HuntFinding};
use crate::relations::{enumerate_tolerances, transitive_closure, Congruence, Tolerance};
use crate::suite::{
    consistency_checks, sample_instances, tc_property_suite, ConsistencyReport, SuiteReport,
};
use crate::termsearch::{
    find_maltsev_term, find_tolerance_wdt, find_weak_difference_term, has_taylor_term, Outcome,
    TermWitness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ResourceExhausted,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::ResourceExhausted => 3,
        }
    }

    fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub verdict: Verdict,
    pub witnesses: Value,
    /// Milliseconds per phase.
    pub timings: BTreeMap<String, u128>,
    #[serde(skip)]
    pub text: String,
}

impl Report {
    fn new(command: &str, inputs: Value, verdict: Verdict, witnesses: Value, text: String) -> Self {
        Report {
            command: command.into(),
            inputs,
            verdict,
            witnesses,
            timings: BTreeMap::new(),
            text,
        }
    }

    /// Report for a run stopped by a resource bound.
    pub fn exhausted(command: &str, inputs: Value, err: &Error) -> Self {
        Report::new(
            command,
            inputs,
            Verdict::ResourceExhausted,
            json!({ "error": err.to_string() }),
            format!("resource-exhausted: {err}\n"),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Runs `f` and records its wall time under `phase`.
pub struct Stopwatch {
    enabled: bool,
    timings: BTreeMap<String, u128>,
}

impl Stopwatch {
    pub fn new(enabled: bool) -> Self {
        Stopwatch {
            enabled,
            timings: BTreeMap::new(),
        }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            *self.timings.entry(phase.into()).or_default() += start.elapsed().as_millis();
        }
        out
    }

    pub fn attach(self, report: &mut Report) {
        report.timings = self.timings;
    }
}

fn algebra_value(alg: &FiniteAlgebra) -> Value {
    serde_json::from_str(&alg.to_json()).expect("algebra documents are JSON")
}

fn pairs_value(t: &Tolerance) -> Value {
    json!(t.proper_pairs())
}

fn blocks_text(c: &Congruence) -> String {
    serde_json::to_string(&c.blocks()).expect("blocks serialize")
}

fn matrix_value(m: [usize; 4]) -> Value {
    json!([[m[0], m[1]], [m[2], m[3]]])
}

pub fn con(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<Report> {
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    let mut abelian_covers = Vec::new();
    for (lo, hi) in l.covers() {
        if crate::conlat::interval_is_abelian(&l, lo, hi, &cz)? {
            abelian_covers.push((lo, hi));
        }
    }
    let mut text = format!(
        "{}: |Con| = {}{}\n",
        alg.name(),
        l.len(),
        if l.is_chain() { " (chain)" } else { "" }
    );
    for (i, c) in l.congruences().iter().enumerate() {
        let _ = writeln!(text, "  c{i} = {}", blocks_text(c));
    }
    for (lo, hi) in l.covers() {
        let mark = if abelian_covers.contains(&(lo, hi)) {
            "  abelian"
        } else {
            ""
        };
        let _ = writeln!(text, "  c{lo} < c{hi}{mark}");
    }
    let congruences: Vec<Vec<Vec<usize>>> = l.congruences().iter().map(|c| c.blocks()).collect();
    Ok(Report::new(
        "con",
        json!({ "algebra": algebra_value(alg) }),
        Verdict::Pass,
        json!({
            "size": l.len(),
            "is_chain": l.is_chain(),
            "congruences": congruences,
            "covers": l.covers(),
            "abelian_covers": abelian_covers,
        }),
        text,
    ))
}

/// Hasse diagram of `Con(A)`, highlighting the given pentagon mode's findings.
pub fn con_dot(alg: &FiniteAlgebra, mode: Option<PentagonMode>, bounds: &Bounds) -> Result<String> {
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    let highlight: Vec<_> = match mode {
        Some(m) => find_pentagons(&l, m, &cz)?
            .into_iter()
            .map(|p| p.pentagon)
            .collect(),
        None => Vec::new(),
    };
    to_dot(&l, alg.name(), &cz, &highlight)
}

pub fn comm(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
    bounds: &Bounds,
) -> Result<Report> {
    let c = Centralizer::new(alg, bounds).commutator(alpha, beta)?;
    Ok(Report::new(
        "comm",
        json!({
            "algebra": algebra_value(alg),
            "alpha": alpha.blocks(),
            "beta": beta.blocks(),
        }),
        Verdict::Pass,
        json!({ "commutator": c.blocks() }),
        format!(
            "[{}, {}] = {}\n",
            blocks_text(alpha),
            blocks_text(beta),
            blocks_text(&c)
        ),
    ))
}

pub fn cent(
    alg: &FiniteAlgebra,
    s: &Tolerance,
    t: &Tolerance,
    delta: &Congruence,
    bounds: &Bounds,
) -> Result<Report> {
    let cert = Centralizer::new(alg, bounds).centralizes(s, t, delta)?;
    let mut text = format!("C(S,T;delta) = {}\n", cert.holds);
    if let Some(m) = cert.witness {
        let _ = writeln!(
            text,
            "  violating matrix\n    {} {}\n    {} {}",
            m[0], m[1], m[2], m[3]
        );
        let _ = writeln!(text, "  top row related mod delta, bottom row not");
    }
    Ok(Report::new(
        "cent",
        json!({
            "algebra": algebra_value(alg),
            "s": pairs_value(s),
            "t": pairs_value(t),
            "delta": delta.blocks(),
        }),
        Verdict::from_bool(cert.holds),
        json!({ "holds": cert.holds, "matrix": cert.witness.map(matrix_value) }),
        text,
    ))
}

pub fn tol(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<Report> {
    let cz = Centralizer::new(alg, bounds);
    let mut rows = Vec::new();
    let mut text = String::new();
    let tols = enumerate_tolerances(alg, bounds)?;
    let _ = writeln!(text, "{}: {} tolerances", alg.name(), tols.len());
    for t in &tols {
        let abelian = cz.is_abelian(t)?;
        let cg = transitive_closure(t);
        let _ = writeln!(
            text,
            "  {:?}{}{} -> {}",
            t.proper_pairs(),
            if t.is_transitive() { " congruence" } else { "" },
            if abelian { " abelian" } else { "" },
            blocks_text(&cg)
        );
        rows.push(json!({
            "pairs": t.proper_pairs(),
            "congruence": t.is_transitive(),
            "abelian": abelian,
            "generated": cg.blocks(),
        }));
    }
    Ok(Report::new(
        "tol",
        json!({ "algebra": algebra_value(alg) }),
        Verdict::Pass,
        json!({ "tolerances": rows }),
        text,
    ))
}

/// Verdict fails when some pentagon has all its side conditions true.
pub fn pentagons(alg: &FiniteAlgebra, mode: PentagonMode, bounds: &Bounds) -> Result<Report> {
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    let found = find_pentagons(&l, mode, &cz)?;
    let mut text = format!("{}: {} pentagons ({mode:?})\n", alg.name(), found.len());
    let mut rows = Vec::new();
    for r in &found {
        let p = r.pentagon;
        let label = |i: usize| l.get(i).blocks();
        let conds: Vec<String> = r
            .side_conditions
            .iter()
            .map(|c| format!("{}={}", c.name, c.holds))
            .collect();
        let _ = writeln!(
            text,
            "  0'=c{} beta=c{} delta=c{} theta=c{} 1'=c{}  {}{}",
            p.bottom,
            p.beta,
            p.delta,
            p.theta,
            p.alpha,
            conds.join(" "),
            if r.forbidden { "  FORBIDDEN" } else { "" }
        );
        rows.push(json!({
            "indices": p,
            "bottom": label(p.bottom),
            "beta": label(p.beta),
            "delta": label(p.delta),
            "theta": label(p.theta),
            "alpha": label(p.alpha),
            "side_conditions": r.side_conditions,
            "forbidden": r.forbidden,
        }));
    }
    let clean = found.iter().all(|r| !r.forbidden);
    Ok(Report::new(
        "pentagons",
        json!({ "algebra": algebra_value(alg), "mode": mode }),
        Verdict::from_bool(clean),
        json!({ "pentagons": rows }),
        text,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Wdt,
    Twdt,
    Maltsev,
    Taylor,
}

impl std::str::FromStr for TermKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wdt" => Ok(TermKind::Wdt),
            "twdt" => Ok(TermKind::Twdt),
            "maltsev" => Ok(TermKind::Maltsev),
            "taylor" => Ok(TermKind::Taylor),
            other => Err(Error::Invalid(format!("unknown term kind `{other}`"))),
        }
    }
}

pub fn search_terms(alg: &FiniteAlgebra, kind: TermKind, bounds: &Bounds) -> Result<TermWitness> {
    match kind {
        TermKind::Wdt => find_weak_difference_term(alg, bounds),
        TermKind::Twdt => find_tolerance_wdt(alg, bounds),
        TermKind::Maltsev => find_maltsev_term(alg, bounds),
        TermKind::Taylor => has_taylor_term(alg, bounds),
    }
}

/// A completed search passes whether or not a term exists.
pub fn terms(alg: &FiniteAlgebra, kind: TermKind, bounds: &Bounds) -> Result<Report> {
    let w = search_terms(alg, kind, bounds)?;
    let outcome = serde_json::to_value(w.outcome).expect("outcome serializes");
    let mut text = match &w.term_text {
        Some(t) => format!("found: {t}\n"),
        None => format!("{}\n", outcome.as_str().unwrap_or_default()),
    };
    let _ = writeln!(
        text,
        "  method {}, closure size {}",
        w.method, w.closure_size
    );
    if let Some(cert) = &w.certificate {
        let _ = writeln!(
            text,
            "  two-element set on {:?} with blocks {:?} and {:?}",
            cert.subuniverse, cert.blocks[0], cert.blocks[1]
        );
    }
    let verdict = if w.outcome == Outcome::ResourceExhausted {
        Verdict::ResourceExhausted
    } else {
        Verdict::Pass
    };
    Ok(Report::new(
        "terms",
        json!({ "algebra": algebra_value(alg), "kind": kind }),
        verdict,
        serde_json::to_value(&w).expect("witness serializes"),
        text,
    ))
}

pub fn check(alg: &FiniteAlgebra, which: Property, bounds: &Bounds) -> Result<Report> {
    let v = check_property(alg, which, bounds)?;
    let mut text = format!(
        "property {which:?}: {}\n",
        if v.holds { "pass" } else { "fail" }
    );
    if let Some(w) = &v.witness {
        let _ = writeln!(
            text,
            "  witness {}",
            serde_json::to_string(w).expect("witness serializes")
        );
    }
    Ok(Report::new(
        "check",
        json!({ "algebra": algebra_value(alg), "property": which }),
        Verdict::from_bool(v.holds),
        serde_json::to_value(&v).expect("verdict serializes"),
        text,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub corpus: CorpusConfig,
    pub instances: usize,
    /// Also run the per-algebra consistency checks.
    pub consistency: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteOutcome {
    pub clauses: SuiteReport,
    pub consistency: Option<ConsistencyReport>,
    /// Algebras skipped because a resource bound was hit.
    pub exhausted: Vec<String>,
}

/// The clause suite over a random corpus, plus the consistency checks.
pub fn run_suite(
    cfg: &SuiteConfig,
    bounds: &Bounds,
    watch: &mut Stopwatch,
) -> Result<SuiteOutcome> {
    let corpus = random_corpus(&cfg.corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.corpus.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = SuiteOutcome {
        clauses: SuiteReport::new(),
        consistency: cfg.consistency.then(ConsistencyReport::new),
        exhausted: Vec::new(),
    };
    for alg in &corpus {
        let clauses = watch.time("clauses", || -> Result<SuiteReport> {
            let instances = sample_instances(alg, cfg.instances, &mut rng, bounds)?;
            tc_property_suite(alg, &instances, bounds)
        });
        match clauses {
            Ok(r) => out.clauses.merge(r),
            Err(e) if e.is_exhausted() => {
                out.exhausted.push(alg.name().to_string());
                continue;
            }
            Err(e) => return Err(e),
        }
        if let Some(total) = out.consistency.as_mut() {
            match watch.time("consistency", || consistency_checks(alg, bounds)) {
                Ok(r) => total.merge(r),
                Err(e) if e.is_exhausted() => out.exhausted.push(alg.name().to_string()),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

pub fn suite(cfg: &SuiteConfig, bounds: &Bounds, timings: bool) -> Result<Report> {
    let mut watch = Stopwatch::new(timings);
    let out = run_suite(cfg, bounds, &mut watch)?;
    let mut text = format!(
        "{} algebras, {} instances\n",
        out.clauses.algebras, out.clauses.instances
    );
    for c in &out.clauses.clauses {
        let _ = writeln!(
            text,
            "  clause {:>2}: checked {}, hypothesis held {}, failed {}",
            c.clause, c.checked, c.applicable, c.failed
        );
    }
    if let Some(cons) = &out.consistency {
        let _ = writeln!(
            text,
            "consistency ({} algebras with a weak difference term)",
            cons.wdt_found
        );
        for c in &cons.checks {
            let _ = writeln!(
                text,
                "  {}: applicable {}, failed {}, exhausted {}",
                c.check, c.applicable, c.failed, c.exhausted
            );
        }
        for f in &cons.failures {
            let _ = writeln!(text, "  FAIL {}: {}\n    {}", f.check, f.detail, f.algebra);
        }
    }
    for f in &out.clauses.failures {
        let _ = writeln!(
            text,
            "  FAIL clause {}: {}\n    {}",
            f.clause, f.detail, f.algebra
        );
    }
    if !out.exhausted.is_empty() {
        let _ = writeln!(
            text,
            "skipped after hitting a bound: {}",
            out.exhausted.join(", ")
        );
    }
    let pass = out.clauses.passed() && out.consistency.as_ref().is_none_or(|c| c.passed());
    let mut report = Report::new(
        "suite",
        json!({ "config": cfg, "bounds": bounds }),
        Verdict::from_bool(pass),
        serde_json::to_value(&out).expect("suite outcome serializes"),
        text,
    );
    watch.attach(&mut report);
    Ok(report)
}

/// Passes when the scan completes and every one-sided centrality witness survives the double check.
pub fn hunt_report(cfg: &HuntConfig, bounds: &Bounds, timings: bool) -> Result<Report> {
    let mut watch = Stopwatch::new(timings);
    let r = watch.time("hunt", || hunt(cfg, bounds))?;
    let mut text = format!(
        "{} algebras scanned, {} candidates, {} witnesses\n",
        r.algebras_scanned,
        r.candidates_checked,
        r.witnesses.len()
    );
    for w in &r.witnesses {
        match &w.finding {
            HuntFinding::OneSided { delta, r, check } => {
                let _ = writeln!(
                    text,
                    "  Delta={delta:?} R={r:?} confirmed={} matrix={:?}\n    {}",
                    check.confirmed(),
                    check.witness_matrix,
                    w.algebra
                );
            }
            HuntFinding::Pentagons { pentagons } => {
                let forbidden = pentagons.iter().filter(|p| p.forbidden).count();
                let _ = writeln!(
                    text,
                    "  {} pentagons, {forbidden} with all side conditions\n    {}",
                    pentagons.len(),
                    w.algebra
                );
            }
        }
    }
    let mut report = Report::new(
        "hunt",
        json!({ "config": cfg, "bounds": bounds }),
        Verdict::from_bool(r.all_confirmed()),
        serde_json::to_value(&r).expect("hunt report serializes"),
        text,
    );
    watch.attach(&mut report);
    Ok(report)
}
