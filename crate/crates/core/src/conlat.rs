//! Congruence lattices, labeled pentagons, and the properties built on them.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::centrality::Centralizer;
use crate::error::{Error, Result};
use crate::relations::{enumerate_tolerances, generate_congruence, transitive_closure, Congruence};

/// `Con(A)` with its order and operation tables.
///
/// Congruences are ordered by number of blocks (descending), then by root
/// array, so index 0 is the equality relation and the last index is the full relation.
#[derive(Debug, Clone)]
pub struct CongruenceLattice {
    congruences: Vec<Congruence>,
    index: HashMap<Congruence, usize>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
}

impl CongruenceLattice {
    /// Builds the lattice from an arbitrary meet- and join-closed family.
    pub fn from_congruences(mut congruences: Vec<Congruence>) -> Result<Self> {
        congruences.sort_by(|a, b| {
            b.num_blocks()
                .cmp(&a.num_blocks())
                .then_with(|| a.roots().cmp(b.roots()))
        });
        congruences.dedup();
        let index: HashMap<Congruence, usize> = congruences
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let m = congruences.len();
        let mut leq = vec![false; m * m];
        let mut meet = vec![0; m * m];
        let mut join = vec![0; m * m];
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (&congruences[i], &congruences[j]);
                leq[i * m + j] = x.leq(y);
                let lookup = |c: Congruence| {
                    index.get(&c).copied().ok_or_else(|| {
                        Error::Invalid(format!("family is not a lattice: {c} is missing"))
                    })
                };
                meet[i * m + j] = lookup(x.meet(y))?;
                join[i * m + j] = lookup(x.join(y))?;
            }
        }
        Ok(CongruenceLattice {
            congruences,
            index,
            leq,
            meet,
            join,
        })
    }

    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.congruences
    }

    pub fn get(&self, i: usize) -> &Congruence {
        &self.congruences[i]
    }

    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.len() - 1
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i * self.len() + j]
    }

    /// Elements of the interval `I[lo, hi]`, in lattice order.
    pub fn interval(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.leq(lo, k) && self.leq(k, hi))
            .collect()
    }

    /// Covering pairs `(lower, upper)` of the Hasse diagram, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if self.lt(i, j) && !(0..m).any(|k| self.lt(i, k) && self.lt(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_chain(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.leq(i, j) || self.leq(j, i)))
    }
}

/// Computes `Con(A)`: principal congruences, then closure under joins.
pub fn congruence_lattice(alg: &FiniteAlgebra, bounds: &Bounds) -> Result<CongruenceLattice> {
    let n = alg.size();
    let mut principal: Vec<Congruence> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let c = generate_congruence(alg, &[(a, b)])?;
            if !principal.contains(&c) {
                principal.push(c);
            }
        }
    }
    let mut members = vec![Congruence::equality(n)];
    let mut seen: HashMap<Congruence, ()> = HashMap::new();
    seen.insert(members[0].clone(), ());
    let mut i = 0;
    while i < members.len() {
        for p in &principal {
            let j = members[i].join(p);
            if !seen.contains_key(&j) {
                if members.len() >= bounds.max_lattice {
                    return Err(Error::exhausted("congruence lattice", bounds.max_lattice));
                }
                seen.insert(j.clone(), ());
                members.push(j);
            }
        }
        i += 1;
    }
    CongruenceLattice::from_congruences(members)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LabeledPentagon {
    pub bottom: usize,
    pub beta: usize,
    pub delta: usize,
    pub theta: usize,
    pub alpha: usize,
}

impl LabeledPentagon {
    /// Re-checks the order pattern of N5 directly against the lattice tables.
    pub fn is_valid(&self, l: &CongruenceLattice) -> bool {
        let LabeledPentagon {
            bottom,
            beta,
            delta,
            theta,
            alpha,
        } = *self;
        let mut all = [bottom, beta, delta, theta, alpha];
        all.sort_unstable();
        let distinct = all.windows(2).all(|w| w[0] != w[1]);
        distinct
            && l.lt(delta, theta)
            && l.meet(beta, theta) == bottom
            && l.meet(beta, delta) == bottom
            && l.join(beta, delta) == alpha
            && l.join(beta, theta) == alpha
            && !l.leq(beta, theta)
            && !l.leq(theta, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PentagonMode {
    /// Bottom is `0`; side conditions `[α,α] = 0` and `C(θ,α;δ)`. Spelled `fig8`.
    #[serde(rename = "fig8")]
    ZeroBottom,
    /// Side condition `C(β,β;β∧δ)`. Spelled `fig9`.
    #[serde(rename = "fig9")]
    MeetBottom,
}

impl std::str::FromStr for PentagonMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig8" => Ok(PentagonMode::ZeroBottom),
            "fig9" => Ok(PentagonMode::MeetBottom),
            other => Err(Error::Invalid(format!("unknown pentagon mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideCondition {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PentagonReport {
    pub pentagon: LabeledPentagon,
    pub side_conditions: Vec<SideCondition>,
    /// All side conditions hold, so this pentagon is one of the forbidden configurations.
    pub forbidden: bool,
}

/// Every N5 sublattice of `L`, in lexicographic order of `(bottom, β, δ, θ, α)`.
///
/// A pentagon is determined by `β` and the chain `δ < θ`; the remaining
/// labels are `β∧θ` and `β∨θ`.
pub fn all_pentagons(l: &CongruenceLattice) -> Vec<LabeledPentagon> {
    let m = l.len();
    let mut out = Vec::new();
    for beta in 0..m {
        for theta in 0..m {
            if l.leq(beta, theta) || l.leq(theta, beta) {
                continue;
            }
            let bottom = l.meet(beta, theta);
            let alpha = l.join(beta, theta);
            for delta in 0..m {
                if !l.lt(delta, theta) || delta == bottom {
                    continue;
                }
                let p = LabeledPentagon {
                    bottom,
                    beta,
                    delta,
                    theta,
                    alpha,
                };
                if l.meet(beta, delta) == bottom && l.join(beta, delta) == alpha {
                    out.push(p);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Pentagons of the given mode, each with its centrality side conditions.
pub fn find_pentagons(
    l: &CongruenceLattice,
    mode: PentagonMode,
    cz: &Centralizer<'_>,
) -> Result<Vec<PentagonReport>> {
    let mut out = Vec::new();
    for p in all_pentagons(l) {
        let c = |i: usize| l.get(i);
        let side_conditions = match mode {
            PentagonMode::ZeroBottom => {
                if p.bottom != l.bottom() {
                    continue;
                }
                let zero = c(l.bottom());
                vec![
                    SideCondition {
                        name: "[alpha,alpha]=0".into(),
                        holds: cz.holds_con(c(p.alpha), c(p.alpha), zero)?,
                    },
                    SideCondition {
                        name: "C(theta,alpha;delta)".into(),
                        holds: cz.holds_con(c(p.theta), c(p.alpha), c(p.delta))?,
                    },
                ]
            }
            PentagonMode::MeetBottom => {
                let floor = l.meet(p.beta, p.delta);
                vec![SideCondition {
                    name: "C(beta,beta;beta^delta)".into(),
                    holds: cz.holds_con(c(p.beta), c(p.beta), c(floor))?,
                }]
            }
        };
        let forbidden = side_conditions.iter().all(|s| s.holds);
        out.push(PentagonReport {
            pentagon: p,
            side_conditions,
            forbidden,
        });
    }
    Ok(out)
}

/// `I[lo,hi]` is abelian when `C(hi,hi;lo)` holds.
pub fn interval_is_abelian(
    l: &CongruenceLattice,
    lo: usize,
    hi: usize,
    cz: &Centralizer<'_>,
) -> Result<bool> {
    cz.holds_con(l.get(hi), l.get(hi), l.get(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    /// Abelian tolerances generate abelian congruences.
    A,
    /// Perspective intervals agree on abelianness.
    B,
    /// No labeled pentagon with `C(β,β;β∧δ)`.
    C,
}

impl std::str::FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Property::A),
            "B" | "b" => Ok(Property::B),
            "C" | "c" => Ok(Property::C),
            other => Err(Error::Invalid(format!("unknown property `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropertyWitness {
    Tolerance {
        pairs: Vec<(usize, usize)>,
    },
    Pair {
        alpha: String,
        beta: String,
    },
    Pentagon {
        bottom: String,
        beta: String,
        delta: String,
        theta: String,
        alpha: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<PropertyWitness>,
}

pub fn pentagon_witness(l: &CongruenceLattice, p: &LabeledPentagon) -> PropertyWitness {
    let s = |i: usize| l.get(i).label();
    PropertyWitness::Pentagon {
        bottom: s(p.bottom),
        beta: s(p.beta),
        delta: s(p.delta),
        theta: s(p.theta),
        alpha: s(p.alpha),
    }
}

pub fn check_property(
    alg: &FiniteAlgebra,
    which: Property,
    bounds: &Bounds,
) -> Result<PropertyVerdict> {
    let cz = Centralizer::new(alg, bounds);
    match which {
        Property::A => check_a(&cz),
        Property::B | Property::C => {
            let l = congruence_lattice(alg, bounds)?;
            check_with_lattice(&l, which, &cz)
        }
    }
}

/// Checks `which`, reusing a lattice and centralizer cache the caller already holds.
pub fn check_with_lattice(
    l: &CongruenceLattice,
    which: Property,
    cz: &Centralizer<'_>,
) -> Result<PropertyVerdict> {
    let verdict = |witness: Option<PropertyWitness>| PropertyVerdict {
        property: which,
        holds: witness.is_none(),
        witness,
    };
    match which {
        Property::A => check_a(cz),
        Property::B => {
            for a in 0..l.len() {
                for b in 0..l.len() {
                    let lower = interval_is_abelian(l, l.meet(a, b), a, cz)?;
                    let upper = interval_is_abelian(l, b, l.join(a, b), cz)?;
                    if lower != upper {
                        return Ok(verdict(Some(PropertyWitness::Pair {
                            alpha: l.get(a).label(),
                            beta: l.get(b).label(),
                        })));
                    }
                }
            }
            Ok(verdict(None))
        }
        Property::C => {
            let hit = find_pentagons(l, PentagonMode::MeetBottom, cz)?
                .into_iter()
                .find(|r| r.forbidden);
            Ok(verdict(hit.map(|r| pentagon_witness(l, &r.pentagon))))
        }
    }
}

fn check_a(cz: &Centralizer<'_>) -> Result<PropertyVerdict> {
    for t in enumerate_tolerances(cz.algebra(), cz.bounds())? {
        if cz.is_abelian(&t)? {
            let closure = transitive_closure(&t).as_tolerance();
            if !cz.is_abelian(&closure)? {
                return Ok(PropertyVerdict {
                    property: Property::A,
                    holds: false,
                    witness: Some(PropertyWitness::Tolerance {
                        pairs: t.proper_pairs(),
                    }),
                });
            }
        }
    }
    Ok(PropertyVerdict {
        property: Property::A,
        holds: true,
        witness: None,
    })
}

/// Hasse diagram in DOT: covering edges of abelian intervals are red, pentagon members are filled.
pub fn to_dot(
    l: &CongruenceLattice,
    name: &str,
    cz: &Centralizer<'_>,
    highlight: &[LabeledPentagon],
) -> Result<String> {
    let mut marked = vec![false; l.len()];
    for p in highlight {
        for i in [p.bottom, p.beta, p.delta, p.theta, p.alpha] {
            marked[i] = true;
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\""));
    let _ = writeln!(out, "  rankdir=BT;");
    let _ = writeln!(out, "  node [shape=box];");
    for (i, c) in l.congruences().iter().enumerate() {
        let style = if marked[i] {
            ", style=filled, fillcolor=gold"
        } else {
            ""
        };
        let _ = writeln!(out, "  c{i} [label=\"{}\"{style}];", c.label());
    }
    for (lo, hi) in l.covers() {
        let color = if interval_is_abelian(l, lo, hi, cz)? {
            " [color=red]"
        } else {
            ""
        };
        let _ = writeln!(out, "  c{lo} -> c{hi}{color};");
    }
    out.push_str("}\n");
    Ok(out)
}
