//! Exhaustive witness searches over small unary algebras.

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::bounds::Bounds;
use crate::centrality::{centralizes_by_polynomial_scan, Centralizer};
use crate::conlat::{congruence_lattice, find_pentagons, PentagonMode, PentagonReport};
use crate::corpus::unary_algebras;
use crate::error::{Error, Result};
use crate::relations::{enumerate_tolerances, Congruence, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HuntTarget {
    /// Tolerances with `Δ∩R = 0`, `C(Δ,R;0)` true and `C(R,Δ;0)` false.
    /// Spelled `err219` on the command line.
    #[serde(rename = "err219")]
    OneSided,
    #[serde(rename = "fig8")]
    ZeroBottom,
    #[serde(rename = "fig9")]
    MeetBottom,
}

impl std::str::FromStr for HuntTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "err219" => Ok(HuntTarget::OneSided),
            "fig8" => Ok(HuntTarget::ZeroBottom),
            "fig9" => Ok(HuntTarget::MeetBottom),
            other => Err(Error::Invalid(format!("unknown hunt target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HuntConfig {
    pub target: HuntTarget,
    pub max_size: usize,
    pub max_ops: usize,
    /// Stop after the first algebra with a witness.
    pub first_only: bool,
}

/// Both centralizer evaluations of a candidate, each by two independent procedures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleCheck {
    pub meet_is_zero: bool,
    pub delta_r_matrix: bool,
    pub delta_r_scan: bool,
    pub r_delta_matrix: bool,
    pub r_delta_scan: bool,
    /// Matrix of `M(R,Δ)` violating the term condition.
    pub witness_matrix: Option<[usize; 4]>,
}

impl DoubleCheck {
    /// Every required fact holds on both code paths.
    pub fn confirmed(&self) -> bool {
        self.meet_is_zero
            && self.delta_r_matrix
            && self.delta_r_scan
            && !self.r_delta_matrix
            && !self.r_delta_scan
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HuntFinding {
    OneSided {
        delta: Vec<(usize, usize)>,
        r: Vec<(usize, usize)>,
        check: DoubleCheck,
    },
    Pentagons {
        pentagons: Vec<PentagonReport>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HuntWitness {
    pub algebra: String,
    pub finding: HuntFinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HuntReport {
    pub config: HuntConfig,
    pub algebras_scanned: usize,
    pub candidates_checked: usize,
    pub witnesses: Vec<HuntWitness>,
}

impl HuntReport {
    /// Every one-sided centrality witness survived the double check.
    pub fn all_confirmed(&self) -> bool {
        self.witnesses.iter().all(|w| match &w.finding {
            HuntFinding::OneSided { check, .. } => check.confirmed(),
            HuntFinding::Pentagons { .. } => true,
        })
    }
}

pub fn hunt(cfg: &HuntConfig, bounds: &Bounds) -> Result<HuntReport> {
    let mut report = HuntReport {
        config: *cfg,
        algebras_scanned: 0,
        candidates_checked: 0,
        witnesses: Vec::new(),
    };
    for alg in unary_algebras(cfg.max_size, cfg.max_ops) {
        report.algebras_scanned += 1;
        let before = report.witnesses.len();
        match cfg.target {
            HuntTarget::OneSided => hunt_one_sided(&alg, bounds, &mut report)?,
            HuntTarget::ZeroBottom => {
                hunt_pentagons(&alg, PentagonMode::ZeroBottom, bounds, &mut report)?
            }
            HuntTarget::MeetBottom => {
                hunt_pentagons(&alg, PentagonMode::MeetBottom, bounds, &mut report)?
            }
        }
        if cfg.first_only && report.witnesses.len() > before {
            break;
        }
    }
    Ok(report)
}

/// Re-verifies a candidate `(Δ, R)` with the matrix-set and polynomial-scan procedures.
pub fn double_check(
    alg: &FiniteAlgebra,
    delta: &Tolerance,
    r: &Tolerance,
    bounds: &Bounds,
) -> Result<DoubleCheck> {
    let zero = Congruence::equality(alg.size());
    let cz = Centralizer::new(alg, bounds);
    let meet = delta.relation().intersect(r.relation());
    let rd = cz.centralizes(r, delta, &zero)?;
    Ok(DoubleCheck {
        meet_is_zero: meet == zero.to_relation(),
        delta_r_matrix: cz.centralizes(delta, r, &zero)?.holds,
        delta_r_scan: centralizes_by_polynomial_scan(alg, delta, r, &zero, bounds)?.holds,
        r_delta_matrix: rd.holds,
        r_delta_scan: centralizes_by_polynomial_scan(alg, r, delta, &zero, bounds)?.holds,
        witness_matrix: rd.witness,
    })
}

fn hunt_one_sided(alg: &FiniteAlgebra, bounds: &Bounds, report: &mut HuntReport) -> Result<()> {
    let tols = enumerate_tolerances(alg, bounds)?;
    let zero = Congruence::equality(alg.size());
    let zero_rel = zero.to_relation();
    let cz = Centralizer::new(alg, bounds);
    for delta in &tols {
        for r in &tols {
            if delta.relation().intersect(r.relation()) != zero_rel {
                continue;
            }
            report.candidates_checked += 1;
            if cz.holds(delta, r, &zero)? && !cz.holds(r, delta, &zero)? {
                report.witnesses.push(HuntWitness {
                    algebra: alg.to_json(),
                    finding: HuntFinding::OneSided {
                        delta: delta.proper_pairs(),
                        r: r.proper_pairs(),
                        check: double_check(alg, delta, r, bounds)?,
                    },
                });
            }
        }
    }
    Ok(())
}

fn hunt_pentagons(
    alg: &FiniteAlgebra,
    mode: PentagonMode,
    bounds: &Bounds,
    report: &mut HuntReport,
) -> Result<()> {
    let l = congruence_lattice(alg, bounds)?;
    let cz = Centralizer::new(alg, bounds);
    let found = find_pentagons(&l, mode, &cz)?;
    report.candidates_checked += 1;
    if !found.is_empty() {
        report.witnesses.push(HuntWitness {
            algebra: alg.to_json(),
            finding: HuntFinding::Pentagons { pentagons: found },
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_unary_algebra_with_a_pentagon_has_four_elements() {
        let cfg = HuntConfig {
            target: HuntTarget::MeetBottom,
            max_size: 4,
            max_ops: 1,
            first_only: true,
        };
        let r = hunt(&cfg, &Bounds::default()).unwrap();
        assert_eq!(r.witnesses.len(), 1);
        let alg = FiniteAlgebra::from_json(&r.witnesses[0].algebra).unwrap();
        assert_eq!(alg.size(), 4);
    }

    #[test]
    fn one_sided_hunt_on_tiny_unary_algebras_is_clean() {
        let cfg = HuntConfig {
            target: HuntTarget::OneSided,
            max_size: 2,
            max_ops: 2,
            first_only: false,
        };
        let r = hunt(&cfg, &Bounds::default()).unwrap();
        assert!(r.all_confirmed());
        assert!(r.candidates_checked > 0);
    }
}
