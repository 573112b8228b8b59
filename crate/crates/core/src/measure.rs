//! Termination measure for finite processes: the weight `V_X(P)` of a
//! process variable and the measure `E(P)`, which strictly decreases along
//! every reduction.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::semantics::{canonicalize, reachable, RedexKind, RedexLabel};
use crate::syntax::ast::{Index, Process};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("the measure is undefined on `rec[inf] {0}`")]
    InfiniteIndex(String),
}

/// `Σ_{k<n} m^k`, zero when `n = 0`.
pub fn geometric(m: &BigUint, n: u64) -> BigUint {
    let mut sum = BigUint::zero();
    let mut pow = BigUint::one();
    for _ in 0..n {
        sum += &pow;
        pow *= m;
    }
    sum
}

fn finite(index: Index, var: &str) -> Result<u64, MeasureError> {
    match index {
        Index::Fin(n) => Ok(n),
        Index::Inf => Err(MeasureError::InfiniteIndex(var.to_string())),
    }
}

/// `V_X(P)`: occurrences of `X` in `P`, counting the copies produced by
/// inner recursions.
pub fn vcount(p: &Process, x: &str) -> Result<BigUint, MeasureError> {
    match p {
        Process::Idle => Ok(BigUint::zero()),
        Process::Var(y) => Ok(if y == x { BigUint::one() } else { BigUint::zero() }),
        Process::Input { body, .. } | Process::Output { body, .. } | Process::New { body, .. } => {
            vcount(body, x)
        }
        Process::Par(l, r) => Ok(vcount(l, x)? + vcount(r, x)?),
        Process::Rec { index, var, body } => {
            let n = finite(*index, var)?;
            if var == x {
                // Still reject infinite indices below the binder.
                vcount(body, x)?;
                return Ok(BigUint::zero());
            }
            let inner = vcount(body, x)?;
            if inner.is_zero() {
                vcount(body, var)?;
                return Ok(inner);
            }
            Ok(inner * geometric(&vcount(body, var)?, n))
        }
    }
}

/// `E(P)`: an upper bound on the length of every reduction sequence.
pub fn emeasure(p: &Process) -> Result<BigUint, MeasureError> {
    match p {
        Process::Idle | Process::Var(_) => Ok(BigUint::zero()),
        Process::Input { body, .. } | Process::Output { body, .. } => Ok(emeasure(body)? + 1u32),
        Process::New { body, .. } => emeasure(body),
        Process::Par(l, r) => Ok(emeasure(l)? + emeasure(r)?),
        Process::Rec { index, var, body } => {
            let n = finite(*index, var)?;
            Ok((emeasure(body)? + 1u32) * geometric(&vcount(body, var)?, n))
        }
    }
}

fn as_decimal<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// One row of the weight table: a recursion binder, its index, the weight
/// of its variable in its body and the measure of the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinderRow {
    pub var: String,
    pub index: Index,
    #[serde(serialize_with = "as_decimal")]
    pub weight: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub measure: BigUint,
}

/// Weight table over every recursion binder of `p`, in pre-order.
pub fn binder_table(p: &Process) -> Result<Vec<BinderRow>, MeasureError> {
    let mut rows = Vec::new();
    collect_rows(p, &mut rows)?;
    Ok(rows)
}

fn collect_rows(p: &Process, rows: &mut Vec<BinderRow>) -> Result<(), MeasureError> {
    match p {
        Process::Idle | Process::Var(_) => Ok(()),
        Process::Input { body, .. } | Process::Output { body, .. } | Process::New { body, .. } => {
            collect_rows(body, rows)
        }
        Process::Par(l, r) => {
            collect_rows(l, rows)?;
            collect_rows(r, rows)
        }
        Process::Rec { index, var, body } => {
            rows.push(BinderRow {
                var: var.clone(),
                index: *index,
                weight: vcount(body, var)?,
                measure: emeasure(p)?,
            });
            collect_rows(body, rows)
        }
    }
}

/// An edge of the reduction graph that breaks the expected decrease.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecreaseViolation {
    pub from: String,
    pub to: String,
    pub label: RedexLabel,
    #[serde(serialize_with = "as_decimal")]
    pub before: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub after: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecreaseReport {
    #[serde(serialize_with = "as_decimal")]
    pub initial: BigUint,
    pub states: usize,
    pub edges: usize,
    pub longest_path: usize,
    pub truncated: bool,
    /// Edges where `E` does not drop by exactly 1 (unfolding) or exactly 2
    /// (communication). Empty unless the implementation is wrong.
    pub violations: Vec<DecreaseViolation>,
}

impl DecreaseReport {
    /// Every edge decreased as expected and no path outlasts the measure.
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && BigUint::from(self.longest_path) <= self.initial
    }
}

/// Explores the reduction graph of `p` and checks the measure on every
/// edge.
pub fn check_decrease(p: &Process, max_states: usize) -> Result<DecreaseReport, MeasureError> {
    let initial = emeasure(p)?;
    let space = reachable(&canonicalize(p), max_states);
    let measures = space
        .states
        .iter()
        .map(|s| emeasure(&s.to_process()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut violations = Vec::new();
    for e in &space.edges {
        let (before, after) = (&measures[e.from], &measures[e.to]);
        let drop = match e.label.kind {
            RedexKind::Comm { .. } => 2u32,
            RedexKind::Rec { .. } => 1u32,
        };
        if after + drop != *before {
            violations.push(DecreaseViolation {
                from: space.states[e.from].to_string(),
                to: space.states[e.to].to_string(),
                label: e.label.clone(),
                before: before.clone(),
                after: after.clone(),
            });
        }
    }
    Ok(DecreaseReport {
        initial,
        states: space.states.len(),
        edges: space.edges.len(),
        longest_path: space.longest_path(),
        truncated: space.truncated,
        violations,
    })
}

/// Process variables bound anywhere in `p`.
pub fn bound_proc_vars(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(p: &Process, out: &mut BTreeSet<String>) {
        match p {
            Process::Idle | Process::Var(_) => {}
            Process::Input { body, .. } | Process::Output { body, .. } | Process::New { body, .. } => {
                go(body, out)
            }
            Process::Par(l, r) => {
                go(l, out);
                go(r, out);
            }
            Process::Rec { var, body, .. } => {
                out.insert(var.clone());
                go(body, out);
            }
        }
    }
    go(p, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{approximant, canonicalize, step};
    use crate::syntax::parser::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn weights() {
        assert_eq!(vcount(&p("X"), "X").unwrap(), big(1));
        assert_eq!(vcount(&p("Y"), "X").unwrap(), big(0));
        assert_eq!(vcount(&p("rec[4] X.(X | X)"), "X").unwrap(), big(0));
        assert_eq!(vcount(&p("rec[3] Y.(0 | X | X)"), "X").unwrap(), big(2));
        assert_eq!(vcount(&p("rec[3] Y.(Y | Y | X)"), "X").unwrap(), big(1 + 2 + 4));
        assert_eq!(vcount(&p("rec[0] Y.X"), "X").unwrap(), big(0));
    }

    #[test]
    fn measures() {
        assert_eq!(emeasure(&p("rec[0] X. a+!1.X")).unwrap(), big(0));
        let ex = p("rec[3] X.(rec[6] Y.Y | X)");
        assert_eq!(emeasure(&ex).unwrap(), big(21));
        let next = &step(&canonicalize(&ex))[0].1;
        assert_eq!(emeasure(&next.to_process()).unwrap(), big(20));
        let comm = p("a+!1.0 | a-?(x).0");
        assert_eq!(emeasure(&comm).unwrap(), big(2));
        let after = &step(&canonicalize(&comm))[0].1;
        assert_eq!(emeasure(&after.to_process()).unwrap(), big(0));
    }

    #[test]
    fn infinite_index_rejected() {
        assert!(matches!(emeasure(&p("rec[inf] X.X")), Err(MeasureError::InfiniteIndex(_))));
        assert!(vcount(&p("a+!1.rec[inf] Y.X"), "X").is_err());
    }

    #[test]
    fn big_towers() {
        let tower = p("rec[9] A.(A | A | A | A | rec[9] B.(B | B | B | B | rec[9] C.(C | C | C | C | rec[9] D.(D | D | D | D | a+!1.0))))");
        let e = emeasure(&tower).unwrap();
        assert!(e.bits() > 64);
    }

    #[test]
    fn decrease_on_forwarder() {
        let sys = p("new a . new b . (rec[inf] X. a-?(x). b+!x. X | rec[inf] Y. new c . a+!c+. Y | rec[inf] Z. b-?(y). Z)");
        let r = check_decrease(&approximant(&sys, Index::Fin(2)).unwrap(), 100_000).unwrap();
        assert!(!r.truncated);
        assert!(r.holds(), "{r:?}");
        assert!(r.edges > 0);
        let vacuous = check_decrease(&p("rec[0] X.X"), 10).unwrap();
        assert_eq!(vacuous.edges, 0);
        assert!(vacuous.holds());
    }

    #[test]
    fn table() {
        let rows = binder_table(&p("rec[3] X.(rec[6] Y.Y | X)")).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].var.as_str(), rows[0].weight.clone(), rows[0].measure.clone()), ("X", big(1), big(21)));
        assert_eq!((rows[1].var.as_str(), rows[1].weight.clone(), rows[1].measure.clone()), ("Y", big(1), big(6)));
        assert_eq!(bound_proc_vars(&p("rec[1] X.rec[1] Y.X")).len(), 2);
    }
}
