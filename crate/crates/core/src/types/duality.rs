use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{alpha_eq, type_key, type_vars, unfold, TypeError};
use crate::syntax::ast::SessionType;
use crate::syntax::subst::{fresh_ident, subst_type_free, type_free_vars};

/// Default bound on the number of type pairs visited by [`dual_full`].
pub const DEFAULT_PAIR_BUDGET: usize = 10_000;

/// Swaps input and output and each priority pair; payloads are kept.
pub fn syntactic_dual(t: &SessionType) -> SessionType {
    match t {
        SessionType::End | SessionType::Int | SessionType::Var(_) => t.clone(),
        SessionType::Prefix {
            dir,
            obligation,
            capability,
            payload,
            cont,
        } => SessionType::prefix(
            dir.flip(),
            capability.clone(),
            obligation.clone(),
            (**payload).clone(),
            syntactic_dual(cont),
        ),
        SessionType::Rec { index, var, body } => {
            SessionType::rec(*index, var.clone(), syntactic_dual(body))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathStep {
    /// Continuation of a prefix.
    Cont,
    /// Body of a recursion.
    Body,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathStep::Cont => "cont",
            PathStep::Body => "body",
        })
    }
}

/// Where and why two types fail to be structurally dual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityMismatch {
    pub path: Vec<PathStep>,
    pub left: String,
    pub right: String,
    pub reason: String,
}

impl fmt::Display for DualityMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|s| s.to_string()).collect();
        let at = if path.is_empty() {
            "top".to_string()
        } else {
            path.join(".")
        };
        write!(f, "at {at}: `{}` vs `{}`: {}", self.left, self.right, self.reason)
    }
}

/// Renames the binders of two recursions to a common fresh variable.
fn align(v1: &str, b1: &SessionType, v2: &str, b2: &SessionType) -> (SessionType, SessionType) {
    if v1 == v2 {
        return (b1.clone(), b2.clone());
    }
    let mut used = type_vars(b1);
    used.extend(type_vars(b2));
    used.insert(v1.to_string());
    used.insert(v2.to_string());
    let fresh = if type_free_vars(b2).contains(v1) {
        fresh_ident(v1, &used)
    } else {
        v1.to_string()
    };
    let var = SessionType::Var(fresh.clone());
    let b1 = if fresh == v1 { b1.clone() } else { subst_type_free(b1, v1, &var) };
    (b1, subst_type_free(b2, v2, &var))
}

/// One structural step: the premises of d-end, d-var, d-prefix or d-rec,
/// or the reason none applies.
fn structural(t: &SessionType, s: &SessionType) -> Result<Vec<(PathStep, SessionType, SessionType)>, String> {
    match (t, s) {
        (SessionType::End, SessionType::End) => Ok(vec![]),
        (SessionType::Var(a), SessionType::Var(b)) if a == b => Ok(vec![]),
        (
            SessionType::Prefix {
                dir: d1,
                obligation: o1,
                capability: c1,
                payload: p1,
                cont: k1,
            },
            SessionType::Prefix {
                dir: d2,
                obligation: o2,
                capability: c2,
                payload: p2,
                cont: k2,
            },
        ) => {
            if *d1 != d2.flip() {
                return Err("both actions have the same direction".into());
            }
            if o1 != c2 || c1 != o2 {
                return Err("priority pairs are not swapped".into());
            }
            if !alpha_eq(p1, p2) {
                return Err("payload types differ".into());
            }
            Ok(vec![(PathStep::Cont, (**k1).clone(), (**k2).clone())])
        }
        (
            SessionType::Rec {
                index: i1,
                var: v1,
                body: b1,
            },
            SessionType::Rec {
                index: i2,
                var: v2,
                body: b2,
            },
        ) => {
            if i1 != i2 {
                return Err("recursion indices differ".into());
            }
            let (b1, b2) = align(v1, b1, v2, b2);
            Ok(vec![(PathStep::Body, b1, b2)])
        }
        _ => Err("constructors do not match".into()),
    }
}

/// Structural duality without unfolding, with the first mismatch.
pub fn dual_strict_report(t: &SessionType, s: &SessionType) -> Result<(), DualityMismatch> {
    let mut path = Vec::new();
    let (mut t, mut s) = (t.clone(), s.clone());
    loop {
        match structural(&t, &s) {
            Ok(mut next) => match next.pop() {
                None => return Ok(()),
                Some((step, t2, s2)) => {
                    path.push(step);
                    t = t2;
                    s = s2;
                }
            },
            Err(reason) => {
                return Err(DualityMismatch {
                    path,
                    left: t.to_string(),
                    right: s.to_string(),
                    reason,
                })
            }
        }
    }
}

/// Structural duality: d-end, d-var, d-prefix, d-rec.
pub fn dual_strict(t: &SessionType, s: &SessionType) -> bool {
    dual_strict_report(t, s).is_ok()
}

/// Duality closed under unfolding of either side, with the default budget.
pub fn dual_full(t: &SessionType, s: &SessionType) -> Result<bool, TypeError> {
    dual_full_with_budget(t, s, DEFAULT_PAIR_BUDGET)
}

/// Duality closed under unfolding of either side. A pair met again while
/// it is still being explored is discharged coinductively; this is what
/// makes the search terminate on `inf`-indexed types.
pub fn dual_full_with_budget(
    t: &SessionType,
    s: &SessionType,
    budget: usize,
) -> Result<bool, TypeError> {
    let mut search = Search {
        assumed: BTreeSet::new(),
        visited: 0,
        budget,
    };
    search.related(t, s)
}

struct Search {
    assumed: BTreeSet<(String, String)>,
    visited: usize,
    budget: usize,
}

impl Search {
    fn related(&mut self, t: &SessionType, s: &SessionType) -> Result<bool, TypeError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(TypeError::DepthExceeded(self.budget));
        }
        let key = (type_key(t), type_key(s));
        if self.assumed.contains(&key) {
            return Ok(true);
        }
        self.assumed.insert(key.clone());
        let result = self.alternatives(t, s);
        self.assumed.remove(&key);
        result
    }

    fn alternatives(&mut self, t: &SessionType, s: &SessionType) -> Result<bool, TypeError> {
        if let Ok(premises) = structural(t, s) {
            let mut all = true;
            for (_, t2, s2) in premises {
                if !self.related(&t2, &s2)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        if let Ok(t2) = unfold(t) {
            if self.related(&t2, s)? {
                return Ok(true);
            }
        }
        if let Ok(s2) = unfold(s) {
            if self.related(t, &s2)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
