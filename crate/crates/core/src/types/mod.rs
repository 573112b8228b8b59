//! Session-type utilities: well-formedness, unfolding, obligation,
//! capability and duality.

mod duality;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::ast::{Index, Priority, SessionType};
use crate::syntax::subst::{subst_type_free, type_free_vars};

pub use duality::{
    dual_full, dual_full_with_budget, dual_strict, dual_strict_report, syntactic_dual,
    DualityMismatch, PathStep, DEFAULT_PAIR_BUDGET,
};

/// Type-variable environment: type variable to the priority it stands for.
pub type TypeVarEnv = BTreeMap<String, Priority>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("cannot unfold `{0}`")]
    CannotUnfold(String),
    #[error("unbound type variable `{0}`")]
    UnboundTypeVar(String),
    #[error("`{0}` has no topmost action")]
    NoAction(String),
    #[error("duality check exceeded its budget of {0} type pairs")]
    DepthExceeded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WfKind {
    /// A chain of recursions ends in one of its own binders.
    NotContractive,
    /// A payload type mentions a type variable bound outside of it.
    PayloadNotClosed,
    /// A type variable is not bound by any enclosing recursion.
    FreeTypeVariable,
    /// `inf` written as a priority annotation.
    InfinitePriority,
    /// `int` used where a session type is required.
    MisplacedBase,
}

impl fmt::Display for WfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WfKind::NotContractive => "not contractive",
            WfKind::PayloadNotClosed => "payload type is not closed",
            WfKind::FreeTypeVariable => "free type variable",
            WfKind::InfinitePriority => "infinite priority annotation",
            WfKind::MisplacedBase => "base type used as a session type",
        })
    }
}

/// First well-formedness violation found, with the offending subterm.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} in `{subterm}`")]
pub struct WfViolation {
    pub kind: WfKind,
    pub subterm: String,
}

/// Checks that `t` is a closed, contractive, stratified session type.
/// `int` is accepted only as a payload.
pub fn well_formed(t: &SessionType) -> Result<(), WfViolation> {
    wf_session(t, &mut Vec::new())
}

/// Like [`well_formed`], but also accepts the base type at top level.
pub fn well_formed_payload(t: &SessionType) -> Result<(), WfViolation> {
    if t.is_base() {
        Ok(())
    } else {
        well_formed(t)
    }
}

fn violation(kind: WfKind, t: &SessionType) -> WfViolation {
    WfViolation {
        kind,
        subterm: t.to_string(),
    }
}

fn wf_session(t: &SessionType, bound: &mut Vec<String>) -> Result<(), WfViolation> {
    match t {
        SessionType::End => Ok(()),
        SessionType::Int => Err(violation(WfKind::MisplacedBase, t)),
        SessionType::Var(v) => {
            if bound.contains(v) {
                Ok(())
            } else {
                Err(violation(WfKind::FreeTypeVariable, t))
            }
        }
        SessionType::Prefix {
            obligation,
            capability,
            payload,
            cont,
            ..
        } => {
            if obligation.is_infinite() || capability.is_infinite() {
                return Err(violation(WfKind::InfinitePriority, t));
            }
            if !type_free_vars(payload).is_empty() {
                return Err(violation(WfKind::PayloadNotClosed, t));
            }
            if !payload.is_base() {
                wf_session(payload, &mut Vec::new())?;
            }
            wf_session(cont, bound)
        }
        SessionType::Rec { var, body, .. } => {
            let mut chain = vec![var.as_str()];
            let mut head = &**body;
            while let SessionType::Rec { var, body, .. } = head {
                chain.push(var);
                head = body;
            }
            if let SessionType::Var(v) = head {
                if chain.contains(&v.as_str()) {
                    return Err(violation(WfKind::NotContractive, t));
                }
            }
            bound.push(var.clone());
            let r = wf_session(body, bound);
            bound.pop();
            r
        }
    }
}

/// `rec[i+1] v.B` becomes `B[rec[i] v.B / v]`; `inf` stays `inf`.
pub fn unfold(t: &SessionType) -> Result<SessionType, TypeError> {
    match t {
        SessionType::Rec { index, var, body } => {
            let Some(next) = index.decrement() else {
                return Err(TypeError::CannotUnfold(t.to_string()));
            };
            let folded = SessionType::rec(next, var.clone(), (**body).clone());
            Ok(subst_type_free(body, var, &folded))
        }
        _ => Err(TypeError::CannotUnfold(t.to_string())),
    }
}

/// Obligation of a type: the first annotation of its topmost action,
/// `inf` for `end` and for base types.
pub fn obligation(sigma: &TypeVarEnv, t: &SessionType) -> Result<Priority, TypeError> {
    match t {
        SessionType::End | SessionType::Int => Ok(Priority::Infinity),
        SessionType::Var(v) => sigma
            .get(v)
            .cloned()
            .ok_or_else(|| TypeError::UnboundTypeVar(v.clone())),
        SessionType::Prefix { obligation, .. } => Ok(obligation.clone()),
        SessionType::Rec { body, .. } => obligation(sigma, body),
    }
}

/// Capability of the topmost action, looking through recursions.
pub fn capability(t: &SessionType) -> Result<Priority, TypeError> {
    match t {
        SessionType::Prefix { capability, .. } => Ok(capability.clone()),
        SessionType::Rec { body, .. } => capability(body),
        _ => Err(TypeError::NoAction(t.to_string())),
    }
}

/// Alpha-invariant key: bound type variables become de Bruijn levels.
pub fn type_key(t: &SessionType) -> String {
    let mut out = String::new();
    key_into(t, &mut Vec::new(), &mut out);
    out
}

fn key_into(t: &SessionType, bound: &mut Vec<String>, out: &mut String) {
    match t {
        SessionType::End => out.push('e'),
        SessionType::Int => out.push('i'),
        SessionType::Var(v) => match bound.iter().rposition(|b| b == v) {
            Some(k) => out.push_str(&format!("#{k}")),
            None => out.push_str(&format!("'{v}'")),
        },
        SessionType::Prefix {
            dir,
            obligation,
            capability,
            payload,
            cont,
        } => {
            out.push_str(&format!("{}[{obligation:?},{capability:?}](", dir.symbol()));
            key_into(payload, &mut Vec::new(), out);
            out.push_str(").");
            key_into(cont, bound, out);
        }
        SessionType::Rec { index, var, body } => {
            out.push_str(&format!("rec[{index}]."));
            bound.push(var.clone());
            key_into(body, bound, out);
            bound.pop();
        }
    }
}

/// Equality up to renaming of bound type variables.
pub fn alpha_eq(a: &SessionType, b: &SessionType) -> bool {
    type_key(a) == type_key(b)
}

/// All type variables occurring in `t`, free or bound.
pub fn type_vars(t: &SessionType) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(t: &SessionType, out: &mut BTreeSet<String>) {
        match t {
            SessionType::End | SessionType::Int => {}
            SessionType::Var(v) => {
                out.insert(v.clone());
            }
            SessionType::Prefix { payload, cont, .. } => {
                go(payload, out);
                go(cont, out);
            }
            SessionType::Rec { var, body, .. } => {
                out.insert(var.clone());
                go(body, out);
            }
        }
    }
    go(t, &mut out);
    out
}

/// Maps every recursion index of a type.
pub fn map_type_indices(t: &SessionType, f: &impl Fn(Index) -> Index) -> SessionType {
    match t {
        SessionType::End | SessionType::Int | SessionType::Var(_) => t.clone(),
        SessionType::Prefix {
            dir,
            obligation,
            capability,
            payload,
            cont,
        } => SessionType::prefix(
            *dir,
            obligation.clone(),
            capability.clone(),
            map_type_indices(payload, f),
            map_type_indices(cont, f),
        ),
        SessionType::Rec { index, var, body } => {
            SessionType::rec(f(*index), var.clone(), map_type_indices(body, f))
        }
    }
}

/// Priority variables occurring in the annotations of `t`.
pub fn priority_vars(t: &SessionType, out: &mut BTreeSet<String>) {
    match t {
        SessionType::End | SessionType::Int | SessionType::Var(_) => {}
        SessionType::Prefix {
            obligation,
            capability,
            payload,
            cont,
            ..
        } => {
            for p in [obligation, capability] {
                if let Priority::Var(v) = p {
                    out.insert(v.clone());
                }
            }
            priority_vars(payload, out);
            priority_vars(cont, out);
        }
        SessionType::Rec { body, .. } => priority_vars(body, out),
    }
}
