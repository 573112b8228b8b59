//! Progress: a static verdict from type checking the 0-approximant, the
//! shape of well-typed normal forms, and a dynamic oracle that decides
//! progress on a finite approximant by exhaustive exploration.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::semantics::{approximant, cap_indices, reachable, step, ApproxError, CanonState, RedexLabel};
use crate::syntax::ast::{Direction, Endpoint, Index, Name, Process};
use crate::syntax::subst::{free_names, free_proc_vars};
use crate::typecheck::{check_closed_process, Diagnostic, SolveResult};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProgressError {
    #[error(transparent)]
    NotUserProcess(#[from] ApproxError),
    #[error("process is not closed: free {0}")]
    NotClosed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgressStatus {
    VerifiedStatic,
    ViolatedDynamic,
    HoldsDynamicAtBound,
    Unknown,
}

/// One reduction of a counterexample trace and the state it leads to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub label: RedexLabel,
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// Least priority assignment of the accepted 0-approximant.
    Assignment { values: BTreeMap<String, u64> },
    /// Why the 0-approximant was rejected.
    Rejected { diagnostics: Vec<Diagnostic> },
    /// A reachable state with a pending action that the rest of the state
    /// can never match, and the path reaching it from the initial state.
    Counterexample {
        initial: String,
        trace: Vec<TraceStep>,
        state: String,
        thread: String,
        endpoint: String,
        direction: Direction,
    },
    /// Exploration statistics of a successful dynamic check.
    Exploration {
        approximant: String,
        residual_checks: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProgressVerdict {
    pub status: ProgressStatus,
    pub evidence: Evidence,
    #[serde(rename = "statesExplored")]
    pub states_explored: usize,
    pub truncated: bool,
}

fn ensure_closed(p: &Process) -> Result<(), ProgressError> {
    let names = free_names(p);
    if let Some(n) = names.iter().next() {
        return Err(ProgressError::NotClosed(format!("name `{n}`")));
    }
    if let Some(x) = free_proc_vars(p).into_iter().next() {
        return Err(ProgressError::NotClosed(format!("process variable `{x}`")));
    }
    Ok(())
}

/// Type checks the 0-approximant of a closed user process at judgment
/// index 0. Acceptance guarantees progress; rejection proves nothing.
pub fn verify_static(p: &Process) -> Result<ProgressVerdict, ProgressError> {
    let zero = approximant(p, Index::Fin(0))?;
    ensure_closed(p)?;
    let verdict = check_closed_process(&zero, Index::Fin(0));
    let (status, evidence) = match verdict.solution {
        Some(SolveResult::Assignment { values }) if verdict.accepted => {
            (ProgressStatus::VerifiedStatic, Evidence::Assignment { values })
        }
        _ => (
            ProgressStatus::Unknown,
            Evidence::Rejected {
                diagnostics: verdict.diagnostics,
            },
        ),
    };
    Ok(ProgressVerdict {
        status,
        evidence,
        states_explored: 0,
        truncated: false,
    })
}

/// True when no thread of `s` is headed by a prefix: every remaining
/// thread is a recursion that can no longer unfold.
pub fn normal_form_shape(s: &CanonState) -> bool {
    s.threads().iter().all(|t| match t {
        Process::Rec { index, .. } => index.is_zero(),
        Process::Idle => true,
        _ => false,
    })
}

/// The pending action of a thread, if it is headed by a prefix on an
/// endpoint.
fn pending(t: &Process) -> Option<(&Endpoint, Direction)> {
    match t {
        Process::Output {
            subject: Name::Endpoint(e),
            ..
        } => Some((e, Direction::Out)),
        Process::Input {
            subject: Name::Endpoint(e),
            ..
        } => Some((e, Direction::In)),
        _ => None,
    }
}

/// Outcome of searching a residual for a matching action.
enum Search {
    Found,
    Absent,
    Truncated,
}

/// Searches the states reachable from `residual` for a thread headed by
/// the action `dir` on `target` where the channel of `target` is still the
/// free one, not a restriction created along the way.
fn residual_matches(residual: &CanonState, target: &Endpoint, dir: Direction, max_states: usize) -> (Search, usize) {
    let exposes = |s: &CanonState| {
        s.channel(&target.channel).is_none()
            && s.threads()
                .iter()
                .any(|t| pending(t).is_some_and(|(e, d)| e == target && d == dir))
    };
    // Best-first on the prefix depth of the wanted action, which usually
    // reaches it quickly; the search is still exhaustive.
    let mut seen = HashSet::from([residual.key().to_string()]);
    let mut queue = BinaryHeap::from([(Reverse(distance(residual, target, dir)), 0usize)]);
    let mut states = vec![Some(residual.clone())];
    let mut truncated = false;
    while let Some((_, id)) = queue.pop() {
        let s = states[id].take().expect("each state is queued once");
        if exposes(&s) {
            return (Search::Found, seen.len());
        }
        for (_, next) in step(&s) {
            if seen.contains(next.key()) {
                continue;
            }
            if seen.len() >= max_states {
                truncated = true;
                continue;
            }
            seen.insert(next.key().to_string());
            queue.push((Reverse(distance(&next, target, dir)), states.len()));
            states.push(Some(next));
        }
    }
    if truncated {
        (Search::Truncated, seen.len())
    } else {
        (Search::Absent, seen.len())
    }
}

/// Fewest prefixes guarding an action `dir` on `target` in any thread of
/// `s`, or `usize::MAX` when none occurs syntactically.
fn distance(s: &CanonState, target: &Endpoint, dir: Direction) -> usize {
    fn go(p: &Process, target: &Endpoint, dir: Direction, depth: usize) -> Option<usize> {
        if pending(p).is_some_and(|(e, d)| e == target && d == dir) {
            return Some(depth);
        }
        match p {
            Process::Idle | Process::Var(_) => None,
            Process::Input { body, .. } | Process::Output { body, .. } | Process::Rec { body, .. } => {
                go(body, target, dir, depth + 1)
            }
            Process::New { body, .. } => go(body, target, dir, depth),
            Process::Par(l, r) => match (go(l, target, dir, depth), go(r, target, dir, depth)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }
    s.threads()
        .iter()
        .filter_map(|t| go(t, target, dir, 0))
        .min()
        .unwrap_or(usize::MAX)
}

/// Decides progress of the `iota`-approximant of a closed process by
/// exploring all its reachable states. Every pending action of every
/// reachable state must be matchable by the remaining threads, with the
/// channels of the state left free.
pub fn oracle_dynamic(p: &Process, iota: u64, max_states: usize) -> Result<ProgressVerdict, ProgressError> {
    ensure_closed(p)?;
    let approx = cap_indices(p, Index::Fin(iota));
    let initial = crate::semantics::canonicalize(&approx);
    let space = reachable(&initial, max_states);
    let mut memo: HashMap<(String, Endpoint, Direction), bool> = HashMap::new();
    let mut residual_checks = 0;
    let mut truncated = space.truncated;
    for (id, state) in space.states.iter().enumerate() {
        let threads = state.threads();
        for (i, t) in threads.iter().enumerate() {
            let Some((e, dir)) = pending(t) else { continue };
            let target = e.peer();
            let want = dir.flip();
            // The residual already exposes the partner: no search needed.
            let immediate = threads
                .iter()
                .enumerate()
                .any(|(j, u)| j != i && pending(u).is_some_and(|(f, d)| *f == target && d == want));
            if immediate {
                continue;
            }
            let rest: Vec<Process> = threads
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, u)| u.clone())
                .collect();
            let residual = CanonState::from_parts(Vec::new(), rest);
            let key = (residual.key().to_string(), target.clone(), want);
            let ok = match memo.get(&key) {
                Some(&ok) => ok,
                None => {
                    residual_checks += 1;
                    let (found, _) = residual_matches(&residual, &target, want, max_states);
                    match found {
                        Search::Found => {
                            memo.insert(key, true);
                            true
                        }
                        Search::Absent => {
                            memo.insert(key, false);
                            false
                        }
                        Search::Truncated => {
                            truncated = true;
                            continue;
                        }
                    }
                }
            };
            if !ok {
                let trace = space
                    .path_to(id)
                    .into_iter()
                    .map(|edge| TraceStep {
                        label: edge.label.clone(),
                        state: space.states[edge.to].to_string(),
                    })
                    .collect();
                return Ok(ProgressVerdict {
                    status: ProgressStatus::ViolatedDynamic,
                    evidence: Evidence::Counterexample {
                        initial: initial.to_string(),
                        trace,
                        state: state.to_string(),
                        thread: t.to_string(),
                        endpoint: e.to_string(),
                        direction: dir,
                    },
                    states_explored: space.states.len(),
                    truncated: space.truncated,
                });
            }
        }
    }
    Ok(ProgressVerdict {
        status: if truncated {
            ProgressStatus::Unknown
        } else {
            ProgressStatus::HoldsDynamicAtBound
        },
        evidence: Evidence::Exploration {
            approximant: initial.to_string(),
            residual_checks,
        },
        states_explored: space.states.len(),
        truncated,
    })
}
