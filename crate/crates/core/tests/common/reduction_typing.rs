//! Re-checking reduction successors: the environment of a canonical state
//! is carried along each reduction edge.

use std::collections::{BTreeSet, HashSet, VecDeque};

use sessprog_core::semantics::{canonicalize, step, CanonState, RedexKind, RedexLabel};
use sessprog_core::syntax::ast::{Index, Process, SessionType};
use sessprog_core::syntax::subst::free_names;
use sessprog_core::typecheck::{
    advance_channel, balanced, check, endpoints, state_env, unfold_name, verdict_of, NameEnv, ProcEnv,
};
use sessprog_core::types::TypeVarEnv;

/// Checks the threads of `s` under `delta` at `iota`.
pub fn state_checks(s: &CanonState, delta: &NameEnv, iota: Index) -> Result<(), String> {
    if !balanced(delta) {
        return Err(format!("unbalanced environment for `{s}`"));
    }
    let body = Process::par_all(s.threads().iter().cloned());
    let out = check(&TypeVarEnv::new(), &ProcEnv::new(), delta, &body, iota);
    let v = verdict_of(out, iota, &body);
    if v.accepted {
        Ok(())
    } else {
        Err(format!("`{s}` rejected: {}", v.diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")))
    }
}

/// The environment of `to` obtained from that of `from` along `label`.
pub fn successor_env(from: &CanonState, label: &RedexLabel, to: &CanonState, delta: &NameEnv) -> Option<NameEnv> {
    let mut next = match &label.kind {
        RedexKind::Comm { channel, .. } => advance_channel(delta, channel)?,
        RedexKind::Rec { .. } => {
            let thread = &from.threads()[label.threads[0]];
            let mut d = delta.clone();
            for n in free_names(thread) {
                if matches!(d.get(&n), Some(SessionType::Rec { .. })) {
                    d = unfold_name(&d, &n)?;
                }
            }
            d
        }
    };
    let before: BTreeSet<&str> = from.channels().iter().map(|c| c.name.as_str()).collect();
    let after: BTreeSet<&str> = to.channels().iter().map(|c| c.name.as_str()).collect();
    for gone in before.difference(&after) {
        for n in endpoints(gone) {
            next.remove(&n);
        }
    }
    let fresh = state_env(to);
    for ch in after.difference(&before) {
        for n in endpoints(ch) {
            let t = fresh.get(&n).cloned().expect("state_env covers every channel");
            next.insert(n, t);
        }
    }
    Some(next)
}

/// Outcome of re-checking every edge reachable from a closed process.
pub struct Replay {
    pub states: usize,
    pub edges: usize,
    pub truncated: bool,
    pub failures: Vec<String>,
}

/// Explores `p` breadth-first and re-checks every successor under the
/// environment carried along the edge. Successors are taken verbatim from
/// `step`, so channel names agree with the carried environment; deduplication
/// by key only decides which states are expanded.
pub fn recheck_successors(p: &Process, iota: Index, max_states: usize) -> Replay {
    let initial = canonicalize(p);
    let delta = state_env(&initial);
    let mut failures = Vec::new();
    if let Err(e) = state_checks(&initial, &delta, iota) {
        failures.push(format!("initial: {e}"));
    }
    let mut seen = HashSet::from([initial.key().to_string()]);
    let mut queue = VecDeque::from([(initial, delta)]);
    let (mut edges, mut truncated) = (0, false);
    while let Some((from, delta)) = queue.pop_front() {
        for (label, to) in step(&from) {
            edges += 1;
            let Some(next) = successor_env(&from, &label, &to, &delta) else {
                failures.push(format!("no environment step for {label} from `{from}`"));
                continue;
            };
            if let Err(msg) = state_checks(&to, &next, iota) {
                failures.push(format!("{label} from `{from}`: {msg}"));
                continue;
            }
            if seen.contains(to.key()) {
                continue;
            }
            if seen.len() >= max_states {
                truncated = true;
                continue;
            }
            seen.insert(to.key().to_string());
            queue.push_back((to, next));
        }
    }
    Replay {
        states: seen.len(),
        edges,
        truncated,
        failures,
    }
}
