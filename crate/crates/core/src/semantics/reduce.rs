use std::fmt;

use serde::Serialize;

use super::canon::CanonState;
use crate::syntax::ast::{Index, Name, Process, Value};
use crate::syntax::subst::{
    free_names, free_proc_vars, fresh_ident, subst_proc, subst_value, NameSets,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RedexKind {
    /// Synchronization on `channel`; `payload` is the transmitted value.
    Comm { channel: String, payload: String },
    /// Unfolding of the recursion binding `var` at `index`.
    Rec { var: String, index: Index },
}

/// A redex of a canonical state. `threads` are positions in the state's
/// thread list: sender then receiver for a communication, one position for
/// an unfolding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RedexLabel {
    pub kind: RedexKind,
    pub threads: Vec<usize>,
}

impl RedexLabel {
    pub fn is_comm(&self) -> bool {
        matches!(self.kind, RedexKind::Comm { .. })
    }

    pub fn channel(&self) -> Option<&str> {
        match &self.kind {
            RedexKind::Comm { channel, .. } => Some(channel),
            RedexKind::Rec { .. } => None,
        }
    }
}

impl fmt::Display for RedexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RedexKind::Comm { channel, payload } => write!(f, "comm {channel} ({payload})"),
            RedexKind::Rec { var, index } => write!(f, "rec {var} [{index}]"),
        }
    }
}

/// Renames the binders of `p` that occur in `avoid`, in every namespace.
fn rename_binders(p: &Process, avoid: &NameSets) -> Process {
    let mut used = NameSets::of(p);
    used.extend(avoid);
    rename_rec(p, avoid, &mut used)
}

fn rename_rec(p: &Process, avoid: &NameSets, used: &mut NameSets) -> Process {
    use crate::syntax::subst::{rename_channel, subst_name};
    match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => {
            let (binder, body) = if avoid.vars.contains(binder) {
                let fresh = fresh_ident(binder, &used.vars);
                used.vars.insert(fresh.clone());
                let body = subst_name(body, binder, &Name::Var(fresh.clone()))
                    .expect("fresh variable cannot be captured");
                (fresh, body)
            } else {
                (binder.clone(), (**body).clone())
            };
            Process::input(subject.clone(), binder, rename_rec(&body, avoid, used))
        }
        Process::Output {
            subject,
            payload,
            body,
        } => Process::output(subject.clone(), payload.clone(), rename_rec(body, avoid, used)),
        Process::Par(l, r) => {
            let l = rename_rec(l, avoid, used);
            Process::par(l, rename_rec(r, avoid, used))
        }
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            let (channel, body) = if avoid.channels.contains(channel) {
                let fresh = fresh_ident(channel, &used.channels);
                used.channels.insert(fresh.clone());
                (fresh.clone(), rename_channel(body, channel, &fresh))
            } else {
                (channel.clone(), (**body).clone())
            };
            Process::new_session(
                channel,
                pos_type.clone(),
                neg_type.clone(),
                rename_rec(&body, avoid, used),
            )
        }
        Process::Rec { index, var, body } => {
            let (var, body) = if avoid.proc_vars.contains(var) {
                let fresh = fresh_ident(var, &used.proc_vars);
                used.proc_vars.insert(fresh.clone());
                let body = subst_proc(body, var, &Process::Var(fresh.clone()))
                    .expect("fresh process variable cannot be captured");
                (fresh, body)
            } else {
                (var.clone(), (**body).clone())
            };
            Process::rec(*index, var, rename_rec(&body, avoid, used))
        }
    }
}

/// `p[v/x]`, alpha-renaming binders of `p` first when needed. `None` when a
/// literal would land in subject position.
pub fn subst_value_renaming(p: &Process, x: &str, v: &Value) -> Option<Process> {
    if let Some(q) = subst_value(p, x, v) {
        return Some(q);
    }
    let Value::Name(n) = v else { return None };
    let mut avoid = NameSets::default();
    avoid.add_name(n);
    let renamed = rename_binders(p, &avoid);
    Some(subst_value(&renamed, x, v).expect("substitution defined after renaming"))
}

/// `p[q/X]`, alpha-renaming binders of `p` first when needed.
pub fn subst_proc_renaming(p: &Process, var: &str, q: &Process) -> Process {
    if let Some(r) = subst_proc(p, var, q) {
        return r;
    }
    let mut avoid = NameSets::default();
    for n in free_names(q) {
        avoid.add_name(&n);
    }
    avoid.proc_vars.extend(free_proc_vars(q));
    let renamed = rename_binders(p, &avoid);
    subst_proc(&renamed, var, q).expect("substitution defined after renaming")
}

/// One r-rec step on a thread headed by a recursion with nonzero index.
pub fn unfold_thread(p: &Process) -> Option<Process> {
    let Process::Rec { index, var, body } = p else {
        return None;
    };
    let next = index.decrement()?;
    let folded = Process::rec(next, var.clone(), (**body).clone());
    Some(subst_proc_renaming(body, var, &folded))
}

/// All one-step successors, communications first (by sender, then
/// receiver position), then unfoldings by position.
pub fn step(s: &CanonState) -> Vec<(RedexLabel, CanonState)> {
    let threads = s.threads();
    let mut out = Vec::new();
    for (i, ti) in threads.iter().enumerate() {
        let Process::Output {
            subject: Name::Endpoint(e),
            payload,
            body: cont,
        } = ti
        else {
            continue;
        };
        for (j, tj) in threads.iter().enumerate() {
            if i == j {
                continue;
            }
            let Process::Input {
                subject: Name::Endpoint(f),
                binder,
                body,
            } = tj
            else {
                continue;
            };
            if f.channel != e.channel || f.polarity != e.polarity.co() {
                continue;
            }
            // A literal received into subject position is a stuck redex.
            let Some(received) = subst_value_renaming(body, binder, payload) else {
                continue;
            };
            let mut next: Vec<Process> = Vec::with_capacity(threads.len());
            for (k, t) in threads.iter().enumerate() {
                if k == i {
                    next.push((**cont).clone());
                } else if k == j {
                    next.push(received.clone());
                } else {
                    next.push(t.clone());
                }
            }
            let label = RedexLabel {
                kind: RedexKind::Comm {
                    channel: e.channel.clone(),
                    payload: payload.to_string(),
                },
                threads: vec![i, j],
            };
            out.push((label, CanonState::from_parts(s.channels().to_vec(), next)));
        }
    }
    for (i, t) in threads.iter().enumerate() {
        let Process::Rec { index, var, .. } = t else {
            continue;
        };
        let Some(unfolded) = unfold_thread(t) else {
            continue;
        };
        let mut next = threads.to_vec();
        next[i] = unfolded;
        let label = RedexLabel {
            kind: RedexKind::Rec {
                var: var.clone(),
                index: *index,
            },
            threads: vec![i],
        };
        out.push((label, CanonState::from_parts(s.channels().to_vec(), next)));
    }
    out
}

/// True iff no reduction applies.
pub fn is_normal_form(s: &CanonState) -> bool {
    step(s).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::canon::canonicalize;
    use crate::syntax::parser::parse_process;

    fn c(s: &str) -> CanonState {
        canonicalize(&parse_process(s).unwrap())
    }

    #[test]
    fn single_comm() {
        let s = c("new a . new c . (a+!c+.0 | a-?(x).0)");
        let succ = step(&s);
        assert_eq!(succ.len(), 1);
        assert!(succ[0].0.is_comm());
        assert!(succ[0].1.is_empty());
        assert!(succ[0].1.channels().is_empty());
    }

    #[test]
    fn zero_index_is_stuck() {
        assert!(step(&c("rec[0] X.a+!1.X")).is_empty());
        assert!(!is_normal_form(&c("rec[1] X.X")));
        assert!(is_normal_form(&c("0")));
        assert!(is_normal_form(&c(
            "new a . new b . (a+?(x).b-!4.0 | b+?(y).a-!3.0)"
        )));
    }

    #[test]
    fn measure_example_unfolding() {
        let s = c("rec[3] X.(rec[6] Y.Y | X)");
        let succ = step(&s);
        assert_eq!(succ.len(), 1);
        let expected = c("rec[6] Y.Y | rec[2] X.(rec[6] Y.Y | X)");
        assert_eq!(succ[0].1, expected);
        let mut printed: Vec<String> = succ[0].1.threads().iter().map(|t| t.to_string()).collect();
        printed.sort();
        assert_eq!(printed, vec!["rec[2] X.(rec[6] Y.Y | X)", "rec[6] Y.Y"]);
    }

    #[test]
    fn comm_payload_avoids_capture() {
        let s = c("new c . (a+!c+.0 | a-?(x).new c . (x!1.0 | c-?(z).0))");
        let succ = step(&s);
        assert_eq!(succ.len(), 1);
        let t = &succ[0].1;
        // The received endpoint must remain distinct from the inner restriction.
        let inner = t.threads().len();
        assert_eq!(inner, 2);
        assert_eq!(t.channels().len(), 2);
        assert!(step(t).is_empty());
    }

    #[test]
    fn literal_in_subject_position_is_stuck() {
        assert!(step(&c("a+!7.0 | a-?(x).x!1.0")).is_empty());
    }

    #[test]
    fn literal_payloads() {
        let s = c("a+!7.0 | a-?(x).b+!x.0");
        let succ = step(&s);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, c("b+!7.0"));
    }
}
