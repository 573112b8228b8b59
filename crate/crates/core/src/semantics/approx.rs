//! Finite approximants and the approximation preorder.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::canon::CanonState;
use crate::syntax::ast::{Index, Name, Process, SessionType, Value};
use crate::types::map_type_indices;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("not a user process: finite index {0} occurs")]
    NotUserProcess(u64),
}

/// Replaces every `inf` index in `p` and in its annotations with `iota`,
/// leaving finite indices alone.
pub fn cap_indices(p: &Process, iota: Index) -> Process {
    let f = |i: Index| if i == Index::Inf { iota } else { i };
    map_indices(p, &f)
}

/// The `iota`-approximant of a user process.
pub fn approximant(p: &Process, iota: Index) -> Result<Process, ApproxError> {
    let mut finite = None;
    p.for_each_index(&mut |i| {
        if let Index::Fin(n) = i {
            finite.get_or_insert(n);
        }
    });
    match finite {
        Some(n) => Err(ApproxError::NotUserProcess(n)),
        None => Ok(cap_indices(p, iota)),
    }
}

/// Type-level approximant: every `inf` recursion becomes `iota`.
pub fn approximant_type(t: &SessionType, iota: Index) -> SessionType {
    map_type_indices(t, &|i| if i == Index::Inf { iota } else { i })
}

fn map_indices(p: &Process, f: &impl Fn(Index) -> Index) -> Process {
    match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => Process::input(subject.clone(), binder.clone(), map_indices(body, f)),
        Process::Output {
            subject,
            payload,
            body,
        } => Process::output(subject.clone(), payload.clone(), map_indices(body, f)),
        Process::Par(l, r) => Process::par(map_indices(l, f), map_indices(r, f)),
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => Process::new_session(
            channel.clone(),
            pos_type.as_ref().map(|t| map_type_indices(t, f)),
            neg_type.as_ref().map(|t| map_type_indices(t, f)),
            map_indices(body, f),
        ),
        Process::Rec { index, var, body } => Process::rec(f(*index), var.clone(), map_indices(body, f)),
    }
}

/// Correspondence between names of the smaller and the larger term.
#[derive(Clone, Default)]
struct Matching {
    /// Bijection between hoisted channels.
    chans: BTreeMap<String, String>,
    chans_rev: BTreeMap<String, String>,
}

#[derive(Clone, Default)]
struct Scope {
    chans: Vec<(String, String)>,
    vars: Vec<(String, String)>,
    pvars: Vec<(String, String)>,
    tvars: Vec<(String, String)>,
}

fn lookup(pairs: &[(String, String)], left: &str, right: &str) -> Option<bool> {
    for (l, r) in pairs.iter().rev() {
        if l == left || r == right {
            return Some(l == left && r == right);
        }
    }
    None
}

struct Ctx<'a> {
    hoisted_left: &'a BTreeSet<String>,
    hoisted_right: &'a BTreeSet<String>,
}

impl Ctx<'_> {
    fn chan(&self, a: &str, b: &str, sc: &Scope, m: &mut Matching) -> bool {
        if let Some(ok) = lookup(&sc.chans, a, b) {
            return ok;
        }
        match (self.hoisted_left.contains(a), self.hoisted_right.contains(b)) {
            (true, true) => match (m.chans.get(a), m.chans_rev.get(b)) {
                (Some(x), _) => x == b,
                (None, Some(_)) => false,
                (None, None) => {
                    m.chans.insert(a.to_string(), b.to_string());
                    m.chans_rev.insert(b.to_string(), a.to_string());
                    true
                }
            },
            (false, false) => a == b,
            _ => false,
        }
    }

    fn name(&self, a: &Name, b: &Name, sc: &Scope, m: &mut Matching) -> bool {
        match (a, b) {
            (Name::Var(x), Name::Var(y)) => lookup(&sc.vars, x, y).unwrap_or(x == y),
            (Name::Endpoint(e), Name::Endpoint(f)) => {
                e.polarity == f.polarity && self.chan(&e.channel, &f.channel, sc, m)
            }
            _ => false,
        }
    }

    fn value(&self, a: &Value, b: &Value, sc: &Scope, m: &mut Matching) -> bool {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => x == y,
            (Value::Name(x), Value::Name(y)) => self.name(x, y, sc, m),
            _ => false,
        }
    }

    fn proc(&self, p: &Process, q: &Process, sc: &Scope, m: &mut Matching) -> bool {
        match (p, q) {
            (Process::Idle, Process::Idle) => true,
            (Process::Var(x), Process::Var(y)) => lookup(&sc.pvars, x, y).unwrap_or(x == y),
            (
                Process::Input {
                    subject: s1,
                    binder: x1,
                    body: b1,
                },
                Process::Input {
                    subject: s2,
                    binder: x2,
                    body: b2,
                },
            ) => {
                if !self.name(s1, s2, sc, m) {
                    return false;
                }
                let mut inner = sc.clone();
                inner.vars.push((x1.clone(), x2.clone()));
                self.proc(b1, b2, &inner, m)
            }
            (
                Process::Output {
                    subject: s1,
                    payload: v1,
                    body: b1,
                },
                Process::Output {
                    subject: s2,
                    payload: v2,
                    body: b2,
                },
            ) => self.name(s1, s2, sc, m) && self.value(v1, v2, sc, m) && self.proc(b1, b2, sc, m),
            (Process::Par(l1, r1), Process::Par(l2, r2)) => {
                self.proc(l1, l2, sc, m) && self.proc(r1, r2, sc, m)
            }
            (
                Process::New {
                    channel: c1,
                    pos_type: t1,
                    neg_type: u1,
                    body: b1,
                },
                Process::New {
                    channel: c2,
                    pos_type: t2,
                    neg_type: u2,
                    body: b2,
                },
            ) => {
                annotation_leq(t1, t2) && annotation_leq(u1, u2) && {
                    let mut inner = sc.clone();
                    inner.chans.push((c1.clone(), c2.clone()));
                    self.proc(b1, b2, &inner, m)
                }
            }
            (
                Process::Rec {
                    index: i1,
                    var: x1,
                    body: b1,
                },
                Process::Rec {
                    index: i2,
                    var: x2,
                    body: b2,
                },
            ) => {
                i1 <= i2 && {
                    let mut inner = sc.clone();
                    inner.pvars.push((x1.clone(), x2.clone()));
                    self.proc(b1, b2, &inner, m)
                }
            }
            _ => false,
        }
    }
}

fn annotation_leq(a: &Option<SessionType>, b: &Option<SessionType>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(s), Some(t)) => type_leq(s, t, &mut Scope::default()),
        _ => false,
    }
}

/// Pointwise `<=` on recursion indices of otherwise alpha-equal types.
pub fn approx_leq_type(s: &SessionType, t: &SessionType) -> bool {
    type_leq(s, t, &mut Scope::default())
}

fn type_leq(s: &SessionType, t: &SessionType, sc: &mut Scope) -> bool {
    match (s, t) {
        (SessionType::End, SessionType::End) | (SessionType::Int, SessionType::Int) => true,
        (SessionType::Var(a), SessionType::Var(b)) => lookup(&sc.tvars, a, b).unwrap_or(a == b),
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
            d1 == d2
                && o1 == o2
                && c1 == c2
                && type_leq(p1, p2, &mut Scope::default())
                && type_leq(k1, k2, sc)
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
            if i1 > i2 {
                return false;
            }
            sc.tvars.push((v1.clone(), v2.clone()));
            let r = type_leq(b1, b2, sc);
            sc.tvars.pop();
            r
        }
        _ => false,
    }
}

/// `p ⊑ q`: same structure up to renaming of bound names, every index of
/// `p` at most the corresponding index of `q`.
pub fn approx_leq(p: &Process, q: &Process) -> bool {
    let empty = BTreeSet::new();
    let ctx = Ctx {
        hoisted_left: &empty,
        hoisted_right: &empty,
    };
    ctx.proc(p, q, &Scope::default(), &mut Matching::default())
}

/// `s ⊑ t` on canonical states: some bijection between threads and between
/// restricted channels relates every thread of `s` to a thread of `t`.
pub fn approx_leq_state(s: &CanonState, t: &CanonState) -> bool {
    if s.threads().len() != t.threads().len() || s.channels().len() != t.channels().len() {
        return false;
    }
    let left: BTreeSet<String> = s.channels().iter().map(|c| c.name.clone()).collect();
    let right: BTreeSet<String> = t.channels().iter().map(|c| c.name.clone()).collect();
    let ctx = Ctx {
        hoisted_left: &left,
        hoisted_right: &right,
    };
    let shapes_l: Vec<String> = s.threads().iter().map(shape).collect();
    let shapes_r: Vec<String> = t.threads().iter().map(shape).collect();
    let mut used = vec![false; t.threads().len()];
    let ok = assign(&ctx, s, t, &shapes_l, &shapes_r, 0, &mut used, Matching::default());
    match ok {
        None => false,
        Some(m) => {
            // Channels never mentioned by a thread must still pair up by annotation.
            let unmatched_l: Vec<_> = s.channels().iter().filter(|c| !m.chans.contains_key(&c.name)).collect();
            let mut unmatched_r: Vec<_> =
                t.channels().iter().filter(|c| !m.chans_rev.contains_key(&c.name)).collect();
            for c in unmatched_l {
                let Some(k) = unmatched_r.iter().position(|d| {
                    annotation_leq(&c.pos_type, &d.pos_type) && annotation_leq(&c.neg_type, &d.neg_type)
                }) else {
                    return false;
                };
                unmatched_r.remove(k);
            }
            s.channels().iter().all(|c| match m.chans.get(&c.name) {
                Some(d) => {
                    let d = t.channel(d).expect("matched channel exists");
                    annotation_leq(&c.pos_type, &d.pos_type) && annotation_leq(&c.neg_type, &d.neg_type)
                }
                None => true,
            })
        }
    }
}

/// Thread shape ignoring names and indices, used to prune matching.
fn shape(p: &Process) -> String {
    match p {
        Process::Idle => "0".into(),
        Process::Var(_) => "X".into(),
        Process::Input { body, .. } => format!("?.{}", shape(body)),
        Process::Output { payload, body, .. } => {
            let v = if matches!(payload, Value::Int(_)) { "i" } else { "n" };
            format!("!{v}.{}", shape(body))
        }
        Process::Par(l, r) => format!("({}|{})", shape(l), shape(r)),
        Process::New { body, .. } => format!("new.{}", shape(body)),
        Process::Rec { body, .. } => format!("rec.{}", shape(body)),
    }
}

#[allow(clippy::too_many_arguments)]
fn assign(
    ctx: &Ctx<'_>,
    s: &CanonState,
    t: &CanonState,
    shapes_l: &[String],
    shapes_r: &[String],
    i: usize,
    used: &mut Vec<bool>,
    m: Matching,
) -> Option<Matching> {
    if i == s.threads().len() {
        return Some(m);
    }
    for j in 0..t.threads().len() {
        if used[j] || shapes_l[i] != shapes_r[j] {
            continue;
        }
        let mut m2 = m.clone();
        if ctx.proc(&s.threads()[i], &t.threads()[j], &Scope::default(), &mut m2) {
            used[j] = true;
            if let Some(done) = assign(ctx, s, t, shapes_l, shapes_r, i + 1, used, m2) {
                return Some(done);
            }
            used[j] = false;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::canon::canonicalize;
    use crate::syntax::parser::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn approximants() {
        assert_eq!(approximant(&Process::Idle, Index::Fin(3)), Ok(Process::Idle));
        assert_eq!(
            approximant(&p("rec[inf] X. a-?(x).b+!x.X"), Index::Fin(0)),
            Ok(p("rec[0] X. a-?(x).b+!x.X"))
        );
        assert_eq!(
            approximant(&p("rec[2] X.X"), Index::Fin(1)),
            Err(ApproxError::NotUserProcess(2))
        );
        let annotated = p("new a : rec[inf] t. ![x,y] end . t . rec[inf] X. a+!1.X");
        let approx = approximant(&annotated, Index::Fin(1)).unwrap();
        assert!(approx.is_finite());
        assert!(approx_leq(&approx, &annotated));
    }

    #[test]
    fn preorder() {
        let x = p("rec[inf] X. (a+!1.X | rec[inf] Y. b-?(y).Y)");
        assert!(approx_leq(&x, &x));
        assert!(approx_leq(&p("rec[2] X.a+!1.X"), &p("rec[inf] X.a+!1.X")));
        assert!(!approx_leq(&p("rec[inf] X.a+!1.X"), &p("rec[2] X.a+!1.X")));
        assert!(approx_leq(&p("rec[2] Y.a+!1.Y"), &p("rec[3] X.a+!1.X")));
        assert!(!approx_leq(&p("rec[2] X.a+!1.X"), &p("rec[3] X.a+!2.X")));
    }

    #[test]
    fn state_preorder() {
        let s = canonicalize(&p("new a . (rec[1] X.a+!1.X | a-?(x).0)"));
        let t = canonicalize(&p("new b . (b-?(y).0 | rec[inf] Y.b+!1.Y)"));
        assert!(approx_leq_state(&s, &t));
        assert!(!approx_leq_state(&t, &s));
        let u = canonicalize(&p("new b . (b+?(y).0 | rec[inf] Y.b+!1.Y)"));
        assert!(!approx_leq_state(&s, &u));
    }
}
