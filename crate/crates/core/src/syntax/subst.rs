//! Free names, capture-avoiding substitutions and alpha-renaming.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Endpoint, Name, Process, SessionType, Value};

/// Free names of a process. An input binds its variable, a restriction binds
/// both endpoints of its channel, recursion binds no names.
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free_names(p, &mut out);
    out
}

fn collect_free_names(p: &Process, out: &mut BTreeSet<Name>) {
    match p {
        Process::Idle | Process::Var(_) => {}
        Process::Input {
            subject,
            binder,
            body,
        } => {
            out.insert(subject.clone());
            let mut inner = BTreeSet::new();
            collect_free_names(body, &mut inner);
            inner.remove(&Name::Var(binder.clone()));
            out.extend(inner);
        }
        Process::Output {
            subject,
            payload,
            body,
        } => {
            out.insert(subject.clone());
            if let Value::Name(n) = payload {
                out.insert(n.clone());
            }
            collect_free_names(body, out);
        }
        Process::Par(l, r) => {
            collect_free_names(l, out);
            collect_free_names(r, out);
        }
        Process::New { channel, body, .. } => {
            let mut inner = BTreeSet::new();
            collect_free_names(body, &mut inner);
            inner.retain(|n| !matches!(n, Name::Endpoint(e) if &e.channel == channel));
            out.extend(inner);
        }
        Process::Rec { body, .. } => collect_free_names(body, out),
    }
}

/// Channels of the free endpoints of a process.
pub fn free_channels(p: &Process) -> BTreeSet<String> {
    free_names(p)
        .into_iter()
        .filter_map(|n| match n {
            Name::Endpoint(e) => Some(e.channel),
            Name::Var(_) => None,
        })
        .collect()
}

/// Free process variables.
pub fn free_proc_vars(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_fpv(p, &mut out);
    out
}

fn collect_fpv(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Idle => {}
        Process::Var(x) => {
            out.insert(x.clone());
        }
        Process::Input { body, .. } | Process::Output { body, .. } | Process::New { body, .. } => {
            collect_fpv(body, out)
        }
        Process::Par(l, r) => {
            collect_fpv(l, out);
            collect_fpv(r, out);
        }
        Process::Rec { var, body, .. } => {
            let mut inner = BTreeSet::new();
            collect_fpv(body, &mut inner);
            inner.remove(var);
            out.extend(inner);
        }
    }
}

fn occurs_free_var(p: &Process, x: &str) -> bool {
    free_names(p).contains(&Name::Var(x.to_string()))
}

/// `p[e/x]`: replaces the free occurrences of variable `x` by the name `e`.
/// Returns `None` when `e` would be captured by a binder on the way to a free
/// occurrence of `x`.
pub fn subst_name(p: &Process, x: &str, e: &Name) -> Option<Process> {
    subst_value(p, x, &Value::Name(e.clone()))
}

/// Like [`subst_name`] but the replacement may be a base literal, which never
/// gets captured.
pub fn subst_value(p: &Process, x: &str, v: &Value) -> Option<Process> {
    let rename = |n: &Name| -> Name {
        match (n, v) {
            (Name::Var(y), Value::Name(e)) if y == x => e.clone(),
            _ => n.clone(),
        }
    };
    Some(match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => {
            if matches!(subject, Name::Var(y) if y == x) && !matches!(v, Value::Name(_)) {
                // A literal cannot stand in subject position.
                return None;
            }
            let body = if binder == x {
                (**body).clone()
            } else {
                if matches!(v, Value::Name(Name::Var(y)) if y == binder) && occurs_free_var(body, x)
                {
                    return None;
                }
                subst_value(body, x, v)?
            };
            Process::input(rename(subject), binder.clone(), body)
        }
        Process::Output {
            subject,
            payload,
            body,
        } => {
            if matches!(subject, Name::Var(y) if y == x) && !matches!(v, Value::Name(_)) {
                return None;
            }
            let payload = match payload {
                Value::Name(Name::Var(y)) if y == x => v.clone(),
                other => other.clone(),
            };
            Process::output(rename(subject), payload, subst_value(body, x, v)?)
        }
        Process::Par(l, r) => Process::par(subst_value(l, x, v)?, subst_value(r, x, v)?),
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            let captured = matches!(v, Value::Name(Name::Endpoint(e)) if &e.channel == channel);
            if captured && occurs_free_var(body, x) {
                return None;
            }
            Process::new_session(
                channel.clone(),
                pos_type.clone(),
                neg_type.clone(),
                subst_value(body, x, v)?,
            )
        }
        Process::Rec { index, var, body } => {
            Process::rec(*index, var.clone(), subst_value(body, x, v)?)
        }
    })
}

/// `p[q/X]`: replaces the free occurrences of process variable `X` by `q`.
/// Returns `None` when a free name or free process variable of `q` would be
/// captured by a binder of `p` enclosing a free occurrence of `X`.
pub fn subst_proc(p: &Process, var: &str, q: &Process) -> Option<Process> {
    let q_names = free_names(q);
    let q_channels: BTreeSet<&str> = q_names
        .iter()
        .filter_map(|n| n.as_endpoint().map(|e| e.channel.as_str()))
        .collect();
    let q_fpv = free_proc_vars(q);
    subst_proc_inner(p, var, q, &q_names, &q_channels, &q_fpv)
}

fn subst_proc_inner(
    p: &Process,
    var: &str,
    q: &Process,
    q_names: &BTreeSet<Name>,
    q_channels: &BTreeSet<&str>,
    q_fpv: &BTreeSet<String>,
) -> Option<Process> {
    let go = |b: &Process| subst_proc_inner(b, var, q, q_names, q_channels, q_fpv);
    let var_free_in = |b: &Process| free_proc_vars(b).contains(var);
    Some(match p {
        Process::Idle => Process::Idle,
        Process::Var(y) if y == var => q.clone(),
        Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => {
            if q_names.contains(&Name::Var(binder.clone())) && var_free_in(body) {
                return None;
            }
            Process::input(subject.clone(), binder.clone(), go(body)?)
        }
        Process::Output {
            subject,
            payload,
            body,
        } => Process::output(subject.clone(), payload.clone(), go(body)?),
        Process::Par(l, r) => Process::par(go(l)?, go(r)?),
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            if q_channels.contains(channel.as_str()) && var_free_in(body) {
                return None;
            }
            Process::new_session(channel.clone(), pos_type.clone(), neg_type.clone(), go(body)?)
        }
        Process::Rec { index, var: y, body } => {
            if y == var {
                p.clone()
            } else {
                if q_fpv.contains(y) && var_free_in(body) {
                    return None;
                }
                Process::rec(*index, y.clone(), go(body)?)
            }
        }
    })
}

/// Every identifier occurring in a process, free or bound, per namespace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameSets {
    pub channels: BTreeSet<String>,
    pub vars: BTreeSet<String>,
    pub proc_vars: BTreeSet<String>,
}

impl NameSets {
    pub fn of(p: &Process) -> NameSets {
        let mut s = NameSets::default();
        s.add_process(p);
        s
    }

    pub fn add_process(&mut self, p: &Process) {
        match p {
            Process::Idle => {}
            Process::Var(x) => {
                self.proc_vars.insert(x.clone());
            }
            Process::Input {
                subject,
                binder,
                body,
            } => {
                self.add_name(subject);
                self.vars.insert(binder.clone());
                self.add_process(body);
            }
            Process::Output {
                subject,
                payload,
                body,
            } => {
                self.add_name(subject);
                if let Value::Name(n) = payload {
                    self.add_name(n);
                }
                self.add_process(body);
            }
            Process::Par(l, r) => {
                self.add_process(l);
                self.add_process(r);
            }
            Process::New { channel, body, .. } => {
                self.channels.insert(channel.clone());
                self.add_process(body);
            }
            Process::Rec { var, body, .. } => {
                self.proc_vars.insert(var.clone());
                self.add_process(body);
            }
        }
    }

    pub fn add_name(&mut self, n: &Name) {
        match n {
            Name::Var(x) => {
                self.vars.insert(x.clone());
            }
            Name::Endpoint(e) => {
                self.channels.insert(e.channel.clone());
            }
        }
    }

    pub fn extend(&mut self, other: &NameSets) {
        self.channels.extend(other.channels.iter().cloned());
        self.vars.extend(other.vars.iter().cloned());
        self.proc_vars.extend(other.proc_vars.iter().cloned());
    }
}

/// Picks `base` if unused, otherwise `base` (trailing digits stripped)
/// followed by the smallest positive counter not in `used`.
pub fn fresh_ident(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "n" } else { stem };
    (1u64..)
        .map(|k| format!("{stem}{k}"))
        .find(|cand| !used.contains(cand))
        .expect("unbounded counter")
}

#[derive(Clone, Default)]
struct Scope {
    channels: BTreeMap<String, String>,
    vars: BTreeMap<String, String>,
    proc_vars: BTreeMap<String, String>,
}

/// Alpha-renames binders so that no binder reuses a name that is free in
/// the process, bound elsewhere in it, or listed in `reserved`. Binders that
/// do not clash keep their names.
pub fn freshen_avoiding(p: &Process, reserved: &NameSets) -> Process {
    let mut used = reserved.clone();
    for n in free_names(p) {
        used.add_name(&n);
    }
    used.proc_vars.extend(free_proc_vars(p));
    freshen_rec(p, &Scope::default(), &mut used)
}

/// Globally freshens binders (see [`freshen_avoiding`]).
pub fn freshen(p: &Process) -> Process {
    freshen_avoiding(p, &NameSets::default())
}

fn claim(name: &str, used: &mut BTreeSet<String>) -> String {
    let n = fresh_ident(name, used);
    used.insert(n.clone());
    n
}

fn freshen_rec(p: &Process, scope: &Scope, used: &mut NameSets) -> Process {
    let map_name = |n: &Name| -> Name {
        match n {
            Name::Var(x) => Name::Var(scope.vars.get(x).cloned().unwrap_or_else(|| x.clone())),
            Name::Endpoint(e) => Name::Endpoint(Endpoint {
                channel: scope
                    .channels
                    .get(&e.channel)
                    .cloned()
                    .unwrap_or_else(|| e.channel.clone()),
                polarity: e.polarity,
            }),
        }
    };
    match p {
        Process::Idle => Process::Idle,
        Process::Var(x) => {
            Process::Var(scope.proc_vars.get(x).cloned().unwrap_or_else(|| x.clone()))
        }
        Process::Input {
            subject,
            binder,
            body,
        } => {
            let subject = map_name(subject);
            let fresh = claim(binder, &mut used.vars);
            let mut inner = scope.clone();
            inner.vars.insert(binder.clone(), fresh.clone());
            Process::input(subject, fresh, freshen_rec(body, &inner, used))
        }
        Process::Output {
            subject,
            payload,
            body,
        } => {
            let payload = match payload {
                Value::Name(n) => Value::Name(map_name(n)),
                v => v.clone(),
            };
            Process::output(map_name(subject), payload, freshen_rec(body, scope, used))
        }
        Process::Par(l, r) => {
            let l = freshen_rec(l, scope, used);
            let r = freshen_rec(r, scope, used);
            Process::par(l, r)
        }
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            let fresh = claim(channel, &mut used.channels);
            let mut inner = scope.clone();
            inner.channels.insert(channel.clone(), fresh.clone());
            Process::new_session(
                fresh,
                pos_type.clone(),
                neg_type.clone(),
                freshen_rec(body, &inner, used),
            )
        }
        Process::Rec { index, var, body } => {
            let fresh = claim(var, &mut used.proc_vars);
            let mut inner = scope.clone();
            inner.proc_vars.insert(var.clone(), fresh.clone());
            Process::rec(*index, fresh, freshen_rec(body, &inner, used))
        }
    }
}

/// Renames the free endpoints on channel `from` to channel `to`. The caller
/// guarantees `to` does not occur in `p`.
pub fn rename_channel(p: &Process, from: &str, to: &str) -> Process {
    let ren = |n: &Name| -> Name {
        match n {
            Name::Endpoint(e) if e.channel == from => {
                Name::Endpoint(Endpoint::new(to, e.polarity))
            }
            other => other.clone(),
        }
    };
    match p {
        Process::Idle | Process::Var(_) => p.clone(),
        Process::Input {
            subject,
            binder,
            body,
        } => Process::input(ren(subject), binder.clone(), rename_channel(body, from, to)),
        Process::Output {
            subject,
            payload,
            body,
        } => {
            let payload = match payload {
                Value::Name(n) => Value::Name(ren(n)),
                v => v.clone(),
            };
            Process::output(ren(subject), payload, rename_channel(body, from, to))
        }
        Process::Par(l, r) => Process::par(rename_channel(l, from, to), rename_channel(r, from, to)),
        Process::New { channel, .. } if channel == from => p.clone(),
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => Process::new_session(
            channel.clone(),
            pos_type.clone(),
            neg_type.clone(),
            rename_channel(body, from, to),
        ),
        Process::Rec { index, var, body } => {
            Process::rec(*index, var.clone(), rename_channel(body, from, to))
        }
    }
}

/// Free type variables of a session type.
pub fn type_free_vars(t: &SessionType) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_ftv(t, &mut out);
    out
}

fn collect_ftv(t: &SessionType, out: &mut BTreeSet<String>) {
    match t {
        SessionType::End | SessionType::Int => {}
        SessionType::Var(v) => {
            out.insert(v.clone());
        }
        SessionType::Prefix { payload, cont, .. } => {
            collect_ftv(payload, out);
            collect_ftv(cont, out);
        }
        SessionType::Rec { var, body, .. } => {
            let mut inner = BTreeSet::new();
            collect_ftv(body, &mut inner);
            inner.remove(var);
            out.extend(inner);
        }
    }
}

fn type_all_vars(t: &SessionType, out: &mut BTreeSet<String>) {
    match t {
        SessionType::End | SessionType::Int => {}
        SessionType::Var(v) => {
            out.insert(v.clone());
        }
        SessionType::Prefix { payload, cont, .. } => {
            type_all_vars(payload, out);
            type_all_vars(cont, out);
        }
        SessionType::Rec { var, body, .. } => {
            out.insert(var.clone());
            type_all_vars(body, out);
        }
    }
}

/// `t[s/v]`, capture-avoiding: inner binders that would capture a free
/// variable of `s` are renamed.
pub fn subst_type_free(t: &SessionType, v: &str, s: &SessionType) -> SessionType {
    let s_free = type_free_vars(s);
    subst_type_inner(t, v, s, &s_free)
}

fn subst_type_inner(
    t: &SessionType,
    v: &str,
    s: &SessionType,
    s_free: &BTreeSet<String>,
) -> SessionType {
    match t {
        SessionType::End | SessionType::Int => t.clone(),
        SessionType::Var(w) if w == v => s.clone(),
        SessionType::Var(_) => t.clone(),
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
            subst_type_inner(payload, v, s, s_free),
            subst_type_inner(cont, v, s, s_free),
        ),
        SessionType::Rec { index, var, body } => {
            if var == v {
                return t.clone();
            }
            if s_free.contains(var) && type_free_vars(body).contains(v) {
                let mut used = BTreeSet::new();
                type_all_vars(body, &mut used);
                used.extend(s_free.iter().cloned());
                used.insert(v.to_string());
                let fresh = fresh_ident(var, &used);
                let renamed = subst_type_inner(
                    body,
                    var,
                    &SessionType::Var(fresh.clone()),
                    &BTreeSet::from([fresh.clone()]),
                );
                SessionType::rec(*index, fresh, subst_type_inner(&renamed, v, s, s_free))
            } else {
                SessionType::rec(*index, var.clone(), subst_type_inner(body, v, s, s_free))
            }
        }
    }
}
