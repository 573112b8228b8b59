//! The typing judgment `Σ; Γ ⊢ι Δ P` as a syntax-directed checker that
//! collects priority constraints, plus the constraint solver and context
//! reduction.

// Diagnostics carry their constraint witnesses by value.
#![allow(clippy::result_large_err)]

mod context;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use context::{advance_channel, balanced, context_reduce, endpoints, state_env, unfold_name};
pub use solve::{solve, Constraint, Origin, SolveResult, Witness, WitnessKind};

use crate::semantics::subst_value_renaming;
use crate::syntax::ast::{Direction, Index, Name, Process, Program, SessionType, Value};
use crate::syntax::subst::{free_names, free_proc_vars, fresh_ident, rename_channel, NameSets};
use crate::types::{
    alpha_eq, dual_full, dual_strict_report, obligation, syntactic_dual, well_formed,
    well_formed_payload, TypeError, TypeVarEnv,
};

/// Linear name environment `Δ`.
pub type NameEnv = BTreeMap<Name, SessionType>;

/// Process environment `Γ`: each process variable maps to the environment
/// expected where it occurs; its range holds type variables only.
pub type ProcEnv = BTreeMap<String, NameEnv>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    LinearityViolation,
    UnusedLinearName,
    SubjectTypeMismatch,
    RecShapeMismatch,
    DualityFailure,
    UnsatisfiableConstraints,
    EnvironmentMismatch,
    UnboundName,
    UnboundProcessVariable,
    IllFormedType,
    NotClosed,
    Internal,
}

/// A typing failure, located by rule and by the subterm being checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub rule: String,
    pub position: String,
    pub message: String,
    pub constraints: Vec<Constraint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}] at `{}`: {}", self.kind, self.rule, self.position, self.message)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

/// One rule application of a successful derivation, in pre-order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationStep {
    pub rule: String,
    pub depth: usize,
    pub site: String,
}

/// Result of checking one judgment. `ok` means a derivation exists modulo
/// the satisfiability of `constraints`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub ok: bool,
    pub constraints: Vec<Constraint>,
    pub diagnostics: Vec<Diagnostic>,
    pub derivation: Vec<DerivationStep>,
}

/// Duality used by t-session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualityMode {
    /// Structural rules only; the discipline of judgments at index 0.
    Strict,
    /// Closed under unfolding.
    Full,
}

impl DualityMode {
    pub fn for_index(iota: Index) -> DualityMode {
        if iota == Index::Fin(0) {
            DualityMode::Strict
        } else {
            DualityMode::Full
        }
    }
}

const SITE_WIDTH: usize = 72;

/// Short rendering of a subterm for diagnostics.
pub fn site(p: &Process) -> String {
    let s = p.to_string();
    if s.chars().count() <= SITE_WIDTH {
        s
    } else {
        let cut: String = s.chars().take(SITE_WIDTH - 3).collect();
        format!("{cut}...")
    }
}

fn diag(kind: DiagnosticKind, rule: &str, p: &Process, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        kind,
        rule: rule.to_string(),
        position: site(p),
        message: message.into(),
        constraints: Vec::new(),
        witness: None,
    }
}

/// Values of base type are unrestricted: they can be dropped or shared.
fn is_unrestricted(t: &SessionType) -> bool {
    t.is_base()
}

fn is_discardable(t: &SessionType) -> bool {
    t.is_end() || t.is_base()
}

struct Checker {
    iota: Index,
    mode: DualityMode,
    constraints: Vec<Constraint>,
    derivation: Vec<DerivationStep>,
    tvar_counter: usize,
}

type Checked = Result<(), Diagnostic>;

impl Checker {
    fn record(&mut self, rule: &str, depth: usize, p: &Process) {
        self.derivation.push(DerivationStep {
            rule: rule.to_string(),
            depth,
            site: site(p),
        });
    }

    fn ob(&self, sigma: &TypeVarEnv, t: &SessionType, rule: &str, p: &Process) -> Result<crate::syntax::ast::Priority, Diagnostic> {
        obligation(sigma, t).map_err(|e| diag(DiagnosticKind::IllFormedType, rule, p, e.to_string()))
    }

    /// t-end at demand sites: every binding left must be discardable.
    fn discard(&mut self, delta: &NameEnv, rule: &str, p: &Process, depth: usize) -> Checked {
        for (u, t) in delta {
            if !is_discardable(t) {
                return Err(diag(
                    DiagnosticKind::UnusedLinearName,
                    rule,
                    p,
                    format!("`{u}` has type `{t}` and is never used"),
                ));
            }
            if t.is_end() {
                self.record("t-end", depth, p);
            }
        }
        Ok(())
    }

    fn check(
        &mut self,
        sigma: &TypeVarEnv,
        gamma: &ProcEnv,
        delta: NameEnv,
        p: &Process,
        depth: usize,
    ) -> Checked {
        match p {
            Process::Idle => {
                self.record("t-idle", depth, p);
                self.discard(&delta, "t-idle", p, depth)
            }
            Process::Var(x) => self.check_var(gamma, delta, x, p, depth),
            Process::Input {
                subject,
                binder,
                body,
            } => self.check_input(sigma, gamma, delta, subject, binder, body, p, depth),
            Process::Output {
                subject,
                payload,
                body,
            } => self.check_output(sigma, gamma, delta, subject, payload, body, p, depth),
            Process::Par(l, r) => {
                self.record("t-par", depth, p);
                let (dl, dr) = split_env(&delta, l, r, gamma).map_err(|mut d| {
                    d.position = site(p);
                    d
                })?;
                self.check(sigma, gamma, dl, l, depth + 1)?;
                self.check(sigma, gamma, dr, r, depth + 1)
            }
            Process::New {
                channel,
                pos_type,
                neg_type,
                body,
            } => self.check_new(sigma, gamma, delta, channel, pos_type, neg_type, body, p, depth),
            Process::Rec { index, var, body } => {
                self.check_rec(sigma, gamma, delta, *index, var, body, p, depth)
            }
        }
    }

    fn check_var(&mut self, gamma: &ProcEnv, delta: NameEnv, x: &str, p: &Process, depth: usize) -> Checked {
        self.record("t-var", depth, p);
        let Some(expected) = gamma.get(x) else {
            return Err(diag(
                DiagnosticKind::UnboundProcessVariable,
                "t-var",
                p,
                format!("process variable `{x}` is not bound by an enclosing recursion"),
            ));
        };
        let mut rest = delta;
        for (u, t) in expected {
            match rest.remove(u) {
                Some(actual) if &actual == t => {}
                other => {
                    let found = other.map_or("nothing".to_string(), |t| format!("`{t}`"));
                    return Err(diag(
                        DiagnosticKind::EnvironmentMismatch,
                        "t-var",
                        p,
                        format!("`{u}` must have type `{t}` at `{x}`, found {found}"),
                    ));
                }
            }
        }
        self.discard(&rest, "t-var", p, depth)
    }

    /// Looks up the subject and checks the action shape.
    fn subject_type(
        &self,
        delta: &mut NameEnv,
        subject: &Name,
        dir: Direction,
        rule: &str,
        p: &Process,
    ) -> Result<(crate::syntax::ast::Priority, SessionType, SessionType), Diagnostic> {
        let Some(t) = delta.remove(subject) else {
            return Err(diag(
                DiagnosticKind::UnboundName,
                rule,
                p,
                format!("`{subject}` is not in the name environment"),
            ));
        };
        match t {
            SessionType::Prefix {
                dir: d,
                capability,
                payload,
                cont,
                ..
            } if d == dir => Ok((capability, *payload, *cont)),
            other => Err(diag(
                DiagnosticKind::SubjectTypeMismatch,
                rule,
                p,
                format!(
                    "`{subject}` has type `{other}`, expected an {} action",
                    if dir == Direction::In { "input" } else { "output" }
                ),
            )),
        }
    }

    fn guard_constraints(
        &mut self,
        sigma: &TypeVarEnv,
        cap: &crate::syntax::ast::Priority,
        delta: &NameEnv,
        rule: &str,
        p: &Process,
    ) -> Checked {
        for t in delta.values() {
            let rhs = self.ob(sigma, t, rule, p)?;
            self.constraints.push(Constraint::new(cap.clone(), rhs, rule, site(p)));
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn check_input(
        &mut self,
        sigma: &TypeVarEnv,
        gamma: &ProcEnv,
        mut delta: NameEnv,
        subject: &Name,
        binder: &str,
        body: &Process,
        p: &Process,
        depth: usize,
    ) -> Checked {
        self.record("t-input", depth, p);
        let (cap, payload, cont) = self.subject_type(&mut delta, subject, Direction::In, "t-input", p)?;
        self.guard_constraints(sigma, &cap, &delta, "t-input", p)?;
        // An input binder may shadow a variable of Δ; rename it away.
        let (binder, body) = if delta.contains_key(&Name::var(binder)) || Name::var(binder) == *subject {
            let mut used = NameSets::of(body);
            used.vars.extend(delta.keys().filter_map(|n| match n {
                Name::Var(v) => Some(v.clone()),
                Name::Endpoint(_) => None,
            }));
            let fresh = fresh_ident(binder, &used.vars);
            let renamed = subst_value_renaming(body, binder, &Value::Name(Name::var(fresh.clone())))
                .expect("renaming to a variable is always defined");
            (fresh, renamed)
        } else {
            (binder.to_string(), body.clone())
        };
        delta.insert(subject.clone(), cont);
        delta.insert(Name::var(binder), payload);
        self.check(sigma, gamma, delta, &body, depth + 1)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_output(
        &mut self,
        sigma: &TypeVarEnv,
        gamma: &ProcEnv,
        mut delta: NameEnv,
        subject: &Name,
        payload: &Value,
        body: &Process,
        p: &Process,
        depth: usize,
    ) -> Checked {
        self.record("t-output", depth, p);
        let (cap, expected, cont) = self.subject_type(&mut delta, subject, Direction::Out, "t-output", p)?;
        match payload {
            Value::Int(_) => {
                if !expected.is_base() {
                    return Err(diag(
                        DiagnosticKind::SubjectTypeMismatch,
                        "t-output",
                        p,
                        format!("a literal is sent where `{expected}` is expected"),
                    ));
                }
            }
            Value::Name(v) => {
                let Some(actual) = delta.get(v).cloned() else {
                    return Err(diag(
                        DiagnosticKind::UnboundName,
                        "t-output",
                        p,
                        format!("payload `{v}` is not in the name environment"),
                    ));
                };
                if !alpha_eq(&actual, &expected) {
                    return Err(diag(
                        DiagnosticKind::SubjectTypeMismatch,
                        "t-output",
                        p,
                        format!("payload `{v}` has type `{actual}`, expected `{expected}`"),
                    ));
                }
                if !is_unrestricted(&actual) {
                    delta.remove(v);
                }
            }
        }
        let ob_payload = self.ob(sigma, &expected, "t-output", p)?;
        self.constraints.push(Constraint::new(cap.clone(), ob_payload, "t-output", site(p)));
        self.guard_constraints(sigma, &cap, &delta, "t-output", p)?;
        delta.insert(subject.clone(), cont);
        self.check(sigma, gamma, delta, body, depth + 1)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_new(
        &mut self,
        sigma: &TypeVarEnv,
        gamma: &ProcEnv,
        mut delta: NameEnv,
        channel: &str,
        pos_type: &Option<SessionType>,
        neg_type: &Option<SessionType>,
        body: &Process,
        p: &Process,
        depth: usize,
    ) -> Checked {
        self.record("t-session", depth, p);
        let t = pos_type.clone().unwrap_or(SessionType::End);
        let s = neg_type.clone().unwrap_or_else(|| syntactic_dual(&t));
        for ty in [&t, &s] {
            well_formed(ty).map_err(|e| diag(DiagnosticKind::IllFormedType, "t-session", p, e.to_string()))?;
        }
        match self.mode {
            DualityMode::Strict => {
                if let Err(m) = dual_strict_report(&t, &s) {
                    return Err(diag(
                        DiagnosticKind::DualityFailure,
                        "t-session",
                        p,
                        format!("`{t}` and `{s}` are not dual without unfolding: {m}"),
                    ));
                }
            }
            DualityMode::Full => match dual_full(&t, &s) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(diag(
                        DiagnosticKind::DualityFailure,
                        "t-session",
                        p,
                        format!("`{t}` and `{s}` are not dual"),
                    ))
                }
                Err(e @ TypeError::DepthExceeded(_)) => {
                    return Err(diag(DiagnosticKind::Internal, "t-session", p, e.to_string()))
                }
                Err(e) => return Err(diag(DiagnosticKind::IllFormedType, "t-session", p, e.to_string())),
            },
        }
        // Shadowing an endpoint already in Δ: rename the restriction.
        let (channel, body) = if delta.keys().any(|n| matches!(n, Name::Endpoint(e) if e.channel == channel)) {
            let mut used = NameSets::of(body).channels;
            used.extend(delta.keys().filter_map(|n| n.as_endpoint().map(|e| e.channel.clone())));
            let fresh = fresh_ident(channel, &used);
            let renamed = rename_channel(body, channel, &fresh);
            (fresh, renamed)
        } else {
            (channel.to_string(), body.clone())
        };
        delta.insert(Name::plus(channel.clone()), t);
        delta.insert(Name::minus(channel), s);
        self.check(sigma, gamma, delta, &body, depth + 1)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_rec(
        &mut self,
        sigma: &TypeVarEnv,
        gamma: &ProcEnv,
        delta: NameEnv,
        index: Index,
        var: &str,
        body: &Process,
        p: &Process,
        depth: usize,
    ) -> Checked {
        self.record("t-rec", depth, p);
        if index > self.iota {
            return Err(diag(
                DiagnosticKind::RecShapeMismatch,
                "t-rec",
                p,
                format!("recursion index {index} exceeds the judgment index {}", self.iota),
            ));
        }
        let mut sigma2 = sigma.clone();
        let mut expected = NameEnv::new();
        let mut inner = NameEnv::new();
        for (u, t) in delta {
            match t {
                SessionType::End => self.record("t-end", depth, p),
                SessionType::Int => {
                    inner.insert(u, t);
                }
                SessionType::Rec {
                    index: i,
                    var: tv,
                    body: tb,
                } if i == index => {
                    let fresh = format!("{tv}#{}", self.tvar_counter);
                    self.tvar_counter += 1;
                    let opened =
                        crate::syntax::subst::subst_type_free(&tb, &tv, &SessionType::Var(fresh.clone()));
                    let ob = self.ob(sigma, &opened, "t-rec", p)?;
                    sigma2.insert(fresh.clone(), ob);
                    expected.insert(u.clone(), SessionType::Var(fresh));
                    inner.insert(u, opened);
                }
                other => {
                    return Err(diag(
                        DiagnosticKind::RecShapeMismatch,
                        "t-rec",
                        p,
                        format!("`{u}` has type `{other}`, expected a recursive type with index {index}"),
                    ))
                }
            }
        }
        let mut gamma2 = gamma.clone();
        gamma2.insert(var.to_string(), expected);
        self.check(&sigma2, &gamma2, inner, body, depth + 1)
    }
}

/// Distributes `Δ` between the two sides of a parallel composition by free
/// names, treating a free process variable as using the names it expects.
/// Unused bindings go left; base-typed bindings may go to both sides.
pub fn split_env(
    delta: &NameEnv,
    left: &Process,
    right: &Process,
    gamma: &ProcEnv,
) -> Result<(NameEnv, NameEnv), Diagnostic> {
    let uses = |p: &Process| -> BTreeSet<Name> {
        let mut names = free_names(p);
        for x in free_proc_vars(p) {
            if let Some(env) = gamma.get(&x) {
                names.extend(env.keys().cloned());
            }
        }
        names
    };
    let (ul, ur) = (uses(left), uses(right));
    let mut dl = NameEnv::new();
    let mut dr = NameEnv::new();
    for (u, t) in delta {
        match (ul.contains(u), ur.contains(u)) {
            (true, true) if is_unrestricted(t) => {
                dl.insert(u.clone(), t.clone());
                dr.insert(u.clone(), t.clone());
            }
            (true, true) => {
                return Err(diag(
                    DiagnosticKind::LinearityViolation,
                    "t-par",
                    &Process::par(left.clone(), right.clone()),
                    format!("`{u}` is used on both sides of a parallel composition"),
                ))
            }
            (false, true) => {
                dr.insert(u.clone(), t.clone());
            }
            _ => {
                dl.insert(u.clone(), t.clone());
            }
        }
    }
    Ok((dl, dr))
}

/// `Σ; Γ ⊢ι Δ P`. Collects constraints and stops at the first structural
/// failure. Restrictions use strict duality at index 0 and full duality
/// otherwise.
pub fn check(sigma: &TypeVarEnv, gamma: &ProcEnv, delta: &NameEnv, p: &Process, iota: Index) -> CheckOutcome {
    check_with_mode(sigma, gamma, delta, p, iota, DualityMode::for_index(iota))
}

pub fn check_with_mode(
    sigma: &TypeVarEnv,
    gamma: &ProcEnv,
    delta: &NameEnv,
    p: &Process,
    iota: Index,
    mode: DualityMode,
) -> CheckOutcome {
    let mut c = Checker {
        iota,
        mode,
        constraints: Vec::new(),
        derivation: Vec::new(),
        tvar_counter: 0,
    };
    for (u, t) in delta {
        if let Err(e) = well_formed_payload(t) {
            // Open environments may mention Σ-bound variables.
            if !matches!(e.kind, crate::types::WfKind::FreeTypeVariable)
                || crate::syntax::subst::type_free_vars(t).iter().any(|v| !sigma.contains_key(v))
            {
                return CheckOutcome {
                    ok: false,
                    constraints: Vec::new(),
                    diagnostics: vec![Diagnostic {
                        kind: DiagnosticKind::IllFormedType,
                        rule: "environment".into(),
                        position: format!("{u}"),
                        message: e.to_string(),
                        constraints: Vec::new(),
                        witness: None,
                    }],
                    derivation: Vec::new(),
                };
            }
        }
    }
    let result = c.check(sigma, gamma, delta.clone(), p, 0);
    CheckOutcome {
        ok: result.is_ok(),
        constraints: c.constraints,
        diagnostics: result.err().into_iter().collect(),
        derivation: c.derivation,
    }
}

/// Verdict of checking a closed program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub accepted: bool,
    pub judgment_index: String,
    pub constraints: Vec<Constraint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolveResult>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip)]
    pub derivation: Vec<DerivationStep>,
}

/// Checks a closed process under empty environments and solves the
/// collected constraints.
pub fn check_closed_process(p: &Process, iota: Index) -> Verdict {
    let free = free_names(p);
    if !free.is_empty() || !free_proc_vars(p).is_empty() {
        let names: Vec<String> = free.iter().map(|n| n.to_string()).collect();
        return Verdict {
            accepted: false,
            judgment_index: iota.to_string(),
            constraints: Vec::new(),
            solution: None,
            diagnostics: vec![diag(
                DiagnosticKind::NotClosed,
                "t-session",
                p,
                format!("free names {{{}}} or process variables", names.join(", ")),
            )],
            derivation: Vec::new(),
        };
    }
    verdict_of(check(&TypeVarEnv::new(), &ProcEnv::new(), &NameEnv::new(), p, iota), iota, p)
}

/// Turns a check outcome into a verdict by solving its constraints.
pub fn verdict_of(outcome: CheckOutcome, iota: Index, p: &Process) -> Verdict {
    let mut diagnostics = outcome.diagnostics;
    let solution = if outcome.ok {
        let s = solve(&outcome.constraints);
        if let SolveResult::Unsatisfiable { witness } = &s {
            diagnostics.push(Diagnostic {
                kind: DiagnosticKind::UnsatisfiableConstraints,
                rule: witness
                    .constraints
                    .first()
                    .map_or("solve".to_string(), |c| c.origin.rule.clone()),
                position: witness
                    .constraints
                    .first()
                    .map_or_else(|| site(p), |c| c.origin.site.clone()),
                message: "priority constraints are unsatisfiable".to_string(),
                constraints: witness.constraints.clone(),
                witness: Some(witness.clone()),
            });
        }
        Some(s)
    } else {
        None
    };
    Verdict {
        accepted: outcome.ok && solution.as_ref().is_some_and(|s| s.is_satisfiable()),
        judgment_index: iota.to_string(),
        constraints: outcome.constraints,
        solution,
        diagnostics,
        derivation: outcome.derivation,
    }
}

/// [`check_closed_process`] on a parsed program.
pub fn check_closed(program: &Program, iota: Index) -> Verdict {
    check_closed_process(&program.process, iota)
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.accepted { "accepted" } else { "rejected" })?;
        if let Some(SolveResult::Assignment { values }) = &self.solution {
            for (v, n) in values {
                writeln!(f, "  {v} = {n}")?;
            }
        }
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::Priority;
    use crate::syntax::parser::{parse_process, parse_type};

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn t(s: &str) -> SessionType {
        parse_type(s).unwrap()
    }

    const MUTUAL: &str = "new a : ?[alpha,beta] int . end . new b : ?[gamma,delta] int . end . (a+?(x).b-!4.0 | b+?(y).a-!3.0)";
    const SELF: &str = "new a : ?[alpha,beta] int . end . a+?(x).a-!x.0";
    const FORWARDER_SYSTEM: &str = "new a : rec[inf] t. ![beta,alpha] end . t . new b : rec[inf] u. ![gamma,delta] end . u . (rec[inf] X. a-?(x). b+!x. X | rec[inf] Y. new c . a+!c+. Y | rec[inf] Z. b-?(y). Z)";

    fn finite_pairs(v: &Verdict) -> BTreeSet<(Priority, Priority)> {
        v.constraints
            .iter()
            .filter(|c| !c.rhs.is_infinite())
            .map(|c| (c.lhs.clone(), c.rhs.clone()))
            .collect()
    }

    #[test]
    fn mutual_rejects_with_cycle() {
        let v = check_closed_process(&p(MUTUAL), Index::Inf);
        assert!(!v.accepted);
        let Some(SolveResult::Unsatisfiable { witness }) = &v.solution else { panic!("{v}") };
        let got: BTreeSet<_> = witness.constraints.iter().map(|c| (c.lhs.clone(), c.rhs.clone())).collect();
        assert_eq!(
            got,
            BTreeSet::from([
                (Priority::var("beta"), Priority::var("delta")),
                (Priority::var("delta"), Priority::var("beta")),
            ])
        );
    }

    #[test]
    fn self_rejects_reflexively() {
        let v = check_closed_process(&p(SELF), Index::Inf);
        let Some(SolveResult::Unsatisfiable { witness }) = &v.solution else { panic!("{v}") };
        assert_eq!(witness.constraints.len(), 1);
        assert_eq!(witness.constraints[0].lhs, Priority::var("beta"));
        assert_eq!(witness.constraints[0].rhs, Priority::var("beta"));
    }

    #[test]
    fn open_forwarder_constraints() {
        let delta = NameEnv::from([
            (Name::minus("a"), t("rec[0] t. ?[alpha,beta] end . t")),
            (Name::plus("b"), t("rec[0] u. ![gamma,delta] end . u")),
        ]);
        let out = check(
            &TypeVarEnv::new(),
            &ProcEnv::new(),
            &delta,
            &p("rec[0] X. a-?(x). b+!x. X"),
            Index::Fin(0),
        );
        assert!(out.ok, "{:?}", out.diagnostics);
        let pairs: BTreeSet<_> = out.constraints.iter().map(|c| (c.lhs.clone(), c.rhs.clone())).collect();
        assert_eq!(
            pairs,
            BTreeSet::from([
                (Priority::var("beta"), Priority::var("gamma")),
                (Priority::var("delta"), Priority::Infinity),
                (Priority::var("delta"), Priority::var("alpha")),
            ])
        );
    }

    #[test]
    fn closed_forwarder_accepts_at_zero() {
        let sys = crate::semantics::approximant(&p(FORWARDER_SYSTEM), Index::Fin(0)).unwrap();
        let v = check_closed_process(&sys, Index::Fin(0));
        assert!(v.accepted, "{v}");
        assert_eq!(
            finite_pairs(&v),
            BTreeSet::from([
                (Priority::var("beta"), Priority::var("gamma")),
                (Priority::var("delta"), Priority::var("alpha")),
            ])
        );
        let stated = BTreeMap::from([
            ("alpha".to_string(), 1),
            ("gamma".to_string(), 1),
            ("delta".to_string(), 0),
            ("beta".to_string(), 0),
        ]);
        assert!(v.constraints.iter().all(|c| c.holds(&stated)));
    }

    #[test]
    fn trivial_programs() {
        assert!(check_closed_process(&Process::Idle, Index::Fin(0)).accepted);
        let v = check_closed_process(&p("a+!1.0"), Index::Fin(0));
        assert_eq!(v.diagnostics[0].kind, DiagnosticKind::NotClosed);
    }

    #[test]
    fn splitting() {
        let delta = NameEnv::from([
            (Name::plus("a"), t("![x,y] end . end")),
            (Name::minus("a"), t("?[y,x] end . end")),
        ]);
        let (l, r) = split_env(&delta, &p("a+!1.0"), &p("a-?(z).0"), &ProcEnv::new()).unwrap();
        assert_eq!(l.keys().collect::<Vec<_>>(), vec![&Name::plus("a")]);
        assert_eq!(r.keys().collect::<Vec<_>>(), vec![&Name::minus("a")]);
        let err = split_env(&delta, &p("a+!1.0"), &p("a+!2.0"), &ProcEnv::new()).unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::LinearityViolation);
        let unused = NameEnv::from([(Name::plus("c"), SessionType::End)]);
        let (l, r) = split_env(&unused, &p("0"), &p("0"), &ProcEnv::new()).unwrap();
        assert_eq!(l.len(), 1);
        assert!(r.is_empty());
    }

    #[test]
    fn unused_linear_name() {
        let v = check_closed_process(&p("new a : ![x,y] end . end . 0"), Index::Inf);
        assert_eq!(v.diagnostics[0].kind, DiagnosticKind::UnusedLinearName);
    }

    #[test]
    fn rec_shape() {
        let v = check_closed_process(&p("new a : ![x,y] end . end . rec[inf] X. a+!1.0"), Index::Inf);
        assert_eq!(v.diagnostics[0].kind, DiagnosticKind::RecShapeMismatch);
        let v = check_closed_process(&p("rec[2] X.X"), Index::Fin(1));
        assert_eq!(v.diagnostics[0].kind, DiagnosticKind::RecShapeMismatch);
        assert!(check_closed_process(&p("rec[1] X.X"), Index::Fin(1)).accepted);
    }

    #[test]
    fn duality_mode_depends_on_index() {
        let src = "new a : rec[inf] t. ?[x,y] int . t ~ ![y,x] int . rec[inf] t. ![y,x] int . t . (rec[inf] X. a+?(z).X | a-!1.rec[inf] Y. a-!2.Y)";
        let v = check_closed_process(&p(src), Index::Inf);
        assert!(!v.diagnostics.iter().any(|d| d.kind == DiagnosticKind::DualityFailure), "{v}");
        let z = crate::semantics::approximant(&p(src), Index::Fin(0)).unwrap();
        let v0 = check_closed_process(&z, Index::Fin(0));
        assert_eq!(v0.diagnostics[0].kind, DiagnosticKind::DualityFailure);
    }
}
