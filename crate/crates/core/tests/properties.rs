//! Property tests. Random structures come from seeded generators so that a
//! failing case shrinks to its seed.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sessprog_core::measure::{emeasure, vcount};
use sessprog_core::semantics::canonicalize;
use sessprog_core::syntax::ast::{Direction, Index, Priority, Process, SessionType};
use sessprog_core::syntax::{parse_process, parse_type, subst_proc};
use sessprog_core::typecheck::{solve, Constraint, SolveResult, WitnessKind};
use sessprog_core::types::{dual_full, dual_strict, syntactic_dual, unfold};

use common::measure_oracle;

const OPEN: common::Limits = common::Limits {
    depth: 5,
    max_index: 4,
    open_vars: &["X"],
};

fn random_priority(r: &mut ChaCha8Rng) -> Priority {
    match r.gen_range(0..4) {
        0 => Priority::Const(r.gen_range(0..4)),
        _ => Priority::var(["a", "b", "c", "d", "e"][r.gen_range(0..5)]),
    }
}

/// A closed, contractive session type. `bound` lists type variables usable
/// after at least one prefix.
fn random_type(r: &mut ChaCha8Rng, depth: u32, bound: &mut Vec<String>, guarded: bool) -> SessionType {
    let choice = if depth == 0 { 0 } else { r.gen_range(0..6) };
    match choice {
        0 if guarded && !bound.is_empty() && r.gen_bool(0.6) => SessionType::var(bound[r.gen_range(0..bound.len())].clone()),
        0 => SessionType::End,
        1 if !guarded => prefix(r, depth, bound),
        1 => {
            let var = format!("t{}", bound.len());
            bound.push(var.clone());
            let index = if r.gen_bool(0.5) { Index::Inf } else { Index::Fin(r.gen_range(0..4)) };
            let body = prefix(r, depth - 1, bound);
            bound.pop();
            SessionType::rec(index, var, body)
        }
        _ => prefix(r, depth, bound),
    }
}

fn prefix(r: &mut ChaCha8Rng, depth: u32, bound: &mut Vec<String>) -> SessionType {
    let payload = if r.gen_bool(0.6) {
        SessionType::Int
    } else {
        random_type(r, depth.saturating_sub(2), &mut Vec::new(), true)
    };
    let cont = random_type(r, depth.saturating_sub(1), bound, true);
    let (o, c) = (random_priority(r), random_priority(r));
    if r.gen_bool(0.5) {
        SessionType::input(o, c, payload, cont)
    } else {
        SessionType::output(o, c, payload, cont)
    }
}

fn closed_type(seed: u64) -> SessionType {
    random_type(&mut common::rng(seed), 5, &mut Vec::new(), true)
}

fn random_constraints(seed: u64) -> Vec<Constraint> {
    let mut r = common::rng(seed);
    let n = r.gen_range(0..9);
    (0..n)
        .map(|_| {
            let side = |r: &mut ChaCha8Rng| {
                if r.gen_ratio(1, 12) {
                    Priority::Infinity
                } else {
                    random_priority(r)
                }
            };
            let (l, rhs) = (side(&mut r), side(&mut r));
            Constraint::new(l, rhs, "t-output", "generated")
        })
        .collect()
}

fn value(p: &Priority, a: &BTreeMap<String, u64>) -> Option<u64> {
    match p {
        Priority::Const(n) => Some(*n),
        Priority::Var(v) => a.get(v).copied(),
        Priority::Infinity => None,
    }
}

/// Reassociates and reorders parallel compositions at every level.
fn reshuffle(p: &Process, r: &mut ChaCha8Rng) -> Process {
    match p {
        Process::Par(..) => {
            let mut parts = Vec::new();
            flatten_par(p, &mut parts);
            let mut parts: Vec<Process> = parts.into_iter().map(|q| reshuffle(q, r)).collect();
            parts.reverse();
            if r.gen_bool(0.5) {
                parts.push(Process::Idle);
            }
            parts.into_iter().reduce(|acc, q| if r.gen_bool(0.5) { Process::par(q, acc) } else { Process::par(acc, q) }).unwrap()
        }
        Process::Input { subject, binder, body } => Process::input(subject.clone(), binder.clone(), reshuffle(body, r)),
        Process::Output { subject, payload, body } => Process::output(subject.clone(), payload.clone(), reshuffle(body, r)),
        Process::New { channel, pos_type, neg_type, body } => {
            Process::new_session(channel.clone(), pos_type.clone(), neg_type.clone(), reshuffle(body, r))
        }
        Process::Rec { index, var, body } => Process::rec(*index, var.clone(), reshuffle(body, r)),
        Process::Idle | Process::Var(_) => p.clone(),
    }
}

fn flatten_par<'a>(p: &'a Process, out: &mut Vec<&'a Process>) {
    match p {
        Process::Par(l, r) => {
            flatten_par(l, out);
            flatten_par(r, out);
        }
        _ => out.push(p),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn substitution_identity(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let body = common::random_finite(&mut r, &OPEN);
        let arg = common::random_finite(&mut r, &common::Limits { depth: 4, ..OPEN });
        if let Some(s) = subst_proc(&body, "X", &arg) {
            let v = vcount(&body, "X").unwrap();
            prop_assert_eq!(emeasure(&s).unwrap(), emeasure(&body).unwrap() + emeasure(&arg).unwrap() * v);
        }
    }

    #[test]
    fn measures_agree_with_oracle(seed in any::<u64>()) {
        let p = common::random_finite(&mut common::rng(seed), &OPEN);
        prop_assert_eq!(emeasure(&p).unwrap(), measure_oracle::e(&p));
        prop_assert_eq!(vcount(&p, "X").unwrap(), measure_oracle::v(&p, "X"));
    }

    #[test]
    fn measure_invariant_under_congruence(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let p = common::random_finite(&mut r, &common::FINITE);
        let q = reshuffle(&p, &mut r);
        let (cp, cq) = (canonicalize(&p), canonicalize(&q));
        prop_assert_eq!(cp.key(), cq.key());
        prop_assert_eq!(emeasure(&p).unwrap(), emeasure(&q).unwrap());
        prop_assert_eq!(emeasure(&p).unwrap(), emeasure(&canonicalize(&p).to_process()).unwrap());
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let p = common::random_finite(&mut common::rng(seed), &common::FINITE);
        let once = canonicalize(&p);
        let twice = canonicalize(&once.to_process());
        prop_assert_eq!(once.key(), twice.key());
        prop_assert_eq!(once.to_process(), twice.to_process());
    }

    #[test]
    fn process_print_parse_roundtrip(seed in any::<u64>()) {
        let p = common::random_finite(&mut common::rng(seed), &OPEN);
        prop_assert_eq!(parse_process(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn user_process_print_parse_roundtrip(seed in any::<u64>()) {
        let p = common::user_system(&mut common::rng(seed));
        prop_assert_eq!(parse_process(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn type_print_parse_roundtrip(seed in any::<u64>()) {
        let t = closed_type(seed);
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn syntactic_dual_is_dual_and_involutive(seed in any::<u64>()) {
        let t = closed_type(seed);
        let d = syntactic_dual(&t);
        prop_assert!(dual_strict(&t, &d));
        prop_assert_eq!(dual_full(&t, &d), Ok(true));
        prop_assert_eq!(syntactic_dual(&d), t);
    }

    #[test]
    fn duality_is_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let (s, t) = (closed_type(a), closed_type(b));
        prop_assert_eq!(dual_strict(&s, &t), dual_strict(&t, &s));
        prop_assert_eq!(dual_full(&s, &t), dual_full(&t, &s));
        // Strict duality is the stronger relation.
        if dual_strict(&s, &t) {
            prop_assert_eq!(dual_full(&s, &t), Ok(true));
        }
    }

    #[test]
    fn full_duality_sees_through_unfolding(seed in any::<u64>()) {
        let t = closed_type(seed);
        if let Ok(u) = unfold(&t) {
            prop_assert_eq!(dual_full(&u, &syntactic_dual(&t)), Ok(true));
            prop_assert_eq!(dual_full(&t, &syntactic_dual(&u)), Ok(true));
        }
    }

    #[test]
    fn solver_is_sound(seed in any::<u64>()) {
        let cs = random_constraints(seed);
        match solve(&cs) {
            SolveResult::Assignment { values } => {
                for c in &cs {
                    prop_assert!(c.holds(&values), "{} violated by {:?}", c, values);
                }
            }
            SolveResult::Unsatisfiable { witness } => {
                let w = &witness.constraints;
                prop_assert!(!w.is_empty());
                prop_assert!(w.iter().all(|c| cs.contains(c)));
                prop_assert!(w.windows(2).all(|p| p[0].rhs == p[1].lhs));
                let (first, last) = (&w[0].lhs, &w[w.len() - 1].rhs);
                match witness.kind {
                    WitnessKind::Cycle => prop_assert_eq!(first, last),
                    WitnessKind::Bound => {
                        // The chain forces last >= first + len, with first at
                        // least 0 when it is a variable; the endpoints
                        // contradict that.
                        let lo = match first {
                            Priority::Const(n) => Some(*n),
                            Priority::Var(_) => Some(0),
                            Priority::Infinity => None,
                        };
                        match (lo, value(last, &BTreeMap::new())) {
                            (Some(lo), Some(hi)) => prop_assert!(lo + w.len() as u64 > hi),
                            (None, _) => prop_assert!(!last.is_infinite()),
                            (Some(_), None) => prop_assert!(false, "bound chain ends in {}", last),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn solver_assignment_is_least(seed in any::<u64>()) {
        let cs = random_constraints(seed);
        if let SolveResult::Assignment { values } = solve(&cs) {
            // Lowering any variable by one breaks some constraint.
            for (v, &n) in &values {
                if n == 0 {
                    continue;
                }
                let mut lower = values.clone();
                lower.insert(v.clone(), n - 1);
                prop_assert!(cs.iter().any(|c| !c.holds(&lower)), "{} can be lowered", v);
            }
        }
    }
}

#[test]
fn dual_swaps_priorities_and_direction() {
    let t = parse_type("?[a,b] int . ![c,d] end . end").unwrap();
    let SessionType::Prefix { dir, obligation, capability, .. } = syntactic_dual(&t) else {
        panic!("prefix expected")
    };
    assert_eq!(dir, Direction::Out);
    assert_eq!((obligation, capability), (Priority::var("b"), Priority::var("a")));
}
