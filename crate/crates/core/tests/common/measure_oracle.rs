//! Independent evaluation of the termination measure.
//!
//! Computes `E(P)` together with the weights of all free process variables
//! in one bottom-up pass, and evaluates geometric sums in closed form.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use sessprog_core::syntax::ast::{Index, Process};

pub struct Eval {
    pub e: BigUint,
    /// `V_X(P)` for every process variable with a nonzero weight.
    pub v: BTreeMap<String, BigUint>,
}

/// `(m^n - 1) / (m - 1)`, with the degenerate cases `m = 0` and `m = 1`.
pub fn geometric_closed(m: &BigUint, n: u64) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    if m.is_zero() {
        return BigUint::one();
    }
    if m.is_one() {
        return BigUint::from(n);
    }
    (m.pow(n as u32) - 1u32) / (m - 1u32)
}

pub fn eval(p: &Process) -> Eval {
    match p {
        Process::Idle => Eval {
            e: BigUint::zero(),
            v: BTreeMap::new(),
        },
        Process::Var(x) => Eval {
            e: BigUint::zero(),
            v: BTreeMap::from([(x.clone(), BigUint::one())]),
        },
        Process::Input { body, .. } | Process::Output { body, .. } => {
            let mut r = eval(body);
            r.e += 1u32;
            r
        }
        Process::New { body, .. } => eval(body),
        Process::Par(l, r) => {
            let (a, b) = (eval(l), eval(r));
            let mut v = a.v;
            for (x, n) in b.v {
                *v.entry(x).or_default() += n;
            }
            Eval { e: a.e + b.e, v }
        }
        Process::Rec { index, var, body } => {
            let Index::Fin(n) = index else {
                panic!("measure oracle needs finite indices")
            };
            let inner = eval(body);
            let own = inner.v.get(var).cloned().unwrap_or_default();
            let g = geometric_closed(&own, *n);
            let v = inner
                .v
                .into_iter()
                .filter(|(x, _)| x != var)
                .map(|(x, w)| (x, w * &g))
                .filter(|(_, w)| !w.is_zero())
                .collect();
            Eval {
                e: (inner.e + 1u32) * g,
                v,
            }
        }
    }
}

pub fn e(p: &Process) -> BigUint {
    eval(p).e
}

pub fn v(p: &Process, x: &str) -> BigUint {
    eval(p).v.get(x).cloned().unwrap_or_default()
}
