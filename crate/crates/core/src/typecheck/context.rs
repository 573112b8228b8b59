use std::collections::BTreeSet;

use super::NameEnv;
use crate::semantics::CanonState;
use crate::syntax::ast::{Endpoint, Name, Polarity, SessionType};
use crate::types::{dual_full, syntactic_dual, unfold};

/// Environment of the hoisted restrictions of a state. An unannotated
/// endpoint has type `end`; a missing negative annotation is the
/// syntactic dual of the positive one.
pub fn state_env(s: &CanonState) -> NameEnv {
    let mut delta = NameEnv::new();
    for ch in s.channels() {
        let t = ch.pos_type.clone().unwrap_or(SessionType::End);
        let u = ch.neg_type.clone().unwrap_or_else(|| syntactic_dual(&t));
        delta.insert(Name::plus(ch.name.clone()), t);
        delta.insert(Name::minus(ch.name.clone()), u);
    }
    delta
}

fn channels_of(delta: &NameEnv) -> BTreeSet<String> {
    delta
        .keys()
        .filter_map(|n| n.as_endpoint().map(|e| e.channel.clone()))
        .collect()
}

/// Unfolds the recursive type of `u` once.
pub fn unfold_name(delta: &NameEnv, u: &Name) -> Option<NameEnv> {
    let t = unfold(delta.get(u)?).ok()?;
    let mut next = delta.clone();
    next.insert(u.clone(), t);
    Some(next)
}

/// Advances both endpoints of `channel` past one complementary action.
pub fn advance_channel(delta: &NameEnv, channel: &str) -> Option<NameEnv> {
    let plus = Name::plus(channel);
    let minus = Name::minus(channel);
    match (delta.get(&plus)?, delta.get(&minus)?) {
        (
            SessionType::Prefix {
                dir: d1, cont: c1, ..
            },
            SessionType::Prefix {
                dir: d2, cont: c2, ..
            },
        ) if d1.flip() == *d2 => {
            let mut next = delta.clone();
            next.insert(plus, (**c1).clone());
            next.insert(minus, (**c2).clone());
            Some(next)
        }
        _ => None,
    }
}

/// One-step reductions of an environment: a synchronization on a channel
/// whose endpoints both start with complementary actions.
pub fn context_reduce(delta: &NameEnv) -> Vec<NameEnv> {
    channels_of(delta)
        .iter()
        .filter_map(|a| advance_channel(delta, a))
        .collect()
}

/// Every channel with both endpoints in the environment has dual types.
pub fn balanced(delta: &NameEnv) -> bool {
    channels_of(delta).iter().all(|a| {
        match (
            delta.get(&Name::plus(a.clone())),
            delta.get(&Name::minus(a.clone())),
        ) {
            (Some(t), Some(s)) => dual_full(t, s).unwrap_or(false),
            _ => true,
        }
    })
}

/// The endpoint names of `channel` in a fixed order.
pub fn endpoints(channel: &str) -> [Name; 2] {
    [Polarity::Plus, Polarity::Minus].map(|p| Name::Endpoint(Endpoint::new(channel, p)))
}
