//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

pub mod measure_oracle;
pub mod reduction_typing;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sessprog_core::syntax::ast::{Direction, Index, Name, Priority, Process, SessionType, Value};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for [`random_finite`].
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub depth: u32,
    pub max_index: u64,
    /// Process variables free in the result, usable at any depth.
    pub open_vars: &'static [&'static str],
}

pub const FINITE: Limits = Limits {
    depth: 6,
    max_index: 4,
    open_vars: &[],
};

const FREE_CHANNELS: [&str; 2] = ["a", "b"];

struct Scope {
    /// Preferred endpoint polarity of the current top-level thread.
    plus_bias: f64,
    /// The next node starts a top-level thread and must not be a leaf.
    head: bool,
    channels: Vec<String>,
    vars: Vec<String>,
    proc_vars: Vec<String>,
    counter: usize,
}

impl Scope {
    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }
}

fn endpoint(rng: &mut ChaCha8Rng, scope: &Scope) -> Name {
    let ch = scope.channels.choose(rng).expect("channels in scope").clone();
    if rng.gen_bool(scope.plus_bias) {
        Name::plus(ch)
    } else {
        Name::minus(ch)
    }
}

fn subject(rng: &mut ChaCha8Rng, scope: &Scope) -> Name {
    if !scope.vars.is_empty() && rng.gen_bool(0.15) {
        Name::var(scope.vars.choose(rng).unwrap().clone())
    } else {
        endpoint(rng, scope)
    }
}

fn payload(rng: &mut ChaCha8Rng, scope: &Scope) -> Value {
    match rng.gen_range(0..4) {
        0 | 1 => Value::Int(rng.gen_range(0..10)),
        2 if !scope.vars.is_empty() => Value::Name(Name::var(scope.vars.choose(rng).unwrap().clone())),
        _ => Value::Name(endpoint(rng, scope)),
    }
}

fn gen(rng: &mut ChaCha8Rng, depth: u32, lim: &Limits, scope: &mut Scope, rec_budget: &mut u32) -> Process {
    let leaf = |rng: &mut ChaCha8Rng, scope: &Scope| -> Process {
        let vars: Vec<&String> = scope.proc_vars.iter().collect();
        if !vars.is_empty() && rng.gen_bool(0.6) {
            Process::var((*vars.choose(rng).unwrap()).clone())
        } else {
            Process::Idle
        }
    };
    if depth == 0 {
        return leaf(rng, scope);
    }
    let choice = if scope.head {
        scope.head = false;
        rng.gen_range(12..100)
    } else {
        rng.gen_range(0..100)
    };
    match choice {
        0..=11 => leaf(rng, scope),
        12..=35 => {
            let s = subject(rng, scope);
            let x = scope.fresh("x");
            scope.vars.push(x.clone());
            let body = gen(rng, depth - 1, lim, scope, rec_budget);
            scope.vars.pop();
            Process::input(s, x, body)
        }
        36..=59 => {
            let s = subject(rng, scope);
            let v = payload(rng, scope);
            Process::output(s, v, gen(rng, depth - 1, lim, scope, rec_budget))
        }
        60..=74 => {
            let l = gen(rng, depth - 1, lim, scope, rec_budget);
            Process::par(l, gen(rng, depth - 1, lim, scope, rec_budget))
        }
        75..=84 => {
            let c = scope.fresh("c");
            scope.channels.push(c.clone());
            let body = gen(rng, depth - 1, lim, scope, rec_budget);
            scope.channels.pop();
            Process::new_session(c, None, None, body)
        }
        _ if *rec_budget > 0 => {
            *rec_budget -= 1;
            let x = scope.fresh("X");
            scope.proc_vars.push(x.clone());
            let body = gen(rng, depth - 1, lim, scope, rec_budget);
            scope.proc_vars.pop();
            Process::rec(Index::Fin(rng.gen_range(0..=lim.max_index)), x, body)
        }
        _ => leaf(rng, scope),
    }
}

/// A random process with finite indices over the free channels `a` and
/// `b`; at most two recursions keep reduction graphs small.
pub fn random_finite(rng: &mut ChaCha8Rng, lim: &Limits) -> Process {
    let mut scope = Scope {
        plus_bias: 0.5,
        head: false,
        channels: FREE_CHANNELS.iter().map(|s| s.to_string()).collect(),
        vars: Vec::new(),
        proc_vars: lim.open_vars.iter().map(|s| s.to_string()).collect(),
        counter: 0,
    };
    let mut rec_budget = 2;
    if lim.depth < 3 {
        return gen(rng, lim.depth, lim, &mut scope, &mut rec_budget);
    }
    // Two or three top-level threads leaning towards opposite polarities
    // give communications a chance; the nested binary composition costs two
    // levels of depth.
    let k = rng.gen_range(2..=3);
    let parts: Vec<Process> = (0..k)
        .map(|i| {
            scope.plus_bias = if i % 2 == 0 { 0.85 } else { 0.15 };
            scope.head = true;
            gen(rng, lim.depth - 2, lim, &mut scope, &mut rec_budget)
        })
        .collect();
    Process::par_all(parts)
}

// Type-directed generation of closed user systems.

struct Sys {
    channels: Vec<(String, SessionType)>,
    threads: Vec<Process>,
    next_channel: usize,
    next_priority: usize,
    next_var: usize,
}

impl Sys {
    fn channel(&mut self) -> String {
        self.next_channel += 1;
        format!("k{}", self.next_channel)
    }

    fn priority(&mut self) -> Priority {
        self.next_priority += 1;
        Priority::var(format!("p{}", self.next_priority))
    }

    fn var(&mut self, base: &str) -> String {
        self.next_var += 1;
        format!("{base}{}", self.next_var)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Payload {
    Int,
    /// A fresh endpoint of type `end`.
    Token,
}

#[derive(Clone)]
struct Action {
    endpoint: Name,
    dir: Direction,
    payload: Payload,
}

fn payload_type(p: Payload) -> SessionType {
    match p {
        Payload::Int => SessionType::Int,
        Payload::Token => SessionType::End,
    }
}

/// Random merge of per-endpoint action lists, preserving each list's order.
fn interleave(rng: &mut ChaCha8Rng, mut lists: Vec<Vec<Action>>) -> Vec<Action> {
    for l in &mut lists {
        l.reverse();
    }
    let mut out = Vec::new();
    loop {
        let live: Vec<usize> = (0..lists.len()).filter(|&i| !lists[i].is_empty()).collect();
        let Some(&i) = live.choose(rng) else { break };
        out.push(lists[i].pop().unwrap());
    }
    out
}

/// Builds the code of a thread performing `actions` in order, ending in
/// `tail`.
fn thread_code(rng: &mut ChaCha8Rng, sys: &mut Sys, actions: &[Action], tail: Process) -> Process {
    fn go(rng: &mut ChaCha8Rng, sys: &mut Sys, actions: &[Action], ints: &mut Vec<String>, tail: &Process) -> Process {
        let Some((a, rest)) = actions.split_first() else {
            return tail.clone();
        };
        match a.dir {
            Direction::In => {
                let x = sys.var("x");
                let pushed = a.payload == Payload::Int;
                if pushed {
                    ints.push(x.clone());
                }
                let body = go(rng, sys, rest, ints, tail);
                if pushed {
                    ints.pop();
                }
                Process::input(a.endpoint.clone(), x, body)
            }
            Direction::Out => {
                let body = go(rng, sys, rest, ints, tail);
                match a.payload {
                    Payload::Int => {
                        let v = if !ints.is_empty() && rng.gen_bool(0.4) {
                            Value::Name(Name::var(ints.choose(rng).unwrap().clone()))
                        } else {
                            Value::Int(rng.gen_range(0..10))
                        };
                        Process::output(a.endpoint.clone(), v, body)
                    }
                    Payload::Token => {
                        let c = sys.var("f");
                        Process::new_session(
                            c.clone(),
                            None,
                            None,
                            Process::output(a.endpoint.clone(), Value::Name(Name::plus(c)), body),
                        )
                    }
                }
            }
        }
    }
    go(rng, sys, actions, &mut Vec::new(), &tail)
}

/// Thread for the next endpoint, usually not the one holding its peer.
fn owner(rng: &mut ChaCha8Rng, n_threads: usize, last: &mut Option<usize>) -> usize {
    let mut t = rng.gen_range(0..n_threads);
    if let Some(prev) = *last {
        if n_threads > 1 && t == prev && rng.gen_bool(0.85) {
            t = (t + 1 + rng.gen_range(0..n_threads - 1)) % n_threads;
        }
    }
    *last = Some(t);
    t
}

/// Channels with linear protocols split among a few threads; with
/// `looping`, every protocol and every thread repeats forever.
fn protocol_group(rng: &mut ChaCha8Rng, sys: &mut Sys, looping: bool) {
    let n_channels = rng.gen_range(1..=3);
    let n_threads = rng.gen_range(1..=3);
    let mut per_thread: Vec<Vec<Vec<Action>>> = vec![Vec::new(); n_threads];
    for _ in 0..n_channels {
        let ch = sys.channel();
        let len = rng.gen_range(1..=if looping { 2 } else { 3 });
        let mut steps = Vec::new();
        for _ in 0..len {
            let dir = if rng.gen_bool(0.5) { Direction::Out } else { Direction::In };
            let payload = if rng.gen_bool(0.2) { Payload::Token } else { Payload::Int };
            let (o, c) = (sys.priority(), sys.priority());
            steps.push((dir, payload, o, c));
        }
        let tv = "t".to_string();
        let mut ty = if looping { SessionType::var(tv.clone()) } else { SessionType::End };
        for (dir, payload, o, c) in steps.iter().rev() {
            ty = SessionType::prefix(*dir, o.clone(), c.clone(), payload_type(*payload), ty);
        }
        if looping {
            ty = SessionType::rec(Index::Inf, tv, ty);
        }
        sys.channels.push((ch.clone(), ty));
        let mut last = None;
        for (ep, flip) in [(Name::plus(ch.clone()), false), (Name::minus(ch.clone()), true)] {
            let acts: Vec<Action> = steps
                .iter()
                .map(|(dir, payload, _, _)| Action {
                    endpoint: ep.clone(),
                    dir: if flip { dir.flip() } else { *dir },
                    payload: *payload,
                })
                .collect();
            per_thread[owner(rng, n_threads, &mut last)].push(acts);
        }
    }
    for lists in per_thread {
        if lists.is_empty() {
            continue;
        }
        let actions = interleave(rng, lists);
        let code = if looping {
            let x = sys.var("X");
            Process::rec(Index::Inf, x.clone(), thread_code(rng, sys, &actions, Process::var(x)))
        } else {
            thread_code(rng, sys, &actions, Process::Idle)
        };
        sys.threads.push(code);
    }
}

/// A session endpoint handed over another session and used by the
/// receiver.
fn handoff(rng: &mut ChaCha8Rng, sys: &mut Sys) {
    let (c, d) = (sys.channel(), sys.channel());
    let (q1, q2) = (sys.priority(), sys.priority());
    let (p1, p2) = (sys.priority(), sys.priority());
    let d_type = SessionType::output(q1.clone(), q2.clone(), SessionType::Int, SessionType::End);
    let c_type = SessionType::output(p1, p2, d_type.clone(), SessionType::End);
    sys.channels.push((c.clone(), c_type));
    sys.channels.push((d.clone(), d_type));
    let y = sys.var("y");
    let z = sys.var("z");
    sys.threads.push(Process::output(Name::plus(c.clone()), Value::Name(Name::plus(d.clone())), Process::Idle));
    sys.threads.push(Process::input(
        Name::minus(c),
        y.clone(),
        Process::output(Name::var(y), Value::Int(rng.gen_range(0..10)), Process::Idle),
    ));
    sys.threads.push(Process::input(Name::minus(d), z, Process::Idle));
}

/// A closed user process built from typed protocol fragments. Many are
/// well typed; interleavings that wait on each other are not.
pub fn user_system(rng: &mut ChaCha8Rng) -> Process {
    let mut sys = Sys {
        channels: Vec::new(),
        threads: Vec::new(),
        next_channel: 0,
        next_priority: 0,
        next_var: 0,
    };
    let groups = rng.gen_range(1..=2);
    for _ in 0..groups {
        match rng.gen_range(0..10) {
            0..=4 => protocol_group(rng, &mut sys, false),
            5..=8 => protocol_group(rng, &mut sys, true),
            _ => handoff(rng, &mut sys),
        }
    }
    if rng.gen_bool(0.1) {
        let x = sys.var("X");
        sys.threads.push(Process::rec(Index::Inf, x.clone(), Process::var(x)));
    }
    sys.threads.shuffle(rng);
    let mut p = Process::par_all(sys.threads);
    let mut channels = sys.channels;
    channels.shuffle(rng);
    for (ch, ty) in channels.into_iter().rev() {
        p = Process::new_session(ch, Some(ty), None, p);
    }
    p
}

/// The first `n` generated user systems for `seed`.
pub fn user_corpus(seed: u64, n: usize) -> Vec<Process> {
    let mut r = rng(seed);
    (0..n).map(|_| user_system(&mut r)).collect()
}
