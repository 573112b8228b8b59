//! Canonical states: top-level restrictions hoisted, parallel components
//! flattened, `0` components dropped, threads ordered by a serialization
//! that is invariant under the structural congruence laws.

use std::cmp::Ordering;
use std::cell::RefCell;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::syntax::ast::{Name, Process, SessionType, Value};
use crate::syntax::subst::{free_channels, free_names, free_proc_vars, fresh_ident, rename_channel, NameSets};

/// A hoisted restriction with its optional annotations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Channel {
    pub name: String,
    pub pos_type: Option<SessionType>,
    pub neg_type: Option<SessionType>,
}

impl Channel {
    /// True when neither endpoint carries a type other than `end`.
    pub fn is_trivially_typed(&self) -> bool {
        [&self.pos_type, &self.neg_type]
            .into_iter()
            .all(|t| t.as_ref().is_none_or(|t| t.is_end()))
    }
}

/// `new c1 ... new cn (T1 | ... | Tm)` where no `Ti` is a parallel
/// composition, a restriction or `0`.
#[derive(Clone, Debug, Serialize)]
pub struct CanonState {
    channels: Vec<Channel>,
    threads: Vec<Process>,
    #[serde(skip)]
    key: String,
}

impl PartialEq for CanonState {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for CanonState {}

impl Hash for CanonState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl PartialOrd for CanonState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl CanonState {
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn threads(&self) -> &[Process] {
        &self.threads
    }

    /// Serialization deciding equality of states.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    /// Rebuilds a process: restrictions outermost, threads in state order.
    pub fn to_process(&self) -> Process {
        let mut p = Process::par_all(self.threads.iter().cloned());
        for c in self.channels.iter().rev() {
            p = Process::new_session(c.name.clone(), c.pos_type.clone(), c.neg_type.clone(), p);
        }
        p
    }

    /// Builds a state from parts, re-canonicalizing.
    pub fn from_parts(channels: Vec<Channel>, threads: Vec<Process>) -> CanonState {
        let mut p = Process::par_all(threads);
        for c in channels.into_iter().rev() {
            p = Process::new_session(c.name, c.pos_type, c.neg_type, p);
        }
        canonicalize(&p)
    }
}

impl fmt::Display for CanonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_process())
    }
}

/// Canonical form of `p` up to structural congruence. Top-level binders are
/// renamed only if they clash with a free channel or an earlier hoisted one.
/// Unused restrictions whose endpoints are typed `end` (or unannotated) are
/// dropped.
pub fn canonicalize(p: &Process) -> CanonState {
    let mut used = NameSets::of(p);
    let mut taken: BTreeSet<String> = free_channels(p);
    let mut channels = Vec::new();
    let mut threads = Vec::new();
    hoist(p, &mut used, &mut taken, &mut channels, &mut threads);

    let mut occurring = BTreeSet::new();
    for t in &threads {
        occurring.extend(free_channels(t));
    }
    channels.retain(|c| occurring.contains(&c.name) || !c.is_trivially_typed());

    let names: Vec<String> = channels.iter().map(|c| c.name.clone()).collect();
    let group = ser_group(&names, &threads, &Env::default(), 0, &Cache::default());
    let threads = group.order.iter().map(|&i| threads[i].clone()).collect();
    let channels = group.numbering.iter().map(|&i| channels[i].clone()).collect();
    CanonState {
        channels,
        threads,
        key: group.key,
    }
}

fn hoist(
    p: &Process,
    used: &mut NameSets,
    taken: &mut BTreeSet<String>,
    channels: &mut Vec<Channel>,
    threads: &mut Vec<Process>,
) {
    match p {
        Process::Idle => {}
        Process::Par(l, r) => {
            hoist(l, used, taken, channels, threads);
            hoist(r, used, taken, channels, threads);
        }
        Process::New {
            channel,
            pos_type,
            neg_type,
            body,
        } => {
            let (name, body) = if taken.contains(channel) {
                let mut avoid = used.channels.clone();
                avoid.extend(taken.iter().cloned());
                let fresh = fresh_ident(channel, &avoid);
                let body = rename_channel(body, channel, &fresh);
                (fresh, body)
            } else {
                (channel.clone(), (**body).clone())
            };
            taken.insert(name.clone());
            used.channels.insert(name.clone());
            channels.push(Channel {
                name,
                pos_type: pos_type.clone(),
                neg_type: neg_type.clone(),
            });
            hoist(&body, used, taken, channels, threads);
        }
        _ => threads.push(p.clone()),
    }
}

#[derive(Clone, Default)]
struct Env {
    chans: BTreeMap<String, String>,
    vars: BTreeMap<String, String>,
    pvars: BTreeMap<String, String>,
}

fn ser_name(n: &Name, env: &Env) -> String {
    match n {
        Name::Var(x) => env.vars.get(x).cloned().unwrap_or_else(|| format!("'{x}")),
        Name::Endpoint(e) => {
            let c = env
                .chans
                .get(&e.channel)
                .cloned()
                .unwrap_or_else(|| format!("${}", e.channel));
            format!("{c}{}", e.polarity.symbol())
        }
    }
}

fn ser_value(v: &Value, env: &Env) -> String {
    match v {
        Value::Name(n) => ser_name(n, env),
        Value::Int(k) => k.to_string(),
    }
}

/// Serializes a thread whose head is not `|`, `new` or `0`.
fn ser_thread(p: &Process, env: &Env, depth: usize, cache: &Cache) -> String {
    match p {
        Process::Var(x) => env.pvars.get(x).cloned().unwrap_or_else(|| format!("'{x}")),
        Process::Input {
            subject,
            binder,
            body,
        } => {
            let mut inner = env.clone();
            inner.vars.insert(binder.clone(), format!("v{depth}"));
            format!("{}?({depth}).{}", ser_name(subject, env), ser_proc(body, &inner, depth + 1, cache))
        }
        Process::Output {
            subject,
            payload,
            body,
        } => format!(
            "{}!{}.{}",
            ser_name(subject, env),
            ser_value(payload, env),
            ser_proc(body, env, depth + 1, cache)
        ),
        Process::Rec { index, var, body } => {
            let mut inner = env.clone();
            inner.pvars.insert(var.clone(), format!("X{depth}"));
            format!("rec[{index}]({depth}).{}", ser_proc(body, &inner, depth + 1, cache))
        }
        Process::Idle | Process::Par(..) | Process::New { .. } => ser_proc(p, env, depth, cache),
    }
}

/// Serializations already computed during one canonicalization, keyed by
/// subterm, depth and the labels of the subterm's free names. Colour
/// refinement re-serializes the same subterms under environments that differ
/// only on names they do not mention.
type Cache = RefCell<HashMap<(Process, usize, Vec<Option<String>>), String>>;

fn ser_proc(p: &Process, env: &Env, depth: usize, cache: &Cache) -> String {
    // A single component without restrictions serializes as its own group,
    // directly and without consulting the cache.
    match p {
        Process::Idle => return "[0]".to_string(),
        Process::Par(..) | Process::New { .. } => {}
        _ => return format!("[{}]", ser_thread(p, env, depth + 1, cache)),
    }
    let mut labels: Vec<Option<String>> = Vec::new();
    for n in free_names(p) {
        labels.push(match &n {
            Name::Var(x) => env.vars.get(x).cloned(),
            Name::Endpoint(e) => env.chans.get(&e.channel).cloned(),
        });
    }
    labels.extend(free_proc_vars(p).iter().map(|x| env.pvars.get(x).cloned()));
    let key = (p.clone(), depth, labels);
    if let Some(s) = cache.borrow().get(&key) {
        return s.clone();
    }
    let mut news = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0usize;
    flatten(p, depth, &mut news, &mut comps, &mut counter);
    let s = ser_group(&news, &comps, env, depth, cache).key;
    cache.borrow_mut().insert(key, s.clone());
    s
}

/// Flattens a group, giving every local restriction a unique internal name
/// that cannot clash with any identifier.
fn flatten(
    p: &Process,
    depth: usize,
    news: &mut Vec<String>,
    comps: &mut Vec<Process>,
    counter: &mut usize,
) {
    match p {
        Process::Idle => {}
        Process::Par(l, r) => {
            flatten(l, depth, news, comps, counter);
            flatten(r, depth, news, comps, counter);
        }
        Process::New { channel, body, .. } => {
            let tmp = format!("\u{0}{depth}.{counter}");
            *counter += 1;
            news.push(tmp.clone());
            flatten(&rename_channel(body, channel, &tmp), depth, news, comps, counter);
        }
        _ => comps.push(p.clone()),
    }
}

struct Group {
    key: String,
    /// Component indices in canonical order.
    order: Vec<usize>,
    /// Restriction indices in canonical order; unused ones last.
    numbering: Vec<usize>,
}

fn short_hash(s: &str) -> String {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    format!("{:016x}", h.finish())
}

fn placeholder(i: usize) -> String {
    format!("\u{1}{i}\u{2}")
}

// Orderings enumerated to break ties among components that share a key.
const TIE_BUDGET: usize = 720;

fn ser_group(news: &[String], comps: &[Process], env: &Env, depth: usize, cache: &Cache) -> Group {
    let inner_depth = depth + 1;
    let labelled = |labels: &dyn Fn(usize) -> String| -> Env {
        let mut e = env.clone();
        for (i, n) in news.iter().enumerate() {
            e.chans.insert(n.clone(), labels(i));
        }
        e
    };
    let keyed = |labels: &dyn Fn(usize) -> String| -> Vec<String> {
        let e = labelled(labels);
        comps.iter().map(|c| ser_thread(c, &e, inner_depth, cache)).collect()
    };

    // Without restrictions the exact serialization is also the rank, and
    // computing it once keeps nested prefixes linear rather than exponential.
    let plain = news.is_empty().then(|| keyed(&placeholder));
    let ranks: Vec<String> = if let Some(plain) = &plain {
        plain.clone()
    } else {
        // Colour refinement of the restricted channels by how components use them.
        let occurs: Vec<BTreeSet<String>> = comps.iter().map(free_channels).collect();
        let mut colors: Vec<String> = vec!["#".to_string(); news.len()];
        let mut classes = 1;
        loop {
            let mut next = Vec::with_capacity(news.len());
            for (i, n) in news.iter().enumerate() {
                let e = labelled(&|j| {
                    if j == i {
                        "@".to_string()
                    } else {
                        format!("#{}", colors[j])
                    }
                });
                let mut uses: Vec<String> = comps
                    .iter()
                    .zip(&occurs)
                    .filter(|(_, o)| o.contains(n))
                    .map(|(c, _)| ser_thread(c, &e, inner_depth, cache))
                    .collect();
                uses.sort();
                next.push(short_hash(&uses.join("|")));
            }
            let distinct = next.iter().collect::<BTreeSet<_>>().len();
            colors = next;
            if distinct <= classes || distinct == news.len() {
                break;
            }
            classes = distinct;
        }
        keyed(&|i| format!("#{}", colors[i]))
    };

    let mut base: Vec<usize> = (0..comps.len()).collect();
    base.sort_by(|&a, &b| ranks[a].cmp(&ranks[b]).then(a.cmp(&b)));

    let exact = plain.unwrap_or_else(|| keyed(&placeholder));
    let finish = |order: &[usize]| -> (String, Vec<usize>) {
        let joined: Vec<&str> = order.iter().map(|&i| exact[i].as_str()).collect();
        let mut text = joined.join(" | ");
        let mut numbering = Vec::new();
        for _ in 0..news.len() {
            let first = (0..news.len())
                .filter(|i| !numbering.contains(i))
                .filter_map(|i| text.find(&placeholder(i)).map(|pos| (pos, i)))
                .min();
            match first {
                Some((_, i)) => numbering.push(i),
                None => break,
            }
        }
        let used = numbering.len();
        for (k, &i) in numbering.iter().enumerate() {
            text = text.replace(&placeholder(i), &format!("c{depth}.{k}"));
        }
        let unused: Vec<usize> = (0..news.len()).filter(|i| !numbering.contains(i)).collect();
        numbering.extend(unused);
        let body = if order.is_empty() { "0".to_string() } else { text };
        let key = if news.is_empty() {
            format!("[{body}]")
        } else {
            format!("new{used}+{}[{body}]", news.len() - used)
        };
        (key, numbering)
    };

    // Tie groups whose members mention restricted channels and differ may
    // need reordering.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < base.len() {
        let mut end = start + 1;
        while end < base.len() && ranks[base[end]] == ranks[base[start]] {
            end += 1;
        }
        // Reordering identical members cannot change the key.
        let distinct = base[start..end].iter().any(|&i| exact[i] != exact[base[start]]);
        if distinct && exact[base[start]].contains('\u{1}') {
            groups.push((start, end));
        }
        start = end;
    }
    let mut count: usize = 1;
    for (s, e) in &groups {
        count = count.saturating_mul((1..=(e - s)).product());
    }

    let (mut best_key, mut best_num) = finish(&base);
    let mut best_order = base.clone();
    if !groups.is_empty() && count <= TIE_BUDGET {
        let mut order = base.clone();
        permute_groups(&groups, 0, &mut order, &mut |o| {
            let (k, n) = finish(o);
            if k < best_key {
                best_key = k;
                best_num = n;
                best_order = o.to_vec();
            }
        });
    }
    Group {
        key: best_key,
        order: best_order,
        numbering: best_num,
    }
}

fn permute_groups(
    groups: &[(usize, usize)],
    g: usize,
    order: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if g == groups.len() {
        visit(order);
        return;
    }
    let (s, e) = groups[g];
    permute_range(order, e, s, &mut |o| {
        let mut o = o.to_vec();
        permute_groups(groups, g + 1, &mut o, visit)
    });
}

fn permute_range(
    order: &mut Vec<usize>,
    e: usize,
    k: usize,
    visit: &mut dyn FnMut(&mut Vec<usize>),
) {
    if k + 1 >= e {
        visit(order);
        return;
    }
    for i in k..e {
        order.swap(k, i);
        permute_range(order, e, k + 1, visit);
        order.swap(k, i);
    }
}
