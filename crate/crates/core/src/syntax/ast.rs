//! Abstract syntax of processes and session types.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

/// Polarity of an endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Polarity {
    Plus,
    Minus,
}

impl Polarity {
    /// The involution on polarities.
    pub fn co(self) -> Polarity {
        match self {
            Polarity::Plus => Polarity::Minus,
            Polarity::Minus => Polarity::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Plus => '+',
            Polarity::Minus => '-',
        }
    }
}

/// A channel decorated with a polarity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Endpoint {
    pub channel: String,
    pub polarity: Polarity,
}

impl Endpoint {
    pub fn new(channel: impl Into<String>, polarity: Polarity) -> Self {
        Endpoint {
            channel: channel.into(),
            polarity,
        }
    }

    /// The peer endpoint of the same session.
    pub fn peer(&self) -> Endpoint {
        Endpoint {
            channel: self.channel.clone(),
            polarity: self.polarity.co(),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.channel, self.polarity.symbol())
    }
}

/// A name is either a variable or an endpoint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Name {
    Var(String),
    Endpoint(Endpoint),
}

impl Name {
    pub fn var(x: impl Into<String>) -> Name {
        Name::Var(x.into())
    }

    pub fn plus(a: impl Into<String>) -> Name {
        Name::Endpoint(Endpoint::new(a, Polarity::Plus))
    }

    pub fn minus(a: impl Into<String>) -> Name {
        Name::Endpoint(Endpoint::new(a, Polarity::Minus))
    }

    pub fn as_endpoint(&self) -> Option<&Endpoint> {
        match self {
            Name::Endpoint(e) => Some(e),
            Name::Var(_) => None,
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Var(x) => f.write_str(x),
            Name::Endpoint(e) => e.fmt(f),
        }
    }
}

/// Output payload: a name or a base literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Value {
    Name(Name),
    Int(i64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Name(n) => n.fmt(f),
            Value::Int(k) => write!(f, "{k}"),
        }
    }
}

/// Recursion index: a natural number or infinity. Serializes as its
/// textual form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Fin(u64),
    Inf,
}

impl Index {
    pub fn is_finite(self) -> bool {
        matches!(self, Index::Fin(_))
    }

    pub fn is_zero(self) -> bool {
        self == Index::Fin(0)
    }

    /// The index after one unfolding; `None` when the index is zero.
    pub fn decrement(self) -> Option<Index> {
        match self {
            Index::Fin(0) => None,
            Index::Fin(n) => Some(Index::Fin(n - 1)),
            Index::Inf => Some(Index::Inf),
        }
    }

    pub fn succ(self) -> Index {
        match self {
            Index::Fin(n) => Index::Fin(n + 1),
            Index::Inf => Index::Inf,
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Index::Fin(a), Index::Fin(b)) => a.cmp(b),
            (Index::Fin(_), Index::Inf) => Ordering::Less,
            (Index::Inf, Index::Fin(_)) => Ordering::Greater,
            (Index::Inf, Index::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Fin(n) => write!(f, "{n}"),
            Index::Inf => f.write_str("inf"),
        }
    }
}

/// A priority annotation, or the infinite priority produced by obligations
/// of `end` and base types. Serializes as its textual form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Priority {
    Const(u64),
    Var(String),
    Infinity,
}

impl Priority {
    pub fn var(name: impl Into<String>) -> Priority {
        Priority::Var(name.into())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Priority::Infinity)
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Priority::Const(n) => write!(f, "{n}"),
            Priority::Var(v) => f.write_str(v),
            Priority::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Priority {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Index {
    type Err = String;

    fn from_str(s: &str) -> Result<Index, String> {
        match s {
            "inf" => Ok(Index::Inf),
            _ => s
                .parse::<u64>()
                .map(Index::Fin)
                .map_err(|_| format!("`{s}` is neither a natural number nor `inf`")),
        }
    }
}

/// Direction of a session-type prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::In => Direction::Out,
            Direction::Out => Direction::In,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::In => '?',
            Direction::Out => '!',
        }
    }
}

/// Session types, plus the base sort `int` for payloads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SessionType {
    End,
    Var(String),
    Prefix {
        dir: Direction,
        obligation: Priority,
        capability: Priority,
        payload: Box<SessionType>,
        cont: Box<SessionType>,
    },
    Rec {
        index: Index,
        var: String,
        body: Box<SessionType>,
    },
    Int,
}

impl SessionType {
    pub fn prefix(
        dir: Direction,
        obligation: Priority,
        capability: Priority,
        payload: SessionType,
        cont: SessionType,
    ) -> SessionType {
        SessionType::Prefix {
            dir,
            obligation,
            capability,
            payload: Box::new(payload),
            cont: Box::new(cont),
        }
    }

    pub fn input(o: Priority, c: Priority, payload: SessionType, cont: SessionType) -> SessionType {
        Self::prefix(Direction::In, o, c, payload, cont)
    }

    pub fn output(o: Priority, c: Priority, payload: SessionType, cont: SessionType) -> SessionType {
        Self::prefix(Direction::Out, o, c, payload, cont)
    }

    pub fn rec(index: Index, var: impl Into<String>, body: SessionType) -> SessionType {
        SessionType::Rec {
            index,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn var(name: impl Into<String>) -> SessionType {
        SessionType::Var(name.into())
    }

    pub fn is_end(&self) -> bool {
        matches!(self, SessionType::End)
    }

    pub fn is_base(&self) -> bool {
        matches!(self, SessionType::Int)
    }
}

/// Processes of the calculus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Process {
    Idle,
    Var(String),
    Input {
        subject: Name,
        binder: String,
        body: Box<Process>,
    },
    Output {
        subject: Name,
        payload: Value,
        body: Box<Process>,
    },
    Par(Box<Process>, Box<Process>),
    New {
        channel: String,
        pos_type: Option<SessionType>,
        neg_type: Option<SessionType>,
        body: Box<Process>,
    },
    Rec {
        index: Index,
        var: String,
        body: Box<Process>,
    },
}

impl Process {
    pub fn input(subject: Name, binder: impl Into<String>, body: Process) -> Process {
        Process::Input {
            subject,
            binder: binder.into(),
            body: Box::new(body),
        }
    }

    pub fn output(subject: Name, payload: Value, body: Process) -> Process {
        Process::Output {
            subject,
            payload,
            body: Box::new(body),
        }
    }

    pub fn par(left: Process, right: Process) -> Process {
        Process::Par(Box::new(left), Box::new(right))
    }

    /// Right-nested parallel composition; `Idle` for an empty list.
    pub fn par_all(items: impl IntoIterator<Item = Process>) -> Process {
        let mut items: Vec<Process> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Process::Idle;
        };
        while let Some(p) = items.pop() {
            acc = Process::par(p, acc);
        }
        acc
    }

    pub fn new_session(
        channel: impl Into<String>,
        pos_type: Option<SessionType>,
        neg_type: Option<SessionType>,
        body: Process,
    ) -> Process {
        Process::New {
            channel: channel.into(),
            pos_type,
            neg_type,
            body: Box::new(body),
        }
    }

    pub fn rec(index: Index, var: impl Into<String>, body: Process) -> Process {
        Process::Rec {
            index,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn var(name: impl Into<String>) -> Process {
        Process::Var(name.into())
    }

    /// Visits every recursion index occurring in the process, including the
    /// indices of recursive types in restriction annotations.
    pub fn for_each_index(&self, f: &mut impl FnMut(Index)) {
        match self {
            Process::Idle | Process::Var(_) => {}
            Process::Input { body, .. } | Process::Output { body, .. } => body.for_each_index(f),
            Process::Par(l, r) => {
                l.for_each_index(f);
                r.for_each_index(f);
            }
            Process::New {
                pos_type,
                neg_type,
                body,
                ..
            } => {
                for t in [pos_type, neg_type].into_iter().flatten() {
                    type_indices(t, f);
                }
                body.for_each_index(f);
            }
            Process::Rec { index, body, .. } => {
                f(*index);
                body.for_each_index(f);
            }
        }
    }

    /// True when every recursion index (process and annotation) is finite.
    pub fn is_finite(&self) -> bool {
        let mut finite = true;
        self.for_each_index(&mut |i| finite &= i.is_finite());
        finite
    }

    /// True when every recursion index is infinite.
    pub fn is_user_process(&self) -> bool {
        let mut user = true;
        self.for_each_index(&mut |i| user &= !i.is_finite());
        user
    }
}

fn type_indices(t: &SessionType, f: &mut impl FnMut(Index)) {
    match t {
        SessionType::End | SessionType::Var(_) | SessionType::Int => {}
        SessionType::Prefix { payload, cont, .. } => {
            type_indices(payload, f);
            type_indices(cont, f);
        }
        SessionType::Rec { index, body, .. } => {
            f(*index);
            type_indices(body, f);
        }
    }
}

/// A parsed program: a process plus the type aliases declared before it.
/// Aliases are already expanded inside `process`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub process: Process,
    pub aliases: BTreeMap<String, SessionType>,
}
