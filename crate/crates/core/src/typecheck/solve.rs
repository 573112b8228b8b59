//! Strict-inequality constraints over naturals extended with infinity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::syntax::ast::Priority;

/// Typing rule and subterm that produced a constraint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Origin {
    pub rule: String,
    pub site: String,
}

/// `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Constraint {
    pub lhs: Priority,
    pub rhs: Priority,
    pub origin: Origin,
}

impl Constraint {
    pub fn new(lhs: Priority, rhs: Priority, rule: &str, site: impl Into<String>) -> Constraint {
        Constraint {
            lhs,
            rhs,
            origin: Origin {
                rule: rule.to_string(),
                site: site.into(),
            },
        }
    }

    /// Evaluates the constraint under an assignment; unassigned variables
    /// make it false.
    pub fn holds(&self, assignment: &BTreeMap<String, u64>) -> bool {
        let eval = |p: &Priority| -> Option<Option<u64>> {
            match p {
                Priority::Const(n) => Some(Some(*n)),
                Priority::Var(v) => assignment.get(v).map(|n| Some(*n)),
                Priority::Infinity => Some(None),
            }
        };
        match (eval(&self.lhs), eval(&self.rhs)) {
            (Some(_), Some(None)) => true,
            (Some(None), Some(Some(_))) => false,
            (Some(Some(a)), Some(Some(b))) => a < b,
            _ => false,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} < {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    /// The constraints form a closed chain `x1 < x2 < ... < x1`.
    Cycle,
    /// A chain from a lower bound to an upper bound that it exceeds, or a
    /// single constraint that is false on its own.
    Bound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub constraints: Vec<Constraint>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(first) = self.constraints.first() {
            parts.push(first.lhs.to_string());
        }
        for c in &self.constraints {
            parts.push(c.rhs.to_string());
        }
        f.write_str(&parts.join(" < "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum SolveResult {
    /// Least assignment of the priority variables.
    Assignment { values: BTreeMap<String, u64> },
    Unsatisfiable { witness: Witness },
}

impl SolveResult {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, SolveResult::Assignment { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Const(u64),
    Var(String),
}

fn node(p: &Priority) -> Option<Node> {
    match p {
        Priority::Const(n) => Some(Node::Const(*n)),
        Priority::Var(v) => Some(Node::Var(v.clone())),
        Priority::Infinity => None,
    }
}

/// Decides a set of strict inequalities. Constraints with an infinite
/// right-hand side hold trivially; an infinite left-hand side under a finite
/// bound fails at once. The rest is a difference-constraint system whose
/// least solution is the longest path from the sources.
pub fn solve(cs: &[Constraint]) -> SolveResult {
    let mut live: Vec<&Constraint> = Vec::new();
    for c in cs {
        if c.rhs.is_infinite() {
            continue;
        }
        if c.lhs.is_infinite() {
            return unsat(WitnessKind::Bound, vec![c.clone()]);
        }
        if let (Priority::Const(a), Priority::Const(b)) = (&c.lhs, &c.rhs) {
            if a >= b {
                return unsat(WitnessKind::Bound, vec![c.clone()]);
            }
        }
        live.push(c);
    }

    // Variables only bounded by infinity still receive a value.
    let mut nodes: BTreeSet<Node> = BTreeSet::new();
    for c in cs {
        nodes.extend(node(&c.lhs));
        nodes.extend(node(&c.rhs));
    }
    let nodes: Vec<Node> = nodes.into_iter().collect();
    let id = |n: &Node| nodes.binary_search(n).expect("node collected");
    // Outgoing edges (target, constraint index), in input order.
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (k, c) in live.iter().enumerate() {
        let (Some(a), Some(b)) = (node(&c.lhs), node(&c.rhs)) else {
            unreachable!("infinite priorities filtered above")
        };
        out[id(&a)].push((id(&b), k));
    }

    if let Some(cycle) = find_cycle(&out) {
        let constraints = cycle.into_iter().map(|k| live[k].clone()).collect();
        return unsat(WitnessKind::Cycle, constraints);
    }

    // Longest path in topological order; constants are fixed.
    let order = topological(&out);
    let mut value: Vec<u64> = nodes
        .iter()
        .map(|n| match n {
            Node::Const(c) => *c,
            Node::Var(_) => 0,
        })
        .collect();
    let mut pred: Vec<Option<usize>> = vec![None; nodes.len()];
    for &u in &order {
        for &(v, k) in &out[u] {
            let need = value[u] + 1;
            match nodes[v] {
                Node::Const(c) => {
                    if need > c {
                        let mut chain = vec![live[k].clone()];
                        let mut cur = u;
                        while let Some(pk) = pred[cur] {
                            chain.push(live[pk].clone());
                            cur = id(&node(&live[pk].lhs).expect("finite"));
                        }
                        chain.reverse();
                        return unsat(WitnessKind::Bound, chain);
                    }
                }
                Node::Var(_) => {
                    if need > value[v] {
                        value[v] = need;
                        pred[v] = Some(k);
                    }
                }
            }
        }
    }
    let values = nodes
        .iter()
        .zip(value)
        .filter_map(|(n, v)| match n {
            Node::Var(name) => Some((name.clone(), v)),
            Node::Const(_) => None,
        })
        .collect();
    SolveResult::Assignment { values }
}

fn unsat(kind: WitnessKind, constraints: Vec<Constraint>) -> SolveResult {
    SolveResult::Unsatisfiable {
        witness: Witness { kind, constraints },
    }
}

/// First cycle found by depth-first search from nodes in order, as a list
/// of constraint indices.
fn find_cycle(out: &[Vec<(usize, usize)>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let n = out.len();
    let mut mark = vec![Mark::White; n];
    // Stack of (node, next edge position); `via` holds the edge used to enter.
    for root in 0..n {
        if mark[root] != Mark::White {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut via: Vec<usize> = Vec::new();
        mark[root] = Mark::Grey;
        while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            if *pos < out[u].len() {
                let (v, k) = out[u][*pos];
                *pos += 1;
                match mark[v] {
                    Mark::White => {
                        mark[v] = Mark::Grey;
                        stack.push((v, 0));
                        via.push(k);
                    }
                    Mark::Grey => {
                        // Cycle: edges from v's position on the stack to u, then k.
                        let start = stack.iter().position(|&(w, _)| w == v).expect("grey on stack");
                        let mut cycle: Vec<usize> = via[start..].to_vec();
                        cycle.push(k);
                        return Some(cycle);
                    }
                    Mark::Black => {}
                }
            } else {
                mark[u] = Mark::Black;
                stack.pop();
                via.pop();
            }
        }
    }
    None
}

fn topological(out: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = out.len();
    let mut indeg = vec![0usize; n];
    for edges in out {
        for &(v, _) in edges {
            indeg[v] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &(v, _) in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }
    order
}
