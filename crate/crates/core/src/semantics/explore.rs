use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::canon::CanonState;
use super::reduce::{step, RedexLabel};

/// A reduction edge between explored states, by state id.
#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub from: usize,
    pub label: RedexLabel,
    pub to: usize,
}

/// Breadth-first reachable state space. State 0 is the initial state and
/// ids follow discovery order.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<CanonState>,
    pub edges: Vec<Edge>,
    /// Set when `max_states` stopped the search; states whose successors were
    /// not all recorded are then listed in `frontier`.
    pub truncated: bool,
    pub frontier: Vec<usize>,
    /// `parent[i]` is the edge index that first discovered state `i`.
    pub parent: Vec<Option<usize>>,
}

impl StateSpace {
    pub fn successors(&self, id: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// States without outgoing edges, excluding the unexpanded frontier.
    pub fn normal_forms(&self) -> Vec<usize> {
        let mut has_succ = vec![false; self.states.len()];
        for e in &self.edges {
            has_succ[e.from] = true;
        }
        (0..self.states.len())
            .filter(|&i| !has_succ[i] && !self.frontier.contains(&i))
            .collect()
    }

    /// Edges of the breadth-first tree path from the initial state to `id`.
    pub fn path_to(&self, id: usize) -> Vec<&Edge> {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(e) = self.parent[cur] {
            path.push(&self.edges[e]);
            cur = self.edges[e].from;
        }
        path.reverse();
        path
    }

    /// Length of the longest path; only meaningful on acyclic spaces, which
    /// is the case for processes with finite indices.
    pub fn longest_path(&self) -> usize {
        let n = self.states.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            succ[e.from].push(e.to);
        }
        let mut memo: Vec<Option<usize>> = vec![None; n];
        fn go(v: usize, succ: &[Vec<usize>], memo: &mut [Option<usize>], guard: &mut [bool]) -> usize {
            if let Some(d) = memo[v] {
                return d;
            }
            if guard[v] {
                return 0;
            }
            guard[v] = true;
            let d = succ[v]
                .iter()
                .map(|&w| 1 + go(w, succ, memo, guard))
                .max()
                .unwrap_or(0);
            guard[v] = false;
            memo[v] = Some(d);
            d
        }
        let mut guard = vec![false; n];
        if n == 0 {
            0
        } else {
            go(0, &succ, &mut memo, &mut guard)
        }
    }
}

/// Explores the states reachable from `initial`, keeping at most
/// `max_states` distinct states.
pub fn reachable(initial: &CanonState, max_states: usize) -> StateSpace {
    let max_states = max_states.max(1);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut space = StateSpace {
        states: vec![initial.clone()],
        edges: Vec::new(),
        truncated: false,
        frontier: Vec::new(),
        parent: vec![None],
    };
    index.insert(initial.key().to_string(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let succ = step(&space.states[id]);
        let mut complete = true;
        for (label, next) in succ {
            let to = match index.get(next.key()) {
                Some(&to) => to,
                None => {
                    if space.states.len() >= max_states {
                        space.truncated = true;
                        complete = false;
                        continue;
                    }
                    let to = space.states.len();
                    index.insert(next.key().to_string(), to);
                    space.states.push(next);
                    space.parent.push(Some(space.edges.len()));
                    queue.push_back(to);
                    to
                }
            };
            space.edges.push(Edge { from: id, label, to });
        }
        if !complete {
            space.frontier.push(id);
        }
    }
    space
}

/// One line of a textual trace.
pub fn trace_line(step_index: usize, label: &RedexLabel, successor: &CanonState) -> String {
    let kind = if label.is_comm() { "comm" } else { "rec" };
    let channel = label.channel().unwrap_or("-");
    format!("{step_index}\t{kind}\t{channel}\t{successor}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::canon::canonicalize;
    use crate::syntax::parser::parse_process;

    fn c(s: &str) -> CanonState {
        canonicalize(&parse_process(s).unwrap())
    }

    #[test]
    fn idle_space() {
        let space = reachable(&c("0"), 10);
        assert_eq!(space.states.len(), 1);
        assert!(!space.truncated);
    }

    #[test]
    fn three_states() {
        let space = reachable(&c("rec[1] X. new a . (a+!1.0 | a-?(x).0)"), 100);
        assert_eq!(space.states.len(), 3);
        assert_eq!(space.normal_forms().len(), 1);
        assert_eq!(space.longest_path(), 2);
    }

    #[test]
    fn truncation() {
        let space = reachable(&c("rec[inf] X. new a . (a+!1.0 | X)"), 5);
        assert!(space.truncated);
        assert_eq!(space.states.len(), 5);
    }

    #[test]
    fn trace_format() {
        let s = c("rec[1] X.X");
        let (label, next) = step(&s).remove(0);
        assert_eq!(trace_line(0, &label, &next), "0\trec\t-\trec[0] X.X");
    }
}
