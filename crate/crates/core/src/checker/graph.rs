use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use crate::automata::{Action, Automaton, Execution};
use crate::value::Value;

/// Actor name recorded on edges labeled by input actions.
pub const ENV_ACTOR: &str = "env";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("state cap of {cap} exceeded (inconclusive)")]
    CapExceeded { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub actor: String,
    pub action: Action,
    pub target: usize,
}

/// Reachable state graph. States are numbered in BFS discovery order; edges
/// out of each state are sorted by `(actor, action)`.
#[derive(Clone, Debug, Default)]
pub struct StateGraph {
    pub states: Vec<Value>,
    pub edges: Vec<Vec<Edge>>,
    pub initial: Vec<usize>,
    /// BFS tree: `(parent, edge index in parent)`; `None` for initial states.
    pub parent: Vec<Option<(usize, usize)>>,
    index: HashMap<Value, usize>,
}

impl StateGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &Value) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Shortest path from an initial state, as an execution.
    pub fn path_to(&self, target: usize) -> Execution {
        let mut rev = Vec::new();
        let mut cur = target;
        while let Some((p, e)) = self.parent[cur] {
            rev.push((self.edges[p][e].action.clone(), self.states[cur].clone()));
            cur = p;
        }
        let mut exec = Execution::empty(self.states[cur].clone());
        for (action, state) in rev.into_iter().rev() {
            exec.push(action, state);
        }
        exec
    }
}

/// Breadth-first explorer over an automaton's reachable states.
///
/// Successor computation for each BFS layer may be split across `shards`
/// worker threads; merging happens in layer order, so state numbering,
/// counts and counterexamples do not depend on the shard count.
#[derive(Clone, Copy, Debug)]
pub struct Explorer<'a> {
    pub(crate) system: &'a Automaton,
    pub(crate) cap: usize,
    pub(crate) shards: usize,
}

type Succ = Vec<(String, Action, Value)>;

impl<'a> Explorer<'a> {
    pub fn new(system: &'a Automaton) -> Self {
        Explorer {
            system,
            cap: 1_000_000,
            shards: 1,
        }
    }

    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }

    pub(crate) fn successors(&self, state: &Value) -> Succ {
        let mut out: Succ = self
            .system
            .successors(state)
            .into_iter()
            .map(|(action, next)| {
                let actor = self
                    .system
                    .task_of(&action.name)
                    .unwrap_or(ENV_ACTOR)
                    .to_string();
                (actor, action, next)
            })
            .collect();
        out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        out
    }

    fn layer_successors(&self, states: &[Value]) -> Vec<Succ> {
        if self.shards <= 1 || states.len() < 2 {
            return states.iter().map(|s| self.successors(s)).collect();
        }
        let chunk = states.len().div_ceil(self.shards);
        states
            .par_chunks(chunk)
            .map(|c| c.iter().map(|s| self.successors(s)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    /// BFS that stops as soon as `stop` holds for a discovered state.
    /// Returns the graph built so far and the stopping state, if any.
    pub(crate) fn bfs(
        &self,
        stop: impl Fn(&Value) -> bool,
    ) -> Result<(StateGraph, Option<usize>), CheckError> {
        let mut g = StateGraph::default();
        let mut initial: Vec<Value> = self.system.start_states().to_vec();
        initial.sort();
        for s in initial {
            if g.index.contains_key(&s) {
                continue;
            }
            let id = g.states.len();
            g.index.insert(s.clone(), id);
            g.states.push(s.clone());
            g.edges.push(Vec::new());
            g.parent.push(None);
            g.initial.push(id);
            if stop(&s) {
                return Ok((g, Some(id)));
            }
        }
        let mut frontier: VecDeque<usize> = g.initial.iter().copied().collect();
        while !frontier.is_empty() {
            let layer: Vec<usize> = frontier.drain(..).collect();
            let layer_states: Vec<Value> = layer.iter().map(|&i| g.states[i].clone()).collect();
            let succs = self.layer_successors(&layer_states);
            for (&src, succ) in layer.iter().zip(succs) {
                for (actor, action, next) in succ {
                    let (target, fresh) = match g.index.get(&next) {
                        Some(&t) => (t, false),
                        None => {
                            if g.states.len() >= self.cap {
                                return Err(CheckError::CapExceeded { cap: self.cap });
                            }
                            let t = g.states.len();
                            g.index.insert(next.clone(), t);
                            g.states.push(next);
                            g.edges.push(Vec::new());
                            g.parent.push(Some((src, g.edges[src].len())));
                            frontier.push_back(t);
                            (t, true)
                        }
                    };
                    g.edges[src].push(Edge { actor, action, target });
                    if fresh && stop(&g.states[target]) {
                        return Ok((g, Some(target)));
                    }
                }
            }
        }
        Ok((g, None))
    }

    /// The full reachable state graph.
    pub fn graph(&self) -> Result<StateGraph, CheckError> {
        self.bfs(|_| false).map(|(g, _)| g)
    }
}

/// Isomorphism of two deterministic labeled graphs, found by lock-step BFS
/// from paired initial states. Edge labels must match exactly.
pub fn isomorphic(a: &StateGraph, b: &StateGraph) -> bool {
    if a.len() != b.len() || a.edge_count() != b.edge_count() || a.initial.len() != b.initial.len() {
        return false;
    }
    let mut map_ab: Vec<Option<usize>> = vec![None; a.len()];
    let mut map_ba: Vec<Option<usize>> = vec![None; b.len()];
    let mut used = vec![false; b.initial.len()];
    for &ia in &a.initial {
        let mut matched = false;
        for (k, &ib) in b.initial.iter().enumerate() {
            if used[k] {
                continue;
            }
            let (mut trial_ab, mut trial_ba) = (map_ab.clone(), map_ba.clone());
            if lockstep(a, b, ia, ib, &mut trial_ab, &mut trial_ba) {
                map_ab = trial_ab;
                map_ba = trial_ba;
                used[k] = true;
                matched = true;
                break;
            }
        }
        if !matched {
            return false;
        }
    }
    map_ab.iter().all(Option::is_some)
}

fn label_set(g: &StateGraph, s: usize) -> Vec<(&Action, usize)> {
    let mut v: Vec<(&Action, usize)> = g.edges[s].iter().map(|e| (&e.action, e.target)).collect();
    v.sort_by(|x, y| x.0.cmp(y.0));
    v
}

fn lockstep(
    a: &StateGraph,
    b: &StateGraph,
    ia: usize,
    ib: usize,
    map_ab: &mut [Option<usize>],
    map_ba: &mut [Option<usize>],
) -> bool {
    let mut queue = VecDeque::from([(ia, ib)]);
    while let Some((x, y)) = queue.pop_front() {
        match (map_ab[x], map_ba[y]) {
            (Some(m), _) if m != y => return false,
            (_, Some(m)) if m != x => return false,
            (Some(_), _) => continue,
            _ => {}
        }
        map_ab[x] = Some(y);
        map_ba[y] = Some(x);
        let (ex, ey) = (label_set(a, x), label_set(b, y));
        if ex.len() != ey.len() {
            return false;
        }
        for ((la, ta), (lb, tb)) in ex.into_iter().zip(ey) {
            if la != lb {
                return false;
            }
            queue.push_back((ta, tb));
        }
    }
    true
}
