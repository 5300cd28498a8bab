use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::graph::{CheckError, Edge, Explorer, StateGraph, ENV_ACTOR};
use crate::automata::{fairness, Action, Execution, Fairness};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgressVerdict {
    Live,
    /// A fair lasso on whose cycle `pending` always holds and the goal never
    /// occurs.
    FairLassoCounterexample(Execution),
}

/// Tasks with an enabled action at each state, read off the graph edges.
pub(crate) fn enabled_tasks(graph: &StateGraph, s: usize) -> BTreeSet<&str> {
    graph.edges[s]
        .iter()
        .filter(|e| e.actor != ENV_ACTOR)
        .map(|e| e.actor.as_str())
        .collect()
}

/// Searches `allowed` states/edges of `graph` for a fair cycle. Returns the
/// lasso (prefix through the full graph, cycle inside the allowed part).
pub(crate) fn find_fair_lasso(
    graph: &StateGraph,
    state_ok: impl Fn(usize) -> bool,
    edge_ok: impl Fn(&Edge) -> bool,
) -> Option<Execution> {
    let mut sub: DiGraph<usize, usize> = DiGraph::new();
    let mut node_of: HashMap<usize, NodeIndex> = HashMap::new();
    for s in (0..graph.len()).filter(|&s| state_ok(s)) {
        node_of.insert(s, sub.add_node(s));
    }
    for (&s, &ns) in &node_of {
        for (k, e) in graph.edges[s].iter().enumerate() {
            if let Some(&nt) = node_of.get(&e.target) {
                if edge_ok(e) {
                    sub.add_edge(ns, nt, k);
                }
            }
        }
    }

    let mut sccs: Vec<Vec<usize>> = tarjan_scc(&sub)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| sub[n]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    sccs.sort();

    for scc in sccs {
        let members: BTreeSet<usize> = scc.iter().copied().collect();
        let internal: Vec<(usize, usize)> = scc
            .iter()
            .flat_map(|&s| {
                graph.edges[s]
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| members.contains(&e.target) && edge_ok(e))
                    .map(move |(k, _)| (s, k))
            })
            .collect();
        if internal.is_empty() {
            continue;
        }
        let stepping: BTreeSet<&str> = internal
            .iter()
            .map(|&(s, k)| graph.edges[s][k].actor.as_str())
            .filter(|a| *a != ENV_ACTOR)
            .collect();
        let mut throughout: Option<BTreeSet<&str>> = None;
        for &s in &scc {
            let here = enabled_tasks(graph, s);
            throughout = Some(match throughout {
                None => here,
                Some(acc) => acc.intersection(&here).copied().collect(),
            });
        }
        if !throughout.unwrap_or_default().is_subset(&stepping) {
            continue;
        }
        return Some(build_lasso(graph, &members, &internal, &edge_ok));
    }
    None
}

/// Prefix to the SCC's first state, then a closed walk visiting every state
/// of the SCC and taking one internal edge per stepping task.
fn build_lasso(
    graph: &StateGraph,
    members: &BTreeSet<usize>,
    internal: &[(usize, usize)],
    edge_ok: &impl Fn(&Edge) -> bool,
) -> Execution {
    let entry = *members.iter().next().expect("nonempty scc");
    let mut exec = graph.path_to(entry);
    let prefix_len = exec.len();

    let mut required_edges: Vec<(usize, usize)> = Vec::new();
    let mut seen_tasks = BTreeSet::new();
    for &(s, k) in internal {
        let actor = graph.edges[s][k].actor.as_str();
        if required_edges.is_empty() || (actor != ENV_ACTOR && seen_tasks.insert(actor)) {
            required_edges.push((s, k));
        }
    }

    let mut cur = entry;
    let walk = |exec: &mut Execution, from: usize, to: usize| -> usize {
        for (action, state) in inner_path(graph, members, edge_ok, from, to) {
            exec.push(action, state);
        }
        to
    };
    for &s in members {
        cur = walk(&mut exec, cur, s);
    }
    for &(s, k) in &required_edges {
        walk(&mut exec, cur, s);
        let e = &graph.edges[s][k];
        exec.push(e.action.clone(), graph.states[e.target].clone());
        cur = e.target;
    }
    walk(&mut exec, cur, entry);
    exec.lasso_start = Some(prefix_len);
    exec
}

fn inner_path(
    graph: &StateGraph,
    members: &BTreeSet<usize>,
    edge_ok: &impl Fn(&Edge) -> bool,
    from: usize,
    to: usize,
) -> Vec<(Action, Value)> {
    if from == to {
        return Vec::new();
    }
    let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for (k, e) in graph.edges[s].iter().enumerate() {
            if !members.contains(&e.target) || !edge_ok(e) || e.target == from || prev.contains_key(&e.target) {
                continue;
            }
            prev.insert(e.target, (s, k));
            if e.target == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, k) = prev[&cur];
                    path.push((graph.edges[p][k].action.clone(), graph.states[cur].clone()));
                    cur = p;
                }
                path.reverse();
                return path;
            }
            queue.push_back(e.target);
        }
    }
    unreachable!("states of one SCC are mutually reachable")
}

impl Explorer<'_> {
    /// Looks for a reachable fair cycle on which `pending` holds at every
    /// state and no action satisfying `goal` occurs.
    pub fn progress(
        &self,
        pending: impl Fn(&Value) -> bool,
        goal: impl Fn(&Action) -> bool,
    ) -> Result<ProgressVerdict, CheckError> {
        let graph = self.graph()?;
        let lasso = find_fair_lasso(&graph, |s| pending(&graph.states[s]), |e| !goal(&e.action));
        Ok(match lasso {
            None => ProgressVerdict::Live,
            Some(exec) => {
                debug_assert_eq!(fairness(&exec, self.system), Fairness::Fair);
                ProgressVerdict::FairLassoCounterexample(exec)
            }
        })
    }
}
