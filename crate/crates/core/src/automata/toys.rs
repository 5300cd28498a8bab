//! Small automata used by tests, examples and the CLI smoke scenarios.

use std::collections::{BTreeMap, BTreeSet};

use super::{Action, Automaton, FnBehavior, Signature};
use crate::value::Value;

/// Counts from 0 up to `max` with an output `increment`.
pub fn counter(id: &str, max: i64) -> Automaton {
    let behavior = FnBehavior::new(move |s| {
        let v = s.as_int().unwrap_or(0);
        if v < max {
            vec![(Action::bare("increment"), Value::Int(v + 1))]
        } else {
            Vec::new()
        }
    });
    Automaton::new(
        id,
        Signature::new().output("increment"),
        vec![Value::Int(0)],
        tasks([("count", &["increment"][..])]),
        behavior,
    )
    .expect("counter is well formed")
}

/// Like [`counter`] but with an internal action named `{id}_tick`, so several
/// copies compose.
pub fn ticker(id: &str, max: i64) -> Automaton {
    let name = format!("{id}_tick");
    let action = name.clone();
    let behavior = FnBehavior::new(move |s| {
        let v = s.as_int().unwrap_or(0);
        if v < max {
            vec![(Action::bare(action.clone()), Value::Int(v + 1))]
        } else {
            Vec::new()
        }
    });
    Automaton::new(
        id,
        Signature::new().internal(name.clone()),
        vec![Value::Int(0)],
        tasks([("tick", &[name.as_str()][..])]),
        behavior,
    )
    .expect("ticker is well formed")
}

/// Internal action that toggles a bit forever.
pub fn flipper(id: &str) -> Automaton {
    let name = format!("{id}_flip");
    let action = name.clone();
    let behavior = FnBehavior::new(move |s| {
        let b = s.as_bool().unwrap_or(false);
        vec![(Action::bare(action.clone()), Value::Bool(!b))]
    });
    Automaton::new(
        id,
        Signature::new().internal(name.clone()),
        vec![Value::Bool(false)],
        tasks([("flip", &[name.as_str()][..])]),
        behavior,
    )
    .expect("flipper is well formed")
}

/// A process with no locally-controlled actions.
pub fn idle(id: &str) -> Automaton {
    let behavior = FnBehavior::new(|_| Vec::new());
    Automaton::new(id, Signature::new(), vec![Value::Unit], BTreeMap::new(), behavior)
        .expect("idle is well formed")
}

/// FIFO channel: input `send(m)`, output `deliver(m)`. Holds at most
/// `capacity` messages; sends into a full queue are dropped so the state
/// space stays finite.
pub fn channel(id: &str, domain: &[i64], capacity: usize) -> Automaton {
    let behavior = FnBehavior::new(|s| {
        let queue = s.get("queue").and_then(Value::as_list).unwrap_or(&[]);
        match queue.first() {
            Some(head) => vec![(
                Action::new("deliver", head.clone()),
                Value::record([("queue", Value::list(queue[1..].iter().cloned()))]),
            )],
            None => Vec::new(),
        }
    })
    .with_inputs(
        domain.iter().map(|m| Action::new("send", Value::Int(*m))).collect(),
        move |s, a| {
            if a.name != "send" {
                return None;
            }
            let mut queue = s.get("queue")?.as_list()?.to_vec();
            if queue.len() < capacity {
                queue.push(a.payload.clone());
            }
            Some(Value::record([("queue", Value::List(queue))]))
        },
    );
    Automaton::new(
        id,
        Signature::new().input("send").output("deliver"),
        vec![Value::record([("queue", Value::list([]))])],
        tasks([("delivery", &["deliver"][..])]),
        behavior,
    )
    .expect("channel is well formed")
}

/// Sends each message of `messages` once, in order, as output `send(m)`.
pub fn sender(id: &str, messages: &[i64]) -> Automaton {
    let messages: Vec<i64> = messages.to_vec();
    let behavior = FnBehavior::new(move |s| {
        let next = s.as_int().unwrap_or(0) as usize;
        match messages.get(next) {
            Some(m) => vec![(Action::new("send", Value::Int(*m)), Value::Int(next as i64 + 1))],
            None => Vec::new(),
        }
    });
    Automaton::new(
        id,
        Signature::new().output("send"),
        vec![Value::Int(0)],
        tasks([("sending", &["send"][..])]),
        behavior,
    )
    .expect("sender is well formed")
}

/// Records every delivered message.
pub fn receiver(id: &str, domain: &[i64]) -> Automaton {
    let behavior = FnBehavior::new(|_| Vec::new()).with_inputs(
        domain.iter().map(|m| Action::new("deliver", Value::Int(*m))).collect(),
        |s, a| {
            let mut got = s.as_list()?.to_vec();
            got.push(a.payload.clone());
            Some(Value::List(got))
        },
    );
    Automaton::new(
        id,
        Signature::new().input("deliver"),
        vec![Value::list([])],
        BTreeMap::new(),
        behavior,
    )
    .expect("receiver is well formed")
}

/// Decides its own input immediately via output `decide`.
pub fn decider(id: &str, input: i64) -> Automaton {
    let behavior = FnBehavior::new(move |s| {
        if s.as_bool() == Some(false) {
            vec![(Action::new("decide", Value::Int(input)), Value::Bool(true))]
        } else {
            Vec::new()
        }
    });
    Automaton::new(
        id,
        Signature::new().output("decide"),
        vec![Value::Bool(false)],
        tasks([("deciding", &["decide"][..])]),
        behavior,
    )
    .expect("decider is well formed")
}

fn tasks<'a>(
    entries: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
) -> BTreeMap<String, BTreeSet<String>> {
    entries
        .into_iter()
        .map(|(t, acts)| (t.to_string(), acts.iter().map(|a| a.to_string()).collect()))
        .collect()
}
