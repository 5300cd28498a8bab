use std::collections::HashSet;

use super::history::{History, HistoryError, OpKind, Operation};

/// Largest history the checkers accept, in operations.
pub const MAX_OPS: usize = 12;

/// Initial register value.
pub const INITIAL: i64 = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinResult {
    /// Operation indices (invocation order) in linearization order.
    /// Pending writes that took effect appear; pending reads never do.
    Linearizable(Vec<usize>),
    /// The shortest event prefix that cannot be linearized.
    Violation(History),
}

impl LinResult {
    pub fn is_linearizable(&self) -> bool {
        matches!(self, LinResult::Linearizable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinError {
    #[error("history has {ops} operations; the limit is {max}")]
    TooLarge { ops: usize, max: usize },
    #[error(transparent)]
    Malformed(#[from] HistoryError),
}

/// Strategy used to decide a single history.
type Decide = fn(&[Operation]) -> Option<Vec<usize>>;

/// Depth-first search over minimal operations with a memo on
/// (linearized set, register value).
pub fn lin_check(history: &History) -> Result<LinResult, LinError> {
    check_with(history, search)
}

/// Enumerates every order consistent with real-time precedence and replays
/// each against the register.
pub fn lin_check_enumerate(history: &History) -> Result<LinResult, LinError> {
    check_with(history, enumerate)
}

fn check_with(history: &History, decide: Decide) -> Result<LinResult, LinError> {
    history.validate()?;
    let ops = history.operations();
    if ops.len() > MAX_OPS {
        return Err(LinError::TooLarge { ops: ops.len(), max: MAX_OPS });
    }
    if let Some(order) = decide(&ops) {
        return Ok(LinResult::Linearizable(order));
    }
    let len = (1..=history.events.len())
        .find(|&k| decide(&history.prefix(k).operations()).is_none())
        .expect("the full history is a violating prefix");
    Ok(LinResult::Violation(history.prefix(len)))
}

/// Pending reads are dropped; pending writes may or may not take effect.
fn relevant(ops: &[Operation]) -> Vec<usize> {
    (0..ops.len())
        .filter(|&i| ops[i].respond.is_some() || ops[i].kind == OpKind::Write)
        .collect()
}

fn search(ops: &[Operation]) -> Option<Vec<usize>> {
    let idx = relevant(ops);
    let required: u32 = idx
        .iter()
        .enumerate()
        .filter(|(_, &i)| ops[i].respond.is_some())
        .fold(0, |m, (k, _)| m | 1 << k);
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    fn go(
        ops: &[Operation],
        idx: &[usize],
        required: u32,
        done: u32,
        value: i64,
        seen: &mut HashSet<(u32, i64)>,
        order: &mut Vec<usize>,
    ) -> bool {
        if done & required == required {
            return true;
        }
        if !seen.insert((done, value)) {
            return false;
        }
        for (k, &i) in idx.iter().enumerate() {
            if done >> k & 1 == 1 {
                continue;
            }
            let blocked = idx
                .iter()
                .enumerate()
                .any(|(j, &o)| done >> j & 1 == 0 && j != k && ops[o].precedes(&ops[i]));
            if blocked {
                continue;
            }
            let next = match ops[i].kind {
                OpKind::Write => ops[i].value.expect("write argument"),
                OpKind::Read if ops[i].value == Some(value) => value,
                OpKind::Read => continue,
            };
            order.push(i);
            if go(ops, idx, required, done | 1 << k, next, seen, order) {
                return true;
            }
            order.pop();
        }
        false
    }
    go(ops, &idx, required, 0, INITIAL, &mut seen, &mut order).then_some(order)
}

fn enumerate(ops: &[Operation]) -> Option<Vec<usize>> {
    let idx = relevant(ops);
    let optional: Vec<usize> = idx.iter().copied().filter(|&i| ops[i].respond.is_none()).collect();
    for mask in 0..1u32 << optional.len() {
        let chosen: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|i| match optional.iter().position(|o| o == i) {
                Some(b) => mask >> b & 1 == 1,
                None => true,
            })
            .collect();
        let mut found = None;
        linear_extensions(ops, &chosen, &mut Vec::new(), &mut |order| {
            if found.is_none() && replays(ops, order) {
                found = Some(order.to_vec());
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Calls `visit` with every ordering of `pool` that respects precedence.
fn linear_extensions(ops: &[Operation], pool: &[usize], acc: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if acc.len() == pool.len() {
        visit(acc);
        return;
    }
    for &i in pool {
        if acc.contains(&i) {
            continue;
        }
        let ready = pool.iter().all(|&j| j == i || acc.contains(&j) || !ops[j].precedes(&ops[i]));
        if ready {
            acc.push(i);
            linear_extensions(ops, pool, acc, visit);
            acc.pop();
        }
    }
}

fn replays(ops: &[Operation], order: &[usize]) -> bool {
    let mut value = INITIAL;
    for &i in order {
        match ops[i].kind {
            OpKind::Write => value = ops[i].value.expect("write argument"),
            OpKind::Read => {
                if ops[i].value != Some(value) {
                    return false;
                }
            }
        }
    }
    true
}
