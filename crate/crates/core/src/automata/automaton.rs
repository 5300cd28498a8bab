use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::action::{Action, ActionKind, Signature};
use crate::value::Value;

/// Transition behavior of an automaton.
///
/// Transitions are deterministic: a given `(state, action)` pair has at most
/// one successor. Nondeterminism is expressed only by several actions being
/// enabled at once.
pub trait Behavior: Send + Sync {
    /// Every locally-controlled action enabled at `state`, paired with its
    /// successor state.
    fn enabled(&self, state: &Value) -> Vec<(Action, Value)>;

    /// Successor for an input action. Must be `Some` for every payload in the
    /// input domain; `None` marks a payload outside that domain.
    fn on_input(&self, state: &Value, action: &Action) -> Option<Value>;

    /// A finite enumeration of the input actions the environment may issue.
    /// Used by exploration and by the input-enabling check. Closed systems
    /// return nothing.
    fn input_alphabet(&self) -> Vec<Action> {
        Vec::new()
    }
}

type EnabledFn = dyn Fn(&Value) -> Vec<(Action, Value)> + Send + Sync;
type InputFn = dyn Fn(&Value, &Action) -> Option<Value> + Send + Sync;

/// Closure-backed [`Behavior`], handy for small hand-written automata.
pub struct FnBehavior {
    enabled: Box<EnabledFn>,
    input: Box<InputFn>,
    alphabet: Vec<Action>,
}

impl FnBehavior {
    pub fn new(
        enabled: impl Fn(&Value) -> Vec<(Action, Value)> + Send + Sync + 'static,
    ) -> Self {
        FnBehavior {
            enabled: Box::new(enabled),
            input: Box::new(|_, _| None),
            alphabet: Vec::new(),
        }
    }

    pub fn with_inputs(
        mut self,
        alphabet: Vec<Action>,
        input: impl Fn(&Value, &Action) -> Option<Value> + Send + Sync + 'static,
    ) -> Self {
        self.alphabet = alphabet;
        self.input = Box::new(input);
        self
    }
}

impl Behavior for FnBehavior {
    fn enabled(&self, state: &Value) -> Vec<(Action, Value)> {
        (self.enabled)(state)
    }

    fn on_input(&self, state: &Value, action: &Action) -> Option<Value> {
        (self.input)(state, action)
    }

    fn input_alphabet(&self) -> Vec<Action> {
        self.alphabet.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("automaton {0} has no start states")]
    NoStartStates(String),
    #[error("automaton {automaton}: task {task} names {action}, which is not locally controlled")]
    TaskNotLocal {
        automaton: String,
        task: String,
        action: String,
    },
    #[error("automaton {automaton}: action {action} belongs to tasks {first} and {second}")]
    TaskOverlap {
        automaton: String,
        action: String,
        first: String,
        second: String,
    },
    #[error("automaton {automaton}: locally-controlled action {action} is in no task")]
    TaskMissing { automaton: String, action: String },
    #[error("incompatible signatures: action {action} in {left} and {right}: {reason}")]
    IncompatibleSignatures {
        action: String,
        left: String,
        right: String,
        reason: &'static str,
    },
    #[error("compose needs at least one component")]
    EmptyComposition,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("action {action} not enabled in state {state}")]
    ActionNotEnabled { action: String, state: String },
}

/// An I/O automaton: signature, start states, deterministic transitions and a
/// task partition of its locally-controlled actions.
#[derive(Clone)]
pub struct Automaton {
    id: String,
    signature: Signature,
    start_states: Vec<Value>,
    tasks: BTreeMap<String, BTreeSet<String>>,
    task_of: BTreeMap<String, String>,
    behavior: Arc<dyn Behavior>,
    components: Vec<Automaton>,
}

impl fmt::Debug for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Automaton")
            .field("id", &self.id)
            .field("signature", &self.signature)
            .field("tasks", &self.tasks)
            .finish_non_exhaustive()
    }
}

impl Automaton {
    pub fn new(
        id: impl Into<String>,
        signature: Signature,
        start_states: Vec<Value>,
        tasks: BTreeMap<String, BTreeSet<String>>,
        behavior: impl Behavior + 'static,
    ) -> Result<Self, AutomatonError> {
        Self::from_parts(id.into(), signature, start_states, tasks, Arc::new(behavior), Vec::new())
    }

    fn from_parts(
        id: String,
        signature: Signature,
        mut start_states: Vec<Value>,
        tasks: BTreeMap<String, BTreeSet<String>>,
        behavior: Arc<dyn Behavior>,
        components: Vec<Automaton>,
    ) -> Result<Self, AutomatonError> {
        if start_states.is_empty() {
            return Err(AutomatonError::NoStartStates(id));
        }
        start_states.sort();
        start_states.dedup();
        let mut task_of = BTreeMap::new();
        for (task, actions) in &tasks {
            for action in actions {
                match signature.kind(action) {
                    Some(kind) if kind.is_locally_controlled() => {}
                    _ => {
                        return Err(AutomatonError::TaskNotLocal {
                            automaton: id,
                            task: task.clone(),
                            action: action.clone(),
                        })
                    }
                }
                if let Some(prev) = task_of.insert(action.clone(), task.clone()) {
                    return Err(AutomatonError::TaskOverlap {
                        automaton: id,
                        action: action.clone(),
                        first: prev,
                        second: task.clone(),
                    });
                }
            }
        }
        if let Some(missing) = signature
            .locally_controlled()
            .find(|a| !task_of.contains_key(*a))
        {
            return Err(AutomatonError::TaskMissing {
                automaton: id,
                action: missing.to_string(),
            });
        }
        Ok(Automaton {
            id,
            signature,
            start_states,
            tasks,
            task_of,
            behavior,
            components,
        })
    }

    /// Builds an automaton whose tasks are one per locally-controlled action.
    pub fn with_singleton_tasks(
        id: impl Into<String>,
        signature: Signature,
        start_states: Vec<Value>,
        behavior: impl Behavior + 'static,
    ) -> Result<Self, AutomatonError> {
        let tasks = signature
            .locally_controlled()
            .map(|a| (a.to_string(), BTreeSet::from([a.to_string()])))
            .collect();
        Self::new(id, signature, start_states, tasks, behavior)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn start_states(&self) -> &[Value] {
        &self.start_states
    }

    pub fn tasks(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.tasks
    }

    /// Task owning a locally-controlled action name; `None` for inputs.
    pub fn task_of(&self, action: &str) -> Option<&str> {
        self.task_of.get(action).map(String::as_str)
    }

    /// Components of a composition, in order. Empty for primitive automata.
    pub fn components(&self) -> &[Automaton] {
        &self.components
    }

    /// The same automaton with a different set of start states.
    ///
    /// # Panics
    /// If `start_states` is empty.
    pub fn restarted_at(&self, mut start_states: Vec<Value>) -> Automaton {
        assert!(!start_states.is_empty(), "restarted_at needs a start state");
        start_states.sort();
        start_states.dedup();
        Automaton {
            start_states,
            ..self.clone()
        }
    }

    pub fn kind(&self, action: &str) -> Option<ActionKind> {
        self.signature.kind(action)
    }

    pub fn is_external(&self, action: &Action) -> bool {
        self.kind(&action.name).is_some_and(ActionKind::is_external)
    }

    /// Enabled locally-controlled actions with successors, sorted by
    /// `(task, action)` for reproducible exploration.
    pub fn enabled(&self, state: &Value) -> Vec<(Action, Value)> {
        let mut out = self.behavior.enabled(state);
        out.sort_by(|(a, _), (b, _)| {
            (self.task_of(&a.name), a).cmp(&(self.task_of(&b.name), b))
        });
        out.dedup_by(|(a, _), (b, _)| a == b);
        out
    }

    pub fn input_alphabet(&self) -> Vec<Action> {
        let mut out: Vec<Action> = self
            .behavior
            .input_alphabet()
            .into_iter()
            .filter(|a| self.kind(&a.name) == Some(ActionKind::Input))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Every transition out of `state`: enabled locally-controlled actions
    /// followed by the input alphabet.
    pub fn successors(&self, state: &Value) -> Vec<(Action, Value)> {
        let mut out = self.enabled(state);
        for input in self.input_alphabet() {
            if let Some(next) = self.behavior.on_input(state, &input) {
                out.push((input, next));
            }
        }
        out
    }

    /// The unique next state for `(state, action)`.
    pub fn step(&self, state: &Value, action: &Action) -> Result<Value, StepError> {
        let not_enabled = || StepError::ActionNotEnabled {
            action: action.to_string(),
            state: state.canonical(),
        };
        match self.kind(&action.name) {
            None => Err(StepError::UnknownAction(action.name.clone())),
            Some(ActionKind::Input) => self.behavior.on_input(state, action).ok_or_else(not_enabled),
            Some(_) => self
                .behavior
                .enabled(state)
                .into_iter()
                .find(|(a, _)| a == action)
                .map(|(_, next)| next)
                .ok_or_else(not_enabled),
        }
    }

    /// Tasks with at least one enabled action at `state`.
    pub fn enabled_tasks(&self, state: &Value) -> BTreeSet<String> {
        self.behavior
            .enabled(state)
            .iter()
            .filter_map(|(a, _)| self.task_of(&a.name).map(str::to_string))
            .collect()
    }

    /// Checks input-enabling by enumeration: every input in the alphabet must
    /// be applicable at every reachable state (up to `state_cap` states).
    /// Returns the number of states checked.
    pub fn check_input_enabled(&self, state_cap: usize) -> Result<usize, (Value, Action)> {
        let alphabet = self.input_alphabet();
        let mut seen: HashSet<Value> = HashSet::new();
        let mut queue: VecDeque<Value> = self.start_states.iter().cloned().collect();
        seen.extend(self.start_states.iter().cloned());
        while let Some(state) = queue.pop_front() {
            for input in &alphabet {
                if self.behavior.on_input(&state, input).is_none() {
                    return Err((state, input.clone()));
                }
            }
            if seen.len() >= state_cap {
                continue;
            }
            for (_, next) in self.successors(&state) {
                if seen.len() < state_cap && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        Ok(seen.len())
    }
}

/// Parallel composition.
///
/// Components must be pairwise compatible: no shared output names, and no
/// internal name of one component appearing in another's signature. The
/// composed state is the list of component states; an action is performed
/// simultaneously by every component that has it in its signature. Task
/// names are qualified as `component.task`.
pub fn compose(components: &[Automaton]) -> Result<Automaton, AutomatonError> {
    if components.is_empty() {
        return Err(AutomatonError::EmptyComposition);
    }
    for (i, a) in components.iter().enumerate() {
        for b in &components[i + 1..] {
            for (name, ka) in a.signature.iter() {
                let Some(kb) = b.signature.kind(name) else {
                    continue;
                };
                let reason = match (ka, kb) {
                    (ActionKind::Output, ActionKind::Output) => "output of both",
                    (ActionKind::Internal, _) | (_, ActionKind::Internal) => "internal action shared",
                    _ => continue,
                };
                return Err(AutomatonError::IncompatibleSignatures {
                    action: name.to_string(),
                    left: a.id.clone(),
                    right: b.id.clone(),
                    reason,
                });
            }
        }
    }

    let mut signature = Signature::new();
    for comp in components {
        for (name, kind) in comp.signature.iter() {
            match (signature.kind(name), kind) {
                (Some(ActionKind::Output), _) => {}
                (_, k) => signature.insert(name.to_string(), k),
            }
        }
    }

    let mut tasks = BTreeMap::new();
    for comp in components {
        for (task, actions) in &comp.tasks {
            tasks.insert(format!("{}.{}", comp.id, task), actions.clone());
        }
    }

    let mut start_states = vec![Vec::new()];
    for comp in components {
        start_states = start_states
            .into_iter()
            .flat_map(|prefix| {
                comp.start_states.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s.clone());
                    next
                })
            })
            .collect();
    }

    let id = components
        .iter()
        .map(|c| c.id.as_str())
        .collect::<Vec<_>>()
        .join("||");
    let behavior = Composed {
        components: components.to_vec(),
        inputs: signature.names_of(ActionKind::Input).map(str::to_string).collect(),
    };
    Automaton::from_parts(
        id,
        signature,
        start_states.into_iter().map(Value::List).collect(),
        tasks,
        Arc::new(behavior),
        components.to_vec(),
    )
}

struct Composed {
    components: Vec<Automaton>,
    inputs: BTreeSet<String>,
}

impl Composed {
    /// Applies `action` as an input to every component except `owner`.
    fn propagate(&self, states: &mut [Value], action: &Action, owner: Option<usize>) -> Option<()> {
        for (j, comp) in self.components.iter().enumerate() {
            if Some(j) == owner || !comp.signature.contains(&action.name) {
                continue;
            }
            states[j] = comp.behavior.on_input(&states[j], action)?;
        }
        Some(())
    }
}

impl Behavior for Composed {
    fn enabled(&self, state: &Value) -> Vec<(Action, Value)> {
        let states = state.as_list().expect("composed state is a list");
        let mut out = Vec::new();
        for (i, comp) in self.components.iter().enumerate() {
            for (action, local_next) in comp.behavior.enabled(&states[i]) {
                let mut next = states.to_vec();
                next[i] = local_next;
                if self.propagate(&mut next, &action, Some(i)).is_some() {
                    out.push((action, Value::List(next)));
                }
            }
        }
        out
    }

    fn on_input(&self, state: &Value, action: &Action) -> Option<Value> {
        let mut next = state.as_list()?.to_vec();
        self.propagate(&mut next, action, None)?;
        Some(Value::List(next))
    }

    fn input_alphabet(&self) -> Vec<Action> {
        self.components
            .iter()
            .flat_map(|c| c.behavior.input_alphabet())
            .filter(|a| self.inputs.contains(&a.name))
            .collect()
    }
}
