use std::collections::BTreeMap;
use std::fmt;

use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Input,
    Output,
    Internal,
}

impl ActionKind {
    pub fn is_external(self) -> bool {
        !matches!(self, ActionKind::Internal)
    }

    pub fn is_locally_controlled(self) -> bool {
        !matches!(self, ActionKind::Input)
    }
}

/// An action occurrence: a signature name plus an opaque payload.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub name: String,
    pub payload: Value,
}

impl Action {
    pub fn new(name: impl Into<String>, payload: Value) -> Self {
        Action {
            name: name.into(),
            payload,
        }
    }

    pub fn bare(name: impl Into<String>) -> Self {
        Action::new(name, Value::Unit)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payload {
            Value::Unit => write!(f, "{}", self.name),
            ref p => write!(f, "{}({})", self.name, p),
        }
    }
}

/// Action names partitioned by kind. A name has exactly one kind, so no name
/// can be both an input and an output of the same automaton.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    kinds: BTreeMap<String, ActionKind>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(mut self, name: impl Into<String>) -> Self {
        self.kinds.insert(name.into(), ActionKind::Input);
        self
    }

    pub fn output(mut self, name: impl Into<String>) -> Self {
        self.kinds.insert(name.into(), ActionKind::Output);
        self
    }

    pub fn internal(mut self, name: impl Into<String>) -> Self {
        self.kinds.insert(name.into(), ActionKind::Internal);
        self
    }

    pub(crate) fn insert(&mut self, name: String, kind: ActionKind) {
        self.kinds.insert(name, kind);
    }

    pub fn kind(&self, name: &str) -> Option<ActionKind> {
        self.kinds.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.kinds.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ActionKind)> {
        self.kinds.iter().map(|(n, k)| (n.as_str(), *k))
    }

    pub fn names_of(&self, kind: ActionKind) -> impl Iterator<Item = &str> {
        self.kinds
            .iter()
            .filter(move |(_, k)| **k == kind)
            .map(|(n, _)| n.as_str())
    }

    pub fn locally_controlled(&self) -> impl Iterator<Item = &str> {
        self.kinds
            .iter()
            .filter(|(_, k)| k.is_locally_controlled())
            .map(|(n, _)| n.as_str())
    }
}
