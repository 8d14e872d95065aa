//! Observables, outcome assignments and the exclusivity relation between events.
//!
//! An [`Event`] is a partial assignment of `±1` outcomes to the observables of a
//! [`Registry`]. Registries may declare parity observables, whose outcome is the
//! product of the outcomes of two base observables. Events are closed under these
//! parity definitions when they are constructed, so every `Event` value is closed
//! and comparisons are plain comparisons of assignments.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Result of a two-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    /// Product of two outcomes. Also serves as the quotient, since every outcome
    /// is its own inverse.
    pub fn times(self, other: Outcome) -> Outcome {
        if self == other {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }

    /// Accepts `+`, `-` and the unicode minus sign.
    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Outcome::Plus),
            '-' | '\u{2212}' => Some(Outcome::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Index of an observable inside its [`Registry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObservableId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    Base,
    /// Outcome is the product of the two operand outcomes.
    Parity(ObservableId, ObservableId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observable {
    pub label: String,
    pub kind: ObservableKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventError {
    #[error("observable `{0}` is already registered")]
    DuplicateObservable(String),
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("parity observable needs two distinct base operands, got `{0}` and `{1}`")]
    InvalidParity(String, String),
    #[error("contradictory outcomes forced on `{observable}`")]
    Contradiction { observable: String },
    #[error("malformed event token `{0}`; expected <observable><sign>")]
    MalformedToken(String),
}

/// The universe of observables that events are defined over.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    observables: Vec<Observable>,
    by_label: HashMap<String, ObservableId>,
}

impl PartialEq for Registry {
    fn eq(&self, other: &Self) -> bool {
        self.observables == other.observables
    }
}

impl Eq for Registry {}

impl Hash for Registry {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.observables.hash(state);
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_base(&mut self, label: &str) -> Result<ObservableId, EventError> {
        self.insert(label.to_string(), ObservableKind::Base)
    }

    /// Registers the parity of two base observables. Its label is the
    /// concatenation of the operand labels.
    pub fn add_parity(
        &mut self,
        first: ObservableId,
        second: ObservableId,
    ) -> Result<ObservableId, EventError> {
        let (a, b) = match (
            self.observables.get(first.0),
            self.observables.get(second.0),
        ) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let name = |o: Option<&Observable>, id: ObservableId| {
                    o.map_or_else(|| format!("#{}", id.0), |o| o.label.clone())
                };
                return Err(EventError::InvalidParity(name(a, first), name(b, second)));
            }
        };
        if first == second || a.kind != ObservableKind::Base || b.kind != ObservableKind::Base {
            return Err(EventError::InvalidParity(a.label.clone(), b.label.clone()));
        }
        let label = format!("{}{}", a.label, b.label);
        self.insert(label, ObservableKind::Parity(first, second))
    }

    fn insert(&mut self, label: String, kind: ObservableKind) -> Result<ObservableId, EventError> {
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(EventError::MalformedToken(label));
        }
        if self.by_label.contains_key(&label) {
            return Err(EventError::DuplicateObservable(label));
        }
        let id = ObservableId(self.observables.len());
        self.by_label.insert(label.clone(), id);
        self.observables.push(Observable { label, kind });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn lookup(&self, label: &str) -> Option<ObservableId> {
        self.by_label.get(label).copied()
    }

    /// Panics if `id` does not belong to this registry.
    pub fn observable(&self, id: ObservableId) -> &Observable {
        &self.observables[id.0]
    }

    pub fn label(&self, id: ObservableId) -> &str {
        &self.observables[id.0].label
    }

    pub fn ids(&self) -> impl Iterator<Item = ObservableId> + '_ {
        (0..self.observables.len()).map(ObservableId)
    }

    pub fn parities(
        &self,
    ) -> impl Iterator<Item = (ObservableId, ObservableId, ObservableId)> + '_ {
        self.observables
            .iter()
            .enumerate()
            .filter_map(|(i, o)| match o.kind {
                ObservableKind::Parity(a, b) => Some((ObservableId(i), a, b)),
                ObservableKind::Base => None,
            })
    }

    /// Observables of two copies of the CHSH scenario (`A0 A1 B0 B1` and the
    /// primed `A'0 A'1 B'0 B'1`) plus the four cross-copy parities
    /// `A0A'0 A1A'1 A0A'1 A1A'0`.
    pub fn two_copy_chsh() -> Arc<Registry> {
        static REGISTRY: OnceLock<Arc<Registry>> = OnceLock::new();
        REGISTRY
            .get_or_init(|| {
                let mut r = Registry::new();
                for label in ["A0", "A1", "B0", "B1", "A'0", "A'1", "B'0", "B'1"] {
                    r.add_base(label).expect("fresh label");
                }
                let id = |r: &Registry, l: &str| r.lookup(l).expect("registered above");
                for (x, y) in [("A0", "A'0"), ("A1", "A'1"), ("A0", "A'1"), ("A1", "A'0")] {
                    let (a, b) = (id(&r, x), id(&r, y));
                    r.add_parity(a, b).expect("valid parity");
                }
                Arc::new(r)
            })
            .clone()
    }
}

/// A closed partial assignment of outcomes to observables.
#[derive(Clone)]
pub struct Event {
    registry: Arc<Registry>,
    values: Vec<Option<Outcome>>,
}

/// Closes a raw assignment under the registry's parity definitions.
///
/// The result is the least assignment that contains `assignment` and satisfies
/// every parity relation it touches.
pub fn close_event(
    registry: &Arc<Registry>,
    assignment: &[(ObservableId, Outcome)],
) -> Result<Event, EventError> {
    let mut values = vec![None; registry.len()];
    for &(id, outcome) in assignment {
        if id.0 >= registry.len() {
            return Err(EventError::UnknownObservable(format!("#{}", id.0)));
        }
        assign(registry, &mut values, id, outcome)?;
    }
    let parities: Vec<_> = registry.parities().collect();
    loop {
        let mut changed = false;
        for &(parity, a, b) in &parities {
            let (vp, va, vb) = (values[parity.0], values[a.0], values[b.0]);
            let forced = match (vp, va, vb) {
                (None, Some(x), Some(y)) => Some((parity, x.times(y))),
                (Some(p), Some(x), None) => Some((b, p.times(x))),
                (Some(p), None, Some(y)) => Some((a, p.times(y))),
                (Some(p), Some(x), Some(y)) if p != x.times(y) => {
                    return Err(EventError::Contradiction {
                        observable: registry.label(parity).to_string(),
                    })
                }
                _ => None,
            };
            if let Some((id, outcome)) = forced {
                assign(registry, &mut values, id, outcome)?;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Event {
        registry: Arc::clone(registry),
        values,
    })
}

fn assign(
    registry: &Registry,
    values: &mut [Option<Outcome>],
    id: ObservableId,
    outcome: Outcome,
) -> Result<(), EventError> {
    match values[id.0] {
        Some(existing) if existing != outcome => Err(EventError::Contradiction {
            observable: registry.label(id).to_string(),
        }),
        _ => {
            values[id.0] = Some(outcome);
            Ok(())
        }
    }
}

impl Event {
    pub fn new(
        registry: &Arc<Registry>,
        assignment: &[(ObservableId, Outcome)],
    ) -> Result<Self, EventError> {
        close_event(registry, assignment)
    }

    /// Builds an event from `(label, outcome)` pairs.
    pub fn from_labels(
        registry: &Arc<Registry>,
        assignment: &[(&str, Outcome)],
    ) -> Result<Self, EventError> {
        let ids = assignment
            .iter()
            .map(|&(label, o)| {
                registry
                    .lookup(label)
                    .map(|id| (id, o))
                    .ok_or_else(|| EventError::UnknownObservable(label.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        close_event(registry, &ids)
    }

    /// Parses whitespace separated `<observable><sign>` tokens, e.g.
    /// `A0+ B0+ A'0+ B'1+ A0A'0+`.
    pub fn parse(registry: &Arc<Registry>, text: &str) -> Result<Self, EventError> {
        let tokens = parse_tokens(text)?;
        let ids = tokens
            .into_iter()
            .map(|(label, o)| {
                registry
                    .lookup(&label)
                    .map(|id| (id, o))
                    .ok_or(EventError::UnknownObservable(label))
            })
            .collect::<Result<Vec<_>, _>>()?;
        close_event(registry, &ids)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// Closing a closed event returns an identical event.
    pub fn close(&self) -> Result<Event, EventError> {
        close_event(&self.registry, &self.assignment())
    }

    pub fn get(&self, id: ObservableId) -> Option<Outcome> {
        self.values.get(id.0).copied().flatten()
    }

    pub fn get_label(&self, label: &str) -> Option<Outcome> {
        self.registry.lookup(label).and_then(|id| self.get(id))
    }

    /// Assigned observables in registry order.
    pub fn assignment(&self) -> Vec<(ObservableId, Outcome)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|o| (ObservableId(i), o)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    /// Returns a new event with `id` set to `outcome`, re-closed.
    pub fn with(&self, id: ObservableId, outcome: Outcome) -> Result<Event, EventError> {
        let mut assignment = self.assignment();
        assignment.push((id, outcome));
        close_event(&self.registry, &assignment)
    }

    fn same_universe(&self, other: &Event) -> bool {
        Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry
    }
}

pub(crate) fn parse_tokens(text: &str) -> Result<Vec<(String, Outcome)>, EventError> {
    text.split_whitespace()
        .map(|token| {
            let mut chars = token.chars();
            let sign = chars.next_back().and_then(Outcome::from_symbol);
            match sign {
                Some(o) if !chars.as_str().is_empty() => Ok((chars.as_str().to_string(), o)),
                _ => Err(EventError::MalformedToken(token.to_string())),
            }
        })
        .collect()
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.same_universe(other) && self.values == other.values
    }
}

impl Eq for Event {}

impl Hash for Event {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.values.hash(state);
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (id, o) in self.assignment() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}{}", self.registry.label(id), o)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event({self})")
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Two events are equivalent when their closures coincide.
pub fn are_equivalent(e1: &Event, e2: &Event) -> bool {
    e1 == e2
}

/// Returns an observable assigned different outcomes by the two events, if any.
///
/// The witness is the first such observable in `e1`'s registry order. Events
/// over different registries are matched by observable label.
pub fn exclusivity_witness(e1: &Event, e2: &Event) -> Option<ObservableId> {
    if e1.same_universe(e2) {
        e1.values
            .iter()
            .zip(&e2.values)
            .position(|(a, b)| matches!((a, b), (Some(x), Some(y)) if x != y))
            .map(ObservableId)
    } else {
        e1.assignment().into_iter().find_map(|(id, o)| {
            let other = e2.get_label(e1.registry.label(id))?;
            (other != o).then_some(id)
        })
    }
}

pub fn are_exclusive(e1: &Event, e2: &Event) -> bool {
    exclusivity_witness(e1, e2).is_some()
}
