//! Flat, deterministic, event-driven state machine models.
//!
//! A [`StateMachine`] is the triple of events, states and a partial
//! transition function, plus an initial state and optional per-state
//! timers. Machines are immutable once built; every constructor checks the
//! structural invariants so the rest of the crate can rely on them.
//!
//! Models are exchanged as JSON documents:
//!
//! ```json
//! {"name": "bulb", "initial": "off", "events": ["switch"],
//!  "states": [{"name": "off"}, {"name": "on"}],
//!  "transitions": [{"from": "off", "event": "switch", "to": "on"},
//!                  {"from": "on", "event": "switch", "to": "off"}]}
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! name_type {
    ($(#[$meta:meta])* $ty:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $ty(String);

        impl $ty {
            /// Validates `s` against `[A-Za-z][A-Za-z0-9_]*`.
            pub fn new(s: impl Into<String>) -> Result<Self, InvariantViolation> {
                let s = s.into();
                if is_valid_token(&s) {
                    Ok(Self(s))
                } else {
                    Err(InvariantViolation::InvalidName { kind: $what, name: s })
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::borrow::Borrow<str> for $ty {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl PartialEq<str> for $ty {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $ty {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }

        impl TryFrom<String> for $ty {
            type Error = InvariantViolation;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                Self::new(s)
            }
        }

        impl From<$ty> for String {
            fn from(n: $ty) -> String {
                n.0
            }
        }

        impl TryFrom<&str> for $ty {
            type Error = InvariantViolation;
            fn try_from(s: &str) -> Result<Self, Self::Error> {
                Self::new(s)
            }
        }

        impl std::str::FromStr for $ty {
            type Err = InvariantViolation;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }
    };
}

name_type!(
    /// Name of a state. Case-sensitive.
    StateName,
    "state"
);
name_type!(
    /// Name of an event. Case-sensitive.
    EventName,
    "event"
);

fn is_valid_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Shorthand for building a [`StateName`] from a literal known to be valid.
///
/// Panics on an invalid token; intended for fixtures and tests.
pub fn state(s: &str) -> StateName {
    StateName::new(s).expect("invalid state name")
}

/// Shorthand for building an [`EventName`] from a literal known to be valid.
///
/// Panics on an invalid token; intended for fixtures and tests.
pub fn event(s: &str) -> EventName {
    EventName::new(s).expect("invalid event name")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: StateName,
    pub event: EventName,
    pub to: StateName,
}

impl Transition {
    pub fn new(from: StateName, event: EventName, to: StateName) -> Self {
        Self { from, event, to }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) -> {}", self.from, self.event, self.to)
    }
}

/// One-shot timer armed whenever `state` is entered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeoutSpec {
    pub state: StateName,
    pub delay_ms: u64,
    pub emits: EventName,
}

/// A violated structural rule of a machine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("invalid {kind} name {name:?}: expected [A-Za-z][A-Za-z0-9_]*")]
    InvalidName { kind: &'static str, name: String },
    #[error("duplicate state {0}")]
    DuplicateState(StateName),
    #[error("duplicate event {0}")]
    DuplicateEvent(EventName),
    #[error("initial state {0} is not a declared state")]
    UnknownInitial(StateName),
    #[error("transition {0} refers to undeclared state {1}")]
    UnknownState(Transition, StateName),
    #[error("transition {0} refers to undeclared event {1}")]
    UnknownEvent(Transition, EventName),
    #[error("nondeterministic: more than one transition from ({from}, {event})")]
    Nondeterministic { from: StateName, event: EventName },
    #[error("timeout on state {0} must have timeout_ms > 0")]
    ZeroDelay(StateName),
    #[error("timeout on state {0} needs both timeout_ms and timeout_event")]
    IncompleteTimeout(StateName),
    #[error("timeout on state {state} emits undeclared event {event}")]
    TimeoutUnknownEvent { state: StateName, event: EventName },
    #[error("timeout on state {state} emits {event}, which has no transition out of {state}")]
    DeadTimer { state: StateName, event: EventName },
    #[error("timeout declared for undeclared state {0}")]
    TimeoutUnknownState(StateName),
    #[error("more than one timeout declared for state {0}")]
    DuplicateTimeout(StateName),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: {0}")]
    Invariant(#[from] InvariantViolation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("no event path from {from} to {to}")]
    Unreachable { from: StateName, to: StateName },
    #[error("state {0} is not part of the machine")]
    UnknownState(StateName),
}

/// Warning produced by [`StateMachine::validate`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Not reachable from the initial state.
    Unreachable { state: StateName },
    /// No outgoing transitions.
    Terminal { state: StateName },
    /// Timer whose event cannot fire a transition at its state.
    DeadTimer { state: StateName, event: EventName },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Unreachable { state } => write!(f, "state {state} is unreachable"),
            Diagnostic::Terminal { state } => write!(f, "state {state} has no outgoing transitions"),
            Diagnostic::DeadTimer { state, event } => {
                write!(f, "timer event {event} is dead at state {state}")
            }
        }
    }
}

/// A flat deterministic state machine `(E, S, T)` with an initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    name: String,
    initial: StateName,
    events: BTreeSet<EventName>,
    states: BTreeSet<StateName>,
    // keyed by (from, event); BTreeMap order gives lexicographic expansion in `event_path`
    table: BTreeMap<(StateName, EventName), StateName>,
    timeouts: BTreeMap<StateName, TimeoutSpec>,
}

impl StateMachine {
    /// Builds a machine, checking every structural invariant.
    pub fn new(
        name: impl Into<String>,
        initial: StateName,
        events: impl IntoIterator<Item = EventName>,
        states: impl IntoIterator<Item = StateName>,
        transitions: impl IntoIterator<Item = Transition>,
        timeouts: impl IntoIterator<Item = TimeoutSpec>,
    ) -> Result<Self, InvariantViolation> {
        let mut event_set = BTreeSet::new();
        for e in events {
            if !event_set.insert(e.clone()) {
                return Err(InvariantViolation::DuplicateEvent(e));
            }
        }
        let mut state_set = BTreeSet::new();
        for s in states {
            if !state_set.insert(s.clone()) {
                return Err(InvariantViolation::DuplicateState(s));
            }
        }
        if !state_set.contains(&initial) {
            return Err(InvariantViolation::UnknownInitial(initial));
        }
        let mut table = BTreeMap::new();
        for t in transitions {
            for endpoint in [&t.from, &t.to] {
                if !state_set.contains(endpoint) {
                    return Err(InvariantViolation::UnknownState(t.clone(), endpoint.clone()));
                }
            }
            if !event_set.contains(&t.event) {
                return Err(InvariantViolation::UnknownEvent(t.clone(), t.event.clone()));
            }
            let key = (t.from.clone(), t.event.clone());
            if table.insert(key, t.to).is_some() {
                return Err(InvariantViolation::Nondeterministic {
                    from: t.from,
                    event: t.event,
                });
            }
        }
        let mut timeout_map = BTreeMap::new();
        for spec in timeouts {
            if !state_set.contains(&spec.state) {
                return Err(InvariantViolation::TimeoutUnknownState(spec.state));
            }
            if spec.delay_ms == 0 {
                return Err(InvariantViolation::ZeroDelay(spec.state));
            }
            if !event_set.contains(&spec.emits) {
                return Err(InvariantViolation::TimeoutUnknownEvent {
                    state: spec.state,
                    event: spec.emits,
                });
            }
            if !table.contains_key(&(spec.state.clone(), spec.emits.clone())) {
                return Err(InvariantViolation::DeadTimer {
                    state: spec.state,
                    event: spec.emits,
                });
            }
            if timeout_map.contains_key(&spec.state) {
                return Err(InvariantViolation::DuplicateTimeout(spec.state));
            }
            timeout_map.insert(spec.state.clone(), spec);
        }
        Ok(Self {
            name: name.into(),
            initial,
            events: event_set,
            states: state_set,
            table,
            timeouts: timeout_map,
        })
    }

    /// Parses a machine document. See the module docs for the format.
    pub fn parse(doc: &str) -> Result<Self, ModelError> {
        let raw: MachineDoc = serde_json::from_str(doc).map_err(|e| ModelError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        raw.into_machine().map_err(ModelError::from)
    }

    /// Canonical JSON rendering: every list sorted lexicographically.
    pub fn to_json(&self) -> String {
        let doc = MachineDoc {
            name: self.name.clone(),
            initial: self.initial.to_string(),
            events: self.events.iter().map(|e| e.to_string()).collect(),
            states: self
                .states
                .iter()
                .map(|s| {
                    let timeout = self.timeouts.get(s);
                    StateDoc {
                        name: s.to_string(),
                        timeout_ms: timeout.map(|t| t.delay_ms),
                        timeout_event: timeout.map(|t| t.emits.to_string()),
                    }
                })
                .collect(),
            transitions: self
                .transitions()
                .map(|t| TransitionDoc {
                    from: t.from.to_string(),
                    event: t.event.to_string(),
                    to: t.to.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("machine documents always serialize")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> &StateName {
        &self.initial
    }

    pub fn events(&self) -> &BTreeSet<EventName> {
        &self.events
    }

    pub fn states(&self) -> &BTreeSet<StateName> {
        &self.states
    }

    /// Transitions in `(from, event)` order.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.table
            .iter()
            .map(|((from, event), to)| Transition::new(from.clone(), event.clone(), to.clone()))
    }

    pub fn transition_count(&self) -> usize {
        self.table.len()
    }

    pub fn timeouts(&self) -> impl Iterator<Item = &TimeoutSpec> {
        self.timeouts.values()
    }

    pub fn timeout_for(&self, s: &str) -> Option<&TimeoutSpec> {
        self.timeouts.get(s)
    }

    /// Copy of this machine with the timer of `state` set to `delay_ms`.
    ///
    /// `None` if `state` has no timer or `delay_ms` is zero.
    pub fn with_timeout_delay(&self, state: &str, delay_ms: u64) -> Option<Self> {
        if delay_ms == 0 {
            return None;
        }
        let mut m = self.clone();
        m.timeouts.get_mut(state)?.delay_ms = delay_ms;
        Some(m)
    }

    pub fn exists_state(&self, s: &str) -> bool {
        self.states.contains(s)
    }

    pub fn exists_event(&self, e: &str) -> bool {
        self.events.contains(e)
    }

    pub fn exists_transition(&self, s: &str, e: &str) -> bool {
        self.next_state(s, e).is_some()
    }

    pub fn next_state(&self, s: &str, e: &str) -> Option<&StateName> {
        // BTreeMap<(A, B), _> cannot be probed with (&str, &str) directly.
        let from = self.states.get(s)?;
        let ev = self.events.get(e)?;
        self.table.get(&(from.clone(), ev.clone()))
    }

    /// Outgoing `(event, to)` pairs of `s`, in lexicographic event order.
    pub fn outgoing<'a>(&'a self, s: &'a StateName) -> impl Iterator<Item = (&'a EventName, &'a StateName)> + 'a {
        self.table
            .range((s.clone(), min_event())..)
            .take_while(move |((from, _), _)| from == s)
            .map(|((_, e), to)| (e, to))
    }

    /// Shortest event sequence driving the machine from `from` to `to`.
    ///
    /// Breadth-first; successors are expanded in lexicographic `(event, to)`
    /// order, so among the shortest paths the lexicographically smallest
    /// event sequence is returned.
    pub fn event_path(&self, from: &str, to: &str) -> Result<Vec<EventName>, PathError> {
        let start = self
            .states
            .get(from)
            .ok_or_else(|| PathError::UnknownState(StateName(from.to_string())))?;
        let goal = self
            .states
            .get(to)
            .ok_or_else(|| PathError::UnknownState(StateName(to.to_string())))?;
        if start == goal {
            return Ok(Vec::new());
        }
        let mut parent: BTreeMap<&StateName, (&StateName, &EventName)> = BTreeMap::new();
        let mut seen: HashSet<&StateName> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for (e, t) in self.outgoing(s) {
                if !seen.insert(t) {
                    continue;
                }
                parent.insert(t, (s, e));
                if t == goal {
                    let mut path = Vec::new();
                    let mut cur = t;
                    while let Some(&(prev, ev)) = parent.get(cur) {
                        path.push(ev.clone());
                        cur = prev;
                    }
                    path.reverse();
                    return Ok(path);
                }
                queue.push_back(t);
            }
        }
        Err(PathError::Unreachable {
            from: start.clone(),
            to: goal.clone(),
        })
    }

    /// States reachable from the initial state, initial included.
    pub fn reachable_states(&self) -> BTreeSet<StateName> {
        let mut seen = BTreeSet::from([self.initial.clone()]);
        let mut queue = VecDeque::from([self.initial.clone()]);
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.outgoing(&s) {
                if seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                }
            }
        }
        seen
    }

    /// Structural warnings: unreachable states, terminal states and dead timers.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let reachable = self.reachable_states();
        let mut out = Vec::new();
        for s in &self.states {
            if !reachable.contains(s) {
                out.push(Diagnostic::Unreachable { state: s.clone() });
            }
            if self.outgoing(s).next().is_none() {
                out.push(Diagnostic::Terminal { state: s.clone() });
            }
        }
        for spec in self.timeouts.values() {
            if !self.exists_transition(spec.state.as_str(), spec.emits.as_str()) {
                out.push(Diagnostic::DeadTimer {
                    state: spec.state.clone(),
                    event: spec.emits.clone(),
                });
            }
        }
        out.sort();
        out
    }

    /// Applies `events` in order; undefined transitions leave the state unchanged.
    pub fn fold<'a>(&self, from: &StateName, events: impl IntoIterator<Item = &'a EventName>) -> StateName {
        let mut cur = from.clone();
        for e in events {
            if let Some(next) = self.next_state(cur.as_str(), e.as_str()) {
                cur = next.clone();
            }
        }
        cur
    }
}

fn min_event() -> EventName {
    // the empty string sorts before every valid token
    EventName(String::new())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineDoc {
    name: String,
    initial: String,
    events: Vec<String>,
    states: Vec<StateDoc>,
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timeout_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timeout_event: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: String,
    event: String,
    to: String,
}

impl MachineDoc {
    fn into_machine(self) -> Result<StateMachine, InvariantViolation> {
        let events = self
            .events
            .into_iter()
            .map(EventName::new)
            .collect::<Result<Vec<_>, _>>()?;
        let mut states = Vec::with_capacity(self.states.len());
        let mut timeouts = Vec::new();
        for st in self.states {
            let name = StateName::new(st.name)?;
            match (st.timeout_ms, st.timeout_event) {
                (None, None) => {}
                (Some(delay_ms), Some(ev)) => timeouts.push(TimeoutSpec {
                    state: name.clone(),
                    delay_ms,
                    emits: EventName::new(ev)?,
                }),
                _ => return Err(InvariantViolation::IncompleteTimeout(name)),
            }
            states.push(name);
        }
        let transitions = self
            .transitions
            .into_iter()
            .map(|t| {
                Ok(Transition::new(
                    StateName::new(t.from)?,
                    EventName::new(t.event)?,
                    StateName::new(t.to)?,
                ))
            })
            .collect::<Result<Vec<_>, InvariantViolation>>()?;
        StateMachine::new(
            self.name,
            StateName::new(self.initial)?,
            events,
            states,
            transitions,
            timeouts,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn light_bulb_original_shape() {
        let m = fixtures::light_bulb_original();
        assert_eq!(m.states().len(), 2);
        assert_eq!(m.events().len(), 1);
        assert_eq!(m.transition_count(), 2);
        assert_eq!(m.initial(), "off");
    }

    #[test]
    fn light_bulb_evolved_shape() {
        let m = fixtures::light_bulb_evolved();
        assert_eq!(m.states().len(), 4);
        assert_eq!(m.events().len(), 2);
        assert_eq!(m.transition_count(), 5);
        let t = m.timeout_for("wait").unwrap();
        assert_eq!(t.delay_ms, 2000);
        assert_eq!(t.emits, "timeout");
        assert_eq!(m.next_state("wait", "timeout").unwrap(), "off");
        assert_eq!(m.next_state("wait", "switch").unwrap(), "incandescentOn");
        assert_eq!(m.next_state("incandescentOn", "switch").unwrap(), "off");
    }

    #[test]
    fn initial_must_be_declared() {
        let doc = r#"{"name":"x","initial":"z","events":[],"states":[{"name":"a"}],"transitions":[]}"#;
        assert_eq!(
            StateMachine::parse(doc),
            Err(ModelError::Invariant(InvariantViolation::UnknownInitial(state("z"))))
        );
    }

    #[test]
    fn duplicate_from_event_is_rejected() {
        let doc = r#"{"name":"x","initial":"a","events":["e"],"states":[{"name":"a"},{"name":"b"}],
            "transitions":[{"from":"a","event":"e","to":"a"},{"from":"a","event":"e","to":"b"}]}"#;
        assert!(matches!(
            StateMachine::parse(doc),
            Err(ModelError::Invariant(InvariantViolation::Nondeterministic { .. }))
        ));
    }

    #[test]
    fn dead_timer_is_rejected_at_parse() {
        let doc = r#"{"name":"x","initial":"w","events":["e"],
            "states":[{"name":"w","timeout_ms":10,"timeout_event":"e"}],"transitions":[]}"#;
        assert!(matches!(
            StateMachine::parse(doc),
            Err(ModelError::Invariant(InvariantViolation::DeadTimer { .. }))
        ));
    }

    #[test]
    fn zero_delay_and_half_timeouts_rejected() {
        let zero = r#"{"name":"x","initial":"w","events":["e"],
            "states":[{"name":"w","timeout_ms":0,"timeout_event":"e"}],
            "transitions":[{"from":"w","event":"e","to":"w"}]}"#;
        assert!(matches!(
            StateMachine::parse(zero),
            Err(ModelError::Invariant(InvariantViolation::ZeroDelay(_)))
        ));
        let half = r#"{"name":"x","initial":"w","events":["e"],
            "states":[{"name":"w","timeout_ms":5}],"transitions":[]}"#;
        assert!(matches!(
            StateMachine::parse(half),
            Err(ModelError::Invariant(InvariantViolation::IncompleteTimeout(_)))
        ));
    }

    #[test]
    fn unknown_fields_and_bad_json_are_syntax_errors() {
        let extra = r#"{"name":"x","initial":"a","events":[],"states":[{"name":"a"}],"transitions":[],"guards":[]}"#;
        assert!(matches!(StateMachine::parse(extra), Err(ModelError::Syntax { .. })));
        let broken = "{\"name\": \"x\",\n  \"initial\": }";
        match StateMachine::parse(broken) {
            Err(ModelError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn names_follow_token_pattern() {
        assert!(StateName::new("incandescentOn").is_ok());
        assert!(StateName::new("a_1").is_ok());
        assert!(StateName::new("").is_err());
        assert!(StateName::new("1a").is_err());
        assert!(EventName::new("end spot").is_err());
        let doc = r#"{"name":"x","initial":"a","events":["bad-name"],"states":[{"name":"a"}],"transitions":[]}"#;
        assert!(matches!(
            StateMachine::parse(doc),
            Err(ModelError::Invariant(InvariantViolation::InvalidName { .. }))
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let doc = r#"{"name":"x","initial":"a","events":[],"states":[{"name":"a"},{"name":"a"}],"transitions":[]}"#;
        assert!(matches!(
            StateMachine::parse(doc),
            Err(ModelError::Invariant(InvariantViolation::DuplicateState(_)))
        ));
    }

    #[test]
    fn queries_on_light_bulbs() {
        let o = fixtures::light_bulb_original();
        let n = fixtures::light_bulb_evolved();
        assert!(!o.exists_state("wait"));
        assert!(o.exists_state("on"));
        assert!(o.exists_state(o.initial().as_str()));
        assert!(n.exists_transition("wait", "switch"));
        assert!(!n.exists_transition("off", "timeout"));
        assert_eq!(n.next_state("on", "switch").unwrap(), "wait");
        assert_eq!(o.next_state("on", "switch").unwrap(), "off");
        assert_eq!(o.next_state("on", "timeout"), None);
    }

    #[test]
    fn empty_machine_has_no_transitions() {
        let m = StateMachine::new("empty", state("a"), [event("e")], [state("a")], [], []).unwrap();
        assert!(!m.exists_transition("a", "e"));
        assert_eq!(m.event_path("a", "a").unwrap(), Vec::<EventName>::new());
    }

    #[test]
    fn event_paths_from_fixtures() {
        let robot = fixtures::robot_original();
        assert_eq!(robot.event_path("clean", "spot").unwrap(), vec![event("clean"), event("spot")]);
        let bulb = fixtures::light_bulb_original();
        assert_eq!(bulb.event_path("on", "off").unwrap(), vec![event("switch")]);
        assert!(bulb.event_path("on", "on").unwrap().is_empty());
    }

    #[test]
    fn event_path_reports_unreachable_and_unknown() {
        let m = StateMachine::new(
            "m",
            state("a"),
            [event("e")],
            [state("a"), state("b")],
            [Transition::new(state("a"), event("e"), state("a"))],
            [],
        )
        .unwrap();
        assert_eq!(
            m.event_path("a", "b"),
            Err(PathError::Unreachable { from: state("a"), to: state("b") })
        );
        assert!(matches!(m.event_path("a", "zz"), Err(PathError::UnknownState(_))));
    }

    #[test]
    fn validate_reports_expected_warnings() {
        assert!(fixtures::light_bulb_evolved().validate().is_empty());
        let m = StateMachine::new(
            "m",
            state("A"),
            [event("e")],
            [state("A"), state("B")],
            [Transition::new(state("A"), event("e"), state("A"))],
            [],
        )
        .unwrap();
        assert_eq!(
            m.validate(),
            vec![
                Diagnostic::Unreachable { state: state("B") },
                Diagnostic::Terminal { state: state("B") },
            ]
        );
    }

    #[test]
    fn canonical_json_round_trips() {
        for m in [
            fixtures::light_bulb_original(),
            fixtures::light_bulb_evolved(),
            fixtures::robot_original(),
            fixtures::robot_evolved(),
        ] {
            let text = m.to_json();
            assert_eq!(StateMachine::parse(&text).unwrap(), m);
            assert_eq!(StateMachine::parse(&text).unwrap().to_json(), text);
        }
    }
}
