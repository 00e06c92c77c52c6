//! Shared knowledge of the converter: both models, their current states,
//! the transition-action table and the registry of new-function handlers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::evolution::ValidatedPair;
use crate::statechart::{EventName, StateMachine, StateName};

/// Where an incoming event came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventSource {
    Controller,
    Device,
    Internal,
}

impl EventSource {
    pub fn as_str(self) -> &'static str {
        match self {
            EventSource::Controller => "controller",
            EventSource::Device => "device",
            EventSource::Internal => "internal",
        }
    }
}

impl fmt::Display for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EventSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "controller" => Ok(EventSource::Controller),
            "device" => Ok(EventSource::Device),
            "internal" => Ok(EventSource::Internal),
            other => Err(format!("unknown event source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncomingEvent {
    pub name: EventName,
    pub source: EventSource,
    pub seq: u64,
    /// Set on events produced by a state timer; stale generations are dropped.
    pub timer_generation: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSpec {
    /// Deliver these original-model events to the device, in order.
    Forward(Vec<EventName>),
    /// Run the new function registered for this state.
    Invoke(StateName),
    None,
}

impl ActionSpec {
    pub fn sent(&self) -> &[EventName] {
        match self {
            ActionSpec::Forward(events) => events,
            _ => &[],
        }
    }

    pub fn handler(&self) -> Option<&StateName> {
        match self {
            ActionSpec::Invoke(h) => Some(h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Existing,
    New,
    Rejected,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Existing => "existing",
            Mode::New => "new",
            Mode::Rejected => "rejected",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "existing" => Ok(Mode::Existing),
            "new" => Ok(Mode::New),
            "rejected" => Ok(Mode::Rejected),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// The converter's decision for one incoming event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub event: IncomingEvent,
    pub mode: Mode,
    pub action: ActionSpec,
    pub o_before: StateName,
    pub o_after: StateName,
    pub n_before: StateName,
    pub n_after: StateName,
    /// Plan failures and sink failures observed while handling the event.
    pub errors: Vec<String>,
}

/// Handle given to a handler for feeding events back into the converter.
pub trait InternalEvents {
    /// Enqueue `event` as soon as possible.
    fn emit(&self, event: EventName);
    /// Enqueue `event` after `delay_ms` milliseconds of (virtual or wall) time.
    fn emit_after(&self, delay_ms: u64, event: EventName);
}

/// Context handed to a handler when its state is entered.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub state: StateName,
    pub record: StepRecord,
    pub now_ms: u64,
}

pub type Handler = Arc<dyn Fn(&Invocation, &dyn InternalEvents) + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("a handler is already registered for state {0}")]
    DuplicateHandler(StateName),
}

/// New functions, keyed by the new state they implement.
#[derive(Clone, Default)]
pub struct HandlerRegistry {
    handlers: BTreeMap<StateName, Handler>,
}

impl fmt::Debug for HandlerRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.handlers.keys()).finish()
    }
}

impl HandlerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, state: StateName, entry: F) -> Result<(), RegistryError>
    where
        F: Fn(&Invocation, &dyn InternalEvents) + Send + Sync + 'static,
    {
        self.register_arc(state, Arc::new(entry))
    }

    pub fn register_arc(&mut self, state: StateName, entry: Handler) -> Result<(), RegistryError> {
        if self.handlers.contains_key(&state) {
            return Err(RegistryError::DuplicateHandler(state));
        }
        self.handlers.insert(state, entry);
        Ok(())
    }

    /// A handler that does nothing; the state's behavior lives in its timer or transitions.
    pub fn register_passive(&mut self, state: StateName) -> Result<(), RegistryError> {
        self.register(state, |_, _| {})
    }

    pub fn get(&self, state: &str) -> Option<&Handler> {
        self.handlers.get(state)
    }

    pub fn contains(&self, state: &str) -> bool {
        self.handlers.contains_key(state)
    }

    pub fn states(&self) -> impl Iterator<Item = &StateName> {
        self.handlers.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("no handler registered for new state {0}")]
    MissingHandler(StateName),
}

/// Table entry for one evolved-model transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableAction {
    /// Target exists in the original model; the event plan is computed when the step runs.
    Forward,
    Invoke(StateName),
}

#[derive(Debug, Clone)]
pub struct Knowledge {
    original: StateMachine,
    evolved: StateMachine,
    o_state: StateName,
    n_state: StateName,
    table: HashMap<(StateName, EventName), (StateName, TableAction)>,
    handlers: HandlerRegistry,
}

impl Knowledge {
    /// Materializes the transition table; every new state needs a handler.
    pub fn build(pair: &ValidatedPair, handlers: HandlerRegistry) -> Result<Self, BuildError> {
        let original = pair.original().clone();
        let evolved = pair.evolved().clone();
        for s in &pair.diff().new_states {
            if !handlers.contains(s.as_str()) {
                return Err(BuildError::MissingHandler(s.clone()));
            }
        }
        let table = evolved
            .transitions()
            .map(|t| {
                let action = if original.exists_state(t.to.as_str()) {
                    TableAction::Forward
                } else {
                    TableAction::Invoke(t.to.clone())
                };
                ((t.from, t.event), (t.to, action))
            })
            .collect();
        Ok(Self {
            o_state: original.initial().clone(),
            n_state: evolved.initial().clone(),
            original,
            evolved,
            table,
            handlers,
        })
    }

    pub fn original(&self) -> &StateMachine {
        &self.original
    }

    pub fn evolved(&self) -> &StateMachine {
        &self.evolved
    }

    pub fn o_state(&self) -> &StateName {
        &self.o_state
    }

    pub fn n_state(&self) -> &StateName {
        &self.n_state
    }

    pub fn handlers(&self) -> &HandlerRegistry {
        &self.handlers
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    /// Looks up the table entry for `(state, event)`.
    pub fn lookup(&self, state: &StateName, event: &EventName) -> Option<&(StateName, TableAction)> {
        self.table.get(&(state.clone(), event.clone()))
    }

    /// Counts of `(forward, invoke)` entries.
    pub fn table_summary(&self) -> (usize, usize) {
        self.table.values().fold((0, 0), |(f, i), (_, a)| match a {
            TableAction::Forward => (f + 1, i),
            TableAction::Invoke(_) => (f, i + 1),
        })
    }

    /// Decides what to do with `e` without changing any state.
    pub fn step(&self, e: &IncomingEvent) -> StepRecord {
        let mut record = StepRecord {
            event: e.clone(),
            mode: Mode::Rejected,
            action: ActionSpec::None,
            o_before: self.o_state.clone(),
            o_after: self.o_state.clone(),
            n_before: self.n_state.clone(),
            n_after: self.n_state.clone(),
            errors: Vec::new(),
        };
        let Some((target, action)) = self.lookup(&self.n_state, &e.name) else {
            return record;
        };
        match action {
            TableAction::Forward => match self.plan_forward(&e.name, target) {
                Ok(events) => {
                    record.mode = Mode::Existing;
                    record.action = if events.is_empty() {
                        ActionSpec::None
                    } else {
                        ActionSpec::Forward(events)
                    };
                    record.o_after = target.clone();
                    record.n_after = target.clone();
                }
                Err(err) => record.errors.push(format!("plan failure: {err}")),
            },
            TableAction::Invoke(handler) => {
                record.mode = Mode::New;
                record.action = ActionSpec::Invoke(handler.clone());
                record.n_after = target.clone();
            }
        }
        record
    }

    /// Events that move the device from its current state to `target`.
    ///
    /// When the received event itself takes the original model there, it is
    /// passed through unchanged; otherwise the shortest original-model path is used.
    fn plan_forward(
        &self,
        received: &EventName,
        target: &StateName,
    ) -> Result<Vec<EventName>, crate::statechart::PathError> {
        if self.original.next_state(self.o_state.as_str(), received.as_str()) == Some(target) {
            return Ok(vec![received.clone()]);
        }
        self.original.event_path(self.o_state.as_str(), target.as_str())
    }

    /// Commits the state changes described by `record`.
    pub fn apply(&mut self, record: &StepRecord) {
        debug_assert_eq!(record.o_before, self.o_state);
        debug_assert_eq!(record.n_before, self.n_state);
        self.o_state = record.o_after.clone();
        self.n_state = record.n_after.clone();
    }
}
