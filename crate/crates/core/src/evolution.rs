//! Checks that an evolved model preserves the original model's interface,
//! and classifies what changed between the two.
//!
//! The evolved model must keep every original event and every original
//! state. Transitions may be added or redirected freely; removing one is
//! reported as a warning because it silently disables original behavior.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::statechart::{Diagnostic, EventName, StateMachine, StateName, Transition};

/// An (original, evolved) model pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionPair {
    pub original: StateMachine,
    pub evolved: StateMachine,
}

impl EvolutionPair {
    pub fn new(original: StateMachine, evolved: StateMachine) -> Self {
        Self { original, evolved }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// Every original event is kept.
    pub condition1_holds: bool,
    /// Every original state is kept.
    pub condition2_holds: bool,
    pub missing_events: BTreeSet<EventName>,
    pub missing_states: BTreeSet<StateName>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.condition1_holds && self.condition2_holds
    }
}

/// A transition whose `(from, event)` exists in both models with different targets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ModifiedTransition {
    pub from: StateName,
    pub event: EventName,
    pub original_to: StateName,
    pub evolved_to: StateName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvolutionDiff {
    pub new_states: BTreeSet<StateName>,
    pub new_events: BTreeSet<EventName>,
    pub retained_transitions: BTreeSet<Transition>,
    pub added_transitions: BTreeSet<Transition>,
    pub modified_transitions: BTreeSet<ModifiedTransition>,
    pub removed_transitions: BTreeSet<Transition>,
}

impl EvolutionDiff {
    /// Removed transitions, rendered as human-readable warnings.
    pub fn warnings(&self) -> Vec<String> {
        self.removed_transitions
            .iter()
            .map(|t| format!("original transition {t} is removed in the evolved model"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("evolved model drops original events {:?} or states {:?}", .0.missing_events, .0.missing_states)]
    ConditionsViolated(ConditionReport),
    #[error("evolved model has unreachable states {0:?}")]
    UnreachableStates(Vec<StateName>),
    #[error("initial states differ: original {original}, evolved {evolved}")]
    InitialMismatch { original: StateName, evolved: StateName },
}

/// A pair that passed [`gate_for_runtime`]; the only input the converter accepts.
#[derive(Debug, Clone)]
pub struct ValidatedPair {
    pair: EvolutionPair,
    diff: EvolutionDiff,
}

impl ValidatedPair {
    pub fn original(&self) -> &StateMachine {
        &self.pair.original
    }

    pub fn evolved(&self) -> &StateMachine {
        &self.pair.evolved
    }

    pub fn pair(&self) -> &EvolutionPair {
        &self.pair
    }

    pub fn diff(&self) -> &EvolutionDiff {
        &self.diff
    }
}

pub fn check_conditions(p: &EvolutionPair) -> ConditionReport {
    let missing_events: BTreeSet<_> = p
        .original
        .events()
        .difference(p.evolved.events())
        .cloned()
        .collect();
    let missing_states: BTreeSet<_> = p
        .original
        .states()
        .difference(p.evolved.states())
        .cloned()
        .collect();
    ConditionReport {
        condition1_holds: missing_events.is_empty(),
        condition2_holds: missing_states.is_empty(),
        missing_events,
        missing_states,
    }
}

pub fn diff(p: &EvolutionPair) -> Result<EvolutionDiff, GateError> {
    let report = check_conditions(p);
    if !report.holds() {
        return Err(GateError::ConditionsViolated(report));
    }
    let (o, n) = (&p.original, &p.evolved);
    let mut d = EvolutionDiff {
        new_states: n.states().difference(o.states()).cloned().collect(),
        new_events: n.events().difference(o.events()).cloned().collect(),
        retained_transitions: BTreeSet::new(),
        added_transitions: BTreeSet::new(),
        modified_transitions: BTreeSet::new(),
        removed_transitions: BTreeSet::new(),
    };
    for t in n.transitions() {
        match o.next_state(t.from.as_str(), t.event.as_str()) {
            Some(to) if *to == t.to => {
                d.retained_transitions.insert(t);
            }
            Some(to) => {
                d.modified_transitions.insert(ModifiedTransition {
                    original_to: to.clone(),
                    from: t.from,
                    event: t.event,
                    evolved_to: t.to,
                });
            }
            None => {
                d.added_transitions.insert(t);
            }
        }
    }
    for t in o.transitions() {
        if !n.exists_transition(t.from.as_str(), t.event.as_str()) {
            d.removed_transitions.insert(t);
        }
    }
    Ok(d)
}

/// Accepts a pair for runtime use.
///
/// Besides both preservation conditions, requires equal initial states and
/// an evolved model whose every state is reachable from its initial state.
pub fn gate_for_runtime(p: &EvolutionPair) -> Result<ValidatedPair, GateError> {
    let d = diff(p)?;
    if p.original.initial() != p.evolved.initial() {
        return Err(GateError::InitialMismatch {
            original: p.original.initial().clone(),
            evolved: p.evolved.initial().clone(),
        });
    }
    let unreachable: Vec<StateName> = p
        .evolved
        .validate()
        .into_iter()
        .filter_map(|d| match d {
            Diagnostic::Unreachable { state } => Some(state),
            _ => None,
        })
        .collect();
    if !unreachable.is_empty() {
        return Err(GateError::UnreachableStates(unreachable));
    }
    Ok(ValidatedPair { pair: p.clone(), diff: d })
}

/// Everything the `validate` command prints.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub conditions: ConditionReport,
    pub diff: Option<EvolutionDiff>,
    pub original_diagnostics: Vec<Diagnostic>,
    pub evolved_diagnostics: Vec<Diagnostic>,
    pub warnings: Vec<String>,
    pub gate_passed: bool,
    pub gate_error: Option<String>,
}

impl ValidationReport {
    pub fn build(p: &EvolutionPair) -> Self {
        let conditions = check_conditions(p);
        let diff = diff(p).ok();
        let gate = gate_for_runtime(p);
        Self {
            warnings: diff.as_ref().map(EvolutionDiff::warnings).unwrap_or_default(),
            conditions,
            diff,
            original_diagnostics: p.original.validate(),
            evolved_diagnostics: p.evolved.validate(),
            gate_passed: gate.is_ok(),
            gate_error: gate.err().map(|e| e.to_string()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
