use std::fmt;

use thiserror::Error;

use crate::fixtures;
use crate::statechart::{event, state, EventName, StateMachine, StateName};

/// After dwelling `dwell_ms` in `state`, the device emits `emits` on its
/// feedback channel and applies it to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmissionRule {
    pub state: StateName,
    pub dwell_ms: u64,
    pub emits: EventName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviceLogEntry {
    Received {
        t_ms: u64,
        event: EventName,
        state_after: StateName,
        /// Not a transition of the device's machine at that state.
        ignored: bool,
    },
    Emitted {
        t_ms: u64,
        event: EventName,
    },
}

impl fmt::Display for DeviceLogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceLogEntry::Received {
                t_ms,
                event,
                state_after,
                ..
            } => write!(f, "t={t_ms} recv={event} state={state_after}"),
            DeviceLogEntry::Emitted { t_ms, event } => write!(f, "t={t_ms} emit={event}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("emission rule for undeclared state {0}")]
    UnknownState(StateName),
    #[error("emission rule emits {0}, which the device does not know")]
    UnknownEvent(EventName),
    #[error("dwell time must be positive")]
    ZeroDwell,
}

/// Request to call [`SimulatedDevice::fire_emission`] after `delay_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DwellRequest {
    pub delay_ms: u64,
    pub generation: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub event: EventName,
    pub next_dwell: Option<DwellRequest>,
}

/// An embedded device that follows its original state machine and nothing else.
#[derive(Debug, Clone)]
pub struct SimulatedDevice {
    machine: StateMachine,
    state: StateName,
    rules: Vec<EmissionRule>,
    log: Vec<DeviceLogEntry>,
    dwell_generation: u64,
}

impl SimulatedDevice {
    pub fn new(machine: StateMachine, rules: Vec<EmissionRule>) -> Result<Self, DeviceError> {
        for r in &rules {
            if !machine.exists_state(r.state.as_str()) {
                return Err(DeviceError::UnknownState(r.state.clone()));
            }
            if !machine.exists_event(r.emits.as_str()) {
                return Err(DeviceError::UnknownEvent(r.emits.clone()));
            }
            if r.dwell_ms == 0 {
                return Err(DeviceError::ZeroDwell);
            }
        }
        Ok(Self {
            state: machine.initial().clone(),
            machine,
            rules,
            log: Vec::new(),
            dwell_generation: 0,
        })
    }

    pub fn light_bulb() -> Self {
        Self::new(fixtures::light_bulb_original(), Vec::new()).expect("bulb has no rules")
    }

    /// The robot ends spot cleaning by itself after `spot_duration_ms`.
    pub fn cleaning_robot(spot_duration_ms: u64) -> Result<Self, DeviceError> {
        Self::new(
            fixtures::robot_original(),
            vec![EmissionRule {
                state: state("spot"),
                dwell_ms: spot_duration_ms,
                emits: event("endSpot"),
            }],
        )
    }

    pub fn machine(&self) -> &StateMachine {
        &self.machine
    }

    pub fn state(&self) -> &StateName {
        &self.state
    }

    pub fn log(&self) -> &[DeviceLogEntry] {
        &self.log
    }

    pub fn render_log(&self) -> String {
        self.log.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Every event applied to the device, received or self-emitted, in order.
    pub fn applied_events(&self) -> impl Iterator<Item = &EventName> {
        self.log.iter().map(|e| match e {
            DeviceLogEntry::Received { event, .. } | DeviceLogEntry::Emitted { event, .. } => event,
        })
    }

    /// Applies `event` if the machine has a transition for it; logs it either way.
    pub fn receive(&mut self, now_ms: u64, event: &EventName) -> Option<DwellRequest> {
        let next = self.machine.next_state(self.state.as_str(), event.as_str()).cloned();
        let ignored = next.is_none();
        let dwell = next.and_then(|s| self.enter(s));
        self.log.push(DeviceLogEntry::Received {
            t_ms: now_ms,
            event: event.clone(),
            state_after: self.state.clone(),
            ignored,
        });
        dwell
    }

    /// Emits the dwell event armed with `generation`, unless the device left that state since.
    pub fn fire_emission(&mut self, now_ms: u64, generation: u64) -> Option<Emission> {
        if generation != self.dwell_generation {
            return None;
        }
        let rule = self.rules.iter().find(|r| r.state == self.state)?.clone();
        self.log.push(DeviceLogEntry::Emitted {
            t_ms: now_ms,
            event: rule.emits.clone(),
        });
        let next = self.machine.next_state(self.state.as_str(), rule.emits.as_str()).cloned();
        let next_dwell = match next {
            Some(s) => self.enter(s),
            // emitting without a transition leaves the device in place; do not re-arm
            None => {
                self.dwell_generation += 1;
                None
            }
        };
        Some(Emission {
            event: rule.emits,
            next_dwell,
        })
    }

    fn enter(&mut self, next: StateName) -> Option<DwellRequest> {
        self.state = next;
        self.dwell_generation += 1;
        self.rules
            .iter()
            .find(|r| r.state == self.state)
            .map(|r| DwellRequest {
                delay_ms: r.dwell_ms,
                generation: self.dwell_generation,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bulb_toggles_and_ignores_unknown() {
        let mut d = SimulatedDevice::light_bulb();
        assert!(d.receive(0, &event("switch")).is_none());
        assert_eq!(d.state(), "on");
        d.receive(1, &event("switch"));
        assert_eq!(d.state(), "off");
        d.receive(2, &event("timeout"));
        assert_eq!(d.state(), "off");
        assert!(matches!(d.log()[2], DeviceLogEntry::Received { ignored: true, .. }));
        assert_eq!(d.render_log(), "t=0 recv=switch state=on\nt=1 recv=switch state=off\nt=2 recv=timeout state=off\n");
    }

    #[test]
    fn robot_spot_dwell_emits_end_spot() {
        let mut d = SimulatedDevice::cleaning_robot(1000).unwrap();
        d.receive(0, &event("clean"));
        assert_eq!(d.state(), "on");
        let dwell = d.receive(10, &event("spot")).unwrap();
        assert_eq!(dwell.delay_ms, 1000);
        assert_eq!(d.state(), "spot");
        let em = d.fire_emission(1010, dwell.generation).unwrap();
        assert_eq!(em.event, "endSpot");
        assert_eq!(d.state(), "on");
        assert!(d.render_log().ends_with("t=1010 emit=endSpot\n"));
    }

    #[test]
    fn robot_clean_at_on_goes_to_clean() {
        let mut d = SimulatedDevice::cleaning_robot(1000).unwrap();
        d.receive(0, &event("clean"));
        d.receive(0, &event("clean"));
        assert_eq!(d.state(), "clean");
    }

    #[test]
    fn leaving_spot_cancels_emission() {
        let mut d = SimulatedDevice::cleaning_robot(1000).unwrap();
        d.receive(0, &event("clean"));
        let dwell = d.receive(0, &event("spot")).unwrap();
        d.receive(5, &event("endSpot"));
        assert!(d.fire_emission(1000, dwell.generation).is_none());
    }

    #[test]
    fn zero_spot_duration_rejected() {
        assert_eq!(SimulatedDevice::cleaning_robot(0).unwrap_err(), DeviceError::ZeroDwell);
    }
}
