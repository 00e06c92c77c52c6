//! The analyze/plan half of the loop plus timer bookkeeping, independent of
//! how events are delivered or time is kept. Drivers (the threaded live loop
//! and the virtual-clock scenario runner) feed events in and carry out the
//! returned [`Effects`].

use super::knowledge::{ActionSpec, Handler, IncomingEvent, Knowledge, Mode, StepRecord};
use crate::statechart::{EventName, StateName};

/// Request to arm a one-shot state timer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimerRequest {
    pub generation: u64,
    pub delay_ms: u64,
    pub event: EventName,
}

/// Everything a driver must do after one step, in order.
pub struct Effects {
    pub record: StepRecord,
    /// Events for the device, in plan order.
    pub deliver: Vec<EventName>,
    /// Handler to launch, with the state it implements.
    pub invoke: Option<(StateName, Handler)>,
    /// Generation of a timer that is no longer wanted.
    pub cancel_timer: Option<u64>,
    pub arm_timer: Option<TimerRequest>,
}

#[derive(Debug)]
pub struct Converter {
    knowledge: Knowledge,
    steps: u64,
    last_generation: u64,
    armed: Option<u64>,
}

impl Converter {
    pub fn new(knowledge: Knowledge) -> Self {
        Self {
            knowledge,
            steps: 0,
            last_generation: 0,
            armed: None,
        }
    }

    pub fn knowledge(&self) -> &Knowledge {
        &self.knowledge
    }

    pub fn steps_executed(&self) -> u64 {
        self.steps
    }

    /// Generation of the currently armed timer, if any.
    pub fn armed_timer(&self) -> Option<u64> {
        self.armed
    }

    /// Arms the timer of the initial evolved state, if it has one.
    pub fn start(&mut self) -> Option<TimerRequest> {
        let state = self.knowledge.n_state().clone();
        self.arm_for(&state)
    }

    fn arm_for(&mut self, state: &StateName) -> Option<TimerRequest> {
        let spec = self.knowledge.evolved().timeout_for(state.as_str())?.clone();
        self.last_generation += 1;
        self.armed = Some(self.last_generation);
        Some(TimerRequest {
            generation: self.last_generation,
            delay_ms: spec.delay_ms,
            event: spec.emits,
        })
    }

    /// A timer event whose timer was cancelled or superseded.
    pub fn is_stale(&self, e: &IncomingEvent) -> bool {
        matches!(e.timer_generation, Some(g) if self.armed != Some(g))
    }

    /// Runs one analyze/plan step and commits its state changes.
    ///
    /// Returns `None` when `e` comes from a stale timer; such events are dropped.
    pub fn handle(&mut self, e: IncomingEvent) -> Option<Effects> {
        if self.is_stale(&e) {
            return None;
        }
        let record = self.knowledge.step(&e);
        self.knowledge.apply(&record);
        self.steps += 1;

        let deliver = record.action.sent().to_vec();
        let invoke = match &record.action {
            ActionSpec::Invoke(state) => self
                .knowledge
                .handlers()
                .get(state.as_str())
                .map(|h| (state.clone(), h.clone())),
            _ => None,
        };
        // every accepted event is a transition: leave the old state, enter the new one
        let (cancel_timer, arm_timer) = if record.mode == Mode::Rejected {
            (None, None)
        } else {
            let cancelled = self.armed.take();
            (cancelled, self.arm_for(&record.n_after.clone()))
        };
        Some(Effects {
            record,
            deliver,
            invoke,
            cancel_timer,
            arm_timer,
        })
    }

    /// Disarms the current timer, returning its generation.
    pub fn cancel_timers(&mut self) -> Option<u64> {
        self.armed.take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::gate_for_runtime;
    use crate::fixtures;
    use crate::mapek::knowledge::{EventSource, HandlerRegistry};
    use crate::statechart::{event, state};

    fn bulb() -> Converter {
        let pair = gate_for_runtime(&fixtures::light_bulb_pair()).unwrap();
        let mut reg = HandlerRegistry::new();
        reg.register_passive(state("wait")).unwrap();
        reg.register_passive(state("incandescentOn")).unwrap();
        Converter::new(Knowledge::build(&pair, reg).unwrap())
    }

    fn ev(name: &str, seq: u64, gen: Option<u64>) -> IncomingEvent {
        IncomingEvent {
            name: event(name),
            source: if gen.is_some() { EventSource::Internal } else { EventSource::Controller },
            seq,
            timer_generation: gen,
        }
    }

    #[test]
    fn entering_wait_arms_and_leaving_cancels() {
        let mut c = bulb();
        assert!(c.start().is_none());
        assert!(c.handle(ev("switch", 1, None)).unwrap().arm_timer.is_none());
        let fx = c.handle(ev("switch", 2, None)).unwrap();
        let timer = fx.arm_timer.unwrap();
        assert_eq!((timer.delay_ms, timer.event.as_str()), (2000, "timeout"));
        assert!(fx.invoke.is_some());
        let fx = c.handle(ev("switch", 3, None)).unwrap();
        assert_eq!(fx.cancel_timer, Some(timer.generation));
        // the cancelled timer fires anyway: dropped
        assert!(c.handle(ev("timeout", 4, Some(timer.generation))).is_none());
        assert_eq!(c.steps_executed(), 3);
    }

    #[test]
    fn live_timer_event_is_processed() {
        let mut c = bulb();
        c.handle(ev("switch", 1, None));
        let timer = c.handle(ev("switch", 2, None)).unwrap().arm_timer.unwrap();
        let fx = c.handle(ev("timeout", 3, Some(timer.generation))).unwrap();
        assert_eq!(fx.deliver, vec![event("switch")]);
        assert_eq!(fx.cancel_timer, Some(timer.generation));
        assert_eq!(c.knowledge().n_state(), "off");
    }

    #[test]
    fn rejected_event_leaves_timers_alone() {
        let mut c = bulb();
        let fx = c.handle(ev("timeout", 1, None)).unwrap();
        assert_eq!(fx.record.mode, Mode::Rejected);
        assert!(fx.cancel_timer.is_none() && fx.arm_timer.is_none());
        assert!(fx.deliver.is_empty() && fx.invoke.is_none());
    }
}
