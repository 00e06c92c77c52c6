//! Deterministic, single-threaded scenario runs on a virtual clock.
//!
//! Handlers, state timers and device dwell emissions all become agenda
//! items on one [`VirtualClock`], so a run is a pure function of its inputs.

use std::cell::RefCell;

use thiserror::Error;

use super::clock::VirtualClock;
use super::device::{DeviceLogEntry, DwellRequest, SimulatedDevice};
use super::script::{ScenarioScript, ScriptStep};
use crate::evolution::ValidatedPair;
use crate::mapek::{
    BuildError, Converter, Effects, EventQueue, EventSource, HandlerRegistry, InternalEvents, Invocation, Knowledge,
    StepRecord,
};
use crate::statechart::{EventName, StateName};

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// After the last script step, keep firing pending items for this long.
    pub drain_horizon_ms: u64,
    /// Abort runs that process more events than this.
    pub max_steps: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            drain_horizon_ms: 60_000,
            max_steps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("device machine differs from the pair's original model")]
    DeviceMismatch,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("scenario exceeded {0} steps")]
    StepLimit(usize),
}

/// Result of a scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioTrace {
    pub records: Vec<StepRecord>,
    pub device_log: Vec<DeviceLogEntry>,
    pub device_state: StateName,
    pub o_state: StateName,
    pub n_state: StateName,
    pub end_ms: u64,
}

impl ScenarioTrace {
    pub fn render(&self) -> String {
        crate::mapek::render_trace(&self.records)
    }

    pub fn render_device_log(&self) -> String {
        self.device_log.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Events delivered to the device by the converter.
    pub fn delivered(&self) -> impl Iterator<Item = &EventName> {
        self.records.iter().flat_map(|r| r.action.sent())
    }
}

#[derive(Debug)]
enum Agenda {
    Controller(EventName),
    Internal(EventName),
    Timer { generation: u64, event: EventName },
    DeviceDwell { generation: u64 },
}

#[derive(Default)]
struct VirtualEmitter {
    requested: RefCell<Vec<(u64, EventName)>>,
}

impl InternalEvents for VirtualEmitter {
    fn emit(&self, event: EventName) {
        self.requested.borrow_mut().push((0, event));
    }

    fn emit_after(&self, delay_ms: u64, event: EventName) {
        self.requested.borrow_mut().push((delay_ms, event));
    }
}

struct Run {
    converter: Converter,
    device: SimulatedDevice,
    clock: VirtualClock<Agenda>,
    queue: EventQueue,
    records: Vec<StepRecord>,
    max_steps: usize,
}

impl Run {
    fn fire_due(&mut self, until_ms: u64) -> Result<(), ScenarioError> {
        while let Some(item) = self.clock.pop_due(until_ms) {
            let now = self.clock.now_ms();
            match item {
                Agenda::Controller(e) => {
                    self.queue.enqueue(e, EventSource::Controller).expect("queue open");
                }
                Agenda::Internal(e) => {
                    self.queue.enqueue(e, EventSource::Internal).expect("queue open");
                }
                Agenda::Timer { generation, event } => {
                    // cancelled timers never reach the queue
                    if self.converter.armed_timer() == Some(generation) {
                        self.queue.enqueue_timer(event, generation).expect("queue open");
                    }
                }
                Agenda::DeviceDwell { generation } => {
                    if let Some(emission) = self.device.fire_emission(now, generation) {
                        self.schedule_dwell(emission.next_dwell);
                        self.queue.enqueue(emission.event, EventSource::Device).expect("queue open");
                    }
                }
            }
            self.drain()?;
        }
        Ok(())
    }

    fn schedule_dwell(&mut self, dwell: Option<DwellRequest>) {
        if let Some(d) = dwell {
            self.clock.schedule_after(d.delay_ms, Agenda::DeviceDwell { generation: d.generation });
        }
    }

    fn drain(&mut self) -> Result<(), ScenarioError> {
        while let Some(event) = self.queue.try_dequeue() {
            let Some(effects) = self.converter.handle(event) else {
                continue;
            };
            if self.records.len() >= self.max_steps {
                return Err(ScenarioError::StepLimit(self.max_steps));
            }
            let record = self.execute(effects);
            self.records.push(record);
        }
        Ok(())
    }

    fn execute(&mut self, effects: Effects) -> StepRecord {
        let now = self.clock.now_ms();
        let Effects {
            record,
            deliver,
            invoke,
            arm_timer,
            ..
        } = effects;
        for e in &deliver {
            let dwell = self.device.receive(now, e);
            self.schedule_dwell(dwell);
        }
        if let Some((state, handler)) = invoke {
            let emitter = VirtualEmitter::default();
            let invocation = Invocation {
                state,
                record: record.clone(),
                now_ms: now,
            };
            handler(&invocation, &emitter);
            for (delay, e) in emitter.requested.into_inner() {
                if delay == 0 {
                    self.queue.enqueue(e, EventSource::Internal).expect("queue open");
                } else {
                    self.clock.schedule_after(delay, Agenda::Internal(e));
                }
            }
        }
        if let Some(timer) = arm_timer {
            self.clock.schedule_after(
                timer.delay_ms,
                Agenda::Timer {
                    generation: timer.generation,
                    event: timer.event,
                },
            );
        }
        record
    }
}

/// Runs `script` against `device` through a converter built from `pair` and `handlers`.
///
/// Pending items at or before each script step fire first. After the script
/// ends, pending items keep firing for `drain_horizon_ms`.
pub fn run_scenario(
    pair: &ValidatedPair,
    device: SimulatedDevice,
    script: &ScenarioScript,
    handlers: HandlerRegistry,
    config: &ScenarioConfig,
) -> Result<ScenarioTrace, ScenarioError> {
    if device.machine() != pair.original() {
        return Err(ScenarioError::DeviceMismatch);
    }
    let mut converter = Converter::new(Knowledge::build(pair, handlers)?);
    let mut clock = VirtualClock::new();
    if let Some(timer) = converter.start() {
        clock.schedule_after(
            timer.delay_ms,
            Agenda::Timer {
                generation: timer.generation,
                event: timer.event,
            },
        );
    }
    let mut run = Run {
        converter,
        device,
        clock,
        queue: EventQueue::new(),
        records: Vec::new(),
        max_steps: config.max_steps,
    };
    for step in script.steps() {
        let t = step.time_ms();
        run.fire_due(t)?;
        run.clock.advance_to(t);
        if let ScriptStep::At { event, .. } = step {
            run.clock.schedule_after(0, Agenda::Controller(event.clone()));
            run.fire_due(t)?;
        }
    }
    let horizon = run.clock.now_ms().saturating_add(config.drain_horizon_ms);
    run.fire_due(horizon)?;
    Ok(ScenarioTrace {
        device_log: run.device.log().to_vec(),
        device_state: run.device.state().clone(),
        o_state: run.converter.knowledge().o_state().clone(),
        n_state: run.converter.knowledge().n_state().clone(),
        end_ms: run.clock.now_ms(),
        records: run.records,
    })
}
