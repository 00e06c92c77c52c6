//! Wall-clock driver: one consumer thread runs the loop, timers and handlers
//! run on their own threads and only ever talk back through the queue.

use std::sync::mpsc::{Receiver, RecvTimeoutError, TryRecvError};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::control::{ControlCommand, ControlReply, ControlRequest, StatusSnapshot};
use super::converter::{Converter, Effects, TimerRequest};
use super::knowledge::{EventSource, InternalEvents, Invocation, StepRecord};
use super::queue::EventQueue;
use crate::statechart::EventName;

/// Receives the events the converter forwards to the embedded device.
pub trait DeviceSink {
    fn deliver(&mut self, event: &EventName) -> Result<(), String>;
}

impl<F: FnMut(&EventName) -> Result<(), String>> DeviceSink for F {
    fn deliver(&mut self, event: &EventName) -> Result<(), String> {
        self(event)
    }
}

#[derive(Debug, Clone)]
pub struct LoopOptions {
    /// Consume events immediately instead of waiting for `start`.
    pub autostart: bool,
    /// How long the consumer blocks on the queue before re-checking control.
    pub poll: Duration,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            autostart: true,
            poll: Duration::from_millis(10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    /// An `exit` command was received.
    Exited { steps_executed: u64 },
    /// Every control sender was dropped.
    ControlClosed { steps_executed: u64 },
}

struct LiveEmitter {
    queue: EventQueue,
}

impl InternalEvents for LiveEmitter {
    fn emit(&self, event: EventName) {
        let _ = self.queue.enqueue(event, EventSource::Internal);
    }

    fn emit_after(&self, delay_ms: u64, event: EventName) {
        let queue = self.queue.clone();
        thread::spawn(move || {
            thread::sleep(Duration::from_millis(delay_ms));
            let _ = queue.enqueue(event, EventSource::Internal);
        });
    }
}

fn arm_wall_timer(queue: &EventQueue, timer: TimerRequest) {
    let queue = queue.clone();
    thread::spawn(move || {
        thread::sleep(Duration::from_millis(timer.delay_ms));
        // a cancelled timer still fires; the converter drops it by generation
        let _ = queue.enqueue_timer(timer.event, timer.generation);
    });
}

/// Runs the monitor/analyze/plan/execute loop until `exit`.
///
/// Every processed event is reported to `trace` after its effects were
/// carried out. Sink failures are attached to the step's record.
pub fn run_loop(
    converter: &mut Converter,
    queue: &EventQueue,
    sink: &mut dyn DeviceSink,
    control: &Receiver<ControlRequest>,
    trace: &mut dyn FnMut(&StepRecord),
    options: &LoopOptions,
) -> TerminalStatus {
    let started = Instant::now();
    let mut running = options.autostart;
    if let Some(timer) = converter.start() {
        arm_wall_timer(queue, timer);
    }
    loop {
        // control commands are serialized between iterations
        loop {
            let request = if running {
                match control.try_recv() {
                    Ok(r) => r,
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => return shutdown(converter, queue, false),
                }
            } else {
                match control.recv_timeout(options.poll) {
                    Ok(r) => r,
                    Err(RecvTimeoutError::Timeout) => break,
                    Err(RecvTimeoutError::Disconnected) => return shutdown(converter, queue, false),
                }
            };
            debug!("control: {}", request.command);
            let reply = match request.command {
                ControlCommand::Start => {
                    running = true;
                    ControlReply::Ack { command: request.command, running }
                }
                ControlCommand::Stop => {
                    running = false;
                    ControlReply::Ack { command: request.command, running }
                }
                ControlCommand::Status => ControlReply::Status(snapshot(converter, queue, running)),
                ControlCommand::Exit => {
                    let status = shutdown(converter, queue, true);
                    if let Some(tx) = request.reply {
                        let _ = tx.send(ControlReply::Ack {
                            command: ControlCommand::Exit,
                            running: false,
                        });
                    }
                    return status;
                }
            };
            if let Some(tx) = request.reply {
                let _ = tx.send(reply);
            }
        }
        if !running {
            continue;
        }
        let Some(event) = queue.dequeue_timeout(options.poll) else {
            continue;
        };
        let Some(effects) = converter.handle(event) else {
            debug!("dropped stale timer event");
            continue;
        };
        let now_ms = started.elapsed().as_millis() as u64;
        let record = execute(effects, queue, sink, now_ms);
        trace(&record);
    }
}

fn execute(effects: Effects, queue: &EventQueue, sink: &mut dyn DeviceSink, now_ms: u64) -> StepRecord {
    let Effects {
        mut record,
        deliver,
        invoke,
        arm_timer,
        ..
    } = effects;
    for event in &deliver {
        if let Err(e) = sink.deliver(event) {
            warn!("sink failure delivering {event}: {e}");
            record.errors.push(format!("sink failure delivering {event}: {e}"));
            break;
        }
    }
    if let Some((state, handler)) = invoke {
        let invocation = Invocation {
            state,
            record: record.clone(),
            now_ms,
        };
        let emitter = LiveEmitter { queue: queue.clone() };
        thread::spawn(move || handler(&invocation, &emitter));
    }
    if let Some(timer) = arm_timer {
        arm_wall_timer(queue, timer);
    }
    record
}

fn snapshot(converter: &Converter, queue: &EventQueue, running: bool) -> StatusSnapshot {
    StatusSnapshot {
        running,
        o_state: converter.knowledge().o_state().to_string(),
        n_state: converter.knowledge().n_state().to_string(),
        queue_depth: queue.len(),
        steps_executed: converter.steps_executed(),
    }
}

fn shutdown(converter: &mut Converter, queue: &EventQueue, by_command: bool) -> TerminalStatus {
    queue.close();
    converter.cancel_timers();
    let steps_executed = converter.steps_executed();
    if by_command {
        TerminalStatus::Exited { steps_executed }
    } else {
        TerminalStatus::ControlClosed { steps_executed }
    }
}
