//! The event converter: a monitor, analyze, plan, execute loop over shared
//! knowledge of the original and evolved models.
//!
//! [`Knowledge::step`] is the pure decision procedure. [`Converter`] adds
//! step counting and state-timer bookkeeping. [`run_loop`] drives a converter
//! on the wall clock with threads; the virtual-clock driver lives in
//! [`crate::devices`].

mod control;
mod converter;
mod knowledge;
mod live;
mod queue;
mod trace;

pub use control::{ControlCommand, ControlReply, ControlRequest, InvalidCommand, StatusSnapshot};
pub use converter::{Converter, Effects, TimerRequest};
pub use knowledge::{
    ActionSpec, BuildError, EventSource, Handler, HandlerRegistry, IncomingEvent, InternalEvents, Invocation,
    Knowledge, Mode, RegistryError, StepRecord, TableAction,
};
pub use live::{run_loop, DeviceSink, LoopOptions, TerminalStatus};
pub use queue::{EventQueue, QueueClosed};
pub use trace::{parse_trace, render_trace, TraceParseError};
