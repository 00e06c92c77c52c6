//! Evolving the behavior of an event-driven device whose firmware cannot be
//! changed.
//!
//! An event converter sits between the controller and the device. It keeps
//! the device's original state machine and a desired, evolved one. Each
//! incoming event is checked against the evolved model: if it leads to a
//! state the device already has, the converter forwards the events that drive
//! the device there; if it leads to a new state, a registered handler runs the
//! new function instead.
//!
//! * [`statechart`]: flat state machine models, parsing and path planning.
//! * [`evolution`]: preservation checks and the structural diff of a model pair.
//! * [`mapek`]: the converter loop, its queue, timers and control commands.
//! * [`devices`]: simulated devices and a deterministic scenario runner.
//! * [`ctmc`]: continuous-time Markov chain models of converter overhead.
//! * [`cli`]: the `evolve` command line.

pub mod cli;
pub mod ctmc;
pub mod devices;
pub mod evolution;
pub mod fixtures;
pub mod mapek;
pub mod statechart;
