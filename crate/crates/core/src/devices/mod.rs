//! Simulated embedded devices and a deterministic scenario harness.

mod clock;
mod device;
mod handlers;
mod live;
mod scenario;
mod script;

pub use clock::VirtualClock;
pub use device::{DeviceError, DeviceLogEntry, DwellRequest, Emission, EmissionRule, SimulatedDevice};
pub use handlers::{
    builtin_handlers, handlers_by_name, passive_handlers, BuiltinState, DeviceKind, HandlerConfig, UnknownDeviceKind,
};
pub use live::LiveDevice;
pub use scenario::{run_scenario, ScenarioConfig, ScenarioError, ScenarioTrace};
pub use script::{ScenarioScript, ScriptError, ScriptStep};
