use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::evolution::ValidatedPair;
use crate::mapek::HandlerRegistry;
use crate::statechart::{event, state};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceKind {
    LightBulb,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown device kind {0:?}: expected lightbulb or robot")]
pub struct UnknownDeviceKind(pub String);

impl FromStr for DeviceKind {
    type Err = UnknownDeviceKind;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lightbulb" => Ok(DeviceKind::LightBulb),
            "robot" => Ok(DeviceKind::Robot),
            other => Err(UnknownDeviceKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HandlerConfig {
    /// Time the robot needs to reach the spot-cleaning start point.
    pub move_duration_ms: u64,
}

impl Default for HandlerConfig {
    fn default() -> Self {
        Self { move_duration_ms: 500 }
    }
}

/// Observable side effects of the builtin handlers.
#[derive(Debug, Clone, Default)]
pub struct BuiltinState {
    /// Set once the bulb has switched to incandescent color.
    pub incandescent: Arc<AtomicBool>,
}

impl BuiltinState {
    pub fn is_incandescent(&self) -> bool {
        self.incandescent.load(Ordering::SeqCst)
    }
}

/// New functions for the bundled evolved models.
pub fn builtin_handlers(kind: DeviceKind, config: &HandlerConfig) -> (HandlerRegistry, BuiltinState) {
    let mut reg = HandlerRegistry::new();
    let st = BuiltinState::default();
    match kind {
        DeviceKind::Robot => {
            let delay = config.move_duration_ms;
            reg.register(state("move"), move |_, out| out.emit_after(delay, event("arriveSpot")))
                .expect("fresh registry");
            // the detour waits for the next button or its own timer
            reg.register_passive(state("spotWait")).expect("fresh registry");
        }
        DeviceKind::LightBulb => {
            reg.register_passive(state("wait")).expect("fresh registry");
            let flag = st.incandescent.clone();
            reg.register(state("incandescentOn"), move |_, _| flag.store(true, Ordering::SeqCst))
                .expect("fresh registry");
        }
    }
    (reg, st)
}

/// Builtin handlers by name (`lightbulb`, `robot`), or `passive`: a no-op for every new state of `pair`.
pub fn handlers_by_name(
    name: &str,
    pair: &ValidatedPair,
    config: &HandlerConfig,
) -> Result<(HandlerRegistry, BuiltinState), UnknownDeviceKind> {
    if name == "passive" {
        return Ok((passive_handlers(pair), BuiltinState::default()));
    }
    Ok(builtin_handlers(name.parse()?, config))
}

pub fn passive_handlers(pair: &ValidatedPair) -> HandlerRegistry {
    let mut reg = HandlerRegistry::new();
    for s in &pair.diff().new_states {
        reg.register_passive(s.clone()).expect("new states are distinct");
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_kinds() {
        assert_eq!("robot".parse(), Ok(DeviceKind::Robot));
        assert_eq!("lightbulb".parse(), Ok(DeviceKind::LightBulb));
        assert!("toaster".parse::<DeviceKind>().is_err());
    }

    #[test]
    fn registries_cover_new_states() {
        let (reg, _) = builtin_handlers(DeviceKind::Robot, &HandlerConfig::default());
        assert!(reg.contains("move") && reg.contains("spotWait"));
        let (reg, _) = builtin_handlers(DeviceKind::LightBulb, &HandlerConfig::default());
        assert!(reg.contains("wait") && reg.contains("incandescentOn"));
    }
}
