//! Cleaning robot: a third `clean` parks the converter in the new spotWait
//! state; a fourth within the timeout is translated into `clean, spot`.
//! Pass `--timeout` to let the spotWait timer fire instead.

use evolve::devices::{builtin_handlers, run_scenario, DeviceKind, HandlerConfig, ScenarioConfig, ScenarioScript, SimulatedDevice};
use evolve::evolution::gate_for_runtime;
use evolve::fixtures;

fn main() {
    let timeout = std::env::args().any(|a| a == "--timeout");
    let mut events = vec![(0, "clean"), (1000, "clean"), (2000, "clean")];
    if !timeout {
        events.push((2500, "clean"));
    }
    let pair = gate_for_runtime(&fixtures::robot_pair()).unwrap();
    let (handlers, _) = builtin_handlers(DeviceKind::Robot, &HandlerConfig::default());
    let device = SimulatedDevice::cleaning_robot(1000).unwrap();
    let script = ScenarioScript::events(&events).unwrap();
    let trace = run_scenario(&pair, device, &script, handlers, &ScenarioConfig::default()).unwrap();
    print!("{}", trace.render());
    println!("device ends in {} after {} ms", trace.device_state, trace.end_ms);
}
