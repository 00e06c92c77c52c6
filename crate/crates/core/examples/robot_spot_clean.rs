//! Cleaning robot: `clean` then `spot` sends the robot to the spot first
//! (a new function), then starts spot cleaning once it arrives.

use evolve::cli::render_paper;
use evolve::devices::{builtin_handlers, run_scenario, DeviceKind, HandlerConfig, ScenarioConfig, ScenarioScript, SimulatedDevice};
use evolve::evolution::gate_for_runtime;
use evolve::fixtures;

fn main() {
    let pair = gate_for_runtime(&fixtures::robot_pair()).unwrap();
    let (handlers, _) = builtin_handlers(DeviceKind::Robot, &HandlerConfig { move_duration_ms: 500 });
    let device = SimulatedDevice::cleaning_robot(1000).unwrap();
    let script = ScenarioScript::events(&[(0, "clean"), (1000, "spot")]).unwrap();
    let trace = run_scenario(&pair, device, &script, handlers, &ScenarioConfig::default()).unwrap();

    print!("{}", render_paper(&trace.records));
    println!("device log:");
    print!("{}", trace.render_device_log());
}
