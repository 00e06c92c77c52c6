//! Light bulb: a quick double switch turns on incandescent color; a single
//! switch followed by silence times out of `wait` and turns the bulb off.

use evolve::devices::{builtin_handlers, run_scenario, DeviceKind, HandlerConfig, ScenarioConfig, ScenarioScript, SimulatedDevice};
use evolve::evolution::gate_for_runtime;
use evolve::fixtures;

fn run(label: &str, script: ScenarioScript) {
    let pair = gate_for_runtime(&fixtures::light_bulb_pair()).unwrap();
    let (handlers, state) = builtin_handlers(DeviceKind::LightBulb, &HandlerConfig::default());
    let trace = run_scenario(&pair, SimulatedDevice::light_bulb(), &script, handlers, &ScenarioConfig::default()).unwrap();
    println!("== {label}");
    print!("{}", trace.render());
    println!(
        "device {}, converter ({}, {}), incandescent {}\n",
        trace.device_state,
        trace.o_state,
        trace.n_state,
        state.is_incandescent()
    );
}

fn main() {
    run(
        "double switch",
        ScenarioScript::events(&[(0, "switch"), (500, "switch"), (1000, "switch")]).unwrap(),
    );
    run(
        "wait timeout",
        ScenarioScript::events(&[(0, "switch"), (500, "switch")]).unwrap().then_advance(3000).unwrap(),
    );
}
