//! Checks the bundled model pairs and a broken variant of the robot pair.

use evolve::evolution::{gate_for_runtime, EvolutionPair, ValidationReport};
use evolve::fixtures;
use evolve::statechart::StateMachine;

fn main() {
    for (name, pair) in [("lightbulb", fixtures::light_bulb_pair()), ("robot", fixtures::robot_pair())] {
        let v = gate_for_runtime(&pair).expect("bundled pairs are valid");
        let d = v.diff();
        println!(
            "{name}: new states {:?}, new events {:?}, {} added, {} modified, {} removed",
            d.new_states,
            d.new_events,
            d.added_transitions.len(),
            d.modified_transitions.len(),
            d.removed_transitions.len()
        );
    }

    // an evolved bulb that renamed the original `on` state
    let bulb = fixtures::light_bulb_pair();
    let doc = bulb.evolved.to_json().replace("\"on\"", "\"lit\"");
    let broken = StateMachine::parse(&doc).expect("still a well-formed machine");
    let report = ValidationReport::build(&EvolutionPair::new(bulb.original, broken));
    println!("renamed bulb: gate passed = {}", report.gate_passed);
    println!("  missing states: {:?}", report.conditions.missing_states);
    println!("  {}", report.gate_error.unwrap_or_default());
}
