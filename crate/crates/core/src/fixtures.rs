//! The bundled light-bulb and cleaning-robot models.

use crate::evolution::EvolutionPair;
use crate::statechart::StateMachine;

pub const LIGHT_BULB_ORIGINAL: &str = include_str!("../models/lightbulb_original.json");
pub const LIGHT_BULB_EVOLVED: &str = include_str!("../models/lightbulb_evolved.json");
pub const ROBOT_ORIGINAL: &str = include_str!("../models/robot_original.json");
pub const ROBOT_EVOLVED: &str = include_str!("../models/robot_evolved.json");

fn load(doc: &str) -> StateMachine {
    StateMachine::parse(doc).expect("bundled model is valid")
}

pub fn light_bulb_original() -> StateMachine {
    load(LIGHT_BULB_ORIGINAL)
}

pub fn light_bulb_evolved() -> StateMachine {
    load(LIGHT_BULB_EVOLVED)
}

pub fn robot_original() -> StateMachine {
    load(ROBOT_ORIGINAL)
}

pub fn robot_evolved() -> StateMachine {
    load(ROBOT_EVOLVED)
}

pub fn light_bulb_pair() -> EvolutionPair {
    EvolutionPair::new(light_bulb_original(), light_bulb_evolved())
}

pub fn robot_pair() -> EvolutionPair {
    EvolutionPair::new(robot_original(), robot_evolved())
}
