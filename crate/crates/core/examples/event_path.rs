//! Shortest event sequences through the original robot model. Ties go to
//! the lexicographically smallest sequence.

use evolve::fixtures;

fn main() {
    let m = fixtures::robot_original();
    for from in m.states() {
        for to in m.states() {
            match m.event_path(from.as_str(), to.as_str()) {
                Ok(p) if p.is_empty() => {}
                Ok(p) => println!("{from:>6} -> {to:<6} {}", p.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(", ")),
                Err(e) => println!("{from:>6} -> {to:<6} ({e})"),
            }
        }
    }
}
