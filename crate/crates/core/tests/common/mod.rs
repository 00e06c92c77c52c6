//! Random models and independent reference implementations for the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evolve::devices::passive_handlers;
use evolve::evolution::{gate_for_runtime, EvolutionPair, ValidatedPair};
use evolve::mapek::{Converter, EventSource, IncomingEvent, Knowledge, Mode};
use evolve::statechart::{event, state, EventName, StateMachine, StateName, TimeoutSpec, Transition};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random deterministic machine with `s0` initial. Names are `s<i>` and `e<j>`.
pub fn random_machine(rng: &mut impl Rng, max_states: usize, max_events: usize) -> StateMachine {
    let n = rng.random_range(1..=max_states);
    let m = rng.random_range(1..=max_events);
    let density = rng.random_range(0.15..0.8);
    let states: Vec<StateName> = (0..n).map(|i| state(&format!("s{i}"))).collect();
    let events: Vec<EventName> = (0..m).map(|j| event(&format!("e{j}"))).collect();
    let mut transitions = Vec::new();
    for s in &states {
        for e in &events {
            if rng.random_bool(density) {
                let to = states.choose(rng).unwrap().clone();
                transitions.push(Transition::new(s.clone(), e.clone(), to));
            }
        }
    }
    StateMachine::new("random", states[0].clone(), events, states, transitions, Vec::<TimeoutSpec>::new())
        .expect("generated machine is well formed")
}

fn machine_from(
    initial: &StateName,
    events: &BTreeSet<EventName>,
    states: &BTreeSet<StateName>,
    table: &BTreeMap<(StateName, EventName), StateName>,
    timeouts: Vec<TimeoutSpec>,
    name: &str,
) -> StateMachine {
    StateMachine::new(
        name,
        initial.clone(),
        events.iter().cloned(),
        states.iter().cloned(),
        table.iter().map(|((f, e), t)| Transition::new(f.clone(), e.clone(), t.clone())),
        timeouts,
    )
    .expect("generated machine is well formed")
}

fn reachable(initial: &StateName, table: &BTreeMap<(StateName, EventName), StateName>) -> BTreeSet<StateName> {
    let mut seen = BTreeSet::from([initial.clone()]);
    let mut queue = VecDeque::from([initial.clone()]);
    while let Some(s) = queue.pop_front() {
        for ((f, _), t) in table {
            if *f == s && seen.insert(t.clone()) {
                queue.push_back(t.clone());
            }
        }
    }
    seen
}

/// Adds `s<i> -> s<i+1>` (wrapping) on a free event where there is one, so
/// most states can reach each other.
fn with_ring(rng: &mut impl Rng, m: &StateMachine) -> StateMachine {
    let states: Vec<StateName> = (0..m.states().len()).map(|i| state(&format!("s{i}"))).collect();
    let events: Vec<EventName> = m.events().iter().cloned().collect();
    let mut ts: Vec<Transition> = m.transitions().collect();
    for (i, s) in states.iter().enumerate() {
        let free: Vec<&EventName> = events.iter().filter(|e| !m.exists_transition(s.as_str(), e.as_str())).collect();
        if let Some(e) = free.choose(rng) {
            ts.push(Transition::new(s.clone(), (*e).clone(), states[(i + 1) % states.len()].clone()));
        }
    }
    StateMachine::new(m.name(), m.initial().clone(), events, states, ts, Vec::<TimeoutSpec>::new())
        .expect("ring edges use free slots")
}

/// A random pair that passes the runtime gate.
///
/// The evolved model keeps every original state and event, drops or
/// retargets some original transitions, and adds new states (`n<i>`),
/// events (`x<j>`) and optionally state timers.
pub fn random_pair(rng: &mut impl Rng) -> ValidatedPair {
    loop {
        let mut original = random_machine(rng, 6, 4);
        if rng.random_bool(0.7) {
            original = with_ring(rng, &original);
        }
        let new_states: Vec<StateName> = (0..rng.random_range(0..=3)).map(|i| state(&format!("n{i}"))).collect();
        let new_events: Vec<EventName> = (0..rng.random_range(0..=2)).map(|j| event(&format!("x{j}"))).collect();
        let mut states: BTreeSet<StateName> = original.states().clone();
        states.extend(new_states.iter().cloned());
        let mut events: BTreeSet<EventName> = original.events().clone();
        events.extend(new_events.iter().cloned());
        let all_states: Vec<StateName> = states.iter().cloned().collect();
        let all_events: Vec<EventName> = events.iter().cloned().collect();

        let mut table: BTreeMap<(StateName, EventName), StateName> = BTreeMap::new();
        for t in original.transitions() {
            match rng.random_range(0..10) {
                0 => {} // removed
                1..=3 => {
                    table.insert((t.from, t.event), all_states.choose(rng).unwrap().clone());
                }
                _ => {
                    table.insert((t.from, t.event), t.to);
                }
            }
        }
        for _ in 0..rng.random_range(0..=6) {
            let from = all_states.choose(rng).unwrap().clone();
            let e = all_events.choose(rng).unwrap().clone();
            table.entry((from, e)).or_insert_with(|| all_states.choose(rng).unwrap().clone());
        }
        // wire every unreachable state to a reachable one on a free slot
        for _ in 0..50 {
            let seen = reachable(original.initial(), &table);
            let Some(missing) = all_states.iter().find(|s| !seen.contains(*s)) else { break };
            let froms: Vec<&StateName> = seen.iter().collect();
            let from = (*froms.choose(rng).unwrap()).clone();
            let free: Vec<&EventName> = all_events.iter().filter(|e| !table.contains_key(&(from.clone(), (*e).clone()))).collect();
            if let Some(e) = free.choose(rng) {
                table.insert((from, (*e).clone()), missing.clone());
            }
        }
        let mut timeouts = Vec::new();
        for s in &new_states {
            let outs: Vec<&EventName> = all_events.iter().filter(|e| table.contains_key(&(s.clone(), (*e).clone()))).collect();
            if !outs.is_empty() && rng.random_bool(0.3) {
                timeouts.push(TimeoutSpec {
                    state: s.clone(),
                    delay_ms: rng.random_range(1..=5) * 500,
                    emits: (*outs.choose(rng).unwrap()).clone(),
                });
            }
        }
        let evolved = machine_from(original.initial(), &events, &states, &table, timeouts, "evolved");
        if let Ok(v) = gate_for_runtime(&EvolutionPair::new(original, evolved)) {
            return v;
        }
    }
}

/// Events for a random script. Mostly events the evolved model accepts in
/// the state the converter will be in, sometimes any evolved event, rarely
/// an event neither model knows.
pub fn random_script(rng: &mut impl Rng, pair: &ValidatedPair, len: usize) -> Vec<EventName> {
    let events: Vec<EventName> = pair.evolved().events().iter().cloned().collect();
    let mut tracker = ReferenceConverter::new(pair);
    (0..len)
        .map(|_| {
            let enabled: Vec<EventName> = pair
                .evolved()
                .outgoing(&state(&tracker.n))
                .map(|(e, _)| e.clone())
                .collect();
            let e = if rng.random_bool(0.05) {
                event("zz")
            } else if !enabled.is_empty() && rng.random_bool(0.75) {
                enabled.choose(rng).unwrap().clone()
            } else {
                events.choose(rng).unwrap().clone()
            };
            tracker.step(e.as_str());
            e
        })
        .collect()
}

pub fn converter_for(pair: &ValidatedPair) -> Converter {
    Converter::new(Knowledge::build(pair, passive_handlers(pair)).expect("passive handlers cover new states"))
}

pub fn controller_event(name: &EventName, seq: u64) -> IncomingEvent {
    IncomingEvent {
        name: name.clone(),
        source: EventSource::Controller,
        seq,
        timer_generation: None,
    }
}

/// Reference planner: distances to the goal by reverse search, then walk
/// forward taking the smallest event that stays on a shortest path. Gives the
/// lexicographically least shortest event sequence.
pub fn oracle_path(m: &StateMachine, from: &str, to: &str) -> Option<Vec<String>> {
    let edges: Vec<(String, String, String)> = m
        .transitions()
        .map(|t| (t.from.to_string(), t.event.to_string(), t.to.to_string()))
        .collect();
    let mut dist: BTreeMap<String, usize> = BTreeMap::from([(to.to_string(), 0)]);
    let mut frontier = vec![to.to_string()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for t in &frontier {
            let d = dist[t];
            for (f, _, tt) in &edges {
                if tt == t && !dist.contains_key(f) {
                    dist.insert(f.clone(), d + 1);
                    next.push(f.clone());
                }
            }
        }
        frontier = next;
    }
    let mut cur = from.to_string();
    let mut d = *dist.get(&cur)?;
    let mut path = Vec::new();
    while d > 0 {
        let (e, t) = edges
            .iter()
            .filter(|(f, _, t)| *f == cur && dist.get(t) == Some(&(d - 1)))
            .map(|(_, e, t)| (e.clone(), t.clone()))
            .min()
            .expect("a shortest-path successor exists");
        path.push(e);
        cur = t;
        d -= 1;
    }
    Some(path)
}

/// Exhaustive check for short paths: every event sequence up to `max_len`,
/// shortest first, each length in lexicographic order.
pub fn brute_force_path(m: &StateMachine, from: &str, to: &str, max_len: usize) -> Option<Vec<String>> {
    let events: Vec<String> = m.events().iter().map(|e| e.to_string()).collect();
    for len in 0..=max_len {
        let total = events.len().checked_pow(len as u32)?;
        for mut code in 0..total {
            let mut seq = vec![String::new(); len];
            for slot in seq.iter_mut().rev() {
                *slot = events[code % events.len()].clone();
                code /= events.len();
            }
            let mut cur = from.to_string();
            let mut ok = true;
            for e in &seq {
                match m.next_state(&cur, e) {
                    Some(n) => cur = n.to_string(),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && cur == to {
                return Some(seq);
            }
        }
    }
    None
}

/// What the reference decides for one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefStep {
    pub mode: Mode,
    pub sent: Vec<String>,
    pub handler: Option<String>,
    pub o_after: String,
    pub n_after: String,
    pub failed: bool,
}

/// Step-by-step transcription of the converter's algorithm over plain strings.
///
/// ```text
/// on event e:
///   if T_n(nState, e) undefined: reject, states unchanged
///   nState' = T_n(nState, e)
///   if nState' ∈ S_o:
///       if T_o(oState, e) = nState': send e
///       else: send the shortest original path oState → nState'   (no path: reject)
///       oState' = nState'
///   else:
///       run the new function of nState'; oState unchanged
/// ```
pub struct ReferenceConverter<'a> {
    pub original: &'a StateMachine,
    pub evolved: &'a StateMachine,
    pub o: String,
    pub n: String,
}

impl<'a> ReferenceConverter<'a> {
    pub fn new(pair: &'a ValidatedPair) -> Self {
        Self {
            original: pair.original(),
            evolved: pair.evolved(),
            o: pair.original().initial().to_string(),
            n: pair.evolved().initial().to_string(),
        }
    }

    pub fn step(&mut self, e: &str) -> RefStep {
        let reject = |o: &str, n: &str, failed| RefStep {
            mode: Mode::Rejected,
            sent: vec![],
            handler: None,
            o_after: o.to_string(),
            n_after: n.to_string(),
            failed,
        };
        let Some(target) = self.evolved.next_state(&self.n, e).map(|s| s.to_string()) else {
            return reject(&self.o, &self.n, false);
        };
        if self.original.exists_state(&target) {
            let sent = if self.original.next_state(&self.o, e).map(|s| s.as_str()) == Some(target.as_str()) {
                vec![e.to_string()]
            } else {
                match oracle_path(self.original, &self.o, &target) {
                    Some(p) => p,
                    None => return reject(&self.o, &self.n, true),
                }
            };
            self.o = target.clone();
            self.n = target.clone();
            RefStep {
                mode: Mode::Existing,
                sent,
                handler: None,
                o_after: target.clone(),
                n_after: target,
                failed: false,
            }
        } else {
            self.n = target.clone();
            RefStep {
                mode: Mode::New,
                sent: vec![],
                handler: Some(target.clone()),
                o_after: self.o.clone(),
                n_after: target,
                failed: false,
            }
        }
    }
}
