use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::Rational64;
use num_traits::ToPrimitive;

use super::expr::{Env, Value};
use super::model::{Command, Domain, GuardedModel};
use super::CtmcError;

/// Builds refuse models with more reachable states than this.
pub const MAX_STATES: usize = 1_000_000;

/// One way out of a state, self-loops included. Used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub target: usize,
    pub rate: f64,
    /// Reward paid each time the jump fires.
    pub reward: f64,
}

/// Read-only view of one state's valuation.
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    names: &'a [String],
    values: &'a [i64],
}

impl<'a> StateView<'a> {
    pub fn get(&self, name: &str) -> Option<i64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Panics if `name` is not a variable of the model.
    pub fn int(&self, name: &str) -> i64 {
        self.get(name).unwrap_or_else(|| panic!("no variable {name}"))
    }

    pub fn flag(&self, name: &str) -> bool {
        self.int(name) != 0
    }

    pub fn values(&self) -> &'a [i64] {
        self.values
    }
}

/// Reachable state space and rates of a [`GuardedModel`].
#[derive(Debug, Clone)]
pub struct ExplicitCtmc {
    variables: Vec<String>,
    states: Vec<Vec<i64>>,
    /// Off-diagonal rates per source, sorted by target.
    rows: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
    reward_rate: Vec<f64>,
    jumps: Vec<Vec<Jump>>,
    initial: usize,
}

impl ExplicitCtmc {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn state(&self, i: usize) -> StateView<'_> {
        StateView {
            names: &self.variables,
            values: &self.states[i],
        }
    }

    pub fn index_of(&self, values: &[i64]) -> Option<usize> {
        self.states.iter().position(|s| s == values)
    }

    /// Off-diagonal entries `(j, rate)` of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|(t, _)| *t == j).map_or(0.0, |(_, r)| *r)
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        self.exit[i]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().copied().fold(0.0, f64::max)
    }

    pub fn reward_rates(&self) -> &[f64] {
        &self.reward_rate
    }

    pub fn jumps(&self, i: usize) -> &[Jump] {
        &self.jumps[i]
    }

    pub fn transition_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Indicator vector of states satisfying `pred`.
    pub fn mask(&self, pred: impl Fn(&StateView) -> bool) -> Vec<bool> {
        (0..self.num_states()).map(|i| pred(&self.state(i))).collect()
    }
}

struct StateEnv<'a> {
    index: &'a HashMap<String, usize>,
    bools: &'a [bool],
    values: &'a [i64],
    constants: &'a BTreeMap<String, Rational64>,
}

impl Env for StateEnv<'_> {
    fn var(&self, name: &str) -> Option<Value> {
        let i = *self.index.get(name)?;
        Some(if self.bools[i] {
            Value::Bool(self.values[i] != 0)
        } else {
            Value::Num(Rational64::from_integer(self.values[i]))
        })
    }

    fn constant(&self, name: &str) -> Option<Rational64> {
        self.constants.get(name).copied()
    }
}

struct Compiled<'a> {
    model: &'a GuardedModel,
    names: Vec<String>,
    index: HashMap<String, usize>,
    bools: Vec<bool>,
    domains: Vec<Domain>,
    /// label → per participating module, its commands with that label
    synced: BTreeMap<&'a str, Vec<Vec<&'a Command>>>,
    reward_of: BTreeMap<&'a str, Rational64>,
}

/// A fired (possibly synchronized) command: rate, reward per firing, target.
type Outcome = (Rational64, Rational64, Vec<i64>);

impl<'a> Compiled<'a> {
    fn new(model: &'a GuardedModel) -> Self {
        let vars: Vec<_> = model.variables().collect();
        let names: Vec<String> = vars.iter().map(|v| v.name.clone()).collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut synced: BTreeMap<&str, Vec<Vec<&Command>>> = BTreeMap::new();
        for label in model.labels() {
            let per_module = model
                .modules
                .iter()
                .map(|m| m.commands.iter().filter(|c| c.label.as_deref() == Some(label)).collect::<Vec<_>>())
                .filter(|cs| !cs.is_empty())
                .collect();
            synced.insert(label, per_module);
        }
        let mut reward_of: BTreeMap<&str, Rational64> = BTreeMap::new();
        for r in &model.rewards {
            *reward_of.entry(r.label.as_str()).or_insert(Rational64::from_integer(0)) += r.value;
        }
        Self {
            model,
            bools: vars.iter().map(|v| v.domain == Domain::Bool).collect(),
            domains: vars.iter().map(|v| v.domain).collect(),
            names,
            index,
            synced,
            reward_of,
        }
    }

    fn env<'b>(&'b self, values: &'b [i64]) -> StateEnv<'b> {
        StateEnv {
            index: &self.index,
            bools: &self.bools,
            values,
            constants: &self.model.constants,
        }
    }

    fn describe(&self, values: &[i64]) -> String {
        self.names
            .iter()
            .zip(values)
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn enabled(&self, c: &Command, values: &[i64]) -> Result<bool, CtmcError> {
        Ok(c.guard.eval(&self.env(values))?.as_bool()?)
    }

    fn rate(&self, c: &Command, values: &[i64]) -> Result<Rational64, CtmcError> {
        let r = match &c.rate {
            None => Rational64::from_integer(1),
            Some(e) => e.eval(&self.env(values))?.as_num()?,
        };
        if r <= Rational64::from_integer(0) {
            return Err(CtmcError::NonPositiveRate {
                command: format!("[{}] {}", c.label.as_deref().unwrap_or(""), c.guard),
                state: self.describe(values),
            });
        }
        Ok(r)
    }

    /// Applies all updates of `cmds`, each evaluated in the source state.
    fn apply(&self, cmds: &[&Command], values: &[i64]) -> Result<Vec<i64>, CtmcError> {
        let env = self.env(values);
        let mut next = values.to_vec();
        for c in cmds {
            for (target, e) in &c.updates {
                let i = self.index[target.as_str()];
                let raw = match (self.bools[i], e.eval(&env)?) {
                    (true, Value::Bool(b)) => b as i64,
                    (false, Value::Num(n)) if n.is_integer() => n.to_integer(),
                    (true, Value::Num(_)) => return Err(CtmcError::UpdateType(target.clone())),
                    (false, _) => return Err(CtmcError::UpdateType(target.clone())),
                };
                if !self.domains[i].contains(raw) {
                    return Err(CtmcError::DomainOverflow {
                        variable: target.clone(),
                        value: raw,
                        state: self.describe(values),
                    });
                }
                next[i] = raw;
            }
        }
        Ok(next)
    }

    fn outcomes(&self, values: &[i64]) -> Result<Vec<Outcome>, CtmcError> {
        let zero = Rational64::from_integer(0);
        let mut out = Vec::new();
        for m in &self.model.modules {
            for c in m.commands.iter().filter(|c| c.label.is_none()) {
                if self.enabled(c, values)? {
                    out.push((self.rate(c, values)?, zero, self.apply(&[c], values)?));
                }
            }
        }
        for (label, per_module) in &self.synced {
            let mut enabled = Vec::with_capacity(per_module.len());
            for cs in per_module {
                let mut on = Vec::new();
                for c in cs {
                    if self.enabled(c, values)? {
                        on.push(*c);
                    }
                }
                enabled.push(on);
            }
            // a label is blocked unless every module that knows it can take part
            if enabled.iter().any(Vec::is_empty) {
                continue;
            }
            let reward = self.reward_of.get(label).copied().unwrap_or(zero);
            let mut combo = vec![0usize; enabled.len()];
            loop {
                let cmds: Vec<&Command> = combo.iter().zip(&enabled).map(|(&k, cs)| cs[k]).collect();
                let mut rate = Rational64::from_integer(1);
                for c in &cmds {
                    rate *= self.rate(c, values)?;
                }
                out.push((rate, reward, self.apply(&cmds, values)?));
                // odometer over the cartesian product
                let mut pos = 0;
                loop {
                    if pos == combo.len() {
                        break;
                    }
                    combo[pos] += 1;
                    if combo[pos] < enabled[pos].len() {
                        break;
                    }
                    combo[pos] = 0;
                    pos += 1;
                }
                if pos == combo.len() {
                    break;
                }
            }
        }
        Ok(out)
    }
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Breadth-first reachability from the initial valuation.
///
/// Synchronized commands fire jointly with the product of their rates;
/// parallel edges between the same pair of states are summed. Self-loops
/// never enter the rate matrix but still pay their rewards, both in the
/// reward-rate vector and as simulator jumps.
pub fn build_explicit(model: &GuardedModel) -> Result<ExplicitCtmc, CtmcError> {
    model.check()?;
    let comp = Compiled::new(model);
    let init: Vec<i64> = model.variables().map(|v| v.init).collect();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init];
    let mut queue = VecDeque::from([0usize]);
    let (mut rows, mut exit, mut reward_rate, mut jumps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    while let Some(i) = queue.pop_front() {
        let values = states[i].clone();
        let mut row: BTreeMap<usize, Rational64> = BTreeMap::new();
        let mut jmp: BTreeMap<(usize, Rational64), Rational64> = BTreeMap::new();
        let mut rr = Rational64::from_integer(0);
        for (rate, reward, next) in comp.outcomes(&values)? {
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    if j >= MAX_STATES {
                        return Err(CtmcError::TooManyStates(MAX_STATES));
                    }
                    index.insert(next.clone(), j);
                    states.push(next);
                    queue.push_back(j);
                    j
                }
            };
            rr += rate * reward;
            *jmp.entry((j, reward)).or_insert(Rational64::from_integer(0)) += rate;
            if j != i {
                *row.entry(j).or_insert(Rational64::from_integer(0)) += rate;
            }
        }
        // BFS pops in index order, so pushing keeps rows aligned with states
        debug_assert_eq!(rows.len(), i);
        let row: Vec<(usize, f64)> = row.into_iter().map(|(j, r)| (j, to_f64(r))).collect();
        exit.push(row.iter().map(|(_, r)| r).sum());
        rows.push(row);
        reward_rate.push(to_f64(rr));
        jumps.push(
            jmp.into_iter()
                .map(|((target, reward), rate)| Jump {
                    target,
                    rate: to_f64(rate),
                    reward: to_f64(reward),
                })
                .collect(),
        );
    }
    Ok(ExplicitCtmc {
        variables: comp.names,
        states,
        rows,
        exit,
        reward_rate,
        jumps,
        initial: 0,
    })
}

/// Convenience for tests: a one-module model from plain commands.
#[cfg(test)]
pub(crate) fn single_module(
    vars: Vec<super::model::Variable>,
    commands: Vec<Command>,
    rewards: Vec<(&str, i64)>,
) -> GuardedModel {
    GuardedModel {
        name: "test".into(),
        constants: BTreeMap::new(),
        modules: vec![super::model::Module {
            name: "M".into(),
            variables: vars,
            commands,
        }],
        reward_name: "r".into(),
        rewards: rewards
            .into_iter()
            .map(|(l, v)| super::model::TransitionReward {
                label: l.into(),
                value: Rational64::from_integer(v),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::expr::{num, tt, var};
    use super::super::model::{baseline_model, proposed_model, Exp2Params, Variable};
    use super::*;

    #[test]
    fn parallel_edges_sum() {
        let m = single_module(
            vec![Variable::boolean("b", false)],
            vec![
                Command::new(None, !var("b"), Some(num(2)), vec![("b", tt())]),
                Command::new(None, !var("b"), Some(num(3)), vec![("b", tt())]),
            ],
            vec![],
        );
        let mc = build_explicit(&m).unwrap();
        assert_eq!(mc.num_states(), 2);
        assert_eq!(mc.row(0), &[(1, 5.0)]);
        assert_eq!(mc.exit_rate(1), 0.0);
    }

    #[test]
    fn self_loops_pay_reward_but_stay_off_the_matrix() {
        let m = single_module(
            vec![Variable::boolean("b", false)],
            vec![Command::new(Some("tick"), tt(), Some(num(3)), vec![])],
            vec![("tick", 2)],
        );
        let mc = build_explicit(&m).unwrap();
        assert_eq!(mc.num_states(), 1);
        assert_eq!(mc.transition_count(), 0);
        assert_eq!(mc.reward_rates(), &[6.0]);
        assert_eq!(mc.jumps(0), &[Jump { target: 0, rate: 3.0, reward: 2.0 }]);
    }

    #[test]
    fn overflow_without_clamp_is_an_error() {
        let m = single_module(
            vec![Variable::range("x", 0, 3, 0)],
            vec![Command::new(None, tt(), None, vec![("x", var("x") + num(1))])],
            vec![],
        );
        assert!(matches!(build_explicit(&m), Err(CtmcError::DomainOverflow { value: 4, .. })));
    }

    #[test]
    fn zero_rate_is_an_error() {
        let m = single_module(
            vec![Variable::boolean("b", false)],
            vec![Command::new(None, tt(), Some(num(0)), vec![("b", tt())])],
            vec![],
        );
        assert!(matches!(build_explicit(&m), Err(CtmcError::NonPositiveRate { .. })));
    }

    #[test]
    fn proposed_sizes_and_initial() {
        let mc = build_explicit(&proposed_model(&Exp2Params::default())).unwrap();
        assert!(mc.num_states() <= 3200);
        assert_eq!(mc.num_states(), 1110);
        let s0 = mc.state(mc.initial());
        assert!(!s0.flag("arrived") && !s0.flag("emb_controlled") && !s0.flag("lost"));
        assert_eq!((s0.int("conv_st"), s0.int("emb_st")), (1, 1));
    }

    #[test]
    fn arrived_states_have_control_edge() {
        let p = Exp2Params::default();
        let mc = build_explicit(&proposed_model(&p)).unwrap();
        for i in 0..mc.num_states() {
            let s = mc.state(i);
            if !s.flag("arrived") {
                continue;
            }
            // [control] clears `arrived` at the converter's rate (times 1 from the embedded side)
            let to_cleared: f64 = mc
                .row(i)
                .iter()
                .filter(|(j, _)| !mc.state(*j).flag("arrived"))
                .map(|(_, r)| r)
                .sum();
            assert_eq!(to_cleared, 4.0, "state {:?}", s.values());
            // busy embedded side: the control edge sets lost
            if s.flag("emb_controlled") {
                assert!(mc.row(i).iter().any(|(j, _)| mc.state(*j).flag("lost") && !mc.state(*j).flag("arrived")));
            }
        }
    }

    #[test]
    fn baseline_progress_is_monotone() {
        let mc = build_explicit(&baseline_model(&Exp2Params::default())).unwrap();
        assert!(mc.num_states() <= 80);
        for i in 0..mc.num_states() {
            for &(j, _) in mc.row(i) {
                assert!(mc.state(j).int("emb_st") >= mc.state(i).int("emb_st"));
            }
        }
        // top level keeps cycling
        let top: Vec<_> = (0..mc.num_states()).filter(|&i| mc.state(i).int("emb_st") == 20).collect();
        assert!(!top.is_empty() && top.iter().all(|&i| mc.exit_rate(i) > 0.0));
    }
}
