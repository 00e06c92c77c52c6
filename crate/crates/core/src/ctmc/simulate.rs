use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::explicit::{ExplicitCtmc, StateView};

/// Monte Carlo estimates at one time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationEstimate {
    pub time: f64,
    pub runs: usize,
    /// Fraction of runs in a target state at `time`.
    pub reach_mean: f64,
    pub reach_se: f64,
    pub reward_mean: f64,
    pub reward_se: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// Mean and standard error of the mean.
    fn finish(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let mean = self.sum / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (mean, (var / nf).sqrt())
    }
}

/// Random stream for (`seed`, `stream`): same pair, same numbers.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact-jump simulation observed at several times along each run.
///
/// Each run starts in the initial state, holds for an exponential time with
/// the total outgoing rate (self-loops included), then picks a jump in
/// proportion to its rate and collects its reward. `times` need not be
/// sorted. Results come back in the order of `times`.
pub fn simulate_at(
    mc: &ExplicitCtmc,
    times: &[f64],
    runs: usize,
    rng: &mut ChaCha8Rng,
    target: &[bool],
) -> Vec<SimulationEstimate> {
    assert!(runs >= 1, "need at least one run");
    assert_eq!(target.len(), mc.num_states());
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let totals: Vec<f64> = (0..mc.num_states())
        .map(|i| mc.jumps(i).iter().map(|j| j.rate).sum())
        .collect();
    let mut reach = vec![Moments::default(); times.len()];
    let mut reward = vec![Moments::default(); times.len()];

    for _ in 0..runs {
        let mut state = mc.initial();
        let mut now = 0.0;
        let mut collected = 0.0;
        let mut pending = order.iter().peekable();
        while pending.peek().is_some() {
            let total = totals[state];
            let next_jump = if total > 0.0 {
                let hold: f64 = rng.sample(Exp1);
                now + hold / total
            } else {
                f64::INFINITY
            };
            // observation times falling before the jump see the current state
            while let Some(&&k) = pending.peek() {
                if times[k] >= next_jump {
                    break;
                }
                reach[k].push(if target[state] { 1.0 } else { 0.0 });
                reward[k].push(collected);
                pending.next();
            }
            if next_jump.is_infinite() {
                break;
            }
            now = next_jump;
            let mut u = rng.random::<f64>() * total;
            let jumps = mc.jumps(state);
            let mut chosen = jumps[jumps.len() - 1];
            for j in jumps {
                if u < j.rate {
                    chosen = *j;
                    break;
                }
                u -= j.rate;
            }
            collected += chosen.reward;
            state = chosen.target;
        }
    }

    times
        .iter()
        .enumerate()
        .map(|(k, &time)| {
            let (reach_mean, reach_se) = reach[k].finish(runs);
            let (reward_mean, reward_se) = reward[k].finish(runs);
            SimulationEstimate {
                time,
                runs,
                reach_mean,
                reach_se,
                reward_mean,
                reward_se,
            }
        })
        .collect()
}

/// Single-time estimate of reach probability and cumulative reward.
pub fn simulate(
    mc: &ExplicitCtmc,
    t: f64,
    runs: usize,
    seed: u64,
    pred: impl Fn(&StateView) -> bool,
) -> SimulationEstimate {
    let mask = mc.mask(pred);
    simulate_at(mc, &[t], runs, &mut rng_for(seed, 0), &mask)[0]
}

#[cfg(test)]
mod tests {
    use super::super::expr::{num, tt, var};
    use super::super::explicit::{build_explicit, single_module};
    use super::super::model::{Command, Variable};
    use super::*;

    fn birth(rate: i64) -> ExplicitCtmc {
        build_explicit(&single_module(
            vec![Variable::boolean("b", false)],
            vec![Command::new(Some("go"), !var("b"), Some(num(rate)), vec![("b", tt())])],
            vec![("go", 1)],
        ))
        .unwrap()
    }

    #[test]
    fn birth_chain_matches_closed_form() {
        let mc = birth(1);
        let est = simulate(&mc, 0.7, 50_000, 7, |s| s.flag("b"));
        let exact = 1.0 - (-0.7f64).exp();
        assert!((est.reach_mean - exact).abs() <= 3.0 * est.reach_se, "{est:?} vs {exact}");
        assert_eq!(est.reach_mean, est.reward_mean);
    }

    #[test]
    fn absorbing_start_sits() {
        let mc = build_explicit(&single_module(
            vec![Variable::boolean("b", false)],
            vec![Command::new(None, var("b"), None, vec![("b", tt())])],
            vec![],
        ))
        .unwrap();
        let est = simulate(&mc, 5.0, 100, 1, |s| s.flag("b"));
        assert_eq!((est.reach_mean, est.reward_mean, est.reach_se), (0.0, 0.0, 0.0));
    }

    #[test]
    fn same_seed_same_numbers() {
        let mc = birth(3);
        let a = simulate(&mc, 0.2, 1000, 99, |s| s.flag("b"));
        let b = simulate(&mc, 0.2, 1000, 99, |s| s.flag("b"));
        assert_eq!(a, b);
        let c = simulate(&mc, 0.2, 1000, 100, |s| s.flag("b"));
        assert_ne!(a, c);
    }

    #[test]
    fn unsorted_times_come_back_in_order() {
        let mc = birth(1);
        let mask = mc.mask(|s| s.flag("b"));
        let est = simulate_at(&mc, &[2.0, 0.0, 1.0], 2000, &mut rng_for(5, 3), &mask);
        assert_eq!(est.iter().map(|e| e.time).collect::<Vec<_>>(), vec![2.0, 0.0, 1.0]);
        assert_eq!(est[1].reach_mean, 0.0);
        assert!(est[0].reach_mean >= est[2].reach_mean);
    }
}
