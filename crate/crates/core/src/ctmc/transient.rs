use super::explicit::{ExplicitCtmc, StateView};

/// Default Poisson truncation bound.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Uniformization constant is this factor times the largest exit rate.
const UNIFORM_SLACK: f64 = 1.02;

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub time: f64,
    pub distribution: Vec<f64>,
    /// Poisson mass left out by truncation; bounds the missing probability.
    pub error_bound: f64,
    /// Expected reward accumulated over `[0, time]`.
    pub cumulative_reward: f64,
    /// Number of kernel powers used.
    pub terms: usize,
}

impl TransientResult {
    pub fn mass(&self) -> f64 {
        self.distribution.iter().sum()
    }

    pub fn probability(&self, mask: &[bool]) -> f64 {
        self.distribution.iter().zip(mask).filter(|(_, m)| **m).map(|(p, _)| p).sum()
    }
}

/// One step of the uniformized kernel `P = I + Q/Λ`.
fn kernel_step(mc: &ExplicitCtmc, lambda: f64, pi: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = pi[i] * (1.0 - mc.exit_rate(i) / lambda);
    }
    for (i, &p) in pi.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for &(j, r) in mc.row(i) {
            out[j] += p * r / lambda;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Transient distribution and cumulative reward at time `t` by uniformization.
///
/// `π(t) = Σ_k w_k π₀Pᵏ` with Poisson(Λt) weights `w_k`, computed by a
/// log-space recurrence and cut once their mass reaches `1 − epsilon`. The
/// reward integral uses the same powers: `E[R(t)] = (1/Λ) Σ_k (1 − F_k) π₀Pᵏ·r`
/// where `F_k` is the Poisson distribution function.
pub fn transient(mc: &ExplicitCtmc, t: f64, epsilon: f64) -> TransientResult {
    assert!(t >= 0.0 && t.is_finite(), "time must be finite and nonnegative");
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    let n = mc.num_states();
    let mut pi = vec![0.0; n];
    pi[mc.initial()] = 1.0;
    let lambda = UNIFORM_SLACK * mc.max_exit_rate();
    if t == 0.0 || lambda == 0.0 {
        // nothing moves; only self-loop rewards accrue
        let reward = t * mc.reward_rates()[mc.initial()];
        return TransientResult {
            time: t,
            distribution: pi,
            error_bound: 0.0,
            cumulative_reward: reward,
            terms: 1,
        };
    }
    let lt = lambda * t;
    let ln_lt = lt.ln();
    let rewards = mc.reward_rates();
    // generous cap; the mass criterion stops far earlier
    let max_terms = (lt + 50.0 * lt.sqrt() + 100.0).ceil() as usize;

    let mut result = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut log_w = -lt;
    let mut cdf = 0.0;
    let mut reward_sum = 0.0;
    let mut k = 0usize;
    loop {
        let w = log_w.exp();
        cdf += w;
        if w > 0.0 {
            for (r, p) in result.iter_mut().zip(&pi) {
                *r += w * p;
            }
        }
        reward_sum += (1.0 - cdf).max(0.0) * dot(&pi, rewards);
        if cdf >= 1.0 - epsilon || k + 1 >= max_terms {
            break;
        }
        kernel_step(mc, lambda, &pi, &mut next);
        std::mem::swap(&mut pi, &mut next);
        k += 1;
        log_w += ln_lt - (k as f64).ln();
    }
    TransientResult {
        time: t,
        distribution: result,
        error_bound: (1.0 - cdf).max(0.0),
        cumulative_reward: reward_sum / lambda,
        terms: k + 1,
    }
}

/// Probability that the chain is in a state satisfying `pred` at time `t`.
pub fn reach_probability(mc: &ExplicitCtmc, pred: impl Fn(&StateView) -> bool, t: f64) -> f64 {
    transient(mc, t, DEFAULT_EPSILON).probability(&mc.mask(pred))
}

/// Expected reward accumulated over `[0, t]`.
pub fn expected_lost(mc: &ExplicitCtmc, t: f64) -> f64 {
    transient(mc, t, DEFAULT_EPSILON).cumulative_reward
}
