use std::fmt;
use std::io;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::explicit::{build_explicit, ExplicitCtmc};
use super::model::{baseline_model, proposed_model, Exp2Params, GuardedModel};
use super::simulate::{rng_for, simulate_at};
use super::transient::{transient, DEFAULT_EPSILON};
use super::CtmcError;

/// Loss ordering is checked at this horizon.
pub const LOSS_ORDERING_T: f64 = 100.0;

/// Slack for comparisons between analytic values.
const ORDER_TOL: f64 = 1e-9;

pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Uniformization,
    Simulation,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2Row {
    pub model: String,
    /// Empty for the baseline.
    pub conv_mean_s: Option<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub reach_prob: f64,
    pub expected_lost: f64,
    /// Simulation rows only.
    pub reach_se: Option<f64>,
    pub lost_se: Option<f64>,
    pub method: Method,
    /// Total transient mass; analytic rows built in this process only.
    #[serde(skip)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Exp2Config {
    /// Mean conversion times in seconds, one proposed model each.
    pub conv_means: Vec<Rational64>,
    pub times: Vec<f64>,
    /// Simulation runs per model; 0 skips simulation.
    pub runs: usize,
    pub seed: u64,
    pub base: Exp2Params,
    pub epsilon: f64,
    pub include_baseline: bool,
}

impl Default for Exp2Config {
    fn default() -> Self {
        Self {
            conv_means: [(1, 4), (1, 2), (3, 4), (1, 1)]
                .into_iter()
                .map(|(n, d)| Rational64::new(n, d))
                .collect(),
            times: time_grid(200.0, 5.0),
            runs: 100_000,
            seed: 2024,
            base: Exp2Params::default(),
            epsilon: DEFAULT_EPSILON,
            include_baseline: true,
        }
    }
}

/// `0, step, 2·step, …` up to and including `t_max`.
pub fn time_grid(t_max: f64, step: f64) -> Vec<f64> {
    assert!(t_max >= 0.0 && step > 0.0, "need t_max ≥ 0 and step > 0");
    let n = (t_max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

struct Subject {
    name: &'static str,
    conv_mean_s: Option<f64>,
    model: GuardedModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Table {
    pub rows: Vec<Exp2Row>,
    /// Simulation runs behind the stochastic rows, if known.
    pub runs: Option<usize>,
    /// Mean time of the embedded action; converters faster than this must lose less.
    pub action_mean_s: f64,
}

/// Runs the conversion-time sweep: every model, every time, both methods.
///
/// Analytic cells run in parallel; each model's simulations draw from
/// their own stream `(seed, model index)` and are observed at every grid
/// time, so results do not depend on thread scheduling.
pub fn exp2(cfg: &Exp2Config) -> Result<Exp2Table, CtmcError> {
    cfg.base.check()?;
    let mut subjects = Vec::new();
    if cfg.include_baseline {
        subjects.push(Subject {
            name: "baseline",
            conv_mean_s: None,
            model: baseline_model(&cfg.base),
        });
    }
    for &mean in &cfg.conv_means {
        let p = Exp2Params {
            conv_internal_process: mean.recip(),
            ..cfg.base
        };
        p.check()?;
        subjects.push(Subject {
            name: "proposed",
            conv_mean_s: mean.to_f64(),
            model: proposed_model(&p),
        });
    }
    let chains: Vec<ExplicitCtmc> = subjects
        .par_iter()
        .map(|s| build_explicit(&s.model))
        .collect::<Result<_, _>>()?;
    let st_max = cfg.base.st_max;
    let masks: Vec<Vec<bool>> = chains.iter().map(|mc| mc.mask(|s| s.int("emb_st") == st_max)).collect();

    let cells: Vec<(usize, usize)> = (0..subjects.len())
        .flat_map(|m| (0..cfg.times.len()).map(move |k| (m, k)))
        .collect();
    let analytic: Vec<Exp2Row> = cells
        .par_iter()
        .map(|&(m, k)| {
            let r = transient(&chains[m], cfg.times[k], cfg.epsilon);
            Exp2Row {
                model: subjects[m].name.to_string(),
                conv_mean_s: subjects[m].conv_mean_s,
                t: cfg.times[k],
                reach_prob: r.probability(&masks[m]),
                expected_lost: r.cumulative_reward,
                reach_se: None,
                lost_se: None,
                method: Method::Uniformization,
                mass: Some(r.mass()),
            }
        })
        .collect();
    let simulated: Vec<Vec<Exp2Row>> = if cfg.runs == 0 {
        vec![Vec::new(); subjects.len()]
    } else {
        (0..subjects.len())
            .into_par_iter()
            .map(|m| {
                let mut rng = rng_for(cfg.seed, m as u64);
                simulate_at(&chains[m], &cfg.times, cfg.runs, &mut rng, &masks[m])
                    .into_iter()
                    .map(|e| Exp2Row {
                        model: subjects[m].name.to_string(),
                        conv_mean_s: subjects[m].conv_mean_s,
                        t: e.time,
                        reach_prob: e.reach_mean,
                        expected_lost: e.reward_mean,
                        reach_se: Some(e.reach_se),
                        lost_se: Some(e.reward_se),
                        method: Method::Simulation,
                        mass: None,
                    })
                    .collect()
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(analytic.len() * 2);
    for (i, row) in analytic.into_iter().enumerate() {
        let (m, k) = cells[i];
        rows.push(row);
        if let Some(s) = simulated[m].get(k) {
            rows.push(s.clone());
        }
    }
    Ok(Exp2Table {
        rows,
        runs: (cfg.runs > 0).then_some(cfg.runs),
        action_mean_s: cfg.base.emb_internal_process.recip().to_f64().unwrap_or(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// False when the table has nothing to check (e.g. no simulation rows).
    pub applicable: bool,
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            applicable: false,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.applicable {
            write!(f, "{} N/A", self.name)
        } else if self.passed() {
            write!(f, "{} OK", self.name)
        } else {
            write!(f, "{} FAIL ({})", self.name, self.failures.join("; "))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Verdicts {
    pub agreement: Check,
    pub normalization: Check,
    pub reach_monotone: Check,
    pub lost_monotone: Check,
    pub dominance: Check,
    pub loss_ordering: Check,
}

impl Exp2Verdicts {
    pub fn checks(&self) -> [&Check; 6] {
        [
            &self.agreement,
            &self.normalization,
            &self.reach_monotone,
            &self.lost_monotone,
            &self.dominance,
            &self.loss_ordering,
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed())
    }

    pub fn summary_line(&self) -> String {
        self.checks().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" | ")
    }
}

fn label(row: &Exp2Row) -> String {
    match row.conv_mean_s {
        Some(c) => format!("{} conv={c}", row.model),
        None => row.model.clone(),
    }
}

fn same_cell(a: &Exp2Row, b: &Exp2Row) -> bool {
    a.model == b.model && a.conv_mean_s == b.conv_mean_s && a.t == b.t
}

impl Exp2Table {
    pub fn analytic(&self) -> impl Iterator<Item = &Exp2Row> {
        self.rows.iter().filter(|r| r.method == Method::Uniformization)
    }

    pub fn simulated(&self) -> impl Iterator<Item = &Exp2Row> {
        self.rows.iter().filter(|r| r.method == Method::Simulation)
    }

    /// Analytic row for (`model`, `conv_mean_s`, `t`).
    pub fn find(&self, model: &str, conv_mean_s: Option<f64>, t: f64) -> Option<&Exp2Row> {
        self.analytic()
            .find(|r| r.model == model && r.conv_mean_s == conv_mean_s && r.t == t)
    }

    /// Distinct model curves, in table order.
    fn curves(&self) -> Vec<(String, Option<f64>)> {
        let mut out: Vec<(String, Option<f64>)> = Vec::new();
        for r in self.analytic() {
            if !out.iter().any(|(m, c)| *m == r.model && *c == r.conv_mean_s) {
                out.push((r.model.clone(), r.conv_mean_s));
            }
        }
        out
    }

    fn curve(&self, model: &str, conv: Option<f64>) -> Vec<&Exp2Row> {
        let mut rows: Vec<&Exp2Row> = self
            .analytic()
            .filter(|r| r.model == model && r.conv_mean_s == conv)
            .collect();
        rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        rows
    }

    /// Standard error used for the reach comparison.
    ///
    /// The sample error is zero whenever no run (or every run) hit the
    /// target, which happens for tiny probabilities; the binomial error at the
    /// analytic value is the floor in that case.
    fn reach_se(&self, analytic: f64, sim: &Exp2Row) -> f64 {
        let sample = sim.reach_se.unwrap_or(0.0);
        match self.runs {
            Some(n) => sample.max((analytic * (1.0 - analytic)).max(0.0).sqrt() / (n as f64).sqrt()),
            None => sample,
        }
    }

    pub fn verdicts(&self) -> Exp2Verdicts {
        let mut agreement = Check::new("AGREEMENT");
        for s in self.simulated() {
            agreement.applicable = true;
            let Some(a) = self.analytic().find(|a| same_cell(a, s)) else {
                agreement.failures.push(format!("{} T={}: no analytic row", label(s), s.t));
                continue;
            };
            let d_reach = (a.reach_prob - s.reach_prob).abs();
            let se = self.reach_se(a.reach_prob, s);
            if d_reach > 3.0 * se + 1e-12 {
                agreement.failures.push(format!(
                    "{} T={} reach |{:.6}-{:.6}|>3·{:.2e}",
                    label(s),
                    s.t,
                    a.reach_prob,
                    s.reach_prob,
                    se
                ));
            }
            let d_lost = (a.expected_lost - s.expected_lost).abs();
            let se = s.lost_se.unwrap_or(0.0);
            if d_lost > 3.0 * se + 1e-12 {
                agreement.failures.push(format!(
                    "{} T={} lost |{:.4}-{:.4}|>3·{:.2e}",
                    label(s),
                    s.t,
                    a.expected_lost,
                    s.expected_lost,
                    se
                ));
            }
        }

        let mut normalization = Check::new("NORMALIZATION");
        for a in self.analytic() {
            if let Some(mass) = a.mass {
                normalization.applicable = true;
                if (mass - 1.0).abs() > NORMALIZATION_TOL {
                    normalization.failures.push(format!("{} T={} mass {mass}", label(a), a.t));
                }
            }
        }

        let mut reach_monotone = Check::new("REACH MONOTONE");
        let mut lost_monotone = Check::new("LOST MONOTONE");
        for (m, c) in self.curves() {
            let curve = self.curve(&m, c);
            for w in curve.windows(2) {
                reach_monotone.applicable = true;
                lost_monotone.applicable = true;
                if w[1].reach_prob + ORDER_TOL < w[0].reach_prob {
                    reach_monotone.failures.push(format!("{} T={}→{}", label(w[0]), w[0].t, w[1].t));
                }
                if w[1].expected_lost + ORDER_TOL < w[0].expected_lost {
                    lost_monotone.failures.push(format!("{} T={}→{}", label(w[0]), w[0].t, w[1].t));
                }
            }
        }

        let mut dominance = Check::new("DOMINANCE");
        let mut convs: Vec<f64> = self.curves().into_iter().filter_map(|(m, c)| (m == "proposed").then_some(c).flatten()).collect();
        convs.sort_by(f64::total_cmp);
        for pair in convs.windows(2) {
            let (fast, slow) = (self.curve("proposed", Some(pair[0])), self.curve("proposed", Some(pair[1])));
            for f in &fast {
                let Some(s) = slow.iter().find(|s| s.t == f.t) else { continue };
                dominance.applicable = true;
                if s.reach_prob > f.reach_prob + ORDER_TOL {
                    dominance.failures.push(format!("reach T={}: conv={} above conv={}", f.t, pair[1], pair[0]));
                }
                if s.expected_lost + ORDER_TOL < f.expected_lost {
                    dominance.failures.push(format!("lost T={}: conv={} below conv={}", f.t, pair[1], pair[0]));
                }
            }
        }

        let mut loss_ordering = Check::new("LOSS ORDERING");
        if let Some(base) = self.find("baseline", None, LOSS_ORDERING_T) {
            for &c in convs.iter().filter(|&&c| c < self.action_mean_s) {
                let Some(p) = self.find("proposed", Some(c), LOSS_ORDERING_T) else { continue };
                loss_ordering.applicable = true;
                if p.expected_lost >= base.expected_lost {
                    loss_ordering.failures.push(format!(
                        "conv={c}: {:.4} >= baseline {:.4} at T={LOSS_ORDERING_T}",
                        p.expected_lost, base.expected_lost
                    ));
                }
            }
        }

        Exp2Verdicts {
            agreement,
            normalization,
            reach_monotone,
            lost_monotone,
            dominance,
            loss_ordering,
        }
    }

    pub fn write_csv(&self, out: impl io::Write) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`Exp2Table::write_csv`]; run counts and masses are not stored.
    pub fn read_csv(input: impl io::Read) -> Result<Self, csv::Error> {
        let rows = csv::Reader::from_reader(input)
            .deserialize()
            .collect::<Result<Vec<Exp2Row>, _>>()?;
        Ok(Self {
            rows,
            runs: None,
            action_mean_s: 1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid() {
        assert_eq!(time_grid(0.0, 5.0), vec![0.0]);
        assert_eq!(time_grid(20.0, 5.0), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(time_grid(0.3, 0.1).len(), 4);
    }

    #[test]
    fn single_cell_is_zero() {
        let cfg = Exp2Config {
            conv_means: vec![Rational64::new(1, 4)],
            times: vec![0.0],
            runs: 0,
            include_baseline: false,
            ..Exp2Config::default()
        };
        let t = exp2(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].reach_prob, t.rows[0].expected_lost), (0.0, 0.0));
        assert_eq!(t.rows[0].conv_mean_s, Some(0.25));
    }

    #[test]
    fn small_sweep_csv_roundtrip_and_checks() {
        let cfg = Exp2Config {
            times: vec![0.0, 30.0, 60.0],
            runs: 2000,
            ..Exp2Config::default()
        };
        let table = exp2(&cfg).unwrap();
        assert_eq!(table.rows.len(), 5 * 3 * 2);
        let v = table.verdicts();
        assert!(v.reach_monotone.passed() && v.lost_monotone.passed() && v.dominance.passed(), "{}", v.summary_line());
        assert!(v.normalization.passed());
        assert!(!v.loss_ordering.applicable);

        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("model,conv_mean_s,T,reach_prob,expected_lost,reach_se,lost_se,method\n"));
        assert!(text.lines().nth(1).unwrap().starts_with("baseline,,0.0,0.0,0.0,,,uniformization"));
        let back = Exp2Table::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.rows.len(), table.rows.len());
        assert_eq!(back.rows[3].reach_prob, table.rows[3].reach_prob);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = Exp2Config {
            conv_means: vec![Rational64::new(1, 2)],
            times: vec![10.0],
            runs: 500,
            ..Exp2Config::default()
        };
        assert_eq!(exp2(&cfg).unwrap(), exp2(&cfg).unwrap());
    }
}
