use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;

use super::expr::{fmt_rational, konst, num, tt, var, Expr};
use super::CtmcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Bool,
    /// Inclusive integer range.
    Range { lo: i64, hi: i64 },
}

impl Domain {
    pub fn contains(&self, v: i64) -> bool {
        match *self {
            Domain::Bool => v == 0 || v == 1,
            Domain::Range { lo, hi } => (lo..=hi).contains(&v),
        }
    }

    pub fn size(&self) -> u64 {
        match *self {
            Domain::Bool => 2,
            Domain::Range { lo, hi } => (hi - lo + 1).max(0) as u64,
        }
    }
}

/// Booleans are stored as 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
    pub init: i64,
}

impl Variable {
    pub fn boolean(name: &str, init: bool) -> Self {
        Self {
            name: name.to_string(),
            domain: Domain::Bool,
            init: init as i64,
        }
    }

    pub fn range(name: &str, lo: i64, hi: i64, init: i64) -> Self {
        Self {
            name: name.to_string(),
            domain: Domain::Range { lo, hi },
            init,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub label: Option<String>,
    pub guard: Expr,
    /// `None` means rate 1.
    pub rate: Option<Expr>,
    pub updates: Vec<(String, Expr)>,
}

impl Command {
    pub fn new(label: Option<&str>, guard: Expr, rate: Option<Expr>, updates: Vec<(&str, Expr)>) -> Self {
        Self {
            label: label.map(str::to_string),
            guard,
            rate,
            updates: updates.into_iter().map(|(v, e)| (v.to_string(), e)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub name: String,
    pub variables: Vec<Variable>,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReward {
    pub label: String,
    pub value: Rational64,
}

/// A guarded-command CTMC: modules run in parallel and synchronize on
/// shared labels, multiplying their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardedModel {
    pub name: String,
    pub constants: BTreeMap<String, Rational64>,
    pub modules: Vec<Module>,
    pub reward_name: String,
    pub rewards: Vec<TransitionReward>,
}

impl GuardedModel {
    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.modules.iter().flat_map(|m| m.variables.iter())
    }

    /// Labels mentioned by any command, sorted.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.modules
            .iter()
            .flat_map(|m| m.commands.iter().filter_map(|c| c.label.as_deref()))
            .collect()
    }

    /// Static checks: names resolve, updates are local, initial values in domain.
    pub fn check(&self) -> Result<(), CtmcError> {
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for m in &self.modules {
            for v in &m.variables {
                if owner.insert(&v.name, &m.name).is_some() || self.constants.contains_key(&v.name) {
                    return Err(CtmcError::DuplicateName(v.name.clone()));
                }
                if v.domain.size() == 0 {
                    return Err(CtmcError::EmptyDomain(v.name.clone()));
                }
                if !v.domain.contains(v.init) {
                    return Err(CtmcError::InitialOutOfDomain {
                        variable: v.name.clone(),
                        value: v.init,
                    });
                }
            }
        }
        for m in &self.modules {
            for c in &m.commands {
                let exprs = std::iter::once(&c.guard)
                    .chain(c.rate.as_ref())
                    .chain(c.updates.iter().map(|(_, e)| e));
                for e in exprs {
                    if let Some(v) = e.variables().into_iter().find(|v| !owner.contains_key(v)) {
                        return Err(CtmcError::UnknownVariable(v.to_string()));
                    }
                    if let Some(k) = e.constants().into_iter().find(|k| !self.constants.contains_key(*k)) {
                        return Err(CtmcError::UnknownConstant(k.to_string()));
                    }
                }
                for (target, _) in &c.updates {
                    match owner.get(target.as_str()) {
                        None => return Err(CtmcError::UnknownVariable(target.clone())),
                        Some(o) if *o != m.name => {
                            return Err(CtmcError::ForeignUpdate {
                                module: m.name.clone(),
                                variable: target.clone(),
                            })
                        }
                        _ => {}
                    }
                }
            }
        }
        let labels = self.labels();
        if let Some(r) = self.rewards.iter().find(|r| !labels.contains(r.label.as_str())) {
            return Err(CtmcError::UnknownRewardLabel(r.label.clone()));
        }
        Ok(())
    }

    /// Upper bound on the state count: product of domain sizes.
    pub fn state_bound(&self) -> u64 {
        self.variables().map(|v| v.domain.size()).product()
    }
}

impl fmt::Display for GuardedModel {
    /// PRISM-like listing, for inspection.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ctmc // {}", self.name)?;
        for (k, v) in &self.constants {
            writeln!(f, "const {k} = {};", fmt_rational(*v))?;
        }
        for m in &self.modules {
            writeln!(f, "\nmodule {}", m.name)?;
            for v in &m.variables {
                match v.domain {
                    Domain::Bool => writeln!(f, "\t{} : bool init {};", v.name, v.init != 0)?,
                    Domain::Range { lo, hi } => writeln!(f, "\t{} : [{lo}..{hi}] init {};", v.name, v.init)?,
                }
            }
            for c in &m.commands {
                let upd: Vec<String> = c.updates.iter().map(|(v, e)| format!("({v}'={e})")).collect();
                let upd = if upd.is_empty() { "true".to_string() } else { upd.join("&") };
                let rate = c.rate.as_ref().map(|r| format!("{r} : ")).unwrap_or_default();
                writeln!(f, "\t[{}] {} -> {rate}{upd};", c.label.as_deref().unwrap_or(""), c.guard)?;
            }
            writeln!(f, "endmodule")?;
        }
        writeln!(f, "\nrewards \"{}\"", self.reward_name)?;
        for r in &self.rewards {
            writeln!(f, "\t[{}] true : {};", r.label, fmt_rational(r.value))?;
        }
        writeln!(f, "endrewards")
    }
}

/// Constants of the conversion-time experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp2Params {
    pub st_max: i64,
    pub event_arrive: Rational64,
    pub emb_internal_process: Rational64,
    pub conv_internal_process: Rational64,
    /// The embedded `[emb_lost]` command has no rate of its own; 1 unless overridden.
    pub emb_lost_rate: Rational64,
}

impl Default for Exp2Params {
    fn default() -> Self {
        Self {
            st_max: 20,
            event_arrive: Rational64::new(1, 2),
            emb_internal_process: Rational64::from_integer(1),
            conv_internal_process: Rational64::from_integer(4),
            emb_lost_rate: Rational64::from_integer(1),
        }
    }
}

impl Exp2Params {
    /// Defaults with the converter's mean conversion time set to `mean_s` seconds.
    pub fn with_conv_mean(mean_s: Rational64) -> Self {
        Self {
            conv_internal_process: mean_s.recip(),
            ..Self::default()
        }
    }

    pub fn conv_mean(&self) -> Rational64 {
        self.conv_internal_process.recip()
    }

    pub fn check(&self) -> Result<(), CtmcError> {
        let zero = Rational64::from_integer(0);
        for (name, r) in [
            ("event_arrive", self.event_arrive),
            ("emb_internal_process", self.emb_internal_process),
            ("conv_internal_process", self.conv_internal_process),
            ("emb_lost_rate", self.emb_lost_rate),
        ] {
            if r <= zero {
                return Err(CtmcError::BadParameter(format!("{name} must be positive")));
            }
        }
        if self.st_max < 1 {
            return Err(CtmcError::BadParameter("st_max must be at least 1".into()));
        }
        Ok(())
    }

    fn constants(&self, with_conv: bool) -> BTreeMap<String, Rational64> {
        let mut c = BTreeMap::from([
            ("st_max".to_string(), Rational64::from_integer(self.st_max)),
            ("event_arrive".to_string(), self.event_arrive),
            ("emb_internal_process".to_string(), self.emb_internal_process),
            ("emb_lost_rate".to_string(), self.emb_lost_rate),
        ]);
        if with_conv {
            c.insert("conv_internal_process".to_string(), self.conv_internal_process);
        }
        c
    }
}

fn is_true(v: &str) -> Expr {
    var(v).equals(tt())
}

fn is_false(v: &str) -> Expr {
    var(v).equals(Expr::Bool(false))
}

fn bump(v: &str) -> Expr {
    (var(v) + num(1)).min(konst("st_max"))
}

fn rate_unless_one(r: Rational64, name: &str) -> Option<Expr> {
    (r != Rational64::from_integer(1)).then(|| konst(name))
}

/// The embedded system, shared by both models; `arrival` is the label
/// that makes it controlled.
fn embedded_module(p: &Exp2Params, control: Vec<Command>) -> Module {
    let mut commands = control;
    commands.push(Command::new(
        Some("emb_lost"),
        is_true("lost"),
        rate_unless_one(p.emb_lost_rate, "emb_lost_rate"),
        vec![("lost", Expr::Bool(false))],
    ));
    commands.push(Command::new(
        Some("process"),
        is_true("emb_controlled"),
        Some(konst("emb_internal_process")),
        vec![
            ("emb_st", bump("emb_st")),
            ("emb_controlled", Expr::Bool(false)),
            ("lost", Expr::Bool(false)),
        ],
    ));
    Module {
        name: "EmbeddedSystem".into(),
        variables: vec![
            Variable::boolean("emb_controlled", false),
            Variable::boolean("lost", false),
            Variable::range("emb_st", 1, p.st_max, 1),
        ],
        commands,
    }
}

/// Converter in front of the embedded system.
pub fn proposed_model(p: &Exp2Params) -> GuardedModel {
    let converter = Module {
        name: "Converter".into(),
        variables: vec![
            Variable::boolean("arrived", false),
            Variable::range("conv_st", 1, p.st_max, 1),
        ],
        commands: vec![
            Command::new(
                Some("arrived"),
                is_false("arrived"),
                Some(konst("event_arrive")),
                vec![("arrived", tt())],
            ),
            Command::new(
                Some("conv_lost"),
                is_true("arrived"),
                Some(konst("event_arrive")),
                vec![("arrived", tt())],
            ),
            Command::new(
                Some("control"),
                var("arrived"),
                Some(konst("conv_internal_process")),
                vec![("conv_st", bump("conv_st")), ("arrived", Expr::Bool(false))],
            ),
        ],
    };
    let embedded = embedded_module(
        p,
        vec![
            Command::new(Some("control"), is_false("emb_controlled"), None, vec![("emb_controlled", tt())]),
            Command::new(Some("control"), is_true("emb_controlled"), None, vec![("lost", tt())]),
        ],
    );
    GuardedModel {
        name: "proposed".into(),
        constants: p.constants(true),
        modules: vec![converter, embedded],
        reward_name: "lost".into(),
        rewards: vec![
            TransitionReward {
                label: "conv_lost".into(),
                value: Rational64::from_integer(1),
            },
            TransitionReward {
                label: "emb_lost".into(),
                value: Rational64::from_integer(1),
            },
        ],
    }
}

/// The embedded system alone: events arrive directly, and an arrival while
/// it is still busy counts as lost.
pub fn baseline_model(p: &Exp2Params) -> GuardedModel {
    let embedded = embedded_module(
        p,
        vec![
            Command::new(
                Some("arrive"),
                is_false("emb_controlled"),
                Some(konst("event_arrive")),
                vec![("emb_controlled", tt())],
            ),
            Command::new(
                Some("arrive_lost"),
                is_true("emb_controlled"),
                Some(konst("event_arrive")),
                vec![("lost", tt())],
            ),
        ],
    );
    GuardedModel {
        name: "baseline".into(),
        constants: p.constants(false),
        modules: vec![embedded],
        reward_name: "lost".into(),
        rewards: vec![TransitionReward {
            label: "arrive_lost".into(),
            value: Rational64::from_integer(1),
        }],
    }
}
