//! Guarded-command CTMCs and their transient analysis.
//!
//! Models are built in code ([`proposed_model`], [`baseline_model`]),
//! expanded into an explicit chain ([`build_explicit`]) and analysed by
//! uniformization ([`transient`]) with exact-jump simulation as a cross-check
//! ([`simulate`]). [`exp2`] runs the whole conversion-time sweep.

mod exp2;
mod explicit;
mod expr;
mod model;
mod simulate;
mod transient;

use thiserror::Error;

pub use exp2::{
    exp2, time_grid, Check, Exp2Config, Exp2Row, Exp2Table, Exp2Verdicts, Method, LOSS_ORDERING_T, NORMALIZATION_TOL,
};
pub use explicit::{build_explicit, ExplicitCtmc, Jump, StateView, MAX_STATES};
pub use expr::{konst, num, parse_rational, ratio, tt, var, BinOp, Env, EvalError, Expr, Value};
pub use model::{
    baseline_model, proposed_model, Command, Domain, Exp2Params, GuardedModel, Module, TransitionReward, Variable,
};
pub use simulate::{rng_for, simulate, simulate_at, SimulationEstimate};
pub use transient::{expected_lost, reach_probability, transient, TransientResult, DEFAULT_EPSILON};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CtmcError {
    #[error("name {0} declared twice")]
    DuplicateName(String),
    #[error("variable {0} has an empty domain")]
    EmptyDomain(String),
    #[error("initial value {value} of {variable} is outside its domain")]
    InitialOutOfDomain { variable: String, value: i64 },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("module {module} updates {variable}, which it does not own")]
    ForeignUpdate { module: String, variable: String },
    #[error("reward on label {0}, which no command uses")]
    UnknownRewardLabel(String),
    #[error("update of {0} has the wrong type")]
    UpdateType(String),
    #[error("update sets {variable} to {value}, outside its domain, from state {state}")]
    DomainOverflow { variable: String, value: i64, state: String },
    #[error("command {command} has a non-positive rate in state {state}")]
    NonPositiveRate { command: String, state: String },
    #[error("more than {0} reachable states")]
    TooManyStates(usize),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
