use std::collections::BTreeMap;
use std::fmt;
use std::ops;

use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Num(Rational64),
    Bool(bool),
}

impl Value {
    pub fn as_num(self) -> Result<Rational64, EvalError> {
        match self {
            Value::Num(n) => Ok(n),
            Value::Bool(_) => Err(EvalError::TypeMismatch("expected a number, found a boolean")),
        }
    }

    pub fn as_bool(self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err(EvalError::TypeMismatch("expected a boolean, found a number")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("type error: {0}")]
    TypeMismatch(&'static str),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

/// Guard, rate and update expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational64),
    Bool(bool),
    Var(String),
    Const(String),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

pub fn num(n: i64) -> Expr {
    Expr::Num(Rational64::from_integer(n))
}

pub fn ratio(n: i64, d: i64) -> Expr {
    Expr::Num(Rational64::new(n, d))
}

pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn konst(name: &str) -> Expr {
    Expr::Const(name.to_string())
}

pub fn tt() -> Expr {
    Expr::Bool(true)
}

impl Expr {
    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn equals(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Eq, self, rhs)
    }
    pub fn not_equals(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Ne, self, rhs)
    }
    pub fn lt(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Lt, self, rhs)
    }
    pub fn le(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Le, self, rhs)
    }
    pub fn gt(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Gt, self, rhs)
    }
    pub fn ge(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Ge, self, rhs)
    }
    pub fn and(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::And, self, rhs)
    }
    pub fn or(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Or, self, rhs)
    }
    pub fn min(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Min, self, rhs)
    }
    pub fn max(self, rhs: Expr) -> Expr {
        Self::bin(BinOp::Max, self, rhs)
    }

    /// Names of all variables mentioned.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.push(v.as_str());
            }
        });
        out
    }

    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Const(c) = e {
                out.push(c.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Not(a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    pub fn eval(&self, env: &dyn Env) -> Result<Value, EvalError> {
        Ok(match self {
            Expr::Num(n) => Value::Num(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => env.var(v).ok_or_else(|| EvalError::UnknownVariable(v.clone()))?,
            Expr::Const(c) => Value::Num(env.constant(c).ok_or_else(|| EvalError::UnknownConstant(c.clone()))?),
            Expr::Not(a) => Value::Bool(!a.eval(env)?.as_bool()?),
            Expr::Bin(op, a, b) => {
                // short-circuit so guards like `x>0 & 1/x>1` behave
                if matches!(op, BinOp::And | BinOp::Or) {
                    let l = a.eval(env)?.as_bool()?;
                    return Ok(Value::Bool(match op {
                        BinOp::And => l && b.eval(env)?.as_bool()?,
                        _ => l || b.eval(env)?.as_bool()?,
                    }));
                }
                let (l, r) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Eq => Value::Bool(l == r),
                    BinOp::Ne => Value::Bool(l != r),
                    _ => {
                        let (x, y) = (l.as_num()?, r.as_num()?);
                        match op {
                            BinOp::Add => Value::Num(x + y),
                            BinOp::Sub => Value::Num(x - y),
                            BinOp::Mul => Value::Num(x * y),
                            BinOp::Div if y == Rational64::from_integer(0) => return Err(EvalError::DivisionByZero),
                            BinOp::Div => Value::Num(x / y),
                            BinOp::Min => Value::Num(x.min(y)),
                            BinOp::Max => Value::Num(x.max(y)),
                            BinOp::Lt => Value::Bool(x < y),
                            BinOp::Le => Value::Bool(x <= y),
                            BinOp::Gt => Value::Bool(x > y),
                            BinOp::Ge => Value::Bool(x >= y),
                            BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                        }
                    }
                }
            }
        })
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, self, rhs)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Sub, self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Mul, self, rhs)
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Div, self, rhs)
    }
}

impl ops::Not for Expr {
    type Output = Expr;
    fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
}

/// Variable and constant lookup for [`Expr::eval`].
pub trait Env {
    fn var(&self, name: &str) -> Option<Value>;
    fn constant(&self, name: &str) -> Option<Rational64>;
}

/// Constants only; every variable lookup fails.
impl Env for BTreeMap<String, Rational64> {
    fn var(&self, _: &str) -> Option<Value> {
        None
    }
    fn constant(&self, name: &str) -> Option<Rational64> {
        self.get(name).copied()
    }
}

pub(crate) fn fmt_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => f.write_str(&fmt_rational(*n)),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) | Expr::Const(v) => f.write_str(v),
            Expr::Not(a) => write!(f, "!({a})"),
            Expr::Bin(BinOp::Min, a, b) => write!(f, "min({a},{b})"),
            Expr::Bin(BinOp::Max, a, b) => write!(f, "max({a},{b})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Eq => "=",
                    BinOp::Ne => "!=",
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::And => "&",
                    BinOp::Or => "|",
                    BinOp::Min | BinOp::Max => unreachable!(),
                };
                let wrap = |e: &Expr| match e {
                    Expr::Bin(o, ..) if !matches!(o, BinOp::Min | BinOp::Max) => format!("({e})"),
                    _ => e.to_string(),
                };
                write!(f, "{}{sym}{}", wrap(a), wrap(b))
            }
        }
    }
}

/// Parses `"0.25"`, `"3/4"` or `"2"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational64, String> {
    let s = s.trim();
    let bad = || format!("not a number: {s:?}");
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 15 {
        return Err(format!("too many decimals: {s:?}"));
    }
    let digits: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let r = Rational64::new(digits, 10i64.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}
