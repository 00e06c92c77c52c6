//! Controller scripts.
//!
//! ```text
//! # press CLEAN, then SPOT one second later
//! at 0 clean
//! at 1000 spot
//! advance 5000
//! ```

use thiserror::Error;

use crate::statechart::EventName;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptStep {
    /// The controller sends `event` at `at_ms`.
    At { at_ms: u64, event: EventName },
    /// Let time pass until `to_ms`.
    Advance { to_ms: u64 },
}

impl ScriptStep {
    pub fn time_ms(&self) -> u64 {
        match self {
            ScriptStep::At { at_ms, .. } => *at_ms,
            ScriptStep::Advance { to_ms } => *to_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioScript {
    steps: Vec<ScriptStep>,
}

impl ScenarioScript {
    /// Fails if step times decrease.
    pub fn new(steps: Vec<ScriptStep>) -> Result<Self, ScriptError> {
        for (i, pair) in steps.windows(2).enumerate() {
            if pair[1].time_ms() < pair[0].time_ms() {
                return Err(ScriptError {
                    line: i + 2,
                    message: format!("time {} is before {}", pair[1].time_ms(), pair[0].time_ms()),
                });
            }
        }
        Ok(Self { steps })
    }

    /// Controller events at the given times.
    pub fn events(events: &[(u64, &str)]) -> Result<Self, ScriptError> {
        let steps = events
            .iter()
            .enumerate()
            .map(|(i, &(at_ms, name))| {
                EventName::new(name)
                    .map(|event| ScriptStep::At { at_ms, event })
                    .map_err(|e| ScriptError {
                        line: i + 1,
                        message: e.to_string(),
                    })
            })
            .collect::<Result<_, _>>()?;
        Self::new(steps)
    }

    pub fn then_advance(mut self, to_ms: u64) -> Result<Self, ScriptError> {
        self.steps.push(ScriptStep::Advance { to_ms });
        Self::new(self.steps)
    }

    pub fn steps(&self) -> &[ScriptStep] {
        &self.steps
    }

    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut steps = Vec::new();
        let mut last = 0u64;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ScriptError { line, message };
            let words: Vec<&str> = content.split_whitespace().collect();
            let parse_ms = |w: &str| w.parse::<u64>().map_err(|_| err(format!("bad time {w:?}")));
            let step = match words.as_slice() {
                ["at", ms, name] => ScriptStep::At {
                    at_ms: parse_ms(ms)?,
                    event: EventName::new(*name).map_err(|e| err(e.to_string()))?,
                },
                ["advance", ms] => ScriptStep::Advance { to_ms: parse_ms(ms)? },
                _ => return Err(err(format!("expected `at <ms> <event>` or `advance <ms>`, got {content:?}"))),
            };
            if step.time_ms() < last {
                return Err(err(format!("time {} is before {last}", step.time_ms())));
            }
            last = step.time_ms();
            steps.push(step);
        }
        Ok(Self { steps })
    }
}
