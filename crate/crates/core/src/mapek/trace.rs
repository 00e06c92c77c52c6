//! Tab-separated trace lines, one per step:
//!
//! ```text
//! seq=1	event=switch	src=controller	mode=existing	sent=switch	handler=-	o=off>on	n=off>on
//! ```
//!
//! Steps that hit a plan or sink failure carry a trailing `error=` field
//! (multiple errors joined by ` | `). Lines starting with `#` are notes and
//! are skipped when parsing.

#![allow(clippy::tabs_in_doc_comments)] // the separator is a real tab

use thiserror::Error;

use super::knowledge::{ActionSpec, EventSource, IncomingEvent, Mode, StepRecord};
use crate::statechart::{EventName, StateName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad trace line: {0}")]
pub struct TraceParseError(pub String);

impl StepRecord {
    pub fn to_trace_line(&self) -> String {
        let sent = match self.action.sent() {
            [] => "-".to_string(),
            events => events.iter().map(EventName::as_str).collect::<Vec<_>>().join(","),
        };
        let handler = self.action.handler().map_or("-", StateName::as_str);
        let mut line = format!(
            "seq={}\tevent={}\tsrc={}\tmode={}\tsent={}\thandler={}\to={}>{}\tn={}>{}",
            self.event.seq,
            self.event.name,
            self.event.source,
            self.mode,
            sent,
            handler,
            self.o_before,
            self.o_after,
            self.n_before,
            self.n_after
        );
        if !self.errors.is_empty() {
            line.push_str("\terror=");
            let cleaned: Vec<String> = self.errors.iter().map(|e| e.replace(['\t', '\n'], " ")).collect();
            line.push_str(&cleaned.join(" | "));
        }
        line
    }

    pub fn parse_trace_line(line: &str) -> Result<Self, TraceParseError> {
        let err = |what: &str| TraceParseError(format!("{what} in {line:?}"));
        let mut fields = line.split('\t');
        let mut take = |key: &str| -> Result<&str, TraceParseError> {
            let field = fields.next().ok_or_else(|| err(&format!("missing {key}")))?;
            field
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| err(&format!("expected {key}=")))
        };
        let seq = take("seq")?.parse().map_err(|_| err("bad seq"))?;
        let name = EventName::new(take("event")?).map_err(|e| err(&e.to_string()))?;
        let source: EventSource = take("src")?.parse().map_err(|e: String| err(&e))?;
        let mode: Mode = take("mode")?.parse().map_err(|e: String| err(&e))?;
        let sent = take("sent")?;
        let handler = take("handler")?;
        let o = take("o")?;
        let n = take("n")?;
        let errors = match fields.next() {
            None => Vec::new(),
            Some(f) => f
                .strip_prefix("error=")
                .ok_or_else(|| err("expected error="))?
                .split(" | ")
                .map(str::to_string)
                .collect(),
        };
        let action = match (sent, handler) {
            ("-", "-") => ActionSpec::None,
            (sent, "-") => ActionSpec::Forward(
                sent.split(',')
                    .map(EventName::new)
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(&e.to_string()))?,
            ),
            ("-", h) => ActionSpec::Invoke(StateName::new(h).map_err(|e| err(&e.to_string()))?),
            _ => return Err(err("both sent and handler set")),
        };
        let pair = |s: &str| -> Result<(StateName, StateName), TraceParseError> {
            let (a, b) = s.split_once('>').ok_or_else(|| err("expected before>after"))?;
            Ok((
                StateName::new(a).map_err(|e| err(&e.to_string()))?,
                StateName::new(b).map_err(|e| err(&e.to_string()))?,
            ))
        };
        let (o_before, o_after) = pair(o)?;
        let (n_before, n_after) = pair(n)?;
        Ok(StepRecord {
            event: IncomingEvent {
                name,
                source,
                seq,
                timer_generation: None,
            },
            mode,
            action,
            o_before,
            o_after,
            n_before,
            n_after,
            errors,
        })
    }
}

/// Renders a whole trace, one line per record.
pub fn render_trace(records: &[StepRecord]) -> String {
    records.iter().map(|r| r.to_trace_line() + "\n").collect()
}

pub fn parse_trace(text: &str) -> Result<Vec<StepRecord>, TraceParseError> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(StepRecord::parse_trace_line)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statechart::{event, state};

    fn record() -> StepRecord {
        StepRecord {
            event: IncomingEvent {
                name: event("clean"),
                source: EventSource::Controller,
                seq: 4,
                timer_generation: None,
            },
            mode: Mode::Existing,
            action: ActionSpec::Forward(vec![event("clean"), event("spot")]),
            o_before: state("clean"),
            o_after: state("spot"),
            n_before: state("spotWait"),
            n_after: state("spot"),
            errors: vec![],
        }
    }

    #[test]
    fn line_format() {
        assert_eq!(
            record().to_trace_line(),
            "seq=4\tevent=clean\tsrc=controller\tmode=existing\tsent=clean,spot\thandler=-\to=clean>spot\tn=spotWait>spot"
        );
    }

    #[test]
    fn round_trip_with_errors() {
        let mut r = record();
        r.errors = vec!["sink failure: broken pipe".into(), "second".into()];
        assert_eq!(StepRecord::parse_trace_line(&r.to_trace_line()).unwrap(), r);
        let mut r = record();
        r.mode = Mode::New;
        r.action = ActionSpec::Invoke(state("move"));
        assert!(r.to_trace_line().contains("sent=-\thandler=move"));
        assert_eq!(StepRecord::parse_trace_line(&r.to_trace_line()).unwrap(), r);
    }

    #[test]
    fn rejects_garbage() {
        assert!(StepRecord::parse_trace_line("seq=x").is_err());
        assert!(StepRecord::parse_trace_line("hello").is_err());
    }
}
