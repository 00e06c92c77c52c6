//! Human-oriented rendering of a trace in the style of the converter's
//! console log:
//!
//! ```text
//! ----   button_event : Clean   -----
//!  seq: 1
//! Monitor
//!  inputs Clean event.
//! Analyze
//!  original_current_state: Off
//!  new_current_state: Off
//!  mode: Use existing functions
//! Plan
//! Execute
//!  MAPE-K loop will send this event : Clean
//!  original_current_state: On
//!  new_current_state: On
//! ```
//!
//! Names are shown capitalized. A name that already starts with a capital is
//! quoted so the log parses back to the exact tabular trace.

use thiserror::Error;

use crate::mapek::{ActionSpec, EventSource, IncomingEvent, Mode, StepRecord};
use crate::statechart::{EventName, StateName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("paper log line {line}: {message}")]
pub struct PaperParseError {
    pub line: usize,
    pub message: String,
}

fn show(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => c.to_ascii_uppercase().to_string() + chars.as_str(),
        _ => format!("\"{name}\""),
    }
}

fn unshow(text: &str) -> String {
    if let Some(inner) = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        return inner.to_string();
    }
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_ascii_lowercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn header_kind(source: EventSource) -> &'static str {
    match source {
        EventSource::Controller => "button_event",
        EventSource::Device => "device_event",
        EventSource::Internal => "internal_event",
    }
}

fn mode_text(mode: Mode) -> &'static str {
    match mode {
        Mode::Existing => "Use existing functions",
        Mode::New => "Use new functions",
        Mode::Rejected => "Reject event",
    }
}

const NO_SEND: &str = "MAPE-K loop does not send events.";
const SEND: &str = "MAPE-K loop will send this event : ";
const NEW_FN_BANNER: &str = "***  Start to run new functions. ***";

pub fn render_paper_record(r: &StepRecord) -> String {
    let mut out = String::new();
    let mut line = |s: &str| {
        out.push_str(s);
        out.push('\n');
    };
    line(&format!("----   {} : {}   -----", header_kind(r.event.source), show(r.event.name.as_str())));
    line(&format!(" seq: {}", r.event.seq));
    line("Monitor");
    line(&format!(" inputs {} event.", show(r.event.name.as_str())));
    line("Analyze");
    line(&format!(" original_current_state: {}", show(r.o_before.as_str())));
    line(&format!(" new_current_state: {}", show(r.n_before.as_str())));
    line(&format!(" mode: {}", mode_text(r.mode)));
    line("Plan");
    if r.action.sent().is_empty() {
        line(&format!(" {NO_SEND}"));
    }
    line("Execute");
    for e in r.action.sent() {
        line(&format!(" {SEND}{}", show(e.as_str())));
    }
    if let Some(h) = r.action.handler() {
        line(&format!(" Operate existing functions for {} in the another thread", show(h.as_str())));
    }
    for e in &r.errors {
        line(&format!(" error: {}", e.replace('\n', " ")));
    }
    line(&format!(" original_current_state: {}", show(r.o_after.as_str())));
    line(&format!(" new_current_state: {}", show(r.n_after.as_str())));
    if r.action.handler().is_some() {
        line("");
        line(NEW_FN_BANNER);
    }
    line("");
    out
}

pub fn render_paper(records: &[StepRecord]) -> String {
    records.iter().map(render_paper_record).collect()
}

#[derive(Default)]
struct Partial {
    header_line: usize,
    source: Option<EventSource>,
    name: Option<String>,
    seq: Option<u64>,
    mode: Option<Mode>,
    sent: Vec<String>,
    handler: Option<String>,
    errors: Vec<String>,
    /// Analyze states first, then Execute states.
    states: Vec<String>,
}

impl Partial {
    fn finish(self) -> Result<StepRecord, PaperParseError> {
        let err = |message: &str| PaperParseError {
            line: self.header_line,
            message: message.to_string(),
        };
        let [o_before, n_before, o_after, n_after] = <[String; 4]>::try_from(self.states.clone())
            .map_err(|_| err("expected four current_state lines"))?;
        let st = |s: String| StateName::new(s).map_err(|e| err(&e.to_string()));
        let ev = |s: String| EventName::new(s).map_err(|e| err(&e.to_string()));
        let action = match (self.sent.is_empty(), self.handler) {
            (true, None) => ActionSpec::None,
            (false, None) => ActionSpec::Forward(self.sent.into_iter().map(ev).collect::<Result<_, _>>()?),
            (true, Some(h)) => ActionSpec::Invoke(st(h)?),
            (false, Some(_)) => return Err(err("block both sends events and runs a new function")),
        };
        Ok(StepRecord {
            event: IncomingEvent {
                name: ev(self.name.ok_or_else(|| err("missing header"))?)?,
                source: self.source.ok_or_else(|| err("missing header"))?,
                seq: self.seq.ok_or_else(|| err("missing seq"))?,
                timer_generation: None,
            },
            mode: self.mode.ok_or_else(|| err("missing mode"))?,
            action,
            o_before: st(o_before)?,
            o_after: st(o_after)?,
            n_before: st(n_before)?,
            n_after: st(n_after)?,
            errors: self.errors,
        })
    }
}

/// Inverse of [`render_paper`].
pub fn parse_paper(text: &str) -> Result<Vec<StepRecord>, PaperParseError> {
    let mut out = Vec::new();
    let mut cur: Option<Partial> = None;
    let mut original_next = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| PaperParseError { line: line_no, message };
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with("***") || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("----") {
            if let Some(done) = cur.take() {
                out.push(done.finish()?);
            }
            let body = rest.trim().trim_end_matches('-').trim();
            let (kind, name) = body.split_once(" : ").ok_or_else(|| err(format!("bad header {line:?}")))?;
            let source = match kind.trim() {
                "button_event" => EventSource::Controller,
                "device_event" => EventSource::Device,
                "internal_event" => EventSource::Internal,
                other => return Err(err(format!("unknown event kind {other:?}"))),
            };
            cur = Some(Partial {
                header_line: line_no,
                source: Some(source),
                name: Some(unshow(name.trim())),
                ..Partial::default()
            });
            original_next = true;
            continue;
        }
        let p = cur.as_mut().ok_or_else(|| err("text before the first block".into()))?;
        let t = line.trim();
        if matches!(t, "Monitor" | "Analyze" | "Plan" | "Execute") || t == NO_SEND || t.starts_with("inputs ") {
            continue;
        }
        if let Some(v) = t.strip_prefix("seq: ") {
            p.seq = Some(v.parse().map_err(|_| err(format!("bad seq {v:?}")))?);
        } else if let Some(v) = t.strip_prefix("mode: ") {
            p.mode = Some(match v {
                "Use existing functions" => Mode::Existing,
                "Use new functions" => Mode::New,
                "Reject event" => Mode::Rejected,
                other => return Err(err(format!("unknown mode {other:?}"))),
            });
        } else if let Some(v) = t.strip_prefix("original_current_state: ") {
            if !original_next {
                return Err(err("two original_current_state lines in a row".into()));
            }
            p.states.push(unshow(v));
            original_next = false;
        } else if let Some(v) = t.strip_prefix("new_current_state: ") {
            if original_next {
                return Err(err("new_current_state before original_current_state".into()));
            }
            p.states.push(unshow(v));
            original_next = true;
        } else if let Some(v) = t.strip_prefix(SEND.trim_start()) {
            p.sent.push(unshow(v.trim()));
        } else if let Some(v) = t
            .strip_prefix("Operate existing functions for ")
            .and_then(|v| v.strip_suffix(" in the another thread"))
        {
            p.handler = Some(unshow(v));
        } else if let Some(v) = t.strip_prefix("error: ") {
            p.errors.push(v.to_string());
        } else {
            return Err(err(format!("unrecognized line {t:?}")));
        }
    }
    if let Some(done) = cur.take() {
        out.push(done.finish()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapek::parse_trace;

    const TRACE: &str = "seq=1\tevent=clean\tsrc=controller\tmode=existing\tsent=clean\thandler=-\to=off>on\tn=off>on
seq=2\tevent=spot\tsrc=controller\tmode=new\tsent=-\thandler=move\to=on>on\tn=on>move
seq=3\tevent=arriveSpot\tsrc=internal\tmode=existing\tsent=spot\thandler=-\to=on>spot\tn=move>spot
seq=4\tevent=Odd\tsrc=device\tmode=rejected\tsent=-\thandler=-\to=spot>spot\tn=spot>spot\terror=no path | sink down
seq=5\tevent=clean\tsrc=controller\tmode=existing\tsent=-\thandler=-\to=clean>clean\tn=spotWait>clean
";

    #[test]
    fn roundtrip_is_exact() {
        let records = parse_trace(TRACE).unwrap();
        let paper = render_paper(&records);
        assert_eq!(parse_paper(&paper).unwrap(), records);
    }

    #[test]
    fn looks_like_the_console_log() {
        let records = parse_trace(TRACE).unwrap();
        let paper = render_paper(&records[..2]);
        assert!(paper.starts_with("----   button_event : Clean   -----\n seq: 1\nMonitor\n inputs Clean event.\n"));
        assert!(paper.contains(" mode: Use new functions\nPlan\n MAPE-K loop does not send events.\nExecute\n Operate existing functions for Move in the another thread\n"));
        assert!(paper.contains(" MAPE-K loop will send this event : Clean\n original_current_state: On\n new_current_state: On\n"));
        assert!(render_paper(&records[3..4]).contains("----   device_event : \"Odd\"   -----"));
    }

    #[test]
    fn garbage_is_reported_with_line() {
        let e = parse_paper("----   button_event : Clean   -----\n seq: x\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_paper("Monitor\n").is_err());
        assert!(parse_paper("----   button_event : Clean   -----\n seq: 1\n").is_err());
    }
}
