//! Lifecycle commands accepted by a running converter.

use std::fmt;
use std::str::FromStr;
use std::sync::mpsc::Sender;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlCommand {
    /// Begin or resume consuming events.
    Start,
    /// Pause consumption; producers may keep enqueueing.
    Stop,
    Status,
    /// Stop the loop, close the queue and cancel timers.
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid command {0:?}: expected start, stop, status or exit")]
pub struct InvalidCommand(pub String);

impl FromStr for ControlCommand {
    type Err = InvalidCommand;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "start" => Ok(ControlCommand::Start),
            "stop" => Ok(ControlCommand::Stop),
            "status" => Ok(ControlCommand::Status),
            "exit" => Ok(ControlCommand::Exit),
            other => Err(InvalidCommand(other.to_string())),
        }
    }
}

impl fmt::Display for ControlCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlCommand::Start => "start",
            ControlCommand::Stop => "stop",
            ControlCommand::Status => "status",
            ControlCommand::Exit => "exit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatusSnapshot {
    pub running: bool,
    #[serde(rename = "oState")]
    pub o_state: String,
    #[serde(rename = "nState")]
    pub n_state: String,
    pub queue_depth: usize,
    pub steps_executed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlReply {
    Ack { command: ControlCommand, running: bool },
    Status(StatusSnapshot),
    Error(String),
}

impl ControlReply {
    /// One JSON line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        let value = match self {
            ControlReply::Ack { command, running } => serde_json::json!({
                "ok": true,
                "command": command.to_string(),
                "running": running,
            }),
            ControlReply::Status(s) => serde_json::to_value(s).expect("status serializes"),
            ControlReply::Error(msg) => serde_json::json!({ "ok": false, "error": msg }),
        };
        value.to_string()
    }
}

/// A command plus an optional channel for its reply.
#[derive(Debug)]
pub struct ControlRequest {
    pub command: ControlCommand,
    pub reply: Option<Sender<ControlReply>>,
}

impl ControlRequest {
    pub fn new(command: ControlCommand) -> Self {
        Self { command, reply: None }
    }

    pub fn with_reply(command: ControlCommand, reply: Sender<ControlReply>) -> Self {
        Self {
            command,
            reply: Some(reply),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_four_commands() {
        for (text, cmd) in [
            ("start", ControlCommand::Start),
            ("stop\n", ControlCommand::Stop),
            (" status ", ControlCommand::Status),
            ("exit", ControlCommand::Exit),
        ] {
            assert_eq!(text.parse::<ControlCommand>(), Ok(cmd));
        }
        assert_eq!("restart".parse::<ControlCommand>(), Err(InvalidCommand("restart".into())));
    }

    #[test]
    fn status_json_keys() {
        let line = ControlReply::Status(StatusSnapshot {
            running: true,
            o_state: "off".into(),
            n_state: "off".into(),
            queue_depth: 0,
            steps_executed: 0,
        })
        .to_json_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["running"], true);
        assert_eq!(v["oState"], "off");
        assert_eq!(v["nState"], "off");
        assert_eq!(v["queue_depth"], 0);
        assert!(!line.contains('\n'));
    }
}
