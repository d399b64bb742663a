//! Line-oriented wire messages.

use std::fmt;

use crate::formula::{is_identifier, AgentName, Path};
use crate::runtime::{Move, MovePayload, Player};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct DecodeError {
    /// 1-based character column where the offending field starts.
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Message {
    Query { session: String, from: AgentName, to: AgentName, formula: String },
    Move { session: String, from: AgentName, to: AgentName, mv: Move },
    Ok { session: String },
    Fail { session: String, reason: String },
    Done { session: String },
}

/// Agent part of a session id `<origin>:<counter>`.
pub fn session_origin(session: &str) -> Option<&str> {
    session.split_once(':').map(|(o, _)| o)
}

pub fn is_session_id(s: &str) -> bool {
    matches!(s.split_once(':'), Some((o, n)) if is_identifier(o) && !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

impl Message {
    pub fn session(&self) -> &str {
        match self {
            Message::Query { session, .. }
            | Message::Move { session, .. }
            | Message::Ok { session }
            | Message::Fail { session, .. }
            | Message::Done { session } => session,
        }
    }

    /// Destination agent. Status replies go to the agent that opened the
    /// session.
    pub fn receiver(&self) -> Option<&str> {
        match self {
            Message::Query { to, .. } | Message::Move { to, .. } => Some(to.as_str()),
            _ => session_origin(self.session()),
        }
    }

    pub fn encode(&self) -> String {
        self.to_string()
    }

    pub fn decode(line: &str) -> Result<Message, DecodeError> {
        decode(line)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Query { session, from, to, formula } => write!(f, "QUERY {session} {from} {to} {formula}"),
            Message::Move { session, from, to, mv } => write!(f, "MOVE {session} {from} {to} {mv}"),
            Message::Ok { session } => write!(f, "OK {session}"),
            Message::Fail { session, reason } => write!(f, "FAIL {session} {reason}"),
            Message::Done { session } => write!(f, "DONE {session}"),
        }
    }
}

/// Fields split on single spaces, at most `n`; the last keeps the rest of
/// the line. Each field comes with its starting column.
fn fields(line: &str, n: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in line.splitn(n, ' ') {
        out.push((line[..start].chars().count() + 1, part));
        start += part.len() + 1;
    }
    out
}

fn err(column: usize, message: impl Into<String>) -> DecodeError {
    DecodeError { column, message: message.into() }
}

fn session_field((col, s): (usize, &str)) -> Result<String, DecodeError> {
    if is_session_id(s) {
        Ok(s.to_string())
    } else {
        Err(err(col, format!("bad session id `{s}`")))
    }
}

fn agent_field((col, s): (usize, &str)) -> Result<AgentName, DecodeError> {
    AgentName::new(s).map_err(|_| err(col, format!("bad agent name `{s}`")))
}

fn decode(line: &str) -> Result<Message, DecodeError> {
    if line.contains('\n') || line.contains('\r') {
        return Err(err(1, "message spans more than one line"));
    }
    let kind = line.split(' ').next().unwrap_or("");
    let arity = |n: usize, f: &[(usize, &str)]| {
        if f.len() < n || f.iter().any(|(_, s)| s.is_empty()) {
            Err(err(line.chars().count() + 1, format!("{kind} needs {} fields", n - 1)))
        } else {
            Ok(())
        }
    };
    match kind {
        "QUERY" => {
            let f = fields(line, 5);
            arity(5, &f)?;
            Ok(Message::Query {
                session: session_field(f[1])?,
                from: agent_field(f[2])?,
                to: agent_field(f[3])?,
                formula: f[4].1.to_string(),
            })
        }
        "MOVE" => {
            let f = fields(line, 7);
            arity(7, &f)?;
            if f[6].1.contains(' ') {
                return Err(err(f[6].0, "trailing text after move payload"));
            }
            let player: Player = f[4].1.parse().map_err(|_| err(f[4].0, format!("bad player `{}`", f[4].1)))?;
            let path: Path = f[5].1.parse().map_err(|_| err(f[5].0, format!("bad path `{}`", f[5].1)))?;
            let payload: MovePayload =
                f[6].1.parse().map_err(|e: crate::runtime::RuntimeError| err(f[6].0, e.to_string()))?;
            Ok(Message::Move {
                session: session_field(f[1])?,
                from: agent_field(f[2])?,
                to: agent_field(f[3])?,
                mv: Move::new(player, path, payload),
            })
        }
        "OK" | "DONE" => {
            let f = fields(line, 2);
            arity(2, &f)?;
            if f[1].1.contains(' ') {
                return Err(err(f[1].0, "trailing text after session id"));
            }
            let session = session_field(f[1])?;
            Ok(if kind == "OK" { Message::Ok { session } } else { Message::Done { session } })
        }
        "FAIL" => {
            let f = fields(line, 3);
            arity(3, &f)?;
            if f[2].1.contains(' ') {
                return Err(err(f[2].0, "reason must be a single token"));
            }
            Ok(Message::Fail { session: session_field(f[1])?, reason: f[2].1.to_string() })
        }
        other => Err(err(1, format!("unknown message kind `{other}`"))),
    }
}
