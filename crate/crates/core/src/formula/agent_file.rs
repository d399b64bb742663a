use std::fmt;

use super::{parse_formula, AgentName, Formula, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Regular,
    Super,
    Neural,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Regular => "regular",
            AgentKind::Super => "super",
            AgentKind::Neural => "neural",
        })
    }
}

/// An agent declaration together with its knowledgebase, in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSpec {
    pub name: AgentName,
    pub kind: AgentKind,
    pub kb: Vec<Formula>,
}

/// Offset (in chars) to 1-based line/column.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars().take(offset) {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Split into `.`-terminated statements, skipping `%` comments. Each item is
/// the statement text and the char offset where it starts.
fn statements(text: &str) -> Result<Vec<(String, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = None;
    let mut in_comment = false;
    for (i, c) in text.chars().enumerate() {
        if in_comment {
            if c == '\n' {
                in_comment = false;
                current.push('\n');
            }
            continue;
        }
        match c {
            '%' => in_comment = true,
            '.' => {
                let s = start.take().unwrap_or(i);
                out.push((std::mem::take(&mut current), s));
            }
            c => {
                if start.is_none() && !c.is_whitespace() {
                    start = Some(i);
                    current.clear();
                }
                if start.is_some() {
                    current.push(c);
                }
            }
        }
    }
    if let Some(s) = start {
        let (line, column) = locate(text, s);
        return Err(ParseError::new(line, column, "formula not terminated by `.`"));
    }
    Ok(out)
}

pub fn parse_agent_file(text: &str) -> Result<AgentSpec, ParseError> {
    let mut header: Option<(AgentName, AgentKind)> = None;
    let mut kb = Vec::new();
    for (stmt, offset) in statements(text)? {
        let (line, column) = locate(text, offset);
        let words: Vec<&str> = stmt.split_whitespace().collect();
        if words.first() == Some(&"agent") {
            if header.is_some() {
                return Err(ParseError::new(line, column, "duplicate agent declaration"));
            }
            let (kind, name) = match words.as_slice() {
                [_, name] => (AgentKind::Regular, *name),
                [_, "super", name] => (AgentKind::Super, *name),
                [_, "neural", name] => (AgentKind::Neural, *name),
                [_, kind, _] => return Err(ParseError::new(line, column, format!("unknown agent kind `{kind}`"))),
                _ => return Err(ParseError::new(line, column, "malformed agent declaration")),
            };
            let name = AgentName::new(name).map_err(|e| ParseError::new(line, column, e.message))?;
            header = Some((name, kind));
            continue;
        }
        if header.is_none() {
            return Err(ParseError::new(line, column, "expected `agent <name>.` before formulas"));
        }
        let f = parse_formula(&stmt).map_err(|e| {
            // re-base the inner position onto the file
            let (l, c) = if e.line == 1 { (line, column + e.column - 1) } else { (line + e.line - 1, e.column) };
            ParseError::new(l, c, e.message)
        })?;
        kb.push(f);
    }
    let (name, kind) = header.ok_or_else(|| ParseError::new(1, 1, "missing agent declaration"))?;
    Ok(AgentSpec { name, kind, kb })
}
