//! ASCII concrete syntax.
//!
//! ```text
//! imp    := par ( '->' imp )?
//! par    := choice ( ('/\' | '\/') choice )*      one operator per level
//! choice := seq ( ('&' | '+') seq )*
//! seq    := unary ( ('#' | '@') unary )*
//! unary  := '~' unary | primary
//! primary:= ( ident | '(' imp ')' ) ( '^' ident )?
//! ```
//!
//! `%` starts a comment running to the end of the line. Operators of the
//! same level may not be mixed without parentheses, and unparenthesized
//! chains flatten into a single n-ary node.

use std::fmt;

use super::{negate, AgentName, Atom, ChoiceOp, Formula, Literal, ParOp, SeqOp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Imp,
    EnvChoice,
    MachChoice,
    EnvSeq,
    MachSeq,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Not => "~",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Imp => "->",
            Tok::EnvChoice => "&",
            Tok::MachChoice => "+",
            Tok::EnvSeq => "#",
            Tok::MachSeq => "@",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let two = |next: char| chars.get(i + 1) == Some(&next);
        let (tok, width) = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '~' => (Tok::Not, 1),
            '/' if two('\\') => (Tok::And, 2),
            '\\' if two('/') => (Tok::Or, 2),
            '-' if two('>') => (Tok::Imp, 2),
            '&' => (Tok::EnvChoice, 1),
            '+' => (Tok::MachChoice, 1),
            '#' => (Tok::EnvSeq, 1),
            '@' => (Tok::MachSeq, 1),
            '^' => (Tok::Caret, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                out.push((Tok::Ident(text), pos));
                continue;
            }
            other => return Err(ParseError::new(line, col, format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
        i += width;
        col += width;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let p = self.pos();
        ParseError::new(p.line, p.column, message)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.par()?;
        if self.peek() == Some(&Tok::Imp) {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::or(vec![negate(&lhs), rhs]));
        }
        Ok(lhs)
    }

    /// Generic n-ary level: operands separated by one of two operator tokens.
    fn chain(
        &mut self,
        ops: [Tok; 2],
        operand: fn(&mut Self) -> Result<Formula, ParseError>,
    ) -> Result<(Vec<Formula>, Option<usize>), ParseError> {
        let mut items = vec![operand(self)?];
        let mut which = None;
        while let Some(idx) = self.peek().and_then(|t| ops.iter().position(|o| o == t)) {
            match which {
                None => which = Some(idx),
                Some(w) if w != idx => {
                    return Err(self.error(format!("mixing {} and {} requires parentheses", ops[w], ops[idx])))
                }
                _ => {}
            }
            self.bump();
            items.push(operand(self)?);
        }
        Ok((items, which))
    }

    fn par(&mut self) -> Result<Formula, ParseError> {
        let (mut items, which) = self.chain([Tok::And, Tok::Or], Self::choice)?;
        Ok(match which {
            None => items.pop().unwrap(),
            Some(i) => Formula::Par { op: [ParOp::And, ParOp::Or][i], children: items },
        })
    }

    fn choice(&mut self) -> Result<Formula, ParseError> {
        let (mut items, which) = self.chain([Tok::EnvChoice, Tok::MachChoice], Self::seq)?;
        Ok(match which {
            None => items.pop().unwrap(),
            Some(i) => Formula::Choice { op: [ChoiceOp::Env, ChoiceOp::Machine][i], children: items, env: None },
        })
    }

    fn seq(&mut self) -> Result<Formula, ParseError> {
        let (mut items, which) = self.chain([Tok::EnvSeq, Tok::MachSeq], Self::unary)?;
        Ok(match which {
            None => items.pop().unwrap(),
            Some(i) => {
                Formula::Seq { op: [SeqOp::EnvLed, SeqOp::MachineLed][i], children: items, env: None, underline: 0 }
            }
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::Not) {
            self.bump();
            return Ok(negate(&self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos();
        let body = match self.bump() {
            Some(Tok::Ident(name)) => Formula::Lit(Literal::new(Atom(name), false)),
            Some(Tok::LParen) => {
                let inner = self.imp()?;
                match self.bump() {
                    Some(Tok::RParen) => inner,
                    Some(t) => {
                        self.at -= 1;
                        return Err(self.error(format!("expected `)`, found {t}")));
                    }
                    None => return Err(self.error("expected `)`, found end of input")),
                }
            }
            Some(t) => {
                self.at -= 1;
                return Err(self.error(format!("expected a formula, found {t}")));
            }
            None => return Err(self.error("expected a formula, found end of input")),
        };
        if self.peek() != Some(&Tok::Caret) {
            return Ok(body);
        }
        self.bump();
        let agent = match self.bump() {
            Some(Tok::Ident(name)) => AgentName(name),
            _ => {
                self.at -= 1;
                return Err(self.error("expected an agent name after `^`"));
            }
        };
        if let Some(other) = conflicting_env(&body, &agent) {
            return Err(ParseError::new(
                start.line,
                start.column,
                format!("env-switching annotation: `^{other}` nested inside `^{agent}`"),
            ));
        }
        Ok(body.annotate(&agent))
    }
}

fn conflicting_env(f: &Formula, agent: &AgentName) -> Option<AgentName> {
    let mut bad = None;
    f.walk(|_, node| {
        if let Some(e) = node.env() {
            if e != agent && bad.is_none() {
                bad = Some(e.clone());
            }
        }
    });
    bad
}

/// Parse a single formula into negation normal form.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        Pos { line: lines.len(), column: lines.last().map_or(0, |l| l.chars().count()) + 1 }
    };
    let mut parser = Parser { toks, at: 0, end };
    let f = parser.imp()?;
    if let Some(t) = parser.peek() {
        return Err(parser.error(format!("unexpected {t} after formula")));
    }
    Ok(f)
}

/// Concrete syntax for a formula; `parse_formula(&pretty(f)) == f` for every
/// parser-producible `f`.
pub fn pretty(f: &Formula) -> String {
    render(f, false)
}

/// Shared printer. With `underlines` set, the underlined component of every
/// sequential node is wrapped in brackets.
pub(crate) fn render(f: &Formula, underlines: bool) -> String {
    let mut out = String::new();
    write_node(f, None, underlines, &mut out);
    out
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Par { .. } => 1,
        Formula::Choice { .. } => 2,
        Formula::Seq { .. } => 3,
        Formula::Const(_) | Formula::Lit(_) => 4,
    }
}

fn write_node(f: &Formula, inherited: Option<&AgentName>, underlines: bool, out: &mut String) {
    if let Some(agent) = f.uniform_env() {
        if inherited != Some(agent) {
            match f {
                Formula::Lit(_) => write_body(f, Some(agent), underlines, out),
                _ => {
                    out.push('(');
                    write_body(f, Some(agent), underlines, out);
                    out.push(')');
                }
            }
            out.push('^');
            out.push_str(agent.as_str());
            return;
        }
    }
    write_body(f, inherited, underlines, out);
}

fn write_body(f: &Formula, inherited: Option<&AgentName>, underlines: bool, out: &mut String) {
    let (sep, children, marked) = match f {
        Formula::Const(true) => return out.push('⊤'),
        Formula::Const(false) => return out.push('⊥'),
        Formula::Lit(l) => {
            if l.negated {
                out.push('~');
            }
            out.push_str(l.atom.as_str());
            if let Some(q) = &l.hybrid {
                out.push('_');
                out.push_str(q.as_str());
            }
            return;
        }
        Formula::Par { op: ParOp::And, children } => (" /\\ ", children, None),
        Formula::Par { op: ParOp::Or, children } => (" \\/ ", children, None),
        Formula::Choice { op: ChoiceOp::Env, children, .. } => (" & ", children, None),
        Formula::Choice { op: ChoiceOp::Machine, children, .. } => (" + ", children, None),
        Formula::Seq { op: SeqOp::EnvLed, children, underline, .. } => (" # ", children, Some(*underline)),
        Formula::Seq { op: SeqOp::MachineLed, children, underline, .. } => (" @ ", children, Some(*underline)),
    };
    let parent = level(f);
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        let bracket = underlines && marked == Some(i);
        if bracket {
            out.push('[');
        }
        let annotated_here = child.uniform_env().is_some() && child.uniform_env() != inherited;
        let wrap = !annotated_here && level(child) <= parent;
        if wrap {
            out.push('(');
        }
        write_node(child, inherited, underlines, out);
        if wrap {
            out.push(')');
        }
        if bracket {
            out.push(']');
        }
    }
}
