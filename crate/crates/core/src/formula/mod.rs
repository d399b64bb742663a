//! Formula syntax: atoms, annotated negation-normal-form trees, paths, and
//! the operations that only look at syntax (negation, skeleton, query
//! compilation).

mod agent_file;
mod parse;

use std::fmt;
use std::str::FromStr;

pub use agent_file::{parse_agent_file, AgentKind, AgentSpec};
pub use parse::{parse_formula, pretty, ParseError};

/// Debug rendering: underlined components in brackets, hybrids as `P_q`.
pub fn parse_render(f: &Formula) -> String {
    parse::render(f, true)
}

/// Identifier of an atom. Lowercase initial: elementary; uppercase: general.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomKind {
    Elementary,
    General,
}

impl Atom {
    pub fn new(text: impl Into<String>) -> Result<Self, ParseError> {
        let text = text.into();
        if is_identifier(&text) {
            Ok(Atom(text))
        } else {
            Err(ParseError::new(1, 1, format!("invalid atom name `{text}`")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn kind(&self) -> AtomKind {
        if self.0.starts_with(|c: char| c.is_ascii_uppercase()) {
            AtomKind::General
        } else {
            AtomKind::Elementary
        }
    }

    pub fn is_general(&self) -> bool {
        self.kind() == AtomKind::General
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Name of an agent, used as the matching environment of annotated nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentName(String);

impl AgentName {
    pub fn new(text: impl Into<String>) -> Result<Self, ParseError> {
        let text = text.into();
        if is_identifier(&text) {
            Ok(AgentName(text))
        } else {
            Err(ParseError::new(1, 1, format!("invalid agent name `{text}`")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParOp {
    And,
    Or,
}

/// `Env` is ⊓ (the environment picks), `Machine` is ⊔.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChoiceOp {
    Env,
    Machine,
}

/// `EnvLed` is △ (the environment makes leading switches), `MachineLed` is ▽.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeqOp {
    EnvLed,
    MachineLed,
}

impl ParOp {
    pub fn dual(self) -> Self {
        match self {
            ParOp::And => ParOp::Or,
            ParOp::Or => ParOp::And,
        }
    }
}

impl ChoiceOp {
    pub fn dual(self) -> Self {
        match self {
            ChoiceOp::Env => ChoiceOp::Machine,
            ChoiceOp::Machine => ChoiceOp::Env,
        }
    }
}

impl SeqOp {
    pub fn dual(self) -> Self {
        match self {
            SeqOp::EnvLed => SeqOp::MachineLed,
            SeqOp::MachineLed => SeqOp::EnvLed,
        }
    }
}

/// A literal occurrence. `hybrid` holds the elementary component when the
/// literal is a hybrid atom `P_q` (only ever set on general atoms).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
    pub env: Option<AgentName>,
    pub hybrid: Option<Atom>,
}

impl Literal {
    pub fn new(atom: Atom, negated: bool) -> Self {
        Literal { atom, negated, env: None, hybrid: None }
    }

    pub fn is_general(&self) -> bool {
        self.atom.is_general()
    }
}

/// Formula tree in negation normal form.
///
/// The same tree doubles as the carrier of hyperformulas: `underline` on
/// sequential nodes and `hybrid` on literals are always `0` / `None` in
/// plain formulas produced by the parser.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Lit(Literal),
    Par { op: ParOp, children: Vec<Formula> },
    Choice { op: ChoiceOp, children: Vec<Formula>, env: Option<AgentName> },
    Seq { op: SeqOp, children: Vec<Formula>, env: Option<AgentName>, underline: usize },
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Lit(Literal::new(Atom::new(name).expect("valid atom name"), false))
    }

    pub fn neg_atom(name: &str) -> Self {
        Formula::Lit(Literal::new(Atom::new(name).expect("valid atom name"), true))
    }

    pub fn or(children: Vec<Formula>) -> Self {
        Formula::Par { op: ParOp::Or, children }
    }

    pub fn and(children: Vec<Formula>) -> Self {
        Formula::Par { op: ParOp::And, children }
    }

    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::Const(_) | Formula::Lit(_) => &[],
            Formula::Par { children, .. } | Formula::Choice { children, .. } | Formula::Seq { children, .. } => {
                children
            }
        }
    }

    fn children_mut(&mut self) -> &mut [Formula] {
        match self {
            Formula::Const(_) | Formula::Lit(_) => &mut [],
            Formula::Par { children, .. } | Formula::Choice { children, .. } | Formula::Seq { children, .. } => {
                children
            }
        }
    }

    /// Matching environment of a node, if it is annotatable and annotated.
    pub fn env(&self) -> Option<&AgentName> {
        match self {
            Formula::Lit(l) => l.env.as_ref(),
            Formula::Choice { env, .. } | Formula::Seq { env, .. } => env.as_ref(),
            _ => None,
        }
    }

    pub fn get(&self, path: &Path) -> Option<&Formula> {
        path.0.iter().try_fold(self, |node, &i| node.children().get(i))
    }

    pub fn get_mut(&mut self, path: &Path) -> Option<&mut Formula> {
        let mut node = self;
        for &i in &path.0 {
            node = node.children_mut().get_mut(i)?;
        }
        Some(node)
    }

    /// Replace the node at `path`; `None` if the path is invalid.
    pub fn replace_at(&self, path: &Path, with: Formula) -> Option<Formula> {
        let mut out = self.clone();
        *out.get_mut(path)? = with;
        Some(out)
    }

    /// Pre-order traversal with paths.
    pub fn walk<'a>(&'a self, mut visit: impl FnMut(&Path, &'a Formula)) {
        fn go<'a>(node: &'a Formula, path: &mut Path, visit: &mut impl FnMut(&Path, &'a Formula)) {
            visit(path, node);
            for (i, child) in node.children().iter().enumerate() {
                path.0.push(i);
                go(child, path, visit);
                path.0.pop();
            }
        }
        go(self, &mut Path::root(), &mut visit);
    }

    /// Every atom name occurring in the tree, including hybrid elementary
    /// components.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.walk(|_, node| {
            if let Formula::Lit(l) = node {
                if !out.contains(&l.atom) {
                    out.push(l.atom.clone());
                }
                if let Some(q) = &l.hybrid {
                    if !out.contains(q) {
                        out.push(q.clone());
                    }
                }
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Formula::depth).max().unwrap_or(0)
    }

    /// Set every annotatable node's environment to `agent`.
    pub fn annotate(&self, agent: &AgentName) -> Formula {
        let mut out = self.clone();
        fn go(node: &mut Formula, agent: &AgentName) {
            match node {
                Formula::Lit(l) => l.env = Some(agent.clone()),
                Formula::Choice { env, .. } | Formula::Seq { env, .. } => *env = Some(agent.clone()),
                _ => {}
            }
            for child in node.children_mut() {
                go(child, agent);
            }
        }
        go(&mut out, agent);
        out
    }

    /// The single environment shared by every annotatable node, if there is
    /// one and no annotatable node is left unannotated.
    pub fn uniform_env(&self) -> Option<&AgentName> {
        let mut found: Option<&AgentName> = None;
        let mut uniform = true;
        self.walk(|_, node| match node {
            Formula::Lit(_) | Formula::Choice { .. } | Formula::Seq { .. } => match (node.env(), found) {
                (None, _) => uniform = false,
                (Some(e), None) => found = Some(e),
                (Some(e), Some(f)) if e != f => uniform = false,
                _ => {}
            },
            _ => {}
        });
        if uniform {
            found
        } else {
            None
        }
    }
}

/// NNF of ¬f. Annotations, underlines and hybrid components are preserved.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Const(b) => Formula::Const(!b),
        Formula::Lit(l) => Formula::Lit(Literal { negated: !l.negated, ..l.clone() }),
        Formula::Par { op, children } => {
            Formula::Par { op: op.dual(), children: children.iter().map(negate).collect() }
        }
        Formula::Choice { op, children, env } => {
            Formula::Choice { op: op.dual(), children: children.iter().map(negate).collect(), env: env.clone() }
        }
        Formula::Seq { op, children, env, underline } => Formula::Seq {
            op: op.dual(),
            children: children.iter().map(negate).collect(),
            env: env.clone(),
            underline: *underline,
        },
    }
}

/// Erase all environment annotations.
pub fn skeleton(f: &Formula) -> Formula {
    let mut out = f.clone();
    fn go(node: &mut Formula) {
        match node {
            Formula::Lit(l) => l.env = None,
            Formula::Choice { env, .. } | Formula::Seq { env, .. } => *env = None,
            _ => {}
        }
        for child in node.children_mut() {
            go(child);
        }
    }
    go(&mut out);
    out
}

/// NNF of `(F1 ∧ … ∧ Fk) → q`: `¬F1 ∨ … ∨ ¬Fk ∨ q`. An empty knowledgebase
/// yields `q` itself.
pub fn compile_query(kb: &[Formula], query: &Formula) -> Formula {
    if kb.is_empty() {
        return query.clone();
    }
    let mut children: Vec<Formula> = kb.iter().map(negate).collect();
    children.push(query.clone());
    Formula::or(children)
}

/// Child-index address of a node. Renders dot-separated; the root is `-`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn child(&self, i: usize) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    pub fn join(&self, rest: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        Path(v)
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn strip_prefix(&self, prefix: &Path) -> Option<Path> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| Path(s.to_vec()))
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(Path::root());
        }
        s.split('.')
            .map(|part| {
                let digits = !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit());
                digits
                    .then(|| part.parse::<usize>().ok())
                    .flatten()
                    .ok_or_else(|| format!("bad path component `{part}` in `{s}`"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn atom_kinds() {
        assert_eq!(Atom::new("p").unwrap().kind(), AtomKind::Elementary);
        assert_eq!(Atom::new("Pq_1").unwrap().kind(), AtomKind::General);
        assert!(Atom::new("").is_err());
        assert!(Atom::new("1p").is_err());
        assert!(Atom::new("p-q").is_err());
    }

    #[test]
    fn negate_atoms_and_chains() {
        assert_eq!(negate(&p("p")), p("~p"));
        assert_eq!(negate(&p("(b0 # b1)^db")), p("(~b0 @ ~b1)^db"));
        assert_eq!(negate(&p("p & (q \\/ ~R)")), p("~p + (~q /\\ R)"));
    }

    #[test]
    fn skeleton_erases_annotations() {
        assert_eq!(skeleton(&p("(p & (q & r))^w")), p("p & (q & r)"));
        assert_eq!(skeleton(&p("p^w")), p("p"));
        assert_eq!(skeleton(&p("(b0#b1)^u -> (b0#b1)^w")), p("(b0#b1) -> (b0#b1)"));
    }

    #[test]
    fn compile_query_shapes() {
        let q = p("P");
        assert_eq!(compile_query(&[], &q), q);
        assert_eq!(compile_query(&[p("p")], &p("p")), p("~p \\/ p"));
        let kb = [p("(d0#d1#d2)^kim")];
        assert_eq!(compile_query(&kb, &p("(d0#d1#d2)^db")), p("(~d0 @ ~d1 @ ~d2)^kim \\/ (d0 # d1 # d2)^db"));
    }

    #[test]
    fn path_render_and_parse() {
        let path = Path(vec![1, 0, 2]);
        assert_eq!(path.to_string(), "1.0.2");
        assert_eq!("1.0.2".parse::<Path>().unwrap(), path);
        assert_eq!("-".parse::<Path>().unwrap(), Path::root());
        assert!("1..2".parse::<Path>().is_err());
    }

    #[test]
    fn uniform_env_detection() {
        assert_eq!(p("(b0 # b1)^db").uniform_env().map(AgentName::as_str), Some("db"));
        assert_eq!(p("d0 -> b0").uniform_env(), None);
        assert_eq!(p("b2^u -> b2^w").uniform_env(), None);
    }
}
