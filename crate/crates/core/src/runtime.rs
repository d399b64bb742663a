//! Game play over a session formula: moves addressed by paths of the
//! original tree, per-node status, and winner evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use crate::formula::{Atom, ChoiceOp, Formula, ParOp, Path, SeqOp};
use crate::hyper::HyperFormula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Machine,
    Env,
}

impl Player {
    pub fn complement(self) -> Self {
        match self {
            Player::Machine => Player::Env,
            Player::Env => Player::Machine,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Machine => "⊤",
            Player::Env => "⊥",
        })
    }
}

impl FromStr for Player {
    type Err = RuntimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "⊤" | "machine" => Ok(Player::Machine),
            "⊥" | "env" | "environment" => Ok(Player::Env),
            _ => Err(RuntimeError::Malformed(format!("unknown player `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MovePayload {
    Choose(usize),
    Switch,
    Atom(String),
}

impl fmt::Display for MovePayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MovePayload::Choose(i) => write!(f, "choose:{i}"),
            MovePayload::Switch => f.write_str("switch"),
            MovePayload::Atom(t) => write!(f, "atom:{t}"),
        }
    }
}

impl FromStr for MovePayload {
    type Err = RuntimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "switch" {
            return Ok(MovePayload::Switch);
        }
        if let Some(i) = s.strip_prefix("choose:") {
            return i
                .parse()
                .map(MovePayload::Choose)
                .map_err(|_| RuntimeError::Malformed(format!("bad choice index `{i}`")));
        }
        if let Some(t) = s.strip_prefix("atom:") {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(RuntimeError::Malformed(format!("bad atom move text `{t}`")));
            }
            return Ok(MovePayload::Atom(t.to_string()));
        }
        Err(RuntimeError::Malformed(format!("unknown move payload `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub player: Player,
    pub path: Path,
    pub payload: MovePayload,
}

impl Move {
    pub fn new(player: Player, path: Path, payload: MovePayload) -> Self {
        Move { player, path, payload }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.player, self.path, self.payload)
    }
}

impl FromStr for Move {
    type Err = RuntimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(' ').collect();
        let [player, path, payload] = parts.as_slice() else {
            return Err(RuntimeError::Malformed(format!("expected `<player> <path> <payload>`, got `{s}`")));
        };
        let path = path.parse().map_err(|_| RuntimeError::Malformed(format!("bad path `{path}`")))?;
        Ok(Move { player: player.parse()?, path, payload: payload.parse()? })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run(pub Vec<Move>);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("illegal move {mv}: {reason}")]
    Illegal { mv: Move, reason: String },
    #[error("session has not terminated")]
    NotTerminated,
    #[error("unknown hybrid pair {0} / {1}")]
    UnknownPair(Path, Path),
    #[error("{0}")]
    Malformed(String),
}

/// Status of one node of the original tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Choice {
        chosen: Option<usize>,
    },
    /// `leading` counts switches by the chain's leader, `catchup` the
    /// echoes by the other player.
    Seq {
        leading: usize,
        catchup: usize,
    },
    /// Local run of a general literal occurrence.
    Atom {
        run: Vec<(Player, String)>,
    },
}

/// Verdict function for general atoms: atom, the environment's moves, the
/// machine's moves (each in order) → winner of a positive occurrence.
pub type AtomOracle = Arc<dyn Fn(&Atom, &[String], &[String]) -> Player + Send + Sync>;

#[derive(Clone)]
pub struct Interpretation {
    /// Missing elementary atoms are false.
    pub valuation: BTreeMap<Atom, bool>,
    pub oracle: AtomOracle,
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interpretation").field("valuation", &self.valuation).finish_non_exhaustive()
    }
}

impl Interpretation {
    pub fn new(valuation: BTreeMap<Atom, bool>, oracle: AtomOracle) -> Self {
        Interpretation { valuation, oracle }
    }

    /// Every positive general occurrence is won by `verdict`.
    pub fn constant(valuation: BTreeMap<Atom, bool>, verdict: Player) -> Self {
        Interpretation { valuation, oracle: Arc::new(move |_, _, _| verdict) }
    }

    /// Per-atom constant verdicts with a fallback.
    pub fn table(valuation: BTreeMap<Atom, bool>, verdicts: BTreeMap<Atom, Player>, fallback: Player) -> Self {
        let oracle = move |a: &Atom, _: &[String], _: &[String]| verdicts.get(a).copied().unwrap_or(fallback);
        Interpretation { valuation, oracle: Arc::new(oracle) }
    }

    /// A seeded pseudo-random function of the atom and both move sequences.
    pub fn hashed(valuation: BTreeMap<Atom, bool>, seed: u64) -> Self {
        let oracle = move |a: &Atom, env: &[String], machine: &[String]| {
            let mut h = DefaultHasher::new();
            (seed, a, env, machine).hash(&mut h);
            if h.finish() & 1 == 0 {
                Player::Machine
            } else {
                Player::Env
            }
        };
        Interpretation { valuation, oracle: Arc::new(oracle) }
    }

    pub fn value(&self, a: &Atom) -> bool {
        self.valuation.get(a).copied().unwrap_or(false)
    }

    /// Winner of one literal occurrence given its local run.
    pub fn literal_verdict(&self, atom: &Atom, negated: bool, run: &[(Player, String)]) -> Player {
        let by = |p: Player| run.iter().filter(|(q, _)| *q == p).map(|(_, t)| t.clone()).collect::<Vec<_>>();
        let (env, machine) = (by(Player::Env), by(Player::Machine));
        if negated {
            // the role-swapped run of the positive game
            (self.oracle)(atom, &machine, &env).complement()
        } else {
            (self.oracle)(atom, &env, &machine)
        }
    }
}

fn illegal(mv: &Move, reason: impl Into<String>) -> RuntimeError {
    RuntimeError::Illegal { mv: mv.clone(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    original: HyperFormula,
    status: BTreeMap<Path, NodeStatus>,
    run: Run,
    terminated: bool,
}

impl GameState {
    pub fn new(original: HyperFormula) -> Self {
        let mut status = BTreeMap::new();
        original.tree().walk(|path, node| {
            let s = match node {
                Formula::Choice { .. } => NodeStatus::Choice { chosen: None },
                Formula::Seq { underline, .. } => NodeStatus::Seq { leading: *underline, catchup: *underline },
                Formula::Lit(l) if l.is_general() => NodeStatus::Atom { run: Vec::new() },
                _ => return,
            };
            status.insert(path.clone(), s);
        });
        GameState { original, status, run: Run::default(), terminated: false }
    }

    pub fn original(&self) -> &HyperFormula {
        &self.original
    }

    pub fn run(&self) -> &Run {
        &self.run
    }

    pub fn status(&self, path: &Path) -> Option<&NodeStatus> {
        self.status.get(path)
    }

    pub fn statuses(&self) -> &BTreeMap<Path, NodeStatus> {
        &self.status
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn terminate(&mut self) {
        self.terminated = true;
    }

    pub fn chosen(&self, path: &Path) -> Option<usize> {
        match self.status.get(path) {
            Some(NodeStatus::Choice { chosen }) => *chosen,
            _ => None,
        }
    }

    /// `(leading, catchup)` switch counts of a sequential node.
    pub fn switches(&self, path: &Path) -> Option<(usize, usize)> {
        match self.status.get(path) {
            Some(NodeStatus::Seq { leading, catchup }) => Some((*leading, *catchup)),
            _ => None,
        }
    }

    pub fn atom_run(&self, path: &Path) -> Option<&[(Player, String)]> {
        match self.status.get(path) {
            Some(NodeStatus::Atom { run }) => Some(run),
            _ => None,
        }
    }

    /// The node at `path` can be moved in: every enclosing choice has been
    /// resolved to the branch on the path and every enclosing chain has
    /// been switched at least as far as the component on the path.
    pub fn reachable(&self, path: &Path) -> bool {
        if self.original.get(path).is_none() {
            return false;
        }
        (0..path.0.len()).all(|depth| {
            let ancestor = Path(path.0[..depth].to_vec());
            let i = path.0[depth];
            match self.status.get(&ancestor) {
                Some(NodeStatus::Choice { chosen }) => *chosen == Some(i),
                Some(NodeStatus::Seq { leading, .. }) => i <= *leading,
                _ => true,
            }
        })
    }

    pub fn check(&self, mv: &Move) -> Result<(), RuntimeError> {
        if self.terminated {
            return Err(illegal(mv, "session has terminated"));
        }
        let node = self.original.get(&mv.path).ok_or_else(|| illegal(mv, "no such node"))?;
        if !self.reachable(&mv.path) {
            return Err(illegal(mv, "node is not reachable"));
        }
        match (&mv.payload, node) {
            (MovePayload::Choose(i), Formula::Choice { op, children, .. }) => {
                let owner = if *op == ChoiceOp::Env { Player::Env } else { Player::Machine };
                if mv.player != owner {
                    return Err(illegal(mv, "choice belongs to the other player"));
                }
                if self.chosen(&mv.path).is_some() {
                    return Err(illegal(mv, "choice already made"));
                }
                if *i >= children.len() {
                    return Err(illegal(mv, format!("no component {i}")));
                }
                Ok(())
            }
            (MovePayload::Switch, Formula::Seq { op, children, .. }) => {
                let leader = if *op == SeqOp::EnvLed { Player::Env } else { Player::Machine };
                let (leading, catchup) = self.switches(&mv.path).expect("sequential status");
                if mv.player == leader {
                    if leading + 1 >= children.len() {
                        return Err(illegal(mv, "chain exhausted"));
                    }
                } else if catchup >= leading {
                    return Err(illegal(mv, "nothing to catch up with"));
                }
                Ok(())
            }
            (MovePayload::Atom(_), Formula::Lit(l)) if l.is_general() => Ok(()),
            (MovePayload::Atom(_), _) => Err(illegal(mv, "atom moves need a general literal")),
            (MovePayload::Choose(_), _) => Err(illegal(mv, "not a choice node")),
            (MovePayload::Switch, _) => Err(illegal(mv, "not a sequential node")),
        }
    }

    pub fn legal(&self, mv: &Move) -> bool {
        self.check(mv).is_ok()
    }

    pub fn apply(&mut self, mv: Move) -> Result<(), RuntimeError> {
        self.check(&mv)?;
        let leader = match self.original.get(&mv.path) {
            Some(Formula::Seq { op: SeqOp::EnvLed, .. }) => Some(Player::Env),
            Some(Formula::Seq { op: SeqOp::MachineLed, .. }) => Some(Player::Machine),
            _ => None,
        };
        match (self.status.get_mut(&mv.path), &mv.payload) {
            (Some(NodeStatus::Choice { chosen }), MovePayload::Choose(i)) => *chosen = Some(*i),
            (Some(NodeStatus::Seq { leading, catchup }), MovePayload::Switch) => {
                if Some(mv.player) == leader {
                    *leading += 1;
                } else {
                    *catchup += 1;
                }
            }
            (Some(NodeStatus::Atom { run }), MovePayload::Atom(t)) => run.push((mv.player, t.clone())),
            _ => unreachable!("check validated the node kind"),
        }
        self.run.0.push(mv);
        Ok(())
    }

    /// Every legal move of `player`, with atom moves drawn from `texts`.
    pub fn legal_moves(&self, player: Player, texts: &[&str]) -> Vec<Move> {
        let mut out = Vec::new();
        self.original.tree().walk(|path, node| {
            let candidates: Vec<MovePayload> = match node {
                Formula::Choice { children, .. } => (0..children.len()).map(MovePayload::Choose).collect(),
                Formula::Seq { .. } => vec![MovePayload::Switch],
                Formula::Lit(l) if l.is_general() => texts.iter().map(|t| MovePayload::Atom(t.to_string())).collect(),
                _ => Vec::new(),
            };
            for payload in candidates {
                let mv = Move::new(player, path.clone(), payload);
                if self.legal(&mv) {
                    out.push(mv);
                }
            }
        });
        out
    }

    pub fn winner(&self, interp: &Interpretation) -> Result<Player, RuntimeError> {
        if !self.terminated {
            return Err(RuntimeError::NotTerminated);
        }
        Ok(self.evaluate(interp))
    }

    /// Winner of the current position as if the session ended now.
    pub fn evaluate(&self, interp: &Interpretation) -> Player {
        self.eval_at(self.original.tree(), &mut Path::root(), interp)
    }

    fn eval_at(&self, node: &Formula, path: &mut Path, interp: &Interpretation) -> Player {
        let child = |i: usize, path: &mut Path| {
            path.0.push(i);
            let w = self.eval_at(&node.children()[i], path, interp);
            path.0.pop();
            w
        };
        match node {
            Formula::Const(true) => Player::Machine,
            Formula::Const(false) => Player::Env,
            Formula::Lit(l) if l.is_general() => {
                let run = self.atom_run(path).unwrap_or_default();
                interp.literal_verdict(&l.atom, l.negated, run)
            }
            Formula::Lit(l) => {
                if interp.value(&l.atom) != l.negated {
                    Player::Machine
                } else {
                    Player::Env
                }
            }
            Formula::Par { op, children } => {
                let target = if *op == ParOp::And { Player::Env } else { Player::Machine };
                // ∧ is lost by one lost conjunct, ∨ won by one won disjunct
                if (0..children.len()).any(|i| child(i, path) == target) {
                    target
                } else {
                    target.complement()
                }
            }
            Formula::Choice { op, .. } => match self.chosen(path) {
                Some(i) => child(i, path),
                None if *op == ChoiceOp::Env => Player::Machine,
                None => Player::Env,
            },
            Formula::Seq { .. } => {
                let (leading, _) = self.switches(path).expect("sequential status");
                child(leading, path)
            }
        }
    }

    /// Environment atom-moves in either occurrence that the machine has not
    /// copied, in order, into the other.
    pub fn mirror_deficit(&self, a: &Path, b: &Path) -> Result<usize, RuntimeError> {
        let lit = |p: &Path| match self.original.get(p) {
            Some(Formula::Lit(l)) if l.is_general() => Some(l),
            _ => None,
        };
        let (Some(la), Some(lb)) = (lit(a), lit(b)) else {
            return Err(RuntimeError::UnknownPair(a.clone(), b.clone()));
        };
        if la.atom != lb.atom || la.negated == lb.negated {
            return Err(RuntimeError::UnknownPair(a.clone(), b.clone()));
        }
        let moves = |p: &Path, who: Player| -> Vec<String> {
            self.atom_run(p).unwrap_or_default().iter().filter(|(q, _)| *q == who).map(|(_, t)| t.clone()).collect()
        };
        let one_way = |from: &Path, to: &Path| {
            let env = moves(from, Player::Env);
            let copied = moves(to, Player::Machine);
            let lcp = env.iter().zip(&copied).take_while(|(x, y)| x == y).count();
            env.len() - lcp
        };
        Ok(one_way(a, b) + one_way(b, a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::hyper::to_hyper;

    fn state(s: &str) -> GameState {
        GameState::new(to_hyper(&parse_formula(s).unwrap()))
    }

    fn mv(s: &str) -> Move {
        s.parse().unwrap()
    }

    fn vals(pairs: &[(&str, bool)]) -> BTreeMap<Atom, bool> {
        pairs.iter().map(|(a, b)| (Atom::new(*a).unwrap(), *b)).collect()
    }

    #[test]
    fn move_text_round_trip() {
        for s in ["⊤ 1.0.2 choose:3", "⊥ - switch", "⊥ 0 atom:hello"] {
            assert_eq!(mv(s).to_string(), s);
        }
        assert!("⊤ 1 jump".parse::<Move>().is_err());
    }

    #[test]
    fn choice_legality() {
        let s = state("p & q");
        assert!(s.legal(&mv("⊥ - choose:0")));
        assert!(!s.legal(&mv("⊤ - choose:0")));
        assert!(!s.legal(&mv("⊥ - choose:2")));
        assert!(!s.legal(&mv("⊥ 0 atom:x")));
    }

    #[test]
    fn switch_legality_and_exhaustion() {
        let mut s = state("b0 # b1 # b2");
        assert!(s.legal(&mv("⊥ - switch")));
        assert!(!s.legal(&mv("⊤ - switch")), "catch-up before any leading switch");
        s.apply(mv("⊥ - switch")).unwrap();
        s.apply(mv("⊥ - switch")).unwrap();
        assert_eq!(s.switches(&Path::root()), Some((2, 0)));
        assert!(matches!(s.apply(mv("⊥ - switch")), Err(RuntimeError::Illegal { .. })));
        s.apply(mv("⊤ - switch")).unwrap();
        s.apply(mv("⊤ - switch")).unwrap();
        assert!(!s.legal(&mv("⊤ - switch")));
    }

    #[test]
    fn winners() {
        let interp = Interpretation::constant(vals(&[("p", true)]), Player::Machine);
        let mut s = state("p");
        s.terminate();
        assert_eq!(s.winner(&interp), Ok(Player::Machine));

        let mut s = state("p + q");
        s.terminate();
        assert_eq!(s.winner(&interp), Ok(Player::Env));

        let interp = Interpretation::constant(vals(&[("b1", true)]), Player::Machine);
        let mut s = state("b0 # b1");
        s.apply(mv("⊥ - switch")).unwrap();
        s.terminate();
        assert_eq!(s.winner(&interp), Ok(Player::Machine));

        let mut s = state("p + q");
        s.apply(mv("⊤ - choose:1")).unwrap();
        s.terminate();
        assert_eq!(s.winner(&Interpretation::constant(vals(&[("q", true)]), Player::Env)), Ok(Player::Machine));
        assert_eq!(state("p").winner(&interp), Err(RuntimeError::NotTerminated));
    }

    #[test]
    fn unreachable_branches_reject_moves() {
        let mut s = state("(P + Q) & R");
        assert!(!s.legal(&mv("⊤ 0 choose:0")));
        s.apply(mv("⊥ - choose:0")).unwrap();
        assert!(s.legal(&mv("⊤ 0 choose:0")));
        assert!(!s.legal(&mv("⊥ 1 atom:a")));
        let s = state("P # Q");
        assert!(s.legal(&mv("⊥ 0 atom:a")));
        assert!(!s.legal(&mv("⊥ 1 atom:a")));
    }

    #[test]
    fn copycat_deficit() {
        let mut s = state("~P \\/ P");
        let (a, b) = (Path(vec![0]), Path(vec![1]));
        assert_eq!(s.mirror_deficit(&a, &b), Ok(0));
        s.apply(mv("⊥ 0 atom:x")).unwrap();
        assert_eq!(s.mirror_deficit(&a, &b), Ok(1));
        s.apply(mv("⊤ 1 atom:x")).unwrap();
        assert_eq!(s.mirror_deficit(&a, &b), Ok(0));
        assert!(s.mirror_deficit(&a, &a).is_err());
        s.terminate();
        for seed in 0..20 {
            assert_eq!(s.winner(&Interpretation::hashed(BTreeMap::new(), seed)), Ok(Player::Machine));
        }
    }
}
