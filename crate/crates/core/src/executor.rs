//! Proof-directed play. A [`Session`] walks a proof from the root while the
//! game state records moves against the original formula; the proof node
//! under the cursor always describes the live view of the game.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{negate, skeleton, AgentName, Atom, Formula, Literal, Path, SeqOp};
use crate::hyper::{self, Activity, HyperFormula, Selector};
use crate::prover::{Action, Proof};
use crate::runtime::{GameState, Move, MovePayload, Player, RuntimeError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Illegal(#[from] RuntimeError),
    #[error("move by the machine cannot be fed as an environment move")]
    NotEnvironment,
    #[error("session has terminated")]
    Terminated,
    #[error("proof does not conclude the session formula")]
    ProofMismatch,
    #[error("no Wait premise matches the position after {0}")]
    NoPremise(Move),
}

/// Which Wait case handled an environment move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaitCase {
    /// Abandoned subformula or widowed hybrid literal.
    Abandoned,
    /// Active general atom.
    GeneralAtom,
    /// Catch-up switch in a machine-led chain.
    CatchUp,
    /// Move in a live hybrid occurrence, mirrored into its twin.
    Mirror,
    /// Environment choice.
    Choice,
    /// Leading switch in an environment-led chain, echoed.
    LeadingSwitch,
}

impl WaitCase {
    pub fn number(self) -> u8 {
        match self {
            WaitCase::Abandoned => 1,
            WaitCase::GeneralAtom => 2,
            WaitCase::CatchUp => 3,
            WaitCase::Mirror => 4,
            WaitCase::Choice => 5,
            WaitCase::LeadingSwitch => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvStep {
    pub case: WaitCase,
    /// Machine moves made in response, including the rule steps taken
    /// until the next Wait node.
    pub emitted: Vec<Move>,
}

/// A knowledgebase entry that must be queried from its provider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Activation {
    /// Path of the negated entry in the session formula.
    pub path: Path,
    pub agent: AgentName,
    /// The entry itself, annotations erased.
    pub formula: Formula,
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    state: GameState,
    cursor: Proof,
    collapsed: BTreeSet<Path>,
    hybrids: BTreeMap<Path, Atom>,
    kb_entries: usize,
    /// Annotated entry path → (provider, remote session id once known).
    pub bindings: BTreeMap<Path, (AgentName, Option<String>)>,
}

impl Session {
    /// `kb_entries` is the number of leading negated knowledgebase
    /// disjuncts in `goal` (0 for a bare query).
    pub fn new(id: impl Into<String>, goal: &Formula, proof: Proof, kb_entries: usize) -> Result<Self, ExecError> {
        Self::with_state(id, GameState::new(hyper::to_hyper(goal)), proof, kb_entries)
    }

    /// Start from an existing game position; choices already made are
    /// folded into the view, and the proof must conclude that view.
    pub fn with_state(
        id: impl Into<String>,
        state: GameState,
        proof: Proof,
        kb_entries: usize,
    ) -> Result<Self, ExecError> {
        let collapsed = chosen_choices(&state);
        let s = Session {
            id: id.into(),
            state,
            cursor: proof,
            collapsed,
            hybrids: BTreeMap::new(),
            kb_entries,
            bindings: BTreeMap::new(),
        };
        if s.cursor.conclusion != s.view() {
            return Err(ExecError::ProofMismatch);
        }
        Ok(s)
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn cursor(&self) -> &Proof {
        &self.cursor
    }

    pub fn into_state(self) -> GameState {
        self.state
    }

    pub fn kb_entries(&self) -> usize {
        self.kb_entries
    }

    /// Pairs of original paths holding the two occurrences of each hybrid.
    pub fn hybrid_pairs(&self) -> Vec<(Path, Path)> {
        let mut by_atom: BTreeMap<&Atom, Vec<&Path>> = BTreeMap::new();
        for (p, q) in &self.hybrids {
            by_atom.entry(q).or_default().push(p);
        }
        by_atom.into_values().filter(|ps| ps.len() == 2).map(|ps| (ps[0].clone(), ps[1].clone())).collect()
    }

    /// Hybrid pairs whose occurrences both lie in current chain
    /// components; pairs left behind by a switch no longer need copying.
    pub fn live_hybrid_pairs(&self) -> Vec<(Path, Path)> {
        let view = self.view();
        let active = |p: &Path| {
            self.to_view(p)
                .and_then(|v| hyper::occurrence_at(&view, &v))
                .is_some_and(|o| o.activity == Activity::Active)
        };
        self.hybrid_pairs().into_iter().filter(|(a, b)| active(a) && active(b)).collect()
    }

    /// The live hyperformula: resolved choices that the proof has passed
    /// replaced by their chosen component, underlines at the machine's
    /// switch counts, hybrids where Match has paired literals.
    pub fn view(&self) -> HyperFormula {
        render_view(&self.state, &self.collapsed, &self.hybrids)
    }

    /// The view a fresh session over `state` starts from: every resolved
    /// choice folded, no hybrids.
    pub fn position_view(state: &GameState) -> HyperFormula {
        render_view(state, &chosen_choices(state), &BTreeMap::new())
    }

    /// Original path of a node addressed in the view.
    pub fn to_original(&self, view_path: &Path) -> Path {
        let mut orig = Path::root();
        let mut rest = view_path.0.iter();
        loop {
            if self.collapsed.contains(&orig) {
                let i = self.state.chosen(&orig).expect("collapsed choices are resolved");
                orig.0.push(i);
                continue;
            }
            match rest.next() {
                Some(&i) => orig.0.push(i),
                None => return orig,
            }
        }
    }

    /// View path of an original node; `None` inside a branch the view
    /// has discarded.
    pub fn to_view(&self, orig: &Path) -> Option<Path> {
        let mut out = Path::root();
        for depth in 0..orig.0.len() {
            let prefix = Path(orig.0[..depth].to_vec());
            let i = orig.0[depth];
            if self.collapsed.contains(&prefix) {
                if self.state.chosen(&prefix) != Some(i) {
                    return None;
                }
            } else {
                out.0.push(i);
            }
        }
        Some(out)
    }

    pub fn at_wait(&self) -> bool {
        matches!(self.cursor.action, Action::Wait)
    }

    /// At a Wait node with no premises: nothing the environment does can
    /// move the cursor again.
    pub fn at_leaf(&self) -> bool {
        self.at_wait() && self.cursor.premises.is_empty()
    }

    /// One outgoing query per knowledgebase entry annotated with a single
    /// provider; the binding table records the provider.
    pub fn activate(&mut self) -> Vec<Activation> {
        let mut out = Vec::new();
        if self.kb_entries == 0 {
            return out;
        }
        let root = self.state.original().tree().clone();
        for (i, negated_entry) in root.children().iter().take(self.kb_entries).enumerate() {
            let Some(agent) = negated_entry.uniform_env() else { continue };
            let path = Path(vec![i]);
            self.bindings.insert(path.clone(), (agent.clone(), None));
            out.push(Activation { path, agent: agent.clone(), formula: skeleton(&negate(negated_entry)) });
        }
        out
    }

    fn apply(&mut self, mv: Move) -> Result<(), ExecError> {
        self.state.apply(mv)?;
        Ok(())
    }

    fn descend_to_view(&mut self, after: &Move) -> Result<(), ExecError> {
        let view = self.view();
        let idx = self
            .cursor
            .premises
            .iter()
            .position(|p| p.conclusion == view)
            .ok_or_else(|| ExecError::NoPremise(after.clone()))?;
        let next = self.cursor.premises.swap_remove(idx);
        self.cursor = next;
        Ok(())
    }

    /// Follow machine rules from the cursor until a Wait node.
    pub fn advance(&mut self) -> Result<Vec<Move>, ExecError> {
        if self.state.is_terminated() {
            return Err(ExecError::Terminated);
        }
        let mut emitted = Vec::new();
        loop {
            match self.cursor.action.clone() {
                Action::Wait => break,
                Action::Choose { path, index } => {
                    let orig = self.to_original(&path);
                    let mv = Move::new(Player::Machine, orig.clone(), MovePayload::Choose(index));
                    self.apply(mv.clone())?;
                    self.collapsed.insert(orig);
                    emitted.push(mv);
                }
                Action::Switch { path } => {
                    let mv = Move::new(Player::Machine, self.to_original(&path), MovePayload::Switch);
                    self.apply(mv.clone())?;
                    emitted.push(mv);
                }
                Action::Match { pos, neg, fresh } => {
                    let (pos, neg) = (self.to_original(&pos), self.to_original(&neg));
                    self.hybrids.insert(pos.clone(), fresh.clone());
                    self.hybrids.insert(neg.clone(), fresh);
                    for (from, to) in [(&neg, &pos), (&pos, &neg)] {
                        for mv in self.pending_copies(from, to) {
                            self.apply(mv.clone())?;
                            emitted.push(mv);
                        }
                    }
                }
            }
            let next = self.cursor.premises.pop().expect("non-Wait nodes have one premise");
            self.cursor = next;
            debug_assert_eq!(self.cursor.conclusion, self.view());
        }
        Ok(emitted)
    }

    /// Machine copies of environment moves in `from` not yet mirrored into
    /// `to`.
    fn pending_copies(&self, from: &Path, to: &Path) -> Vec<Move> {
        let moves = |p: &Path, who: Player| -> Vec<String> {
            let run = self.state.atom_run(p).unwrap_or_default();
            run.iter().filter(|(q, _)| *q == who).map(|(_, t)| t.clone()).collect()
        };
        let env = moves(from, Player::Env);
        let done = moves(to, Player::Machine).len();
        env.into_iter().skip(done).map(|t| Move::new(Player::Machine, to.clone(), MovePayload::Atom(t))).collect()
    }

    fn twin(&self, orig: &Path) -> Option<Path> {
        let q = self.hybrids.get(orig)?;
        self.hybrids.iter().find(|(p, r)| *p != orig && *r == q).map(|(p, _)| p.clone())
    }

    /// Classify which Wait case `mv` falls under. The move must be legal.
    fn classify(&self, mv: &Move) -> Result<WaitCase, ExecError> {
        let view = self.view();
        let vp = self.to_view(&mv.path).ok_or_else(|| {
            ExecError::Illegal(RuntimeError::Illegal { mv: mv.clone(), reason: "branch not chosen".into() })
        })?;
        let occ = hyper::occurrence_at(&view, &vp).expect("legal moves address live nodes");
        if occ.activity == Activity::Abandoned {
            return Ok(WaitCase::Abandoned);
        }
        let node = view.get(&vp).expect("path checked");
        Ok(match (&mv.payload, node) {
            (MovePayload::Atom(_), Formula::Lit(l)) if l.hybrid.is_some() => {
                if hyper::widowed(&view, &vp).unwrap_or(false) {
                    WaitCase::Abandoned
                } else {
                    WaitCase::Mirror
                }
            }
            (MovePayload::Atom(_), _) => WaitCase::GeneralAtom,
            (MovePayload::Switch, Formula::Seq { op: SeqOp::MachineLed, .. }) => WaitCase::CatchUp,
            (MovePayload::Switch, _) => WaitCase::LeadingSwitch,
            (MovePayload::Choose(_), _) => WaitCase::Choice,
        })
    }

    /// Process one environment move at the current Wait node, then follow
    /// machine rules to the next Wait node. Illegal moves leave the
    /// session unchanged.
    pub fn env_move(&mut self, mv: Move) -> Result<EnvStep, ExecError> {
        if self.state.is_terminated() {
            return Err(ExecError::Terminated);
        }
        if mv.player != Player::Env {
            return Err(ExecError::NotEnvironment);
        }
        self.state.check(&mv)?;
        let case = self.classify(&mv)?;
        let mut emitted = Vec::new();
        self.apply(mv.clone())?;
        match case {
            WaitCase::Abandoned | WaitCase::GeneralAtom | WaitCase::CatchUp => {}
            WaitCase::Mirror => {
                let twin = self.twin(&mv.path).expect("live hybrids have twins");
                let echo = Move::new(Player::Machine, twin, mv.payload.clone());
                self.apply(echo.clone())?;
                emitted.push(echo);
            }
            WaitCase::Choice => {
                self.collapsed.insert(mv.path.clone());
                self.descend_to_view(&mv)?;
            }
            WaitCase::LeadingSwitch => {
                let echo = Move::new(Player::Machine, mv.path.clone(), MovePayload::Switch);
                self.apply(echo.clone())?;
                emitted.push(echo);
                self.descend_to_view(&mv)?;
            }
        }
        emitted.extend(self.advance()?);
        Ok(EnvStep { case, emitted })
    }

    /// The machine still has a leading switch available in an active
    /// surface machine-led chain.
    pub fn has_remaining_switch(&self) -> bool {
        let view = self.view();
        hyper::active_surface(&view, Selector::MachineLedNodes).iter().any(|p| match view.get(p) {
            Some(Formula::Seq { children, underline, .. }) => underline + 1 < children.len(),
            _ => false,
        })
    }

    pub fn classify_solved(&self) -> SolveStatus {
        if self.has_remaining_switch() {
            SolveStatus::TemporarilySolved
        } else {
            SolveStatus::CompletelySolved
        }
    }

    pub fn terminate(&mut self) {
        self.state.terminate();
    }
}

fn chosen_choices(state: &GameState) -> BTreeSet<Path> {
    let mut out = BTreeSet::new();
    state.original().tree().walk(|p, node| {
        if matches!(node, Formula::Choice { .. }) && state.chosen(p).is_some() {
            out.insert(p.clone());
        }
    });
    out
}

fn render_view(state: &GameState, collapsed: &BTreeSet<Path>, hybrids: &BTreeMap<Path, Atom>) -> HyperFormula {
    fn go(cx: (&GameState, &BTreeSet<Path>, &BTreeMap<Path, Atom>), node: &Formula, path: &mut Path) -> Formula {
        let (state, collapsed, hybrids) = cx;
        let sub = |i: usize, path: &mut Path| {
            path.0.push(i);
            let f = go(cx, &node.children()[i], path);
            path.0.pop();
            f
        };
        match node {
            Formula::Choice { .. } if collapsed.contains(path) => {
                sub(state.chosen(path).expect("collapsed choices are resolved"), path)
            }
            Formula::Choice { op, children, env } => Formula::Choice {
                op: *op,
                children: (0..children.len()).map(|i| sub(i, path)).collect(),
                env: env.clone(),
            },
            Formula::Par { op, children } => {
                Formula::Par { op: *op, children: (0..children.len()).map(|i| sub(i, path)).collect() }
            }
            Formula::Seq { op, children, env, .. } => {
                let (leading, catchup) = state.switches(path).expect("sequential status");
                let underline = if *op == SeqOp::EnvLed { catchup } else { leading };
                Formula::Seq {
                    op: *op,
                    children: (0..children.len()).map(|i| sub(i, path)).collect(),
                    env: env.clone(),
                    underline,
                }
            }
            Formula::Lit(l) => Formula::Lit(Literal { hybrid: hybrids.get(path).cloned(), ..l.clone() }),
            Formula::Const(_) => node.clone(),
        }
    }
    HyperFormula::from_tree(go((state, collapsed, hybrids), state.original().tree(), &mut Path::root()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    CompletelySolved,
    TemporarilySolved,
    Failed,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::CompletelySolved => "completely",
            SolveStatus::TemporarilySolved => "temporarily",
            SolveStatus::Failed => "failed",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub status: SolveStatus,
    pub state: GameState,
    /// Environment moves the driver offered that were illegal.
    pub rejected: Vec<(Move, String)>,
    /// Wait case and emitted moves for every accepted environment move.
    pub steps: Vec<(Move, EnvStep)>,
    /// Machine moves made before the first environment move.
    pub opening: Vec<Move>,
    /// Hybrid pairs at the end of the session.
    pub hybrid_pairs: Vec<(Path, Path)>,
    /// `mirror_deficit` summed over live hybrid pairs after each accepted
    /// step.
    pub deficits: Vec<usize>,
}

/// Supplier of environment moves.
pub trait EnvDriver {
    /// Next environment move, or `None` to stop playing.
    fn next_move(&mut self, session: &Session) -> Option<Move>;
}

/// Never moves.
pub struct SilentDriver;

impl EnvDriver for SilentDriver {
    fn next_move(&mut self, _: &Session) -> Option<Move> {
        None
    }
}

/// Plays a fixed list of moves.
pub struct ScriptedDriver(pub VecDeque<Move>);

impl ScriptedDriver {
    pub fn new(moves: impl IntoIterator<Item = Move>) -> Self {
        ScriptedDriver(moves.into_iter().collect())
    }
}

impl EnvDriver for ScriptedDriver {
    fn next_move(&mut self, _: &Session) -> Option<Move> {
        self.0.pop_front()
    }
}

/// Uniform choice among legal environment moves, atom moves drawn from a
/// small alphabet, up to a move limit.
pub struct RandomDriver {
    rng: ChaCha8Rng,
    remaining: usize,
}

pub const ATOM_TEXTS: [&str; 3] = ["a", "b", "c"];

impl RandomDriver {
    pub fn new(seed: u64, max_moves: usize) -> Self {
        RandomDriver { rng: ChaCha8Rng::seed_from_u64(seed), remaining: max_moves }
    }
}

impl EnvDriver for RandomDriver {
    fn next_move(&mut self, session: &Session) -> Option<Move> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        session.state().legal_moves(Player::Env, &ATOM_TEXTS).choose(&mut self.rng).cloned()
    }
}

fn total_deficit(s: &Session) -> usize {
    s.live_hybrid_pairs().iter().map(|(a, b)| s.state().mirror_deficit(a, b).unwrap_or(0)).sum()
}

/// Play `proof` of `goal` against `driver` until the driver stops, then
/// terminate the session.
pub fn run_session(goal: &Formula, proof: &Proof, driver: &mut dyn EnvDriver) -> Result<SessionOutcome, ExecError> {
    let mut s = Session::new("local", goal, proof.clone(), 0)?;
    let opening = s.advance()?;
    let mut outcome = SessionOutcome {
        status: SolveStatus::CompletelySolved,
        state: s.state().clone(),
        rejected: Vec::new(),
        steps: Vec::new(),
        opening,
        hybrid_pairs: Vec::new(),
        deficits: Vec::new(),
    };
    while let Some(mv) = driver.next_move(&s) {
        match s.env_move(mv.clone()) {
            Ok(step) => {
                outcome.deficits.push(total_deficit(&s));
                outcome.steps.push((mv, step));
            }
            Err(e @ (ExecError::Illegal(_) | ExecError::NotEnvironment)) => outcome.rejected.push((mv, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    outcome.status = s.classify_solved();
    outcome.hybrid_pairs = s.hybrid_pairs();
    s.terminate();
    outcome.state = s.into_state();
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::prover::prove;
    use crate::runtime::Interpretation;

    const CHAIN_COPY: &str = "(b0 # b1 # b2)^u -> (b0 # b1 # b2)^w";

    fn setup(s: &str) -> (Formula, Proof) {
        let g = parse_formula(s).unwrap();
        let p = prove(&g).proof().cloned().expect("provable");
        (g, p)
    }

    fn mv(s: &str) -> Move {
        s.parse().unwrap()
    }

    #[test]
    fn chain_copy_with_two_switches() {
        let (g, p) = setup(CHAIN_COPY);
        let mut d = ScriptedDriver::new([mv("⊥ 1 switch"), mv("⊥ 1 switch")]);
        let out = run_session(&g, &p, &mut d).unwrap();
        assert!(out.rejected.is_empty());
        assert_eq!(out.status, SolveStatus::CompletelySolved);
        let cases: Vec<WaitCase> = out.steps.iter().map(|(_, s)| s.case).collect();
        assert_eq!(cases, vec![WaitCase::LeadingSwitch, WaitCase::LeadingSwitch]);
        for (_, step) in &out.steps {
            let rendered: Vec<String> = step.emitted.iter().map(Move::to_string).collect();
            assert_eq!(rendered, vec!["⊤ 1 switch", "⊤ 0 switch"]);
        }
        assert_eq!(out.state.switches(&Path(vec![0])), Some((2, 0)));
        assert_eq!(out.state.switches(&Path(vec![1])), Some((2, 2)));
        let interp = Interpretation::constant(BTreeMap::new(), Player::Env);
        assert_eq!(out.state.winner(&interp), Ok(Player::Machine));
    }

    #[test]
    fn chain_copy_silent_is_temporary() {
        let (g, p) = setup(CHAIN_COPY);
        let out = run_session(&g, &p, &mut SilentDriver).unwrap();
        assert_eq!(out.status, SolveStatus::TemporarilySolved);
        assert!(out.opening.is_empty());
    }

    #[test]
    fn third_switch_is_rejected() {
        let (g, p) = setup(CHAIN_COPY);
        let mut d = ScriptedDriver::new([mv("⊥ 1 switch"), mv("⊥ 1 switch"), mv("⊥ 1 switch")]);
        let out = run_session(&g, &p, &mut d).unwrap();
        assert_eq!(out.rejected.len(), 1);
    }

    #[test]
    fn trivial_goal() {
        let (g, p) = setup("p -> p");
        let out = run_session(&g, &p, &mut RandomDriver::new(1, 5)).unwrap();
        assert_eq!(out.status, SolveStatus::CompletelySolved);
    }

    #[test]
    fn choose_is_played_first() {
        let (g, p) = setup("(~p \\/ p) + q");
        let out = run_session(&g, &p, &mut SilentDriver).unwrap();
        assert_eq!(out.opening, vec![mv("⊤ - choose:0")]);
    }

    #[test]
    fn copycat_mirrors_both_ways() {
        let (g, p) = setup("P -> P");
        let mut d = ScriptedDriver::new([mv("⊥ 0 atom:x"), mv("⊥ 1 atom:y"), mv("⊥ 0 atom:z")]);
        let out = run_session(&g, &p, &mut d).unwrap();
        let cases: Vec<WaitCase> = out.steps.iter().map(|(_, s)| s.case).collect();
        assert_eq!(cases, vec![WaitCase::Mirror; 3]);
        assert_eq!(out.steps[1].1.emitted, vec![mv("⊤ 0 atom:y")]);
        assert_eq!(out.deficits, vec![0, 0, 0]);
    }

    #[test]
    fn env_choice_descends() {
        let (g, p) = setup("(p & q) -> (p & q)");
        let mut d = ScriptedDriver::new([mv("⊥ 1 choose:1")]);
        let out = run_session(&g, &p, &mut d).unwrap();
        assert_eq!(out.steps[0].1.case, WaitCase::Choice);
        assert_eq!(out.steps[0].1.emitted, vec![mv("⊤ 0 choose:1")]);
    }

    #[test]
    fn widowed_moves_are_recorded_only() {
        let (g, p) = setup("(P # (r \\/ ~r)) \\/ ~P");
        assert!(p.contains_rule(crate::prover::Rule::Match));
        let mut s = Session::new("t", &g, p, 0).unwrap();
        s.advance().unwrap();
        s.env_move(mv("⊥ 0 switch")).unwrap();
        let widow = Path(vec![1]);
        assert!(hyper::widowed(&s.view(), &widow).unwrap());
        let step = s.env_move(mv("⊥ 1 atom:a")).unwrap();
        assert_eq!(step.case, WaitCase::Abandoned);
        assert!(step.emitted.is_empty());
        let abandoned = s.env_move(mv("⊥ 0.0 atom:b")).unwrap();
        assert_eq!(abandoned.case, WaitCase::Abandoned);
    }

    #[test]
    fn activation_targets_annotated_entries() {
        let kb = vec![parse_formula("(d0 # d1 # d2)^kim").unwrap(), parse_formula("(b0 # b1 # b2)^db").unwrap()];
        let q = parse_formula("p -> p").unwrap();
        let goal = crate::formula::compile_query(&kb, &q);
        let proof = prove(&goal).proof().cloned().unwrap();
        let mut s = Session::new("m:1", &goal, proof, 2).unwrap();
        let acts = s.activate();
        let who: Vec<&str> = acts.iter().map(|a| a.agent.as_str()).collect();
        assert_eq!(who, vec!["kim", "db"]);
        assert_eq!(acts[0].formula, parse_formula("d0 # d1 # d2").unwrap());
        let mut bare = Session::new("x", &q, prove(&q).proof().cloned().unwrap(), 0).unwrap();
        assert!(bare.activate().is_empty());
    }
}
