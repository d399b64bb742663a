//! One agent: its knowledgebase, outgoing bindings, incoming queries and
//! the scheduler over them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use super::kb::{provider_view, KbState};
use super::wire::{session_origin, Message};
use crate::executor::{Session, SolveStatus};
use crate::formula::{
    compile_query, parse_formula, pretty, skeleton, AgentKind, AgentName, AgentSpec, Atom, Formula, Path,
};
use crate::hyper::to_hyper;
use crate::prover::{prove_hyper, ProveResult, DEFAULT_BUDGET};
use crate::runtime::{GameState, Move, MovePayload, Player};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    Internal,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::Internal => "int",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BindingStatus {
    Open,
    Answered,
    Done,
    Failed(String),
}

/// A query this agent sent to a provider, either to activate a
/// knowledgebase entry or from a script.
#[derive(Clone, Debug)]
pub struct Binding {
    /// Knowledgebase entry index; `None` for scripted queries.
    pub entry: Option<usize>,
    pub provider: AgentName,
    pub session: String,
    pub formula: Formula,
    /// Moves on the wire, paths relative to the entry; ⊤ is the provider.
    pub moves: Vec<Move>,
    pub status: BindingStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryStatus {
    Queued,
    Live(SolveStatus),
    Finished,
    Failed,
}

/// A query received from another agent.
#[derive(Clone, Debug)]
pub struct QueryRecord {
    pub session: String,
    pub origin: AgentName,
    pub goal: Formula,
    /// Moves on the wire, paths relative to the query; ⊤ is this agent.
    pub moves: Vec<Move>,
    /// Moves from the origin that arrived before the first solve.
    pub pending: VecDeque<Move>,
    pub exec: Option<Session>,
    /// Knowledgebase revision the current solution was computed against.
    pub snapshot: u64,
    pub status: QueryStatus,
    pub announced: bool,
    /// Game position kept by agents that answer without a proof.
    pub wire_state: Option<GameState>,
}

impl QueryRecord {
    fn in_flight(&self) -> bool {
        !matches!(self.status, QueryStatus::Finished | QueryStatus::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptAction {
    /// Leading switch on the latest query received from the agent.
    Switch(AgentName),
    Query(AgentName, String),
    Raw(String),
}

pub struct Agent {
    pub name: AgentName,
    pub kind: AgentKind,
    kb: KbState,
    bindings: Vec<Binding>,
    qi: VecDeque<String>,
    qs: VecDeque<String>,
    queries: BTreeMap<String, QueryRecord>,
    counter: u64,
    budget: u64,
    outbox: Vec<Message>,
    log: Vec<(Direction, String)>,
    idle_noted: bool,
    activated: bool,
    script: Vec<(u64, ScriptAction)>,
    oracle: BTreeMap<Atom, bool>,
    deferred: Vec<(Atom, bool)>,
}

fn flip(p: Player) -> Player {
    p.complement()
}

impl Agent {
    pub fn new(spec: AgentSpec) -> Self {
        Agent {
            name: spec.name,
            kind: spec.kind,
            kb: KbState::new(spec.kb),
            bindings: Vec::new(),
            qi: VecDeque::new(),
            qs: VecDeque::new(),
            queries: BTreeMap::new(),
            counter: 0,
            budget: DEFAULT_BUDGET,
            outbox: Vec::new(),
            log: Vec::new(),
            idle_noted: false,
            activated: false,
            script: Vec::new(),
            oracle: BTreeMap::new(),
            deferred: Vec::new(),
        }
    }

    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    pub fn add_script(&mut self, tick: u64, action: ScriptAction) {
        self.script.push((tick, action));
    }

    pub fn kb(&self) -> &KbState {
        &self.kb
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn query(&self, session: &str) -> Option<&QueryRecord> {
        self.queries.get(session)
    }

    pub fn queries(&self) -> impl Iterator<Item = &QueryRecord> {
        self.queries.values()
    }

    pub fn income_queue(&self) -> Vec<String> {
        self.qi.iter().cloned().collect()
    }

    pub fn solved_queue(&self) -> Vec<String> {
        self.qs.iter().cloned().collect()
    }

    pub fn oracle(&self) -> &BTreeMap<Atom, bool> {
        &self.oracle
    }

    pub fn take_outbox(&mut self) -> Vec<Message> {
        std::mem::take(&mut self.outbox)
    }

    pub fn take_log(&mut self) -> Vec<(Direction, String)> {
        std::mem::take(&mut self.log)
    }

    fn note(&mut self, text: impl Into<String>) {
        self.log.push((Direction::Internal, text.into()));
    }

    fn send(&mut self, msg: Message) {
        self.log.push((Direction::Out, msg.encode()));
        self.outbox.push(msg);
    }

    fn next_session(&mut self) -> String {
        self.counter += 1;
        format!("{}:{}", self.name, self.counter)
    }

    fn fail(&mut self, session: &str, reason: &str) {
        self.send(Message::Fail { session: session.to_string(), reason: reason.to_string() });
    }

    fn note_idle(&mut self, text: &str) {
        if !self.idle_noted {
            self.idle_noted = true;
            self.note(text);
        }
    }

    // ---- incoming messages ----

    pub fn receive(&mut self, msg: Message) {
        self.log.push((Direction::In, msg.encode()));
        let before = (self.kb.revision(), self.qi.len());
        match msg {
            Message::Query { session, from, formula, .. } => self.on_query(session, from, &formula),
            Message::Move { session, from, mv, .. } => self.on_move(session, from, mv),
            Message::Ok { session } => self.on_status(&session, BindingStatus::Answered),
            Message::Done { session } => self.on_status(&session, BindingStatus::Done),
            Message::Fail { session, reason } => self.on_status(&session, BindingStatus::Failed(reason)),
        }
        // idling is reported again only once there is something new to look at
        if (self.kb.revision(), self.qi.len()) != before {
            self.idle_noted = false;
        }
    }

    fn on_query(&mut self, session: String, from: AgentName, text: &str) {
        if self.queries.contains_key(&session) {
            self.fail(&session, "duplicate-session");
            return;
        }
        let goal = match parse_formula(text) {
            Ok(f) => f,
            Err(_) => {
                self.fail(&session, "malformed-query");
                return;
            }
        };
        let record = QueryRecord {
            session: session.clone(),
            origin: from,
            goal,
            moves: Vec::new(),
            pending: VecDeque::new(),
            exec: None,
            snapshot: self.kb.revision(),
            status: QueryStatus::Queued,
            announced: false,
            wire_state: None,
        };
        self.queries.insert(session.clone(), record);
        match self.kind {
            AgentKind::Regular => {
                self.qi.push_back(session.clone());
                self.note(format!("qi push {session}"));
            }
            AgentKind::Super => {
                self.note(format!("hold {session}"));
                self.start_wire_game(&session);
                self.send(Message::Ok { session });
            }
            AgentKind::Neural => {
                self.note(format!("eta answer {session}"));
                self.start_wire_game(&session);
                self.send(Message::Ok { session: session.clone() });
                if let Some(r) = self.queries.get_mut(&session) {
                    r.announced = true;
                }
                self.eta_play(&session);
            }
        }
    }

    fn start_wire_game(&mut self, session: &str) {
        if let Some(r) = self.queries.get_mut(session) {
            r.wire_state = Some(GameState::new(to_hyper(&provider_view(&r.goal))));
            r.status = QueryStatus::Live(SolveStatus::TemporarilySolved);
        }
    }

    fn on_move(&mut self, session: String, from: AgentName, mv: Move) {
        if let Some(i) = self.bindings.iter().position(|b| b.session == session && b.provider == from) {
            self.provider_move(i, mv);
        } else if self.queries.get(&session).is_some_and(|r| r.origin == from) {
            match self.kind {
                AgentKind::Regular => self.origin_move(&session, mv),
                AgentKind::Neural => {
                    if self.wire_apply(&session, Move::new(Player::Env, mv.path.clone(), mv.payload.clone())) {
                        self.eta_play(&session);
                    }
                }
                AgentKind::Super => {
                    self.wire_apply(&session, Move::new(Player::Env, mv.path.clone(), mv.payload.clone()));
                }
            }
        } else {
            self.note(format!("reject {session} unknown-session"));
            self.fail(&session, "unknown-session");
        }
    }

    /// Apply an origin move to a proof-less wire game.
    fn wire_apply(&mut self, session: &str, mv: Move) -> bool {
        let Some(r) = self.queries.get_mut(session) else { return false };
        let Some(state) = r.wire_state.as_mut() else { return false };
        match state.apply(mv.clone()) {
            Ok(()) => {
                r.moves.push(mv);
                true
            }
            Err(_) => {
                self.note(format!("reject {session} illegal-move"));
                self.fail(session, "illegal-move");
                false
            }
        }
    }

    fn on_status(&mut self, session: &str, status: BindingStatus) {
        let Some(i) = self.bindings.iter().position(|b| b.session == session) else {
            self.note(format!("ignore {session}"));
            return;
        };
        let text = match &status {
            BindingStatus::Answered => format!("ok {session}"),
            BindingStatus::Done => format!("done {session}"),
            BindingStatus::Failed(reason) => format!("fail {session} {reason}"),
            BindingStatus::Open => unreachable!("never received"),
        };
        let answered = status == BindingStatus::Answered;
        self.bindings[i].status = status;
        self.note(text);
        if answered {
            if let (Some(e), Formula::Seq { .. }) = (self.bindings[i].entry, &self.bindings[i].formula) {
                let head = self.kb.head(e, &Path::root()).map(pretty).unwrap_or_default();
                self.note(format!("observe {session} head {}", skeleton_text(&head)));
            }
        }
    }

    /// A move by the provider of one of our bindings.
    fn provider_move(&mut self, i: usize, mv: Move) {
        let session = self.bindings[i].session.clone();
        if mv.player != Player::Machine {
            self.note(format!("reject {session} wrong-player"));
            return;
        }
        self.bindings[i].moves.push(mv.clone());
        let Some(entry) = self.bindings[i].entry else {
            self.note(format!("observe {session} move {mv}"));
            return;
        };
        if mv.payload == MovePayload::Switch {
            match self.kb.advance(entry, &mv.path) {
                Ok(_) => {
                    self.note(format!("kb rev {}", self.kb.revision()));
                    let head = self.kb.head(entry, &mv.path).map(pretty).unwrap_or_default();
                    self.note(format!("observe {session} head {}", skeleton_text(&head)));
                }
                Err(e) => self.note(format!("reject {session} {}", token(&e.to_string()))),
            }
            return;
        }
        let Some(cp) = self.kb.to_collapsed_path(entry, &mv.path) else {
            self.note(format!("reject {session} inactive-component"));
            return;
        };
        // deliver to the most recent live session that includes the entry
        let owner = self
            .queries
            .values()
            .filter(|r| r.exec.is_some() && r.in_flight())
            .max_by_key(|r| r.snapshot)
            .map(|r| r.session.clone());
        let Some(owner) = owner else {
            self.note(format!("observe {session} move {mv}"));
            return;
        };
        let local = Move::new(Player::Env, Path(vec![entry]).join(&cp), mv.payload);
        self.exec_env_move(&owner, local, false);
    }

    /// A move by the agent that sent us the query.
    fn origin_move(&mut self, session: &str, mv: Move) {
        if mv.player != Player::Env {
            self.note(format!("reject {session} wrong-player"));
            self.fail(session, "illegal-move");
            return;
        }
        let Some(r) = self.queries.get_mut(session) else { return };
        if r.status == QueryStatus::Failed {
            self.note(format!("reject {session} closed-session"));
            self.fail(session, "closed-session");
            return;
        }
        if r.exec.is_none() {
            r.pending.push_back(mv);
            self.note(format!("queue {session}"));
            return;
        }
        let prefix = query_prefix(self.kb.entries().len());
        let local = Move::new(Player::Env, prefix.join(&mv.path), mv.payload.clone());
        if self.exec_env_move(session, local, true) {
            if let Some(r) = self.queries.get_mut(session) {
                r.moves.push(mv);
            }
        }
    }

    /// Feed an environment move into the session of `session`; returns
    /// whether it was accepted.
    fn exec_env_move(&mut self, session: &str, local: Move, from_origin: bool) -> bool {
        let Some(mut s) = self.queries.get_mut(session).and_then(|r| r.exec.take()) else { return false };
        let result = s.env_move(local);
        let accepted = match result {
            Ok(step) => {
                self.note(format!("wait case{} {session}", step.case.number()));
                self.route(session, &s, step.emitted);
                true
            }
            Err(_) => {
                self.note(format!("reject {session} illegal-move"));
                if from_origin {
                    self.fail(session, "illegal-move");
                }
                false
            }
        };
        self.after_session_step(session, s);
        accepted
    }

    fn after_session_step(&mut self, session: &str, s: Session) {
        let status = s.classify_solved();
        let finished = s.at_leaf() && status == SolveStatus::CompletelySolved;
        let Some(r) = self.queries.get_mut(session) else { return };
        r.exec = Some(s);
        if r.status == QueryStatus::Finished {
            return;
        }
        if finished {
            r.status = QueryStatus::Finished;
            self.send(Message::Done { session: session.to_string() });
        } else if r.status != QueryStatus::Queued {
            r.status = QueryStatus::Live(status);
        }
    }

    /// Forward machine moves made by the session of `session`.
    fn route(&mut self, session: &str, s: &Session, emitted: Vec<Move>) {
        let n = self.kb.entries().len();
        let prefix = query_prefix(n);
        for mv in emitted {
            if let Some(rel) = mv.path.strip_prefix(&prefix) {
                let Some(r) = self.queries.get_mut(session) else { continue };
                let wire = Move::new(Player::Machine, rel.clone(), mv.payload.clone());
                r.moves.push(wire.clone());
                let origin = r.origin.clone();
                let answer = answer_text(&r.goal, &rel, &mv.payload, s.state(), &prefix);
                self.send(Message::Move {
                    session: session.to_string(),
                    from: self.name.clone(),
                    to: origin,
                    mv: wire,
                });
                if let Some(text) = answer {
                    self.note(format!("answer {session} {text}"));
                }
                continue;
            }
            let entry = mv.path.0[0];
            let Some(b) = self.bindings.iter_mut().find(|b| b.entry == Some(entry)) else { continue };
            let rest = Path(mv.path.0[1..].to_vec());
            let Some(full) = self.kb.to_full_path(entry, &rest) else { continue };
            let wire = Move::new(Player::Env, full, mv.payload.clone());
            b.moves.push(wire.clone());
            let (sid, to) = (b.session.clone(), b.provider.clone());
            self.send(Message::Move { session: sid, from: self.name.clone(), to, mv: wire });
        }
    }

    // ---- scheduler ----

    /// One scheduler step; `false` when the agent is idle.
    pub fn step(&mut self) -> bool {
        match self.kind {
            AgentKind::Regular => self.regular_step(),
            AgentKind::Super => self.super_step(),
            AgentKind::Neural => self.neural_step(),
        }
    }

    fn regular_step(&mut self) -> bool {
        if let Some(session) = self.qi.pop_front() {
            self.idle_noted = false;
            self.solve(&session);
            return true;
        }
        if let Some(head) = self.qs.front().cloned() {
            let unchanged = self.queries.get(&head).is_some_and(|r| r.snapshot == self.kb.revision());
            if unchanged {
                self.note_idle("case2 idle");
                return false;
            }
            self.qs.pop_front();
            self.qi.push_back(head.clone());
            self.idle_noted = false;
            self.note(format!("case2 requeue {head}"));
            return true;
        }
        self.note_idle("case3 idle");
        false
    }

    /// Build the session for `session` against the current knowledgebase,
    /// replaying resource and query moves made so far.
    fn solve(&mut self, session: &str) {
        let Some(record) = self.queries.get(session) else { return };
        let snapshot = self.kb.snapshot();
        let n = snapshot.len();
        let prefix = query_prefix(n);
        let goal = compile_query(&snapshot, &provider_view(&record.goal));
        let mut state = GameState::new(to_hyper(&goal));
        for b in &self.bindings {
            let Some(entry) = b.entry else { continue };
            for mv in b.moves.iter().filter(|m| m.payload != MovePayload::Switch) {
                if let Some(cp) = self.kb.to_collapsed_path(entry, &mv.path) {
                    let local = Move::new(flip(mv.player), Path(vec![entry]).join(&cp), mv.payload.clone());
                    let _ = state.apply(local);
                }
            }
        }
        for mv in &record.moves {
            let _ = state.apply(Move::new(mv.player, prefix.join(&mv.path), mv.payload.clone()));
        }
        let view = Session::position_view(&state);
        let proof = match prove_hyper(&view, self.budget) {
            ProveResult::Proved(p) => p,
            other => {
                let reason = if other == ProveResult::Timeout { "timeout" } else { "unprovable" };
                self.note(format!("case1 fail {session} {reason}"));
                if let Some(r) = self.queries.get_mut(session) {
                    r.status = QueryStatus::Failed;
                }
                self.fail(session, reason);
                return;
            }
        };
        let mut s = Session::with_state(session, state, proof, n).expect("proof concludes the position view");
        let revision = self.kb.revision();
        let announced = {
            let r = self.queries.get_mut(session).expect("record exists");
            r.snapshot = revision;
            r.status = QueryStatus::Live(SolveStatus::TemporarilySolved);
            std::mem::replace(&mut r.announced, true)
        };
        if !announced {
            self.send(Message::Ok { session: session.to_string() });
        }
        self.activate(&mut s);
        let emitted = s.advance().unwrap_or_default();
        self.route(session, &s, emitted);
        self.after_session_step(session, s);
        let pending: Vec<Move> =
            self.queries.get_mut(session).map(|r| r.pending.drain(..).collect()).unwrap_or_default();
        for mv in pending {
            self.origin_move(session, mv);
        }
        let Some(r) = self.queries.get(session) else { return };
        let status = match r.status {
            QueryStatus::Live(st) => st,
            QueryStatus::Finished => SolveStatus::CompletelySolved,
            _ => SolveStatus::Failed,
        };
        self.note(format!("case1 solve {session} {status}"));
        if status == SolveStatus::TemporarilySolved {
            self.qs.push_back(session.to_string());
            self.note(format!("qs push {session}"));
        }
    }

    /// Query every annotated knowledgebase entry not yet bound.
    fn activate(&mut self, s: &mut Session) {
        for act in s.activate() {
            let entry = act.path.0[0];
            if self.bindings.iter().any(|b| b.entry == Some(entry)) {
                continue;
            }
            self.open_binding(Some(entry), act.agent);
        }
    }

    fn open_binding(&mut self, entry: Option<usize>, provider: AgentName) -> String {
        let formula = match entry {
            Some(e) => skeleton(&self.kb.entries()[e]),
            None => Formula::Const(true),
        };
        let session = self.next_session();
        self.bindings.push(Binding {
            entry,
            provider: provider.clone(),
            session: session.clone(),
            formula: formula.clone(),
            moves: Vec::new(),
            status: BindingStatus::Open,
        });
        self.send(Message::Query {
            session: session.clone(),
            from: self.name.clone(),
            to: provider,
            formula: pretty(&formula),
        });
        session
    }

    // ---- super agents ----

    fn super_step(&mut self) -> bool {
        if self.activated {
            return false;
        }
        self.activated = true;
        let entries: Vec<(usize, AgentName)> =
            self.kb.entries().iter().enumerate().filter_map(|(i, f)| f.uniform_env().map(|a| (i, a.clone()))).collect();
        for (i, agent) in entries {
            self.open_binding(Some(i), agent);
        }
        true
    }

    /// Fire scripted actions due at `tick`.
    pub fn on_tick(&mut self, tick: u64) {
        for action in super_script_step(&self.script, tick) {
            match action {
                ScriptAction::Switch(holder) => self.scripted_switch(&holder),
                ScriptAction::Query(to, text) => match parse_formula(&text) {
                    Ok(f) => {
                        let session = self.open_binding(None, to);
                        if let Some(b) = self.bindings.iter_mut().find(|b| b.session == session) {
                            b.formula = f.clone();
                        }
                        // the message already went out with a placeholder body
                        if let Some(Message::Query { formula, .. }) = self.outbox.last_mut() {
                            *formula = pretty(&f);
                        }
                        if let Some((_, line)) = self.log.last_mut() {
                            *line = self.outbox.last().map(Message::encode).unwrap_or_default();
                        }
                    }
                    Err(e) => self.note(format!("script error {}", token(&e.to_string()))),
                },
                ScriptAction::Raw(line) => match Message::decode(&line) {
                    Ok(m) => self.send(m),
                    Err(e) => self.note(format!("script error {}", token(&e.to_string()))),
                },
            }
        }
    }

    fn scripted_switch(&mut self, holder: &AgentName) {
        let name = self.name.clone();
        let Some(r) = self.queries.values_mut().filter(|r| &r.origin == holder).last() else {
            self.note(format!("script skip no-query-from-{holder}"));
            return;
        };
        let Some(state) = r.wire_state.as_mut() else { return };
        let mut candidates = Vec::new();
        state.original().tree().walk(|p, node| {
            if matches!(node, Formula::Seq { .. }) {
                candidates.push(p.clone());
            }
        });
        let mv =
            candidates.into_iter().map(|p| Move::new(Player::Machine, p, MovePayload::Switch)).find(|m| state.legal(m));
        let Some(mv) = mv else {
            self.note(format!("script skip exhausted-{holder}"));
            return;
        };
        state.apply(mv.clone()).expect("checked legal");
        r.moves.push(mv.clone());
        let (session, to) = (r.session.clone(), r.origin.clone());
        self.send(Message::Move { session, from: name, to, mv });
    }

    // ---- neural agents ----

    fn neural_step(&mut self) -> bool {
        let busy = self.queries.values().any(QueryRecord::in_flight);
        if busy || self.deferred.is_empty() {
            return false;
        }
        let samples = std::mem::take(&mut self.deferred);
        self.eta_train(samples);
        true
    }

    /// Memorize samples; deferred while a query is in flight.
    pub fn eta_train(&mut self, samples: Vec<(Atom, bool)>) {
        if samples.is_empty() {
            return;
        }
        if self.queries.values().any(QueryRecord::in_flight) {
            for (a, v) in samples {
                self.note(format!("eta defer {a} {v}"));
                self.deferred.push((a, v));
            }
            return;
        }
        for (a, v) in samples {
            self.note(format!("eta train {a} {v}"));
            self.oracle.insert(a, v);
        }
    }

    /// Resolve every reachable machine choice by the oracle, then report
    /// completion when nothing is left to choose.
    fn eta_play(&mut self, session: &str) {
        loop {
            let Some(r) = self.queries.get(session) else { return };
            if !r.in_flight() {
                return;
            }
            let Some(state) = r.wire_state.as_ref() else { return };
            let open = state.legal_moves(Player::Machine, &[]);
            let Some(first) = open.into_iter().find(|m| matches!(m.payload, MovePayload::Choose(_))) else {
                break;
            };
            let node = state.original().get(&first.path).expect("legal path").clone();
            match self.eta_pick(&node) {
                Ok((i, atom)) => {
                    let mv = Move::new(Player::Machine, first.path.clone(), MovePayload::Choose(i));
                    let r = self.queries.get_mut(session).expect("checked");
                    r.wire_state.as_mut().expect("checked").apply(mv.clone()).expect("legal choice");
                    r.moves.push(mv.clone());
                    let to = r.origin.clone();
                    self.note(format!("eta choose {session} {atom}"));
                    self.send(Message::Move { session: session.to_string(), from: self.name.clone(), to, mv });
                }
                Err(reason) => {
                    self.queries.get_mut(session).expect("checked").status = QueryStatus::Failed;
                    self.note(format!("eta fail {session} {reason}"));
                    self.fail(session, reason);
                    return;
                }
            }
        }
        let r = self.queries.get_mut(session).expect("checked");
        let waiting = r.wire_state.as_ref().is_some_and(|s| {
            s.legal_moves(Player::Env, &[]).iter().any(|m| matches!(m.payload, MovePayload::Choose(_)))
        });
        if !waiting {
            r.status = QueryStatus::Finished;
            self.send(Message::Done { session: session.to_string() });
        }
    }

    /// First component whose literal the oracle holds true.
    fn eta_pick(&self, node: &Formula) -> Result<(usize, Atom), &'static str> {
        let mut missing = false;
        for (i, c) in node.children().iter().enumerate() {
            match c {
                Formula::Lit(l) => match self.oracle.get(&l.atom) {
                    Some(v) if *v != l.negated => return Ok((i, l.atom.clone())),
                    Some(_) => {}
                    None => missing = true,
                },
                _ => missing = true,
            }
        }
        Err(if missing { "oracle-missing" } else { "no-true-component" })
    }

    /// Origin-less status for the scenario summary.
    pub fn describe_sessions(&self) -> Vec<(String, QueryStatus)> {
        self.queries.values().map(|r| (r.session.clone(), r.status)).collect()
    }

    /// Sessions opened to this agent whose origin is `origin`.
    pub fn sessions_from(&self, origin: &str) -> Vec<String> {
        self.queries.values().filter(|r| r.origin.as_str() == origin).map(|r| r.session.clone()).collect()
    }

    pub fn is_origin_of(&self, session: &str) -> bool {
        session_origin(session) == Some(self.name.as_str())
    }
}

/// Script items due at `tick`, in script order.
pub fn super_script_step<T: Clone>(script: &[(u64, T)], tick: u64) -> Vec<T> {
    script.iter().filter(|(t, _)| *t == tick).map(|(_, a)| a.clone()).collect()
}

fn query_prefix(kb_len: usize) -> Path {
    if kb_len == 0 {
        Path::root()
    } else {
        Path(vec![kb_len])
    }
}

/// Text logged when the machine moves in its answer: the chosen component
/// or the new head of a chain.
fn answer_text(goal: &Formula, rel: &Path, payload: &MovePayload, state: &GameState, prefix: &Path) -> Option<String> {
    let node = goal.get(rel)?;
    let text = match payload {
        MovePayload::Choose(i) => pretty(&skeleton(node.children().get(*i)?)),
        MovePayload::Switch => {
            let (leading, _) = state.switches(&prefix.join(rel))?;
            format!("head {}", pretty(&skeleton(node.children().get(leading)?)))
        }
        MovePayload::Atom(t) => format!("atom {t}"),
    };
    Some(text)
}

fn skeleton_text(s: &str) -> String {
    match parse_formula(s) {
        Ok(f) => pretty(&skeleton(&f)),
        Err(_) => s.to_string(),
    }
}

/// Collapse free text into a single trace token.
fn token(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("-")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_agent_file;

    fn agent(text: &str) -> Agent {
        Agent::new(parse_agent_file(text).unwrap())
    }

    fn msg(line: &str) -> Message {
        Message::decode(line).unwrap()
    }

    fn run(a: &mut Agent) {
        while a.step() {}
    }

    fn sent(a: &mut Agent) -> Vec<String> {
        a.take_outbox().iter().map(Message::encode).collect()
    }

    fn atom(s: &str) -> Atom {
        Atom::new(s).unwrap()
    }

    #[test]
    fn script_items_fire_on_their_tick() {
        let script = vec![(3, "deposit"), (5, "other"), (3, "again")];
        assert_eq!(super_script_step(&script, 3), vec!["deposit", "again"]);
        assert!(super_script_step(&script, 2).is_empty());
        assert!(super_script_step::<&str>(&[], 3).is_empty());
    }

    #[test]
    fn fresh_query_is_temporarily_solved() {
        let mut db = agent("agent db. (d0 # d1 # d2)^m. d0 -> b0. d1 -> b1. d2 -> b2.");
        db.receive(msg("QUERY credit:1 credit db b0 # b1 # b2"));
        assert_eq!(db.income_queue(), vec!["credit:1"]);
        run(&mut db);
        assert_eq!(db.solved_queue(), vec!["credit:1"]);
        assert_eq!(sent(&mut db), vec!["OK credit:1", "QUERY db:1 db m d0 # d1 # d2"]);
        // nothing changed: idle, and idling is a fixpoint
        assert!(!db.step());
        assert!(!db.step());
        assert_eq!(db.solved_queue(), vec!["credit:1"]);
    }

    #[test]
    fn resource_switch_requeues_and_answers() {
        let mut db = agent("agent db. (d0 # d1 # d2)^m. d0 -> b0. d1 -> b1. d2 -> b2.");
        db.receive(msg("QUERY credit:1 credit db b0 # b1 # b2"));
        run(&mut db);
        sent(&mut db);
        db.receive(msg("MOVE db:1 m db ⊤ - switch"));
        assert_eq!(db.kb().revision(), 1);
        run(&mut db);
        assert_eq!(sent(&mut db), vec!["MOVE credit:1 db credit ⊤ - switch"]);
        assert_eq!(db.solved_queue(), vec!["credit:1"]);
    }

    #[test]
    fn stale_session_and_illegal_moves_fail() {
        let mut db = agent("agent db. d0 -> b0.");
        db.receive(msg("MOVE x:9 x db ⊥ - switch"));
        assert_eq!(sent(&mut db), vec!["FAIL x:9 unknown-session"]);
        db.receive(msg("QUERY u:1 u db (b0 & b1) -> (b0 & b1)"));
        run(&mut db);
        sent(&mut db);
        db.receive(msg("MOVE u:1 u db ⊥ - choose:5"));
        assert_eq!(sent(&mut db), vec!["FAIL u:1 illegal-move"]);
    }

    #[test]
    fn unprovable_query_fails() {
        let mut db = agent("agent db. d0 -> b0.");
        db.receive(msg("QUERY u:1 u db b7"));
        run(&mut db);
        assert_eq!(sent(&mut db), vec!["FAIL u:1 unprovable"]);
        assert!(db.income_queue().is_empty() && db.solved_queue().is_empty());
    }

    #[test]
    fn training_memorizes_and_overwrites() {
        let mut eta = agent("agent neural etad.");
        eta.eta_train(vec![(atom("animal_i3_lion"), true)]);
        assert_eq!(eta.oracle().get(&atom("animal_i3_lion")), Some(&true));
        eta.eta_train(vec![]);
        assert_eq!(eta.oracle().len(), 1);
        eta.eta_train(vec![(atom("animal_i3_lion"), false)]);
        assert_eq!(eta.oracle().get(&atom("animal_i3_lion")), Some(&false));
    }

    #[test]
    fn neural_answers_demanded_branches() {
        let mut eta = agent("agent neural etad.");
        let lions = ["animal_i1_lion", "animal_i2_lion", "animal_i3_lion"];
        eta.eta_train(lions.iter().map(|a| (atom(a), true)).collect());
        eta.receive(msg("QUERY a:1 a etad (animal_i1_lion + animal_i1_tiger) & (animal_i2_lion + animal_i2_tiger)"));
        assert_eq!(sent(&mut eta), vec!["OK a:1"]);
        eta.receive(msg("MOVE a:1 a etad ⊥ - choose:1"));
        assert_eq!(sent(&mut eta), vec!["MOVE a:1 etad a ⊤ 1 choose:0", "DONE a:1"]);
    }

    #[test]
    fn neural_without_verdict_fails_and_defers_training() {
        let mut eta = agent("agent neural etad.");
        eta.eta_train(vec![(atom("animal_i1_lion"), true)]);
        eta.receive(msg("QUERY a:1 a etad (animal_i1_lion + animal_i1_tiger) & (animal_i2_lion + animal_i2_tiger)"));
        eta.eta_train(vec![(atom("animal_i2_lion"), true)]);
        assert!(eta.oracle().get(&atom("animal_i2_lion")).is_none());
        eta.receive(msg("MOVE a:1 a etad ⊥ - choose:1"));
        assert_eq!(sent(&mut eta), vec!["OK a:1", "FAIL a:1 oracle-missing"]);
        // the query is over, so the deferred sample lands now
        run(&mut eta);
        assert_eq!(eta.oracle().get(&atom("animal_i2_lion")), Some(&true));
    }

    #[test]
    fn super_agent_activates_and_switches() {
        let mut kim = agent("agent super kim. (b0 # b1 # b2)^m.");
        run(&mut kim);
        assert_eq!(sent(&mut kim), vec!["QUERY kim:1 kim m b0 # b1 # b2"]);
        kim.receive(msg("QUERY m:1 m kim d0 # d1 # d2"));
        kim.add_script(3, ScriptAction::Switch(AgentName::new("m").unwrap()));
        kim.on_tick(2);
        assert_eq!(sent(&mut kim), vec!["OK m:1"]);
        kim.on_tick(3);
        assert_eq!(sent(&mut kim), vec!["MOVE m:1 kim m ⊤ - switch"]);
    }
}
