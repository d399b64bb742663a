//! Scenario directories and the tick-driven runner.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path as FsPath;

use super::agent::{Agent, Direction, QueryStatus, ScriptAction};
use super::transport::{Bus, LoopbackSocket, Transport};
use super::wire::Message;
use crate::formula::{parse_agent_file, parse_formula, AgentKind, AgentName, AgentSpec, Atom};
use crate::prover::DEFAULT_BUDGET;
use crate::runtime::{Interpretation, Player};

/// Name under which scenario-level queries are sent.
pub const USER: &str = "user";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct ScenarioError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl ScenarioError {
    fn new(file: &str, line: usize, message: impl Into<String>) -> Self {
        ScenarioError { file: file.to_string(), line, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleDefault {
    Constant(Player),
    Hashed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub ticks: u64,
    pub seed: u64,
    pub queries: Vec<(u64, AgentName, String)>,
    pub scripts: Vec<(AgentName, u64, ScriptAction)>,
    pub training: Vec<(AgentName, u64, Atom, bool)>,
    pub valuation: BTreeMap<Atom, bool>,
    pub oracle: BTreeMap<Atom, Player>,
    pub oracle_default: OracleDefault,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            ticks: 20,
            seed: 0,
            queries: Vec::new(),
            scripts: Vec::new(),
            training: Vec::new(),
            valuation: BTreeMap::new(),
            oracle: BTreeMap::new(),
            oracle_default: OracleDefault::Constant(Player::Env),
        }
    }
}

const CFG: &str = "scenario.cfg";

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Parse `scenario.cfg`. One directive per line, `%` starts a comment:
///
/// ```text
/// ticks 12
/// seed 7
/// query 0 credit b0 # b1 # b2
/// script kim 3 switch m
/// script kim 5 query db d0 # d1
/// script kim 6 raw OK kim:1
/// train etad 0 animal_i3_lion true
/// valuation b0 true
/// oracle b0 ⊤
/// oracle-default hashed
/// ```
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let no = n + 1;
        let err = |m: String| ScenarioError::new(CFG, no, m);
        let words: Vec<&str> = line.split_whitespace().collect();
        let tick = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad tick `{s}`")));
        let agent = |s: &str| AgentName::new(s).map_err(|_| err(format!("bad agent name `{s}`")));
        let atom = |s: &str| Atom::new(s).map_err(|_| err(format!("bad atom `{s}`")));
        let boolean = |s: &str| parse_bool(s).ok_or_else(|| err(format!("expected true or false, got `{s}`")));
        // text after the first `k` words, with its original spacing
        let rest = |k: usize| {
            let mut r = line;
            for _ in 0..k {
                r = r.trim_start().split_once(char::is_whitespace).map(|(_, t)| t).unwrap_or("");
            }
            r.trim().to_string()
        };
        let formula = |s: String| match parse_formula(&s) {
            Ok(_) => Ok(s),
            Err(e) => Err(err(format!("bad formula: {e}"))),
        };
        match words.as_slice() {
            ["ticks", t] => cfg.ticks = tick(t)?,
            ["seed", s] => cfg.seed = s.parse().map_err(|_| err(format!("bad seed `{s}`")))?,
            ["query", t, a, _, ..] => cfg.queries.push((tick(t)?, agent(a)?, formula(rest(3))?)),
            ["script", a, t, "switch", h] => cfg.scripts.push((agent(a)?, tick(t)?, ScriptAction::Switch(agent(h)?))),
            ["script", a, t, "query", to, _, ..] => {
                cfg.scripts.push((agent(a)?, tick(t)?, ScriptAction::Query(agent(to)?, formula(rest(5))?)))
            }
            ["script", a, t, "raw", _, ..] => {
                let body = rest(4);
                Message::decode(&body).map_err(|e| err(format!("bad message: {e}")))?;
                cfg.scripts.push((agent(a)?, tick(t)?, ScriptAction::Raw(body)))
            }
            ["train", a, t, x, v] => cfg.training.push((agent(a)?, tick(t)?, atom(x)?, boolean(v)?)),
            ["valuation", x, v] => {
                cfg.valuation.insert(atom(x)?, boolean(v)?);
            }
            ["oracle", x, p] => {
                let p: Player = p.parse().map_err(|_| err(format!("bad player `{p}`")))?;
                cfg.oracle.insert(atom(x)?, p);
            }
            ["oracle-default", "hashed"] => cfg.oracle_default = OracleDefault::Hashed,
            ["oracle-default", p] => {
                cfg.oracle_default = OracleDefault::Constant(p.parse().map_err(|_| err(format!("bad player `{p}`")))?)
            }
            _ => return Err(err(format!("unrecognized directive `{line}`"))),
        }
    }
    Ok(cfg)
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub agents: Vec<AgentSpec>,
    pub config: ScenarioConfig,
}

impl Scenario {
    /// Check cross references: unique names, and every query, script and
    /// training line naming an agent of the right kind.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut kinds = BTreeMap::new();
        for a in &self.agents {
            if a.name.as_str() == USER {
                return Err(ScenarioError::new(&format!("{}.agent", a.name), 1, "`user` is reserved"));
            }
            if kinds.insert(a.name.clone(), a.kind).is_some() {
                return Err(ScenarioError::new(&format!("{}.agent", a.name), 1, "agent declared twice"));
            }
        }
        let err = |m: String| Err(ScenarioError::new(CFG, 0, m));
        for (_, a, _) in &self.config.queries {
            if !kinds.contains_key(a) {
                return err(format!("query to unknown agent `{a}`"));
            }
        }
        for (a, _, _) in &self.config.scripts {
            if kinds.get(a) != Some(&AgentKind::Super) {
                return err(format!("script for `{a}`, which is not a super agent"));
            }
        }
        for (a, _, _, _) in &self.config.training {
            if kinds.get(a) != Some(&AgentKind::Neural) {
                return err(format!("training for `{a}`, which is not a neural agent"));
            }
        }
        Ok(())
    }

    pub fn interpretation(&self) -> Interpretation {
        let valuation = self.config.valuation.clone();
        match self.config.oracle_default {
            OracleDefault::Hashed if self.config.oracle.is_empty() => {
                Interpretation::hashed(valuation, self.config.seed)
            }
            OracleDefault::Hashed => {
                let table = self.config.oracle.clone();
                let hashed = Interpretation::hashed(BTreeMap::new(), self.config.seed);
                Interpretation::new(
                    valuation,
                    std::sync::Arc::new(move |a: &Atom, env: &[String], machine: &[String]| match table.get(a) {
                        Some(p) => *p,
                        None => (hashed.oracle)(a, env, machine),
                    }),
                )
            }
            OracleDefault::Constant(p) => Interpretation::table(valuation, self.config.oracle.clone(), p),
        }
    }
}

/// Load every `*.agent` file plus `scenario.cfg` from `dir`.
pub fn load_scenario(dir: &FsPath) -> Result<Scenario, ScenarioError> {
    let io = |file: &str, e: std::io::Error| ScenarioError::new(file, 0, e.to_string());
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| io(&dir.display().to_string(), e))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "agent"))
        .collect();
    files.sort();
    let mut agents = Vec::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let text = fs::read_to_string(&f).map_err(|e| io(&name, e))?;
        let spec = parse_agent_file(&text).map_err(|e| ScenarioError::new(&name, e.line, e.to_string()))?;
        agents.push(spec);
    }
    let cfg_text = fs::read_to_string(dir.join(CFG)).map_err(|e| io(CFG, e))?;
    let scenario = Scenario { agents, config: parse_config(&cfg_text)? };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: u64,
    pub agent: String,
    pub direction: Direction,
    pub payload: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.tick, self.agent, self.direction, self.payload)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub budget: u64,
    pub socket: bool,
    pub ticks: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, budget: DEFAULT_BUDGET, socket: false, ticks: None }
    }
}

pub struct RunReport {
    pub trace: Vec<TraceEvent>,
    /// Tick after which nothing was left to do, if reached before the limit.
    pub quiescent_at: Option<u64>,
    pub agents: Vec<Agent>,
}

impl RunReport {
    pub fn render(&self) -> String {
        self.trace.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// Run the scenario tick by tick until quiescence or the tick limit.
///
/// At each tick every agent, in name order, fires its due script lines and
/// training samples, receives the messages sent to it during the previous
/// tick, then runs its scheduler until idle. Sessions still open at the end
/// are closed and their winners traced.
pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> Result<RunReport, ScenarioError> {
    let mut config = scenario.config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let scenario = Scenario { agents: scenario.agents.clone(), config };
    let cfg = &scenario.config;
    let ticks = opts.ticks.unwrap_or(cfg.ticks);
    let mut transport: Box<dyn Transport> = if opts.socket {
        Box::new(LoopbackSocket::open().map_err(|e| ScenarioError::new("socket", 0, e.to_string()))?)
    } else {
        Box::new(Bus::new())
    };
    let mut agents: BTreeMap<AgentName, Agent> = BTreeMap::new();
    for spec in &scenario.agents {
        let mut a = Agent::new(spec.clone());
        a.set_budget(opts.budget);
        for (_, t, action) in cfg.scripts.iter().filter(|(n, _, _)| n == &spec.name) {
            a.add_script(*t, action.clone());
        }
        agents.insert(spec.name.clone(), a);
    }
    let last_event = cfg
        .queries
        .iter()
        .map(|q| q.0)
        .chain(cfg.scripts.iter().map(|s| s.1))
        .chain(cfg.training.iter().map(|s| s.1))
        .max()
        .unwrap_or(0);
    let transport_err = |e: std::io::Error| ScenarioError::new("transport", 0, e.to_string());
    let mut trace = Vec::new();
    let mut user_counter = 0u64;
    let mut quiescent_at = None;
    let mut last_tick = 0;
    for tick in 0..=ticks {
        last_tick = tick;
        let mut inbox: BTreeMap<AgentName, Vec<Message>> = BTreeMap::new();
        let mut busy = false;
        for msg in transport.drain().map_err(transport_err)? {
            busy = true;
            match msg.receiver() {
                Some(USER) => trace.push(event(tick, USER, Direction::In, msg.encode())),
                Some(r) if agents.keys().any(|k| k.as_str() == r) => {
                    inbox.entry(AgentName::new(r).expect("known agent")).or_default().push(msg)
                }
                _ => trace.push(event(tick, "runner", Direction::Internal, format!("drop {}", msg.encode()))),
            }
        }
        for (t, to, formula) in &cfg.queries {
            if *t != tick {
                continue;
            }
            user_counter += 1;
            let msg = Message::Query {
                session: format!("{USER}:{user_counter}"),
                from: AgentName::new(USER).expect("valid name"),
                to: to.clone(),
                formula: formula.clone(),
            };
            trace.push(event(tick, USER, Direction::Out, msg.encode()));
            inbox.entry(to.clone()).or_default().push(msg);
        }
        for (name, agent) in agents.iter_mut() {
            agent.on_tick(tick);
            let samples: Vec<(Atom, bool)> = cfg
                .training
                .iter()
                .filter(|(a, t, _, _)| a == name && *t == tick)
                .map(|(_, _, x, v)| (x.clone(), *v))
                .collect();
            agent.eta_train(samples);
            for msg in inbox.remove(name).unwrap_or_default() {
                agent.receive(msg);
            }
            let mut guard = 0;
            while agent.step() {
                guard += 1;
                if guard > 10_000 {
                    break;
                }
            }
            for (direction, payload) in agent.take_log() {
                trace.push(event(tick, name.as_str(), direction, payload));
            }
            for msg in agent.take_outbox() {
                busy = true;
                transport.send(&msg).map_err(transport_err)?;
            }
        }
        if !busy && tick >= last_event {
            quiescent_at = Some(tick);
            break;
        }
    }
    let interp = scenario.interpretation();
    for (name, agent) in agents.iter() {
        for r in agent.queries() {
            let Some(s) = &r.exec else { continue };
            if r.status == QueryStatus::Failed {
                continue;
            }
            let mut state = s.state().clone();
            state.terminate();
            let w = state.evaluate(&interp);
            trace.push(event(last_tick, name.as_str(), Direction::Internal, format!("close {} winner {w}", r.session)));
        }
    }
    Ok(RunReport { trace, quiescent_at, agents: agents.into_values().collect() })
}

fn event(tick: u64, agent: &str, direction: Direction, payload: String) -> TraceEvent {
    TraceEvent { tick, agent: agent.to_string(), direction, payload }
}

/// Match ordered substring patterns against the rendered trace lines: each
/// pattern must occur in some line after the line matched by its
/// predecessor. Returns the first unmatched pattern.
pub fn check_assertions<'a>(trace: &[TraceEvent], patterns: &'a [String]) -> Result<(), &'a str> {
    let lines: Vec<String> = trace.iter().map(ToString::to_string).collect();
    let mut at = 0;
    for p in patterns {
        match lines[at..].iter().position(|l| l.contains(p.as_str())) {
            Some(i) => at += i + 1,
            None => return Err(p),
        }
    }
    Ok(())
}
