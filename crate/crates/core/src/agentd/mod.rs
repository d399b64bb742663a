//! Agents: knowledgebase state, the query scheduler, super and neural
//! agents, the wire protocol, transports and the scenario runner.

mod agent;
mod kb;
mod scenario;
mod transport;
mod wire;

pub use agent::{super_script_step, Agent, Binding, BindingStatus, Direction, QueryRecord, QueryStatus, ScriptAction};
pub use kb::{provider_view, KbError, KbState};
pub use scenario::{
    check_assertions, load_scenario, parse_config, run_scenario, OracleDefault, RunOptions, RunReport, Scenario,
    ScenarioConfig, ScenarioError, TraceEvent, USER,
};
pub use transport::{Bus, LoopbackSocket, Transport};
pub use wire::{is_session_id, session_origin, DecodeError, Message};
