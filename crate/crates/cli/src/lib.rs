//! Command implementations behind the `colweb` binary. Each returns the
//! process exit status together with what it printed, so the commands can
//! be driven from tests without spawning processes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use colweb::agentd::{check_assertions, load_scenario, run_scenario, RunOptions, ScenarioError};
use colweb::executor::Session;
use colweb::formula::{parse_agent_file, parse_formula, Atom, Formula, Path as TreePath};
use colweb::prover::{prove_with_budget, verify, ProveResult};
use colweb::runtime::{Interpretation, Move, MovePayload, Player};

pub const EXIT_OK: i32 = 0;
/// Negative answer: unprovable, assertion mismatch, diagnostics found.
pub const EXIT_NO: i32 = 1;
pub const EXIT_TIMEOUT: i32 = 2;
/// Unparseable formula or malformed scenario (sysexits `EX_USAGE`).
pub const EXIT_USAGE: i32 = 64;
/// A file could not be read or written (sysexits `EX_IOERR`).
pub const EXIT_IO: i32 = 74;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

impl Outcome {
    fn new(code: i32, output: impl Into<String>) -> Self {
        Outcome { code, output: output.into() }
    }
}

pub fn cmd_prove(text: &str, budget: u64, check: bool) -> Outcome {
    let goal = match parse_formula(text) {
        Ok(f) => f,
        Err(e) => return Outcome::new(EXIT_USAGE, format!("error: {e}\n")),
    };
    match prove_with_budget(&goal, budget) {
        ProveResult::Proved(p) => {
            let n = p.node_count();
            let mut out = format!("PROVABLE ({n} node{})\n{}", if n == 1 { "" } else { "s" }, p.serialize());
            if !out.ends_with('\n') {
                out.push('\n');
            }
            if check {
                if verify(&p) {
                    out.push_str("verified\n");
                } else {
                    out.push_str("verification FAILED\n");
                    return Outcome::new(EXIT_NO, out);
                }
            }
            Outcome::new(EXIT_OK, out)
        }
        ProveResult::Unprovable => Outcome::new(EXIT_NO, "UNPROVABLE\n"),
        ProveResult::Timeout => Outcome::new(EXIT_TIMEOUT, format!("TIMEOUT after {budget} steps\n")),
    }
}

/// Read assertion patterns: one per line, blank lines and `%` comments
/// skipped.
pub fn parse_assertions(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if t.contains('\t') {
            return Err(format!("line {}: tab in pattern", n + 1));
        }
        out.push(t.to_string());
    }
    Ok(out)
}

pub fn cmd_run(dir: &Path, opts: RunOptions, assertions: Option<&Path>, trace_file: Option<&Path>) -> Outcome {
    let scenario = match load_scenario(dir) {
        Ok(s) => s,
        Err(e) => return Outcome::new(EXIT_USAGE, format!("error: {e}\n")),
    };
    let patterns = match assertions {
        None => None,
        Some(p) => match fs::read_to_string(p) {
            Ok(text) => match parse_assertions(&text) {
                Ok(v) => Some(v),
                Err(e) => return Outcome::new(EXIT_USAGE, format!("error: {}: {e}\n", p.display())),
            },
            Err(e) => return Outcome::new(EXIT_IO, format!("error: {}: {e}\n", p.display())),
        },
    };
    let report = match run_scenario(&scenario, opts) {
        Ok(r) => r,
        Err(e) => return Outcome::new(EXIT_IO, format!("error: {e}\n")),
    };
    let trace = report.render();
    let mut out = String::new();
    match trace_file {
        Some(p) => {
            if let Err(e) = fs::write(p, &trace) {
                return Outcome::new(EXIT_IO, format!("error: {}: {e}\n", p.display()));
            }
        }
        None => out.push_str(&trace),
    }
    match report.quiescent_at {
        Some(t) => out.push_str(&format!("quiescent after tick {t}\n")),
        None => out.push_str("tick limit reached\n"),
    }
    if let Some(patterns) = patterns {
        match check_assertions(&report.trace, &patterns) {
            Ok(()) => out.push_str(&format!("assertions: {} matched\n", patterns.len())),
            Err(p) => {
                out.push_str(&format!("assertion failed: no line matching `{p}`\n"));
                return Outcome::new(EXIT_NO, out);
            }
        }
    }
    Outcome::new(EXIT_OK, out)
}

fn check_file(path: &Path, out: &mut String) -> bool {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            out.push_str(&format!("{}: {e}\n", path.display()));
            return false;
        }
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let result = if name == "scenario.cfg" {
        colweb::agentd::parse_config(&text).map(|_| ()).map_err(|e| e.to_string())
    } else {
        parse_agent_file(&text).map(|_| ()).map_err(|e| format!("{}: {e}", path.display()))
    };
    match result {
        Ok(()) => true,
        Err(e) => {
            out.push_str(&format!("{e}\n"));
            false
        }
    }
}

/// Check an agent file, a `scenario.cfg`, or a whole scenario directory.
pub fn cmd_check(path: &Path) -> Outcome {
    let mut out = String::new();
    let clean = if path.is_dir() {
        let mut ok = true;
        let mut entries: Vec<_> = match fs::read_dir(path) {
            Ok(rd) => rd.filter_map(Result::ok).map(|e| e.path()).collect(),
            Err(e) => return Outcome::new(EXIT_IO, format!("{}: {e}\n", path.display())),
        };
        entries.sort();
        for f in &entries {
            let is_agent = f.extension().is_some_and(|x| x == "agent");
            let is_cfg = f.file_name().is_some_and(|n| n == "scenario.cfg");
            if is_agent || is_cfg {
                ok &= check_file(f, &mut out);
            }
        }
        if ok && path.join("scenario.cfg").exists() {
            if let Err(ScenarioError { file, line, message }) = load_scenario(path) {
                out.push_str(&format!("{file}:{line}: {message}\n"));
                ok = false;
            }
        }
        ok
    } else {
        check_file(path, &mut out)
    };
    if clean {
        out.push_str("ok\n");
        Outcome::new(EXIT_OK, out)
    } else {
        Outcome::new(EXIT_NO, out)
    }
}

/// Parse `atom=true|false` pairs.
pub fn parse_valuation(items: &[String]) -> Result<BTreeMap<Atom, bool>, String> {
    let mut v = BTreeMap::new();
    for item in items {
        let (a, b) = item.split_once('=').ok_or_else(|| format!("expected atom=bool, got `{item}`"))?;
        let atom = Atom::new(a).map_err(|e| e.to_string())?;
        let value = match b {
            "true" | "1" => true,
            "false" | "0" => false,
            _ => return Err(format!("expected true or false, got `{b}`")),
        };
        v.insert(atom, value);
    }
    Ok(v)
}

fn parse_command(line: &str) -> Result<Option<Move>, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let path = |s: &str| s.parse::<TreePath>().map_err(|_| format!("bad path `{s}`"));
    let payload = match words.as_slice() {
        ["quit"] => return Ok(None),
        ["choose", p, i] => (path(p)?, MovePayload::Choose(i.parse().map_err(|_| format!("bad index `{i}`"))?)),
        ["switch", p] => (path(p)?, MovePayload::Switch),
        ["atom", p, t] => (path(p)?, MovePayload::Atom(t.to_string())),
        _ => return Err("commands: choose <path> <i> | switch <path> | atom <path> <text> | quit".into()),
    };
    Ok(Some(Move::new(Player::Env, payload.0, payload.1)))
}

/// Interactive play: the human is the environment.
pub fn cmd_play(
    text: &str,
    budget: u64,
    interp: &Interpretation,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
) -> std::io::Result<i32> {
    let goal: Formula = match parse_formula(text) {
        Ok(f) => f,
        Err(e) => {
            writeln!(output, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let proof = match prove_with_budget(&goal, budget) {
        ProveResult::Proved(p) => p,
        ProveResult::Unprovable => {
            writeln!(output, "UNPROVABLE: the machine has no winning strategy")?;
            return Ok(EXIT_NO);
        }
        ProveResult::Timeout => {
            writeln!(output, "TIMEOUT after {budget} steps")?;
            return Ok(EXIT_TIMEOUT);
        }
    };
    let mut session = Session::new("play", &goal, proof, 0).expect("proof of the goal");
    for mv in session.advance().unwrap_or_default() {
        writeln!(output, "machine: {mv}")?;
    }
    let mut line = String::new();
    loop {
        writeln!(output, "view: {}", session.view())?;
        write!(output, "> ")?;
        output.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        match parse_command(line.trim()) {
            Ok(None) => break,
            Ok(Some(mv)) => match session.env_move(mv) {
                Ok(step) => {
                    for m in step.emitted {
                        writeln!(output, "machine: {m}")?;
                    }
                }
                Err(e) => writeln!(output, "rejected: {e}")?,
            },
            Err(e) => writeln!(output, "{e}")?,
        }
    }
    session.terminate();
    let winner = session.state().evaluate(interp);
    let who = if winner == Player::Machine { "machine" } else { "environment" };
    writeln!(output, "winner: {winner} ({who})")?;
    Ok(EXIT_OK)
}
