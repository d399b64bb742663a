use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use colweb::agentd::RunOptions;
use colweb::formula::Atom;
use colweb::prover::DEFAULT_BUDGET;
use colweb::runtime::{Interpretation, Player};
use colweb_cli::{cmd_check, cmd_play, cmd_prove, cmd_run, parse_valuation, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "colweb", version, about = "Prove, play and run computability-logic knowledgebases")]
struct Cli {
    /// Seed for scenario runs (overrides the scenario's own seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Proof-search step budget.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Write the scenario trace to this file instead of stdout.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a winning strategy.
    Prove {
        formula: String,
        /// Re-check the proof found.
        #[arg(long)]
        verify: bool,
    },
    /// Run a scenario directory.
    Run {
        dir: PathBuf,
        /// File of ordered substring patterns the trace must contain.
        #[arg(long)]
        assert: Option<PathBuf>,
        /// Carry messages over a loopback TCP socket.
        #[arg(long)]
        socket: bool,
        /// Override the scenario's tick limit.
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Play the environment against the machine's strategy.
    Play {
        formula: String,
        /// Elementary atom values, `atom=true|false`.
        #[arg(long = "set")]
        valuation: Vec<String>,
        /// Who wins each general atom when the game closes.
        #[arg(long, default_value = "⊥")]
        oracle: Player,
    },
    /// Check agent files, scenario.cfg files or scenario directories.
    Check { paths: Vec<PathBuf> },
}

fn finish(code: i32, output: &str) -> ExitCode {
    print!("{output}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Prove { formula, verify } => {
            let o = cmd_prove(&formula, cli.budget, verify);
            finish(o.code, &o.output)
        }
        Command::Run { dir, assert, socket, ticks } => {
            let opts = RunOptions { seed: cli.seed, budget: cli.budget, socket, ticks };
            let o = cmd_run(&dir, opts, assert.as_deref(), cli.trace.as_deref());
            finish(o.code, &o.output)
        }
        Command::Play { formula, valuation, oracle } => {
            let valuation = match parse_valuation(&valuation) {
                Ok(v) => v,
                Err(e) => return finish(EXIT_USAGE, &format!("error: {e}\n")),
            };
            let interp = Interpretation::table(valuation, BTreeMap::<Atom, Player>::new(), oracle);
            let stdin = io::stdin();
            let mut input = stdin.lock();
            let mut output = io::stdout();
            match cmd_play(&formula, cli.budget, &interp, &mut input, &mut output) {
                Ok(code) => ExitCode::from(code as u8),
                Err(e) => finish(colweb_cli::EXIT_IO, &format!("error: {e}\n")),
            }
        }
        Command::Check { paths } => {
            let mut code = 0;
            for p in &paths {
                let o = cmd_check(p);
                print!("{}", o.output.lines().map(|l| format!("{}: {l}\n", p.display())).collect::<String>());
                code = code.max(o.code);
            }
            ExitCode::from(code as u8)
        }
    }
}
