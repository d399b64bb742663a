//! Generators and independent oracles shared by the integration tests.
//! The oracles work on raw formula trees and do not call into the
//! library's hyperformula or prover code.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use colweb::formula::{parse_formula, Atom, AtomKind, ChoiceOp, Formula, Literal, ParOp, SeqOp};
use colweb::hyper::HyperFormula;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn f(s: &str) -> Formula {
    parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Provable formulas used as the play corpus: every connective, general
/// atoms for copycat, and both chain kinds.
pub const CORPUS: &[&str] = &[
    "p -> p",
    "P -> P",
    "~P \\/ P",
    "(p & q) -> (p & q)",
    "(b0 # b1 # b2)^u -> (b0 # b1 # b2)^w",
    "(P /\\ Q) -> (Q /\\ P)",
    "(P \\/ Q) -> (Q \\/ P)",
    "(p + q) -> (q + p)",
    "(P & Q) -> (P & Q)",
    "(~p \\/ p) + q",
    "(p \\/ ~p) + (q /\\ ~q)",
    "(p # q) -> (p # q)",
    "(P # Q) -> (P # Q)",
    "(P @ Q) -> (P @ Q)",
    "P -> (P \\/ Q)",
    "(P /\\ Q) -> P",
    "(P & Q) -> (P + Q)",
    "(a0 # a1) -> ((a0 # a1) \\/ r)",
    "(P # (r \\/ ~r)) \\/ ~P",
    "((P -> Q) /\\ P) -> (Q \\/ ~P \\/ P)",
];

// ---------------------------------------------------------------------
// Classical reference: truth tables

#[derive(Clone, Debug)]
pub enum Ex {
    Const(bool),
    Var(String, bool),
    And(Vec<Ex>),
    Or(Vec<Ex>),
}

impl Ex {
    fn vars(&self, out: &mut Vec<String>) {
        match self {
            Ex::Var(v, _) if !out.contains(v) => out.push(v.clone()),
            Ex::And(c) | Ex::Or(c) => c.iter().for_each(|x| x.vars(out)),
            _ => {}
        }
    }

    fn eval(&self, env: &HashMap<&str, bool>) -> bool {
        match self {
            Ex::Const(b) => *b,
            Ex::Var(v, neg) => env[v.as_str()] != *neg,
            Ex::And(c) => c.iter().all(|x| x.eval(env)),
            Ex::Or(c) => c.iter().any(|x| x.eval(env)),
        }
    }
}

/// Enumerate all 2^n assignments.
pub fn truth_table_tautology(e: &Ex) -> bool {
    let mut vars = Vec::new();
    e.vars(&mut vars);
    assert!(vars.len() <= 20, "too many variables for a truth table");
    (0u32..1 << vars.len()).all(|bits| {
        let env: HashMap<&str, bool> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), bits >> i & 1 == 1)).collect();
        e.eval(&env)
    })
}

fn is_general_name(a: &Atom) -> bool {
    a.kind() == AtomKind::General
}

/// Classical residue of a hyperformula tree: unresolved choices become
/// constants by who owes the choice, chains contribute their underlined
/// component, general literals lose, hybrid literals read their
/// elementary component.
pub fn residue(t: &Formula) -> Ex {
    match t {
        Formula::Const(b) => Ex::Const(*b),
        Formula::Lit(l) => match &l.hybrid {
            Some(q) => Ex::Var(q.as_str().to_string(), l.negated),
            None if is_general_name(&l.atom) => Ex::Const(false),
            None => Ex::Var(l.atom.as_str().to_string(), l.negated),
        },
        Formula::Par { op: ParOp::And, children } => Ex::And(children.iter().map(residue).collect()),
        Formula::Par { op: ParOp::Or, children } => Ex::Or(children.iter().map(residue).collect()),
        Formula::Choice { op, .. } => Ex::Const(*op == ChoiceOp::Env),
        Formula::Seq { children, underline, .. } => residue(&children[*underline]),
    }
}

// ---------------------------------------------------------------------
// Game reference for elementary formulas

/// Position of a game over an elementary formula: choice made at each
/// choice node and current component of each chain, indexed by node
/// number in pre-order.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Pos(Vec<usize>);

const OPEN: usize = usize::MAX;

struct Game {
    nodes: Vec<Formula>,
    parent: Vec<Option<(usize, usize)>>,
    first_child: Vec<Vec<usize>>,
}

impl Game {
    fn new(root: &Formula) -> Game {
        let mut g = Game { nodes: Vec::new(), parent: Vec::new(), first_child: Vec::new() };
        g.add(root, None);
        g
    }

    fn add(&mut self, node: &Formula, parent: Option<(usize, usize)>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.parent.push(parent);
        self.first_child.push(Vec::new());
        for (i, c) in node.children().iter().enumerate() {
            let cid = self.add(c, Some((id, i)));
            self.first_child[id].push(cid);
        }
        id
    }

    fn start(&self) -> Pos {
        Pos(self.nodes.iter().map(|n| if matches!(n, Formula::Choice { .. }) { OPEN } else { 0 }).collect())
    }

    /// A node can be moved in when every ancestor choice selected the way
    /// down and every ancestor chain currently sits on it.
    fn live(&self, pos: &Pos, mut id: usize) -> bool {
        while let Some((p, i)) = self.parent[id] {
            let gated = matches!(self.nodes[p], Formula::Choice { .. } | Formula::Seq { .. });
            if gated && pos.0[p] != i {
                return false;
            }
            id = p;
        }
        true
    }

    fn moves(&self, pos: &Pos, machine: bool) -> Vec<Pos> {
        let mut out = Vec::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let mine = match n {
                Formula::Choice { op, .. } => (*op == ChoiceOp::Machine) == machine && pos.0[id] == OPEN,
                Formula::Seq { op, children, .. } => {
                    (*op == SeqOp::MachineLed) == machine && pos.0[id] + 1 < children.len()
                }
                _ => false,
            };
            if !mine || !self.live(pos, id) {
                continue;
            }
            match n {
                Formula::Choice { children, .. } => {
                    for i in 0..children.len() {
                        let mut p = pos.clone();
                        p.0[id] = i;
                        out.push(p);
                    }
                }
                _ => {
                    let mut p = pos.clone();
                    p.0[id] += 1;
                    out.push(p);
                }
            }
        }
        out
    }

    fn residue(&self, pos: &Pos, id: usize) -> Ex {
        let kids = &self.first_child[id];
        match &self.nodes[id] {
            Formula::Const(b) => Ex::Const(*b),
            Formula::Lit(l) => Ex::Var(l.atom.as_str().to_string(), l.negated),
            Formula::Par { op, .. } => {
                let c: Vec<Ex> = kids.iter().map(|&k| self.residue(pos, k)).collect();
                if *op == ParOp::And {
                    Ex::And(c)
                } else {
                    Ex::Or(c)
                }
            }
            Formula::Choice { op, .. } => match pos.0[id] {
                OPEN => Ex::Const(*op == ChoiceOp::Env),
                i => self.residue(pos, kids[i]),
            },
            Formula::Seq { .. } => self.residue(pos, kids[pos.0[id]]),
        }
    }

    /// The machine either moves, or stops; once it stops, the position
    /// must be a classical win and so must every environment reply.
    fn wins(&self, pos: &Pos, memo: &mut HashMap<Pos, bool>) -> bool {
        if let Some(&v) = memo.get(pos) {
            return v;
        }
        let waiting_ok = |memo: &mut HashMap<Pos, bool>| {
            truth_table_tautology(&self.residue(pos, 0)) && self.moves(pos, false).iter().all(|p| self.wins(p, memo))
        };
        let v = waiting_ok(memo) || self.moves(pos, true).iter().any(|p| self.wins(p, memo));
        memo.insert(pos.clone(), v);
        v
    }
}

/// Whether the machine has a winning strategy in the game of an
/// elementary formula, by exhaustive minimax over positions.
pub fn machine_wins_elementary(formula: &Formula) -> bool {
    let g = Game::new(formula);
    assert!(
        g.nodes.iter().all(|n| !matches!(n, Formula::Lit(l) if l.atom.kind() == AtomKind::General)),
        "elementary formulas only"
    );
    g.wins(&g.start(), &mut HashMap::new())
}

/// Replace every general atom by an elementary one of the same name in
/// lower case: a formula whose elementary instance has no winning
/// strategy has none at all.
pub fn elementary_instance(formula: &Formula) -> Formula {
    let mut out = formula.clone();
    fn go(n: &mut Formula) {
        match n {
            Formula::Lit(l) if l.atom.kind() == AtomKind::General => {
                let name = format!("g_{}", l.atom.as_str().to_lowercase());
                l.atom = Atom::new(name).unwrap();
            }
            Formula::Par { children, .. } | Formula::Choice { children, .. } | Formula::Seq { children, .. } => {
                children.iter_mut().for_each(go)
            }
            _ => {}
        }
    }
    go(&mut out);
    out
}

// ---------------------------------------------------------------------
// Generators

fn lit(r: &mut ChaCha8Rng, atoms: &[String]) -> Formula {
    let a = atoms.choose(r).unwrap();
    Formula::Lit(Literal::new(Atom::new(a.clone()).unwrap(), r.gen_bool(0.5)))
}

/// Random plain formula over `atoms`. `ops` limits the connectives:
/// 0 parallel only, 1 adds choices, 2 adds chains.
pub fn gen_formula(r: &mut ChaCha8Rng, atoms: &[String], depth: usize, ops: u8) -> Formula {
    if depth == 0 || r.gen_bool(0.3) {
        return lit(r, atoms);
    }
    let arity = r.gen_range(2..=3);
    let children: Vec<Formula> = (0..arity).map(|_| gen_formula(r, atoms, depth - 1, ops)).collect();
    let kind = r.gen_range(0..=(2 * ops as u32 + 1));
    match kind {
        0 => Formula::Par { op: ParOp::And, children },
        1 => Formula::Par { op: ParOp::Or, children },
        2 => Formula::Choice { op: ChoiceOp::Env, children, env: None },
        3 => Formula::Choice { op: ChoiceOp::Machine, children, env: None },
        4 => Formula::Seq { op: SeqOp::EnvLed, children, env: None, underline: 0 },
        _ => Formula::Seq { op: SeqOp::MachineLed, children, env: None, underline: 0 },
    }
}

pub fn atom_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random hyperformula with at most `max_atoms` distinct elementary atoms
/// (hybrid components included): random underlines, constants, general
/// literals and balanced hybrid pairs.
pub fn gen_hyper(r: &mut ChaCha8Rng, max_atoms: usize) -> HyperFormula {
    let n_hybrid = r.gen_range(0..=2.min(max_atoms / 3));
    let n_plain = r.gen_range(1..=max_atoms - n_hybrid);
    let plain = atom_names("e", n_plain);
    let mut pending: Vec<Formula> = Vec::new();
    for k in 0..n_hybrid {
        let q = Atom::new(format!("h{k}")).unwrap();
        let g = Atom::new(format!("G{k}")).unwrap();
        for negated in [false, true] {
            pending.push(Formula::Lit(Literal { atom: g.clone(), negated, env: None, hybrid: Some(q.clone()) }));
        }
    }
    let mut t = gen_tree(r, &plain, 4);
    // hybrids must sit at surface: attach them as top-level disjuncts
    if !pending.is_empty() {
        pending.shuffle(r);
        let mut children = vec![t];
        children.extend(pending);
        t = Formula::Par { op: ParOp::Or, children };
    }
    HyperFormula::from_tree(t)
}

fn gen_tree(r: &mut ChaCha8Rng, atoms: &[String], depth: usize) -> Formula {
    if depth == 0 || r.gen_bool(0.25) {
        return match r.gen_range(0..10) {
            0 => Formula::Const(r.gen_bool(0.5)),
            1 => Formula::Lit(Literal::new(Atom::new("Gx").unwrap(), r.gen_bool(0.5))),
            _ => lit(r, atoms),
        };
    }
    let arity = r.gen_range(2..=3);
    let children: Vec<Formula> = (0..arity).map(|_| gen_tree(r, atoms, depth - 1)).collect();
    match r.gen_range(0..8) {
        0..=2 => Formula::Par { op: ParOp::And, children },
        3..=5 => Formula::Par { op: ParOp::Or, children },
        6 => {
            Formula::Choice { op: if r.gen_bool(0.5) { ChoiceOp::Env } else { ChoiceOp::Machine }, children, env: None }
        }
        _ => Formula::Seq {
            op: if r.gen_bool(0.5) { SeqOp::EnvLed } else { SeqOp::MachineLed },
            underline: r.gen_range(0..children.len()),
            children,
            env: None,
        },
    }
}

/// Random valuation of the elementary atoms of `f`.
pub fn random_valuation(r: &mut ChaCha8Rng, f: &Formula) -> BTreeMap<Atom, bool> {
    f.atoms().into_iter().filter(|a| a.kind() == AtomKind::Elementary).map(|a| (a, r.gen_bool(0.5))).collect()
}

// ---------------------------------------------------------------------
// Wire messages

/// Random well-formed message; formulas come from the formula generator
/// so they carry every operator the printer emits.
pub fn gen_message(r: &mut ChaCha8Rng) -> colweb::agentd::Message {
    use colweb::agentd::Message;
    use colweb::formula::{AgentName, Path};
    use colweb::runtime::{Move, MovePayload, Player};
    let names = ["credit", "db", "m", "kim", "etad", "a", "user", "agent_7"];
    let name = |r: &mut ChaCha8Rng| AgentName::new(*names.choose(r).unwrap()).unwrap();
    let session = |r: &mut ChaCha8Rng| format!("{}:{}", names.choose(r).unwrap(), r.gen_range(0..100_000));
    match r.gen_range(0..5) {
        0 => {
            let g = gen_formula(r, &atom_names("b", 4), 3, 2);
            Message::Query { session: session(r), from: name(r), to: name(r), formula: colweb::formula::pretty(&g) }
        }
        1 => {
            let depth = r.gen_range(0..5);
            let path = Path((0..depth).map(|_| r.gen_range(0..12)).collect());
            let payload = match r.gen_range(0..3) {
                0 => MovePayload::Choose(r.gen_range(0..10)),
                1 => MovePayload::Switch,
                _ => MovePayload::Atom(format!("t{}", r.gen_range(0..1000))),
            };
            let player = if r.gen_bool(0.5) { Player::Machine } else { Player::Env };
            Message::Move { session: session(r), from: name(r), to: name(r), mv: Move::new(player, path, payload) }
        }
        2 => Message::Ok { session: session(r) },
        3 => {
            let reasons = ["unprovable", "timeout", "illegal-move", "unknown-session", "oracle-missing"];
            Message::Fail { session: session(r), reason: reasons.choose(r).unwrap().to_string() }
        }
        _ => Message::Done { session: session(r) },
    }
}
