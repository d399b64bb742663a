//! Backward proof search over balanced hyperformulas, proof objects and
//! their verification.

mod plain;
mod verify;

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use crate::formula::{Atom, ChoiceOp, Formula, Path};
use crate::hyper::{self, HyperFormula, Selector};

pub use plain::{verify_plain, PlainLine};
pub use verify::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Wait,
    Choose,
    Switch,
    Match,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Wait => "Wait",
            Rule::Choose => "Choose",
            Rule::Switch => "Switch",
            Rule::Match => "Match",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Wait,
    Choose { path: Path, index: usize },
    Switch { path: Path },
    Match { pos: Path, neg: Path, fresh: Atom },
}

impl Action {
    pub fn rule(&self) -> Rule {
        match self {
            Action::Wait => Rule::Wait,
            Action::Choose { .. } => Rule::Choose,
            Action::Switch { .. } => Rule::Switch,
            Action::Match { .. } => Rule::Match,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub conclusion: HyperFormula,
    pub rule: Rule,
    pub action: Action,
    pub premises: Vec<Proof>,
}

impl Proof {
    fn new(conclusion: HyperFormula, action: Action, premises: Vec<Proof>) -> Self {
        Proof { conclusion, rule: action.rule(), action, premises }
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Proof::node_count).sum::<usize>()
    }

    /// Rules of all nodes, pre-order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    pub fn contains_rule(&self, rule: Rule) -> bool {
        self.rule == rule || self.premises.iter().any(|p| p.contains_rule(rule))
    }

    /// Indented text form, one node per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_lines(0, &mut out);
        out
    }

    fn write_lines(&self, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        let _ = match &self.action {
            Action::Wait => writeln!(out, "{indent}Wait {}", self.conclusion),
            Action::Choose { path, index } => writeln!(out, "{indent}Choose @{path} [{index}] {}", self.conclusion),
            Action::Switch { path } => writeln!(out, "{indent}Switch @{path} {}", self.conclusion),
            Action::Match { pos, neg, fresh } => {
                writeln!(out, "{indent}Match @{pos} [{neg} {fresh}] {}", self.conclusion)
            }
        };
        for p in &self.premises {
            p.write_lines(depth + 1, out);
        }
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProveResult {
    Proved(Proof),
    Unprovable,
    /// The step budget ran out before the search finished.
    Timeout,
}

impl ProveResult {
    pub fn proof(&self) -> Option<&Proof> {
        match self {
            ProveResult::Proved(p) => Some(p),
            _ => None,
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// The Wait premise set of `h`: every ⊓ resolution and every △ advance at
/// active surface positions, without duplicates.
pub fn wait_premises(h: &HyperFormula) -> Vec<HyperFormula> {
    let mut out: Vec<HyperFormula> = Vec::new();
    let mut push = |f: HyperFormula| {
        if !out.contains(&f) {
            out.push(f);
        }
    };
    for path in hyper::active_surface(h, Selector::EnvChoiceNodes) {
        let arity = h.get(&path).map_or(0, |n| n.children().len());
        for i in 0..arity {
            push(hyper::select_component(h, &path, i, ChoiceOp::Env).expect("active surface ⊓"));
        }
    }
    for path in hyper::active_surface(h, Selector::EnvLedNodes) {
        if let Ok(next) = hyper::advance_underline(h, &path) {
            push(next);
        }
    }
    out
}

/// Strictly decreases along every rule application.
pub fn measure(h: &HyperFormula) -> usize {
    let mut general = 0;
    let mut choices = 0;
    h.tree().walk(|_, node| match node {
        Formula::Lit(l) if l.is_general() && l.hybrid.is_none() => general += 1,
        Formula::Choice { .. } => choices += 1,
        _ => {}
    });
    general + choices + hyper::underline_slack(h.tree())
}

/// Smallest `q<n>` not occurring in `h`.
pub fn fresh_atom(h: &HyperFormula) -> Atom {
    let used = h.tree().atoms();
    (0..)
        .map(|n| Atom::new(format!("q{n}")).expect("valid name"))
        .find(|a| !used.contains(a))
        .expect("infinitely many candidates")
}

/// Memo key: structure with underlines, hybrid components numbered in order
/// of first appearance, annotations dropped.
fn canonical_key(h: &HyperFormula) -> String {
    fn go(f: &Formula, names: &mut Vec<Atom>, out: &mut String) {
        match f {
            Formula::Const(b) => out.push(if *b { 'T' } else { 'F' }),
            Formula::Lit(l) => {
                if l.negated {
                    out.push('~');
                }
                out.push_str(l.atom.as_str());
                if let Some(q) = &l.hybrid {
                    let n = names.iter().position(|x| x == q).unwrap_or_else(|| {
                        names.push(q.clone());
                        names.len() - 1
                    });
                    let _ = write!(out, "_{n}");
                }
            }
            Formula::Par { op, children } => group(out, &format!("{op:?}"), children, names, None),
            Formula::Choice { op, children, .. } => group(out, &format!("{op:?}"), children, names, None),
            Formula::Seq { op, children, underline, .. } => {
                group(out, &format!("{op:?}"), children, names, Some(*underline))
            }
        }
    }
    fn group(out: &mut String, tag: &str, children: &[Formula], names: &mut Vec<Atom>, u: Option<usize>) {
        out.push_str(tag);
        if let Some(u) = u {
            let _ = write!(out, "{u}");
        }
        out.push('(');
        for c in children {
            go(c, names, out);
            out.push(',');
        }
        out.push(')');
    }
    let mut out = String::new();
    go(h.tree(), &mut Vec::new(), &mut out);
    out
}

struct Search {
    steps: u64,
    budget: u64,
    failed: HashSet<String>,
}

struct OutOfBudget;

impl Search {
    fn prove(&mut self, h: &HyperFormula) -> Result<Option<Proof>, OutOfBudget> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(OutOfBudget);
        }
        let key = canonical_key(h);
        if self.failed.contains(&key) {
            return Ok(None);
        }
        let found = self.expand(h)?;
        if found.is_none() {
            self.failed.insert(key);
        }
        Ok(found)
    }

    fn expand(&mut self, h: &HyperFormula) -> Result<Option<Proof>, OutOfBudget> {
        for path in hyper::active_surface(h, Selector::MachineChoiceNodes) {
            let arity = h.get(&path).map_or(0, |n| n.children().len());
            for index in 0..arity {
                let next = hyper::apply_choose(h, &path, index).expect("active surface ⊔");
                if let Some(p) = self.prove(&next)? {
                    return Ok(Some(Proof::new(h.clone(), Action::Choose { path, index }, vec![p])));
                }
            }
        }
        for path in hyper::active_surface(h, Selector::MachineLedNodes) {
            if let Ok(next) = hyper::advance_underline(h, &path) {
                if let Some(p) = self.prove(&next)? {
                    return Ok(Some(Proof::new(h.clone(), Action::Switch { path }, vec![p])));
                }
            }
        }
        let lits = hyper::active_surface(h, Selector::GeneralLiterals);
        let literal = |p: &Path| match h.get(p) {
            Some(Formula::Lit(l)) => l.clone(),
            _ => unreachable!("selector returns literals"),
        };
        for pos in lits.iter().filter(|p| !literal(p).negated) {
            for neg in lits.iter().filter(|n| literal(n).negated && literal(n).atom == literal(pos).atom) {
                let fresh = fresh_atom(h);
                let next = hyper::hybridize(h, pos, neg, &fresh).expect("matching pair");
                if let Some(p) = self.prove(&next)? {
                    let action = Action::Match { pos: pos.clone(), neg: neg.clone(), fresh };
                    return Ok(Some(Proof::new(h.clone(), action, vec![p])));
                }
            }
        }
        if !hyper::is_stable(h) {
            return Ok(None);
        }
        let mut premises = Vec::new();
        for next in wait_premises(h) {
            match self.prove(&next)? {
                Some(p) => premises.push(p),
                None => return Ok(None),
            }
        }
        Ok(Some(Proof::new(h.clone(), Action::Wait, premises)))
    }
}

/// Search for a proof of the hyperformula `h` within `budget` node
/// expansions.
pub fn prove_hyper(h: &HyperFormula, budget: u64) -> ProveResult {
    let mut search = Search { steps: 0, budget, failed: HashSet::new() };
    match search.prove(h) {
        Ok(Some(p)) => ProveResult::Proved(p),
        Ok(None) => ProveResult::Unprovable,
        Err(OutOfBudget) => ProveResult::Timeout,
    }
}

pub fn prove_with_budget(goal: &Formula, budget: u64) -> ProveResult {
    prove_hyper(&hyper::to_hyper(goal), budget)
}

pub fn prove(goal: &Formula) -> ProveResult {
    prove_with_budget(goal, DEFAULT_BUDGET)
}
