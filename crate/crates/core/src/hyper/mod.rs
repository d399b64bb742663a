//! Hyperformulas: formulas whose sequential nodes carry an underlined
//! component and whose general literals may be hybrid (`P_q`).
//!
//! This module classifies occurrences (surface / active / abandoned),
//! computes capitalizations and elementarizations, decides stability and
//! balancedness, and provides the syntactic rewrites the proof rules are
//! built from.

mod taut;

use std::collections::HashMap;
use std::fmt;

use crate::formula::{self, Atom, ChoiceOp, Formula, Literal, ParOp, Path, SeqOp};

pub use taut::{is_tautology, ElementaryFormula};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HyperError {
    #[error("no node at path {0}")]
    InvalidPath(Path),
    #[error("rule not applicable at {path}: {reason}")]
    NotApplicable { path: Path, reason: String },
    #[error("fresh atom `{0}` already occurs in the formula")]
    FreshCollision(Atom),
}

fn not_applicable(path: &Path, reason: impl Into<String>) -> HyperError {
    HyperError::NotApplicable { path: path.clone(), reason: reason.into() }
}

/// A hyperformula. The underlying [`Formula`] tree carries underline indices
/// and hybrid components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HyperFormula(Formula);

impl HyperFormula {
    /// Wrap a tree as-is, keeping its underlines and hybrids.
    pub fn from_tree(f: Formula) -> Self {
        HyperFormula(f)
    }

    pub fn tree(&self) -> &Formula {
        &self.0
    }

    pub fn into_tree(self) -> Formula {
        self.0
    }

    pub fn get(&self, path: &Path) -> Option<&Formula> {
        self.0.get(path)
    }
}

impl fmt::Display for HyperFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&formula::parse_render(&self.0))
    }
}

/// Heads underlined, no hybrids.
pub fn to_hyper(f: &Formula) -> HyperFormula {
    let mut out = f.clone();
    fn go(node: &mut Formula) {
        match node {
            Formula::Lit(l) => l.hybrid = None,
            Formula::Seq { underline, children, .. } => {
                *underline = 0;
                children.iter_mut().for_each(go);
            }
            Formula::Par { children, .. } | Formula::Choice { children, .. } => children.iter_mut().for_each(go),
            Formula::Const(_) => {}
        }
    }
    go(&mut out);
    HyperFormula(out)
}

/// General dehybridization: hybrids back to their general atoms, underlines
/// reset.
pub fn dehybridize(h: &HyperFormula) -> Formula {
    to_hyper(&h.0).0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activity {
    /// Every enclosing sequential component is the underlined one.
    Active,
    /// Some enclosing sequential component lies left of the underline.
    Abandoned,
    /// Inside a component right of an underline, and none to the left.
    Pending,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub path: Path,
    pub surface: bool,
    pub activity: Activity,
}

impl Occurrence {
    pub fn is_active_surface(&self) -> bool {
        self.surface && self.activity == Activity::Active
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    All,
    Literals,
    GeneralLiterals,
    HybridLiterals,
    ChoiceNodes,
    EnvChoiceNodes,
    MachineChoiceNodes,
    SequentialNodes,
    EnvLedNodes,
    MachineLedNodes,
}

impl Selector {
    pub fn matches(self, node: &Formula) -> bool {
        match (self, node) {
            (Selector::All, _) => true,
            (Selector::Literals, Formula::Lit(_)) => true,
            (Selector::GeneralLiterals, Formula::Lit(l)) => l.is_general() && l.hybrid.is_none(),
            (Selector::HybridLiterals, Formula::Lit(l)) => l.hybrid.is_some(),
            (Selector::ChoiceNodes, Formula::Choice { .. }) => true,
            (Selector::EnvChoiceNodes, Formula::Choice { op, .. }) => *op == ChoiceOp::Env,
            (Selector::MachineChoiceNodes, Formula::Choice { op, .. }) => *op == ChoiceOp::Machine,
            (Selector::SequentialNodes, Formula::Seq { .. }) => true,
            (Selector::EnvLedNodes, Formula::Seq { op, .. }) => *op == SeqOp::EnvLed,
            (Selector::MachineLedNodes, Formula::Seq { op, .. }) => *op == SeqOp::MachineLed,
            _ => false,
        }
    }
}

#[derive(Clone, Copy)]
struct Ctx {
    surface: bool,
    left: bool,
    right: bool,
}

impl Ctx {
    fn activity(self) -> Activity {
        if self.left {
            Activity::Abandoned
        } else if self.right {
            Activity::Pending
        } else {
            Activity::Active
        }
    }
}

fn classify_all<'a>(h: &'a Formula, mut visit: impl FnMut(&Path, &'a Formula, bool, Activity)) {
    fn go<'a>(
        node: &'a Formula,
        ctx: Ctx,
        path: &mut Path,
        visit: &mut impl FnMut(&Path, &'a Formula, bool, Activity),
    ) {
        visit(path, node, ctx.surface, ctx.activity());
        for (i, child) in node.children().iter().enumerate() {
            let child_ctx = match node {
                Formula::Choice { .. } => Ctx { surface: false, ..ctx },
                Formula::Seq { underline, .. } => Ctx {
                    surface: ctx.surface && i <= *underline,
                    left: ctx.left || i < *underline,
                    right: ctx.right || i > *underline,
                },
                _ => ctx,
            };
            path.0.push(i);
            go(child, child_ctx, path, visit);
            path.0.pop();
        }
    }
    go(h, Ctx { surface: true, left: false, right: false }, &mut Path::root(), &mut visit);
}

/// All occurrences selected by `selector`, in pre-order (left to right).
pub fn occurrences(h: &HyperFormula, selector: Selector) -> Vec<Occurrence> {
    let mut out = Vec::new();
    classify_all(&h.0, |path, node, surface, activity| {
        if selector.matches(node) {
            out.push(Occurrence { path: path.clone(), surface, activity });
        }
    });
    out
}

/// Classification of the single node at `path`.
pub fn occurrence_at(h: &HyperFormula, path: &Path) -> Option<Occurrence> {
    let mut found = None;
    classify_all(&h.0, |p, _, surface, activity| {
        if p == path {
            found = Some(Occurrence { path: p.clone(), surface, activity });
        }
    });
    found
}

pub fn active_surface(h: &HyperFormula, selector: Selector) -> Vec<Path> {
    occurrences(h, selector).into_iter().filter(Occurrence::is_active_surface).map(|o| o.path).collect()
}

/// Replace every sequential node by its underlined component; hybrids stay.
pub fn capitalization(h: &HyperFormula) -> Formula {
    fn go(f: &Formula) -> Formula {
        match f {
            Formula::Seq { children, underline, .. } => go(&children[*underline]),
            Formula::Par { op, children } => Formula::Par { op: *op, children: children.iter().map(go).collect() },
            Formula::Choice { op, children, env } => {
                Formula::Choice { op: *op, children: children.iter().map(go).collect(), env: env.clone() }
            }
            other => other.clone(),
        }
    }
    go(&h.0)
}

/// Classical core of a hyperformula: on the capitalization, ⊓ ↦ ⊤, ⊔ ↦ ⊥,
/// general literals ↦ ⊥, hybrid literals ↦ their elementary component.
pub fn elementarization(h: &HyperFormula) -> ElementaryFormula {
    fn go(f: &Formula) -> ElementaryFormula {
        match f {
            Formula::Const(b) => ElementaryFormula::Const(*b),
            Formula::Choice { op: ChoiceOp::Env, .. } => ElementaryFormula::Const(true),
            Formula::Choice { op: ChoiceOp::Machine, .. } => ElementaryFormula::Const(false),
            Formula::Lit(Literal { hybrid: Some(q), negated, .. }) => {
                ElementaryFormula::Lit { atom: q.clone(), negated: *negated }
            }
            Formula::Lit(l) if l.is_general() => ElementaryFormula::Const(false),
            Formula::Lit(l) => ElementaryFormula::Lit { atom: l.atom.clone(), negated: l.negated },
            Formula::Par { op: ParOp::And, children } => ElementaryFormula::And(children.iter().map(go).collect()),
            Formula::Par { op: ParOp::Or, children } => ElementaryFormula::Or(children.iter().map(go).collect()),
            Formula::Seq { .. } => unreachable!("capitalization removes sequential nodes"),
        }
    }
    go(&capitalization(h))
}

pub fn is_stable(h: &HyperFormula) -> bool {
    is_tautology(&elementarization(h))
}

/// Each hybrid `P_q` occurs exactly twice (once negated, once not), both at
/// surface, and `q` occurs nowhere else.
pub fn is_balanced(h: &HyperFormula) -> bool {
    let mut hybrids: HashMap<&Atom, Vec<(&Atom, bool, bool)>> = HashMap::new();
    let mut plain_atoms: Vec<&Atom> = Vec::new();
    classify_all(&h.0, |_, node, surface, _| {
        if let Formula::Lit(l) = node {
            match &l.hybrid {
                Some(q) => hybrids.entry(q).or_default().push((&l.atom, l.negated, surface)),
                None => plain_atoms.push(&l.atom),
            }
        }
    });
    hybrids.iter().all(|(q, occs)| {
        occs.len() == 2
            && occs[0].0 == occs[1].0
            && occs[0].1 != occs[1].1
            && occs.iter().all(|o| o.2)
            && !plain_atoms.contains(q)
    })
}

/// Path of the other occurrence of the hybrid atom at `path`.
pub fn twin(h: &HyperFormula, path: &Path) -> Option<Path> {
    let Some(Formula::Lit(Literal { atom, hybrid: Some(q), .. })) = h.get(path) else {
        return None;
    };
    let mut found = None;
    h.0.walk(|p, node| {
        if let Formula::Lit(l) = node {
            if p != path && l.hybrid.as_ref() == Some(q) && &l.atom == atom {
                found = Some(p.clone());
            }
        }
    });
    found
}

/// An active hybrid occurrence whose twin is abandoned.
pub fn widowed(h: &HyperFormula, path: &Path) -> Result<bool, HyperError> {
    let occ = occurrence_at(h, path).ok_or_else(|| HyperError::InvalidPath(path.clone()))?;
    if !matches!(h.get(path), Some(Formula::Lit(l)) if l.hybrid.is_some()) {
        return Err(not_applicable(path, "not a hybrid literal"));
    }
    if occ.activity != Activity::Active {
        return Err(not_applicable(path, "hybrid occurrence is not active"));
    }
    let other = twin(h, path).ok_or_else(|| not_applicable(path, "hybrid atom has no twin"))?;
    let other = occurrence_at(h, &other).expect("twin path is valid");
    Ok(other.activity == Activity::Abandoned)
}

fn require_active_surface(h: &HyperFormula, path: &Path) -> Result<(), HyperError> {
    let occ = occurrence_at(h, path).ok_or_else(|| HyperError::InvalidPath(path.clone()))?;
    if !occ.surface {
        return Err(not_applicable(path, "occurrence is not surface"));
    }
    if occ.activity != Activity::Active {
        return Err(not_applicable(path, "occurrence is not active"));
    }
    Ok(())
}

/// Replace an active surface choice node of kind `op` by its `i`-th
/// component.
pub fn select_component(h: &HyperFormula, path: &Path, i: usize, op: ChoiceOp) -> Result<HyperFormula, HyperError> {
    require_active_surface(h, path)?;
    match h.get(path) {
        Some(Formula::Choice { op: o, children, .. }) if *o == op => {
            let child = children.get(i).ok_or_else(|| not_applicable(path, format!("no component {i}")))?;
            Ok(HyperFormula(h.0.replace_at(path, child.clone()).expect("path checked")))
        }
        _ => Err(not_applicable(path, format!("not a {} node", if op == ChoiceOp::Env { "⊓" } else { "⊔" }))),
    }
}

/// Choose° rewrite: the active surface ⊔ at `path` becomes its `i`-th
/// component.
pub fn apply_choose(h: &HyperFormula, path: &Path, i: usize) -> Result<HyperFormula, HyperError> {
    select_component(h, path, i, ChoiceOp::Machine)
}

/// Move the underline of the active surface sequential node at `path` one
/// component to the right.
pub fn advance_underline(h: &HyperFormula, path: &Path) -> Result<HyperFormula, HyperError> {
    require_active_surface(h, path)?;
    let mut out = h.0.clone();
    match out.get_mut(path) {
        Some(Formula::Seq { children, underline, .. }) => {
            if *underline + 1 >= children.len() {
                return Err(not_applicable(path, "underline already on the last component"));
            }
            *underline += 1;
            Ok(HyperFormula(out))
        }
        _ => Err(not_applicable(path, "not a sequential node")),
    }
}

/// Turn a non-negated and a negated active surface occurrence of the same
/// general atom into the hybrid `P_fresh`.
pub fn hybridize(h: &HyperFormula, pos: &Path, neg: &Path, fresh: &Atom) -> Result<HyperFormula, HyperError> {
    if fresh.is_general() {
        return Err(not_applicable(pos, format!("`{fresh}` is not an elementary atom")));
    }
    if h.0.atoms().contains(fresh) {
        return Err(HyperError::FreshCollision(fresh.clone()));
    }
    require_active_surface(h, pos)?;
    require_active_surface(h, neg)?;
    let lit = |path: &Path| match h.get(path) {
        Some(Formula::Lit(l)) if l.is_general() && l.hybrid.is_none() => Ok(l.clone()),
        _ => Err(not_applicable(path, "not a general non-hybrid literal")),
    };
    let (p, n) = (lit(pos)?, lit(neg)?);
    if p.negated || !n.negated || p.atom != n.atom {
        return Err(not_applicable(pos, "occurrences are not a positive/negative pair of one atom"));
    }
    let mut out = h.0.clone();
    for path in [pos, neg] {
        if let Some(Formula::Lit(l)) = out.get_mut(path) {
            l.hybrid = Some(fresh.clone());
        }
    }
    Ok(HyperFormula(out))
}

/// Sum over sequential nodes of the components right of the underline.
pub fn underline_slack(f: &Formula) -> usize {
    let mut total = 0;
    f.walk(|_, node| {
        if let Formula::Seq { children, underline, .. } = node {
            total += children.len() - 1 - underline;
        }
    });
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn h(s: &str) -> HyperFormula {
        to_hyper(&parse_formula(s).unwrap())
    }

    fn with_underline(mut hf: HyperFormula, path: &Path, u: usize) -> HyperFormula {
        if let Some(Formula::Seq { underline, .. }) = hf.0.get_mut(path) {
            *underline = u;
        }
        hf
    }

    fn path(v: &[usize]) -> Path {
        Path(v.to_vec())
    }

    #[test]
    fn to_hyper_heads() {
        assert_eq!(h("p").to_string(), "p");
        assert_eq!(h("b0#b1#b2").to_string(), "[b0] # b1 # b2");
        assert_eq!(h("(~b0@~b1) \\/ (b0#b1)").to_string(), "[~b0] @ ~b1 \\/ [b0] # b1");
    }

    #[test]
    fn occurrence_classification() {
        let occ = occurrences(&h("p & q"), Selector::ChoiceNodes);
        assert_eq!(occ, vec![Occurrence { path: Path::root(), surface: true, activity: Activity::Active }]);

        let chain = with_underline(h("b0#b1"), &Path::root(), 1);
        let lits = occurrences(&chain, Selector::Literals);
        assert_eq!(lits[0], Occurrence { path: path(&[0]), surface: true, activity: Activity::Abandoned });
        assert_eq!(lits[1], Occurrence { path: path(&[1]), surface: true, activity: Activity::Active });

        let nested = h("(p+q)#r");
        let c = occurrences(&nested, Selector::ChoiceNodes);
        assert!(c[0].is_active_surface());
        let moved = with_underline(nested, &Path::root(), 1);
        assert_eq!(occurrences(&moved, Selector::ChoiceNodes)[0].activity, Activity::Abandoned);
    }

    #[test]
    fn pending_components_are_not_surface() {
        let lits = occurrences(&h("b0#b1"), Selector::Literals);
        assert_eq!(lits[1].activity, Activity::Pending);
        assert!(!lits[1].surface);
        let under_choice = occurrences(&h("p & q"), Selector::Literals);
        assert!(under_choice.iter().all(|o| !o.surface && o.activity == Activity::Active));
    }

    #[test]
    fn capitalization_follows_underline() {
        assert_eq!(capitalization(&h("b0#b1#b2")), Formula::atom("b0"));
        let moved = with_underline(h("b0#b1#b2"), &Path::root(), 1);
        assert_eq!(capitalization(&moved), Formula::atom("b1"));
        assert_eq!(capitalization(&h("p \\/ q")), parse_formula("p \\/ q").unwrap());
    }

    #[test]
    fn elementarization_examples() {
        assert_eq!(elementarization(&h("p & q")), ElementaryFormula::Const(true));
        assert_eq!(elementarization(&h("p + q")), ElementaryFormula::Const(false));
        let hyb = hybridize(&h("~P \\/ P"), &path(&[1]), &path(&[0]), &Atom::new("q").unwrap()).unwrap();
        assert_eq!(elementarization(&hyb).to_string(), "(~q \\/ q)");
        assert_eq!(elementarization(&h("~P \\/ P")).to_string(), "(⊥ \\/ ⊥)");
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&h("b2^u -> b2^w")));
        assert!(!is_stable(&h("~P \\/ P")));
        let g = with_underline(h("(b1#b2)^u -> (b0#b1#b2)^w"), &Path::root(), 0);
        assert!(!is_stable(&g));
    }

    #[test]
    fn balance_conditions() {
        assert!(is_balanced(&h("p \\/ P")));
        let pair = hybridize(&h("~P \\/ P"), &path(&[1]), &path(&[0]), &Atom::new("q").unwrap()).unwrap();
        assert!(is_balanced(&pair));
        let mut reused = pair.clone().into_tree();
        if let Formula::Par { children, .. } = &mut reused {
            children.push(Formula::atom("q"));
        }
        assert!(!is_balanced(&HyperFormula::from_tree(reused)));
    }

    #[test]
    fn widowed_hybrids() {
        let q = Atom::new("q").unwrap();
        // (P # r) \/ ~P, hybridized while P is the active head
        let base = h("(P # r) \\/ ~P");
        let hyb = hybridize(&base, &path(&[0, 0]), &path(&[1]), &q).unwrap();
        assert!(!widowed(&hyb, &path(&[1])).unwrap());
        let moved = advance_underline(&hyb, &path(&[0])).unwrap();
        assert!(widowed(&moved, &path(&[1])).unwrap());
        // no sequential context
        let flat = hybridize(&h("~P \\/ P"), &path(&[1]), &path(&[0]), &q).unwrap();
        assert!(!widowed(&flat, &path(&[0])).unwrap());
        assert!(widowed(&moved, &path(&[0, 0])).is_err());
        assert!(widowed(&flat, &Path::root()).is_err());
    }

    #[test]
    fn choose_rewrites() {
        assert_eq!(apply_choose(&h("p + q"), &Path::root(), 0).unwrap(), h("p"));
        assert_eq!(apply_choose(&h("(p+q) \\/ r"), &path(&[0]), 1).unwrap(), h("q \\/ r"));
        let abandoned = with_underline(h("(p+q)#r"), &Path::root(), 1);
        assert!(apply_choose(&abandoned, &path(&[0]), 0).is_err());
        assert!(apply_choose(&h("p & q"), &Path::root(), 0).is_err());
        assert!(apply_choose(&h("p + q"), &Path::root(), 2).is_err());
    }

    #[test]
    fn underline_advances() {
        assert_eq!(advance_underline(&h("b0#b1#b2"), &Path::root()).unwrap().to_string(), "b0 # [b1] # b2");
        assert_eq!(advance_underline(&h("~b0@~b1"), &Path::root()).unwrap().to_string(), "~b0 @ [~b1]");
        let last = with_underline(h("b0#b1"), &Path::root(), 1);
        assert!(advance_underline(&last, &Path::root()).is_err());
    }

    #[test]
    fn hybridize_checks() {
        let q = Atom::new("q").unwrap();
        assert_eq!(hybridize(&h("~P \\/ P"), &path(&[1]), &path(&[0]), &q).unwrap().to_string(), "~P_q \\/ P_q");
        assert!(hybridize(&h("P \\/ P"), &path(&[0]), &path(&[1]), &q).is_err());
        assert_eq!(
            hybridize(&h("~P \\/ P \\/ q"), &path(&[1]), &path(&[0]), &q),
            Err(HyperError::FreshCollision(q.clone()))
        );
    }
}
