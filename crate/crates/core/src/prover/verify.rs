use super::{wait_premises, Action, Proof};
use crate::formula::Formula;
use crate::hyper::{self, HyperFormula};

/// Check every node of `p` against the rule it claims.
pub fn verify(p: &Proof) -> bool {
    node_ok(p) && p.premises.iter().all(verify)
}

fn single(p: &Proof) -> Option<&HyperFormula> {
    match p.premises.as_slice() {
        [only] => Some(&only.conclusion),
        _ => None,
    }
}

fn node_ok(p: &Proof) -> bool {
    let h = &p.conclusion;
    if p.rule != p.action.rule() || !hyper::is_balanced(h) {
        return false;
    }
    match &p.action {
        Action::Wait => {
            if !hyper::is_stable(h) {
                return false;
            }
            let expected = wait_premises(h);
            let got: Vec<&HyperFormula> = p.premises.iter().map(|q| &q.conclusion).collect();
            got.len() == expected.len() && expected.iter().all(|e| got.contains(&e))
        }
        Action::Choose { path, index } => {
            single(p).is_some_and(|prem| hyper::apply_choose(h, path, *index).as_ref() == Ok(prem))
        }
        Action::Switch { path } => {
            matches!(h.get(path), Some(Formula::Seq { op: crate::formula::SeqOp::MachineLed, .. }))
                && single(p).is_some_and(|prem| hyper::advance_underline(h, path).as_ref() == Ok(prem))
        }
        Action::Match { pos, neg, fresh } => {
            single(p).is_some_and(|prem| hyper::hybridize(h, pos, neg, fresh).as_ref() == Ok(prem))
        }
    }
}
