//! Checking line-numbered derivations in the unmarked calculus, where
//! sequential rules drop chain heads instead of moving underlines.

use super::Rule;
use crate::formula::{Atom, Formula, Literal, Path};
use crate::hyper::{self, Selector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainLine {
    pub formula: Formula,
    pub rule: Rule,
    /// Indices of earlier lines, 0-based.
    pub premises: Vec<usize>,
}

fn surface(f: &Formula, selector: Selector) -> Vec<Path> {
    hyper::active_surface(&hyper::to_hyper(f), selector)
}

/// Remove the head of the chain at `path`; a single remaining component
/// replaces the chain.
fn drop_head(f: &Formula, path: &Path) -> Option<Formula> {
    let Some(Formula::Seq { op, children, env, .. }) = f.get(path) else {
        return None;
    };
    let rest = &children[1..];
    let replacement = match rest {
        [] => return None,
        [only] => only.clone(),
        _ => Formula::Seq { op: *op, children: rest.to_vec(), env: env.clone(), underline: 0 },
    };
    f.replace_at(path, replacement)
}

fn stable(f: &Formula) -> bool {
    hyper::is_stable(&hyper::to_hyper(f))
}

fn wait_set(f: &Formula) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for path in surface(f, Selector::EnvChoiceNodes) {
        for child in f.get(&path).map(Formula::children).unwrap_or_default() {
            out.push(f.replace_at(&path, child.clone()).expect("path from traversal"));
        }
    }
    for path in surface(f, Selector::EnvLedNodes) {
        out.extend(drop_head(f, &path));
    }
    out.dedup();
    out
}

fn choose_set(f: &Formula) -> Vec<Formula> {
    surface(f, Selector::MachineChoiceNodes)
        .into_iter()
        .flat_map(|path| {
            let children = f.get(&path).map(Formula::children).unwrap_or_default().to_vec();
            children.into_iter().map(move |c| (path.clone(), c))
        })
        .map(|(path, c)| f.replace_at(&path, c).expect("path from traversal"))
        .collect()
}

fn switch_set(f: &Formula) -> Vec<Formula> {
    surface(f, Selector::MachineLedNodes).iter().filter_map(|p| drop_head(f, p)).collect()
}

fn matches_by_match(f: &Formula, h: &Formula) -> bool {
    let used = f.atoms();
    let fresh: Vec<Atom> = h.atoms().into_iter().filter(|a| !a.is_general() && !used.contains(a)).collect();
    let lits = surface(f, Selector::GeneralLiterals);
    let lit = |p: &Path| match f.get(p) {
        Some(Formula::Lit(l)) => l.clone(),
        _ => unreachable!("selector returns literals"),
    };
    for pos in lits.iter().filter(|p| !lit(p).negated) {
        for neg in lits.iter().filter(|n| lit(n).negated && lit(n).atom == lit(pos).atom) {
            for q in &fresh {
                let swap = |g: &Formula, p: &Path, negated: bool| {
                    let env = lit(p).env;
                    g.replace_at(p, Formula::Lit(Literal { atom: q.clone(), negated, env, hybrid: None }))
                };
                let candidate = swap(f, pos, false).and_then(|g| swap(&g, neg, true));
                if candidate.as_ref() == Some(h) {
                    return true;
                }
            }
        }
    }
    false
}

fn plain_ok(f: &Formula) -> bool {
    let mut ok = true;
    f.walk(|_, node| match node {
        Formula::Lit(l) => ok &= l.hybrid.is_none(),
        Formula::Seq { underline, .. } => ok &= *underline == 0,
        _ => {}
    });
    ok
}

/// True iff every line follows from the earlier lines it cites.
pub fn verify_plain(lines: &[PlainLine]) -> bool {
    lines.iter().enumerate().all(|(i, line)| {
        if !plain_ok(&line.formula) || line.premises.iter().any(|&j| j >= i) {
            return false;
        }
        let cited: Vec<&Formula> = line.premises.iter().map(|&j| &lines[j].formula).collect();
        let f = &line.formula;
        match line.rule {
            Rule::Wait => {
                let expected = wait_set(f);
                stable(f) && cited.len() == expected.len() && expected.iter().all(|e| cited.contains(&e))
            }
            Rule::Choose => matches!(cited.as_slice(), [h] if choose_set(f).contains(h)),
            Rule::Switch => matches!(cited.as_slice(), [h] if switch_set(f).contains(h)),
            Rule::Match => matches!(cited.as_slice(), [h] if matches_by_match(f, h)),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn line(s: &str, rule: Rule, premises: &[usize]) -> PlainLine {
        PlainLine { formula: parse_formula(s).unwrap(), rule, premises: premises.to_vec() }
    }

    fn chain_copy() -> Vec<PlainLine> {
        vec![
            line("~b2^u \\/ b2^w", Rule::Wait, &[]),
            line("(~b1 @ ~b2)^u \\/ b2^w", Rule::Switch, &[0]),
            line("(~b1 @ ~b2)^u \\/ (b1 # b2)^w", Rule::Wait, &[1]),
            line("(~b0 @ ~b1 @ ~b2)^u \\/ (b1 # b2)^w", Rule::Switch, &[2]),
            line("(b0 # b1 # b2)^u -> (b0 # b1 # b2)^w", Rule::Wait, &[3]),
        ]
    }

    #[test]
    fn chain_copy_derivation_checks() {
        assert!(verify_plain(&chain_copy()));
    }

    #[test]
    fn swapped_lines_fail() {
        let mut d = chain_copy();
        d.swap(1, 2);
        assert!(!verify_plain(&d));
    }

    #[test]
    fn match_needs_fresh_atom() {
        let ok = vec![line("~q \\/ q", Rule::Wait, &[]), line("~P \\/ P", Rule::Match, &[0])];
        assert!(verify_plain(&ok));
        let reused = vec![line("~q \\/ q", Rule::Wait, &[]), line("~P \\/ P \\/ q", Rule::Match, &[0])];
        assert!(!verify_plain(&reused));
    }

    #[test]
    fn choose_and_wait_on_choices() {
        let d = vec![line("~p \\/ p", Rule::Wait, &[]), line("(p + q) \\/ ~p", Rule::Choose, &[0])];
        // premise must be the exact replacement, ordering included
        assert!(!verify_plain(&d));
        let d = vec![
            line("p \\/ ~p", Rule::Wait, &[]),
            line("q \\/ ~q", Rule::Wait, &[]),
            line("(p & q) \\/ (~p + ~q)", Rule::Choose, &[]),
        ];
        assert!(!verify_plain(&d));
        let d = vec![
            line("p \\/ ~p", Rule::Wait, &[]),
            line("q \\/ ~q", Rule::Wait, &[]),
            line("p \\/ (~p + ~q)", Rule::Choose, &[0]),
            line("q \\/ (~p + ~q)", Rule::Choose, &[1]),
            line("(p & q) \\/ (~p + ~q)", Rule::Wait, &[2, 3]),
        ];
        assert!(verify_plain(&d));
    }
}
