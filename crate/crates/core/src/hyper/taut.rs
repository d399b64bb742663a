//! Classical propositional formulas and tautology checking.

use std::collections::HashMap;
use std::fmt;

use crate::formula::Atom;

/// A formula of classical propositional logic over elementary atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ElementaryFormula {
    Const(bool),
    Lit { atom: Atom, negated: bool },
    And(Vec<ElementaryFormula>),
    Or(Vec<ElementaryFormula>),
}

impl ElementaryFormula {
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        fn go(e: &ElementaryFormula, out: &mut Vec<Atom>) {
            match e {
                ElementaryFormula::Const(_) => {}
                ElementaryFormula::Lit { atom, .. } => {
                    if !out.contains(atom) {
                        out.push(atom.clone());
                    }
                }
                ElementaryFormula::And(cs) | ElementaryFormula::Or(cs) => cs.iter().for_each(|c| go(c, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn eval(&self, valuation: &dyn Fn(&Atom) -> bool) -> bool {
        match self {
            ElementaryFormula::Const(b) => *b,
            ElementaryFormula::Lit { atom, negated } => valuation(atom) != *negated,
            ElementaryFormula::And(cs) => cs.iter().all(|c| c.eval(valuation)),
            ElementaryFormula::Or(cs) => cs.iter().any(|c| c.eval(valuation)),
        }
    }
}

impl fmt::Display for ElementaryFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryFormula::Const(true) => f.write_str("⊤"),
            ElementaryFormula::Const(false) => f.write_str("⊥"),
            ElementaryFormula::Lit { atom, negated } => write!(f, "{}{atom}", if *negated { "~" } else { "" }),
            ElementaryFormula::And(cs) | ElementaryFormula::Or(cs) => {
                let sep = if matches!(self, ElementaryFormula::And(_)) { " /\\ " } else { " \\/ " };
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Indexed form used by the search.
enum Node {
    Const(bool),
    Lit(usize, bool),
    And(Vec<Node>),
    Or(Vec<Node>),
}

fn index(e: &ElementaryFormula, vars: &mut HashMap<Atom, usize>) -> Node {
    match e {
        ElementaryFormula::Const(b) => Node::Const(*b),
        ElementaryFormula::Lit { atom, negated } => {
            let n = vars.len();
            Node::Lit(*vars.entry(atom.clone()).or_insert(n), *negated)
        }
        ElementaryFormula::And(cs) => Node::And(cs.iter().map(|c| index(c, vars)).collect()),
        ElementaryFormula::Or(cs) => Node::Or(cs.iter().map(|c| index(c, vars)).collect()),
    }
}

/// Three-valued evaluation under a partial assignment.
fn eval3(n: &Node, asg: &[Option<bool>]) -> Option<bool> {
    match n {
        Node::Const(b) => Some(*b),
        Node::Lit(v, neg) => asg[*v].map(|b| b != *neg),
        Node::And(cs) => {
            let mut all = true;
            for c in cs {
                match eval3(c, asg) {
                    Some(false) => return Some(false),
                    None => all = false,
                    _ => {}
                }
            }
            all.then_some(true)
        }
        Node::Or(cs) => {
            let mut none = true;
            for c in cs {
                match eval3(c, asg) {
                    Some(true) => return Some(true),
                    None => none = false,
                    _ => {}
                }
            }
            none.then_some(false)
        }
    }
}

/// Collect assignments forced by requiring `n` to be false. Returns `false`
/// on a conflict.
fn force_false(n: &Node, asg: &[Option<bool>], forced: &mut Vec<(usize, bool)>) -> bool {
    match eval3(n, asg) {
        Some(false) => return true,
        Some(true) => return false,
        None => {}
    }
    match n {
        Node::Lit(v, neg) => {
            let want = *neg;
            match forced.iter().find(|(u, _)| u == v) {
                Some(&(_, b)) => b == want,
                None => {
                    forced.push((*v, want));
                    true
                }
            }
        }
        Node::Or(cs) => cs.iter().all(|c| force_false(c, asg, forced)),
        // a conjunction can be falsified by any child
        Node::And(_) | Node::Const(_) => true,
    }
}

fn first_unassigned(n: &Node, asg: &[Option<bool>]) -> Option<usize> {
    match n {
        Node::Const(_) => None,
        Node::Lit(v, _) => asg[*v].is_none().then_some(*v),
        Node::And(cs) | Node::Or(cs) => {
            if eval3(n, asg).is_some() {
                return None;
            }
            cs.iter().find_map(|c| first_unassigned(c, asg))
        }
    }
}

fn falsifiable(n: &Node, asg: &mut Vec<Option<bool>>) -> bool {
    if let Some(v) = eval3(n, asg) {
        return !v;
    }
    let mut forced = Vec::new();
    if !force_false(n, asg, &mut forced) {
        return false;
    }
    if !forced.is_empty() {
        for &(v, b) in &forced {
            asg[v] = Some(b);
        }
        let r = falsifiable(n, asg);
        for &(v, _) in &forced {
            asg[v] = None;
        }
        return r;
    }
    let v = first_unassigned(n, asg).expect("undetermined formula has an unassigned atom");
    for b in [false, true] {
        asg[v] = Some(b);
        if falsifiable(n, asg) {
            asg[v] = None;
            return true;
        }
    }
    asg[v] = None;
    false
}

/// True iff `e` holds under every valuation of its atoms.
///
/// Backtracking search for a falsifying valuation; requiring a disjunction
/// to be false forces all of its literal disjuncts, which is propagated
/// before branching.
pub fn is_tautology(e: &ElementaryFormula) -> bool {
    let mut vars = HashMap::new();
    let node = index(e, &mut vars);
    let mut asg = vec![None; vars.len()];
    !falsifiable(&node, &mut asg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(a: &str, negated: bool) -> ElementaryFormula {
        ElementaryFormula::Lit { atom: Atom::new(a).unwrap(), negated }
    }

    fn brute(e: &ElementaryFormula) -> bool {
        let atoms = e.atoms();
        (0u32..1 << atoms.len()).all(|mask| {
            e.eval(&|a: &Atom| {
                let i = atoms.iter().position(|x| x == a).unwrap();
                mask >> i & 1 == 1
            })
        })
    }

    #[test]
    fn small_cases() {
        let excluded_middle = ElementaryFormula::Or(vec![lit("b2", true), lit("b2", false)]);
        assert!(is_tautology(&excluded_middle));
        let not_taut = ElementaryFormula::Or(vec![lit("b1", true), lit("b0", false)]);
        assert!(!is_tautology(&not_taut));
        assert!(is_tautology(&ElementaryFormula::Const(true)));
        assert!(!is_tautology(&ElementaryFormula::Or(vec![ElementaryFormula::Const(false); 2])));
    }

    #[test]
    fn agrees_with_truth_table_on_enumerated_shapes() {
        // every Or/And combination of up to 3 literals over 2 atoms, nested once
        let lits = [lit("p", false), lit("p", true), lit("q", false), lit("q", true)];
        let mut seen = 0;
        for a in &lits {
            for b in &lits {
                for c in &lits {
                    let inner_and = ElementaryFormula::And(vec![a.clone(), b.clone()]);
                    let inner_or = ElementaryFormula::Or(vec![a.clone(), b.clone()]);
                    for e in [
                        ElementaryFormula::Or(vec![inner_and.clone(), c.clone()]),
                        ElementaryFormula::And(vec![inner_or.clone(), c.clone()]),
                        ElementaryFormula::Or(vec![inner_and, ElementaryFormula::Or(vec![c.clone(), a.clone()])]),
                    ] {
                        assert_eq!(is_tautology(&e), brute(&e), "{e}");
                        seen += 1;
                    }
                }
            }
        }
        assert_eq!(seen, 192);
    }
}
