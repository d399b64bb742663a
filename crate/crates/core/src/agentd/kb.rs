use std::collections::BTreeMap;

use crate::formula::{Formula, Path, SeqOp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("no knowledgebase entry {0}")]
    NoEntry(usize),
    #[error("no chain at {1} in entry {0}")]
    NoChain(usize, Path),
    #[error("chain at {1} in entry {0} is exhausted")]
    Exhausted(usize, Path),
    #[error("chain at {1} in entry {0} is not in the current component")]
    Inactive(usize, Path),
}

/// Knowledgebase entries plus the progress of every sequential chain
/// inside them. Chains advance only when the entry's provider switches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KbState {
    entries: Vec<Formula>,
    progress: BTreeMap<(usize, Path), usize>,
    revision: u64,
}

impl KbState {
    pub fn new(entries: Vec<Formula>) -> Self {
        KbState { entries, progress: BTreeMap::new(), revision: 0 }
    }

    pub fn entries(&self) -> &[Formula] {
        &self.entries
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn progress(&self, entry: usize, chain: &Path) -> usize {
        self.progress.get(&(entry, chain.clone())).copied().unwrap_or(0)
    }

    /// Advance the chain at `chain` (a path inside entry `entry`); the
    /// revision increments. Returns the new component index.
    pub fn advance(&mut self, entry: usize, chain: &Path) -> Result<usize, KbError> {
        let f = self.entries.get(entry).ok_or(KbError::NoEntry(entry))?;
        let Some(Formula::Seq { children, .. }) = f.get(chain) else {
            return Err(KbError::NoChain(entry, chain.clone()));
        };
        if self.to_collapsed_path(entry, chain).is_none() {
            return Err(KbError::Inactive(entry, chain.clone()));
        }
        let at = self.progress(entry, chain);
        if at + 1 >= children.len() {
            return Err(KbError::Exhausted(entry, chain.clone()));
        }
        self.progress.insert((entry, chain.clone()), at + 1);
        self.revision += 1;
        Ok(at + 1)
    }

    /// Entry `entry` with every chain replaced by its current component.
    pub fn collapsed(&self, entry: usize) -> Formula {
        fn go(kb: &KbState, entry: usize, node: &Formula, path: &mut Path) -> Formula {
            let sub = |i: usize, path: &mut Path| {
                path.0.push(i);
                let f = go(kb, entry, &node.children()[i], path);
                path.0.pop();
                f
            };
            match node {
                Formula::Seq { .. } => sub(kb.progress(entry, path), path),
                Formula::Par { op, children } => {
                    Formula::Par { op: *op, children: (0..children.len()).map(|i| sub(i, path)).collect() }
                }
                Formula::Choice { op, children, env } => Formula::Choice {
                    op: *op,
                    children: (0..children.len()).map(|i| sub(i, path)).collect(),
                    env: env.clone(),
                },
                leaf => leaf.clone(),
            }
        }
        go(self, entry, &self.entries[entry], &mut Path::root())
    }

    /// All entries collapsed: the knowledgebase as the prover sees it now.
    pub fn snapshot(&self) -> Vec<Formula> {
        (0..self.entries.len()).map(|i| self.collapsed(i)).collect()
    }

    /// Current component of the chain at `chain` in entry `entry`.
    pub fn head(&self, entry: usize, chain: &Path) -> Option<&Formula> {
        let node = self.entries.get(entry)?.get(chain)?;
        node.children().get(self.progress(entry, chain))
    }

    /// Path in the collapsed entry of a node addressed in the full entry;
    /// `None` inside a chain component that is not current.
    pub fn to_collapsed_path(&self, entry: usize, full: &Path) -> Option<Path> {
        let f = self.entries.get(entry)?;
        let mut out = Path::root();
        for depth in 0..full.0.len() {
            let prefix = Path(full.0[..depth].to_vec());
            let i = full.0[depth];
            match f.get(&prefix)? {
                Formula::Seq { .. } => {
                    if self.progress(entry, &prefix) != i {
                        return None;
                    }
                }
                _ => out.0.push(i),
            }
        }
        f.get(full)?;
        Some(out)
    }

    /// Inverse of [`to_collapsed_path`](Self::to_collapsed_path).
    pub fn to_full_path(&self, entry: usize, collapsed: &Path) -> Option<Path> {
        let f = self.entries.get(entry)?;
        let mut out = Path::root();
        let mut rest = collapsed.0.iter();
        loop {
            match f.get(&out)? {
                Formula::Seq { .. } => {
                    let at = self.progress(entry, &out);
                    out.0.push(at);
                }
                _ => match rest.next() {
                    Some(&i) => out.0.push(i),
                    None => return Some(out),
                },
            }
        }
    }
}

/// The query as its provider plays it: the provider leads every chain.
pub fn provider_view(q: &Formula) -> Formula {
    let mut out = q.clone();
    fn go(node: &mut Formula) {
        if let Formula::Seq { op, .. } = node {
            *op = SeqOp::MachineLed;
        }
        match node {
            Formula::Par { children, .. } | Formula::Choice { children, .. } | Formula::Seq { children, .. } => {
                children.iter_mut().for_each(go)
            }
            _ => {}
        }
    }
    go(&mut out);
    out
}
