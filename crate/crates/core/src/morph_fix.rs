//! Morph-fixing baseline: every word takes the initial vector of the most
//! frequent word it is connected to through ATTRACT pairs.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use petgraph::unionfind::UnionFind;

use crate::constraints::Pair;
use crate::error::{Error, Result};
use crate::vector_store::VectorStore;

/// Corpus frequencies. Unknown words count as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, count: u64) {
        self.counts.insert(word.into(), count);
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Read `word<TAB>count` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = FrequencyTable::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let count = fields
                .next()
                .ok_or_else(|| parse_err("missing count".into()))?;
            let count = count
                .parse()
                .map_err(|_| parse_err(format!("invalid count '{count}'")))?;
            table.insert(word, count);
        }
        Ok(table)
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        FrequencyTable {
            counts: iter.into_iter().map(|(w, c)| (w.into(), c)).collect(),
        }
    }
}

/// Connected components of the ATTRACT graph, each sorted by row index.
/// Singletons are omitted. Pairs with unknown words are ignored.
pub fn components(store: &VectorStore, attract: &[Pair]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(store.len());
    let mut linked = vec![false; store.len()];
    for (l, r) in attract {
        if let (Some(i), Some(j)) = (store.index_of(l), store.index_of(r)) {
            uf.union(i, j);
            linked[i] = true;
            linked[j] = true;
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, _) in linked.iter().enumerate().filter(|(_, &l)| l) {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
    out.sort();
    out
}

/// Tie every ATTRACT-connected component to the initial vector of its most
/// frequent member (ties go to the lexicographically smallest word).
///
/// The returned store takes its own matrix as its initial snapshot.
pub fn morph_fix(store: &VectorStore, attract: &[Pair], freq: &FrequencyTable) -> VectorStore {
    let mut out = store.clone();
    for group in components(store, attract) {
        let rep = *group
            .iter()
            .max_by(|&&a, &&b| {
                freq.get(store.word(a))
                    .cmp(&freq.get(store.word(b)))
                    .then_with(|| store.word(b).cmp(store.word(a)))
            })
            .expect("nonempty component");
        let vector = store.initial_row(rep).to_vec();
        for &member in &group {
            out.row_mut(member).copy_from_slice(&vector);
        }
    }
    out.rebase();
    out
}
