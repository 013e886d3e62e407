//! ATTRACT and REPEL constraint extraction over a vocabulary.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::morph_rules::{RuleKind, RuleSet};

/// An ordered word pair.
pub type Pair = (String, String);

/// Vocabularies are kept sorted so that extraction does not depend on the
/// order words were read in.
pub type Vocabulary = BTreeSet<String>;

pub fn vocabulary<I, S>(words: I) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    words.into_iter().map(Into::into).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub attract: Vec<Pair>,
    pub repel: Vec<Pair>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.attract.is_empty() && self.repel.is_empty()
    }

    /// Words mentioned by any constraint.
    pub fn words(&self) -> BTreeSet<&str> {
        self.attract
            .iter()
            .chain(&self.repel)
            .flat_map(|(l, r)| [l.as_str(), r.as_str()])
            .collect()
    }
}

/// Apply every attract rule to every vocabulary word and keep the pairs
/// whose words are both in the vocabulary.
pub fn extract_attract(vocab: &Vocabulary, rules: &RuleSet) -> Vec<Pair> {
    let per_word: Vec<Vec<Pair>> = vocab
        .par_iter()
        .map(|word| attract_pairs_for(word, vocab, rules))
        .collect();
    dedup(per_word.into_iter().flatten())
}

fn attract_pairs_for(word: &str, vocab: &Vocabulary, rules: &RuleSet) -> Vec<Pair> {
    let mut pairs = Vec::new();
    for rule in &rules.attract_rules {
        let candidates = rule.apply(word);
        if candidates.is_empty() {
            continue;
        }
        if rule.kind == RuleKind::SuffixGroup {
            let members: Vec<&str> = std::iter::once(word)
                .chain(candidates.iter().map(String::as_str))
                .filter(|w| vocab.contains(*w))
                .collect();
            for a in &members {
                for b in &members {
                    if a != b {
                        pairs.push((a.to_string(), b.to_string()));
                    }
                }
            }
        } else {
            for c in candidates.iter().filter(|c| vocab.contains(*c)) {
                pairs.push((word.to_string(), c.clone()));
                pairs.push((c.clone(), word.to_string()));
            }
        }
    }
    pairs
}

/// Pair every vocabulary word with its in-vocabulary antonym candidates.
pub fn extract_repel(vocab: &Vocabulary, rules: &RuleSet) -> Vec<Pair> {
    let per_word: Vec<Vec<Pair>> = vocab
        .par_iter()
        .map(|word| {
            rules
                .antonym_candidates(word)
                .into_iter()
                .filter(|c| vocab.contains(c))
                .flat_map(|c| [(word.clone(), c.clone()), (c, word.clone())])
                .collect()
        })
        .collect();
    dedup(per_word.into_iter().flatten())
}

/// One step of transitive expansion: for every repel pair `(a, b)`, the
/// attract partners `a'` of `a` and `b'` of `b` yield `(a', b)`, `(a, b')`
/// and `(a', b')`, plus their mirrors.
pub fn expand_repel(attract: &[Pair], repel: &[Pair]) -> Vec<Pair> {
    let mut partners: HashMap<&str, IndexSet<&str>> = HashMap::new();
    for (l, r) in attract {
        partners.entry(l.as_str()).or_default().insert(r.as_str());
    }
    let empty = IndexSet::new();
    let mut out: IndexSet<Pair> = repel.iter().cloned().collect();
    for (a, b) in repel {
        let pa = partners.get(a.as_str()).unwrap_or(&empty);
        let pb = partners.get(b.as_str()).unwrap_or(&empty);
        let mut push = |x: &str, y: &str| {
            if x != y {
                out.insert((x.to_string(), y.to_string()));
                out.insert((y.to_string(), x.to_string()));
            }
        };
        for a2 in pa {
            push(a2, b);
        }
        for b2 in pb {
            push(a, b2);
        }
        for a2 in pa {
            for b2 in pb {
                push(a2, b2);
            }
        }
    }
    out.into_iter().collect()
}

/// Extract, expand, and resolve conflicts. A pair present in both lists is
/// kept as REPEL only.
pub fn build(vocab: &Vocabulary, rules: &RuleSet) -> ConstraintSet {
    let attract = extract_attract(vocab, rules);
    let repel = expand_repel(&attract, &extract_repel(vocab, rules));
    let repel_set: HashSet<&Pair> = repel.iter().collect();
    let attract = attract
        .iter()
        .filter(|p| !repel_set.contains(p))
        .cloned()
        .collect();
    ConstraintSet { attract, repel }
}

pub fn build_for_language(vocab: &Vocabulary, language: &str) -> Result<ConstraintSet> {
    let rules = crate::morph_rules::builtin_rules(language)?;
    Ok(build(vocab, &rules))
}

fn dedup(pairs: impl IntoIterator<Item = Pair>) -> Vec<Pair> {
    pairs
        .into_iter()
        .filter(|(l, r)| l != r)
        .collect::<IndexSet<Pair>>()
        .into_iter()
        .collect()
}

/// Write pairs as `left<TAB>right` lines.
pub fn write_pairs(path: impl AsRef<Path>, pairs: &[Pair]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (l, r) in pairs {
        writeln!(w, "{l}\t{r}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<Pair>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "expected 'left<TAB>right'".into(),
            });
        }
        pairs.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(pairs)
}

/// One entry of a vocabulary file: `word` or `word<TAB>count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabEntry {
    pub word: String,
    pub count: Option<u64>,
}

pub fn read_vocab_file(path: impl AsRef<Path>, lowercase: bool) -> Result<Vec<VocabEntry>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let count = match fields.next() {
            Some(c) => Some(c.parse::<u64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("invalid count '{c}'"),
            })?),
            None => None,
        };
        let word = if lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        };
        out.push(VocabEntry { word, count });
    }
    Ok(out)
}
