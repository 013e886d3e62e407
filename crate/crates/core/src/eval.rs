//! Intrinsic evaluation: Spearman's ρ against word-similarity datasets and
//! nearest-neighbour listings.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector_store::{norm, VectorStore};

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityEntry {
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDataset {
    pub entries: Vec<SimilarityEntry>,
}

impl SimilarityDataset {
    pub fn new(entries: Vec<SimilarityEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Correlation("empty dataset".into()));
        }
        if let Some(e) = entries.iter().find(|e| !e.gold.is_finite()) {
            return Err(Error::Correlation(format!(
                "non-finite score for ({}, {})",
                e.word1, e.word2
            )));
        }
        Ok(SimilarityDataset { entries })
    }

    /// Read `word1<TAB>word2<TAB>score` lines. A first line whose third field
    /// is not numeric is taken as a header.
    pub fn load(path: impl AsRef<Path>, lowercase: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        let mut seen_first = false;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = if line.contains('\t') {
                line.split('\t').map(str::trim).collect()
            } else {
                line.split_whitespace().collect()
            };
            let first = !seen_first;
            seen_first = true;
            let bad = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            if fields.len() < 3 {
                return Err(bad("expected 'word1<TAB>word2<TAB>score'".into()));
            }
            let gold: f64 = match fields[2].parse() {
                Ok(v) => v,
                Err(_) if first => continue,
                Err(_) => return Err(bad(format!("invalid score '{}'", fields[2]))),
            };
            let norm_word = |w: &str| {
                if lowercase {
                    w.to_lowercase()
                } else {
                    w.to_string()
                }
            };
            entries.push(SimilarityEntry {
                word1: norm_word(fields[0]),
                word2: norm_word(fields[1]),
                gold,
            });
        }
        Self::new(entries)
    }
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Correlation("zero rank variance".into()));
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Correlation(format!(
            "length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Correlation("need at least two values".into()));
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub rho: f64,
    pub covered: usize,
    pub total: usize,
}

impl std::fmt::Display for Evaluation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rho={:.6} covered={} total={}",
            self.rho, self.covered, self.total
        )
    }
}

/// Correlate cosine similarity with gold scores. Pairs with an
/// out-of-vocabulary word are skipped and reported through `covered`.
pub fn evaluate(store: &VectorStore, dataset: &SimilarityDataset) -> Result<Evaluation> {
    let mut predicted = Vec::new();
    let mut gold = Vec::new();
    for e in &dataset.entries {
        let (Some(i), Some(j)) = (store.index_of(&e.word1), store.index_of(&e.word2)) else {
            continue;
        };
        predicted.push(store.cosine_rows(i, j)?);
        gold.push(e.gold);
    }
    let total = dataset.entries.len();
    if predicted.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: predicted.len(),
            total,
        });
    }
    Ok(Evaluation {
        rho: spearman(&predicted, &gold)?,
        covered: predicted.len(),
        total,
    })
}

/// The `k` words most similar to `word` by cosine, most similar first.
/// Equal similarities are ordered lexicographically; zero vectors are
/// skipped.
pub fn neighbors(store: &VectorStore, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
    let query = store
        .index_of(word)
        .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))?;
    if norm(store.row(query)) == 0.0 {
        return Err(Error::ZeroVector(word.to_string()));
    }
    let mut scored: Vec<(&str, f64)> = (0..store.len())
        .filter(|&i| i != query && norm(store.row(i)) > 0.0)
        .map(|i| {
            (
                store.word(i),
                store.cosine_rows(query, i).expect("nonzero rows"),
            )
        })
        .collect();
    scored.sort_by(
        |a, b| match b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal) {
            Ordering::Equal => a.0.cmp(b.0),
            o => o,
        },
    );
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect())
}
