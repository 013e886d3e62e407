//! Word vector storage in the whitespace-separated text format used by
//! GloVe and word2vec.
//!
//! Each line holds a word followed by its components:
//!
//! *word c_1 c_2 ... c_d*
//!
//! An optional word2vec-style header line `n d` is detected and skipped.
//! Components are stored as `f64` regardless of the precision in the file.
//! A snapshot of the matrix taken at load time is kept alongside the live
//! matrix; the optimizer's regulariser pulls towards it.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

/// Options controlling how an embedding file is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Scale every row to unit L2 norm.
    pub normalize: bool,
    /// Lowercase words while reading.
    pub lowercase: bool,
}

impl LoadOptions {
    pub fn normalized() -> Self {
        LoadOptions {
            normalize: true,
            lowercase: false,
        }
    }
}

/// A vocabulary-indexed dense matrix of word vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorStore {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    matrix: Vec<f64>,
    initial: Vec<f64>,
}

impl VectorStore {
    /// Build a store from `(word, vector)` rows in order.
    ///
    /// Later duplicates of a word are dropped with a warning. All rows must
    /// share one dimension and contain only finite values.
    pub fn from_rows<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut store = VectorStore {
            words: Vec::new(),
            index: HashMap::new(),
            dim: 0,
            matrix: Vec::new(),
            initial: Vec::new(),
        };
        for (line, (word, vector)) in rows.into_iter().enumerate() {
            store.push(word.into(), vector, line + 1)?;
        }
        store.initial = store.matrix.clone();
        Ok(store)
    }

    fn push(&mut self, word: String, vector: Vec<f64>, line: usize) -> Result<()> {
        if self.words.is_empty() {
            if vector.is_empty() {
                return Err(Error::Dimension {
                    line,
                    expected: 1,
                    found: 0,
                });
            }
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(Error::Dimension {
                line,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if let Some(bad) = vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                path: "<rows>".into(),
                line,
                message: format!("non-finite component {bad} for '{word}'"),
            });
        }
        if self.index.contains_key(&word) {
            warn!("duplicate word '{word}' at line {line}; keeping first occurrence");
            return Ok(());
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.matrix.extend(vector);
        Ok(())
    }

    /// Read a store from a text embedding file.
    pub fn load(path: impl AsRef<Path>, normalize: bool) -> Result<Self> {
        Self::load_with(
            path,
            LoadOptions {
                normalize,
                lowercase: false,
            },
        )
    }

    pub fn load_with(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), options, path)
    }

    /// Read a store from any buffered reader. `origin` is only used in error
    /// messages.
    pub fn read<R: BufRead>(reader: R, options: LoadOptions, origin: &Path) -> Result<Self> {
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        let mut first_line: Option<usize> = None;
        let mut expected_dim: Option<usize> = None;

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let mut tokens = line.split_whitespace();
            let Some(word) = tokens.next() else {
                continue;
            };
            let rest: Vec<&str> = tokens.collect();

            if first_line.is_none() {
                first_line = Some(lineno);
                if rest.len() == 1 {
                    if let (Ok(_), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                        expected_dim = Some(d);
                        continue;
                    }
                }
            }

            let mut vector = Vec::with_capacity(rest.len());
            for token in rest {
                let value: f64 = token.parse().map_err(|_| Error::Parse {
                    path: origin.to_path_buf(),
                    line: lineno,
                    message: format!("non-numeric token '{token}'"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        path: origin.to_path_buf(),
                        line: lineno,
                        message: format!("non-finite token '{token}'"),
                    });
                }
                vector.push(value);
            }
            let expected = expected_dim.unwrap_or(vector.len());
            if vector.len() != expected || vector.is_empty() {
                return Err(Error::Dimension {
                    line: lineno,
                    expected,
                    found: vector.len(),
                });
            }
            expected_dim = Some(expected);

            let word = if options.lowercase {
                word.to_lowercase()
            } else {
                word.to_string()
            };
            rows.push((word, vector));
        }

        if rows.is_empty() {
            return Err(Error::EmptyStore);
        }
        let mut store = Self::from_rows(rows)?;
        if options.normalize {
            store.normalize()?;
            store.initial = store.matrix.clone();
        }
        Ok(store)
    }

    /// Write the store as one `word v1 ... vd` line per row.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.is_empty() {
            return Err(Error::EmptyStore);
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write(&mut writer).map_err(|e| Error::io(path, e))?;
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write<W: Write>(&self, writer: &mut W) -> std::io::Result<()> {
        for (i, word) in self.words.iter().enumerate() {
            write!(writer, "{word}")?;
            for v in self.row(i) {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    /// Scale every row of the live matrix to unit length.
    pub fn normalize(&mut self) -> Result<()> {
        for i in 0..self.len() {
            let n = norm(self.row(i));
            if n == 0.0 {
                return Err(Error::ZeroVector(self.words[i].clone()));
            }
            for v in self.row_mut(i) {
                *v /= n;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, row: usize) -> &str {
        &self.words[row]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.matrix[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.matrix[row * self.dim..(row + 1) * self.dim]
    }

    /// The row as it was when the store was loaded.
    pub fn initial_row(&self, row: usize) -> &[f64] {
        &self.initial[row * self.dim..(row + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Row-major live matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major load-time snapshot.
    pub fn initial_matrix(&self) -> &[f64] {
        &self.initial
    }

    /// Make the current matrix the new reference point.
    pub fn rebase(&mut self) {
        self.initial = self.matrix.clone();
    }

    /// Cosine similarity between two stored words.
    pub fn cosine(&self, w1: &str, w2: &str) -> Result<f64> {
        let i = self
            .index_of(w1)
            .ok_or_else(|| Error::OutOfVocabulary(w1.to_string()))?;
        let j = self
            .index_of(w2)
            .ok_or_else(|| Error::OutOfVocabulary(w2.to_string()))?;
        self.cosine_rows(i, j)
    }

    pub fn cosine_rows(&self, i: usize, j: usize) -> Result<f64> {
        let (a, b) = (self.row(i), self.row(j));
        let (na, nb) = (norm(a), norm(b));
        if na == 0.0 {
            return Err(Error::ZeroVector(self.words[i].clone()));
        }
        if nb == 0.0 {
            return Err(Error::ZeroVector(self.words[j].clone()));
        }
        Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
    }
}

/// Sequential dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
