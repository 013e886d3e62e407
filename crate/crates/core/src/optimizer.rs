//! Attract-Repel fine-tuning.
//!
//! The cost of one step over an ATTRACT mini-batch `B_A` and a REPEL
//! mini-batch `B_R` is
//!
//! ```text
//! Σ_{(l,r)∈B_A} ReLU(δ_att + x_l·t_l − x_l·x_r) + ReLU(δ_att + x_r·t_r − x_l·x_r)
//! Σ_{(l,r)∈B_R} ReLU(δ_rpl + x_l·x_r − x_l·t_l) + ReLU(δ_rpl + x_l·x_r − x_r·t_r)
//! Σ_{i∈V(B_A∪B_R)} λ_reg ‖x_i^init − x_i‖₂
//! ```
//!
//! where `t_i` is the in-batch word closest to `x_i` (attract) or furthest
//! from it (repel), excluding the word itself and its partner. Updates use
//! AdaGrad with per-coordinate accumulators.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{ConstraintSet, Pair};
use crate::error::{Error, Result};
use crate::vector_store::{dot, norm, VectorStore};

pub const ADAGRAD_EPSILON: f64 = 1e-8;

/// Which in-batch words are eligible as negative examples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NegativePool {
    /// Words of both the attract and the repel batch of the current step.
    #[default]
    Joint,
    /// Only words of the batch the pair belongs to.
    SameKind,
}

impl FromStr for NegativePool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(NegativePool::Joint),
            "same-kind" => Ok(NegativePool::SameKind),
            _ => Err(Error::Config(format!("unknown negative pool '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub delta_att: f64,
    pub delta_rpl: f64,
    pub lambda_reg: f64,
    pub epochs: usize,
    pub attract_batch_size: usize,
    pub repel_batch_size: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
    pub negatives: NegativePool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            delta_att: 0.6,
            delta_rpl: 0.0,
            lambda_reg: 1e-9,
            epochs: 10,
            attract_batch_size: 50,
            repel_batch_size: 50,
            learning_rate: 0.05,
            rng_seed: 0,
            negatives: NegativePool::Joint,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.delta_att >= 0.0 && self.delta_att.is_finite()) {
            return fail("delta_att must be a finite value >= 0");
        }
        if !(self.delta_rpl >= 0.0 && self.delta_rpl.is_finite()) {
            return fail("delta_rpl must be a finite value >= 0");
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return fail("lambda_reg must be a finite value >= 0");
        }
        if self.epochs == 0 {
            return fail("epochs must be positive");
        }
        if self.attract_batch_size == 0 || self.repel_batch_size == 0 {
            return fail("batch sizes must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchKind {
    Attract,
    Repel,
}

/// Constraint pairs of one kind, as row indices into a store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiniBatch {
    pub kind: BatchKind,
    pub pairs: Vec<(usize, usize)>,
}

impl MiniBatch {
    pub fn new(kind: BatchKind, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyConstraints);
        }
        Ok(MiniBatch { kind, pairs })
    }

    pub fn attract(pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(BatchKind::Attract, pairs)
    }

    pub fn repel(pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(BatchKind::Repel, pairs)
    }

    /// Distinct rows in the batch, ascending.
    pub fn words(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .flat_map(|&(l, r)| [l, r])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// Negative example for `member` drawn from the words of `batch`.
pub fn select_negative(
    batch: &MiniBatch,
    member: usize,
    partner: usize,
    store: &VectorStore,
) -> Option<usize> {
    select_negative_in(&batch.words(), batch.kind, member, partner, store)
}

/// Negative example for `member` among `pool`, skipping `member` and
/// `partner`. Attract picks the largest dot product, repel the smallest;
/// ties go to the lowest row index.
pub fn select_negative_in(
    pool: &[usize],
    kind: BatchKind,
    member: usize,
    partner: usize,
    store: &VectorStore,
) -> Option<usize> {
    let x = store.row(member);
    let mut best: Option<(usize, f64)> = None;
    for &candidate in pool {
        if candidate == member || candidate == partner {
            continue;
        }
        let score = dot(x, store.row(candidate));
        let better = match best {
            None => true,
            Some((idx, s)) => match kind {
                BatchKind::Attract => score > s || (score == s && candidate < idx),
                BatchKind::Repel => score < s || (score == s && candidate < idx),
            },
        };
        if better {
            best = Some((candidate, score));
        }
    }
    best.map(|(idx, _)| idx)
}

/// One hinge term: the (l, r) pair seen from `member` with negative `neg`.
struct Hinge {
    value: f64,
    member: usize,
    partner: usize,
    negative: usize,
}

fn hinges(
    batch: &MiniBatch,
    pool: &[usize],
    store: &VectorStore,
    config: &TrainingConfig,
) -> Vec<Option<Hinge>> {
    let mut out = Vec::with_capacity(batch.pairs.len() * 2);
    for &(l, r) in &batch.pairs {
        let pair_dot = dot(store.row(l), store.row(r));
        for (member, partner) in [(l, r), (r, l)] {
            let hinge = select_negative_in(pool, batch.kind, member, partner, store).map(|neg| {
                let neg_dot = dot(store.row(member), store.row(neg));
                let value = match batch.kind {
                    BatchKind::Attract => config.delta_att + neg_dot - pair_dot,
                    BatchKind::Repel => config.delta_rpl + pair_dot - neg_dot,
                };
                Hinge {
                    value,
                    member,
                    partner,
                    negative: neg,
                }
            });
            out.push(hinge);
        }
    }
    out
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Hinge cost of `batch` with negatives drawn from `pool`.
pub fn hinge_cost(
    batch: &MiniBatch,
    pool: &[usize],
    store: &VectorStore,
    config: &TrainingConfig,
) -> f64 {
    let terms = hinges(batch, pool, store, config);
    let mut total = 0.0;
    for pair in terms.chunks(2) {
        let value = |h: &Option<Hinge>| h.as_ref().map_or(0.0, |h| relu(h.value));
        total += value(&pair[0]) + value(&pair[1]);
    }
    total
}

/// Attract hinge cost with negatives from the batch itself.
pub fn attract_cost(batch: &MiniBatch, store: &VectorStore, config: &TrainingConfig) -> f64 {
    debug_assert_eq!(batch.kind, BatchKind::Attract);
    hinge_cost(batch, &batch.words(), store, config)
}

/// Repel hinge cost with negatives from the batch itself.
pub fn repel_cost(batch: &MiniBatch, store: &VectorStore, config: &TrainingConfig) -> f64 {
    debug_assert_eq!(batch.kind, BatchKind::Repel);
    hinge_cost(batch, &batch.words(), store, config)
}

/// `λ_reg · Σ ‖x_init − x‖₂` over the distinct rows in `words`.
pub fn reg_cost(words: &[usize], store: &VectorStore, config: &TrainingConfig) -> f64 {
    let distinct: BTreeSet<usize> = words.iter().copied().collect();
    distinct
        .into_iter()
        .map(|i| config.lambda_reg * distance(store.row(i), store.initial_row(i)))
        .sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostBreakdown {
    pub attract: f64,
    pub repel: f64,
    pub reg: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.attract + self.repel + self.reg
    }
}

impl std::ops::AddAssign for CostBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        self.attract += rhs.attract;
        self.repel += rhs.repel;
        self.reg += rhs.reg;
    }
}

/// Cost and sub-gradient of one step, keyed by row.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub cost: CostBreakdown,
    pub rows: BTreeMap<usize, Vec<f64>>,
}

fn pools(
    attract: Option<&MiniBatch>,
    repel: Option<&MiniBatch>,
    mode: NegativePool,
) -> (Vec<usize>, Vec<usize>) {
    let own = |b: Option<&MiniBatch>| b.map(MiniBatch::words).unwrap_or_default();
    match mode {
        NegativePool::SameKind => (own(attract), own(repel)),
        NegativePool::Joint => {
            let all: Vec<usize> = own(attract)
                .into_iter()
                .chain(own(repel))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            (all.clone(), all)
        }
    }
}

/// Total cost of one step without computing gradients.
pub fn step_cost(
    attract: Option<&MiniBatch>,
    repel: Option<&MiniBatch>,
    store: &VectorStore,
    config: &TrainingConfig,
) -> CostBreakdown {
    let (attract_pool, repel_pool) = pools(attract, repel, config.negatives);
    let words: Vec<usize> = attract_pool.iter().chain(&repel_pool).copied().collect();
    CostBreakdown {
        attract: attract.map_or(0.0, |b| hinge_cost(b, &attract_pool, store, config)),
        repel: repel.map_or(0.0, |b| hinge_cost(b, &repel_pool, store, config)),
        reg: reg_cost(&words, store, config),
    }
}

/// Sub-gradient of the step cost with respect to every row in either batch.
///
/// Hinges at exactly zero contribute nothing. Negatives are held fixed but
/// receive gradient through the dot products they appear in. For a row
/// sitting exactly on its initial value the regulariser contributes the
/// element of its sub-differential (the ball of radius `λ_reg`) closest to
/// cancelling the hinge gradient.
pub fn gradient(
    attract: Option<&MiniBatch>,
    repel: Option<&MiniBatch>,
    store: &VectorStore,
    config: &TrainingConfig,
) -> Gradient {
    let dim = store.dim();
    let (attract_pool, repel_pool) = pools(attract, repel, config.negatives);
    let words: BTreeSet<usize> = attract_pool.iter().chain(&repel_pool).copied().collect();
    let mut rows: BTreeMap<usize, Vec<f64>> = words.iter().map(|&i| (i, vec![0.0; dim])).collect();
    let mut cost = CostBreakdown::default();

    let add = |rows: &mut BTreeMap<usize, Vec<f64>>, target: usize, source: usize, sign: f64| {
        let g = rows.get_mut(&target).expect("row in batch");
        for (gk, xk) in g.iter_mut().zip(store.row(source)) {
            *gk += sign * xk;
        }
    };

    for (batch, pool) in [(attract, &attract_pool), (repel, &repel_pool)] {
        let Some(batch) = batch else { continue };
        let terms = hinges(batch, pool, store, config);
        let mut batch_cost = 0.0;
        for pair in terms.chunks(2) {
            let value = |h: &Option<Hinge>| h.as_ref().map_or(0.0, |h| relu(h.value));
            batch_cost += value(&pair[0]) + value(&pair[1]);
            for h in pair.iter().flatten().filter(|h| h.value > 0.0) {
                let (m, p, t) = (h.member, h.partner, h.negative);
                match batch.kind {
                    // δ + x_m·x_t − x_m·x_p
                    BatchKind::Attract => {
                        add(&mut rows, m, t, 1.0);
                        add(&mut rows, m, p, -1.0);
                        add(&mut rows, t, m, 1.0);
                        add(&mut rows, p, m, -1.0);
                    }
                    // δ + x_m·x_p − x_m·x_t
                    BatchKind::Repel => {
                        add(&mut rows, m, p, 1.0);
                        add(&mut rows, m, t, -1.0);
                        add(&mut rows, p, m, 1.0);
                        add(&mut rows, t, m, -1.0);
                    }
                }
            }
        }
        match batch.kind {
            BatchKind::Attract => cost.attract = batch_cost,
            BatchKind::Repel => cost.repel = batch_cost,
        }
    }

    let lambda = config.lambda_reg;
    for (&i, g) in rows.iter_mut() {
        let x = store.row(i);
        let x0 = store.initial_row(i);
        let dist = distance(x, x0);
        cost.reg += lambda * dist;
        if dist > 0.0 {
            for ((gk, xk), x0k) in g.iter_mut().zip(x).zip(x0) {
                *gk += lambda * (xk - x0k) / dist;
            }
        } else {
            let g_norm = norm(g);
            if g_norm <= lambda {
                g.iter_mut().for_each(|gk| *gk = 0.0);
            } else {
                let keep = 1.0 - lambda / g_norm;
                g.iter_mut().for_each(|gk| *gk *= keep);
            }
        }
    }

    Gradient { cost, rows }
}

/// Per-coordinate AdaGrad state for a whole store.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaGrad {
    accum: Vec<f64>,
    dim: usize,
    learning_rate: f64,
}

impl AdaGrad {
    pub fn new(rows: usize, dim: usize, learning_rate: f64) -> Self {
        AdaGrad {
            accum: vec![0.0; rows * dim],
            dim,
            learning_rate,
        }
    }

    pub fn accumulated(&self, row: usize) -> &[f64] {
        &self.accum[row * self.dim..(row + 1) * self.dim]
    }

    /// `x ← x − lr / √(G + ε) · g` after adding `g²` to `G`.
    pub fn apply(&mut self, store: &mut VectorStore, gradient: &Gradient) {
        for (&row, g) in &gradient.rows {
            let acc = &mut self.accum[row * self.dim..(row + 1) * self.dim];
            let x = store.row_mut(row);
            for k in 0..g.len() {
                if g[k] == 0.0 {
                    continue;
                }
                acc[k] += g[k] * g[k];
                x[k] -= self.learning_rate * g[k] / (acc[k] + ADAGRAD_EPSILON).sqrt();
            }
        }
    }
}

/// One optimisation step. Returns the cost before the update.
pub fn step(
    attract: Option<&MiniBatch>,
    repel: Option<&MiniBatch>,
    store: &mut VectorStore,
    state: &mut AdaGrad,
    config: &TrainingConfig,
) -> CostBreakdown {
    let grad = gradient(attract, repel, store, config);
    state.apply(store, &grad);
    grad.cost
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochCost {
    pub epoch: usize,
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub store: VectorStore,
    /// Sum of pre-update step costs, one entry per epoch.
    pub costs: Vec<EpochCost>,
    /// Constraint pairs skipped because a word was missing from the store.
    pub dropped: usize,
}

fn resolve(pairs: &[Pair], store: &VectorStore, dropped: &mut usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pairs.len());
    for (l, r) in pairs {
        match (store.index_of(l), store.index_of(r)) {
            (Some(i), Some(j)) if i != j => out.push((i, j)),
            _ => *dropped += 1,
        }
    }
    out
}

fn chunk_count(len: usize, batch: usize) -> usize {
    len.div_ceil(batch)
}

/// Fine-tune a copy of `store` against `constraints`.
///
/// Each epoch shuffles both constraint lists and takes
/// `max(⌈|A|/b_A⌉, ⌈|R|/b_R⌉)` steps; the list with fewer batches is
/// reshuffled and reused when it runs out.
pub fn fit(
    store: &VectorStore,
    constraints: &ConstraintSet,
    config: &TrainingConfig,
) -> Result<FitResult> {
    config.validate()?;
    if store.is_empty() || store.dim() == 0 {
        return Err(Error::EmptyStore);
    }
    if constraints.is_empty() {
        return Err(Error::EmptyConstraints);
    }
    let mut dropped = 0;
    let mut attract = resolve(&constraints.attract, store, &mut dropped);
    let mut repel = resolve(&constraints.repel, store, &mut dropped);
    if dropped > 0 {
        warn!("dropped {dropped} constraint pairs with words missing from the vector store");
    }
    if attract.is_empty() && repel.is_empty() {
        return Err(Error::EmptyConstraints);
    }

    let mut fitted = store.clone();
    let mut state = AdaGrad::new(fitted.len(), fitted.dim(), config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let attract_chunks = chunk_count(attract.len(), config.attract_batch_size);
    let repel_chunks = chunk_count(repel.len(), config.repel_batch_size);
    let steps = attract_chunks.max(repel_chunks);
    let mut costs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        attract.shuffle(&mut rng);
        repel.shuffle(&mut rng);
        let mut epoch_cost = CostBreakdown::default();
        for s in 0..steps {
            let a_batch = next_batch(
                BatchKind::Attract,
                &mut attract,
                attract_chunks,
                config.attract_batch_size,
                s,
                &mut rng,
            );
            let r_batch = next_batch(
                BatchKind::Repel,
                &mut repel,
                repel_chunks,
                config.repel_batch_size,
                s,
                &mut rng,
            );
            epoch_cost += step(
                a_batch.as_ref(),
                r_batch.as_ref(),
                &mut fitted,
                &mut state,
                config,
            );
        }
        info!(
            "epoch {epoch}: attract {:.6} repel {:.6} reg {:.3e} total {:.6}",
            epoch_cost.attract,
            epoch_cost.repel,
            epoch_cost.reg,
            epoch_cost.total()
        );
        costs.push(EpochCost {
            epoch,
            cost: epoch_cost,
        });
    }

    Ok(FitResult {
        store: fitted,
        costs,
        dropped,
    })
}

fn next_batch(
    kind: BatchKind,
    list: &mut [(usize, usize)],
    chunks: usize,
    size: usize,
    step: usize,
    rng: &mut ChaCha8Rng,
) -> Option<MiniBatch> {
    if chunks == 0 {
        return None;
    }
    let chunk = step % chunks;
    if step > 0 && chunk == 0 {
        list.shuffle(rng);
    }
    let start = chunk * size;
    let end = (start + size).min(list.len());
    Some(MiniBatch {
        kind,
        pairs: list[start..end].to_vec(),
    })
}

pub fn write_cost_log(path: impl AsRef<Path>, costs: &[EpochCost]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "epoch\tattract\trepel\treg\ttotal").map_err(io)?;
    for c in costs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            c.epoch,
            c.cost.attract,
            c.cost.repel,
            c.cost.reg,
            c.cost.total()
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
