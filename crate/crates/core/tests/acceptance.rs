//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.
//!
//! Criterion 9 needs external data and only runs when both
//! `MORPHFIT_GLOVE` (word vectors in text format) and `MORPHFIT_SIMLEX`
//! (`word1<TAB>word2<TAB>score`) are set.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morphfit::constraints::{self, vocabulary};
use morphfit::eval::{self, SimilarityDataset, SimilarityEntry};
use morphfit::morph_fix::{morph_fix, FrequencyTable};
use morphfit::optimizer::{
    attract_cost, fit, gradient, repel_cost, step_cost, BatchKind, MiniBatch, NegativePool,
    TrainingConfig,
};
use morphfit::{ConstraintSet, Language, RuleSet, VectorStore};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: "1",
            name: "rule-table fidelity",
            limit: Some(Duration::from_secs(1)),
            run: rule_fidelity,
        },
        Criterion {
            id: "2",
            name: "cost oracle equivalence",
            limit: Some(Duration::from_secs(5)),
            run: cost_oracle,
        },
        Criterion {
            id: "3",
            name: "gradient check",
            limit: Some(Duration::from_secs(10)),
            run: gradient_check,
        },
        Criterion {
            id: "4",
            name: "specialisation behaviour",
            limit: Some(Duration::from_secs(1)),
            run: specialisation,
        },
        Criterion {
            id: "5",
            name: "regulariser pull-back",
            limit: None,
            run: pull_back,
        },
        Criterion {
            id: "6",
            name: "morph-fix correctness",
            limit: None,
            run: morph_fix_check,
        },
        Criterion {
            id: "7",
            name: "spearman correctness",
            limit: None,
            run: spearman_check,
        },
        Criterion {
            id: "8",
            name: "end-to-end toy pipeline",
            limit: Some(Duration::from_secs(5)),
            run: toy_pipeline,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {} {}: PASS ({detail}; {:.1?})",
                c.id, c.name, elapsed
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {} {}: FAIL ({detail}; {:.1?})",
                    c.id, c.name, elapsed
                );
            }
        }
    }
    match large_scale() {
        None => println!(
            "criterion 9 large-scale similarity: SKIP (set MORPHFIT_GLOVE and MORPHFIT_SIMLEX)"
        ),
        Some(Ok(detail)) => println!("criterion 9 large-scale similarity: PASS ({detail})"),
        Some(Err(detail)) => {
            failed += 1;
            println!("criterion 9 large-scale similarity: FAIL ({detail})");
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

// ---------------------------------------------------------------- 1

#[derive(Clone, Copy, PartialEq)]
enum Expect {
    Attract,
    Repel,
}

struct Fixture {
    lang: Language,
    expect: Expect,
    pair: (&'static str, &'static str),
    /// Further words the pair is derived through.
    extra: &'static [&'static str],
}

const fn fx(
    lang: Language,
    expect: Expect,
    l: &'static str,
    r: &'static str,
    extra: &'static [&'static str],
) -> Fixture {
    Fixture {
        lang,
        expect,
        pair: (l, r),
        extra,
    }
}

fn fixtures() -> Vec<Fixture> {
    use Expect::{Attract as A, Repel as R};
    use Language::{De, En, It, Ru};
    vec![
        fx(En, A, "discuss", "discussed", &[]),
        fx(En, A, "laugh", "laughing", &[]),
        fx(En, A, "pacifist", "pacifists", &[]),
        fx(En, A, "evacuate", "evacuated", &[]),
        fx(En, A, "evaluate", "evaluates", &[]),
        fx(En, A, "read", "reads", &[]),
        fx(En, A, "look", "looks", &[]),
        fx(En, A, "look", "looking", &[]),
        fx(En, A, "look", "looked", &[]),
        fx(En, A, "create", "creating", &[]),
        fx(En, A, "create", "created", &[]),
        fx(En, A, "speak", "speaking", &[]),
        fx(En, A, "turtle", "turtles", &[]),
        fx(En, A, "clean", "cleaned", &[]),
        fx(En, A, "generate", "generated", &[]),
        fx(En, R, "dressed", "undressed", &[]),
        fx(En, R, "similar", "dissimilar", &[]),
        fx(En, R, "formality", "informality", &[]),
        fx(En, R, "literate", "illiterate", &[]),
        fx(En, R, "expensive", "inexpensive", &[]),
        fx(En, R, "mature", "immature", &[]),
        fx(En, R, "advantage", "disadvantage", &[]),
        fx(En, R, "regular", "irregular", &[]),
        fx(En, R, "careful", "careless", &[]),
        fx(En, R, "allow", "disallow", &[]),
        fx(En, R, "regularity", "irregularity", &[]),
        fx(En, R, "cheerful", "cheerless", &[]),
        fx(En, R, "allows", "disallow", &["allow"]),
        fx(De, A, "schottisch", "schottischem", &[]),
        fx(De, A, "schottisch", "schottische", &[]),
        fx(De, A, "schottischem", "schottischen", &["schottisch"]),
        fx(De, A, "katalanisch", "katalanischem", &[]),
        fx(De, A, "katalanisch", "katalanischer", &[]),
        fx(De, A, "asiatisch", "asiatischem", &[]),
        fx(De, A, "damalige", "damaligen", &[]),
        fx(De, A, "kombiniere", "kombinierte", &["kombinieren"]),
        fx(De, A, "schweigt", "schweigst", &["schweigen"]),
        fx(De, A, "hacken", "gehackt", &[]),
        fx(De, A, "machen", "machten", &[]),
        fx(De, A, "mache", "gemacht", &["machen"]),
        fx(De, A, "kaufst", "kauft", &["kaufen"]),
        fx(De, A, "arbeite", "arbeitete", &["arbeiten"]),
        fx(De, A, "arbeiten", "gearbeitet", &[]),
        fx(De, A, "wahrheit", "wahrheiten", &[]),
        fx(De, A, "gemeinschaft", "gemeinschaften", &[]),
        fx(De, A, "lehrerin", "lehrerinnen", &[]),
        fx(De, A, "lektorin", "lektorinnen", &[]),
        fx(De, A, "auto", "autos", &[]),
        fx(De, A, "postkarte", "postkarten", &[]),
        fx(De, A, "wörterbuch", "wörterbücher", &[]),
        fx(De, A, "stadt", "städter", &[]),
        fx(De, R, "stabil", "unstabil", &[]),
        fx(De, R, "geformtes", "ungeformt", &["geformt"]),
        fx(De, R, "relevant", "irrelevant", &[]),
        fx(De, R, "aktiv", "inaktiv", &[]),
        fx(De, R, "wandelbar", "unwandelbar", &[]),
        fx(De, R, "zyklone", "antizyklone", &[]),
        fx(De, R, "geschmackvoll", "geschmacklos", &[]),
        fx(De, R, "relevant", "irrelevanter", &["irrelevant"]),
        fx(De, R, "aktivem", "inaktiv", &["aktiv"]),
        fx(It, A, "golfo", "golfi", &[]),
        fx(It, A, "minato", "minata", &[]),
        fx(It, A, "mettere", "metto", &[]),
        fx(It, A, "crescono", "cresci", &["crescere"]),
        fx(It, A, "crediti", "credite", &[]),
        fx(It, A, "libro", "libri", &[]),
        fx(It, A, "rapido", "rapida", &[]),
        fx(It, A, "bianco", "bianca", &[]),
        fx(It, A, "nero", "neri", &[]),
        fx(It, A, "generazione", "generazioni", &[]),
        fx(It, A, "tartaruga", "tartarughe", &[]),
        fx(It, A, "bianca", "bianche", &[]),
        fx(It, A, "albergo", "alberghi", &[]),
        fx(It, A, "aspettare", "aspettiamo", &[]),
        fx(It, A, "aspettare", "aspettato", &[]),
        fx(It, A, "ricevere", "ricevete", &[]),
        fx(It, A, "riceve", "ricevuto", &["ricevere"]),
        fx(It, A, "dormire", "dormono", &[]),
        fx(It, A, "dormi", "dormita", &["dormire"]),
        fx(It, R, "abitata", "inabitato", &["inabitata"]),
        fx(It, R, "realtà", "irrealtà", &[]),
        fx(It, R, "attuato", "inattuato", &[]),
        fx(It, R, "attivo", "inattivo", &[]),
        fx(It, R, "rispettoso", "irrispettoso", &[]),
        fx(It, R, "rispettosa", "irrispettosa", &[]),
        fx(
            It,
            R,
            "rispettosa",
            "irrispettosi",
            &["rispettosi", "irrispettosa"],
        ),
        fx(Ru, A, "альбом", "альбомы", &[]),
        fx(Ru, A, "песня", "песни", &[]),
        fx(Ru, A, "письмо", "письма", &[]),
        fx(Ru, A, "платье", "платья", &[]),
        fx(Ru, A, "варить", "варите", &[]),
        fx(Ru, A, "заканчиваю", "заканчивают", &["заканчивать"]),
        fx(Ru, A, "работа", "работой", &[]),
        fx(Ru, A, "линия", "линию", &[]),
        fx(Ru, A, "работам", "работами", &["работы"]),
        fx(Ru, A, "быстрый", "быстрее", &[]),
        fx(Ru, A, "новая", "новые", &[]),
        fx(Ru, A, "новое", "новый", &[]),
        fx(Ru, R, "адекватный", "неадекватный", &[]),
        fx(Ru, R, "вирусная", "антивирусная", &[]),
        fx(Ru, R, "адекватный", "неадекватная", &["неадекватный"]),
    ]
}

fn has(pairs: &[(String, String)], l: &str, r: &str) -> bool {
    pairs.iter().any(|(a, b)| a == l && b == r)
}

fn rule_fidelity() -> Outcome {
    let all = fixtures();
    let mut missing = Vec::new();
    for f in &all {
        let (l, r) = f.pair;
        let vocab = vocabulary([l, r].iter().chain(f.extra.iter()).copied());
        let set = constraints::build(&vocab, &RuleSet::builtin(f.lang));
        let list = match f.expect {
            Expect::Attract => &set.attract,
            Expect::Repel => &set.repel,
        };
        if !(has(list, l, r) && has(list, r, l)) {
            missing.push(format!("{}:({l}, {r})", f.lang));
        }
    }

    // the six Italian forms: inflections attract within a polarity, every
    // cross pair repels
    let plain = ["rispettoso", "rispettosa", "rispettosi"];
    let negated = ["irrispettoso", "irrispettosa", "irrispettosi"];
    let vocab = vocabulary(plain.iter().chain(&negated).copied());
    let set = constraints::build(&vocab, &RuleSet::builtin(Language::It));
    let mut sextet_attract = 0;
    for group in [plain, negated] {
        for a in group {
            for b in group {
                if a != b {
                    sextet_attract += 1;
                    if !has(&set.attract, a, b) {
                        missing.push(format!("it:attract({a}, {b})"));
                    }
                }
            }
        }
    }
    for a in plain {
        for b in negated {
            if !(has(&set.repel, a, b) && has(&set.repel, b, a)) {
                missing.push(format!("it:repel({a}, {b})"));
            }
        }
    }
    ensure!(
        set.repel.len() == 18,
        "sextet repel count {} != 18",
        set.repel.len()
    );
    ensure!(missing.is_empty(), "missing {}", missing.join(", "));
    Ok(format!(
        "{} example pairs; sextet |A|={} |R|={}",
        all.len(),
        sextet_attract,
        set.repel.len()
    ))
}

// ---------------------------------------------------------------- 2

fn oracle_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// Brute-force negative: scan every row in the batch and keep the best
/// score, preferring lower rows on ties.
fn oracle_negative(
    pairs: &[(usize, usize)],
    kind: BatchKind,
    m: usize,
    p: usize,
    s: &VectorStore,
) -> Option<usize> {
    let mut rows: Vec<usize> = pairs.iter().flat_map(|&(l, r)| [l, r]).collect();
    rows.sort_unstable();
    rows.dedup();
    let scored: Vec<(usize, f64)> = rows
        .into_iter()
        .filter(|&c| c != m && c != p)
        .map(|c| (c, oracle_dot(s.row(m), s.row(c))))
        .collect();
    let best = match kind {
        BatchKind::Attract => scored.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max),
        BatchKind::Repel => scored.iter().map(|x| x.1).fold(f64::INFINITY, f64::min),
    };
    scored.iter().filter(|x| x.1 == best).map(|x| x.0).min()
}

fn oracle_cost(
    pairs: &[(usize, usize)],
    kind: BatchKind,
    s: &VectorStore,
    cfg: &TrainingConfig,
) -> f64 {
    let mut total = 0.0;
    for &(l, r) in pairs {
        let lr = oracle_dot(s.row(l), s.row(r));
        let hinge = |m: usize, p: usize| match oracle_negative(pairs, kind, m, p, s) {
            None => 0.0,
            Some(t) => {
                let mt = oracle_dot(s.row(m), s.row(t));
                let v = match kind {
                    BatchKind::Attract => cfg.delta_att + mt - lr,
                    BatchKind::Repel => cfg.delta_rpl + lr - mt,
                };
                v.max(0.0)
            }
        };
        total += hinge(l, r) + hinge(r, l);
    }
    total
}

fn random_store(rng: &mut ChaCha8Rng, n: usize, d: usize, dyadic: bool) -> VectorStore {
    VectorStore::from_rows((0..n).map(|i| {
        let v: Vec<f64> = (0..d)
            .map(|_| {
                if dyadic {
                    rng.random_range(-8i32..=8) as f64 / 4.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        (format!("w{i}"), v)
    }))
    .unwrap()
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    (0..count)
        .map(|_| {
            let l = rng.random_range(0..n);
            let mut r = rng.random_range(0..n - 1);
            if r >= l {
                r += 1;
            }
            (l, r)
        })
        .collect()
}

fn cost_oracle() -> Outcome {
    let cfg = TrainingConfig::default();
    let abcd = |c: [f64; 2], d: [f64; 2]| {
        VectorStore::from_rows([
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.0]),
            ("c", c.to_vec()),
            ("d", d.to_vec()),
        ])
        .unwrap()
    };
    let pairs = vec![(0, 1), (2, 3)];
    let s = abcd([0.0, 1.0], [1.0, 0.0]);
    let a = MiniBatch::attract(pairs.clone()).unwrap();
    let got = attract_cost(&a, &s, &cfg);
    ensure!(
        got == oracle_cost(&pairs, BatchKind::Attract, &s, &cfg),
        "3.4 instance differs from oracle"
    );
    ensure!((got - 3.4).abs() < 1e-12, "attract example gave {got}");
    let s = abcd([0.0, 1.0], [0.0, 1.0]);
    let r = MiniBatch::repel(pairs.clone()).unwrap();
    let got = repel_cost(&r, &s, &cfg);
    ensure!(
        got == oracle_cost(&pairs, BatchKind::Repel, &s, &cfg),
        "4.0 instance differs from oracle"
    );
    ensure!(got == 4.0, "repel example gave {got}");

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for instance in 0..200 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(2..=8);
        let s = random_store(&mut rng, n, d, instance % 2 == 0);
        let cfg = TrainingConfig {
            delta_att: rng.random_range(0..=4) as f64 / 4.0,
            delta_rpl: rng.random_range(0..=4) as f64 / 4.0,
            ..TrainingConfig::default()
        };
        for kind in [BatchKind::Attract, BatchKind::Repel] {
            let count = rng.random_range(1..=4);
            let pairs = random_pairs(&mut rng, n, count);
            let batch = MiniBatch::new(kind, pairs.clone()).unwrap();
            let got = match kind {
                BatchKind::Attract => attract_cost(&batch, &s, &cfg),
                BatchKind::Repel => repel_cost(&batch, &s, &cfg),
            };
            let want = oracle_cost(&pairs, kind, &s, &cfg);
            ensure!(
                got == want,
                "instance {instance} {kind:?}: {got} != oracle {want}"
            );
        }
    }
    Ok("3.4, 4.0 and 200 random instances".into())
}

// ---------------------------------------------------------------- 3

fn pool_for(batch: &MiniBatch, all: &[usize], mode: NegativePool) -> Vec<usize> {
    match mode {
        NegativePool::Joint => all.to_vec(),
        NegativePool::SameKind => batch.words(),
    }
}

/// Smallest distance of any hinge argument from its kink, and of any
/// selected negative from the runner-up.
fn kink_distance(batches: &[&MiniBatch], s: &VectorStore, cfg: &TrainingConfig) -> f64 {
    let all: Vec<usize> = batches
        .iter()
        .flat_map(|b| b.words())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut closest = f64::INFINITY;
    for b in batches {
        let pool = pool_for(b, &all, cfg.negatives);
        for &(l, r) in &b.pairs {
            let lr = oracle_dot(s.row(l), s.row(r));
            for (m, p) in [(l, r), (r, l)] {
                let mut scores: Vec<f64> = pool
                    .iter()
                    .filter(|&&c| c != m && c != p)
                    .map(|&c| oracle_dot(s.row(m), s.row(c)))
                    .collect();
                if scores.is_empty() {
                    continue;
                }
                scores.sort_by(f64::total_cmp);
                let t = match b.kind {
                    BatchKind::Attract => *scores.last().unwrap(),
                    BatchKind::Repel => scores[0],
                };
                if scores.len() > 1 {
                    let gap = match b.kind {
                        BatchKind::Attract => scores[scores.len() - 1] - scores[scores.len() - 2],
                        BatchKind::Repel => scores[1] - scores[0],
                    };
                    closest = closest.min(gap);
                }
                let arg = match b.kind {
                    BatchKind::Attract => cfg.delta_att + t - lr,
                    BatchKind::Repel => cfg.delta_rpl + lr - t,
                };
                closest = closest.min(arg.abs());
            }
        }
    }
    closest
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut tries = 0;
    while checked < 50 {
        tries += 1;
        ensure!(tries < 10_000, "could not draw instances away from kinks");
        let (n, d) = (5, 4);
        let mut s = random_store(&mut rng, n, d, false);
        for i in 0..n {
            for v in s.row_mut(i) {
                *v += rng.random_range(-0.3..0.3);
            }
        }
        let cfg = TrainingConfig {
            delta_att: rng.random_range(0.0..1.0),
            delta_rpl: rng.random_range(0.0..0.5),
            lambda_reg: 0.1,
            negatives: if checked % 2 == 0 {
                NegativePool::Joint
            } else {
                NegativePool::SameKind
            },
            ..TrainingConfig::default()
        };
        let a = MiniBatch::attract(random_pairs(&mut rng, n, 2)).unwrap();
        let r = MiniBatch::repel(random_pairs(&mut rng, n, 2)).unwrap();
        if kink_distance(&[&a, &r], &s, &cfg) < 1e-3 {
            continue;
        }
        let g = gradient(Some(&a), Some(&r), &s, &cfg);
        for (&row, grad) in &g.rows {
            for (k, &analytic) in grad.iter().enumerate() {
                let orig = s.row(row)[k];
                s.row_mut(row)[k] = orig + h;
                let up = step_cost(Some(&a), Some(&r), &s, &cfg).total();
                s.row_mut(row)[k] = orig - h;
                let down = step_cost(Some(&a), Some(&r), &s, &cfg).total();
                s.row_mut(row)[k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let scale = analytic.abs().max(numeric.abs()).max(1e-8);
                worst = worst.max((analytic - numeric).abs() / scale);
            }
        }
        checked += 1;
    }
    ensure!(worst <= 1e-4, "max relative error {worst:e}");
    Ok(format!("50 instances, max relative error {worst:.2e}"))
}

// ---------------------------------------------------------------- 4, 5

fn six_words() -> VectorStore {
    let d = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let unit = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let mix = |a: usize, b: usize, c: f64| {
        let mut v = vec![0.0; d];
        v[a] = c;
        v[b] = (1.0 - c * c).sqrt();
        v
    };
    let mut random = || {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    VectorStore::from_rows([
        ("w1", unit(0)),
        ("w2", mix(0, 1, 0.1)),
        ("w3", unit(2)),
        ("w4", mix(2, 3, 0.9)),
        ("w5", random()),
        ("w6", random()),
    ])
    .unwrap()
}

fn six_word_constraints() -> ConstraintSet {
    ConstraintSet {
        attract: vec![("w1".into(), "w2".into())],
        repel: vec![("w3".into(), "w4".into())],
    }
}

fn specialisation() -> Outcome {
    let s = six_words();
    let before_a = s.cosine("w1", "w2").unwrap();
    let before_r = s.cosine("w3", "w4").unwrap();
    ensure!(
        (before_a - 0.1).abs() < 1e-12 && (before_r - 0.9).abs() < 1e-12,
        "bad instance"
    );
    let out =
        fit(&s, &six_word_constraints(), &TrainingConfig::default()).map_err(|e| e.to_string())?;
    let after_a = out.store.cosine("w1", "w2").unwrap();
    let after_r = out.store.cosine("w3", "w4").unwrap();
    ensure!(
        after_a - before_a >= 0.2,
        "attract cosine {before_a:.3} -> {after_a:.3}"
    );
    ensure!(
        before_r - after_r >= 0.2,
        "repel cosine {before_r:.3} -> {after_r:.3}"
    );
    for w in ["w5", "w6"] {
        let i = s.index_of(w).unwrap();
        let same = s
            .row(i)
            .iter()
            .zip(out.store.row(i))
            .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure!(same, "{w} changed");
    }
    Ok(format!(
        "attract cos {before_a:.3} -> {after_a:.3}, repel cos {before_r:.3} -> {after_r:.3}"
    ))
}

fn pull_back() -> Outcome {
    let s = six_words();
    let mut constraints = six_word_constraints();
    constraints.attract.push(("w5".into(), "w6".into()));
    constraints.repel.push(("w1".into(), "w6".into()));
    let cfg = TrainingConfig {
        lambda_reg: 1e3,
        delta_att: 0.0,
        delta_rpl: 0.0,
        ..TrainingConfig::default()
    };
    let out = fit(&s, &constraints, &cfg).map_err(|e| e.to_string())?;
    let mut moved: f64 = 0.0;
    for i in 0..s.len() {
        let d: f64 = s
            .row(i)
            .iter()
            .zip(out.store.row(i))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        moved = moved.max(d.sqrt());
    }
    ensure!(moved <= 1e-3, "a vector moved {moved:e}");
    Ok(format!("max movement {moved:e}"))
}

// ---------------------------------------------------------------- 6

fn morph_fix_check() -> Outcome {
    let words = [
        "walk", "walks", "walked", "house", "tree", "blue", "run", "sky", "table", "road",
    ];
    let s = VectorStore::from_rows(words.iter().enumerate().map(|(i, w)| {
        (
            *w,
            (0..4)
                .map(|k| ((i * 7 + k * 3) % 11) as f64 - 5.0)
                .collect(),
        )
    }))
    .unwrap();
    let counts = [40, 900, 120, 50, 60, 70, 80, 5, 1, 2];
    let freq: FrequencyTable = words.iter().copied().zip(counts).collect();
    let attract: Vec<(String, String)> = [
        ("walk", "walks"),
        ("walks", "walk"),
        ("walk", "walked"),
        ("walked", "walk"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let fixed = morph_fix(&s, &attract, &freq);
    let rep = s.initial_row(s.index_of("walks").unwrap());
    for w in ["walk", "walks", "walked"] {
        ensure!(fixed.vector(w).unwrap() == rep, "{w} not tied to walks");
    }
    for w in &words[3..] {
        ensure!(fixed.vector(w) == s.vector(w), "{w} changed");
    }
    let again = morph_fix(&fixed, &attract, &freq);
    ensure!(again.matrix() == fixed.matrix(), "not idempotent");
    Ok("3-word component tied to most frequent member".into())
}

// ---------------------------------------------------------------- 7

fn reference_ranks(v: &[i64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn reference_spearman(a: &[i64], b: &[i64]) -> Option<f64> {
    let (ra, rb) = (reference_ranks(a), reference_ranks(b));
    let n = ra.len() as f64;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let sxy: f64 = ra.iter().zip(&rb).map(|(x, y)| x * y).sum();
    let sxx: f64 = ra.iter().map(|x| x * x).sum();
    let syy: f64 = rb.iter().map(|y| y * y).sum();
    let cov = sxy - sum(&ra) * sum(&rb) / n;
    let va = sxx - sum(&ra) * sum(&ra) / n;
    let vb = syy - sum(&rb) * sum(&rb) / n;
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

fn spearman_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    while compared < 100 {
        let n = rng.random_range(2..=12);
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(0..6)).collect();
        let b: Vec<i64> = (0..n).map(|_| rng.random_range(0..6)).collect();
        let fa: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        let fb: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        let got = eval::spearman(&fa, &fb);
        match reference_spearman(&a, &b) {
            None => ensure!(got.is_err(), "constant input accepted: {a:?} {b:?}"),
            Some(want) => {
                let got = got.map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs());
                compared += 1;
            }
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    for n in 2..=12 {
        let up: Vec<f64> = (0..n).map(|x| x as f64).collect();
        let scaled: Vec<f64> = up.iter().map(|x| x * 3.5 + 1.0).collect();
        let down: Vec<f64> = up.iter().map(|x| -x).collect();
        ensure!(
            eval::spearman(&up, &scaled).unwrap() == 1.0,
            "n={n}: +1 not exact"
        );
        ensure!(
            eval::spearman(&up, &down).unwrap() == -1.0,
            "n={n}: -1 not exact"
        );
    }
    Ok(format!(
        "100 lists, max deviation {worst:.1e}; extremes exact"
    ))
}

// ---------------------------------------------------------------- 8

const FAMILIES: [[&str; 6]; 6] = [
    [
        "allow",
        "allows",
        "allowed",
        "allowing",
        "disallow",
        "disallowed",
    ],
    [
        "cover",
        "covers",
        "covered",
        "covering",
        "uncover",
        "uncovered",
    ],
    ["like", "likes", "liked", "liking", "dislike", "disliked"],
    [
        "trust",
        "trusts",
        "trusted",
        "trusting",
        "distrust",
        "distrusted",
    ],
    ["lock", "locks", "locked", "locking", "unlock", "unlocked"],
    [
        "agree",
        "agrees",
        "agreed",
        "agreeing",
        "disagree",
        "disagreed",
    ],
];
const FILLERS: [&str; 4] = ["table", "river", "green", "music"];

fn toy_pipeline() -> Outcome {
    let words: Vec<&str> = FAMILIES
        .iter()
        .flatten()
        .chain(FILLERS.iter())
        .copied()
        .collect();
    ensure!(words.len() == 40, "corpus has {} words", words.len());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut store = VectorStore::from_rows(words.iter().map(|w| {
        (
            *w,
            (0..10)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<f64>>(),
        )
    }))
    .unwrap();
    store.normalize().unwrap();

    let set = constraints::build(
        &vocabulary(words.iter().copied()),
        &RuleSet::builtin(Language::En),
    );
    ensure!(
        !set.attract.is_empty() && !set.repel.is_empty(),
        "no constraints extracted"
    );

    let mut gold = Vec::new();
    for f in &FAMILIES {
        for form in &f[1..4] {
            gold.push(SimilarityEntry {
                word1: f[0].into(),
                word2: (*form).into(),
                gold: 9.0,
            });
        }
        gold.push(SimilarityEntry {
            word1: f[0].into(),
            word2: f[4].into(),
            gold: 1.0,
        });
        gold.push(SimilarityEntry {
            word1: f[1].into(),
            word2: f[4].into(),
            gold: 1.5,
        });
        gold.push(SimilarityEntry {
            word1: f[2].into(),
            word2: f[5].into(),
            gold: 1.0,
        });
    }
    let dataset = SimilarityDataset::new(gold).map_err(|e| e.to_string())?;

    let before = eval::evaluate(&store, &dataset).map_err(|e| e.to_string())?;
    let fitted = fit(&store, &set, &TrainingConfig::default())
        .map_err(|e| e.to_string())?
        .store;
    let after = eval::evaluate(&fitted, &dataset).map_err(|e| e.to_string())?;
    ensure!(
        after.rho > before.rho,
        "rho {:.3} -> {:.3}",
        before.rho,
        after.rho
    );

    for f in &FAMILIES {
        let ranked: Vec<String> = eval::neighbors(&fitted, f[0], 39)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(w, _)| w)
            .collect();
        let pos = |w: &str| ranked.iter().position(|x| x == w).unwrap();
        let worst_inflection = f[1..4].iter().map(|w| pos(w)).max().unwrap();
        let best_antonym = pos(f[4]).min(pos(f[5]));
        ensure!(
            worst_inflection < best_antonym,
            "neighbours of {}: {:?}",
            f[0],
            &ranked[..6]
        );
    }
    Ok(format!(
        "|A|={} |R|={}, rho {:.3} -> {:.3}",
        set.attract.len(),
        set.repel.len(),
        before.rho,
        after.rho
    ))
}

// ---------------------------------------------------------------- 9

fn large_scale() -> Option<Outcome> {
    let vectors = std::env::var_os("MORPHFIT_GLOVE")?;
    let simlex = std::env::var_os("MORPHFIT_SIMLEX")?;
    Some((|| {
        let store = VectorStore::load(&vectors, true).map_err(|e| e.to_string())?;
        let dataset = SimilarityDataset::load(&simlex, true).map_err(|e| e.to_string())?;
        let vocab = vocabulary(store.words().iter().map(String::as_str));
        let set = constraints::build(&vocab, &RuleSet::builtin(Language::En));
        let before = eval::evaluate(&store, &dataset).map_err(|e| e.to_string())?;
        let fitted = fit(&store, &set, &TrainingConfig::default())
            .map_err(|e| e.to_string())?
            .store;
        let after = eval::evaluate(&fitted, &dataset).map_err(|e| e.to_string())?;
        ensure!(
            after.rho >= 0.40,
            "rho {:.3} -> {:.3}",
            before.rho,
            after.rho
        );
        Ok(format!("rho {:.3} -> {:.3}", before.rho, after.rho))
    })())
}
