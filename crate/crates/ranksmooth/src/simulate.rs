//! Synthetic feedback generation and laziness estimation.
//!
//! Implicit sessions follow a two-branch model: with probability `l`
//! ("laziness") the user accepts the shown default whatever it is; otherwise
//! the logged choice is a draw from the term's true preference distribution
//! (a satisfied user's draw simply coincides with the default). Every
//! session logs exactly one choice, matching a single-choice feedback task.
//! Under this model the default option's acceptance rate is
//! `pref_d + l*(1 - pref_d)`, so subtracting an explicit-feedback baseline
//! recovers the laziness rate.
//!
//! All randomness is ChaCha12 seeded from a `u64`, with one independent
//! stream per term derived from an FNV-1a hash of the term id. The
//! identifiers are recorded in emitted file metadata so logs are
//! reproducible bit for bit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::vector::{CountsVector, ScoringVector};

/// Algorithm identifier recorded in simulator output metadata.
pub const GENERATOR_ID: &str = "chacha12; per-term stream = fnv1a64(term_id)";

/// Parameters of one term's implicit-feedback session population.
#[derive(Debug, Clone)]
pub struct SessionModel {
    /// Session abandonment rate `P(A)`. Does not gate logging here (the
    /// single-choice task always records a choice); carried for the
    /// abandonment bookkeeping in [`abandonment_tree`].
    pub abandonment: f64,
    /// Probability a session accepts the default regardless of correctness.
    pub laziness: f64,
    /// Ground-truth preference over the term's options.
    pub preference: ScoringVector,
    /// Option shown as the default (0-based).
    pub default_option: usize,
    pub sessions: u64,
    pub seed: u64,
}

impl SessionModel {
    pub fn new(
        abandonment: f64,
        laziness: f64,
        preference: ScoringVector,
        default_option: usize,
        sessions: u64,
        seed: u64,
    ) -> Result<Self> {
        for (name, p) in [("abandonment", abandonment), ("laziness", laziness)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} {p} outside [0, 1]")));
            }
        }
        if default_option >= preference.k() {
            return Err(Error::BadIndex {
                term: "<model>".into(),
                index: default_option + 1,
                k: preference.k(),
            });
        }
        if sessions == 0 {
            return Err(Error::InvalidConfig("sessions must be positive".into()));
        }
        Ok(Self {
            abandonment,
            laziness,
            preference,
            default_option,
            sessions,
            seed,
        })
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// One PRNG stream per (seed, term): reproducible and independent across
/// terms regardless of simulation order.
pub fn term_rng(seed: u64, term_id: &str) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(term_id.as_bytes()));
    rng
}

fn draw_index(preference: &ScoringVector, rng: &mut ChaCha12Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in preference.values().iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    preference.k() - 1
}

/// Aggregated implicit-feedback counts for one term over the model's
/// session population. Total always equals `sessions`.
pub fn simulate_implicit(model: &SessionModel, term_id: &str) -> CountsVector {
    let mut rng = term_rng(model.seed, term_id);
    let mut counts = vec![0u64; model.preference.k()];
    for _ in 0..model.sessions {
        let lazy: f64 = rng.gen();
        let choice = if lazy < model.laziness {
            model.default_option
        } else {
            draw_index(&model.preference, &mut rng)
        };
        counts[choice] += 1;
    }
    CountsVector::new(counts).expect("k >= 2 by construction")
}

/// A noisy interaction log: each bin an independent uniform integer in
/// `0..=10`. All-zero vectors are redrawn (an empty log is "no feedback",
/// not noise).
pub fn simulate_random(k: usize, seed: u64, term_id: &str) -> Result<CountsVector> {
    if k < 2 {
        return Err(Error::TooFewBins(k));
    }
    let mut rng = term_rng(seed, term_id);
    loop {
        let counts: Vec<u64> = (0..k).map(|_| rng.gen_range(0..=10u64)).collect();
        if counts.iter().any(|&c| c > 0) {
            return CountsVector::new(counts);
        }
    }
}

/// Per-term laziness estimates and their aggregate.
#[derive(Debug, Clone)]
pub struct LazinessEstimate {
    /// `term -> implicit rate - explicit rate`.
    pub per_term: BTreeMap<String, f64>,
    pub mean: f64,
    /// Sample standard deviation across terms (0 for a single term).
    pub stdev: f64,
}

/// Estimates laziness per term as the gap between the default option's
/// implicit acceptance rate and its explicit selection rate.
pub fn estimate_laziness(
    explicit_rates: &BTreeMap<String, f64>,
    implicit_rates: &BTreeMap<String, f64>,
) -> Result<LazinessEstimate> {
    if explicit_rates.is_empty()
        || explicit_rates.len() != implicit_rates.len()
        || explicit_rates.keys().ne(implicit_rates.keys())
    {
        return Err(Error::TermSetMismatch);
    }
    let mut per_term = BTreeMap::new();
    for (term, &e) in explicit_rates {
        let i = implicit_rates[term];
        per_term.insert(term.clone(), i - e);
    }
    let n = per_term.len() as f64;
    let mean = per_term.values().sum::<f64>() / n;
    let stdev = if per_term.len() > 1 {
        (per_term.values().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(LazinessEstimate {
        per_term,
        mean,
        stdev,
    })
}

/// Branch masses of the session-outcome tree:
/// `(P(abandon & not lazy), P(abandon & lazy), P(interact))`.
pub fn abandonment_tree(abandonment: f64, laziness: f64) -> (f64, f64, f64) {
    (
        abandonment * (1.0 - laziness),
        abandonment * laziness,
        1.0 - abandonment,
    )
}
