//! Probability vectors over candidate interpretations, and their counts.
//!
//! A [`ScoringVector`] holds `k >= 2` nonnegative scores summing to 1 — one
//! score per candidate interpretation of a query term. A [`CountsVector`]
//! holds the raw per-option tallies from a feedback log. Normalized Shannon
//! entropy, `H(v) = -Σ v_i log v_i / log k`, is the uncertainty measure used
//! throughout: 0 for a one-hot vector, 1 for the uniform one, independent of
//! the logarithm base.

use crate::error::{Error, Result};

/// Sum-to-one tolerance for accepting a raw scoring vector. Inputs within the
/// tolerance are renormalized on construction, inputs outside it are rejected.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability distribution over `k >= 2` candidate interpretations.
///
/// Immutable once constructed; construction enforces the invariants
/// (nonnegative entries, sum 1 within [`SUM_TOLERANCE`], `k >= 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringVector {
    values: Vec<f64>,
}

impl ScoringVector {
    /// Builds a scoring vector, renormalizing away float drift.
    ///
    /// Rejects vectors whose sum is farther than [`SUM_TOLERANCE`] from 1;
    /// use [`ScoringVector::normalized`] for raw score lists.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::check_entries(&values)?;
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::SumOutOfTolerance(sum));
        }
        Ok(Self::scale(values, sum))
    }

    /// Builds a scoring vector from arbitrary nonnegative scores by dividing
    /// through by their sum.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        Self::check_entries(&values)?;
        let sum: f64 = values.iter().sum();
        if sum <= 0.0 {
            return Err(Error::ZeroTotal);
        }
        Ok(Self::scale(values, sum))
    }

    /// The uniform distribution over `k` bins.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewBins(k));
        }
        Ok(Self {
            values: vec![1.0 / k as f64; k],
        })
    }

    /// All mass on one bin (0-based).
    pub fn one_hot(k: usize, bin: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewBins(k));
        }
        if bin >= k {
            return Err(Error::BadIndex {
                term: "<one-hot>".into(),
                index: bin + 1,
                k,
            });
        }
        let mut values = vec![0.0; k];
        values[bin] = 1.0;
        Ok(Self { values })
    }

    fn check_entries(values: &[f64]) -> Result<()> {
        if values.len() < 2 {
            return Err(Error::TooFewBins(values.len()));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::BadEntry { index, value });
            }
        }
        Ok(())
    }

    fn scale(mut values: Vec<f64>, sum: f64) -> Self {
        // A sum already at float resolution of 1 is left untouched, so that
        // renormalization is idempotent and exact identities (combining with
        // weights (1,0), say) stay exact.
        if (sum - 1.0).abs() > 4.0 * f64::EPSILON {
            for v in values.iter_mut() {
                *v /= sum;
            }
        }
        Self { values }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, bin: usize) -> f64 {
        self.values[bin]
    }

    /// Normalized Shannon entropy `H(v) = (-Σ v_i ln v_i) / ln k` in `[0, 1]`.
    ///
    /// Uses the `0 * log 0 := 0` convention, so one-hot vectors score exactly 0
    /// and the uniform vector scores 1. The normalization by `log k` makes the
    /// value independent of the logarithm base and comparable across `k`.
    pub fn normalized_entropy(&self) -> f64 {
        let h: f64 = self
            .values
            .iter()
            .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
            .sum();
        let h = h / (self.k() as f64).ln();
        // Guard against -0.0 and 1 + ulp drift from the division.
        h.clamp(0.0, 1.0)
    }
}

/// Raw per-option tallies from a feedback log, paired bin-for-bin with a
/// [`ScoringVector`] of the same `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsVector {
    counts: Vec<u64>,
}

impl CountsVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::TooFewBins(counts.len()));
        }
        Ok(Self { counts })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0; k])
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub(crate) fn increment(&mut self, bin: usize) {
        self.counts[bin] += 1;
    }

    /// Relative frequencies `n_i / n` as a scoring vector.
    ///
    /// Fails with [`Error::ZeroTotal`] on an empty log; callers that want the
    /// empty-log convention (fall back to the prior) handle that upstream.
    pub fn normalize(&self) -> Result<ScoringVector> {
        let total = self.total();
        if total == 0 {
            return Err(Error::ZeroTotal);
        }
        let t = total as f64;
        Ok(ScoringVector {
            values: self.counts.iter().map(|&c| c as f64 / t).collect(),
        })
    }
}
