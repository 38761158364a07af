//! Convex combinations of scoring vectors and the balance-point solver.
//!
//! Given a prior `x` and an evidence vector `y` whose top-ranked bins
//! disagree, there is exactly one convex weighting `z = w1*x + w2*y` that
//! ties the two disputed bins. That balance point is where the final answer
//! flips from one source's choice to the other's, and it anchors the
//! weighting-curve calibration in [`crate::profiling`].

use crate::error::{Error, Result};
use crate::vector::ScoringVector;

/// Absolute tolerance below which a score difference is treated as zero when
/// classifying balance cases. Scores arrive normalized near unit scale.
pub const DIFF_TOLERANCE: f64 = 1e-12;

/// A convex weight pair: `prior + evidence = 1`, both nonnegative.
///
/// `prior` is the weight on the system's intrinsic scoring, `evidence` the
/// weight on the feedback-derived scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    prior: f64,
    evidence: f64,
}

impl Weights {
    pub fn new(prior: f64, evidence: f64) -> Result<Self> {
        let ok = prior >= 0.0
            && evidence >= 0.0
            && prior.is_finite()
            && evidence.is_finite()
            && (prior + evidence - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::BadWeights(prior, evidence));
        }
        Ok(Self { prior, evidence })
    }

    /// Weight pair from the evidence side alone.
    pub fn from_evidence(evidence: f64) -> Result<Self> {
        Self::new(1.0 - evidence, evidence)
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn evidence(&self) -> f64 {
        self.evidence
    }
}

/// `z_i = w1 * x_i + w2 * y_i` over all bins.
pub fn combine(x: &ScoringVector, y: &ScoringVector, w: Weights) -> Result<ScoringVector> {
    if x.k() != y.k() {
        return Err(Error::DimensionMismatch(x.k(), y.k()));
    }
    let values = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(&a, &b)| w.prior * a + w.evidence * b)
        .collect();
    // The simplex is closed under convex combination; this only irons out
    // float drift in the sum.
    ScoringVector::normalized(values)
}

/// All bins holding the maximum score (0-based, ascending).
pub fn top_bins(x: &ScoringVector) -> Vec<usize> {
    let max = x.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..x.k()).filter(|&i| x.get(i) >= max).collect()
}

/// Looks for a witness pair `(t, u)` with `t` top in `x`, `u` top in `y`, and
/// at least one of them not top in the other vector.
///
/// Returns `None` when the two top-bin sets coincide. The witness is the
/// lexicographically first such pair over the ascending top-bin lists, which
/// makes downstream balancing deterministic.
pub fn disagreed_top_bins(x: &ScoringVector, y: &ScoringVector) -> Result<Option<(usize, usize)>> {
    if x.k() != y.k() {
        return Err(Error::DimensionMismatch(x.k(), y.k()));
    }
    let tx = top_bins(x);
    let ty = top_bins(y);
    for &t in &tx {
        for &u in &ty {
            if t != u && (!ty.contains(&t) || !tx.contains(&u)) {
                return Ok(Some((t, u)));
            }
        }
    }
    Ok(None)
}

/// Solves for the unique weights making `z_t = z_u` in `z = w1*x + w2*y`.
///
/// With `dx = x_t - x_u` and `dy = y_t - y_u`, a unique nonnegative solution
/// exists exactly when `dx` and `dy` have strictly opposite signs (then
/// `w2 = dx / (dx - dy)`), or when exactly one of them is zero:
/// `dx = 0` forces `(1, 0)` and `dy = 0` forces `(0, 1)`, the corner cases
/// where one source is ignored outright.
pub fn balance_pair(x: &ScoringVector, y: &ScoringVector, t: usize, u: usize) -> Result<Weights> {
    if x.k() != y.k() {
        return Err(Error::DimensionMismatch(x.k(), y.k()));
    }
    let dx = x.get(t) - x.get(u);
    let dy = y.get(t) - y.get(u);
    let dx_zero = dx.abs() <= DIFF_TOLERANCE;
    let dy_zero = dy.abs() <= DIFF_TOLERANCE;
    match (dx_zero, dy_zero) {
        (true, true) => Err(Error::NotUnique { t, u }),
        (true, false) => Weights::new(1.0, 0.0),
        (false, true) => Weights::new(0.0, 1.0),
        (false, false) => {
            if dx.signum() == dy.signum() {
                return Err(Error::NoSolution { t, u });
            }
            let evidence = dx / (dx - dy);
            Weights::new(1.0 - evidence, evidence)
        }
    }
}

/// Balances the canonical disagreed witness pair of `x` and `y`.
///
/// Guaranteed to succeed whenever the top-bin sets differ: the witness pair
/// always admits a unique solution.
pub fn balance_top(x: &ScoringVector, y: &ScoringVector) -> Result<Weights> {
    match disagreed_top_bins(x, y)? {
        Some((t, u)) => balance_pair(x, y, t, u),
        None => Err(Error::NotDisagreed),
    }
}
