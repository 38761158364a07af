//! Offline calibration of the logit weighting curve from an intrinsic-source
//! entropy profile.
//!
//! The pipeline condenses the intrinsic dataset to a two-bin stand-in with
//! the same mean entropy, solves for the evidence weights that balance it
//! against two-bin evidence at the ambiguity threshold `D` and at `D +
//! delta`, turns those into a four-point constraint set (the corners `(0,1)`
//! and `(1,0)`, the intercept `(D, w)`, and an inverse-slope point
//! `(D+delta, w')`), and least-squares fits the logit curve through them.
//! The fit runs once, offline; query time only evaluates the curve.

use crate::error::{Error, Result};
use crate::vector::ScoringVector;
use crate::weighting::WeightingProfile;

/// Parameter search domain for the curve fits: `beta0, beta` in `(0, 2000]`.
/// The ceiling accommodates near-step constraint geometries, whose optima
/// carry slopes above 1000.
pub const PARAM_MAX: f64 = 2000.0;
const PARAM_MIN: f64 = 1e-9;

/// A fit whose achieved lack of fit exceeds this is reported as
/// non-convergence: the constraint geometry is pathological for the model.
const LACK_OF_FIT_LIMIT: f64 = 1e-2;

const BISECT_ITERS: usize = 200;
const BISECT_TOL: f64 = 1e-9;

/// Points `(entropy, target weight)` in the unit square that the weighting
/// curve must pass through. Always contains the corners `(0, 1)` and
/// `(1, 0)`; profiling adds one or two interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    points: Vec<(f64, f64)>,
}

impl ConstraintSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if !(2..=4).contains(&points.len()) {
            return Err(Error::BadConstraints(format!(
                "expected 2 to 4 points, got {}",
                points.len()
            )));
        }
        for &(a, b) in &points {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::BadConstraints(format!(
                    "point ({a}, {b}) outside the unit square"
                )));
            }
        }
        let has = |p: (f64, f64)| points.contains(&p);
        if !has((0.0, 1.0)) || !has((1.0, 0.0)) {
            return Err(Error::BadConstraints(
                "constraint set must contain the corner points (0,1) and (1,0)".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Entropy coordinate of the first interior point, if any.
    fn interior_entropy(&self) -> Option<f64> {
        self.points
            .iter()
            .find(|&&(a, b)| (a, b) != (0.0, 1.0) && (a, b) != (1.0, 0.0))
            .map(|&(a, _)| a)
    }
}

/// Offline profiling parameters.
#[derive(Debug, Clone, Copy)]
pub struct ProfilingConfig {
    /// Ambiguity threshold `D`: the entropy at which evidence switches from
    /// trustworthy to ambiguous.
    pub ambiguity_threshold: f64,
    /// Width of the slope neighborhood just above `D`.
    pub delta: f64,
}

impl ProfilingConfig {
    pub fn new(ambiguity_threshold: f64, delta: f64) -> Result<Self> {
        if !(ambiguity_threshold > 0.0 && ambiguity_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ambiguity threshold {ambiguity_threshold} outside (0, 1)"
            )));
        }
        if delta <= 0.0 || delta.is_nan() {
            return Err(Error::InvalidConfig(format!("delta {delta} must be > 0")));
        }
        if ambiguity_threshold + delta > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "threshold + delta = {} exceeds 1",
                ambiguity_threshold + delta
            )));
        }
        Ok(Self {
            ambiguity_threshold,
            delta,
        })
    }
}

impl Default for ProfilingConfig {
    fn default() -> Self {
        Self {
            ambiguity_threshold: 0.75,
            delta: 0.05,
        }
    }
}

/// Finds the two-bin vector `(p, 1-p)`, `p <= 0.5`, with the given
/// normalized entropy, by bisection on `p` where the entropy is strictly
/// increasing.
pub fn invert_binary_entropy(target: f64) -> Result<ScoringVector> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::OutOfRange(target));
    }
    if target == 1.0 {
        return ScoringVector::new(vec![0.5, 0.5]);
    }
    let entropy = |p: f64| {
        ScoringVector::new(vec![p, 1.0 - p])
            .unwrap()
            .normalized_entropy()
    };
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut mid = 0.25;
    for _ in 0..BISECT_ITERS {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at float resolution
        }
        if entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let result = ScoringVector::new(vec![mid, 1.0 - mid])?;
    debug_assert!((result.normalized_entropy() - target).abs() <= BISECT_TOL);
    Ok(result)
}

/// Arithmetic mean of the normalized entropy over a term population.
pub fn mean_intrinsic_entropy(population: &[ScoringVector]) -> Result<f64> {
    if population.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let sum: f64 = population
        .iter()
        .map(ScoringVector::normalized_entropy)
        .sum();
    Ok(sum / population.len() as f64)
}

/// Evidence weight that balances a two-bin prior against two-bin evidence of
/// the given entropy: `lambda / (1 + lambda)` with
/// `lambda = |x1 - x2| / |y1 - y2|`.
///
/// At `entropy_target = 1` the evidence is flat and the ratio degenerates;
/// by convention the weight is 0 there, matching the `(1, 0)` corner
/// constraint the weighting curve is anchored to.
pub fn balance_threshold(prior2: &ScoringVector, entropy_target: f64) -> Result<f64> {
    if prior2.k() != 2 {
        return Err(Error::DimensionMismatch(prior2.k(), 2));
    }
    if !(entropy_target > 0.0 && entropy_target <= 1.0) {
        return Err(Error::OutOfRange(entropy_target));
    }
    if entropy_target == 1.0 {
        return Ok(0.0);
    }
    let evidence = invert_binary_entropy(entropy_target)?;
    let dx = (prior2.get(0) - prior2.get(1)).abs();
    let dy = (evidence.get(0) - evidence.get(1)).abs();
    let lambda = dx / dy;
    Ok(lambda / (1.0 + lambda))
}

/// Builds the constraint set for a two-bin prior: corners, the intercept
/// `(D, w(D))`, and the inverse-slope point `(D+delta, w(D) - delta/m)` with
/// `m = |w(D+delta) - w(D)| / delta`.
///
/// The inverse-slope target is clamped into `[0, 1]`; a flat threshold curve
/// (`m = 0`) drops the slope point and returns the three-point set.
pub fn build_constraints(cfg: &ProfilingConfig, prior2: &ScoringVector) -> Result<ConstraintSet> {
    let d = cfg.ambiguity_threshold;
    let w_d = balance_threshold(prior2, d)?;
    let w_dd = balance_threshold(prior2, d + cfg.delta)?;
    let slope = (w_dd - w_d).abs() / cfg.delta;
    let mut points = vec![(0.0, 1.0), (1.0, 0.0), (d, w_d)];
    if slope > 1e-15 {
        let w_slope = (w_d - cfg.delta / slope).clamp(0.0, 1.0);
        points.push((d + cfg.delta, w_slope));
    }
    ConstraintSet::new(points)
}

/// Result of a least-squares curve fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFit {
    pub beta0: f64,
    pub beta: f64,
    /// Sum of squared residuals over the constraint points.
    pub lack_of_fit: f64,
}

fn logistic(beta0: f64, beta: f64, a: f64) -> f64 {
    let z = (beta0 - beta * a).clamp(-700.0, 700.0);
    1.0 / (1.0 + (-z).exp())
}

fn logit_objective(points: &[(f64, f64)], beta0: f64, beta: f64) -> f64 {
    points
        .iter()
        .map(|&(a, b)| {
            let r = b - logistic(beta0, beta, a);
            r * r
        })
        .sum()
}

/// Derivative-free Nelder-Mead descent on the two logit parameters,
/// projected into `(0, PARAM_MAX]`. Deterministic for a given start.
fn nelder_mead(points: &[(f64, f64)], start: (f64, f64)) -> (f64, f64, f64) {
    let clamp = |p: (f64, f64)| {
        (
            p.0.clamp(PARAM_MIN, PARAM_MAX),
            p.1.clamp(PARAM_MIN, PARAM_MAX),
        )
    };
    let f = |p: (f64, f64)| {
        let p = clamp(p);
        logit_objective(points, p.0, p.1)
    };
    let mut simplex = [
        start,
        (start.0 * 1.08 + 0.5, start.1),
        (start.0, start.1 * 1.08 + 0.5),
    ];
    let mut values = simplex.map(f);

    for _ in 0..800 {
        // Order best -> worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        if (values[w] - values[b]).abs() <= 1e-14 * (values[b].abs() + 1e-30) {
            break;
        }
        let centroid = (
            (simplex[b].0 + simplex[m].0) / 2.0,
            (simplex[b].1 + simplex[m].1) / 2.0,
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[w].0),
            centroid.1 + (centroid.1 - simplex[w].1),
        );
        let fr = f(reflect);
        if fr < values[b] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - simplex[w].0),
                centroid.1 + 2.0 * (centroid.1 - simplex[w].1),
            );
            let fe = f(expand);
            if fe < fr {
                simplex[w] = expand;
                values[w] = fe;
            } else {
                simplex[w] = reflect;
                values[w] = fr;
            }
        } else if fr < values[m] {
            simplex[w] = reflect;
            values[w] = fr;
        } else {
            let contract = (
                centroid.0 + 0.5 * (simplex[w].0 - centroid.0),
                centroid.1 + 0.5 * (simplex[w].1 - centroid.1),
            );
            let fc = f(contract);
            if fc < values[w] {
                simplex[w] = contract;
                values[w] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 0..3 {
                    if i != b {
                        simplex[i] = (
                            simplex[b].0 + 0.5 * (simplex[i].0 - simplex[b].0),
                            simplex[b].1 + 0.5 * (simplex[i].1 - simplex[b].1),
                        );
                        values[i] = f(simplex[i]);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    let p = clamp(simplex[best]);
    (p.0, p.1, values[best])
}

/// Least-squares fit of the logit curve to a constraint set.
///
/// Deterministic multi-start: 32 starting slopes log-spaced over
/// `[1, PARAM_MAX]`, each refined by Nelder-Mead; the first strictly best
/// minimizer wins. The objective is extremely flat near its optima, so
/// the achieved lack of fit and the curve through the constraints are the
/// meaningful outputs, not the exact parameter pair.
pub fn fit_logit(constraints: &ConstraintSet) -> Result<CurveFit> {
    let points = constraints.points();
    let mid = constraints.interior_entropy().unwrap_or(0.5);
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..32 {
        let exponent = PARAM_MAX.log10() * i as f64 / 31.0;
        let beta0 = 10f64.powf(exponent);
        let start = (beta0, (beta0 / mid).min(PARAM_MAX));
        let candidate = nelder_mead(points, start);
        let better = match best {
            None => true,
            Some((_, _, l)) => candidate.2 < l,
        };
        if better {
            best = Some(candidate);
        }
    }
    let (beta0, beta, lack_of_fit) = best.expect("at least one start");
    if lack_of_fit > LACK_OF_FIT_LIMIT {
        return Err(Error::NoConvergence(lack_of_fit));
    }
    Ok(CurveFit {
        beta0,
        beta,
        lack_of_fit,
    })
}

/// Closed-form least squares for the affine model `f(a) = beta0 - beta*a`.
pub fn fit_linear(constraints: &ConstraintSet) -> CurveFit {
    let points = constraints.points();
    let n = points.len() as f64;
    let mean_a: f64 = points.iter().map(|&(a, _)| a).sum::<f64>() / n;
    let mean_b: f64 = points.iter().map(|&(_, b)| b).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|&(a, _)| (a - mean_a).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|&(a, b)| (a - mean_a) * (b - mean_b))
        .sum();
    // The corners guarantee sxx > 0.
    let slope = sxy / sxx;
    let intercept = mean_b - slope * mean_a;
    let lack_of_fit = points
        .iter()
        .map(|&(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    CurveFit {
        beta0: intercept,
        beta: -slope,
        lack_of_fit,
    }
}

/// Everything the offline profiling run produced, for reporting and for the
/// query-time profile itself.
#[derive(Debug, Clone)]
pub struct ProfilingReport {
    pub mean_entropy: f64,
    /// Two-bin stand-in for the intrinsic source, `(p, 1-p)` with `p <= 0.5`.
    pub prior: ScoringVector,
    /// Balance weight at the ambiguity threshold.
    pub balance_weight: f64,
    /// Inverse-slope target at `D + delta`; absent when the threshold curve
    /// was flat and the slope point was dropped.
    pub slope_weight: Option<f64>,
    pub constraints: ConstraintSet,
    pub fit: CurveFit,
    pub profile: WeightingProfile,
}

/// Runs the full offline calibration over an intrinsic term population.
pub fn priors_profiling(
    cfg: &ProfilingConfig,
    population: &[ScoringVector],
) -> Result<ProfilingReport> {
    let mean_entropy = mean_intrinsic_entropy(population)?;
    // A population of one-hot vectors has mean entropy exactly 0, outside
    // the inversion domain; the matching two-bin stand-in is one-hot too.
    let prior = if mean_entropy == 0.0 {
        ScoringVector::new(vec![0.0, 1.0])?
    } else {
        invert_binary_entropy(mean_entropy)?
    };
    let constraints = build_constraints(cfg, &prior)?;
    let balance_weight = constraints.points()[2].1;
    let slope_weight = constraints.points().get(3).map(|&(_, b)| b);
    let fit = fit_logit(&constraints)?;
    let profile = WeightingProfile::logit(fit.beta0, fit.beta)?;
    Ok(ProfilingReport {
        mean_entropy,
        prior,
        balance_weight,
        slope_weight,
        constraints,
        fit,
        profile,
    })
}
