//! Accuracy metrics against the golden answer key: P@1, mean reciprocal
//! rank, entropy-range histograms, strategy comparison, and the projection
//! of term-level metrics onto whole queries.
//!
//! Rankings sort scores descending with ties broken by ascending option
//! index, so every report is reproducible byte for byte given the same
//! inputs.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::logstore::{AnswerKey, FeedbackLog, IntrinsicScores, TypeCatalog};
use crate::smoothing::smooth;
use crate::vector::ScoringVector;
use crate::weighting::WeightingProfile;

/// A scored, ranked set of options for one term.
#[derive(Debug, Clone)]
pub struct RankedResult {
    pub term_id: String,
    pub posterior: ScoringVector,
    /// Option indices (0-based), best first.
    pub ranking: Vec<usize>,
}

impl RankedResult {
    pub fn new(term_id: impl Into<String>, posterior: ScoringVector) -> Self {
        let ranking = rank_options(&posterior);
        Self {
            term_id: term_id.into(),
            posterior,
            ranking,
        }
    }
}

/// Descending by score, ascending by option index on ties.
pub fn rank_options(scores: &ScoringVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.k()).collect();
    order.sort_by(|&a, &b| {
        scores
            .get(b)
            .partial_cmp(&scores.get(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

/// 1 when the top-ranked option is the relevant one.
pub fn precision_at_1(result: &RankedResult, key: &AnswerKey) -> Result<u32> {
    let relevant = key
        .get(&result.term_id)
        .ok_or_else(|| Error::UnknownTerm(result.term_id.clone()))?;
    Ok(u32::from(result.ranking[0] == relevant))
}

/// Reciprocal of the relevant option's rank position.
pub fn reciprocal_rank(result: &RankedResult, key: &AnswerKey) -> Result<f64> {
    let relevant = key
        .get(&result.term_id)
        .ok_or_else(|| Error::UnknownTerm(result.term_id.clone()))?;
    let position = result
        .ranking
        .iter()
        .position(|&o| o == relevant)
        .expect("ranking is a permutation");
    Ok(1.0 / (position + 1) as f64)
}

/// Mean reciprocal rank over a result set.
pub fn mrr(results: &[RankedResult], key: &AnswerKey) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut sum = 0.0;
    for r in results {
        sum += reciprocal_rank(r, key)?;
    }
    Ok(sum / results.len() as f64)
}

/// One entropy range of the histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBucket {
    pub size: usize,
    pub hits: usize,
    pub entropy_min: f64,
    pub entropy_max: f64,
}

const HISTOGRAM_BUCKETS: usize = 5;

/// Buckets terms by ascending vector entropy into five contiguous ranges
/// (smaller ranges first, sizes differing by at most one) and counts P@1
/// hits per range.
///
/// Equal-entropy terms order by term id, keeping the split deterministic.
pub fn entropy_histogram(items: &[(&str, &ScoringVector, bool)]) -> Result<Vec<HistogramBucket>> {
    let n = items.len();
    if n < HISTOGRAM_BUCKETS {
        return Err(Error::TooFewTerms {
            got: n,
            need: HISTOGRAM_BUCKETS,
        });
    }
    let mut rows: Vec<(f64, &str, bool)> = items
        .iter()
        .map(|&(term, v, hit)| (v.normalized_entropy(), term, hit))
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));

    let base = n / HISTOGRAM_BUCKETS;
    let remainder = n % HISTOGRAM_BUCKETS;
    let mut buckets = Vec::with_capacity(HISTOGRAM_BUCKETS);
    let mut start = 0;
    for i in 0..HISTOGRAM_BUCKETS {
        // The larger buckets go last: n = 62 splits 12,12,12,13,13.
        let size = base + usize::from(i >= HISTOGRAM_BUCKETS - remainder);
        let chunk = &rows[start..start + size];
        buckets.push(HistogramBucket {
            size,
            hits: chunk.iter().filter(|&&(_, _, hit)| hit).count(),
            entropy_min: chunk.first().map(|r| r.0).unwrap_or(0.0),
            entropy_max: chunk.last().map(|r| r.0).unwrap_or(0.0),
        });
        start += size;
    }
    Ok(buckets)
}

/// The five ranking strategies compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Intrinsic scores only; feedback ignored.
    Intr,
    Mle,
    Step,
    Linear,
    Logit,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Intr,
        Strategy::Mle,
        Strategy::Step,
        Strategy::Linear,
        Strategy::Logit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Intr => "intr",
            Self::Mle => "mle",
            Self::Step => "step",
            Self::Linear => "linear",
            Self::Logit => "logit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "intr" => Some(Self::Intr),
            "mle" => Some(Self::Mle),
            "step" => Some(Self::Step),
            "linear" => Some(Self::Linear),
            "logit" => Some(Self::Logit),
            _ => None,
        }
    }
}

/// Aggregate accuracy of one strategy.
#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub strategy: Strategy,
    /// `None` when the strategy was skipped (evidence-only ranking is
    /// undefined on empty logs).
    pub p_at_1: Option<f64>,
    pub mrr: Option<f64>,
    pub skipped: Option<String>,
}

/// Full comparison report plus per-term detail for the logit strategy.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub rows: Vec<StrategyReport>,
    /// Per-term (hit, reciprocal rank) for each strategy, in catalog order.
    pub per_term: IndexMap<String, Vec<(Strategy, u32, f64)>>,
}

impl EvalReport {
    pub fn row(&self, strategy: Strategy) -> &StrategyReport {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy)
            .expect("all strategies reported")
    }
}

/// Posterior for one term under one strategy.
pub fn strategy_posterior(
    strategy: Strategy,
    x: &ScoringVector,
    n: &crate::vector::CountsVector,
    step_threshold: f64,
    logit: &WeightingProfile,
) -> Result<ScoringVector> {
    let profile = match strategy {
        Strategy::Intr => return Ok(x.clone()),
        Strategy::Mle => WeightingProfile::Mle,
        Strategy::Step => WeightingProfile::step(step_threshold)?,
        Strategy::Linear => WeightingProfile::Linear,
        Strategy::Logit => *logit,
    };
    Ok(smooth(x, n, &profile)?.posterior)
}

/// Runs every strategy over the aligned datasets and aggregates P@1 and MRR.
///
/// The MLE row is skipped (not failed) when any term's log is empty:
/// evidence-only ranking is undefined there, while the other strategies fall
/// back to the prior.
pub fn compare_strategies(
    catalog: &TypeCatalog,
    intrinsic: &IntrinsicScores,
    feedback: &FeedbackLog,
    answers: &AnswerKey,
    logit: &WeightingProfile,
    step_threshold: f64,
) -> Result<EvalReport> {
    let terms: Vec<&str> = catalog.terms().collect();
    if terms.is_empty() {
        return Err(Error::EmptyResults);
    }
    for term in &terms {
        if intrinsic.get(term).is_none() {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}' missing from the intrinsic dataset"
            )));
        }
        if answers.get(term).is_none() {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}' missing from the answer key"
            )));
        }
    }
    let any_empty_log = terms
        .iter()
        .map(|t| feedback.counts_or_empty(catalog, t))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .any(|c| c.total() == 0);

    let mut rows = Vec::new();
    let mut per_term: IndexMap<String, Vec<(Strategy, u32, f64)>> =
        terms.iter().map(|t| (t.to_string(), Vec::new())).collect();
    for strategy in Strategy::ALL {
        if strategy == Strategy::Mle && any_empty_log {
            rows.push(StrategyReport {
                strategy,
                p_at_1: None,
                mrr: None,
                skipped: Some("evidence-only ranking undefined on empty feedback logs".into()),
            });
            continue;
        }
        let mut hits = 0u32;
        let mut rr_sum = 0.0;
        for term in &terms {
            let x = intrinsic.get(term).unwrap();
            let n = feedback.counts_or_empty(catalog, term)?;
            let posterior = strategy_posterior(strategy, x, &n, step_threshold, logit)?;
            let result = RankedResult::new(*term, posterior);
            let hit = precision_at_1(&result, answers)?;
            let rr = reciprocal_rank(&result, answers)?;
            hits += hit;
            rr_sum += rr;
            per_term.get_mut(*term).unwrap().push((strategy, hit, rr));
        }
        rows.push(StrategyReport {
            strategy,
            p_at_1: Some(hits as f64 / terms.len() as f64),
            mrr: Some(rr_sum / terms.len() as f64),
            skipped: None,
        });
    }
    Ok(EvalReport { rows, per_term })
}

/// Query-level accuracy for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryProjection {
    pub query_id: String,
    pub p_at_1: u32,
    pub reciprocal_rank: f64,
}

/// Projects term metrics onto whole queries: a query scores P@1 = 1 only if
/// every term in it does; otherwise its reciprocal rank is the least over
/// its terms.
pub fn project_query_level(groups: &[(String, Vec<(u32, f64)>)]) -> Result<Vec<QueryProjection>> {
    let mut out = Vec::with_capacity(groups.len());
    for (query_id, terms) in groups {
        if terms.is_empty() {
            return Err(Error::EmptyQuery(query_id.clone()));
        }
        let all_hit = terms.iter().all(|&(hit, _)| hit == 1);
        let rr = if all_hit {
            1.0
        } else {
            terms
                .iter()
                .map(|&(_, rr)| rr)
                .fold(f64::INFINITY, f64::min)
        };
        out.push(QueryProjection {
            query_id: query_id.clone(),
            p_at_1: u32::from(all_hit),
            reciprocal_rank: rr,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::CountsVector;

    fn intrinsic_example() -> RankedResult {
        let v = ScoringVector::normalized(vec![0.2793, 0.2346, 0.2207, 0.1508, 0.1145]).unwrap();
        RankedResult::new("tom hanks", v)
    }

    fn key_for(term: &str, option: usize) -> AnswerKey {
        let mut key = AnswerKey::default();
        key.insert(term, option);
        key
    }

    #[test]
    fn p_at_1_and_rr_on_the_running_example() {
        let result = intrinsic_example();
        let key = key_for("tom hanks", 1);
        // Relevant option sits at rank 2.
        assert_eq!(precision_at_1(&result, &key).unwrap(), 0);
        assert_eq!(reciprocal_rank(&result, &key).unwrap(), 0.5);
    }

    #[test]
    fn rank_extremes() {
        let key = key_for("t", 2);
        let top = RankedResult::new("t", ScoringVector::one_hot(5, 2).unwrap());
        assert_eq!(precision_at_1(&top, &key).unwrap(), 1);
        assert_eq!(reciprocal_rank(&top, &key).unwrap(), 1.0);

        let worst = RankedResult::new(
            "t",
            ScoringVector::new(vec![0.3, 0.25, 0.05, 0.22, 0.18]).unwrap(),
        );
        assert_eq!(reciprocal_rank(&worst, &key).unwrap(), 0.2);
    }

    #[test]
    fn ties_break_toward_lower_option_index() {
        // Relevant option 2 (1-based) ties with option 1 at the top; the tie
        // rule ranks option 1 first, so P@1 is 0.
        let v = ScoringVector::new(vec![0.4, 0.4, 0.2]).unwrap();
        let result = RankedResult::new("t", v);
        assert_eq!(result.ranking, vec![0, 1, 2]);
        let key = key_for("t", 1);
        assert_eq!(precision_at_1(&result, &key).unwrap(), 0);
        assert_eq!(reciprocal_rank(&result, &key).unwrap(), 0.5);
    }

    #[test]
    fn unknown_term_is_an_error() {
        let result = intrinsic_example();
        let key = key_for("other", 0);
        assert!(matches!(
            precision_at_1(&result, &key),
            Err(Error::UnknownTerm(_))
        ));
    }

    #[test]
    fn mrr_arithmetic() {
        let mut key = AnswerKey::default();
        key.insert("a", 0);
        key.insert("b", 1);
        let results = vec![
            RankedResult::new("a", ScoringVector::new(vec![0.6, 0.3, 0.1]).unwrap()),
            RankedResult::new("b", ScoringVector::new(vec![0.6, 0.3, 0.1]).unwrap()),
        ];
        // RRs are 1 and 1/2.
        assert_eq!(mrr(&results, &key).unwrap(), 0.75);
        assert!(matches!(mrr(&[], &key), Err(Error::EmptyResults)));
    }

    #[test]
    fn mrr_reciprocal_rank_consistency() {
        // With singleton keys, RR = 1 exactly when P@1 = 1.
        let key = key_for("t", 3);
        for values in [
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.4, 0.3, 0.2, 0.1],
            vec![0.25, 0.25, 0.25, 0.25],
        ] {
            let r = RankedResult::new("t", ScoringVector::new(values).unwrap());
            let hit = precision_at_1(&r, &key).unwrap();
            let rr = reciprocal_rank(&r, &key).unwrap();
            assert_eq!(hit == 1, rr == 1.0);
            assert!(rr >= hit as f64);
        }
    }

    #[test]
    fn histogram_bucket_sizes() {
        let vectors: Vec<ScoringVector> = (0..62)
            .map(|i| {
                let p = 0.2 + 0.004 * i as f64;
                ScoringVector::normalized(vec![p, 0.2, 0.2, 0.2, 0.2]).unwrap()
            })
            .collect();
        let names: Vec<String> = (0..62).map(|i| format!("t{i:02}")).collect();
        let items: Vec<(&str, &ScoringVector, bool)> = names
            .iter()
            .zip(&vectors)
            .map(|(n, v)| (n.as_str(), v, true))
            .collect();
        let buckets = entropy_histogram(&items).unwrap();
        let sizes: Vec<usize> = buckets.iter().map(|b| b.size).collect();
        assert_eq!(sizes, vec![12, 12, 12, 13, 13]);
        assert_eq!(sizes.iter().sum::<usize>(), 62);

        let ten: Vec<(&str, &ScoringVector, bool)> = items[..10].to_vec();
        let buckets = entropy_histogram(&ten).unwrap();
        assert_eq!(
            buckets.iter().map(|b| b.size).collect::<Vec<_>>(),
            vec![2; 5]
        );

        assert!(matches!(
            entropy_histogram(&items[..4]),
            Err(Error::TooFewTerms { got: 4, need: 5 })
        ));
    }

    #[test]
    fn histogram_orders_by_entropy() {
        let low = ScoringVector::new(vec![0.9, 0.1]).unwrap();
        let high = ScoringVector::new(vec![0.5, 0.5]).unwrap();
        let items = vec![
            ("h1", &high, false),
            ("l1", &low, true),
            ("h2", &high, false),
            ("l2", &low, true),
            ("l3", &low, true),
        ];
        let buckets = entropy_histogram(&items).unwrap();
        // Low-entropy hits land in the first buckets, misses in the last.
        assert_eq!(buckets[0].hits, 1);
        assert_eq!(buckets[4].hits, 0);
        assert!(buckets[4].entropy_min >= buckets[0].entropy_max);
    }

    #[test]
    fn query_projection_rules() {
        let groups = vec![
            ("q1".to_string(), vec![(1, 1.0), (1, 1.0)]),
            ("q2".to_string(), vec![(1, 1.0), (0, 0.5)]),
            ("q3".to_string(), vec![(0, 1.0 / 3.0)]),
            ("q4".to_string(), vec![(1, 1.0)]),
        ];
        let out = project_query_level(&groups).unwrap();
        assert_eq!(out[0].p_at_1, 1);
        assert_eq!(out[0].reciprocal_rank, 1.0);
        assert_eq!(out[1].p_at_1, 0);
        assert_eq!(out[1].reciprocal_rank, 0.5);
        assert_eq!(out[2].reciprocal_rank, 1.0 / 3.0);
        assert_eq!(out[3].p_at_1, 1);

        assert!(matches!(
            project_query_level(&[("q".to_string(), vec![])]),
            Err(Error::EmptyQuery(_))
        ));
    }

    fn tiny_world() -> (TypeCatalog, IntrinsicScores, AnswerKey) {
        let mut cat = TypeCatalog::new();
        let mut intr = IntrinsicScores::default();
        let mut key = AnswerKey::default();
        for (term, values, ans) in [
            ("t1", vec![0.5, 0.3, 0.2], 0),
            ("t2", vec![0.2, 0.5, 0.3], 2),
            ("t3", vec![0.4, 0.35, 0.25], 0),
        ] {
            cat.insert(term, ["A.a", "B.b", "C.c"].map(String::from).to_vec())
                .unwrap();
            intr.insert(term, ScoringVector::new(values).unwrap());
            key.insert(term, ans);
        }
        (cat, intr, key)
    }

    #[test]
    fn intr_strategy_ignores_feedback() {
        let (cat, intr, key) = tiny_world();
        let logit = WeightingProfile::logit(19.654, 27.994).unwrap();
        let mut fb1 = FeedbackLog::new(crate::logstore::Provenance::Implicit);
        let mut fb2 = FeedbackLog::new(crate::logstore::Provenance::Implicit);
        for t in ["t1", "t2", "t3"] {
            fb1.insert(t, CountsVector::new(vec![9, 1, 0]).unwrap());
            fb2.insert(t, CountsVector::new(vec![0, 1, 9]).unwrap());
        }
        let r1 = compare_strategies(&cat, &intr, &fb1, &key, &logit, 0.75).unwrap();
        let r2 = compare_strategies(&cat, &intr, &fb2, &key, &logit, 0.75).unwrap();
        assert_eq!(r1.row(Strategy::Intr).p_at_1, r2.row(Strategy::Intr).p_at_1);
        assert_eq!(r1.row(Strategy::Intr).mrr, r2.row(Strategy::Intr).mrr);
        // But the evidence-following strategies moved.
        assert_ne!(r1.row(Strategy::Mle).p_at_1, r2.row(Strategy::Mle).p_at_1);
    }

    #[test]
    fn empty_logs_reduce_to_intr_and_skip_mle() {
        let (cat, intr, key) = tiny_world();
        let logit = WeightingProfile::logit(19.654, 27.994).unwrap();
        let empty = FeedbackLog::new(crate::logstore::Provenance::Implicit);
        let report = compare_strategies(&cat, &intr, &empty, &key, &logit, 0.75).unwrap();
        let intr_row = report.row(Strategy::Intr);
        for s in [Strategy::Step, Strategy::Linear, Strategy::Logit] {
            assert_eq!(report.row(s).p_at_1, intr_row.p_at_1, "{s:?}");
            assert_eq!(report.row(s).mrr, intr_row.mrr, "{s:?}");
        }
        let mle = report.row(Strategy::Mle);
        assert!(mle.p_at_1.is_none());
        assert!(mle.skipped.is_some());
    }

    #[test]
    fn aggregate_mrr_dominates_p_at_1() {
        let (cat, intr, key) = tiny_world();
        let logit = WeightingProfile::logit(19.654, 27.994).unwrap();
        let mut fb = FeedbackLog::new(crate::logstore::Provenance::Implicit);
        for t in ["t1", "t2", "t3"] {
            fb.insert(t, CountsVector::new(vec![2, 5, 3]).unwrap());
        }
        let report = compare_strategies(&cat, &intr, &fb, &key, &logit, 0.75).unwrap();
        for row in &report.rows {
            if let (Some(p), Some(m)) = (row.p_at_1, row.mrr) {
                assert!(m >= p, "{:?}: mrr {m} < p@1 {p}", row.strategy);
            }
        }
    }
}
