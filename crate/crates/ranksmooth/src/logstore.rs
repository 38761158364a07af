//! Persistent datasets: the type catalog, intrinsic scorings, feedback count
//! logs, and golden answers.
//!
//! All four live as flat comma-separated text, one row per (term, option):
//! `term_id,option_index,value` with a mandatory header and 1-based option
//! indices. Lines starting with `#` before the header carry `# key: value`
//! metadata (provenance, generator, seed); later `#` lines are comments.
//! Saves go through a temp file and rename, so readers never see a partial
//! file.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::vector::{CountsVector, ScoringVector};

const HEADER: &str = "term_id,option_index,value";

/// Intrinsic probabilities are accepted when a term's row sum lands in this
/// band (upstream scores often arrive rounded, e.g. percentages summing to
/// 99.99%), then renormalized. Sums outside the band are data errors.
const INTRINSIC_SUM_BAND: (f64, f64) = (0.98, 1.02);

/// Where a feedback log came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Implicit,
    Random,
    Simulated,
}

impl Provenance {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "explicit" => Some(Self::Explicit),
            "implicit" => Some(Self::Implicit),
            "random" => Some(Self::Random),
            "simulated" => Some(Self::Simulated),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Explicit => "explicit",
            Self::Implicit => "implicit",
            Self::Random => "random",
            Self::Simulated => "simulated",
        };
        f.write_str(s)
    }
}

/// Ordered option labels per term. Option order is the catalog order; every
/// other dataset aligns to it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeCatalog {
    terms: IndexMap<String, Vec<String>>,
}

impl TypeCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, options: Vec<String>) -> Result<()> {
        if options.len() < 2 {
            return Err(Error::TooFewBins(options.len()));
        }
        let mut seen = options.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != options.len() {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}' has duplicate option labels"
            )));
        }
        self.terms.insert(term.to_string(), options);
        Ok(())
    }

    pub fn k(&self, term: &str) -> Option<usize> {
        self.terms.get(term).map(Vec::len)
    }

    pub fn options(&self, term: &str) -> Option<&[String]> {
        self.terms.get(term).map(Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains_key(term)
    }
}

/// Per-term intrinsic scoring vectors, aligned to the catalog.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntrinsicScores {
    scores: IndexMap<String, ScoringVector>,
}

impl IntrinsicScores {
    pub fn insert(&mut self, term: &str, scores: ScoringVector) {
        self.scores.insert(term.to_string(), scores);
    }

    pub fn get(&self, term: &str) -> Option<&ScoringVector> {
        self.scores.get(term)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ScoringVector)> {
        self.scores.iter().map(|(t, v)| (t.as_str(), v))
    }

    pub fn vectors(&self) -> Vec<ScoringVector> {
        self.scores.values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Append-only per-term feedback counts. Ingestion only ever increments.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackLog {
    counts: IndexMap<String, CountsVector>,
    pub provenance: Provenance,
}

impl FeedbackLog {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            counts: IndexMap::new(),
            provenance,
        }
    }

    pub fn get(&self, term: &str) -> Option<&CountsVector> {
        self.counts.get(term)
    }

    /// Counts for a term, falling back to an all-zero vector of the right
    /// width for terms never seen in the log.
    pub fn counts_or_empty(&self, catalog: &TypeCatalog, term: &str) -> Result<CountsVector> {
        match self.counts.get(term) {
            Some(c) => Ok(c.clone()),
            None => {
                let k = catalog
                    .k(term)
                    .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
                CountsVector::zeros(k)
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CountsVector)> {
        self.counts.iter().map(|(t, v)| (t.as_str(), v))
    }

    pub fn insert(&mut self, term: &str, counts: CountsVector) {
        self.counts.insert(term.to_string(), counts);
    }

    fn row_mut(&mut self, catalog: &TypeCatalog, term: &str) -> Result<&mut CountsVector> {
        let k = catalog
            .k(term)
            .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
        if let Some(existing) = self.counts.get(term) {
            if existing.k() != k {
                return Err(Error::SchemaMismatch(format!(
                    "term '{term}' has {} options in the log but {k} in the catalog",
                    existing.k()
                )));
            }
        } else {
            self.counts
                .insert(term.to_string(), CountsVector::zeros(k)?);
        }
        Ok(self.counts.get_mut(term).unwrap())
    }

    /// Records one explicit-feedback session: every selected option (0-based)
    /// gains one count. Multi-choice, at least one selection required.
    pub fn ingest_explicit(
        &mut self,
        catalog: &TypeCatalog,
        term: &str,
        selections: &[usize],
    ) -> Result<()> {
        if selections.is_empty() {
            return Err(Error::EmptySelection);
        }
        let k = catalog
            .k(term)
            .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
        for &s in selections {
            if s >= k {
                return Err(Error::BadIndex {
                    term: term.to_string(),
                    index: s + 1,
                    k,
                });
            }
        }
        let row = self.row_mut(catalog, term)?;
        for &s in selections {
            row.increment(s);
        }
        Ok(())
    }

    /// Records one implicit-feedback session: exactly one option (0-based)
    /// gains one count, whether the user kept the default or changed it.
    pub fn ingest_implicit(
        &mut self,
        catalog: &TypeCatalog,
        term: &str,
        chosen: usize,
    ) -> Result<()> {
        let k = catalog
            .k(term)
            .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
        if chosen >= k {
            return Err(Error::BadIndex {
                term: term.to_string(),
                index: chosen + 1,
                k,
            });
        }
        self.row_mut(catalog, term)?.increment(chosen);
        Ok(())
    }
}

/// Relevant option per term (0-based); the benchmark keys are singletons.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerKey {
    answers: IndexMap<String, usize>,
}

impl AnswerKey {
    pub fn insert(&mut self, term: &str, option: usize) {
        self.answers.insert(term.to_string(), option);
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.answers.get(term).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.answers.iter().map(|(t, &o)| (t.as_str(), o))
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

struct RawFile {
    metadata: Vec<(String, String)>,
    /// (line number, term, option index 1-based or None, value)
    rows: Vec<(usize, String, Option<usize>, String)>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn read_rows(path: &Path) -> Result<RawFile> {
    let text = std::fs::read_to_string(path)?;
    let mut metadata = Vec::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !header_seen {
                if let Some((key, value)) = rest.split_once(':') {
                    metadata.push((key.trim().to_string(), value.trim().to_string()));
                }
            }
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected header '{HEADER}', got '{line}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 3 comma-separated fields, got {}", fields.len()),
            ));
        }
        let term = fields[0].trim().to_string();
        if term.is_empty() {
            return Err(parse_err(path, lineno, "empty term_id"));
        }
        let index: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad option_index '{}'", fields[1])))?;
        if index == 0 {
            return Err(parse_err(path, lineno, "option_index is 1-based"));
        }
        rows.push((lineno, term, Some(index), fields[2].trim().to_string()));
    }
    if !header_seen {
        return Err(parse_err(path, 1, format!("missing header '{HEADER}'")));
    }
    Ok(RawFile { metadata, rows })
}

/// Per-term rows: (line number, raw value) in option order.
type TermRows = Vec<(String, Vec<(usize, String)>)>;

/// Groups rows by term, requiring each term's options to be exactly
/// 1..=k in order of appearance.
fn group_rows(path: &Path, raw: &RawFile) -> Result<TermRows> {
    let mut grouped: IndexMap<String, Vec<(usize, usize, String)>> = IndexMap::new();
    for (lineno, term, index, value) in &raw.rows {
        grouped
            .entry(term.clone())
            .or_default()
            .push((*lineno, index.unwrap(), value.clone()));
    }
    let mut out = Vec::with_capacity(grouped.len());
    for (term, mut rows) in grouped {
        rows.sort_by_key(|&(_, idx, _)| idx);
        for (pos, &(lineno, idx, _)) in rows.iter().enumerate() {
            if idx != pos + 1 {
                return Err(parse_err(
                    path,
                    lineno,
                    format!(
                        "term '{term}': expected option_index {}, got {idx}",
                        pos + 1
                    ),
                ));
            }
        }
        out.push((term, rows.into_iter().map(|(l, _, v)| (l, v)).collect()));
    }
    Ok(out)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<TypeCatalog> {
    let path = path.as_ref();
    let raw = read_rows(path)?;
    let mut catalog = TypeCatalog::new();
    for (term, rows) in group_rows(path, &raw)? {
        let labels: Vec<String> = rows.into_iter().map(|(_, v)| v).collect();
        if labels.len() < 2 {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}' has fewer than 2 options"
            )));
        }
        catalog.insert(&term, labels)?;
    }
    Ok(catalog)
}

pub fn save_catalog(catalog: &TypeCatalog, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for term in catalog.terms() {
        for (i, label) in catalog.options(term).unwrap().iter().enumerate() {
            out.push_str(&format!("{term},{},{label}\n", i + 1));
        }
    }
    write_atomic(path.as_ref(), &out)
}

pub fn load_intrinsic(path: impl AsRef<Path>, catalog: &TypeCatalog) -> Result<IntrinsicScores> {
    let path = path.as_ref();
    let raw = read_rows(path)?;
    let mut scores = IntrinsicScores::default();
    for (term, rows) in group_rows(path, &raw)? {
        let k = catalog.k(&term).ok_or_else(|| {
            Error::SchemaMismatch(format!("intrinsic term '{term}' not in catalog"))
        })?;
        if rows.len() != k {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}': {} intrinsic rows for {k} catalog options",
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(k);
        for (lineno, v) in &rows {
            let p: f64 = v
                .parse()
                .map_err(|_| parse_err(path, *lineno, format!("bad probability '{v}'")))?;
            if !p.is_finite() || p < 0.0 {
                return Err(parse_err(
                    path,
                    *lineno,
                    format!("negative probability {p}"),
                ));
            }
            values.push(p);
        }
        let sum: f64 = values.iter().sum();
        if !(INTRINSIC_SUM_BAND.0..=INTRINSIC_SUM_BAND.1).contains(&sum) {
            return Err(parse_err(
                path,
                rows[0].0,
                format!("term '{term}': probabilities sum to {sum}, outside [0.98, 1.02]"),
            ));
        }
        scores.insert(&term, ScoringVector::normalized(values)?);
    }
    Ok(scores)
}

pub fn save_intrinsic(scores: &IntrinsicScores, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (term, v) in scores.iter() {
        for (i, p) in v.values().iter().enumerate() {
            out.push_str(&format!("{term},{},{p}\n", i + 1));
        }
    }
    write_atomic(path.as_ref(), &out)
}

/// Loads a feedback log; extra metadata lines (generator, seed, ...) are
/// returned alongside so tools can report provenance faithfully.
pub fn load_feedback(path: impl AsRef<Path>, catalog: &TypeCatalog) -> Result<FeedbackLog> {
    let path = path.as_ref();
    let raw = read_rows(path)?;
    let provenance = raw
        .metadata
        .iter()
        .find(|(k, _)| k == "provenance")
        .and_then(|(_, v)| Provenance::parse(v))
        .unwrap_or(Provenance::Explicit);
    let mut log = FeedbackLog::new(provenance);
    for (term, rows) in group_rows(path, &raw)? {
        let k = catalog.k(&term).ok_or_else(|| {
            Error::SchemaMismatch(format!("feedback term '{term}' not in catalog"))
        })?;
        if rows.len() != k {
            return Err(Error::SchemaMismatch(format!(
                "term '{term}': {} feedback rows for {k} catalog options",
                rows.len()
            )));
        }
        let mut counts = Vec::with_capacity(k);
        for (lineno, v) in &rows {
            let c: u64 = v
                .parse()
                .map_err(|_| parse_err(path, *lineno, format!("bad count '{v}'")))?;
            counts.push(c);
        }
        log.insert(&term, CountsVector::new(counts)?);
    }
    Ok(log)
}

/// Saves a feedback log with its provenance tag and any extra metadata
/// (written as `# key: value` lines above the header).
pub fn save_feedback(
    log: &FeedbackLog,
    extra_metadata: &[(String, String)],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = format!("# provenance: {}\n", log.provenance);
    for (k, v) in extra_metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(HEADER);
    out.push('\n');
    for (term, counts) in log.iter() {
        for (i, c) in counts.counts().iter().enumerate() {
            out.push_str(&format!("{term},{},{c}\n", i + 1));
        }
    }
    write_atomic(path.as_ref(), &out)
}

pub fn load_answers(path: impl AsRef<Path>, catalog: &TypeCatalog) -> Result<AnswerKey> {
    let path = path.as_ref();
    let raw = read_rows(path)?;
    let mut key = AnswerKey::default();
    for (lineno, term, index, _value) in &raw.rows {
        let k = catalog
            .k(term)
            .ok_or_else(|| Error::SchemaMismatch(format!("answer term '{term}' not in catalog")))?;
        let idx = index.unwrap();
        if idx > k {
            return Err(parse_err(
                path,
                *lineno,
                format!("term '{term}': answer option {idx} out of range 1..={k}"),
            ));
        }
        if key.get(term).is_some() {
            return Err(parse_err(
                path,
                *lineno,
                format!("term '{term}' has more than one answer; keys are singletons"),
            ));
        }
        key.insert(term, idx - 1);
    }
    Ok(key)
}

pub fn save_answers(key: &AnswerKey, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (term, option) in key.iter() {
        out.push_str(&format!("{term},{},1\n", option + 1));
    }
    write_atomic(path.as_ref(), &out)
}

/// Query groupings for query-level evaluation: `query_id,term_id` rows.
pub fn load_queries(
    path: impl AsRef<Path>,
    catalog: &TypeCatalog,
) -> Result<Vec<(String, Vec<String>)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut groups: IndexMap<String, Vec<String>> = IndexMap::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != "query_id,term_id" {
                return Err(parse_err(
                    path,
                    lineno,
                    "expected header 'query_id,term_id'",
                ));
            }
            header_seen = true;
            continue;
        }
        let (query, term) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, lineno, "expected query_id,term_id"))?;
        if !catalog.contains(term.trim()) {
            return Err(Error::SchemaMismatch(format!(
                "query term '{}' not in catalog",
                term.trim()
            )));
        }
        groups
            .entry(query.trim().to_string())
            .or_default()
            .push(term.trim().to_string());
    }
    Ok(groups.into_iter().collect())
}
