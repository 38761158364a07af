//! Command-line front end: dataset management, offline profile fitting,
//! query-time smoothing, session simulation, and evaluation.
//!
//! Exit codes: 0 success, 2 I/O or parse failure, 3 unknown term/option,
//! 4 invalid strategy or configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ranksmooth::error::Error;
use ranksmooth::eval::{self, RankedResult, Strategy};
use ranksmooth::logstore::{
    load_answers, load_catalog, load_feedback, load_intrinsic, load_queries, save_feedback,
    FeedbackLog, Provenance,
};
use ranksmooth::profiling::{priors_profiling, ProfilingConfig, ProfilingReport};
use ranksmooth::simulate::{
    estimate_laziness, simulate_implicit, simulate_random, SessionModel, GENERATOR_ID,
};
use ranksmooth::smoothing::smooth;
use ranksmooth::vector::ScoringVector;
use ranksmooth::weighting::{ProfileDocument, WeightingProfile};

#[derive(Parser)]
#[command(
    name = "ranksmooth",
    about = "Learn query-term disambiguation from user-feedback logs via entropy-weighted Bayesian smoothing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// Type catalog file (term_id,option_index,value rows; value = label)
    #[arg(long)]
    catalog: PathBuf,
    /// Intrinsic scoring file (value = probability)
    #[arg(long)]
    intrinsic: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the logit weighting profile to an intrinsic dataset (offline)
    ProfileFit {
        #[command(flatten)]
        data: DatasetArgs,
        /// Ambiguity threshold D separating trustworthy from ambiguous evidence
        #[arg(long, default_value_t = 0.75)]
        ambiguity_threshold: f64,
        /// Slope neighborhood width just above the threshold
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Where to write the fitted profile document
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank one term's options from the prior and its feedback log
    Smooth {
        #[command(flatten)]
        data: DatasetArgs,
        /// Feedback count log (value = count)
        #[arg(long)]
        feedback: PathBuf,
        /// Fitted profile document (from profile-fit)
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Weighting strategy instead of a profile file
        #[arg(long, value_parser = ["intr", "mle", "step", "linear", "logit"])]
        strategy: Option<String>,
        #[arg(long, default_value_t = 0.75)]
        ambiguity_threshold: f64,
        /// Term to disambiguate
        term: String,
    },
    /// Generate a synthetic feedback log
    Simulate {
        /// Type catalog file
        #[arg(long)]
        catalog: PathBuf,
        /// Uniform-integer noise log (counts 0..=10 per option)
        #[arg(long, conflicts_with = "implicit")]
        random: bool,
        /// Session-model log (laziness + preference draws)
        #[arg(long)]
        implicit: bool,
        /// Intrinsic scoring file; supplies the default option per term
        #[arg(long)]
        intrinsic: Option<PathBuf>,
        /// Feedback file whose normalized counts serve as the per-term
        /// preference distribution (implicit mode)
        #[arg(long)]
        preference: Option<PathBuf>,
        /// Show the lowest-scored intrinsic option as the default instead of
        /// the top one
        #[arg(long)]
        bad_default: bool,
        /// Probability a session accepts the default regardless of correctness
        #[arg(long, default_value_t = 0.05)]
        laziness: f64,
        /// Session abandonment rate (recorded; does not gate logging)
        #[arg(long, default_value_t = 0.60)]
        alpha_abandon: f64,
        /// Sessions per term (implicit mode)
        #[arg(long, default_value_t = 10)]
        sessions: u64,
        /// PRNG seed; same seed, same log
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output feedback file
        #[arg(long)]
        out: PathBuf,
    },
    /// Record feedback events into a log file
    Ingest {
        /// Type catalog file
        #[arg(long)]
        catalog: PathBuf,
        /// Feedback log to update (created if missing)
        #[arg(long)]
        feedback: PathBuf,
        /// Multi-choice event: selections=<i,j,...> (1-based)
        #[arg(long, conflicts_with = "implicit")]
        explicit: bool,
        /// Single-choice event: choice=<i> (1-based)
        #[arg(long)]
        implicit: bool,
        /// Event fields: term=<id> plus choice=... or selections=...
        #[arg(value_name = "KEY=VALUE")]
        fields: Vec<String>,
    },
    /// Compare ranking strategies against the golden answers
    Evaluate {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        feedback: PathBuf,
        /// Golden answer key (one row per term)
        #[arg(long)]
        answers: PathBuf,
        /// Fitted profile; fitted on the fly from the intrinsic data if absent
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 0.75)]
        ambiguity_threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Write the feedback entropy-range histogram here
        #[arg(long)]
        histogram: Option<PathBuf>,
        /// Query grouping file (query_id,term_id); adds query-level metrics
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the laziness rate from explicit and implicit logs
    Laziness {
        #[command(flatten)]
        data: DatasetArgs,
        /// Explicit feedback log (the baseline selection rates)
        #[arg(long)]
        explicit: PathBuf,
        /// Implicit feedback log (default acceptance rates)
        #[arg(long)]
        implicit: PathBuf,
        /// The defaults shown were the lowest-scored intrinsic options
        #[arg(long)]
        bad_default: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } | Error::SchemaMismatch(_) => 2,
        Error::UnknownTerm(_) | Error::BadIndex { .. } => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ProfileFit {
            data,
            ambiguity_threshold,
            delta,
            out,
        } => profile_fit(data, ambiguity_threshold, delta, out),
        Command::Smooth {
            data,
            feedback,
            profile,
            strategy,
            ambiguity_threshold,
            term,
        } => smooth_term(
            data,
            feedback,
            profile,
            strategy,
            ambiguity_threshold,
            &term,
        ),
        Command::Simulate {
            catalog,
            random,
            implicit,
            intrinsic,
            preference,
            bad_default,
            laziness,
            alpha_abandon,
            sessions,
            seed,
            out,
        } => simulate_cmd(
            catalog,
            random,
            implicit,
            intrinsic,
            preference,
            bad_default,
            laziness,
            alpha_abandon,
            sessions,
            seed,
            out,
        ),
        Command::Ingest {
            catalog,
            feedback,
            explicit,
            implicit,
            fields,
        } => ingest_cmd(catalog, feedback, explicit, implicit, &fields),
        Command::Evaluate {
            data,
            feedback,
            answers,
            profile,
            ambiguity_threshold,
            delta,
            histogram,
            queries,
            out,
        } => evaluate_cmd(
            data,
            feedback,
            answers,
            profile,
            ambiguity_threshold,
            delta,
            histogram,
            queries,
            out,
        ),
        Command::Laziness {
            data,
            explicit,
            implicit,
            bad_default,
        } => laziness_cmd(data, explicit, implicit, bad_default),
    }
}

fn fit_profile_report(
    data: &DatasetArgs,
    ambiguity_threshold: f64,
    delta: f64,
) -> Result<ProfilingReport, Error> {
    let catalog = load_catalog(&data.catalog)?;
    let intrinsic = load_intrinsic(&data.intrinsic, &catalog)?;
    let cfg = ProfilingConfig::new(ambiguity_threshold, delta)?;
    priors_profiling(&cfg, &intrinsic.vectors())
}

fn profile_fit(
    data: DatasetArgs,
    ambiguity_threshold: f64,
    delta: f64,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let report = fit_profile_report(&data, ambiguity_threshold, delta)?;
    println!("mean_entropy: {}", report.mean_entropy);
    println!("prior: {},{}", report.prior.get(0), report.prior.get(1));
    println!("balance_weight: {}", report.balance_weight);
    match report.slope_weight {
        Some(w) => println!("slope_weight: {w}"),
        None => println!("slope_weight: -"),
    }
    println!("beta0: {}", report.fit.beta0);
    println!("beta: {}", report.fit.beta);
    println!("lack_of_fit: {:e}", report.fit.lack_of_fit);
    if let Some(path) = out {
        let doc = ProfileDocument::new(report.profile).with_provenance(ambiguity_threshold, delta);
        std::fs::write(&path, doc.render())?;
        println!("profile_written: {}", path.display());
    }
    Ok(())
}

fn smooth_term(
    data: DatasetArgs,
    feedback: PathBuf,
    profile_path: Option<PathBuf>,
    strategy: Option<String>,
    ambiguity_threshold: f64,
    term: &str,
) -> Result<(), Error> {
    let catalog = load_catalog(&data.catalog)?;
    let intrinsic = load_intrinsic(&data.intrinsic, &catalog)?;
    let log = load_feedback(&feedback, &catalog)?;

    let x = intrinsic
        .get(term)
        .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
    let n = log.counts_or_empty(&catalog, term)?;
    let labels = catalog.options(term).unwrap();

    let strategy = match (&profile_path, strategy.as_deref()) {
        (_, Some(s)) => Strategy::parse(s).expect("validated by clap"),
        (Some(_), None) => Strategy::Logit,
        (None, None) => {
            return Err(Error::InvalidConfig(
                "pass --profile FILE or --strategy NAME".into(),
            ))
        }
    };
    if strategy == Strategy::Mle && n.total() == 0 {
        return Err(Error::InvalidConfig(format!(
            "strategy mle is undefined for term '{term}': its feedback log is empty"
        )));
    }

    let (posterior, detail) = match strategy {
        Strategy::Intr => (x.clone(), None),
        _ => {
            let profile = match strategy {
                Strategy::Mle => WeightingProfile::Mle,
                Strategy::Linear => WeightingProfile::Linear,
                Strategy::Step => WeightingProfile::step(ambiguity_threshold)?,
                Strategy::Logit => match &profile_path {
                    Some(p) => ProfileDocument::parse(&std::fs::read_to_string(p)?)?.profile,
                    None => {
                        return Err(Error::InvalidConfig(
                            "strategy logit needs --profile FILE".into(),
                        ))
                    }
                },
                Strategy::Intr => unreachable!(),
            };
            let result = smooth(x, &n, &profile)?;
            (result.posterior.clone(), Some(result))
        }
    };

    println!("term: {term}");
    println!("strategy: {}", strategy.name());
    match &detail {
        Some(r) => {
            match r.evidence_entropy {
                Some(h) => println!("entropy: {h}"),
                None => println!("entropy: -"),
            }
            println!("weight_of_evidence: {}", r.evidence_weight);
            match r.alpha_scale {
                Some(a) => println!("alpha: {a}"),
                None => println!("alpha: -"),
            }
        }
        None => {
            println!("entropy: -");
            println!("weight_of_evidence: 0");
            println!("alpha: -");
        }
    }
    println!("rank,option_index,label,score");
    for (rank, &opt) in eval::rank_options(&posterior).iter().enumerate() {
        println!(
            "{},{},{},{:.6}",
            rank + 1,
            opt + 1,
            labels[opt],
            posterior.get(opt)
        );
    }
    Ok(())
}

/// Default option shown to simulated users: the top-scored intrinsic option,
/// or the bottom one under `bad_default`.
fn default_option(x: &ScoringVector, bad_default: bool) -> usize {
    let order = eval::rank_options(x);
    if bad_default {
        order[order.len() - 1]
    } else {
        order[0]
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    catalog_path: PathBuf,
    random: bool,
    implicit: bool,
    intrinsic: Option<PathBuf>,
    preference: Option<PathBuf>,
    bad_default: bool,
    laziness: f64,
    alpha_abandon: f64,
    sessions: u64,
    seed: u64,
    out: PathBuf,
) -> Result<(), Error> {
    let catalog = load_catalog(&catalog_path)?;
    let mut metadata = vec![
        ("generator".to_string(), GENERATOR_ID.to_string()),
        ("seed".to_string(), seed.to_string()),
    ];
    let log = if random {
        let mut log = FeedbackLog::new(Provenance::Random);
        for term in catalog.terms() {
            let counts = simulate_random(catalog.k(term).unwrap(), seed, term)?;
            log.insert(term, counts);
        }
        log
    } else if implicit {
        let intrinsic_path = intrinsic.ok_or_else(|| {
            Error::InvalidConfig("--implicit needs --intrinsic for the default options".into())
        })?;
        let preference_path = preference.ok_or_else(|| {
            Error::InvalidConfig(
                "--implicit needs --preference (a feedback file taken as ground truth)".into(),
            )
        })?;
        let scores = load_intrinsic(&intrinsic_path, &catalog)?;
        let pref_log = load_feedback(&preference_path, &catalog)?;
        metadata.push(("sessions".to_string(), sessions.to_string()));
        metadata.push(("laziness".to_string(), laziness.to_string()));
        metadata.push(("alpha_abandon".to_string(), alpha_abandon.to_string()));
        let mut log = FeedbackLog::new(Provenance::Implicit);
        for term in catalog.terms() {
            let x = scores.get(term).ok_or_else(|| {
                Error::SchemaMismatch(format!("term '{term}' has no intrinsic scores"))
            })?;
            let pref = pref_log
                .counts_or_empty(&catalog, term)?
                .normalize()
                .map_err(|_| {
                    Error::InvalidConfig(format!(
                        "term '{term}' has no counts in the preference file"
                    ))
                })?;
            let model = SessionModel::new(
                alpha_abandon,
                laziness,
                pref,
                default_option(x, bad_default),
                sessions,
                seed,
            )?;
            log.insert(term, simulate_implicit(&model, term));
        }
        log
    } else {
        return Err(Error::InvalidConfig("pass --random or --implicit".into()));
    };
    save_feedback(&log, &metadata, &out)?;
    println!("wrote {} terms to {}", catalog.len(), out.display());
    Ok(())
}

fn parse_fields(fields: &[String]) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for field in fields {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got '{field}'")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn ingest_cmd(
    catalog_path: PathBuf,
    feedback_path: PathBuf,
    explicit: bool,
    implicit: bool,
    fields: &[String],
) -> Result<(), Error> {
    if explicit == implicit {
        return Err(Error::InvalidConfig(
            "pass exactly one of --explicit or --implicit".into(),
        ));
    }
    let catalog = load_catalog(&catalog_path)?;
    let map = parse_fields(fields)?;
    let term = map
        .get("term")
        .ok_or_else(|| Error::InvalidConfig("missing term=<id>".into()))?;

    let mut log = if feedback_path.exists() {
        load_feedback(&feedback_path, &catalog)?
    } else {
        FeedbackLog::new(if implicit {
            Provenance::Implicit
        } else {
            Provenance::Explicit
        })
    };

    let parse_index = |v: &str| -> Result<usize, Error> {
        let i: usize = v
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad option index '{v}'")))?;
        if i == 0 {
            return Err(Error::InvalidConfig("option indices are 1-based".into()));
        }
        Ok(i - 1)
    };

    if implicit {
        let choice = map
            .get("choice")
            .ok_or_else(|| Error::InvalidConfig("missing choice=<i>".into()))?;
        log.ingest_implicit(&catalog, term, parse_index(choice)?)?;
    } else {
        let selections = map
            .get("selections")
            .ok_or_else(|| Error::InvalidConfig("missing selections=<i,j,...>".into()))?;
        let mut indices = Vec::new();
        for part in selections.split(',').filter(|s| !s.is_empty()) {
            indices.push(parse_index(part)?);
        }
        log.ingest_explicit(&catalog, term, &indices)?;
    }
    save_feedback(&log, &[], &feedback_path)?;
    let counts = log.get(term).unwrap();
    println!(
        "{term}: {}",
        counts
            .counts()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(())
}

fn percent(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_cmd(
    data: DatasetArgs,
    feedback_path: PathBuf,
    answers_path: PathBuf,
    profile_path: Option<PathBuf>,
    ambiguity_threshold: f64,
    delta: f64,
    histogram_path: Option<PathBuf>,
    queries_path: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let catalog = load_catalog(&data.catalog)?;
    let intrinsic = load_intrinsic(&data.intrinsic, &catalog)?;
    let feedback = load_feedback(&feedback_path, &catalog)?;
    let answers = load_answers(&answers_path, &catalog)?;

    let logit = match &profile_path {
        Some(p) => ProfileDocument::parse(&std::fs::read_to_string(p)?)?.profile,
        None => {
            let cfg = ProfilingConfig::new(ambiguity_threshold, delta)?;
            priors_profiling(&cfg, &intrinsic.vectors())?.profile
        }
    };

    let report = eval::compare_strategies(
        &catalog,
        &intrinsic,
        &feedback,
        &answers,
        &logit,
        ambiguity_threshold,
    )?;

    let mut text = String::from("strategy,metric,value\n");
    let mut notes = String::new();
    for row in &report.rows {
        match (row.p_at_1, row.mrr) {
            (Some(p), Some(m)) => {
                text.push_str(&format!("{},p_at_1,{}\n", row.strategy.name(), percent(p)));
                text.push_str(&format!("{},mrr,{}\n", row.strategy.name(), percent(m)));
            }
            _ => {
                text.push_str(&format!("{},p_at_1,-\n", row.strategy.name()));
                text.push_str(&format!("{},mrr,-\n", row.strategy.name()));
                if let Some(reason) = &row.skipped {
                    notes.push_str(&format!("# {} skipped: {reason}\n", row.strategy.name()));
                }
            }
        }
    }
    text.push_str(&notes);

    if let Some(qpath) = &queries_path {
        let groups = load_queries(qpath, &catalog)?;
        let mut grouped = Vec::new();
        for (query, terms) in &groups {
            let mut metrics = Vec::new();
            for term in terms {
                let per_term = report
                    .per_term
                    .get(term)
                    .ok_or_else(|| Error::UnknownTerm(term.clone()))?;
                let &(_, hit, rr) = per_term
                    .iter()
                    .find(|(s, _, _)| *s == Strategy::Logit)
                    .expect("logit row always evaluated");
                metrics.push((hit, rr));
            }
            grouped.push((query.clone(), metrics));
        }
        let projections = eval::project_query_level(&grouped)?;
        let n = projections.len() as f64;
        let qp: f64 = projections.iter().map(|p| p.p_at_1 as f64).sum::<f64>() / n;
        let qm: f64 = projections.iter().map(|p| p.reciprocal_rank).sum::<f64>() / n;
        text.push_str(&format!("logit,query_p_at_1,{}\n", percent(qp)));
        text.push_str(&format!("logit,query_mrr,{}\n", percent(qm)));
    }

    if let Some(hpath) = &histogram_path {
        // Hit/miss of the feedback log itself (evidence-only ranking),
        // bucketed by the entropy of its normalized counts.
        let mut items_owned = Vec::new();
        for term in catalog.terms() {
            let counts = feedback.counts_or_empty(&catalog, term)?;
            if counts.total() == 0 {
                continue;
            }
            let y = counts.normalize()?;
            let hit = eval::precision_at_1(&RankedResult::new(term, y.clone()), &answers)? == 1;
            items_owned.push((term.to_string(), y, hit));
        }
        let items: Vec<(&str, &ScoringVector, bool)> = items_owned
            .iter()
            .map(|(t, v, h)| (t.as_str(), v, *h))
            .collect();
        let buckets = eval::entropy_histogram(&items)?;
        let mut htext = String::from("bucket,size,hits,entropy_min,entropy_max\n");
        for (i, b) in buckets.iter().enumerate() {
            htext.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                i + 1,
                b.size,
                b.hits,
                b.entropy_min,
                b.entropy_max
            ));
        }
        std::fs::write(hpath, htext)?;
    }

    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn laziness_cmd(
    data: DatasetArgs,
    explicit_path: PathBuf,
    implicit_path: PathBuf,
    bad_default: bool,
) -> Result<(), Error> {
    let catalog = load_catalog(&data.catalog)?;
    let intrinsic = load_intrinsic(&data.intrinsic, &catalog)?;
    let explicit = load_feedback(&explicit_path, &catalog)?;
    let implicit = load_feedback(&implicit_path, &catalog)?;

    let mut explicit_rates = BTreeMap::new();
    let mut implicit_rates = BTreeMap::new();
    for term in catalog.terms() {
        let x = intrinsic.get(term).ok_or_else(|| {
            Error::SchemaMismatch(format!("term '{term}' has no intrinsic scores"))
        })?;
        let d = default_option(x, bad_default);
        let rate = |log: &FeedbackLog| -> Result<f64, Error> {
            let counts = log.counts_or_empty(&catalog, term)?;
            if counts.total() == 0 {
                return Err(Error::InvalidConfig(format!(
                    "term '{term}' has an empty log; rates undefined"
                )));
            }
            Ok(counts.counts()[d] as f64 / counts.total() as f64)
        };
        explicit_rates.insert(term.to_string(), rate(&explicit)?);
        implicit_rates.insert(term.to_string(), rate(&implicit)?);
    }
    let estimate = estimate_laziness(&explicit_rates, &implicit_rates)?;
    println!("term_id,explicit_rate,implicit_rate,laziness");
    for (term, gap) in &estimate.per_term {
        println!(
            "{term},{:.4},{:.4},{:.4}",
            explicit_rates[term], implicit_rates[term], gap
        );
    }
    println!("mean,{:.4}", estimate.mean);
    println!("stdev,{:.4}", estimate.stdev);
    Ok(())
}
