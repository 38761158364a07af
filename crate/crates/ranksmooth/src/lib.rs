//! Entropy-weighted Bayesian smoothing for interactive data retrieval.
//!
//! A retrieval system ranks the candidate interpretations of a query term
//! with whatever scoring is intrinsic to it (schema, value distributions,
//! language models). A user-feedback log over past sessions supplies a
//! second, extrinsic scoring. This crate combines the two: the intrinsic
//! scores act as a Dirichlet prior over interpretations, the feedback
//! counts as multinomial observations, and the prior's concentration is set
//! at query time from the entropy of the counts — skewed, decisive logs get
//! nearly all the weight, noisy high-entropy logs barely move the prior.
//!
//! Modules, bottom up:
//!
//! - [`vector`]: scoring/counts vectors and normalized Shannon entropy;
//! - [`convex`]: convex combinations and the balance-point solver for
//!   disagreeing top choices;
//! - [`weighting`]: the entropy-to-weight schemes (MLE, STEP, LINEAR, and
//!   the log-odds-linear LOGIT);
//! - [`profiling`]: offline least-squares calibration of the LOGIT curve
//!   from an intrinsic score population;
//! - [`smoothing`]: the query-time posterior update;
//! - [`logstore`]: the four datasets (catalog, intrinsic, feedback,
//!   answers) and their flat-file formats;
//! - [`simulate`]: seedable session simulation and laziness estimation;
//! - [`eval`]: P@1 / MRR evaluation harness and strategy comparison.
//!
//! ## Quick start
//!
//! ```
//! use ranksmooth::smoothing::smooth;
//! use ranksmooth::{CountsVector, ScoringVector, WeightingProfile};
//!
//! // The system's scores mildly favor option 1, but eight of ten logged
//! // sessions picked option 2.
//! let prior = ScoringVector::new(vec![0.28, 0.24, 0.22, 0.15, 0.11])?;
//! let counts = CountsVector::new(vec![1, 8, 0, 1, 0])?;
//! let profile = WeightingProfile::logit(19.654, 27.994)?;
//!
//! let result = smooth(&prior, &counts, &profile)?;
//! assert_eq!(
//!     result.posterior.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0,
//!     1, // the decisive log wins the top spot
//! );
//! # Ok::<(), ranksmooth::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod convex;
pub mod error;
pub mod eval;
pub mod logstore;
pub mod profiling;
pub mod simulate;
pub mod smoothing;
pub mod vector;
pub mod weighting;

pub use error::{Error, Result};
pub use vector::{CountsVector, ScoringVector};
pub use weighting::WeightingProfile;
