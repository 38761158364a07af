//! Weight-of-evidence schemes: how much to trust the feedback log given the
//! entropy of its counts.
//!
//! Four schemes are supported. `Mle` always trusts the evidence. `Step`
//! trusts it fully up to an ambiguity threshold and not at all beyond.
//! `Linear` is `1 - H`. `Logit` is log-odds linear in the entropy,
//! `w2(H) = 1 / (1 + e^-(beta0 - beta*H))`, which can pass near the corners
//! `(0,1)` and `(1,0)` while still hitting a calibrated interior point — the
//! scheme the profiling stage fits.

use crate::error::{Error, Result};

/// Exponent clamp for the logistic evaluation. Fitted profiles over a
/// near-step constraint geometry can carry slopes beyond 1000, which would
/// overflow a naive `exp`.
const EXP_CLAMP: f64 = 700.0;

/// A weighting scheme mapping evidence entropy `H` in `[0, 1]` to the weight
/// of evidence `w2` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightingProfile {
    /// Always `w2 = 1`: maximum-likelihood, evidence only.
    Mle,
    /// `w2 = 1` while `H <= threshold` (inclusive), else `0`.
    Step { threshold: f64 },
    /// `w2 = 1 - H`.
    Linear,
    /// `w2 = 1 / (1 + e^-(beta0 - beta*H))` with `beta0, beta > 0`.
    Logit { beta0: f64, beta: f64 },
}

impl WeightingProfile {
    pub fn step(threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidConfig(format!(
                "step threshold {threshold} outside [0, 1]"
            )));
        }
        Ok(Self::Step { threshold })
    }

    pub fn logit(beta0: f64, beta: f64) -> Result<Self> {
        if beta0 <= 0.0 || beta <= 0.0 || !beta0.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "logit parameters ({beta0}, {beta}) must be positive and finite"
            )));
        }
        Ok(Self::Logit { beta0, beta })
    }

    /// Weight of evidence at entropy `h`.
    ///
    /// The logit variant stays strictly inside `(0, 1)` so the downstream
    /// pseudo-count scaling never divides by zero.
    pub fn weight_of_evidence(&self, h: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&h), "entropy {h} outside [0, 1]");
        match *self {
            Self::Mle => 1.0,
            Self::Step { threshold } => {
                if h <= threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Linear => 1.0 - h,
            Self::Logit { beta0, beta } => {
                let z = (beta0 - beta * h).clamp(-EXP_CLAMP, EXP_CLAMP);
                let w = 1.0 / (1.0 + (-z).exp());
                w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Mle => "mle",
            Self::Step { .. } => "step",
            Self::Linear => "linear",
            Self::Logit { .. } => "logit",
        }
    }
}

/// A weighting profile plus the profiling provenance it was produced under.
///
/// `threshold` records the ambiguity threshold `D` and `delta` the slope
/// neighborhood width; for a `Step` profile the threshold doubles as the
/// operative parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDocument {
    pub profile: WeightingProfile,
    pub threshold: Option<f64>,
    pub delta: Option<f64>,
}

impl ProfileDocument {
    pub fn new(profile: WeightingProfile) -> Self {
        let threshold = match profile {
            WeightingProfile::Step { threshold } => Some(threshold),
            _ => None,
        };
        Self {
            profile,
            threshold,
            delta: None,
        }
    }

    pub fn with_provenance(mut self, threshold: f64, delta: f64) -> Self {
        self.threshold = Some(threshold);
        self.delta = Some(delta);
        self
    }

    /// Renders the flat `key=value` document. Floats use shortest
    /// round-trip formatting (at most 17 significant digits), so
    /// `parse(render(d)) == d` exactly.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("kind={}\n", self.profile.kind_name()));
        if let Some(d) = self.threshold {
            out.push_str(&format!("D={d}\n"));
        }
        if let Some(delta) = self.delta {
            out.push_str(&format!("delta={delta}\n"));
        }
        if let WeightingProfile::Logit { beta0, beta } = self.profile {
            out.push_str(&format!("beta0={beta0}\n"));
            out.push_str(&format!("beta={beta}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut threshold = None;
        let mut delta = None;
        let mut beta0 = None;
        let mut beta = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "<profile>".into(),
                line: lineno,
                message: format!("expected key=value, got '{line}'"),
            })?;
            let parse_f64 = |v: &str| -> Result<f64> {
                v.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: "<profile>".into(),
                    line: lineno,
                    message: format!("bad number '{v}'"),
                })
            };
            match key.trim() {
                "kind" => kind = Some(value.trim().to_string()),
                "D" => threshold = Some(parse_f64(value)?),
                "delta" => delta = Some(parse_f64(value)?),
                "beta0" => beta0 = Some(parse_f64(value)?),
                "beta" => beta = Some(parse_f64(value)?),
                other => {
                    return Err(Error::Parse {
                        path: "<profile>".into(),
                        line: lineno,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse {
            path: "<profile>".into(),
            line: 0,
            message: "missing 'kind'".into(),
        })?;
        let profile = match kind.as_str() {
            "mle" => WeightingProfile::Mle,
            "linear" => WeightingProfile::Linear,
            "step" => {
                let d = threshold.ok_or_else(|| Error::Parse {
                    path: "<profile>".into(),
                    line: 0,
                    message: "step profile needs D".into(),
                })?;
                WeightingProfile::step(d)?
            }
            "logit" => {
                let (b0, b) = match (beta0, beta) {
                    (Some(b0), Some(b)) => (b0, b),
                    _ => {
                        return Err(Error::Parse {
                            path: "<profile>".into(),
                            line: 0,
                            message: "logit profile needs beta0 and beta".into(),
                        })
                    }
                };
                WeightingProfile::logit(b0, b)?
            }
            other => {
                return Err(Error::Parse {
                    path: "<profile>".into(),
                    line: 0,
                    message: format!("unknown profile kind '{other}'"),
                })
            }
        };
        Ok(Self {
            profile,
            threshold,
            delta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Tuned three-constraint parameter rows used as regression anchors.
    const THREE_POINT_ROWS: [(f64, f64); 7] = [
        (244.559, 324.925),
        (253.127, 336.633),
        (261.633, 348.343),
        (181.671, 242.399),
        (162.432, 217.703),
        (50.270, 68.766),
        (138.507, 188.908),
    ];

    #[test]
    fn scheme_values() {
        assert_eq!(WeightingProfile::Mle.weight_of_evidence(0.3), 1.0);
        assert_eq!(WeightingProfile::Linear.weight_of_evidence(0.75), 0.25);

        let step = WeightingProfile::step(0.75).unwrap();
        assert_eq!(step.weight_of_evidence(0.75), 1.0); // boundary inclusive
        assert_eq!(step.weight_of_evidence(0.7501), 0.0);
        assert_eq!(step.weight_of_evidence(0.0), 1.0);
    }

    #[test]
    fn logit_tuned_parameters_at_skewed_log() {
        let p = WeightingProfile::logit(19.654, 27.994).unwrap();
        let w = p.weight_of_evidence(0.397);
        // Direct evaluation: 1 / (1 + e^-(19.654 - 27.994 * 0.397)).
        assert!((w - 0.9998046225826656).abs() < 1e-12);
        assert!((w - 0.9998).abs() <= 1e-4);
    }

    #[test]
    fn logit_survives_near_step_parameters() {
        // Steepest fitted row; a naive exp would overflow.
        let p = WeightingProfile::logit(842.59, 1126.5).unwrap();
        let lo = p.weight_of_evidence(0.0);
        let hi = p.weight_of_evidence(1.0);
        assert!(lo > 0.0 && lo < 1.0);
        assert!(hi > 0.0 && hi < 1.0);
        assert!(lo > 0.999);
        assert!(hi < 1e-100);
    }

    #[test]
    fn three_point_rows_hug_the_corners() {
        for (beta0, beta) in THREE_POINT_ROWS {
            let p = WeightingProfile::logit(beta0, beta).unwrap();
            assert!(
                (p.weight_of_evidence(0.0) - 1.0).abs() <= 1e-3,
                "({beta0}, {beta}) at H=0"
            );
            assert!(
                p.weight_of_evidence(1.0) <= 1e-3,
                "({beta0}, {beta}) at H=1"
            );
        }
        // The four-constraint rows trade corner fit for interior slope; the
        // evaluation row still holds both corners.
        let p = WeightingProfile::logit(19.654, 27.994).unwrap();
        assert!((p.weight_of_evidence(0.0) - 1.0).abs() <= 1e-3);
        assert!(p.weight_of_evidence(1.0) <= 1e-3);
    }

    #[test]
    fn validation() {
        assert!(WeightingProfile::logit(0.0, 5.0).is_err());
        assert!(WeightingProfile::logit(5.0, -1.0).is_err());
        assert!(WeightingProfile::step(1.5).is_err());
    }

    #[test]
    fn document_round_trip() {
        let docs = [
            ProfileDocument::new(WeightingProfile::Mle),
            ProfileDocument::new(WeightingProfile::Linear),
            ProfileDocument::new(WeightingProfile::step(0.75).unwrap()),
            ProfileDocument::new(WeightingProfile::logit(19.654, 27.994).unwrap())
                .with_provenance(0.75, 0.05),
        ];
        for doc in docs {
            let text = doc.render();
            let back = ProfileDocument::parse(&text).unwrap();
            assert_eq!(back, doc, "document: {text}");
            // Render is stable under a second round trip.
            assert_eq!(back.render(), text);
        }
    }

    #[test]
    fn document_parse_errors() {
        assert!(ProfileDocument::parse("kind=logit\nbeta0=3\n").is_err());
        assert!(ProfileDocument::parse("kind=sigmoid\n").is_err());
        assert!(ProfileDocument::parse("beta0=3\n").is_err());
        assert!(ProfileDocument::parse("kind=logit\nbeta0=x\nbeta=2\n").is_err());
    }

    proptest! {
        #[test]
        fn monotonicity_in_entropy(h1 in 0.0f64..1.0, h2 in 0.0f64..1.0, beta0 in 0.5f64..18.0, beta in 0.5f64..18.0, d in 0.0f64..=1.0) {
            let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
            prop_assume!(hi - lo > 1e-3);
            // Strict decrease away from float saturation of the logistic
            // (moderate parameters keep the exponent below ~18).
            let logit = WeightingProfile::logit(beta0, beta).unwrap();
            prop_assert!(logit.weight_of_evidence(lo) > logit.weight_of_evidence(hi));
            prop_assert!(WeightingProfile::Linear.weight_of_evidence(lo) > WeightingProfile::Linear.weight_of_evidence(hi));
            let step = WeightingProfile::step(d).unwrap();
            prop_assert!(step.weight_of_evidence(lo) >= step.weight_of_evidence(hi));
            prop_assert_eq!(WeightingProfile::Mle.weight_of_evidence(lo), 1.0);
        }

        #[test]
        fn logit_never_increases(h1 in 0.0f64..1.0, h2 in 0.0f64..1.0, beta0 in 0.5f64..2000.0, beta in 0.5f64..2000.0) {
            let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
            let logit = WeightingProfile::logit(beta0, beta).unwrap();
            prop_assert!(logit.weight_of_evidence(lo) >= logit.weight_of_evidence(hi));
        }

        #[test]
        fn logit_open_interval(h in 0.0f64..=1.0, beta0 in 0.01f64..2000.0, beta in 0.01f64..2000.0) {
            let w = WeightingProfile::logit(beta0, beta).unwrap().weight_of_evidence(h);
            prop_assert!(w > 0.0 && w < 1.0, "w = {w}");
        }

        #[test]
        fn logit_round_trip_exact(beta0 in 1e-3f64..2000.0, beta in 1e-3f64..2000.0, d in 0.01f64..0.99, delta in 0.001f64..0.2) {
            let doc = ProfileDocument::new(WeightingProfile::logit(beta0, beta).unwrap())
                .with_provenance(d, delta);
            prop_assert_eq!(ProfileDocument::parse(&doc.render()).unwrap(), doc);
        }
    }
}
