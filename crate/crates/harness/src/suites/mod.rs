//! Verification suites. Each suite runs on a base [`Experiment`] and, when
//! enabled, again with a doubled dictionary and a doubled grid; the pass
//! verdict requires the headline statistics to move by less than the
//! configured tolerances.

mod geometry;
mod lemmas;
mod theorems;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use geometry::{verify_aperture_scaling, verify_far_field};
pub use lemmas::{verify_lemma31, verify_lemma_a};
pub use theorems::{verify_lemma41, verify_theorem1, verify_theorem2, verify_theorem3};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::Experiment;
use crate::report::{StabilityCheck, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Theorem1,
    Theorem2,
    Theorem3,
    LemmaA,
    Lemma31,
    Lemma41,
    Aperture,
    FarField,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Theorem3,
        Suite::LemmaA,
        Suite::Lemma31,
        Suite::Lemma41,
        Suite::Aperture,
        Suite::FarField,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "thm1",
            Suite::Theorem2 => "thm2",
            Suite::Theorem3 => "thm3",
            Suite::LemmaA => "lemA",
            Suite::Lemma31 => "lem31",
            Suite::Lemma41 => "lem41",
            Suite::Aperture => "aperture",
            Suite::FarField => "farfield",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        match self {
            Suite::Theorem1 => verify_theorem1(cfg),
            Suite::Theorem2 => verify_theorem2(cfg),
            Suite::Theorem3 => verify_theorem3(cfg),
            Suite::LemmaA => verify_lemma_a(cfg),
            Suite::Lemma31 => verify_lemma31(cfg),
            Suite::Lemma41 => verify_lemma41(cfg),
            Suite::Aperture => verify_aperture_scaling(cfg),
            Suite::FarField => verify_far_field(cfg),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown suite {s:?}")))
    }
}

/// Report of one pass plus the statistics the stability gates compare.
pub(crate) struct Outcome {
    pub report: VerificationReport,
    pub headline: Vec<(String, f64)>,
}

/// Whether the suite's statistics depend on the test-function dictionary.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum UsesDictionary {
    Yes,
    No,
}

/// Runs `body` on the base experiment and on the refined ones, then attaches
/// the stability checks and the verdict.
pub(crate) fn gated(
    cfg: &ExperimentConfig,
    uses_dictionary: UsesDictionary,
    body: impl Fn(&Experiment) -> Result<Outcome>,
) -> Result<VerificationReport> {
    let exp = Experiment::new(cfg)?;
    let base = body(&exp)?;
    let mut report = base.report;
    let compare = |kind: &str, refined: &Outcome, tol: f64, report: &mut VerificationReport| {
        for ((name, a), (_, b)) in base.headline.iter().zip(&refined.headline) {
            report
                .stability
                .push(StabilityCheck::new(format!("{kind}:{name}"), *a, *b, tol));
        }
    };
    if cfg.stability.dictionary {
        if uses_dictionary == UsesDictionary::Yes {
            let refined = body(&exp.with_dictionary_size(2 * cfg.dictionary.size)?)?;
            compare(
                "dictionary-doubling",
                &refined,
                cfg.stability.dictionary_tolerance,
                &mut report,
            );
        } else {
            report.note("dictionary-doubling gate not applicable: no dictionary involved");
        }
    }
    if cfg.stability.grid {
        let refined = body(&exp.with_points(2 * cfg.points)?)?;
        compare(
            "grid-doubling",
            &refined,
            cfg.stability.grid_tolerance,
            &mut report,
        );
    }
    Ok(report.finalize())
}

/// Standard parameters recorded in every report.
pub(crate) fn base_report(suite: Suite, exp: &Experiment) -> VerificationReport {
    let mut r = VerificationReport::new(suite.name(), &exp.cfg);
    r.param("n", exp.n() as f64);
    r.param("alpha", exp.alpha());
    r.param("p", exp.p);
    r.param("q", exp.cfg.q);
    r.param("points", exp.cfg.points as f64);
    r.param("eval_points", exp.cfg.eval_points as f64);
    r.param("domain_half_width", exp.cfg.domain_half_width);
    r.param("dictionary_size", exp.dict.len() as f64);
    r.param("t_levels", exp.cone.levels().len() as f64);
    r
}

/// Note attached to every report built on the dictionary.
pub(crate) const LOWER_BOUND_NOTE: &str =
    "operator values use a finite certified dictionary and are lower bounds of the true supremum";

/// Note attached to reports on atoms.
pub(crate) const ATOM_REDUCTION_NOTE: &str =
    "only the atom-level estimates are checked; general distributions are not represented";
