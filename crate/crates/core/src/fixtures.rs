//! Bundled numeric fixtures: published ceiling cells, setup-inclusive
//! economics cells, drift-count cohorts, cache-correctness bundles, and
//! attractor strings.
//!
//! Fixtures ship inside the binary; the `REUSELAB_FIXTURE_DIR` environment
//! variable points at a directory of same-named JSON files to override them.

use crate::ceiling::CeilingCell;
use crate::drift::{ArmRecord, AttractorSet, Choice, PairedRow};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture {name}: {reason}")]
    Bad { name: String, reason: String },
}

pub const FIXTURE_DIR_ENV: &str = "REUSELAB_FIXTURE_DIR";

fn load(name: &str, bundled: &'static str) -> Result<String, FixtureError> {
    if let Ok(dir) = std::env::var(FIXTURE_DIR_ENV) {
        let path = Path::new(&dir).join(name);
        if path.exists() {
            return fs::read_to_string(&path).map_err(|e| FixtureError::Bad {
                name: name.into(),
                reason: format!("unreadable override {}: {e}", path.display()),
            });
        }
    }
    Ok(bundled.to_string())
}

fn parse<T: serde::de::DeserializeOwned>(name: &str, text: &str) -> Result<T, FixtureError> {
    serde_json::from_str(text).map_err(|e| FixtureError::Bad {
        name: name.into(),
        reason: e.to_string(),
    })
}

/// One published ceiling cell with its printed prediction and residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeilingFixtureRow {
    pub name: String,
    pub v_share: f64,
    pub v_red: f64,
    pub observed: f64,
    pub printed_pred: f64,
    pub printed_residual_pp: f64,
    pub verdict: String,
    pub provenance: String,
}

impl CeilingFixtureRow {
    pub fn to_cell(&self) -> CeilingCell {
        CeilingCell::Vision {
            name: self.name.clone(),
            v_share: self.v_share,
            v_red: self.v_red,
            observed: Some(self.observed),
            verdict: self.verdict.clone(),
        }
    }
}

pub fn ceiling_cells() -> Result<Vec<CeilingFixtureRow>, FixtureError> {
    let text = load("table10.json", include_str!("../fixtures/table10.json"))?;
    parse("table10.json", &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicsExpected {
    pub q2: f64,
    pub q5: f64,
    pub q10: f64,
    pub q50: f64,
}

/// One published economics cell: warm multiplier, Q=1 value, and the printed
/// Q columns to reproduce.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicsCell {
    pub name: String,
    pub dacc: f64,
    pub warm: f64,
    pub q1: f64,
    pub expected: EconomicsExpected,
    pub provenance: String,
}

pub fn economics_cells() -> Result<Vec<EconomicsCell>, FixtureError> {
    let text = load("economics.json", include_str!("../fixtures/economics.json"))?;
    parse("economics.json", &text)
}

pub fn attractors() -> Result<AttractorSet, FixtureError> {
    let text = load("attractors.json", include_str!("../fixtures/attractors.json"))?;
    parse("attractors.json", &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JaccardFixture {
    pub provenance: String,
    pub set_a: BTreeSet<String>,
    pub set_b: BTreeSet<String>,
}

pub fn jaccard_sets() -> Result<JaccardFixture, FixtureError> {
    let text = load("jaccard.json", include_str!("../fixtures/jaccard.json"))?;
    parse("jaccard.json", &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlipSpec {
    pub session: usize,
    pub turn: usize,
    /// Candidate picks a different option than baseline.
    pub choice: bool,
    /// Candidate correctness differs from baseline.
    pub correctness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowScope {
    All,
    Followups,
}

/// Compact drift-cohort descriptor expanded into paired rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftCohortFixture {
    pub name: String,
    pub sessions: usize,
    pub turns_per_session: usize,
    pub rows: RowScope,
    pub flips: Vec<FlipSpec>,
    pub provenance: String,
}

impl DriftCohortFixture {
    /// Expand into concrete paired rows. Baseline answers the keyed option
    /// everywhere; flips perturb only the candidate arm.
    pub fn expand(&self) -> Vec<PairedRow> {
        let start = match self.rows {
            RowScope::All => 0,
            RowScope::Followups => 1,
        };
        let mut out = Vec::new();
        for s in 0..self.sessions {
            for t in start..self.turns_per_session {
                let flip = self
                    .flips
                    .iter()
                    .find(|f| f.session == s && f.turn == t);
                let row = match flip {
                    None => identical_row(s, t),
                    Some(f) => flipped_row(s, t, f),
                };
                out.push(row);
            }
        }
        out
    }
}

fn identical_row(session: usize, turn: usize) -> PairedRow {
    let arm = ArmRecord {
        raw_text: "Answer: A.".into(),
        choice: Choice::Letter('A'),
        correct: true,
    };
    PairedRow {
        item_id: format!("v{session:02}:q{turn:02}"),
        session_id: format!("v{session:02}"),
        turn,
        baseline: arm.clone(),
        candidate: arm,
    }
}

fn flipped_row(session: usize, turn: usize, flip: &FlipSpec) -> PairedRow {
    // A choice flip without a correctness flip means both arms are wrong in
    // different ways; with one, the candidate goes from right to wrong.
    let (baseline, candidate) = match (flip.choice, flip.correctness) {
        (true, true) => (
            ArmRecord {
                raw_text: "Answer: A.".into(),
                choice: Choice::Letter('A'),
                correct: true,
            },
            ArmRecord {
                raw_text: "Answer: B.".into(),
                choice: Choice::Letter('B'),
                correct: false,
            },
        ),
        (true, false) => (
            ArmRecord {
                raw_text: "Answer: C.".into(),
                choice: Choice::Letter('C'),
                correct: false,
            },
            ArmRecord {
                raw_text: "Answer: D.".into(),
                choice: Choice::Letter('D'),
                correct: false,
            },
        ),
        (false, true) => (
            ArmRecord {
                raw_text: "Answer: A.".into(),
                choice: Choice::Letter('A'),
                correct: true,
            },
            ArmRecord {
                raw_text: "Answer: A.".into(),
                choice: Choice::Letter('A'),
                correct: false,
            },
        ),
        (false, false) => {
            return identical_row(session, turn);
        }
    };
    PairedRow {
        item_id: format!("v{session:02}:q{turn:02}"),
        session_id: format!("v{session:02}"),
        turn,
        baseline,
        candidate,
    }
}

pub fn drift_cohorts() -> Result<Vec<DriftCohortFixture>, FixtureError> {
    let text = load(
        "drift_cohorts.json",
        include_str!("../fixtures/drift_cohorts.json"),
    )?;
    parse("drift_cohorts.json", &text)
}

pub fn drift_cohort(name: &str) -> Result<DriftCohortFixture, FixtureError> {
    drift_cohorts()?
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| FixtureError::Bad {
            name: "drift_cohorts.json".into(),
            reason: format!("no cohort named {name}"),
        })
}

/// Compact cache-correctness bundle expanded into paired rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheCorrectnessFixture {
    pub name: String,
    pub rows: usize,
    pub text_diff_rows: usize,
    pub choice_diff_rows: usize,
    pub matched_parse_fail_rows: usize,
    pub provenance: String,
}

impl CacheCorrectnessFixture {
    pub fn expand(&self) -> Vec<PairedRow> {
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = if i < self.matched_parse_fail_rows {
                // identical degenerate text on both sides
                let arm = ArmRecord {
                    raw_text: "addCriterion addCriterion addCriterion".into(),
                    choice: Choice::ParseFail,
                    correct: false,
                };
                PairedRow {
                    item_id: format!("row{i:02}"),
                    session_id: "bundle".into(),
                    turn: i,
                    baseline: arm.clone(),
                    candidate: arm,
                }
            } else if i < self.matched_parse_fail_rows + self.choice_diff_rows {
                PairedRow {
                    item_id: format!("row{i:02}"),
                    session_id: "bundle".into(),
                    turn: i,
                    baseline: ArmRecord {
                        raw_text: "Answer: A.".into(),
                        choice: Choice::Letter('A'),
                        correct: true,
                    },
                    candidate: ArmRecord {
                        raw_text: "Answer: B.".into(),
                        choice: Choice::Letter('B'),
                        correct: false,
                    },
                }
            } else if i < self.matched_parse_fail_rows + self.text_diff_rows {
                // open-ended rows whose raw text diverges
                PairedRow {
                    item_id: format!("row{i:02}"),
                    session_id: "bundle".into(),
                    turn: i,
                    baseline: ArmRecord {
                        raw_text: format!("the display shows state {i}"),
                        choice: Choice::OpenEnded,
                        correct: true,
                    },
                    candidate: ArmRecord {
                        raw_text: format!("the display shows a different state {i}"),
                        choice: Choice::OpenEnded,
                        correct: true,
                    },
                }
            } else {
                identical_row(0, i)
            };
            out.push(row);
        }
        out
    }
}

pub fn cache_correctness_bundles() -> Result<Vec<CacheCorrectnessFixture>, FixtureError> {
    let text = load(
        "cache_correctness.json",
        include_str!("../fixtures/cache_correctness.json"),
    )?;
    parse("cache_correctness.json", &text)
}

pub fn cache_correctness_bundle(name: &str) -> Result<CacheCorrectnessFixture, FixtureError> {
    cache_correctness_bundles()?
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| FixtureError::Bad {
            name: "cache_correctness.json".into(),
            reason: format!("no bundle named {name}"),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{cache_correctness_diff, drift_report, jaccard_drift_overlap};

    #[test]
    fn bundled_fixtures_parse() {
        assert_eq!(ceiling_cells().unwrap().len(), 10);
        assert_eq!(economics_cells().unwrap().len(), 8);
        assert_eq!(attractors().unwrap().patterns.len(), 2);
        assert_eq!(drift_cohorts().unwrap().len(), 3);
        assert_eq!(cache_correctness_bundles().unwrap().len(), 2);
    }

    #[test]
    fn jaccard_fixture_reproduces_published_overlap() {
        let j = jaccard_sets().unwrap();
        assert_eq!(jaccard_drift_overlap(&j.set_a, &j.set_b), 0.3125);
    }

    #[test]
    fn breadth_cohort_expands_clean() {
        let cohort = drift_cohort("breadth_93").unwrap();
        let rows = cohort.expand();
        assert_eq!(rows.len(), 93);
        let rep = drift_report(&rows, 0.03, &attractors().unwrap()).unwrap();
        assert!(rep.zero_drift);
    }

    #[test]
    fn many_turn_cohort_counts() {
        let rows = drift_cohort("many_turn_fixed_k1").unwrap().expand();
        assert_eq!(rows.len(), 343);
        let rep = drift_report(&rows, 0.03, &attractors().unwrap()).unwrap();
        assert_eq!(rep.choice_diffs, 3);
        assert_eq!(rep.correctness_diffs, 2);
        assert!(rep.gate_pass);
    }

    #[test]
    fn dense_anchored_cohort_fails_gate_with_even_split() {
        let rows = drift_cohort("dense_anchored_adaptive").unwrap().expand();
        assert_eq!(rows.len(), 133);
        let rep = drift_report(&rows, 0.03, &attractors().unwrap()).unwrap();
        assert_eq!(rep.choice_diffs, 6);
        assert!((rep.drift_rate - 0.0451).abs() < 0.0001);
        assert!(!rep.gate_pass);
        assert_eq!((rep.early.rows, rep.early.choice_diffs), (63, 3));
        assert_eq!((rep.late.rows, rep.late.choice_diffs), (70, 3));
    }

    #[test]
    fn cache_bundles_reproduce_published_counts() {
        let closed = cache_correctness_bundle("patched_closure").unwrap().expand();
        let s = cache_correctness_diff(&closed);
        assert_eq!(
            (s.text_identical, s.choice_diffs, s.correctness_diffs, s.matched_parse_failures),
            (42, 0, 0, 4)
        );
        let default = cache_correctness_bundle("default_path").unwrap().expand();
        let s = cache_correctness_diff(&default);
        assert_eq!((s.text_diffs, s.choice_diffs), (16, 2));
        assert_eq!(s.text_identical, 26);
    }

    #[test]
    fn unknown_names_error() {
        assert!(drift_cohort("nope").is_err());
        assert!(cache_correctness_bundle("nope").is_err());
    }
}
