//! Paired-fidelity auditing: choice parsing, pathological-output detection,
//! drift reports, rule-of-three bounds, Jaccard overlap, and cache-correctness
//! text diffing.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriftError {
    #[error("empty row set")]
    EmptyRows,
    #[error("n_options must be in 2..=6, got {0}")]
    BadOptionCount(u8),
}

/// Parsed multiple-choice outcome. `ParseFail` is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Letter(char),
    ParseFail,
    OpenEnded,
}

/// Extract the unique standalone option letter from a raw response.
///
/// A letter counts when it appears as `X`, `(X)`, `X.`, or `X)`
/// (case-insensitive): preceded by start-of-string, whitespace, or `(`, and
/// followed by end-of-string, whitespace, `.`, `)`, `,`, `:`, or `;`.
/// No match, or two conflicting letters, yields `ParseFail`.
pub fn parse_choice(raw: &str, n_options: u8) -> Result<Choice, DriftError> {
    if !(2..=6).contains(&n_options) {
        return Err(DriftError::BadOptionCount(n_options));
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut found: BTreeSet<char> = BTreeSet::new();
    for (i, &c) in chars.iter().enumerate() {
        let upper = c.to_ascii_uppercase();
        if !upper.is_ascii_uppercase() {
            continue;
        }
        let idx = upper as u8 - b'A';
        if idx >= n_options {
            continue;
        }
        let before_ok = i == 0 || chars[i - 1].is_whitespace() || chars[i - 1] == '(';
        let after_ok = i + 1 == chars.len()
            || matches!(chars[i + 1], '.' | ')' | ',' | ':' | ';')
            || chars[i + 1].is_whitespace();
        if before_ok && after_ok {
            found.insert(upper);
        }
    }
    match found.len() {
        1 => Ok(Choice::Letter(*found.iter().next().unwrap())),
        _ => Ok(Choice::ParseFail),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Prefix,
    Exact,
}

/// Known malformed attractor strings from the unrepaired cache basin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorSet {
    pub patterns: Vec<String>,
    pub mode: MatchMode,
}

impl AttractorSet {
    pub fn new(patterns: Vec<String>, mode: MatchMode) -> Self {
        AttractorSet { patterns, mode }
    }
}

pub fn is_pathological(raw: &str, attractors: &AttractorSet) -> bool {
    attractors.patterns.iter().any(|p| match attractors.mode {
        MatchMode::Prefix => raw.starts_with(p.as_str()),
        MatchMode::Exact => raw == p,
    })
}

/// One side of a paired row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmRecord {
    pub raw_text: String,
    pub choice: Choice,
    pub correct: bool,
}

/// Per-item pairing of a baseline arm against a candidate (reuse) arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedRow {
    pub item_id: String,
    /// Session the item belongs to; used for the session-level any-drift view.
    pub session_id: String,
    pub turn: usize,
    pub baseline: ArmRecord,
    pub candidate: ArmRecord,
}

impl PairedRow {
    /// Parsed choices differ. Two parse failures on the same row count as a
    /// matched parse failure, not a choice diff.
    pub fn is_choice_diff(&self) -> bool {
        match (self.baseline.choice, self.candidate.choice) {
            (Choice::ParseFail, Choice::ParseFail) => false,
            (a, b) => a != b,
        }
    }

    pub fn is_correctness_diff(&self) -> bool {
        self.baseline.correct != self.candidate.correct
    }

    pub fn is_text_diff(&self) -> bool {
        self.baseline.raw_text != self.candidate.raw_text
    }

    pub fn is_matched_parse_failure(&self) -> bool {
        self.baseline.choice == Choice::ParseFail && self.candidate.choice == Choice::ParseFail
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitCounts {
    pub rows: usize,
    pub choice_diffs: usize,
    pub correctness_diffs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    pub n_rows: usize,
    pub choice_diffs: usize,
    pub correctness_diffs: usize,
    pub text_diffs: usize,
    pub parse_failures_baseline: usize,
    pub parse_failures_candidate: usize,
    pub matched_parse_failures: usize,
    pub pathological_count: usize,
    /// choice_diffs / n_rows
    pub drift_rate: f64,
    pub gate: f64,
    pub gate_pass: bool,
    /// 3/n zero-event upper bound; meaningful when no diffs were observed.
    pub rule_of_three_bound: f64,
    pub zero_drift: bool,
    pub session_any_drift: usize,
    pub n_sessions: usize,
    /// Early/late split at the turn midpoint.
    pub early: SplitCounts,
    pub late: SplitCounts,
}

/// Fold drift counts over paired rows. Pathology is scored on the candidate
/// arm's raw text.
pub fn drift_report(
    rows: &[PairedRow],
    gate: f64,
    attractors: &AttractorSet,
) -> Result<DriftReport, DriftError> {
    if rows.is_empty() {
        return Err(DriftError::EmptyRows);
    }
    let n_rows = rows.len();
    let mut choice_diffs = 0;
    let mut correctness_diffs = 0;
    let mut text_diffs = 0;
    let mut pf_base = 0;
    let mut pf_cand = 0;
    let mut pf_matched = 0;
    let mut pathological = 0;
    let max_turn = rows.iter().map(|r| r.turn).max().unwrap_or(0);
    let split_at = max_turn / 2;
    let mut early = SplitCounts {
        rows: 0,
        choice_diffs: 0,
        correctness_diffs: 0,
    };
    let mut late = SplitCounts {
        rows: 0,
        choice_diffs: 0,
        correctness_diffs: 0,
    };
    let mut drifted_sessions: BTreeSet<&str> = BTreeSet::new();
    let mut sessions: BTreeSet<&str> = BTreeSet::new();

    for row in rows {
        sessions.insert(&row.session_id);
        let cd = row.is_choice_diff();
        let xd = row.is_correctness_diff();
        if cd {
            choice_diffs += 1;
        }
        if xd {
            correctness_diffs += 1;
        }
        if cd || xd {
            drifted_sessions.insert(&row.session_id);
        }
        if row.is_text_diff() {
            text_diffs += 1;
        }
        if row.baseline.choice == Choice::ParseFail {
            pf_base += 1;
        }
        if row.candidate.choice == Choice::ParseFail {
            pf_cand += 1;
        }
        if row.is_matched_parse_failure() {
            pf_matched += 1;
        }
        if is_pathological(&row.candidate.raw_text, attractors) {
            pathological += 1;
        }
        let bucket = if row.turn <= split_at { &mut early } else { &mut late };
        bucket.rows += 1;
        if cd {
            bucket.choice_diffs += 1;
        }
        if xd {
            bucket.correctness_diffs += 1;
        }
    }

    let drift_rate = choice_diffs as f64 / n_rows as f64;
    Ok(DriftReport {
        n_rows,
        choice_diffs,
        correctness_diffs,
        text_diffs,
        parse_failures_baseline: pf_base,
        parse_failures_candidate: pf_cand,
        matched_parse_failures: pf_matched,
        pathological_count: pathological,
        drift_rate,
        gate,
        gate_pass: drift_rate <= gate,
        rule_of_three_bound: rule_of_three(n_rows),
        zero_drift: choice_diffs == 0 && correctness_diffs == 0,
        session_any_drift: drifted_sessions.len(),
        n_sessions: sessions.len(),
        early,
        late,
    })
}

/// Upper bound (~95%) on an event rate after observing zero events in `n`
/// trials: `3/n`.
pub fn rule_of_three(n: usize) -> f64 {
    assert!(n >= 1, "rule of three needs n >= 1");
    3.0 / n as f64
}

/// Intersection over union of two drift sets; 1.0 when both are empty.
pub fn jaccard_drift_overlap(set_a: &BTreeSet<String>, set_b: &BTreeSet<String>) -> f64 {
    let union = set_a.union(set_b).count();
    if union == 0 {
        return 1.0;
    }
    let inter = set_a.intersection(set_b).count();
    inter as f64 / union as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheCorrectnessSummary {
    pub n_rows: usize,
    pub text_identical: usize,
    pub text_diffs: usize,
    pub choice_diffs: usize,
    pub correctness_diffs: usize,
    pub matched_parse_failures: usize,
}

/// Byte-exact text comparison plus the standard drift counts.
pub fn cache_correctness_diff(rows: &[PairedRow]) -> CacheCorrectnessSummary {
    let mut s = CacheCorrectnessSummary {
        n_rows: rows.len(),
        text_identical: 0,
        text_diffs: 0,
        choice_diffs: 0,
        correctness_diffs: 0,
        matched_parse_failures: 0,
    };
    for row in rows {
        if row.is_text_diff() {
            s.text_diffs += 1;
        } else {
            s.text_identical += 1;
        }
        if row.is_choice_diff() {
            s.choice_diffs += 1;
        }
        if row.is_correctness_diff() {
            s.correctness_diffs += 1;
        }
        if row.is_matched_parse_failure() {
            s.matched_parse_failures += 1;
        }
    }
    s
}
