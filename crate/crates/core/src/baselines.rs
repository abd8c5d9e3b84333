//! Fixed-evidence streaming baselines: frame-selection policies scored
//! against event windows by a coverage oracle.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid event: {0}")]
    BadEvent(String),
    #[error("event-window proxy requires a detector window")]
    MissingDetectorWindow,
    #[error("empty detector window")]
    EmptyDetectorWindow,
}

/// One streaming event: a ground-truth window inside the stream and the
/// frame index at which the query arrives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventSpec {
    pub stream_len: usize,
    pub window: (usize, usize),
    pub query_time: usize,
    #[serde(default = "default_min_coverage")]
    pub min_coverage: usize,
}

fn default_min_coverage() -> usize {
    1
}

impl EventSpec {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let (a, b) = self.window;
        if a > b || b >= self.stream_len {
            return Err(BaselineError::BadEvent(format!(
                "window [{a},{b}] outside stream of length {}",
                self.stream_len
            )));
        }
        if self.query_time < b || self.query_time >= self.stream_len {
            return Err(BaselineError::BadEvent(format!(
                "query_time {} must be in [{b}, {})",
                self.query_time, self.stream_len
            )));
        }
        if self.min_coverage == 0 {
            return Err(BaselineError::BadEvent("min_coverage must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// `n` uniformly spaced frames over [0, query_time], endpoints included.
    LowFpsDense { n: usize },
    /// One frame at query time.
    Screenshot,
    /// The `k` most recent frames up to query time, clamped at 0.
    RecencyLastK { k: usize },
    /// `n` uniform frames inside a (possibly misaligned) detector window.
    EventWindowProxy { n: usize },
}

impl SelectionPolicy {
    pub fn label(&self) -> String {
        match self {
            SelectionPolicy::LowFpsDense { n } => format!("low-fps-dense({n})"),
            SelectionPolicy::Screenshot => "screenshot".into(),
            SelectionPolicy::RecencyLastK { k } => format!("recency-last-{k}"),
            SelectionPolicy::EventWindowProxy { n } => format!("event-window-proxy({n})"),
        }
    }

    /// The four stock policies at their default budgets.
    pub fn standard_set() -> Vec<SelectionPolicy> {
        vec![
            SelectionPolicy::LowFpsDense { n: 4 },
            SelectionPolicy::Screenshot,
            SelectionPolicy::RecencyLastK { k: 4 },
            SelectionPolicy::EventWindowProxy { n: 4 },
        ]
    }
}

/// Uniform spacing with half-up rounding and de-duplication.
fn uniform_indices(lo: usize, hi: usize, n: usize) -> Vec<usize> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        let x = lo as f64 + (hi - lo) as f64 * i as f64 / (n - 1) as f64;
        out.insert((x + 0.5).floor() as usize);
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Miss,
}

/// Sorted frame indices selected by a policy for one event.
pub fn select_frames(
    policy: SelectionPolicy,
    event: &EventSpec,
    detector_window: Option<(usize, usize)>,
) -> Result<Vec<usize>, BaselineError> {
    event.validate()?;
    match policy {
        SelectionPolicy::LowFpsDense { n } => Ok(uniform_indices(0, event.query_time, n)),
        SelectionPolicy::Screenshot => Ok(vec![event.query_time]),
        SelectionPolicy::RecencyLastK { k } => {
            let lo = event.query_time.saturating_sub(k.saturating_sub(1));
            Ok((lo..=event.query_time).collect())
        }
        SelectionPolicy::EventWindowProxy { n } => {
            let (a, b) = detector_window.ok_or(BaselineError::MissingDetectorWindow)?;
            if a > b {
                return Err(BaselineError::EmptyDetectorWindow);
            }
            Ok(uniform_indices(a, b, n))
        }
    }
}

/// Fresh-oracle rule: a selection matches iff at least `min_coverage` of its
/// frames fall inside the true event window.
pub fn score_event(selected: &[usize], event: &EventSpec) -> Verdict {
    assert!(!selected.is_empty(), "selection must be non-empty");
    let (a, b) = event.window;
    let inside = selected.iter().filter(|&&f| f >= a && f <= b).count();
    if inside >= event.min_coverage {
        Verdict::Match
    } else {
        Verdict::Miss
    }
}

/// Jitter applied to the truth window to model an imperfect detector.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct DetectorJitter {
    #[serde(default)]
    pub offset: i64,
    #[serde(default)]
    pub stretch: i64,
}

impl DetectorJitter {
    pub fn window_for(&self, event: &EventSpec) -> (usize, usize) {
        let max = event.stream_len as i64 - 1;
        let a = (event.window.0 as i64 + self.offset - self.stretch).clamp(0, max);
        let b = (event.window.1 as i64 + self.offset + self.stretch).clamp(a, max);
        (a as usize, b as usize)
    }
}

/// Constructed 22-event corpus: mid-stream windows of medium width that
/// mostly precede query time, so uniform low-FPS sampling wins strictly.
pub fn demo_corpus() -> Vec<EventSpec> {
    let mut events = Vec::new();
    let window_starts: [usize; 14] = [23, 24, 25, 26, 27, 28, 30, 56, 57, 58, 59, 60, 61, 56];
    for a in window_starts {
        events.push(EventSpec {
            stream_len: 100,
            window: (a, a + 10),
            query_time: 99,
            min_coverage: 1,
        });
    }
    for _ in 0..4 {
        // windows reaching query time: every policy can hit these
        events.push(EventSpec {
            stream_len: 100,
            window: (89, 99),
            query_time: 99,
            min_coverage: 1,
        });
    }
    for _ in 0..4 {
        // dead zone between uniform sample points: nobody hits these
        events.push(EventSpec {
            stream_len: 100,
            window: (40, 50),
            query_time: 99,
            min_coverage: 1,
        });
    }
    events
}

/// Detector misalignment used with the demo corpus: a 12-frame lag that
/// overshoots the 10-frame windows.
pub fn demo_jitter() -> DetectorJitter {
    DetectorJitter {
        offset: 12,
        stretch: 0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineRow {
    pub policy: String,
    pub matches: usize,
    pub events: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineTable {
    /// Rows sorted by descending match count (then label).
    pub rows: Vec<BaselineRow>,
}

/// Score every policy on every event; counts are plain per-event sums.
pub fn baseline_table(
    events: &[EventSpec],
    policies: &[SelectionPolicy],
    detector: DetectorJitter,
) -> Result<BaselineTable, BaselineError> {
    if events.is_empty() {
        return Err(BaselineError::BadEvent("no events".into()));
    }
    let mut rows = Vec::with_capacity(policies.len());
    for &policy in policies {
        let mut matches = 0;
        for event in events {
            let detector_window = match policy {
                SelectionPolicy::EventWindowProxy { .. } => Some(detector.window_for(event)),
                _ => None,
            };
            let selected = select_frames(policy, event, detector_window)?;
            if score_event(&selected, event) == Verdict::Match {
                matches += 1;
            }
        }
        rows.push(BaselineRow {
            policy: policy.label(),
            matches,
            events: events.len(),
        });
    }
    rows.sort_by(|a, b| b.matches.cmp(&a.matches).then(a.policy.cmp(&b.policy)));
    Ok(BaselineTable { rows })
}

impl BaselineTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("policy,matches,events\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.policy, r.matches, r.events));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Policy | Matches | Events |\n|---|---|---|\n");
        for r in &self.rows {
            out.push_str(&format!("| {} | {} | {} |\n", r.policy, r.matches, r.events));
        }
        out
    }

    pub fn matches_for(&self, label: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.policy == label).map(|r| r.matches)
    }
}
