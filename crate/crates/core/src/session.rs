//! Cache-session policy simulation: explicit state machines over a
//! deterministic answer oracle and a parametric latency model.

use crate::drift::{is_pathological, parse_choice, AttractorSet, Choice, MatchMode};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("invalid latency model: {0}")]
    BadLatency(String),
    #[error("invalid policy: {0}")]
    BadPolicy(String),
    #[error("invalid basin model: {0}")]
    BadBasin(String),
}

/// One question in a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnSpec {
    pub question_id: String,
    /// 0 means open-ended; otherwise number of options (A..).
    pub n_options: u8,
    /// Keyed option letter for multiple-choice questions.
    #[serde(default = "default_key")]
    pub key: char,
    /// Appends the previous canonical dense answer to the prompt.
    #[serde(default)]
    pub dense_anchor: bool,
}

fn default_key() -> char {
    'A'
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuerySchedule {
    pub video_id: String,
    pub n_frames: usize,
    pub turns: Vec<TurnSpec>,
}

impl QuerySchedule {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.turns.is_empty() {
            return Err(SessionError::BadSchedule("no turns".into()));
        }
        if self.n_frames == 0 {
            return Err(SessionError::BadSchedule("n_frames must be >= 1".into()));
        }
        for t in &self.turns {
            if t.n_options == 1 || t.n_options > 6 {
                return Err(SessionError::BadSchedule(format!(
                    "question {}: n_options must be 0 (open-ended) or 2..=6",
                    t.question_id
                )));
            }
        }
        Ok(())
    }
}

/// Cache-session policy. `FailedAdaptive` is the failed variant kept as a
/// basin-reproduction fixture: it repairs at the first follow-up and then
/// reverts to the unrepaired state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    ColdDense,
    RawWarmReuse,
    FixedK(u32),
    AdaptiveRepair,
    ScheduledRefresh(u32),
    FailedAdaptive,
}

impl Policy {
    /// CLI spelling: cold | raw | fixed-k:K | adaptive | refresh:P | failed-adaptive
    pub fn parse(s: &str) -> Result<Policy, SessionError> {
        match s {
            "cold" => Ok(Policy::ColdDense),
            "raw" => Ok(Policy::RawWarmReuse),
            "adaptive" => Ok(Policy::AdaptiveRepair),
            "failed-adaptive" => Ok(Policy::FailedAdaptive),
            _ => {
                if let Some(k) = s.strip_prefix("fixed-k:") {
                    let k = k
                        .parse()
                        .map_err(|_| SessionError::BadPolicy(format!("bad k in {s}")))?;
                    return Ok(Policy::FixedK(k));
                }
                if let Some(p) = s.strip_prefix("refresh:") {
                    let p: u32 = p
                        .parse()
                        .map_err(|_| SessionError::BadPolicy(format!("bad period in {s}")))?;
                    if p < 1 {
                        return Err(SessionError::BadPolicy("period must be >= 1".into()));
                    }
                    return Ok(Policy::ScheduledRefresh(p));
                }
                Err(SessionError::BadPolicy(format!("unknown policy {s}")))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Policy::ColdDense => "cold".into(),
            Policy::RawWarmReuse => "raw".into(),
            Policy::FixedK(k) => format!("fixed-k:{k}"),
            Policy::AdaptiveRepair => "adaptive".into(),
            Policy::ScheduledRefresh(p) => format!("refresh:{p}"),
            Policy::FailedAdaptive => "failed-adaptive".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheSource {
    None,
    Fresh,
    RawReused,
    Repaired,
    Inherited,
}

/// Affine-in-tail-tokens latency model. Follow-up latency is
/// `t_text + c_tok * (tail_tokens - question_tokens)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyModel {
    pub t_cold: f64,
    pub t_text: f64,
    /// Seconds per appended token beyond the bare question text.
    pub c_tok: f64,
    pub tokens_per_frame: u64,
    pub question_tokens: u64,
    /// Extra tokens contributed by a dense-answer anchor.
    #[serde(default = "default_anchor_tokens")]
    pub anchor_tokens: u64,
}

fn default_anchor_tokens() -> u64 {
    16
}

impl Default for LatencyModel {
    fn default() -> Self {
        // calibrated to the 451-token/6.65 s vs 50-token/0.675 s attribution
        LatencyModel::from_attribution(50, 0.675, 451, 6.65, 38.0)
    }
}

impl LatencyModel {
    /// Solve the affine model from two (tail tokens, latency) observations.
    /// The low point is taken as the bare-question cost.
    pub fn from_attribution(
        tokens_lo: u64,
        latency_lo: f64,
        tokens_hi: u64,
        latency_hi: f64,
        t_cold: f64,
    ) -> Self {
        assert!(tokens_hi > tokens_lo && latency_hi > latency_lo);
        LatencyModel {
            t_cold,
            t_text: latency_lo,
            c_tok: (latency_hi - latency_lo) / (tokens_hi - tokens_lo) as f64,
            tokens_per_frame: tokens_hi - tokens_lo,
            question_tokens: tokens_lo,
            anchor_tokens: default_anchor_tokens(),
        }
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        if self.t_cold <= 0.0 || self.t_text <= 0.0 || self.c_tok <= 0.0 {
            return Err(SessionError::BadLatency("parameters must be > 0".into()));
        }
        if self.t_text >= self.t_cold {
            return Err(SessionError::BadLatency("t_text must be < t_cold".into()));
        }
        if self.tokens_per_frame == 0 || self.question_tokens == 0 {
            return Err(SessionError::BadLatency("token counts must be > 0".into()));
        }
        Ok(())
    }

    /// Appended prompt tokens for a follow-up re-prefilling `k` frames.
    pub fn tail_tokens(&self, k: u32) -> u64 {
        self.tokens_per_frame * k as u64 + self.question_tokens
    }

    pub fn prefix_tokens(&self, n_frames: usize) -> u64 {
        self.tokens_per_frame * n_frames as u64
    }

    fn followup_latency(&self, tail_tokens: u64) -> f64 {
        self.t_text + self.c_tok * tail_tokens.saturating_sub(self.question_tokens) as f64
    }
}

/// Basin model: raw-reused turns past the depth threshold deterministically
/// emit attractor output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasinModel {
    pub enabled: bool,
    /// Prefill-token depth beyond which raw reuse enters the basin.
    pub basin_depth_threshold: u64,
    pub attractors: Vec<String>,
}

impl Default for BasinModel {
    fn default() -> Self {
        BasinModel {
            enabled: true,
            basin_depth_threshold: 6500,
            attractors: vec!["addCriterion".into(), "\u{81EA}\u{52A8}\u{751F}\u{6210}".into()],
        }
    }
}

impl BasinModel {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.basin_depth_threshold == 0 {
            return Err(SessionError::BadBasin("threshold must be positive".into()));
        }
        if self.enabled && self.attractors.is_empty() {
            return Err(SessionError::BadBasin(
                "attractors required when basin enabled".into(),
            ));
        }
        Ok(())
    }

    pub fn in_basin(&self, source: CacheSource, depth_tokens: u64) -> bool {
        self.enabled && source == CacheSource::RawReused && depth_tokens > self.basin_depth_threshold
    }

    fn emit(&self) -> String {
        let a = &self.attractors[0];
        format!("{a} {a} {a}")
    }

    pub fn attractor_set(&self) -> AttractorSet {
        AttractorSet::new(self.attractors.clone(), MatchMode::Prefix)
    }
}

/// Deterministic answer oracle: answers the keyed option unless the cache
/// source is configured to corrupt, in which case it picks the next option.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnswerOracle {
    #[serde(default)]
    pub corrupt_sources: BTreeSet<CacheSource>,
}

impl AnswerOracle {
    fn answer(&self, turn: &TurnSpec, source: CacheSource) -> String {
        if turn.n_options == 0 {
            return format!("{} canonical response", turn.question_id);
        }
        let mut letter = turn.key;
        if self.corrupt_sources.contains(&source) {
            let idx = (letter as u8 - b'A' + 1) % turn.n_options;
            letter = (b'A' + idx) as char;
        }
        format!("Answer: {letter}.")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub policy: String,
    pub cache_source: CacheSource,
    pub raw_text: String,
    pub choice: Choice,
    pub correct: bool,
    pub latency_s: f64,
    pub tail_tokens: u64,
    pub prefix_coverage: f64,
    pub basin: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionLog {
    pub video_id: String,
    pub policy: String,
    pub seed: u64,
    pub turns: Vec<TurnRecord>,
}

impl SessionLog {
    pub fn followups(&self) -> impl Iterator<Item = &TurnRecord> {
        self.turns.iter().skip(1)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.turns {
            let mut v = serde_json::to_value(t).expect("serialize turn");
            v["video_id"] = serde_json::Value::String(self.video_id.clone());
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// What a follow-up does with the cache.
#[derive(Debug, Clone, Copy)]
enum FollowupAction {
    Cold,
    Raw,
    Repair(u32),
    Inherit,
    Revert,
}

fn followup_action(policy: Policy, followup_index: usize) -> FollowupAction {
    match policy {
        Policy::ColdDense => FollowupAction::Cold,
        Policy::RawWarmReuse => FollowupAction::Raw,
        Policy::FixedK(k) => FollowupAction::Repair(k),
        Policy::AdaptiveRepair => {
            if followup_index == 1 {
                FollowupAction::Repair(1)
            } else {
                FollowupAction::Inherit
            }
        }
        Policy::ScheduledRefresh(p) => {
            if followup_index == 1 || followup_index as u32 % p == 0 {
                FollowupAction::Repair(1)
            } else {
                FollowupAction::Inherit
            }
        }
        Policy::FailedAdaptive => {
            if followup_index == 1 {
                FollowupAction::Repair(1)
            } else {
                FollowupAction::Revert
            }
        }
    }
}

/// Run one session under a policy. Turn 0 is always cold and pays `t_cold`.
pub fn run_session(
    schedule: &QuerySchedule,
    policy: Policy,
    oracle: &AnswerOracle,
    latency: &LatencyModel,
    basin: &BasinModel,
    seed: u64,
) -> Result<SessionLog, SessionError> {
    schedule.validate()?;
    latency.validate()?;
    basin.validate()?;

    let prefix = latency.prefix_tokens(schedule.n_frames);
    let mut turns = Vec::with_capacity(schedule.turns.len());
    for (i, spec) in schedule.turns.iter().enumerate() {
        let anchor = if spec.dense_anchor {
            latency.anchor_tokens
        } else {
            0
        };
        let (source, latency_s, tail_tokens, coverage) = if i == 0 {
            (
                CacheSource::Fresh,
                latency.t_cold,
                prefix + latency.question_tokens + anchor,
                0.0,
            )
        } else {
            match followup_action(policy, i) {
                FollowupAction::Cold => (
                    CacheSource::Fresh,
                    latency.t_cold,
                    prefix + latency.question_tokens + anchor,
                    0.0,
                ),
                FollowupAction::Raw | FollowupAction::Revert => {
                    let tail = latency.question_tokens + anchor;
                    (
                        CacheSource::RawReused,
                        latency.followup_latency(tail),
                        tail,
                        prefix as f64 / (prefix + tail) as f64,
                    )
                }
                FollowupAction::Repair(k) => {
                    let tail = latency.tail_tokens(k) + anchor;
                    let reused = prefix.saturating_sub(latency.tokens_per_frame * k as u64);
                    (
                        CacheSource::Repaired,
                        latency.followup_latency(tail),
                        tail,
                        reused as f64 / (prefix + latency.question_tokens + anchor) as f64,
                    )
                }
                FollowupAction::Inherit => {
                    let tail = latency.question_tokens + anchor;
                    (
                        CacheSource::Inherited,
                        latency.followup_latency(tail),
                        tail,
                        prefix as f64 / (prefix + tail) as f64,
                    )
                }
            }
        };

        let in_basin = basin.in_basin(source, prefix);
        let raw_text = if in_basin {
            basin.emit()
        } else {
            oracle.answer(spec, source)
        };
        let choice = if spec.n_options == 0 {
            if is_pathological(&raw_text, &basin.attractor_set()) {
                Choice::ParseFail
            } else {
                Choice::OpenEnded
            }
        } else {
            parse_choice(&raw_text, spec.n_options).expect("validated option count")
        };
        let correct = matches!(choice, Choice::Letter(l) if l == spec.key);

        turns.push(TurnRecord {
            turn: i,
            policy: policy.label(),
            cache_source: source,
            raw_text,
            choice,
            correct,
            latency_s,
            tail_tokens,
            prefix_coverage: coverage,
            basin: in_basin,
        });
    }
    Ok(SessionLog {
        video_id: schedule.video_id.clone(),
        policy: policy.label(),
        seed,
        turns,
    })
}

/// Median cold-follow-up latency divided by median session-follow-up latency.
pub fn warm_speedup(cold_followup_median: f64, session_followup_median: f64) -> f64 {
    assert!(cold_followup_median > 0.0 && session_followup_median > 0.0);
    cold_followup_median / session_followup_median
}

/// Setup-inclusive session speedup for `q` same-video queries:
/// `q * t_cold_mean / (t_cold_first + (q - 1) * t_warm_mean)`.
pub fn session_speedup(q: usize, t_cold_mean: f64, t_cold_first: f64, t_warm_mean: f64) -> f64 {
    assert!(q >= 1 && t_cold_mean > 0.0 && t_cold_first > 0.0 && t_warm_mean > 0.0);
    q as f64 * t_cold_mean / (t_cold_first + (q - 1) as f64 * t_warm_mean)
}

/// Effective prompt-frame throughput on the warm follow-up denominator.
pub fn prompt_frame_throughput(n_frames: usize, warm_latency: f64) -> f64 {
    assert!(n_frames > 0 && warm_latency > 0.0);
    n_frames as f64 / warm_latency
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n_sessions: usize,
    pub n_queries: usize,
    pub n_followups: usize,
    pub median_followup_latency_s: f64,
    pub median_followup_tail_tokens: u64,
    pub pathological_followups: usize,
}

/// Independent sessions under a shared config, plus a cohort summary.
pub fn run_cohort(
    schedules: &[QuerySchedule],
    policy: Policy,
    oracle: &AnswerOracle,
    latency: &LatencyModel,
    basin: &BasinModel,
    seed: u64,
) -> Result<(Vec<SessionLog>, CohortSummary), SessionError> {
    let mut logs = Vec::with_capacity(schedules.len());
    for schedule in schedules {
        logs.push(run_session(schedule, policy, oracle, latency, basin, seed)?);
    }
    let mut followup_latencies: Vec<f64> = Vec::new();
    let mut followup_tails: Vec<u64> = Vec::new();
    let mut n_queries = 0;
    let mut pathological = 0;
    for log in &logs {
        n_queries += log.turns.len();
        for t in log.followups() {
            followup_latencies.push(t.latency_s);
            followup_tails.push(t.tail_tokens);
            if t.basin {
                pathological += 1;
            }
        }
    }
    Ok((
        logs,
        CohortSummary {
            n_sessions: schedules.len(),
            n_queries,
            n_followups: followup_latencies.len(),
            median_followup_latency_s: median_f64(&mut followup_latencies),
            median_followup_tail_tokens: median_u64(&mut followup_tails),
            pathological_followups: pathological,
        },
    ))
}

fn median_f64(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_u64(values: &mut [u64]) -> u64 {
    if values.is_empty() {
        return 0;
    }
    values.sort_unstable();
    values[values.len() / 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(video: &str, n_frames: usize, turns: usize, dense_anchor: bool) -> QuerySchedule {
        QuerySchedule {
            video_id: video.into(),
            n_frames,
            turns: (0..turns)
                .map(|t| TurnSpec {
                    question_id: format!("q{t:02}"),
                    n_options: 4,
                    key: 'A',
                    dense_anchor: dense_anchor && t > 0,
                })
                .collect(),
        }
    }

    fn run(policy: Policy, n_frames: usize, turns: usize) -> SessionLog {
        run_session(
            &schedule("v00", n_frames, turns, false),
            policy,
            &AnswerOracle::default(),
            &LatencyModel::default(),
            &BasinModel::default(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn policy_parse_round_trips() {
        for s in ["cold", "raw", "fixed-k:1", "adaptive", "refresh:10", "failed-adaptive"] {
            assert_eq!(Policy::parse(s).unwrap().label(), s);
        }
        assert!(Policy::parse("refresh:0").is_err());
        assert!(Policy::parse("nope").is_err());
    }

    #[test]
    fn turn_zero_always_pays_cold() {
        for policy in [
            Policy::ColdDense,
            Policy::RawWarmReuse,
            Policy::FixedK(1),
            Policy::AdaptiveRepair,
            Policy::ScheduledRefresh(10),
            Policy::FailedAdaptive,
        ] {
            let log = run(policy, 20, 3);
            assert_eq!(log.turns[0].latency_s, 38.0);
            assert_eq!(log.turns[0].cache_source, CacheSource::Fresh);
        }
    }

    #[test]
    fn fixed_k1_followup_tail_and_coverage() {
        let log = run(Policy::FixedK(1), 20, 3);
        let t = &log.turns[1];
        assert_eq!(t.tail_tokens, 451);
        assert!((t.latency_s - 6.65).abs() < 1e-9);
        assert!((t.prefix_coverage - 0.944).abs() < 0.001);
    }

    #[test]
    fn adaptive_second_followup_inherits_thin_tail() {
        let log = run(Policy::AdaptiveRepair, 20, 3);
        let t1 = &log.turns[1];
        let t2 = &log.turns[2];
        assert_eq!(t1.cache_source, CacheSource::Repaired);
        assert_eq!(t2.cache_source, CacheSource::Inherited);
        assert_eq!(t2.tail_tokens, 50);
        assert!((t2.latency_s - 0.675).abs() < 1e-9);
        assert!((t2.prefix_coverage - 0.994).abs() < 0.001);
    }

    #[test]
    fn paired_second_followup_speedup_and_tail_reduction() {
        let fixed = run(Policy::FixedK(1), 20, 3);
        let adaptive = run(Policy::AdaptiveRepair, 20, 3);
        let ratio = fixed.turns[2].latency_s / adaptive.turns[2].latency_s;
        assert!((ratio - 9.5).abs() <= 0.5);
        let red = 1.0
            - adaptive.turns[2].tail_tokens as f64 / fixed.turns[2].tail_tokens as f64;
        assert!((red - 0.889).abs() <= 0.005);
    }

    #[test]
    fn adaptive_dominates_fixed_k1_from_turn_two() {
        let fixed = run(Policy::FixedK(1), 20, 6);
        let adaptive = run(Policy::AdaptiveRepair, 20, 6);
        assert_eq!(fixed.turns[1].latency_s, adaptive.turns[1].latency_s);
        for t in 2..6 {
            assert!(adaptive.turns[t].latency_s < fixed.turns[t].latency_s);
        }
    }

    #[test]
    fn scheduled_refresh_fires_on_first_and_multiples() {
        let log = run(Policy::ScheduledRefresh(10), 20, 50);
        for (i, t) in log.turns.iter().enumerate().skip(1) {
            let want = if i == 1 || i % 10 == 0 {
                CacheSource::Repaired
            } else {
                CacheSource::Inherited
            };
            assert_eq!(t.cache_source, want, "follow-up {i}");
        }
    }

    #[test]
    fn raw_reuse_past_depth_threshold_enters_basin() {
        let log = run(Policy::RawWarmReuse, 20, 3);
        // 20 frames x 401 tokens = 8020 > 6500
        assert!(log.turns[1].basin && log.turns[2].basin);
        assert_eq!(log.turns[1].choice, Choice::ParseFail);
        let shallow = run(Policy::RawWarmReuse, 16, 3);
        // 16 frames x 401 = 6416 <= 6500
        assert!(!shallow.turns[1].basin);
    }

    #[test]
    fn failed_adaptive_reverts_and_collapses() {
        let log = run(Policy::FailedAdaptive, 20, 3);
        assert_eq!(log.turns[1].cache_source, CacheSource::Repaired);
        assert!(!log.turns[1].basin);
        assert_eq!(log.turns[2].cache_source, CacheSource::RawReused);
        assert!(log.turns[2].basin);
        assert!(log.turns[2].raw_text.starts_with("addCriterion"));
    }

    #[test]
    fn breadth_cohort_counts() {
        let schedules: Vec<QuerySchedule> = (0..31)
            .map(|i| schedule(&format!("v{i:02}"), 20, 3, false))
            .collect();
        let (logs, summary) = run_cohort(
            &schedules,
            Policy::AdaptiveRepair,
            &AnswerOracle::default(),
            &LatencyModel::default(),
            &BasinModel::default(),
            0,
        )
        .unwrap();
        assert_eq!(logs.len(), 31);
        assert_eq!(summary.n_queries, 93);
        assert_eq!(summary.n_followups, 62);
        assert_eq!(summary.pathological_followups, 0);
        assert!(logs.iter().all(|l| l.turns.iter().all(|t| t.correct)));
    }

    #[test]
    fn determinism_byte_identical() {
        let a = run(Policy::AdaptiveRepair, 20, 5);
        let b = run(Policy::AdaptiveRepair, 20, 5);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn warm_speedup_examples() {
        assert!((warm_speedup(6.65, 0.675) - 9.85).abs() < 0.01);
        assert_eq!(warm_speedup(2.0, 2.0), 1.0);
        assert!((warm_speedup(38.0, 0.807) - 47.1).abs() < 0.1);
    }

    #[test]
    fn session_speedup_examples() {
        assert!((session_speedup(2, 1.0, 1.0 / 1.04, 1.0 / 83.0) - 2.05).abs() < 0.1);
        assert!((session_speedup(10, 1.0, 1.0 / 1.04, 1.0 / 83.0) - 9.33).abs() < 0.1);
        assert!((session_speedup(50, 1.0, 1.0 / 1.04, 1.0 / 83.0) - 32.17).abs() < 0.1);
        assert!((session_speedup(1, 1.0, 1.0 / 1.04, 1.0 / 83.0) - 1.04).abs() < 1e-9);
        assert_eq!(session_speedup(7, 1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn throughput_examples() {
        assert!((prompt_frame_throughput(32, 0.585) - 54.7).abs() < 0.1);
        assert!((prompt_frame_throughput(8, 0.296) - 27.0).abs() < 0.1);
        assert_eq!(prompt_frame_throughput(8, 8.0), 1.0);
    }

    #[test]
    fn dense_anchor_adds_tokens() {
        let plain = run(Policy::AdaptiveRepair, 20, 3);
        let anchored = run_session(
            &schedule("v00", 20, 3, true),
            Policy::AdaptiveRepair,
            &AnswerOracle::default(),
            &LatencyModel::default(),
            &BasinModel::default(),
            0,
        )
        .unwrap();
        assert_eq!(
            anchored.turns[2].tail_tokens,
            plain.turns[2].tail_tokens + 16
        );
    }

    #[test]
    fn latency_model_calibration() {
        let m = LatencyModel::default();
        assert!((m.followup_latency(451) - 6.65).abs() < 1e-9);
        assert!((m.followup_latency(50) - 0.675).abs() < 1e-9);
        assert_eq!(m.tail_tokens(1), 451);
        assert_eq!(m.prefix_tokens(20), 8020);
    }
}
