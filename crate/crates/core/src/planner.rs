//! Temporal routing planner: per-block change scores, static/shifted/novel
//! classification, bounded staleness, and effective fresh-frame accounting.

use crate::framestream::{ActiveMask, Frame, FrameStream};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("frame dimensions {got_w}x{got_h} do not match grid {want_w}x{want_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("invalid thresholds: need 0 <= tau_static < tau_novel <= 255, got ({0}, {1})")]
    BadThresholds(u8, u8),
    #[error("block size {block_size} does not divide {width}x{height}")]
    BadGeometry {
        block_size: u32,
        width: u32,
        height: u32,
    },
    #[error("stream too short: need at least 2 frames, got {0}")]
    StreamTooShort(usize),
    #[error("no active blocks")]
    NoActiveBlocks,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// Planner block geometry over a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrid {
    pub block_size: u32,
    pub cols: u32,
    pub rows: u32,
}

impl BlockGrid {
    pub fn for_frame(width: u32, height: u32, block_size: u32) -> Result<Self, PlannerError> {
        if block_size == 0 || width % block_size != 0 || height % block_size != 0 {
            return Err(PlannerError::BadGeometry {
                block_size,
                width,
                height,
            });
        }
        Ok(BlockGrid {
            block_size,
            cols: width / block_size,
            rows: height / block_size,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.cols as usize * self.rows as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_static: u8,
    pub tau_novel: u8,
}

impl Thresholds {
    pub fn new(tau_static: u8, tau_novel: u8) -> Result<Self, PlannerError> {
        if tau_static >= tau_novel {
            return Err(PlannerError::BadThresholds(tau_static, tau_novel));
        }
        Ok(Thresholds {
            tau_static,
            tau_novel,
        })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_static: 8,
            tau_novel: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockClass {
    Static,
    Shifted,
    Novel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reuse,
    Fresh,
}

/// Per-block staleness counters. Ages count transitions since the last fresh
/// refresh; a block refreshes when its age would exceed `max_age`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerState {
    ages: Vec<u32>,
    max_age: u32,
}

impl PlannerState {
    pub fn new(n_blocks: usize, max_age: u32) -> Self {
        PlannerState {
            ages: vec![0; n_blocks],
            max_age,
        }
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn max_age(&self) -> u32 {
        self.max_age
    }
}

/// Max-abs RGB difference per block, integer in [0, 255].
pub fn block_scores(
    prev: &Frame,
    cur: &Frame,
    grid: &BlockGrid,
) -> Result<Vec<u8>, PlannerError> {
    let want_w = grid.cols * grid.block_size;
    let want_h = grid.rows * grid.block_size;
    for f in [prev, cur] {
        if f.width() != want_w || f.height() != want_h {
            return Err(PlannerError::DimensionMismatch {
                got_w: f.width(),
                got_h: f.height(),
                want_w,
                want_h,
            });
        }
    }
    let mut scores = vec![0u8; grid.n_blocks()];
    for y in 0..want_h {
        let br = y / grid.block_size;
        for x in 0..want_w {
            let bc = x / grid.block_size;
            let a = prev.get(x, y);
            let b = cur.get(x, y);
            let cell = &mut scores[(br * grid.cols + bc) as usize];
            for c in 0..3 {
                let d = a[c].abs_diff(b[c]);
                if d > *cell {
                    *cell = d;
                }
            }
        }
    }
    Ok(scores)
}

/// Threshold partition. Ties fall into the lower class.
pub fn classify(scores: &[u8], thresholds: Thresholds) -> Vec<BlockClass> {
    scores
        .iter()
        .map(|&s| {
            if s <= thresholds.tau_static {
                BlockClass::Static
            } else if s <= thresholds.tau_novel {
                BlockClass::Shifted
            } else {
                BlockClass::Novel
            }
        })
        .collect()
}

/// Advance the staleness counters one transition. Novel blocks refresh;
/// static/shifted blocks reuse unless their age would exceed the bound.
pub fn step(
    state: &PlannerState,
    classes: &[BlockClass],
) -> Result<(PlannerState, Vec<Decision>), PlannerError> {
    if classes.len() != state.ages.len() {
        return Err(PlannerError::GridMismatch(format!(
            "classes len {} != state len {}",
            classes.len(),
            state.ages.len()
        )));
    }
    let mut next = state.clone();
    let mut decisions = Vec::with_capacity(classes.len());
    for (i, class) in classes.iter().enumerate() {
        let fresh = matches!(class, BlockClass::Novel) || state.ages[i] + 1 > state.max_age;
        if fresh {
            next.ages[i] = 0;
            decisions.push(Decision::Fresh);
        } else {
            next.ages[i] = state.ages[i] + 1;
            decisions.push(Decision::Reuse);
        }
    }
    Ok((next, decisions))
}

/// Fraction of active blocks reused on a transition; padded blocks excluded.
pub fn reuse_ratio(decisions: &[Decision], mask: &ActiveMask) -> Result<f64, PlannerError> {
    let n_blocks = mask.cols() as usize * mask.rows() as usize;
    if decisions.len() != n_blocks {
        return Err(PlannerError::GridMismatch(format!(
            "decisions len {} != mask blocks {}",
            decisions.len(),
            n_blocks
        )));
    }
    let mut active = 0usize;
    let mut reused = 0usize;
    for row in 0..mask.rows() {
        for col in 0..mask.cols() {
            if mask.is_active(col, row) {
                active += 1;
                if decisions[(row * mask.cols() + col) as usize] == Decision::Reuse {
                    reused += 1;
                }
            }
        }
    }
    if active == 0 {
        return Err(PlannerError::NoActiveBlocks);
    }
    Ok(reused as f64 / active as f64)
}

/// Effective fresh-frame count: `1 + (N-1)(1 - r_mean)`.
pub fn effective_fresh(n_frames: usize, r_mean: f64) -> f64 {
    1.0 + (n_frames as f64 - 1.0) * (1.0 - r_mean)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanConfig {
    pub block_size: u32,
    pub thresholds: Thresholds,
    pub max_age: u32,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            block_size: 28,
            thresholds: Thresholds::default(),
            max_age: 4,
        }
    }
}

/// One planned transition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionLog {
    pub t: usize,
    pub scores: Vec<u8>,
    pub classes: Vec<BlockClass>,
    pub decisions: Vec<Decision>,
    pub ages_after: Vec<u32>,
    pub r_reuse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanSummary {
    pub n_frames: usize,
    pub mean_r_reuse: f64,
    pub f_eff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanLog {
    pub grid: BlockGrid,
    pub transitions: Vec<TransitionLog>,
    pub summary: PlanSummary,
}

/// Plan a full stream. The mask defaults to all-active when `None` (no
/// padding); the first frame is charged fully fresh via the `1 +` term.
pub fn plan_stream(
    stream: &FrameStream,
    config: &PlanConfig,
    mask: Option<&ActiveMask>,
) -> Result<PlanLog, PlannerError> {
    if stream.len() < 2 {
        return Err(PlannerError::StreamTooShort(stream.len()));
    }
    let grid = BlockGrid::for_frame(stream.width(), stream.height(), config.block_size)?;
    let default_mask;
    let mask = match mask {
        Some(m) => {
            if m.cols() != grid.cols || m.rows() != grid.rows {
                return Err(PlannerError::GridMismatch(format!(
                    "mask {}x{} != grid {}x{}",
                    m.cols(),
                    m.rows(),
                    grid.cols,
                    grid.rows
                )));
            }
            m
        }
        None => {
            default_mask = ActiveMask::all_active(grid.cols, grid.rows);
            &default_mask
        }
    };

    let mut state = PlannerState::new(grid.n_blocks(), config.max_age);
    let mut transitions = Vec::with_capacity(stream.len() - 1);
    let mut r_sum = 0.0;
    for (t, pair) in stream.frames().windows(2).enumerate() {
        let scores = block_scores(&pair[0], &pair[1], &grid)?;
        let classes = classify(&scores, config.thresholds);
        let (next, decisions) = step(&state, &classes)?;
        state = next;
        let r_reuse = reuse_ratio(&decisions, mask)?;
        r_sum += r_reuse;
        transitions.push(TransitionLog {
            t: t + 1,
            scores,
            classes,
            decisions,
            ages_after: state.ages().to_vec(),
            r_reuse,
        });
    }
    let mean_r_reuse = r_sum / transitions.len() as f64;
    let summary = PlanSummary {
        n_frames: stream.len(),
        mean_r_reuse,
        f_eff: effective_fresh(stream.len(), mean_r_reuse),
    };
    Ok(PlanLog {
        grid,
        transitions,
        summary,
    })
}

impl PlanLog {
    /// JSONL form: one record per transition plus a summary record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for tr in &self.transitions {
            out.push_str(&serde_json::to_string(tr).expect("serialize transition"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("serialize summary"));
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framestream::{
        synth_stream, Background, Frame, MoverSpec, NovelEvent, Rect, SynthSpec,
    };

    fn solid(side: u32, v: u8) -> Frame {
        let mut f = Frame::black(side, side);
        for y in 0..side {
            for x in 0..side {
                f.set(x, y, [v, v, v]);
            }
        }
        f
    }

    #[test]
    fn thresholds_require_order() {
        assert!(Thresholds::new(8, 48).is_ok());
        assert!(Thresholds::new(48, 48).is_err());
        assert!(Thresholds::new(50, 48).is_err());
    }

    #[test]
    fn scores_zero_on_identical_frames() {
        let grid = BlockGrid::for_frame(56, 56, 28).unwrap();
        let f = solid(56, 60);
        assert_eq!(block_scores(&f, &f, &grid).unwrap(), vec![0; 4]);
    }

    #[test]
    fn scores_localize_single_pixel_delta() {
        let grid = BlockGrid::for_frame(56, 56, 28).unwrap();
        let a = solid(56, 100);
        let mut b = a.clone();
        b.set(30, 2, [100, 137, 100]);
        assert_eq!(block_scores(&a, &b, &grid).unwrap(), vec![0, 37, 0, 0]);
    }

    #[test]
    fn scores_reject_dimension_mismatch() {
        let grid = BlockGrid::for_frame(56, 56, 28).unwrap();
        let a = solid(56, 0);
        let b = solid(84, 0);
        assert!(block_scores(&a, &b, &grid).is_err());
    }

    #[test]
    fn classify_ties_fall_low() {
        let taus = Thresholds::new(8, 48).unwrap();
        assert_eq!(
            classify(&[0, 8, 9, 48, 49], taus),
            vec![
                BlockClass::Static,
                BlockClass::Static,
                BlockClass::Shifted,
                BlockClass::Shifted,
                BlockClass::Novel
            ]
        );
    }

    #[test]
    fn all_static_refreshes_every_max_age_plus_one() {
        // max_age=4: four reuses then a forced refresh, period 5
        let mut state = PlannerState::new(1, 4);
        let mut pattern = Vec::new();
        for _ in 0..10 {
            let (next, d) = step(&state, &[BlockClass::Static]).unwrap();
            state = next;
            pattern.push(d[0]);
        }
        use Decision::*;
        assert_eq!(
            pattern,
            vec![Reuse, Reuse, Reuse, Reuse, Fresh, Reuse, Reuse, Reuse, Reuse, Fresh]
        );
    }

    #[test]
    fn all_novel_keeps_ages_zero() {
        let mut state = PlannerState::new(2, 4);
        for _ in 0..5 {
            let (next, d) = step(&state, &[BlockClass::Novel, BlockClass::Novel]).unwrap();
            assert!(d.iter().all(|&x| x == Decision::Fresh));
            assert_eq!(next.ages(), &[0, 0]);
            state = next;
        }
    }

    #[test]
    fn shifted_with_max_age_one_alternates() {
        let mut state = PlannerState::new(1, 1);
        let mut pattern = Vec::new();
        for _ in 0..6 {
            let (next, d) = step(&state, &[BlockClass::Shifted]).unwrap();
            state = next;
            pattern.push(d[0]);
        }
        use Decision::*;
        assert_eq!(pattern, vec![Reuse, Fresh, Reuse, Fresh, Reuse, Fresh]);
    }

    #[test]
    fn reuse_ratio_ignores_padding() {
        let mask = ActiveMask::new(2, 2, vec![true, true, false, false]).unwrap();
        let d = vec![
            Decision::Reuse,
            Decision::Reuse,
            Decision::Fresh,
            Decision::Fresh,
        ];
        assert_eq!(reuse_ratio(&d, &mask).unwrap(), 1.0);
    }

    #[test]
    fn reuse_ratio_five_of_eight() {
        let mask = ActiveMask::all_active(4, 2);
        let mut d = vec![Decision::Reuse; 8];
        d[0] = Decision::Fresh;
        d[3] = Decision::Fresh;
        d[6] = Decision::Fresh;
        assert!((reuse_ratio(&d, &mask).unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn effective_fresh_matches_published_frontier() {
        assert!((effective_fresh(8, 0.635714) - 3.55).abs() < 0.01);
        assert!((effective_fresh(8, 0.562857) - 4.06).abs() < 0.01);
        assert_eq!(effective_fresh(8, 1.0), 1.0);
        assert_eq!(effective_fresh(8, 0.0), 8.0);
    }

    fn static_spec(n_frames: usize) -> SynthSpec {
        SynthSpec {
            width: 112,
            height: 112,
            n_frames,
            background: Background::Constant([90, 90, 90]),
            movers: vec![],
            novel_events: vec![],
            flicker: None,
            seed: 3,
            block_size: 28,
        }
    }

    #[test]
    fn plan_static_stream_charges_only_staleness() {
        let (stream, _) = synth_stream(&static_spec(8)).unwrap();
        let log = plan_stream(&stream, &PlanConfig::default(), None).unwrap();
        // seven transitions, one staleness refresh at transition 5
        let rs: Vec<f64> = log.transitions.iter().map(|t| t.r_reuse).collect();
        assert_eq!(rs, vec![1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        assert!((log.summary.mean_r_reuse - 6.0 / 7.0).abs() < 1e-12);
        assert!((log.summary.f_eff - 2.0).abs() < 1e-12);
    }

    #[test]
    fn plan_all_novel_stream_costs_full() {
        let mut spec = static_spec(8);
        // flicker every frame far above tau_novel forces all-novel transitions
        spec.flicker = Some(crate::framestream::Flicker {
            period: 2,
            amplitude: 120,
        });
        let (stream, _) = synth_stream(&spec).unwrap();
        let log = plan_stream(&stream, &PlanConfig::default(), None).unwrap();
        assert_eq!(log.summary.mean_r_reuse, 0.0);
        assert_eq!(log.summary.f_eff, 8.0);
    }

    #[test]
    fn plan_fresh_exactly_where_truth_exceeds_tau_novel() {
        let mut spec = static_spec(6);
        spec.movers.push(MoverSpec {
            rect: Rect { x: 0, y: 28, w: 28, h: 28 },
            velocity: (14, 0),
            intensity_delta: 110,
        });
        spec.novel_events.push(NovelEvent {
            frame: 3,
            rect: Rect { x: 56, y: 84, w: 28, h: 28 },
            intensity_delta: -80,
        });
        let (stream, truth) = synth_stream(&spec).unwrap();
        let config = PlanConfig {
            max_age: 100,
            ..PlanConfig::default()
        };
        let log = plan_stream(&stream, &config, None).unwrap();
        for (t, tr) in log.transitions.iter().enumerate() {
            assert_eq!(tr.scores, truth.transitions[t]);
            for (b, &score) in tr.scores.iter().enumerate() {
                let want = if score > 48 { Decision::Fresh } else { Decision::Reuse };
                assert_eq!(tr.decisions[b], want, "t={t} b={b}");
            }
        }
    }

    #[test]
    fn plan_rejects_short_stream() {
        let (stream, _) = synth_stream(&static_spec(2)).unwrap();
        let short = crate::framestream::FrameStream::new("one", vec![stream.frames()[0].clone()])
            .unwrap();
        assert!(plan_stream(&short, &PlanConfig::default(), None).is_err());
    }
}
