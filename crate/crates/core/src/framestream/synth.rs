//! Seeded synthetic frame streams with exact change truth.

use super::{block_max_abs_diff, ChangeTruth, Frame, FrameStream, StreamError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    /// Single RGB color everywhere.
    Constant([u8; 3]),
    /// Per-pixel noise drawn once from the seed, constant across frames.
    Textured,
}

/// Axis-aligned mover: `rect` translated by `velocity` px/frame, pixels
/// inside get `intensity_delta` added (saturating per channel).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoverSpec {
    pub rect: Rect,
    pub velocity: (i64, i64),
    pub intensity_delta: i16,
}

/// One-frame intensity event inside `rect`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NovelEvent {
    pub frame: usize,
    pub rect: Rect,
    pub intensity_delta: i16,
}

/// Global additive flicker applied on frames where `t % period == 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Flicker {
    pub period: u32,
    pub amplitude: i16,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: u32,
    pub height: u32,
    pub n_frames: usize,
    pub background: Background,
    #[serde(default)]
    pub movers: Vec<MoverSpec>,
    #[serde(default)]
    pub novel_events: Vec<NovelEvent>,
    #[serde(default)]
    pub flicker: Option<Flicker>,
    pub seed: u64,
    /// Block size for the generated change truth; must divide both dimensions.
    #[serde(default = "default_block_size")]
    pub block_size: u32,
}

fn default_block_size() -> u32 {
    28
}

impl SynthSpec {
    fn validate(&self) -> Result<(), StreamError> {
        if self.n_frames < 2 {
            return Err(StreamError::BadSpec("n_frames must be >= 2".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(StreamError::BadSpec("zero dimension".into()));
        }
        if self.block_size == 0
            || self.width % self.block_size != 0
            || self.height % self.block_size != 0
        {
            return Err(StreamError::BadSpec(format!(
                "block size {} must divide {}x{}",
                self.block_size, self.width, self.height
            )));
        }
        for (i, m) in self.movers.iter().enumerate() {
            for t in 0..self.n_frames as i64 {
                let x = m.rect.x + t * m.velocity.0;
                let y = m.rect.y + t * m.velocity.1;
                if x < 0
                    || y < 0
                    || x + m.rect.w as i64 > self.width as i64
                    || y + m.rect.h as i64 > self.height as i64
                {
                    return Err(StreamError::BadSpec(format!(
                        "mover {i} leaves frame bounds at frame {t}"
                    )));
                }
            }
        }
        for (i, e) in self.novel_events.iter().enumerate() {
            if e.frame >= self.n_frames {
                return Err(StreamError::BadSpec(format!(
                    "novel event {i} at frame {} beyond stream length {}",
                    e.frame, self.n_frames
                )));
            }
            if e.rect.x < 0
                || e.rect.y < 0
                || e.rect.x + e.rect.w as i64 > self.width as i64
                || e.rect.y + e.rect.h as i64 > self.height as i64
            {
                return Err(StreamError::BadSpec(format!(
                    "novel event {i} rect outside frame bounds"
                )));
            }
        }
        Ok(())
    }
}

/// Generate a stream deterministically from the spec (seed included) together
/// with brute-force per-block change truth recomputed from the pixels.
pub fn synth_stream(spec: &SynthSpec) -> Result<(FrameStream, ChangeTruth), StreamError> {
    spec.validate()?;

    let background = match &spec.background {
        Background::Constant(rgb) => {
            let mut f = Frame::black(spec.width, spec.height);
            for y in 0..spec.height {
                for x in 0..spec.width {
                    f.set(x, y, *rgb);
                }
            }
            f
        }
        Background::Textured => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut pixels = vec![0u8; spec.width as usize * spec.height as usize * 3];
            rng.fill(&mut pixels[..]);
            Frame::new(spec.width, spec.height, pixels)?
        }
    };

    let mut frames = Vec::with_capacity(spec.n_frames);
    for t in 0..spec.n_frames {
        let mut f = background.clone();
        if let Some(fl) = &spec.flicker {
            if fl.period > 0 && (t as u32) % fl.period == 0 {
                add_delta_all(&mut f, fl.amplitude);
            }
        }
        for m in &spec.movers {
            let x0 = m.rect.x + t as i64 * m.velocity.0;
            let y0 = m.rect.y + t as i64 * m.velocity.1;
            add_delta_rect(&mut f, x0, y0, m.rect.w, m.rect.h, m.intensity_delta);
        }
        for e in &spec.novel_events {
            if e.frame == t {
                add_delta_rect(&mut f, e.rect.x, e.rect.y, e.rect.w, e.rect.h, e.intensity_delta);
            }
        }
        frames.push(f);
    }

    let truth = ChangeTruth {
        cols: spec.width / spec.block_size,
        rows: spec.height / spec.block_size,
        transitions: frames
            .windows(2)
            .map(|p| block_max_abs_diff(&p[0], &p[1], spec.block_size))
            .collect(),
    };
    let stream = FrameStream::new(format!("synth-{}", spec.seed), frames)?;
    Ok((stream, truth))
}

fn add_delta_all(frame: &mut Frame, delta: i16) {
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            let mut rgb = frame.get(x, y);
            for c in &mut rgb {
                *c = (*c as i16 + delta).clamp(0, 255) as u8;
            }
            frame.set(x, y, rgb);
        }
    }
}

fn add_delta_rect(frame: &mut Frame, x0: i64, y0: i64, w: u32, h: u32, delta: i16) {
    for y in y0..y0 + h as i64 {
        for x in x0..x0 + w as i64 {
            let mut rgb = frame.get(x as u32, y as u32);
            for c in &mut rgb {
                *c = (*c as i16 + delta).clamp(0, 255) as u8;
            }
            frame.set(x as u32, y as u32, rgb);
        }
    }
}
