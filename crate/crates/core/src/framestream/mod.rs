//! Frame streams: PPM loading, square-pad preprocessing, and synthetic
//! streams with exact per-block change truth.

mod ppm;
mod synth;

pub use ppm::{read_ppm, write_ppm};
pub use synth::{synth_stream, Background, Flicker, MoverSpec, NovelEvent, Rect, SynthSpec};

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("manifest {0}: {1}")]
    Manifest(PathBuf, String),
    #[error("missing file for entry {index} ({path}): {source}")]
    MissingFile {
        index: usize,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed PPM for entry {index} ({path}): {reason}")]
    MalformedPpm {
        index: usize,
        path: PathBuf,
        reason: String,
    },
    #[error("dimension mismatch at entry {index} ({path}): got {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        index: usize,
        path: PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("target {target} not divisible by block size {block_size}")]
    BadTarget { target: u32, block_size: u32 },
    #[error("invalid synth spec: {0}")]
    BadSpec(String),
    #[error("invalid frame: {0}")]
    BadFrame(String),
}

/// Decoded RGB frame, 8-bit channels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, StreamError> {
        if width == 0 || height == 0 {
            return Err(StreamError::BadFrame("zero dimension".into()));
        }
        let want = width as usize * height as usize * 3;
        if pixels.len() != want {
            return Err(StreamError::BadFrame(format!(
                "pixel buffer length {} != {} ({}x{}x3)",
                pixels.len(),
                want,
                width,
                height
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    pub fn black(width: u32, height: u32) -> Self {
        Frame {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// RGB triple at (x, y).
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Per-block activity grid: true where a block intersects original
/// (non-padding) content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveMask {
    cols: u32,
    rows: u32,
    active: Vec<bool>,
}

impl ActiveMask {
    pub fn new(cols: u32, rows: u32, active: Vec<bool>) -> Result<Self, StreamError> {
        if active.len() != cols as usize * rows as usize {
            return Err(StreamError::BadFrame("mask size mismatch".into()));
        }
        if !active.iter().any(|&a| a) {
            return Err(StreamError::BadFrame("mask has no active block".into()));
        }
        Ok(ActiveMask { cols, rows, active })
    }

    pub fn all_active(cols: u32, rows: u32) -> Self {
        ActiveMask {
            cols,
            rows,
            active: vec![true; cols as usize * rows as usize],
        }
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn is_active(&self, col: u32, row: u32) -> bool {
        self.active[row as usize * self.cols as usize + col as usize]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Ordered frames with uniform dimensions.
#[derive(Debug, Clone)]
pub struct FrameStream {
    pub source_id: String,
    frames: Vec<Frame>,
}

impl FrameStream {
    pub fn new(source_id: impl Into<String>, frames: Vec<Frame>) -> Result<Self, StreamError> {
        if frames.is_empty() {
            return Err(StreamError::BadFrame("empty stream".into()));
        }
        let (w, h) = (frames[0].width, frames[0].height);
        if let Some((i, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| f.width != w || f.height != h)
        {
            return Err(StreamError::BadFrame(format!(
                "frame {} is {}x{}, expected {}x{}",
                i, f.width, f.height, w, h
            )));
        }
        Ok(FrameStream {
            source_id: source_id.into(),
            frames,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height
    }
}

/// Exact per-transition, per-block max-abs channel differences computed by
/// the generator. Serves as a brute-force oracle for the planner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeTruth {
    pub cols: u32,
    pub rows: u32,
    /// One grid per transition, row-major, length cols*rows each.
    pub transitions: Vec<Vec<u8>>,
}

/// Load a stream from a JSON manifest: an array of PPM paths relative to the
/// manifest's directory.
pub fn load_stream(manifest_path: &Path) -> Result<FrameStream, StreamError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| {
        StreamError::Manifest(manifest_path.to_path_buf(), format!("unreadable: {e}"))
    })?;
    let entries: Vec<String> = serde_json::from_str(&text).map_err(|e| {
        StreamError::Manifest(manifest_path.to_path_buf(), format!("not a JSON array of paths: {e}"))
    })?;
    if entries.is_empty() {
        return Err(StreamError::Manifest(
            manifest_path.to_path_buf(),
            "manifest lists no frames".into(),
        ));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut frames = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let path = base.join(entry);
        let bytes = fs::read(&path).map_err(|source| StreamError::MissingFile {
            index,
            path: path.clone(),
            source,
        })?;
        let frame = read_ppm(&bytes).map_err(|reason| StreamError::MalformedPpm {
            index,
            path: path.clone(),
            reason,
        })?;
        if index > 0 {
            let first: &Frame = &frames[0];
            if frame.width != first.width || frame.height != first.height {
                return Err(StreamError::DimensionMismatch {
                    index,
                    path,
                    got_w: frame.width,
                    got_h: frame.height,
                    want_w: first.width,
                    want_h: first.height,
                });
            }
        }
        frames.push(frame);
    }
    FrameStream::new(manifest_path.display().to_string(), frames)
}

/// Square-pad (centered, black) then nearest-neighbor resize to
/// `target`x`target`. The mask marks every block that overlaps original
/// content; blocks made solely of padding are inactive.
pub fn square_pad_resize(
    frame: &Frame,
    target: u32,
    block_size: u32,
) -> Result<(Frame, ActiveMask), StreamError> {
    if block_size == 0 || target % block_size != 0 {
        return Err(StreamError::BadTarget { target, block_size });
    }
    let side = frame.width.max(frame.height);
    let off_x = (side - frame.width) / 2;
    let off_y = (side - frame.height) / 2;

    let mut out = Frame::black(target, target);
    for y in 0..target {
        // nearest-neighbor back-map into the padded square
        let sy = (y as u64 * side as u64 / target as u64) as u32;
        for x in 0..target {
            let sx = (x as u64 * side as u64 / target as u64) as u32;
            let inside = sx >= off_x
                && sx < off_x + frame.width
                && sy >= off_y
                && sy < off_y + frame.height;
            if inside {
                out.set(x, y, frame.get(sx - off_x, sy - off_y));
            }
        }
    }

    // Content rectangle in output coordinates (half-open). ceil/floor keep the
    // mask exact: a block is active iff some output pixel maps to content.
    let content_x0 = div_ceil_u64(off_x as u64 * target as u64, side as u64);
    let content_x1 = div_ceil_u64((off_x + frame.width) as u64 * target as u64, side as u64);
    let content_y0 = div_ceil_u64(off_y as u64 * target as u64, side as u64);
    let content_y1 = div_ceil_u64((off_y + frame.height) as u64 * target as u64, side as u64);

    let n = target / block_size;
    let mut active = vec![false; (n * n) as usize];
    for br in 0..n {
        let y0 = (br * block_size) as u64;
        let y1 = y0 + block_size as u64;
        for bc in 0..n {
            let x0 = (bc * block_size) as u64;
            let x1 = x0 + block_size as u64;
            let hit = x1 > content_x0 && x0 < content_x1 && y1 > content_y0 && y0 < content_y1;
            active[(br * n + bc) as usize] = hit;
        }
    }
    let mask = ActiveMask::new(n, n, active)?;
    Ok((out, mask))
}

fn div_ceil_u64(a: u64, b: u64) -> u64 {
    (a + b - 1) / b
}

/// Brute-force per-block max-abs channel difference between two frames.
/// Independent of the planner's implementation; used to build [`ChangeTruth`].
pub fn block_max_abs_diff(prev: &Frame, cur: &Frame, block_size: u32) -> Vec<u8> {
    assert_eq!(prev.width, cur.width);
    assert_eq!(prev.height, cur.height);
    let cols = prev.width / block_size;
    let rows = prev.height / block_size;
    let mut grid = vec![0u8; (cols * rows) as usize];
    for y in 0..prev.height {
        let br = (y / block_size).min(rows - 1);
        for x in 0..prev.width {
            let bc = (x / block_size).min(cols - 1);
            let a = prev.get(x, y);
            let b = cur.get(x, y);
            for c in 0..3 {
                let d = a[c].abs_diff(b[c]);
                let cell = &mut grid[(br * cols + bc) as usize];
                if d > *cell {
                    *cell = d;
                }
            }
        }
    }
    grid
}
