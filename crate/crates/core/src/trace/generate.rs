use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TraceRecord;
use crate::intent::HandMask;
use crate::model::{CameraConfig, JointId, JointSample, SkeletonFrame};

/// `[x_pixels, y_pixels, z_meters]`.
pub type Waypoint = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskTag {
    Fist,
    Open,
}

/// A stretch of frames. Each hand follows its waypoints linearly over the
/// segment; a hand without waypoints is untracked for the whole segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub frames: u32,
    #[serde(default)]
    pub left: Vec<Waypoint>,
    #[serde(default)]
    pub right: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskTag>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GestureScript {
    #[serde(rename = "segment", default)]
    pub segments: Vec<Segment>,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("segment {0}: duration must be positive")]
    EmptySegment(usize),
    #[error("segment {segment}: waypoint {value:?} has non-positive depth")]
    BadDepth { segment: usize, value: Waypoint },
    #[error("script syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    File {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GestureScript {
    pub fn validate(&self) -> Result<(), ScriptError> {
        for (n, seg) in self.segments.iter().enumerate() {
            if seg.frames == 0 {
                return Err(ScriptError::EmptySegment(n));
            }
            if let Some(w) = seg.left.iter().chain(&seg.right).find(|w| !(w[2] > 0.0)) {
                return Err(ScriptError::BadDepth { segment: n, value: *w });
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ScriptError> {
        let script: GestureScript = toml::from_str(text)?;
        script.validate()?;
        Ok(script)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScriptError::File {
            path: path.to_path_buf(),
            source,
        })?;
        GestureScript::from_toml(&text)
    }

    pub fn total_frames(&self) -> u64 {
        self.segments.iter().map(|s| s.frames as u64).sum()
    }
}

fn interpolate(path: &[Waypoint], k: u32, frames: u32) -> Option<Waypoint> {
    match path {
        [] => None,
        [only] => Some(*only),
        _ => {
            let s = if frames > 1 { k as f64 / (frames - 1) as f64 } else { 0.0 };
            let pos = s * (path.len() - 1) as f64;
            let i = (pos.floor() as usize).min(path.len() - 2);
            let frac = pos - i as f64;
            let (a, b) = (path[i], path[i + 1]);
            Some([0, 1, 2].map(|d| a[d] + (b[d] - a[d]) * frac))
        }
    }
}

/// Palm-sized filled disc: convex, reads as a closed fist.
pub fn fist_mask() -> HandMask {
    HandMask::from_fn(24, 24, |x, y| {
        let (dx, dy) = (x as f64 - 11.5, y as f64 - 11.5);
        dx * dx + dy * dy <= 81.0
    })
}

/// Small palm with five spread fingers: deep concavities between them.
pub fn open_hand_mask() -> HandMask {
    HandMask::from_fn(32, 32, |x, y| {
        let (dx, dy) = (x as f64 - 16.0, y as f64 - 22.0);
        let palm = dx * dx + dy * dy <= 36.0;
        let finger = [4u32, 10, 16, 22, 28]
            .iter()
            .any(|&fx| x.abs_diff(fx) <= 1 && y <= 20 && y >= if fx == 4 || fx == 28 { 12 } else { 2 });
        palm || finger
    })
}

/// Renders a script into frames, deterministic in `(script, camera, seed,
/// noise_px)`. Hand pixels get zero-mean uniform noise in `[-noise_px,
/// noise_px]` and are kept inside the image, so every frame validates.
pub fn generate(script: &GestureScript, camera: &CameraConfig, seed: u64, noise_px: f64) -> Vec<TraceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = noise_px.abs();
    let max_x = camera.image_width as f64 - 1.0;
    let max_y = camera.image_height as f64 - 1.0;
    let period = camera.frame_period_ms();

    let mut records = Vec::with_capacity(script.total_frames() as usize);
    let mut index = 0u64;
    for seg in &script.segments {
        for k in 0..seg.frames {
            let mut joints = Vec::with_capacity(2);
            for (id, path) in [(JointId::LeftHand, &seg.left), (JointId::RightHand, &seg.right)] {
                match interpolate(path, k, seg.frames) {
                    Some([x, y, z]) => {
                        let (nx, ny) = if noise > 0.0 {
                            (rng.random_range(-noise..=noise), rng.random_range(-noise..=noise))
                        } else {
                            (0.0, 0.0)
                        };
                        joints.push(JointSample::tracked(
                            id,
                            (x + nx).clamp(0.0, max_x),
                            (y + ny).clamp(0.0, max_y),
                            z.max(1e-3),
                        ));
                    }
                    None => joints.push(JointSample {
                        joint: id,
                        x: 0.0,
                        y: 0.0,
                        z: 0.0,
                        tracked: false,
                    }),
                }
            }
            let mask = seg.mask.map(|tag| match tag {
                MaskTag::Fist => fist_mask(),
                MaskTag::Open => open_hand_mask(),
            });
            records.push(TraceRecord {
                frame: SkeletonFrame::new(index, index as f64 * period, joints),
                mask,
            });
            index += 1;
        }
    }
    records
}
