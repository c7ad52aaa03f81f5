//! Domain types shared by the whole engine: joints, frames, camera and
//! screen geometry, and the per-session configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dispatch::ChannelSet;
use crate::grid::DEFAULT_LABELS;
use crate::mapping::KineticParams;

/// Identifies a tracked joint. Only the two hands drive the engine; the rest
/// ride along so traces from richer skeletons still parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointId {
    LeftHand,
    RightHand,
    Head,
    Spine,
    Other(u8),
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointId::LeftHand => f.write_str("left_hand"),
            JointId::RightHand => f.write_str("right_hand"),
            JointId::Head => f.write_str("head"),
            JointId::Spine => f.write_str("spine"),
            JointId::Other(n) => write!(f, "other:{n}"),
        }
    }
}

#[derive(Debug, Error)]
#[error("unknown joint id `{0}`")]
pub struct UnknownJoint(String);

impl FromStr for JointId {
    type Err = UnknownJoint;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left_hand" => Ok(JointId::LeftHand),
            "right_hand" => Ok(JointId::RightHand),
            "head" => Ok(JointId::Head),
            "spine" => Ok(JointId::Spine),
            other => other
                .strip_prefix("other:")
                .and_then(|n| n.parse().ok())
                .map(JointId::Other)
                .ok_or_else(|| UnknownJoint(s.to_owned())),
        }
    }
}

impl Serialize for JointId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JointId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which of the two hands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub fn other(self) -> Hand {
        match self {
            Hand::Left => Hand::Right,
            Hand::Right => Hand::Left,
        }
    }

    pub fn joint(self) -> JointId {
        match self {
            Hand::Left => JointId::LeftHand,
            Hand::Right => JointId::RightHand,
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hand::Left => "left",
            Hand::Right => "right",
        })
    }
}

/// One joint observation: image-plane pixels plus depth in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    #[serde(rename = "id")]
    pub joint: JointId,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(rename = "tr")]
    pub tracked: bool,
}

impl JointSample {
    pub fn tracked(joint: JointId, x: f64, y: f64, z: f64) -> Self {
        JointSample {
            joint,
            x,
            y,
            z,
            tracked: true,
        }
    }
}

/// A tracked hand position: pixels in the image plus depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The tracked hands of one frame. Untracked hands are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Hands {
    pub left: Option<HandPoint>,
    pub right: Option<HandPoint>,
}

impl Hands {
    pub fn get(&self, hand: Hand) -> Option<HandPoint> {
        match hand {
            Hand::Left => self.left,
            Hand::Right => self.right,
        }
    }

    pub fn any(&self) -> bool {
        self.left.is_some() || self.right.is_some()
    }
}

/// One timestamped skeleton sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    #[serde(rename = "i")]
    pub index: u64,
    #[serde(rename = "t")]
    pub t_ms: f64,
    pub joints: Vec<JointSample>,
}

impl SkeletonFrame {
    pub fn new(index: u64, t_ms: f64, joints: Vec<JointSample>) -> Self {
        SkeletonFrame {
            index,
            t_ms,
            joints,
        }
    }

    pub fn joint(&self, id: JointId) -> Option<&JointSample> {
        self.joints.iter().find(|j| j.joint == id)
    }

    /// Tracked hand positions; the only joints the engine reads.
    pub fn hands(&self) -> Hands {
        let pick = |id| {
            self.joint(id).filter(|j| j.tracked).map(|j| HandPoint {
                x: j.x,
                y: j.y,
                z: j.z,
            })
        };
        Hands {
            left: pick(JointId::LeftHand),
            right: pick(JointId::RightHand),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub image_width: u32,
    pub image_height: u32,
    /// Horizontal field of view, degrees.
    pub theta_h: f64,
    /// Vertical field of view, degrees.
    pub theta_v: f64,
    pub frame_rate: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            image_width: 640,
            image_height: 480,
            theta_h: 57.0,
            theta_v: 43.0,
            frame_rate: 30.0,
        }
    }
}

impl CameraConfig {
    pub fn frame_period_ms(&self) -> f64 {
        1000.0 / self.frame_rate
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.image_width == 0 || self.image_height == 0 {
            return Err(ConfigError::invalid("camera image dimensions must be positive"));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(ConfigError::invalid("camera frame_rate must be positive"));
        }
        for (name, angle) in [("theta_h", self.theta_h), ("theta_v", self.theta_v)] {
            if !(angle > 0.0 && angle < 180.0) {
                return Err(ConfigError::Invalid(format!(
                    "camera {name} must lie in (0, 180) degrees, got {angle}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub width: u32,
    pub height: u32,
    /// Physical hand travel, meters, that should sweep the whole width.
    pub x_span: f64,
    /// Physical hand travel, meters, that should sweep the whole height.
    pub y_span: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            width: 1366,
            height: 768,
            x_span: 0.40,
            y_span: 0.30,
        }
    }
}

impl ScreenConfig {
    pub fn center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::invalid("screen dimensions must be positive"));
        }
        if !(self.x_span > 0.0 && self.y_span > 0.0) {
            return Err(ConfigError::invalid("screen spans must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandPreference {
    #[default]
    Left,
    Right,
    AutoNearness,
    AutoActivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proximity {
    #[default]
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingMode {
    #[default]
    FixedFactor,
    DynamicAbsolute,
    DynamicRelative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentScheme {
    #[default]
    Dwell,
    Clasp,
    Fist,
}

/// Knobs the operator rarely touches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    /// Depth gap (meters) the other hand must win by before nearness switches.
    pub nearness_delta: f64,
    pub near_factor: f64,
    pub far_factor: f64,
    pub kinetic: KineticParams,
    /// Moving-average window for depth in the dynamic mapping modes.
    pub depth_window: usize,
    /// Hand separation (meters) under which a clasp counts as a click.
    pub clasp_threshold: f64,
    pub solidity_threshold: f64,
    /// Frames after a dwell selection during which nothing can fire.
    /// `None` means one full dwell period.
    pub dwell_cooldown_frames: Option<u32>,
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            nearness_delta: 0.10,
            near_factor: 1.8,
            far_factor: 3.0,
            kinetic: KineticParams::default(),
            depth_window: 5,
            clasp_threshold: 0.12,
            solidity_threshold: 0.90,
            dwell_cooldown_frames: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub camera: CameraConfig,
    pub screen: ScreenConfig,
    pub hand_preference: HandPreference,
    pub proximity: Proximity,
    pub mapping_mode: MappingMode,
    pub kinetic_enabled: bool,
    pub intent_scheme: IntentScheme,
    pub dwell_seconds: f64,
    pub channels: ChannelSet,
    pub labels: Vec<String>,
    pub tuning: Tuning,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            camera: CameraConfig::default(),
            screen: ScreenConfig::default(),
            hand_preference: HandPreference::default(),
            proximity: Proximity::default(),
            mapping_mode: MappingMode::default(),
            kinetic_enabled: false,
            intent_scheme: IntentScheme::default(),
            dwell_seconds: 2.0,
            channels: ChannelSet::default(),
            labels: DEFAULT_LABELS.iter().map(|s| s.to_string()).collect(),
            tuning: Tuning::default(),
        }
    }
}

impl SessionConfig {
    /// Dwell period expressed in frames at the camera rate (never below 1).
    pub fn dwell_frames(&self) -> u32 {
        ((self.dwell_seconds * self.camera.frame_rate).round() as u32).max(1)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.camera.validate()?;
        self.screen.validate()?;
        if !(self.dwell_seconds > 0.0 && self.dwell_seconds.is_finite()) {
            return Err(ConfigError::invalid("dwell_seconds must be positive"));
        }
        let t = &self.tuning;
        if !(t.nearness_delta >= 0.0) {
            return Err(ConfigError::invalid("nearness_delta must be non-negative"));
        }
        if !(t.near_factor > 0.0 && t.far_factor > 0.0) {
            return Err(ConfigError::invalid("fixed scaling factors must be positive"));
        }
        if t.depth_window == 0 {
            return Err(ConfigError::invalid("depth_window must be at least 1"));
        }
        if !(t.clasp_threshold > 0.0) {
            return Err(ConfigError::invalid("clasp_threshold must be positive"));
        }
        if !(0.0..=1.0).contains(&t.solidity_threshold) {
            return Err(ConfigError::invalid("solidity_threshold must lie in [0, 1]"));
        }
        crate::grid::check_labels(&self.labels)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ConfigError {
    fn invalid(msg: &str) -> Self {
        ConfigError::Invalid(msg.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// A broken frame invariant. Violations are data, reported back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PixelOutOfBounds { joint: JointId, axis: Axis, value: f64 },
    NonPositiveDepth { joint: JointId, value: f64 },
    NonFinite { joint: JointId, field: &'static str },
    DuplicateJoint(JointId),
    NonMonotonicIndex { previous: u64, current: u64 },
    NegativeTime(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PixelOutOfBounds { joint, axis, value } => {
                write!(f, "pixel out of bounds: {joint}.{axis} = {value}")
            }
            Violation::NonPositiveDepth { joint, value } => {
                write!(f, "non-positive depth: {joint}.z = {value}")
            }
            Violation::NonFinite { joint, field } => write!(f, "non-finite value: {joint}.{field}"),
            Violation::DuplicateJoint(joint) => write!(f, "duplicate joint: {joint}"),
            Violation::NonMonotonicIndex { previous, current } => {
                write!(f, "non-monotonic index: i = {current} after {previous}")
            }
            Violation::NegativeTime(t) => write!(f, "negative timestamp: t = {t}"),
        }
    }
}

/// Checks a frame against the camera geometry and, when given, the index of
/// the previous frame in the same stream.
pub fn validate_frame(
    frame: &SkeletonFrame,
    camera: &CameraConfig,
    previous_index: Option<u64>,
) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();

    if let Some(previous) = previous_index {
        if frame.index <= previous {
            violations.push(Violation::NonMonotonicIndex {
                previous,
                current: frame.index,
            });
        }
    }
    if !(frame.t_ms >= 0.0) {
        violations.push(Violation::NegativeTime(frame.t_ms));
    }

    for (n, joint) in frame.joints.iter().enumerate() {
        if frame.joints[..n].iter().any(|j| j.joint == joint.joint) {
            violations.push(Violation::DuplicateJoint(joint.joint));
        }
        if !joint.tracked {
            continue;
        }
        let id = joint.joint;
        let mut finite = true;
        for (field, v) in [("x", joint.x), ("y", joint.y), ("z", joint.z)] {
            if !v.is_finite() {
                violations.push(Violation::NonFinite { joint: id, field });
                finite = false;
            }
        }
        if !finite {
            continue;
        }
        if !(0.0..camera.image_width as f64).contains(&joint.x) {
            violations.push(Violation::PixelOutOfBounds {
                joint: id,
                axis: Axis::X,
                value: joint.x,
            });
        }
        if !(0.0..camera.image_height as f64).contains(&joint.y) {
            violations.push(Violation::PixelOutOfBounds {
                joint: id,
                axis: Axis::Y,
                value: joint.y,
            });
        }
        if joint.z <= 0.0 {
            violations.push(Violation::NonPositiveDepth {
                joint: id,
                value: joint.z,
            });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
