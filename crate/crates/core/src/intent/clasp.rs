use crate::model::{CameraConfig, HandPoint};
use crate::mapping::centered_image;

/// Hand position in meters, camera-centered.
pub type WorldPoint = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaspParams {
    /// Meters.
    pub threshold: f64,
}

impl Default for ClaspParams {
    fn default() -> Self {
        ClaspParams { threshold: 0.12 }
    }
}

/// Back-projects an image-plane hand to meters. The image spans
/// `2 z sin(fov / 2)` meters at depth `z`, the same model the depth-scaled
/// cursor gain uses.
pub fn world_position(hand: HandPoint, camera: &CameraConfig) -> WorldPoint {
    let (cx, cy) = centered_image(hand.x, hand.y, camera);
    let extent = |fov_deg: f64| 2.0 * hand.z * (fov_deg.to_radians() / 2.0).sin();
    [
        extent(camera.theta_h) * cx / camera.image_width as f64,
        extent(camera.theta_v) * cy / camera.image_height as f64,
        hand.z,
    ]
}

/// True when the two hands are closer than the clasp threshold.
pub fn clasp_detect(left: WorldPoint, right: WorldPoint, params: &ClaspParams) -> bool {
    let d2: f64 = left.iter().zip(&right).map(|(a, b)| (a - b) * (a - b)).sum();
    d2.sqrt() < params.threshold
}
