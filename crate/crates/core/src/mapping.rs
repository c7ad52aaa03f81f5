//! Hand-to-cursor mapping.
//!
//! All three modes work in centered coordinates: image pixels relative to the
//! image center and screen pixels relative to the screen center. Conversion
//! back to top-left screen pixels, clamping, and rounding happen last.
//!
//! * fixed factor: a constant gain per proximity setting (near / far);
//! * dynamic absolute: a depth-dependent gain `alpha = z sin(fov/2) s_max /
//!   ((span/2) i_max)` applied to the centered hand position;
//! * dynamic relative: the same gain applied to the hand displacement since
//!   the previous frame, accumulated onto the previous cursor position, with
//!   an optional kinetic offset that grows exponentially with hand speed.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CameraConfig, HandPoint, MappingMode, Proximity, ScreenConfig, Tuning};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MappingError {
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
}

/// Cursor position in top-left screen pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CursorPos {
    pub x: u32,
    pub y: u32,
}

/// Screen pixels per image pixel along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors {
    pub x: f64,
    pub y: f64,
}

pub fn scale_factors(z: f64, camera: &CameraConfig, screen: &ScreenConfig) -> Result<ScaleFactors, MappingError> {
    if !(z > 0.0) {
        return Err(MappingError::NonPositiveDepth(z));
    }
    let axis = |fov_deg: f64, s_max: u32, span: f64, i_max: u32| {
        z * (fov_deg.to_radians() / 2.0).sin() * s_max as f64 / ((span / 2.0) * i_max as f64)
    };
    Ok(ScaleFactors {
        x: axis(camera.theta_h, screen.width, screen.x_span, camera.image_width),
        y: axis(camera.theta_v, screen.height, screen.y_span, camera.image_height),
    })
}

/// Image pixels relative to the image center.
pub fn centered_image(x: f64, y: f64, camera: &CameraConfig) -> (f64, f64) {
    (
        x - camera.image_width as f64 / 2.0,
        y - camera.image_height as f64 / 2.0,
    )
}

/// Centered screen offset to top-left pixels, clamped to the canvas.
pub fn screen_from_centered(cx: f64, cy: f64, screen: &ScreenConfig) -> (f64, f64) {
    let (ox, oy) = screen.center();
    (
        (ox + cx).clamp(0.0, (screen.width - 1) as f64),
        (oy + cy).clamp(0.0, (screen.height - 1) as f64),
    )
}

fn round_cursor((x, y): (f64, f64)) -> CursorPos {
    CursorPos {
        x: x.round() as u32,
        y: y.round() as u32,
    }
}

/// Depth-scaled absolute mapping before rounding (still clamped).
pub fn map_absolute_unrounded(
    x: f64,
    y: f64,
    z: f64,
    camera: &CameraConfig,
    screen: &ScreenConfig,
) -> Result<(f64, f64), MappingError> {
    let alpha = scale_factors(z, camera, screen)?;
    let (cx, cy) = centered_image(x, y, camera);
    Ok(screen_from_centered(alpha.x * cx, alpha.y * cy, screen))
}

pub fn map_absolute(
    x: f64,
    y: f64,
    z: f64,
    camera: &CameraConfig,
    screen: &ScreenConfig,
) -> Result<CursorPos, MappingError> {
    map_absolute_unrounded(x, y, z, camera, screen).map(round_cursor)
}

/// Gains used by the fixed-factor mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedFactors {
    pub near: f64,
    pub far: f64,
}

impl Default for FixedFactors {
    fn default() -> Self {
        FixedFactors { near: 1.8, far: 3.0 }
    }
}

impl FixedFactors {
    pub fn for_proximity(&self, proximity: Proximity) -> f64 {
        match proximity {
            Proximity::Near => self.near,
            Proximity::Far => self.far,
        }
    }
}

pub fn map_fixed(
    x: f64,
    y: f64,
    proximity: Proximity,
    factors: &FixedFactors,
    camera: &CameraConfig,
    screen: &ScreenConfig,
) -> CursorPos {
    let gain = factors.for_proximity(proximity);
    let (cx, cy) = centered_image(x, y, camera);
    round_cursor(screen_from_centered(gain * cx, gain * cy, screen))
}

/// Shape of the kinetic offset law: nothing below `v_min`, then
/// `c (exp(beta (|v| - v_min)) - 1)` with the sign of the motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KineticParams {
    /// Dead zone, image pixels per frame.
    pub v_min: f64,
    /// Rate, per (pixel per frame).
    pub beta: f64,
    /// Gain, screen pixels.
    pub c: f64,
}

impl Default for KineticParams {
    fn default() -> Self {
        KineticParams {
            v_min: 2.0,
            beta: 0.2,
            c: 4.0,
        }
    }
}

pub fn kinetic_delta(v: f64, params: &KineticParams) -> f64 {
    let speed = v.abs();
    if speed <= params.v_min {
        return 0.0;
    }
    v.signum() * params.c * ((params.beta * (speed - params.v_min)).exp() - 1.0)
}

/// Last hand position and the cursor position it produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Focus {
    pub image: (f64, f64),
    pub screen: (f64, f64),
}

/// Fixed-size moving average over recent depth readings.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthWindow {
    window: usize,
    samples: VecDeque<f64>,
}

impl DepthWindow {
    pub fn new(window: usize) -> Self {
        DepthWindow {
            window: window.max(1),
            samples: VecDeque::with_capacity(window.max(1)),
        }
    }

    pub fn push(&mut self, z: f64) -> f64 {
        if self.samples.len() == self.window {
            self.samples.pop_front();
        }
        self.samples.push_back(z);
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingState {
    pub mode: MappingMode,
    pub focus: Option<Focus>,
    /// Kinetic offset in screen pixels.
    pub kinetic: (f64, f64),
    pub kinetic_params: KineticParams,
    pub kinetic_enabled: bool,
    pub fixed: FixedFactors,
    pub depth: DepthWindow,
}

impl MappingState {
    pub fn new(mode: MappingMode, kinetic_enabled: bool, tuning: &Tuning) -> Self {
        MappingState {
            mode,
            focus: None,
            kinetic: (0.0, 0.0),
            kinetic_params: tuning.kinetic,
            kinetic_enabled,
            fixed: FixedFactors {
                near: tuning.near_factor,
                far: tuning.far_factor,
            },
            depth: DepthWindow::new(tuning.depth_window),
        }
    }

    /// Forgets the focus point, kinetic offset and depth history so the next
    /// relative-mode frame starts again from the screen center.
    pub fn re_anchor(&mut self) {
        self.focus = None;
        self.kinetic = (0.0, 0.0);
        self.depth.clear();
    }

    /// Focus-centered relative mapping: `s_new = s_old + alpha (i_new - i_old)`.
    /// `alpha` is taken as given so callers control depth smoothing.
    pub fn map_relative(&mut self, x: f64, y: f64, alpha: ScaleFactors, screen: &ScreenConfig) -> CursorPos {
        let Some(focus) = self.focus else {
            let center = screen.center();
            self.focus = Some(Focus {
                image: (x, y),
                screen: center,
            });
            return round_cursor(screen_from_centered(0.0, 0.0, screen));
        };

        let dx = x - focus.image.0;
        let dy = y - focus.image.1;
        let (ox, oy) = screen.center();
        let moved = screen_from_centered(
            focus.screen.0 + alpha.x * dx - ox,
            focus.screen.1 + alpha.y * dy - oy,
            screen,
        );
        self.focus = Some(Focus {
            image: (x, y),
            screen: moved,
        });

        if self.kinetic_enabled {
            let w = screen.width as f64;
            let h = screen.height as f64;
            self.kinetic.0 = (self.kinetic.0 + kinetic_delta(dx, &self.kinetic_params)).clamp(-w, w);
            self.kinetic.1 = (self.kinetic.1 + kinetic_delta(dy, &self.kinetic_params)).clamp(-h, h);
        }
        round_cursor(screen_from_centered(
            moved.0 + self.kinetic.0 - ox,
            moved.1 + self.kinetic.1 - oy,
            screen,
        ))
    }

    /// Maps one primary-hand sample according to the active mode.
    pub fn map(
        &mut self,
        hand: HandPoint,
        proximity: Proximity,
        camera: &CameraConfig,
        screen: &ScreenConfig,
    ) -> Result<CursorPos, MappingError> {
        match self.mode {
            MappingMode::FixedFactor => Ok(map_fixed(hand.x, hand.y, proximity, &self.fixed, camera, screen)),
            MappingMode::DynamicAbsolute => {
                if !(hand.z > 0.0) {
                    return Err(MappingError::NonPositiveDepth(hand.z));
                }
                let z = self.depth.push(hand.z);
                map_absolute(hand.x, hand.y, z, camera, screen)
            }
            MappingMode::DynamicRelative => {
                if !(hand.z > 0.0) {
                    return Err(MappingError::NonPositiveDepth(hand.z));
                }
                let z = self.depth.push(hand.z);
                let alpha = scale_factors(z, camera, screen)?;
                Ok(self.map_relative(hand.x, hand.y, alpha, screen))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera_60() -> CameraConfig {
        CameraConfig {
            theta_h: 60.0,
            ..CameraConfig::default()
        }
    }

    #[test]
    fn worked_scale_factor() {
        let a = scale_factors(1.6, &camera_60(), &ScreenConfig::default()).unwrap();
        assert!((a.x - 8.5375).abs() < 1e-12, "{}", a.x);
    }

    #[test]
    fn scale_is_linear_in_depth() {
        let cam = CameraConfig::default();
        let scr = ScreenConfig::default();
        let a = scale_factors(1.1, &cam, &scr).unwrap();
        let b = scale_factors(2.2, &cam, &scr).unwrap();
        assert_eq!(b.x, 2.0 * a.x);
        assert_eq!(b.y, 2.0 * a.y);
    }

    #[test]
    fn narrow_fov_gives_tiny_gain() {
        let cam = CameraConfig {
            theta_h: 1e-9,
            ..CameraConfig::default()
        };
        let a = scale_factors(2.0, &cam, &ScreenConfig::default()).unwrap();
        assert!(a.x < 1e-8);
    }

    #[test]
    fn non_positive_depth_is_domain_error() {
        let err = scale_factors(0.0, &CameraConfig::default(), &ScreenConfig::default());
        assert_eq!(err, Err(MappingError::NonPositiveDepth(0.0)));
    }

    #[test]
    fn absolute_center_maps_to_center() {
        let c = map_absolute(320.0, 240.0, 2.5, &CameraConfig::default(), &ScreenConfig::default()).unwrap();
        assert_eq!(c, CursorPos { x: 683, y: 384 });
    }

    #[test]
    fn absolute_offset_and_clamp() {
        let cam = camera_60();
        let scr = ScreenConfig::default();
        // centered +64 px at alpha 8.5375 -> 546.4 -> 1229
        let c = map_absolute(320.0 + 64.0, 240.0, 1.6, &cam, &scr).unwrap();
        assert_eq!(c.x, 1229);
        // centered +200 px overshoots the half-width
        let c = map_absolute(320.0 + 200.0, 240.0, 1.6, &cam, &scr).unwrap();
        assert_eq!(c.x, 1365);
    }

    #[test]
    fn fixed_factors_near_and_far() {
        let cam = CameraConfig::default();
        let scr = ScreenConfig::default();
        let f = FixedFactors::default();
        assert_eq!(map_fixed(420.0, 240.0, Proximity::Far, &f, &cam, &scr).x, 983);
        assert_eq!(map_fixed(420.0, 240.0, Proximity::Near, &f, &cam, &scr).x, 863);
        for p in [Proximity::Near, Proximity::Far] {
            assert_eq!(map_fixed(320.0, 240.0, p, &f, &cam, &scr), CursorPos { x: 683, y: 384 });
        }
    }

    #[test]
    fn relative_anchor_then_delta() {
        let scr = ScreenConfig::default();
        let mut m = MappingState::new(MappingMode::DynamicRelative, false, &Tuning::default());
        let alpha = ScaleFactors { x: 8.0, y: 8.0 };
        assert_eq!(m.map_relative(100.0, 100.0, alpha, &scr), CursorPos { x: 683, y: 384 });
        assert_eq!(m.map_relative(110.0, 100.0, alpha, &scr), CursorPos { x: 763, y: 384 });
        for _ in 0..10 {
            assert_eq!(m.map_relative(110.0, 100.0, alpha, &scr), CursorPos { x: 763, y: 384 });
        }
    }

    #[test]
    fn re_anchor_resets_focus_and_offset() {
        let scr = ScreenConfig::default();
        let mut m = MappingState::new(MappingMode::DynamicRelative, true, &Tuning::default());
        let alpha = ScaleFactors { x: 2.0, y: 2.0 };
        m.map_relative(100.0, 100.0, alpha, &scr);
        m.map_relative(130.0, 100.0, alpha, &scr);
        m.kinetic.0 = 40.0;
        m.re_anchor();
        assert_eq!(m.kinetic, (0.0, 0.0));
        assert_eq!(m.map_relative(500.0, 400.0, alpha, &scr), CursorPos { x: 683, y: 384 });
    }

    #[test]
    fn kinetic_law() {
        let p = KineticParams::default();
        assert_eq!(kinetic_delta(0.0, &p), 0.0);
        assert_eq!(kinetic_delta(p.v_min, &p), 0.0);
        let v = p.v_min + 1.0 / p.beta;
        let expected = p.c * (std::f64::consts::E - 1.0);
        assert!((kinetic_delta(v, &p) - expected).abs() < 1e-12);
        for v in [0.5, 2.5, 7.0, 30.0] {
            assert_eq!(kinetic_delta(-v, &p), -kinetic_delta(v, &p));
        }
    }

    #[test]
    fn fast_motion_adds_kinetic_offset() {
        let scr = ScreenConfig::default();
        let mut m = MappingState::new(MappingMode::DynamicRelative, true, &Tuning::default());
        let alpha = ScaleFactors { x: 2.0, y: 2.0 };
        m.map_relative(100.0, 100.0, alpha, &scr);
        let c = m.map_relative(112.0, 100.0, alpha, &scr);
        // 24 px from the gain plus 4 (e^2 - 1) from the kinetic law
        let extra = 4.0 * ((0.2f64 * 10.0).exp() - 1.0);
        assert_eq!(c.x, (683.0 + 24.0 + extra).round() as u32);
        assert!(m.kinetic.0 > 0.0);
        // the same speed backwards cancels it
        m.map_relative(100.0, 100.0, alpha, &scr);
        assert!(m.kinetic.0.abs() < 1e-9);
    }

    #[test]
    fn depth_window_averages() {
        let mut w = DepthWindow::new(3);
        assert_eq!(w.push(1.0), 1.0);
        assert_eq!(w.push(2.0), 1.5);
        assert_eq!(w.push(3.0), 2.0);
        assert_eq!(w.push(4.0), 3.0);
        w.clear();
        assert_eq!(w.push(9.0), 9.0);
    }
}
