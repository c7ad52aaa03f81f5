use crate::grid::CellId;

/// Consecutive-hover counter for dwell selection.
///
/// Moving to another cell, or off every cell, restarts the count. Reaching
/// `threshold` fires a selection and starts a cooldown during which frames
/// are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DwellState {
    pub hovered: Option<CellId>,
    pub count: u32,
    pub threshold: u32,
    pub cooldown: u32,
    pub cooldown_frames: u32,
}

impl DwellState {
    /// `threshold` is clamped to at least one frame.
    pub fn new(threshold: u32, cooldown_frames: u32) -> Self {
        DwellState {
            hovered: None,
            count: 0,
            threshold: threshold.max(1),
            cooldown: 0,
            cooldown_frames,
        }
    }

    /// Threshold of `round(seconds * fps)` frames, cooldown one dwell period.
    pub fn from_seconds(seconds: f64, frame_rate: f64) -> Self {
        let threshold = ((seconds * frame_rate).round() as u32).max(1);
        DwellState::new(threshold, threshold)
    }

    pub fn progress(&self) -> f64 {
        self.count as f64 / self.threshold as f64
    }

    pub fn update(&mut self, cell: Option<CellId>) -> Option<CellId> {
        if self.cooldown > 0 {
            self.cooldown -= 1;
            return None;
        }
        if cell.is_some() && cell == self.hovered {
            self.count += 1;
        } else {
            self.hovered = cell;
            self.count = u32::from(cell.is_some());
        }
        if self.count >= self.threshold {
            self.count = 0;
            self.cooldown = self.cooldown_frames;
            return self.hovered;
        }
        None
    }
}
