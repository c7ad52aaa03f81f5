//! The 3x3 option grid tiling the whole canvas.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::CursorPos;
use crate::model::ScreenConfig;

pub const ROWS: u32 = 3;
pub const COLS: u32 = 3;
pub const CELLS: usize = (ROWS * COLS) as usize;

/// Row-major default options.
pub const DEFAULT_LABELS: [&str; CELLS] = [
    "Doctor", "Family", "Fruits", "Nurse", "Emergency", "Food", "Bathroom", "Water", "Medicine",
];

/// Index of a grid cell, row-major, `0..9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CellId(u8);

impl CellId {
    pub fn new(index: usize) -> Result<Self, GridError> {
        if index < CELLS {
            Ok(CellId(index as u8))
        } else {
            Err(GridError::CellOutOfRange(index))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u8> for CellId {
    type Error = GridError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        CellId::new(v as usize)
    }
}

impl From<CellId> for u8 {
    fn from(c: CellId) -> u8 {
        c.0
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("cell {0} is outside the 3x3 grid")]
    CellOutOfRange(usize),
    #[error("expected {CELLS} option labels, got {0}")]
    LabelCount(usize),
    #[error("duplicate option label `{0}`")]
    DuplicateLabel(String),
    #[error("option labels must not be empty")]
    EmptyLabel,
}

pub(crate) fn check_labels<S: AsRef<str>>(labels: &[S]) -> Result<(), GridError> {
    if labels.len() != CELLS {
        return Err(GridError::LabelCount(labels.len()));
    }
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        if label.trim().is_empty() {
            return Err(GridError::EmptyLabel);
        }
        if labels[..i].iter().any(|l| l.as_ref() == label) {
            return Err(GridError::DuplicateLabel(label.to_owned()));
        }
    }
    Ok(())
}

/// An option chosen by the patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub cell: CellId,
    pub label: Arc<str>,
    pub t_ms: f64,
    pub frame_index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionGrid {
    labels: Vec<Arc<str>>,
    screen: ScreenConfig,
}

impl OptionGrid {
    pub fn new<S: AsRef<str>>(labels: &[S], screen: ScreenConfig) -> Result<Self, GridError> {
        check_labels(labels)?;
        Ok(OptionGrid {
            labels: labels.iter().map(|l| Arc::from(l.as_ref())).collect(),
            screen,
        })
    }

    pub fn with_default_labels(screen: ScreenConfig) -> Self {
        OptionGrid::new(&DEFAULT_LABELS, screen).expect("default labels are valid")
    }

    pub fn labels(&self) -> &[Arc<str>] {
        &self.labels
    }

    pub fn label(&self, cell: CellId) -> &Arc<str> {
        &self.labels[cell.index()]
    }

    pub fn cell_of(&self, label: &str) -> Option<CellId> {
        self.labels.iter().position(|l| &**l == label).map(|i| CellId(i as u8))
    }

    /// Cell under a cursor. Cells tile the canvas, so every on-screen cursor
    /// lands in exactly one cell; off-screen coordinates are clamped first.
    pub fn hit_test(&self, cursor: CursorPos) -> CellId {
        let w = self.screen.width as u64;
        let h = self.screen.height as u64;
        let x = (cursor.x as u64).min(w - 1);
        let y = (cursor.y as u64).min(h - 1);
        // floor(x / (w / 3)) == floor(3x / w) in exact integer arithmetic
        let col = x * COLS as u64 / w;
        let row = y * ROWS as u64 / h;
        CellId((row * COLS as u64 + col) as u8)
    }

    /// Center pixel of a cell, handy for scripting and tests.
    pub fn cell_center(&self, cell: CellId) -> CursorPos {
        let i = cell.index() as u32;
        let (row, col) = (i / COLS, i % COLS);
        let cw = self.screen.width as f64 / COLS as f64;
        let ch = self.screen.height as f64 / ROWS as f64;
        CursorPos {
            x: ((col as f64 + 0.5) * cw) as u32,
            y: ((row as f64 + 0.5) * ch) as u32,
        }
    }

    pub fn make_selection(&self, cell: usize, t_ms: f64, frame_index: u64) -> Result<SelectionEvent, GridError> {
        let cell = CellId::new(cell)?;
        Ok(SelectionEvent {
            cell,
            label: self.label(cell).clone(),
            t_ms,
            frame_index,
        })
    }
}
