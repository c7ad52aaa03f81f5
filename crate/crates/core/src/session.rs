//! The per-frame pipeline: validate, arbitrate, map, hit-test, detect intent,
//! dispatch.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::arbitration::ArbitrationState;
use crate::dispatch::{Channel, ChannelSet, DispatchHandle, EnqueueOutcome};
use crate::grid::{CellId, OptionGrid, SelectionEvent};
use crate::intent::{clasp_detect, fist_detect, world_position, ClaspParams, DwellState, HandMask};
use crate::mapping::{CursorPos, MappingState};
use crate::model::{
    validate_frame, ConfigError, Hand, HandPreference, IntentScheme, MappingMode, Proximity, SessionConfig,
    SkeletonFrame,
};
use crate::timing::FrameTimings;
use crate::trace::TraceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnqueueStatus {
    Queued,
    Rejected,
}

/// Everything a session reports back for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    #[serde(rename = "cursor_out")]
    Cursor {
        frame_index: u64,
        x: u32,
        y: u32,
        /// `None` when no hand is tracked and the cursor is frozen.
        primary: Option<Hand>,
        switched: bool,
    },
    #[serde(rename = "dwell_out")]
    Dwell {
        frame_index: u64,
        cell: Option<CellId>,
        count: u32,
        threshold: u32,
    },
    #[serde(rename = "selection_out")]
    Selection(SelectionEvent),
    #[serde(rename = "dispatch_out")]
    Dispatch {
        request_id: u64,
        channel: Channel,
        status: EnqueueStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    #[serde(rename = "error_out")]
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame_index: Option<u64>,
        reason: String,
    },
}

impl SessionEvent {
    pub fn is_cursor(&self) -> bool {
        matches!(self, SessionEvent::Cursor { .. })
    }
}

/// Settings that may change mid-session. Absent fields are left alone.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<ChannelSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proximity: Option<Proximity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hand_preference: Option<HandPreference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent_scheme: Option<IntentScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping_mode: Option<MappingMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic_enabled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SessionCounters {
    pub frames: u64,
    pub errors: u64,
    pub selections: u64,
    pub switches: u64,
    pub dispatch_rejected: u64,
}

pub struct Session {
    config: SessionConfig,
    grid: OptionGrid,
    arbitration: ArbitrationState,
    mapping: MappingState,
    dwell: DwellState,
    clasp: ClaspParams,
    dispatch: Option<DispatchHandle>,
    cursor: CursorPos,
    primary: Option<Hand>,
    last_index: Option<u64>,
    /// Rising-edge latch for clasp and fist gestures.
    gesture_held: bool,
    counters: SessionCounters,
    timings: FrameTimings,
}

fn dwell_for(config: &SessionConfig) -> DwellState {
    let threshold = config.dwell_frames();
    DwellState::new(threshold, config.tuning.dwell_cooldown_frames.unwrap_or(threshold))
}

impl Session {
    /// Without a dispatch handle selections are still reported but nothing
    /// is enqueued and no `dispatch_out` events appear.
    pub fn new(config: SessionConfig, dispatch: Option<DispatchHandle>) -> Result<Self, ConfigError> {
        config.validate()?;
        let grid = OptionGrid::new(&config.labels, config.screen).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let initial = match config.hand_preference {
            HandPreference::Right => Hand::Right,
            _ => Hand::Left,
        };
        let (cx, cy) = config.screen.center();
        Ok(Session {
            arbitration: ArbitrationState::new(initial, config.tuning.nearness_delta),
            mapping: MappingState::new(config.mapping_mode, config.kinetic_enabled, &config.tuning),
            dwell: dwell_for(&config),
            clasp: ClaspParams {
                threshold: config.tuning.clasp_threshold,
            },
            grid,
            dispatch,
            cursor: CursorPos {
                x: cx.round() as u32,
                y: cy.round() as u32,
            },
            primary: None,
            last_index: None,
            gesture_held: false,
            counters: SessionCounters::default(),
            timings: FrameTimings::default(),
            config,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn grid(&self) -> &OptionGrid {
        &self.grid
    }

    pub fn cursor(&self) -> CursorPos {
        self.cursor
    }

    pub fn primary(&self) -> Option<Hand> {
        self.primary
    }

    pub fn dwell(&self) -> &DwellState {
        &self.dwell
    }

    pub fn mapping(&self) -> &MappingState {
        &self.mapping
    }

    pub fn counters(&self) -> SessionCounters {
        self.counters
    }

    pub fn timings(&self) -> &FrameTimings {
        &self.timings
    }

    pub fn apply_patch(&mut self, patch: &ConfigPatch) -> Result<(), ConfigError> {
        if let Some(s) = patch.dwell_seconds {
            if !(s > 0.0 && s.is_finite()) {
                return Err(ConfigError::Invalid("dwell_seconds must be positive".into()));
            }
        }
        if let Some(c) = patch.channels {
            self.config.channels = c;
        }
        if let Some(p) = patch.proximity {
            self.config.proximity = p;
        }
        if let Some(h) = patch.hand_preference {
            self.config.hand_preference = h;
        }
        if let Some(k) = patch.kinetic_enabled {
            self.config.kinetic_enabled = k;
            self.mapping.kinetic_enabled = k;
        }
        if let Some(m) = patch.mapping_mode {
            if m != self.config.mapping_mode {
                self.config.mapping_mode = m;
                self.mapping.mode = m;
                self.mapping.re_anchor();
            }
        }
        if let Some(i) = patch.intent_scheme {
            if i != self.config.intent_scheme {
                self.config.intent_scheme = i;
                self.dwell = dwell_for(&self.config);
                self.gesture_held = false;
            }
        }
        if let Some(s) = patch.dwell_seconds {
            self.config.dwell_seconds = s;
            self.dwell = dwell_for(&self.config);
        }
        Ok(())
    }

    pub fn process_record(&mut self, record: &TraceRecord) -> Vec<SessionEvent> {
        self.process_frame(&record.frame, record.mask.as_ref())
    }

    /// Runs one frame through the pipeline and records how long it took.
    pub fn process_frame(&mut self, frame: &SkeletonFrame, mask: Option<&HandMask>) -> Vec<SessionEvent> {
        let started = Instant::now();
        let mut events = Vec::with_capacity(8);
        self.step(frame, mask, &mut events);
        self.timings.record(started.elapsed());
        events
    }

    fn step(&mut self, frame: &SkeletonFrame, mask: Option<&HandMask>, events: &mut Vec<SessionEvent>) {
        if let Err(violations) = validate_frame(frame, &self.config.camera, self.last_index) {
            self.counters.errors += 1;
            let reason = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            events.push(SessionEvent::Error {
                frame_index: Some(frame.index),
                reason,
            });
            return;
        }
        self.last_index = Some(frame.index);
        self.counters.frames += 1;

        let hands = frame.hands();
        let chosen = self.arbitration.arbitrate_hands(&hands, self.config.hand_preference).ok();
        let mut switched = false;
        if let Some(hand) = chosen {
            if self.primary.is_some_and(|p| p != hand) {
                switched = true;
                self.counters.switches += 1;
                self.mapping.re_anchor();
            }
            self.primary = Some(hand);
            let point = hands.get(hand).expect("arbitration picks a tracked hand");
            match self.mapping.map(point, self.config.proximity, &self.config.camera, &self.config.screen) {
                Ok(cursor) => self.cursor = cursor,
                Err(e) => events.push(SessionEvent::Error {
                    frame_index: Some(frame.index),
                    reason: e.to_string(),
                }),
            }
        }
        events.push(SessionEvent::Cursor {
            frame_index: frame.index,
            x: self.cursor.x,
            y: self.cursor.y,
            primary: chosen,
            switched,
        });

        let cell = self.grid.hit_test(self.cursor);
        let fired = match self.config.intent_scheme {
            IntentScheme::Dwell => {
                // with no hand the count is held, not reset
                let fired = match chosen {
                    Some(_) => self.dwell.update(Some(cell)),
                    None => None,
                };
                events.push(SessionEvent::Dwell {
                    frame_index: frame.index,
                    cell: self.dwell.hovered,
                    count: if fired.is_some() { self.dwell.threshold } else { self.dwell.count },
                    threshold: self.dwell.threshold,
                });
                fired
            }
            IntentScheme::Clasp => {
                let closed = match (hands.left, hands.right) {
                    (Some(l), Some(r)) => clasp_detect(
                        world_position(l, &self.config.camera),
                        world_position(r, &self.config.camera),
                        &self.clasp,
                    ),
                    _ => false,
                };
                self.edge(closed, chosen.map(|_| cell))
            }
            IntentScheme::Fist => match mask {
                // a frame without a mask carries no evidence either way
                None => None,
                Some(m) => {
                    let closed = fist_detect(m, self.config.tuning.solidity_threshold).unwrap_or(false);
                    self.edge(closed, chosen.map(|_| cell))
                }
            },
        };

        if let Some(cell) = fired {
            self.select(cell, frame, events);
        }
    }

    fn edge(&mut self, closed: bool, cell: Option<CellId>) -> Option<CellId> {
        let rising = closed && !self.gesture_held;
        self.gesture_held = closed;
        if rising {
            cell
        } else {
            None
        }
    }

    fn select(&mut self, cell: CellId, frame: &SkeletonFrame, events: &mut Vec<SessionEvent>) {
        let selection = self
            .grid
            .make_selection(cell.index(), frame.t_ms, frame.index)
            .expect("hit-test yields a valid cell");
        self.counters.selections += 1;
        events.push(SessionEvent::Selection(selection.clone()));

        let channels = self.config.channels;
        let Some(handle) = &self.dispatch else { return };
        if channels.is_empty() {
            return;
        }
        let outcome = handle.enqueue(selection, channels);
        let (status, reason) = match outcome {
            EnqueueOutcome::Accepted(_) => (EnqueueStatus::Queued, None),
            EnqueueOutcome::Rejected(_, e) => {
                self.counters.dispatch_rejected += 1;
                (EnqueueStatus::Rejected, Some(e.to_string()))
            }
        };
        for channel in channels.iter() {
            events.push(SessionEvent::Dispatch {
                request_id: outcome.id().0,
                channel,
                status,
                reason: reason.clone(),
            });
        }
    }
}
