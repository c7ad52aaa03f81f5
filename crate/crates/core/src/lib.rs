//! Gesture engine for a hands-only patient call system.
//!
//! A depth camera's skeleton stream drives a cursor over a 3x3 grid of
//! requests. Holding the cursor on a cell (or clasping, or making a fist)
//! selects it, and the selection is fanned out to caretaker channels on a
//! background worker so the frame loop never waits on the network.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arbitration;
pub mod batch;
pub mod bench;
pub mod config;
pub mod dispatch;
pub mod grid;
pub mod intent;
pub mod mapping;
pub mod model;
pub mod session;
pub mod timing;
pub mod trace;

pub use config::AppConfig;
pub use model::{Hand, HandPreference, IntentScheme, MappingMode, Proximity, SessionConfig, SkeletonFrame};
pub use session::{ConfigPatch, Session, SessionEvent};
