//! Skeleton traces: the `.trace.jsonl` file format, a scripted synthetic
//! generator, and paced replay.

mod generate;
mod io;
mod replay;

pub use generate::{fist_mask, generate, open_hand_mask, GestureScript, MaskTag, ScriptError, Segment, Waypoint};
pub use io::{parse_trace, read_trace_file, to_jsonl, write_trace, write_trace_file, TraceError, TraceRecord};
pub use replay::{replay, Pace, ReplaySummary};
