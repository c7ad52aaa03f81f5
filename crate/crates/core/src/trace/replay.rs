use std::fmt::Display;
use std::thread;
use std::time::{Duration, Instant};

use super::TraceRecord;
use crate::timing::{FrameTimings, TimingStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pace {
    /// Sleep so each frame is delivered at its recorded time offset.
    Realtime,
    MaxSpeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub frames: usize,
    pub wall: Duration,
    pub timings: TimingStats,
    /// Realtime frames delivered more than one frame period late.
    pub backlog_frames: usize,
    /// Set when the sink failed and replay stopped early.
    pub aborted: Option<String>,
}

/// Feeds `records` into `sink` in order, timing each sink call.
pub fn replay<F, E>(records: &[TraceRecord], pace: Pace, mut sink: F) -> ReplaySummary
where
    F: FnMut(&TraceRecord) -> Result<(), E>,
    E: Display,
{
    let mut timings = FrameTimings::with_capacity(records.len());
    let mut backlog_frames = 0;
    let mut aborted = None;
    let mut frames = 0;
    let t0 = records.first().map_or(0.0, |r| r.frame.t_ms);
    let period = match records {
        [a, b, ..] if b.frame.t_ms > a.frame.t_ms => {
            Duration::from_secs_f64((b.frame.t_ms - a.frame.t_ms) / 1000.0 / (b.frame.index - a.frame.index) as f64)
        }
        _ => Duration::from_millis(33),
    };

    let start = Instant::now();
    for record in records {
        if pace == Pace::Realtime {
            let due = start + Duration::from_secs_f64(((record.frame.t_ms - t0) / 1000.0).max(0.0));
            let now = Instant::now();
            if now < due {
                thread::sleep(due - now);
            } else if now - due > period {
                backlog_frames += 1;
            }
        }
        let began = Instant::now();
        let result = sink(record);
        timings.record(began.elapsed());
        if let Err(e) = result {
            aborted = Some(e.to_string());
            break;
        }
        frames += 1;
    }

    ReplaySummary {
        frames,
        wall: start.elapsed(),
        timings: timings.stats(),
        backlog_frames,
        aborted,
    }
}
