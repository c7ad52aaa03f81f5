//! Max-speed pipeline timing over a trace.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::dispatch::DispatchHandle;
use crate::model::{ConfigError, SessionConfig};
use crate::session::{Session, SessionEvent};
use crate::timing::{FrameTimings, TimingStats};
use crate::trace::TraceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Measured passes. Each frame's time is its minimum across passes.
    pub passes: usize,
    /// Unmeasured passes run first to warm caches and allocators.
    pub warmup: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { passes: 5, warmup: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub frames: usize,
    pub passes: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
    /// Position in the trace of the slowest frame.
    pub slowest_frame: usize,
    /// Frames per second the engine alone could sustain.
    pub effective_fps: f64,
    pub max_median_ratio: f64,
    /// The same ratio from the first measured pass alone.
    pub raw_max_median_ratio: f64,
    pub wall_ms: f64,
    pub selections: u64,
    pub dispatch_rejected: u64,
}

impl BenchReport {
    fn from_stats(stats: TimingStats, raw: TimingStats, passes: usize, wall_ms: f64) -> Self {
        BenchReport {
            frames: stats.count,
            passes,
            min_ms: stats.min_ms,
            median_ms: stats.median_ms,
            mean_ms: stats.mean_ms,
            p99_ms: stats.p99_ms,
            max_ms: stats.max_ms,
            slowest_frame: 0,
            effective_fps: if stats.mean_ms > 0.0 { 1000.0 / stats.mean_ms } else { f64::INFINITY },
            max_median_ratio: stats.max_median_ratio(),
            raw_max_median_ratio: raw.max_median_ratio(),
            wall_ms,
            selections: 0,
            dispatch_rejected: 0,
        }
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frames               {}", self.frames)?;
        writeln!(f, "passes               {}", self.passes)?;
        writeln!(f, "min_ms               {:.6}", self.min_ms)?;
        writeln!(f, "median_ms            {:.6}", self.median_ms)?;
        writeln!(f, "mean_ms              {:.6}", self.mean_ms)?;
        writeln!(f, "p99_ms               {:.6}", self.p99_ms)?;
        writeln!(f, "max_ms               {:.6}", self.max_ms)?;
        writeln!(f, "slowest_frame        {}", self.slowest_frame)?;
        writeln!(f, "effective_fps        {:.1}", self.effective_fps)?;
        writeln!(f, "max_median_ratio     {:.3}", self.max_median_ratio)?;
        writeln!(f, "raw_max_median_ratio {:.3}", self.raw_max_median_ratio)?;
        writeln!(f, "selections           {}", self.selections)?;
        write!(f, "dispatch_rejected    {}", self.dispatch_rejected)
    }
}

/// Replays `records` through fresh sessions at full speed.
///
/// Every pass enqueues its selections on `dispatch`, so a slow delivery
/// backend is exercised while frames are being timed.
pub fn run_bench(
    records: &[TraceRecord],
    config: &SessionConfig,
    dispatch: Option<DispatchHandle>,
    options: BenchOptions,
) -> Result<BenchReport, ConfigError> {
    let passes = options.passes.max(1);
    let mut best = vec![u64::MAX; records.len()];
    let mut raw = None;
    let mut selections = 0;
    let mut rejected = 0;
    let started = Instant::now();

    for pass in 0..options.warmup + passes {
        let mut session = Session::new(config.clone(), dispatch.clone())?;
        for record in records {
            let events: Vec<SessionEvent> = session.process_record(record);
            drop(events);
        }
        if pass < options.warmup {
            continue;
        }
        for (b, &t) in best.iter_mut().zip(session.timings().nanos()) {
            *b = (*b).min(t);
        }
        if raw.is_none() {
            raw = Some(session.timings().stats());
            selections = session.counters().selections;
        }
        rejected += session.counters().dispatch_rejected;
    }

    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let slowest_frame = best
        .iter()
        .enumerate()
        .max_by_key(|(_, &t)| t)
        .map_or(0, |(i, _)| i);
    let stats = FrameTimings::from_nanos(best).stats();
    let mut report = BenchReport::from_stats(stats, raw.unwrap_or_default(), passes, wall_ms);
    report.slowest_frame = slowest_frame;
    report.selections = selections;
    report.dispatch_rejected = rejected;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate, GestureScript};

    #[test]
    fn reports_every_frame() {
        let script = GestureScript::from_toml(
            "[[segment]]\nframes = 100\nleft = [[500.0, 100.0, 2.0], [520.0, 110.0, 2.0]]\n",
        )
        .unwrap();
        let records = generate(&script, &SessionConfig::default().camera, 1, 1.0);
        let r = run_bench(&records, &SessionConfig::default(), None, BenchOptions { passes: 2, warmup: 0 }).unwrap();
        assert_eq!(r.frames, 100);
        assert_eq!(r.selections, 1);
        assert!(r.min_ms <= r.median_ms && r.median_ms <= r.max_ms);
        assert!(r.effective_fps > 0.0);
        let text = r.to_string();
        for key in ["min_ms", "median_ms", "mean_ms", "max_ms", "effective_fps", "max_median_ratio"] {
            assert!(text.contains(key));
        }
    }
}
