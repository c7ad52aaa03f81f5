use std::time::Duration;

use serde::Serialize;

/// Raw per-frame processing times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameTimings {
    ns: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TimingStats {
    pub count: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl TimingStats {
    /// `max / median`, or 0 with no samples.
    pub fn max_median_ratio(&self) -> f64 {
        if self.median_ms > 0.0 {
            self.max_ms / self.median_ms
        } else {
            0.0
        }
    }
}

impl FrameTimings {
    pub fn with_capacity(n: usize) -> Self {
        FrameTimings { ns: Vec::with_capacity(n) }
    }

    pub fn from_nanos(ns: Vec<u64>) -> Self {
        FrameTimings { ns }
    }

    pub fn record(&mut self, elapsed: Duration) {
        self.ns.push(elapsed.as_nanos().min(u64::MAX as u128) as u64);
    }

    pub fn len(&self) -> usize {
        self.ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ns.is_empty()
    }

    pub fn nanos(&self) -> &[u64] {
        &self.ns
    }

    pub fn clear(&mut self) {
        self.ns.clear();
    }

    pub fn stats(&self) -> TimingStats {
        if self.ns.is_empty() {
            return TimingStats::default();
        }
        let mut sorted = self.ns.clone();
        sorted.sort_unstable();
        let n = sorted.len();
        let ms = |ns: u64| ns as f64 / 1e6;
        let median = if n % 2 == 1 {
            ms(sorted[n / 2])
        } else {
            (ms(sorted[n / 2 - 1]) + ms(sorted[n / 2])) / 2.0
        };
        // nearest-rank percentile
        let p99 = sorted[((0.99 * n as f64).ceil() as usize).clamp(1, n) - 1];
        TimingStats {
            count: n,
            min_ms: ms(sorted[0]),
            median_ms: median,
            mean_ms: sorted.iter().map(|&v| v as f64).sum::<f64>() / n as f64 / 1e6,
            p99_ms: ms(p99),
            max_ms: ms(sorted[n - 1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_on_known_samples() {
        let t = FrameTimings::from_nanos(vec![4_000_000, 1_000_000, 3_000_000, 2_000_000]);
        let s = t.stats();
        assert_eq!(s.count, 4);
        assert_eq!(s.min_ms, 1.0);
        assert_eq!(s.max_ms, 4.0);
        assert_eq!(s.median_ms, 2.5);
        assert_eq!(s.mean_ms, 2.5);
        assert_eq!(s.p99_ms, 4.0);
        assert_eq!(s.max_median_ratio(), 1.6);
    }

    #[test]
    fn empty_is_zero() {
        let s = FrameTimings::default().stats();
        assert_eq!(s.count, 0);
        assert_eq!(s.max_median_ratio(), 0.0);
    }
}
