//! Independent traces and masks processed in bulk.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same functions run sequentially. The `_seq` variants are
//! always sequential so both paths can be compared in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::intent::{mask_solidity, HandMask, MaskError};
use crate::model::{ConfigError, SessionConfig};
use crate::session::{Session, SessionEvent};
use crate::trace::TraceRecord;

fn replay_one(records: &[TraceRecord], config: &SessionConfig) -> Result<Vec<SessionEvent>, ConfigError> {
    let mut session = Session::new(config.clone(), None)?;
    let mut events = Vec::with_capacity(records.len() * 2);
    for record in records {
        events.extend(session.process_record(record));
    }
    Ok(events)
}

/// Runs each trace in its own session, without dispatch.
pub fn replay_batch(traces: &[Vec<TraceRecord>], config: &SessionConfig) -> Result<Vec<Vec<SessionEvent>>, ConfigError> {
    #[cfg(feature = "parallel")]
    {
        traces.par_iter().map(|t| replay_one(t, config)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        replay_batch_seq(traces, config)
    }
}

pub fn replay_batch_seq(
    traces: &[Vec<TraceRecord>],
    config: &SessionConfig,
) -> Result<Vec<Vec<SessionEvent>>, ConfigError> {
    traces.iter().map(|t| replay_one(t, config)).collect()
}

pub fn solidity_batch(masks: &[HandMask]) -> Vec<Result<f64, MaskError>> {
    #[cfg(feature = "parallel")]
    {
        masks.par_iter().map(mask_solidity).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        solidity_batch_seq(masks)
    }
}

pub fn solidity_batch_seq(masks: &[HandMask]) -> Vec<Result<f64, MaskError>> {
    masks.iter().map(mask_solidity).collect()
}
