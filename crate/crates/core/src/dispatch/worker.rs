use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use crossbeam_channel::{Receiver, Sender, TryRecvError, TrySendError};
use log::{error, info};
use thiserror::Error;

use super::{
    render_message, ChannelSet, DeliveryMode, DeliveryStatus, DispatchConfig, DispatchError, DispatchRequest,
    MessageStore, Outbox, OutboxRecord, RequestId, WebhookClient,
};
use crate::grid::SelectionEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("dispatch queue full")]
pub struct QueueFull;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted(RequestId),
    Rejected(RequestId, QueueFull),
}

impl EnqueueOutcome {
    pub fn id(&self) -> RequestId {
        match *self {
            EnqueueOutcome::Accepted(id) | EnqueueOutcome::Rejected(id, _) => id,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, EnqueueOutcome::Accepted(_))
    }
}

#[derive(Debug, Default)]
struct Counters {
    next_id: AtomicU64,
    rejected: AtomicU64,
    processed: AtomicU64,
}

/// Cheap, cloneable producer side of the queue. Never blocks.
#[derive(Debug, Clone)]
pub struct DispatchHandle {
    tx: Sender<DispatchRequest>,
    counters: Arc<Counters>,
}

impl DispatchHandle {
    pub fn enqueue(&self, selection: SelectionEvent, channels: ChannelSet) -> EnqueueOutcome {
        let id = RequestId(self.counters.next_id.fetch_add(1, Ordering::Relaxed) + 1);
        let request = DispatchRequest {
            id,
            created_t_ms: selection.t_ms,
            selection,
            channels,
        };
        match self.tx.try_send(request) {
            Ok(()) => EnqueueOutcome::Accepted(id),
            Err(TrySendError::Full(_)) | Err(TrySendError::Disconnected(_)) => {
                self.counters.rejected.fetch_add(1, Ordering::Relaxed);
                EnqueueOutcome::Rejected(id, QueueFull)
            }
        }
    }

    /// Requests handed to the queue. A request still being enqueued on
    /// another thread may already be counted.
    pub fn accepted(&self) -> u64 {
        self.counters.next_id.load(Ordering::Relaxed) - self.rejected()
    }

    pub fn rejected(&self) -> u64 {
        self.counters.rejected.load(Ordering::Relaxed)
    }
}

struct Delivery {
    config: DispatchConfig,
    outbox: Arc<Outbox>,
    webhook: Option<WebhookClient>,
    run_tag: String,
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl Delivery {
    fn process(&self, request: DispatchRequest) {
        for channel in request.channels.iter() {
            let mut record = OutboxRecord {
                id: format!("{}-{}-{}", self.run_tag, request.id, channel),
                request_id: request.id.0,
                channel,
                label: request.selection.label.clone(),
                to: self.config.recipient(channel).map(str::to_owned),
                payload: None,
                status: DeliveryStatus::Queued,
                reason: None,
                attempts: 0,
                t_ms: unix_ms(),
            };
            match render_message(&request.selection, channel, &self.config) {
                Err(e) => record.finish(DeliveryStatus::Failed, Some(e.to_string())),
                Ok(payload) => {
                    record.payload = Some(payload);
                    match &self.webhook {
                        None => {
                            record.attempts = 1;
                            record.finish(DeliveryStatus::Sent, None);
                        }
                        Some(client) => {
                            let outcome = client.post(&record);
                            record.attempts = outcome.attempts;
                            match outcome.result {
                                Ok(()) => record.finish(DeliveryStatus::Sent, None),
                                Err(reason) => record.finish(DeliveryStatus::Failed, Some(reason)),
                            }
                        }
                    }
                }
            }
            record.t_ms = unix_ms();
            if let Err(e) = self.outbox.append(&record) {
                error!("outbox append failed for {}: {e}", record.id);
            }
        }
    }
}

struct Shared {
    delivery: Delivery,
    closing: AtomicBool,
    poll: Duration,
}

/// Owns the queue and its single delivery worker.
///
/// The worker polls rather than blocks, so enqueueing never has to wake a
/// sleeping thread from the frame loop.
pub struct Dispatcher {
    handle: DispatchHandle,
    rx: Option<Receiver<DispatchRequest>>,
    shared: Arc<Shared>,
    worker: Option<JoinHandle<()>>,
}

impl Dispatcher {
    /// Opens the outbox and prepares the call-script store, without starting
    /// the worker. Requests queue up until [`Dispatcher::start`].
    pub fn new(config: DispatchConfig, labels: &[Arc<str>]) -> Result<Self, DispatchError> {
        config.validate()?;
        MessageStore::ensure(&config.message_store_dir, labels, &config.template)?;
        let outbox = Arc::new(Outbox::open(&config.outbox)?);
        let webhook = match (config.mode, &config.webhook_base) {
            (DeliveryMode::Webhook, Some(base)) => Some(WebhookClient::new(
                base,
                Duration::from_millis(config.timeout_ms),
                config.retry_limit,
                config.backoff(),
            )),
            _ => None,
        };
        let (tx, rx) = crossbeam_channel::bounded(config.queue_capacity);
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        let run_tag = format!("{:08x}", (nanos as u32) ^ std::process::id().rotate_left(16));
        let poll = Duration::from_millis(config.poll_interval_ms.max(1));
        Ok(Dispatcher {
            handle: DispatchHandle {
                tx,
                counters: Arc::default(),
            },
            rx: Some(rx),
            shared: Arc::new(Shared {
                delivery: Delivery {
                    config,
                    outbox,
                    webhook,
                    run_tag,
                },
                closing: AtomicBool::new(false),
                poll,
            }),
            worker: None,
        })
    }

    pub fn spawn(config: DispatchConfig, labels: &[Arc<str>]) -> Result<Self, DispatchError> {
        let mut d = Dispatcher::new(config, labels)?;
        d.start();
        Ok(d)
    }

    pub fn start(&mut self) {
        let Some(rx) = self.rx.take() else { return };
        let shared = Arc::clone(&self.shared);
        let counters = Arc::clone(&self.handle.counters);
        let worker = thread::Builder::new()
            .name("dispatch".into())
            .spawn(move || loop {
                match rx.try_recv() {
                    Ok(request) => {
                        shared.delivery.process(request);
                        counters.processed.fetch_add(1, Ordering::Release);
                    }
                    Err(TryRecvError::Empty) if shared.closing.load(Ordering::Acquire) => break,
                    Err(TryRecvError::Empty) => thread::sleep(shared.poll),
                    Err(TryRecvError::Disconnected) => break,
                }
            })
            .expect("spawn dispatch worker");
        self.worker = Some(worker);
    }

    pub fn handle(&self) -> DispatchHandle {
        self.handle.clone()
    }

    pub fn outbox(&self) -> &Outbox {
        &self.shared.delivery.outbox
    }

    pub fn config(&self) -> &DispatchConfig {
        &self.shared.delivery.config
    }

    pub fn processed(&self) -> u64 {
        self.handle.counters.processed.load(Ordering::Acquire)
    }

    /// Waits until every accepted request has been delivered or `timeout`
    /// passes. Returns whether the queue drained.
    pub fn wait_idle(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        loop {
            if self.processed() >= self.handle.accepted() {
                return true;
            }
            if Instant::now() >= deadline {
                return false;
            }
            thread::sleep(Duration::from_millis(1));
        }
    }

    /// Delivers everything still queued, then stops the worker.
    pub fn finish(mut self) {
        self.start();
        self.shared.closing.store(true, Ordering::Release);
        if let Some(worker) = self.worker.take() {
            if worker.join().is_err() {
                error!("dispatch worker panicked");
            }
        }
        info!(
            "dispatch finished: {} accepted, {} rejected",
            self.handle.accepted(),
            self.handle.rejected()
        );
    }
}

impl Drop for Dispatcher {
    fn drop(&mut self) {
        // the worker drains what is left and exits on its own
        self.shared.closing.store(true, Ordering::Release);
    }
}
