//! Caretaker notification dispatch.
//!
//! A selection becomes one [`DispatchRequest`] carrying the set of channels
//! to notify. Requests go through a bounded queue that never blocks the
//! caller; a single worker renders each channel's message, delivers it
//! (sandbox outbox or webhook POST) and appends the final [`OutboxRecord`].
//! One worker keeps per-channel delivery in enqueue order.

mod outbox;
mod render;
mod webhook;
mod worker;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use outbox::{DeliveryStatus, Outbox, OutboxRecord};
pub use render::{render_message, xml_escape, MessageStore, Payload, RenderError};
pub use webhook::{WebhookClient, WebhookOutcome};
pub use worker::{DispatchHandle, Dispatcher, EnqueueOutcome, QueueFull};

use crate::grid::SelectionEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Phone,
    Email,
    Sms,
    Voice,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Phone, Channel::Email, Channel::Sms, Channel::Voice];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Phone => "phone",
            Channel::Email => "email",
            Channel::Sms => "sms",
            Channel::Voice => "voice",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown channel `{0}` (expected phone, email, sms or voice)")]
pub struct UnknownChannel(String);

impl FromStr for Channel {
    type Err = UnknownChannel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownChannel(s.to_owned()))
    }
}

/// A subset of the four channels; iterates in a fixed order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelSet(u8);

impl ChannelSet {
    pub const EMPTY: ChannelSet = ChannelSet(0);
    pub const ALL: ChannelSet = ChannelSet(0b1111);

    pub fn insert(&mut self, channel: Channel) {
        self.0 |= channel.bit();
    }

    pub fn remove(&mut self, channel: Channel) {
        self.0 &= !channel.bit();
    }

    pub fn contains(self, channel: Channel) -> bool {
        self.0 & channel.bit() != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Channel> {
        Channel::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl Default for ChannelSet {
    fn default() -> Self {
        [Channel::Email, Channel::Sms].into_iter().collect()
    }
}

impl FromIterator<Channel> for ChannelSet {
    fn from_iter<I: IntoIterator<Item = Channel>>(iter: I) -> Self {
        let mut set = ChannelSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Debug for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ChannelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ChannelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Vec::<Channel>::deserialize(deserializer)?.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryMode {
    /// Append to the outbox only.
    #[default]
    Sandbox,
    /// POST each record to `{webhook_base}/{channel}`.
    Webhook,
}

/// Where and how messages go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DispatchConfig {
    pub mode: DeliveryMode,
    pub outbox: PathBuf,
    pub email_to: String,
    pub sms_to: String,
    pub phone_to: String,
    pub from_number: String,
    /// Per-option `{label}.xml` call scripts, created on setup when absent.
    pub message_store_dir: PathBuf,
    /// One pre-recorded audio file per option, named after the label.
    pub voice_dir: PathBuf,
    pub webhook_base: Option<String>,
    /// `{label}` is replaced by the option name.
    pub template: String,
    pub queue_capacity: usize,
    pub retry_limit: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
    /// How often an idle worker looks at the queue.
    pub poll_interval_ms: u64,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        DispatchConfig {
            mode: DeliveryMode::Sandbox,
            outbox: PathBuf::from("outbox.jsonl"),
            email_to: "caretaker@example.org".into(),
            sms_to: "+15550100000".into(),
            phone_to: "+15550100000".into(),
            from_number: "+14692083448".into(),
            message_store_dir: PathBuf::from("message_store"),
            voice_dir: PathBuf::from("voice"),
            webhook_base: None,
            template: "Patient requests: {label}".into(),
            queue_capacity: 64,
            retry_limit: 2,
            backoff_ms: 250,
            timeout_ms: 5000,
            poll_interval_ms: 2,
        }
    }
}

impl DispatchConfig {
    pub fn backoff(&self) -> Duration {
        Duration::from_millis(self.backoff_ms)
    }

    pub fn recipient(&self, channel: Channel) -> Option<&str> {
        match channel {
            Channel::Phone => Some(&self.phone_to),
            Channel::Email => Some(&self.email_to),
            Channel::Sms => Some(&self.sms_to),
            Channel::Voice => None,
        }
    }

    pub fn validate(&self) -> Result<(), DispatchError> {
        if self.queue_capacity == 0 {
            return Err(DispatchError::Config("queue_capacity must be at least 1".into()));
        }
        if self.mode == DeliveryMode::Webhook && self.webhook_base.is_none() {
            return Err(DispatchError::Config("webhook mode needs webhook_base".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("invalid dispatch configuration: {0}")]
    Config(String),
    #[error("outbox {path}: {source}")]
    Outbox {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("message store {path}: {source}")]
    MessageStore {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A selection bound to the channels that should carry it.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRequest {
    pub id: RequestId,
    pub selection: SelectionEvent,
    pub channels: ChannelSet,
    pub created_t_ms: f64,
}
