use std::io;
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use ureq::Agent;

use super::{Channel, OutboxRecord};

/// Final result of posting one record, after retries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebhookOutcome {
    pub attempts: u32,
    /// `Ok(())` on a 2xx response, otherwise the last failure reason.
    pub result: Result<(), String>,
}

/// Generic HTTP delivery: `POST {base}/{channel}` with the record as JSON.
#[derive(Clone)]
pub struct WebhookClient {
    agent: Agent,
    base: String,
    retry_limit: u32,
    backoff: Duration,
}

impl WebhookClient {
    pub fn new(base: &str, timeout: Duration, retry_limit: u32, backoff: Duration) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        WebhookClient {
            agent,
            base: base.trim_end_matches('/').to_owned(),
            retry_limit,
            backoff,
        }
    }

    pub fn url(&self, channel: Channel) -> String {
        format!("{}/{}", self.base, channel)
    }

    fn attempt(&self, url: &str, body: &str) -> Result<(), String> {
        match self.agent.post(url).content_type("application/json").send(body) {
            Ok(resp) if resp.status().is_success() => Ok(()),
            Ok(resp) => Err(format!("http {}", resp.status().as_u16())),
            Err(e) => Err(classify(&e)),
        }
    }

    /// Up to `1 + retry_limit` attempts with a fixed pause between them.
    pub fn post(&self, record: &OutboxRecord) -> WebhookOutcome {
        let url = self.url(record.channel);
        let body = match serde_json::to_string(record) {
            Ok(b) => b,
            Err(e) => {
                return WebhookOutcome {
                    attempts: 0,
                    result: Err(e.to_string()),
                }
            }
        };
        let mut attempts = 0;
        loop {
            attempts += 1;
            let result = self.attempt(&url, &body);
            match &result {
                Ok(()) => debug!("{} delivered to {url} after {attempts} attempt(s)", record.id),
                Err(reason) => warn!("{} to {url}: attempt {attempts} failed: {reason}", record.id),
            }
            if result.is_ok() || attempts > self.retry_limit {
                return WebhookOutcome { attempts, result };
            }
            thread::sleep(self.backoff);
        }
    }
}

fn classify(err: &ureq::Error) -> String {
    match err {
        ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => "connect".into(),
        ureq::Error::Io(e)
            if matches!(
                e.kind(),
                io::ErrorKind::ConnectionRefused
                    | io::ErrorKind::ConnectionReset
                    | io::ErrorKind::ConnectionAborted
                    | io::ErrorKind::NotConnected
                    | io::ErrorKind::AddrNotAvailable
            ) =>
        {
            "connect".into()
        }
        ureq::Error::Timeout(_) => "timeout".into(),
        other => other.to_string(),
    }
}
