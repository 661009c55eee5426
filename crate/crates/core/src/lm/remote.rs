//! HTTP backend for a hosted model behind the provider-neutral contract.

use std::time::Duration;

use parking_lot::{Condvar, Mutex};
use serde::Deserialize;
use serde_json::Value;

use super::{LmBackend, LmError, LmOutcome, LmResult, LmTask};

pub const URL_VAR: &str = "PLAYFINDER_LM_URL";
pub const TOKEN_VAR: &str = "PLAYFINDER_LM_TOKEN";

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub url: String,
    pub token: Option<String>,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token: None,
            max_in_flight: 4,
            timeout: Duration::from_secs(30),
        }
    }

    /// Reads the endpoint and token from the environment.
    pub fn from_env() -> Result<Self, LmError> {
        let url = std::env::var(URL_VAR)
            .map_err(|_| LmError::Transport(format!("{URL_VAR} is not set")))?;
        let mut cfg = Self::new(url);
        cfg.token = std::env::var(TOKEN_VAR).ok().filter(|t| !t.is_empty());
        Ok(cfg)
    }
}

/// Counting gate for in-flight requests.
struct Gate {
    used: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock();
        while *used >= self.cap {
            self.freed.wait(&mut used);
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.used.lock() -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Deserialize)]
struct Reply {
    result: Value,
    #[serde(default)]
    trace: String,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("url", &self.config.url)
            .field("max_in_flight", &self.config.max_in_flight)
            .finish()
    }
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, LmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LmError::Transport(e.to_string()))?;
        Ok(Self {
            gate: Gate {
                used: Mutex::new(0),
                freed: Condvar::new(),
                cap: config.max_in_flight.max(1),
            },
            config,
            client,
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }
}

impl LmBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, task: &LmTask) -> Result<LmOutcome, LmError> {
        let _permit = self.gate.acquire();
        let mut req = self.client.post(&self.config.url).json(task);
        if let Some(token) = &self.config.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| LmError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(LmError::Transport(format!("endpoint returned {status}")));
        }
        let body = resp.text().map_err(|e| LmError::Transport(e.to_string()))?;
        let reply: Reply = serde_json::from_str(&body)
            .map_err(|e| LmError::Malformed(format!("response is not {{result, trace}}: {e}")))?;
        let result = LmResult::from_wire(task.kind(), reply.result)?;
        Ok(LmOutcome::new(result, reply.trace))
    }
}
