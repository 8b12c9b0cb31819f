//! Chat-completions backend over HTTP.
//!
//! Speaks the widely used `POST {base}/chat/completions` JSON shape with a
//! bearer key. Embeddings stay local (hashing embedder) so memory retrieval
//! does not cost a call per round.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use gridsoc_core::agent::{AgentRecord, Embedder, HashingEmbedder};
use gridsoc_core::decision::prompt::{parse_reply, render_ask, render_decision, Prompt};
use gridsoc_core::decision::{
    template_impression, AskRequest, Backend, BackendError, DecisionRequest, DecisionResponse, TargetInfo,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const API_KEY_VAR: &str = "MODEL_API_KEY";
pub const BASE_URL_VAR: &str = "MODEL_BASE_URL";
pub const MODEL_VAR: &str = "MODEL_NAME";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-4o";
pub const MAX_IN_FLIGHT: usize = 8;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("{API_KEY_VAR} is not set")]
    MissingKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemoteConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl RemoteConfig {
    /// Reads `MODEL_API_KEY`, `MODEL_BASE_URL` and `MODEL_NAME`.
    pub fn from_env() -> Result<Self, RemoteError> {
        let api_key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty()).ok_or(RemoteError::MissingKey)?;
        Ok(Self {
            base_url: std::env::var(BASE_URL_VAR).unwrap_or_else(|_| DEFAULT_BASE_URL.into()),
            api_key,
            model: std::env::var(MODEL_VAR).unwrap_or_else(|_| DEFAULT_MODEL.into()),
            max_in_flight: MAX_IN_FLIGHT,
            timeout: Duration::from_secs(120),
        })
    }
}

/// Call and token counters, shared across worker threads.
#[derive(Debug, Default)]
pub struct Usage {
    pub calls: AtomicU64,
    pub failures: AtomicU64,
    pub prompt_tokens: AtomicU64,
    pub completion_tokens: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageTotals {
    pub calls: u64,
    pub failures: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Usage {
    pub fn totals(&self) -> UsageTotals {
        UsageTotals {
            calls: self.calls.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
            prompt_tokens: self.prompt_tokens.load(Ordering::Relaxed),
            completion_tokens: self.completion_tokens.load(Ordering::Relaxed),
        }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 2],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<TokenUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct TokenUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Clone)]
struct Client {
    http: ureq::Agent,
    config: RemoteConfig,
    usage: Arc<Usage>,
}

impl Client {
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = ChatRequest {
            model: &self.config.model,
            messages: [Message { role: "system", content: &prompt.system }, Message { role: "user", content: &prompt.user }],
            temperature: 0.7,
        };
        self.usage.calls.fetch_add(1, Ordering::Relaxed);
        let result = self
            .http
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(&body);
        let mut response = match result {
            Ok(r) => r,
            Err(e) => {
                self.usage.failures.fetch_add(1, Ordering::Relaxed);
                return Err(match e {
                    ureq::Error::StatusCode(401 | 403) => BackendError::Auth(e.to_string()),
                    _ => BackendError::Transport(e.to_string()),
                });
            }
        };
        let reply: ChatReply = response.body_mut().read_json().map_err(|e| {
            self.usage.failures.fetch_add(1, Ordering::Relaxed);
            BackendError::Reply(e.to_string())
        })?;
        if let Some(u) = &reply.usage {
            self.usage.prompt_tokens.fetch_add(u.prompt_tokens, Ordering::Relaxed);
            self.usage.completion_tokens.fetch_add(u.completion_tokens, Ordering::Relaxed);
        }
        reply
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::Reply("reply has no message content".into()))
    }
}

pub struct RemoteBackend {
    client: Client,
    embedder: HashingEmbedder,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig, seed: u64, embed_dim: usize) -> Self {
        let http: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        Self { client: Client { http, config, usage: Arc::new(Usage::default()) }, embedder: HashingEmbedder::new(embed_dim, seed) }
    }

    pub fn usage(&self) -> UsageTotals {
        self.client.usage.totals()
    }
}

impl Backend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn decide(&mut self, request: &DecisionRequest, feedback: Option<&str>) -> Result<DecisionResponse, BackendError> {
        parse_reply(&self.client.complete(&render_decision(request, feedback))?)
    }

    /// Sends up to `max_in_flight` requests at once; results keep input order.
    fn decide_batch(&mut self, batch: &[(DecisionRequest, Option<String>)]) -> Vec<Result<DecisionResponse, BackendError>> {
        let width = self.client.config.max_in_flight.max(1);
        let mut out = Vec::with_capacity(batch.len());
        for chunk in batch.chunks(width) {
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|(req, fb)| {
                        let client = self.client.clone();
                        s.spawn(move || parse_reply(&client.complete(&render_decision(req, fb.as_deref()))?))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(BackendError::Transport("worker panicked".into()))))
                    .collect()
            });
            out.extend(results);
        }
        out
    }

    fn embed(&mut self, text: &str) -> Vec<f64> {
        self.embedder.embed(text)
    }

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String {
        let prompt = Prompt {
            system: "You write one-sentence first impressions for characters in a simulation.".into(),
            user: format!(
                "{} ({}) meets {} for the first time: {}. Their goal right now: {}. Write {}'s first impression in one sentence.",
                agent.name, agent.group, target.name, target.description, agent.goals.short_term, agent.name
            ),
        };
        self.client.complete(&prompt).unwrap_or_else(|_| template_impression(agent, target))
    }

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError> {
        self.client.complete(&render_ask(request))
    }
}
