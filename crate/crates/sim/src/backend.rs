//! Backend selection and canned transcript files.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gridsoc_core::decision::{Backend, CannedBackend, CannedReply, MockBackend};
use gridsoc_core::AgentId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::load::{read_json, LoadError};
use crate::remote::{RemoteBackend, RemoteConfig, RemoteError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Canned,
    Remote,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Mock => "mock",
            BackendKind::Canned => "canned",
            BackendKind::Remote => "remote",
        }
    }
}

impl FromStr for BackendKind {
    type Err = BackendSetupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "canned" => Ok(BackendKind::Canned),
            "remote" => Ok(BackendKind::Remote),
            other => Err(BackendSetupError::Unknown(other.into())),
        }
    }
}

#[derive(Debug, Error)]
pub enum BackendSetupError {
    #[error("unknown backend `{0}`; expected mock, canned or remote")]
    Unknown(String),
    #[error("the canned backend needs a transcript file")]
    NoTranscript,
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptReply {
    pub round: u64,
    pub agent: AgentId,
    pub reply: CannedReply,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptAnswer {
    pub agent: AgentId,
    pub answer: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptImpression {
    pub agent: AgentId,
    pub target: String,
    pub text: String,
}

/// Recorded model output for the canned backend. Replies for the same
/// `(round, agent)` are served in file order, one per attempt.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    #[serde(default)]
    pub replies: Vec<TranscriptReply>,
    #[serde(default)]
    pub answers: Vec<TranscriptAnswer>,
    #[serde(default)]
    pub impressions: Vec<TranscriptImpression>,
}

impl Transcript {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        read_json(path)
    }

    pub fn into_backend(self, seed: u64, embed_dim: usize) -> CannedBackend {
        let mut b = CannedBackend::new(seed, embed_dim);
        for r in self.replies {
            b.push_reply(r.round, r.agent, r.reply);
        }
        for a in self.answers {
            b.push_answer(a.agent, a.answer);
        }
        for i in self.impressions {
            b.set_impression(i.agent, i.target, i.text);
        }
        b
    }
}

/// Everything needed to build a backend for a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub kind: BackendKind,
    #[serde(default)]
    pub transcript: Option<PathBuf>,
}

impl BackendSpec {
    pub fn mock() -> Self {
        Self { kind: BackendKind::Mock, transcript: None }
    }

    /// Builds the backend. Offline backends embed with the session seed so
    /// that replays reproduce memory retrieval.
    pub fn build(&self, seed: u64, embed_dim: usize) -> Result<Box<dyn Backend + Send>, BackendSetupError> {
        Ok(match self.kind {
            BackendKind::Mock => Box::new(MockBackend::new(seed, embed_dim)),
            BackendKind::Canned => {
                let path = self.transcript.as_ref().ok_or(BackendSetupError::NoTranscript)?;
                Box::new(Transcript::load(path)?.into_backend(seed, embed_dim))
            }
            BackendKind::Remote => Box::new(RemoteBackend::new(RemoteConfig::from_env()?, seed, embed_dim)),
        })
    }
}
