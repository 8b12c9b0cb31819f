//! On-disk sessions: one directory per session holding the scenario, the
//! run log, out-of-band measurements and how the session was created.
//! Opening a session replays its log.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gridsoc_core::agent::Lexicon;
use gridsoc_core::population::slug;
use gridsoc_core::session::{Measurements, Scenario, Session, SessionError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendSpec;
use crate::load::{load_lexicon, load_runlog, parse_scenario, read_json, sample_lexicon, write_runlog, LoadError};

pub const HOME_VAR: &str = "SIMCTL_HOME";
pub const DEFAULT_HOME: &str = "sessions";

const META: &str = "session.json";
const SCENARIO: &str = "scenario.json";
const RUNLOG: &str = "runlog.jsonl";
const MEASUREMENTS: &str = "measurements.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("no session `{0}` in the store")]
    NotFound(String),
}

/// How a stored session was created.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub seed: u64,
    pub backend: BackendSpec,
    /// Lexicon file; the bundled sample lexicon when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
}

impl SessionMeta {
    pub fn lexicon(&self) -> Result<Lexicon, LoadError> {
        match &self.lexicon {
            Some(p) => load_lexicon(p),
            None => Ok(sample_lexicon()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Store {
    root: PathBuf,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.into(), source }
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$SIMCTL_HOME`, or `./sessions`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(HOME_VAR).map(PathBuf::from).unwrap_or_else(|| DEFAULT_HOME.into()))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).join(META).is_file()
    }

    /// A fresh id starting from `base`; taken ids get a numeric suffix.
    pub fn fresh_id(&self, base: &str) -> String {
        let base = if base.is_empty() { "session".to_string() } else { slug(base) };
        let mut id = base.clone();
        let mut n = 2;
        while self.dir(&id).exists() {
            id = format!("{base}-{n}");
            n += 1;
        }
        id
    }

    /// Creates and saves a new session at round 0.
    pub fn create(
        &self,
        scenario: Scenario,
        backend: BackendSpec,
        seed: u64,
        lexicon: Option<PathBuf>,
    ) -> Result<(SessionMeta, Session), StoreError> {
        let id = self.fresh_id(&scenario.name);
        let meta = SessionMeta { id: id.clone(), seed, backend, lexicon };
        let lex = Arc::new(meta.lexicon()?);
        let session = Session::create(id, Arc::new(scenario), lex, seed, meta.backend.kind.as_str())?;
        self.save(&meta, &session)?;
        Ok((meta, session))
    }

    pub fn save(&self, meta: &SessionMeta, session: &Session) -> Result<(), StoreError> {
        let dir = self.dir(&meta.id);
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let put = |name: &str, text: String| -> Result<(), StoreError> {
            let p = dir.join(name);
            fs::write(&p, text).map_err(io(&p))
        };
        put(META, to_json(meta))?;
        put(SCENARIO, to_json(session.scenario()))?;
        put(MEASUREMENTS, to_json(session.measurements()))?;
        write_runlog(&dir.join(RUNLOG), session.log())?;
        Ok(())
    }

    /// Loads a session by replaying its stored log.
    pub fn open(&self, id: &str) -> Result<(SessionMeta, Session), StoreError> {
        if !self.exists(id) {
            return Err(StoreError::NotFound(id.into()));
        }
        let dir = self.dir(id);
        let meta: SessionMeta = read_json(&dir.join(META))?;
        let scenario_path = dir.join(SCENARIO);
        let text = fs::read_to_string(&scenario_path).map_err(io(&scenario_path))?;
        let scenario = parse_scenario(&scenario_path, &text)?;
        let log = load_runlog(&dir.join(RUNLOG))?;
        let mut session = Session::restore(id, Arc::new(scenario), Arc::new(meta.lexicon()?), &log)?;
        let m: Measurements = read_json(&dir.join(MEASUREMENTS))?;
        session.set_measurements(m);
        Ok((meta, session))
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("stored types serialize");
    s.push('\n');
    s
}
