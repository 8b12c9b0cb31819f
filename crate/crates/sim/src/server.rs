//! Session server: newline-delimited JSON over TCP.
//!
//! Every message is one line `{"type", "session", "payload", "seq"}`.
//! Replies echo the request's `seq`; pushes (`perception` after each round,
//! `run_control` when a background run ends) carry a per-session push
//! counter instead. Failures come back as `error` messages.
//!
//! Each session has one writer: handlers and the background runner take
//! the session lock. A run waits at every round boundary until all
//! attached humans outside free-action mode have submitted, or until the
//! barrier timeout passes; missing humans then idle.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Sender};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use gridsoc_core::analytics::LikertItem;
use gridsoc_core::decision::Backend;
use gridsoc_core::engine::runlog::RoundRecord;
use gridsoc_core::engine::SubmitError;
use gridsoc_core::events::EventSpec;
use gridsoc_core::population::slug;
use gridsoc_core::session::{AttachTarget, Mode, RunCommand, RunStatus, Scenario, Session, SessionError};
use gridsoc_core::text::{word_count, CHAT_WORD_LIMIT};
use gridsoc_core::AgentId;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{BackendKind, BackendSpec};
use crate::load::{load_scenario, shipped_scenario};
use crate::store::{SessionMeta, Store};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageType {
    CreateSession,
    Attach,
    Detach,
    Perception,
    Submit,
    FreeAction,
    Interview,
    Questionnaire,
    RunControl,
    EventInject,
    StateSnapshot,
    Error,
}

pub const MESSAGE_TYPES: [&str; 12] = [
    "create_session",
    "attach",
    "detach",
    "perception",
    "submit",
    "free_action",
    "interview",
    "questionnaire",
    "run_control",
    "event_inject",
    "state_snapshot",
    "error",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: MessageType,
    #[serde(default)]
    pub session: Option<String>,
    #[serde(default)]
    pub payload: Value,
    #[serde(default)]
    pub seq: u64,
}

impl Envelope {
    pub fn new(kind: MessageType, session: Option<&str>, payload: Value, seq: u64) -> Self {
        Self { kind, session: session.map(str::to_string), payload, seq }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("envelopes serialize");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CreatePayload {
    /// Shipped scenario name or path to a scenario file.
    #[serde(default)]
    pub scenario: Option<String>,
    /// Inline scenario document; wins over `scenario`.
    #[serde(default)]
    pub scenario_doc: Option<Scenario>,
    #[serde(default = "mock_kind")]
    pub backend: BackendKind,
    #[serde(default)]
    pub transcript: Option<PathBuf>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Preferred id; a suffix is added when it is taken.
    #[serde(default)]
    pub id: Option<String>,
}

fn mock_kind() -> BackendKind {
    BackendKind::Mock
}

#[derive(Clone, Debug, Deserialize)]
pub struct AttachPayload {
    pub human: String,
    pub target: AttachTarget,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AgentPayload {
    pub agent: AgentId,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SubmitPayload {
    pub agent: AgentId,
    /// Action grammar text, one action per line.
    pub text: String,
}

/// Either toggles free-action mode (`enabled`) or executes `text` at once.
#[derive(Clone, Debug, Deserialize)]
pub struct FreeActionPayload {
    pub agent: AgentId,
    #[serde(default)]
    pub enabled: Option<bool>,
    #[serde(default)]
    pub text: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct InterviewPayload {
    pub agent: AgentId,
    pub question: String,
}

/// Likert items, or trust ratings of `trust_target` when it is set.
#[derive(Clone, Debug, Deserialize)]
pub struct QuestionnairePayload {
    #[serde(default)]
    pub targets: Option<Vec<AgentId>>,
    #[serde(default)]
    pub items: Option<Vec<LikertItem>>,
    #[serde(default)]
    pub trust_target: Option<AgentId>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RunControlPayload {
    #[serde(flatten)]
    pub command: RunCommand,
    /// Milliseconds to wait for humans at each round boundary; unset waits
    /// for as long as it takes.
    #[serde(default)]
    pub barrier_timeout_ms: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct InjectPayload {
    pub event: EventSpec,
}

/// Protocol-level failure, sent back as an `error` message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub request: Option<MessageType>,
    pub message: String,
    /// Word count of a rejected chat, as the server counted it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<usize>,
}

impl ErrorPayload {
    fn new(request: Option<MessageType>, message: impl Into<String>) -> Self {
        Self { request, message: message.into(), words: None }
    }
}

fn session_error(kind: MessageType, e: SessionError) -> ErrorPayload {
    let words = match &e {
        SessionError::Submit(SubmitError::ChatTooLong { words, .. }) => Some(*words),
        _ => None,
    };
    ErrorPayload { request: Some(kind), message: e.to_string(), words }
}

struct Live {
    session: Session,
    meta: SessionMeta,
    backend: Box<dyn Backend + Send>,
    running: bool,
    pause_requested: bool,
    subscribers: BTreeMap<u64, Sender<String>>,
}

struct Slot {
    live: Mutex<Live>,
    wake: Condvar,
    pushes: AtomicU64,
}

impl Slot {
    fn lock(&self) -> MutexGuard<'_, Live> {
        self.live.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn push(&self, live: &mut Live, kind: MessageType, payload: Value) {
        let seq = self.pushes.fetch_add(1, Ordering::Relaxed) + 1;
        let line = Envelope::new(kind, Some(live.session.id()), payload, seq).to_line();
        live.subscribers.retain(|_, tx| tx.send(line.clone()).is_ok());
    }
}

#[derive(Clone, Debug, Default)]
pub struct ServerConfig {
    /// Sessions are saved here after every change when set.
    pub store: Option<Store>,
    /// Used when a `run_control` message gives no barrier timeout.
    pub default_barrier: Option<Duration>,
}

/// All live sessions of one server.
pub struct Hub {
    sessions: Mutex<BTreeMap<String, Arc<Slot>>>,
    config: ServerConfig,
    next_conn: AtomicU64,
}

/// Outgoing side of one client connection.
#[derive(Clone)]
pub struct Conn {
    pub id: u64,
    pub tx: Sender<String>,
}

type Reply = Result<(MessageType, Value), ErrorPayload>;

fn payload<T: DeserializeOwned>(kind: MessageType, v: &Value) -> Result<T, ErrorPayload> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let at = e.path().to_string();
        ErrorPayload::new(Some(kind), format!("payload `{at}`: {}", e.into_inner()))
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("protocol payloads serialize")
}

impl Hub {
    pub fn new(config: ServerConfig) -> Arc<Self> {
        Arc::new(Self { sessions: Mutex::new(BTreeMap::new()), config, next_conn: AtomicU64::new(1) })
    }

    pub fn connection(&self, tx: Sender<String>) -> Conn {
        Conn { id: self.next_conn.fetch_add(1, Ordering::Relaxed), tx }
    }

    fn slot(&self, kind: MessageType, id: Option<&str>) -> Result<Arc<Slot>, ErrorPayload> {
        let id = id.ok_or_else(|| ErrorPayload::new(Some(kind), "message names no session"))?;
        self.sessions
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ErrorPayload::new(Some(kind), format!("unknown session `{id}`")))
    }

    fn save(&self, live: &Live) {
        if let Some(store) = &self.config.store {
            if let Err(e) = store.save(&live.meta, &live.session) {
                log::warn!("saving session `{}`: {e}", live.meta.id);
            }
        }
    }

    /// Handles one request and returns the reply line.
    pub fn handle(self: &Arc<Self>, msg: Envelope, conn: &Conn) -> Envelope {
        let kind = msg.kind;
        let session = msg.session.clone();
        let reply = match kind {
            MessageType::CreateSession => self.create(&msg, conn),
            MessageType::Error => Err(ErrorPayload::new(Some(kind), "clients do not send `error` messages")),
            _ => self.slot(kind, msg.session.as_deref()).and_then(|slot| self.dispatch(&slot, &msg, conn)),
        };
        match reply {
            Ok((k, value)) => {
                let id = value.get("session").and_then(Value::as_str).map(str::to_string).or(session);
                Envelope::new(k, id.as_deref(), value, msg.seq)
            }
            Err(e) => Envelope::new(MessageType::Error, session.as_deref(), to_value(&e), msg.seq),
        }
    }

    fn create(&self, msg: &Envelope, conn: &Conn) -> Reply {
        let kind = MessageType::CreateSession;
        let p: CreatePayload = payload(kind, &msg.payload)?;
        let scenario = match (&p.scenario_doc, &p.scenario) {
            (Some(doc), _) => {
                doc.check().map_err(|e| ErrorPayload::new(Some(kind), format!("invalid scenario: {e}")))?;
                doc.clone()
            }
            (None, Some(name)) => {
                let path = Path::new(name);
                let loaded = if path.exists() { load_scenario(path) } else { shipped_scenario(name) };
                loaded.map_err(|e| ErrorPayload::new(Some(kind), e.to_string()))?
            }
            (None, None) => return Err(ErrorPayload::new(Some(kind), "payload needs `scenario` or `scenario_doc`")),
        };
        let spec = BackendSpec { kind: p.backend, transcript: p.transcript.clone() };
        let backend =
            spec.build(p.seed, scenario.config.embed_dim).map_err(|e| ErrorPayload::new(Some(kind), e.to_string()))?;
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let base = slug(p.id.as_deref().unwrap_or(&scenario.name));
        let base = if base.is_empty() { "session".to_string() } else { base };
        let taken = |id: &str| sessions.contains_key(id) || self.config.store.as_ref().is_some_and(|s| s.dir(id).exists());
        let mut id = base.clone();
        let mut n = 2;
        while taken(&id) {
            id = format!("{base}-{n}");
            n += 1;
        }
        let meta = SessionMeta { id: id.clone(), seed: p.seed, backend: spec, lexicon: p.lexicon.clone() };
        let lexicon = meta.lexicon().map_err(|e| ErrorPayload::new(Some(kind), e.to_string()))?;
        let session = Session::create(id.clone(), Arc::new(scenario), Arc::new(lexicon), p.seed, p.backend.as_str())
            .map_err(|e| session_error(kind, e))?;
        let reply = json!({
            "session": id,
            "round_index": session.round_index(),
            "agents": session.agent_ids(),
            "state_digest": session.state_digest(),
        });
        let live = Live {
            session,
            meta,
            backend,
            running: false,
            pause_requested: false,
            subscribers: BTreeMap::from([(conn.id, conn.tx.clone())]),
        };
        self.save(&live);
        sessions.insert(id, Arc::new(Slot { live: Mutex::new(live), wake: Condvar::new(), pushes: AtomicU64::new(0) }));
        Ok((kind, reply))
    }

    fn dispatch(self: &Arc<Self>, slot: &Arc<Slot>, msg: &Envelope, conn: &Conn) -> Reply {
        let kind = msg.kind;
        let mut live = slot.lock();
        live.subscribers.entry(conn.id).or_insert_with(|| conn.tx.clone());
        let err = |e: SessionError| session_error(kind, e);
        let out = match kind {
            MessageType::Attach => {
                let p: AttachPayload = payload(kind, &msg.payload)?;
                let handle = live.session.attach(&p.human, &p.target).map_err(err)?;
                let perception = live.session.perception(&handle.agent);
                json!({ "handle": handle, "perception": perception })
            }
            MessageType::Detach => {
                let p: AgentPayload = payload(kind, &msg.payload)?;
                live.session.detach(&p.agent).map_err(err)?;
                slot.wake.notify_all();
                json!({ "agent": p.agent })
            }
            MessageType::Perception => {
                let p: AgentPayload = payload(kind, &msg.payload)?;
                let perception = live
                    .session
                    .perception(&p.agent)
                    .ok_or_else(|| err(SessionError::UnknownAgent(p.agent.clone())))?;
                json!({ "agent": p.agent, "perception": perception })
            }
            MessageType::Submit => {
                let p: SubmitPayload = payload(kind, &msg.payload)?;
                let draft = live.session.draft_from_text(&p.agent, &p.text).map_err(err)?;
                let receipt = live.session.submit(draft).map_err(err)?;
                slot.wake.notify_all();
                json!({ "agent": p.agent, "receipt_seq": receipt, "round_index": live.session.round_index() })
            }
            MessageType::FreeAction => {
                let p: FreeActionPayload = payload(kind, &msg.payload)?;
                if let Some(on) = p.enabled {
                    live.session.set_free_action(&p.agent, on).map_err(err)?;
                    slot.wake.notify_all();
                }
                let record = match &p.text {
                    Some(text) => {
                        let draft = live.session.draft_from_text(&p.agent, text).map_err(err)?;
                        let l = &mut *live;
                        Some(l.session.free_action(draft, l.backend.as_mut()).map_err(err)?)
                    }
                    None => None,
                };
                let enabled = live.session.handle(&p.agent).is_some_and(|h| h.free_action);
                json!({ "agent": p.agent, "enabled": enabled, "record": record })
            }
            MessageType::Interview => {
                let p: InterviewPayload = payload(kind, &msg.payload)?;
                let l = &mut *live;
                let record = l.session.interview(&p.agent, &p.question, l.backend.as_mut()).map_err(err)?;
                json!({ "record": record, "state_digest": l.session.state_digest() })
            }
            MessageType::Questionnaire => {
                let p: QuestionnairePayload = payload(kind, &msg.payload)?;
                let l = &mut *live;
                match &p.trust_target {
                    Some(t) => {
                        let r = l.session.trust(p.targets.as_deref(), t, l.backend.as_mut()).map_err(err)?;
                        json!({ "trust": r, "state_digest": l.session.state_digest() })
                    }
                    None => {
                        let r = l
                            .session
                            .questionnaire(p.targets.as_deref(), p.items.as_deref(), l.backend.as_mut())
                            .map_err(err)?;
                        json!({ "responses": r, "state_digest": l.session.state_digest() })
                    }
                }
            }
            MessageType::RunControl => {
                let p: RunControlPayload = payload(kind, &msg.payload)?;
                drop(live);
                return self.run_control(slot, p);
            }
            MessageType::EventInject => {
                let p: InjectPayload = payload(kind, &msg.payload)?;
                let report = live.session.inject_event(p.event).map_err(err)?;
                json!({ "report": report, "state_digest": live.session.state_digest() })
            }
            MessageType::StateSnapshot => {
                let s = &live.session;
                let moods: BTreeMap<String, Option<f64>> = s
                    .map()
                    .regions
                    .iter()
                    .map(|r| (r.name.clone(), s.ambient_mood(&r.name).ok().flatten()))
                    .collect();
                json!({ "snapshot": s.snapshot(), "ambient_mood": moods, "map": s.map().to_document() })
            }
            MessageType::CreateSession | MessageType::Error => unreachable!("handled before dispatch"),
        };
        if kind != MessageType::Perception && kind != MessageType::StateSnapshot {
            self.save(&live);
        }
        Ok((kind, out))
    }

    fn run_control(self: &Arc<Self>, slot: &Arc<Slot>, p: RunControlPayload) -> Reply {
        let kind = MessageType::RunControl;
        let mut live = slot.lock();
        let start = live.session.round_index();
        let target = match p.command {
            RunCommand::Pause => {
                if live.running {
                    live.pause_requested = true;
                    slot.wake.notify_all();
                }
                return Ok((kind, json!({ "accepted": true, "running": live.running, "round_index": start })));
            }
            RunCommand::Step { n } => start + n,
            RunCommand::RunUntil { round } => round.max(start),
        };
        if live.running {
            return Err(ErrorPayload::new(Some(kind), "a run is already in progress; pause it first"));
        }
        if target == start {
            let status = RunStatus {
                round_index: start,
                mode: live.session.mode(),
                rounds_run: 0,
                interrupted: false,
                state_digest: live.session.state_digest(),
            };
            return Ok((kind, json!({ "accepted": true, "running": false, "target": target, "status": status })));
        }
        live.running = true;
        live.pause_requested = false;
        live.session.set_mode(match p.command {
            RunCommand::Step { .. } => Mode::Stepping,
            _ => Mode::Running,
        });
        let barrier = p.barrier_timeout_ms.map(Duration::from_millis).or(self.config.default_barrier);
        let (hub, slot2) = (self.clone(), slot.clone());
        thread::spawn(move || hub.run_loop(&slot2, start, target, barrier));
        Ok((kind, json!({ "accepted": true, "running": true, "target": target })))
    }

    fn run_loop(&self, slot: &Arc<Slot>, start: u64, target: u64, barrier: Option<Duration>) {
        let mut live = slot.lock();
        let mut interrupted = false;
        while live.session.round_index() < target {
            let deadline = barrier.map(|d| Instant::now() + d);
            while !live.pause_requested && !live.session.awaiting_humans().is_empty() {
                live = match deadline {
                    None => slot.wake.wait(live).unwrap_or_else(|p| p.into_inner()),
                    Some(at) => {
                        let now = Instant::now();
                        if now >= at {
                            break;
                        }
                        slot.wake.wait_timeout(live, at - now).unwrap_or_else(|p| p.into_inner()).0
                    }
                };
            }
            if live.pause_requested {
                interrupted = true;
                break;
            }
            let l = &mut *live;
            let record = l.session.step(l.backend.as_mut()).clone();
            self.push_round(slot, &mut live, &record);
            self.save(&live);
        }
        live.running = false;
        live.pause_requested = false;
        live.session.set_mode(Mode::Paused);
        let status = RunStatus {
            round_index: live.session.round_index(),
            mode: Mode::Paused,
            rounds_run: live.session.round_index() - start,
            interrupted,
            state_digest: live.session.state_digest(),
        };
        self.save(&live);
        slot.push(&mut live, MessageType::RunControl, json!({ "finished": true, "status": status }));
    }

    /// After a round: each controlled agent's new perception and its outcomes.
    fn push_round(&self, slot: &Slot, live: &mut Live, record: &RoundRecord) {
        let agents: Vec<AgentId> = live.session.handles().map(|h| h.agent.clone()).collect();
        for agent in agents {
            let outcomes: Vec<_> = record.outcomes.iter().filter(|o| o.agent == agent).collect();
            let payload = json!({
                "agent": agent,
                "round": record.round,
                "outcomes": outcomes,
                "perception": live.session.perception(&agent),
            });
            slot.push(live, MessageType::Perception, payload);
        }
    }
}

/// Client-side mirror of the chat limit, for consoles and tests.
pub fn chat_fits(utterance: &str) -> bool {
    word_count(utterance) <= CHAT_WORD_LIMIT
}

fn serve_connection(hub: Arc<Hub>, stream: TcpStream) -> std::io::Result<()> {
    let (tx, rx) = channel::<String>();
    let mut writer = stream.try_clone()?;
    let pump = thread::spawn(move || {
        for line in rx {
            if writer.write_all(line.as_bytes()).and_then(|_| writer.flush()).is_err() {
                break;
            }
        }
    });
    let conn = hub.connection(tx.clone());
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<Envelope>(&line) {
            Ok(msg) => hub.handle(msg, &conn),
            Err(e) => Envelope::new(
                MessageType::Error,
                None,
                to_value(&ErrorPayload::new(None, format!("malformed message: {e}"))),
                0,
            ),
        };
        if tx.send(reply.to_line()).is_err() {
            break;
        }
    }
    drop(tx);
    drop(conn);
    let _ = pump.join();
    Ok(())
}

/// Accepts connections until the listener fails; one thread per client.
pub fn serve(listener: TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let hub = hub.clone();
        thread::spawn(move || {
            if let Err(e) = serve_connection(hub, stream) {
                log::debug!("connection closed: {e}");
            }
        });
    }
    Ok(())
}
