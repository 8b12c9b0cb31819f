//! Sessions: a scenario brought to life, with human control, run control,
//! out-of-band measurements and replay.
//!
//! A session owns its engine and run log but not its backend; every call
//! that may need the model takes one. The caller decides how long to wait
//! for humans between rounds: [`Session::awaiting_humans`] reports who has
//! not submitted yet, and [`Session::step`] idles anyone still missing.

mod replay;
mod scenario;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use replay::{replay, Divergence, DivergenceKind, ReplayReport};
pub use scenario::{Scenario, ScenarioError};

use crate::agent::{overall_emotion, AgentRecord, Demographics, Goals, Lexicon, VadVector};
use crate::analytics::{self, AnalyticsError, InterviewRecord, LikertItem, LikertResponse, RoundSample, TrustRating};
use crate::decision::{self, parse_decision, Backend, ParseError, Registry};
use crate::engine::runlog::{ControlRecord, Genesis, LogEntry, RoundRecord, RunLog};
use crate::engine::{
    Engine, FreeActionRecord, Origin, Perception, SpawnError, StateDelta, SubmissionDraft, SubmitError,
};
use crate::events::{validate_events, EventError, EventSpec};
use crate::geom::Coord;
use crate::ids::AgentId;
use crate::population::{sample_population, slug, PopulationError};
use crate::world::{ObjectPlace, WorldMap};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Paused,
    Stepping,
    Running,
}

/// A human's hold on one agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlHandle {
    pub human: String,
    pub agent: AgentId,
    pub free_action: bool,
}

fn researcher_group() -> String {
    "researcher".into()
}

/// An agent created for a human joining the community.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewResident {
    pub name: String,
    #[serde(default = "researcher_group")]
    pub group: String,
    #[serde(default)]
    pub self_awareness: String,
    #[serde(default)]
    pub long_term_goal: String,
    #[serde(default)]
    pub short_term_goal: String,
}

/// What a human attaches to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum AttachTarget {
    Agent { id: AgentId },
    /// The first uncontrolled member of a group, or a fresh agent from the
    /// scenario's slot template for that group.
    Slot { group: String },
    NewResident(NewResident),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunCommand {
    Step { n: u64 },
    RunUntil { round: u64 },
    Pause,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStatus {
    pub round_index: u64,
    pub mode: Mode,
    pub rounds_run: u64,
    pub interrupted: bool,
    pub state_digest: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("population: {0}")]
    Population(#[from] PopulationError),
    #[error("placement: {0}")]
    Spawn(#[from] SpawnError),
    #[error(transparent)]
    Submit(#[from] SubmitError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("event: {0}")]
    Event(#[from] EventError),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("agent `{0}` is already controlled")]
    AlreadyControlled(AgentId),
    #[error("agent `{0}` is not controlled by a human")]
    NotControlled(AgentId),
    #[error("group `{0}` has no uncontrolled member")]
    NoFreeSlot(String),
    #[error("the scenario declares no spawn region")]
    NoSpawnRegion,
    #[error("region `{0}` has no free cell")]
    RegionFull(String),
    #[error("agent `{0}` is in free-action mode; use a free action")]
    FreeActionOnly(AgentId),
    #[error("agent `{0}` is not in free-action mode")]
    NotFreeAction(AgentId),
    #[error("the session is running; pause it first")]
    Running,
    #[error("run log does not match this scenario")]
    ScenarioMismatch,
    #[error("replay diverged at {0}")]
    Diverged(Divergence),
}

/// Out-of-band measurements. Kept apart from the run log and agent memory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub questionnaire: Vec<LikertResponse>,
    pub trust: Vec<TrustRating>,
    pub interviews: Vec<InterviewRecord>,
}

/// Public view of one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: AgentId,
    pub name: String,
    pub group: String,
    pub position: Coord,
    pub region: Option<String>,
    pub emotion: VadVector,
    pub overall_emotion: f64,
    pub short_term_goal: String,
    pub states: Vec<String>,
    pub inventory: Vec<String>,
    pub controlled_by: Option<String>,
    pub free_action: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub scenario: String,
    pub round_index: u64,
    pub mode: Mode,
    pub state_digest: String,
    pub log_head: String,
    pub agents: Vec<AgentView>,
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    scenario: Arc<Scenario>,
    engine: Engine,
    log: RunLog,
    mode: Mode,
    handles: BTreeMap<AgentId, ControlHandle>,
    samples: Vec<RoundSample>,
    measurements: Measurements,
}

/// Seed-shuffled cells of `region` that are walkable and free.
fn free_cells(map: &WorldMap, occupied: &[Coord], region: &str, seed: Option<u64>) -> Vec<Coord> {
    let Some(area) = map.region(region) else { return Vec::new() };
    let mut cells: Vec<Coord> =
        area.cells.iter().copied().filter(|c| map.is_walkable(*c) && !occupied.contains(c)).collect();
    if let Some(seed) = seed {
        crate::rng::shuffle(&mut cells, crate::rng::mix(seed, region.as_bytes()));
    }
    cells
}

impl Session {
    /// Samples the population, places everyone and writes the genesis entry.
    pub fn create(
        id: impl Into<String>,
        scenario: Arc<Scenario>,
        lexicon: Arc<Lexicon>,
        seed: u64,
        backend_name: &str,
    ) -> Result<Self, SessionError> {
        let map = Arc::new(scenario.check()?);
        let config = crate::engine::EngineConfig { seed, ..scenario.config.clone() };
        let mut engine = Engine::new(map.clone(), lexicon, config.clone(), scenario.events.clone());
        let roster = sample_population(&scenario.population, scenario.population.seed_policy.resolve(seed), config.wm_capacity)?;
        let mut occupied: Vec<Coord> = Vec::new();
        let mut by_region: BTreeMap<&str, Vec<Coord>> = BTreeMap::new();
        for a in &roster {
            let cells = by_region
                .entry(a.region.as_str())
                .or_insert_with(|| free_cells(&map, &occupied, &a.region, Some(seed)));
            let Some(at) = cells.iter().position(|c| !occupied.contains(c)).map(|i| cells.remove(i)) else {
                let needed = roster.iter().filter(|b| b.region == a.region).count();
                let free = free_cells(&map, &[], &a.region, None).len();
                return Err(ScenarioError::RegionFull { region: a.region.clone(), free, needed }.into());
            };
            occupied.push(at);
            let mut record = a.record.clone();
            record.position = at;
            for item in &a.items {
                if let Some(status) = engine.state_mut().objects.get_mut(item) {
                    status.place = ObjectPlace::Carried(record.id.clone());
                    record.inventory.push(item.clone());
                }
            }
            engine.insert_agent(record)?;
        }
        let mut log = RunLog::new();
        log.append(LogEntry::Genesis(Genesis {
            scenario: scenario.name.clone(),
            scenario_digest: scenario.digest(),
            seed,
            backend: backend_name.into(),
            config,
            agents: engine.state().agents.values().map(|a| (a.id.clone(), a.position)).collect(),
            state_digest: engine.state_digest(),
        }));
        Ok(Self {
            id: id.into(),
            scenario,
            engine,
            log,
            mode: Mode::Paused,
            handles: BTreeMap::new(),
            samples: Vec::new(),
            measurements: Measurements::default(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn scenario_arc(&self) -> Arc<Scenario> {
        self.scenario.clone()
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn map(&self) -> &WorldMap {
        self.engine.map()
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Marks the session as running or paused; servers set this around
    /// background runs so interviews can be refused meanwhile.
    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn round_index(&self) -> u64 {
        self.engine.round_index()
    }

    pub fn state_digest(&self) -> String {
        self.engine.state_digest()
    }

    pub fn seed(&self) -> u64 {
        self.engine.config().seed
    }

    pub fn handles(&self) -> impl Iterator<Item = &ControlHandle> {
        self.handles.values()
    }

    pub fn handle(&self, agent: &AgentId) -> Option<&ControlHandle> {
        self.handles.get(agent)
    }

    /// Trajectory samples, one per resolved round.
    pub fn samples(&self) -> &[RoundSample] {
        &self.samples
    }

    pub fn measurements(&self) -> &Measurements {
        &self.measurements
    }

    pub fn set_measurements(&mut self, m: Measurements) {
        self.measurements = m;
    }

    pub fn agent_ids(&self) -> Vec<AgentId> {
        self.engine.state().agents.keys().cloned().collect()
    }

    /// Agents of the given group, in id order.
    pub fn group_members(&self, group: &str) -> Vec<AgentId> {
        self.engine.state().agents.values().filter(|a| a.group == group).map(|a| a.id.clone()).collect()
    }

    pub fn group_of(&self) -> BTreeMap<AgentId, String> {
        self.engine.state().agents.values().map(|a| (a.id.clone(), a.group.clone())).collect()
    }

    /// Group names in scenario order, followed by groups of spawned agents.
    pub fn group_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.scenario.population.groups.iter().map(|g| g.name.clone()).collect();
        for a in self.engine.state().agents.values() {
            if !labels.contains(&a.group) {
                labels.push(a.group.clone());
            }
        }
        labels
    }

    pub fn perception(&self, agent: &AgentId) -> Option<Perception> {
        self.engine.build_perception(agent)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let map = self.engine.map();
        let agents = self
            .engine
            .state()
            .agents
            .values()
            .map(|a| {
                let h = self.handles.get(&a.id);
                AgentView {
                    id: a.id.clone(),
                    name: a.name.clone(),
                    group: a.group.clone(),
                    position: a.position,
                    region: map.region_of(a.position).ok().flatten().map(str::to_string),
                    emotion: a.emotion,
                    overall_emotion: overall_emotion(a.emotion),
                    short_term_goal: a.goals.short_term.clone(),
                    states: a.states.iter().cloned().collect(),
                    inventory: a.inventory.iter().map(|i| i.to_string()).collect(),
                    controlled_by: h.map(|h| h.human.clone()),
                    free_action: h.is_some_and(|h| h.free_action),
                }
            })
            .collect();
        SessionSnapshot {
            id: self.id.clone(),
            scenario: self.scenario.name.clone(),
            round_index: self.round_index(),
            mode: self.mode,
            state_digest: self.state_digest(),
            log_head: self.log.head().into(),
            agents,
        }
    }

    fn control(&mut self, record: ControlRecord) {
        let round = self.round_index();
        let state_digest = self.state_digest();
        self.log.append(LogEntry::Control { round, record, state_digest });
    }

    fn spawn(&mut self, spec: &NewResident) -> Result<AgentId, SessionError> {
        let region = self.scenario.spawn_region.clone().ok_or(SessionError::NoSpawnRegion)?;
        let occupied: Vec<Coord> = self.engine.state().occupied().into_iter().collect();
        let at = *free_cells(self.engine.map(), &occupied, &region, None)
            .first()
            .ok_or_else(|| SessionError::RegionFull(region.clone()))?;
        let base = slug(&spec.name);
        let mut id = AgentId::new(base.clone());
        let mut n = 2;
        while self.engine.agent(&id).is_some() {
            id = AgentId::new(format!("{base}-{n}"));
            n += 1;
        }
        let awareness = if spec.self_awareness.is_empty() {
            format!("I am {}, a new resident of this community.", spec.name)
        } else {
            spec.self_awareness.clone()
        };
        let record = AgentRecord::new(
            id.clone(),
            spec.name.clone(),
            spec.group.clone(),
            Demographics::default(),
            awareness,
            Goals::new(spec.long_term_goal.clone(), spec.short_term_goal.clone()),
            self.engine.config().wm_capacity,
            at,
        );
        self.engine.insert_agent(record.clone())?;
        self.control(ControlRecord::Spawn { record });
        Ok(id)
    }

    /// Gives `human` control of an agent. Controlled agents stop deciding on
    /// their own from the next round.
    pub fn attach(&mut self, human: &str, target: &AttachTarget) -> Result<ControlHandle, SessionError> {
        let agent = match target {
            AttachTarget::Agent { id } => {
                if self.engine.agent(id).is_none() {
                    return Err(SessionError::UnknownAgent(id.clone()));
                }
                if self.handles.contains_key(id) {
                    return Err(SessionError::AlreadyControlled(id.clone()));
                }
                id.clone()
            }
            AttachTarget::Slot { group } => {
                match self.group_members(group).into_iter().find(|a| !self.handles.contains_key(a)) {
                    Some(a) => a,
                    None => {
                        let template = self.scenario.slot(group).cloned();
                        let template = template.ok_or_else(|| SessionError::NoFreeSlot(group.clone()))?;
                        self.spawn(&template)?
                    }
                }
            }
            AttachTarget::NewResident(spec) => self.spawn(spec)?,
        };
        let handle = ControlHandle { human: human.into(), agent: agent.clone(), free_action: false };
        self.handles.insert(agent.clone(), handle.clone());
        self.control(ControlRecord::Attach { agent, human: human.into() });
        Ok(handle)
    }

    /// Releases an agent back to its backend.
    pub fn detach(&mut self, agent: &AgentId) -> Result<(), SessionError> {
        self.handles.remove(agent).ok_or_else(|| SessionError::NotControlled(agent.clone()))?;
        self.control(ControlRecord::Detach { agent: agent.clone() });
        Ok(())
    }

    pub fn set_free_action(&mut self, agent: &AgentId, on: bool) -> Result<(), SessionError> {
        let h = self.handles.get_mut(agent).ok_or_else(|| SessionError::NotControlled(agent.clone()))?;
        if h.free_action != on {
            h.free_action = on;
            self.control(ControlRecord::SetFreeAction { agent: agent.clone(), on });
        }
        Ok(())
    }

    /// Parses grammar text for a controlled agent into a draft for the
    /// current round.
    pub fn draft_from_text(&self, agent: &AgentId, text: &str) -> Result<SubmissionDraft, SessionError> {
        if self.engine.agent(agent).is_none() {
            return Err(SessionError::UnknownAgent(agent.clone()));
        }
        let reg = Registry::for_agent(&self.engine, agent);
        let parsed = parse_decision(text, &reg)?;
        Ok(SubmissionDraft {
            agent: agent.clone(),
            round_index: self.round_index(),
            movement: parsed.movement,
            standard: parsed.standard,
            origin: Origin::Human,
            mind: None,
        })
    }

    /// Queues a human's actions for the current round.
    pub fn submit(&mut self, mut draft: SubmissionDraft) -> Result<u64, SessionError> {
        let h = self.handles.get(&draft.agent).ok_or_else(|| SessionError::NotControlled(draft.agent.clone()))?;
        if h.free_action {
            return Err(SessionError::FreeActionOnly(draft.agent));
        }
        draft.origin = Origin::Human;
        Ok(self.engine.submit_action(draft)?)
    }

    /// Executes a free-action submission right away.
    pub fn free_action(
        &mut self,
        mut draft: SubmissionDraft,
        backend: &mut dyn Backend,
    ) -> Result<FreeActionRecord, SessionError> {
        let h = self.handles.get(&draft.agent).ok_or_else(|| SessionError::NotControlled(draft.agent.clone()))?;
        if !h.free_action {
            return Err(SessionError::NotFreeAction(draft.agent));
        }
        draft.origin = Origin::Human;
        draft.round_index = self.round_index();
        let record = self.engine.free_action(draft, backend)?;
        let state_digest = self.state_digest();
        self.log.append(LogEntry::FreeAction { record: record.clone(), state_digest });
        Ok(record)
    }

    /// Controlled agents outside free-action mode that have not submitted
    /// this round.
    pub fn awaiting_humans(&self) -> Vec<AgentId> {
        let queued = self.engine.pending_submissions();
        self.handles
            .values()
            .filter(|h| !h.free_action && !queued.iter().any(|s| s.agent == h.agent))
            .map(|h| h.agent.clone())
            .collect()
    }

    /// Applies an event immediately and logs it.
    pub fn inject_event(&mut self, spec: EventSpec) -> Result<crate::events::ChainReport, SessionError> {
        let mut all: Vec<EventSpec> = self.engine.events().iter().filter(|e| e.id != spec.id).cloned().collect();
        all.push(spec.clone());
        validate_events(&all, self.engine.map())?;
        let report = self.engine.inject_event(spec.clone());
        self.control(ControlRecord::Inject {
            event: spec,
            fired: report.fired.clone(),
            deltas: report.deltas.clone(),
        });
        Ok(report)
    }

    /// One full round: autonomous agents perceive and decide, then the
    /// engine resolves everything queued. Humans who have not submitted
    /// idle.
    pub fn step(&mut self, backend: &mut dyn Backend) -> &RoundRecord {
        let occupancy = self.engine.state().occupancy();
        let autonomous: Vec<AgentId> =
            self.engine.state().agents.keys().filter(|a| !self.handles.contains_key(*a)).cloned().collect();
        let requests: Vec<_> = autonomous
            .iter()
            .filter_map(|a| self.engine.perception_with(a, &occupancy))
            .filter_map(|p| decision::assemble_with(&self.engine, p, backend))
            .collect();
        let decisions = decision::decide_many(&self.engine, &requests, backend);
        let mut diagnostics = Vec::new();
        for d in decisions {
            if d.idled {
                let why = d.attempts.iter().filter_map(|a| a.error.as_deref()).collect::<Vec<_>>().join("; ");
                diagnostics.push(format!("`{}` idled: {why}", d.draft.agent));
            }
            let agent = d.draft.agent.clone();
            if d.draft.movement.is_none() && d.draft.standard.is_none() && d.draft.mind.is_none() {
                continue;
            }
            if let Err(e) = self.engine.submit_action(d.draft) {
                diagnostics.push(format!("submission from `{agent}` rejected: {e}"));
            }
        }
        let report = self.engine.resolve_round(backend);
        let round = report.round_index;
        let mut record =
            RoundRecord::from_report(report, self.engine.rng_state_digest(), self.engine.state_digest());
        diagnostics.append(&mut record.diagnostics);
        record.diagnostics = diagnostics;
        self.samples.push(RoundSample::take(round, self.engine.map(), self.engine.state()));
        self.log.append(LogEntry::Round(record));
        match self.log.lines().last().map(|l| &l.entry) {
            Some(LogEntry::Round(r)) => r,
            _ => unreachable!("a round record was just appended"),
        }
    }

    /// Runs a control command. `interrupt` is polled before every round; a
    /// `true` pauses at that boundary.
    pub fn run(
        &mut self,
        command: &RunCommand,
        backend: &mut dyn Backend,
        interrupt: &mut dyn FnMut(&Session) -> bool,
    ) -> RunStatus {
        let start = self.round_index();
        let target = match command {
            RunCommand::Step { n } => start + n,
            RunCommand::RunUntil { round } => (*round).max(start),
            RunCommand::Pause => start,
        };
        self.mode = match command {
            RunCommand::Step { .. } => Mode::Stepping,
            RunCommand::RunUntil { .. } => Mode::Running,
            RunCommand::Pause => Mode::Paused,
        };
        let mut interrupted = false;
        while self.round_index() < target {
            if interrupt(self) {
                interrupted = true;
                break;
            }
            self.step(backend);
        }
        self.mode = Mode::Paused;
        RunStatus {
            round_index: self.round_index(),
            mode: self.mode,
            rounds_run: self.round_index() - start,
            interrupted,
            state_digest: self.state_digest(),
        }
    }

    pub fn run_until(&mut self, round: u64, backend: &mut dyn Backend) -> RunStatus {
        self.run(&RunCommand::RunUntil { round }, backend, &mut |_| false)
    }

    fn ensure_idle(&self) -> Result<(), SessionError> {
        if self.mode == Mode::Running {
            Err(SessionError::Running)
        } else {
            Ok(())
        }
    }

    /// Asks one agent an open question. The exchange is stored with the
    /// measurements; the agent itself is untouched.
    pub fn interview(
        &mut self,
        agent: &AgentId,
        question: &str,
        backend: &mut dyn Backend,
    ) -> Result<InterviewRecord, SessionError> {
        self.ensure_idle()?;
        let r = analytics::interview(self.engine.state(), self.engine.map(), backend, agent, question)?;
        self.measurements.interviews.push(r.clone());
        Ok(r)
    }

    /// Administers Likert items to `targets`; the scenario questionnaire
    /// and every agent when either is `None`.
    pub fn questionnaire(
        &mut self,
        targets: Option<&[AgentId]>,
        items: Option<&[LikertItem]>,
        backend: &mut dyn Backend,
    ) -> Result<Vec<LikertResponse>, SessionError> {
        self.ensure_idle()?;
        let everyone = self.agent_ids();
        let targets = targets.unwrap_or(&everyone);
        let items = items.unwrap_or(&self.scenario.questionnaire);
        let r = analytics::administer_questionnaire(self.engine.state(), self.engine.map(), backend, targets, items)?;
        self.measurements.questionnaire.extend(r.iter().cloned());
        Ok(r)
    }

    /// Trust ratings of `target` by `raters` (everyone else when `None`).
    pub fn trust(
        &mut self,
        raters: Option<&[AgentId]>,
        target: &AgentId,
        backend: &mut dyn Backend,
    ) -> Result<Vec<TrustRating>, SessionError> {
        self.ensure_idle()?;
        let everyone = self.agent_ids();
        let raters = raters.unwrap_or(&everyone);
        let r = analytics::collect_trust(self.engine.state(), self.engine.map(), backend, raters, target)?;
        self.measurements.trust.extend(r.iter().cloned());
        Ok(r)
    }

    pub fn ambient_mood(&self, region: &str) -> Result<Option<f64>, SessionError> {
        Ok(analytics::ambient_mood(self.engine.map(), self.engine.state(), region)?)
    }

    /// Rebuilds a session by replaying `log` against `scenario`. Fails on
    /// the first divergence.
    pub fn restore(
        id: impl Into<String>,
        scenario: Arc<Scenario>,
        lexicon: Arc<Lexicon>,
        log: &RunLog,
    ) -> Result<Self, SessionError> {
        let (mut session, report) = replay::rebuild(scenario, lexicon, log)?;
        if let Some(d) = report.divergence {
            return Err(SessionError::Diverged(d));
        }
        session.id = id.into();
        session.log = log.clone();
        Ok(session)
    }
}

/// Spawned agents in log order, for analyses that need the researcher id.
pub fn spawned_agents(log: &RunLog) -> Vec<AgentId> {
    log.entries()
        .filter_map(|e| match e {
            LogEntry::Control { record: ControlRecord::Spawn { record }, .. } => Some(record.id.clone()),
            _ => None,
        })
        .collect()
}

/// Deltas of every kind in the log, in order, with their stamps.
pub fn all_deltas(log: &RunLog) -> Vec<(String, &StateDelta)> {
    let mut out = Vec::new();
    for e in log.entries() {
        let stamp = e.stamp();
        let deltas: &[StateDelta] = match e {
            LogEntry::Round(r) => &r.deltas,
            LogEntry::FreeAction { record, .. } => &record.deltas,
            LogEntry::Control { record: ControlRecord::Inject { deltas, .. }, .. } => deltas,
            _ => &[],
        };
        out.extend(deltas.iter().map(|d| (stamp.clone(), d)));
    }
    out
}
