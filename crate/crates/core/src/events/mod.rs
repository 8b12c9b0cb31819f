//! Scheduled and triggered events, interventions and chain resolution.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{ActionSubmission, ActionVerb, MoveTarget, StateDelta, SubmissionOutcome, WorldState};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::{apply_state_effect, EffectTarget, EffectVerb, ObjectKind, StateEffect, WorldMap};

/// Maximum event applications per round before a chain is cut off.
pub const CHAIN_CAP: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    /// Fires when the round being resolved has this index.
    Scheduled { round: u64 },
    /// Fires when an object in range matches every given predicate.
    Existence {
        #[serde(default)]
        object_kind: Option<ObjectKind>,
        /// Case-insensitive substring of the object's name or description.
        #[serde(default)]
        description_contains: Option<String>,
        #[serde(default)]
        state: Option<String>,
    },
    /// Fires when an executed action matches every given filter.
    Action {
        #[serde(default)]
        verb: Option<ActionVerb>,
        /// Agent id or group name.
        #[serde(default)]
        actor: Option<String>,
        /// Object, agent or region id.
        #[serde(default)]
        target: Option<String>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventRange {
    #[default]
    Everywhere,
    Region(String),
    Cells(Vec<Coord>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Furniture,
    Items,
    Objects,
    Agents,
    Object(ObjectId),
    Agent(AgentId),
    Group(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventEffect {
    pub select: Selector,
    pub verb: EffectVerb,
    pub label: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentSelector {
    #[default]
    InRange,
    All,
    Group(String),
    Agents(Vec<AgentId>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    #[serde(default)]
    pub select: AgentSelector,
    pub goal: String,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub activation: Activation,
    #[serde(default)]
    pub range: EventRange,
    #[serde(default)]
    pub effects: Vec<EventEffect>,
    #[serde(default)]
    pub intervention: Option<Intervention>,
    #[serde(default = "yes")]
    pub once: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cause {
    Schedule,
    Existence { object: ObjectId },
    Action { receipt_seq: u64, agent: AgentId },
    Chain { parent: String },
    Injected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredEvent {
    pub event: String,
    pub round: u64,
    pub cause: Cause,
    /// Set when a selector could not be resolved; nothing was applied.
    #[serde(default)]
    pub misfired: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("event `{event}`: unknown region `{region}`")]
    UnknownRegion { event: String, region: String },
    #[error("event `{event}`: range cell {coord} is out of bounds")]
    OutOfBounds { event: String, coord: Coord },
    #[error("event `{event}`: unknown object `{object}`")]
    UnknownObject { event: String, object: String },
    #[error("event `{event}`: existence trigger needs at least one predicate")]
    EmptyPredicate { event: String },
    #[error("duplicate event id `{0}`")]
    Duplicate(String),
    #[error("event `{event}`: empty state label")]
    EmptyLabel { event: String },
}

/// Load-time checks against the map.
pub fn validate_events(specs: &[EventSpec], map: &WorldMap) -> Result<(), EventError> {
    let mut ids = BTreeSet::new();
    for s in specs {
        if !ids.insert(s.id.as_str()) {
            return Err(EventError::Duplicate(s.id.clone()));
        }
        match &s.range {
            EventRange::Region(r) if map.region(r).is_none() => {
                return Err(EventError::UnknownRegion { event: s.id.clone(), region: r.clone() })
            }
            EventRange::Cells(cells) => {
                if let Some(c) = cells.iter().find(|c| !map.in_bounds(**c)) {
                    return Err(EventError::OutOfBounds { event: s.id.clone(), coord: *c });
                }
            }
            _ => {}
        }
        if let Activation::Existence { object_kind: None, description_contains: None, state: None } = s.activation {
            return Err(EventError::EmptyPredicate { event: s.id.clone() });
        }
        for e in &s.effects {
            if e.label.trim().is_empty() {
                return Err(EventError::EmptyLabel { event: s.id.clone() });
            }
            if let Selector::Object(o) = &e.select {
                if map.object(o.as_str()).is_none() {
                    return Err(EventError::UnknownObject { event: s.id.clone(), object: o.to_string() });
                }
            }
        }
    }
    Ok(())
}

use alloc::string::ToString;

fn range_cells(spec: &EventSpec, map: &WorldMap) -> Result<Option<BTreeSet<Coord>>, String> {
    match &spec.range {
        EventRange::Everywhere => Ok(None),
        EventRange::Region(r) => {
            map.region(r).map(|reg| Some(reg.cells.clone())).ok_or_else(|| format!("unknown region `{r}`"))
        }
        EventRange::Cells(cells) => {
            if let Some(c) = cells.iter().find(|c| !map.in_bounds(**c)) {
                return Err(format!("range cell {c} is out of bounds"));
            }
            Ok(Some(cells.iter().copied().collect()))
        }
    }
}

fn in_range(cells: &Option<BTreeSet<Coord>>, c: Option<Coord>) -> bool {
    match (cells, c) {
        (None, Some(_)) => true,
        (Some(set), Some(c)) => set.contains(&c),
        (_, None) => false,
    }
}

fn ci_contains(hay: &str, needle: &str) -> bool {
    hay.to_lowercase().contains(&needle.to_lowercase())
}

/// First object in range matching an existence trigger.
fn existence_match(spec: &EventSpec, map: &WorldMap, state: &WorldState) -> Option<ObjectId> {
    let Activation::Existence { object_kind, description_contains, state: label } = &spec.activation else {
        return None;
    };
    let cells = range_cells(spec, map).ok()?;
    for obj in &map.objects {
        let Some(status) = state.objects.get(&obj.id) else { continue };
        if !in_range(&cells, state.object_coord(&obj.id)) {
            continue;
        }
        if object_kind.is_some_and(|k| k != obj.kind) {
            continue;
        }
        if let Some(d) = description_contains {
            if !ci_contains(&obj.description, d) && !ci_contains(&obj.name, d) {
                continue;
            }
        }
        if let Some(l) = label {
            if !status.states.contains(l) {
                continue;
            }
        }
        return Some(obj.id.clone());
    }
    None
}

fn actor_matches(filter: &Option<String>, agent: &AgentId, state: &WorldState) -> bool {
    match filter {
        None => true,
        Some(f) => {
            agent.as_str().eq_ignore_ascii_case(f)
                || state.agents.get(agent).is_some_and(|a| a.group.eq_ignore_ascii_case(f))
        }
    }
}

/// First executed action matching an action trigger.
fn action_match(
    spec: &EventSpec,
    state: &WorldState,
    executed: &[(&ActionSubmission, &SubmissionOutcome)],
) -> Option<(u64, AgentId)> {
    let Activation::Action { verb, actor, target } = &spec.activation else {
        return None;
    };
    for (sub, out) in executed {
        if !actor_matches(actor, &sub.agent, state) {
            continue;
        }
        let mut candidates: Vec<(ActionVerb, Vec<&str>)> = Vec::new();
        if let (Some(m), Some(o)) = (&sub.movement, &out.movement) {
            if o.is_executed() {
                let t = match &m.target {
                    MoveTarget::Region(r) => alloc::vec![r.as_str()],
                    MoveTarget::Cell(_) => Vec::new(),
                };
                candidates.push((ActionVerb::Go, t));
            }
        }
        if let (Some(s), Some(o)) = (&sub.standard, &out.standard) {
            if o.is_executed() {
                candidates.push((s.verb(), s.target_ids()));
            }
        }
        for (v, targets) in candidates {
            if verb.is_some_and(|want| want != v) {
                continue;
            }
            if let Some(t) = target {
                if !targets.iter().any(|x| x.eq_ignore_ascii_case(t)) {
                    continue;
                }
            }
            return Some((sub.receipt_seq, sub.agent.clone()));
        }
    }
    None
}

/// Events whose activation holds against the post-action state of `round`.
/// `once` events that already fired this session are skipped.
pub fn evaluate_triggers(
    specs: &[EventSpec],
    round: u64,
    map: &WorldMap,
    state: &WorldState,
    executed: &[(&ActionSubmission, &SubmissionOutcome)],
) -> Vec<FiredEvent> {
    let mut out = Vec::new();
    for spec in specs {
        if spec.once && state.fired_once.contains(&spec.id) {
            continue;
        }
        let cause = match &spec.activation {
            Activation::Scheduled { round: r } => (*r == round).then_some(Cause::Schedule),
            Activation::Existence { .. } => existence_match(spec, map, state).map(|object| Cause::Existence { object }),
            Activation::Action { .. } => {
                action_match(spec, state, executed).map(|(receipt_seq, agent)| Cause::Action { receipt_seq, agent })
            }
        };
        if let Some(cause) = cause {
            out.push(FiredEvent { event: spec.id.clone(), round, cause, misfired: None });
        }
    }
    out
}

enum Target {
    Agent(AgentId),
    Object(ObjectId),
}

/// Applies one event to `state`, all effects or none.
///
/// Returns the deltas, or the reason the event misfired.
pub fn apply_event(spec: &EventSpec, map: &WorldMap, state: &mut WorldState) -> Result<Vec<StateDelta>, String> {
    let cells = range_cells(spec, map)?;
    let agents_in_range: Vec<AgentId> =
        state.agents.values().filter(|a| in_range(&cells, Some(a.position))).map(|a| a.id.clone()).collect();

    let mut plan: Vec<(Target, StateEffect)> = Vec::new();
    for e in &spec.effects {
        let effect = StateEffect { verb: e.verb, label: e.label.clone(), target: EffectTarget::Object };
        let objects_where = |pred: &dyn Fn(ObjectKind) -> bool| -> Vec<ObjectId> {
            map.objects
                .iter()
                .filter(|o| pred(o.kind) && in_range(&cells, state.object_coord(&o.id)))
                .map(|o| o.id.clone())
                .collect()
        };
        let targets: Vec<Target> = match &e.select {
            Selector::Furniture => {
                objects_where(&|k| k == ObjectKind::Furniture).into_iter().map(Target::Object).collect()
            }
            Selector::Items => objects_where(&|k| k == ObjectKind::Item).into_iter().map(Target::Object).collect(),
            Selector::Objects => objects_where(&|_| true).into_iter().map(Target::Object).collect(),
            Selector::Agents => agents_in_range.iter().cloned().map(Target::Agent).collect(),
            Selector::Object(id) => {
                if !state.objects.contains_key(id) {
                    return Err(format!("unknown object `{id}`"));
                }
                if in_range(&cells, state.object_coord(id)) {
                    alloc::vec![Target::Object(id.clone())]
                } else {
                    Vec::new()
                }
            }
            Selector::Agent(id) => {
                if !state.agents.contains_key(id) {
                    return Err(format!("unknown agent `{id}`"));
                }
                if agents_in_range.contains(id) {
                    alloc::vec![Target::Agent(id.clone())]
                } else {
                    Vec::new()
                }
            }
            Selector::Group(g) => {
                if !state.agents.values().any(|a| a.group.eq_ignore_ascii_case(g)) {
                    return Err(format!("unknown group `{g}`"));
                }
                agents_in_range
                    .iter()
                    .filter(|id| state.agents[*id].group.eq_ignore_ascii_case(g))
                    .cloned()
                    .map(Target::Agent)
                    .collect()
            }
        };
        plan.extend(targets.into_iter().map(|t| (t, effect.clone())));
    }

    let mut goal_targets: Vec<AgentId> = Vec::new();
    if let Some(iv) = &spec.intervention {
        goal_targets = match &iv.select {
            AgentSelector::InRange => agents_in_range.clone(),
            AgentSelector::All => state.agents.keys().cloned().collect(),
            AgentSelector::Group(g) => {
                if !state.agents.values().any(|a| a.group.eq_ignore_ascii_case(g)) {
                    return Err(format!("unknown group `{g}`"));
                }
                state.agents.values().filter(|a| a.group.eq_ignore_ascii_case(g)).map(|a| a.id.clone()).collect()
            }
            AgentSelector::Agents(ids) => {
                if let Some(missing) = ids.iter().find(|id| !state.agents.contains_key(*id)) {
                    return Err(format!("unknown agent `{missing}`"));
                }
                ids.clone()
            }
        };
    }

    // Every selector resolved; commit.
    let round = state.round_index;
    let note = if spec.description.is_empty() { spec.id.clone() } else { spec.description.clone() };
    let mut deltas = Vec::new();
    let mut touched: BTreeSet<AgentId> = BTreeSet::new();
    for (target, effect) in plan {
        match target {
            Target::Object(id) => {
                let status = state.objects.get_mut(&id).expect("checked above");
                if apply_state_effect(&mut status.states, &effect) {
                    deltas.push(StateDelta::ObjectState { object: id, verb: effect.verb, label: effect.label });
                }
            }
            Target::Agent(id) => {
                let agent = state.agents.get_mut(&id).expect("checked above");
                if apply_state_effect(&mut agent.states, &effect) {
                    let verb_word = if effect.verb == EffectVerb::Add { "gained" } else { "lost" };
                    let change = format!("{verb_word} state \"{}\" from event: {note}", effect.label);
                    deltas.push(StateDelta::AgentState { agent: id.clone(), verb: effect.verb, label: effect.label });
                    state.incoming.entry(id.clone()).or_default().state_changes.push(change);
                    touched.insert(id);
                }
            }
        }
    }
    if let Some(iv) = &spec.intervention {
        for id in goal_targets {
            let agent = state.agents.get_mut(&id).expect("checked above");
            agent.goals.short_term = iv.goal.clone();
            deltas.push(StateDelta::Goal { agent: id.clone(), goal: iv.goal.clone() });
            state.incoming.entry(id.clone()).or_default().notices.push(format!("{note}. New goal: {}", iv.goal));
            touched.insert(id);
        }
    }
    for id in touched {
        if let Some(agent) = state.agents.get_mut(&id) {
            agent.wm.push(round, format!("Event: {note}"));
        }
    }
    Ok(deltas)
}

/// Result of one round's event processing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub fired: Vec<FiredEvent>,
    pub deltas: Vec<StateDelta>,
    pub diagnostics: Vec<String>,
}

/// Applies `initial` in order, re-evaluating existence triggers after each
/// application until nothing new fires. Each event id fires at most once
/// per call; at most [`CHAIN_CAP`] events are applied.
pub fn resolve_chain(
    specs: &[EventSpec],
    map: &WorldMap,
    state: &mut WorldState,
    initial: Vec<FiredEvent>,
) -> ChainReport {
    let mut report = ChainReport::default();
    let mut seen: BTreeSet<String> = initial.iter().map(|f| f.event.clone()).collect();
    let mut queue: VecDeque<FiredEvent> = initial.into();
    let round = state.round_index;
    while let Some(mut fired) = queue.pop_front() {
        if report.fired.len() >= CHAIN_CAP {
            let dropped: Vec<String> =
                core::iter::once(fired.event).chain(queue.into_iter().map(|f| f.event)).collect();
            report.diagnostics.push(format!(
                "event chain cap of {CHAIN_CAP} reached in round {round}; not applied: {}",
                dropped.join(", ")
            ));
            break;
        }
        let Some(spec) = specs.iter().find(|s| s.id == fired.event) else {
            fired.misfired = Some("unknown event".into());
            report.fired.push(fired);
            continue;
        };
        match apply_event(spec, map, state) {
            Ok(deltas) => report.deltas.extend(deltas),
            Err(why) => {
                report.diagnostics.push(format!("event `{}` misfired: {why}", spec.id));
                fired.misfired = Some(why);
            }
        }
        if spec.once {
            state.fired_once.insert(spec.id.clone());
        }
        let parent = spec.id.clone();
        report.fired.push(fired);
        for s in specs {
            if seen.contains(&s.id) || (s.once && state.fired_once.contains(&s.id)) {
                continue;
            }
            if existence_match(s, map, state).is_some() {
                seen.insert(s.id.clone());
                queue.push_back(FiredEvent {
                    event: s.id.clone(),
                    round,
                    cause: Cause::Chain { parent: parent.clone() },
                    misfired: None,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{MapDocument, ObjectDoc, LocationDoc, RegionDoc};
    use alloc::vec;

    fn map_with_objects() -> WorldMap {
        let mut doc = MapDocument::open_floor(6, 3);
        doc.regions.push(RegionDoc {
            name: "Bar Area".into(),
            description: "the bar".into(),
            cells: vec![Coord::new(0, 0), Coord::new(1, 0), Coord::new(2, 0)],
        });
        for (i, x) in [0, 1, 2, 4].into_iter().enumerate() {
            doc.objects.push(ObjectDoc {
                id: format!("stool-{i}"),
                name: Some("Stool".into()),
                kind: Some(ObjectKind::Furniture),
                description: Some("a bar stool".into()),
                function: Some(vec![]),
                states: Some(vec![]),
                location: Some(LocationDoc::Cell(Coord::new(x, 0))),
            });
        }
        WorldMap::from_document(&doc).unwrap()
    }

    fn spec(id: &str, activation: Activation, effects: Vec<EventEffect>) -> EventSpec {
        EventSpec {
            id: id.into(),
            description: String::new(),
            activation,
            range: EventRange::Everywhere,
            effects,
            intervention: None,
            once: true,
        }
    }

    fn watch(label: &str) -> Activation {
        Activation::Existence { object_kind: None, description_contains: None, state: Some(label.into()) }
    }

    fn add_all(label: &str) -> EventEffect {
        EventEffect { select: Selector::Furniture, verb: EffectVerb::Add, label: label.into() }
    }

    #[test]
    fn scheduled_matches_exact_round() {
        let map = map_with_objects();
        let state = WorldState::from_map(&map);
        let specs = vec![spec("e", Activation::Scheduled { round: 51 }, vec![])];
        assert_eq!(evaluate_triggers(&specs, 51, &map, &state, &[]).len(), 1);
        assert!(evaluate_triggers(&specs, 50, &map, &state, &[]).is_empty());
    }

    #[test]
    fn existence_without_match_is_empty() {
        let map = map_with_objects();
        let state = WorldState::from_map(&map);
        let specs = vec![spec("e", watch("damaged"), vec![])];
        assert!(evaluate_triggers(&specs, 0, &map, &state, &[]).is_empty());
    }

    #[test]
    fn region_effect_counts_furniture_in_range() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let mut s = spec("fire", Activation::Scheduled { round: 0 }, vec![add_all("on fire")]);
        s.range = EventRange::Region("Bar Area".into());
        let deltas = apply_event(&s, &map, &mut state).unwrap();
        assert_eq!(deltas.len(), 3);
    }

    #[test]
    fn empty_range_fires_with_no_deltas() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let mut s = spec("noop", Activation::Scheduled { round: 0 }, vec![add_all("on fire")]);
        s.range = EventRange::Cells(vec![]);
        let initial = evaluate_triggers(core::slice::from_ref(&s), 0, &map, &state, &[]);
        let report = resolve_chain(core::slice::from_ref(&s), &map, &mut state, initial);
        assert_eq!(report.fired.len(), 1);
        assert!(report.deltas.is_empty());
    }

    #[test]
    fn unknown_selector_misfires_atomically() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let s = spec(
            "bad",
            Activation::Scheduled { round: 0 },
            vec![add_all("wet"), EventEffect { select: Selector::Group("ghosts".into()), verb: EffectVerb::Add, label: "x".into() }],
        );
        let before = state.clone();
        assert!(apply_event(&s, &map, &mut state).is_err());
        assert_eq!(state, before);
    }

    #[test]
    fn chain_links_cause() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let specs = vec![
            spec("a", Activation::Scheduled { round: 0 }, vec![add_all("smoking")]),
            spec("b", watch("smoking"), vec![add_all("alarmed")]),
        ];
        let initial = evaluate_triggers(&specs, 0, &map, &state, &[]);
        let report = resolve_chain(&specs, &map, &mut state, initial);
        let ids: Vec<&str> = report.fired.iter().map(|f| f.event.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(report.fired[1].cause, Cause::Chain { parent: "a".into() });
    }

    #[test]
    fn two_cycle_terminates() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let mut a = spec("a", watch("pong"), vec![add_all("ping")]);
        let mut b = spec("b", watch("ping"), vec![add_all("pong")]);
        a.once = false;
        b.once = false;
        let kick = spec("kick", Activation::Scheduled { round: 0 }, vec![add_all("pong")]);
        let specs = vec![kick, a, b];
        let initial = evaluate_triggers(&specs, 0, &map, &state, &[]);
        let report = resolve_chain(&specs, &map, &mut state, initial);
        let ids: Vec<&str> = report.fired.iter().map(|f| f.event.as_str()).collect();
        assert_eq!(ids, ["kick", "a", "b"]);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn cap_is_reported() {
        let map = map_with_objects();
        let mut state = WorldState::from_map(&map);
        let mut specs = vec![spec("e0", Activation::Scheduled { round: 0 }, vec![add_all("s0")])];
        for i in 1..40 {
            specs.push(spec(&format!("e{i}"), watch(&format!("s{}", i - 1)), vec![add_all(&format!("s{i}"))]));
        }
        let initial = evaluate_triggers(&specs, 0, &map, &state, &[]);
        let report = resolve_chain(&specs, &map, &mut state, initial);
        assert_eq!(report.fired.len(), CHAIN_CAP);
        assert_eq!(report.diagnostics.len(), 1);
    }
}
