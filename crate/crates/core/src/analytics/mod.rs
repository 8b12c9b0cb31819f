//! Measurements taken from a running or finished session: questionnaires,
//! interviews, trust ratings, ambient mood, dialogue heatmaps, engagement
//! and per-round trajectories.
//!
//! Everything here reads engine state or the run log and never writes to
//! either. Inferential statistics over the results live in `gridsoc-stats`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{overall_emotion, VadVector};
use crate::decision::{AgentSnapshot, AskRequest, Backend, Query};
use crate::engine::runlog::{ControlRecord, LogEntry, RunLog};
use crate::engine::{ChatDelivery, StateDelta, WorldState};
use crate::geom::Coord;
use crate::ids::AgentId;
use crate::world::WorldMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("agent `{0}` has no group")]
    Ungrouped(AgentId),
    #[error("group `{0}` is not a heatmap label")]
    UnknownGroup(String),
    #[error("agent `{0}` never appears in the run log")]
    NotInLog(AgentId),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
}

fn default_scale() -> [i64; 2] {
    [1, 7]
}

/// One Likert item as declared in a scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertItem {
    pub id: String,
    pub prompt: String,
    pub dimension: String,
    #[serde(default = "default_scale")]
    pub scale: [i64; 2],
}

/// `value` is `None` when both the first answer and the re-ask were unusable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponse {
    pub round: u64,
    pub agent: AgentId,
    pub item: String,
    pub value: Option<i64>,
    /// Raw answers in the order they were given.
    pub answers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustRating {
    pub round: u64,
    pub agent: AgentId,
    pub target: AgentId,
    pub value: Option<i64>,
}

pub const TRUST_SCALE: [i64; 2] = [1, 10];

/// An interview exchange. Stored apart from agent memory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterviewRecord {
    pub round: u64,
    pub agent: AgentId,
    pub question: String,
    pub answer: String,
    pub error: Option<String>,
}

/// First integer in `text`, if it lies in `min..=max`.
pub fn parse_scale_answer(text: &str, min: i64, max: i64) -> Result<i64, String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = if i > 0 && bytes[i - 1] == b'-' { i - 1 } else { i };
            let mut end = i;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end < bytes.len() && bytes[end] == b'.' && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
                return Err(format!("`{}` is not a whole number", text.trim()));
            }
            let v: i64 = text[start..end].parse().map_err(|_| format!("`{}` is not a number", text.trim()))?;
            return if (min..=max).contains(&v) {
                Ok(v)
            } else {
                Err(format!("{v} is outside {min}..{max}"))
            };
        }
        i += 1;
    }
    Err(format!("`{}` contains no number", text.trim()))
}

fn ask_scale(
    state: &WorldState,
    map: &WorldMap,
    backend: &mut dyn Backend,
    agent: &AgentId,
    prompt: &str,
    dimension: &str,
    [min, max]: [i64; 2],
) -> Result<(Option<i64>, Vec<String>), AnalyticsError> {
    let record = state.agents.get(agent).ok_or_else(|| AnalyticsError::UnknownAgent(agent.clone()))?;
    let mut req = AskRequest {
        round_index: state.round_index,
        agent: AgentSnapshot::of(record),
        region: map.region_of(record.position).ok().flatten().map(str::to_string),
        query: Query::Scale { prompt: prompt.into(), dimension: dimension.into(), min, max },
        retry_note: None,
    };
    let mut answers = Vec::new();
    for _ in 0..2 {
        let reply = backend.ask(&req);
        let text = match reply {
            Ok(t) => t,
            Err(e) => {
                answers.push(String::new());
                req.retry_note = Some(format!("The previous attempt failed ({e}). Answer with one whole number."));
                continue;
            }
        };
        match parse_scale_answer(&text, min, max) {
            Ok(v) => {
                answers.push(text);
                return Ok((Some(v), answers));
            }
            Err(why) => {
                req.retry_note =
                    Some(format!("Your answer could not be used: {why}. Reply with one whole number from {min} to {max}."));
                answers.push(text);
            }
        }
    }
    Ok((None, answers))
}

/// Puts every item to every target. Unusable answers are re-asked once and
/// then recorded as missing.
pub fn administer_questionnaire(
    state: &WorldState,
    map: &WorldMap,
    backend: &mut dyn Backend,
    targets: &[AgentId],
    items: &[LikertItem],
) -> Result<Vec<LikertResponse>, AnalyticsError> {
    let mut out = Vec::with_capacity(targets.len() * items.len());
    for agent in targets {
        for item in items {
            let (value, answers) = ask_scale(state, map, backend, agent, &item.prompt, &item.dimension, item.scale)?;
            out.push(LikertResponse { round: state.round_index, agent: agent.clone(), item: item.id.clone(), value, answers });
        }
    }
    Ok(out)
}

/// Asks each rater how much it trusts `target` on a 1 to 10 scale.
pub fn collect_trust(
    state: &WorldState,
    map: &WorldMap,
    backend: &mut dyn Backend,
    raters: &[AgentId],
    target: &AgentId,
) -> Result<Vec<TrustRating>, AnalyticsError> {
    let name = state.agents.get(target).ok_or_else(|| AnalyticsError::UnknownAgent(target.clone()))?.name.clone();
    let prompt = format!("How much do you trust {name}? Rate from 1 (not at all) to 10 (completely).");
    raters
        .iter()
        .filter(|r| *r != target)
        .map(|r| {
            let (value, _) = ask_scale(state, map, backend, r, &prompt, "trust", TRUST_SCALE)?;
            Ok(TrustRating { round: state.round_index, agent: r.clone(), target: target.clone(), value })
        })
        .collect()
}

/// Open question to one agent. Backend failures give an empty answer with
/// the error set.
pub fn interview(
    state: &WorldState,
    map: &WorldMap,
    backend: &mut dyn Backend,
    agent: &AgentId,
    question: &str,
) -> Result<InterviewRecord, AnalyticsError> {
    let record = state.agents.get(agent).ok_or_else(|| AnalyticsError::UnknownAgent(agent.clone()))?;
    let req = AskRequest {
        round_index: state.round_index,
        agent: AgentSnapshot::of(record),
        region: map.region_of(record.position).ok().flatten().map(str::to_string),
        query: Query::Open { question: question.into() },
        retry_note: None,
    };
    let (answer, error) = match backend.ask(&req) {
        Ok(a) => (a, None),
        Err(e) => (String::new(), Some(e.to_string())),
    };
    Ok(InterviewRecord { round: state.round_index, agent: agent.clone(), question: question.into(), answer, error })
}

/// Mean overall emotion of the agents standing in `region`; `None` when
/// nobody is there.
pub fn ambient_mood(map: &WorldMap, state: &WorldState, region: &str) -> Result<Option<f64>, AnalyticsError> {
    let area = map.region(region).ok_or_else(|| AnalyticsError::UnknownRegion(region.into()))?;
    let values: Vec<f64> =
        state.agents.values().filter(|a| area.cells.contains(&a.position)).map(|a| overall_emotion(a.emotion)).collect();
    if values.is_empty() {
        return Ok(None);
    }
    Ok(Some(values.iter().sum::<f64>() / values.len() as f64))
}

/// Initiator group (rows) by target group (columns) chat counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl HeatmapMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, counts: alloc::vec![alloc::vec![0; n]; n] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, from: &str, to: &str) -> Option<u64> {
        let i = self.labels.iter().position(|l| l == from)?;
        let j = self.labels.iter().position(|l| l == to)?;
        Some(self.counts[i][j])
    }
}

/// Every executed chat in the log, rounds and free actions alike, with
/// the round it belongs to.
pub fn executed_chats(log: &RunLog) -> Vec<(u64, &ChatDelivery)> {
    let mut out = Vec::new();
    for e in log.entries() {
        match e {
            LogEntry::Round(r) => out.extend(r.chats.iter().map(|c| (r.round, c))),
            LogEntry::FreeAction { record, .. } => out.extend(record.chats.iter().map(|c| (record.round, c))),
            _ => {}
        }
    }
    out
}

/// Counts each executed chat once per named target.
pub fn dialogue_heatmap(
    log: &RunLog,
    group_of: &BTreeMap<AgentId, String>,
    labels: &[String],
) -> Result<HeatmapMatrix, AnalyticsError> {
    let mut m = HeatmapMatrix::zeros(labels.to_vec());
    let index = |a: &AgentId| -> Result<usize, AnalyticsError> {
        let g = group_of.get(a).ok_or_else(|| AnalyticsError::Ungrouped(a.clone()))?;
        labels.iter().position(|l| l == g).ok_or_else(|| AnalyticsError::UnknownGroup(g.clone()))
    };
    for (_, chat) in executed_chats(log) {
        let i = index(&chat.speaker)?;
        for t in &chat.targets {
            m.counts[i][index(t)?] += 1;
        }
    }
    Ok(m)
}

/// Agent positions after each logged step, rebuilt from genesis and deltas.
fn track(positions: &mut BTreeMap<AgentId, Coord>, deltas: &[StateDelta]) -> Vec<AgentId> {
    let mut moved = Vec::new();
    for d in deltas {
        match d {
            StateDelta::Moved { agent, to, .. } => {
                positions.insert(agent.clone(), *to);
                moved.push(agent.clone());
            }
            StateDelta::Spawned { agent, at } => {
                positions.insert(agent.clone(), *at);
            }
            _ => {}
        }
    }
    moved
}

/// Per round, the number of distinct agents that chatted to `researcher`
/// or ended a move next to it. Index `r` is round `r`.
pub fn engagement_count(log: &RunLog, researcher: &AgentId) -> Result<Vec<u64>, AnalyticsError> {
    let mut positions: BTreeMap<AgentId, Coord> = BTreeMap::new();
    let mut present = false;
    let mut engaged: BTreeMap<u64, BTreeSet<AgentId>> = BTreeMap::new();
    let mut last_round = None;
    for e in log.entries() {
        let (round, deltas, chats): (u64, &[StateDelta], &[ChatDelivery]) = match e {
            LogEntry::Genesis(g) => {
                positions.extend(g.agents.iter().cloned());
                present |= positions.contains_key(researcher);
                continue;
            }
            LogEntry::Control { record: ControlRecord::Spawn { record }, .. } => {
                positions.insert(record.id.clone(), record.position);
                present |= record.id == *researcher;
                continue;
            }
            LogEntry::Control { .. } => continue,
            LogEntry::Round(r) => {
                last_round = Some(r.round);
                (r.round, &r.deltas, &r.chats)
            }
            LogEntry::FreeAction { record, .. } => (record.round, &record.deltas, &record.chats),
        };
        let set = engaged.entry(round).or_default();
        for c in chats {
            if c.speaker != *researcher && c.targets.contains(researcher) {
                set.insert(c.speaker.clone());
            }
        }
        let moved = track(&mut positions, deltas);
        // Only agents that moved themselves count; the researcher walking
        // up to someone does not.
        if let Some(&here) = positions.get(researcher) {
            for a in moved.iter().filter(|a| *a != researcher) {
                if positions.get(a).is_some_and(|p| here.is_adjacent(*p)) {
                    set.insert(a.clone());
                }
            }
        }
    }
    if !present {
        return Err(AnalyticsError::NotInLog(researcher.clone()));
    }
    let n = last_round.map_or(0, |r| r as usize + 1);
    let mut series = alloc::vec![0u64; n];
    for (r, set) in engaged {
        if let Some(slot) = series.get_mut(r as usize) {
            *slot = set.len() as u64;
        }
    }
    Ok(series)
}

/// One agent at a round boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSample {
    pub agent: AgentId,
    pub group: String,
    pub position: Coord,
    pub region: Option<String>,
    pub emotion: VadVector,
    pub overall: f64,
}

/// Everyone's position and emotion once round `round` has resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSample {
    pub round: u64,
    pub agents: Vec<AgentSample>,
}

impl RoundSample {
    pub fn take(round: u64, map: &WorldMap, state: &WorldState) -> Self {
        let agents = state
            .agents
            .values()
            .map(|a| AgentSample {
                agent: a.id.clone(),
                group: a.group.clone(),
                position: a.position,
                region: map.region_of(a.position).ok().flatten().map(str::to_string),
                emotion: a.emotion,
                overall: overall_emotion(a.emotion),
            })
            .collect();
        Self { round, agents }
    }

    /// Ambient mood of `region` from the sample alone.
    pub fn ambient_mood(&self, region: &str) -> Option<f64> {
        let v: Vec<f64> = self.agents.iter().filter(|a| a.region.as_deref() == Some(region)).map(|a| a.overall).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Per region, the ambient mood at every sampled round.
pub fn ambient_mood_series(samples: &[RoundSample], regions: &[String]) -> BTreeMap<String, Vec<(u64, Option<f64>)>> {
    regions
        .iter()
        .map(|r| (r.clone(), samples.iter().map(|s| (s.round, s.ambient_mood(r))).collect()))
        .collect()
}

/// Missing-aware summary of one questionnaire dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension: String,
    pub answered: usize,
    pub missing: usize,
    pub mean: Option<f64>,
}

/// Per dimension, the mean of answered items. Missing answers are dropped
/// and counted.
pub fn dimension_scores(responses: &[LikertResponse], items: &[LikertItem]) -> Vec<DimensionScore> {
    let mut dims: Vec<&str> = Vec::new();
    for i in items {
        if !dims.contains(&i.dimension.as_str()) {
            dims.push(&i.dimension);
        }
    }
    dims.into_iter()
        .map(|d| {
            let ids: BTreeSet<&str> = items.iter().filter(|i| i.dimension == d).map(|i| i.id.as_str()).collect();
            let rel: Vec<&LikertResponse> = responses.iter().filter(|r| ids.contains(r.item.as_str())).collect();
            let vals: Vec<f64> = rel.iter().filter_map(|r| r.value).map(|v| v as f64).collect();
            DimensionScore {
                dimension: d.to_string(),
                answered: vals.len(),
                missing: rel.len() - vals.len(),
                mean: (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64),
            }
        })
        .collect()
}

/// Per agent, the mean answered value over the items of `dimension`.
pub fn agent_dimension_means(responses: &[LikertResponse], items: &[LikertItem], dimension: &str) -> BTreeMap<AgentId, f64> {
    let ids: BTreeSet<&str> = items.iter().filter(|i| i.dimension == dimension).map(|i| i.id.as_str()).collect();
    let mut acc: BTreeMap<AgentId, (f64, u32)> = BTreeMap::new();
    for r in responses.iter().filter(|r| ids.contains(r.item.as_str())) {
        if let Some(v) = r.value {
            let e = acc.entry(r.agent.clone()).or_default();
            e.0 += v as f64;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(a, (s, n))| (a, s / f64::from(n))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_answers() {
        assert_eq!(parse_scale_answer("5", 1, 7), Ok(5));
        assert_eq!(parse_scale_answer("I'd say 3 out of 7", 1, 7), Ok(3));
        assert!(parse_scale_answer("9", 1, 7).is_err());
        assert!(parse_scale_answer("4.5", 1, 7).is_err());
        assert!(parse_scale_answer("maybe", 1, 7).is_err());
        assert!(parse_scale_answer("-2", 1, 7).is_err());
        assert_eq!(parse_scale_answer("10", 1, 10), Ok(10));
    }

    #[test]
    fn empty_heatmap() {
        let labels = alloc::vec!["a".to_string(), "b".to_string()];
        let m = dialogue_heatmap(&RunLog::new(), &BTreeMap::new(), &labels).unwrap();
        assert_eq!(m.total(), 0);
        assert_eq!(m.counts, alloc::vec![alloc::vec![0, 0], alloc::vec![0, 0]]);
    }

    #[test]
    fn dimension_means_skip_missing() {
        let items = alloc::vec![
            LikertItem { id: "q1".into(), prompt: "p".into(), dimension: "d".into(), scale: [1, 7] },
            LikertItem { id: "q2".into(), prompt: "p".into(), dimension: "d".into(), scale: [1, 7] },
        ];
        let r = |item: &str, value| LikertResponse {
            round: 0,
            agent: AgentId::new("a"),
            item: item.into(),
            value,
            answers: Vec::new(),
        };
        let scores = dimension_scores(&[r("q1", Some(2)), r("q2", None)], &items);
        assert_eq!(scores[0].answered, 1);
        assert_eq!(scores[0].missing, 1);
        assert_eq!(scores[0].mean, Some(2.0));
    }
}
