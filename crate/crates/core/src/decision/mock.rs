//! Hash-driven offline backend. Every answer is a pure function of the
//! request and the seed.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{template_impression, AskRequest, Backend, BackendError, DecisionRequest, DecisionResponse, Query, TargetInfo};
use crate::agent::{AgentRecord, Embedder, HashingEmbedder};
use crate::digest::canonical_json;
use crate::geom::Coord;
use crate::rng::{mix, splitmix, unit};
use crate::text;
use crate::world::ObjectKind;

const EASY_WORDS: [&str; 8] = ["calm", "relaxed", "content", "hopeful", "curious", "friendly", "pleased", "safe"];
const TENSE_WORDS: [&str; 8] = ["worried", "annoyed", "tired", "uneasy", "lonely", "frustrated", "afraid", "angry"];

const OPENERS: [&str; 6] = [
    "Hello {name}, how is your day going in the {place}?",
    "Hi {name}, do you come to the {place} often?",
    "{name}, what do you think about this {place}?",
    "Good to see you, {name}. Is the {place} busy today?",
    "Hey {name}, I was hoping to meet someone in the {place}.",
    "{name}, have you noticed anything new around the {place}?",
];

#[derive(Clone, Debug)]
pub struct MockBackend {
    seed: u64,
    embedder: HashingEmbedder,
}

impl MockBackend {
    pub fn new(seed: u64, embed_dim: usize) -> Self {
        Self { seed, embedder: HashingEmbedder::new(embed_dim, seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The policy itself, without the trait's `&mut self`.
    pub fn respond(&self, req: &DecisionRequest) -> DecisionResponse {
        let h = mix(self.seed, canonical_json(req).as_bytes());
        let p = &req.perception;
        let here = p.region.as_deref();
        let place = here.unwrap_or("open floor");

        let quiet_region = p
            .visible_regions
            .iter()
            .filter(|r| Some(r.name.as_str()) != here)
            .find(|r| !p.visible_agents.iter().any(|a| a.region.as_deref() == Some(r.name.as_str())));
        let nearest_agent = p.visible_agents.first();
        let furniture = p
            .visible_objects
            .iter()
            .find(|o| o.kind == ObjectKind::Furniture && o.coord.chebyshev(p.position) <= 1);

        let mut options: Vec<u8> = Vec::new();
        if quiet_region.is_some() {
            options.push(0);
        }
        if nearest_agent.is_some() {
            options.push(1);
        }
        if furniture.is_some() {
            options.push(2);
        }

        let (action_text, goal) = match options.get((h % options.len().max(1) as u64) as usize) {
            Some(0) => {
                let r = quiet_region.expect("option present");
                (format!("go to {}", r.name), format!("find a quieter spot in the {}", r.name))
            }
            Some(1) => {
                let a = nearest_agent.expect("option present");
                let first = a.name.split_whitespace().next().unwrap_or(&a.name);
                let line = OPENERS[(splitmix(h) % OPENERS.len() as u64) as usize]
                    .replace("{name}", first)
                    .replace("{place}", place);
                let line = text::truncate_words(&line, text::CHAT_WORD_LIMIT);
                (format!("chat with {}: {line}", a.name), format!("get to know {}", a.name))
            }
            Some(_) => {
                let f = furniture.expect("option present");
                (format!("use {}", f.name), format!("spend some time at the {}", f.name))
            }
            None => {
                let taken: Vec<Coord> = p
                    .visible_agents
                    .iter()
                    .map(|a| a.coord)
                    .chain(p.visible_objects.iter().filter(|o| o.kind == ObjectKind::Furniture).map(|o| o.coord))
                    .chain(core::iter::once(p.position))
                    .collect();
                let free: Vec<Coord> = p.visible_cells.iter().copied().filter(|c| !taken.contains(c)).collect();
                match free.get((splitmix(h ^ 0x5eed) % free.len().max(1) as u64) as usize) {
                    Some(c) => (format!("go to {},{}", c.x, c.y), "look around".to_string()),
                    None => ("idle".to_string(), "wait for something to change".to_string()),
                }
            }
        };

        let uneasy = !req.agent.states.is_empty()
            || !p.own_failures.is_empty()
            || p.visible_objects.iter().any(|o| !o.states.is_empty())
            || unit(splitmix(h ^ 0x7e5e)) < 0.3;
        let words = if uneasy { &TENSE_WORDS } else { &EASY_WORDS };
        let w1 = words[(splitmix(h ^ 1) % 8) as usize];
        let w2 = words[(splitmix(h ^ 2) % 8) as usize];
        let mut cognition = match p.visible_regions.iter().find(|r| Some(r.name.as_str()) == here) {
            Some(r) => format!("I am in the {}, {}. I feel {w1} and {w2}.", r.name, r.description.trim_end_matches('.')),
            None => format!("I am out on the {place}. I feel {w1} and {w2}."),
        };
        if let Some(c) = p.heard_chat.last() {
            cognition.push_str(&format!(" {} spoke to me.", c.speaker_name));
        }
        if let Some(a) = nearest_agent {
            cognition.push_str(&format!(" {} is nearby.", a.name));
        }
        DecisionResponse { action_text, new_short_term_goal: goal, new_cognition: cognition }
    }

    /// Scale answers drift with the agent's overall mood: pleasant agents
    /// rate trust higher and fragmentation items lower.
    pub fn answer(&self, req: &AskRequest) -> String {
        let h = mix(self.seed, canonical_json(req).as_bytes());
        let jitter = unit(h) * 2.0 - 1.0;
        match &req.query {
            Query::Scale { dimension, min, max, .. } => {
                let (lo, hi) = (*min as f64, *max as f64);
                let mid = (lo + hi) / 2.0;
                let sign = if dimension.eq_ignore_ascii_case("trust") { 1.0 } else { -1.0 };
                let spread = (hi - lo) / 3.0;
                let v = libm::round(mid + sign * spread * req.agent.overall_emotion + jitter);
                format!("{}", v.clamp(lo, hi) as i64)
            }
            Query::Open { question } => {
                let region = req.region.as_deref().unwrap_or("open floor");
                let topic = text::words(question).last().unwrap_or("that").trim_end_matches('?');
                format!(
                    "I am in the {region} right now and I am trying to {}. I feel {}. About {topic}: I need more time to think.",
                    req.agent.short_term_goal.trim_end_matches('.'),
                    req.agent.emotion_words
                )
            }
        }
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn decide(&mut self, request: &DecisionRequest, _feedback: Option<&str>) -> Result<DecisionResponse, BackendError> {
        Ok(self.respond(request))
    }

    fn embed(&mut self, text: &str) -> Vec<f64> {
        self.embedder.embed(text)
    }

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String {
        template_impression(agent, target)
    }

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError> {
        Ok(self.answer(request))
    }
}
