#![allow(dead_code)]

use std::sync::Arc;

use gridsoc_core::agent::AgentRecord;
use gridsoc_core::decision::{AskRequest, Backend, BackendError, DecisionRequest, DecisionResponse, MockBackend, TargetInfo};
use gridsoc_core::session::{Scenario, Session};
use gridsoc_sim::load::sample_lexicon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Inclusive rectangle of cells as `[[x, y], ...]`.
pub fn rect(x0: i32, y0: i32, x1: i32, y1: i32) -> Value {
    let mut cells = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            cells.push(json!([x, y]));
        }
    }
    Value::Array(cells)
}

/// Open floor of `w` x `h` with the given regions and objects.
pub fn floor_map(w: i32, h: i32, regions: Vec<Value>, objects: Vec<Value>) -> Value {
    let mut cells = Vec::new();
    for y in 0..h {
        for x in 0..w {
            cells.push(json!({ "x": x, "y": y, "ground": "floor" }));
        }
    }
    json!({
        "width": w,
        "height": h,
        "textures": [
            { "id": "floor", "category": "ground", "glyph": "." },
            { "id": "brick", "category": "wall", "glyph": "#" }
        ],
        "cells": cells,
        "regions": regions,
        "objects": objects,
    })
}

pub fn item(id: &str, name: &str, at: [i32; 2]) -> Value {
    json!({
        "id": id, "name": name, "type": "item", "description": format!("a {name}"),
        "function": [], "states": [], "location": at
    })
}

pub fn furniture(id: &str, name: &str, at: [i32; 2]) -> Value {
    json!({
        "id": id, "name": name, "type": "furniture", "description": format!("a {name}"),
        "function": [], "states": [], "location": at
    })
}

pub fn group(name: &str, names: &[&str], region: &str) -> Value {
    json!({
        "name": name,
        "size": names.len(),
        "long_term_goal_template": "get through the day",
        "short_term_goal": "look around",
        "initial_region": region,
        "names": names,
        "occupations": ["clerk"],
    })
}

pub fn scenario(doc: Value) -> Scenario {
    let s: Scenario = serde_json::from_value(doc).expect("scenario document");
    s.check().expect("scenario validates");
    s
}

pub fn session(s: Scenario, seed: u64) -> Session {
    Session::create("test", Arc::new(s), Arc::new(sample_lexicon()), seed, "mock").expect("session")
}

/// Mock decisions pushed past the engine's limits: chats stretched beyond
/// the word cap, moves aimed at far cells, and doubled movements.
pub struct StressBackend {
    inner: MockBackend,
    rng: ChaCha8Rng,
    width: i32,
    height: i32,
    pub stretched: usize,
    pub far_moves: usize,
    pub doubled: usize,
}

impl StressBackend {
    pub fn new(seed: u64, dim: usize, width: u32, height: u32) -> Self {
        Self {
            inner: MockBackend::new(seed, dim),
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed),
            width: width as i32,
            height: height as i32,
            stretched: 0,
            far_moves: 0,
            doubled: 0,
        }
    }
}

impl Backend for StressBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn decide(&mut self, request: &DecisionRequest, feedback: Option<&str>) -> Result<DecisionResponse, BackendError> {
        let mut r = self.inner.decide(request, feedback)?;
        let lines: Vec<String> = r.action_text.lines().map(str::to_string).collect();
        let others: Vec<String> = lines.iter().filter(|l| !l.trim_start().starts_with("go to")).cloned().collect();
        match self.rng.random_range(0..4) {
            0 if lines.iter().any(|l| l.contains("chat with")) => {
                let extra = self.rng.random_range(5..40);
                let filler: Vec<&str> = (0..extra).map(|i| ["really", "truly", "very", "so"][i % 4]).collect();
                r.action_text = lines
                    .iter()
                    .map(|l| if l.contains("chat with") { format!("{l} {}", filler.join(" ")) } else { l.clone() })
                    .collect::<Vec<_>>()
                    .join("\n");
                self.stretched += 1;
            }
            1 => {
                let x = self.rng.random_range(0..self.width);
                let y = self.rng.random_range(0..self.height);
                let mut out = vec![format!("go to {x},{y}")];
                out.extend(others);
                r.action_text = out.join("\n");
                self.far_moves += 1;
            }
            2 => {
                r.action_text = format!("go to 0,0; go to 1,1\n{}", others.join("\n"));
                self.doubled += 1;
            }
            _ => {}
        }
        Ok(r)
    }

    fn embed(&mut self, text: &str) -> Vec<f64> {
        self.inner.embed(text)
    }

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String {
        self.inner.describe_impression(agent, target)
    }

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError> {
        self.inner.ask(request)
    }
}
