//! Prompt text for chat-model backends and parsing of their replies.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt::Write;

use super::{AskRequest, BackendError, DecisionRequest, DecisionResponse, Query};
use crate::engine::MoveTarget;
use crate::text::CHAT_WORD_LIMIT;

pub const PROMPT_VERSION: &str = "gridsoc-prompt/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

const SYSTEM: &str = "You are a resident of a small simulated community. \
Stay in character, decide one step at a time and answer only in the requested format.";

/// Renders a decision request into identity, goals, emotion, perception,
/// memories, impressions and grammar sections.
pub fn render_decision(req: &DecisionRequest, feedback: Option<&str>) -> Prompt {
    let a = &req.agent;
    let p = &req.perception;
    let mut u = String::new();
    let _ = writeln!(u, "## Identity\nYou are {} ({}). {}", a.name, a.group, a.self_awareness);
    let _ = writeln!(u, "\n## Goals\nLong-term: {}\nShort-term: {}", a.long_term_goal, a.short_term_goal);
    let _ = writeln!(u, "\n## Emotion\nYou feel {}.", a.emotion_words);
    if !a.states.is_empty() {
        let _ = writeln!(u, "Your current state: {}.", a.states.join(", "));
    }
    let _ = writeln!(u, "\n## Perception (round {})", req.round_index);
    let _ = writeln!(u, "You are at {} in {}.", p.position, p.region.as_deref().unwrap_or("no named area"));
    for r in &p.visible_regions {
        let _ = writeln!(u, "- area {}: {} ({} steps away)", r.name, r.description, r.distance);
    }
    for ag in &p.visible_agents {
        let _ = writeln!(u, "- person {} at {}", ag.surface, ag.coord);
    }
    for o in &p.visible_objects {
        let states = if o.states.is_empty() {
            String::new()
        } else {
            format!(" [{}]", o.states.iter().map(String::as_str).collect::<alloc::vec::Vec<_>>().join(", "))
        };
        let _ = writeln!(u, "- {:?} {} at {}: {}{states}", o.kind, o.name, o.coord, o.description);
    }
    for o in &p.inventory {
        let _ = writeln!(u, "- you carry {}: {}", o.name, o.description);
    }
    for c in &p.heard_chat {
        let _ = writeln!(u, "- {} said: \"{}\"", c.speaker_name, c.utterance);
    }
    for f in &p.own_failures {
        let _ = writeln!(u, "- your last action failed: {f}");
    }
    for s in p.own_state_changes.iter().chain(&p.notices) {
        let _ = writeln!(u, "- {s}");
    }
    if let Some(t) = &p.pending_destination {
        let t = match t {
            MoveTarget::Region(r) => r.clone(),
            MoveTarget::Cell(c) => c.to_string(),
        };
        let _ = writeln!(u, "- you are still on your way to {t}");
    }
    if !a.recent_actions.is_empty() {
        let _ = writeln!(u, "\n## Recent actions");
        for r in &a.recent_actions {
            let _ = writeln!(u, "- {r}");
        }
    }
    if !req.recalled.is_empty() {
        let _ = writeln!(u, "\n## Memories");
        for m in &req.recalled {
            let _ = writeln!(u, "- (round {}) {}", m.round, m.text);
        }
    }
    if !req.impressions.is_empty() {
        let _ = writeln!(u, "\n## Impressions");
        for (id, text) in &req.impressions {
            let _ = writeln!(u, "- {id}: {text}");
        }
    }
    let _ = writeln!(
        u,
        "\n## Actions\nYou may take one movement and one other action, separated by `;`:\n\
         go to <area> | use <object> | apply <item> to <target> | take <item> |\n\
         put <item> in <place> | put <item> on <place> | give <item> to <person> |\n\
         chat with <person>[, <person>]: <words>\n\
         Chats are limited to {CHAT_WORD_LIMIT} words. Write `idle` to do nothing."
    );
    if let Some(f) = feedback {
        let _ = writeln!(u, "\nYour previous answer could not be used: {f}. Follow the grammar exactly.");
    }
    let _ = write!(u, "\nReply with exactly three lines:\nCOGNITION: <how you see the situation>\nGOAL: <your next short-term goal>\nACTION: <actions>");
    Prompt { system: SYSTEM.to_string(), user: u }
}

pub fn render_ask(req: &AskRequest) -> Prompt {
    let a = &req.agent;
    let mut u = format!(
        "You are {} ({}). {}\nYou are in {}. Your goal: {}. You feel {}.\n\n",
        a.name,
        a.group,
        a.self_awareness,
        req.region.as_deref().unwrap_or("no named area"),
        a.short_term_goal,
        a.emotion_words
    );
    match &req.query {
        Query::Scale { prompt, min, max, .. } => {
            let _ = write!(u, "{prompt}\nAnswer with a single whole number from {min} to {max}.");
        }
        Query::Open { question } => {
            let _ = write!(u, "An interviewer asks: {question}\nAnswer in character, in a few sentences.");
        }
    }
    if let Some(n) = &req.retry_note {
        let _ = write!(u, "\n{n}");
    }
    Prompt { system: SYSTEM.to_string(), user: u }
}

fn value(s: &str) -> String {
    s.trim().trim_start_matches('*').trim().to_string()
}

/// Reads the `COGNITION:`, `GOAL:` and `ACTION:` lines. Text after `ACTION:`
/// may continue over further lines.
pub fn parse_reply(text: &str) -> Result<DecisionResponse, BackendError> {
    let mut cognition = None;
    let mut goal = None;
    let mut action: Option<String> = None;
    for line in text.lines() {
        let t = line.trim().trim_start_matches(['*', '-', ' ']);
        let upper = t.get(..10).unwrap_or(t).to_ascii_uppercase();
        if upper.starts_with("COGNITION:") {
            cognition = Some(value(&t[10..]));
        } else if upper.starts_with("GOAL:") {
            goal = Some(value(&t[5..]));
        } else if upper.starts_with("ACTION:") {
            action = Some(value(&t[7..]));
        } else if let Some(a) = &mut action {
            if !t.is_empty() {
                a.push('\n');
                a.push_str(t);
            }
        }
    }
    let action_text = action.ok_or_else(|| BackendError::Reply("missing ACTION line".into()))?;
    Ok(DecisionResponse {
        action_text,
        new_short_term_goal: goal.unwrap_or_default(),
        new_cognition: cognition.ok_or_else(|| BackendError::Reply("missing COGNITION line".into()))?,
    })
}
