//! The seven-action grammar.
//!
//! ```text
//! go to <area>                      use <object>
//! apply <item> to <target>          take <item>
//! put <item> in|on <place>          give <item> to <agent>
//! chat with <agent>[, <agent>...]: <utterance>
//! ```
//!
//! A decision may hold one movement and one standard action separated by `;`
//! or a newline (a chat runs to the end of its line). `idle` means nothing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::engine::{Engine, MoveAction, Perception, Place, PutMode, Referent, StandardAction};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown verb in `{0}`")]
    UnknownVerb(String),
    #[error("unresolved {kind} `{name}`")]
    UnresolvedReferent { kind: &'static str, name: String },
    #[error("malformed chat: expected `chat with <agent>: <utterance>`")]
    MalformedChat,
    #[error("empty utterance")]
    EmptyUtterance,
    #[error("more than one {0} action")]
    TooMany(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedAction {
    Move(MoveAction),
    Standard(StandardAction),
}

/// Movement and standard slot of one decision.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedDecision {
    pub movement: Option<MoveAction>,
    pub standard: Option<StandardAction>,
}

/// Names the parser may resolve. Earlier entries win when names repeat, so
/// callers list perceived things first, nearest first. Names not listed fall
/// back to the whole session when an engine is attached.
#[derive(Clone, Debug, Default)]
pub struct Registry<'a> {
    pub regions: Vec<String>,
    pub agents: Vec<(String, AgentId)>,
    pub objects: Vec<(String, ObjectId)>,
    pub world: Option<&'a Engine>,
}

impl<'a> Registry<'a> {
    /// What `perception` shows, backed by everything in the session.
    pub fn for_perception(engine: &'a Engine, p: &Perception) -> Self {
        Registry {
            regions: p.visible_regions.iter().map(|r| r.name.clone()).collect(),
            agents: p.visible_agents.iter().map(|a| (a.name.clone(), a.id.clone())).collect(),
            objects: p
                .inventory
                .iter()
                .chain(p.visible_objects.iter())
                .map(|o| (o.name.clone(), o.id.clone()))
                .collect(),
            world: Some(engine),
        }
    }

    pub fn for_agent(engine: &'a Engine, viewer: &AgentId) -> Self {
        match engine.build_perception(viewer) {
            Some(p) => Self::for_perception(engine, &p),
            None => Registry { world: Some(engine), ..Registry::default() },
        }
    }

    fn region(&self, name: &str) -> Option<String> {
        self.regions
            .iter()
            .find(|r| r.eq_ignore_ascii_case(name))
            .cloned()
            .or_else(|| self.world?.map().region_ci(name).map(|r| r.name.clone()))
    }

    fn agent(&self, name: &str) -> Option<AgentId> {
        let hit = |n: &str, id: &AgentId| n.eq_ignore_ascii_case(name) || id.as_str().eq_ignore_ascii_case(name);
        self.agents.iter().find(|(n, id)| hit(n, id)).map(|(_, id)| id.clone()).or_else(|| {
            self.world?.state().agents.values().find(|a| hit(&a.name, &a.id)).map(|a| a.id.clone())
        })
    }

    fn object(&self, name: &str) -> Option<ObjectId> {
        let hit = |n: &str, id: &ObjectId| n.eq_ignore_ascii_case(name) || id.as_str().eq_ignore_ascii_case(name);
        self.objects.iter().find(|(n, id)| hit(n, id)).map(|(_, id)| id.clone()).or_else(|| {
            self.world?.map().objects.iter().find(|o| hit(&o.name, &o.id)).map(|o| o.id.clone())
        })
    }
}

fn clean(s: &str) -> &str {
    s.trim().trim_matches(|c| matches!(c, '"' | '\'' | '`' | '*')).trim().trim_end_matches('.').trim()
}

/// Strips a case-insensitive ASCII prefix.
fn strip_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

/// Splits on each case-insensitive occurrence of `sep`, left to right.
fn splits<'a>(s: &'a str, sep: &str) -> Vec<(&'a str, &'a str)> {
    let lower = s.to_ascii_lowercase();
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = lower[from..].find(sep) {
        let at = from + i;
        out.push((&s[..at], &s[at + sep.len()..]));
        from = at + 1;
    }
    out
}

fn parse_coord(s: &str) -> Option<Coord> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (x, y) = s.split_once(',')?;
    Some(Coord::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

fn unresolved(kind: &'static str, name: &str) -> ParseError {
    ParseError::UnresolvedReferent { kind, name: name.to_string() }
}

/// Tries every `sep` split and keeps the first where both halves resolve.
fn split_pair<A, B>(
    rest: &str,
    sep: &str,
    left: impl Fn(&str) -> Option<A>,
    right: impl Fn(&str) -> Option<B>,
    kinds: (&'static str, &'static str),
) -> Result<(A, B), ParseError> {
    let parts = splits(rest, sep);
    if parts.is_empty() {
        return Err(ParseError::UnknownVerb(rest.to_string()));
    }
    for (l, r) in &parts {
        if let (Some(a), Some(b)) = (left(clean(l)), right(clean(r))) {
            return Ok((a, b));
        }
    }
    let (l, r) = parts[0];
    if left(clean(l)).is_none() {
        Err(unresolved(kinds.0, clean(l)))
    } else {
        Err(unresolved(kinds.1, clean(r)))
    }
}

/// Parses exactly one action.
pub fn parse_action(text: &str, reg: &Registry<'_>) -> Result<ParsedAction, ParseError> {
    let t = text.trim().trim_matches(|c| matches!(c, '"' | '`' | '*')).trim();
    if let Some(rest) = strip_ci(t, "go to ") {
        let name = clean(rest);
        if let Some(r) = reg.region(name) {
            return Ok(ParsedAction::Move(MoveAction::to_region(r)));
        }
        return parse_coord(name)
            .map(|c| ParsedAction::Move(MoveAction::to_cell(c)))
            .ok_or_else(|| unresolved("area", name));
    }
    if let Some(rest) = strip_ci(t, "chat with ") {
        let (names, utterance) = rest.split_once(':').ok_or(ParseError::MalformedChat)?;
        let utterance = utterance.trim().trim_matches('"').trim();
        if crate::text::word_count(utterance) == 0 {
            return Err(ParseError::EmptyUtterance);
        }
        let mut to: Vec<AgentId> = Vec::new();
        for part in names.split(',').flat_map(|p| p.split(" and ")) {
            let n = clean(part);
            if n.is_empty() {
                continue;
            }
            let id = reg.agent(n).ok_or_else(|| unresolved("agent", n))?;
            if !to.contains(&id) {
                to.push(id);
            }
        }
        if to.is_empty() {
            return Err(ParseError::MalformedChat);
        }
        return Ok(ParsedAction::Standard(StandardAction::Chat { to, utterance: utterance.to_string() }));
    }
    if let Some(rest) = strip_ci(t, "use ") {
        let n = clean(rest);
        let object = reg.object(n).ok_or_else(|| unresolved("object", n))?;
        return Ok(ParsedAction::Standard(StandardAction::Use { object }));
    }
    if let Some(rest) = strip_ci(t, "take ") {
        let n = clean(rest);
        let item = reg.object(n).ok_or_else(|| unresolved("item", n))?;
        return Ok(ParsedAction::Standard(StandardAction::Take { item }));
    }
    if let Some(rest) = strip_ci(t, "apply ") {
        let target = |s: &str| reg.agent(s).map(Referent::Agent).or_else(|| reg.object(s).map(Referent::Object));
        let (item, target) = split_pair(rest, " to ", |s| reg.object(s), target, ("item", "target"))?;
        return Ok(ParsedAction::Standard(StandardAction::Apply { item, target }));
    }
    if let Some(rest) = strip_ci(t, "give ") {
        let (item, to) = split_pair(rest, " to ", |s| reg.object(s), |s| reg.agent(s), ("item", "agent"))?;
        return Ok(ParsedAction::Standard(StandardAction::Give { item, to }));
    }
    if let Some(rest) = strip_ci(t, "put ") {
        let place = |s: &str| reg.object(s).map(Place::Furniture).or_else(|| reg.region(s).map(Place::Region));
        let mut first_err = None;
        for (sep, mode) in [(" in ", PutMode::In), (" on ", PutMode::On)] {
            if splits(rest, sep).is_empty() {
                continue;
            }
            match split_pair(rest, sep, |s| reg.object(s), place, ("item", "place")) {
                Ok((item, place)) => return Ok(ParsedAction::Standard(StandardAction::Put { item, mode, place })),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        return Err(first_err.unwrap_or_else(|| ParseError::UnknownVerb(t.to_string())));
    }
    Err(ParseError::UnknownVerb(t.to_string()))
}

/// Parses a whole decision: up to one movement and one standard action.
pub fn parse_decision(text: &str, reg: &Registry<'_>) -> Result<ParsedDecision, ParseError> {
    let mut out = ParsedDecision::default();
    for line in text.lines() {
        let mut rest = line.trim();
        while !rest.is_empty() {
            let piece = if strip_ci(rest, "chat with ").is_some() {
                core::mem::take(&mut rest)
            } else {
                match rest.split_once(';') {
                    Some((a, b)) => {
                        rest = b.trim();
                        a
                    }
                    None => core::mem::take(&mut rest),
                }
            };
            let piece = piece.trim();
            if piece.is_empty() || clean(piece).eq_ignore_ascii_case("idle") {
                continue;
            }
            match parse_action(piece, reg)? {
                ParsedAction::Move(m) => {
                    if out.movement.replace(m).is_some() {
                        return Err(ParseError::TooMany("movement"));
                    }
                }
                ParsedAction::Standard(s) => {
                    if out.standard.replace(s).is_some() {
                        return Err(ParseError::TooMany("standard"));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reg() -> Registry<'static> {
        Registry {
            regions: vec!["Reading Area".into(), "Bar Area".into()],
            agents: vec![("Ava Ramires".into(), AgentId::new("ava")), ("Bo Chen".into(), AgentId::new("bo"))],
            objects: vec![
                ("Coffee Cup".into(), ObjectId::new("cup-1")),
                ("Counter".into(), ObjectId::new("counter")),
                ("Cup to Go".into(), ObjectId::new("cup-2")),
            ],
            world: None,
        }
    }

    #[test]
    fn go_to_region() {
        assert_eq!(
            parse_action("go to Reading Area", &reg()).unwrap(),
            ParsedAction::Move(MoveAction::to_region("Reading Area"))
        );
        assert_eq!(
            parse_action("Go to reading area.", &reg()).unwrap(),
            ParsedAction::Move(MoveAction::to_region("Reading Area"))
        );
        assert_eq!(parse_action("go to 3, 4", &reg()).unwrap(), ParsedAction::Move(MoveAction::to_cell(Coord::new(3, 4))));
    }

    #[test]
    fn chat_with_one_and_many() {
        let ParsedAction::Standard(StandardAction::Chat { to, utterance }) =
            parse_action("chat with Ava Ramires: Why the silence?", &reg()).unwrap()
        else {
            panic!()
        };
        assert_eq!(to, vec![AgentId::new("ava")]);
        assert_eq!(crate::text::word_count(&utterance), 3);
        let ParsedAction::Standard(StandardAction::Chat { to, .. }) =
            parse_action("chat with ava ramires, Bo Chen: hi", &reg()).unwrap()
        else {
            panic!()
        };
        assert_eq!(to.len(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_action("dance with Ava", &reg()), Err(ParseError::UnknownVerb(_))));
        assert_eq!(parse_action("chat with Ava Ramires hello", &reg()), Err(ParseError::MalformedChat));
        assert_eq!(parse_action("chat with Ava Ramires:   ", &reg()), Err(ParseError::EmptyUtterance));
        assert!(matches!(parse_action("take Teapot", &reg()), Err(ParseError::UnresolvedReferent { kind: "item", .. })));
        assert!(matches!(parse_action("go to Moon", &reg()), Err(ParseError::UnresolvedReferent { .. })));
    }

    #[test]
    fn names_containing_separators() {
        assert_eq!(
            parse_action("give Cup to Go to Bo Chen", &reg()).unwrap(),
            ParsedAction::Standard(StandardAction::Give { item: ObjectId::new("cup-2"), to: AgentId::new("bo") })
        );
        assert_eq!(
            parse_action("put coffee cup on Counter", &reg()).unwrap(),
            ParsedAction::Standard(StandardAction::Put {
                item: ObjectId::new("cup-1"),
                mode: PutMode::On,
                place: Place::Furniture(ObjectId::new("counter"))
            })
        );
        assert_eq!(
            parse_action("apply Coffee Cup to Ava Ramires", &reg()).unwrap(),
            ParsedAction::Standard(StandardAction::Apply {
                item: ObjectId::new("cup-1"),
                target: Referent::Agent(AgentId::new("ava"))
            })
        );
    }

    #[test]
    fn decisions() {
        let d = parse_decision("go to Bar Area; chat with Bo Chen: see you there; ok?", &reg()).unwrap();
        assert!(d.movement.is_some());
        let Some(StandardAction::Chat { utterance, .. }) = d.standard else { panic!() };
        assert_eq!(utterance, "see you there; ok?");
        assert_eq!(parse_decision("idle", &reg()).unwrap(), ParsedDecision::default());
        assert_eq!(parse_decision("take Counter\nuse Counter", &reg()), Err(ParseError::TooMany("standard")));
    }

    #[test]
    fn display_round_trips() {
        let r = reg();
        let actions = [
            StandardAction::Use { object: ObjectId::new("counter") },
            StandardAction::Take { item: ObjectId::new("cup-1") },
            StandardAction::Give { item: ObjectId::new("cup-1"), to: AgentId::new("bo") },
            StandardAction::Put { item: ObjectId::new("cup-1"), mode: PutMode::In, place: Place::Region("Bar Area".into()) },
            StandardAction::Chat { to: vec![AgentId::new("ava"), AgentId::new("bo")], utterance: "hello there".into() },
        ];
        for a in actions {
            assert_eq!(parse_action(&a.to_string(), &r).unwrap(), ParsedAction::Standard(a));
        }
    }
}
