//! Execution of single movement and standard actions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    ChatDelivery, Effects, Engine, HeardChat, MoveAction, MoveTarget, Outcome, Place, Referent, StandardAction,
    StateDelta,
};
use crate::decision::{Backend, TargetInfo};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::{apply_state_effect, EffectTarget, EffectVerb, ObjectKind, ObjectPlace, StateEffect};

enum Holder<'a> {
    Agent(&'a AgentId),
    Object(&'a ObjectId),
}

impl Engine {
    fn object_name(&self, id: &ObjectId) -> String {
        self.map.object(id.as_str()).map(|o| o.name.clone()).unwrap_or_else(|| id.to_string())
    }

    fn agent_pos(&self, id: &AgentId) -> Option<Coord> {
        self.state.agents.get(id).map(|a| a.position)
    }

    fn within_reach(&self, actor: &AgentId, c: Option<Coord>) -> bool {
        match (self.agent_pos(actor), c) {
            (Some(p), Some(c)) => p.chebyshev(c) <= 1,
            _ => false,
        }
    }

    /// Applies one state effect, recording a delta and a state-change note
    /// when the holder's states actually changed.
    fn apply_effect(&mut self, holder: Holder<'_>, effect: &StateEffect, source: &str, fx: &mut Effects) {
        let verb_word = if effect.verb == EffectVerb::Add { "gained" } else { "lost" };
        match holder {
            Holder::Agent(id) => {
                let Some(agent) = self.state.agents.get_mut(id) else { return };
                if apply_state_effect(&mut agent.states, effect) {
                    fx.deltas.push(StateDelta::AgentState { agent: id.clone(), verb: effect.verb, label: effect.label.clone() });
                    fx.fb(id).state_changes.push(format!("{verb_word} state \"{}\" from {source}", effect.label));
                }
            }
            Holder::Object(id) => {
                let Some(status) = self.state.objects.get_mut(id) else { return };
                if apply_state_effect(&mut status.states, effect) {
                    fx.deltas.push(StateDelta::ObjectState { object: id.clone(), verb: effect.verb, label: effect.label.clone() });
                }
            }
        }
    }

    fn place_object(&mut self, id: &ObjectId, to: ObjectPlace, fx: &mut Effects) {
        let Some(status) = self.state.objects.get_mut(id) else { return };
        let from = core::mem::replace(&mut status.place, to.clone());
        if let ObjectPlace::Carried(a) = &from {
            if let Some(agent) = self.state.agents.get_mut(a) {
                agent.inventory.retain(|x| x != id);
            }
        }
        if let ObjectPlace::Carried(a) = &to {
            if let Some(agent) = self.state.agents.get_mut(a) {
                agent.inventory.push(id.clone());
            }
        }
        fx.deltas.push(StateDelta::ObjectPlaced { object: id.clone(), from, to });
    }

    fn remember(&mut self, round: u64, id: &AgentId, text: String) {
        if let Some(a) = self.state.agents.get_mut(id) {
            a.wm.push(round, text);
        }
    }

    /// First interaction with a target generates an impression of it.
    fn ensure_impression(&mut self, actor: &AgentId, target: TargetInfo, backend: &mut dyn Backend, fx: &mut Effects) {
        let Some(agent) = self.state.agents.get(actor) else { return };
        if target.id == actor.as_str() || agent.om.get(&target.id).is_some() {
            return;
        }
        let text = backend.describe_impression(agent, &target);
        if let Some(agent) = self.state.agents.get_mut(actor) {
            agent.om.set(target.id.clone(), text.clone());
            fx.deltas.push(StateDelta::Impression { agent: actor.clone(), target: target.id, text });
        }
    }

    fn object_target(&self, id: &ObjectId) -> TargetInfo {
        match self.map.object(id.as_str()) {
            Some(o) => TargetInfo {
                id: id.to_string(),
                name: o.name.clone(),
                kind: if o.kind == ObjectKind::Furniture { "furniture" } else { "item" }.into(),
                description: o.description.clone(),
            },
            None => TargetInfo { id: id.to_string(), name: id.to_string(), kind: "item".into(), description: String::new() },
        }
    }

    fn agent_target(&self, id: &AgentId) -> TargetInfo {
        let (name, description) = match self.state.agents.get(id) {
            Some(a) => (a.name.clone(), a.group.clone()),
            None => (id.to_string(), String::new()),
        };
        TargetInfo { id: id.to_string(), name, kind: "agent".into(), description }
    }

    /// Plans against `plan_blocked` (round-start occupancy) and walks
    /// against `live` occupancy, stopping before the first taken cell.
    pub(super) fn run_move(
        &mut self,
        round: u64,
        agent: &AgentId,
        mv: &MoveAction,
        plan_blocked: &BTreeSet<Coord>,
        live: &mut BTreeMap<Coord, AgentId>,
        fx: &mut Effects,
    ) -> Outcome {
        let Some(pos) = self.agent_pos(agent) else { return Outcome::failed("agent is not in the world") };
        self.state.pending.remove(agent);
        let visible = self.visible_from(pos);
        let goal = match &mv.target {
            MoveTarget::Region(name) => {
                let Some(region) = self.map.region_ci(name) else { return Outcome::failed(format!("unknown region `{name}`")) };
                if region.cells.contains(&pos) {
                    self.remember(round, agent, format!("I stayed in {}", region.name));
                    return Outcome::Executed;
                }
                if !region.cells.iter().any(|c| visible.contains(c)) {
                    return Outcome::failed(format!("{} is not within perception", region.name));
                }
                match super::path::nearest_matching(&self.map, pos, plan_blocked, |c| region.cells.contains(&c)) {
                    Some(g) => g,
                    None => return Outcome::failed(format!("no free cell reachable in {}", region.name)),
                }
            }
            MoveTarget::Cell(c) => {
                if !visible.contains(c) {
                    return Outcome::failed(format!("{c} is not within perception"));
                }
                *c
            }
        };
        let Some(path) = super::path::compute_path(&self.map, pos, goal, plan_blocked) else {
            return Outcome::failed(format!("no path to {goal}"));
        };
        let budget = self.config.move_budget;
        let mut at = pos;
        let mut blocked_at = None;
        for &c in path.iter().take(budget) {
            if live.get(&c).is_some_and(|o| o != agent) {
                blocked_at = Some(c);
                break;
            }
            at = c;
        }
        if at != pos {
            live.remove(&pos);
            live.insert(at, agent.clone());
            if let Some(a) = self.state.agents.get_mut(agent) {
                a.position = at;
            }
            let steps = path.iter().position(|c| *c == at).map_or(0, |i| i + 1) as u32;
            fx.deltas.push(StateDelta::Moved { agent: agent.clone(), from: pos, to: at, steps });
        }
        if let Some(c) = blocked_at {
            return Outcome::failed(format!("path blocked at {c} by another agent; stopped at {at}"));
        }
        if path.len() > budget {
            self.state.pending.insert(agent.clone(), mv.target.clone());
        }
        let label = match &mv.target {
            MoveTarget::Region(r) => r.clone(),
            MoveTarget::Cell(c) => format!("{c}"),
        };
        self.remember(round, agent, format!("I walked toward {label}"));
        Outcome::Executed
    }

    pub(super) fn run_standard(
        &mut self,
        round: u64,
        actor: &AgentId,
        action: &StandardAction,
        backend: &mut dyn Backend,
        fx: &mut Effects,
    ) -> Outcome {
        let Some(actor_name) = self.state.agents.get(actor).map(|a| a.name.clone()) else {
            return Outcome::failed("agent is not in the world");
        };
        match action {
            StandardAction::Use { object } => {
                let Some(obj) = self.map.object(object.as_str()).cloned() else { return Outcome::failed("unknown object") };
                let held = self.state.agents[actor].holds(object);
                if !held && !self.within_reach(actor, self.state.object_coord(object)) {
                    return Outcome::failed(format!("{} is not within reach", obj.name));
                }
                let source = format!("using {}", obj.name);
                for e in &obj.function {
                    match e.target {
                        EffectTarget::Actor => self.apply_effect(Holder::Agent(actor), e, &source, fx),
                        EffectTarget::Object => self.apply_effect(Holder::Object(object), e, &source, fx),
                    }
                }
                self.remember(round, actor, format!("I used {}", obj.name));
                let t = self.object_target(object);
                self.ensure_impression(actor, t, backend, fx);
                Outcome::Executed
            }
            StandardAction::Apply { item, target } => {
                let Some(obj) = self.map.object(item.as_str()).cloned() else { return Outcome::failed("unknown object") };
                if !self.state.agents[actor].holds(item) {
                    return Outcome::failed("not in inventory");
                }
                let (reach, target_name) = match target {
                    Referent::Agent(b) => {
                        if !self.state.agents.contains_key(b) {
                            return Outcome::failed(format!("{b} has left"));
                        }
                        (self.within_reach(actor, self.agent_pos(b)), self.state.agent_name(b).into())
                    }
                    Referent::Object(o) => {
                        let held = self.state.agents[actor].holds(o);
                        (held || self.within_reach(actor, self.state.object_coord(o)), self.object_name(o))
                    }
                };
                if !reach {
                    return Outcome::failed(format!("{target_name} is not within reach"));
                }
                let source = format!("{} applied by {actor_name}", obj.name);
                for e in &obj.function {
                    match (e.target, target) {
                        (EffectTarget::Actor, _) => self.apply_effect(Holder::Agent(actor), e, &source, fx),
                        (EffectTarget::Object, Referent::Agent(b)) => self.apply_effect(Holder::Agent(b), e, &source, fx),
                        (EffectTarget::Object, Referent::Object(o)) => self.apply_effect(Holder::Object(o), e, &source, fx),
                    }
                }
                self.remember(round, actor, format!("I applied {} to {target_name}", obj.name));
                let it = self.object_target(item);
                self.ensure_impression(actor, it, backend, fx);
                match target {
                    Referent::Agent(b) => {
                        self.remember(round, b, format!("{actor_name} applied {} to me", obj.name));
                        let t = self.agent_target(b);
                        self.ensure_impression(actor, t, backend, fx);
                    }
                    Referent::Object(o) => {
                        let t = self.object_target(o);
                        self.ensure_impression(actor, t, backend, fx);
                    }
                }
                Outcome::Executed
            }
            StandardAction::Take { item } => {
                let Some(obj) = self.map.object(item.as_str()).cloned() else { return Outcome::failed("unknown object") };
                if obj.kind == ObjectKind::Furniture {
                    return Outcome::failed(format!("{} is furniture and cannot be taken", obj.name));
                }
                match &self.state.objects[item].place {
                    ObjectPlace::Carried(a) if a == actor => return Outcome::failed(format!("already holding {}", obj.name)),
                    ObjectPlace::Carried(_) => return Outcome::failed("item already taken"),
                    ObjectPlace::Stock => return Outcome::failed(format!("{} is not in the world", obj.name)),
                    _ => {}
                }
                if !self.within_reach(actor, self.state.object_coord(item)) {
                    return Outcome::failed(format!("{} is not within reach", obj.name));
                }
                self.place_object(item, ObjectPlace::Carried(actor.clone()), fx);
                self.remember(round, actor, format!("I took {}", obj.name));
                let t = self.object_target(item);
                self.ensure_impression(actor, t, backend, fx);
                Outcome::Executed
            }
            StandardAction::Put { item, place, .. } => {
                if !self.state.agents[actor].holds(item) {
                    return Outcome::failed("not in inventory");
                }
                let name = self.object_name(item);
                match place {
                    Place::Furniture(f) => {
                        let Some(fobj) = self.map.object(f.as_str()).cloned() else { return Outcome::failed("unknown object") };
                        if fobj.kind != ObjectKind::Furniture {
                            return Outcome::failed(format!("{} is not furniture", fobj.name));
                        }
                        if !self.within_reach(actor, self.state.object_coord(f)) {
                            return Outcome::failed(format!("{} is not within reach", fobj.name));
                        }
                        self.place_object(item, ObjectPlace::On(f.clone()), fx);
                        self.remember(round, actor, format!("I put {name} on {}", fobj.name));
                        let t = self.object_target(f);
                        self.ensure_impression(actor, t, backend, fx);
                    }
                    Place::Region(r) => {
                        let Some(region) = self.map.region_ci(r) else { return Outcome::failed(format!("unknown region `{r}`")) };
                        let pos = self.state.agents[actor].position;
                        if !region.cells.contains(&pos) {
                            return Outcome::failed(format!("not in {}", region.name));
                        }
                        let region_name = region.name.clone();
                        self.place_object(item, ObjectPlace::At(pos), fx);
                        self.remember(round, actor, format!("I put {name} in {region_name}"));
                    }
                }
                Outcome::Executed
            }
            StandardAction::Give { item, to } => {
                if !self.state.agents[actor].holds(item) {
                    return Outcome::failed("not in inventory");
                }
                if !self.state.agents.contains_key(to) {
                    return Outcome::failed(format!("{to} has left"));
                }
                let to_name: String = self.state.agent_name(to).into();
                if !self.within_reach(actor, self.agent_pos(to)) {
                    return Outcome::failed(format!("{to_name} is not within reach"));
                }
                let name = self.object_name(item);
                self.place_object(item, ObjectPlace::Carried(to.clone()), fx);
                self.remember(round, actor, format!("I gave {name} to {to_name}"));
                self.remember(round, to, format!("{actor_name} gave me {name}"));
                let t = self.agent_target(to);
                self.ensure_impression(actor, t, backend, fx);
                Outcome::Executed
            }
            StandardAction::Chat { to, utterance } => {
                let pos = self.state.agents[actor].position;
                let visible = self.visible_from(pos);
                for b in to {
                    match self.agent_pos(b) {
                        Some(c) if visible.contains(&c) => {}
                        Some(_) => return Outcome::failed(format!("{} is not within perception", self.state.agent_name(b))),
                        None => return Outcome::failed(format!("{b} has left")),
                    }
                }
                let mut listeners: Vec<AgentId> = to.clone();
                for a in self.state.agents.values() {
                    if &a.id != actor && !to.contains(&a.id) && visible.contains(&a.position) {
                        listeners.push(a.id.clone());
                    }
                }
                for l in &listeners {
                    fx.fb(l).heard.push(HeardChat {
                        round,
                        speaker: actor.clone(),
                        speaker_name: actor_name.clone(),
                        utterance: utterance.clone(),
                        addressed: to.contains(l),
                    });
                }
                let names: Vec<String> = to.iter().map(|b| String::from(self.state.agent_name(b))).collect();
                self.remember(round, actor, format!("I said to {}: \"{utterance}\"", names.join(", ")));
                for b in to {
                    self.remember(round, b, format!("{actor_name} said to me: \"{utterance}\""));
                    let t = self.agent_target(b);
                    self.ensure_impression(actor, t, backend, fx);
                }
                fx.chats.push(ChatDelivery {
                    receipt_seq: 0,
                    speaker: actor.clone(),
                    targets: to.clone(),
                    listeners,
                    utterance: utterance.clone(),
                });
                Outcome::Executed
            }
        }
    }
}
