use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use gridsoc_core::agent::{score_vad, Lexicon, VadVector};
use gridsoc_core::analytics::{dialogue_heatmap, engagement_count};
use gridsoc_core::decision::MockBackend;
use gridsoc_core::engine::StateDelta;
use gridsoc_core::population::{roster_census, sample_population, CensusLayout, PopulationSpec};
use gridsoc_core::session::{replay, Scenario, Session};
use gridsoc_core::text::{word_count, CHAT_WORD_LIMIT};
use gridsoc_core::{AgentId, Coord};
use proptest::prelude::*;
use serde_json::{json, Value};

fn lexicon() -> Lexicon {
    let mut l = Lexicon::new();
    for (t, v, a, d) in [("happy", 0.9, 0.6, 0.7), ("angry", 0.1, 0.9, 0.6), ("calm", 0.7, 0.1, 0.5), ("tired", 0.3, 0.2, 0.3)] {
        l.insert(t, VadVector::new(v, a, d));
    }
    l
}

fn cells(w: i32, h: i32) -> Vec<Value> {
    (0..h).flat_map(|y| (0..w).map(move |x| json!({ "x": x, "y": y, "ground": "floor" }))).collect()
}

fn rect(w: i32, h: i32) -> Vec<Value> {
    (0..h).flat_map(|y| (0..w).map(move |x| json!([x, y]))).collect()
}

fn doc(side: i32, agents: usize, events: Vec<Value>) -> Value {
    let names: Vec<String> = (0..agents).map(|i| format!("Person {i}")).collect();
    let half = agents / 2;
    let group = |name: &str, names: &[String]| {
        json!({
            "name": name, "size": names.len(), "long_term_goal_template": "live well",
            "short_term_goal": "look around", "initial_region": "Hall", "names": names, "occupations": ["clerk"],
        })
    };
    let mut groups = vec![group("North", &names[..half.max(1)])];
    if agents > 1 && half < agents && half > 0 {
        groups.push(group("South", &names[half..]));
    }
    json!({
        "name": "hall",
        "map": {
            "width": side, "height": side,
            "textures": [{ "id": "floor", "category": "ground", "glyph": "." }],
            "cells": cells(side, side),
            "regions": [{ "name": "Hall", "description": "a hall", "cells": rect(side, side) }],
            "objects": [{ "id": "bell", "name": "Bell", "type": "furniture", "description": "a bell",
                          "function": [], "states": [], "location": [0, 0] }],
        },
        "population": { "groups": groups },
        "questionnaire": [{ "id": "q1", "prompt": "I feel safe here.", "dimension": "safety" }],
        "events": events,
    })
}

fn session(doc: Value, seed: u64) -> Session {
    let s: Scenario = serde_json::from_value(doc).unwrap();
    s.check().unwrap();
    Session::create("t", Arc::new(s), Arc::new(lexicon()), seed, "mock").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rounds_respect_occupancy_and_budgets(seed in any::<u64>(), agents in 2usize..10, side in 5i32..9) {
        let mut s = session(doc(side, agents, vec![]), seed);
        let budget = s.scenario().config.move_budget as u32;
        let mut backend = MockBackend::new(seed, s.scenario().config.embed_dim);
        for _ in 0..6 {
            let before: BTreeMap<AgentId, Coord> = s.engine().state().agents.values().map(|a| (a.id.clone(), a.position)).collect();
            let r = s.step(&mut backend).clone();
            let subs: BTreeSet<&AgentId> = r.submissions.iter().map(|x| &x.agent).collect();
            prop_assert_eq!(subs.len(), r.submissions.len());
            for d in &r.deltas {
                if let StateDelta::Moved { steps, .. } = d {
                    prop_assert!(*steps <= budget);
                }
            }
            for c in &r.chats {
                prop_assert!(word_count(&c.utterance) <= CHAT_WORD_LIMIT);
            }
            let mut taken = BTreeSet::new();
            for a in s.engine().state().agents.values() {
                prop_assert!(taken.insert(a.position), "two agents on {}", a.position);
                prop_assert!(s.map().is_walkable(a.position));
                prop_assert!(before[&a.id].manhattan(a.position) <= budget);
            }
        }
    }

    #[test]
    fn measurements_leave_state_untouched(seed in any::<u64>(), agents in 2usize..6) {
        let mut s = session(doc(6, agents, vec![]), seed);
        let mut backend = MockBackend::new(seed, s.scenario().config.embed_dim);
        s.run_until(3, &mut backend);
        let (digest, head) = (s.state_digest(), s.log().head().to_string());
        let first = s.agent_ids()[0].clone();
        s.interview(&first, "How are you?", &mut backend).unwrap();
        s.questionnaire(None, None, &mut backend).unwrap();
        s.trust(None, &first, &mut backend).unwrap();
        s.ambient_mood("Hall").unwrap();
        prop_assert_eq!(s.state_digest(), digest);
        prop_assert_eq!(s.log().head(), head.as_str());
        prop_assert_eq!(s.measurements().questionnaire.len(), agents);
    }

    #[test]
    fn logs_replay_to_the_same_digest(seed in any::<u64>(), agents in 2usize..6, rounds in 1u64..6) {
        let mut s = session(doc(6, agents, vec![]), seed);
        s.run_until(rounds, &mut MockBackend::new(seed, s.scenario().config.embed_dim));
        let report = replay(s.scenario_arc(), Arc::new(lexicon()), s.log()).unwrap();
        prop_assert!(report.divergence.is_none());
        prop_assert_eq!(report.final_digest, s.state_digest());
    }

    #[test]
    fn heatmap_and_engagement_agree_with_a_log_scan(seed in any::<u64>(), agents in 2usize..8) {
        let mut s = session(doc(5, agents, vec![]), seed);
        let rounds = 5;
        s.run_until(rounds, &mut MockBackend::new(seed, s.scenario().config.embed_dim));
        let groups = s.group_of();
        let labels = s.group_labels();
        let m = dialogue_heatmap(s.log(), &groups, &labels).unwrap();
        let mut want: BTreeMap<(String, String), u64> = BTreeMap::new();
        for r in s.log().rounds() {
            for c in &r.chats {
                for t in &c.targets {
                    *want.entry((groups[&c.speaker].clone(), groups[t].clone())).or_default() += 1;
                }
            }
        }
        for from in &labels {
            for to in &labels {
                prop_assert_eq!(m.get(from, to), Some(want.get(&(from.clone(), to.clone())).copied().unwrap_or(0)));
            }
        }
        let first = s.agent_ids()[0].clone();
        let e = engagement_count(s.log(), &first).unwrap();
        prop_assert_eq!(e.len() as u64, rounds);
        prop_assert!(e.iter().all(|n| *n < agents as u64));
    }

    #[test]
    fn event_chains_terminate(n in 1usize..12, edges in prop::collection::vec(0usize..12, 12), seed in any::<u64>()) {
        let mut events = vec![json!({
            "id": "e0", "activation": { "kind": "scheduled", "round": 0 }, "once": false,
            "effects": [{ "select": { "object": "bell" }, "verb": "add", "label": "s0" }],
        })];
        for i in 1..=n {
            events.push(json!({
                "id": format!("e{i}"), "once": false,
                "activation": { "kind": "existence", "state": format!("s{}", edges[i - 1] % n) },
                "effects": [{ "select": { "object": "bell" }, "verb": "add", "label": format!("s{i}") }],
            }));
        }
        let mut s = session(doc(5, 2, events), seed);
        let r = s.step(&mut MockBackend::new(seed, 8)).clone();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for f in &r.fired_events {
            *counts.entry(f.event.as_str()).or_default() += 1;
        }
        prop_assert!(counts.values().all(|c| *c == 1), "{:?}", counts);
        prop_assert!(r.fired_events.len() <= n + 1);
        prop_assert_eq!(counts.get("e0"), Some(&1));
    }

    #[test]
    fn exact_counts_reach_the_census(parts in prop::collection::vec(0u32..6, 2..5), seed in any::<u64>()) {
        let size: u32 = parts.iter().sum();
        prop_assume!(size > 0);
        let categories: Vec<Value> = parts.iter().enumerate().map(|(i, c)| json!({ "value": format!("c{i}"), "count": c })).collect();
        let spec: PopulationSpec = serde_json::from_value(json!({ "groups": [{
            "name": "G", "size": size, "long_term_goal_template": "live", "initial_region": "Hall",
            "occupations": ["clerk"],
            "distributions": [{ "name": "kind", "mode": "counts", "categories": categories }],
        }] })).unwrap();
        let roster = sample_population(&spec, seed, 5).unwrap();
        let records: Vec<_> = roster.into_iter().map(|a| a.record).collect();
        let census = roster_census(&records, &CensusLayout::from_spec(&spec));
        let mut pct = 0;
        for (i, want) in parts.iter().enumerate() {
            let row = census.row("kind", &format!("c{i}")).unwrap();
            prop_assert_eq!(row.total.count, *want);
            prop_assert_eq!(row.per_group[0].count, *want);
            pct += row.total.percent;
        }
        prop_assert_eq!(pct, 100);
    }

    #[test]
    fn vad_scores_stay_within_the_hit_rows(words in prop::collection::vec(prop::sample::select(vec!["happy", "angry", "calm", "tired", "the", "door", "Happy!", "calm,"]), 0..12)) {
        let lex = lexicon();
        let text = words.join(" ");
        let score = score_vad(&text, &lex);
        let hits: Vec<VadVector> = words.iter().filter_map(|w| lex.get(&w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())).collect();
        if hits.is_empty() {
            prop_assert_eq!(score, VadVector::ZERO);
        } else {
            let k = hits.len() as f64;
            let mean = |f: fn(&VadVector) -> f64| hits.iter().map(f).sum::<f64>() / k;
            prop_assert!((score.valence - mean(|v| v.valence)).abs() < 1e-12);
            prop_assert!((score.arousal - mean(|v| v.arousal)).abs() < 1e-12);
            prop_assert!((score.dominance - mean(|v| v.dominance)).abs() < 1e-12);
            for x in [score.valence, score.arousal, score.dominance] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
