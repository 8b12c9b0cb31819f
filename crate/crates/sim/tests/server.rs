mod support;

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use gridsoc_sim::server::{serve, Hub, ServerConfig, MESSAGE_TYPES};
use serde_json::{json, Value};
use support::{floor_map, furniture, group, item, rect};

struct Client {
    out: TcpStream,
    lines: BufReader<TcpStream>,
    seq: u64,
}

impl Client {
    fn connect() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hub = Hub::new(ServerConfig::default());
        thread::spawn(move || serve(listener, hub));
        let out = TcpStream::connect(addr).unwrap();
        out.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
        Self { lines: BufReader::new(out.try_clone().unwrap()), out, seq: 0 }
    }

    fn next(&mut self) -> Value {
        let mut line = String::new();
        self.lines.read_line(&mut line).expect("server line");
        serde_json::from_str(&line).expect("json line")
    }

    fn send(&mut self, kind: &str, session: Option<&str>, payload: Value) -> u64 {
        self.seq += 1;
        let msg = json!({ "type": kind, "session": session, "payload": payload, "seq": self.seq });
        writeln!(self.out, "{msg}").unwrap();
        self.seq
    }

    /// Sends a request and returns its reply, collecting pushes seen meanwhile.
    fn call(&mut self, kind: &str, session: Option<&str>, payload: Value, pushes: &mut Vec<Value>) -> Value {
        let seq = self.send(kind, session, payload);
        loop {
            let v = self.next();
            if v["seq"] == seq && !is_push(&v) {
                return v;
            }
            pushes.push(v);
        }
    }

    fn wait_finished(&mut self, pushes: &mut Vec<Value>) -> Value {
        loop {
            let v = self.next();
            if v["type"] == "run_control" && v["payload"]["finished"] == true {
                return v;
            }
            pushes.push(v);
        }
    }
}

fn is_push(v: &Value) -> bool {
    v["type"] == "perception" && v["payload"].get("round").is_some()
        || v["type"] == "run_control" && v["payload"].get("finished").is_some()
}

fn kitchen() -> Value {
    json!({
        "name": "kitchen",
        "map": floor_map(6, 6, vec![
            json!({"name": "Kitchen", "description": "a kitchen", "cells": rect(0, 0, 2, 5)}),
            json!({"name": "Pantry", "description": "a pantry", "cells": rect(3, 0, 5, 5)}),
        ], vec![
            item("apple", "Apple", [1, 1]),
            item("soap", "Soap", [0, 2]),
            item("cup", "Cup", [2, 2]),
            furniture("stove", "Stove", [0, 0]),
            furniture("box", "Box", [2, 0]),
        ]),
        "population": { "groups": [group("Pair", &["Ann Lee", "Ben Ode"], "Kitchen")] },
    })
}

#[test]
fn protocol_round_trip() {
    let mut c = Client::connect();
    let mut pushes = Vec::new();
    let created = c.call("create_session", None, json!({ "scenario_doc": kitchen(), "seed": 5 }), &mut pushes);
    assert_eq!(created["type"], "create_session", "{created}");
    let id = created["payload"]["session"].as_str().unwrap().to_string();
    let sid = Some(id.as_str());

    let attached = c.call("attach", sid, json!({ "human": "h", "target": { "by": "agent", "id": "pair-01" } }), &mut pushes);
    assert_eq!(attached["payload"]["handle"]["agent"], "pair-01", "{attached}");
    assert!(attached["payload"]["perception"].is_object());

    let forms = [
        "go to Pantry",
        "go to Kitchen",
        "take Apple",
        "use Stove",
        "apply Soap to Cup",
        "put Apple in Box",
        "give Apple to pair-02",
        "chat with pair-02: good morning",
    ];
    for text in forms {
        let r = c.call("submit", sid, json!({ "agent": "pair-01", "text": text }), &mut pushes);
        assert_eq!(r["type"], "submit", "{text}: {r}");
        assert!(r["payload"]["receipt_seq"].is_u64());
        let r = c.call("run_control", sid, json!({ "command": "step", "n": 1 }), &mut pushes);
        assert_eq!(r["payload"]["accepted"], true, "{r}");
        c.wait_finished(&mut pushes);
    }
    let seen: Vec<&Value> = pushes.iter().filter(|p| p["type"] == "perception" && p["payload"]["agent"] == "pair-01").collect();
    assert_eq!(seen.len(), forms.len());
    assert!(seen.iter().all(|p| p["payload"]["perception"].is_object()));

    let long = vec!["word"; 31].join(" ");
    let r = c.call("submit", sid, json!({ "agent": "pair-01", "text": format!("chat with pair-02: {long}") }), &mut pushes);
    assert_eq!(r["type"], "error");
    assert_eq!(r["payload"]["words"], 31);

    let before = c.call("state_snapshot", sid, json!({}), &mut pushes);
    let digest = before["payload"]["snapshot"]["state_digest"].clone();
    assert!(digest.is_string());
    let r = c.call("interview", sid, json!({ "agent": "pair-02", "question": "How is your day?" }), &mut pushes);
    assert_eq!(r["type"], "interview", "{r}");
    assert_eq!(r["payload"]["state_digest"], digest);
    let r = c.call("questionnaire", sid, json!({ "trust_target": "pair-01" }), &mut pushes);
    assert_eq!(r["payload"]["state_digest"], digest, "{r}");
    let after = c.call("state_snapshot", sid, json!({}), &mut pushes);
    assert_eq!(after["payload"]["snapshot"]["state_digest"], digest);

    let r = c.call("state_snapshot", Some("no-such-session"), json!({}), &mut pushes);
    assert_eq!(r["type"], "error");
    let r = c.call("submit", sid, json!({ "agent": "pair-01" }), &mut pushes);
    assert_eq!(r["type"], "error");
}

#[test]
fn slot_attach_spawns_worker() {
    let mut c = Client::connect();
    let mut pushes = Vec::new();
    let created = c.call("create_session", None, json!({ "scenario": "study3_cafe", "seed": 1 }), &mut pushes);
    let id = created["payload"]["session"].as_str().unwrap().to_string();
    let before = created["payload"]["agents"].as_array().unwrap().len();
    let r = c.call(
        "attach",
        Some(&id),
        json!({ "human": "h", "target": { "by": "slot", "group": "Temporary Worker" } }),
        &mut pushes,
    );
    let agent = r["payload"]["handle"]["agent"].as_str().expect("spawned agent").to_string();
    assert!(!created["payload"]["agents"].as_array().unwrap().iter().any(|a| a == agent.as_str()));
    let snap = c.call("state_snapshot", Some(&id), json!({}), &mut pushes);
    assert!(!snap["payload"]["ambient_mood"].is_null());
    assert_eq!(snap["payload"]["snapshot"]["agents"].as_array().unwrap().len(), before + 1);
}

#[test]
fn message_types_round_trip() {
    for t in MESSAGE_TYPES {
        let v: gridsoc_sim::server::Envelope = serde_json::from_value(json!({ "type": t, "payload": {} })).unwrap();
        assert_eq!(serde_json::to_value(v).unwrap()["type"], t);
    }
}
