mod support;

use gridsoc_core::decision::MockBackend;
use gridsoc_sim::export::{export_run, tables, EMOTIONS, MANIFEST, POSITIONS};
use serde_json::json;
use support::{floor_map, group, rect, scenario, session};

fn small_run() -> gridsoc_core::session::Session {
    let doc = json!({
        "name": "pair",
        "map": floor_map(4, 4, vec![json!({"name": "Room", "description": "a room", "cells": rect(0, 0, 3, 3)})], vec![]),
        "population": { "groups": [group("Pair", &["Ann Lee", "Ben Ode"], "Room")] },
    });
    let mut s = session(scenario(doc), 9);
    s.run_until(3, &mut MockBackend::new(9, 8));
    s
}

#[test]
fn positions_have_one_row_per_agent_round() {
    let s = small_run();
    let t = tables(&s).unwrap();
    let pos = t.iter().find(|t| t.name == POSITIONS).unwrap();
    assert_eq!(pos.header()[0], "round");
    assert_eq!(pos.rows().len(), 6);
}

#[test]
fn overall_is_vad_sum() {
    let s = small_run();
    let t = tables(&s).unwrap();
    let emo = t.iter().find(|t| t.name == EMOTIONS).unwrap();
    assert!(!emo.rows().is_empty());
    for r in emo.rows() {
        let f: Vec<f64> = r[2..].iter().map(|x| x.parse().unwrap()).collect();
        assert!((f[0] + f[1] + f[2] - f[3]).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn reexport_is_byte_identical() {
    let s = small_run();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = export_run(&s, a.path()).unwrap();
    let mb = export_run(&s, b.path()).unwrap();
    assert_eq!(ma, mb);
    for f in &ma.files {
        assert_eq!(std::fs::read(a.path().join(&f.name)).unwrap(), std::fs::read(b.path().join(&f.name)).unwrap());
    }
    assert_eq!(std::fs::read(a.path().join(MANIFEST)).unwrap(), std::fs::read(b.path().join(MANIFEST)).unwrap());
    assert_eq!(ma.file(POSITIONS).unwrap().rows, 6);
}
