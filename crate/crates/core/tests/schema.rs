mod common;

use common::*;
use fipsynth_core::io::{game_to_json, SCHEMA_VERSION};
use fipsynth_core::solve::synthesize;
use fipsynth_core::twotape::fip_to_2dfa;
use serde_json::Value;

fn schema() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path("schema.json")).unwrap()).unwrap()
}

/// Required keys present and no key outside `properties`, one level deep.
fn conforms(doc: &Value, def: &Value) -> Result<(), String> {
    let obj = doc.as_object().ok_or("not an object")?;
    let props = def["properties"].as_object().unwrap();
    for r in def["required"].as_array().unwrap() {
        let r = r.as_str().unwrap();
        if !obj.contains_key(r) {
            return Err(format!("missing {r}"));
        }
    }
    match obj.keys().find(|k| !props.contains_key(*k)) {
        Some(k) => Err(format!("undeclared {k}")),
        None => Ok(()),
    }
}

#[test]
fn versions_agree() {
    let s = schema();
    assert_eq!(s["schema_version"], SCHEMA_VERSION);
    for d in ["game", "two_tape", "strategy"] {
        assert_eq!(s["$defs"][d]["properties"]["schema_version"]["const"], SCHEMA_VERSION);
    }
}

#[test]
fn emitted_documents_conform() {
    let s = schema();
    let defs = &s["$defs"];
    let machine = &defs["machine"];
    for name in GAMES {
        let g = game(name);
        let doc: Value = serde_json::from_str(&game_to_json(&g)).unwrap();
        conforms(&doc, &defs["game"]).unwrap();
        conforms(&doc["coloring"], machine).unwrap();
        for o in doc["observers"].as_array().unwrap() {
            conforms(o, machine).unwrap();
        }
        let r = serde_json::to_value(fip_to_2dfa(&g).unwrap().to_file()).unwrap();
        conforms(&r, &defs["two_tape"]).unwrap();
    }
    for name in ["fig5c.json", "fig8.json", "fig9.json"] {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap();
        conforms(&doc, &defs["two_tape"]).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let st = synthesize(&game("sync-reach.json"), Default::default()).unwrap().strategy.unwrap();
    let doc = serde_json::to_value(st.to_file()).unwrap();
    conforms(&doc, &defs["strategy"]).unwrap();
    conforms(&doc["machine"], machine).unwrap();
}
