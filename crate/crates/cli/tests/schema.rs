use lane_emden_cli::{emit_config, Command, RunConfig, Tolerances};
use serde_json::Value;
use std::collections::BTreeSet;

const SCHEMA: &str = include_str!("../../../docs/run-config.schema.json");

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn published_schema_lists_every_config_key() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let mut cfg = RunConfig::new(Command::Reduce, 4);
    cfg.m = Some(0);
    cfg.out = Some("x".into());
    let emitted: Value = serde_json::from_str(&emit_config(&cfg)).unwrap();
    assert_eq!(keys(&schema["properties"]), keys(&emitted));
    assert_eq!(
        keys(&schema["properties"]["tolerances"]["properties"]),
        keys(&emitted["tolerances"])
    );
}

#[test]
fn schema_defaults_match_the_code() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let props = &schema["properties"];
    let cfg = RunConfig::new(Command::RadialLab, 3);
    let emitted: Value = serde_json::from_str(&emit_config(&cfg)).unwrap();
    for key in ["epsilons", "core_count", "outer_count", "levels"] {
        assert_eq!(props[key]["default"], emitted[key], "{key}");
    }
    let tol: Value = serde_json::to_value(Tolerances::default()).unwrap();
    for (key, v) in tol.as_object().unwrap() {
        assert_eq!(
            &props["tolerances"]["properties"][key]["default"], v,
            "tolerances.{key}"
        );
    }
}
