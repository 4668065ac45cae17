use std::path::PathBuf;

use serde_json::{json, Map, Value};

use kspace_forge::cli::config::{Config, EpiScheme, Scheme, SpiralScheme};

fn schema() -> Value {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.schema.json");
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => root.pointer(r.trim_start_matches('#')).unwrap_or_else(|| panic!("dangling {r}")),
        None => node,
    }
}

/// Schema branch describing `value`: object branches are matched by their required keys.
fn branch<'a>(root: &'a Value, node: &'a Value, value: &Value) -> Option<&'a Value> {
    let node = resolve(root, node);
    let Some(options) = node.get("oneOf").and_then(Value::as_array) else {
        return Some(node);
    };
    let obj = value.as_object()?;
    options.iter().map(|o| resolve(root, o)).find(|o| {
        o.get("properties").is_some()
            && o.get("required")
                .and_then(Value::as_array)
                .map_or(true, |req| req.iter().all(|k| obj.contains_key(k.as_str().unwrap())))
            && o.pointer("/properties/kind/const").map_or(true, |k| Some(k) == obj.get("kind"))
    })
}

fn set_path(doc: &mut Value, path: &[String], v: Value) {
    let mut cur = doc;
    for key in &path[..path.len() - 1] {
        cur = cur
            .as_object_mut()
            .unwrap()
            .entry(key.clone())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    cur.as_object_mut().unwrap().insert(path[path.len() - 1].clone(), v);
}

/// Walks `value` (serialized defaults) against the schema. Every field must be
/// documented, and every documented default, set alone, must reproduce `expected`.
fn walk(root: &Value, node: &Value, value: &Value, path: &mut Vec<String>, skeleton: &Value, expected: &Config, seen: &mut usize) {
    let Some(node) = branch(root, node, value) else {
        return;
    };
    let Some(props) = node.get("properties").and_then(Value::as_object) else {
        return;
    };
    let obj = value.as_object().unwrap_or_else(|| panic!("{} is not an object", path.join(".")));
    for key in obj.keys() {
        assert!(props.contains_key(key), "field {}.{key} is not in the schema", path.join("."));
    }
    for (key, prop) in props {
        if key == "kind" {
            continue;
        }
        path.push(key.clone());
        let actual = obj.get(key).unwrap_or_else(|| panic!("schema field {} is not serialized", path.join(".")));
        let prop = resolve(root, prop);
        if let Some(d) = prop.get("default") {
            let mut doc = skeleton.clone();
            set_path(&mut doc, path, d.clone());
            let parsed = Config::from_json(&doc.to_string()).unwrap_or_else(|e| panic!("{}: {e}", path.join(".")));
            assert_eq!(&parsed, expected, "default of {} disagrees", path.join("."));
            *seen += 1;
        }
        if path.as_slice() != ["scheme"] {
            walk(root, prop, actual, path, skeleton, expected, seen);
        }
        path.pop();
    }
}

#[test]
fn schema_defaults_match_config_defaults() {
    let root = schema();
    let scheme_branches = [
        ("tsp", Config::default()),
        ("epi", Config { scheme: Scheme::Epi(EpiScheme::default()), ..Config::default() }),
        ("spiral", Config { scheme: Scheme::Spiral(SpiralScheme::default()), ..Config::default() }),
    ];
    let mut seen = 0;
    let top = serde_json::to_value(Config::default()).unwrap();
    walk(&root, &root, &top, &mut Vec::new(), &json!({}), &Config::default(), &mut seen);
    for (kind, expected) in scheme_branches {
        let value = serde_json::to_value(&expected.scheme).unwrap();
        let skeleton = json!({ "scheme": { "kind": kind } });
        let node = root.pointer("/properties/scheme").unwrap();
        let node = branch(&root, node, &value).unwrap_or_else(|| panic!("no schema branch for {kind}"));
        walk(&root, node, &value, &mut vec!["scheme".into()], &skeleton, &expected, &mut seen);
    }
    assert!(seen > 40, "only {seen} defaults checked");
}

#[test]
fn schema_enums_parse() {
    for (field, values) in [
        ("/hardware/norm_mode", vec!["rotation_invariant", "rotation_variant"]),
        ("/scheme/draw_exponent", vec!["dimension_ratio", "identity", "tour_corrected"]),
        ("/scheme/parameterization", vec!["constant_speed", "time_optimal"]),
    ] {
        for v in values {
            let mut doc = json!({ "scheme": { "kind": "tsp" } });
            let path: Vec<String> = field.trim_start_matches('/').split('/').map(String::from).collect();
            set_path(&mut doc, &path, json!(v));
            Config::from_json(&doc.to_string()).unwrap_or_else(|e| panic!("{field} = {v}: {e}"));
        }
    }
    let root = schema();
    let listed = root.pointer("/$defs/tsp/properties/draw_exponent/enum").unwrap().as_array().unwrap().len();
    assert_eq!(listed, 3);
}
